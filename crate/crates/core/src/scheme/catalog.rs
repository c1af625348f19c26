use std::sync::LazyLock;

use super::{
    CqKind, CqTarget, CriticalQuestion, PremiseTemplate, SchemeDefinition, StatementTemplate,
    ABDUCTIVE, CLUSTER_BY_CHANGE, CLUSTER_FROM_MULTI_INPUT, CLUSTER_FROM_SOFTWARE,
    POSITION_TO_KNOW, SIGN, SUSPICION,
};
use crate::statement::Predicate;

fn atom(text: &str, predicate: Predicate, vars: &[&str]) -> PremiseTemplate {
    PremiseTemplate {
        text: text.to_owned(),
        template: StatementTemplate::Atom {
            predicate,
            variables: vars.iter().map(|v| v.to_string()).collect(),
        },
    }
}

fn prop(text: &str, var: &str) -> PremiseTemplate {
    PremiseTemplate {
        text: text.to_owned(),
        template: StatementTemplate::Proposition {
            variable: var.to_owned(),
        },
    }
}

fn cqs(items: &[(&str, CqKind, CqTarget)]) -> Vec<CriticalQuestion> {
    items
        .iter()
        .enumerate()
        .map(|(i, (text, kind, target))| CriticalQuestion {
            cq_id: format!("cq{}", i + 1),
            text: (*text).to_owned(),
            kind: *kind,
            target: *target,
        })
        .collect()
}

use CqKind::{Assumption, Exception, Supportive};
use CqTarget::{Applicability, Conclusion, Premise};
use Predicate::*;

static CATALOG: LazyLock<Vec<SchemeDefinition>> = LazyLock::new(|| {
    vec![
        SchemeDefinition {
            scheme_id: SUSPICION.into(),
            name: "Suspicion through Address Control".into(),
            custom: true,
            premises: vec![
                atom("Address A is connected to offence O", Connected, &["A", "O"]),
                atom("Entity E controls address A", Controls, &["E", "A"]),
            ],
            conclusion: atom("Entity E is connected to offence O", Connected, &["E", "O"]),
            cqs: cqs(&[
                ("Which circumstantial evidence indicates that entity E controls address A?", Assumption, Premise(1)),
                ("Could it be that at the time of offence O someone else controlled address A instead of entity E?", Exception, Premise(1)),
                ("How was address A connected to offence O that E's involvement is indicated?", Supportive, Premise(0)),
                ("Are there other indicators that E is connect to offence O?", Supportive, Conclusion),
            ]),
        },
        SchemeDefinition {
            scheme_id: CLUSTER_FROM_SOFTWARE.into(),
            name: "Cluster from Software".into(),
            custom: true,
            premises: vec![
                atom("Software S establishes a link between address A1 and address A2", Links, &["S", "A1", "A2"]),
                atom("Software S is reliable", Reliable, &["S"]),
                atom("Entity E controls address A1", Controls, &["E", "A1"]),
            ],
            conclusion: atom("Entity E controls address A2", Controls, &["E", "A2"]),
            cqs: cqs(&[
                ("How does software S establish the link?", Exception, Premise(0)),
                ("How reliable is software S? Why is software S considered reliable?", Assumption, Premise(1)),
                ("Could this link be also established without the use of software S, e.g. by using a different software, human-reasoning with the multi-input heuristic, or other non-blackbox methods?", Exception, Applicability),
                ("What evidence exists for entity E controlling A1?", Assumption, Premise(2)),
                ("Are there other indicators that E might control A2?", Supportive, Conclusion),
            ]),
        },
        SchemeDefinition {
            scheme_id: CLUSTER_FROM_MULTI_INPUT.into(),
            name: "Cluster from Multi-Input".into(),
            custom: true,
            premises: vec![
                atom("Transaction T has multiple input addresses", CoSpent, &["T", "A", "B"]),
                atom("Entity E controls some input addresses of T", Controls, &["E", "A"]),
            ],
            conclusion: atom("Entity E controls all input addresses of T", Controls, &["E", "B"]),
            cqs: cqs(&[
                ("Could T be a CoinJoin transaction?", Exception, Applicability),
                ("Could it be that another entity F shares secret keys with E and thereby can control other or all inputs of T?", Exception, Applicability),
                ("Which input addresses of transaction T does entity E control? What evidence is there for E controlling these addresses?", Assumption, Premise(1)),
                ("Are there other indicators that E might control other input addresses of T?", Supportive, Conclusion),
            ]),
        },
        SchemeDefinition {
            scheme_id: CLUSTER_BY_CHANGE.into(),
            name: "Cluster by Change-Address".into(),
            custom: true,
            premises: vec![
                atom("Transaction T has multiple output addresses", MultiOutput, &["T"]),
                atom("Output address C is a change address of transaction T", IsChange, &["T", "C"]),
                atom("Entity E controls all input addresses of T", Controls, &["E", "A"]),
            ],
            conclusion: atom("Entity E also controls change address C", Controls, &["E", "C"]),
            cqs: cqs(&[
                ("Could T just have multiple distinct benefactors? Could the change for example be donated to a supported unrelated entity?", Exception, Premise(1)),
                ("What evidence is there suggesting that client software was used which generates a fresh change address for every new transaction?", Assumption, Premise(1)),
                ("Are there other indicators that E controls address C?", Supportive, Conclusion),
            ]),
        },
        SchemeDefinition {
            scheme_id: POSITION_TO_KNOW.into(),
            name: "Argument from Position to Know".into(),
            custom: false,
            premises: vec![
                atom("Source a is in a position to know about things in a certain subject domain S containing proposition A.", PositionToKnow, &["a", "S"]),
                atom("a asserts that A is true (false).", Asserts, &["a", "A"]),
            ],
            conclusion: prop("A is true (false).", "A"),
            cqs: cqs(&[
                ("Is a in a position to know whether A is true (false)?", Assumption, Premise(0)),
                ("Is a an honest (trustworthy, reliable) source?", Exception, Applicability),
                ("Did a assert that A is true (false)?", Assumption, Premise(1)),
            ]),
        },
        SchemeDefinition {
            scheme_id: SIGN.into(),
            name: "Argument from Sign".into(),
            custom: false,
            premises: vec![
                prop("A (a finding) is true in this situation.", "A"),
                atom("B is generally indicated as true when its sign, A, is true.", SignOf, &["A", "B"]),
            ],
            conclusion: prop("B is true in this situation.", "B"),
            cqs: cqs(&[
                ("What is the strength of the correlation of the sign with the event signified?", Assumption, Premise(1)),
                ("Are there other events that would more reliably account for the sign?", Exception, Applicability),
            ]),
        },
        SchemeDefinition {
            scheme_id: ABDUCTIVE.into(),
            name: "Argument from Abductive Inference".into(),
            custom: false,
            premises: vec![
                atom("F is a finding or given set of facts.", Finding, &["F"]),
                atom("E is a satisfactory explanation of F.", Explains, &["E", "F"]),
                atom("No alternative explanation E' given so far is as satisfactory as E.", BestExplanation, &["E", "F"]),
            ],
            conclusion: prop("Therefore, E is plausible as hypothesis.", "E"),
            cqs: cqs(&[
                ("How satisfactory is E as an explanation of F, apart from the alternative explanations available so far in the dialogue?", Assumption, Premise(1)),
                ("How much better an explanation is E than the alternative explanations available so far in the dialogue?", Assumption, Premise(2)),
                ("How far has the dialogue progressed? If the dialogue is an inquiry, how thorough has the investigation of the case been?", Supportive, Applicability),
                ("Would it be better to continue the dialogue further, instead of drawing a conclusion at this point?", Supportive, Applicability),
            ]),
        },
    ]
});

/// The full scheme catalog, custom schemes first.
pub fn catalog() -> &'static [SchemeDefinition] {
    &CATALOG
}

pub fn scheme(scheme_id: &str) -> Option<&'static SchemeDefinition> {
    CATALOG.iter().find(|s| s.scheme_id == scheme_id)
}

pub fn scheme_ids() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|s| s.scheme_id.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statement::ArgKind;

    #[test]
    fn seven_schemes_four_custom() {
        assert_eq!(catalog().len(), 7);
        assert_eq!(catalog().iter().filter(|s| s.custom).count(), 4);
    }

    #[test]
    fn multi_input_shape() {
        let s = scheme(CLUSTER_FROM_MULTI_INPUT).unwrap();
        assert_eq!(s.premises.len(), 2);
        assert_eq!(s.cqs.len(), 4);
        assert_eq!(s.cqs[0].text, "Could T be a CoinJoin transaction?");
        assert_eq!(s.cqs[0].kind, CqKind::Exception);
    }

    #[test]
    fn suspicion_and_software_texts() {
        let s = scheme(SUSPICION).unwrap();
        assert!(s.cqs[0]
            .text
            .starts_with("Which circumstantial evidence indicates"));
        let sw = scheme(CLUSTER_FROM_SOFTWARE).unwrap();
        assert_eq!(sw.premises.len(), 3);
        assert!(sw
            .premises
            .iter()
            .any(|p| p.text == "Software S is reliable"));
    }

    #[test]
    fn cq_kind_assignment() {
        let kinds =
            |id: &str| -> Vec<CqKind> { scheme(id).unwrap().cqs.iter().map(|q| q.kind).collect() };
        assert_eq!(
            kinds(SUSPICION),
            [Assumption, Exception, Supportive, Supportive]
        );
        assert_eq!(
            kinds(CLUSTER_FROM_SOFTWARE),
            [Exception, Assumption, Exception, Assumption, Supportive]
        );
        assert_eq!(
            kinds(CLUSTER_FROM_MULTI_INPUT),
            [Exception, Exception, Assumption, Supportive]
        );
        assert_eq!(
            kinds(CLUSTER_BY_CHANGE),
            [Exception, Assumption, Supportive]
        );
    }

    #[test]
    fn templates_are_well_formed() {
        for s in catalog() {
            let premise_vars: Vec<&str> = s
                .premises
                .iter()
                .flat_map(|p| p.template.variables())
                .collect();
            for v in s.conclusion.template.variables() {
                assert!(
                    premise_vars.contains(&v),
                    "{}: {v} only in conclusion",
                    s.scheme_id
                );
            }
            for p in s.premises.iter().chain([&s.conclusion]) {
                if let StatementTemplate::Atom {
                    predicate,
                    variables,
                } = &p.template
                {
                    assert_eq!(predicate.arity(), variables.len(), "{}", s.scheme_id);
                }
            }
            for q in &s.cqs {
                if let CqTarget::Premise(i) = q.target {
                    assert!(i < s.premises.len());
                }
            }
            // a variable is never used both as constant and as proposition
            for v in s.variables() {
                let kinds: std::collections::BTreeSet<ArgKind> = s
                    .premises
                    .iter()
                    .chain([&s.conclusion])
                    .flat_map(|p| match &p.template {
                        StatementTemplate::Atom {
                            predicate,
                            variables,
                        } => variables
                            .iter()
                            .zip(predicate.signature())
                            .filter(|(x, _)| x.as_str() == v)
                            .map(|(_, k)| *k)
                            .collect::<Vec<_>>(),
                        StatementTemplate::Proposition { variable } if variable == v => {
                            vec![ArgKind::Proposition]
                        }
                        _ => vec![],
                    })
                    .collect();
                assert_eq!(kinds.len(), 1, "{} variable {v}", s.scheme_id);
            }
        }
    }
}
