use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    scheme, Answer, Argument, CqState, CqStatus, SchemeDefinition, StatementTemplate, Support,
    CLUSTER_BY_CHANGE, CLUSTER_FROM_MULTI_INPUT,
};
use crate::case::{CaseFile, CqAnswer};
use crate::chain::TransactionSet;
use crate::error::SchemeError;
use crate::heuristics::{detect_change_output, detect_coinjoin};
use crate::statement::{normalise_arg, ArgKind, Predicate, Statement};

/// Builder for a single scheme instantiation.
#[derive(Debug, Clone)]
pub struct Instantiation {
    scheme_id: String,
    bindings: BTreeMap<String, String>,
    arg_id: Option<String>,
    supports: BTreeMap<usize, Support>,
}

impl Instantiation {
    pub fn new<I, K, V>(scheme_id: &str, bindings: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Self {
            scheme_id: scheme_id.to_owned(),
            bindings: bindings
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            arg_id: None,
            supports: BTreeMap::new(),
        }
    }

    pub fn id(mut self, arg_id: &str) -> Self {
        self.arg_id = Some(arg_id.to_owned());
        self
    }

    /// Pins the support of one premise instead of resolving it automatically.
    pub fn support(mut self, premise: usize, support: Support) -> Self {
        self.supports.insert(premise, support);
        self
    }

    pub fn apply(self, case: &mut CaseFile) -> Result<Argument, SchemeError> {
        let def = scheme(&self.scheme_id)
            .ok_or_else(|| SchemeError::UnknownScheme(self.scheme_id.clone()))?;
        let bindings = normalise_bindings(def, &self.bindings)?;
        let premises: Vec<Statement> = def
            .premises
            .iter()
            .map(|p| fill(&p.template, &bindings))
            .collect::<Result<_, _>>()?;
        let conclusion = fill(&def.conclusion.template, &bindings)?;

        let arg_id = match self.arg_id {
            Some(id) => {
                if !valid_id(&id) || case.argument(&id).is_some() {
                    return Err(SchemeError::BadArgumentId(id));
                }
                id
            }
            None => fresh_id(case, "arg"),
        };

        let mut premise_support = Vec::with_capacity(premises.len());
        for (i, p) in premises.iter().enumerate() {
            let support = match self.supports.get(&i) {
                Some(s) => {
                    check_support(case, i, p, s)?;
                    s.clone()
                }
                None => find_support(case, p).ok_or_else(|| SchemeError::Ungrounded {
                    index: i,
                    premise: p.to_string(),
                })?,
            };
            premise_support.push(support);
        }

        let arg = Argument {
            arg_id,
            scheme_id: def.scheme_id.clone(),
            bindings,
            premises,
            conclusion,
            premise_support,
            cq_state: def
                .cqs
                .iter()
                .map(|q| (q.cq_id.clone(), CqState::open()))
                .collect(),
        };
        case.arguments.push(arg.clone());
        Ok(arg)
    }
}

/// Instantiates a scheme with automatically resolved premise support.
pub fn instantiate(
    case: &mut CaseFile,
    scheme_id: &str,
    bindings: &BTreeMap<String, String>,
) -> Result<Argument, SchemeError> {
    Instantiation::new(scheme_id, bindings.clone()).apply(case)
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn fresh_id(case: &CaseFile, prefix: &str) -> String {
    (1..)
        .map(|n| format!("{prefix}-{n}"))
        .find(|id| case.argument(id).is_none())
        .expect("unbounded id space")
}

fn variable_kind(def: &SchemeDefinition, var: &str) -> ArgKind {
    for t in def.premises.iter().chain([&def.conclusion]) {
        match &t.template {
            StatementTemplate::Proposition { variable } if variable == var => {
                return ArgKind::Proposition
            }
            StatementTemplate::Atom {
                predicate,
                variables,
            } => {
                if let Some(i) = variables.iter().position(|v| v == var) {
                    return predicate.signature()[i];
                }
            }
            _ => {}
        }
    }
    ArgKind::Constant
}

fn normalise_bindings(
    def: &SchemeDefinition,
    raw: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, String>, SchemeError> {
    let vars = def.variables();
    if let Some(extra) = raw.keys().find(|k| !vars.contains(&k.as_str())) {
        return Err(SchemeError::UnknownVariable {
            scheme: def.scheme_id.clone(),
            variable: extra.clone(),
        });
    }
    let mut out = BTreeMap::new();
    for v in vars {
        let value = raw.get(v).ok_or_else(|| SchemeError::Unbound {
            scheme: def.scheme_id.clone(),
            variable: v.to_owned(),
        })?;
        let norm = normalise_arg(value, variable_kind(def, v)).map_err(|source| {
            SchemeError::BadBinding {
                variable: v.to_owned(),
                source,
            }
        })?;
        out.insert(v.to_owned(), norm);
    }
    Ok(out)
}

/// Substitutes bindings into a template.
pub(crate) fn fill(
    template: &StatementTemplate,
    bindings: &BTreeMap<String, String>,
) -> Result<Statement, SchemeError> {
    let lookup = |v: &str| {
        bindings
            .get(v)
            .cloned()
            .ok_or_else(|| SchemeError::Unbound {
                scheme: String::new(),
                variable: v.to_owned(),
            })
    };
    match template {
        StatementTemplate::Atom {
            predicate,
            variables,
        } => {
            let args = variables
                .iter()
                .map(|v| lookup(v))
                .collect::<Result<Vec<_>, _>>()?;
            Statement::new(*predicate, args).map_err(|source| SchemeError::BadBinding {
                variable: variables.join(","),
                source,
            })
        }
        StatementTemplate::Proposition { variable } => {
            lookup(variable)?
                .parse()
                .map_err(|source| SchemeError::BadBinding {
                    variable: variable.clone(),
                    source,
                })
        }
    }
}

fn find_support(case: &CaseFile, premise: &Statement) -> Option<Support> {
    if let Some(e) = case.evidence.iter().find(|e| &e.statement == premise) {
        return Some(Support::Evidence(e.evidence_id.clone()));
    }
    case.arguments
        .iter()
        .find(|a| &a.conclusion == premise)
        .map(|a| Support::Argument(a.arg_id.clone()))
}

fn check_support(
    case: &CaseFile,
    index: usize,
    premise: &Statement,
    support: &Support,
) -> Result<(), SchemeError> {
    let established = match support {
        Support::Evidence(id) => case.evidence_item(id).map(|e| &e.statement),
        Support::Argument(id) => case.argument(id).map(|a| &a.conclusion),
    };
    if established == Some(premise) {
        Ok(())
    } else {
        Err(SchemeError::SupportMismatch {
            index,
            premise: premise.to_string(),
            support: support.to_string(),
        })
    }
}

/// Arguments that `arg_id` transitively rests on.
pub(crate) fn support_closure(case: &CaseFile, arg_id: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![arg_id.to_owned()];
    while let Some(id) = stack.pop() {
        if let Some(a) = case.argument(&id) {
            for s in a.supporting_arguments() {
                if seen.insert(s.to_owned()) {
                    stack.push(s.to_owned());
                }
            }
        }
    }
    seen
}

/// Re-points one premise at a different support; rejects cycles.
pub fn set_premise_support(
    case: &mut CaseFile,
    arg_id: &str,
    premise: usize,
    support: Support,
) -> Result<(), SchemeError> {
    let arg = case
        .argument(arg_id)
        .ok_or_else(|| SchemeError::ArgumentNotFound(arg_id.to_owned()))?;
    let statement = arg
        .premises
        .get(premise)
        .cloned()
        .ok_or_else(|| SchemeError::Ungrounded {
            index: premise,
            premise: String::from("<no such premise>"),
        })?;
    check_support(case, premise, &statement, &support)?;
    if let Support::Argument(target) = &support {
        if target == arg_id || support_closure(case, target).contains(arg_id) {
            return Err(SchemeError::Cycle(target.clone()));
        }
    }
    case.argument_mut(arg_id).expect("checked").premise_support[premise] = support;
    Ok(())
}

/// Records an answer to a critical question. Answers can be revised; every
/// answer is appended to the case's answer log.
pub fn answer_cq(
    case: &mut CaseFile,
    arg_id: &str,
    cq_id: &str,
    answer: Answer,
    justification: &str,
) -> Result<(), SchemeError> {
    let arg = case
        .argument_mut(arg_id)
        .ok_or_else(|| SchemeError::ArgumentNotFound(arg_id.to_owned()))?;
    let def =
        scheme(&arg.scheme_id).ok_or_else(|| SchemeError::UnknownScheme(arg.scheme_id.clone()))?;
    if def.cq(cq_id).is_none() {
        return Err(SchemeError::CqNotFound {
            arg: arg_id.to_owned(),
            cq: cq_id.to_owned(),
        });
    }
    arg.cq_state.insert(
        cq_id.to_owned(),
        CqState {
            status: answer.into(),
            justification: justification.to_owned(),
        },
    );
    case.cq_answers.push(CqAnswer {
        arg_id: arg_id.to_owned(),
        cq_id: cq_id.to_owned(),
        answer,
        justification: justification.to_owned(),
    });
    Ok(())
}

/// Removes an argument nobody else relies on, along with its answer log.
pub fn remove_argument(case: &mut CaseFile, arg_id: &str) -> Result<Argument, SchemeError> {
    let pos = case
        .arguments
        .iter()
        .position(|a| a.arg_id == arg_id)
        .ok_or_else(|| SchemeError::ArgumentNotFound(arg_id.to_owned()))?;
    let dependents: Vec<String> = case
        .arguments
        .iter()
        .filter(|a| a.supporting_arguments().any(|s| s == arg_id))
        .map(|a| a.arg_id.clone())
        .collect();
    if !dependents.is_empty() {
        return Err(SchemeError::HasDependents {
            arg: arg_id.to_owned(),
            dependents,
        });
    }
    case.cq_answers.retain(|a| a.arg_id != arg_id);
    Ok(case.arguments.remove(pos))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenCq {
    pub arg_id: String,
    pub cq_id: String,
    pub text: String,
}

/// Unanswered questions, by argument order then question order.
pub fn list_open_cqs(case: &CaseFile) -> Vec<OpenCq> {
    let mut out = Vec::new();
    for arg in &case.arguments {
        let Some(def) = arg.scheme() else { continue };
        for q in &def.cqs {
            if arg.cq_status(&q.cq_id) == CqStatus::Open {
                out.push(OpenCq {
                    arg_id: arg.arg_id.clone(),
                    cq_id: q.cq_id.clone(),
                    text: q.text.clone(),
                });
            }
        }
    }
    out
}

fn controls(entity: &str, address: &str) -> Statement {
    Statement::new(Predicate::Controls, [entity, address]).expect("controls/2")
}

fn ensure_chain_evidence(
    case: &mut CaseFile,
    statement: Statement,
    obtained_via: String,
) -> Support {
    let id = format!("chain:{statement}");
    if case.evidence_item(&id).is_none() {
        case.add_evidence(&id, statement, "transaction graph", &obtained_via);
    }
    Support::Evidence(id)
}

fn has_instance(case: &CaseFile, scheme_id: &str, bindings: &BTreeMap<String, String>) -> bool {
    case.arguments
        .iter()
        .any(|a| a.scheme_id == scheme_id && &a.bindings == bindings)
}

/// Applies the multi-input and change-address schemes wherever the chain and
/// the case's control statements allow, until nothing new can be derived.
pub fn auto_instantiate(case: &mut CaseFile, ts: &TransactionSet) -> Vec<Argument> {
    let params = case.heuristics;
    let mut created = Vec::new();
    loop {
        let before = created.len();
        // entity -> addresses it is said to control
        let mut control: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let asserted = case
            .evidence
            .iter()
            .map(|e| &e.statement)
            .chain(case.arguments.iter().map(|a| &a.conclusion));
        for s in asserted {
            if s.predicate == Predicate::Controls && !s.negated {
                control
                    .entry(s.args[0].clone())
                    .or_default()
                    .insert(s.args[1].clone());
            }
        }

        for (pos, tx) in ts.transactions().iter().enumerate() {
            if tx.is_coinbase {
                continue;
            }
            let inputs = ts.distinct_input_addresses(pos);
            let verdict = detect_coinjoin(tx, ts, &params);
            let multi_ok =
                inputs.len() >= 2 && !(params.apply_coinjoin_filter && verdict.is_coinjoin);
            let change = detect_change_output(tx, ts, &params);

            for (entity, owned) in &control {
                let controlled: Vec<&str> = inputs
                    .iter()
                    .copied()
                    .filter(|a| owned.contains(*a))
                    .collect();
                let Some(&anchor) = controlled.first() else {
                    continue;
                };

                if multi_ok {
                    for &other in inputs.iter().filter(|&&b| b != anchor) {
                        let conclusion = controls(entity, other);
                        if case.holds(&conclusion) {
                            continue;
                        }
                        let bindings: BTreeMap<String, String> = [
                            ("T", tx.txid.as_str()),
                            ("A", anchor),
                            ("B", other),
                            ("E", entity.as_str()),
                        ]
                        .into_iter()
                        .map(|(k, v)| (k.to_owned(), v.to_owned()))
                        .collect();
                        if has_instance(case, CLUSTER_FROM_MULTI_INPUT, &bindings) {
                            continue;
                        }
                        let co_spent =
                            Statement::new(Predicate::CoSpent, [tx.txid.as_str(), anchor, other])
                                .expect("co_spent/3");
                        let ev = ensure_chain_evidence(
                            case,
                            co_spent,
                            format!(
                                "multi-input heuristic: {anchor} and {other} are inputs of {}; coinjoin check: {}",
                                tx.txid, verdict.reason
                            ),
                        );
                        let id = fresh_id(case, "mi");
                        let arg = Instantiation::new(CLUSTER_FROM_MULTI_INPUT, bindings)
                            .id(&id)
                            .support(0, ev)
                            .apply(case)
                            .expect("premises established above");
                        created.push(arg);
                    }
                }

                if let Some(found) = &change {
                    if controlled.len() != inputs.len() {
                        continue;
                    }
                    let conclusion = controls(entity, &found.address);
                    if case.holds(&conclusion) {
                        continue;
                    }
                    let bindings: BTreeMap<String, String> = [
                        ("T", tx.txid.as_str()),
                        ("C", found.address.as_str()),
                        ("E", entity.as_str()),
                        ("A", anchor),
                    ]
                    .into_iter()
                    .map(|(k, v)| (k.to_owned(), v.to_owned()))
                    .collect();
                    if has_instance(case, CLUSTER_BY_CHANGE, &bindings) {
                        continue;
                    }
                    let multi = ensure_chain_evidence(
                        case,
                        Statement::new(Predicate::MultiOutput, [tx.txid.as_str()])
                            .expect("multi_output/1"),
                        format!("{} has {} outputs", tx.txid, tx.outputs.len()),
                    );
                    let is_change = ensure_chain_evidence(
                        case,
                        Statement::new(
                            Predicate::IsChange,
                            [tx.txid.as_str(), found.address.as_str()],
                        )
                        .expect("is_change/2"),
                        format!("change heuristic: {}", found.reason),
                    );
                    let id = fresh_id(case, "ch");
                    let arg = Instantiation::new(CLUSTER_BY_CHANGE, bindings)
                        .id(&id)
                        .support(0, multi)
                        .support(1, is_change)
                        .apply(case)
                        .expect("premises established above");
                    created.push(arg);
                }
            }
        }
        if created.len() == before {
            break;
        }
    }
    created
}
