use std::collections::BTreeSet;
use std::time::Instant;

use cryptarg_core::af::{Label, NodeKind};
use cryptarg_core::case::{evaluate, generate_report, load_chain, EvalOptions, Tier};
use cryptarg_core::chain::validate_set;
use cryptarg_core::fixtures::{self, MIXER_LINK_ARG, MIXER_LINK_TX};
use cryptarg_core::heuristics::{
    detect_change_output, detect_coinjoin, multi_input_cluster, trace_flows,
};
use cryptarg_core::scheme::{answer_cq, auto_instantiate, list_open_cqs, Answer};
use cryptarg_core::{CaseSession, Statement, TransactionSet};

fn st(s: &str) -> Statement {
    s.parse().unwrap()
}

fn target() -> Statement {
    st("connected(X, WSM-administration)")
}

fn chain() -> TransactionSet {
    TransactionSet::from_chain_file(&fixtures::wsm_chain()).unwrap()
}

#[test]
fn chain_is_valid_and_self_contained() {
    let ts = chain();
    let report = validate_set(&ts);
    assert!(report.is_valid(), "{:?}", report.findings);
    assert!(report.value_conserved());
    for tx in ts.transactions() {
        for op in &tx.inputs {
            cryptarg_core::chain::resolve_input(&ts, op).unwrap();
        }
    }
}

#[test]
fn change_flows_and_mixer_link() {
    let ts = chain();
    let p = Default::default();
    let tx01 = ts.get("tx01").unwrap();
    let change = detect_change_output(tx01, &ts, &p).unwrap();
    assert_eq!(change.address, "W2:c");

    let mixer_link = ts.get(MIXER_LINK_TX).unwrap();
    assert!(!detect_coinjoin(mixer_link, &ts, &p).is_coinjoin);

    let w2: BTreeSet<String> = ["W2:a", "W2:b", "W2:c"].map(String::from).into();
    let one = |a: &str| BTreeSet::from([a.to_owned()]);
    let to_w1 = trace_flows(&ts, &w2, &one("W1:a"), 1);
    assert_eq!(to_w1.len(), 1);
    assert_eq!(to_w1[0].txids, ["tx01"]);
    let to_w4 = trace_flows(&ts, &w2, &one("W4:a"), 1);
    assert_eq!(to_w4[0].txids, ["tx02"]);
    let to_mixer = trace_flows(&ts, &one("W1:a"), &one("MIX:in"), 1);
    assert_eq!(to_mixer[0].txids, ["tx03"]);

    let part = multi_input_cluster(&ts, &p);
    assert!(part.same_cluster("W2:b", "W2:c"));
    assert!(part.same_cluster("M:out1", "P:bppc"));
    assert_eq!(part.merges_for("P:bppc")[0].txid, MIXER_LINK_TX);
}

#[test]
fn all_favourable_accepts_the_target() {
    let case = fixtures::wsm_case_answered();
    let start = Instant::now();
    let eval = evaluate(&case, &EvalOptions::default());
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(eval.status_of(&target()), Label::In);
    assert!(eval.framework.attacks.is_empty());
    for a in &case.arguments {
        assert_eq!(eval.label_of(&a.arg_id), Some(Label::In), "{}", a.arg_id);
    }
    let report = generate_report(&case, None, &EvalOptions::default());
    assert_eq!(report.entry(&target()).unwrap().tier, Tier::Corroborated);
}

#[test]
fn coinjoin_answer_defeats_the_chain() {
    let mut case = fixtures::wsm_case_answered();
    answer_cq(
        &mut case,
        MIXER_LINK_ARG,
        "cq1",
        Answer::Unfavourable,
        "equal-output pattern found",
    )
    .unwrap();
    let eval = evaluate(&case, &EvalOptions::default());
    for id in [MIXER_LINK_ARG, "a-sw", "a-susp"] {
        assert_eq!(eval.label_of(id), Some(Label::Out), "{id}");
    }
    assert_ne!(eval.status_of(&target()), Label::In);
    // the rest of the case is untouched
    assert_eq!(
        eval.status_of(&st("connected(TheOne, WSM-administration)")),
        Label::In
    );
    assert_eq!(eval.status_of(&st("controls(X, W4:a)")), Label::In);

    let ts = load_chain(&case, None).unwrap();
    let report = generate_report(&case, Some(&ts), &EvalOptions::default());
    let mi = report.entry(&st("controls(X, M:out1)")).unwrap();
    assert_eq!(mi.tier, Tier::Defeated);
    assert!(mi
        .defeated_by
        .iter()
        .any(|d| d.question.as_deref() == Some("Could T be a CoinJoin transaction?")));
    assert!(mi.cluster_merges.iter().any(|m| m.txid == MIXER_LINK_TX));

    // revising the answer restores acceptance
    answer_cq(
        &mut case,
        MIXER_LINK_ARG,
        "cq1",
        Answer::Favourable,
        "re-checked",
    )
    .unwrap();
    assert_eq!(
        evaluate(&case, &EvalOptions::default()).status_of(&target()),
        Label::In
    );
}

#[test]
fn open_questions_and_tiers() {
    let case = fixtures::wsm_case();
    assert!(!list_open_cqs(&case).is_empty());
    // open assumption questions count against their argument by default
    let eval = evaluate(&case, &EvalOptions::default());
    assert_ne!(eval.status_of(&target()), Label::In);
    assert!(eval
        .framework
        .nodes
        .iter()
        .any(|n| matches!(n.kind, NodeKind::Objection { .. })));

    let lenient = EvalOptions {
        open_assumptions_attack: false,
    };
    assert_eq!(evaluate(&case, &lenient).status_of(&target()), Label::In);

    // answer only assumption questions: exceptions and supportive ones remain open
    let mut case = fixtures::wsm_case();
    for a in case.arguments.clone() {
        for q in &a.scheme().unwrap().cqs {
            if q.kind == cryptarg_core::scheme::CqKind::Assumption {
                answer_cq(&mut case, &a.arg_id, &q.cq_id, Answer::Favourable, "backed").unwrap();
            }
        }
    }
    let report = generate_report(&case, None, &EvalOptions::default());
    let entry = report.entry(&target()).unwrap();
    assert_eq!(entry.status, Label::In);
    assert_eq!(entry.tier, Tier::Presumptive);
    assert!(!entry.open_cqs.is_empty());
    let md = report.to_markdown();
    for o in &report.open_cqs {
        assert!(md.contains(&o.text));
    }
    assert!(md.contains("probable cause"));
}

#[test]
fn auto_instantiation_on_the_fixture() {
    let mut case = fixtures::wsm_case_answered();
    let ts = chain();
    let created = auto_instantiate(&mut case, &ts);
    let concl: Vec<String> = created.iter().map(|a| a.conclusion.to_string()).collect();
    assert!(
        concl.contains(&"controls(TheOne, W2:c)".to_owned()),
        "{concl:?}"
    );
    assert!(
        concl.contains(&"controls(TheOne, W2:b)".to_owned()),
        "{concl:?}"
    );
    assert!(auto_instantiate(&mut case, &ts).is_empty());
    cryptarg_core::case::check_integrity(&case).unwrap();
}

#[test]
fn session_caches_and_refreshes() {
    let mut s = CaseSession::new(fixtures::wsm_case_answered(), None);
    assert_eq!(s.evaluation().status_of(&target()), Label::In);
    s.answer_cq(MIXER_LINK_ARG, "cq1", Answer::Unfavourable, "coinjoin")
        .unwrap();
    assert_ne!(s.evaluation().status_of(&target()), Label::In);
    let report = s.report().unwrap();
    assert_eq!(report.entry(&target()).unwrap().tier, Tier::Defeated);
}

#[test]
fn bundled_json_matches_generated_fixtures() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let read = |n: &str| std::fs::read_to_string(dir.join(n)).unwrap();
    assert_eq!(
        read("wsm-case.json"),
        cryptarg_core::case::to_json(&fixtures::wsm_case())
    );
    assert_eq!(
        read("wsm-case-answered.json"),
        cryptarg_core::case::to_json(&fixtures::wsm_case_answered())
    );
    let chain_json = |c| {
        let mut s = serde_json::to_string_pretty(&c).unwrap();
        s.push('\n');
        s
    };
    assert_eq!(read("wsm-chain.json"), chain_json(fixtures::wsm_chain()));
    assert_eq!(
        read("coinjoin-chain.json"),
        chain_json(fixtures::coinjoin_chain())
    );
}
