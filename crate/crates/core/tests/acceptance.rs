//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any failure.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use cryptarg_core::af::{grounded_labelling, Label};
use cryptarg_core::case::{
    evaluate, generate_report, load_case, load_chain, parse_case, to_json, EvalOptions,
};
use cryptarg_core::chain::{parse_chain_file, validate_set};
use cryptarg_core::fixtures::{self, MIXER_LINK_ARG};
use cryptarg_core::heuristics::{multi_input_cluster, HeuristicParams};
use cryptarg_core::scheme::{
    answer_cq, scheme, Answer, CLUSTER_BY_CHANGE, CLUSTER_FROM_MULTI_INPUT, CLUSTER_FROM_SOFTWARE,
    POSITION_TO_KNOW, SIGN, SUSPICION,
};
use cryptarg_core::synth::{self, ChainShape};
use cryptarg_core::{Statement, TransactionSet};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn target() -> Statement {
    "connected(X, WSM-administration)".parse().unwrap()
}

fn wsm_end_to_end() -> Outcome {
    let start = Instant::now();
    let case = load_case(&manifest().join("fixtures/wsm-case-answered.json"))
        .map_err(|e| e.to_string())?;
    let ts = load_chain(&case, None).map_err(|e| e.to_string())?;
    let opts = EvalOptions::default();
    let eval = evaluate(&case, &opts);
    let report = generate_report(&case, Some(&ts), &opts);
    let elapsed = start.elapsed();

    let status = eval.status_of(&target());
    if status != Label::In {
        return Err(format!("target is {status}"));
    }
    let entry = report.entry(&target()).ok_or("no report entry")?;
    let used: BTreeSet<&str> = entry.chain.iter().map(|l| l.scheme_id.as_str()).collect();
    for s in [
        SIGN,
        SUSPICION,
        CLUSTER_FROM_SOFTWARE,
        CLUSTER_FROM_MULTI_INPUT,
        POSITION_TO_KNOW,
    ] {
        if !used.contains(s) {
            return Err(format!("chain lacks {s}"));
        }
    }
    if let Some(l) = entry.chain.iter().find(|l| l.label != Label::In) {
        return Err(format!("{} is {}", l.arg_id, l.label));
    }
    let game: Statement = "controls(X, W4:a)".parse().unwrap();
    if eval.status_of(&game) != Label::In {
        return Err("game company link not accepted".into());
    }
    if elapsed.as_secs_f64() >= 1.0 {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{} arguments on the chain, {elapsed:?}",
        entry.chain.len()
    ))
}

fn defeat_propagation() -> Outcome {
    let mut case = fixtures::wsm_case_answered();
    answer_cq(
        &mut case,
        MIXER_LINK_ARG,
        "cq1",
        Answer::Unfavourable,
        "equal-output pattern found",
    )
    .map_err(|e| e.to_string())?;
    let eval = evaluate(&case, &EvalOptions::default());
    for id in [MIXER_LINK_ARG, "a-sw"] {
        if eval.label_of(id) != Some(Label::Out) {
            return Err(format!("{id} is {:?}", eval.label_of(id)));
        }
    }
    let status = eval.status_of(&target());
    if status == Label::In {
        return Err("target still IN".into());
    }
    Ok(format!(
        "multi-input and software link OUT, target {status}"
    ))
}

fn clustering_oracle() -> Outcome {
    let off = HeuristicParams {
        apply_coinjoin_filter: false,
        ..Default::default()
    };
    let mut coinjoins = 0;
    for seed in 0..100u64 {
        let file = synth::random_chain(&mut synth::rng(seed), ChainShape::default());
        if file.transactions.len() > 200 {
            return Err(format!("seed {seed}: chain too long"));
        }
        let ts = TransactionSet::from_chain_file(&file).map_err(|e| format!("seed {seed}: {e}"))?;
        if ts.addresses().count() > 500 {
            return Err(format!("seed {seed}: too many addresses"));
        }
        coinjoins += ts
            .transactions()
            .iter()
            .filter(|t| {
                cryptarg_core::heuristics::detect_coinjoin(t, &ts, &HeuristicParams::default())
                    .is_coinjoin
            })
            .count();
        for p in [HeuristicParams::default(), off] {
            let got: BTreeSet<BTreeSet<String>> = multi_input_cluster(&ts, &p)
                .clusters
                .iter()
                .map(|c| c.iter().cloned().collect())
                .collect();
            if got != common::cluster_oracle(&file, &p) {
                return Err(format!(
                    "seed {seed}: differs from oracle (filter {})",
                    p.apply_coinjoin_filter
                ));
            }
        }
        if !multi_input_cluster(&ts, &HeuristicParams::default())
            .refines(&multi_input_cluster(&ts, &off))
        {
            return Err(format!(
                "seed {seed}: filter-on partition does not refine filter-off"
            ));
        }
    }
    Ok(format!("100 chains, {coinjoins} CoinJoin transactions"))
}

fn grounded_oracle() -> Outcome {
    let mut rng = synth::rng(7);
    let mut nodes = 0;
    for i in 0..200 {
        let density = [0.1, 0.2, 0.3][i % 3];
        let af = synth::random_af(&mut rng, 12, density);
        nodes += af.len();
        let g = grounded_labelling(&af);
        let bad = g.illegal_nodes(&af);
        if !bad.is_empty() {
            return Err(format!("AF {i}: illegal at {bad:?}"));
        }
        if g != common::grounded_oracle(&af) {
            return Err(format!("AF {i}: differs from enumeration"));
        }
    }
    Ok(format!("200 frameworks, {nodes} nodes in total"))
}

fn catalog_fidelity() -> Outcome {
    for id in [
        SUSPICION,
        CLUSTER_FROM_SOFTWARE,
        CLUSTER_FROM_MULTI_INPUT,
        CLUSTER_BY_CHANGE,
    ] {
        let s = scheme(id).ok_or(format!("missing {id}"))?;
        let mut text = format!("name: {}\n", s.name);
        for p in &s.premises {
            text += &format!("premise: {}\n", p.text);
        }
        text += &format!("conclusion: {}\n", s.conclusion.text);
        for q in &s.cqs {
            text += &format!("{}: {}\n", q.cq_id, q.text);
        }
        let golden = std::fs::read_to_string(manifest().join(format!("tests/golden/{id}.txt")))
            .map_err(|e| e.to_string())?;
        if text != golden {
            return Err(format!("{id} differs from golden file"));
        }
    }
    Ok("4 custom schemes byte-identical".into())
}

fn round_trips() -> Outcome {
    let mut rng = synth::rng(11);
    for i in 0..50 {
        let mut case = fixtures::wsm_case();
        for _ in 0..(1 + i % 10) {
            synth::mutate_case(&mut rng, &mut case);
        }
        let back = parse_case(&to_json(&case)).map_err(|e| format!("case {i}: {e}"))?;
        if back != case {
            return Err(format!("case {i} changed"));
        }
    }
    let dir = std::env::temp_dir().join(format!("cryptarg-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("case.json");
    let case = fixtures::wsm_case_answered();
    cryptarg_core::case::save_case(&case, &path).map_err(|e| e.to_string())?;
    let loaded = load_case(&path).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&dir);
    if loaded != case {
        return Err("file save/load changed the case".into());
    }
    for seed in 0..50 {
        let file = synth::random_chain(&mut synth::rng(seed), ChainShape::default());
        let ts = TransactionSet::from_chain_file(&file).map_err(|e| e.to_string())?;
        let back = parse_chain_file(ts.to_json_pretty().as_bytes()).map_err(|e| e.to_string())?;
        if back != ts || back.to_chain_file() != file {
            return Err(format!("chain {seed} changed"));
        }
    }
    Ok("50 mutated cases, 50 chains".into())
}

fn validation() -> Outcome {
    let cases = common::validation_cases();
    for c in &cases {
        if c.chain.transactions.len() != 5 {
            return Err(format!("{}: not a 5-tx chain", c.name));
        }
        let ts = TransactionSet::from_chain_file(&c.chain).map_err(|e| e.to_string())?;
        let report = validate_set(&ts);
        let got: BTreeSet<(&str, &str)> = report
            .findings
            .iter()
            .map(|f| (f.txid.as_str(), common::finding_name(&f.kind)))
            .collect();
        let want: BTreeSet<(&str, &str)> = c.flags.iter().copied().collect();
        if got != want || report.findings.len() != want.len() {
            return Err(format!("{}: flags {got:?}, expected {want:?}", c.name));
        }
        if report.value_conserved() != c.conserved {
            return Err(format!(
                "{}: conservation check gave {}",
                c.name,
                report.value_conserved()
            ));
        }
    }
    Ok(format!("{} chains, flags exact", cases.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("WSM fixture end-to-end", wsm_end_to_end),
        ("defeat propagation", defeat_propagation),
        ("clustering oracle equivalence", clustering_oracle),
        ("grounded-semantics oracle equivalence", grounded_oracle),
        ("catalog fidelity", catalog_fidelity),
        ("case-file and chain-file round trip", round_trips),
        ("validation on hand-built chains", validation),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
