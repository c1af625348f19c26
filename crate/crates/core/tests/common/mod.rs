//! Brute-force reference implementations used by several test targets.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cryptarg_core::af::{ArgumentationFramework, Label, Labelling};
use cryptarg_core::chain::ChainFile;
use cryptarg_core::heuristics::HeuristicParams;

/// Input address sets of the transactions the multi-input rule applies to,
/// resolved straight from the file.
fn co_spend_sets(chain: &ChainFile, p: &HeuristicParams) -> Vec<BTreeSet<String>> {
    let mut outputs: BTreeMap<(&str, u32), &str> = BTreeMap::new();
    for tx in &chain.transactions {
        for (i, o) in tx.outputs.iter().enumerate() {
            outputs.insert((tx.txid.as_str(), i as u32), o.address.as_str());
        }
    }
    let mut sets = Vec::new();
    for tx in &chain.transactions {
        if tx.coinbase {
            continue;
        }
        let mut counts: BTreeMap<i64, u32> = BTreeMap::new();
        for o in &tx.outputs {
            *counts.entry(o.value_sat).or_default() += 1;
        }
        let coinjoin = tx.inputs.len() >= p.coinjoin_min_inputs as usize
            && counts.values().any(|&c| c >= p.coinjoin_min_equal_outputs);
        if coinjoin && p.apply_coinjoin_filter {
            continue;
        }
        sets.push(
            tx.inputs
                .iter()
                .filter_map(|i| outputs.get(&(i.txid.as_str(), i.vout)))
                .map(|a| a.to_string())
                .collect(),
        );
    }
    sets
}

/// Start from singletons and keep merging sets that share a co-spending
/// transaction until nothing changes.
pub fn cluster_oracle(chain: &ChainFile, p: &HeuristicParams) -> BTreeSet<BTreeSet<String>> {
    let mut sets: Vec<BTreeSet<String>> = chain
        .transactions
        .iter()
        .flat_map(|t| t.outputs.iter().map(|o| o.address.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|a| BTreeSet::from([a]))
        .collect();
    let spends = co_spend_sets(chain, p);
    loop {
        let mut merged = false;
        for s in &spends {
            let hit: BTreeSet<usize> = (0..sets.len())
                .filter(|&i| s.iter().any(|a| sets[i].contains(a)))
                .collect();
            if hit.len() > 1 {
                let first = *hit.first().unwrap();
                for &j in hit.iter().rev().filter(|&&j| j != first) {
                    let taken = sets.remove(j);
                    sets[first].extend(taken);
                }
                merged = true;
            }
        }
        if !merged {
            break;
        }
    }
    sets.into_iter().collect()
}

fn attackers(af: &ArgumentationFramework) -> Vec<Vec<usize>> {
    let idx = |id: &str| af.nodes.iter().position(|n| n.id == id).unwrap();
    let mut out = vec![Vec::new(); af.nodes.len()];
    for a in &af.attacks {
        out[idx(&a.target)].push(idx(&a.attacker));
    }
    out
}

/// Every legal labelling, found by checking all 3^n assignments.
pub fn legal_labellings(af: &ArgumentationFramework) -> Vec<Labelling> {
    let n = af.nodes.len();
    let att = attackers(af);
    let mut found = Vec::new();
    let total = 3usize.pow(n as u32);
    let mut labels = vec![Label::In; n];
    for code in 0..total {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = [Label::In, Label::Out, Label::Undec][c % 3];
            c /= 3;
        }
        let legal = (0..n).all(|i| {
            let all_out = att[i].iter().all(|&j| labels[j] == Label::Out);
            let some_in = att[i].iter().any(|&j| labels[j] == Label::In);
            match labels[i] {
                Label::In => all_out,
                Label::Out => some_in,
                Label::Undec => !all_out && !some_in,
            }
        });
        if legal {
            found.push(Labelling(
                af.nodes
                    .iter()
                    .zip(&labels)
                    .map(|(nd, l)| (nd.id.clone(), *l))
                    .collect(),
            ));
        }
    }
    found
}

/// The legal labelling whose IN set is contained in every other one.
pub fn grounded_oracle(af: &ArgumentationFramework) -> Labelling {
    let all = legal_labellings(af);
    let min = all
        .iter()
        .find(|l| all.iter().all(|o| l.in_set().is_subset(&o.in_set())))
        .expect("a least complete labelling exists");
    min.clone()
}

fn tx(
    txid: &str,
    inputs: &[(&str, u32)],
    outputs: &[(&str, i64)],
) -> cryptarg_core::chain::RawTransaction {
    cryptarg_core::chain::RawTransaction {
        txid: txid.into(),
        coinbase: inputs.is_empty(),
        inputs: inputs
            .iter()
            .map(|(t, v)| cryptarg_core::Outpoint::new(*t, *v))
            .collect(),
        outputs: outputs
            .iter()
            .map(|(a, v)| cryptarg_core::chain::RawOutput {
                address: (*a).into(),
                value_sat: *v,
            })
            .collect(),
    }
}

pub struct ValidationCase {
    pub name: &'static str,
    pub chain: ChainFile,
    /// (txid, finding kind) pairs that must be reported, and nothing else.
    pub flags: Vec<(&'static str, &'static str)>,
    pub conserved: bool,
}

/// Five-transaction chains with flaws placed by hand.
pub fn validation_cases() -> Vec<ValidationCase> {
    vec![
        ValidationCase {
            name: "clean",
            chain: ChainFile {
                transactions: vec![
                    tx("cb1", &[], &[("a", 100_000_000)]),
                    tx("cb2", &[], &[("b", 50)]),
                    tx("t1", &[("cb1", 0)], &[("c", 70_000_000), ("d", 29_000_000)]),
                    tx("t2", &[("t1", 0), ("cb2", 0)], &[("e", 70_000_030)]),
                    tx("t3", &[("t1", 1)], &[("f", 29_000_000)]),
                ],
            },
            flags: vec![],
            conserved: true,
        },
        ValidationCase {
            name: "double spend and overspend",
            chain: ChainFile {
                transactions: vec![
                    tx("cb", &[], &[("a", 100)]),
                    tx("t1", &[("cb", 0)], &[("b", 60)]),
                    tx("t2", &[("cb", 0)], &[("c", 50)]),
                    tx("t3", &[("t1", 0)], &[("d", 60)]),
                    tx("t4", &[("t3", 0)], &[("e", 70)]),
                ],
            },
            flags: vec![("t2", "double_spend"), ("t4", "negative_fee")],
            conserved: false,
        },
        ValidationCase {
            name: "dangling and forward references",
            chain: ChainFile {
                transactions: vec![
                    tx("cb", &[], &[("a", 100)]),
                    tx("t1", &[("cb", 0)], &[("b", 90)]),
                    tx("t2", &[("ghost", 0)], &[("c", 10)]),
                    tx("t3", &[("t4", 0)], &[("d", 10)]),
                    tx("t4", &[("t1", 0)], &[("e", 80)]),
                ],
            },
            flags: vec![("t2", "dangling_outpoint"), ("t3", "dangling_outpoint")],
            conserved: false,
        },
        ValidationCase {
            name: "value minted without coinbase",
            chain: ChainFile {
                transactions: vec![
                    tx("cb", &[], &[("a", 10), ("b", 10)]),
                    tx("t1", &[("cb", 0)], &[("c", 10)]),
                    tx("t2", &[("cb", 1), ("t1", 0)], &[("d", 25)]),
                    tx("t3", &[("t2", 0)], &[("e", 20)]),
                    tx("t4", &[("t3", 0)], &[("f", 20)]),
                ],
            },
            flags: vec![("t2", "negative_fee")],
            conserved: true,
        },
    ]
}

pub fn finding_name(k: &cryptarg_core::chain::FindingKind) -> &'static str {
    use cryptarg_core::chain::FindingKind::*;
    match k {
        NegativeFee { .. } => "negative_fee",
        DanglingOutpoint { .. } => "dangling_outpoint",
        DoubleSpend { .. } => "double_spend",
    }
}
