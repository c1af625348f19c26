//! Seeded generators for chains, frameworks and case edits, used by tests
//! and benchmarks.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::af::ArgumentationFramework;
use crate::case::{AttributionTag, CaseFile, EntityKind};
use crate::chain::{ChainFile, Outpoint, RawOutput, RawTransaction};
use crate::scheme::{answer_cq, remove_argument, Answer};
use crate::statement::{Predicate, Statement};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct ChainShape {
    pub max_txs: usize,
    pub max_addresses: usize,
    /// Chance that a spending transaction is built with equal outputs.
    pub coinjoin_rate: f64,
}

impl Default for ChainShape {
    fn default() -> Self {
        Self {
            max_txs: 200,
            max_addresses: 500,
            coinjoin_rate: 0.15,
        }
    }
}

struct Coin {
    txid: String,
    vout: u32,
    value: u64,
}

/// A valid chain: every input resolves to an earlier unspent output, no
/// output is spent twice and no transaction pays out more than it takes in.
pub fn random_chain<R: Rng>(rng: &mut R, shape: ChainShape) -> ChainFile {
    let n_txs = rng.random_range(1..=shape.max_txs.max(1));
    let n_addr = rng.random_range(2..=shape.max_addresses.max(2));
    let addr = |i: usize| format!("addr{i:03}");
    let mut next_fresh = 0usize;
    let mut pick_address = |rng: &mut R| {
        if next_fresh < n_addr && (next_fresh == 0 || rng.random_bool(0.5)) {
            next_fresh += 1;
            addr(next_fresh - 1)
        } else {
            addr(rng.random_range(0..next_fresh))
        }
    };

    let mut utxo: Vec<Coin> = Vec::new();
    let mut txs = Vec::with_capacity(n_txs);
    for t in 0..n_txs {
        let txid = format!("tx{t:04}");
        let coinbase = utxo.is_empty() || rng.random_bool(0.15);
        let mut inputs = Vec::new();
        let total: u64 = if coinbase {
            rng.random_range(1_000..=5_000_000_000)
        } else {
            let k = rng.random_range(1..=utxo.len().min(4));
            let mut sum = 0;
            for _ in 0..k {
                let i = rng.random_range(0..utxo.len());
                let c = utxo.swap_remove(i);
                sum += c.value;
                inputs.push(Outpoint::new(c.txid, c.vout));
            }
            sum
        };
        let fee = if coinbase {
            0
        } else {
            rng.random_range(0..=(total / 20).min(10_000))
        };
        let spendable = total - fee;
        let k = rng.random_range(1..=4u64);
        let equal = !coinbase && inputs.len() >= 2 && rng.random_bool(shape.coinjoin_rate);
        let values: Vec<u64> = if equal {
            let n = k.max(2);
            let v = spendable / (n + 1);
            let mut vs = vec![v; n as usize];
            vs.push(spendable - v * n);
            vs
        } else {
            let mut cuts: Vec<u64> = (1..k).map(|_| rng.random_range(0..=spendable)).collect();
            cuts.sort_unstable();
            let mut prev = 0;
            let mut vs = Vec::new();
            for c in cuts {
                vs.push(c - prev);
                prev = c;
            }
            vs.push(spendable - prev);
            vs
        };
        let outputs: Vec<RawOutput> = values
            .iter()
            .map(|&v| RawOutput {
                address: pick_address(rng),
                value_sat: v as i64,
            })
            .collect();
        for (i, &v) in values.iter().enumerate() {
            utxo.push(Coin {
                txid: txid.clone(),
                vout: i as u32,
                value: v,
            });
        }
        txs.push(RawTransaction {
            txid,
            coinbase,
            inputs,
            outputs,
        });
    }
    ChainFile { transactions: txs }
}

/// Framework over at most `max_nodes` nodes; see [`af_with_nodes`].
pub fn random_af<R: Rng>(rng: &mut R, max_nodes: usize, density: f64) -> ArgumentationFramework {
    let n = rng.random_range(0..=max_nodes);
    af_with_nodes(rng, n, density)
}

/// Framework over nodes `a0..a{n-1}` with each ordered pair (self included)
/// attacking with probability `density`.
pub fn af_with_nodes<R: Rng>(rng: &mut R, n: usize, density: f64) -> ArgumentationFramework {
    let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let mut edges = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if rng.random_bool(density) {
                edges.push((x, y));
            }
        }
    }
    ArgumentationFramework::from_edges(&names, &edges)
}

/// Applies one random edit that keeps the case well-formed.
pub fn mutate_case<R: Rng>(rng: &mut R, case: &mut CaseFile) {
    match rng.random_range(0..6) {
        0 | 1 => {
            let targets: Vec<(String, String)> = case
                .arguments
                .iter()
                .flat_map(|a| {
                    a.cq_state
                        .keys()
                        .map(move |q| (a.arg_id.clone(), q.clone()))
                })
                .collect();
            if let Some((a, q)) = targets.choose(rng) {
                let answer = if rng.random_bool(0.5) {
                    Answer::Favourable
                } else {
                    Answer::Unfavourable
                };
                let why = format!("note {}", rng.random_range(0..1000));
                answer_cq(case, a, q, answer, &why).expect("question exists");
            }
        }
        2 => {
            let n = case.entities.len();
            case.add_entity(
                &format!("ent{n}"),
                &format!("Entity \"{n}\" ü"),
                EntityKind::Service,
            );
        }
        3 => {
            let n = case.evidence.len();
            let entity = case
                .entities
                .choose(rng)
                .map(|e| e.id.clone())
                .unwrap_or_else(|| {
                    case.add_entity("ent-x", "x", EntityKind::Person);
                    "ent-x".to_owned()
                });
            let s =
                Statement::new(Predicate::Controls, [entity, format!("addr{n}")]).expect("arity");
            case.add_evidence(&format!("ev-synth-{n}"), s, "synthetic", "generated");
        }
        4 => {
            if let Some(e) = case.entities.choose(rng).map(|e| e.id.clone()) {
                case.attribution_tags.push(AttributionTag {
                    addresses: vec![format!("tag{}", rng.random_range(0..100))],
                    entity: e,
                    source: "synthetic tag".into(),
                });
            }
            case.heuristics.apply_coinjoin_filter = rng.random_bool(0.5);
            case.heuristics.coinjoin_min_inputs = rng.random_range(2..5);
        }
        _ => {
            // drop a leaf argument, if any
            let leaves: Vec<String> = case
                .arguments
                .iter()
                .filter(|a| {
                    !case
                        .arguments
                        .iter()
                        .any(|b| b.supporting_arguments().any(|s| s == a.arg_id))
                })
                .map(|a| a.arg_id.clone())
                .collect();
            if let Some(id) = leaves.choose(rng) {
                remove_argument(case, id).expect("leaf");
            } else {
                case.title = format!("t{}", rng.random_range(0..100));
            }
        }
    }
}
