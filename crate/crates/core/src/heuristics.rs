//! Address clustering heuristics over a [`TransactionSet`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::chain::{Outpoint, Transaction, TransactionSet};
use crate::error::CaseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicParams {
    pub coinjoin_min_equal_outputs: u32,
    pub coinjoin_min_inputs: u32,
    pub apply_coinjoin_filter: bool,
    /// When false, an output paying back to one of the transaction's own
    /// input addresses is also accepted as change.
    pub change_requires_fresh_address: bool,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        Self {
            coinjoin_min_equal_outputs: 2,
            coinjoin_min_inputs: 2,
            apply_coinjoin_filter: true,
            change_requires_fresh_address: true,
        }
    }
}

impl HeuristicParams {
    pub fn validate(&self) -> Result<(), CaseError> {
        if self.coinjoin_min_equal_outputs < 2 {
            return Err(CaseError::Params(
                "coinjoin_min_equal_outputs must be at least 2".into(),
            ));
        }
        if self.coinjoin_min_inputs < 2 {
            return Err(CaseError::Params(
                "coinjoin_min_inputs must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinJoinVerdict {
    pub is_coinjoin: bool,
    pub input_count: usize,
    /// Most frequent output value and how often it occurs.
    pub repeated_value: Option<(u64, usize)>,
    pub reason: String,
}

/// Flags transactions with several inputs and repeated output values.
pub fn detect_coinjoin(
    tx: &Transaction,
    _ts: &TransactionSet,
    p: &HeuristicParams,
) -> CoinJoinVerdict {
    let input_count = tx.inputs.len();
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for out in &tx.outputs {
        *counts.entry(out.value_sat).or_default() += 1;
    }
    // highest count, ties to the larger value
    let repeated = counts
        .iter()
        .map(|(&v, &c)| (v, c))
        .max_by_key(|&(v, c)| (c, v))
        .filter(|&(_, c)| c >= 2);
    let enough_inputs = !tx.is_coinbase && input_count >= p.coinjoin_min_inputs as usize;
    let enough_equal = repeated.is_some_and(|(_, c)| c >= p.coinjoin_min_equal_outputs as usize);
    let is_coinjoin = enough_inputs && enough_equal;
    let reason = match (is_coinjoin, repeated) {
        (true, Some((v, c))) => {
            format!("{input_count} inputs and output value {v} sat repeated {c} times")
        }
        _ if tx.is_coinbase => "coinbase transaction".to_owned(),
        (false, _) if !enough_inputs => format!(
            "{input_count} input(s), below the threshold of {}",
            p.coinjoin_min_inputs
        ),
        (false, Some((v, c))) => format!(
            "most repeated output value {v} sat occurs {c} times, below the threshold of {}",
            p.coinjoin_min_equal_outputs
        ),
        _ => "all output values are distinct".to_owned(),
    };
    CoinJoinVerdict {
        is_coinjoin,
        input_count,
        repeated_value: repeated,
        reason,
    }
}

/// Union-find over dense indices, path compression plus union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false when both were already in the same set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// A merge performed by the multi-input heuristic, with the transaction that
/// justified it. Both addresses are resolved inputs of `txid`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub txid: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "PartitionRepr")]
pub struct ClusterPartition {
    /// Sorted clusters, themselves ordered by their smallest address.
    pub clusters: Vec<Vec<String>>,
    pub merges: Vec<Merge>,
    #[serde(skip)]
    membership: BTreeMap<String, usize>,
}

#[derive(Deserialize)]
struct PartitionRepr {
    clusters: Vec<Vec<String>>,
    merges: Vec<Merge>,
}

impl From<PartitionRepr> for ClusterPartition {
    fn from(r: PartitionRepr) -> Self {
        Self::from_clusters(r.clusters, r.merges)
    }
}

impl ClusterPartition {
    fn from_clusters(mut clusters: Vec<Vec<String>>, merges: Vec<Merge>) -> Self {
        for c in &mut clusters {
            c.sort();
        }
        clusters.sort();
        let membership = clusters
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |a| (a.clone(), i)))
            .collect();
        Self {
            clusters,
            merges,
            membership,
        }
    }

    pub fn cluster_of(&self, address: &str) -> Option<usize> {
        self.membership.get(address).copied()
    }

    pub fn cluster_members(&self, address: &str) -> Option<&[String]> {
        self.cluster_of(address)
            .map(|i| self.clusters[i].as_slice())
    }

    pub fn same_cluster(&self, a: &str, b: &str) -> bool {
        matches!((self.cluster_of(a), self.cluster_of(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// True when every cluster of `self` lies inside a single cluster of `coarser`.
    pub fn refines(&self, coarser: &ClusterPartition) -> bool {
        self.clusters.iter().all(|c| {
            let target = coarser.cluster_of(&c[0]);
            target.is_some() && c.iter().all(|a| coarser.cluster_of(a) == target)
        })
    }

    /// Merges whose addresses ended up in the cluster containing `address`.
    pub fn merges_for(&self, address: &str) -> Vec<&Merge> {
        let Some(id) = self.cluster_of(address) else {
            return Vec::new();
        };
        self.merges
            .iter()
            .filter(|m| self.cluster_of(&m.left) == Some(id))
            .collect()
    }
}

/// Clusters addresses by co-spending, skipping CoinJoin-flagged
/// transactions when the filter is on. Output-only addresses stay singletons.
pub fn multi_input_cluster(ts: &TransactionSet, p: &HeuristicParams) -> ClusterPartition {
    let addresses: Vec<&str> = ts.addresses().collect();
    let index: HashMap<&str, usize> = addresses.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut uf = UnionFind::new(addresses.len());
    let mut merges = Vec::new();
    for (pos, tx) in ts.transactions().iter().enumerate() {
        if tx.is_coinbase {
            continue;
        }
        if p.apply_coinjoin_filter && detect_coinjoin(tx, ts, p).is_coinjoin {
            continue;
        }
        let inputs = ts.input_addresses(pos);
        let Some((&first, rest)) = inputs.split_first() else {
            continue;
        };
        for &other in rest {
            if uf.union(index[first], index[other]) {
                merges.push(Merge {
                    txid: tx.txid.clone(),
                    left: first.to_owned(),
                    right: other.to_owned(),
                });
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, &a) in addresses.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(a.to_owned());
    }
    ClusterPartition::from_clusters(groups.into_values().collect(), merges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeFinding {
    pub txid: String,
    pub index: u32,
    pub address: String,
    pub reason: String,
}

/// Finds the single output whose address has never been seen before this
/// transaction while all other outputs pay to previously seen addresses.
pub fn detect_change_output(
    tx: &Transaction,
    ts: &TransactionSet,
    p: &HeuristicParams,
) -> Option<ChangeFinding> {
    if tx.is_coinbase || tx.outputs.len() < 2 {
        return None;
    }
    let pos = ts.position(&tx.txid)?;
    let fresh: Vec<bool> = tx
        .outputs
        .iter()
        .map(|o| ts.first_seen(&o.address).is_none_or(|first| first >= pos))
        .collect();
    let fresh_idx: Vec<usize> = (0..fresh.len()).filter(|&i| fresh[i]).collect();
    if let [idx] = fresh_idx[..] {
        let out = &tx.outputs[idx];
        return Some(ChangeFinding {
            txid: tx.txid.clone(),
            index: idx as u32,
            address: out.address.clone(),
            reason: format!(
                "output {idx} pays to never-before-seen address {}; the other {} output address(es) appeared earlier",
                out.address,
                tx.outputs.len() - 1
            ),
        });
    }
    if p.change_requires_fresh_address || !fresh_idx.is_empty() {
        return None;
    }
    let inputs: BTreeSet<&str> = ts.input_addresses(pos).into_iter().collect();
    let back: Vec<usize> = (0..tx.outputs.len())
        .filter(|&i| inputs.contains(tx.outputs[i].address.as_str()))
        .collect();
    match back[..] {
        [idx] if back.len() < tx.outputs.len() => Some(ChangeFinding {
            txid: tx.txid.clone(),
            index: idx as u32,
            address: tx.outputs[idx].address.clone(),
            reason: format!(
                "output {idx} pays back to input address {}",
                tx.outputs[idx].address
            ),
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowPath {
    pub txids: Vec<String>,
}

/// Enumerates chains of at most `max_hops` transactions leading from
/// addresses in `from` to addresses in `to`.
pub fn trace_flows(
    ts: &TransactionSet,
    from: &BTreeSet<String>,
    to: &BTreeSet<String>,
    max_hops: usize,
) -> Vec<FlowPath> {
    if max_hops == 0 {
        return Vec::new();
    }
    let mut paths: Vec<Vec<usize>> = Vec::new();
    for (pos, tx) in ts.transactions().iter().enumerate() {
        if tx.is_coinbase {
            continue;
        }
        if ts.input_addresses(pos).iter().any(|a| from.contains(*a)) {
            let mut stack = vec![pos];
            extend_flows(ts, to, max_hops, &mut stack, &mut paths);
        }
    }
    let mut out: Vec<FlowPath> = paths
        .into_iter()
        .map(|p| FlowPath {
            txids: p.into_iter().map(|i| ts.tx_at(i).txid.clone()).collect(),
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn extend_flows(
    ts: &TransactionSet,
    to: &BTreeSet<String>,
    max_hops: usize,
    stack: &mut Vec<usize>,
    paths: &mut Vec<Vec<usize>>,
) {
    let last = *stack.last().expect("non-empty path");
    let tx = ts.tx_at(last);
    if tx.outputs.iter().any(|o| to.contains(&o.address)) {
        paths.push(stack.clone());
    }
    if stack.len() == max_hops {
        return;
    }
    let mut next: Vec<usize> = (0..tx.outputs.len())
        .flat_map(|i| {
            ts.spenders_of(&Outpoint::new(tx.txid.clone(), i as u32))
                .iter()
                .copied()
        })
        .filter(|&n| n > last && !stack.contains(&n))
        .collect();
    next.sort_unstable();
    next.dedup();
    for n in next {
        stack.push(n);
        extend_flows(ts, to, max_hops, stack, paths);
        stack.pop();
    }
}
