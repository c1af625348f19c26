//! JSON shapes shared by the command line and the HTTP service.

use serde::{Deserialize, Serialize};

use cryptarg_core::case::CaseFile;
use cryptarg_core::heuristics::{
    detect_coinjoin, multi_input_cluster, ClusterPartition, HeuristicParams,
};
use cryptarg_core::scheme::{CqKind, CqStatus};
use cryptarg_core::TransactionSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case_id: String,
    pub title: String,
    pub arguments: usize,
    pub evidence: usize,
    pub open_cqs: usize,
}

impl CaseSummary {
    pub fn of(case: &CaseFile) -> Self {
        Self {
            case_id: case.case_id.clone(),
            title: case.title.clone(),
            arguments: case.arguments.len(),
            evidence: case.evidence.len(),
            open_cqs: cryptarg_core::scheme::list_open_cqs(case).len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CqRow {
    pub arg_id: String,
    pub cq_id: String,
    pub kind: CqKind,
    pub status: CqStatus,
    pub text: String,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub justification: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CqFilter {
    #[default]
    All,
    Open,
    Favourable,
    Unfavourable,
}

impl CqFilter {
    fn admits(self, s: CqStatus) -> bool {
        match self {
            CqFilter::All => true,
            CqFilter::Open => s == CqStatus::Open,
            CqFilter::Favourable => s == CqStatus::Favourable,
            CqFilter::Unfavourable => s == CqStatus::Unfavourable,
        }
    }
}

/// Every question of every argument, in case order, with its question text.
pub fn cq_rows(case: &CaseFile, filter: CqFilter) -> Vec<CqRow> {
    let mut rows = Vec::new();
    for arg in &case.arguments {
        let Some(def) = arg.scheme() else { continue };
        for q in &def.cqs {
            let state = arg.cq_state.get(&q.cq_id);
            let status = state.map(|s| s.status).unwrap_or(CqStatus::Open);
            if !filter.admits(status) {
                continue;
            }
            rows.push(CqRow {
                arg_id: arg.arg_id.clone(),
                cq_id: q.cq_id.clone(),
                kind: q.kind,
                status,
                text: q.text.clone(),
                justification: state.map(|s| s.justification.clone()).unwrap_or_default(),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinJoinFlag {
    pub txid: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterView {
    pub coinjoin_filter: bool,
    pub partition: ClusterPartition,
    pub coinjoins: Vec<CoinJoinFlag>,
}

pub fn cluster_view(ts: &TransactionSet, params: &HeuristicParams) -> ClusterView {
    let coinjoins = ts
        .transactions()
        .iter()
        .filter_map(|tx| {
            let v = detect_coinjoin(tx, ts, params);
            v.is_coinjoin.then(|| CoinJoinFlag {
                txid: tx.txid.clone(),
                reason: v.reason,
            })
        })
        .collect();
    ClusterView {
        coinjoin_filter: params.apply_coinjoin_filter,
        partition: multi_input_cluster(ts, params),
        coinjoins,
    }
}
