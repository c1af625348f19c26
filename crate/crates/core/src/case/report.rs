use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate, EvalOptions, Evaluation};
use super::CaseFile;
use crate::af::{Label, NodeKind};
use crate::chain::TransactionSet;
use crate::heuristics::{multi_input_cluster, Merge};
use crate::scheme::{list_open_cqs, Argument, CqKind, CqStatus, OpenCq, Support};
use crate::statement::Statement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Corroborated,
    Presumptive,
    Contested,
    Defeated,
}

impl Tier {
    /// The tier rule: IN splits on whether any question on the supporting
    /// chain is still open.
    pub fn of(status: Label, chain_has_open_cq: bool) -> Tier {
        match (status, chain_has_open_cq) {
            (Label::In, false) => Tier::Corroborated,
            (Label::In, true) => Tier::Presumptive,
            (Label::Undec, _) => Tier::Contested,
            (Label::Out, _) => Tier::Defeated,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Corroborated => "corroborated",
            Tier::Presumptive => "presumptive",
            Tier::Contested => "contested",
            Tier::Defeated => "defeated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CqLine {
    pub cq_id: String,
    pub text: String,
    pub kind: CqKind,
    pub status: CqStatus,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseLine {
    pub statement: Statement,
    pub support: Support,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLink {
    pub arg_id: String,
    pub scheme_id: String,
    pub scheme_name: String,
    pub label: Label,
    pub bindings: BTreeMap<String, String>,
    pub premises: Vec<PremiseLine>,
    pub conclusion: Statement,
    pub cqs: Vec<CqLine>,
    /// Transactions the argument's bindings refer to.
    pub txids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defeater {
    pub attacker: String,
    pub target: String,
    pub reason: String,
    /// Question text when the attacker is an objection node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub statement: Statement,
    pub status: Label,
    pub tier: Tier,
    pub chain: Vec<ChainLink>,
    pub open_cqs: Vec<OpenCq>,
    pub defeated_by: Vec<Defeater>,
    /// Co-spend merges behind the clusters of addresses used on the chain.
    pub cluster_merges: Vec<Merge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuspicionReport {
    pub case_id: String,
    pub title: String,
    pub entries: Vec<ReportEntry>,
    pub open_cqs: Vec<OpenCq>,
    pub note: String,
}

const NOTE: &str = "Tiers describe the state of the argument graph only. \
Corroborated: accepted and every critical question on the supporting chain answered. \
Presumptive: accepted with questions still open. Contested: neither accepted nor rejected. \
Defeated: rejected. No tier corresponds to a legal degree of suspicion such as initial \
suspicion, qualified initial suspicion or probable cause; that assessment is left to the reader.";

/// Arguments concluding `s` followed by everything they rest on, in case order.
fn chain_of<'a>(case: &'a CaseFile, s: &Statement) -> Vec<&'a Argument> {
    let mut ids = BTreeSet::new();
    for a in case.arguments.iter().filter(|a| &a.conclusion == s) {
        ids.insert(a.arg_id.as_str());
        ids.extend(
            crate::scheme::support_closure(case, &a.arg_id)
                .into_iter()
                .filter_map(|id| case.argument(&id).map(|x| x.arg_id.as_str())),
        );
    }
    case.arguments
        .iter()
        .filter(|a| ids.contains(a.arg_id.as_str()))
        .collect()
}

fn has_open(arg: &Argument) -> bool {
    arg.scheme().is_some_and(|d| {
        d.cqs
            .iter()
            .any(|q| arg.cq_status(&q.cq_id) == CqStatus::Open)
    })
}

fn is_txid(ts: Option<&TransactionSet>, v: &str) -> bool {
    ts.is_some_and(|ts| ts.get(v).is_some())
}

/// Builds the report from a fresh grounded evaluation.
pub fn generate_report(
    case: &CaseFile,
    ts: Option<&TransactionSet>,
    opts: &EvalOptions,
) -> SuspicionReport {
    let eval = evaluate(case, opts);
    report_from(case, ts, &eval)
}

pub(crate) fn report_from(
    case: &CaseFile,
    ts: Option<&TransactionSet>,
    eval: &Evaluation,
) -> SuspicionReport {
    let partition = ts.map(|ts| multi_input_cluster(ts, &case.heuristics));
    let all_open = list_open_cqs(case);
    let mut entries = Vec::new();

    for st in &eval.statements {
        let chain = chain_of(case, &st.statement);
        let ids: BTreeSet<&str> = chain.iter().map(|a| a.arg_id.as_str()).collect();

        // IN statements are judged on the chains of their accepted arguments
        let any_clean_in = case
            .arguments
            .iter()
            .filter(|a| a.conclusion == st.statement && eval.label_of(&a.arg_id) == Some(Label::In))
            .any(|a| {
                std::iter::once(a.arg_id.clone())
                    .chain(crate::scheme::support_closure(case, &a.arg_id))
                    .filter_map(|id| case.argument(&id))
                    .all(|x| !has_open(x))
            });
        let tier = Tier::of(st.status, !any_clean_in);

        let links = chain
            .iter()
            .map(|a| {
                let def = a.scheme();
                ChainLink {
                    arg_id: a.arg_id.clone(),
                    scheme_id: a.scheme_id.clone(),
                    scheme_name: def.map(|d| d.name.clone()).unwrap_or_default(),
                    label: eval.label_of(&a.arg_id).unwrap_or(Label::Undec),
                    bindings: a.bindings.clone(),
                    premises: a
                        .premises
                        .iter()
                        .zip(&a.premise_support)
                        .map(|(p, s)| PremiseLine {
                            statement: p.clone(),
                            support: s.clone(),
                        })
                        .collect(),
                    conclusion: a.conclusion.clone(),
                    cqs: def
                        .map(|d| {
                            d.cqs
                                .iter()
                                .map(|q| {
                                    let state = a.cq_state.get(&q.cq_id);
                                    CqLine {
                                        cq_id: q.cq_id.clone(),
                                        text: q.text.clone(),
                                        kind: q.kind,
                                        status: a.cq_status(&q.cq_id),
                                        justification: state
                                            .map(|s| s.justification.clone())
                                            .unwrap_or_default(),
                                    }
                                })
                                .collect()
                        })
                        .unwrap_or_default(),
                    txids: a
                        .bindings
                        .values()
                        .filter(|v| is_txid(ts, v))
                        .cloned()
                        .collect(),
                }
            })
            .collect();

        let defeated_by = eval
            .framework
            .attacks
            .iter()
            .filter(|att| ids.contains(att.target.as_str()))
            .filter(|att| eval.label_of(&att.attacker) == Some(Label::In))
            .map(|att| {
                let question = match eval.framework.node(&att.attacker).map(|n| &n.kind) {
                    Some(NodeKind::Objection { arg_id, cq_id }) => case
                        .argument(arg_id)
                        .and_then(|a| a.scheme())
                        .and_then(|d| d.cq(cq_id))
                        .map(|q| q.text.clone()),
                    _ => None,
                };
                Defeater {
                    attacker: att.attacker.clone(),
                    target: att.target.clone(),
                    reason: att.reason.to_string(),
                    question,
                }
            })
            .collect();

        let mut cluster_merges = Vec::new();
        if let Some(p) = &partition {
            let addrs: BTreeSet<&str> = chain
                .iter()
                .flat_map(|a| a.bindings.values().map(String::as_str))
                .collect();
            let mut seen = BTreeSet::new();
            for addr in addrs {
                for m in p.merges_for(addr) {
                    if seen.insert((m.txid.clone(), m.left.clone(), m.right.clone())) {
                        cluster_merges.push(m.clone());
                    }
                }
            }
        }

        entries.push(ReportEntry {
            statement: st.statement.clone(),
            status: st.status,
            tier,
            chain: links,
            open_cqs: all_open
                .iter()
                .filter(|o| ids.contains(o.arg_id.as_str()))
                .cloned()
                .collect(),
            defeated_by,
            cluster_merges,
        });
    }

    SuspicionReport {
        case_id: case.case_id.clone(),
        title: case.title.clone(),
        entries,
        open_cqs: all_open,
        note: NOTE.to_owned(),
    }
}

impl SuspicionReport {
    pub fn entry(&self, s: &Statement) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| &e.statement == s)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let title = if self.title.is_empty() {
            &self.case_id
        } else {
            &self.title
        };
        let _ = writeln!(md, "# Suspicion report: {title}\n");
        let _ = writeln!(md, "Case `{}`.\n", self.case_id);
        let _ = writeln!(md, "## Summary\n");
        let _ = writeln!(md, "| Statement | Status | Tier |");
        let _ = writeln!(md, "|---|---|---|");
        for e in &self.entries {
            let _ = writeln!(md, "| `{}` | {} | {} |", e.statement, e.status, e.tier);
        }
        md.push('\n');

        for e in &self.entries {
            let _ = writeln!(md, "## `{}`\n", e.statement);
            let _ = writeln!(md, "Status **{}**, tier **{}**.\n", e.status, e.tier);
            let _ = writeln!(md, "### Supporting chain\n");
            for link in &e.chain {
                let _ = writeln!(
                    md,
                    "- `{}` ({}) is {}: concludes `{}`",
                    link.arg_id, link.scheme_name, link.label, link.conclusion
                );
                let binds: Vec<String> = link
                    .bindings
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                let _ = writeln!(md, "  - bindings: {}", binds.join(", "));
                for p in &link.premises {
                    let _ = writeln!(md, "  - premise `{}` from {}", p.statement, p.support);
                }
                if !link.txids.is_empty() {
                    let _ = writeln!(md, "  - transactions: {}", link.txids.join(", "));
                }
                for q in &link.cqs {
                    let just = if q.justification.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", q.justification)
                    };
                    let _ = writeln!(
                        md,
                        "  - {} [{}, {}]{}: {}",
                        q.cq_id, q.kind, q.status, just, q.text
                    );
                }
            }
            md.push('\n');
            if !e.defeated_by.is_empty() {
                let _ = writeln!(md, "### Defeated by\n");
                for d in &e.defeated_by {
                    let _ = write!(
                        md,
                        "- `{}` attacks `{}` ({})",
                        d.attacker, d.target, d.reason
                    );
                    if let Some(q) = &d.question {
                        let _ = write!(md, ": {q}");
                    }
                    md.push('\n');
                }
                md.push('\n');
            }
            if !e.cluster_merges.is_empty() {
                let _ = writeln!(md, "### Cluster merges\n");
                for m in &e.cluster_merges {
                    let _ = writeln!(
                        md,
                        "- {} + {} merged by transaction {}",
                        m.left, m.right, m.txid
                    );
                }
                md.push('\n');
            }
        }

        let _ = writeln!(md, "## Open critical questions\n");
        if self.open_cqs.is_empty() {
            let _ = writeln!(md, "None.");
        }
        for o in &self.open_cqs {
            let _ = writeln!(md, "- `{}` {}: {}", o.arg_id, o.cq_id, o.text);
        }
        let _ = writeln!(md, "\n## Note on tiers\n\n{}", self.note);
        md
    }
}
