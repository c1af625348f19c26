use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::CaseFile;
use crate::af::{
    grounded_labelling, ArgumentationFramework, Attack, AttackReason, Label, Labelling, Node,
    NodeKind,
};
use crate::scheme::{CqKind, CqStatus};
use crate::statement::Statement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    /// Unanswered assumption questions count against their argument.
    pub open_assumptions_attack: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            open_assumptions_attack: true,
        }
    }
}

pub(crate) fn objection_id(arg_id: &str, cq_id: &str) -> String {
    format!("obj-{arg_id}-{cq_id}")
}

/// Arguments that rest, directly or through other arguments, on `arg_id`.
fn dependents(case: &CaseFile) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut direct: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for a in &case.arguments {
        for s in a.supporting_arguments() {
            direct.entry(s).or_default().push(&a.arg_id);
        }
    }
    let mut out = BTreeMap::new();
    for a in &case.arguments {
        let mut seen = BTreeSet::new();
        let mut stack = vec![a.arg_id.as_str()];
        while let Some(x) = stack.pop() {
            for &d in direct.get(x).into_iter().flatten() {
                if seen.insert(d) {
                    stack.push(d);
                }
            }
        }
        out.insert(a.arg_id.as_str(), seen);
    }
    out
}

/// Compiles arguments and question states into a framework.
///
/// Every attack on an argument is also directed at each argument that
/// depends on it through premise support.
pub fn build_framework(case: &CaseFile, opts: &EvalOptions) -> ArgumentationFramework {
    let mut nodes: Vec<Node> = case
        .arguments
        .iter()
        .map(|a| Node {
            id: a.arg_id.clone(),
            kind: NodeKind::Argument,
        })
        .collect();
    let mut direct: Vec<(String, String, AttackReason)> = Vec::new();

    for a in &case.arguments {
        for b in &case.arguments {
            if a.arg_id == b.arg_id {
                continue;
            }
            if a.conclusion.is_contrary_of(&b.conclusion) {
                direct.push((a.arg_id.clone(), b.arg_id.clone(), AttackReason::Rebut));
            }
            if b.premises.iter().any(|p| a.conclusion.is_contrary_of(p)) {
                direct.push((a.arg_id.clone(), b.arg_id.clone(), AttackReason::Undermine));
            }
        }
    }

    for a in &case.arguments {
        let Some(def) = a.scheme() else { continue };
        for q in &def.cqs {
            let status = a.cq_status(&q.cq_id);
            let reason = match (q.kind, status) {
                (CqKind::Assumption, CqStatus::Unfavourable) => AttackReason::CqAssumption,
                (CqKind::Assumption, CqStatus::Open) if opts.open_assumptions_attack => {
                    AttackReason::CqAssumption
                }
                (CqKind::Exception, CqStatus::Unfavourable) => AttackReason::CqException,
                _ => continue,
            };
            let id = objection_id(&a.arg_id, &q.cq_id);
            nodes.push(Node {
                id: id.clone(),
                kind: NodeKind::Objection {
                    arg_id: a.arg_id.clone(),
                    cq_id: q.cq_id.clone(),
                },
            });
            direct.push((id, a.arg_id.clone(), reason));
        }
    }

    let deps = dependents(case);
    let mut best: BTreeMap<(String, String), AttackReason> = BTreeMap::new();
    let mut add = |x: &str, y: &str, r: AttackReason| {
        if x == y {
            return;
        }
        best.entry((x.to_owned(), y.to_owned()))
            .and_modify(|old| *old = (*old).min(r))
            .or_insert(r);
    };
    for (x, y, r) in &direct {
        add(x, y, *r);
        for d in deps.get(y.as_str()).into_iter().flatten() {
            add(x, d, *r);
        }
    }
    let attacks = best
        .into_iter()
        .map(|((attacker, target), reason)| Attack {
            attacker,
            target,
            reason,
        })
        .collect();
    ArgumentationFramework { nodes, attacks }
}

/// IN if some concluding argument is IN, OUT if there is at least one and
/// all are OUT, UNDEC otherwise.
pub fn statement_status(case: &CaseFile, labelling: &Labelling, s: &Statement) -> Label {
    let labels: Vec<Label> = case
        .arguments
        .iter()
        .filter(|a| &a.conclusion == s)
        .map(|a| labelling.get(&a.arg_id).unwrap_or(Label::Undec))
        .collect();
    if labels.contains(&Label::In) {
        Label::In
    } else if !labels.is_empty() && labels.iter().all(|l| *l == Label::Out) {
        Label::Out
    } else {
        Label::Undec
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementStatus {
    pub statement: Statement,
    pub status: Label,
    pub arguments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub options: EvalOptions,
    pub framework: ArgumentationFramework,
    pub labelling: Labelling,
    pub statements: Vec<StatementStatus>,
}

impl Evaluation {
    pub fn status_of(&self, s: &Statement) -> Label {
        self.statements
            .iter()
            .find(|x| &x.statement == s)
            .map(|x| x.status)
            .unwrap_or(Label::Undec)
    }

    pub fn label_of(&self, id: &str) -> Option<Label> {
        self.labelling.get(id)
    }
}

/// Grounded evaluation of every argued statement.
pub fn evaluate(case: &CaseFile, opts: &EvalOptions) -> Evaluation {
    let framework = build_framework(case, opts);
    let labelling = grounded_labelling(&framework);
    let statements = case
        .argued_statements()
        .into_iter()
        .map(|s| StatementStatus {
            statement: s.clone(),
            status: statement_status(case, &labelling, s),
            arguments: case
                .arguments
                .iter()
                .filter(|a| &a.conclusion == s)
                .map(|a| a.arg_id.clone())
                .collect(),
        })
        .collect();
    Evaluation {
        options: *opts,
        framework,
        labelling,
        statements,
    }
}
