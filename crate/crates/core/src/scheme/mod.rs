//! Argumentation schemes, their instantiation and critical-question state.

mod catalog;
mod engine;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::statement::{Predicate, Statement};

pub use catalog::{catalog, scheme, scheme_ids};
pub use engine::{
    answer_cq, auto_instantiate, instantiate, list_open_cqs, remove_argument, set_premise_support,
    Instantiation, OpenCq,
};
pub(crate) use engine::{fill as fill_template, support_closure};

pub const SUSPICION: &str = "suspicion-through-address-control";
pub const CLUSTER_FROM_SOFTWARE: &str = "cluster-from-software";
pub const CLUSTER_FROM_MULTI_INPUT: &str = "cluster-from-multi-input";
pub const CLUSTER_BY_CHANGE: &str = "cluster-by-change-address";
pub const POSITION_TO_KNOW: &str = "position-to-know";
pub const SIGN: &str = "argument-from-sign";
pub const ABDUCTIVE: &str = "abductive-inference";

/// Formal shape of a premise or conclusion: either an atom over scheme
/// variables, or a variable that is bound to a whole statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementTemplate {
    Atom {
        predicate: Predicate,
        variables: Vec<String>,
    },
    Proposition {
        variable: String,
    },
}

impl StatementTemplate {
    pub fn variables(&self) -> Vec<&str> {
        match self {
            StatementTemplate::Atom { variables, .. } => {
                variables.iter().map(String::as_str).collect()
            }
            StatementTemplate::Proposition { variable } => vec![variable.as_str()],
        }
    }
}

impl fmt::Display for StatementTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatementTemplate::Atom {
                predicate,
                variables,
            } => write!(f, "{predicate}({})", variables.join(", ")),
            StatementTemplate::Proposition { variable } => f.write_str(variable),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseTemplate {
    /// Wording as the scheme is usually published.
    pub text: String,
    pub template: StatementTemplate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CqKind {
    /// Must be backed by the proponent once asked.
    Assumption,
    /// Defeats only when the opponent shows it applies.
    Exception,
    /// Seeks corroboration; never attacks.
    Supportive,
}

impl fmt::Display for CqKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CqKind::Assumption => "assumption",
            CqKind::Exception => "exception",
            CqKind::Supportive => "supportive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum CqTarget {
    Premise(usize),
    Applicability,
    Conclusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalQuestion {
    pub cq_id: String,
    pub text: String,
    pub kind: CqKind,
    pub target: CqTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDefinition {
    pub scheme_id: String,
    pub name: String,
    /// Crypto-forensics specific scheme (as opposed to a standard one).
    pub custom: bool,
    pub premises: Vec<PremiseTemplate>,
    pub conclusion: PremiseTemplate,
    pub cqs: Vec<CriticalQuestion>,
}

impl SchemeDefinition {
    /// All variables in first-use order.
    pub fn variables(&self) -> Vec<&str> {
        let mut vars: Vec<&str> = Vec::new();
        for t in self.premises.iter().chain([&self.conclusion]) {
            for v in t.template.variables() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        vars
    }

    pub fn cq(&self, cq_id: &str) -> Option<&CriticalQuestion> {
        self.cqs.iter().find(|q| q.cq_id == cq_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Evidence(String),
    Argument(String),
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::Evidence(id) => write!(f, "evidence {id}"),
            Support::Argument(id) => write!(f, "argument {id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CqStatus {
    Open,
    Favourable,
    Unfavourable,
}

impl fmt::Display for CqStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CqStatus::Open => "open",
            CqStatus::Favourable => "favourable",
            CqStatus::Unfavourable => "unfavourable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Favourable,
    Unfavourable,
}

impl From<Answer> for CqStatus {
    fn from(a: Answer) -> Self {
        match a {
            Answer::Favourable => CqStatus::Favourable,
            Answer::Unfavourable => CqStatus::Unfavourable,
        }
    }
}

impl std::str::FromStr for Answer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "favourable" | "favorable" => Ok(Answer::Favourable),
            "unfavourable" | "unfavorable" => Ok(Answer::Unfavourable),
            other => Err(format!(
                "answer must be favourable or unfavourable, got `{other}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CqState {
    pub status: CqStatus,
    #[serde(default)]
    pub justification: String,
}

impl CqState {
    pub fn open() -> Self {
        Self {
            status: CqStatus::Open,
            justification: String::new(),
        }
    }
}

/// A scheme applied to concrete constants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub arg_id: String,
    pub scheme_id: String,
    pub bindings: BTreeMap<String, String>,
    pub premises: Vec<Statement>,
    pub conclusion: Statement,
    pub premise_support: Vec<Support>,
    pub cq_state: BTreeMap<String, CqState>,
}

impl Argument {
    pub fn scheme(&self) -> Option<&'static SchemeDefinition> {
        scheme(&self.scheme_id)
    }

    pub fn cq_status(&self, cq_id: &str) -> CqStatus {
        self.cq_state
            .get(cq_id)
            .map(|s| s.status)
            .unwrap_or(CqStatus::Open)
    }

    pub fn supporting_arguments(&self) -> impl Iterator<Item = &str> {
        self.premise_support.iter().filter_map(|s| match s {
            Support::Argument(id) => Some(id.as_str()),
            Support::Evidence(_) => None,
        })
    }
}
