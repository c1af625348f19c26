//! Case files: the persistent unit of an investigation.

mod evaluate;
mod report;
mod session;
mod store;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::ChainFile;
use crate::heuristics::HeuristicParams;
use crate::scheme::{Answer, Argument};
use crate::statement::Statement;

pub use evaluate::{
    build_framework, evaluate, statement_status, EvalOptions, Evaluation, StatementStatus,
};
pub use report::{
    generate_report, ChainLink, CqLine, Defeater, PremiseLine, ReportEntry, SuspicionReport, Tier,
};
pub use session::CaseSession;
pub use store::{check_integrity, load_case, load_chain, parse_case, save_case, to_json};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainSource {
    Embedded(ChainFile),
    /// Relative paths resolve against the case file's directory.
    Path(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Person,
    Service,
    Marketplace,
    Software,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub label: String,
    pub kind: EntityKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offence {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub evidence_id: String,
    pub statement: Statement,
    pub source: String,
    #[serde(default)]
    pub obtained_via: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CqAnswer {
    pub arg_id: String,
    pub cq_id: String,
    pub answer: Answer,
    pub justification: String,
}

/// Off-chain attribution of an address set to an entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionTag {
    pub addresses: Vec<String>,
    pub entity: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub format_version: u64,
    pub case_id: String,
    #[serde(default)]
    pub title: String,
    pub chain: ChainSource,
    #[serde(default)]
    pub heuristics: HeuristicParams,
    #[serde(default)]
    pub entities: Vec<Entity>,
    #[serde(default)]
    pub offences: Vec<Offence>,
    #[serde(default)]
    pub evidence: Vec<EvidenceItem>,
    #[serde(default)]
    pub arguments: Vec<Argument>,
    #[serde(default)]
    pub cq_answers: Vec<CqAnswer>,
    #[serde(default)]
    pub attribution_tags: Vec<AttributionTag>,
}

impl CaseFile {
    pub fn new(case_id: impl Into<String>, chain: ChainSource) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            case_id: case_id.into(),
            title: String::new(),
            chain,
            heuristics: HeuristicParams::default(),
            entities: Vec::new(),
            offences: Vec::new(),
            evidence: Vec::new(),
            arguments: Vec::new(),
            cq_answers: Vec::new(),
            attribution_tags: Vec::new(),
        }
    }

    pub fn argument(&self, arg_id: &str) -> Option<&Argument> {
        self.arguments.iter().find(|a| a.arg_id == arg_id)
    }

    pub fn argument_mut(&mut self, arg_id: &str) -> Option<&mut Argument> {
        self.arguments.iter_mut().find(|a| a.arg_id == arg_id)
    }

    pub fn evidence_item(&self, evidence_id: &str) -> Option<&EvidenceItem> {
        self.evidence.iter().find(|e| e.evidence_id == evidence_id)
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn add_entity(&mut self, id: &str, label: &str, kind: EntityKind) {
        self.entities.push(Entity {
            id: id.into(),
            label: label.into(),
            kind,
        });
    }

    pub fn add_evidence(
        &mut self,
        evidence_id: &str,
        statement: Statement,
        source: &str,
        obtained_via: &str,
    ) {
        self.evidence.push(EvidenceItem {
            evidence_id: evidence_id.into(),
            statement,
            source: source.into(),
            obtained_via: obtained_via.into(),
        });
    }

    /// Statements the case currently asserts, either as evidence or as the
    /// conclusion of some argument (regardless of acceptability).
    pub fn holds(&self, s: &Statement) -> bool {
        self.evidence.iter().any(|e| &e.statement == s)
            || self.arguments.iter().any(|a| &a.conclusion == s)
    }

    /// Distinct argument conclusions, in argument order.
    pub fn argued_statements(&self) -> Vec<&Statement> {
        let mut out: Vec<&Statement> = Vec::new();
        for a in &self.arguments {
            if !out.contains(&&a.conclusion) {
                out.push(&a.conclusion);
            }
        }
        out
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Person => "person",
            EntityKind::Service => "service",
            EntityKind::Marketplace => "marketplace",
            EntityKind::Software => "software",
        })
    }
}
