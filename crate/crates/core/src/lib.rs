//! Evidential reasoning for cryptocurrency forensics.
//!
//! Address clustering over a UTXO graph, argumentation schemes with critical
//! questions, and grounded evaluation of the resulting argument graph.

pub mod af;
pub mod case;
pub mod chain;
pub mod error;
pub mod fixtures;
pub mod heuristics;
pub mod scheme;
pub mod statement;
pub mod synth;

pub use af::{ArgumentationFramework, Label, Labelling};
pub use case::{CaseFile, CaseSession, EvalOptions, Evaluation, SuspicionReport, Tier};
pub use chain::{parse_chain_file, ChainFile, Outpoint, Transaction, TransactionSet, TxOutput};
pub use error::{AfError, CaseError, ChainError, SchemeError, StatementError};
pub use heuristics::{ClusterPartition, HeuristicParams};
pub use scheme::{Answer, Argument, SchemeDefinition};
pub use statement::{Predicate, Statement};
