//! Closed statement vocabulary.
//!
//! Statements are written `predicate(arg, ...)`, optionally prefixed with
//! `not `. Some argument positions hold a nested statement (a proposition),
//! e.g. `asserts(BPPC, controls(X, addr))`. Nested statements are kept in
//! canonical text form so a statement is always a flat list of strings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::StatementError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgKind {
    Constant,
    Proposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    /// controls(entity, address)
    Controls,
    /// linked(a, b): two identifiers belong to the same real-world entity.
    Linked,
    /// connected(subject, offence)
    Connected,
    /// is_change(txid, address)
    IsChange,
    /// reliable(source)
    Reliable,
    /// position_to_know(source, domain)
    PositionToKnow,
    /// sign_of(sign, signified)
    SignOf,
    /// explains(hypothesis, findings)
    Explains,
    /// links(software, address, address)
    Links,
    /// co_spent(txid, address, address)
    CoSpent,
    /// multi_output(txid)
    MultiOutput,
    /// asserts(source, proposition)
    Asserts,
    /// finding(findings)
    Finding,
    /// best_explanation(hypothesis, findings)
    BestExplanation,
}

use ArgKind::{Constant as C, Proposition as P};

impl Predicate {
    pub const ALL: [Predicate; 14] = [
        Predicate::Controls,
        Predicate::Linked,
        Predicate::Connected,
        Predicate::IsChange,
        Predicate::Reliable,
        Predicate::PositionToKnow,
        Predicate::SignOf,
        Predicate::Explains,
        Predicate::Links,
        Predicate::CoSpent,
        Predicate::MultiOutput,
        Predicate::Asserts,
        Predicate::Finding,
        Predicate::BestExplanation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Controls => "controls",
            Predicate::Linked => "linked",
            Predicate::Connected => "connected",
            Predicate::IsChange => "is_change",
            Predicate::Reliable => "reliable",
            Predicate::PositionToKnow => "position_to_know",
            Predicate::SignOf => "sign_of",
            Predicate::Explains => "explains",
            Predicate::Links => "links",
            Predicate::CoSpent => "co_spent",
            Predicate::MultiOutput => "multi_output",
            Predicate::Asserts => "asserts",
            Predicate::Finding => "finding",
            Predicate::BestExplanation => "best_explanation",
        }
    }

    pub fn signature(self) -> &'static [ArgKind] {
        match self {
            Predicate::Reliable | Predicate::MultiOutput | Predicate::Finding => &[C],
            Predicate::Controls
            | Predicate::Linked
            | Predicate::Connected
            | Predicate::IsChange
            | Predicate::PositionToKnow => &[C, C],
            Predicate::SignOf => &[P, P],
            Predicate::Explains | Predicate::BestExplanation => &[P, C],
            Predicate::Asserts => &[C, P],
            Predicate::Links | Predicate::CoSpent => &[C, C, C],
        }
    }

    pub fn arity(self) -> usize {
        self.signature().len()
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    pub predicate: Predicate,
    pub args: Vec<String>,
    pub negated: bool,
}

impl Statement {
    /// Builds a statement, checking arity and normalising nested propositions.
    pub fn new<I, S>(predicate: Predicate, args: I) -> Result<Self, StatementError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        let sig = predicate.signature();
        if args.len() != sig.len() {
            return Err(StatementError::Arity {
                predicate: predicate.name().into(),
                expected: sig.len(),
                got: args.len(),
            });
        }
        let args = args
            .into_iter()
            .zip(sig)
            .map(|(a, kind)| normalise_arg(&a, *kind))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            predicate,
            args,
            negated: false,
        })
    }

    pub fn negate(&self) -> Self {
        Self {
            negated: !self.negated,
            ..self.clone()
        }
    }

    pub fn is_contrary_of(&self, other: &Statement) -> bool {
        self.negated != other.negated
            && self.predicate == other.predicate
            && self.args == other.args
    }

    pub fn arg(&self, i: usize) -> &str {
        &self.args[i]
    }
}

pub(crate) fn normalise_arg(raw: &str, kind: ArgKind) -> Result<String, StatementError> {
    match kind {
        ArgKind::Constant => {
            let t = raw.trim();
            if t.is_empty()
                || t.chars()
                    .any(|c| matches!(c, '(' | ')' | ',' | '\n' | '\r'))
            {
                Err(StatementError::Constant(raw.to_owned()))
            } else {
                Ok(t.to_owned())
            }
        }
        ArgKind::Proposition => Ok(raw.parse::<Statement>()?.to_string()),
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        write!(f, "{}({})", self.predicate, self.args.join(", "))
    }
}

impl FromStr for Statement {
    type Err = StatementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || StatementError::Syntax(s.to_owned());
        let mut body = s.trim();
        let mut negated = false;
        if let Some(rest) = body.strip_prefix("not ").or_else(|| body.strip_prefix('¬')) {
            negated = true;
            body = rest.trim_start();
        }
        let open = body.find('(').ok_or_else(syntax)?;
        let inner = body[open + 1..].strip_suffix(')').ok_or_else(syntax)?;
        let name = body[..open].trim();
        let predicate = Predicate::from_name(name)
            .ok_or_else(|| StatementError::UnknownPredicate(name.to_owned()))?;

        let mut args = Vec::new();
        let mut depth = 0usize;
        let mut start = 0;
        for (i, c) in inner.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.checked_sub(1).ok_or_else(syntax)?,
                ',' if depth == 0 => {
                    args.push(&inner[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(syntax());
        }
        if !inner.trim().is_empty() {
            args.push(&inner[start..]);
        }
        let mut st = Statement::new(predicate, args)?;
        st.negated = negated;
        Ok(st)
    }
}

impl Serialize for Statement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Statement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
