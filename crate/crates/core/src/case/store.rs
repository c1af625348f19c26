use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::{CaseFile, ChainSource, FORMAT_VERSION};
use crate::chain::{parse_chain_file, TransactionSet};
use crate::error::CaseError;
use crate::scheme::{scheme, Support};
use crate::statement::Predicate;

fn integrity(msg: impl Into<String>) -> CaseError {
    CaseError::Integrity(msg.into())
}

/// Parses and checks a case file.
pub fn parse_case(raw: &str) -> Result<CaseFile, CaseError> {
    let value: serde_json::Value = serde_json::from_str(raw)?;
    let found = value.get("format_version").and_then(|v| v.as_u64());
    if found != Some(FORMAT_VERSION) {
        return Err(CaseError::Version {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let case: CaseFile = serde_json::from_value(value)?;
    check_integrity(&case)?;
    Ok(case)
}

pub fn to_json(case: &CaseFile) -> String {
    let mut s = serde_json::to_string_pretty(case).expect("case serializes");
    s.push('\n');
    s
}

pub fn load_case(path: &Path) -> Result<CaseFile, CaseError> {
    let raw = fs::read_to_string(path).map_err(|source| CaseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_case(&raw)
}

/// Writes via a sibling temp file and rename, so readers never see a torn file.
pub fn save_case(case: &CaseFile, path: &Path) -> Result<(), CaseError> {
    let io = |source| CaseError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, to_json(case)).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Loads the chain a case refers to; relative paths resolve against `base_dir`.
pub fn load_chain(case: &CaseFile, base_dir: Option<&Path>) -> Result<TransactionSet, CaseError> {
    match &case.chain {
        ChainSource::Embedded(file) => Ok(TransactionSet::from_chain_file(file)?),
        ChainSource::Path(p) => {
            let path = match base_dir {
                Some(dir) if Path::new(p).is_relative() => dir.join(p),
                _ => Path::new(p).to_path_buf(),
            };
            let raw = fs::read(&path).map_err(|source| CaseError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(parse_chain_file(&raw)?)
        }
    }
}

/// Referential checks: ids unique and resolvable, arguments consistent with
/// their schemes, support graph acyclic.
pub fn check_integrity(case: &CaseFile) -> Result<(), CaseError> {
    case.heuristics.validate()?;

    let mut ids = BTreeSet::new();
    for e in &case.entities {
        if !ids.insert(e.id.as_str()) {
            return Err(integrity(format!("duplicate entity id `{}`", e.id)));
        }
    }
    let mut ids = BTreeSet::new();
    for o in &case.offences {
        if !ids.insert(o.id.as_str()) {
            return Err(integrity(format!("duplicate offence id `{}`", o.id)));
        }
    }
    let mut ids = BTreeSet::new();
    for e in &case.evidence {
        if !ids.insert(e.evidence_id.as_str()) {
            return Err(integrity(format!(
                "duplicate evidence id `{}`",
                e.evidence_id
            )));
        }
    }
    let mut ids = BTreeSet::new();
    for a in &case.arguments {
        if !ids.insert(a.arg_id.as_str()) {
            return Err(integrity(format!("duplicate argument id `{}`", a.arg_id)));
        }
    }

    let statements = case
        .evidence
        .iter()
        .map(|e| &e.statement)
        .chain(case.arguments.iter().map(|a| &a.conclusion));
    for s in statements {
        match s.predicate {
            Predicate::Controls if case.entity(s.arg(0)).is_none() => {
                return Err(integrity(format!("unknown entity `{}` in `{s}`", s.arg(0))));
            }
            Predicate::Connected if !case.offences.iter().any(|o| o.id == s.arg(1)) => {
                return Err(integrity(format!(
                    "unknown offence `{}` in `{s}`",
                    s.arg(1)
                )));
            }
            _ => {}
        }
    }

    for a in &case.arguments {
        let def = scheme(&a.scheme_id).ok_or_else(|| {
            integrity(format!(
                "argument `{}` uses unknown scheme `{}`",
                a.arg_id, a.scheme_id
            ))
        })?;
        if a.premises.len() != def.premises.len() || a.premise_support.len() != a.premises.len() {
            return Err(integrity(format!(
                "argument `{}` needs {} premises with one support each",
                a.arg_id,
                def.premises.len()
            )));
        }
        for (t, p) in def.premises.iter().zip(&a.premises) {
            if crate::scheme::fill_template(&t.template, &a.bindings).as_ref() != Ok(p) {
                return Err(integrity(format!(
                    "argument `{}` premise `{p}` does not match its scheme under the bindings",
                    a.arg_id
                )));
            }
        }
        if crate::scheme::fill_template(&def.conclusion.template, &a.bindings).as_ref()
            != Ok(&a.conclusion)
        {
            return Err(integrity(format!(
                "argument `{}` conclusion does not match its scheme under the bindings",
                a.arg_id
            )));
        }
        for (i, (p, s)) in a.premises.iter().zip(&a.premise_support).enumerate() {
            let established = match s {
                Support::Evidence(id) => case
                    .evidence_item(id)
                    .ok_or_else(|| {
                        integrity(format!(
                            "argument `{}` cites unknown evidence `{id}`",
                            a.arg_id
                        ))
                    })?
                    .statement
                    .clone(),
                Support::Argument(id) => case
                    .argument(id)
                    .ok_or_else(|| {
                        integrity(format!(
                            "argument `{}` cites unknown argument `{id}`",
                            a.arg_id
                        ))
                    })?
                    .conclusion
                    .clone(),
            };
            if &established != p {
                return Err(integrity(format!(
                    "argument `{}` premise {i}: {s} does not establish `{p}`",
                    a.arg_id
                )));
            }
        }
        for cq in a.cq_state.keys() {
            if def.cq(cq).is_none() {
                return Err(integrity(format!(
                    "argument `{}` has unknown question `{cq}`",
                    a.arg_id
                )));
            }
        }
    }

    // support graph must be acyclic
    for a in &case.arguments {
        if crate::scheme::support_closure(case, &a.arg_id).contains(&a.arg_id) {
            return Err(integrity(format!(
                "argument `{}` supports itself",
                a.arg_id
            )));
        }
    }

    for ans in &case.cq_answers {
        let arg = case.argument(&ans.arg_id).ok_or_else(|| {
            integrity(format!(
                "answer refers to unknown argument `{}`",
                ans.arg_id
            ))
        })?;
        if arg.scheme().and_then(|d| d.cq(&ans.cq_id)).is_none() {
            return Err(integrity(format!(
                "answer refers to unknown question `{}` of `{}`",
                ans.cq_id, ans.arg_id
            )));
        }
    }
    for tag in &case.attribution_tags {
        if case.entity(&tag.entity).is_none() {
            return Err(integrity(format!(
                "attribution tag names unknown entity `{}`",
                tag.entity
            )));
        }
    }
    Ok(())
}
