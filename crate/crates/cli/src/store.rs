//! A directory of case files, one `{case_id}.json` per case.

use std::path::{Path, PathBuf};

use cryptarg_core::case::{load_case, save_case};
use cryptarg_core::{CaseError, CaseFile, CaseSession};

use crate::views::CaseSummary;

/// Readable cases, and the file name and error of each unreadable one.
pub type Listing = (Vec<CaseSummary>, Vec<(String, CaseError)>);

#[derive(Debug, Clone)]
pub struct CaseStore {
    dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("invalid case id `{0}`")]
    BadId(String),
    #[error("case `{0}` not found")]
    NotFound(String),
    #[error("case `{0}` already exists")]
    Exists(String),
    #[error(transparent)]
    Case(#[from] CaseError),
}

/// Ids become file names, so keep them to a safe alphabet.
pub fn valid_case_id(id: &str) -> bool {
    let mut chars = id.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphanumeric())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && id.len() <= 128
}

impl CaseStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !valid_case_id(id) {
            return Err(StoreError::BadId(id.to_owned()));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    pub fn open(&self, id: &str) -> Result<CaseSession, StoreError> {
        let path = self.path_of(id)?;
        if !path.is_file() {
            return Err(StoreError::NotFound(id.to_owned()));
        }
        Ok(CaseSession::open(&path)?)
    }

    /// Writes back to the file the case was opened from.
    pub fn save(&self, id: &str, session: &CaseSession) -> Result<(), StoreError> {
        let path = self.path_of(id)?;
        Ok(session.save(&path)?)
    }

    pub fn create(&self, case: &CaseFile) -> Result<(), StoreError> {
        let path = self.path_of(&case.case_id)?;
        if path.exists() {
            return Err(StoreError::Exists(case.case_id.clone()));
        }
        Ok(save_case(case, &path)?)
    }

    /// Summaries of every readable case, by case id. Unreadable files are
    /// returned separately with their error.
    pub fn list(&self) -> Result<Listing, CaseError> {
        let entries = std::fs::read_dir(&self.dir).map_err(|source| CaseError::Io {
            path: self.dir.display().to_string(),
            source,
        })?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .filter(|p| {
                p.file_stem()
                    .and_then(|s| s.to_str())
                    .is_some_and(valid_case_id)
            })
            .collect();
        files.sort();
        let mut good = Vec::new();
        let mut bad = Vec::new();
        for f in files {
            let name = f
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            match load_case(&f) {
                Ok(c) => good.push(CaseSummary::of(&c)),
                Err(e) => bad.push((name, e)),
            }
        }
        good.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        Ok((good, bad))
    }
}
