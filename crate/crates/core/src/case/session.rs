use std::path::{Path, PathBuf};

use super::evaluate::{evaluate, EvalOptions, Evaluation};
use super::report::{report_from, SuspicionReport};
use super::store::{check_integrity, load_case, load_chain, save_case};
use super::CaseFile;
use crate::chain::TransactionSet;
use crate::error::CaseError;
use crate::heuristics::{multi_input_cluster, ClusterPartition};
use crate::scheme::{self, Answer, Argument};

/// A loaded case with its chain and evaluation cached. Every mutation goes
/// through the session so the caches are dropped when the case changes.
#[derive(Debug)]
pub struct CaseSession {
    case: CaseFile,
    base_dir: Option<PathBuf>,
    options: EvalOptions,
    chain: Option<TransactionSet>,
    evaluation: Option<Evaluation>,
}

impl CaseSession {
    pub fn new(case: CaseFile, base_dir: Option<PathBuf>) -> Self {
        Self {
            case,
            base_dir,
            options: EvalOptions::default(),
            chain: None,
            evaluation: None,
        }
    }

    pub fn open(path: &Path) -> Result<Self, CaseError> {
        let case = load_case(path)?;
        Ok(Self::new(case, path.parent().map(Path::to_path_buf)))
    }

    pub fn save(&self, path: &Path) -> Result<(), CaseError> {
        save_case(&self.case, path)
    }

    pub fn case(&self) -> &CaseFile {
        &self.case
    }

    pub fn into_case(self) -> CaseFile {
        self.case
    }

    pub fn options(&self) -> EvalOptions {
        self.options
    }

    pub fn set_options(&mut self, options: EvalOptions) {
        if options != self.options {
            self.options = options;
            self.evaluation = None;
        }
    }

    pub fn transactions(&mut self) -> Result<&TransactionSet, CaseError> {
        if self.chain.is_none() {
            self.chain = Some(load_chain(&self.case, self.base_dir.as_deref())?);
        }
        Ok(self.chain.as_ref().expect("just loaded"))
    }

    pub fn clusters(&mut self) -> Result<ClusterPartition, CaseError> {
        let params = self.case.heuristics;
        Ok(multi_input_cluster(self.transactions()?, &params))
    }

    pub fn evaluation(&mut self) -> &Evaluation {
        if self.evaluation.is_none() {
            self.evaluation = Some(evaluate(&self.case, &self.options));
        }
        self.evaluation.as_ref().expect("just computed")
    }

    pub fn report(&mut self) -> Result<SuspicionReport, CaseError> {
        self.transactions()?;
        self.evaluation();
        Ok(report_from(
            &self.case,
            self.chain.as_ref(),
            self.evaluation.as_ref().expect("computed"),
        ))
    }

    /// Applies `f` to the case; the change is kept only if the case still
    /// passes the integrity checks.
    pub fn mutate<T>(
        &mut self,
        f: impl FnOnce(&mut CaseFile) -> Result<T, CaseError>,
    ) -> Result<T, CaseError> {
        let mut draft = self.case.clone();
        let out = f(&mut draft)?;
        check_integrity(&draft)?;
        if draft.chain != self.case.chain || draft.heuristics != self.case.heuristics {
            self.chain = None;
        }
        self.case = draft;
        self.evaluation = None;
        Ok(out)
    }

    pub fn answer_cq(
        &mut self,
        arg_id: &str,
        cq_id: &str,
        answer: Answer,
        justification: &str,
    ) -> Result<(), CaseError> {
        self.mutate(|c| Ok(scheme::answer_cq(c, arg_id, cq_id, answer, justification)?))
    }

    pub fn auto_instantiate(&mut self) -> Result<Vec<Argument>, CaseError> {
        self.transactions()?;
        let ts = self.chain.take().expect("loaded");
        let result = self.mutate(|c| Ok(scheme::auto_instantiate(c, &ts)));
        self.chain = Some(ts);
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::ChainSource;
    use crate::chain::ChainFile;

    #[test]
    fn evaluation_cache_is_dropped_on_mutation() {
        let case = CaseFile::new(
            "c",
            ChainSource::Embedded(ChainFile {
                transactions: vec![],
            }),
        );
        let mut s = CaseSession::new(case, None);
        assert!(s.evaluation().statements.is_empty());
        let err = s
            .answer_cq("missing", "cq1", Answer::Favourable, "")
            .unwrap_err();
        assert!(matches!(err, CaseError::Scheme(_)));
        s.mutate(|c| {
            c.title = "renamed".into();
            Ok(())
        })
        .unwrap();
        assert_eq!(s.case().title, "renamed");
        assert!(s.evaluation.is_none());
    }
}
