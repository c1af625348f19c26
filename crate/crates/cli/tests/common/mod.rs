#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

/// A case directory holding `wsm.json` and `wsm-answered.json`.
pub fn case_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("wsm-case.json"), dir.path().join("wsm.json")).unwrap();
    std::fs::copy(
        fixture("wsm-case-answered.json"),
        dir.path().join("wsm-answered.json"),
    )
    .unwrap();
    dir
}

pub struct Output {
    pub code: i32,
    pub out: String,
    pub err: String,
}

pub fn cli(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cryptarg").chain(args.iter().copied());
    let code = cryptarg_cli::run(argv, &mut out, &mut err, false);
    Output {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}
