//! Regenerates the bundled JSON fixtures: `cargo run -p cryptarg-core --example write_fixtures`.

use std::path::Path;

use cryptarg_core::case::to_json;
use cryptarg_core::fixtures;

fn chain_json(c: &cryptarg_core::ChainFile) -> String {
    let mut s = serde_json::to_string_pretty(c).expect("serializes");
    s.push('\n');
    s
}

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("wsm-case.json"), to_json(&fixtures::wsm_case()))?;
    std::fs::write(
        dir.join("wsm-case-answered.json"),
        to_json(&fixtures::wsm_case_answered()),
    )?;
    std::fs::write(
        dir.join("wsm-chain.json"),
        chain_json(&fixtures::wsm_chain()),
    )?;
    std::fs::write(
        dir.join("coinjoin-chain.json"),
        chain_json(&fixtures::coinjoin_chain()),
    )?;
    Ok(())
}
