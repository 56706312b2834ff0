#![allow(dead_code)]

use std::path::PathBuf;

use gck::{load_scenario, Overrides, Scenario};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

pub fn bundled(name: &str) -> Scenario {
    load_scenario(&scenario_path(name), &Overrides::default())
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Writes `text` to a temporary scenario file and loads it.
pub fn load_text(text: &str) -> Result<Scenario, gck::LoadError> {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("inline.scn");
    std::fs::write(&path, text).expect("write scenario");
    load_scenario(&path, &Overrides::default())
}
