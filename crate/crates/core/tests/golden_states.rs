//! The shipped state files under `data/states` must match the generators.
//! Run with `LOCTANGLE_BLESS=1` to rewrite them.

use std::path::PathBuf;

use loctangle::families::{bell_pair_product, family_state, ghz4, w4, FamilyId, FamilySpec};
use loctangle::qstate::{read_state, state_to_json, write_state, StateVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct IndexEntry {
    file: String,
    family: FamilyId,
    params: Vec<f64>,
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/states")
}

fn family_points() -> Vec<(FamilyId, Vec<f64>)> {
    use FamilyId::*;
    vec![
        (Gabcd, vec![1.0, 1.0, 1.0, 1.0]),
        (Labc2, vec![1.0, 0.5, 1.0]),
        (La2b2, vec![1.0, 1.0]),
        (Lab3, vec![1.0, 1.0]),
        (La4, vec![0.0]),
        (La2O3Plus1, vec![0.0]),
        (L05Plus3Bar, vec![]),
        (L07Plus1Bar, vec![]),
        (L03O3, vec![]),
    ]
}

fn expected() -> (Vec<(String, StateVector)>, Vec<IndexEntry>) {
    let mut files = vec![
        ("ghz4.json".to_string(), ghz4()),
        ("w4.json".to_string(), w4()),
        ("bellbell.json".to_string(), bell_pair_product()),
    ];
    let mut index = Vec::new();
    for (family, params) in family_points() {
        let file = format!("{}.json", family.name().to_lowercase());
        let spec = FamilySpec::real(family, &params).unwrap();
        files.push((file.clone(), family_state(&spec).unwrap()));
        index.push(IndexEntry { file, family, params });
    }
    (files, index)
}

#[test]
fn shipped_states_match_generators() {
    let dir = data_dir();
    let (files, index) = expected();
    if std::env::var_os("LOCTANGLE_BLESS").is_some() {
        for (name, state) in &files {
            write_state(dir.join(name), state).unwrap();
        }
        let text = serde_json::to_string_pretty(&index).unwrap() + "\n";
        std::fs::write(dir.join("families.json"), text).unwrap();
    }
    for (name, state) in &files {
        let shipped = read_state(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(shipped.dims(), state.dims(), "{name}");
        assert_eq!(
            state_to_json(&shipped).unwrap(),
            state_to_json(state).unwrap(),
            "{name}"
        );
    }
    let text = std::fs::read_to_string(dir.join("families.json")).unwrap();
    let shipped: Vec<IndexEntry> = serde_json::from_str(&text).unwrap();
    assert_eq!(shipped, index);
}
