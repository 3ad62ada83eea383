use std::path::Path;

use spectral_rg::config::{ModelConfig, SCHEMA_VERSION};
use spectral_rg::linalg::c;

fn repo_config(name: &str) -> ModelConfig {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ModelConfig::from_path(&p).unwrap()
}

#[test]
fn shipped_configs_parse() {
    let osc = repo_config("oscillator.json");
    assert_eq!(osc.schema, SCHEMA_VERSION);
    let h = osc.hamiltonian().unwrap();
    assert_eq!(h.particle.dim(), 1);
    assert_eq!(h.modes.len(), 1);

    let tl = repo_config("two_level.json");
    assert_eq!(tl.hamiltonian().unwrap().modes.len(), 8);
    assert_eq!(tl.solver.rho, Some(0.25));
    assert_eq!(tl.solver.l_max, 4);

    let res = repo_config("resonance.json");
    assert_eq!(res.theta(), c(0.0, 0.3));
    assert!(res.deformed(res.theta()).unwrap().is_deformed());
}

fn base() -> serde_json::Value {
    serde_json::json!({
        "schema": 1,
        "particle": { "kind": "levels", "levels": [0.0, 1.0] },
        "coupling": { "type": "nelson", "kappa": { "preset": "sqrt" }, "g": 0.1, "mu": 0.5 },
        "modes": { "count": 3, "n_max": 2 }
    })
}

#[test]
fn unknown_keys_rejected() {
    let mut v = base();
    assert!(ModelConfig::from_json(&v.to_string()).is_ok());
    v["extra"] = serde_json::json!(1);
    assert!(ModelConfig::from_json(&v.to_string()).is_err());
    let mut v = base();
    v["coupling"]["gg"] = serde_json::json!(1);
    assert!(ModelConfig::from_json(&v.to_string()).is_err());
}

#[test]
fn schema_and_sections_checked() {
    let mut v = base();
    v["schema"] = serde_json::json!(2);
    assert!(ModelConfig::from_json(&v.to_string()).is_err());
    let mut v = base();
    v["coupling"]["type"] = serde_json::json!("custom");
    assert!(ModelConfig::from_json(&v.to_string()).is_err());
    let mut v = base();
    v["modes"] = serde_json::json!({ "count": 3, "momenta": [0.5], "weights": [1.0], "n_max": 2 });
    assert!(ModelConfig::from_json(&v.to_string()).is_err());
    assert!(ModelConfig::from_json("{ not json").is_err());
}

#[test]
fn particle_matrix_must_be_symmetric() {
    let mut v = base();
    v["particle"] = serde_json::json!({ "kind": "matrix", "rows": [[0.0, 1.0], [0.5, 1.0]] });
    let cfg = ModelConfig::from_json(&v.to_string()).unwrap();
    assert!(cfg.hamiltonian().is_err());
}

#[test]
fn round_trip() {
    let cfg = ModelConfig::from_json(&base().to_string()).unwrap();
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ModelConfig::from_json(&text).unwrap(), cfg);
}
