#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

pub fn qubit(kind: &str, omega: f64, kappa: f64, theta: f64, tau: f64) -> Value {
    let jump = match kind {
        "dephasing" => Some(json!([[1, 0], [0, -1]])),
        "decay" => Some(json!([[0, 0], [1, 0]])),
        _ => None,
    };
    let evolution = match jump {
        Some(j) => json!({
            "kind": "lindblad",
            "omega": omega,
            "hamiltonian": [[0.5, 0], [0, -0.5]],
            "dissipators": [{"rate": kappa, "jump": j}]
        }),
        None => json!({"kind": "unitary", "omega": omega, "hamiltonian": [[0.5, 0], [0, -0.5]]}),
    };
    json!({
        "dimension": 2,
        "evolution": evolution,
        "basis": {"qubit_theta": theta},
        "distribution": {"kind": "exponential", "tau": tau},
        "target": 0,
        "seed": 11,
        "trajectories": 1000
    })
}

pub fn qutrit(omega: f64, tau: f64, target: usize) -> Value {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    json!({
        "dimension": 3,
        "evolution": {
            "kind": "unitary",
            "omega": omega,
            "hamiltonian": [[0, s, 0], [s, 0, s], [0, s, 0]]
        },
        "basis": {"spin_z": 3},
        "distribution": {"kind": "exponential", "tau": tau},
        "target": target,
        "seed": 3,
        "trajectories": 10000
    })
}

pub fn config(v: &Value) -> qreset_cli::RunConfig {
    qreset_cli::RunConfig::from_json(&v.to_string()).expect("valid config")
}

pub fn write_config(dir: &Path, name: &str, v: &Value) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

pub fn qreset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qreset"))
        .args(args)
        .env_remove("QRESET_THREADS")
        .output()
        .expect("run qreset")
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
