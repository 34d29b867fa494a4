//! Drive a named experiment from a JSON document, as the command-line tool
//! does, and list the checks and files it produced.

use levysync::experiment::{run_experiment, ExperimentConfig, RunOptions};

const CONFIG: &str = r#"{
  "name": "markov_small",
  "mode": "compare",
  "model": {
    "n": 5,
    "levy": { "kind": "brownian_drift", "sigma": [[1.0]], "drift": [0.0] },
    "inter_event": { "kind": "exponential", "mean": 1.0 },
    "horizon": 50.0
  },
  "run": { "replicas": 3000, "base_seed": 5 },
  "output": { "directory": "out/markov_small", "formats": ["csv", "json"] },
  "compare": { "tolerance": 0.06 }
}"#;

fn main() -> levysync::Result<()> {
    let cfg = ExperimentConfig::from_json_str(CONFIG)?;
    println!("config digest {}", cfg.digest());
    let out = std::env::temp_dir().join("levysync_run_config");
    let report = run_experiment(&cfg, &RunOptions { out: Some(out), ..Default::default() })?;
    for line in &report.lines {
        println!("{line}");
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }

    let broken = CONFIG.replace("\"n\": 5", "\"n\": 1");
    match ExperimentConfig::from_json_str(&broken).and_then(|c| c.validate()) {
        Ok(()) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
