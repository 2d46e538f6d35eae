use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Everything needed to reproduce one invocation.
#[derive(Debug, Clone)]
pub struct Manifest {
    subcommand: String,
    parameters: Vec<String>,
    inputs: Vec<(String, String)>,
    seed: u64,
    output: Option<String>,
}

fn digest(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

impl Manifest {
    pub fn new(subcommand: String, parameters: Vec<String>, seed: u64) -> Self {
        Manifest { subcommand, parameters, inputs: Vec::new(), seed, output: None }
    }

    pub fn add_input(&mut self, path: &Path, data: &[u8]) {
        self.inputs.push((path.display().to_string(), digest(data)));
    }

    pub fn set_output(&mut self, data: &[u8]) {
        self.output = Some(digest(data));
    }

    pub fn to_json(&self) -> Vec<u8> {
        let inputs: Map<String, Value> =
            self.inputs.iter().map(|(p, d)| (p.clone(), Value::String(d.clone()))).collect();
        let doc = json!({
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "input_sha256": inputs,
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "output_sha256": self.output,
        });
        let mut out = serde_json::to_vec_pretty(&doc).expect("json encoding");
        out.push(b'\n');
        out
    }
}
