//! JSON report envelope and small formatting helpers.

use bnctl::NodeId;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA: &str = "bnctl-report/1";

#[derive(Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub inputs: Inputs,
    pub verdicts: Map<String, Value>,
    pub artifacts: Map<String, Value>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Serialize)]
pub struct Inputs {
    pub file: String,
    pub sha256: String,
    pub flags: Map<String, Value>,
}

#[derive(Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

impl Report {
    pub fn new(command: &str, file: &str, text: &str) -> Report {
        Report {
            schema: SCHEMA,
            command: command.into(),
            inputs: Inputs { file: file.into(), sha256: digest(text), flags: Map::new() },
            verdicts: Map::new(),
            artifacts: Map::new(),
            warnings: vec![],
            timing: None,
        }
    }

    pub fn flag(&mut self, key: &str, v: impl Serialize) {
        self.inputs.flags.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn verdict(&mut self, key: &str, v: impl Serialize) {
        self.verdicts.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn artifact(&mut self, key: &str, v: impl Serialize) {
        self.artifacts.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }
}

pub fn digest(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

pub fn names(nodes: &[NodeId]) -> Vec<String> {
    nodes.iter().map(NodeId::name).collect()
}

pub fn edge_names(edges: &[(NodeId, NodeId)]) -> Vec<[String; 2]> {
    edges.iter().map(|(a, b)| [a.name(), b.name()]).collect()
}

pub fn bitstring(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn truth_table(f: &bnctl::BooleanFunction) -> String {
    bitstring(f.table())
}

/// Parses a target such as `0010…`, one character per state node in
/// ascending node order.
pub fn parse_bits(s: &str, n: usize) -> anyhow::Result<Vec<bool>> {
    let bits: Vec<bool> = s
        .chars()
        .filter(|c| !matches!(c, '_' | ' '))
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(anyhow::anyhow!("bad bit {c:?} in {s:?}")),
        })
        .collect::<anyhow::Result<_>>()?;
    anyhow::ensure!(bits.len() == n, "expected {n} bits, got {}", bits.len());
    Ok(bits)
}
