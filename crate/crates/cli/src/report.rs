//! Deterministic run reports: one structured text document per invocation,
//! keys emitted in a fixed order, byte-identical across runs with the same
//! inputs, seed, and tool version.

use sha2::{Digest, Sha256};
use std::fmt::Display;

/// Process exit codes, as documented in the command help.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP_EXCEEDED: i32 = 3;

pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str, digest: &str, seed: u64) -> Report {
        let mut r = Report { lines: Vec::new() };
        r.kv("report-format", 1);
        r.kv("tool-version", env!("CARGO_PKG_VERSION"));
        r.kv("command", command);
        r.kv("seed", seed);
        r.kv("input-digest", digest);
        r
    }

    pub fn kv(&mut self, key: &str, value: impl Display) {
        self.lines.push(format!("{key} = {value}"));
    }

    pub fn section(&mut self, name: &str) {
        self.lines.push(String::new());
        self.lines.push(format!("[{name}]"));
    }

    pub fn render(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Digest of the run inputs: length-prefixed so distinct input splits cannot
/// collide.
pub fn digest_inputs(parts: &[(&str, &[u8])]) -> String {
    let mut hasher = Sha256::new();
    for (label, bytes) in parts {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    }
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
