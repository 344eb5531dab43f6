//! Command-line front end: run configuration, commands and the shared
//! train/score helpers.

pub mod args;
pub mod commands;
pub mod config;
pub mod experiment;

use anyhow::Result;

pub use args::{Cli, Command};
pub use config::{EvalConfig, EvalLabels, Precision, RunConfig, RUN_FILE};

/// Caps the global worker pool, then resolves and executes `command`.
pub fn run(command: &Command) -> Result<()> {
    let cfg = commands::resolve(command)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    commands::execute(&cfg)
}

/// Error kind for the one-line failure report.
pub fn error_kind(err: &anyhow::Error) -> &'static str {
    err.chain()
        .find_map(|e| e.downcast_ref::<jointmap::Error>().map(jointmap::Error::kind))
        .unwrap_or("run")
}

/// Context chain joined by ": ", skipping causes already quoted by the
/// message above them.
pub fn error_message(err: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for e in err.chain() {
        let s = e.to_string();
        if !parts.last().is_some_and(|p| p.contains(&s)) {
            parts.push(s);
        }
    }
    parts.join(": ")
}

/// `{"error":kind,"message":...}` on a single line.
pub fn error_line(kind: &str, message: &str) -> String {
    let flat: String = message.split_whitespace().collect::<Vec<_>>().join(" ");
    serde_json::json!({ "error": kind, "message": flat }).to_string()
}
