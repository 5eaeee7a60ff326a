//! Running an external prover on emitted text.

use std::io;
use std::path::Path;
use std::process::Command;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    /// `unsat`, or a TPTP `Theorem`/`Unsatisfiable` status: the sequent is valid.
    Valid,
    /// `sat`, or `CounterSatisfiable`/`Satisfiable`.
    Invalid,
    Unknown,
}

/// Classify solver output by its first recognisable answer.
pub fn classify(output: &str) -> Answer {
    for line in output.lines() {
        let line = line.trim();
        match line {
            "unsat" => return Answer::Valid,
            "sat" => return Answer::Invalid,
            "unknown" | "timeout" => return Answer::Unknown,
            _ => {}
        }
        if let Some(status) = line.split("SZS status ").nth(1) {
            let word = status.split_whitespace().next().unwrap_or("");
            return match word {
                "Theorem" | "Unsatisfiable" | "ContradictoryAxioms" => Answer::Valid,
                "CounterSatisfiable" | "Satisfiable" => Answer::Invalid,
                _ => Answer::Unknown,
            };
        }
    }
    Answer::Unknown
}

/// Write `text` to a scratch file with extension `ext`, run `solver` on it
/// and classify the output.
pub fn run_solver(solver: &Path, text: &str, ext: &str) -> io::Result<(Answer, String)> {
    let path = std::env::temp_dir().join(format!("foml-{}-{}.{ext}", std::process::id(), crate::coalesce::symbols::short_digest(text)));
    std::fs::write(&path, text)?;
    let out = Command::new(solver).arg(&path).output();
    let _ = std::fs::remove_file(&path);
    let out = out?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    Ok((classify(&stdout), stdout))
}
