use std::io::Write;

use serde::Serialize;

/// Process outcome, mapped to the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Premise or hypothesis not met.
    Premise,
}

impl Outcome {
    fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Premise => 3,
        }
    }
}

/// JSON envelope shared by every subcommand. Contains no timestamps, so equal
/// invocations print equal bytes.
#[derive(Serialize)]
pub struct Report<T = ()> {
    tool: &'static str,
    version: &'static str,
    command: String,
    seed: u64,
    tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    conclusion_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<T>,
}

impl Report {
    pub fn new(command: &str, seed: u64, tol: f64) -> Self {
        Report {
            tool: "isospec",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            tol,
            conclusion_tol: None,
            result: None,
        }
    }

    pub fn with_conclusion_tol(mut self, tol: f64) -> Self {
        self.conclusion_tol = Some(tol);
        self
    }

    /// Prints the envelope around `result` and returns the exit code.
    pub fn emit<T: Serialize>(self, outcome: Outcome, result: T) -> u8 {
        let full = Report {
            tool: self.tool,
            version: self.version,
            command: self.command,
            seed: self.seed,
            tol: self.tol,
            conclusion_tol: self.conclusion_tol,
            result: Some(result),
        };
        let text = serde_json::to_string_pretty(&full).expect("report serializes");
        // a closed pipe downstream is not an error of ours
        let _ = writeln!(std::io::stdout().lock(), "{text}");
        outcome.code()
    }
}
