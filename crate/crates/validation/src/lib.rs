//! Reporting for the acceptance suite in `tests/acceptance.rs`.

use std::process::ExitCode;

/// Outcome of one criterion with the measured numbers.
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Prints one line per criterion as results come in.
#[derive(Default)]
pub struct Report {
    results: Vec<(&'static str, bool)>,
}

impl Report {
    pub fn record(&mut self, name: &'static str, v: Verdict) {
        println!("[{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        self.results.push((name, v.pass));
    }

    pub fn skip(&mut self, name: &str, reason: &str) {
        println!("[SKIP] {name}: {reason}");
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.results.iter().filter(|(_, pass)| !pass).map(|(n, _)| *n).collect()
    }

    /// Prints the tally and converts it into the process exit code.
    pub fn finish(self) -> ExitCode {
        let failed = self.failed();
        println!("{} of {} criteria passed", self.results.len() - failed.len(), self.results.len());
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            println!("failed: {}", failed.join(", "));
            ExitCode::FAILURE
        }
    }
}
