//! Console check reporting shared by the reproduction commands.

/// Collects named checks; the command exits 0 only if all hold.
#[derive(Default)]
pub struct Report {
    checks: Vec<(String, bool)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Numeric check against a target with symmetric tolerance.
    pub fn check_value(&mut self, name: &str, target: f64, tol: f64, measured: f64) {
        let ok = (measured - target).abs() <= tol;
        println!(
            "{name}: target {target} +/- {tol}, measured {measured:.6} -> {}",
            verdict(ok)
        );
        self.checks.push((name.to_string(), ok));
    }

    /// Boolean condition with a preformatted detail string.
    pub fn check_bool(&mut self, name: &str, detail: &str, ok: bool) {
        println!("{name}: {detail} -> {}", verdict(ok));
        self.checks.push((name.to_string(), ok));
    }

    /// Informational line that does not gate the exit status.
    pub fn info(&self, line: &str) {
        println!("{line}");
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn summary(&self) -> String {
        let passed = self.checks.iter().filter(|(_, ok)| *ok).count();
        format!("{passed}/{} checks passed", self.checks.len())
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
