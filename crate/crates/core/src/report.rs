//! Deterministic verification reports.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Instance {
    pub key: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Outcome of one check over one window. Instance order is the enumeration
/// order of the check, which is deterministic by construction.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub check: String,
    pub window: String,
    pub instances: Vec<Instance>,
    /// Instances that passed for structurally trivial reasons (all sides
    /// empty); counted in bulk to keep reports readable.
    pub trivial_passes: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Report {
    pub fn new(check: &str, window: &str) -> Self {
        Report {
            check: check.to_string(),
            window: window.to_string(),
            instances: Vec::new(),
            trivial_passes: 0,
            passed: 0,
            failed: 0,
        }
    }

    pub fn record(&mut self, key: String, pass: bool, witness: Option<String>) {
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        self.instances.push(Instance { key, pass, witness });
    }

    pub fn record_trivial(&mut self) {
        self.trivial_passes += 1;
        self.passed += 1;
    }

    pub fn is_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "check={} window=[{}]\n",
            self.check, self.window
        ));
        for inst in &self.instances {
            if inst.pass {
                out.push_str(&format!("  PASS {}\n", inst.key));
            } else {
                out.push_str(&format!(
                    "  FAIL {} residual={}\n",
                    inst.key,
                    inst.witness.as_deref().unwrap_or("?")
                ));
            }
        }
        out.push_str(&format!(
            "  RESULT {} pass={} fail={} trivial={}\n",
            if self.is_pass() { "ok" } else { "FAILED" },
            self.passed,
            self.failed,
            self.trivial_passes
        ));
        out
    }
}
