//! Verification report shared by the identity suites and the CLI.

use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    /// Literature anchor of the relation being checked.
    pub anchor: String,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: u32,
    pub curve: String,
    pub suite: String,
    pub tolerance: f64,
    pub entries: Vec<ReportEntry>,
    pub summary: String,
}

impl VerificationReport {
    pub fn new(curve: impl Into<String>, suite: impl Into<String>, tolerance: f64) -> Self {
        VerificationReport {
            version: REPORT_VERSION,
            curve: curve.into(),
            suite: suite.into(),
            tolerance,
            entries: Vec::new(),
            summary: String::new(),
        }
    }

    /// Record one relation. `scale` is the max magnitude of the additive
    /// terms; pass means residual <= tolerance * scale.
    pub fn push(&mut self, id: impl Into<String>, anchor: impl Into<String>, residual: f64, scale: f64) {
        let scale = scale.max(1.0);
        let pass = residual <= self.tolerance * scale;
        self.entries.push(ReportEntry {
            id: id.into(),
            anchor: anchor.into(),
            residual,
            scale,
            pass,
        });
    }

    /// Record with an explicit tolerance override for this one entry.
    pub fn push_with_tol(
        &mut self,
        id: impl Into<String>,
        anchor: impl Into<String>,
        residual: f64,
        scale: f64,
        tol: f64,
    ) {
        let scale = scale.max(1.0);
        let pass = residual <= tol * scale;
        self.entries.push(ReportEntry {
            id: id.into(),
            anchor: anchor.into(),
            residual,
            scale,
            pass,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failing(&self) -> Vec<&ReportEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    pub fn finalize(&mut self) {
        let total = self.entries.len();
        let passed = self.entries.iter().filter(|e| e.pass).count();
        self.summary = format!("{passed}/{total} pass");
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.entries.extend(other.entries);
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "suite {} on {} (tol {:.1e})\n",
            self.suite, self.curve, self.tolerance
        ));
        for e in &self.entries {
            out.push_str(&format!(
                "  [{}] {:<38} residual {:>12.3e}  (scale {:>9.3e})  {}\n",
                if e.pass { "ok" } else { "FAIL" },
                e.id,
                e.residual,
                e.scale,
                e.anchor
            ));
        }
        out.push_str(&format!("  {}\n", self.summary));
        out
    }
}
