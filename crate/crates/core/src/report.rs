//! Per-check records and tolerance profiles.

use serde::Serialize;

use crate::lattice::Region;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub model: String,
    pub volume: Region,
    pub params: serde_json::Value,
    /// Smallest `bound − observed` over all samples; residual checks report `−residual`.
    pub worst_slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(check: &str, model: &str, volume: &Region, params: serde_json::Value, worst_slack: f64, tolerance: f64) -> Self {
        CheckRecord {
            check: check.to_string(),
            model: model.to_string(),
            volume: volume.clone(),
            params,
            worst_slack,
            tolerance,
            pass: worst_slack.is_finite() && worst_slack >= -tolerance,
        }
    }

    /// Record for a residual that must stay below `tolerance`.
    pub fn residual(check: &str, model: &str, volume: &Region, params: serde_json::Value, residual: f64, tolerance: f64) -> Self {
        let mut r = CheckRecord::new(check, model, volume, params, -residual, tolerance);
        r.pass = residual.is_finite() && residual < tolerance;
        r
    }
}

/// Slack tolerances of the verification suite.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    pub residual: f64,
    pub inequality: f64,
    pub contraction: f64,
    pub convergence: f64,
    pub propagation: f64,
    pub positivity: f64,
}

impl Tolerances {
    pub fn standard() -> Self {
        Tolerances {
            residual: 1e-9,
            inequality: 1e-9,
            contraction: 1e-8,
            convergence: 1e-6,
            propagation: 1e-8,
            positivity: 1e-8,
        }
    }

    /// Ten times tighter than the standard profile.
    pub fn strict() -> Self {
        let s = Tolerances::standard();
        Tolerances {
            residual: s.residual / 10.0,
            inequality: s.inequality / 10.0,
            contraction: s.contraction / 10.0,
            convergence: s.convergence / 10.0,
            propagation: s.propagation / 10.0,
            positivity: s.positivity / 10.0,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::standard()
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> std::io::Result<()> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
