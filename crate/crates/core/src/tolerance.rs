//! Process-wide numerical tolerances.
//!
//! Values are read-only after the first access. The command-line front end
//! installs overrides from `QDB_TOL_*` environment variables or flags before
//! any computation runs; library users get the defaults.

use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative rank cutoff: eigenvalues at or below `dim * rank_rel * λ_max` count as kernel.
    pub rank_rel: f64,
    /// Default relative duality-gap / residual tolerance of the SDP solver.
    pub sdp: f64,
    /// Slack used by invariant checks (self-test suites).
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_rel: 1e-12,
            sdp: 1e-8,
            consistency: 1e-7,
        }
    }
}

impl Tolerances {
    /// Defaults overridden by `QDB_TOL_RANK`, `QDB_TOL_SDP` and `QDB_TOL_CONSISTENCY`.
    pub fn from_env() -> Result<Self, String> {
        let mut t = Tolerances::default();
        for (var, slot) in [
            ("QDB_TOL_RANK", &mut t.rank_rel),
            ("QDB_TOL_SDP", &mut t.sdp),
            ("QDB_TOL_CONSISTENCY", &mut t.consistency),
        ] {
            if let Ok(raw) = std::env::var(var) {
                let v: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| format!("{var}: cannot parse '{raw}' as a number"))?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(format!("{var}: tolerance must be positive, got {v}"));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

static INSTALLED: OnceLock<Tolerances> = OnceLock::new();

/// Install process-wide tolerances. Returns `false` if they were already fixed.
pub fn install(t: Tolerances) -> bool {
    INSTALLED.set(t).is_ok()
}

/// The active tolerances.
pub fn get() -> Tolerances {
    *INSTALLED.get_or_init(Tolerances::default)
}
