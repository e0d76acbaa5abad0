//! Failure classes and their exit codes.

use std::fmt;

use serde_json::json;

/// Why a run stopped early.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable, malformed or invalid configuration (exit 2).
    Config(String),
    /// Solver failure (exit 3); reported as JSON on stderr.
    Numerical(minnaert::Error),
    /// Writing an artifact failed (exit 3).
    Output(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) | Failure::Output(_) => 3,
        }
    }

    /// Diagnostics printed to stderr for numerical failures.
    pub fn diagnostics(&self) -> Option<serde_json::Value> {
        match self {
            Failure::Numerical(e) => Some(json!({
                "error": "numerical failure",
                "kind": kind(e),
                "message": e.to_string(),
            })),
            Failure::Output(m) => Some(json!({ "error": "output failure", "message": m })),
            Failure::Config(_) => None,
        }
    }
}

fn kind(e: &minnaert::Error) -> &'static str {
    use minnaert::Error::*;
    match e {
        Config(_) => "config",
        Usage(_) => "usage",
        MeshMismatch { .. } => "mesh_mismatch",
        NearSingularEvaluation { .. } => "near_singular_evaluation",
        Numerical(_) => "numerical",
        NearResonance { .. } => "near_resonance",
        Domain(_) => "domain",
        Precondition(_) => "precondition",
        NonConvergence { .. } => "non_convergence",
        MultiplicityAnomaly { .. } => "multiplicity_anomaly",
        UnsupportedGeometry(_) => "unsupported_geometry",
        Io(_) => "io",
    }
}

impl From<minnaert::Error> for Failure {
    fn from(e: minnaert::Error) -> Self {
        use minnaert::Error::*;
        match e {
            // Rejected inputs: parameters, sample points, frequencies.
            Config(_) | Domain(_) | Precondition(_) | NearSingularEvaluation { .. } | UnsupportedGeometry(_) => {
                Failure::Config(e.to_string())
            }
            other => Failure::Numerical(other),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(e) => write!(f, "{e}"),
            Failure::Output(m) => write!(f, "output error: {m}"),
        }
    }
}
