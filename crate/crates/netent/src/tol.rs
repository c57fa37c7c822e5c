//! Central numerical tolerances. Acceptance checks reference these values,
//! do not tune them per call site.

/// Tolerance configuration shared by all modules.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Maximum allowed deviation from Hermiticity, max-abs(M - M†).
    pub hermiticity: f64,
    /// Minimum eigenvalue a PSD matrix may have (negative slack).
    pub psd: f64,
    /// Deviation allowed in |tr(rho) - 1|.
    pub trace: f64,
    /// Relative eigenpair residual ||Mv - lambda v|| / ||M||.
    pub eigen_residual: f64,
    /// Slack for channel completeness and dichotomy checks.
    pub completeness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-9,
            psd: 1e-8,
            trace: 1e-9,
            eigen_residual: 1e-8,
            completeness: 1e-8,
        }
    }
}

/// Default tolerances as a const-friendly accessor.
pub const TOL: Tolerances = Tolerances {
    hermiticity: 1e-9,
    psd: 1e-8,
    trace: 1e-9,
    eigen_residual: 1e-8,
    completeness: 1e-8,
};

/// Largest total Hilbert-space dimension the dense representation accepts.
pub const MAX_TOTAL_DIM: usize = 1024;
