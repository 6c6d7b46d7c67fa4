use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The Fock truncation left more probability mass above `n_max` than the
    /// hard limit allows. Raise `n_max` rather than silently clipping.
    #[error("Fock truncation insufficient: tail mass {tail_mass:.3e} exceeds {limit:.0e}")]
    TruncationInsufficient { tail_mass: f64, limit: f64 },

    #[error("operation requires symmetric resonant parameters (e1 = e2 = omega/2, lambda1 = lambda2)")]
    NotSymmetricResonant,

    #[error("x = {x} lies outside the quadrature grid")]
    OutsideGrid { x: f64 },

    #[error("zero-probability outcome: density at x = {x} underflows")]
    ZeroProbabilityOutcome { x: f64 },

    #[error("P_s peak unresolvable: {0}")]
    UnresolvablePeak(String),
}
