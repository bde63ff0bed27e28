use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("non-positive coefficient a = {value} at x = {x}")]
    NonPositiveA { x: f64, value: f64 },

    #[error("y-range collapsed: image spans {span:e} for an x-span of {x_span}")]
    RangeCollapse { span: f64, x_span: f64 },

    #[error("no root of F' within 0.5 of the guess {guess}")]
    NoRoot { guess: f64 },

    #[error("degenerate vacuum at xi = {xi}: F''(xi) = {curvature}")]
    DegenerateVacuum { xi: f64, curvature: f64 },

    #[error("overflow integrating Jost solution at y = {y}")]
    Overflow { y: f64 },

    #[error("coefficients do not decay: {0}")]
    NonDecaying(String),

    #[error("Wronskian is degenerate (normalized |W(0)| = {normalized:e}) and no spectral shift was applied")]
    DegenerateWronskian { normalized: f64 },

    #[error("fixed-point map is not contracting (ratio {ratio:.3} over {window} iterations): delta too large or hypotheses violated")]
    NonContraction { ratio: f64, window: usize },

    #[error("Picard iteration did not converge in {iterations} iterations (last change {change:e})")]
    NotConverged { iterations: usize, change: f64 },

    #[error("time step {dt} violates stability bound {bound} ({reason})")]
    Cfl { dt: f64, bound: f64, reason: &'static str },

    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("reflection guard: T = {t_final} exceeds {limit} for a sponge-free run")]
    ReflectionGuard { t_final: f64, limit: f64 },

    #[error("unsupported case: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow { .. }
                | Error::NonContraction { .. }
                | Error::NotConverged { .. }
                | Error::BlowUp { .. }
                | Error::DegenerateWronskian { .. }
                | Error::NonDecaying(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
