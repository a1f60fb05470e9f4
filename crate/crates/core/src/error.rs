use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("adaptive quadrature did not converge after {subdivisions} subdivisions (value {value:e}, error estimate {error:e})")]
    NonConvergence {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("root finder needs a sign change on [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("the contact potential has no pointwise value")]
    ContactNotPointwise,

    #[error("second derivative of {0} is a distribution; use the closed-form moments")]
    DistributionalDerivative(&'static str),

    #[error("integral of {0} over [0, inf) diverges")]
    DivergentIntegral(String),

    #[error("pure Coulomb interaction 1/r is not admissible: its second moment int_0^gamma v''(r) r^2 dr is +inf")]
    CoulombSingular,

    #[error("moment-condition certification failed for {potential}: {offending} grid points violate (max relative violation {max_violation:e})")]
    CertificationFailed {
        potential: String,
        offending: usize,
        gammas: Vec<f64>,
        max_violation: f64,
    },

    #[error("density mass {mass} deviates from particle number {n_particles} (relative {relative:e})")]
    NormalizationDrift {
        mass: f64,
        n_particles: f64,
        relative: f64,
    },

    #[error("bound {bound} is not compatible with potential {potential}")]
    IncompatibleSpec { bound: String, potential: String },

    #[error("objective evaluation failed at theta = {theta:?}: {source}")]
    ObjectiveEvaluationFailed {
        theta: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
