//! Crate-wide error type. All fallible operations return [`Result`].

/// Failure modes across the solver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point (x={x}, t={t}) lies outside the profile's configured validity")]
    OutOfDomain { x: f64, t: f64 },

    #[error("derivative query at the wedge apex x={x}; evaluate on one side of the kink")]
    NonSmooth { x: f64 },

    #[error("solid profile non-positive: g({x}, {t}) = {g}")]
    ProfileViolation { x: f64, t: f64, g: f64 },

    #[error("ODE integration failed: {0}")]
    IntegrationFailure(String),

    #[error("degenerate film: min h = {min_h} <= 0")]
    DegenerateFilm { min_h: f64 },

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("grid too small: n = {n} (need at least 7 nodes)")]
    GridTooSmall { n: usize },

    #[error("singular ghost closure system")]
    SingularClosure,

    #[error("moving-to-fixed map degenerate: contact point {lambda} reached the symmetry point")]
    MapDegenerate { lambda: f64 },

    #[error("Newton iteration diverged at t={t} with dt={dt}")]
    NewtonDiverged { t: f64, dt: f64 },

    #[error("film ruptured at t={t}: min h = {min_h} fell below the rupture floor")]
    Rupture { t: f64, min_h: f64 },

    #[error("contact angle k=0: kinematic contact-velocity relation degenerates")]
    ZeroContactAngle,

    #[error("interface energies violate (b+c-a)/b > 0: a={a}, b={b}, c={c}")]
    EnergyConstraintViolation { a: f64, b: f64, c: f64 },

    #[error("volume {v0} unattainable: reachable range is [{min}, {max}]")]
    VolumeUnattainable { v0: f64, min: f64, max: f64 },

    #[error("decay fit needs a positive series of at least 10 points")]
    NonPositiveSeries,

    #[error("constraint rows are linearly dependent on this grid")]
    SingularConstraint,

    #[error("singular linear system in the implicit solve")]
    SingularMatrix,

    #[error("config error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
