use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped by what went wrong: a numerical integral that does
/// not exist, a model whose inputs break the laws of a characteristic triple,
/// a simulation that did not terminate, or a solver that did not converge.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integrand is not integrable on [{lo}, {hi}]: quadrature returned {value}")]
    Integrability { lo: f64, hi: f64, value: f64 },

    #[error("survival function vanishes at t = {at}; no hazard exists beyond c(x) = {at}")]
    ZeroSurvival { at: f64 },

    #[error("time {t} lies outside the definition interval (killing time c(x) = {killing_time})")]
    OutsideDomain { t: f64, killing_time: f64 },

    #[error("invalid finite-variation function: {0}")]
    InvalidFunction(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("jump schedule returned more than {cap} atoms on (0, {t_max}]")]
    AtomCap { cap: usize, t_max: f64 },

    #[error(
        "path {path} exploded: more than {cap} jumps before the horizon (last jump times {tail:?})"
    )]
    Explosion {
        path: u64,
        cap: usize,
        tail: Vec<f64>,
    },

    #[error("test function is outside the generator domain: {0}")]
    NotInDomain(String),

    #[error("no L-derivative Kf exists at the given state: {0}")]
    KfNonexistent(String),

    #[error("first-jump operator is not a contraction: estimate {estimate} >= 1 - 1e-6")]
    NonContraction { estimate: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last sup-change {sup_change:e})")]
    Convergence { iterations: usize, sup_change: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
