//! Error type shared by the model, the simulator and the harness.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum UdmacError {
    /// Scene parameters violate a geometric constraint.
    #[error("scene geometry: {0}")]
    Scene(String),

    /// A probability query lies outside the domain of the closed forms.
    #[error("query: {0}")]
    Query(String),

    /// Configuration file or CLI arguments are inconsistent.
    #[error("config: {0}")]
    Config(String),

    /// The mean payload exceeds what the data channels can absorb while the
    /// control channel is busy with one successful handshake.
    #[error(
        "payload exceeds the multi-channel admissibility bound: \
         E[P] = {payload_bits} bits > T_s * M * r_tr = {bound_bits} bits"
    )]
    PayloadBound { payload_bits: f64, bound_bits: f64 },

    /// A contention fixed point did not converge.
    #[error("fixed-point solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: u64, residual: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl UdmacError {
    /// Process exit code for the CLI: 1 validation, 2 solver, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            UdmacError::Scene(_)
            | UdmacError::Query(_)
            | UdmacError::Config(_)
            | UdmacError::PayloadBound { .. } => 1,
            UdmacError::NoConvergence { .. } => 2,
            UdmacError::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, UdmacError>;
