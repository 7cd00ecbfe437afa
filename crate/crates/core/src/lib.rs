//! Decomposition of fermionic and bosonic bath correlation functions into
//! sums of complex exponentials.
//!
//! The pipeline samples `C(t) = (1/pi) * int e^{i w t} J(w) f(w) dw` on a
//! uniform time grid ([`spectral`]), fits each real-valued part with a
//! Hankel/Takagi Prony scheme ([`prony`]), and scores the result against the
//! exact spectrum `J(w) f(w)` ([`analysis`]). A Pade pole expansion of the
//! occupation function ([`psd`]) serves as the reference decomposition.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod prony;
pub mod psd;
pub mod quadrature;
pub mod series;
pub mod special;
pub mod spectral;

pub use error::{Error, ErrorCategory, Result};
pub use series::{ExponentialSeries, ExponentialTerm};
pub use spectral::{
    BathParameters, Part, QuadratureConfig, SampledCorrelation, Sector, SpectralDensity,
    Statistics, TimeGrid,
};

pub use num_complex::Complex64;
