//! Prony fitting of uniformly sampled real signals by sums of decaying
//! exponentials.
//!
//! The samples `phi_0..phi_2N` define an `(N+1) x (N+1)` Hankel matrix. Its
//! con-eigenvector of index `K` (descending `|sigma|`, zero-based) is read as
//! the coefficient vector of a degree-`N` polynomial whose `K` roots inside
//! the unit disk give the exponents; amplitudes follow from a least-squares
//! Vandermonde fit over all samples.

mod fit;
mod hankel;
mod roots;
mod takagi;

pub use fit::{
    fit_correlation, fit_part, fit_part_with_factorization, CorrelationFit, FitPolicy,
    PronyReport, RealPartSpec, RootCounts,
};
pub use hankel::{build_hankel, FastHankel, Hankel};
pub use roots::{
    amplitudes_least_squares, candidate_roots, exponents_from_roots, AmplitudeFit, PronyRoots,
    BOUNDARY_DELTA,
};
pub use takagi::{takagi_factorize, EigenSolver, HankelFactorization, DENSE_ORDER_LIMIT};
