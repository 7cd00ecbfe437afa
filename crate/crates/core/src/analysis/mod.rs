//! Frequency-domain comparison of exponential series with the exact
//! spectrum, accuracy sweeps, and the hierarchy cost model.

mod cost;
mod metric;
mod spectrum;
mod sweep;

pub use cost::{
    ado_count, ado_count_brute_force, binomial_sum, compare_costs, ratio_3sig, CostComparison,
    CostEstimate, Rounded3,
};
pub use metric::{
    composite_grid, default_omega_max, fit_error, fit_error_against, numerator_mass_fraction,
    part_error, spectrum_curve, ErrorReport, GridPolicy,
};
pub use spectrum::{
    exact_part_spectrum, exact_spectrum, series_spectrum, series_spectrum_hermitian,
    SpectrumCurve,
};
pub use sweep::{
    matched_ratio, minimal_k_for_residual, minimal_psd_order, psd_error, split_budget,
    sweep_accuracy, truncated, BudgetFit, MatchedRatio, Method, PartSplit, PfdSweeper, SweepConfig,
    SweepRow, SweepTable,
};
