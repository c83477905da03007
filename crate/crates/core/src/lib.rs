//! Numerical tools for the classical moment problem on the real line.
//!
//! * [`measure`]: finite measures, distribution functions on ℝ^d, box
//!   volumes, spectra and moments.
//! * [`moments`]: moment sequences, Hankel positivity on a support set,
//!   one-step extension intervals and the Cauchy-radius determinacy test.
//! * [`reconstruction`]: recurrence coefficients, Gauss quadrature and
//!   atomic representing measures.
//! * [`convergence`]: characteristic functions, the Taylor remainder bound,
//!   Markov tightness and method-of-moments convergence of families.

pub mod convergence;
pub mod error;
pub mod measure;
pub mod moments;
pub mod quadrature;
pub mod reconstruction;
pub mod tridiag;

pub use convergence::{
    char_fn, moment_convergence, taylor_remainder_check, tightness_bound, weak_convergence_check,
    CharFnSample, ConvergenceReport, GapTable, MeasureFamily, TaylorCheck, Tightness,
};
pub use error::{Error, Result};
pub use measure::{
    cdf, f_volume, is_df, is_f_continuous_interval, moment, spectrum_report, Atom, BoxRegion,
    ClosedBox, Density, DfReport, DistributionFunction, MeasureRep, MultiIndex, SpectrumReport,
};
pub use moments::{
    brute_force_nonneg_oracle, check_s0_nonneg, determinacy_radius, extension_interval, hankel,
    moment_functional, DeterminacyReport, DeterminacyVerdict, ExtensionInterval,
    FeasibilityStatus, FeasibilityVerdict, HankelMatrix, MomentSequence, OracleConfig,
    OracleVerdict, Polynomial, SupportSet,
};
pub use reconstruction::{
    gauss_quadrature, jacobi_from_moments, representing_measure, JacobiMatrix, Quadrature,
    Reconstruction,
};
