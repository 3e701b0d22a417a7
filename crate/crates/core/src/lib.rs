//! Weighted polyanalytic Bergman kernels, computed three independent ways and
//! cross-validated:
//!
//! - [`gram`]: brute-force Gram-matrix orthonormalization of the bidegree
//!   monomial basis (the universal numerical oracle),
//! - [`closed`]: exact model kernels (Koshelev disk kernel, Gaussian
//!   polyanalytic / Laguerre kernels, Landau-level differences, the blow-up
//!   limit kernel),
//! - [`expansion`] + [`symbolic`]: the large-`m` asymptotic expansion, with a
//!   rational-arithmetic jet engine that re-derives the expansion
//!   coefficients from the corrective algorithm.
//!
//! On top of the kernels sit Bergman-metric extensions ([`metrics`]) and
//! point-evaluation bounds with a randomized verification harness
//! ([`bounds`]).

pub mod bounds;
pub mod closed;
pub mod expansion;
pub mod gram;
pub mod metrics;
pub mod numerics;
pub mod poly;
pub mod potential;
pub mod report;
pub mod symbolic;

pub use gram::{BasisSpec, GramError, GramKernel, KernelSource, QuadratureSpec};
pub use potential::{AssumptionReport, BetaJet, DomainSpec, HermitianPotential, C64};
