//! Symbolic engine for the kernel-expansion corrective algorithm: truncated
//! jet series over β-symbol coefficients, the operator calculus
//! (`d_w`, `d_θ`, `∇̸`, `S`, `S⁻¹`, `N`, `S′`), membership tests modulo
//! `M^k_{z−w}R_q`, and the coefficient solver for `q ≤ 2`.
//!
//! Scalars are exact rationals (with the `1/π` factors carried as a formal
//! power of π), so solver results are exact identities rather than
//! floating-point approximations. General `q ≥ 3` is out of scope: the
//! `q`-fold analogue interlaces `q` copies of `∇̸` with `q−1` multiplications
//! by `∂̄θ` and replaces the pair `(S, S′)` by `q` operators `S, …, S^{(q−1)}`
//! built the same way; the structure is noted here for reference but only
//! the pair needed for `q ≤ 2` is implemented.

pub mod coeff;
pub mod ops;
pub mod series;
pub mod solver;

pub use coeff::{rat, CoeffExpr};
pub use ops::{
    dbar_theta_series, dw_theta_series, gaussian_symbols, membership_test, membership_test_m,
    op_d_w_raw, op_dbar_w, theta_series, JetContext, OpsError,
};
pub use series::{JetSeries, MSeries};
pub use solver::{
    printed_l1_0, printed_l1_1, printed_l2_0, printed_l2_1, printed_l2_2, solve_expansion_q1,
    solve_expansion_q2, verify_printed_q2, Q1Solution, Q2Ansatz, Q2Solution, SolverError,
    VerifyReport,
};
