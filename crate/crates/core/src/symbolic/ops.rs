//! The operator calculus on jet series: `∂_w`, `∂̄_w`, the coordinate-change
//! operators `d_w` and `d_θ`, the first-order corrector `∇̸ = d_θ + 2m·M_{z−w}`,
//! the diffusion operator `S` and its inverse, the division operator `N`,
//! the composite `S′ = S M⁻¹_{∂̄θ} S⁻¹ N S`, and membership tests modulo
//! `M^k_{z−w} R_q`.
//!
//! In this algebra the polarization symbols `Q_{a,b}` depend on `(z, w̄)`
//! only, so `∂_w` acts as `d/du` alone while `∂̄_w` is `d/dū` plus the
//! symbol derivation `Q_{a,b} → Q_{a,b+1}` — the simplification that makes
//! the whole calculus finitary.

use super::coeff::{rat, CoeffExpr};
use super::series::{JetSeries, MSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OpsError {
    #[error("ū-degree {0} exceeds q−1; N is undefined there")]
    UbarDegreeTooHigh(u32),
    #[error("inexact division by (z−w): residual u^0 coefficient at ū^{0}")]
    InexactDivision(u32),
}

fn factorial(n: u32) -> BigRational {
    let mut acc = BigInt::from(1);
    for i in 2..=n as u64 {
        acc *= BigInt::from(i);
    }
    BigRational::from_integer(acc)
}

fn binom(n: u32, k: u32) -> BigRational {
    // C(n, k) as an exact rational.
    let mut acc = BigRational::one();
    for i in 0..k {
        acc *= BigRational::new(BigInt::from((n - i) as i64), BigInt::from((i + 1) as i64));
    }
    acc
}

/// Taylor series of the phase function:
/// `θ = Σ_{j≤T} u^j Q_{j+1,0}/(j+1)!`.
pub fn theta_series(t: u32) -> JetSeries {
    let mut s = JetSeries::zero(Some(t));
    for j in 0..=t {
        s.set(
            j,
            0,
            CoeffExpr::sym((j + 1) as u8, 0).scale(&(BigRational::one() / factorial(j + 1))),
        );
    }
    s
}

/// `∂̄_w θ = Σ_{j≤T} u^j Q_{j+1,1}/(j+1)!` (leading coefficient `β`).
pub fn dbar_theta_series(t: u32) -> JetSeries {
    let mut s = JetSeries::zero(Some(t));
    for j in 0..=t {
        s.set(
            j,
            0,
            CoeffExpr::sym((j + 1) as u8, 1).scale(&(BigRational::one() / factorial(j + 1))),
        );
    }
    s
}

/// `∂_w θ = Σ_{j≤T} (j+1)/(j+2)! · u^j Q_{j+2,0}`.
pub fn dw_theta_series(t: u32) -> JetSeries {
    let mut s = JetSeries::zero(Some(t));
    for j in 0..=t {
        let c = BigRational::from_integer(BigInt::from((j + 1) as i64)) / factorial(j + 2);
        s.set(j, 0, CoeffExpr::sym((j + 2) as u8, 0).scale(&c));
    }
    s
}

/// `∂̄_w` on the algebra: `d/dū` plus the symbol derivation.
pub fn op_dbar_w(s: &JetSeries) -> JetSeries {
    s.d_dubar().add(&s.symshift_wbar())
}

/// `∂_w` on the algebra: `d/du` only (symbols are `w`-independent).
pub fn op_d_w_raw(s: &JetSeries) -> JetSeries {
    s.d_du()
}

/// Shift series for one symbol: `Q_{a,b}(w,w̄-side) = Σ_s u^s Q_{a+s,b}/s!`,
/// truncated at `t`; used by the diagonal restriction inside `N`.
fn sym_shift_series(a: u8, b: u8, t: u32) -> JetSeries {
    let mut s = JetSeries::zero(Some(t));
    for step in 0..=t {
        s.set(
            step,
            0,
            CoeffExpr::sym(a + step as u8, b).scale(&(BigRational::one() / factorial(step))),
        );
    }
    s
}

/// Taylor shift of a whole coefficient to the diagonal `z := w`, as a
/// `u`-series: symbols shift, the `β`-denominator inverts through a
/// geometric expansion.
fn diag_shift(c: &CoeffExpr, t: u32) -> JetSeries {
    let mut out = JetSeries::zero(Some(t));
    for (m, coeff) in c.monomials() {
        let mut term = JetSeries::constant(CoeffExpr::scalar_pi(coeff.clone(), m.pi));
        for &((a, b), e) in &m.syms {
            let shifted = sym_shift_series(a, b, t);
            for _ in 0..e {
                term = term.mul(&shifted);
            }
        }
        out = out.add(&term);
    }
    let d = c.den_beta();
    if d > 0 {
        // (shift β)^{−d} = β^{−d} (1+x)^{−d}, x = Σ_{s≥1} u^s Q_{1+s,1}/(s! β).
        let x = sym_shift_series(1, 1, t)
            .sub(&JetSeries::constant(CoeffExpr::beta()))
            .scale(&CoeffExpr::beta_inv());
        let mut inv = JetSeries::constant(CoeffExpr::one()).truncate_to(t);
        let mut xpow = JetSeries::constant(CoeffExpr::one()).truncate_to(t);
        for i in 1..=t {
            xpow = xpow.mul(&x);
            if xpow.is_zero() {
                break;
            }
            let sign = if i % 2 == 1 { -1 } else { 1 };
            let coeff = binom(d as u32 + i - 1, i) * BigRational::from_integer(sign.into());
            inv = inv.add(&xpow.scale_rat(&coeff));
        }
        let mut beta_inv_pow = CoeffExpr::one();
        for _ in 0..d {
            beta_inv_pow = beta_inv_pow.mul(&CoeffExpr::beta_inv());
        }
        out = out.mul(&inv).scale(&beta_inv_pow);
    }
    out
}

/// Shared context: the prepared θ-derivative series at working truncation.
pub struct JetContext {
    pub t: u32,
    pub dbar_theta: JetSeries,
    pub dw_theta: JetSeries,
    /// `1/∂̄_wθ`, by formal geometric series.
    pub recip_dbar_theta: JetSeries,
    /// `∂_wθ / ∂̄_wθ`.
    pub ratio: JetSeries,
}

impl JetContext {
    pub fn new(t: u32) -> Self {
        let dbar_theta = dbar_theta_series(t);
        let dw_theta = dw_theta_series(t);
        // 1/∂̄θ = (1/β)·Σ (−x)^i with x = ∂̄θ/β − 1 (min degree 1).
        let x = dbar_theta
            .scale(&CoeffExpr::beta_inv())
            .sub(&JetSeries::constant(CoeffExpr::one()));
        let mut recip = JetSeries::constant(CoeffExpr::one()).truncate_to(t);
        let mut xpow = JetSeries::constant(CoeffExpr::one()).truncate_to(t);
        for i in 1..=t {
            xpow = xpow.mul(&x);
            if xpow.is_zero() {
                break;
            }
            let sign = if i % 2 == 1 { rat(-1, 1) } else { rat(1, 1) };
            recip = recip.add(&xpow.scale_rat(&sign));
        }
        let recip_dbar_theta = recip.scale(&CoeffExpr::beta_inv());
        let ratio = dw_theta.mul(&recip_dbar_theta);
        Self {
            t,
            dbar_theta,
            dw_theta,
            recip_dbar_theta,
            ratio,
        }
    }

    /// `d_θ = (1/∂̄_wθ) ∂̄_w`.
    pub fn op_dtheta(&self, s: &JetSeries) -> JetSeries {
        self.recip_dbar_theta.mul(&op_dbar_w(s))
    }

    /// `d_w = ∂_w − (∂_wθ/∂̄_wθ) ∂̄_w`.
    pub fn op_dw(&self, s: &JetSeries) -> JetSeries {
        op_d_w_raw(s).sub(&self.ratio.mul(&op_dbar_w(s)))
    }

    /// `(d_w d_θ)^i`.
    pub fn dwdtheta_pow(&self, s: &JetSeries, i: u32) -> JetSeries {
        let mut out = s.clone();
        for _ in 0..i {
            out = self.op_dw(&self.op_dtheta(&out));
        }
        out
    }

    /// `∇̸ = d_θ + 2m·M_{z−w}` on an asymptotic series: `d_θ` acts per grade,
    /// the multiplication shifts the grade up by one with factor `2(z−w)`.
    pub fn op_nabla(&self, a: &MSeries) -> MSeries {
        a.map(|s| self.op_dtheta(s)).add(&a.mul_2m_z_minus_w())
    }

    /// Diffusion operator `S = Σ_{i≤k} (2m)^{−i}/i! (d_w d_θ)^i`, applied
    /// gradewise.
    pub fn op_s(&self, a: &MSeries, k: u32) -> MSeries {
        self.s_like(a, k, false)
    }

    /// `S⁻¹ = Σ_{i≤k} (−1)^i (2m)^{−i}/i! (d_w d_θ)^i`.
    pub fn op_s_inv(&self, a: &MSeries, k: u32) -> MSeries {
        self.s_like(a, k, true)
    }

    fn s_like(&self, a: &MSeries, k: u32, inverse: bool) -> MSeries {
        let Some((gmin, gmax)) = a.grade_range() else {
            return MSeries::new();
        };
        let mut out = MSeries::new();
        for g in (gmin - k as i32)..=gmax {
            let mut acc: Option<JetSeries> = None;
            for i in 0..=k {
                let Some(src) = a.grade(g + i as i32) else {
                    continue;
                };
                let mut c = BigRational::one()
                    / (factorial(i) * BigRational::from_integer(BigInt::from(2).pow(i)));
                if inverse && i % 2 == 1 {
                    c = -c;
                }
                let term = self.dwdtheta_pow(src, i).scale_rat(&c);
                acc = Some(match acc {
                    None => term,
                    Some(prev) => prev.add(&term),
                });
            }
            if let Some(s) = acc {
                out.set(g, s);
            }
        }
        out
    }

    /// `N`: componentwise `(f_i(z,w) − f_i(w,w))/(z−w)` on the ū-components;
    /// the diagonal restriction is realized by the Taylor shift
    /// `Q_{a,b} ↦ Σ u^s Q_{a+s,b}/s!` followed by `u → 0`, and the division
    /// by `(z−w) = −u` is exact.
    pub fn op_n(&self, s: &JetSeries, q: u32) -> Result<JetSeries, OpsError> {
        let max_ubar = s.max_ubar_degree();
        if max_ubar > q - 1 {
            return Err(OpsError::UbarDegreeTooHigh(max_ubar));
        }
        let t = s.trunc.unwrap_or(self.t);
        let mut out = JetSeries::zero(s.trunc.map(|x| x.saturating_sub(1)));
        for pbar in 0..=max_ubar {
            // g = Σ_p u^p c_{p,pbar}
            let mut g = JetSeries::zero(s.trunc);
            for (&(p, q2), c) in s.terms() {
                if q2 == pbar {
                    g.set(p, 0, c.clone());
                }
            }
            if g.is_zero() {
                continue;
            }
            let c0 = g.coeff(0, 0);
            let h = if c0.is_zero() {
                g
            } else {
                g.sub(&diag_shift(&c0, t))
            };
            let divided = h.divide_z_minus_w().map_err(|_| {
                OpsError::InexactDivision(pbar)
            })?;
            out = out.add(&divided.shift(0, pbar));
        }
        Ok(out)
    }

    /// `N` applied gradewise to an asymptotic series.
    pub fn op_n_m(&self, a: &MSeries, q: u32) -> Result<MSeries, OpsError> {
        let mut out = MSeries::new();
        for (&g, s) in a.grades() {
            out.set(g, self.op_n(s, q)?);
        }
        Ok(out)
    }

    /// `S′ = S M⁻¹_{∂̄θ} S⁻¹ N S` with abschnitt discipline `k`.
    pub fn op_sprime(&self, a: &MSeries, k: u32, q: u32) -> Result<MSeries, OpsError> {
        let t1 = self.op_s(a, k);
        let t2 = self.op_n_m(&t1, q)?;
        let t3 = self.op_s_inv(&t2, k);
        let t4 = t3.mul_series(&self.recip_dbar_theta);
        Ok(self.op_s(&t4, k))
    }
}

/// Membership test modulo `M^k_{z−w} R_q` inside the algebra: every reliable
/// monomial `u^p ū^p̄` must have `p ≥ k` and `p̄ ≤ q−1`. Returns the
/// offending part as the residual.
pub fn membership_test(s: &JetSeries, k: u32, q: u32) -> (bool, JetSeries) {
    let mut residual = JetSeries::zero(s.trunc);
    for (&(p, pbar), c) in s.terms() {
        if p < k || pbar > q - 1 {
            residual.set(p, pbar, c.clone());
        }
    }
    (residual.is_zero(), residual)
}

/// Membership of every grade of an asymptotic series.
pub fn membership_test_m(a: &MSeries, k: u32, q: u32) -> (bool, MSeries) {
    let mut ok = true;
    let mut residual = MSeries::new();
    for (&g, s) in a.grades() {
        let (good, r) = membership_test(s, k, q);
        if !good {
            ok = false;
            residual.set(g, r);
        }
    }
    (ok, residual)
}

/// The Gaussian symbol specialization: `Q_{1,1} = 1`, all other symbols `0`.
pub fn gaussian_symbols(a: u8, b: u8) -> BigRational {
    if (a, b) == (1, 1) {
        rat(1, 1)
    } else {
        rat(0, 1)
    }
}
