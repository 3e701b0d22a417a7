//! Numeric evaluation of the asymptotic-expansion coefficients `L^q_j(z,w)`,
//! the approximate kernels `K^⟨k⟩ = (Σ_j m^{q−j} L^q_j) e^{2mQ(z,w)}`, and
//! the blow-up universality comparator against the limit kernel.
//!
//! The coefficient formulas here are hand-coded from the jets of
//! `β = ∂_z∂̄_w Q`; the symbolic engine re-derives the same formulas in exact
//! arithmetic and the two routes are cross-checked in the tests.

use crate::closed::limit_blowup_kernel;
use crate::gram::KernelSource;
use crate::numerics::ls_slope;
use crate::potential::{BetaJet, C64, HermitianPotential};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExpansionError {
    #[error("β(z,w) vanishes; order {0} needs 1/β")]
    BetaZero(u8),
    #[error("expansion order {requested} unavailable for q = {q} (max {max})")]
    OrderUnavailable { q: usize, requested: u8, max: u8 },
}

/// `L¹_j(z,w)` for `j ∈ {0,1}`:
/// `L₀ = (2/π)β`, `L₁ = (1/2π)(β₁₁/β − β₁₀β₀₁/β²)`.
pub fn eval_l1(
    potential: &HermitianPotential,
    z: C64,
    w: C64,
    j: u8,
) -> Result<C64, ExpansionError> {
    let jet = potential.beta_jet(z, w, 1);
    let b = jet.beta();
    let pi = std::f64::consts::PI;
    match j {
        0 => Ok(2.0 / pi * b),
        1 => {
            if b.norm() < 1e-300 {
                return Err(ExpansionError::BetaZero(1));
            }
            Ok((jet.get(1, 1) / b - jet.get(1, 0) * jet.get(0, 1) / (b * b)) / (2.0 * pi))
        }
        _ => Err(ExpansionError::OrderUnavailable {
            q: 1,
            requested: j,
            max: 1,
        }),
    }
}

/// `L²_j(z,w)` for `j ∈ {0,1,2}` from the jet of β at `(z,w)`.
pub fn eval_l2(
    potential: &HermitianPotential,
    z: C64,
    w: C64,
    j: u8,
) -> Result<C64, ExpansionError> {
    let jet = potential.beta_jet(z, w, 2);
    eval_l2_lifted(&jet, w - z, (w - z).conj(), j)
}

/// `L²_j` with independent holomorphic/anti-holomorphic displacements: the
/// lift replaces `(z−w) → (z−w′)` and `(z̄−w̄) → (z̄′−w̄)`, i.e.
/// `u = w′−z` and `ū = w̄−z̄′`, while the β-jet stays anchored at `(z,w)`.
pub fn eval_l2_lifted(jet: &BetaJet, u: C64, ubar: C64, j: u8) -> Result<C64, ExpansionError> {
    let b = jet.beta();
    let pi = std::f64::consts::PI;
    let uu = u * ubar; // |z−w|² on the diagonal
    match j {
        0 => Ok(-4.0 / pi * uu * b * b),
        1 => {
            if b.norm() < 1e-300 {
                return Err(ExpansionError::BetaZero(1));
            }
            // (4/π)β − (2/π)(z̄−w̄)∂̄β + (2/π)(z−w)∂β − (3/π)|z−w|²∂∂̄β
            //   + (2/π)|z−w|²(∂β)(∂̄β)/β, with (z−w) = −u, (z̄−w̄) = −ū.
            Ok((4.0 * b + 2.0 * ubar * jet.get(0, 1) - 2.0 * u * jet.get(1, 0)
                - 3.0 * uu * jet.get(1, 1)
                + 2.0 * uu * jet.get(1, 0) * jet.get(0, 1) / b)
                / pi)
        }
        2 => {
            if b.norm() < 1e-300 {
                return Err(ExpansionError::BetaZero(2));
            }
            let b2 = b * b;
            let b3 = b2 * b;
            let b4 = b3 * b;
            let (b10, b01) = (jet.get(1, 0), jet.get(0, 1));
            let (b11, b20, b02) = (jet.get(1, 1), jet.get(2, 0), jet.get(0, 2));
            let (b21, b12, b22) = (jet.get(2, 1), jet.get(1, 2), jet.get(2, 2));
            // ∂∂̄ log β and its z- and w̄-derivatives.
            let dlog = b11 / b - b10 * b01 / b2;
            let dlog_wbar = b12 / b - (2.0 * b11 * b01 + b10 * b02) / b2
                + 2.0 * b10 * b01 * b01 / b3;
            let dlog_z = b21 / b - (2.0 * b10 * b11 + b20 * b01) / b2
                + 2.0 * b10 * b10 * b01 / b3;
            // Ξ₂ term bank (the printed ∂_z b read as ∂_z β).
            let xi2 = 1.5 * b12 * b10 / b2 - 6.5 * b10 * b11 * b01 / b3
                + 1.5 * b11 * b11 / b2
                - b10 * b10 * b02 / b3
                + 4.25 * b10 * b10 * b01 * b01 / b4
                - 2.0 / 3.0 * b22 / b
                + 1.5 * b21 * b01 / b2
                - b20 * b01 * b01 / b3
                + b20 * b02 / (3.0 * b2);
            // (w̄−z̄) = +ū, (z−w) = −u.
            Ok((2.0 * dlog + ubar * dlog_wbar - u * dlog_z) / pi + uu * xi2 / pi)
        }
        _ => Err(ExpansionError::OrderUnavailable {
            q: 2,
            requested: j,
            max: 2,
        }),
    }
}

/// The approximate kernel
/// `K^⟨k⟩_{q,m}(z,w) = (Σ_{j≤q−1+k} m^{q−j} L^q_j(z,w)) e^{2mQ(z,w)}`.
pub fn approx_kernel(
    potential: &HermitianPotential,
    m: f64,
    q: usize,
    k: u8,
    z: C64,
    w: C64,
) -> Result<C64, ExpansionError> {
    let j_max = (q as u8 - 1) + k;
    let available = match q {
        1 => 1,
        2 => 2,
        _ => 0,
    };
    if j_max > available {
        return Err(ExpansionError::OrderUnavailable {
            q,
            requested: j_max,
            max: available,
        });
    }
    let mut amplitude = C64::new(0.0, 0.0);
    for j in 0..=j_max {
        let l = match q {
            1 => eval_l1(potential, z, w, j)?,
            _ => eval_l2(potential, z, w, j)?,
        };
        amplitude += m.powi(q as i32 - j as i32) * l;
    }
    Ok(amplitude * (2.0 * m * potential.eval_polarized(z, w)).exp())
}

/// Approximate kernel as a [`KernelSource`] (q = 2 lift via the
/// coefficient-wise extension).
pub struct ApproxKernel {
    pub potential: HermitianPotential,
    pub m: f64,
    pub q: usize,
    pub k: u8,
}

impl KernelSource for ApproxKernel {
    fn eval(&self, z: C64, w: C64) -> C64 {
        approx_kernel(&self.potential, self.m, self.q, self.k, z, w)
            .expect("orders validated at construction")
    }

    fn lift(&self, z: C64, zprime: C64, w: C64, wprime: C64) -> C64 {
        let j_max = (self.q as u8 - 1) + self.k;
        let u = wprime - z;
        let ubar = (w - zprime).conj();
        let jet = self.potential.beta_jet(z, w, 2);
        let mut amplitude = C64::new(0.0, 0.0);
        for j in 0..=j_max {
            let l = match self.q {
                1 => eval_l1(&self.potential, z, w, j).expect("validated"),
                _ => eval_l2_lifted(&jet, u, ubar, j).expect("validated"),
            };
            amplitude += self.m.powi(self.q as i32 - j as i32) * l;
        }
        amplitude * (2.0 * self.m * self.potential.eval_polarized(z, w)).exp()
    }
}

/// Near-diagonal policy: the expansion is compared only where
/// `|z−w| ≤ 3/√(2mΔQ(z))` (the blow-up scale).
pub fn near_diagonal_radius(potential: &HermitianPotential, m: f64, z: C64) -> f64 {
    3.0 / (2.0 * m * potential.laplacian(z)).sqrt()
}

/// Left-hand side of the blow-up comparison at `z0`:
/// with `ξ′ = ξ/√(2mΔQ(z0))`, `η′ = η/√(2mΔQ(z0))`, returns
/// `|K(z0+ξ′, z0+η′)| e^{−mQ(z0+ξ′)−mQ(z0+η′)} / (2mΔQ(z0))`
/// (or the signed real part when `signed` is set).
pub fn blowup_lhs(
    source: &dyn KernelSource,
    potential: &HermitianPotential,
    m: f64,
    z0: C64,
    xi: C64,
    eta: C64,
    signed: bool,
) -> f64 {
    let scale = (2.0 * m * potential.laplacian(z0)).sqrt();
    let zp = z0 + xi / scale;
    let wp = z0 + eta / scale;
    let k = source.eval(zp, wp);
    let weight = (-m * (potential.eval(zp) + potential.eval(wp))).exp();
    let normalized = k * weight / (2.0 * m * potential.laplacian(z0));
    if signed {
        normalized.re
    } else {
        normalized.norm()
    }
}

/// Default `(ξ, η)` grid: `count` separations spread over `[0, max_sep]`
/// along the fixed direction `e^{iπ/6}`, symmetric about the base point.
pub fn default_blowup_pairs(count: usize, max_sep: f64) -> Vec<(C64, C64)> {
    let dir = C64::from_polar(1.0, std::f64::consts::PI / 6.0);
    (0..count)
        .map(|i| {
            let d = max_sep * i as f64 / (count - 1).max(1) as f64;
            (0.5 * d * dir, -0.5 * d * dir)
        })
        .collect()
}

/// A kernel handed to a study, with refinement metadata.
pub struct KernelWithMeta {
    pub source: Box<dyn KernelSource>,
    /// Basis truncation used (None for closed forms / expansions).
    pub n: Option<usize>,
    /// Relative change of the study quantity in the last n-refinement step,
    /// so basis-truncation error stays distinguishable from expansion error.
    pub refine_delta: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BlowupRow {
    pub m: f64,
    pub n: Option<usize>,
    pub refine_delta: Option<f64>,
    pub sup_error: f64,
    pub slope_so_far: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BlowupStudy {
    pub z0: (f64, f64),
    pub rows: Vec<BlowupRow>,
    /// Least-squares slope of log(sup_error) against log(m); `None` when
    /// fewer than two m-values (flagged instead of fabricated).
    pub slope: Option<f64>,
}

/// Sup-error study of the blow-up comparison over a `(ξ,η)` grid and a list
/// of `m` values.
pub fn blowup_error_study(
    kernel_for_m: &dyn Fn(f64) -> KernelWithMeta,
    potential: &HermitianPotential,
    z0: C64,
    pairs: &[(C64, C64)],
    m_list: &[f64],
    signed: bool,
) -> BlowupStudy {
    let mut rows = Vec::with_capacity(m_list.len());
    let mut logs: Vec<(f64, f64)> = Vec::new();
    for &m in m_list {
        let kernel = kernel_for_m(m);
        let sup_error = pairs
            .iter()
            .map(|&(xi, eta)| {
                let lhs = blowup_lhs(kernel.source.as_ref(), potential, m, z0, xi, eta, signed);
                let limit = if signed {
                    let s = (xi - eta).norm_sqr();
                    (2.0 - s) / std::f64::consts::PI * (-0.5 * s).exp()
                } else {
                    limit_blowup_kernel(xi, eta)
                };
                (lhs - limit).abs()
            })
            .fold(0.0f64, f64::max);
        logs.push((m.ln(), sup_error.max(1e-300).ln()));
        let slope_so_far = (logs.len() >= 2).then(|| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = logs.iter().copied().unzip();
            ls_slope(&xs, &ys)
        });
        rows.push(BlowupRow {
            m,
            n: kernel.n,
            refine_delta: kernel.refine_delta,
            sup_error,
            slope_so_far,
        });
    }
    let slope = rows.last().and_then(|r| r.slope_so_far);
    BlowupStudy {
        z0: (z0.re, z0.im),
        rows,
        slope,
    }
}

/// Basis-refinement protocol for Gram-backed studies: increase `n` by `step`
/// until the study quantity moves by less than 10% of the current error
/// level, so basis truncation contributes under a tenth of the reported
/// expansion error.
pub fn refined_gram_blowup_kernel(
    potential: &HermitianPotential,
    m: f64,
    q: usize,
    z0: C64,
    pairs: &[(C64, C64)],
    n_start: usize,
    step: usize,
    n_max: usize,
    cache_dir: Option<&std::path::Path>,
) -> Result<KernelWithMeta, crate::gram::GramError> {
    let quad = crate::gram::QuadratureSpec::default();
    let build = |n: usize| -> Result<crate::gram::GramKernel, crate::gram::GramError> {
        let spec = crate::gram::BasisSpec::new(q, n);
        let radius = crate::gram::plane_truncation_radius(potential, m, q, n);
        let domain = crate::potential::DomainSpec::Plane {
            truncation_radius: radius,
        };
        match cache_dir {
            Some(dir) => {
                crate::gram::cache::build_cached(dir, domain, potential, m, spec, &quad)
                    .map(|(k, _)| k)
            }
            None => crate::gram::GramKernel::build(domain, potential, m, spec, &quad),
        }
    };
    let sup_err = |kernel: &crate::gram::GramKernel| -> f64 {
        pairs
            .iter()
            .map(|&(xi, eta)| {
                let lhs = blowup_lhs(kernel, potential, m, z0, xi, eta, false);
                (lhs - limit_blowup_kernel(xi, eta)).abs()
            })
            .fold(0.0f64, f64::max)
    };
    let mut n = n_start;
    let mut kernel = build(n)?;
    let mut err = sup_err(&kernel);
    loop {
        let n_next = (n + step).min(n_max);
        let kernel_next = build(n_next)?;
        let err_next = sup_err(&kernel_next);
        let delta = (err - err_next).abs();
        if delta <= 0.1 * err_next.max(1e-300) || n_next == n_max {
            return Ok(KernelWithMeta {
                source: Box::new(kernel_next),
                n: Some(n_next),
                refine_delta: Some(delta / err_next.max(1e-300)),
            });
        }
        n = n_next;
        kernel = kernel_next;
        err = err_next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed::gaussian_poly_kernel;
    use crate::gram::GaussianSource;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn l1_gaussian_values() {
        let p = HermitianPotential::quadratic(1.0);
        let pi = std::f64::consts::PI;
        let v0 = eval_l1(&p, c(0.3, 0.1), c(-0.2, 0.4), 0).unwrap();
        assert!((v0 - c(2.0 / pi, 0.0)).norm() < 1e-15);
        let v1 = eval_l1(&p, c(0.3, 0.1), c(-0.2, 0.4), 1).unwrap();
        assert!(v1.norm() < 1e-15);
    }

    #[test]
    fn l1_quartic_at_origin() {
        // Q = |z|² + s|z|⁴, z = w = 0, s = 0.1: L₁ = (1/2π)·4s = 0.2/π.
        let p = HermitianPotential::quartic(0.1);
        let v = eval_l1(&p, c(0.0, 0.0), c(0.0, 0.0), 1).unwrap();
        assert_abs_diff_eq!(v.re, 0.2 / std::f64::consts::PI, epsilon = 1e-15);
        assert!(v.im.abs() < 1e-16);
    }

    #[test]
    fn l1_diagonal_is_scaled_laplacian() {
        let p = HermitianPotential::quartic(0.2);
        for &z in &[c(0.0, 0.0), c(0.4, -0.1), c(-0.6, 0.3)] {
            let v = eval_l1(&p, z, z, 0).unwrap();
            assert!(
                (v.re - 2.0 / std::f64::consts::PI * p.laplacian(z)).abs() < 1e-14
                    && v.im.abs() < 1e-14
            );
        }
    }

    #[test]
    fn l2_gaussian_values() {
        let p = HermitianPotential::quadratic(1.0);
        let pi = std::f64::consts::PI;
        let (z, w) = (c(0.3, -0.2), c(0.1, 0.1));
        let uu = (z - w).norm_sqr();
        let v0 = eval_l2(&p, z, w, 0).unwrap();
        assert!((v0 - c(-4.0 / pi * uu, 0.0)).norm() < 1e-15);
        let v1 = eval_l2(&p, z, w, 1).unwrap();
        assert!((v1 - c(4.0 / pi, 0.0)).norm() < 1e-15);
        let v2 = eval_l2(&p, z, w, 2).unwrap();
        assert!(v2.norm() < 1e-15);
    }

    #[test]
    fn l2_order2_quartic_origin() {
        // s = 0.1, z = w = 0: only the ∂∂̄ log β term survives:
        // L²₂ = (2/π)(β₁₁β − β₁₀β₀₁)/β² = (2/π)·0.4 = 0.8/π.
        let p = HermitianPotential::quartic(0.1);
        let v = eval_l2(&p, c(0.0, 0.0), c(0.0, 0.0), 2).unwrap();
        assert_abs_diff_eq!(v.re, 0.8 / std::f64::consts::PI, epsilon = 1e-14);
        assert!(v.im.abs() < 1e-16);
    }

    #[test]
    fn l2_matches_symbolic_specialization() {
        // The hand-coded numeric formulas against the engine's printed
        // series specialized to the same potential, at a batch of points.
        use crate::symbolic::{printed_l2_0, printed_l2_1, printed_l2_2};
        let p = HermitianPotential::quartic(0.17);
        let pts = [
            (c(0.3, 0.1), c(0.2, -0.2)),
            (c(-0.4, 0.5), c(0.1, 0.3)),
            (c(0.05, -0.6), c(-0.3, 0.2)),
            (c(0.7, 0.0), c(0.6, 0.1)),
        ];
        for &(z, w) in &pts {
            let symvals = |a: u8, b: u8| p.eval_polarized_deriv(z, w, a as usize, b as usize);
            let u = w - z;
            for (j, printed) in [printed_l2_0(), printed_l2_1(), printed_l2_2()]
                .iter()
                .enumerate()
            {
                let sym = printed.to_series().eval(u, &symvals);
                let num = eval_l2(&p, z, w, j as u8).unwrap();
                assert!(
                    (sym - num).norm() <= 1e-12 * (1.0 + num.norm()),
                    "order {j} at ({z},{w}): {sym} vs {num}"
                );
            }
        }
    }

    #[test]
    fn l2_hermitian_symmetry() {
        // conj(L²_j(z,w)) = L²_j(w,z).
        let p = HermitianPotential::quartic(0.12);
        let pairs = [(c(0.3, 0.2), c(-0.1, 0.4)), (c(0.5, -0.5), c(0.2, 0.1))];
        for &(z, w) in &pairs {
            for j in 0..=2u8 {
                let a = eval_l2(&p, z, w, j).unwrap();
                let b = eval_l2(&p, w, z, j).unwrap();
                assert!((a.conj() - b).norm() < 1e-12 * (1.0 + a.norm()), "j={j}");
            }
        }
    }

    #[test]
    fn l2_bianalyticity_in_z() {
        // ∂̄²_z L²_j(·,w) = 0: finite-difference second-∂̄ residual.
        let p = HermitianPotential::quartic(0.15);
        let w = c(0.2, -0.3);
        let h = 1e-3;
        for j in 0..=2u8 {
            let f = |z: C64| eval_l2(&p, z, w, j).unwrap();
            let z = c(0.25, 0.15);
            let dbar = |g: &dyn Fn(C64) -> C64, z: C64| {
                let dx = (g(z + c(h, 0.0)) - g(z - c(h, 0.0))) / (2.0 * h);
                let dy = (g(z + c(0.0, h)) - g(z - c(0.0, h))) / (2.0 * h);
                0.5 * (dx + c(0.0, 1.0) * dy)
            };
            let first = |z: C64| dbar(&f, z);
            let second = dbar(&first, z);
            let scale = f(z).norm() + 1.0;
            assert!(second.norm() < 1e-6 * scale, "order {j}: {}", second.norm());
        }
    }

    #[test]
    fn l2_diagonal_positivity() {
        // L²₁(z,z) = (4/π)ΔQ(z) > 0.
        let p = HermitianPotential::quartic(0.1);
        for &z in &[c(0.0, 0.0), c(0.5, 0.2), c(-0.7, 0.4)] {
            let v = eval_l2(&p, z, z, 1).unwrap();
            assert!(
                (v.re - 4.0 / std::f64::consts::PI * p.laplacian(z)).abs() < 1e-13
                    && v.re > 0.0
            );
        }
    }

    #[test]
    fn approx_kernel_gaussian_identity() {
        // q=2, k=0 equals the Gaussian closed form identically.
        let p = HermitianPotential::quadratic(1.0);
        for &m in &[1.0, 5.0, 40.0] {
            for &(z, w) in &[
                (c(0.0, 0.0), c(0.0, 0.0)),
                (c(0.3, -0.1), c(0.25, 0.0)),
                (c(-0.2, 0.4), c(0.1, 0.35)),
            ] {
                let a = approx_kernel(&p, m, 2, 0, z, w).unwrap();
                let b = gaussian_poly_kernel(2, m, z, w);
                assert!(
                    (a - b).norm() <= 1e-12 * b.norm(),
                    "m={m}: {a} vs {b}"
                );
            }
        }
        // q=1, k=0: (2m/π)e^{2mzw̄}.
        let a = approx_kernel(&p, 3.0, 1, 0, c(0.2, 0.1), c(0.1, -0.1)).unwrap();
        let b = gaussian_poly_kernel(1, 3.0, c(0.2, 0.1), c(0.1, -0.1));
        assert!((a - b).norm() <= 1e-13 * b.norm());
    }

    #[test]
    fn approx_kernel_order_guard() {
        let p = HermitianPotential::quadratic(1.0);
        assert!(matches!(
            approx_kernel(&p, 1.0, 2, 2, c(0.0, 0.0), c(0.0, 0.0)),
            Err(ExpansionError::OrderUnavailable { .. })
        ));
    }

    #[test]
    fn blowup_exact_collapse_for_gaussian() {
        // With the exact kernel the rescaled expression equals the limit for
        // every m.
        let p = HermitianPotential::quadratic(1.0);
        for &m in &[2.0, 17.0, 80.0] {
            let source = GaussianSource { q: 2, m };
            for &(xi, eta) in &default_blowup_pairs(5, 2.0) {
                let lhs = blowup_lhs(&source, &p, m, c(0.2, -0.1), xi, eta, false);
                let limit = limit_blowup_kernel(xi, eta);
                assert!(
                    (lhs - limit).abs() < 1e-12,
                    "m={m}: {lhs} vs {limit}"
                );
            }
        }
        // Coincidence point value 2/π.
        let source = GaussianSource { q: 2, m: 10.0 };
        let v = blowup_lhs(&source, &p, 10.0, c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), false);
        assert_abs_diff_eq!(v, 2.0 / std::f64::consts::PI, epsilon = 1e-13);
    }

    #[test]
    fn blowup_study_gaussian_control() {
        let p = HermitianPotential::quadratic(1.0);
        let factory = |m: f64| KernelWithMeta {
            source: Box::new(GaussianSource { q: 2, m }) as Box<dyn KernelSource>,
            n: None,
            refine_delta: None,
        };
        let study = blowup_error_study(
            &factory,
            &p,
            c(0.0, 0.0),
            &default_blowup_pairs(9, 2.0),
            &[20.0, 40.0],
            false,
        );
        for row in &study.rows {
            assert!(row.sup_error < 1e-10, "m={}: {}", row.m, row.sup_error);
        }
    }

    #[test]
    fn single_m_omits_slope() {
        let p = HermitianPotential::quadratic(1.0);
        let factory = |m: f64| KernelWithMeta {
            source: Box::new(GaussianSource { q: 2, m }) as Box<dyn KernelSource>,
            n: None,
            refine_delta: None,
        };
        let study = blowup_error_study(
            &factory,
            &p,
            c(0.0, 0.0),
            &default_blowup_pairs(3, 1.0),
            &[20.0],
            false,
        );
        assert!(study.slope.is_none());
        assert!(study.rows[0].slope_so_far.is_none());
    }
}
