//! Bergman's first and second metrics, their polyanalytic extensions via
//! the lifted kernel, and the rescaled large-`m` asymptotics.
//!
//! Conventions: the first metric density is the definitional
//! `K(z,z)·ω(z)`; the model-disk displays that drop the `ω` factor are
//! matched in the tests up to that stated convention. The second metric is
//! `Δ log K(z,z)` with the normalized Laplacian `Δ = ∂∂̄`.

use crate::gram::KernelSource;
use crate::numerics::solve_dense;
use crate::potential::{C64, HermitianPotential};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("kernel diagonal not positive near {0}")]
    NonpositiveDiagonal(C64),
    #[error("lifted kernel not positive near (z, z+ε) = ({0}, {1})")]
    NonpositiveLift(C64, C64),
}

/// A sampled metric value: isothermal `|dz|²`-density plus the `dz²`
/// coefficient (zero for isothermal metrics).
#[derive(Debug, Clone)]
pub struct MetricSample {
    pub z: C64,
    pub isothermal: f64,
    pub dz2: C64,
    /// Kernel source, step, and stencil bookkeeping for the record.
    pub provenance: String,
}

/// Bergman's first metric density `K(z,z)·ω(z)`.
pub fn metric1_density(diag: &dyn Fn(C64) -> f64, weight: &dyn Fn(C64) -> f64, z: C64) -> f64 {
    diag(z) * weight(z)
}

/// Bergman's second metric density `Δ log K(z,z)` by 5-point stencils with
/// one Richardson refinement.
pub fn metric2_density(
    diag: &dyn Fn(C64) -> f64,
    z: C64,
    h: f64,
) -> Result<f64, MetricsError> {
    // All stencil points must see a positive diagonal.
    for &step in &[h, 0.5 * h, 0.0] {
        for &dir in &[
            C64::new(step, 0.0),
            C64::new(-step, 0.0),
            C64::new(0.0, step),
            C64::new(0.0, -step),
        ] {
            if diag(z + dir) <= 0.0 {
                return Err(MetricsError::NonpositiveDiagonal(z + dir));
            }
        }
    }
    let f = |w: C64| diag(w).ln();
    Ok(crate::numerics::laplacian_fd(&f, z, h))
}

/// The q×q first-metric matrix
/// `M[k][k′] = ω(z)/(k!k′!) ∂̄^k_{z′}∂^{k′}_{z′} E⊗2[K](z,z′;z,z′)|_{z′=z}`.
///
/// The double-diagonal lift is a polynomial of bidegree `(q−1, q−1)` in
/// `(ε̄, ε)`, so the derivatives are read off by exact interpolation at `q²`
/// sample points of radius `h` instead of differencing; the result is
/// Hermitian-symmetrized.
pub fn poly_metric1_matrix(
    lift: &dyn KernelSource,
    weight: &dyn Fn(C64) -> f64,
    q: usize,
    z: C64,
    h: f64,
) -> Vec<Vec<C64>> {
    let dim = q * q;
    // Sample points: spread over angles and two radii to keep the
    // Vandermonde system well separated.
    let samples: Vec<C64> = (0..dim)
        .map(|s| {
            let radius = h * (0.6 + 0.4 * s as f64 / dim.max(2) as f64);
            let angle = 2.0 * std::f64::consts::PI * s as f64 / dim as f64 + 0.37;
            C64::from_polar(radius, angle)
        })
        .collect();
    let mut a = vec![C64::new(0.0, 0.0); dim * dim];
    let mut b = vec![C64::new(0.0, 0.0); dim];
    for (s, &eps) in samples.iter().enumerate() {
        for k in 0..q {
            for kp in 0..q {
                a[s * dim + (k * q + kp)] = eps.conj().powu(k as u32) * eps.powu(kp as u32);
            }
        }
        b[s] = lift.lift(z, z + eps, z, z + eps);
    }
    let d = solve_dense(&a, &b, dim);
    let w = weight(z);
    let mut matrix: Vec<Vec<C64>> = (0..q)
        .map(|k| (0..q).map(|kp| d[k * q + kp] * w).collect())
        .collect();
    // Hermitian symmetrization.
    for k in 0..q {
        for kp in 0..=k {
            let sym = 0.5 * (matrix[k][kp] + matrix[kp][k].conj());
            matrix[k][kp] = sym;
            matrix[kp][k] = sym.conj();
        }
    }
    matrix
}

/// First polyanalytic metric density indexed by `ε`:
/// `E⊗2[K](z,z+ε;z,z+ε)·ω(z)`.
pub fn poly_metric1_density(
    lift: &dyn KernelSource,
    weight: &dyn Fn(C64) -> f64,
    z: C64,
    eps: C64,
) -> f64 {
    let v = lift.lift(z, z + eps, z, z + eps);
    debug_assert!(v.im.abs() <= 1e-9 * (1.0 + v.re.abs()));
    v.re * weight(z)
}

/// Second polyanalytic metric at `(z, ε)`: isothermal part
/// `(Δ_z + 2Δ_ε − ∂̄_z∂_ε − ∂_z∂̄_ε)[log lift]` and `dz²`-part
/// `(∂_z∂_ε − ∂_ε²)[log lift]`, by finite differences in the four real
/// coordinates with one Richardson refinement.
pub fn poly_metric2(
    lift: &dyn KernelSource,
    z: C64,
    eps: C64,
    h: f64,
    provenance: &str,
) -> Result<MetricSample, MetricsError> {
    let value = |zz: C64, ee: C64| -> Result<f64, MetricsError> {
        let v = lift.lift(zz, zz + ee, zz, zz + ee).re;
        if v <= 0.0 {
            return Err(MetricsError::NonpositiveLift(zz, zz + ee));
        }
        Ok(v.ln())
    };
    // Second partials in the four real coordinates (x, y, a, b) of (z, ε),
    // with one Richardson pass: D(h/2) combined as (4 D(h/2) − D(h))/3.
    let second = |i: usize, j: usize, h: f64| -> Result<f64, MetricsError> {
        let unit = |k: usize, s: f64| -> (C64, C64) {
            match k {
                0 => (C64::new(s, 0.0), C64::new(0.0, 0.0)),
                1 => (C64::new(0.0, s), C64::new(0.0, 0.0)),
                2 => (C64::new(0.0, 0.0), C64::new(s, 0.0)),
                _ => (C64::new(0.0, 0.0), C64::new(0.0, s)),
            }
        };
        if i == j {
            let (dz, de) = unit(i, h);
            let plus = value(z + dz, eps + de)?;
            let minus = value(z - dz, eps - de)?;
            let mid = value(z, eps)?;
            Ok((plus + minus - 2.0 * mid) / (h * h))
        } else {
            let (dzi, dei) = unit(i, h);
            let (dzj, dej) = unit(j, h);
            let pp = value(z + dzi + dzj, eps + dei + dej)?;
            let pm = value(z + dzi - dzj, eps + dei - dej)?;
            let mp = value(z - dzi + dzj, eps - dei + dej)?;
            let mm = value(z - dzi - dzj, eps - dei - dej)?;
            Ok((pp - pm - mp + mm) / (4.0 * h * h))
        }
    };
    let richardson = |i: usize, j: usize| -> Result<f64, MetricsError> {
        let a1 = second(i, j, h)?;
        let a2 = second(i, j, 0.5 * h)?;
        Ok((4.0 * a2 - a1) / 3.0)
    };
    let (x, y, a, b) = (0, 1, 2, 3);
    let lxx = richardson(x, x)?;
    let lyy = richardson(y, y)?;
    let laa = richardson(a, a)?;
    let lbb = richardson(b, b)?;
    let lxa = richardson(x, a)?;
    let lyb = richardson(y, b)?;
    let lxb = richardson(x, b)?;
    let lya = richardson(y, a)?;
    let lab = richardson(a, b)?;
    // Δ_z + 2Δ_ε − ∂̄_z∂_ε − ∂_z∂̄_ε reduces to real combinations.
    let isothermal = 0.25 * (lxx + lyy) + 0.5 * (laa + lbb) - 0.5 * (lxa + lyb);
    // ∂_z∂_ε − ∂_ε².
    let dz2 = 0.25
        * C64::new(
            lxa - lyb - laa + lbb,
            -(lxb + lya - 2.0 * lab),
        );
    Ok(MetricSample {
        z,
        isothermal,
        dz2,
        provenance: format!("{provenance}; h={h:.3e}; 5-point + Richardson"),
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RescaledMetricRow {
    pub m: f64,
    pub eps_prime: (f64, f64),
    pub first_density: f64,
    pub first_limit: f64,
    pub first_error: f64,
    pub second_isothermal: Option<f64>,
    pub second_iso_limit: Option<f64>,
    pub second_dz2_re: Option<f64>,
    pub second_dz2_im: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RescaledMetricStudy {
    pub z: (f64, f64),
    pub rows: Vec<RescaledMetricRow>,
    /// Per-m sup of the first-metric error column.
    pub sup_first_error: Vec<(f64, f64)>,
}

/// Rescaled metric study: with `ε = ε′/√(2mΔQ(z))`, the rescaled
/// first-metric density `e^{−2mQ(z)}·lift/(2mΔQ)` is compared against
/// `π⁻¹(2+|ε′|²)`, and (optionally) the rescaled second metric against
/// `1 + 4/(2+|ε′|²)²` and `ε′²/(2+|ε′|²)²`.
pub fn rescaled_metric_study(
    kernel_for_m: &dyn Fn(f64) -> Box<dyn KernelSource>,
    potential: &HermitianPotential,
    z: C64,
    eps_prime_grid: &[C64],
    m_list: &[f64],
    with_second: bool,
) -> RescaledMetricStudy {
    let mut rows = Vec::new();
    let mut sup_first_error = Vec::new();
    for &m in m_list {
        let kernel = kernel_for_m(m);
        let lap = potential.laplacian(z);
        let scale = (2.0 * m * lap).sqrt();
        let mut sup = 0.0f64;
        for &ep in eps_prime_grid {
            let eps = ep / scale;
            let weight = (-2.0 * m * potential.eval(z)).exp();
            let density = poly_metric1_density(kernel.as_ref(), &|_| weight, z, eps)
                / (2.0 * m * lap);
            let limit = (2.0 + ep.norm_sqr()) / std::f64::consts::PI;
            let error = (density - limit).abs();
            sup = sup.max(error);
            let (second_isothermal, second_iso_limit, second_dz2_re, second_dz2_im) =
                if with_second {
                    let h = 1e-4 / scale;
                    match poly_metric2(kernel.as_ref(), z, eps, h, "rescaled study") {
                        Ok(sample) => {
                            let denom = 2.0 * m * lap;
                            let s = 2.0 + ep.norm_sqr();
                            (
                                Some(sample.isothermal / denom),
                                Some(1.0 + 4.0 / (s * s)),
                                Some(sample.dz2.re / denom),
                                Some(sample.dz2.im / denom),
                            )
                        }
                        Err(_) => (None, None, None, None),
                    }
                } else {
                    (None, None, None, None)
                };
            rows.push(RescaledMetricRow {
                m,
                eps_prime: (ep.re, ep.im),
                first_density: density,
                first_limit: limit,
                first_error: error,
                second_isothermal,
                second_iso_limit,
                second_dz2_re,
                second_dz2_im,
            });
        }
        sup_first_error.push((m, sup));
    }
    RescaledMetricStudy {
        z: (z.re, z.im),
        rows,
        sup_first_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{GaussianSource, GramKernel, KoshelevSource};
    use crate::numerics::hermitian_eigenvalues;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn metric1_examples() {
        // Disk with ω = 1/(2π) and K = 2/(1−zw̄)²: density 1/π at 0.
        let diag = |z: C64| 2.0 / (1.0 - z.norm_sqr()).powi(2);
        let v = metric1_density(&diag, &|_| 1.0 / (2.0 * PI), c(0.0, 0.0));
        assert_abs_diff_eq!(v, 1.0 / PI, epsilon = 1e-15);

        // Gaussian q=1: flat density 2m/π.
        let m = 2.5;
        let diag_g = |z: C64| 2.0 * m / PI * (2.0 * m * z.norm_sqr()).exp();
        let w_g = move |z: C64| (-2.0 * m * z.norm_sqr()).exp();
        for &z in &[c(0.0, 0.0), c(0.7, -0.3)] {
            assert_abs_diff_eq!(
                metric1_density(&diag_g, &w_g, z),
                2.0 * m / PI,
                epsilon = 1e-12
            );
        }

        // Model disk ω = 1/π, q = 2: Koshelev diagonal 4 at 0 → 4/π.
        let kosh = KoshelevSource { q: 2 };
        let v2 = metric1_density(&|z| kosh.diag(z), &|_| 1.0 / PI, c(0.0, 0.0));
        assert_abs_diff_eq!(v2, 4.0 / PI, epsilon = 1e-13);
    }

    #[test]
    fn metric2_examples() {
        // Disk (any constant weight): Δ log K = 2/(1−|z|²)²; at 0 → 2.
        let diag = |z: C64| 2.0 / (1.0 - z.norm_sqr()).powi(2);
        let v = metric2_density(&diag, c(0.0, 0.0), 1e-3).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-8);
        let v3 = metric2_density(&diag, c(0.3, -0.2), 1e-3).unwrap();
        assert_abs_diff_eq!(v3, 2.0 / (1.0 - 0.13f64).powi(2), epsilon = 1e-7);

        // Gaussian q=1: Δ log e^{2m|z|²} = 2m.
        let m = 1.7;
        let diag_g = move |z: C64| 2.0 * m / PI * (2.0 * m * z.norm_sqr()).exp();
        let v2 = metric2_density(&diag_g, c(0.4, 0.1), 1e-3).unwrap();
        assert_abs_diff_eq!(v2, 2.0 * m, epsilon = 1e-7);

        // Subharmonicity: nonnegative wherever sampled.
        for &z in &[c(0.0, 0.0), c(0.5, 0.0), c(-0.2, 0.6)] {
            assert!(metric2_density(&diag, z, 1e-3).unwrap() >= -1e-6);
        }
    }

    #[test]
    fn metric2_rejects_nonpositive_diagonal() {
        let diag = |z: C64| 1.0 - 2.0 * z.norm_sqr();
        assert!(matches!(
            metric2_density(&diag, c(0.7, 0.0), 1e-3),
            Err(MetricsError::NonpositiveDiagonal(_))
        ));
    }

    #[test]
    fn poly_metric1_matrix_model_disk() {
        // At z = 0 the model disk gives ω·[[4,0],[0,2]] with ω = 1/π
        // (the display drops the ω factor; tested up to that convention).
        let kosh = KoshelevSource { q: 2 };
        let m = poly_metric1_matrix(&kosh, &|_| 1.0 / PI, 2, c(0.0, 0.0), 1e-2);
        assert_abs_diff_eq!(m[0][0].re * PI, 4.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m[1][1].re * PI, 2.0, epsilon = 1e-8);
        assert!(m[0][1].norm() * PI < 1e-8 && m[1][0].norm() * PI < 1e-8);
    }

    #[test]
    fn poly_metric1_matrix_psd_at_random_points() {
        let kosh = KoshelevSource { q: 2 };
        let gauss = GaussianSource { q: 2, m: 3.0 };
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..10 {
            let z = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            for (src, w) in [
                (&kosh as &dyn KernelSource, 1.0 / PI),
                (&gauss as &dyn KernelSource, (-6.0 * z.norm_sqr()).exp()),
            ] {
                let mat = poly_metric1_matrix(src, &|_| w, 2, z, 1e-2);
                let flat: Vec<C64> = mat.iter().flatten().copied().collect();
                let ev = hermitian_eigenvalues(&flat, 2);
                let trace = mat[0][0].re + mat[1][1].re;
                assert!(ev[0] >= -1e-8 * trace, "min eig {} at {z}", ev[0]);
                // Hermitian by construction.
                assert!((mat[0][1] - mat[1][0].conj()).norm() < 1e-12 * (1.0 + trace));
            }
        }
    }

    #[test]
    fn poly_metric1_matrix_gaussian_rescaled_diag() {
        // Rescaled first-metric matrix for the exact Gaussian kernel:
        // e^{−2mQ}·M/(2mΔQ) → diag(2/π, 1/π) as the matrix is expressed in
        // the blow-up coordinate ε′ = ε·√(2mΔQ).
        //
        // In the matrix picture the (k,k′) entry scales by
        // (2mΔQ)^{(k+k′)/2}, so the rescaled entries are
        // M[0][0]/(2mΔQ), M[1][1]·(2mΔQ)/(2mΔQ)² = M[1][1]/(2mΔQ)... both
        // divided once more by (2mΔQ)^{k}-factors; concretely for q = 2:
        // diag(2/π, 1/π) = (e^{−2mQ(z)}/(2mΔQ)) · diag(M00, M11/(2mΔQ)).
        let m = 40.0;
        let g = GaussianSource { q: 2, m };
        let z = c(0.3, -0.2);
        let w = (-2.0 * m * z.norm_sqr()).exp();
        let mat = poly_metric1_matrix(&g, &|_| w, 2, z, 1e-3 / m.sqrt());
        let s = 2.0 * m; // 2mΔQ with ΔQ = 1
        assert_abs_diff_eq!(mat[0][0].re / s, 2.0 / PI, epsilon = 1e-9);
        assert_abs_diff_eq!(mat[1][1].re / (s * s), 1.0 / PI, epsilon = 1e-9);
        assert!(mat[0][1].norm() / (s * s.sqrt()) < 1e-9);
    }

    #[test]
    fn poly_metric1_density_examples() {
        let kosh = KoshelevSource { q: 2 };
        // Model disk, z = 0, ε = 0.5: (4 + 2·0.25)/π.
        let v = poly_metric1_density(&kosh, &|_| 1.0 / PI, c(0.0, 0.0), c(0.5, 0.0));
        assert_abs_diff_eq!(v, 4.5 / PI, epsilon = 1e-13);
        // ε = 0 reduces to the plain diagonal density.
        let v0 = poly_metric1_density(&kosh, &|_| 1.0 / PI, c(0.2, 0.1), c(0.0, 0.0));
        let d0 = metric1_density(&|z| kosh.diag(z), &|_| 1.0 / PI, c(0.2, 0.1));
        assert_eq!(v0, d0);
        // Nonnegative (sum of squared moduli).
        for &eps in &[c(0.3, 0.4), c(-0.2, 0.1)] {
            assert!(poly_metric1_density(&kosh, &|_| 1.0 / PI, c(0.1, -0.3), eps) >= 0.0);
        }
    }

    #[test]
    fn poly_metric2_model_disk() {
        // ε = 0: isothermal 4/(1−|z|²)², dz²-part 0; at z = 0 → (4, 0).
        let kosh = KoshelevSource { q: 2 };
        let sample = poly_metric2(&kosh, c(0.0, 0.0), c(0.0, 0.0), 1e-3, "model disk").unwrap();
        assert_abs_diff_eq!(sample.isothermal, 4.0, epsilon = 1e-7);
        assert!(sample.dz2.norm() < 1e-7);
        let sample2 = poly_metric2(&kosh, c(0.3, 0.1), c(0.0, 0.0), 1e-3, "model disk").unwrap();
        assert_abs_diff_eq!(
            sample2.isothermal,
            4.0 / (1.0 - 0.1f64).powi(2),
            epsilon = 1e-6
        );
    }

    #[test]
    fn poly_metric2_gaussian_rescaled_limits() {
        // Large m, rescaled: isothermal → 1 + 4/(2+|ε′|²)²,
        // dz² → ε′²/(2+|ε′|²)².
        let m = 4000.0;
        let g = GaussianSource { q: 2, m };
        let z = c(0.1, 0.2);
        let scale = (2.0 * m).sqrt();
        for &ep in &[c(0.0, 0.0), c(1.0, 0.0), c(0.8, -0.6)] {
            let eps = ep / scale;
            let sample = poly_metric2(&g, z, eps, 2e-4 / scale, "gaussian").unwrap();
            let s = 2.0 + ep.norm_sqr();
            let iso = sample.isothermal / (2.0 * m);
            let dz2 = sample.dz2 / (2.0 * m);
            assert!(
                (iso - (1.0 + 4.0 / (s * s))).abs() < 2e-3,
                "ε′={ep}: iso {iso} vs {}",
                1.0 + 4.0 / (s * s)
            );
            let expect = ep * ep / (s * s);
            assert!((dz2 - expect).norm() < 2e-3, "ε′={ep}: dz² {dz2} vs {expect}");
        }
    }

    #[test]
    fn fd_stability_under_step_halving() {
        // Richardson consistency: halving h moves the result by less than
        // 10x the (already tiny) discrepancy budget.
        let kosh = KoshelevSource { q: 2 };
        let a = poly_metric2(&kosh, c(0.2, -0.1), c(0.05, 0.02), 1e-3, "t").unwrap();
        let b = poly_metric2(&kosh, c(0.2, -0.1), c(0.05, 0.02), 5e-4, "t").unwrap();
        assert!((a.isothermal - b.isothermal).abs() < 1e-5);
        assert!((a.dz2 - b.dz2).norm() < 1e-5);
    }

    #[test]
    fn rescaled_first_metric_gaussian_exact() {
        // Identity collapse: error < 1e−10 at every m; ε′ = 0 value 2/π.
        let p = HermitianPotential::quadratic(1.0);
        let factory = |m: f64| Box::new(GaussianSource { q: 2, m }) as Box<dyn KernelSource>;
        let grid = [c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.5), c(0.0, -1.2)];
        let study = rescaled_metric_study(
            &factory,
            &p,
            c(0.25, -0.15),
            &grid,
            &[10.0, 40.0, 160.0],
            false,
        );
        for row in &study.rows {
            assert!(row.first_error < 1e-10, "m={} ε′={:?}", row.m, row.eps_prime);
        }
        let zero_row = study
            .rows
            .iter()
            .find(|r| r.eps_prime == (0.0, 0.0))
            .unwrap();
        assert_abs_diff_eq!(zero_row.first_limit, 2.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn rescaled_first_metric_quartic_gram_decreases() {
        let p = HermitianPotential::quartic(0.1);
        let quad = crate::gram::QuadratureSpec::default();
        let factory = |m: f64| {
            let n = 24 + (2.0 * m).sqrt() as usize * 4;
            Box::new(
                GramKernel::build_plane(&p, m, crate::gram::BasisSpec::new(2, n), &quad)
                    .unwrap(),
            ) as Box<dyn KernelSource>
        };
        let grid = [c(0.0, 0.0), c(1.0, 0.0)];
        let study =
            rescaled_metric_study(&factory, &p, c(0.0, 0.0), &grid, &[20.0, 80.0], false);
        assert!(study.sup_first_error[1].1 < study.sup_first_error[0].1);
    }
}
