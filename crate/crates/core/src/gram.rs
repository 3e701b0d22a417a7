//! Brute-force weighted polyanalytic Bergman kernels by Gram-matrix
//! orthonormalization of the bidegree monomial basis `z̄^r z^j`
//! (`0 ≤ r < q`, `0 ≤ j < n`). This is the universal numerical oracle the
//! other kernel routes are validated against.
//!
//! For radial weights the Gram matrix is block diagonal in the angular index
//! `ℓ = j − r`, which keeps the notoriously ill-conditioned monomial Gram
//! problem at desk scale: blocks have dimension at most `q` and real
//! entries. Columns are scaled to unit norm before factorization either way.

use crate::numerics::{
    cholesky_complex, cholesky_real, forward_solve, gauss_legendre_on, hermitian_eigenvalues,
    polar_grid, symmetric_eigenvalues,
};
use crate::potential::{C64, DomainSpec, HermitianPotential};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod cache;

#[derive(Debug, Error)]
pub enum GramError {
    #[error("Gram matrix not positive definite at pivot {pivot} (block ℓ = {ell})")]
    NotPositiveDefinite { pivot: usize, ell: i64 },
    #[error("radial quadrature unconverged: relative change {worst:.3e} after {nodes} nodes")]
    QuadratureUnconverged { worst: f64, nodes: usize },
    #[error("point out of domain: {0}")]
    OutOfDomain(C64),
    #[error("radial inner products require a radial potential")]
    NotRadial,
    #[error("cache: {0}")]
    Cache(String),
}

/// Basis of the finite subspace: `q·n` monomials `z̄^r z^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub q: usize,
    pub n: usize,
    /// Partition the basis by the angular index `ℓ = j − r` (valid for
    /// radial weights only).
    pub radial_blocking: bool,
}

impl BasisSpec {
    pub fn new(q: usize, n: usize) -> Self {
        Self {
            q,
            n,
            radial_blocking: true,
        }
    }

    pub fn size(&self) -> usize {
        self.q * self.n
    }
}

/// Radial quadrature controls. Node counts double until every requested
/// moment is stable to `tol` (relative), up to `max_doublings`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radial_nodes: usize,
    pub max_doublings: usize,
    pub tol: f64,
    /// Fallback 2D polar tensor grid (radii, angles) for non-radial weights.
    pub grid_2d: (usize, usize),
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_nodes: 256,
            max_doublings: 4,
            tol: 1e-10,
            grid_2d: (128, 256),
        }
    }
}

/// Exact model-disk inner products (`ω ≡ 1/π` on the unit disk):
/// `⟨z̄^r z^j, z̄^s z^k⟩ = [j−r = k−s] / (j+s+1)`.
pub fn inner_products_disk_constant(q: usize, n: usize) -> Vec<Vec<f64>> {
    let dim = q * n;
    let mut g = vec![vec![0.0; dim]; dim];
    for r in 0..q {
        for j in 0..n {
            for s in 0..q {
                for k in 0..n {
                    if j as i64 - r as i64 == k as i64 - s as i64 {
                        g[r * n + j][s * n + k] = 1.0 / (j + s + 1) as f64;
                    }
                }
            }
        }
    }
    g
}

/// Radial moments `∫_0^R ρ^p e^{−2mQ(ρ)} dρ` for `p = 0..=max_power`,
/// with node doubling until stable.
pub fn radial_moments(
    potential: &HermitianPotential,
    m: f64,
    max_power: usize,
    radius: f64,
    quad: &QuadratureSpec,
) -> Result<(Vec<f64>, usize), GramError> {
    let compute = |nodes: usize| -> Vec<f64> {
        let (xs, ws) = gauss_legendre_on(nodes, 0.0, radius);
        let mut out = vec![0.0; max_power + 1];
        for (&x, &w) in xs.iter().zip(&ws) {
            let weight = w * (-2.0 * m * potential.eval(C64::new(x, 0.0))).exp();
            let mut xp = 1.0;
            for o in out.iter_mut() {
                *o += weight * xp;
                xp *= x;
            }
        }
        out
    };
    let mut nodes = quad.radial_nodes;
    let mut prev = compute(nodes);
    for _ in 0..quad.max_doublings {
        nodes *= 2;
        let next = compute(nodes);
        let worst = prev
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max);
        if worst <= quad.tol {
            return Ok((next, nodes));
        }
        prev = next;
    }
    // One final comparison to report the sticking point.
    let next = compute(nodes * 2);
    let worst = prev
        .iter()
        .zip(&next)
        .map(|(&a, &b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
        .fold(0.0f64, f64::max);
    if worst <= quad.tol {
        Ok((next, nodes * 2))
    } else {
        Err(GramError::QuadratureUnconverged {
            worst,
            nodes: nodes * 2,
        })
    }
}

/// Inner products for a radial potential:
/// `⟨z̄^r z^j, z̄^s z^k⟩ = [j−r = k−s] · 2π ∫_0^R ρ^{j+s+r+k+1} e^{−2mQ} dρ`.
pub fn inner_products_radial(
    potential: &HermitianPotential,
    m: f64,
    q: usize,
    n: usize,
    radius: f64,
    quad: &QuadratureSpec,
) -> Result<Vec<Vec<f64>>, GramError> {
    if !potential.is_radial() {
        return Err(GramError::NotRadial);
    }
    let pmax = 2 * (n + q);
    let (moments, _) = radial_moments(potential, m, pmax, radius, quad)?;
    let dim = q * n;
    let mut g = vec![vec![0.0; dim]; dim];
    let two_pi = 2.0 * std::f64::consts::PI;
    for r in 0..q {
        for j in 0..n {
            for s in 0..q {
                for k in 0..n {
                    if j as i64 - r as i64 == k as i64 - s as i64 {
                        g[r * n + j][s * n + k] = two_pi * moments[j + s + r + k + 1];
                    }
                }
            }
        }
    }
    Ok(g)
}

/// General 2D tensor polar quadrature inner products (fallback path and the
/// independent oracle for the radial fast path).
pub fn inner_products_2d(
    potential: &HermitianPotential,
    m: f64,
    q: usize,
    n: usize,
    center: C64,
    radius: f64,
    grid: (usize, usize),
) -> Vec<Vec<C64>> {
    let (pts, wts) = polar_grid(center, radius, grid.0, grid.1);
    let dim = q * n;
    let mut g = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    // Evaluate all basis functions once per point.
    let mut vals = vec![C64::new(0.0, 0.0); dim];
    for (&z, &wt) in pts.iter().zip(&wts) {
        let weight = wt * (-2.0 * m * potential.eval(z)).exp();
        let mut zbar_pow = C64::new(1.0, 0.0);
        for r in 0..q {
            let mut zp = zbar_pow;
            for j in 0..n {
                vals[r * n + j] = zp;
                zp *= z;
            }
            zbar_pow *= z.conj();
        }
        for a in 0..dim {
            for b in 0..dim {
                g[a][b] += vals[a] * vals[b].conj() * weight;
            }
        }
    }
    g
}

/// Truncation radius for plane domains: the smallest radius past the peak of
/// `ρ^{2(n+q)} e^{−2mQ(ρ)}` where that integrand has dropped to `1e−30` of
/// its peak value.
pub fn plane_truncation_radius(
    potential: &HermitianPotential,
    m: f64,
    q: usize,
    n: usize,
) -> f64 {
    let p = 2 * (n + q) as f64;
    let logg = |rho: f64| p * rho.ln() - 2.0 * m * potential.eval(C64::new(rho, 0.0));
    // Scan outward for the peak, then continue until 30 decades below it.
    let mut peak = f64::NEG_INFINITY;
    let mut rho = 0.05;
    loop {
        let v = logg(rho);
        peak = peak.max(v);
        if v < peak - 30.0 * std::f64::consts::LN_10 {
            return rho;
        }
        rho *= 1.02;
        if rho > 1e6 {
            return rho; // weight grows too slowly; caller sees unconverged quadrature
        }
    }
}

enum Factor {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

struct Block {
    /// Angular index `ℓ = j − r`, or `None` for the single unblocked block.
    ell: Option<i64>,
    /// Basis members `(r, j)` in factor order.
    members: Vec<(usize, usize)>,
    /// Unit-norm column scales applied before factorization.
    scales: Vec<f64>,
    chol: Factor,
}

/// Weight attached to a built kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// `ω ≡ 1/π` (model disk).
    ConstantOverPi,
    /// `ω = e^{−2mQ}`.
    Power { m: f64 },
}

/// An orthonormalized finite-basis kernel evaluator with lift support.
pub struct GramKernel {
    pub basis: BasisSpec,
    pub domain: DomainSpec,
    pub weight: WeightKind,
    pub condition_estimate: f64,
    pub warnings: Vec<String>,
    /// Radial node count the moments converged at (0 for exact entries).
    pub quadrature_nodes: usize,
    blocks: Vec<Block>,
}

const ILL_CONDITIONED_THRESHOLD: f64 = 1e12;

impl GramKernel {
    /// Model disk (`ω ≡ 1/π` on the unit disk) with exact rational inner
    /// products.
    pub fn build_model_disk(q: usize, n: usize) -> Result<Self, GramError> {
        let g = inner_products_disk_constant(q, n);
        Self::assemble_blocked(
            BasisSpec::new(q, n),
            DomainSpec::unit_disk(),
            WeightKind::ConstantOverPi,
            &g,
            0,
        )
    }

    /// Power weight `e^{−2mQ}`. Radial potentials take the blocked radial
    /// path; otherwise a full 2D-quadrature Gram matrix is factored.
    pub fn build(
        domain: DomainSpec,
        potential: &HermitianPotential,
        m: f64,
        spec: BasisSpec,
        quad: &QuadratureSpec,
    ) -> Result<Self, GramError> {
        let radius = match domain {
            DomainSpec::Disk { radius, .. } => radius,
            DomainSpec::Plane { truncation_radius } => truncation_radius,
        };
        if potential.is_radial() && spec.radial_blocking && domain.center().norm() == 0.0 {
            let pmax = 2 * (spec.n + spec.q);
            let (moments, nodes) = radial_moments(potential, m, pmax, radius, quad)?;
            let two_pi = 2.0 * std::f64::consts::PI;
            let dim = spec.size();
            let mut g = vec![vec![0.0; dim]; dim];
            for r in 0..spec.q {
                for j in 0..spec.n {
                    for s in 0..spec.q {
                        for k in 0..spec.n {
                            if j as i64 - r as i64 == k as i64 - s as i64 {
                                g[r * spec.n + j][s * spec.n + k] =
                                    two_pi * moments[j + s + r + k + 1];
                            }
                        }
                    }
                }
            }
            Self::assemble_blocked(spec, domain, WeightKind::Power { m }, &g, nodes)
        } else {
            let g = inner_products_2d(
                potential,
                m,
                spec.q,
                spec.n,
                domain.center(),
                radius,
                quad.grid_2d,
            );
            Self::assemble_full(spec, domain, WeightKind::Power { m }, &g)
        }
    }

    /// Plane domain with the truncation radius chosen automatically.
    pub fn build_plane(
        potential: &HermitianPotential,
        m: f64,
        spec: BasisSpec,
        quad: &QuadratureSpec,
    ) -> Result<Self, GramError> {
        let radius = plane_truncation_radius(potential, m, spec.q, spec.n);
        Self::build(
            DomainSpec::Plane {
                truncation_radius: radius,
            },
            potential,
            m,
            spec,
            quad,
        )
    }

    fn assemble_blocked(
        spec: BasisSpec,
        domain: DomainSpec,
        weight: WeightKind,
        g: &[Vec<f64>],
        quadrature_nodes: usize,
    ) -> Result<Self, GramError> {
        let mut blocks = Vec::new();
        let mut condition: f64 = 1.0;
        let mut warnings = Vec::new();
        let ell_min = -(spec.q as i64 - 1);
        let ell_max = spec.n as i64 - 1;
        for ell in ell_min..=ell_max {
            let members: Vec<(usize, usize)> = (0..spec.q)
                .filter_map(|r| {
                    let j = ell + r as i64;
                    (j >= 0 && (j as usize) < spec.n).then(|| (r, j as usize))
                })
                .collect();
            if members.is_empty() {
                continue;
            }
            let dim = members.len();
            let idx = |rj: (usize, usize)| rj.0 * spec.n + rj.1;
            let scales: Vec<f64> = members
                .iter()
                .map(|&a| 1.0 / g[idx(a)][idx(a)].sqrt())
                .collect();
            let mut b = vec![0.0; dim * dim];
            for (i, &a) in members.iter().enumerate() {
                for (jn, &c) in members.iter().enumerate() {
                    b[i * dim + jn] = g[idx(a)][idx(c)] * scales[i] * scales[jn];
                }
            }
            let ev = symmetric_eigenvalues(&b, dim);
            if ev[0] > 0.0 {
                condition = condition.max(ev[dim - 1] / ev[0]);
            }
            let chol = cholesky_real(&b, dim).map_err(|pivot| {
                GramError::NotPositiveDefinite { pivot, ell }
            })?;
            blocks.push(Block {
                ell: Some(ell),
                members,
                scales,
                chol: Factor::Real(chol),
            });
        }
        if condition > ILL_CONDITIONED_THRESHOLD {
            warnings.push(format!(
                "ill-conditioned Gram matrix: estimate {condition:.3e}"
            ));
        }
        Ok(Self {
            basis: spec,
            domain,
            weight,
            condition_estimate: condition,
            warnings,
            quadrature_nodes,
            blocks,
        })
    }

    fn assemble_full(
        spec: BasisSpec,
        domain: DomainSpec,
        weight: WeightKind,
        g: &[Vec<C64>],
    ) -> Result<Self, GramError> {
        let dim = spec.size();
        let members: Vec<(usize, usize)> = (0..spec.q)
            .flat_map(|r| (0..spec.n).map(move |j| (r, j)))
            .collect();
        let scales: Vec<f64> = (0..dim).map(|a| 1.0 / g[a][a].re.sqrt()).collect();
        let mut b = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                b[i * dim + j] = g[i][j] * scales[i] * scales[j];
            }
        }
        let ev = hermitian_eigenvalues(&b, dim);
        let condition = if ev[0] > 0.0 { ev[dim - 1] / ev[0] } else { f64::INFINITY };
        let mut warnings = Vec::new();
        if condition > ILL_CONDITIONED_THRESHOLD {
            warnings.push(format!(
                "ill-conditioned Gram matrix: estimate {condition:.3e}"
            ));
        }
        let chol = cholesky_complex(&b, dim)
            .map_err(|pivot| GramError::NotPositiveDefinite { pivot, ell: 0 })?;
        Ok(Self {
            basis: spec,
            domain,
            weight,
            condition_estimate: condition,
            warnings,
            quadrature_nodes: 0,
            blocks: vec![Block {
                ell: None,
                members,
                scales,
                chol: Factor::Complex(chol),
            }],
        })
    }

    /// Values of the orthonormalized basis at the lifted point `(z, z̄′)`:
    /// one triangular solve per block.
    fn ortho_values(&self, z: C64, zprime: C64) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.basis.size());
        for block in &self.blocks {
            let dim = block.members.len();
            let mut v: Vec<C64> = block
                .members
                .iter()
                .zip(&block.scales)
                .map(|(&(r, j), &s)| {
                    zprime.conj().powu(r as u32) * z.powu(j as u32) * s
                })
                .collect();
            match &block.chol {
                Factor::Real(l) => {
                    // Forward solve with the real factor.
                    for i in 0..dim {
                        let mut acc = v[i];
                        for k in 0..i {
                            acc -= l[i * dim + k] * v[k];
                        }
                        v[i] = acc / l[i * dim + i];
                    }
                }
                Factor::Complex(l) => forward_solve(l, dim, &mut v),
            }
            out.extend(v);
        }
        out
    }

    fn check_domain(&self, pts: &[C64]) -> Result<(), GramError> {
        if let DomainSpec::Disk { .. } = self.domain {
            for &p in pts {
                if !self.domain.contains(p) {
                    return Err(GramError::OutOfDomain(p));
                }
            }
        }
        Ok(())
    }

    /// `K(z,w)`, Hermitian by construction.
    pub fn try_eval(&self, z: C64, w: C64) -> Result<C64, GramError> {
        self.check_domain(&[z, w])?;
        Ok(self.lift_unchecked(z, z, w, w))
    }

    /// The lifted kernel `E⊗2[K](z,z′;w,w′)`; restriction `z′=z, w′=w`
    /// equals [`Self::try_eval`].
    pub fn try_lift(&self, z: C64, zprime: C64, w: C64, wprime: C64) -> Result<C64, GramError> {
        self.check_domain(&[z, w])?;
        Ok(self.lift_unchecked(z, zprime, w, wprime))
    }

    fn lift_unchecked(&self, z: C64, zprime: C64, w: C64, wprime: C64) -> C64 {
        let a = self.ortho_values(z, zprime);
        let b = self.ortho_values(w, wprime);
        a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum()
    }
}

/// A kernel evaluator with lift support; implemented by Gram kernels, the
/// closed forms, and the expansion approximants.
pub trait KernelSource: Sync {
    fn eval(&self, z: C64, w: C64) -> C64;
    fn lift(&self, z: C64, zprime: C64, w: C64, wprime: C64) -> C64;
    fn diag(&self, z: C64) -> f64 {
        self.eval(z, z).re
    }
}

impl KernelSource for GramKernel {
    fn eval(&self, z: C64, w: C64) -> C64 {
        self.lift_unchecked(z, z, w, w)
    }
    fn lift(&self, z: C64, zprime: C64, w: C64, wprime: C64) -> C64 {
        self.lift_unchecked(z, zprime, w, wprime)
    }
}

/// Koshelev model-disk kernel as a [`KernelSource`].
pub struct KoshelevSource {
    pub q: usize,
}

impl KernelSource for KoshelevSource {
    fn eval(&self, z: C64, w: C64) -> C64 {
        crate::closed::koshelev_kernel(self.q, z, w).expect("model disk point")
    }
    fn lift(&self, z: C64, zprime: C64, w: C64, wprime: C64) -> C64 {
        crate::closed::koshelev_lift(self.q, z, zprime, w, wprime).expect("model disk point")
    }
}

/// Gaussian closed-form kernel as a [`KernelSource`].
pub struct GaussianSource {
    pub q: usize,
    pub m: f64,
}

impl KernelSource for GaussianSource {
    fn eval(&self, z: C64, w: C64) -> C64 {
        crate::closed::gaussian_poly_kernel(self.q, self.m, z, w)
    }
    fn lift(&self, z: C64, zprime: C64, w: C64, wprime: C64) -> C64 {
        crate::closed::gaussian_poly_lift(self.q, self.m, z, zprime, w, wprime)
    }
}

/// Correlation kernel `K(z,w) e^{−m(Q(z)+Q(w))}` for power weights.
pub fn correlation_kernel(
    source: &dyn KernelSource,
    potential: &HermitianPotential,
    m: f64,
    z: C64,
    w: C64,
) -> C64 {
    source.eval(z, w) * (-m * (potential.eval(z) + potential.eval(w))).exp()
}
