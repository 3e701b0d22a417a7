//! Real-analytic potentials `Q` given as Hermitian polynomials in `(z, z̄)`,
//! with exact polarization `Q(z,w)`, mixed derivatives of `β = ∂_z ∂̄_w Q`,
//! the phase function `θ`, and the working-domain assumption checks.
//!
//! Restricting to Hermitian polynomials makes the polarization exact
//! (replace `z̄` by `w̄`), so everything downstream differentiates
//! polynomials instead of approximating limits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex scalar used throughout.
pub type C64 = Complex64;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("coefficient table must be square with side degree+1")]
    BadShape,
    #[error("Hermitian symmetry violated at (a,b)=({0},{1})")]
    NotHermitian(usize, usize),
    #[error("non-finite coefficient at (a,b)=({0},{1})")]
    NotFinite(usize, usize),
    #[error("ΔQ ≤ 0 at grid node z = {0}")]
    FailsPositivity(C64),
    #[error("potential file: {0}")]
    Parse(String),
}

/// A potential `Q(z) = Σ c[a][b] z^a z̄^b` with `c[b][a] = conj(c[a][b])`,
/// so that `Q` is real-valued. The exact polarization is
/// `Q(z,w) = Σ c[a][b] z^a w̄^b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HermitianPotential {
    degree: usize,
    /// Row-major `(degree+1) x (degree+1)` table, `coeffs[a][b]`.
    coeffs: Vec<Vec<C64>>,
}

impl HermitianPotential {
    /// Validates Hermitian symmetry `c[b][a] = conj(c[a][b])` on construction.
    pub fn new(coeffs: Vec<Vec<C64>>) -> Result<Self, PotentialError> {
        let d = coeffs.len();
        if d == 0 || coeffs.iter().any(|row| row.len() != d) {
            return Err(PotentialError::BadShape);
        }
        for a in 0..d {
            for b in 0..d {
                let c = coeffs[a][b];
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Err(PotentialError::NotFinite(a, b));
                }
                let diff = (coeffs[b][a] - c.conj()).norm();
                if diff > 1e-14 * (1.0 + c.norm()) {
                    return Err(PotentialError::NotHermitian(a, b));
                }
            }
        }
        Ok(Self {
            degree: d - 1,
            coeffs,
        })
    }

    /// `Q(z) = α|z|²` (Gaussian for α = 1).
    pub fn quadratic(alpha: f64) -> Self {
        let mut c = vec![vec![C64::new(0.0, 0.0); 2]; 2];
        c[1][1] = C64::new(alpha, 0.0);
        Self::new(c).unwrap()
    }

    /// `Q(z) = |z|² + s|z|⁴`, the quartic perturbation used in the studies.
    pub fn quartic(s: f64) -> Self {
        let mut c = vec![vec![C64::new(0.0, 0.0); 3]; 3];
        c[1][1] = C64::new(1.0, 0.0);
        c[2][2] = C64::new(s, 0.0);
        Self::new(c).unwrap()
    }

    /// Radial potentials `Σ a_k |z|^{2k}` from the per-power list.
    pub fn radial(powers: &[f64]) -> Self {
        let d = powers.len();
        let mut c = vec![vec![C64::new(0.0, 0.0); d + 1]; d + 1];
        for (k, &a) in powers.iter().enumerate() {
            c[k + 1][k + 1] = C64::new(a, 0.0);
        }
        Self::new(c).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        if a <= self.degree && b <= self.degree {
            self.coeffs[a][b]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// True when `c[a][b] = 0` unless `a = b`, i.e. `Q(z)` depends on `|z|`
    /// only. Gram assembly exploits this.
    pub fn is_radial(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(a, row)| {
            row.iter()
                .enumerate()
                .all(|(b, c)| a == b || c.norm() == 0.0)
        })
    }

    /// `Q(z) = Q(z,z)`. The imaginary residue is asserted below 1e-12 and
    /// discarded.
    pub fn eval(&self, z: C64) -> f64 {
        let v = self.eval_polarized(z, z);
        debug_assert!(
            v.im.abs() <= 1e-12 * (1.0 + v.re.abs()),
            "diagonal of a Hermitian potential must be real, got {v}"
        );
        v.re
    }

    /// The exact polarization `Q(z,w) = Σ c[a][b] z^a w̄^b`: holomorphic in
    /// `z`, anti-holomorphic in `w`, with `Q(z,z) = Q(z)` exactly.
    pub fn eval_polarized(&self, z: C64, w: C64) -> C64 {
        self.eval_polarized_deriv(z, w, 0, 0)
    }

    /// `∂_z^a0 ∂̄_w^b0 Q(z,w)`, by exact polynomial differentiation.
    pub fn eval_polarized_deriv(&self, z: C64, w: C64, a0: usize, b0: usize) -> C64 {
        let wb = w.conj();
        let mut acc = C64::new(0.0, 0.0);
        for a in a0..=self.degree {
            for b in b0..=self.degree {
                let c = self.coeffs[a][b];
                if c.norm() == 0.0 {
                    continue;
                }
                acc += c * falling(a, a0) * falling(b, b0) * z.powu((a - a0) as u32)
                    * wb.powu((b - b0) as u32);
            }
        }
        acc
    }

    /// `β(z,w) = ∂_z ∂̄_w Q(z,w)`; its diagonal is the normalized Laplacian
    /// `ΔQ(z)`.
    pub fn beta(&self, z: C64, w: C64) -> C64 {
        self.eval_polarized_deriv(z, w, 1, 1)
    }

    /// Normalized Laplacian `ΔQ(z) = β(z,z)` (real).
    pub fn laplacian(&self, z: C64) -> f64 {
        self.beta(z, z).re
    }

    /// Jet of `β` at `(z,w)`: `vals[a][b] = ∂_z^a ∂̄_w^b β(z,w)` for
    /// `0 ≤ a,b ≤ order`. Entries beyond the polynomial degree are zero.
    pub fn beta_jet(&self, z: C64, w: C64, order: usize) -> BetaJet {
        let mut vals = vec![vec![C64::new(0.0, 0.0); order + 1]; order + 1];
        for (a, row) in vals.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = self.eval_polarized_deriv(z, w, a + 1, b + 1);
            }
        }
        BetaJet {
            order,
            base: (z, w),
            vals,
        }
    }

    /// The phase function `θ(z,w) = (Q(w) − Q(z,w))/(w−z)`, evaluated through
    /// its terminating Taylor form `Σ_j (w−z)^j ∂_z^{j+1}Q(z,w)/(j+1)!`,
    /// which is exact for polynomial potentials and has no removable
    /// singularity on the diagonal; `θ(z,z) = ∂_z Q(z)`.
    pub fn phase_theta(&self, z: C64, w: C64) -> C64 {
        let u = w - z;
        let mut acc = C64::new(0.0, 0.0);
        let mut fact = 1.0; // (j+1)!
        let mut upow = C64::new(1.0, 0.0);
        for j in 0..self.degree.max(1) {
            fact *= (j + 1) as f64;
            acc += upow * self.eval_polarized_deriv(z, w, j + 1, 0) / fact;
            upow *= u;
        }
        acc
    }

    /// `∂̄_w θ(z,w) = Σ_j (w−z)^j ∂_z^{j+1}∂̄_w Q(z,w)/(j+1)!` (terminating).
    pub fn dbar_w_theta(&self, z: C64, w: C64) -> C64 {
        let u = w - z;
        let mut acc = C64::new(0.0, 0.0);
        let mut fact = 1.0;
        let mut upow = C64::new(1.0, 0.0);
        for j in 0..self.degree.max(1) {
            fact *= (j + 1) as f64;
            acc += upow * self.eval_polarized_deriv(z, w, j + 1, 1) / fact;
            upow *= u;
        }
        acc
    }

    /// Writes the structured text form (`degree`, then `[a, b, re, im]`
    /// quadruples, one per line).
    pub fn to_text(&self) -> String {
        let mut out = format!("degree {}\n", self.degree);
        for a in 0..=self.degree {
            for b in 0..=self.degree {
                let c = self.coeffs[a][b];
                if c.norm() > 0.0 {
                    out.push_str(&format!("coeff {} {} {:.17e} {:.17e}\n", a, b, c.re, c.im));
                }
            }
        }
        out
    }

    /// Parses the structured text form; Hermitian symmetry is re-validated.
    pub fn from_text(text: &str) -> Result<Self, PotentialError> {
        let mut degree: Option<usize> = None;
        let mut quads: Vec<(usize, usize, f64, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            match it.next() {
                Some("degree") => {
                    degree = Some(
                        it.next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| bad_line(lineno, "degree <n>"))?,
                    );
                }
                Some("coeff") => {
                    let mut next = |what: &str| {
                        it.next()
                            .ok_or_else(|| bad_line(lineno, what))
                            .and_then(|t| {
                                t.parse::<f64>().map_err(|_| bad_line(lineno, what))
                            })
                    };
                    let a = next("a")? as usize;
                    let b = next("b")? as usize;
                    let re = next("re")?;
                    let im = next("im")?;
                    quads.push((a, b, re, im));
                }
                _ => return Err(bad_line(lineno, "degree|coeff")),
            }
        }
        let d = degree.ok_or_else(|| PotentialError::Parse("missing degree".into()))?;
        let mut coeffs = vec![vec![C64::new(0.0, 0.0); d + 1]; d + 1];
        for (a, b, re, im) in quads {
            if a > d || b > d {
                return Err(PotentialError::Parse(format!(
                    "coefficient ({a},{b}) exceeds degree {d}"
                )));
            }
            coeffs[a][b] = C64::new(re, im);
        }
        Self::new(coeffs)
    }
}

fn bad_line(lineno: usize, what: &str) -> PotentialError {
    PotentialError::Parse(format!("line {}: expected {}", lineno + 1, what))
}

fn falling(n: usize, k: usize) -> f64 {
    let mut p = 1.0;
    for i in 0..k {
        p *= (n - i) as f64;
    }
    p
}

/// Jet of `β = ∂_z∂̄_w Q` at a base point: `vals[a][b] = ∂_z^a ∂̄_w^b β(z,w)`.
#[derive(Debug, Clone)]
pub struct BetaJet {
    pub order: usize,
    pub base: (C64, C64),
    vals: Vec<Vec<C64>>,
}

impl BetaJet {
    pub fn get(&self, a: usize, b: usize) -> C64 {
        if a <= self.order && b <= self.order {
            self.vals[a][b]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// `β(z,w)` itself.
    pub fn beta(&self) -> C64 {
        self.get(0, 0)
    }
}

/// Working-domain geometry. The weight exponent `m` travels with each
/// operation rather than the domain, since every entry point takes it
/// explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainSpec {
    /// Open disk centered at `center`.
    Disk { center: (f64, f64), radius: f64 },
    /// Whole plane, integrated on `|z| < truncation_radius` (the radius is
    /// chosen so the discarded tail mass is negligible; see
    /// `gram::plane_truncation_radius`).
    Plane { truncation_radius: f64 },
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        DomainSpec::Disk {
            center: (0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        match *self {
            DomainSpec::Disk { center, radius } => {
                (z - C64::new(center.0, center.1)).norm() < radius
            }
            DomainSpec::Plane { .. } => true,
        }
    }

    pub fn integration_radius(&self) -> f64 {
        match *self {
            DomainSpec::Disk { radius, .. } => radius,
            DomainSpec::Plane { truncation_radius } => truncation_radius,
        }
    }

    pub fn center(&self) -> C64 {
        match *self {
            DomainSpec::Disk { center, .. } => C64::new(center.0, center.1),
            DomainSpec::Plane { .. } => C64::new(0.0, 0.0),
        }
    }
}

/// Output of [`check_assumptions`].
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// `min_grid ΔQ` (the constant in (A:i)).
    pub epsilon0: f64,
    /// Whether `2ReQ(z,w) − Q(z) − Q(w) ≤ −½ΔQ(z)|z−w|²` held at every
    /// sampled pair (A:iv).
    pub aiv_holds: bool,
    /// Worst margin of the (A:iv) inequality (≤ 0 when it holds).
    pub aiv_margin: f64,
    /// `sup_grid (1/(2ΔQ)) Δ log(1/ΔQ)`, by exact differentiation.
    pub kappa: f64,
    /// `r² ε₀ / 18`.
    pub delta0: f64,
    /// Grid minimum of `|∂̄_w θ|` over sampled pairs ((A:iii), grid check
    /// only — no certification between nodes).
    pub min_abs_dbar_theta: f64,
    /// Grid resolution used (radii, angles).
    pub grid: (usize, usize),
}

/// Checks (A:i)-(A:iv) for `Q` on a disk, on a tensor polar grid
/// (`radii x angles` nodes, default 64x64; pair-wise checks subsample to
/// 16x16 to keep the pair count reasonable).
pub fn check_assumptions(
    potential: &HermitianPotential,
    disk: &DomainSpec,
    _m: f64,
    radii: usize,
    angles: usize,
) -> Result<AssumptionReport, PotentialError> {
    let (center, radius) = match *disk {
        DomainSpec::Disk { center, radius } => (C64::new(center.0, center.1), radius),
        DomainSpec::Plane { .. } => {
            return Err(PotentialError::Parse(
                "assumption checks require a disk domain".into(),
            ))
        }
    };
    let grid = |nr: usize, na: usize| -> Vec<C64> {
        let mut pts = Vec::with_capacity(nr * na + 1);
        pts.push(center);
        for i in 1..=nr {
            let r = radius * i as f64 / nr as f64;
            for k in 0..na {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / na as f64;
                pts.push(center + C64::from_polar(r, phi));
            }
        }
        pts
    };

    let fine = grid(radii, angles);
    let mut epsilon0 = f64::INFINITY;
    let mut kappa = f64::NEG_INFINITY;
    for &z in &fine {
        let lap = potential.laplacian(z);
        if lap <= 0.0 {
            return Err(PotentialError::FailsPositivity(z));
        }
        epsilon0 = epsilon0.min(lap);
        let jet = potential.beta_jet(z, z, 1);
        // Δ log ΔQ = β₁₁/β − β₁₀β₀₁/β² on the diagonal (all real there).
        let dlog = (jet.get(1, 1) / jet.beta() - jet.get(1, 0) * jet.get(0, 1)
            / (jet.beta() * jet.beta()))
        .re;
        kappa = kappa.max(-dlog / (2.0 * lap));
    }

    let coarse = grid(radii.min(16), angles.min(16));
    let mut aiv_holds = true;
    let mut aiv_margin = f64::NEG_INFINITY;
    let mut min_abs_dbar_theta = f64::INFINITY;
    for &z in &coarse {
        let lap_z = potential.laplacian(z);
        for &w in &coarse {
            let lhs = 2.0 * potential.eval_polarized(z, w).re
                - potential.eval(z)
                - potential.eval(w);
            let margin = lhs + 0.5 * lap_z * (w - z).norm_sqr();
            aiv_margin = aiv_margin.max(margin);
            if margin > 1e-12 * (1.0 + lhs.abs()) {
                aiv_holds = false;
            }
            min_abs_dbar_theta = min_abs_dbar_theta.min(potential.dbar_w_theta(z, w).norm());
        }
    }

    Ok(AssumptionReport {
        epsilon0,
        aiv_holds,
        aiv_margin,
        kappa,
        delta0: radius * radius * epsilon0 / 18.0,
        min_abs_dbar_theta,
        grid: (radii, angles),
    })
}
