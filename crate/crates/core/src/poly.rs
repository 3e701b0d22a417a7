//! q-analytic polynomials `f(z) = Σ_{r<q, j<n} c[r][j] z̄^r z^j`, their
//! vectorization `V[f]`, extension `E[f]`, and the singular local matrix
//! `A(z)` with `|f(z)|² = V[f](z)* A(z) V[f](z)`.

use crate::potential::C64;

/// A q-analytic polynomial in the bidegree basis; `∂̄^q f ≡ 0` by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyanalyticPoly {
    q: usize,
    n: usize,
    /// `coeffs[r][j]`, `0 ≤ r < q`, `0 ≤ j < n`.
    coeffs: Vec<Vec<C64>>,
}

impl PolyanalyticPoly {
    pub fn new(coeffs: Vec<Vec<C64>>) -> Self {
        let q = coeffs.len();
        assert!(q >= 1, "need q ≥ 1");
        let n = coeffs[0].len();
        assert!(n >= 1 && coeffs.iter().all(|r| r.len() == n));
        Self { q, n, coeffs }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn coeff(&self, r: usize, j: usize) -> C64 {
        self.coeffs[r][j]
    }

    /// Direct evaluation of the bidegree sum.
    pub fn eval(&self, z: C64) -> C64 {
        let v = self.vectorize(z);
        let mut acc = C64::new(0.0, 0.0);
        let mut zbar_pow = C64::new(1.0, 0.0);
        for comp in v {
            acc += zbar_pow * comp;
            zbar_pow *= z.conj();
        }
        acc
    }

    /// Component `r` is the holomorphic part `f_r(z) = Σ_j c[r][j] z^j`.
    pub fn vectorize(&self, z: C64) -> Vec<C64> {
        self.coeffs
            .iter()
            .map(|row| {
                // Horner in z.
                row.iter()
                    .rev()
                    .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
            })
            .collect()
    }

    /// The extension `E[f](z,z′) = Σ_r (z̄′)^r f_r(z)`; `E[f](z,z) = f(z)`
    /// exactly.
    pub fn extend(&self, z: C64, zprime: C64) -> C64 {
        let v = self.vectorize(z);
        let mut acc = C64::new(0.0, 0.0);
        let mut zpbar_pow = C64::new(1.0, 0.0);
        for comp in v {
            acc += zpbar_pow * comp;
            zpbar_pow *= zprime.conj();
        }
        acc
    }
}

/// The rank-one positive semi-definite matrix `A[j][k] = z^j z̄^k`
/// (0-indexed), normalized by the identity `|f(z)|² = V[f](z)* A(z) V[f](z)`.
pub fn singular_matrix(q: usize, z: C64) -> Vec<Vec<C64>> {
    assert!(q >= 1);
    let mut pow = Vec::with_capacity(q);
    let mut p = C64::new(1.0, 0.0);
    for _ in 0..q {
        pow.push(p);
        p *= z;
    }
    (0..q)
        .map(|j| (0..q).map(|k| pow[j] * pow[k].conj()).collect())
        .collect()
}

/// `V[f](z)* A(z) V[f](z)` (used by the quadratic-form identity tests).
pub fn quadratic_form(a: &[Vec<C64>], v: &[C64]) -> C64 {
    let q = v.len();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..q {
        for k in 0..q {
            acc += v[j].conj() * a[j][k] * v[k];
        }
    }
    acc
}
