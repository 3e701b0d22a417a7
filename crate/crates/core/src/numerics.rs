//! Small numerical building blocks: Gauss-Legendre rules, polar grids,
//! Cholesky factorizations, a Jacobi eigensolver, and finite-difference
//! stencils with one Richardson refinement.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least two nodes");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (b - a);
    let d = 0.5 * (b + a);
    (
        x.iter().map(|&t| c * t + d).collect(),
        w.iter().map(|&v| c * v).collect(),
    )
}

/// Integrate `f` over `[a, b]` with an `n`-point Gauss-Legendre rule.
pub fn integrate_gl(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre_on(n, a, b);
    x.iter().zip(&w).map(|(&t, &v)| v * f(t)).sum()
}

/// Tensor polar quadrature over a disk `|z - center| < radius`:
/// `nr` Gauss-Legendre radii x `na` uniform angles (trapezoid in the angle,
/// which is exact for trigonometric polynomials). Returns (points, weights)
/// with the area element included.
pub fn polar_grid(
    center: Complex64,
    radius: f64,
    nr: usize,
    na: usize,
) -> (Vec<Complex64>, Vec<f64>) {
    let (rs, rw) = gauss_legendre_on(nr, 0.0, radius);
    let dphi = 2.0 * std::f64::consts::PI / na as f64;
    let mut pts = Vec::with_capacity(nr * na);
    let mut wts = Vec::with_capacity(nr * na);
    for (&r, &wr) in rs.iter().zip(&rw) {
        for k in 0..na {
            let phi = dphi * k as f64;
            pts.push(center + Complex64::from_polar(r, phi));
            wts.push(wr * r * dphi);
        }
    }
    (pts, wts)
}

/// Cholesky factorization `G = L L^T` of a real symmetric positive definite
/// matrix stored row-major. Returns the offending pivot index on failure.
pub fn cholesky_real(g: &[f64], dim: usize) -> Result<Vec<f64>, usize> {
    let mut l = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut d = g[j * dim + j];
        for k in 0..j {
            d -= l[j * dim + k] * l[j * dim + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(j);
        }
        let dj = d.sqrt();
        l[j * dim + j] = dj;
        for i in (j + 1)..dim {
            let mut s = g[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = s / dj;
        }
    }
    Ok(l)
}

/// Cholesky factorization `G = L L^*` of a complex Hermitian positive
/// definite matrix stored row-major.
pub fn cholesky_complex(g: &[Complex64], dim: usize) -> Result<Vec<Complex64>, usize> {
    let mut l = vec![Complex64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        let mut d = g[j * dim + j].re;
        for k in 0..j {
            d -= l[j * dim + k].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(j);
        }
        let dj = d.sqrt();
        l[j * dim + j] = Complex64::new(dj, 0.0);
        for i in (j + 1)..dim {
            let mut s = g[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k].conj();
            }
            l[i * dim + j] = s / dj;
        }
    }
    Ok(l)
}

/// Forward substitution `L y = b` for lower-triangular complex `L`.
pub fn forward_solve(l: &[Complex64], dim: usize, b: &mut [Complex64]) {
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * dim + k] * b[k];
        }
        b[i] = s / l[i * dim + i];
    }
}

/// Eigenvalues of a real symmetric matrix by the cyclic Jacobi method.
pub fn symmetric_eigenvalues(a: &[f64], dim: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                off += m[i * dim + j] * m[i * dim + j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&m, dim)) {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * dim + p];
                let aqq = m[q * dim + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = m[k * dim + p];
                    let akq = m[k * dim + q];
                    m[k * dim + p] = c * akp - s * akq;
                    m[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = m[p * dim + k];
                    let aqk = m[q * dim + k];
                    m[p * dim + k] = c * apk - s * aqk;
                    m[q * dim + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..dim).map(|i| m[i * dim + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

fn frobenius(m: &[f64], dim: usize) -> f64 {
    m.iter().take(dim * dim).map(|x| x * x).sum::<f64>().sqrt()
}

/// Eigenvalues of a complex Hermitian matrix via the real embedding
/// `[[Re, -Im], [Im, Re]]` (each eigenvalue appears twice; duplicates are
/// collapsed by taking every second sorted value).
pub fn hermitian_eigenvalues(a: &[Complex64], dim: usize) -> Vec<f64> {
    let n2 = 2 * dim;
    let mut r = vec![0.0; n2 * n2];
    for i in 0..dim {
        for j in 0..dim {
            r[i * n2 + j] = a[i * dim + j].re;
            r[i * n2 + (dim + j)] = -a[i * dim + j].im;
            r[(dim + i) * n2 + j] = a[i * dim + j].im;
            r[(dim + i) * n2 + (dim + j)] = a[i * dim + j].re;
        }
    }
    let ev = symmetric_eigenvalues(&r, n2);
    ev.into_iter().step_by(2).collect()
}

/// Solve a small dense complex linear system `A x = b` by Gaussian
/// elimination with partial pivoting. Panics on a singular system.
pub fn solve_dense(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..dim {
        let (piv, mag) = (col..dim)
            .map(|r| (r, m[r * dim + col].norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        assert!(mag > 1e-300, "singular interpolation system");
        if piv != col {
            for k in 0..dim {
                m.swap(col * dim + k, piv * dim + k);
            }
            x.swap(col, piv);
        }
        let d = m[col * dim + col];
        for r in (col + 1)..dim {
            let f = m[r * dim + col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..dim {
                let v = m[col * dim + k];
                m[r * dim + k] -= f * v;
            }
            let xc = x[col];
            x[r] -= f * xc;
        }
    }
    for col in (0..dim).rev() {
        let mut s = x[col];
        for k in (col + 1)..dim {
            s -= m[col * dim + k] * x[k];
        }
        x[col] = s / m[col * dim + col];
    }
    x
}

/// Second Wirtinger-type derivatives of a real-valued function of one complex
/// variable by 5-point stencils with one Richardson refinement.
///
/// Returns the normalized Laplacian `(1/4)(f_xx + f_yy)`.
pub fn laplacian_fd(f: &dyn Fn(Complex64) -> f64, z: Complex64, h: f64) -> f64 {
    let stencil = |h: f64| {
        let fx = f(z + Complex64::new(h, 0.0)) + f(z - Complex64::new(h, 0.0));
        let fy = f(z + Complex64::new(0.0, h)) + f(z - Complex64::new(0.0, h));
        (fx + fy - 4.0 * f(z)) / (h * h)
    };
    let a1 = stencil(h);
    let a2 = stencil(h * 0.5);
    // Richardson: the stencil has O(h^2) error.
    0.25 * ((4.0 * a2 - a1) / 3.0)
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    num / den
}
