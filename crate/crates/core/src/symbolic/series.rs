//! Truncated formal jet series in `u = w − z` and `ū = w̄ − z̄` over
//! [`CoeffExpr`] coefficients, and asymptotic series graded by powers of `m`.
//!
//! Every series tracks its validity degree: `trunc = Some(T)` means the
//! stored coefficients are exact for total degree `≤ T` and unknown above;
//! `None` means the series is exact at all orders (a polynomial). Operators
//! propagate the worst-case validity and stored terms beyond it are pruned,
//! so "zero" always means "no reliable nonzero term".

use super::coeff::CoeffExpr;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;

use crate::potential::C64;

/// Series `Σ c_{p,p̄} u^p ū^p̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSeries {
    /// Validity: exact through this total degree (`None` = exact everywhere).
    pub trunc: Option<u32>,
    terms: BTreeMap<(u32, u32), CoeffExpr>,
}

impl JetSeries {
    pub fn zero(trunc: Option<u32>) -> Self {
        JetSeries {
            trunc,
            terms: BTreeMap::new(),
        }
    }

    /// An exact monomial `c·u^p ū^p̄`.
    pub fn monomial(p: u32, pbar: u32, c: CoeffExpr) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((p, pbar), c);
        }
        JetSeries { trunc: None, terms }
    }

    pub fn constant(c: CoeffExpr) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn set(&mut self, p: u32, pbar: u32, c: CoeffExpr) {
        if c.is_zero() {
            self.terms.remove(&(p, pbar));
        } else {
            self.terms.insert((p, pbar), c);
        }
    }

    pub fn coeff(&self, p: u32, pbar: u32) -> CoeffExpr {
        self.terms
            .get(&(p, pbar))
            .cloned()
            .unwrap_or_else(CoeffExpr::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &CoeffExpr)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest total degree of a stored term; for an empty truncated series
    /// the first possibly-nonzero degree is `T+1`.
    fn min_degree(&self) -> Option<u32> {
        let stored = self.terms.keys().map(|&(p, q)| p + q).min();
        match (stored, self.trunc) {
            (Some(d), _) => Some(d),
            (None, Some(t)) => Some(t + 1),
            (None, None) => None, // exact zero
        }
    }

    fn prune(mut self) -> Self {
        if let Some(t) = self.trunc {
            self.terms.retain(|&(p, q), _| p + q <= t);
        }
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    pub fn add(&self, other: &JetSeries) -> JetSeries {
        let trunc = min_trunc(self.trunc, other.trunc);
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let entry = terms.entry(*k).or_insert_with(CoeffExpr::zero);
            *entry = entry.add(c);
        }
        JetSeries { trunc, terms }.prune()
    }

    pub fn sub(&self, other: &JetSeries) -> JetSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> JetSeries {
        JetSeries {
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &JetSeries) -> JetSeries {
        let trunc = mul_trunc(self, other);
        let mut terms: BTreeMap<(u32, u32), CoeffExpr> = BTreeMap::new();
        for (&(pa, qa), ca) in &self.terms {
            for (&(pb, qb), cb) in &other.terms {
                let key = (pa + pb, qa + qb);
                if let Some(t) = trunc {
                    if key.0 + key.1 > t {
                        continue;
                    }
                }
                let prod = ca.mul(cb);
                let entry = terms.entry(key).or_insert_with(CoeffExpr::zero);
                *entry = entry.add(&prod);
            }
        }
        JetSeries { trunc, terms }.prune()
    }

    pub fn scale(&self, c: &CoeffExpr) -> JetSeries {
        JetSeries {
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, v)| (*k, v.mul(c))).collect(),
        }
        .prune()
    }

    pub fn scale_rat(&self, c: &BigRational) -> JetSeries {
        JetSeries {
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, v)| (*k, v.scale(c))).collect(),
        }
        .prune()
    }

    /// Multiply by `u^dp ū^dq` (exact shift; validity rises with the order).
    pub fn shift(&self, dp: u32, dq: u32) -> JetSeries {
        JetSeries {
            trunc: self.trunc.map(|t| t + dp + dq),
            terms: self
                .terms
                .iter()
                .map(|(&(p, q), c)| ((p + dp, q + dq), c.clone()))
                .collect(),
        }
    }

    /// Multiply by `z − w = −u`.
    pub fn mul_z_minus_w(&self) -> JetSeries {
        self.shift(1, 0).neg()
    }

    /// `d/du`; validity drops by one.
    pub fn d_du(&self) -> JetSeries {
        let terms = self
            .terms
            .iter()
            .filter(|(&(p, _), _)| p > 0)
            .map(|(&(p, q), c)| {
                ((p - 1, q), c.scale(&BigRational::from_integer((p as i64).into())))
            })
            .collect();
        JetSeries {
            trunc: self.trunc.map(|t| t.saturating_sub(1)),
            terms,
        }
        .prune()
    }

    /// `d/dū`; validity drops by one.
    pub fn d_dubar(&self) -> JetSeries {
        let terms = self
            .terms
            .iter()
            .filter(|(&(_, q), _)| q > 0)
            .map(|(&(p, q), c)| {
                ((p, q - 1), c.scale(&BigRational::from_integer((q as i64).into())))
            })
            .collect();
        JetSeries {
            trunc: self.trunc.map(|t| t.saturating_sub(1)),
            terms,
        }
        .prune()
    }

    /// Apply the `∂̄_w` symbol derivation `Q_{a,b} → Q_{a,b+1}` to every
    /// coefficient (validity unchanged).
    pub fn symshift_wbar(&self) -> JetSeries {
        JetSeries {
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, c)| (*k, c.d_wbar())).collect(),
        }
        .prune()
    }

    /// Exact division by `z − w = −u`; the input must have no `u^0` terms.
    pub fn divide_z_minus_w(&self) -> Result<JetSeries, (u32, u32)> {
        for &(p, q) in self.terms.keys() {
            if p == 0 {
                return Err((p, q));
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|(&(p, q), c)| ((p - 1, q), c.neg()))
            .collect();
        Ok(JetSeries {
            trunc: self.trunc.map(|t| t.saturating_sub(1)),
            terms,
        })
    }

    pub fn max_ubar_degree(&self) -> u32 {
        self.terms.keys().map(|&(_, q)| q).max().unwrap_or(0)
    }

    /// Restrict validity to `t` (pruning stored terms beyond it).
    pub fn truncate_to(&self, t: u32) -> JetSeries {
        JetSeries {
            trunc: Some(min_trunc(self.trunc, Some(t)).unwrap()),
            terms: self.terms.clone(),
        }
        .prune()
    }

    /// Substitute rational symbol values (π stays formal); drops terms whose
    /// coefficients vanish under the substitution.
    pub fn specialize(&self, value: &dyn Fn(u8, u8) -> BigRational) -> Option<JetSeries> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let s = c.specialize(value)?;
            if !s.is_zero() {
                terms.insert(*k, s);
            }
        }
        Some(JetSeries {
            trunc: self.trunc,
            terms,
        })
    }

    /// Numeric evaluation at `u = w−z`, `ū = conj(u)` with symbol values.
    pub fn eval(&self, u: C64, value: &dyn Fn(u8, u8) -> C64) -> C64 {
        let ub = u.conj();
        self.terms
            .iter()
            .map(|(&(p, q), c)| u.powu(p) * ub.powu(q) * c.eval(value))
            .sum()
    }
}

fn min_trunc(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (None, x) => x,
        (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

fn mul_trunc(a: &JetSeries, b: &JetSeries) -> Option<u32> {
    // Product of (exact-to-Ta + unknown tail) and (exact-to-Tb + tail) is
    // exact through min(ord(a)+Tb, ord(b)+Ta).
    match (a.trunc, b.trunc) {
        (None, None) => None,
        (Some(ta), None) => match b.min_degree() {
            None => None, // b is exact zero
            Some(db) => Some(ta + db),
        },
        (None, Some(tb)) => match a.min_degree() {
            None => None,
            Some(da) => Some(tb + da),
        },
        (Some(ta), Some(tb)) => {
            let da = a.min_degree().unwrap_or(ta + 1);
            let db = b.min_degree().unwrap_or(tb + 1);
            Some((ta + db).min(tb + da))
        }
    }
}

impl fmt::Display for JetSeries {
    /// Prints in the `(z−w)`, `(z̄−w̄)`, `|z−w|²` notation:
    /// `u^p ū^q = (−1)^{p+q} (z−w)^p (z̄−w̄)^q`, with matched pairs
    /// contracted to `|z−w|²` powers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (&(p, q), c) in &self.terms {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                let mut factors: Vec<String> = Vec::new();
                let paired = p.min(q);
                if paired > 0 {
                    factors.push(if paired == 1 {
                        "|z−w|²".into()
                    } else {
                        format!("|z−w|^{}", 2 * paired)
                    });
                }
                if p > paired {
                    let e = p - paired;
                    factors.push(if e == 1 {
                        "(z−w)".into()
                    } else {
                        format!("(z−w)^{e}")
                    });
                }
                if q > paired {
                    let e = q - paired;
                    factors.push(if e == 1 {
                        "(z̄−w̄)".into()
                    } else {
                        format!("(z̄−w̄)^{e}")
                    });
                }
                // Matched pairs contribute (−1)^{2·paired} = 1; only the
                // unpaired factors carry a sign.
                let odd = (p - paired) + (q - paired);
                let sgn = if odd % 2 == 1 { "-" } else { "" };
                if factors.is_empty() {
                    write!(f, "[{c}]")?;
                } else {
                    write!(f, "{}{}·[{}]", sgn, factors.join(""), c)?;
                }
            }
        }
        match self.trunc {
            Some(t) => write!(f, "  (exact to degree {t})"),
            None => Ok(()),
        }
    }
}

/// Asymptotic series graded by powers of `m`: grade `g` holds the
/// coefficient of `m^g`.
#[derive(Debug, Clone, PartialEq)]
pub struct MSeries {
    grades: BTreeMap<i32, JetSeries>,
}

impl MSeries {
    pub fn new() -> Self {
        MSeries {
            grades: BTreeMap::new(),
        }
    }

    pub fn from_grades(grades: Vec<(i32, JetSeries)>) -> Self {
        let mut m = Self::new();
        for (g, s) in grades {
            m.set(g, s);
        }
        m
    }

    pub fn set(&mut self, g: i32, s: JetSeries) {
        if s.is_zero() && s.trunc.is_none() {
            self.grades.remove(&g);
        } else {
            self.grades.insert(g, s);
        }
    }

    pub fn grade(&self, g: i32) -> Option<&JetSeries> {
        self.grades.get(&g)
    }

    pub fn grades(&self) -> impl Iterator<Item = (&i32, &JetSeries)> {
        self.grades.iter()
    }

    pub fn grade_range(&self) -> Option<(i32, i32)> {
        let min = *self.grades.keys().next()?;
        let max = *self.grades.keys().last()?;
        Some((min, max))
    }

    pub fn map(&self, f: impl Fn(&JetSeries) -> JetSeries) -> MSeries {
        MSeries {
            grades: self.grades.iter().map(|(&g, s)| (g, f(s))).collect(),
        }
    }

    pub fn add(&self, other: &MSeries) -> MSeries {
        let mut grades = self.grades.clone();
        for (&g, s) in &other.grades {
            let entry = grades
                .entry(g)
                .or_insert_with(|| JetSeries::zero(s.trunc));
            *entry = entry.add(s);
        }
        MSeries { grades }
    }

    pub fn sub(&self, other: &MSeries) -> MSeries {
        self.add(&other.map(|s| s.neg()))
    }

    /// Multiply every grade by a fixed jet series.
    pub fn mul_series(&self, s: &JetSeries) -> MSeries {
        self.map(|g| g.mul(s))
    }

    /// `2m·(z−w)·a`: multiply by `−u`, shift the grade up by one, double.
    pub fn mul_2m_z_minus_w(&self) -> MSeries {
        MSeries {
            grades: self
                .grades
                .iter()
                .map(|(&g, s)| {
                    (
                        g + 1,
                        s.mul_z_minus_w()
                            .scale_rat(&BigRational::from_integer(2.into())),
                    )
                })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.grades.values().all(JetSeries::is_zero)
    }
}

impl Default for MSeries {
    fn default() -> Self {
        Self::new()
    }
}
