//! Exact rational coefficient expressions: polynomials in the commuting
//! symbols `Q_{a,b}` (meaning `∂_z^a ∂̄_w^b Q(z,w)`) over a power of
//! `β = Q_{1,1}`, with exact rational scalars and the `1/π` factors carried
//! as a formal power of `π`.
//!
//! Everything is kept in a canonical normal form (monomials sorted, like
//! terms merged, common `β`-powers cancelled against the denominator), so
//! equality is decidable by direct comparison.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::potential::C64;

/// `Q_{a,b} = ∂_z^a ∂̄_w^b Q(z,w)`; `β = Q_{1,1}`.
pub type Sym = (u8, u8);

/// A monomial `π^pi · Π Q_{a,b}^e` (symbol factors sorted by `(a,b)`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub pi: i16,
    pub syms: Vec<(Sym, u8)>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial {
            pi: 0,
            syms: Vec::new(),
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<Sym, u8> = BTreeMap::new();
        for &(s, e) in self.syms.iter().chain(&other.syms) {
            *map.entry(s).or_insert(0) += e;
        }
        Monomial {
            pi: self.pi + other.pi,
            syms: map.into_iter().collect(),
        }
    }

    fn beta_power(&self) -> u8 {
        self.syms
            .iter()
            .find(|&&(s, _)| s == (1, 1))
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    fn divide_beta(&self, k: u8) -> Monomial {
        let syms = self
            .syms
            .iter()
            .filter_map(|&(s, e)| {
                let e = if s == (1, 1) { e - k } else { e };
                (e > 0).then_some((s, e))
            })
            .collect();
        Monomial { pi: self.pi, syms }
    }
}

/// A rational expression `(Σ c_M · M) / β^den`, normalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffExpr {
    num: BTreeMap<Monomial, BigRational>,
    den_beta: u8,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl CoeffExpr {
    pub fn zero() -> Self {
        CoeffExpr {
            num: BTreeMap::new(),
            den_beta: 0,
        }
    }

    pub fn one() -> Self {
        Self::scalar(rat(1, 1))
    }

    pub fn scalar(c: BigRational) -> Self {
        let mut num = BTreeMap::new();
        if !c.is_zero() {
            num.insert(Monomial::unit(), c);
        }
        CoeffExpr { num, den_beta: 0 }
    }

    /// `c · π^pi_pow`.
    pub fn scalar_pi(c: BigRational, pi_pow: i16) -> Self {
        let mut num = BTreeMap::new();
        if !c.is_zero() {
            num.insert(
                Monomial {
                    pi: pi_pow,
                    syms: Vec::new(),
                },
                c,
            );
        }
        CoeffExpr { num, den_beta: 0 }
    }

    /// The symbol `Q_{a,b}`.
    pub fn sym(a: u8, b: u8) -> Self {
        let mut num = BTreeMap::new();
        num.insert(
            Monomial {
                pi: 0,
                syms: vec![((a, b), 1)],
            },
            rat(1, 1),
        );
        CoeffExpr { num, den_beta: 0 }
    }

    /// `β = Q_{1,1}`.
    pub fn beta() -> Self {
        Self::sym(1, 1)
    }

    /// `1/β`.
    pub fn beta_inv() -> Self {
        CoeffExpr {
            num: BTreeMap::from([(Monomial::unit(), rat(1, 1))]),
            den_beta: 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub(crate) fn monomials(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.num.iter()
    }

    pub(crate) fn den_beta(&self) -> u8 {
        self.den_beta
    }

    fn normalize(mut self) -> Self {
        self.num.retain(|_, c| !c.is_zero());
        if self.num.is_empty() {
            self.den_beta = 0;
            return self;
        }
        if self.den_beta > 0 {
            let common = self
                .num
                .keys()
                .map(Monomial::beta_power)
                .min()
                .unwrap_or(0)
                .min(self.den_beta);
            if common > 0 {
                self.num = self
                    .num
                    .into_iter()
                    .map(|(m, c)| (m.divide_beta(common), c))
                    .collect();
                self.den_beta -= common;
            }
        }
        self
    }

    pub fn add(&self, other: &CoeffExpr) -> CoeffExpr {
        // Bring both over the common denominator β^max.
        let den = self.den_beta.max(other.den_beta);
        let mut num = BTreeMap::new();
        let mut accumulate = |src: &CoeffExpr| {
            let lift = den - src.den_beta;
            let beta_lift = Monomial {
                pi: 0,
                syms: if lift > 0 {
                    vec![((1, 1), lift)]
                } else {
                    Vec::new()
                },
            };
            for (m, c) in &src.num {
                let key = m.mul(&beta_lift);
                let entry = num.entry(key).or_insert_with(BigRational::zero);
                *entry += c;
            }
        };
        accumulate(self);
        accumulate(other);
        CoeffExpr { num, den_beta: den }.normalize()
    }

    pub fn sub(&self, other: &CoeffExpr) -> CoeffExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CoeffExpr {
        CoeffExpr {
            num: self.num.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
            den_beta: self.den_beta,
        }
    }

    pub fn mul(&self, other: &CoeffExpr) -> CoeffExpr {
        let mut num: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.num {
            for (mb, cb) in &other.num {
                let key = ma.mul(mb);
                let entry = num.entry(key).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        CoeffExpr {
            num,
            den_beta: self.den_beta + other.den_beta,
        }
        .normalize()
    }

    pub fn scale(&self, c: &BigRational) -> CoeffExpr {
        if c.is_zero() {
            return CoeffExpr::zero();
        }
        CoeffExpr {
            num: self.num.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
            den_beta: self.den_beta,
        }
    }

    /// Divide by `β^k`.
    pub fn div_beta(&self, k: u8) -> CoeffExpr {
        CoeffExpr {
            num: self.num.clone(),
            den_beta: self.den_beta + k,
        }
        .normalize()
    }

    /// Multiply by `β` (exact).
    pub fn mul_beta(&self) -> CoeffExpr {
        self.mul(&CoeffExpr::beta())
    }

    fn derive(&self, bump: impl Fn(Sym) -> Sym + Copy, dbeta: Sym) -> CoeffExpr {
        // Quotient rule: (P/β^d)' = P'/β^d − d·P·β'/β^{d+1}.
        let mut dnum = CoeffExpr::zero();
        for (m, c) in &self.num {
            for (i, &(s, e)) in m.syms.iter().enumerate() {
                // Differentiate the i-th symbol factor.
                let mut syms: Vec<(Sym, u8)> = Vec::with_capacity(m.syms.len() + 1);
                for (j, &(s2, e2)) in m.syms.iter().enumerate() {
                    let e2 = if i == j { e2 - 1 } else { e2 };
                    if e2 > 0 {
                        syms.push((s2, e2));
                    }
                }
                let deriv_mon = Monomial { pi: m.pi, syms };
                let bumped = Monomial {
                    pi: 0,
                    syms: vec![(bump(s), 1)],
                };
                let term = CoeffExpr {
                    num: BTreeMap::from([(
                        deriv_mon.mul(&bumped),
                        c * BigRational::from(BigInt::from(e as i64)),
                    )]),
                    den_beta: 0,
                };
                dnum = dnum.add(&term);
            }
        }
        let p_prime = CoeffExpr {
            num: dnum.num,
            den_beta: self.den_beta,
        }
        .normalize();
        if self.den_beta == 0 {
            return p_prime;
        }
        let d = BigRational::from(BigInt::from(self.den_beta as i64));
        let correction = CoeffExpr {
            num: self.num.clone(),
            den_beta: self.den_beta + 1,
        }
        .mul(&CoeffExpr::sym(dbeta.0, dbeta.1))
        .scale(&-d);
        p_prime.add(&correction)
    }

    /// `∂_z`: `Q_{a,b} → Q_{a+1,b}` with product/quotient rule.
    pub fn d_z(&self) -> CoeffExpr {
        self.derive(|(a, b)| (a + 1, b), (2, 1))
    }

    /// `∂̄_w`: `Q_{a,b} → Q_{a,b+1}` with product/quotient rule.
    pub fn d_wbar(&self) -> CoeffExpr {
        self.derive(|(a, b)| (a, b + 1), (1, 2))
    }

    /// Substitute rational values for all symbols (π stays formal). Returns
    /// `None` when the denominator specializes to zero.
    pub fn specialize(&self, value: &dyn Fn(u8, u8) -> BigRational) -> Option<CoeffExpr> {
        let beta_val = value(1, 1);
        if self.den_beta > 0 && beta_val.is_zero() {
            return None;
        }
        let mut out = CoeffExpr::zero();
        for (m, c) in &self.num {
            let mut factor = c.clone();
            for &((a, b), e) in &m.syms {
                let v = value(a, b);
                for _ in 0..e {
                    factor *= v.clone();
                }
                if factor.is_zero() {
                    break;
                }
            }
            if factor.is_zero() {
                continue;
            }
            out = out.add(&CoeffExpr::scalar_pi(factor, m.pi));
        }
        if self.den_beta > 0 {
            let inv = BigRational::one() / beta_val;
            let mut scale = BigRational::one();
            for _ in 0..self.den_beta {
                scale *= inv.clone();
            }
            out = out.scale(&scale);
        }
        Some(out)
    }

    /// Numeric evaluation: symbols from `value`, π numeric.
    pub fn eval(&self, value: &dyn Fn(u8, u8) -> C64) -> C64 {
        let pi = std::f64::consts::PI;
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in &self.num {
            let mut term = C64::new(rational_to_f64(c), 0.0) * pi.powi(m.pi as i32);
            for &((a, b), e) in &m.syms {
                term *= value(a, b).powu(e as u32);
            }
            acc += term;
        }
        if self.den_beta > 0 {
            acc /= value(1, 1).powu(self.den_beta as u32);
        }
        acc
    }

    /// Structured form: list of `(rational, pi_power, {"Q_{a,b}": e})` plus
    /// the β-denominator power.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .num
            .iter()
            .map(|(m, c)| {
                let syms: serde_json::Map<String, serde_json::Value> = m
                    .syms
                    .iter()
                    .map(|&((a, b), e)| {
                        (format!("Q_{{{a},{b}}}"), serde_json::Value::from(e))
                    })
                    .collect();
                serde_json::json!({
                    "coeff": c.to_string(),
                    "pi_pow": m.pi,
                    "symbols": syms,
                })
            })
            .collect();
        serde_json::json!({ "terms": terms, "beta_denominator_power": self.den_beta })
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // Exact for the small rationals produced here; falls back to a string
    // parse for very large ones.
    let numer = r.numer();
    let denom = r.denom();
    let nf = bigint_to_f64(numer);
    let df = bigint_to_f64(denom);
    nf / df
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

fn sym_name(a: u8, b: u8) -> String {
    match (a, b) {
        (1, 1) => "β".into(),
        (a, b) if a >= 1 && b >= 1 => {
            let dz = "∂".repeat((a - 1) as usize);
            let dw = "∂̄".repeat((b - 1) as usize);
            if dz.is_empty() && dw.is_empty() {
                "β".into()
            } else {
                format!("{dz}{dw}β")
            }
        }
        (a, 0) => format!("{}Q", "∂".repeat(a as usize)),
        (0, b) => format!("{}Q", "∂̄".repeat(b as usize)),
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.num {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || (m.syms.is_empty() && m.pi == 0) {
                parts.push(mag.to_string());
            }
            if m.pi != 0 {
                parts.push(match m.pi {
                    1 => "π".into(),
                    -1 => "π⁻¹".into(),
                    p => format!("π^{p}"),
                });
            }
            for &((a, b), e) in &m.syms {
                let name = sym_name(a, b);
                if e == 1 {
                    parts.push(name);
                } else {
                    parts.push(format!("{name}^{e}"));
                }
            }
            write!(f, "{}", parts.join("·"))?;
        }
        if self.den_beta == 1 {
            write!(f, " / β")?;
        } else if self.den_beta > 1 {
            write!(f, " / β^{}", self.den_beta)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_cancels_beta_powers() {
        // (β·Q_{2,1}) / β² normalizes to Q_{2,1}/β.
        let e = CoeffExpr::beta().mul(&CoeffExpr::sym(2, 1)).div_beta(2);
        let expect = CoeffExpr::sym(2, 1).div_beta(1);
        assert_eq!(e, expect);
    }

    #[test]
    fn ring_laws_on_fixed_expressions() {
        let a = CoeffExpr::sym(2, 1).div_beta(1);
        let b = CoeffExpr::beta().scale(&rat(3, 2));
        let c = CoeffExpr::sym(1, 2).sub(&CoeffExpr::one());
        let assoc = a.add(&b).add(&c);
        let assoc2 = a.add(&b.add(&c));
        assert_eq!(assoc, assoc2);
        let distr = a.mul(&b.add(&c));
        let distr2 = a.mul(&b).add(&a.mul(&c));
        assert_eq!(distr, distr2);
    }

    #[test]
    fn derivation_product_rule() {
        // ∂̄(β·Q_{2,1}) = Q_{1,2}Q_{2,1} + β Q_{2,2}.
        let p = CoeffExpr::beta().mul(&CoeffExpr::sym(2, 1));
        let d = p.d_wbar();
        let expect = CoeffExpr::sym(1, 2)
            .mul(&CoeffExpr::sym(2, 1))
            .add(&CoeffExpr::beta().mul(&CoeffExpr::sym(2, 2)));
        assert_eq!(d, expect);
    }

    #[test]
    fn derivation_quotient_rule() {
        // ∂̄(1/β) = −Q_{1,2}/β².
        let d = CoeffExpr::beta_inv().d_wbar();
        let expect = CoeffExpr::sym(1, 2).div_beta(2).neg();
        assert_eq!(d, expect);
        // ∂∂̄ log β = ∂(Q_{1,2}/β) = Q_{2,2}/β − Q_{2,1}Q_{1,2}/β².
        let dlog = CoeffExpr::sym(1, 2).div_beta(1).d_z();
        let expect2 = CoeffExpr::sym(2, 2).div_beta(1).sub(
            &CoeffExpr::sym(2, 1)
                .mul(&CoeffExpr::sym(1, 2))
                .div_beta(2),
        );
        assert_eq!(dlog, expect2);
    }

    #[test]
    fn gaussian_specialization() {
        let gauss = |a: u8, b: u8| {
            if (a, b) == (1, 1) {
                rat(1, 1)
            } else {
                rat(0, 1)
            }
        };
        // (2/π)β specializes to 2/π.
        let l0 = CoeffExpr::beta().mul(&CoeffExpr::scalar_pi(rat(2, 1), -1));
        let s = l0.specialize(&gauss).unwrap();
        assert_eq!(s, CoeffExpr::scalar_pi(rat(2, 1), -1));
        // ∂∂̄ log β specializes to 0.
        let dlog = CoeffExpr::sym(1, 2).div_beta(1).d_z();
        assert!(dlog.specialize(&gauss).unwrap().is_zero());
    }

    #[test]
    fn numeric_eval_matches_structure() {
        let e = CoeffExpr::sym(2, 1)
            .mul(&CoeffExpr::sym(1, 2))
            .div_beta(2)
            .scale(&rat(-3, 4));
        let v = e.eval(&|a, b| match (a, b) {
            (2, 1) => C64::new(2.0, 1.0),
            (1, 2) => C64::new(0.5, -0.5),
            (1, 1) => C64::new(2.0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let expect = -0.75 * C64::new(2.0, 1.0) * C64::new(0.5, -0.5) / C64::new(4.0, 0.0);
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn display_is_readable() {
        let l0 = CoeffExpr::beta().mul(&CoeffExpr::scalar_pi(rat(2, 1), -1));
        assert_eq!(format!("{l0}"), "2·π⁻¹·β");
    }
}
