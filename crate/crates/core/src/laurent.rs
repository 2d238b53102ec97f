//! Coefficients of the quantum torus.
//!
//! [`LaurentPoly`] is a Laurent polynomial in `u` over `Q`. [`UCoefficient`]
//! is `p(u) / (u^2 - 1)^k`: the pole order `k` is tracked so that elements
//! such as `eps / (L - 1)` can be exponentiated and conjugated exactly, and
//! so that an absence-of-pole claim can be checked rather than assumed.
//! Both types are kept canonical, so structural equality is mathematical
//! equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// `sum_i coeffs[i] u^(low + i)` with nonzero first and last coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    low: i64,
    coeffs: Vec<Rat>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_dense(0, vec![c])
    }

    pub fn monomial(power: i64, c: Rat) -> Self {
        Self::from_dense(power, vec![c])
    }

    pub fn from_dense(low: i64, coeffs: Vec<Rat>) -> Self {
        let mut p = Self { low, coeffs };
        p.trim();
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rat)>>(terms: I) -> Self {
        let mut map: BTreeMap<i64, Rat> = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert_with(Rat::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        let Some((&low, _)) = map.first_key_value() else {
            return Self::zero();
        };
        let high = *map.last_key_value().unwrap().0;
        let mut coeffs = vec![Rat::zero(); (high - low + 1) as usize];
        for (k, c) in map {
            coeffs[(k - low) as usize] = c;
        }
        Self { low, coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.low += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.low = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest and highest exponent, `None` for zero.
    pub fn degree_range(&self) -> Option<(i64, i64)> {
        (!self.is_zero()).then(|| (self.low, self.low + self.coeffs.len() as i64 - 1))
    }

    pub fn coeff(&self, power: i64) -> Rat {
        let idx = power - self.low;
        if idx < 0 {
            return Rat::zero();
        }
        self.coeffs.get(idx as usize).cloned().unwrap_or_else(Rat::zero)
    }

    /// Nonzero `(power, coefficient)` pairs in increasing power.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    /// Value at `u = 1`.
    pub fn eval_at_one(&self) -> Rat {
        self.coeffs.iter().fold(Rat::zero(), |acc, c| acc + c)
    }

    pub fn eval_at_minus_one(&self) -> Rat {
        self.terms().fold(Rat::zero(), |acc, (k, c)| {
            if k.rem_euclid(2) == 0 {
                acc + c
            } else {
                acc - c
            }
        })
    }

    /// Multiplies by `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self { low: self.low + k, coeffs: self.coeffs.clone() }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { low: self.low, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// `self * (u^2 - 1)`.
    pub fn mul_u2m1(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let n = self.coeffs.len();
        let mut out = vec![Rat::zero(); n + 2];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 2] += c;
            out[i] -= c;
        }
        Self::from_dense(self.low, out)
    }

    /// `self / (u^2 - 1)` when the division is exact.
    pub fn div_u2m1(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        // p (u) = 0 at u = 1 and u = -1 is both necessary and sufficient
        if !self.eval_at_one().is_zero() || !self.eval_at_minus_one().is_zero() {
            return None;
        }
        let n = self.coeffs.len();
        if n < 3 {
            return None;
        }
        // a_i = b_{i-2} - b_i, solved from the top down
        let mut b = vec![Rat::zero(); n - 2];
        for i in (2..n).rev() {
            let upper = if i < n - 2 { b[i].clone() } else { Rat::zero() };
            b[i - 2] = &self.coeffs[i] + upper;
        }
        Some(Self::from_dense(self.low, b))
    }

    fn add_ref(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let low = self.low.min(other.low);
        let high = (self.low + self.coeffs.len() as i64).max(other.low + other.coeffs.len() as i64);
        let mut out = vec![Rat::zero(); (high - low) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[(self.low - low) as usize + i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[(other.low - low) as usize + i] += c;
        }
        Self::from_dense(low, out)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::from_dense(self.low + other.low, out)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: Self) -> LaurentPoly {
        self.add_ref(rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { low: self.low, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: Self) -> LaurentPoly {
        self.add_ref(&-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: Self) -> LaurentPoly {
        self.mul_ref(rhs)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.terms() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ if a.is_one() => write!(f, "u^{k}")?,
                _ => write!(f, "{a}*u^{k}")?,
            }
        }
        Ok(())
    }
}

/// `numerator(u) / (u^2 - 1)^pole_order`, reduced so that the numerator is
/// not divisible by `u^2 - 1` whenever `pole_order > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UCoefficient {
    numerator: LaurentPoly,
    pole_order: u32,
}

impl UCoefficient {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_poly(LaurentPoly::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_poly(LaurentPoly::constant(c))
    }

    pub fn monomial(power: i64, c: Rat) -> Self {
        Self::from_poly(LaurentPoly::monomial(power, c))
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        Self { numerator: p, pole_order: 0 }
    }

    /// `p / (u^2 - 1)^k`, reduced.
    pub fn with_pole(p: LaurentPoly, k: u32) -> Self {
        let mut c = Self { numerator: p, pole_order: k };
        c.reduce();
        c
    }

    fn reduce(&mut self) {
        if self.numerator.is_zero() {
            self.pole_order = 0;
            return;
        }
        while self.pole_order > 0 {
            match self.numerator.div_u2m1() {
                Some(q) => {
                    self.numerator = q;
                    self.pole_order -= 1;
                }
                None => break,
            }
        }
    }

    pub fn numerator(&self) -> &LaurentPoly {
        &self.numerator
    }

    pub fn pole_order(&self) -> u32 {
        self.pole_order
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// No `(u^2 - 1)` denominator.
    pub fn is_regular(&self) -> bool {
        self.pole_order == 0
    }

    /// Regular and independent of `u`.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        match self.numerator.degree_range() {
            Some((0, 0)) if self.pole_order == 0 => Some(self.numerator.coeff(0)),
            _ => None,
        }
    }

    /// Value at `u = 1`; fails on a genuine pole.
    pub fn specialize_u1(&self) -> Result<Rat> {
        if self.pole_order > 0 {
            return Err(Error::Pole { order: self.pole_order, at: "u = 1".into() });
        }
        Ok(self.numerator.eval_at_one())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self { numerator: self.numerator.scale(c), pole_order: if c.is_zero() { 0 } else { self.pole_order } }
    }

    /// Multiplies by `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self { numerator: self.numerator.shift(k), pole_order: self.pole_order }
    }

    pub fn div_u2m1(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self::with_pole(self.numerator.clone(), self.pole_order + 1)
    }

    pub fn mul_u2m1(&self) -> Self {
        if self.pole_order > 0 {
            Self::with_pole(self.numerator.clone(), self.pole_order - 1)
        } else {
            Self::from_poly(self.numerator.mul_u2m1())
        }
    }

    fn lift_to(&self, k: u32) -> LaurentPoly {
        let mut p = self.numerator.clone();
        for _ in self.pole_order..k {
            p = p.mul_u2m1();
        }
        p
    }
}

impl Add for &UCoefficient {
    type Output = UCoefficient;
    fn add(self, rhs: Self) -> UCoefficient {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let k = self.pole_order.max(rhs.pole_order);
        UCoefficient::with_pole(&self.lift_to(k) + &rhs.lift_to(k), k)
    }
}

impl Neg for &UCoefficient {
    type Output = UCoefficient;
    fn neg(self) -> UCoefficient {
        UCoefficient { numerator: -&self.numerator, pole_order: self.pole_order }
    }
}

impl Sub for &UCoefficient {
    type Output = UCoefficient;
    fn sub(self, rhs: Self) -> UCoefficient {
        self + &(-rhs)
    }
}

impl Mul for &UCoefficient {
    type Output = UCoefficient;
    fn mul(self, rhs: Self) -> UCoefficient {
        UCoefficient::with_pole(&self.numerator * &rhs.numerator, self.pole_order + rhs.pole_order)
    }
}

impl fmt::Display for UCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pole_order == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "({}) / (u^2 - 1)^{}", self.numerator, self.pole_order)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};
    use proptest::prelude::*;

    fn u2m1() -> LaurentPoly {
        LaurentPoly::from_terms([(2, rat(1)), (0, rat(-1))])
    }

    #[test]
    fn canonical_trimming() {
        let p = LaurentPoly::from_dense(-2, vec![rat(0), rat(3), rat(0)]);
        assert_eq!(p, LaurentPoly::monomial(-1, rat(3)));
        assert_eq!(LaurentPoly::from_dense(5, vec![rat(0)]), LaurentPoly::zero());
    }

    #[test]
    fn exact_division_by_u2m1() {
        // u^3 - u^{-3} = u^{-3} (u^6 - 1)
        let p = LaurentPoly::from_terms([(3, rat(1)), (-3, rat(-1))]);
        let q = p.div_u2m1().unwrap();
        assert_eq!(q, LaurentPoly::from_terms([(1, rat(1)), (-1, rat(1)), (-3, rat(1))]));
        assert_eq!(q.eval_at_one(), rat(3));
        assert!(LaurentPoly::from_terms([(1, rat(1))]).div_u2m1().is_none());
        assert!(LaurentPoly::from_terms([(1, rat(1)), (0, rat(-1))]).div_u2m1().is_none());
    }

    #[test]
    fn specialization_kills_the_ideal() {
        let c = UCoefficient::monomial(3, rat(-1));
        assert_eq!(c.specialize_u1().unwrap(), rat(-1));
        assert_eq!(UCoefficient::from_poly(u2m1()).specialize_u1().unwrap(), rat(0));
        assert_eq!(UCoefficient::one().specialize_u1().unwrap(), rat(1));
    }

    #[test]
    fn poles_cancel_when_numerator_allows() {
        let c = UCoefficient::with_pole(&u2m1() * &u2m1(), 3);
        assert_eq!(c.pole_order(), 1);
        assert_eq!(c.numerator(), &LaurentPoly::one());
        let back = c.mul_u2m1();
        assert!(back.is_regular());
        assert_eq!(back, UCoefficient::one());
        assert!(c.specialize_u1().is_err());
    }

    #[test]
    fn sum_across_pole_orders() {
        // 1/(u^2-1) - u^2/(u^2-1) = -1
        let a = UCoefficient::with_pole(LaurentPoly::one(), 1);
        let b = UCoefficient::with_pole(LaurentPoly::monomial(2, rat(1)), 1);
        assert_eq!(&a - &b, UCoefficient::constant(rat(-1)));
        assert_eq!(format!("{}", UCoefficient::monomial(2, ratio(-1, 2))), "-1/2*u^2");
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        (-4i64..4, proptest::collection::vec(-5i64..5, 0..5))
            .prop_map(|(low, cs)| LaurentPoly::from_dense(low, cs.into_iter().map(rat).collect()))
    }

    fn arb_coeff() -> impl Strategy<Value = UCoefficient> {
        (arb_poly(), 0u32..3).prop_map(|(p, k)| UCoefficient::with_pole(p, k))
    }

    proptest! {
        #[test]
        fn field_axioms(a in arb_coeff(), b in arb_coeff(), c in arb_coeff()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn u2m1_round_trip(p in arb_poly()) {
            prop_assert_eq!(p.mul_u2m1().div_u2m1(), Some(p.clone()));
            let c = UCoefficient::from_poly(p.clone());
            prop_assert_eq!(c.div_u2m1().mul_u2m1(), c);
        }
    }
}
