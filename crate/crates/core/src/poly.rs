//! Dense univariate polynomials over Q.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use crate::rational::Rat;

/// `sum coeffs[k] x^k`, with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::new(vec![c])
    }

    /// `c x^k`.
    pub fn monomial(c: Rat, k: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Keeps the terms of degree `< len`.
    pub fn truncate(&self, len: usize) -> Self {
        Self::new(self.coeffs.iter().take(len).cloned().collect())
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
    }

    /// `p(x) -> p(x^k)`.
    pub fn compose_power(&self, k: usize) -> Self {
        if k == 0 {
            return Self::constant(self.coeffs.iter().sum());
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len().saturating_sub(1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = c.clone();
        }
        Self::new(coeffs)
    }

    /// Quotient and remainder; `None` when dividing by zero.
    pub fn div_rem(&self, d: &Self) -> Option<(Self, Self)> {
        let dl = d.leading()?.clone();
        let dd = d.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Some((Self::zero(), self.clone()));
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &dl;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Some((Self::new(quot), Self::new(rem)))
    }

    /// Scaled so the leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Scaled so the constant coefficient is 1; unchanged if it is zero.
    pub fn unit_constant(&self) -> Self {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            self.clone()
        } else {
            self.scale(&c0.recip())
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Monic least common multiple.
    pub fn lcm(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let g = self.gcd(other);
        let (q, _) = self.div_rem(&g).expect("nonzero gcd");
        (&q * other).monic()
    }

    /// The first `len` coefficients of `self / d`; `None` if `d(0) = 0`.
    pub fn series_div(&self, d: &Self, len: usize) -> Option<Vec<Rat>> {
        let d0 = d.coeff(0);
        if d0.is_zero() {
            return None;
        }
        let inv = d0.recip();
        let mut out: Vec<Rat> = Vec::with_capacity(len);
        for n in 0..len {
            let mut acc = self.coeff(n);
            for k in 1..d.coeffs.len().min(n + 1) {
                acc -= &d.coeffs[k] * &out[n - k];
            }
            out.push(acc * &inv);
        }
        Some(out)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
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
            match (k, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => {}
                _ => write!(f, "{a}*")?,
            }
            match k {
                0 => {}
                1 => f.write_str("q")?,
                _ => write!(f, "q^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn p(v: &[i64]) -> Poly {
        Poly::new(v.iter().map(|&x| rat(x)).collect())
    }

    #[test]
    fn division_identity() {
        let a = p(&[3, 0, -2, 5, 1]);
        let d = p(&[1, 2, 3]);
        let (q, r) = a.div_rem(&d).unwrap();
        assert_eq!(&(&q * &d) + &r, a);
        assert!(r.degree().unwrap() < 2);
        assert!(a.div_rem(&Poly::zero()).is_none());
    }

    #[test]
    fn gcd_and_lcm() {
        let x1 = p(&[-1, 1]);
        let x2 = p(&[2, 1]);
        let x3 = p(&[1, 0, 1]);
        let a = &(&x1 * &x2) * &rat_poly(3);
        let b = &x1 * &x3;
        assert_eq!(a.gcd(&b), x1);
        assert_eq!(a.lcm(&b), (&(&x1 * &x2) * &x3).monic());
        assert_eq!(Poly::zero().gcd(&x2), x2);
    }

    fn rat_poly(c: i64) -> Poly {
        Poly::constant(rat(c))
    }

    #[test]
    fn series_expansion() {
        let geo = Poly::one().series_div(&p(&[1, -2]), 5).unwrap();
        assert_eq!(geo, vec![rat(1), rat(2), rat(4), rat(8), rat(16)]);
        assert!(Poly::one().series_div(&p(&[0, 1]), 3).is_none());
        assert_eq!(p(&[1, 2]).compose_power(3), p(&[1, 0, 0, 2]));
        assert_eq!(p(&[2, 4]).unit_constant(), Poly::new(vec![rat(1), rat(2)]));
        assert_eq!(p(&[1, 1]).eval(&ratio(1, 2)), ratio(3, 2));
        assert_eq!(p(&[1, -1, 0, 2]).to_string(), "1 - q + 2*q^3");
    }
}
