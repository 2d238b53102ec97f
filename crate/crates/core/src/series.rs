//! Commutative truncated series with exact rational coefficients.
//!
//! [`QSeries`] is a univariate power series in `q`. [`ChargeSeries`] is a
//! series in `q^n t^beta` keyed by `(2 beta, 6 n)`, which is the
//! generating-function view of an invariant table at fixed `(r, D)`.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{ChernVector, GeometryData, TruncationWindow};
use crate::rational::{factorial, Rat};

/// `sum_{k < len} coeffs[k] q^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<Rat>,
}

impl QSeries {
    pub fn new(mut coeffs: Vec<Rat>, len: usize) -> Self {
        coeffs.resize(len, Rat::zero());
        Self { coeffs }
    }

    pub fn one(len: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); len];
        if let Some(c) = coeffs.first_mut() {
            *c = Rat::one();
        }
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn into_coeffs(self) -> Vec<Rat> {
        self.coeffs
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// `f(q) -> f(-q)`.
    pub fn alternate(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        let mut out = vec![Rat::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// `exp(f)` for `f(0) = 0`, from `n e_n = sum_k k f_k e_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return invalid("exp needs a zero constant term");
        }
        let len = self.len();
        let mut e = vec![Rat::zero(); len];
        if len == 0 {
            return Ok(Self { coeffs: e });
        }
        e[0] = Rat::one();
        for n in 1..len {
            let mut acc = Rat::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &e[n - k] * Rat::from_integer(k.into());
                }
            }
            e[n] = acc / Rat::from_integer(n.into());
        }
        Ok(Self { coeffs: e })
    }

    /// `log(f)` for `f(0) = 1`.
    pub fn log(&self) -> Result<Self> {
        if self.is_empty() || !self.coeff(0).is_one() {
            return invalid("log needs constant term 1");
        }
        let len = self.len();
        let mut l = vec![Rat::zero(); len];
        for n in 1..len {
            // n f_n = sum_{k=1}^{n} k l_k f_{n-k}
            let mut acc = &self.coeffs[n] * Rat::from_integer(n.into());
            for k in 1..n {
                acc -= &l[k] * &self.coeffs[n - k] * Rat::from_integer(k.into());
            }
            l[n] = acc / Rat::from_integer(n.into());
        }
        Ok(Self { coeffs: l })
    }

    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return invalid("series with zero constant term is not invertible");
        }
        let inv0 = c0.recip();
        let len = self.len();
        let mut out = vec![Rat::zero(); len];
        if len == 0 {
            return Ok(Self { coeffs: out });
        }
        out[0] = inv0.clone();
        for n in 1..len {
            let mut acc = Rat::zero();
            for k in 1..=n {
                acc += &self.coeffs[k] * &out[n - k];
            }
            out[n] = -acc * &inv0;
        }
        Ok(Self { coeffs: out })
    }
}

/// `(2 beta, 6 n)`, the `t^beta q^n` exponent of a table entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChargeKey {
    pub two_beta: Vec<i64>,
    pub six_n: i64,
}

impl ChargeKey {
    pub fn new(two_beta: Vec<i64>, six_n: i64) -> Self {
        Self { two_beta, six_n }
    }

    pub fn zero(curve_rank: usize) -> Self {
        Self::new(vec![0; curve_rank], 0)
    }

    pub fn is_zero(&self) -> bool {
        self.six_n == 0 && self.two_beta.iter().all(|&b| b == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            two_beta: self.two_beta.iter().zip(&other.two_beta).map(|(a, b)| a + b).collect(),
            six_n: self.six_n + other.six_n,
        }
    }

    /// The lattice point `(r, D, -beta, -n)`.
    pub fn with_rank(&self, r: i64, d: &[i64]) -> ChernVector {
        ChernVector::new(r, d.to_vec(), self.two_beta.clone(), self.six_n)
    }

    pub fn of_vector(v: &ChernVector) -> Self {
        Self::new(v.two_beta.clone(), v.six_n)
    }

    /// Every component nonnegative and the key nonzero.
    fn is_positive(&self) -> bool {
        !self.is_zero() && self.six_n >= 0 && self.two_beta.iter().all(|&b| b >= 0)
    }
}

impl fmt::Display for ChargeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(2beta={:?}, 6n={})", self.two_beta, self.six_n)
    }
}

/// Upper truncation in `w . 2beta` and `6n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesBounds {
    omega_curve: Vec<i64>,
    pub max_omega_two_beta: i64,
    pub max_six_n: i64,
}

impl SeriesBounds {
    pub fn new(g: &GeometryData, window: &TruncationWindow) -> Self {
        Self {
            omega_curve: g.omega_curve().to_vec(),
            max_omega_two_beta: window.max_omega_two_beta,
            max_six_n: window.max_six_n,
        }
    }

    pub fn keeps(&self, k: &ChargeKey) -> bool {
        k.six_n <= self.max_six_n
            && k.two_beta.iter().zip(&self.omega_curve).map(|(a, b)| a * b).sum::<i64>()
                <= self.max_omega_two_beta
    }
}

/// A commutative series `sum c_k q^n t^beta` truncated from above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeSeries {
    bounds: SeriesBounds,
    terms: BTreeMap<ChargeKey, Rat>,
}

impl ChargeSeries {
    pub fn zero(bounds: SeriesBounds) -> Self {
        Self { bounds, terms: BTreeMap::new() }
    }

    pub fn one(bounds: SeriesBounds, curve_rank: usize) -> Self {
        let mut s = Self::zero(bounds);
        s.insert(ChargeKey::zero(curve_rank), Rat::one());
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (ChargeKey, Rat)>>(bounds: SeriesBounds, terms: I) -> Self {
        let mut s = Self::zero(bounds);
        for (k, c) in terms {
            s.insert(k, c);
        }
        s
    }

    /// Adds `c` at `k`, silently dropping out-of-bounds keys.
    pub fn insert(&mut self, k: ChargeKey, c: Rat) {
        if c.is_zero() || !self.bounds.keeps(&k) {
            return;
        }
        let slot = self.terms.entry(k.clone()).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> &BTreeMap<ChargeKey, Rat> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<ChargeKey, Rat> {
        self.terms
    }

    pub fn bounds(&self) -> &SeriesBounds {
        &self.bounds
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::from_terms(self.bounds.clone(), self.terms.iter().map(|(k, v)| (k.clone(), v * c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = self.clone();
        for (k, v) in &other.terms {
            s.insert(k.clone(), v.clone());
        }
        s
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut s = Self::zero(self.bounds.clone());
        for (k1, a) in &self.terms {
            for (k2, b) in &other.terms {
                s.insert(k1.add(k2), a * b);
            }
        }
        s
    }

    fn power_series(&self, curve_rank: usize, weight: impl Fn(usize) -> Rat) -> Result<Self> {
        if let Some(k) = self.terms.keys().find(|k| !k.is_positive()) {
            return Err(Error::InvalidInput(format!(
                "series functions need positive exponents, found {k}"
            )));
        }
        let unit = Self::one(self.bounds.clone(), curve_rank);
        let mut result = unit.scale(&weight(0));
        let mut power = unit;
        let mut k = 0;
        while !power.is_zero() {
            k += 1;
            power = power.mul(self);
            let w = weight(k);
            if !w.is_zero() {
                result = result.add(&power.scale(&w));
            }
        }
        Ok(result)
    }

    /// `exp` of a series supported on nonzero nonnegative exponents.
    pub fn exp(&self, curve_rank: usize) -> Result<Self> {
        self.power_series(curve_rank, |k| factorial(k).recip())
    }
}
