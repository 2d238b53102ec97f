//! The quantum torus on the Chern-character lattice.
//!
//! Generators multiply as `c_a * c_b = (-1)^chi(a,b) u^chi(a,b) c_{a+b}`,
//! with `u^2` in the role of the Lefschetz class. At `u = 1` this is the
//! commutative sign-twisted product, and the limit of
//! `(f * g - g * f) / (u^2 - 1)` is the Poisson bracket
//! `{c_a, c_b} = (-1)^chi chi c_{a+b}`.
//!
//! Elements are finitely supported on a truncation window of either the
//! sharp cone (an algebra) or a shifted cone (a bimodule over it). Products
//! drop every term that leaves the window; because the retained region is
//! downward closed this is a ring quotient and associativity survives.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::lattice::{integral_pairing, ChernVector, ConeSpec, GeometryData, TruncationWindow};
use crate::laurent::UCoefficient;
use crate::rational::{factorial, rat, Rat};

/// Sign convention of the generator product.
///
/// `FlippedSign` exists only to mutation-test the bracket cross-checks: it
/// multiplies every generator product by an extra `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Twist {
    #[default]
    Standard,
    FlippedSign,
}

impl Twist {
    fn factor(self, chi: i64) -> UCoefficient {
        let odd = chi.rem_euclid(2) == 1;
        let negative = match self {
            Twist::Standard => odd,
            Twist::FlippedSign => !odd,
        };
        UCoefficient::monomial(chi, if negative { rat(-1) } else { rat(1) })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusElement {
    cone: ConeSpec,
    terms: BTreeMap<ChernVector, UCoefficient>,
}

impl TorusElement {
    pub fn zero(cone: ConeSpec) -> Self {
        Self { cone, terms: BTreeMap::new() }
    }

    /// The unit `c_0`; only the sharp cone has one.
    pub fn one(g: &GeometryData, cone: ConeSpec) -> Result<Self> {
        if !cone.is_sharp() {
            return invalid("only the sharp cone algebra has a unit");
        }
        Self::monomial(g, cone, ChernVector::zero(g), UCoefficient::one())
    }

    pub fn monomial(g: &GeometryData, cone: ConeSpec, v: ChernVector, c: UCoefficient) -> Result<Self> {
        Self::from_terms(g, cone, [(v, c)])
    }

    /// Collects terms, summing repeated keys and dropping zeros. Every key
    /// must lie in the cone window.
    pub fn from_terms<I>(g: &GeometryData, cone: ConeSpec, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ChernVector, UCoefficient)>,
    {
        let mut out = Self::zero(cone);
        for (v, c) in terms {
            g.check_vector(&v)?;
            if !out.cone.in_window(g, &v) {
                return invalid(format!("{v} is outside the cone window"));
            }
            out.accumulate(v, c);
        }
        Ok(out)
    }

    /// Terms with rational (u-free) coefficients.
    pub fn from_rational_terms<I>(g: &GeometryData, cone: ConeSpec, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ChernVector, Rat)>,
    {
        Self::from_terms(g, cone, terms.into_iter().map(|(v, c)| (v, UCoefficient::constant(c))))
    }

    fn accumulate(&mut self, v: ChernVector, c: UCoefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(v) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn window(&self) -> &TruncationWindow {
        &self.cone.window
    }

    pub fn terms(&self) -> &BTreeMap<ChernVector, UCoefficient> {
        &self.terms
    }

    pub fn coeff(&self, v: &ChernVector) -> UCoefficient {
        self.terms.get(v).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> UCoefficient {
        self.terms
            .iter()
            .find(|(v, _)| v.is_zero())
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }

    /// Every coefficient is a rational constant.
    pub fn is_u_free(&self) -> bool {
        self.terms.values().all(|c| c.as_constant().is_some())
    }

    /// No coefficient carries a `(u^2 - 1)` denominator.
    pub fn is_regular(&self) -> bool {
        self.terms.values().all(UCoefficient::is_regular)
    }

    /// Rational coefficients of a u-free element.
    pub fn rational_terms(&self) -> Result<BTreeMap<ChernVector, Rat>> {
        self.terms
            .iter()
            .map(|(v, c)| {
                c.as_constant()
                    .map(|q| (v.clone(), q))
                    .ok_or_else(|| Error::InvalidInput(format!("coefficient at {v} depends on u")))
            })
            .collect()
    }

    pub fn map_coeffs(&self, f: impl Fn(&UCoefficient) -> UCoefficient) -> Self {
        let mut out = Self::zero(self.cone.clone());
        for (v, c) in &self.terms {
            out.accumulate(v.clone(), f(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, k: &Rat) -> Self {
        self.map_coeffs(|c| c.scale(k))
    }

    pub fn scale_by(&self, k: &UCoefficient) -> Self {
        self.map_coeffs(|c| c * k)
    }

    pub fn div_u2m1(&self) -> Self {
        self.map_coeffs(UCoefficient::div_u2m1)
    }

    pub fn mul_u2m1(&self) -> Self {
        self.map_coeffs(UCoefficient::mul_u2m1)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.cone != other.cone {
            return invalid("cannot add elements over different cones or windows");
        }
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.accumulate(v.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    /// Drops the terms outside `window`; `window` must not be larger.
    pub fn restrict(&self, g: &GeometryData, window: TruncationWindow) -> Result<Self> {
        let w = self.cone.window;
        if window.max_omega_two_beta > w.max_omega_two_beta
            || window.max_six_n > w.max_six_n
            || window.min_six_n < w.min_six_n
        {
            return invalid("restriction window must lie inside the current one");
        }
        let cone = self.cone.with_window(window);
        let terms = self
            .terms
            .iter()
            .filter(|(v, _)| cone.in_window(g, v))
            .map(|(v, c)| (v.clone(), c.clone()))
            .collect();
        Ok(Self { cone, terms })
    }
}

impl fmt::Display for TorusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (v, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "[{c}] c{v}")?;
        }
        Ok(())
    }
}

/// Cone of a product, or an error for shifted-by-shifted or mismatched
/// windows.
fn product_cone(a: &ConeSpec, b: &ConeSpec) -> Result<ConeSpec> {
    if a.window != b.window {
        return invalid("operands live in different truncation windows");
    }
    match (a.is_sharp(), b.is_sharp()) {
        (true, true) => Ok(a.clone()),
        (true, false) => Ok(b.clone()),
        (false, true) => Ok(a.clone()),
        (false, false) => invalid("the product of two shifted-cone elements is not defined"),
    }
}

/// The quantum torus product.
pub fn star(g: &GeometryData, a: &TorusElement, b: &TorusElement) -> Result<TorusElement> {
    star_with(g, a, b, Twist::Standard)
}

pub fn star_with(g: &GeometryData, a: &TorusElement, b: &TorusElement, twist: Twist) -> Result<TorusElement> {
    let cone = product_cone(&a.cone, &b.cone)?;
    let mut out = TorusElement::zero(cone);
    for (v1, c1) in &a.terms {
        for (v2, c2) in &b.terms {
            let w = v1 + v2;
            if !out.cone.in_window(g, &w) {
                continue;
            }
            let chi = integral_pairing(g, v1, v2)?;
            let c = &(c1 * c2) * &twist.factor(chi);
            out.accumulate(w, c);
        }
    }
    Ok(out)
}

/// Substitutes `u = 1`; fails if any coefficient has a pole there.
pub fn specialize_u1(a: &TorusElement) -> Result<TorusElement> {
    let mut out = TorusElement::zero(a.cone.clone());
    for (v, c) in &a.terms {
        let q = c.specialize_u1().map_err(|e| match e {
            Error::Pole { order, .. } => Error::Pole { order, at: v.to_string() },
            other => other,
        })?;
        out.accumulate(v.clone(), UCoefficient::constant(q));
    }
    Ok(out)
}

/// The commutative product at `u = 1` of two regular elements.
pub fn classical_product(g: &GeometryData, a: &TorusElement, b: &TorusElement) -> Result<TorusElement> {
    specialize_u1(&star(g, &specialize_u1(a)?, &specialize_u1(b)?)?)
}

/// `{a, b}` from the bilinear formula `{c_v, c_w} = (-1)^chi chi c_{v+w}`
/// applied to the `u = 1` values of the coefficients.
pub fn bracket_direct(g: &GeometryData, a: &TorusElement, b: &TorusElement) -> Result<TorusElement> {
    let cone = product_cone(&a.cone, &b.cone)?;
    let a = specialize_u1(a)?;
    let b = specialize_u1(b)?;
    let mut out = TorusElement::zero(cone);
    for (v1, c1) in &a.terms {
        let x = c1.as_constant().expect("specialized");
        for (v2, c2) in &b.terms {
            let w = v1 + v2;
            if !out.cone.in_window(g, &w) {
                continue;
            }
            let chi = integral_pairing(g, v1, v2)?;
            if chi == 0 {
                continue;
            }
            let sign = if chi.rem_euclid(2) == 1 { -chi } else { chi };
            let y = c2.as_constant().expect("specialized");
            out.accumulate(w, UCoefficient::constant(&x * &y * rat(sign)));
        }
    }
    Ok(out)
}

/// `{a, b}` as `(a * b - b * a) / (u^2 - 1)` evaluated at `u = 1`.
pub fn bracket_by_division(
    g: &GeometryData,
    a: &TorusElement,
    b: &TorusElement,
    twist: Twist,
) -> Result<TorusElement> {
    if !a.is_regular() || !b.is_regular() {
        return invalid("the bracket is defined on regular elements");
    }
    let commutator = star_with(g, a, b, twist)?.checked_sub(&star_with(g, b, a, twist)?)?;
    specialize_u1(&commutator.div_u2m1())
}

/// The semiclassical Poisson bracket, computed by the direct formula and by
/// exact division of the commutator; the two must agree.
pub fn poisson_bracket(g: &GeometryData, a: &TorusElement, b: &TorusElement) -> Result<TorusElement> {
    poisson_bracket_with(g, a, b, Twist::Standard)
}

pub fn poisson_bracket_with(
    g: &GeometryData,
    a: &TorusElement,
    b: &TorusElement,
    twist: Twist,
) -> Result<TorusElement> {
    let direct = bracket_direct(g, a, b)?;
    let divided = bracket_by_division(g, a, b, twist)?;
    if direct != divided {
        return Err(Error::Internal(format!(
            "bracket routes disagree: direct {direct} vs division {divided}"
        )));
    }
    Ok(direct)
}

fn require_nilpotent(g: &GeometryData, a: &TorusElement, op: &str) -> Result<()> {
    if !a.cone.is_sharp() {
        return invalid(format!("{op} is defined on sharp-cone elements"));
    }
    if !a.coeff(&ChernVector::zero(g)).is_zero() {
        return invalid(format!("{op} needs a zero constant term"));
    }
    Ok(())
}

/// Generic truncated power series `sum_k weight(k) a^k`, stopping when the
/// powers vanish in the window.
fn power_series(
    g: &GeometryData,
    a: &TorusElement,
    weight: impl Fn(usize) -> Rat,
) -> Result<TorusElement> {
    let unit = TorusElement::one(g, a.cone.clone())?;
    let mut result = unit.scale(&weight(0));
    let mut power = unit;
    // each factor raises w.beta + n by at least one
    let bound = (a.window().max_omega_two_beta / 2 + a.window().max_six_n / 6 + 2) as usize;
    for k in 1..=bound {
        power = star(g, &power, a)?;
        if power.is_zero() {
            return Ok(result);
        }
        let w = weight(k);
        if !w.is_zero() {
            result = result.checked_add(&power.scale(&w))?;
        }
    }
    if power.is_zero() {
        Ok(result)
    } else {
        Err(Error::Internal("power series failed to terminate in the window".into()))
    }
}

/// `exp(a) = sum a^k / k!` for `a` with zero constant term.
pub fn exp(g: &GeometryData, a: &TorusElement) -> Result<TorusElement> {
    require_nilpotent(g, a, "exp")?;
    power_series(g, a, |k| factorial(k).recip())
}

/// `log(1 + a)`.
pub fn log1p(g: &GeometryData, a: &TorusElement) -> Result<TorusElement> {
    require_nilpotent(g, a, "log1p")?;
    power_series(g, a, |k| match k {
        0 => Rat::zero(),
        k if k % 2 == 1 => Rat::new(1.into(), k.into()),
        k => Rat::new((-1).into(), k.into()),
    })
}

/// `(1 + a)^{-1}`.
pub fn inverse_1p(g: &GeometryData, a: &TorusElement) -> Result<TorusElement> {
    require_nilpotent(g, a, "inverse_1p")?;
    power_series(g, a, |k| if k % 2 == 0 { Rat::one() } else { -Rat::one() })
}

/// `exp(Ad eps) x = sum_k (1/k!) {eps, {eps, ... {eps, x}}}` with the
/// semiclassical bracket.
pub fn adjoint_exp(g: &GeometryData, eps: &TorusElement, x: &TorusElement) -> Result<TorusElement> {
    require_nilpotent(g, eps, "adjoint_exp")?;
    if !eps.is_u_free() || !x.is_u_free() {
        return invalid("adjoint_exp acts on u-free elements");
    }
    let mut result = x.clone();
    let mut term = x.clone();
    // each bracket with eps raises w.beta + n by at least one
    let w = x.window();
    let lowest = x
        .terms
        .keys()
        .map(|v| g.omega_two_beta(&v.two_beta) / 2 + v.six_n.div_euclid(6))
        .min()
        .unwrap_or(0);
    let bound = (w.max_omega_two_beta / 2 + w.max_six_n / 6 - lowest + 2).max(1) as usize;
    for k in 1..=bound {
        term = bracket_direct(g, eps, &term)?.scale(&Rat::new(1.into(), k.into()));
        if term.is_zero() {
            return Ok(result);
        }
        result = result.checked_add(&term)?;
    }
    Err(Error::Internal("nested brackets failed to terminate in the window".into()))
}

/// `(u^2 - 1) log(a)` for `a = 1 + gamma`, checked to be free of poles.
pub fn regular_log(g: &GeometryData, a: &TorusElement) -> Result<TorusElement> {
    if !a.cone.is_sharp() {
        return invalid("regular_log is defined on sharp-cone elements");
    }
    let unit = TorusElement::one(g, a.cone.clone())?;
    if a.constant_term() != UCoefficient::one() {
        return invalid("regular_log needs an element of the form 1 + gamma");
    }
    let gamma = a.checked_sub(&unit)?;
    let out = log1p(g, &gamma)?.mul_u2m1();
    if let Some((v, c)) = out.terms.iter().find(|(_, c)| !c.is_regular()) {
        return Err(Error::Pole { order: c.pole_order(), at: v.to_string() });
    }
    Ok(out)
}
