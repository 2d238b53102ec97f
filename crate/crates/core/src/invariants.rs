//! Invariant-level transforms.
//!
//! Tables of DT, PT and L invariants at a fixed coprime `(r, D)` are
//! [`InvariantSeries`]; their module-element image is `-sum X(v) c_v` in the
//! shifted cone. The rational invariants `N_{n, beta}` of one-dimensional
//! sheaves are an [`NTable`]. The wall-crossing kernels are computed twice
//! wherever possible: once as a commutative series product and once as the
//! adjoint exponential of the corresponding sharp-cone element in the
//! torus, and the two results are required to agree exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Bound;
use std::str::FromStr;

use num::{BigInt, Integer, One, Zero};

use crate::error::{invalid, Error, Result};
use crate::lattice::{slope_mubar, ConeSpec, GeometryData, Slope, TruncationWindow};
use crate::rational::{rat, Rat};
use crate::series::{ChargeKey, ChargeSeries, QSeries, SeriesBounds};
use crate::torus::{adjoint_exp, exp, star, TorusElement};

/// `sigma_2(n) = sum_{d | n} d^2`.
pub fn sigma2(n: u64) -> BigInt {
    let mut acc = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            acc += BigInt::from(d) * d;
            let e = n / d;
            if e != d {
                acc += BigInt::from(e) * e;
            }
        }
        d += 1;
    }
    acc
}

/// `M((-1)^r q)^{r e}` through `q^qdeg`, with `M(q) = prod_k (1 - q^k)^{-k}`.
///
/// Uses the logarithmic derivative `q F'/F = r e sum sigma_2(n) q^n`, so each
/// coefficient is one exact convolution step.
pub fn macmahon(e: i64, r: i64, qdeg: usize) -> QSeries {
    let exponent = Rat::from_integer(BigInt::from(r) * BigInt::from(e));
    let len = qdeg + 1;
    let sig: Vec<Rat> = (0..len).map(|n| Rat::from_integer(sigma2(n as u64))).collect();
    let mut a = vec![Rat::zero(); len];
    a[0] = Rat::one();
    for n in 1..len {
        let mut acc = Rat::zero();
        for j in 1..=n {
            if !a[n - j].is_zero() {
                acc += &sig[j] * &a[n - j];
            }
        }
        a[n] = acc * &exponent / Rat::from_integer(n.into());
    }
    let series = QSeries::new(a, len);
    if r.rem_euclid(2) == 1 {
        series.alternate()
    } else {
        series
    }
}

/// Rational invariants `N_{n, beta}` on nonzero curve classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NTable {
    curve_rank: usize,
    entries: BTreeMap<ChargeKey, Rat>,
}

impl NTable {
    /// Entries must have `beta >= 0` integral, `n >= 0` integral, and a
    /// nonzero class. Zero values are dropped.
    pub fn new(curve_rank: usize, entries: BTreeMap<ChargeKey, Rat>) -> Result<Self> {
        let mut kept = BTreeMap::new();
        for (k, v) in entries {
            if k.two_beta.len() != curve_rank {
                return Err(Error::DimensionMismatch {
                    what: "curve components",
                    expected: curve_rank,
                    found: k.two_beta.len(),
                });
            }
            let on_lattice = k.two_beta.iter().all(|&b| b >= 0 && b % 2 == 0)
                && k.six_n >= 0
                && k.six_n % 6 == 0;
            if !on_lattice || k.is_zero() {
                return invalid(format!("N invariants live on nonzero integral curve classes, got {k}"));
            }
            if !v.is_zero() {
                kept.insert(k, v);
            }
        }
        Ok(Self { curve_rank, entries: kept })
    }

    pub fn empty(curve_rank: usize) -> Self {
        Self { curve_rank, entries: BTreeMap::new() }
    }

    pub fn curve_rank(&self) -> usize {
        self.curve_rank
    }

    pub fn entries(&self) -> &BTreeMap<ChargeKey, Rat> {
        &self.entries
    }

    pub fn get(&self, k: &ChargeKey) -> Rat {
        self.entries.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    /// Entries from both tables; `other` wins on overlap.
    pub fn merged(&self, other: &NTable) -> NTable {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.clone());
        NTable { curve_rank: self.curve_rank, entries }
    }
}

/// `N_{n,0}` for `1 <= n <= n_max`, solved from
/// `exp(sum (-1)^{n-1} n N_{n,0} q^n) = M(-q)^e`.
pub fn n_degree_zero(e: i64, n_max: usize, curve_rank: usize) -> NTable {
    let log = macmahon(e, 1, n_max).log().expect("constant term is one");
    let mut entries = BTreeMap::new();
    for n in 1..=n_max {
        let mut v = log.coeff(n) / Rat::from_integer(n.into());
        if n % 2 == 0 {
            v = -v;
        }
        if !v.is_zero() {
            entries.insert(ChargeKey::new(vec![0; curve_rank], 6 * n as i64), v);
        }
    }
    NTable { curve_rank, entries }
}

/// An interval of `mu-bar` slopes in `[0, infinity]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeInterval {
    lower: Bound<Slope>,
    upper: Bound<Slope>,
}

impl SlopeInterval {
    pub fn new(lower: Bound<Slope>, upper: Bound<Slope>) -> Self {
        Self { lower, upper }
    }

    pub fn empty() -> Self {
        Self::new(Bound::Excluded(Slope::Infinite), Bound::Excluded(Slope::Infinite))
    }

    pub fn point(s: Slope) -> Self {
        Self::new(Bound::Included(s.clone()), Bound::Included(s))
    }

    /// `{infinity}`: zero-dimensional classes.
    pub fn infinity() -> Self {
        Self::point(Slope::Infinite)
    }

    /// `[0, infinity)`: classes with `beta > 0`.
    pub fn finite_nonnegative() -> Self {
        Self::new(Bound::Included(Slope::Finite(Rat::zero())), Bound::Excluded(Slope::Infinite))
    }

    /// `[0, infinity]`.
    pub fn all() -> Self {
        Self::new(Bound::Included(Slope::Finite(Rat::zero())), Bound::Included(Slope::Infinite))
    }

    pub fn contains(&self, s: &Slope) -> bool {
        let above = match &self.lower {
            Bound::Included(a) => s >= a,
            Bound::Excluded(a) => s > a,
            Bound::Unbounded => true,
        };
        let below = match &self.upper {
            Bound::Included(b) => s <= b,
            Bound::Excluded(b) => s < b,
            Bound::Unbounded => true,
        };
        above && below
    }
}

/// `-sum_{mu-bar(v) in I} N_v c_v`, the image of `eps-bar(C_I)` as a
/// u-free sharp-cone element.
pub fn epsilon_from_n(
    g: &GeometryData,
    n: &NTable,
    interval: &SlopeInterval,
    window: TruncationWindow,
) -> Result<TorusElement> {
    let cone = ConeSpec::sharp(window);
    let mut terms = Vec::new();
    for (k, value) in &n.entries {
        let v = k.with_rank(0, &vec![0; g.divisor_rank()]);
        if !cone.in_window(g, &v) || !interval.contains(&slope_mubar(g, &v)?) {
            continue;
        }
        terms.push((v, -value));
    }
    TorusElement::from_rational_terms(g, cone, terms)
}

/// The product `prod_{mu-bar in I} exp(eps-bar(C_mu) / (u^2 - 1))` taken in
/// decreasing slope order, in the quantum torus. Its `regular_log` is
/// `epsilon_from_n` of the whole interval.
pub fn slope_ordered_product(
    g: &GeometryData,
    n: &NTable,
    interval: &SlopeInterval,
    window: TruncationWindow,
) -> Result<TorusElement> {
    let cone = ConeSpec::sharp(window);
    let mut slopes = Vec::new();
    for k in n.entries.keys() {
        let v = k.with_rank(0, &vec![0; g.divisor_rank()]);
        if cone.in_window(g, &v) {
            let s = slope_mubar(g, &v)?;
            if interval.contains(&s) {
                slopes.push(s);
            }
        }
    }
    slopes.sort();
    slopes.dedup();
    let mut product = TorusElement::one(g, cone)?;
    for s in slopes.into_iter().rev() {
        let eps = epsilon_from_n(g, n, &SlopeInterval::point(s), window)?;
        product = star(g, &product, &exp(g, &eps.div_u2m1())?)?;
    }
    Ok(product)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    DT,
    PT,
    L,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::DT => "DT",
            Label::PT => "PT",
            Label::L => "L",
        })
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DT" => Ok(Label::DT),
            "PT" => Ok(Label::PT),
            "L" => Ok(Label::L),
            _ => Err(Error::Parse(format!("unknown invariant label {s:?}"))),
        }
    }
}

/// A table `X(r, D, -beta, -n)` at fixed coprime `(r, D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantSeries {
    label: Label,
    r: i64,
    d: Vec<i64>,
    window: TruncationWindow,
    values: BTreeMap<ChargeKey, Rat>,
}

impl InvariantSeries {
    /// Checks the coprime condition and that every key lies in the shifted
    /// cone window. Zero values are dropped.
    pub fn new(
        g: &GeometryData,
        label: Label,
        r: i64,
        d: Vec<i64>,
        window: TruncationWindow,
        values: BTreeMap<ChargeKey, Rat>,
    ) -> Result<Self> {
        window.validate()?;
        let cone = ConeSpec::shifted(g, r, d.clone(), window)?;
        let mut kept = BTreeMap::new();
        for (k, v) in values {
            let vec = k.with_rank(r, &d);
            g.check_vector(&vec)?;
            if !cone.in_window(g, &vec) {
                return invalid(format!("{label} entry {k} is outside the cone window"));
            }
            if !v.is_zero() {
                kept.insert(k, v);
            }
        }
        Ok(Self { label, r, d, window, values: kept })
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn rank(&self) -> i64 {
        self.r
    }

    pub fn divisor(&self) -> &[i64] {
        &self.d
    }

    pub fn window(&self) -> TruncationWindow {
        self.window
    }

    pub fn values(&self) -> &BTreeMap<ChargeKey, Rat> {
        &self.values
    }

    pub fn get(&self, k: &ChargeKey) -> Rat {
        self.values.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn cone(&self, g: &GeometryData) -> Result<ConeSpec> {
        ConeSpec::shifted(g, self.r, self.d.clone(), self.window)
    }

    fn with_window(&self, window: TruncationWindow) -> Self {
        Self { window, ..self.clone() }
    }

    fn relabel(&self, label: Label, values: BTreeMap<ChargeKey, Rat>) -> Self {
        Self { label, r: self.r, d: self.d.clone(), window: self.window, values }
    }

    /// `-sum X(v) c_v`.
    pub fn to_module_element(&self, g: &GeometryData) -> Result<TorusElement> {
        let cone = self.cone(g)?;
        TorusElement::from_rational_terms(
            g,
            cone,
            self.values.iter().map(|(k, v)| (k.with_rank(self.r, &self.d), -v)),
        )
    }

    /// Reads `X(v)` back from `-sum X(v) c_v`.
    pub fn from_module_element(&self, label: Label, x: &TorusElement) -> Result<Self> {
        let values = x
            .rational_terms()?
            .into_iter()
            .map(|(v, c)| (ChargeKey::of_vector(&v), -c))
            .collect();
        Ok(self.relabel(label, values))
    }

    pub fn as_charge_series(&self, g: &GeometryData) -> ChargeSeries {
        ChargeSeries::from_terms(SeriesBounds::new(g, &self.window), self.values.clone())
    }

    /// The `beta` slice as a map `6n -> value`.
    pub fn slice(&self, two_beta: &[i64]) -> BTreeMap<i64, Rat> {
        self.values
            .iter()
            .filter(|(k, _)| k.two_beta == two_beta)
            .map(|(k, v)| (k.six_n, v.clone()))
            .collect()
    }

    /// The distinct `2 beta` values present.
    pub fn betas(&self) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = self.values.keys().map(|k| k.two_beta.clone()).collect();
        out.dedup();
        out
    }
}

/// Both routes of a series transform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualPath {
    pub commutative: InvariantSeries,
    pub adjoint: InvariantSeries,
}

impl DualPath {
    pub fn agree(&self) -> bool {
        self.commutative == self.adjoint
    }

    pub fn into_checked(self, what: &str) -> Result<InvariantSeries> {
        if self.agree() {
            Ok(self.commutative)
        } else {
            let diff = first_difference(&self.commutative, &self.adjoint);
            Err(Error::Internal(format!(
                "{what}: commutative and adjoint paths disagree at {diff}"
            )))
        }
    }
}

fn first_difference(a: &InvariantSeries, b: &InvariantSeries) -> String {
    let keys: std::collections::BTreeSet<_> = a.values.keys().chain(b.values.keys()).collect();
    for k in keys {
        let (x, y) = (a.get(k), b.get(k));
        if x != y {
            return format!("{k}: {x} vs {y}");
        }
    }
    "no key".into()
}

fn check_label(s: &InvariantSeries, expected: Label) -> Result<()> {
    if s.label != expected {
        return invalid(format!("expected a {expected} table, got {}", s.label));
    }
    Ok(())
}

/// Multiplies every `beta` slice by a univariate series in `q`.
fn times_q_series(g: &GeometryData, s: &InvariantSeries, factor: &QSeries) -> BTreeMap<ChargeKey, Rat> {
    let bounds = SeriesBounds::new(g, &kernel_window(g, s));
    let factor = ChargeSeries::from_terms(
        bounds,
        factor
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| (ChargeKey::new(vec![0; g.curve_rank()], 6 * k as i64), c.clone())),
    );
    s.as_charge_series(g).mul(&factor).into_terms()
}

/// The window whose sharp part reaches every point of `s.window` from the
/// lowest `w . 2beta` and `6n` present in `s`, used for the kernels.
fn kernel_window(g: &GeometryData, s: &InvariantSeries) -> TruncationWindow {
    let w = s.window;
    let low_wb = s.values.keys().map(|k| g.omega_two_beta(&k.two_beta)).min().unwrap_or(0).min(0);
    let low_n = s.values.keys().map(|k| k.six_n).min().unwrap_or(0).min(0);
    TruncationWindow {
        max_omega_two_beta: w.max_omega_two_beta - low_wb,
        max_six_n: w.max_six_n - low_n,
        min_six_n: w.min_six_n,
    }
}

fn q_degree(g: &GeometryData, s: &InvariantSeries) -> usize {
    (kernel_window(g, s).max_six_n.max(0) / 6) as usize
}

/// `exp(Ad eps)` applied to a module element, run in the kernel window
/// and restricted back.
fn adjoint_in_kernel_window(
    g: &GeometryData,
    s: &InvariantSeries,
    n: &NTable,
    interval: &SlopeInterval,
    negate: bool,
    label: Label,
) -> Result<InvariantSeries> {
    let wide = kernel_window(g, s);
    let mut eps = epsilon_from_n(g, n, interval, wide)?;
    if negate {
        eps = eps.neg();
    }
    let x = s.with_window(wide).to_module_element(g)?;
    let y = adjoint_exp(g, &eps, &x)?.restrict(g, s.window)?;
    s.from_module_element(label, &y)
}

/// Both routes from PT to DT: the MacMahon factor `M((-1)^r q)^{r e}` and
/// the adjoint exponential of `eps-bar(C_infinity)`.
pub fn dt_from_pt_paths(g: &GeometryData, pt: &InvariantSeries) -> Result<DualPath> {
    check_label(pt, Label::PT)?;
    let qdeg = q_degree(g, pt);
    let factor = macmahon(g.euler_number(), pt.r, qdeg);
    let commutative = pt.relabel(Label::DT, times_q_series(g, pt, &factor));

    let nzero = n_degree_zero(g.euler_number(), qdeg, g.curve_rank());
    let adjoint = adjoint_in_kernel_window(g, pt, &nzero, &SlopeInterval::infinity(), false, Label::DT)?;
    Ok(DualPath { commutative, adjoint })
}

pub fn dt_from_pt(g: &GeometryData, pt: &InvariantSeries) -> Result<InvariantSeries> {
    dt_from_pt_paths(g, pt)?.into_checked("dt_from_pt")
}

/// Both routes from DT to PT: division by the MacMahon factor and the
/// adjoint exponential of `-eps-bar(C_infinity)`.
pub fn pt_from_dt_paths(g: &GeometryData, dt: &InvariantSeries) -> Result<DualPath> {
    check_label(dt, Label::DT)?;
    let qdeg = q_degree(g, dt);
    let factor = macmahon(g.euler_number(), dt.r, qdeg).inverse()?;
    let commutative = dt.relabel(Label::PT, times_q_series(g, dt, &factor));

    let nzero = n_degree_zero(g.euler_number(), qdeg, g.curve_rank());
    let adjoint = adjoint_in_kernel_window(g, dt, &nzero, &SlopeInterval::infinity(), true, Label::PT)?;
    Ok(DualPath { commutative, adjoint })
}

pub fn pt_from_dt(g: &GeometryData, dt: &InvariantSeries) -> Result<InvariantSeries> {
    pt_from_dt_paths(g, dt)?.into_checked("pt_from_dt")
}

/// `sum_{n >= 0, beta > 0} (-1)^{rn + D beta - 1} (rn - D beta) N_{n,beta} q^n t^beta`,
/// truncated to the upper bounds of `window`.
pub fn kernel_exponent(
    g: &GeometryData,
    r: i64,
    d: &[i64],
    n: &NTable,
    window: &TruncationWindow,
) -> Result<ChargeSeries> {
    let mut s = ChargeSeries::zero(SeriesBounds::new(g, window));
    for (k, value) in &n.entries {
        if k.two_beta.iter().all(|&b| b == 0) {
            continue;
        }
        let d_two_beta = g.d_dot_two_beta(d, &k.two_beta);
        if d_two_beta % 2 != 0 {
            return invalid(format!("D.beta = {d_two_beta}/2 is not an integer at {k}"));
        }
        let weight = i128::from(r) * i128::from(k.six_n / 6) - d_two_beta / 2;
        if weight == 0 {
            continue;
        }
        // (-1)^{rn + D beta - 1} has the parity of weight + 1
        let signed = if weight.is_odd() { weight } else { -weight };
        s.insert(k.clone(), value * Rat::from_integer(BigInt::from(signed)));
    }
    Ok(s)
}

/// `PT = L * exp(kernel_exponent)` as commutative `(q, t)` series.
pub fn pt_from_l(g: &GeometryData, l: &InvariantSeries, n: &NTable) -> Result<InvariantSeries> {
    check_label(l, Label::L)?;
    let kernel = kernel_exponent(g, l.r, &l.d, n, &kernel_window(g, l))?.exp(g.curve_rank())?;
    Ok(l.relabel(Label::PT, l.as_charge_series(g).mul(&kernel).into_terms()))
}

/// `PT` from `L` through `exp(Ad eps-bar(C_[0, infinity)))` in the torus.
pub fn pt_from_l_adjoint(g: &GeometryData, l: &InvariantSeries, n: &NTable) -> Result<InvariantSeries> {
    check_label(l, Label::L)?;
    adjoint_in_kernel_window(g, l, n, &SlopeInterval::finite_nonnegative(), false, Label::PT)
}

/// Result of dividing out the PT/L kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LFromPt {
    pub series: InvariantSeries,
    pub warnings: Vec<String>,
}

/// `L = PT * exp(-kernel_exponent)`.
///
/// Each `beta` slice of `L` should be a Laurent polynomial. A slice that
/// still has nonzero coefficients in the top quarter of the `6n` range is
/// reported in `warnings`, since the window cannot show it terminates.
pub fn l_from_pt(g: &GeometryData, pt: &InvariantSeries, n: &NTable) -> Result<LFromPt> {
    check_label(pt, Label::PT)?;
    let inverse_kernel = kernel_exponent(g, pt.r, &pt.d, n, &kernel_window(g, pt))?
        .scale(&rat(-1))
        .exp(g.curve_rank())?;
    let series = pt.relabel(Label::L, pt.as_charge_series(g).mul(&inverse_kernel).into_terms());
    let w = series.window;
    let guard = (w.max_six_n - w.min_six_n) / 4;
    let mut warnings = Vec::new();
    for beta in series.betas() {
        let slice = series.slice(&beta);
        if let Some((&top, _)) = slice.last_key_value() {
            if guard > 0 && top > w.max_six_n - guard {
                warnings.push(format!(
                    "L slice at 2beta={beta:?} is nonzero up to 6n={top}, within the top quarter of the window; \
                     it may not be a Laurent polynomial"
                ));
            }
        }
    }
    Ok(LFromPt { series, warnings })
}
