//! The Chern-character lattice of a Calabi-Yau 3-fold and its cones.
//!
//! A lattice point `(r, D, -beta, -n)` is stored integrally as
//! `(r, D, 2 beta, 6 n)`; `beta` and `n` are recovered as exact rationals on
//! demand. Every pairing is computed in integers scaled by 12 and only then
//! turned into a rational, so nothing here ever touches floating point.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rational::{ratio, Rat};

/// Numerical topology of the threefold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometryData {
    euler_number: i64,
    divisor_rank: usize,
    curve_rank: usize,
    triple_intersection: Vec<Vec<Vec<i64>>>,
    divisor_curve_pairing: Vec<Vec<i64>>,
    omega: Vec<i64>,
    c2_pairing: Vec<i64>,
    // caches
    omega_cubed: i64,
    omega_curve: Vec<i64>,
    omega_squared_divisor: Vec<i64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GeometryDocument {
    euler_number: i64,
    divisor_rank: usize,
    curve_rank: usize,
    triple_intersection: Vec<Vec<Vec<i64>>>,
    divisor_curve_pairing: Vec<Vec<i64>>,
    omega: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c2_pairing: Option<Vec<i64>>,
}

impl GeometryData {
    /// Validates and builds the geometry.
    ///
    /// Beyond the shape checks this requires `T` to be fully symmetric,
    /// `w^3 > 0`, and `w . C_j > 0` for every basis curve `C_j`. The last
    /// condition makes basis-effective curve classes have positive degree,
    /// which is what keeps truncation windows finite.
    pub fn new(
        euler_number: i64,
        triple_intersection: Vec<Vec<Vec<i64>>>,
        divisor_curve_pairing: Vec<Vec<i64>>,
        omega: Vec<i64>,
        c2_pairing: Option<Vec<i64>>,
    ) -> Result<Self> {
        let p = omega.len();
        if p == 0 {
            return invalid("divisor_rank must be positive");
        }
        check_len("triple_intersection rows", p, triple_intersection.len())?;
        for plane in &triple_intersection {
            check_len("triple_intersection columns", p, plane.len())?;
            for row in plane {
                check_len("triple_intersection entries", p, row.len())?;
            }
        }
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    let t = triple_intersection[i][j][k];
                    let perms = [
                        triple_intersection[i][k][j],
                        triple_intersection[j][i][k],
                        triple_intersection[j][k][i],
                        triple_intersection[k][i][j],
                        triple_intersection[k][j][i],
                    ];
                    if perms.iter().any(|&x| x != t) {
                        return invalid(format!(
                            "triple_intersection is not symmetric at ({i},{j},{k})"
                        ));
                    }
                }
            }
        }
        check_len("divisor_curve_pairing rows", p, divisor_curve_pairing.len())?;
        let c = divisor_curve_pairing[0].len();
        if c == 0 {
            return invalid("curve_rank must be positive");
        }
        for row in &divisor_curve_pairing {
            check_len("divisor_curve_pairing columns", c, row.len())?;
        }
        let c2_pairing = c2_pairing.unwrap_or_else(|| vec![0; p]);
        check_len("c2_pairing entries", p, c2_pairing.len())?;

        let mut omega_squared_divisor = vec![0i64; p];
        for (i, slot) in omega_squared_divisor.iter_mut().enumerate() {
            let mut acc: i128 = 0;
            for j in 0..p {
                for k in 0..p {
                    acc += i128::from(triple_intersection[i][j][k])
                        * i128::from(omega[j])
                        * i128::from(omega[k]);
                }
            }
            *slot = narrow(acc)?;
        }
        let omega_cubed = narrow(
            omega
                .iter()
                .zip(&omega_squared_divisor)
                .map(|(&w, &s)| i128::from(w) * i128::from(s))
                .sum(),
        )?;
        if omega_cubed <= 0 {
            return invalid(format!("w^3 = {omega_cubed} must be positive for an ample class"));
        }
        let mut omega_curve = vec![0i64; c];
        for (j, slot) in omega_curve.iter_mut().enumerate() {
            let acc: i128 = (0..p)
                .map(|i| i128::from(omega[i]) * i128::from(divisor_curve_pairing[i][j]))
                .sum();
            *slot = narrow(acc)?;
            if *slot <= 0 {
                return invalid(format!(
                    "w . C_{j} = {slot} must be positive for every basis curve class"
                ));
            }
        }
        Ok(Self {
            euler_number,
            divisor_rank: p,
            curve_rank: c,
            triple_intersection,
            divisor_curve_pairing,
            omega,
            c2_pairing,
            omega_cubed,
            omega_curve,
            omega_squared_divisor,
        })
    }

    /// One divisor, one curve class: `T = [t]`, `P = [pairing]`, `w = [1]`.
    pub fn single_class(euler_number: i64, t: i64, pairing: i64) -> Result<Self> {
        Self::new(euler_number, vec![vec![vec![t]]], vec![vec![pairing]], vec![1], None)
    }

    /// Parses the JSON geometry document. Floats are rejected by the integer
    /// field types.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: GeometryDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        check_len("divisor_rank", doc.divisor_rank, doc.omega.len())?;
        let c = doc.divisor_curve_pairing.first().map_or(0, Vec::len);
        check_len("curve_rank", doc.curve_rank, c)?;
        Self::new(
            doc.euler_number,
            doc.triple_intersection,
            doc.divisor_curve_pairing,
            doc.omega,
            doc.c2_pairing,
        )
    }

    pub fn to_json_string(&self) -> String {
        let doc = GeometryDocument {
            euler_number: self.euler_number,
            divisor_rank: self.divisor_rank,
            curve_rank: self.curve_rank,
            triple_intersection: self.triple_intersection.clone(),
            divisor_curve_pairing: self.divisor_curve_pairing.clone(),
            omega: self.omega.clone(),
            c2_pairing: Some(self.c2_pairing.clone()),
        };
        serde_json::to_string_pretty(&doc).expect("geometry serializes")
    }

    pub fn euler_number(&self) -> i64 {
        self.euler_number
    }

    pub fn divisor_rank(&self) -> usize {
        self.divisor_rank
    }

    pub fn curve_rank(&self) -> usize {
        self.curve_rank
    }

    pub fn omega(&self) -> &[i64] {
        &self.omega
    }

    pub fn omega_cubed(&self) -> i64 {
        self.omega_cubed
    }

    /// `w . C_j` for each basis curve class.
    pub fn omega_curve(&self) -> &[i64] {
        &self.omega_curve
    }

    /// `D . w^2`.
    pub fn d_omega2(&self, d: &[i64]) -> i64 {
        d.iter()
            .zip(&self.omega_squared_divisor)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    /// `w . (2 beta)`.
    pub fn omega_two_beta(&self, two_beta: &[i64]) -> i64 {
        two_beta.iter().zip(&self.omega_curve).map(|(&a, &b)| a * b).sum()
    }

    /// `D . (2 beta)` through the divisor-curve pairing.
    pub fn d_dot_two_beta(&self, d: &[i64], two_beta: &[i64]) -> i128 {
        let mut acc = 0i128;
        for (i, &di) in d.iter().enumerate() {
            if di == 0 {
                continue;
            }
            for (j, &bj) in two_beta.iter().enumerate() {
                acc += i128::from(di) * i128::from(self.divisor_curve_pairing[i][j]) * i128::from(bj);
            }
        }
        acc
    }

    /// `c2 . D`.
    pub fn c2_dot(&self, d: &[i64]) -> i128 {
        d.iter()
            .zip(&self.c2_pairing)
            .map(|(&a, &b)| i128::from(a) * i128::from(b))
            .sum()
    }

    pub fn check_vector(&self, v: &ChernVector) -> Result<()> {
        check_len("divisor components", self.divisor_rank, v.d.len())?;
        check_len("curve components", self.curve_rank, v.two_beta.len())
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}

fn narrow(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::InvalidInput("intersection number overflows i64".into()))
}

/// A lattice point `(r, D, -beta, -n)` stored as `(r, D, 2 beta, 6 n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChernVector {
    pub r: i64,
    pub d: Vec<i64>,
    pub two_beta: Vec<i64>,
    pub six_n: i64,
}

impl ChernVector {
    pub fn new(r: i64, d: Vec<i64>, two_beta: Vec<i64>, six_n: i64) -> Self {
        Self { r, d, two_beta, six_n }
    }

    pub fn zero(g: &GeometryData) -> Self {
        Self::new(0, vec![0; g.divisor_rank], vec![0; g.curve_rank], 0)
    }

    /// A class `(0, 0, -beta, -n)` of dimension at most one.
    pub fn curve(divisor_rank: usize, two_beta: Vec<i64>, six_n: i64) -> Self {
        Self::new(0, vec![0; divisor_rank], two_beta, six_n)
    }

    pub fn is_zero(&self) -> bool {
        self.r == 0
            && self.six_n == 0
            && self.d.iter().all(|&x| x == 0)
            && self.two_beta.iter().all(|&x| x == 0)
    }

    /// True when `r = 0` and `D = 0`.
    pub fn is_curve_class(&self) -> bool {
        self.r == 0 && self.d.iter().all(|&x| x == 0)
    }

    pub fn beta(&self) -> Vec<Rat> {
        self.two_beta.iter().map(|&b| ratio(b, 2)).collect()
    }

    pub fn n(&self) -> Rat {
        ratio(self.six_n, 6)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        Self {
            r: f(self.r, other.r),
            d: self.d.iter().zip(&other.d).map(|(&a, &b)| f(a, b)).collect(),
            two_beta: self
                .two_beta
                .iter()
                .zip(&other.two_beta)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            six_n: f(self.six_n, other.six_n),
        }
    }
}

impl Add for &ChernVector {
    type Output = ChernVector;
    fn add(self, rhs: Self) -> ChernVector {
        debug_assert_eq!(self.d.len(), rhs.d.len());
        debug_assert_eq!(self.two_beta.len(), rhs.two_beta.len());
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ChernVector {
    type Output = ChernVector;
    fn sub(self, rhs: Self) -> ChernVector {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &ChernVector {
    type Output = ChernVector;
    fn neg(self) -> ChernVector {
        ChernVector {
            r: -self.r,
            d: self.d.iter().map(|x| -x).collect(),
            two_beta: self.two_beta.iter().map(|x| -x).collect(),
            six_n: -self.six_n,
        }
    }
}

impl fmt::Display for ChernVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(r={}, D={:?}, 2beta={:?}, 6n={})",
            self.r, self.d, self.two_beta, self.six_n
        )
    }
}

/// The retained region of the completed algebras.
///
/// Upper bounds apply to both cones. `min_six_n` stands in for the lower
/// bound on `n` in the shifted cone; curve classes have `n >= 0` regardless.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub max_omega_two_beta: i64,
    pub max_six_n: i64,
    pub min_six_n: i64,
}

impl TruncationWindow {
    pub fn new(max_omega_two_beta: i64, max_six_n: i64) -> Self {
        Self { max_omega_two_beta, max_six_n, min_six_n: 0 }
    }

    pub fn with_min_six_n(mut self, min_six_n: i64) -> Self {
        self.min_six_n = min_six_n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_omega_two_beta < 0 || self.max_six_n < 0 {
            return invalid("window bounds must be non-negative");
        }
        if self.min_six_n > self.max_six_n {
            return invalid("min_six_n exceeds max_six_n");
        }
        Ok(())
    }

    /// True when the window retains no nonzero curve class.
    pub fn is_degenerate(&self) -> bool {
        self.max_omega_two_beta < 2 && self.max_six_n < 6
    }

    fn upper_ok(&self, g: &GeometryData, v: &ChernVector) -> bool {
        g.omega_two_beta(&v.two_beta) <= self.max_omega_two_beta && v.six_n <= self.max_six_n
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeKind {
    /// Classes `(0, 0, -beta, -n)` with `beta >= 0`, `n >= 0`.
    Sharp,
    /// Classes `(r, D, -beta, -n)` for a fixed coprime `(r, D)`.
    ShiftedByRD { r: i64, d: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub window: TruncationWindow,
}

impl ConeSpec {
    pub fn sharp(window: TruncationWindow) -> Self {
        Self { kind: ConeKind::Sharp, window }
    }

    /// Builds the shifted cone, enforcing `r >= 1` and `gcd(r, D.w^2) = 1`.
    pub fn shifted(g: &GeometryData, r: i64, d: Vec<i64>, window: TruncationWindow) -> Result<Self> {
        check_len("divisor components", g.divisor_rank, d.len())?;
        if r < 1 {
            return invalid(format!("rank r = {r} must be at least 1"));
        }
        let d_omega2 = g.d_omega2(&d);
        if r.gcd(&d_omega2) != 1 {
            return Err(Error::NotCoprime { r, d_omega2 });
        }
        Ok(Self { kind: ConeKind::ShiftedByRD { r, d }, window })
    }

    pub fn is_sharp(&self) -> bool {
        matches!(self.kind, ConeKind::Sharp)
    }

    /// Cone membership together with the window's upper bounds.
    pub fn in_window(&self, g: &GeometryData, v: &ChernVector) -> bool {
        cone_contains(self, g, v) && self.window.upper_ok(g, v)
    }

    pub fn with_window(&self, window: TruncationWindow) -> Self {
        Self { kind: self.kind.clone(), window }
    }
}

/// A slope in `Q u {infinity}`; `Infinite` compares greater than every
/// finite value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slope {
    Finite(Rat),
    Infinite,
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(q) => write!(f, "{q}"),
            Slope::Infinite => f.write_str("inf"),
        }
    }
}

/// `12 * chi(v1, v2)`, exactly, in integers.
pub fn euler_pairing_times12(g: &GeometryData, v1: &ChernVector, v2: &ChernVector) -> i128 {
    let (r1, r2) = (i128::from(v1.r), i128::from(v2.r));
    let (s1, s2) = (i128::from(v1.six_n), i128::from(v2.six_n));
    -2 * r1 * s2 + 2 * s1 * r2 + 6 * g.d_dot_two_beta(&v1.d, &v2.two_beta)
        - 6 * g.d_dot_two_beta(&v2.d, &v1.two_beta)
        + r1 * g.c2_dot(&v2.d)
        - r2 * g.c2_dot(&v1.d)
}

/// The antisymmetrized Riemann-Roch pairing
/// `chi(v, w) = v0 w3 - v1.w2 + v2.w1 - v3 w0 + (v0 c2.w1 - w0 c2.v1) / 12`
/// where `(v0, v1, v2, v3) = (r, D, -beta, -n)`.
pub fn euler_pairing(g: &GeometryData, v1: &ChernVector, v2: &ChernVector) -> Result<Rat> {
    g.check_vector(v1)?;
    g.check_vector(v2)?;
    let twelve = euler_pairing_times12(g, v1, v2);
    Ok(Rat::new(twelve.into(), 12.into()))
}

/// The pairing as an integer, for use as an exponent.
pub(crate) fn integral_pairing(g: &GeometryData, v1: &ChernVector, v2: &ChernVector) -> Result<i64> {
    let twelve = euler_pairing_times12(g, v1, v2);
    if twelve % 12 != 0 {
        return Err(Error::Internal(format!(
            "chi({v1}, {v2}) = {twelve}/12 is not an integer"
        )));
    }
    i64::try_from(twelve / 12).map_err(|_| Error::Internal("pairing overflows i64".into()))
}

/// `D . w^2 / r`, infinite for `r = 0`.
pub fn slope_mu(g: &GeometryData, v: &ChernVector) -> Slope {
    if v.r == 0 {
        Slope::Infinite
    } else {
        Slope::Finite(ratio(g.d_omega2(&v.d), v.r))
    }
}

/// `n / (w . beta)` on curve classes, infinite for zero-dimensional ones.
pub fn slope_mubar(g: &GeometryData, v: &ChernVector) -> Result<Slope> {
    g.check_vector(v)?;
    if !v.is_curve_class() {
        return invalid(format!("slope_mubar needs r = 0 and D = 0, got {v}"));
    }
    let wb = g.omega_two_beta(&v.two_beta);
    match (wb, v.six_n) {
        (0, 0) => invalid(format!("slope_mubar is undefined at {v}")),
        (0, _) => Ok(Slope::Infinite),
        // (6n / 6) / (w.2beta / 2)
        (wb, s) => Ok(Slope::Finite(ratio(s, 3 * wb))),
    }
}

/// True when `v` is a lattice point of a curve class: `beta` integral (so
/// `2 beta` even) and `n` integral (so `6 n` divisible by 6).
fn on_curve_lattice(v: &ChernVector) -> bool {
    v.two_beta.iter().all(|b| b % 2 == 0) && v.six_n % 6 == 0
}

/// Cone membership without the window's upper bounds.
///
/// * `Sharp`: `r = 0`, `D = 0`, `beta` basis-effective or zero, `n >= 0`,
///   with integral `beta` and `n`.
/// * `ShiftedByRD`: matching `(r, D)`, the Bogomolov-type bound
///   `w.beta >= -(D.w^2)^2 / (2 r w^3)` and `6n >= window.min_six_n`.
pub fn cone_contains(spec: &ConeSpec, g: &GeometryData, v: &ChernVector) -> bool {
    if g.check_vector(v).is_err() {
        return false;
    }
    match &spec.kind {
        ConeKind::Sharp => {
            v.is_curve_class()
                && v.two_beta.iter().all(|&b| b >= 0)
                && v.six_n >= 0
                && on_curve_lattice(v)
        }
        ConeKind::ShiftedByRD { r, d } => {
            if v.r != *r || &v.d != d {
                return false;
            }
            let d_omega2 = i128::from(g.d_omega2(d));
            // w.(2 beta) >= -(D w^2)^2 / (r w^3)
            let lhs = i128::from(*r) * i128::from(g.omega_cubed) * i128::from(g.omega_two_beta(&v.two_beta));
            lhs >= -(d_omega2 * d_omega2) && v.six_n >= spec.window.min_six_n
        }
    }
}

/// All curve-lattice points of the sharp cone inside the window, in
/// lexicographic order of the stored integers.
pub fn sharp_window_points(g: &GeometryData, window: &TruncationWindow) -> Vec<ChernVector> {
    let mut betas = Vec::new();
    let mut current = vec![0i64; g.curve_rank];
    collect_betas(g, window.max_omega_two_beta, 0, 0, &mut current, &mut betas);
    betas.sort();
    let mut out = Vec::new();
    for two_beta in betas {
        for six_n in (0..=window.max_six_n).step_by(6) {
            out.push(ChernVector::curve(g.divisor_rank, two_beta.clone(), six_n));
        }
    }
    out
}

fn collect_betas(
    g: &GeometryData,
    budget: i64,
    index: usize,
    used: i64,
    current: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if index == current.len() {
        out.push(current.clone());
        return;
    }
    let weight = g.omega_curve[index];
    let mut b = 0;
    while used + weight * b <= budget {
        current[index] = b;
        collect_betas(g, budget, index + 1, used + weight * b, current, out);
        b += 2;
    }
    current[index] = 0;
}

/// The cone a vector naturally lives in: sharp for curve classes, the
/// shifted cone of its own `(r, D)` otherwise.
pub fn natural_cone(g: &GeometryData, v: &ChernVector, window: TruncationWindow) -> Result<ConeSpec> {
    g.check_vector(v)?;
    if v.is_curve_class() {
        Ok(ConeSpec::sharp(window))
    } else {
        ConeSpec::shifted(g, v.r, v.d.clone(), window)
    }
}

/// All ordered splittings `v = v1 + v2` with `v1` a nonzero curve class and
/// `v2` in the cone of `v`, both inside the window. For a curve class `v`
/// the second part must be nonzero as well.
pub fn enumerate_decompositions(
    g: &GeometryData,
    v: &ChernVector,
    window: &TruncationWindow,
) -> Result<Vec<(ChernVector, ChernVector)>> {
    let cone = natural_cone(g, v, *window)?;
    if !cone.in_window(g, v) {
        return invalid(format!("{v} lies outside its cone window"));
    }
    let mut out = Vec::new();
    for v1 in sharp_window_points(g, window) {
        if v1.is_zero() {
            continue;
        }
        let v2 = v - &v1;
        let keep = if cone.is_sharp() { !v2.is_zero() } else { true };
        if keep && cone.in_window(g, &v2) {
            out.push((v1, v2));
        }
    }
    Ok(out)
}
