//! Rational reconstruction of fixed-`beta` PT slices.
//!
//! A slice `sum_n PT(n) q^n`, with `n` running over sixths, is split into six
//! offset classes by `6n mod 6`. Each class is fitted exactly with
//! Berlekamp–Massey, and the class fits are combined over the least common
//! denominator into `F(q) * G(q^{1/6})` with `F = numerator / denominator`
//! and `G` a Laurent polynomial in `x = q^{1/6}`.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::error::{invalid, Result};
use crate::laurent::LaurentPoly;
use crate::poly::Poly;
use crate::rational::{format_rational, Rat};

/// `sum_{i=0}^{L} c_i a_{n-i} = 0` for `n >= L`, with `c_0 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recurrence {
    order: usize,
    connection: Poly,
}

impl Recurrence {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `C(x) = 1 + c_1 x + ... + c_L x^L`; its degree may be below the order.
    pub fn connection(&self) -> &Poly {
        &self.connection
    }

    /// `r_i` in `a_n = sum_{i=1}^{L} r_i a_{n-i}`.
    pub fn coefficients(&self) -> Vec<Rat> {
        (1..=self.order).map(|i| -self.connection.coeff(i)).collect()
    }

    /// `P / C` with `sum_k a_k x^k = P(x) / C(x)` and `deg P < order`.
    pub fn generating_function(&self, seq: &[Rat]) -> (Poly, Poly) {
        let a = Poly::new(seq.to_vec());
        ((&a * &self.connection).truncate(self.order), self.connection.clone())
    }

    pub fn fits(&self, seq: &[Rat]) -> bool {
        (self.order..seq.len()).all(|n| {
            (0..=self.order)
                .map(|i| self.connection.coeff(i) * &seq[n - i])
                .sum::<Rat>()
                .is_zero()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecurrenceOutcome {
    Found(Recurrence),
    /// The sequence has linear complexity above the order bound.
    NoneFound { max_order: usize },
    /// Too few terms to decide.
    Inconclusive { needed: usize, available: usize },
}

/// Exact Berlekamp–Massey over Q: the shortest recurrence of `seq`.
pub fn berlekamp_massey(seq: &[Rat]) -> Recurrence {
    let mut c = vec![Rat::one()];
    let mut b = vec![Rat::one()];
    let mut order = 0usize;
    let mut shift = 1usize;
    let mut last = Rat::one();
    for n in 0..seq.len() {
        let mut disc = seq[n].clone();
        for i in 1..=order {
            if let Some(ci) = c.get(i) {
                disc += ci * &seq[n - i];
            }
        }
        if disc.is_zero() {
            shift += 1;
            continue;
        }
        let factor = &disc / &last;
        let previous = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, Rat::zero());
        }
        for (i, bi) in b.iter().enumerate() {
            c[i + shift] -= &factor * bi;
        }
        if 2 * order <= n {
            order = n + 1 - order;
            b = previous;
            last = disc;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    Recurrence { order, connection: Poly::new(c) }
}

/// The shortest recurrence of order at most `max_order`.
///
/// A fit of order `L` is accepted only with `2L + 2` terms, two more than
/// Berlekamp–Massey needs to pin it down. Complexity above `max_order` is
/// conclusive once `2 * max_order` terms are seen.
pub fn detect_recurrence(seq: &[Rat], max_order: usize) -> RecurrenceOutcome {
    let rec = berlekamp_massey(seq);
    if rec.order <= max_order {
        let needed = 2 * rec.order + 2;
        if seq.len() >= needed {
            RecurrenceOutcome::Found(rec)
        } else {
            RecurrenceOutcome::Inconclusive { needed, available: seq.len() }
        }
    } else if seq.len() >= 2 * max_order {
        RecurrenceOutcome::NoneFound { max_order }
    } else {
        RecurrenceOutcome::Inconclusive { needed: 2 * max_order, available: seq.len() }
    }
}

/// A fixed-`beta` slice on the window `min_six_n..=max_six_n`; missing
/// entries are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtSlice {
    min_six_n: i64,
    max_six_n: i64,
    values: BTreeMap<i64, Rat>,
}

impl PtSlice {
    pub fn new(min_six_n: i64, max_six_n: i64, values: BTreeMap<i64, Rat>) -> Result<Self> {
        if min_six_n > max_six_n {
            return invalid(format!("empty slice window {min_six_n}..={max_six_n}"));
        }
        if let Some(k) = values.keys().find(|&&k| k < min_six_n || k > max_six_n) {
            return invalid(format!("slice entry at 6n={k} is outside {min_six_n}..={max_six_n}"));
        }
        let values = values.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(Self { min_six_n, max_six_n, values })
    }

    pub fn min_six_n(&self) -> i64 {
        self.min_six_n
    }

    pub fn max_six_n(&self) -> i64 {
        self.max_six_n
    }

    pub fn values(&self) -> &BTreeMap<i64, Rat> {
        &self.values
    }

    pub fn get(&self, six_n: i64) -> Rat {
        self.values.get(&six_n).cloned().unwrap_or_else(Rat::zero)
    }

    /// The entries with `6n` in `lo..=hi`, on that window.
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Self> {
        Self::new(lo, hi, self.values.range(lo..=hi).map(|(k, v)| (*k, v.clone())).collect())
    }

    /// The class `6n = offset mod 6` from its first nonzero entry, or `None`
    /// if it vanishes. Leading zeros would only inflate the fitted order.
    fn class(&self, offset: i64) -> Option<(i64, Vec<Rat>)> {
        let first = self.min_six_n + (offset - self.min_six_n).rem_euclid(6);
        let start = (first..=self.max_six_n).step_by(6).find(|&k| !self.get(k).is_zero())?;
        let seq = (start..=self.max_six_n).step_by(6).map(|k| self.get(k)).collect();
        Some((start, seq))
    }
}

/// `F(q) * G(q^{1/6})` with `F = numerator / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalForm {
    numerator: Poly,
    denominator: Poly,
    laurent: LaurentPoly,
}

impl RationalForm {
    /// Reduces `F` and normalizes the denominator to constant term 1.
    pub fn new(numerator: Poly, denominator: Poly, laurent: LaurentPoly) -> Result<Self> {
        let d0 = denominator.coeff(0);
        if d0.is_zero() {
            return invalid("denominator needs a nonzero constant term");
        }
        if numerator.is_zero() || laurent.is_zero() {
            return Ok(Self::zero());
        }
        let g = numerator.gcd(&denominator);
        let (num, _) = numerator.div_rem(&g).expect("nonzero gcd");
        let (den, _) = denominator.div_rem(&g).expect("nonzero gcd");
        let c = den.coeff(0).recip();
        Ok(Self { numerator: num.scale(&c), denominator: den.scale(&c), laurent })
    }

    /// `F = 0`, `G = 1`.
    pub fn zero() -> Self {
        Self { numerator: Poly::zero(), denominator: Poly::one(), laurent: LaurentPoly::one() }
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    pub fn denominator(&self) -> &Poly {
        &self.denominator
    }

    /// `G`, indexed by powers of `q^{1/6}`.
    pub fn laurent(&self) -> &LaurentPoly {
        &self.laurent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// The coefficient of `q^{six_n / 6}`.
    pub fn coefficient(&self, six_n: i64) -> Rat {
        let Some((lo, _)) = self.laurent.degree_range() else {
            return Rat::zero();
        };
        if self.is_zero() || six_n < lo {
            return Rat::zero();
        }
        let f = self
            .numerator
            .series_div(&self.denominator, ((six_n - lo) / 6 + 1) as usize)
            .expect("denominator constant term is nonzero");
        self.laurent
            .terms()
            .filter(|(t, _)| *t <= six_n && (six_n - t) % 6 == 0)
            .map(|(t, g)| g * &f[((six_n - t) / 6) as usize])
            .sum()
    }

    /// All coefficients with `6n` in `lo..=hi`.
    pub fn expand(&self, lo: i64, hi: i64) -> BTreeMap<i64, Rat> {
        let mut out = BTreeMap::new();
        let Some((glo, _)) = self.laurent.degree_range() else {
            return out;
        };
        if self.is_zero() || hi < glo {
            return out;
        }
        let f = self
            .numerator
            .series_div(&self.denominator, ((hi - glo) / 6 + 1) as usize)
            .expect("denominator constant term is nonzero");
        for (t, g) in self.laurent.terms() {
            for (k, fk) in f.iter().enumerate() {
                let s = t + 6 * k as i64;
                if s > hi {
                    break;
                }
                if s >= lo && !fk.is_zero() {
                    *out.entry(s).or_insert_with(Rat::zero) += g * fk;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// `Some((sign, k))` when `R(1/x) = sign * x^k * R(x)` for the full
    /// function `R(x) = F(x^6) G(x)`, else `None`.
    pub fn inversion_symmetry(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            return Some((1, 0));
        }
        let top = self.numerator.degree().unwrap().max(self.denominator.degree().unwrap()) as i64;
        // clear the x^{-6} denominators by x^{6 top} on both sides
        let n = sixth_poly(&self.numerator);
        let d = sixth_poly(&self.denominator);
        let lhs = &(&reflect(&n).shift(6 * top) * &reflect(&self.laurent)) * &d;
        let rhs = &(&n * &self.laurent) * &reflect(&d).shift(6 * top);
        let (l0, _) = lhs.degree_range()?;
        let (r0, _) = rhs.degree_range()?;
        let k = l0 - r0;
        let shifted = rhs.shift(k);
        if lhs == shifted {
            Some((1, k))
        } else if lhs == -&shifted {
            Some((-1, k))
        } else {
            None
        }
    }

    /// As [`Self::inversion_symmetry`] for `F` alone, in powers of `q^{1/6}`.
    pub fn f_inversion_symmetry(&self) -> Option<(i64, i64)> {
        Self { laurent: LaurentPoly::one(), ..self.clone() }.inversion_symmetry()
    }

    /// `R(1/x) = R(x)` exactly.
    pub fn is_inversion_invariant(&self) -> bool {
        self.inversion_symmetry() == Some((1, 0))
    }

    /// `F(1/q) = F(q)` exactly.
    pub fn is_f_inversion_invariant(&self) -> bool {
        self.f_inversion_symmetry() == Some((1, 0))
    }
}

fn sixth_poly(p: &Poly) -> LaurentPoly {
    LaurentPoly::from_terms(p.coeffs().iter().enumerate().map(|(k, c)| (6 * k as i64, c.clone())))
}

fn reflect(p: &LaurentPoly) -> LaurentPoly {
    LaurentPoly::from_terms(p.terms().map(|(k, c)| (-k, c.clone())))
}

impl fmt::Display for RationalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({}) * [", self.numerator, self.denominator)?;
        for (i, (k, c)) in self.laurent.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*q^({k}/6)", format_rational(c))?;
        }
        f.write_str("]")
    }
}

/// Why a class could not be fitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitFailure {
    /// The residue of `6n` mod 6.
    pub offset: i64,
    pub outcome: RecurrenceOutcome,
}

impl FitFailure {
    /// True when more data could change the answer.
    pub fn is_inconclusive(&self) -> bool {
        matches!(self.outcome, RecurrenceOutcome::Inconclusive { .. })
    }
}

impl fmt::Display for FitFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            RecurrenceOutcome::Found(r) => write!(f, "offset {}: fitted order {}", self.offset, r.order),
            RecurrenceOutcome::NoneFound { max_order } => {
                write!(f, "offset {}: no recurrence of order <= {max_order}", self.offset)
            }
            RecurrenceOutcome::Inconclusive { needed, available } => write!(
                f,
                "offset {}: inconclusive, {available} terms available but {needed} needed",
                self.offset
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reconstruction {
    Rational(RationalForm),
    Failed(Vec<FitFailure>),
}

impl Reconstruction {
    pub fn form(&self) -> Option<&RationalForm> {
        match self {
            Reconstruction::Rational(f) => Some(f),
            Reconstruction::Failed(_) => None,
        }
    }
}

/// Fits each offset class with recurrences of order at most `max_order`
/// and combines them over the least common denominator.
pub fn reconstruct(slice: &PtSlice, max_order: usize) -> Reconstruction {
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for offset in 0..6 {
        let Some((start, seq)) = slice.class(offset) else {
            continue;
        };
        match detect_recurrence(&seq, max_order) {
            RecurrenceOutcome::Found(rec) => {
                let (p, c) = rec.generating_function(&seq);
                fits.push((start, p, c));
            }
            outcome => failures.push(FitFailure { offset, outcome }),
        }
    }
    if !failures.is_empty() {
        return Reconstruction::Failed(failures);
    }
    if fits.is_empty() {
        return Reconstruction::Rational(RationalForm::zero());
    }
    let denominator = fits.iter().fold(Poly::one(), |acc, (_, _, c)| acc.lcm(c)).unit_constant();
    let mut laurent = LaurentPoly::zero();
    for (start, p, c) in &fits {
        let (cofactor, _) = denominator.div_rem(c).expect("connection polynomial is nonzero");
        let g = sixth_poly(&(p * &cofactor)).shift(*start);
        laurent = &laurent + &g;
    }
    let form = RationalForm::new(Poly::one(), denominator, laurent).expect("denominator is normalized");
    Reconstruction::Rational(form)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub six_n: i64,
    pub expected: Rat,
    pub predicted: Rat,
}

/// Checks every held-out coefficient; the first disagreement is returned.
pub fn verify_prediction(form: &RationalForm, heldout: &PtSlice) -> std::result::Result<(), Mismatch> {
    let predicted = form.expand(heldout.min_six_n, heldout.max_six_n);
    for six_n in heldout.min_six_n..=heldout.max_six_n {
        let p = predicted.get(&six_n).cloned().unwrap_or_else(Rat::zero);
        let e = heldout.get(six_n);
        if p != e {
            return Err(Mismatch { six_n, expected: e, predicted: p });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat(x)).collect()
    }

    fn found(seq: &[Rat], max: usize) -> Recurrence {
        match detect_recurrence(seq, max) {
            RecurrenceOutcome::Found(r) => r,
            other => panic!("expected a recurrence, got {other:?}"),
        }
    }

    #[test]
    fn geometric_and_constant() {
        let r = found(&ints(&[1, 2, 4, 8, 16]), 3);
        assert_eq!(r.order(), 1);
        assert_eq!(r.coefficients(), vec![rat(2)]);
        let (p, c) = r.generating_function(&ints(&[1, 2, 4, 8, 16]));
        assert_eq!((p, c), (Poly::one(), Poly::new(ints(&[1, -2]))));
        let k = found(&ints(&[7, 7, 7, 7]), 2);
        assert_eq!(k.coefficients(), vec![rat(1)]);
    }

    #[test]
    fn fibonacci_minimality() {
        let fib = ints(&[0, 1, 1, 2, 3, 5, 8, 13, 21, 34]);
        let r = found(&fib, 4);
        assert_eq!(r.order(), 2);
        assert!(r.fits(&fib));
        assert_eq!(detect_recurrence(&fib, 1), RecurrenceOutcome::NoneFound { max_order: 1 });
    }

    #[test]
    fn short_data_is_inconclusive() {
        assert!(matches!(
            detect_recurrence(&ints(&[0, 1, 1, 2, 3]), 4),
            RecurrenceOutcome::Inconclusive { .. }
        ));
        assert!(matches!(detect_recurrence(&ints(&[1, 2, 4]), 1), RecurrenceOutcome::Inconclusive { .. }));
    }

    #[test]
    fn periodic_sequence_divides_one_minus_q_p() {
        let seq: Vec<Rat> = (0..20).map(|n| [ratio(1, 2), rat(-3), rat(0)][n % 3].clone()).collect();
        let r = found(&seq, 6);
        let one_minus = Poly::new(ints(&[1, 0, 0, -1]));
        let (_, rem) = one_minus.div_rem(r.connection()).unwrap();
        assert!(rem.is_zero());
    }

    fn slice(lo: i64, hi: i64, v: &[(i64, Rat)]) -> PtSlice {
        PtSlice::new(lo, hi, v.iter().cloned().collect()).unwrap()
    }

    #[test]
    fn zero_and_laurent_slices() {
        let zero = reconstruct(&slice(-6, 30, &[]), 4);
        assert_eq!(zero.form(), Some(&RationalForm::zero()));
        let lp = slice(-12, 60, &[(-7, rat(2)), (0, rat(1)), (5, ratio(-1, 3))]);
        let form = reconstruct(&lp, 4).form().cloned().unwrap();
        assert_eq!(form.denominator(), &Poly::one());
        assert_eq!(form.numerator(), &Poly::one());
        assert_eq!(form.laurent(), &LaurentPoly::from_terms(lp.values().clone()));
    }

    #[test]
    fn mixed_classes_share_denominator() {
        // q^{1/6}/(1-q) + 2/(1-q)^2, expanded directly
        let mut v = BTreeMap::new();
        for k in 0..12i64 {
            v.insert(6 * k + 1, rat(1));
            v.insert(6 * k, rat(2 * (k + 1)));
        }
        let s = PtSlice::new(0, 71, v).unwrap();
        let fit = s.restrict(0, 41).unwrap();
        let form = reconstruct(&fit, 4).form().cloned().unwrap();
        assert_eq!(form.denominator(), &Poly::new(ints(&[1, -2, 1])));
        assert_eq!(verify_prediction(&form, &s.restrict(42, 71).unwrap()), Ok(()));
        assert_eq!(form.expand(0, 71), s.values().clone());
        assert_eq!(form.coefficient(13), rat(1));
        assert_eq!(form.coefficient(12), rat(6));
    }

    #[test]
    fn corrupt_heldout_is_reported() {
        let form = RationalForm::new(Poly::one(), Poly::new(ints(&[1, -1])), LaurentPoly::one()).unwrap();
        let bad = slice(36, 48, &[(36, rat(1)), (42, rat(5)), (48, rat(1))]);
        let m = verify_prediction(&form, &bad).unwrap_err();
        assert_eq!((m.six_n, m.expected, m.predicted), (42, rat(5), rat(1)));
        assert_eq!(verify_prediction(&form, &slice(36, 36, &[(36, rat(1))])), Ok(()));
    }

    #[test]
    fn symmetry_detection() {
        let geo = RationalForm::new(Poly::one(), Poly::new(ints(&[1, -1])), LaurentPoly::one()).unwrap();
        // 1/(1-1/q) = -q/(1-q)
        assert_eq!(geo.inversion_symmetry(), Some((-1, 6)));
        let sq = RationalForm::new(Poly::one(), Poly::new(ints(&[1, -2, 1])), LaurentPoly::one()).unwrap();
        assert_eq!(sq.inversion_symmetry(), Some((1, 12)));
        let two = RationalForm::new(Poly::one(), Poly::new(ints(&[1, -2])), LaurentPoly::one()).unwrap();
        assert_eq!(two.inversion_symmetry(), None);
        assert!(!two.is_f_inversion_invariant());
        assert!(!geo.is_f_inversion_invariant());
        let lopsided = RationalForm::new(
            Poly::one(),
            Poly::new(ints(&[1, -1])),
            LaurentPoly::from_terms([(0, rat(1)), (1, rat(3))]),
        )
        .unwrap();
        assert_eq!(lopsided.inversion_symmetry(), None);
        assert_eq!(lopsided.f_inversion_symmetry(), Some((-1, 6)));
        // q / (1 + q)^2 is invariant outright
        let rigid = RationalForm::new(Poly::one(), Poly::new(ints(&[1, 2, 1])), LaurentPoly::monomial(6, rat(1))).unwrap();
        assert!(rigid.is_inversion_invariant());
    }

    #[test]
    fn form_is_reduced() {
        let f = RationalForm::new(Poly::new(ints(&[1, -1])), Poly::new(ints(&[2, -4, 2])), LaurentPoly::one()).unwrap();
        assert_eq!(f.numerator(), &Poly::constant(ratio(1, 2)));
        assert_eq!(f.denominator(), &Poly::new(ints(&[1, -1])));
        assert_eq!(f.coefficient(6), ratio(1, 2));
    }
}
