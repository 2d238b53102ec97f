//! Property suites runnable from the command line.
//!
//! Each suite draws seeded random inputs in the configured window and
//! compares two independent computations exactly. A window with no nonzero
//! curve classes makes every suite pass vacuously with a warning.

use std::fmt;

use num::{One, Zero};
use rand::Rng;

use crate::error::Result;
use crate::invariants::{
    dt_from_pt_paths, l_from_pt, macmahon, n_degree_zero, pt_from_dt, pt_from_l, pt_from_l_adjoint, sigma2, Label,
};
use crate::lattice::{
    cone_contains, enumerate_decompositions, euler_pairing, ChernVector, ConeSpec, GeometryData, TruncationWindow,
};
use crate::rational::{rat, Rat};
use crate::rationality::{reconstruct, verify_prediction, PtSlice, Reconstruction};
use crate::sample;
use crate::series::QSeries;
use crate::torus::{
    adjoint_exp, bracket_by_division, bracket_direct, classical_product, exp, regular_log, specialize_u1, star,
    TorusElement, Twist,
};

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub geometry: GeometryData,
    pub window: TruncationWindow,
    pub seed: u64,
    /// Random cases per suite.
    pub cases: usize,
    /// Product used on the division side of the bracket check.
    pub twist: Twist,
}

impl SelftestConfig {
    pub fn new(geometry: GeometryData, window: TruncationWindow) -> Self {
        Self { geometry, window, seed: 0, cases: 10, twist: Twist::Standard }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, failures: Vec::new(), warnings: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: Result<bool>, what: impl FnOnce() -> String) {
        self.cases += 1;
        match ok {
            Ok(true) => {}
            Ok(false) => self.failures.push(what()),
            Err(e) => self.failures.push(format!("{}: {e}", what())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.suites.iter().map(|s| s.name.len()).max().unwrap_or(0);
        for s in &self.suites {
            let status = if s.passed() { "pass" } else { "FAIL" };
            writeln!(f, "{:<width$}  {status}  {} cases", s.name, s.cases)?;
            for w in &s.warnings {
                writeln!(f, "{:<width$}  warning: {w}", "")?;
            }
            for x in s.failures.iter().take(3) {
                writeln!(f, "{:<width$}  failed: {x}", "")?;
            }
        }
        Ok(())
    }
}

/// Coprime charges `(r, D)` with `1 <= r <= max_r` and small `D`.
pub fn coprime_charges(g: &GeometryData, max_r: i64) -> Vec<(i64, Vec<i64>)> {
    let p = g.divisor_rank();
    let mut ds: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..p {
        ds = ds
            .into_iter()
            .flat_map(|d| {
                (-1..=2).map(move |x| {
                    let mut d = d.clone();
                    d.push(x);
                    d
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for r in 1..=max_r {
        for d in &ds {
            if ConeSpec::shifted(g, r, d.clone(), TruncationWindow::new(0, 0)).is_ok() {
                out.push((r, d.clone()));
            }
        }
    }
    out
}

pub fn run_selftest(cfg: &SelftestConfig) -> SelftestReport {
    let suites: Vec<(&'static str, fn(&SelftestConfig, &mut SuiteResult))> = vec![
        ("euler-antisymmetry", euler_antisymmetry),
        ("bracket-agreement", bracket_agreement),
        ("jacobi", jacobi),
        ("leibniz", leibniz),
        ("conjugation", conjugation),
        ("exp-log", exp_log),
        ("macmahon", macmahon_product),
        ("degree-zero-n", degree_zero_n),
        ("dtpt-dual-path", dtpt_dual_path),
        ("ptl-round-trip", ptl_round_trip),
        ("rationality", rationality),
        ("enumeration", enumeration),
    ];
    let degenerate = cfg.window.is_degenerate() || cfg.window.validate().is_err();
    let mut out = Vec::new();
    for (i, (name, suite)) in suites.into_iter().enumerate() {
        let mut result = SuiteResult::new(name);
        if degenerate {
            result.warnings.push("degenerate window: no nonzero curve classes, passing vacuously".into());
        } else {
            let mut local = cfg.clone();
            local.seed = cfg.seed.wrapping_mul(1000).wrapping_add(i as u64);
            suite(&local, &mut result);
        }
        out.push(result);
    }
    SelftestReport { suites: out }
}

fn sharp(cfg: &SelftestConfig) -> ConeSpec {
    ConeSpec::sharp(cfg.window)
}

/// A shifted cone from the coprime list, with room below `6n = 0`.
fn some_shifted<R: Rng>(cfg: &SelftestConfig, rng: &mut R) -> Result<ConeSpec> {
    let charges = coprime_charges(&cfg.geometry, 3);
    let (r, d) = charges[rng.gen_range(0..charges.len())].clone();
    ConeSpec::shifted(&cfg.geometry, r, d, cfg.window.with_min_six_n(-6))
}

fn euler_antisymmetry(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    let vector = |rng: &mut rand_chacha::ChaCha8Rng| {
        ChernVector::new(
            rng.gen_range(-3..=3),
            (0..g.divisor_rank()).map(|_| rng.gen_range(-4..=4)).collect(),
            (0..g.curve_rank()).map(|_| rng.gen_range(-8..=8)).collect(),
            rng.gen_range(-40..=40),
        )
    };
    for _ in 0..cfg.cases * 10 {
        let (a, b) = (vector(&mut rng), vector(&mut rng));
        res.check(
            (|| Ok(euler_pairing(g, &a, &b)? == -euler_pairing(g, &b, &a)? && euler_pairing(g, &a, &a)?.is_zero()))(),
            || format!("chi({a}, {b})"),
        );
    }
}

fn bracket_agreement(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    for i in 0..cfg.cases * 5 {
        let mut run = || -> Result<bool> {
            let a = sample::element(g, &mut rng, &sharp(cfg), 3, true)?;
            let other = if i % 2 == 0 { sharp(cfg) } else { some_shifted(cfg, &mut rng)?.with_window(cfg.window) };
            let b = sample::element(g, &mut rng, &other, 3, true)?;
            Ok(bracket_direct(g, &a, &b)? == bracket_by_division(g, &a, &b, cfg.twist)?)
        };
        res.check(run(), || format!("case {i}"));
    }
    if res.cases > 0 && cfg.twist != Twist::Standard {
        res.warnings.push("division side uses the sign-flipped product".into());
    }
}

fn jacobi(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    for i in 0..cfg.cases * 2 {
        let mut run = || -> Result<bool> {
            let a = sample::element(g, &mut rng, &sharp(cfg), 3, false)?;
            let b = sample::element(g, &mut rng, &sharp(cfg), 3, false)?;
            let cone = if i % 2 == 0 { sharp(cfg) } else { some_shifted(cfg, &mut rng)?.with_window(cfg.window) };
            let c = sample::element(g, &mut rng, &cone, 3, false)?;
            // {a,{b,c}} = {{a,b},c} + {b,{a,c}}
            let lhs = bracket_direct(g, &a, &bracket_direct(g, &b, &c)?)?;
            let rhs = bracket_direct(g, &bracket_direct(g, &a, &b)?, &c)?
                .checked_add(&bracket_direct(g, &b, &bracket_direct(g, &a, &c)?)?)?;
            Ok(lhs == rhs)
        };
        res.check(run(), || format!("case {i}"));
    }
}

fn leibniz(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    for i in 0..cfg.cases * 2 {
        let mut run = || -> Result<bool> {
            let a = sample::element(g, &mut rng, &sharp(cfg), 3, false)?;
            let b = sample::element(g, &mut rng, &sharp(cfg), 3, false)?;
            let c = sample::element(g, &mut rng, &sharp(cfg), 3, false)?;
            let lhs = bracket_direct(g, &a, &classical_product(g, &b, &c)?)?;
            let rhs = classical_product(g, &bracket_direct(g, &a, &b)?, &c)?
                .checked_add(&classical_product(g, &b, &bracket_direct(g, &a, &c)?)?)?;
            Ok(lhs == rhs)
        };
        res.check(run(), || format!("case {i}"));
    }
}

/// `exp(eps/(u^2-1)) * x * exp(-eps/(u^2-1))` is regular and equals
/// `exp(Ad eps) x` at `u = 1`.
pub fn conjugation_case(g: &GeometryData, eps: &TorusElement, x: &TorusElement) -> Result<bool> {
    let lift = eps.div_u2m1();
    let conj = star(g, &star(g, &exp(g, &lift)?, x)?, &exp(g, &lift.neg())?)?;
    if !conj.is_regular() {
        return Ok(false);
    }
    Ok(specialize_u1(&conj)? == adjoint_exp(g, eps, &specialize_u1(x)?)?)
}

fn conjugation(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    for i in 0..cfg.cases {
        let mut run = || -> Result<bool> {
            let eps = sample::element(g, &mut rng, &sharp(cfg), 2, false)?;
            let x = sample::element(g, &mut rng, &sharp(cfg), 3, true)?;
            conjugation_case(g, &eps, &x)
        };
        res.check(run(), || format!("case {i}"));
    }
}

fn exp_log(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    for i in 0..cfg.cases {
        let mut run = || -> Result<bool> {
            let eps = sample::element(g, &mut rng, &sharp(cfg), 3, true)?;
            Ok(regular_log(g, &exp(g, &eps.div_u2m1())?)? == eps)
        };
        res.check(run(), || format!("case {i}"));
    }
}

/// `prod_{k>=1} (1 - q^k)^{-k}` through `q^deg` as a plain product.
pub fn macmahon_by_product(deg: usize) -> QSeries {
    let len = deg + 1;
    let mut acc = QSeries::one(len);
    for k in 1..len {
        let mut factor = vec![Rat::zero(); len];
        factor[0] = Rat::one();
        factor[k] = -Rat::one();
        let inv = QSeries::new(factor, len).inverse().expect("unit constant term");
        for _ in 0..k {
            acc = acc.mul(&inv);
        }
    }
    acc
}

fn power(s: &QSeries, k: i64) -> QSeries {
    let base = if k < 0 { s.inverse().expect("unit constant term") } else { s.clone() };
    (0..k.unsigned_abs()).fold(QSeries::one(s.len()), |acc, _| acc.mul(&base))
}

fn macmahon_product(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let deg = (cfg.window.max_six_n / 6).max(1) as usize;
    let m = macmahon_by_product(deg);
    for e in [-3i64, -1, 0, 2] {
        for r in 1..=2i64 {
            let mut expected = power(&m, r * e);
            if r % 2 == 1 {
                expected = expected.alternate();
            }
            res.check(Ok(macmahon(e, r, deg) == expected), || format!("e={e}, r={r}"));
        }
    }
}

fn degree_zero_n(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let n_max = (cfg.window.max_six_n / 6).max(1) as usize;
    for e in [-200i64, 0, 2, 24] {
        let table = n_degree_zero(e, n_max, 1);
        let mut closed = true;
        let mut log = vec![Rat::zero(); n_max + 1];
        for n in 1..=n_max {
            let got = table.get(&crate::series::ChargeKey::new(vec![0], 6 * n as i64));
            let want = -Rat::from_integer(sigma2(n as u64) * e) / rat((n * n) as i64);
            closed &= got == want;
            let sign = if n % 2 == 1 { rat(1) } else { rat(-1) };
            log[n] = sign * rat(n as i64) * got;
        }
        let exp_ok = QSeries::new(log, n_max + 1).exp().map(|s| s == macmahon(e, 1, n_max));
        res.check(exp_ok.map(|ok| ok && closed), || format!("e={e}"));
    }
}

fn dtpt_dual_path(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    for i in 0..cfg.cases {
        let mut run = || -> Result<bool> {
            let cone = some_shifted(cfg, &mut rng)?;
            let crate::lattice::ConeKind::ShiftedByRD { r, d } = cone.kind else { unreachable!() };
            let pt = sample::integer_table(g, &mut rng, Label::PT, r, d, cone.window, 4)?;
            let paths = dt_from_pt_paths(g, &pt)?;
            Ok(paths.agree() && pt_from_dt(g, &paths.commutative)? == pt)
        };
        res.check(run(), || format!("case {i}"));
    }
}

fn ptl_round_trip(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    for i in 0..cfg.cases {
        let mut run = || -> Result<bool> {
            let cone = some_shifted(cfg, &mut rng)?;
            let crate::lattice::ConeKind::ShiftedByRD { r, d } = cone.kind else { unreachable!() };
            let l = sample::rational_table(g, &mut rng, Label::L, r, d, cone.window, 3)?;
            let n = sample::finite_ntable(g, &mut rng, &cfg.window, 3);
            let pt = match pt_from_l(g, &l, &n) {
                Ok(pt) => pt,
                // half-integral D.beta cannot enter the kernel
                Err(crate::Error::InvalidInput(_)) => return Ok(true),
                Err(e) => return Err(e),
            };
            Ok(pt == pt_from_l_adjoint(g, &l, &n)? && l_from_pt(g, &pt, &n)?.series == l)
        };
        res.check(run(), || format!("case {i}"));
    }
}

/// Fits a fixed-`beta` slice on `lo..=fit_hi` and checks the next
/// `heldout_steps` powers of `q`.
pub fn rationality_case(slice: &PtSlice, fit_hi: i64, heldout_steps: i64, max_order: usize) -> Result<Option<Reconstruction>> {
    let fit = slice.restrict(slice.min_six_n(), fit_hi)?;
    let rec = reconstruct(&fit, max_order);
    let Some(form) = rec.form() else {
        return Ok(None);
    };
    let heldout = slice.restrict(fit_hi + 1, fit_hi + 6 * heldout_steps)?;
    Ok(verify_prediction(form, &heldout).is_ok().then_some(rec))
}

fn rationality(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    let fit_steps = 40;
    let heldout = 15;
    let window = TruncationWindow::new(cfg.window.max_omega_two_beta.min(4), 6 * (fit_steps + heldout)).with_min_six_n(-6);
    for i in 0..cfg.cases.div_ceil(2) {
        let mut run = || -> Result<bool> {
            let cone = some_shifted(&SelftestConfig { window, ..cfg.clone() }, &mut rng)?;
            let crate::lattice::ConeKind::ShiftedByRD { r, d } = cone.kind else { unreachable!() };
            let small = TruncationWindow::new(window.max_omega_two_beta, 12).with_min_six_n(-6);
            let l = sample::rational_table(g, &mut rng, Label::L, r, d.clone(), small, 3)?;
            let l = crate::invariants::InvariantSeries::new(g, Label::L, r, d, window, l.values().clone())?;
            let n = sample::periodic_ntable(g, &mut rng, window.max_omega_two_beta, (window.max_six_n / 6) + 1);
            let pt = match pt_from_l(g, &l, &n) {
                Ok(pt) => pt,
                Err(crate::Error::InvalidInput(_)) => return Ok(true),
                Err(e) => return Err(e),
            };
            for beta in pt.betas() {
                let slice = PtSlice::new(window.min_six_n, window.max_six_n, pt.slice(&beta))?;
                let fit_hi = window.max_six_n - 6 * heldout;
                let max_order = ((fit_hi - window.min_six_n) / 6 / 2 - 1) as usize;
                if rationality_case(&slice, fit_hi, heldout, max_order)?.is_none() {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        res.check(run(), || format!("case {i}"));
    }
}

/// Splittings counted by scanning a box that contains every candidate.
pub fn brute_force_count(g: &GeometryData, v: &ChernVector, cone: &ConeSpec) -> usize {
    let w = cone.window;
    let sharp = ConeSpec::sharp(w);
    let mut count = 0;
    let mut betas: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..g.curve_rank() {
        betas = betas
            .into_iter()
            .flat_map(|b| {
                (0..=w.max_omega_two_beta).map(move |x| {
                    let mut b = b.clone();
                    b.push(x);
                    b
                })
            })
            .collect();
    }
    for two_beta in betas {
        for six_n in 0..=w.max_six_n {
            let v1 = ChernVector::curve(g.divisor_rank(), two_beta.clone(), six_n);
            if v1.is_zero() || !sharp.in_window(g, &v1) {
                continue;
            }
            let v2 = v - &v1;
            let v2_ok = cone_contains(cone, g, &v2)
                && g.omega_two_beta(&v2.two_beta) <= w.max_omega_two_beta
                && v2.six_n <= w.max_six_n
                && !(cone.is_sharp() && v2.is_zero());
            if v2_ok {
                count += 1;
            }
        }
    }
    count
}

fn enumeration(cfg: &SelftestConfig, res: &mut SuiteResult) {
    let g = &cfg.geometry;
    let mut rng = sample::rng(cfg.seed);
    let small = TruncationWindow {
        max_omega_two_beta: cfg.window.max_omega_two_beta.min(4),
        max_six_n: cfg.window.max_six_n.min(18),
        min_six_n: 0,
    };
    let sharp = ConeSpec::sharp(small);
    let mut points: Vec<(ChernVector, ConeSpec)> =
        sample::sharp_support(g, &small).into_iter().map(|v| (v, sharp.clone())).collect();
    if let Ok(cone) = some_shifted(&SelftestConfig { window: small, ..cfg.clone() }, &mut rng) {
        points.extend(sample::shifted_support(g, &cone).into_iter().map(|v| (v, cone.clone())));
    }
    for (v, cone) in points {
        let got = enumerate_decompositions(g, &v, &cone.window).map(|d| d.len());
        res.check(got.map(|n| n == brute_force_count(g, &v, &cone)), || format!("at {v}"));
    }
}
