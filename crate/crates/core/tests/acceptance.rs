//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Oracles here are written independently of the library: plain integer
//! product expansions, naive exponentials, direct divisor sums and a
//! hand-rolled lattice scan.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num::{BigInt, One, Zero};
use rand::Rng;

use wallcross::invariants::{
    dt_from_pt, dt_from_pt_paths, l_from_pt, macmahon, n_degree_zero, pt_from_dt, pt_from_l, InvariantSeries, Label,
};
use wallcross::lattice::{enumerate_decompositions, ConeKind};
use wallcross::rationality::{reconstruct, verify_prediction, PtSlice};
use wallcross::sample;
use wallcross::selftest::coprime_charges;
use wallcross::series::ChargeKey;
use wallcross::torus::{
    adjoint_exp, bracket_by_division, bracket_direct, classical_product, exp, specialize_u1, star, Twist,
};
use wallcross::{ChernVector, ConeSpec, GeometryData, Rat, TruncationWindow};

type Outcome = Result<String, String>;

fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn quintic() -> GeometryData {
    GeometryData::single_class(-200, 5, 1).unwrap()
}

fn two_parameter() -> GeometryData {
    let mut t = vec![vec![vec![0i64; 2]; 2]; 2];
    for (idx, val) in [([0, 0, 1], 2), ([0, 1, 1], 3), ([1, 1, 1], 1)] {
        let [a, b, c] = idx;
        for (i, j, k) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
            t[i][j][k] = val;
        }
    }
    GeometryData::new(-168, t, vec![vec![1, 0], vec![1, 2]], vec![1, 1], Some(vec![24, 36])).unwrap()
}

// ---- independent series oracles -------------------------------------------------

/// `prod_{k=1}^{deg} (1 - q^k)^{-k}` by repeated multiplication with
/// `1/(1 - q^k) = 1 + q^k + q^{2k} + ...`, in integers.
fn macmahon_oracle(deg: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero(); deg + 1];
    acc[0] = BigInt::one();
    for k in 1..=deg {
        for _ in 0..k {
            // multiply by the geometric series in q^k: prefix sums with stride k
            for n in k..=deg {
                let prev = acc[n - k].clone();
                acc[n] += prev;
            }
        }
    }
    acc
}

fn mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let len = a.len().min(b.len());
    let mut out = vec![Rat::zero(); len];
    for i in 0..len {
        for j in 0..len - i {
            out[i + j] += &a[i] * &b[j];
        }
    }
    out
}

/// `sum_k f^k / k!` by plain powers.
fn naive_exp(f: &[Rat]) -> Vec<Rat> {
    let len = f.len();
    let mut out = vec![Rat::zero(); len];
    out[0] = Rat::one();
    let mut power = out.clone();
    let mut fact = Rat::one();
    for k in 1..len {
        power = mul(&power, f);
        fact *= rat(k as i64);
        for n in 0..len {
            out[n] += &power[n] / &fact;
        }
    }
    out
}

/// `s^e` for a series with constant term 1, inverting by long division.
fn power(s: &[Rat], e: i64) -> Vec<Rat> {
    let len = s.len();
    let base = if e >= 0 {
        s.to_vec()
    } else {
        let mut inv = vec![Rat::zero(); len];
        inv[0] = Rat::one();
        for n in 1..len {
            let acc: Rat = (1..=n).map(|k| &s[k] * &inv[n - k]).sum();
            inv[n] = -acc;
        }
        inv
    };
    let mut out = vec![Rat::zero(); len];
    out[0] = Rat::one();
    for _ in 0..e.unsigned_abs() {
        out = mul(&out, &base);
    }
    out
}

fn alternate(s: &[Rat]) -> Vec<Rat> {
    s.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() }).collect()
}

fn macmahon_oracle_rat(deg: usize) -> Vec<Rat> {
    macmahon_oracle(deg).into_iter().map(Rat::from_integer).collect()
}

fn sigma2(n: i64) -> i64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d * d).sum()
}

// ---- criteria -----------------------------------------------------------------

fn criterion_1() -> Outcome {
    let expected: Vec<i64> = vec![1, 1, 3, 6, 13, 24, 48, 86, 160, 282, 500, 859];
    let oracle: Vec<i64> = macmahon_oracle(11).iter().map(|b| b.try_into().unwrap()).collect();
    if oracle != expected {
        return Err(format!("product oracle itself gave {oracle:?}"));
    }
    let start = Instant::now();
    // r = 1, e = 1 is M(-q); flip back to M(q)
    let m = macmahon(1, 1, 11).alternate();
    let elapsed = start.elapsed();
    let got: Vec<Rat> = m.coeffs().to_vec();
    let want: Vec<Rat> = expected.iter().map(|&x| rat(x)).collect();
    if got != want {
        return Err(format!("got {:?}", got.iter().map(ToString::to_string).collect::<Vec<_>>()));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("12 coefficients match the product expansion in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let n_max = 20;
    let m = macmahon_oracle_rat(n_max);
    for e in [-200i64, 0, 2, 24] {
        let table = n_degree_zero(e, n_max, 1);
        let mut exponent = vec![Rat::zero(); n_max + 1];
        for n in 1..=n_max as i64 {
            let got = table.get(&ChargeKey::new(vec![0], 6 * n));
            let want = Rat::new((-e * sigma2(n)).into(), (n * n).into());
            if got != want {
                return Err(format!("e={e}, n={n}: N = {got}, closed form {want}"));
            }
            let sign = if n % 2 == 1 { 1 } else { -1 };
            exponent[n as usize] = rat(sign * n) * got;
        }
        if naive_exp(&exponent) != power(&alternate(&m), e) {
            return Err(format!("e={e}: exponential does not reproduce M(-q)^e"));
        }
    }
    Ok("closed form and exponential identity hold for e in {-200, 0, 2, 24}, n <= 20".into())
}

fn random_charge<R: Rng>(g: &GeometryData, rng: &mut R) -> (i64, Vec<i64>) {
    let charges = coprime_charges(g, 3);
    charges[rng.gen_range(0..charges.len())].clone()
}

fn criterion_3() -> Outcome {
    let g = quintic();
    let window = TruncationWindow::new(6, 36).with_min_six_n(-6);
    let mut rng = sample::rng(3);
    let start = Instant::now();
    let mut entries = 0;
    for case in 0..50 {
        let (r, d) = random_charge(&g, &mut rng);
        let terms = rng.gen_range(1..=6);
        let pt = sample::integer_table(&g, &mut rng, Label::PT, r, d.clone(), window, terms).map_err(|e| e.to_string())?;
        let paths = dt_from_pt_paths(&g, &pt).map_err(|e| e.to_string())?;
        if !paths.agree() {
            return Err(format!("case {case} at (r, D) = ({r}, {d:?}): paths disagree"));
        }
        entries += paths.commutative.values().len();
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("50 tables agree on both paths ({entries} DT entries) in {elapsed:?}"))
}

fn criterion_4() -> Outcome {
    let window = TruncationWindow::new(6, 66);
    // e = 1 makes the factor M(-q) itself
    let unit = GeometryData::single_class(1, 5, 1).unwrap();
    let one: BTreeMap<_, _> = [(ChargeKey::new(vec![0], 0), rat(1))].into_iter().collect();
    let pt = InvariantSeries::new(&unit, Label::PT, 1, vec![0], window, one).map_err(|e| e.to_string())?;
    let dt = dt_from_pt(&unit, &pt).map_err(|e| e.to_string())?;
    let row: Vec<Rat> = (0..12).map(|k| dt.get(&ChargeKey::new(vec![0], 6 * k))).collect();
    if alternate(&row) != macmahon_oracle_rat(11) {
        return Err(format!("unit PT row gave {row:?}"));
    }
    let g = quintic();
    let factor = power(&alternate(&macmahon_oracle_rat(11)), g.euler_number());
    let mut rng = sample::rng(4);
    for case in 0..10 {
        let pt = sample::integer_table(&g, &mut rng, Label::PT, 1, vec![0], window, 5).map_err(|e| e.to_string())?;
        let dt = dt_from_pt(&g, &pt).map_err(|e| e.to_string())?;
        for beta in 0..=6 {
            let slice = |s: &InvariantSeries| -> Vec<Rat> { (0..12).map(|k| s.get(&ChargeKey::new(vec![beta], 6 * k))).collect() };
            if slice(&dt) != mul(&factor, &slice(&pt)) {
                return Err(format!("case {case}, 2beta={beta}: DT row is not M(-q)^e times the PT row"));
            }
        }
    }
    Ok("(r, D) = (1, 0) multiplies every row by M(-q)^e; e = 1 reproduces criterion 1".into())
}

fn criterion_5() -> Outcome {
    let g = quintic();
    let cone = ConeSpec::sharp(TruncationWindow::new(4, 36));
    let mut rng = sample::rng(5);
    for case in 0..20 {
        let mut run = || -> wallcross::Result<bool> {
            let eps = sample::element(&g, &mut rng, &cone, 2, false)?;
            let x = sample::element(&g, &mut rng, &cone, 3, true)?;
            let lift = eps.div_u2m1();
            let conj = star(&g, &star(&g, &exp(&g, &lift)?, &x)?, &exp(&g, &lift.neg())?)?;
            Ok(conj.is_regular() && specialize_u1(&conj)? == adjoint_exp(&g, &eps, &specialize_u1(&x)?)?)
        };
        match run() {
            Ok(true) => {}
            Ok(false) => return Err(format!("case {case}: conjugation differs from exp(Ad eps)")),
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    Ok("20 conjugations are pole-free and match exp(Ad eps) at u = 1".into())
}

fn criterion_6() -> Outcome {
    let window = TruncationWindow::new(4, 36);
    let mut rng = sample::rng(6);
    for (name, g) in [("quintic", quintic()), ("two-parameter", two_parameter())] {
        let sharp = ConeSpec::sharp(window);
        let shifted = {
            let (r, d) = random_charge(&g, &mut rng);
            ConeSpec::shifted(&g, r, d, window).unwrap()
        };
        for case in 0..50 {
            let mut run = || -> wallcross::Result<bool> {
                let a = sample::element(&g, &mut rng, &sharp, 3, false)?;
                let b = sample::element(&g, &mut rng, &sharp, 3, false)?;
                let c = sample::element(&g, &mut rng, &sharp, 3, false)?;
                let m = sample::element(&g, &mut rng, &shifted, 3, false)?;
                let br = |x: &_, y: &_| bracket_direct(&g, x, y);
                let jacobi = br(&a, &br(&b, &c)?)?
                    .checked_add(&br(&b, &br(&c, &a)?)?)?
                    .checked_add(&br(&c, &br(&a, &b)?)?)?
                    .is_zero();
                let module_jacobi =
                    br(&a, &br(&b, &m)?)? == br(&br(&a, &b)?, &m)?.checked_add(&br(&b, &br(&a, &m)?)?)?;
                let leibniz = br(&a, &classical_product(&g, &b, &c)?)?
                    == classical_product(&g, &br(&a, &b)?, &c)?.checked_add(&classical_product(&g, &b, &br(&a, &c)?)?)?;
                Ok(jacobi && module_jacobi && leibniz)
            };
            match run() {
                Ok(true) => {}
                Ok(false) => return Err(format!("{name} triple {case} violates Jacobi or Leibniz")),
                Err(e) => return Err(format!("{name} triple {case}: {e}")),
            }
        }
    }
    let g = quintic();
    for case in 0..500 {
        let mut run = || -> wallcross::Result<bool> {
            let a = sample::element(&g, &mut rng, &ConeSpec::sharp(window), 3, true)?;
            let cone = if case % 2 == 0 {
                ConeSpec::sharp(window)
            } else {
                let (r, d) = random_charge(&g, &mut rng);
                ConeSpec::shifted(&g, r, d, window)?
            };
            let b = sample::element(&g, &mut rng, &cone, 3, true)?;
            Ok(bracket_direct(&g, &a, &b)? == bracket_by_division(&g, &a, &b, Twist::Standard)?)
        };
        match run() {
            Ok(true) => {}
            Ok(false) => return Err(format!("pair {case}: bracket routes differ")),
            Err(e) => return Err(format!("pair {case}: {e}")),
        }
    }
    Ok("100 triples satisfy Jacobi and Leibniz; 500 pairs agree on both bracket routes".into())
}

fn criterion_7() -> Outcome {
    let g = quintic();
    let window = TruncationWindow::new(6, 36).with_min_six_n(-12);
    let mut rng = sample::rng(7);
    for case in 0..50 {
        let (r, d) = random_charge(&g, &mut rng);
        let pt = sample::rational_table(&g, &mut rng, Label::PT, r, d.clone(), window, 5).map_err(|e| e.to_string())?;
        let dt = sample::rational_table(&g, &mut rng, Label::DT, r, d, window, 5).map_err(|e| e.to_string())?;
        let back = pt_from_dt(&g, &dt_from_pt(&g, &pt).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let fwd = dt_from_pt(&g, &pt_from_dt(&g, &dt).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if back != pt || fwd != dt {
            return Err(format!("dt/pt case {case} does not round-trip"));
        }
    }
    for case in 0..50 {
        let (r, d) = random_charge(&g, &mut rng);
        let n = sample::finite_ntable(&g, &mut rng, &window, 4);
        let l = sample::rational_table(&g, &mut rng, Label::L, r, d.clone(), window, 4).map_err(|e| e.to_string())?;
        let pt = sample::rational_table(&g, &mut rng, Label::PT, r, d, window, 4).map_err(|e| e.to_string())?;
        let l_back = l_from_pt(&g, &pt_from_l(&g, &l, &n).map_err(|e| e.to_string())?, &n).map_err(|e| e.to_string())?;
        let pt_back = pt_from_l(&g, &l_from_pt(&g, &pt, &n).map_err(|e| e.to_string())?.series, &n).map_err(|e| e.to_string())?;
        if l_back.series != l || pt_back != pt {
            return Err(format!("pt/l case {case} does not round-trip"));
        }
    }
    Ok("50 dt<->pt and 50 pt<->l round trips are exact".into())
}

fn criterion_8() -> Outcome {
    let g = quintic();
    let heldout_steps = 15;
    let fit_steps = 40;
    let window = TruncationWindow::new(4, 6 * (fit_steps + heldout_steps)).with_min_six_n(-6);
    let fit_hi = window.max_six_n - 6 * heldout_steps;
    let mut rng = sample::rng(8);
    let mut slices = 0;
    let mut asymmetric = 0;
    let mut max_degree = 0;
    while slices < 20 {
        let (r, d) = random_charge(&g, &mut rng);
        let small = TruncationWindow::new(4, 12).with_min_six_n(-6);
        let seed_l = sample::rational_table(&g, &mut rng, Label::L, r, d.clone(), small, 3).map_err(|e| e.to_string())?;
        let l = InvariantSeries::new(&g, Label::L, r, d.clone(), window, seed_l.values().clone()).map_err(|e| e.to_string())?;
        let n = sample::periodic_ntable(&g, &mut rng, 4, window.max_six_n / 6 + 1);
        let pt = pt_from_l(&g, &l, &n).map_err(|e| e.to_string())?;
        for two_beta in [vec![2], vec![4]] {
            if slices == 20 {
                break;
            }
            let full = PtSlice::new(window.min_six_n, window.max_six_n, pt.slice(&two_beta)).map_err(|e| e.to_string())?;
            if full.values().is_empty() {
                continue;
            }
            let fit = full.restrict(window.min_six_n, fit_hi).map_err(|e| e.to_string())?;
            let heldout = full.restrict(fit_hi + 1, window.max_six_n).map_err(|e| e.to_string())?;
            let max_order = ((fit_hi - window.min_six_n) / 6 / 2 - 1) as usize;
            let Some(form) = reconstruct(&fit, max_order).form().cloned() else {
                return Err(format!("(r, D) = ({r}, {d:?}), 2beta={two_beta:?}: no reconstruction"));
            };
            if let Err(m) = verify_prediction(&form, &heldout) {
                return Err(format!(
                    "(r, D) = ({r}, {d:?}), 2beta={two_beta:?}: held-out 6n={} predicted {} but is {}",
                    m.six_n, m.predicted, m.expected
                ));
            }
            if verify_prediction(&form, &fit).is_err() {
                return Err("reconstruction does not reproduce its own fitting data".into());
            }
            max_degree = max_degree.max(form.denominator().degree().unwrap_or(0));
            if !form.is_f_inversion_invariant() && form.inversion_symmetry().is_none() {
                asymmetric += 1;
            }
            slices += 1;
        }
    }
    if asymmetric == 0 {
        return Err("every reconstructed slice was inversion symmetric".into());
    }
    Ok(format!(
        "20 slices predict all held-out coefficients over {heldout_steps} q-steps; \
         {asymmetric} not q <-> 1/q symmetric; denominators up to degree {max_degree}"
    ))
}

/// Counts splittings by scanning every `v1` in a box and checking the cone
/// conditions written out directly.
fn scan_count(g: &GeometryData, v: &ChernVector, w: &TruncationWindow) -> usize {
    let wb = |tb: &[i64]| -> i64 { tb.iter().zip(g.omega_curve()).map(|(a, b)| a * b).sum() };
    let mut count = 0;
    let c = g.curve_rank();
    let mut idx = vec![0i64; c];
    loop {
        for six_n in 0..=w.max_six_n {
            let two_beta = idx.clone();
            let v1_ok = two_beta.iter().all(|b| b % 2 == 0)
                && six_n % 6 == 0
                && wb(&two_beta) <= w.max_omega_two_beta
                && !(six_n == 0 && two_beta.iter().all(|&b| b == 0));
            if !v1_ok {
                continue;
            }
            let tb2: Vec<i64> = v.two_beta.iter().zip(&two_beta).map(|(a, b)| a - b).collect();
            let s2 = v.six_n - six_n;
            let upper = wb(&tb2) <= w.max_omega_two_beta && s2 <= w.max_six_n;
            let ok = if v.r == 0 {
                tb2.iter().all(|&b| b >= 0 && b % 2 == 0) && s2 >= 0 && s2 % 6 == 0 && !(s2 == 0 && tb2.iter().all(|&b| b == 0))
            } else {
                let dw2 = i128::from(g.d_omega2(&v.d));
                i128::from(v.r) * i128::from(g.omega_cubed()) * i128::from(wb(&tb2)) >= -(dw2 * dw2) && s2 >= w.min_six_n
            };
            if ok && upper {
                count += 1;
            }
        }
        let mut k = 0;
        loop {
            if k == c {
                return count;
            }
            idx[k] += 1;
            if idx[k] <= w.max_omega_two_beta {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn criterion_9() -> Outcome {
    let mut points = 0;
    let mut pairs = 0;
    for g in [quintic(), two_parameter()] {
        let w = TruncationWindow::new(4, 24).with_min_six_n(-6);
        let mut targets = sample::sharp_support(&g, &w);
        for (r, d) in coprime_charges(&g, 2) {
            let cone = ConeSpec::shifted(&g, r, d.clone(), w).unwrap();
            // every shifted point of the window: 2beta from the Bogomolov bound up
            let dw2 = g.d_omega2(&d);
            let lowest = -(dw2 * dw2) / (r * g.omega_cubed()) - 1;
            let c = g.curve_rank();
            let mut tbs: Vec<Vec<i64>> = vec![Vec::new()];
            for _ in 0..c {
                tbs = tbs.into_iter().flat_map(|b| (lowest..=w.max_omega_two_beta).map(move |x| [b.clone(), vec![x]].concat())).collect();
            }
            for tb in tbs {
                for six_n in w.min_six_n..=w.max_six_n {
                    let v = ChernVector::new(r, d.clone(), tb.clone(), six_n);
                    if cone.in_window(&g, &v) {
                        targets.push(v);
                    }
                }
            }
            if !matches!(cone.kind, ConeKind::ShiftedByRD { .. }) {
                return Err("shifted cone lost its charge".into());
            }
        }
        for v in targets {
            let got = enumerate_decompositions(&g, &v, &w).map_err(|e| e.to_string())?;
            let want = scan_count(&g, &v, &w);
            if got.len() != want {
                return Err(format!("at {v}: enumerated {} but the scan finds {want}", got.len()));
            }
            points += 1;
            pairs += want;
        }
    }
    Ok(format!("{points} lattice points, {pairs} splittings, all counts match"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("MacMahon coefficients", criterion_1),
        ("degree-zero N invariants", criterion_2),
        ("DT/PT dual-path agreement", criterion_3),
        ("rank-one specialization", criterion_4),
        ("conjugation vs adjoint exponential", criterion_5),
        ("Poisson axioms and bracket routes", criterion_6),
        ("round trips", criterion_7),
        ("rationality with held-out data", criterion_8),
        ("finite decompositions", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}) [{t:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail}) [{t:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
