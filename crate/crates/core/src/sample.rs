//! Seeded random inputs for property suites and benchmarks.
//!
//! Everything draws from a [`ChaCha8Rng`] so a seed reproduces a run
//! exactly on every platform.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::invariants::{InvariantSeries, Label, NTable};
use crate::laurent::{LaurentPoly, UCoefficient};
use crate::lattice::{sharp_window_points, ChernVector, ConeSpec, GeometryData, TruncationWindow};
use crate::rational::{rat, ratio, Rat};
use crate::series::ChargeKey;
use crate::torus::TorusElement;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero integer in `-k..=k`.
pub fn nonzero_int<R: Rng>(rng: &mut R, k: i64) -> i64 {
    loop {
        let x = rng.gen_range(-k..=k);
        if x != 0 {
            return x;
        }
    }
}

/// Nonzero rational with numerator in `-5..=5` and denominator in `1..=3`.
pub fn small_rational<R: Rng>(rng: &mut R) -> Rat {
    ratio(nonzero_int(rng, 5), rng.gen_range(1..=3))
}

/// A Laurent polynomial in `u` with up to three terms of degree at most 2.
pub fn u_coefficient<R: Rng>(rng: &mut R) -> UCoefficient {
    let terms = rng.gen_range(1..=3);
    let poly = LaurentPoly::from_terms((0..terms).map(|_| (rng.gen_range(-2..=2), rat(nonzero_int(rng, 3)))));
    if poly.is_zero() {
        UCoefficient::one()
    } else {
        UCoefficient::from_poly(poly)
    }
}

/// Nonzero sharp-cone lattice points of the window.
pub fn sharp_support(g: &GeometryData, window: &TruncationWindow) -> Vec<ChernVector> {
    sharp_window_points(g, window).into_iter().filter(|v| !v.is_zero()).collect()
}

/// Shifted-cone points of the window with each `2 beta` component drawn
/// from `-2..=max_omega_two_beta`.
pub fn shifted_support(g: &GeometryData, cone: &ConeSpec) -> Vec<ChernVector> {
    let crate::lattice::ConeKind::ShiftedByRD { r, d } = &cone.kind else {
        return sharp_support(g, &cone.window);
    };
    let w = cone.window;
    let mut betas: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..g.curve_rank() {
        betas = betas
            .into_iter()
            .flat_map(|b| {
                (-2..=w.max_omega_two_beta).map(move |x| {
                    let mut b = b.clone();
                    b.push(x);
                    b
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for two_beta in betas {
        for six_n in w.min_six_n..=w.max_six_n {
            let v = ChernVector::new(*r, d.clone(), two_beta.clone(), six_n);
            if cone.in_window(g, &v) {
                out.push(v);
            }
        }
    }
    out
}

fn pick<R: Rng>(rng: &mut R, support: &[ChernVector], terms: usize) -> Vec<ChernVector> {
    support.choose_multiple(rng, terms.min(support.len())).cloned().collect()
}

/// A sparse element with `terms` support points.
///
/// With `quantum` the coefficients are Laurent polynomials in `u`,
/// otherwise small rationals.
pub fn element<R: Rng>(g: &GeometryData, rng: &mut R, cone: &ConeSpec, terms: usize, quantum: bool) -> Result<TorusElement> {
    let support = if cone.is_sharp() { sharp_support(g, &cone.window) } else { shifted_support(g, cone) };
    let chosen = pick(rng, &support, terms);
    let coeffs: Vec<UCoefficient> = chosen
        .iter()
        .map(|_| if quantum { u_coefficient(rng) } else { UCoefficient::constant(small_rational(rng)) })
        .collect();
    TorusElement::from_terms(g, cone.clone(), chosen.into_iter().zip(coeffs))
}

/// A random table at `(r, D)` with `terms` nonzero integer entries in
/// `-9..=9`.
pub fn integer_table<R: Rng>(
    g: &GeometryData,
    rng: &mut R,
    label: Label,
    r: i64,
    d: Vec<i64>,
    window: TruncationWindow,
    terms: usize,
) -> Result<InvariantSeries> {
    let cone = ConeSpec::shifted(g, r, d.clone(), window)?;
    let chosen = pick(rng, &shifted_support(g, &cone), terms);
    let values: BTreeMap<_, _> = chosen
        .iter()
        .map(|v| (ChargeKey::of_vector(v), rat(nonzero_int(rng, 9))))
        .collect();
    InvariantSeries::new(g, label, r, d, window, values)
}

/// A random table at `(r, D)` with small rational entries.
pub fn rational_table<R: Rng>(
    g: &GeometryData,
    rng: &mut R,
    label: Label,
    r: i64,
    d: Vec<i64>,
    window: TruncationWindow,
    terms: usize,
) -> Result<InvariantSeries> {
    let cone = ConeSpec::shifted(g, r, d.clone(), window)?;
    let chosen = pick(rng, &shifted_support(g, &cone), terms);
    let values: BTreeMap<_, _> = chosen.iter().map(|v| (ChargeKey::of_vector(v), small_rational(rng))).collect();
    InvariantSeries::new(g, label, r, d, window, values)
}

/// Finitely supported `N` on nonzero curve classes of the window.
pub fn finite_ntable<R: Rng>(g: &GeometryData, rng: &mut R, window: &TruncationWindow, terms: usize) -> NTable {
    let chosen = pick(rng, &sharp_support(g, window), terms);
    let entries = chosen.iter().map(|v| (ChargeKey::of_vector(v), small_rational(rng))).collect();
    NTable::new(g.curve_rank(), entries).expect("sharp points are valid N keys")
}

/// `N` with `beta > 0`, `w . 2beta <= max_omega_two_beta`, periodic in `n`
/// with period `w . beta`, filled for `0 <= n <= n_max`.
pub fn periodic_ntable<R: Rng>(g: &GeometryData, rng: &mut R, max_omega_two_beta: i64, n_max: i64) -> NTable {
    let window = TruncationWindow::new(max_omega_two_beta, 0);
    let mut entries = BTreeMap::new();
    for v in sharp_support(g, &window) {
        let period = g.omega_two_beta(&v.two_beta) / 2;
        if period == 0 {
            continue;
        }
        let pattern: Vec<Rat> = (0..period)
            .map(|_| if rng.gen_bool(0.7) { small_rational(rng) } else { rat(0) })
            .collect();
        for n in 0..=n_max {
            entries.insert(ChargeKey::new(v.two_beta.clone(), 6 * n), pattern[(n % period) as usize].clone());
        }
    }
    NTable::new(g.curve_rank(), entries).expect("sharp points are valid N keys")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_reproduce() {
        let g = GeometryData::single_class(-200, 5, 1).unwrap();
        let cone = ConeSpec::sharp(TruncationWindow::new(4, 36));
        let a = element(&g, &mut rng(7), &cone, 5, true).unwrap();
        let b = element(&g, &mut rng(7), &cone, 5, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }

    #[test]
    fn supports_respect_the_cone() {
        let g = GeometryData::single_class(-200, 5, 1).unwrap();
        let cone = ConeSpec::shifted(&g, 2, vec![1], TruncationWindow::new(4, 12).with_min_six_n(-6)).unwrap();
        let s = shifted_support(&g, &cone);
        assert!(s.iter().all(|v| cone.in_window(&g, v)));
        assert!(s.iter().any(|v| v.two_beta[0] < 0));
        let n = periodic_ntable(&g, &mut rng(1), 4, 10);
        for (k, v) in n.entries() {
            let p = k.two_beta[0] / 2;
            let shifted = ChargeKey::new(k.two_beta.clone(), k.six_n + 6 * p);
            if k.six_n / 6 + p <= 10 {
                assert_eq!(&n.get(&shifted), v);
            }
        }
    }
}
