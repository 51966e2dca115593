//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use beliefkit::{Bits, Bpa, ConfigSet, Frame, Population, Rational, Scalar};
use proptest::prelude::*;

pub fn contributors() -> Arc<Frame> {
    Frame::new([("A", vec!["AX", "BY", "CZ", "DT"])]).unwrap()
}

/// The 100-document worked example.
pub const CORPUS: [(&str, i64); 9] = [
    ("A={AX}", 5),
    ("A={BY}", 15),
    ("A={CZ}", 8),
    ("A={DT}", 2),
    ("A={AX,BY}", 24),
    ("A={AX,CZ}", 11),
    ("A={AX,BY,CZ}", 20),
    ("A={AX,BY,DT}", 9),
    ("*", 6),
];

/// One object per document.
pub fn corpus<S: Scalar>() -> Population<S> {
    let f = contributors();
    let counts: Vec<(ConfigSet, usize)> = CORPUS
        .iter()
        .map(|(e, c)| (f.parse_set(e).unwrap(), *c as usize))
        .collect();
    Population::from_counts(&f, &counts).unwrap()
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

pub fn set(f: &Arc<Frame>, e: &str) -> ConfigSet {
    f.parse_set(e).unwrap()
}

/// Bel by direct summation: Σ m(B) over focal B ⊆ A.
pub fn bel_oracle<S: Scalar>(m: &Bpa<S>, a: u64) -> S {
    let mut acc = S::zero();
    for (b, v) in m.focal_bits() {
        if b.mask() & !a == 0 {
            acc = acc + v.clone();
        }
    }
    acc
}

/// Q by direct summation: Σ m(B) over focal B ⊇ A.
pub fn q_oracle<S: Scalar>(m: &Bpa<S>, a: u64) -> S {
    let mut acc = S::zero();
    for (b, v) in m.focal_bits() {
        if b.mask() & a == a {
            acc = acc + v.clone();
        }
    }
    acc
}

/// Unnormalized Dempster product on masks: the textbook definition.
pub fn dempster_oracle(n: usize, a: &[(u64, f64)], b: &[(u64, f64)]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << n];
    for &(x, mx) in a {
        for &(y, my) in b {
            out[(x & y) as usize] += mx * my;
        }
    }
    out
}

pub fn masks<S: Scalar>(m: &Bpa<S>) -> Vec<(u64, f64)> {
    m.focal_bits().iter().map(|(b, v)| (b.mask(), v.to_f64_lossy())).collect()
}

/// Domain sizes whose product stays within `cap`.
pub fn domains(max_vars: usize, cap: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 1..=max_vars).prop_filter("frame too large", move |d| d.iter().product::<usize>() <= cap && d.iter().product::<usize>() >= 2)
}

pub fn frame_of(domains: &[usize]) -> Arc<Frame> {
    let names = ["U", "V", "W", "X"];
    Frame::new(domains.iter().enumerate().map(|(i, &k)| {
        (names[i], (0..k).map(|j| format!("v{j}")).collect::<Vec<_>>())
    }))
    .unwrap()
}

/// Random proper bpa with up to `k` focal elements and integer weights.
pub fn proper_entries(n: usize, k: usize) -> impl Strategy<Value = Vec<(u64, u32)>> {
    let full = (1u64 << n) - 1;
    prop::collection::vec((1..=full, 1u32..=20), 1..=k)
}

pub fn bpa_from<S: Scalar>(f: &Arc<Frame>, entries: &[(u64, u32)]) -> Bpa<S> {
    let n = f.size();
    Bpa::from_bits(
        f.clone(),
        entries.iter().map(|&(m, w)| (Bits::from_mask(n, m), S::from_u32(w).unwrap())),
    )
    .unwrap()
}

/// Frame plus a random proper bpa on it.
pub fn frame_and_bpa(max_vars: usize, cap: usize, k: usize) -> impl Strategy<Value = (Vec<usize>, Vec<(u64, u32)>)> {
    domains(max_vars, cap).prop_flat_map(move |d| {
        let n: usize = d.iter().product();
        (Just(d), proper_entries(n, k))
    })
}

/// Population records `(attribute mask, label mask, weight)` with nonempty
/// effective value.
pub fn records(n: usize, k: usize) -> impl Strategy<Value = Vec<(u64, u64, u32)>> {
    let full = (1u64 << n) - 1;
    prop::collection::vec((1..=full, 1..=full, 1u32..=9), 1..=k)
        .prop_map(|v| v.into_iter().filter(|(a, l, _)| a & l != 0).collect::<Vec<_>>())
        .prop_filter("no usable record", |v| !v.is_empty())
}

pub fn population_from(f: &Arc<Frame>, recs: &[(u64, u64, u32)]) -> Population<Rational> {
    let n = f.size();
    let mut p = Population::new(f);
    for &(a, l, w) in recs {
        let a = ConfigSet::from_bits(f.clone(), Bits::from_mask(n, a)).unwrap();
        let l = ConfigSet::from_bits(f.clone(), Bits::from_mask(n, l)).unwrap();
        p.push_labeled(&a, &l, Rational::from_ratio(w as i64, 1), beliefkit::Sign::Plus)
            .unwrap();
    }
    p
}

/// Largest Bel gap measured in standard errors, over every nonempty subset.
/// `sigma2(truth_bel, mask)` gives the per-observation variance of the Bel
/// estimator at that set; `n` is the number of observations.
pub fn worst_z(emp: &Bpa<f64>, truth: &Bpa<f64>, n: f64, sigma2: impl Fn(f64, u64) -> f64) -> (f64, u64) {
    let size = truth.frame().size();
    let full = (1u64 << size) - 1;
    let emp = emp.coerce_to(truth.frame()).unwrap();
    let mut worst = (0.0, 0);
    for a in 1..=full {
        let t = bel_oracle(truth, a);
        let e = bel_oracle(&emp, a);
        let sd = (sigma2(t, a).max(0.0) / n).sqrt();
        let z = if sd == 0.0 {
            if (t - e).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (t - e).abs() / sd
        };
        if z > worst.0 {
            worst = (z, a);
        }
    }
    worst
}

/// Binomial variance of an empirical Bel at truth `p`.
pub fn binomial(p: f64, _: u64) -> f64 {
    p * (1.0 - p)
}

/// Factor on `{child} ∪ parents` that applies `table[parent config]` to the
/// child and leaves the parents vacuous. Rows are `[m(0), m(1), m(both)]`
/// over binary variables, parent configurations in row-major order.
pub fn conditional_embedding(f: &Arc<Frame>, child: &str, parents: &[&str], table: &[[f64; 3]]) -> Bpa<f64> {
    let mut scope: Vec<&str> = parents.to_vec();
    scope.push(child);
    let sub = f.sub_frame(&scope).unwrap();
    let mut acc = Bpa::<f64>::vacuous(&sub);
    for (cfg, row) in table.iter().enumerate() {
        let cond: Vec<String> = parents
            .iter()
            .enumerate()
            .map(|(k, p)| format!("{p}={{{}}}", (cfg >> (parents.len() - 1 - k)) & 1))
            .collect();
        let here = cond.join(" & ");
        let elsewhere = sub.parse_set(&here).unwrap().complement();
        let mk = |v: &str| {
            let s = sub.parse_set(&format!("{here} & {child}={{{v}}}")).unwrap();
            s.union(&elsewhere).unwrap()
        };
        let entries = [(mk("0"), row[0]), (mk("1"), row[1]), (sub.full_set(), row[2])];
        let piece = Bpa::<f64>::from_masses(&sub, entries.into_iter().filter(|(_, w)| *w > 0.0)).unwrap();
        acc = acc.combine(&piece).unwrap();
    }
    acc
}

/// Population whose empirical bpa is exactly `m`, scaled to `n` cases.
pub fn population_of(m: &Bpa<f64>, n: f64) -> Population<f64> {
    let mut p = Population::new(m.frame());
    for (set, w) in m.focal() {
        p.push_attribute(&set, w * n).unwrap();
    }
    p
}
