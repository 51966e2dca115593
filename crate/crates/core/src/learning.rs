//! Structure learning from populations.
//!
//! [`ci_test`] compares the empirical belief function on `X ∪ Y ∪ Z` with the
//! factored one `m↓XZ|Z ⊕ m↓YZ|Z ⊕ m↓Z` by a χ² statistic over focal sets.
//! [`learn_skeleton`] runs PC-stable edge elimination on top of it, and
//! [`fit_factors`] decomposes the empirical joint along a given DAG.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bpa::Bpa;
use crate::error::{Error, Result};
use crate::frame::{Bits, Limits};
use crate::netmodel::{decompose_joint_with, BeliefNetwork, Dag};
use crate::population::Population;
use crate::scalar::Scalar;

/// Expected-mass floor; cells below `n · EXPECTED_FLOOR` count as zero.
pub const EXPECTED_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CiOptions {
    pub alpha: f64,
    /// Minimum total weight per χ² cell.
    pub min_per_cell: f64,
    pub limits: Limits,
    pub tolerance: f64,
}

impl Default for CiOptions {
    fn default() -> Self {
        CiOptions {
            alpha: 0.05,
            min_per_cell: 5.0,
            limits: Limits::default(),
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CiFlag {
    /// Some observed cell had (near) zero expectation; its term was capped.
    ZeroExpected,
    /// The factored measure has negative mass; reported as dependent.
    NegativeExpected,
    /// A conditional was not a pseudo belief function; reported as dependent.
    NotPseudo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: Option<f64>,
    pub critical: f64,
    pub independent: bool,
    pub cells: usize,
    pub n: f64,
    pub flags: Vec<CiFlag>,
}

fn critical_value(df: usize, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 0.0;
    }
    if alpha <= 0.0 || df == 0 {
        return f64::INFINITY;
    }
    ChiSquared::new(df as f64)
        .map(|d| d.inverse_cdf(1.0 - alpha))
        .unwrap_or(f64::INFINITY)
}

fn p_value(stat: f64, df: usize) -> Option<f64> {
    if df == 0 {
        return Some(1.0);
    }
    ChiSquared::new(df as f64).ok().map(|d| d.sf(stat))
}

fn conditional<S: Scalar>(m: &Bpa<S>, given: &[&str], opts: &CiOptions) -> Result<Bpa<S>> {
    m.apriorical_conditional_with(given, &opts.limits, &S::from_f64_lossy(opts.tolerance))
}

/// χ² test of apriorical independence of `x` and `y` given `z`. `x` and `y`
/// are single variables, `z` any (possibly empty) set of others. The
/// decision is `statistic ≤ χ²_{df}(1 − α)`.
pub fn ci_test<S: Scalar>(pop: &Population<S>, x: &str, y: &str, z: &[&str], opts: &CiOptions) -> Result<CiResult> {
    if x == y || z.contains(&x) || z.contains(&y) {
        return Err(Error::BadVariableList);
    }
    let m = pop.empirical_bpa()?;
    let n = pop.total_weight().to_f64_lossy();
    let mut scope: Vec<&str> = vec![x, y];
    scope.extend_from_slice(z);
    let joint = m.project(&scope)?;
    let mut xz = vec![x];
    xz.extend_from_slice(z);
    let mut yz = vec![y];
    yz.extend_from_slice(z);

    let mut flags = Vec::new();
    let factored = (|| -> Result<Bpa<S>> {
        let cx = conditional(&joint.project(&xz)?, z, opts)?;
        let cy = conditional(&joint.project(&yz)?, z, opts)?;
        let mut acc = cx.combine(&cy)?;
        if !z.is_empty() {
            acc = joint.project(z)?.combine(&acc)?;
        }
        acc.vacuous_extend(joint.frame())
    })();
    let factored = match factored {
        Ok(f) => f,
        Err(Error::NotPseudo { .. }) => {
            flags.push(CiFlag::NotPseudo);
            return Ok(CiResult {
                statistic: f64::INFINITY,
                df: 0,
                p_value: None,
                critical: f64::INFINITY,
                independent: false,
                cells: 0,
                n,
                flags,
            });
        }
        Err(e) => return Err(e),
    };

    let mut cells: BTreeMap<Bits, (f64, f64)> = BTreeMap::new();
    for (b, w) in joint.focal_bits() {
        cells.entry(b.clone()).or_default().0 = n * w.to_f64_lossy();
    }
    for (b, w) in factored.focal_bits() {
        cells.entry(b.clone()).or_default().1 = n * w.to_f64_lossy();
    }
    let need = opts.min_per_cell * cells.len() as f64;
    if n < need {
        return Err(Error::InsufficientData { have: n, need });
    }
    let floor = n * EXPECTED_FLOOR;
    let mut stat = 0.0;
    let mut negative = false;
    for &(o, e) in cells.values() {
        if e < -n * opts.tolerance {
            negative = true;
        } else if e > floor {
            stat += (o - e) * (o - e) / e;
        } else if o > floor {
            stat += (o * o / floor).min(n);
            if !flags.contains(&CiFlag::ZeroExpected) {
                flags.push(CiFlag::ZeroExpected);
            }
        }
    }
    if negative {
        flags.push(CiFlag::NegativeExpected);
    }
    let df = cells.len().saturating_sub(1);
    let critical = critical_value(df, opts.alpha);
    let independent = !negative && (stat <= critical || (df == 0 && stat <= opts.tolerance * n));
    Ok(CiResult {
        statistic: stat,
        df,
        p_value: p_value(stat, df),
        critical,
        independent,
        cells: cells.len(),
        n,
        flags,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestRecord {
    pub x: usize,
    pub y: usize,
    pub z: Vec<usize>,
    pub outcome: std::result::Result<CiResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub names: Vec<String>,
    /// Undirected edges as `(i, j)` with `i < j`.
    pub edges: BTreeSet<(usize, usize)>,
    /// Separating set of every removed edge.
    pub sepsets: BTreeMap<(usize, usize), Vec<usize>>,
    /// Edges kept because a test on them failed.
    pub flagged: BTreeSet<(usize, usize)>,
    pub log: Vec<TestRecord>,
}

impl Skeleton {
    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        let i = self.names.iter().position(|n| n == a);
        let j = self.names.iter().position(|n| n == b);
        match (i, j) {
            (Some(i), Some(j)) => self.edges.contains(&(i.min(j), i.max(j))),
            _ => false,
        }
    }

    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    fn names_of(&self, idx: &[usize]) -> String {
        idx.iter().map(|&i| self.names[i].as_str()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(a, b) in &self.edges {
            write!(f, "edge {} -- {}", self.names[a], self.names[b])?;
            if self.flagged.contains(&(a, b)) {
                write!(f, " # flagged")?;
            }
            writeln!(f)?;
        }
        for ((a, b), z) in &self.sepsets {
            writeln!(f, "# sepset {} {} : {}", self.names[*a], self.names[*b], self.names_of(z))?;
        }
        Ok(())
    }
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// PC-stable skeleton search: start from the complete graph over the frame
/// variables; at level `l = 0..=max_cond` remove `X -- Y` if some `Z` of size
/// `l` taken from the level's adjacency of `X` or `Y` separates them.
pub fn learn_skeleton<S: Scalar>(pop: &Population<S>, opts: &CiOptions, max_cond: usize) -> Result<Skeleton> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    pop.empirical_bpa()?;
    let frame = pop.frame();
    let names: Vec<String> = frame.names().into_iter().map(String::from).collect();
    let k = names.len();
    let mut sk = Skeleton {
        names,
        edges: (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect(),
        sepsets: BTreeMap::new(),
        flagged: BTreeSet::new(),
        log: Vec::new(),
    };
    for level in 0..=max_cond {
        let adj: Vec<Vec<usize>> = (0..k).map(|v| sk.neighbours(v)).collect();
        if !adj.iter().any(|a| a.len() > level) {
            break;
        }
        let current: Vec<(usize, usize)> = sk.edges.iter().copied().collect();
        for (x, y) in current {
            let mut candidates: Vec<Vec<usize>> = Vec::new();
            for (a, b) in [(x, y), (y, x)] {
                let pool: Vec<usize> = adj[a].iter().copied().filter(|&v| v != b).collect();
                for s in subsets(&pool, level) {
                    if !candidates.contains(&s) {
                        candidates.push(s);
                    }
                }
            }
            for z in candidates {
                let zn: Vec<&str> = z.iter().map(|&i| sk.names[i].as_str()).collect();
                let outcome = ci_test(pop, &sk.names[x], &sk.names[y], &zn, opts).map_err(|e| e.to_string());
                let independent = match &outcome {
                    Ok(r) => r.independent,
                    Err(_) => {
                        sk.flagged.insert((x, y));
                        false
                    }
                };
                sk.log.push(TestRecord {
                    x,
                    y,
                    z: z.clone(),
                    outcome,
                });
                if independent {
                    sk.edges.remove(&(x, y));
                    sk.flagged.remove(&(x, y));
                    sk.sepsets.insert((x, y), z);
                    break;
                }
            }
        }
    }
    Ok(sk)
}

/// Decomposes the empirical joint of `pop` along `dag`.
pub fn fit_factors<S: Scalar>(pop: &Population<S>, dag: &Dag) -> Result<BeliefNetwork<S>> {
    fit_factors_with(pop, dag, &Limits::default(), &S::default_tolerance())
}

pub fn fit_factors_with<S: Scalar>(pop: &Population<S>, dag: &Dag, limits: &Limits, tol: &S) -> Result<BeliefNetwork<S>> {
    let m = pop.empirical_bpa()?;
    decompose_joint_with(&m, dag, limits, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Frame;
    use crate::netmodel::FactoredModel;
    use std::sync::Arc;

    fn frame3() -> Arc<Frame> {
        Frame::new([("X", vec!["0", "1"]), ("Y", vec!["0", "1"]), ("Z", vec!["0", "1"])]).unwrap()
    }

    /// Population holding `n · m(A)` on every focal set of `m`.
    fn exact_pop(m: &Bpa<f64>, n: f64) -> Population<f64> {
        let f = m.frame().clone();
        let mut p = Population::new(&f);
        for (set, w) in m.focal() {
            p.push_attribute(&set, w * n).unwrap();
        }
        p
    }

    fn product(f: &Arc<Frame>) -> Bpa<f64> {
        let parts = [("X", "X={0}", 0.3), ("Y", "Y={1}", 0.6), ("Z", "Z={0}", 0.45)];
        let mut acc = Bpa::vacuous(f);
        for (v, e, p) in parts {
            let s = f.sub_frame(&[v]).unwrap();
            acc = acc.combine(&Bpa::from_exprs(&s, &[(e, p), ("*", 1.0 - p)]).unwrap()).unwrap();
        }
        acc
    }

    #[test]
    fn exact_product_has_zero_statistic() {
        let f = frame3();
        let pop = exact_pop(&product(&f), 1000.0);
        let r = ci_test(&pop, "X", "Y", &[], &CiOptions::default()).unwrap();
        assert!(r.statistic < 1e-9, "{r:?}");
        assert!(r.independent);
        let r = ci_test(&pop, "X", "Z", &["Y"], &CiOptions::default()).unwrap();
        assert!(r.statistic < 1e-9);
        let s = ci_test(&pop, "Y", "X", &[], &CiOptions::default()).unwrap();
        assert!((s.statistic - ci_test(&pop, "X", "Y", &[], &CiOptions::default()).unwrap().statistic).abs() < 1e-12);
    }

    #[test]
    fn dependence_detected() {
        let f = frame3();
        let m = Bpa::from_exprs(&f, &[("X={0} & Y={0}", 0.45), ("X={1} & Y={1}", 0.45), ("*", 0.1)]).unwrap();
        let pop = exact_pop(&m, 1000.0);
        let r = ci_test(&pop, "X", "Y", &[], &CiOptions::default()).unwrap();
        assert!(!r.independent);
        assert!(r.p_value.unwrap() < 1e-6);
    }

    #[test]
    fn insufficient_data_and_empty_population() {
        let f = frame3();
        let pop = exact_pop(&product(&f), 3.0);
        assert!(matches!(
            ci_test(&pop, "X", "Y", &[], &CiOptions::default()),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            learn_skeleton(&Population::<f64>::new(&f), &CiOptions::default(), 1),
            Err(Error::EmptyPopulation)
        ));
    }

    #[test]
    fn edgeless_skeleton_and_marginal_fit() {
        let f = frame3();
        let m = product(&f);
        let pop = exact_pop(&m, 1000.0);
        let sk = learn_skeleton(&pop, &CiOptions::default(), 1).unwrap();
        assert!(sk.edges.is_empty());
        assert_eq!(sk.sepsets.len(), 3);
        let net = fit_factors(&pop, &Dag::edgeless(&["X", "Y", "Z"])).unwrap();
        assert!(net.joint().unwrap().approx_eq(&m, &1e-9));
        assert!(net.factor(0).approx_eq(&m.project(&["X"]).unwrap(), &1e-9));
    }

    #[test]
    fn alpha_limits() {
        assert_eq!(critical_value(3, 1.0), 0.0);
        assert!(critical_value(3, 0.0).is_infinite());
        assert!((critical_value(1, 0.05) - 3.841458820694124).abs() < 1e-6);
    }

    #[test]
    fn subsets_enumeration() {
        assert_eq!(subsets(&[1, 2, 3], 2), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(subsets(&[1, 2], 0), vec![Vec::<usize>::new()]);
    }
}
