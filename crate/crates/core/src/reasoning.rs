//! Model-based and data-based reasoning under evidence.
//!
//! The model engine combines the joint of a factored model with every
//! evidence constraint and projects. The data engine replays the same
//! constraints on a copy of a population, record by record, and reads off
//! empirical marginals. On the same data both must agree.

use std::sync::Arc;

use crate::bpa::{Bpa, MeasureTable};
use crate::error::{Error, Result};
use crate::frame::{Bits, ConfigSet, Frame, Limits};
use crate::lattice;
use crate::netmodel::FactoredModel;
use crate::population::Population;
use crate::scalar::Scalar;

/// Ordered list of evidence constraints, each a proper bpa. A constraint
/// with a single focal set is deterministic evidence.
#[derive(Debug, Clone)]
pub struct EvidenceSpec<S> {
    constraints: Vec<Bpa<S>>,
}

impl<S: Scalar> Default for EvidenceSpec<S> {
    fn default() -> Self {
        EvidenceSpec { constraints: Vec::new() }
    }
}

impl<S: Scalar> EvidenceSpec<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_constraints(constraints: Vec<Bpa<S>>) -> Result<Self> {
        let mut e = Self::new();
        for c in constraints {
            e.push(c)?;
        }
        Ok(e)
    }

    pub fn push(&mut self, constraint: Bpa<S>) -> Result<()> {
        if !constraint.is_proper() {
            return Err(Error::NotProper);
        }
        self.constraints.push(constraint);
        Ok(())
    }

    /// Adds deterministic evidence "the true value lies in `set`".
    pub fn observe(&mut self, set: &ConfigSet) -> Result<()> {
        self.push(Bpa::point_mass(set)?)
    }

    pub fn constraints(&self) -> &[Bpa<S>] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    fn check_scope(&self, frame: &Frame) -> Result<()> {
        for c in &self.constraints {
            if !c.frame().is_sub_frame_of(frame) {
                return Err(Error::ScopeMismatch(format!(
                    "evidence over [{}] is outside the frame",
                    c.frame().names().join(",")
                )));
            }
        }
        Ok(())
    }
}

fn is_deterministic<S: Scalar>(c: &Bpa<S>) -> Option<ConfigSet> {
    if c.len() == 1 {
        c.focal().next().map(|(s, _)| s)
    } else {
        None
    }
}

fn marginals<S: Scalar>(joint: &Bpa<S>, targets: &[Vec<String>]) -> Result<Vec<Bpa<S>>> {
    if targets.is_empty() {
        return Ok(vec![joint.clone()]);
    }
    targets.iter().map(|t| joint.project(t)).collect()
}

/// Posterior joint of `model` under `evidence`.
pub fn posterior_joint<S: Scalar, M: FactoredModel<S> + ?Sized>(model: &M, evidence: &EvidenceSpec<S>) -> Result<Bpa<S>> {
    evidence.check_scope(model.frame())?;
    let mut joint = model.joint()?;
    for c in evidence.constraints() {
        joint = joint.combine(c)?;
    }
    joint.coerce_to(model.frame())
}

/// Model engine: posterior marginals on each target scope (the full frame
/// when `targets` is empty).
pub fn reason_model<S: Scalar, M: FactoredModel<S> + ?Sized>(model: &M, evidence: &EvidenceSpec<S>, targets: &[Vec<String>]) -> Result<Vec<Bpa<S>>> {
    marginals(&posterior_joint(model, evidence)?, targets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataMode {
    /// Probabilistic constraints split every record into fractional survivors.
    #[default]
    Analytic,
    /// Each record draws one focal set per probabilistic constraint.
    MonteCarlo { seed: u64 },
}

/// Applies the evidence to a copy of `pop` and returns the surviving
/// population. Deterministic constraints use the selection rule; the mode
/// decides how probabilistic ones are handled.
pub fn apply_evidence<S: Scalar>(pop: &Population<S>, evidence: &EvidenceSpec<S>, mode: DataMode) -> Result<Population<S>> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    evidence.check_scope(pop.frame())?;
    let mut cur = pop.clone();
    for (k, c) in evidence.constraints().iter().enumerate() {
        cur = match (is_deterministic(c), mode) {
            (Some(set), _) => cur.apply_deterministic_process(&set)?,
            (None, DataMode::Analytic) => cur.expected_counts(c)?,
            (None, DataMode::MonteCarlo { seed }) => cur.apply_random_process_tagged(c, seed, k as u64 + 1)?,
        };
    }
    Ok(cur)
}

/// Data engine: empirical posterior marginals on each target scope.
pub fn reason_data<S: Scalar>(pop: &Population<S>, evidence: &EvidenceSpec<S>, targets: &[Vec<String>], mode: DataMode) -> Result<Vec<Bpa<S>>> {
    let survivors = apply_evidence(pop, evidence, mode)?;
    marginals(&survivors.empirical_bpa()?, targets)
}

/// Bel/Pl/Q table over the focal elements of `m` followed by any extra
/// query sets.
pub fn measure_table<S: Scalar>(m: &Bpa<S>, extra: &[ConfigSet]) -> Result<MeasureTable<S>> {
    let mut queries: Vec<ConfigSet> = m.focal().map(|(s, _)| s).collect();
    for q in extra {
        let q = q.vacuous_extend(m.frame())?;
        if !queries.contains(&q) {
            queries.push(q);
        }
    }
    m.derive_measures(&queries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BelComparison {
    pub max_bel_diff: f64,
    pub mean_bel_diff: f64,
    /// Set attaining `max_bel_diff`.
    pub worst: Option<ConfigSet>,
    /// `Σ_A |m_a(A) − m_b(A)|`.
    pub l1_mass: f64,
    pub sets_compared: usize,
    /// Whether every nonempty subset of the frame was compared.
    pub full_lattice: bool,
}

/// Bel distances between two bpas on the same variables. Every nonempty
/// subset is compared when the frame fits the lattice cap, otherwise the
/// union-closure of both focal families.
pub fn compare_bels<S: Scalar>(a: &Bpa<S>, b: &Bpa<S>, limits: &Limits) -> Result<BelComparison> {
    let frame: &Arc<Frame> = a.frame();
    let (fa, fb) = (frame.names(), b.frame().names());
    if fa.len() != fb.len() || !b.frame().is_sub_frame_of(frame) {
        return Err(Error::ScopeMismatch(format!(
            "comparing [{}] with [{}]",
            fa.join(","),
            fb.join(",")
        )));
    }
    let b = b.coerce_to(frame)?;
    let n = frame.size();
    let mut l1 = 0.0;
    for (k, m) in a.focal_bits() {
        let o = b.focal_bits().get(k).map_or(0.0, |v| v.to_f64_lossy());
        l1 += (m.to_f64_lossy() - o).abs();
    }
    for (k, o) in b.focal_bits() {
        if !a.focal_bits().contains_key(k) {
            l1 += o.to_f64_lossy().abs();
        }
    }
    let mut max = 0.0;
    let mut sum = 0.0;
    let mut worst: Option<Bits> = None;
    let mut count = 0usize;
    let mut visit = |set: Bits, da: f64, db: f64| {
        let d = (da - db).abs();
        sum += d;
        count += 1;
        if d > max || worst.is_none() {
            max = d.max(max);
            worst = Some(set);
        }
    };
    let full_lattice = n <= limits.lattice_configs;
    if full_lattice {
        let ba = a.belief_lattice(limits)?;
        let bb = b.belief_lattice(limits)?;
        for mask in 1..ba.len() {
            visit(Bits::from_mask(n, mask as u64), ba[mask].to_f64_lossy(), bb[mask].to_f64_lossy());
        }
    } else {
        let gens = a.focal_bits().keys().chain(b.focal_bits().keys()).cloned();
        for set in lattice::union_closure(gens, limits.max_closure)? {
            let (da, db) = (a.bel_bits(&set).to_f64_lossy(), b.bel_bits(&set).to_f64_lossy());
            visit(set, da, db);
        }
    }
    Ok(BelComparison {
        max_bel_diff: max,
        mean_bel_diff: if count == 0 { 0.0 } else { sum / count as f64 },
        worst: worst.map(|w| ConfigSet::from_bits_unchecked(frame.clone(), w)),
        l1_mass: l1,
        sets_compared: count,
        full_lattice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn contributors() -> Arc<Frame> {
        Frame::new([("A", vec!["AX", "BY", "CZ", "DT", "EU", "FV"])]).unwrap()
    }

    fn small_pop<S: Scalar>() -> Population<S> {
        let f = contributors();
        let counts = [
            ("A={AX}", 5),
            ("A={BY}", 15),
            ("A={CZ}", 8),
            ("A={AX,BY}", 4),
            ("A={BY,CZ}", 33),
            ("A={CZ,DT}", 2),
        ];
        let mut p = Population::new(&f);
        for (e, c) in counts {
            p.push_attribute(&f.parse_set(e).unwrap(), S::from_ratio(c, 1)).unwrap();
        }
        p
    }

    #[test]
    fn empty_evidence_is_identity() {
        let pop = small_pop::<f64>();
        let m = pop.empirical_bpa().unwrap();
        let r = reason_data(&pop, &EvidenceSpec::new(), &[], DataMode::Analytic).unwrap();
        assert!(r[0].approx_eq(&m, &0.0));
        let r = reason_model(&m, &EvidenceSpec::new(), &[]).unwrap();
        assert!(r[0].approx_eq(&m, &0.0));
    }

    #[test]
    fn deterministic_evidence_agrees_exactly() {
        let pop = small_pop::<Rational>();
        let f = pop.frame().clone();
        let mut ev = EvidenceSpec::new();
        ev.observe(&f.parse_set("A={AX,BY,CZ}").unwrap()).unwrap();
        let data = reason_data(&pop, &ev, &[], DataMode::Analytic).unwrap();
        let model = reason_model(&pop.empirical_bpa().unwrap(), &ev, &[]).unwrap();
        assert_eq!(data, model);
    }

    #[test]
    fn compare_identical_is_zero() {
        let m = small_pop::<f64>().empirical_bpa().unwrap();
        let c = compare_bels(&m, &m, &Limits::default()).unwrap();
        assert_eq!(c.max_bel_diff, 0.0);
        assert_eq!(c.l1_mass, 0.0);
        assert_eq!(c.sets_compared, 63);
        let small = Limits {
            lattice_configs: 0,
            ..Limits::default()
        };
        let c = compare_bels(&m, &m, &small).unwrap();
        assert!(!c.full_lattice && c.max_bel_diff == 0.0);
    }

    #[test]
    fn improper_evidence_rejected() {
        let f = contributors();
        let m = Bpa::from_exprs(&f, &[("A={AX}", -0.2), ("*", 0.8)]).unwrap();
        assert!(matches!(EvidenceSpec::from_constraints(vec![m]), Err(Error::NotProper)));
    }
}
