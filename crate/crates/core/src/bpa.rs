//! Basic probability assignments and the measure algebra over them.
//!
//! A [`Bpa`] is a sparse, signed map from focal elements to masses with
//! `Σ|m| = 1`. Masses may be negative for generalized and pseudo belief
//! functions. Every operation renormalizes the absolute sum to one and keeps
//! the factor it applied in [`Bpa::scale`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frame::{Bits, ConfigSet, Frame, Limits};
use crate::lattice;
use crate::scalar::Scalar;

/// Which family a signed mass function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BpaClass {
    /// All masses nonnegative.
    Proper,
    /// Commonality nonnegative on every nonempty set.
    Pseudo,
    /// Belief nonnegative on every set.
    Generalized,
    /// Neither belief nor commonality stays nonnegative.
    Invalid,
}

impl fmt::Display for BpaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BpaClass::Proper => "proper",
            BpaClass::Pseudo => "pseudo",
            BpaClass::Generalized => "generalized",
            BpaClass::Invalid => "invalid",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Bpa<S> {
    frame: Arc<Frame>,
    focal: BTreeMap<Bits, S>,
    scale: S,
}

impl<S: Scalar> PartialEq for Bpa<S> {
    fn eq(&self, other: &Self) -> bool {
        Frame::same(&self.frame, &other.frame) && self.focal == other.focal
    }
}

impl<S: Scalar> Bpa<S> {
    /// Builds a bpa from raw (bit-set, mass) pairs. Duplicate keys accumulate,
    /// negligible masses are dropped and the result is rescaled to `Σ|m| = 1`.
    pub fn from_bits(frame: Arc<Frame>, entries: impl IntoIterator<Item = (Bits, S)>) -> Result<Self> {
        let mut focal: BTreeMap<Bits, S> = BTreeMap::new();
        for (b, m) in entries {
            let slot = focal.entry(b).or_insert_with(S::zero);
            *slot = slot.clone() + m;
        }
        Self::normalized(frame, focal, "construction")
    }

    pub fn from_masses(frame: &Arc<Frame>, entries: impl IntoIterator<Item = (ConfigSet, S)>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (set, m) in entries {
            if !Frame::same(set.frame(), frame) {
                return Err(Error::FrameMismatch("focal element on a foreign frame".into()));
            }
            pairs.push((set.into_bits(), m));
        }
        Self::from_bits(frame.clone(), pairs)
    }

    /// Convenience constructor from cylinder-expression strings.
    pub fn from_exprs(frame: &Arc<Frame>, entries: &[(&str, S)]) -> Result<Self> {
        let pairs = entries
            .iter()
            .map(|(e, m)| Ok((frame.parse_set(e)?, m.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::from_masses(frame, pairs)
    }

    fn normalized(frame: Arc<Frame>, mut focal: BTreeMap<Bits, S>, what: &'static str) -> Result<Self> {
        if let Some((k, m)) = focal.iter().find(|(k, _)| k.is_empty()) {
            if !m.is_negligible() {
                return Err(Error::EmptySet("mass on the empty set".into()));
            }
            let k = k.clone();
            focal.remove(&k);
        }
        focal.retain(|_, m| !m.is_negligible());
        let total = focal.values().fold(S::zero(), |a, m| a + m.abs());
        if total.is_zero() {
            return Err(Error::ZeroMeasure(what));
        }
        // totals within rounding of one are kept as-is so that written
        // masses parse back bit-for-bit
        let scale = if (total.clone() - S::one()).is_negligible() {
            S::one()
        } else {
            S::one() / total
        };
        if !scale.is_one() {
            for m in focal.values_mut() {
                *m = m.clone() * scale.clone();
            }
            focal.retain(|_, m| !m.is_negligible());
        }
        Ok(Bpa { frame, focal, scale })
    }

    /// Total ignorance: all mass on the whole frame.
    pub fn vacuous(frame: &Arc<Frame>) -> Self {
        let mut focal = BTreeMap::new();
        focal.insert(Bits::full(frame.size()), S::one());
        Bpa {
            frame: frame.clone(),
            focal,
            scale: S::one(),
        }
    }

    /// Deterministic evidence `m(B) = 1`.
    pub fn point_mass(set: &ConfigSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet("point-mass evidence".into()));
        }
        let mut focal = BTreeMap::new();
        focal.insert(set.bits().clone(), S::one());
        Ok(Bpa {
            frame: set.frame().clone(),
            focal,
            scale: S::one(),
        })
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    /// Normalizing factor applied by the operation that produced this value.
    pub fn scale(&self) -> &S {
        &self.scale
    }

    pub fn len(&self) -> usize {
        self.focal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.focal.is_empty()
    }

    pub fn focal_bits(&self) -> &BTreeMap<Bits, S> {
        &self.focal
    }

    pub fn focal(&self) -> impl Iterator<Item = (ConfigSet, &S)> + '_ {
        self.focal
            .iter()
            .map(|(b, m)| (ConfigSet::from_bits_unchecked(self.frame.clone(), b.clone()), m))
    }

    pub fn mass(&self, set: &ConfigSet) -> Result<S> {
        self.check(set)?;
        Ok(self.focal.get(set.bits()).cloned().unwrap_or_else(S::zero))
    }

    pub fn abs_sum(&self) -> S {
        self.focal.values().fold(S::zero(), |a, m| a + m.abs())
    }

    pub fn signed_sum(&self) -> S {
        self.focal.values().fold(S::zero(), |a, m| a + m.clone())
    }

    pub fn is_proper(&self) -> bool {
        self.focal.values().all(|m| *m >= S::zero())
    }

    /// Proper with singleton focal elements only: an ordinary distribution.
    pub fn is_bayesian(&self) -> bool {
        self.is_proper() && self.focal.keys().all(|b| b.count() == 1)
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal.contains_key(&Bits::full(self.frame.size()))
    }

    pub fn class(&self) -> BpaClass {
        if self.is_proper() {
            return BpaClass::Proper;
        }
        self.validate().class
    }

    fn check(&self, set: &ConfigSet) -> Result<()> {
        if Frame::same(set.frame(), &self.frame) {
            Ok(())
        } else {
            Err(Error::FrameMismatch("query set lives on another frame".into()))
        }
    }

    pub fn bel(&self, set: &ConfigSet) -> Result<S> {
        self.check(set)?;
        Ok(self.bel_bits(set.bits()))
    }

    pub(crate) fn bel_bits(&self, a: &Bits) -> S {
        self.focal
            .iter()
            .filter(|(b, _)| b.is_subset(a))
            .fold(S::zero(), |acc, (_, m)| acc + m.clone())
    }

    /// `Pl(A) = 1 − Bel(Ξ − A)`.
    pub fn pl(&self, set: &ConfigSet) -> Result<S> {
        self.check(set)?;
        Ok(S::one() - self.bel_bits(&set.bits().complement(self.frame.size())))
    }

    /// Commonality; `None` for the empty set, where it is undefined.
    pub fn q(&self, set: &ConfigSet) -> Result<Option<S>> {
        self.check(set)?;
        Ok((!set.is_empty()).then(|| self.q_bits(set.bits())))
    }

    pub(crate) fn q_bits(&self, a: &Bits) -> S {
        self.focal
            .iter()
            .filter(|(b, _)| a.is_subset(b))
            .fold(S::zero(), |acc, (_, m)| acc + m.clone())
    }

    /// Bel, Pl and Q for each query set by direct summation over focal elements.
    pub fn derive_measures(&self, queries: &[ConfigSet]) -> Result<MeasureTable<S>> {
        let rows = queries
            .iter()
            .map(|a| {
                Ok(MeasureRow {
                    set: a.clone(),
                    mass: self.mass(a)?,
                    bel: self.bel(a)?,
                    pl: self.pl(a)?,
                    q: self.q(a)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MeasureTable {
            frame: self.frame.clone(),
            rows,
        })
    }

    /// Dense commonality table over the full subset lattice (entry 0 holds `Σm`).
    pub fn commonality_lattice(&self, limits: &Limits) -> Result<Vec<S>> {
        let n = lattice::check_lattice(&self.frame, limits)?;
        let mut f = lattice::dense(n, &self.focal);
        lattice::zeta_superset(&mut f, n);
        Ok(f)
    }

    /// Dense belief table over the full subset lattice.
    pub fn belief_lattice(&self, limits: &Limits) -> Result<Vec<S>> {
        let n = lattice::check_lattice(&self.frame, limits)?;
        let mut f = lattice::dense(n, &self.focal);
        lattice::zeta_subset(&mut f, n);
        Ok(f)
    }

    /// Same frame: clone. Sub-frame: vacuous extension. Otherwise an error.
    pub fn coerce_to(&self, frame: &Arc<Frame>) -> Result<Self> {
        if Frame::same(&self.frame, frame) {
            Ok(self.clone())
        } else {
            self.vacuous_extend(frame)
        }
    }

    /// Dempster's rule. Operands on different frames are first extended to the
    /// smallest common super-frame.
    pub fn combine(&self, other: &Bpa<S>) -> Result<Bpa<S>> {
        if !Frame::same(&self.frame, &other.frame) {
            let joint = Frame::union(&self.frame, &other.frame)?;
            return self.coerce_to(&joint)?.combine(&other.coerce_to(&joint)?);
        }
        let mut acc: BTreeMap<Bits, S> = BTreeMap::new();
        for (b, mb) in &self.focal {
            for (c, mc) in &other.focal {
                let a = b.and(c);
                if a.is_empty() {
                    continue;
                }
                let slot = acc.entry(a).or_insert_with(S::zero);
                *slot = slot.clone() + mb.clone() * mc.clone();
            }
        }
        if acc.is_empty() {
            return Err(Error::TotalConflict);
        }
        Self::normalized(self.frame.clone(), acc, "combination").map_err(|e| match e {
            Error::ZeroMeasure(_) => Error::TotalConflict,
            e => e,
        })
    }

    /// Marginalization onto `target` variables (canonical frame order).
    pub fn project<N: AsRef<str>>(&self, target: &[N]) -> Result<Bpa<S>> {
        if target.is_empty() {
            return Err(Error::BadVariableList);
        }
        let sub = self.frame.sub_frame(target)?;
        self.project_to(&sub)
    }

    pub fn project_to(&self, sub: &Arc<Frame>) -> Result<Bpa<S>> {
        if Frame::same(sub, &self.frame) {
            return Ok(self.clone());
        }
        let map = self.frame.projection_map(sub)?;
        let entries = self
            .focal
            .iter()
            .map(|(b, m)| (b.map_through(&map, sub.size()), m.clone()));
        let mut acc: BTreeMap<Bits, S> = BTreeMap::new();
        for (b, m) in entries {
            let slot = acc.entry(b).or_insert_with(S::zero);
            *slot = slot.clone() + m;
        }
        Self::normalized(sub.clone(), acc, "projection")
    }

    /// Lifts every focal element to its cylinder on `super_frame`.
    pub fn vacuous_extend(&self, super_frame: &Arc<Frame>) -> Result<Bpa<S>> {
        if !self.frame.is_sub_frame_of(super_frame) {
            return Err(Error::FrameMismatch(format!(
                "[{}] is not a sub-frame of [{}]",
                self.frame.names().join(","),
                super_frame.names().join(",")
            )));
        }
        if Frame::same(&self.frame, super_frame) {
            return Ok(self.clone());
        }
        let map = super_frame.projection_map(&self.frame)?;
        let focal = self
            .focal
            .iter()
            .map(|(b, m)| (b.preimage(&map), m.clone()))
            .collect();
        Ok(Bpa {
            frame: super_frame.clone(),
            focal,
            scale: S::one(),
        })
    }

    /// Shaferian conditioning on evidence `B`: combination with `m_B(B) = 1`.
    pub fn condition(&self, evidence: &ConfigSet) -> Result<Bpa<S>> {
        self.combine(&Bpa::point_mass(evidence)?)
    }

    /// Apriorical conditional on `given`: a pseudo-belief function `c` with
    /// `c ⊕ (self↓given)↑ = self`, obtained as the commonality quotient.
    pub fn apriorical_conditional<N: AsRef<str>>(&self, given: &[N]) -> Result<Bpa<S>> {
        self.apriorical_conditional_with(given, &Limits::default(), &S::default_tolerance())
    }

    pub fn apriorical_conditional_with<N: AsRef<str>>(
        &self,
        given: &[N],
        limits: &Limits,
        tol: &S,
    ) -> Result<Bpa<S>> {
        if given.is_empty() {
            return Ok(self.clone());
        }
        let marginal = self.project(given)?.vacuous_extend(&self.frame)?;
        let cond = if self.frame.size() <= limits.lattice_configs {
            self.quotient_full_lattice(&marginal, limits)?
        } else {
            self.quotient_closure(&marginal, limits)?
        };
        let report = cond.validate_with(limits, tol);
        if report.min_q < -tol.clone() {
            return Err(Error::NotPseudo {
                min_q: report.min_q.to_f64_lossy(),
            });
        }
        Ok(cond)
    }

    fn quotient(qj: &S, qm: &S) -> Result<S> {
        if qm.is_negligible() {
            if qj.is_negligible() {
                Ok(S::zero())
            } else {
                Err(Error::ZeroCommonality)
            }
        } else {
            Ok(qj.clone() / qm.clone())
        }
    }

    fn quotient_full_lattice(&self, marginal: &Bpa<S>, limits: &Limits) -> Result<Bpa<S>> {
        let qj = self.commonality_lattice(limits)?;
        let qm = marginal.commonality_lattice(limits)?;
        let mut qc = Vec::with_capacity(qj.len());
        qc.push(S::zero());
        for (a, b) in qj.iter().zip(&qm).skip(1) {
            qc.push(Self::quotient(a, b)?);
        }
        Ok(invert_commonality(&self.frame, &qc, limits)?.0)
    }

    /// Sparse route for frames above the lattice cap. The quotient is constant
    /// on classes of sets sharing their closure in the intersection-closed
    /// family generated by both focal families, so inverting on that family
    /// is exact.
    fn quotient_closure(&self, marginal: &Bpa<S>, limits: &Limits) -> Result<Bpa<S>> {
        let gens = self.focal.keys().chain(marginal.focal.keys()).cloned();
        let mut family = lattice::intersection_closure(gens, limits.max_closure)?;
        family.sort_by_key(|b| std::cmp::Reverse(b.count()));
        let mut masses: Vec<S> = Vec::with_capacity(family.len());
        for (i, a) in family.iter().enumerate() {
            let q = Self::quotient(&self.q_bits(a), &marginal.q_bits(a))?;
            let above = family[..i]
                .iter()
                .zip(&masses)
                .filter(|(b, _)| a.is_subset(b) && *b != a)
                .fold(S::zero(), |acc, (_, m)| acc + m.clone());
            masses.push(q - above);
        }
        Self::from_bits(self.frame.clone(), family.into_iter().zip(masses))
    }

    pub fn validate(&self) -> ValidationReport<S> {
        self.validate_with(&Limits::default(), &S::default_tolerance())
    }

    /// Diagnostic: absolute sum, minimal belief and commonality, and class.
    /// Uses the full lattice when it fits, otherwise the union- and
    /// intersection-closures of the focal elements (which attain the same
    /// minima).
    pub fn validate_with(&self, limits: &Limits, tol: &S) -> ValidationReport<S> {
        let n = self.frame.size();
        let (min_bel, min_q, full_lattice, exhaustive) = if n <= limits.lattice_configs {
            let mut bel = lattice::dense(n, &self.focal);
            lattice::zeta_subset(&mut bel, n);
            let mut q = lattice::dense(n, &self.focal);
            lattice::zeta_superset(&mut q, n);
            let min = |v: Vec<S>| v.into_iter().skip(1).reduce(S::min_of).unwrap_or_else(S::zero);
            (min(bel), min(q), true, true)
        } else {
            let full = Bits::full(n);
            let mut exhaustive = true;
            let unions = lattice::union_closure(self.focal.keys().cloned(), limits.max_closure)
                .unwrap_or_else(|_| {
                    exhaustive = false;
                    self.focal.keys().cloned().collect()
                });
            let mut min_bel = unions.iter().map(|a| self.bel_bits(a)).reduce(S::min_of).unwrap_or_else(S::zero);
            // some nonempty set contains no focal element
            if (0..n).any(|i| !self.focal.contains_key(&Bits::from_indices(n, [i]))) {
                min_bel = S::min_of(min_bel, S::zero());
            }
            let inters = lattice::intersection_closure(self.focal.keys().cloned(), limits.max_closure)
                .unwrap_or_else(|_| {
                    exhaustive = false;
                    self.focal.keys().cloned().collect()
                });
            let mut min_q = inters.iter().map(|a| self.q_bits(a)).reduce(S::min_of).unwrap_or_else(S::zero);
            if !self.focal.contains_key(&full) {
                min_q = S::min_of(min_q, S::zero());
            }
            (min_bel, min_q, false, exhaustive)
        };
        let neg_tol = -tol.clone();
        let class = if self.is_proper() {
            BpaClass::Proper
        } else if min_q >= neg_tol {
            BpaClass::Pseudo
        } else if min_bel >= neg_tol {
            BpaClass::Generalized
        } else {
            BpaClass::Invalid
        };
        ValidationReport {
            abs_sum: self.abs_sum(),
            signed_sum: self.signed_sum(),
            min_bel,
            min_q,
            class,
            full_lattice,
            exhaustive,
        }
    }

    /// Largest absolute mass difference over the union of both focal families.
    pub fn max_mass_diff(&self, other: &Bpa<S>) -> Result<S> {
        if !Frame::same(&self.frame, &other.frame) {
            return Err(Error::FrameMismatch("comparing bpas on different frames".into()));
        }
        let mut max = S::zero();
        for (k, m) in &self.focal {
            let o = other.focal.get(k).cloned().unwrap_or_else(S::zero);
            max = S::max_of(max, (m.clone() - o).abs());
        }
        for (k, o) in &other.focal {
            if !self.focal.contains_key(k) {
                max = S::max_of(max, o.abs());
            }
        }
        Ok(max)
    }

    pub fn approx_eq(&self, other: &Bpa<S>, tol: &S) -> bool {
        self.max_mass_diff(other).is_ok_and(|d| d <= *tol)
    }

    /// Converts masses to another scalar type.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Result<Bpa<T>> {
        Bpa::from_bits(self.frame.clone(), self.focal.iter().map(|(b, m)| (b.clone(), f(m))))
    }
}

/// Inverts a dense commonality table (index = subset mask, entry 0 ignored)
/// into the unique signed mass function, rescaled to `Σ|m| = 1`. Returns the
/// bpa and the rescale factor applied.
pub fn invert_commonality<S: Scalar>(frame: &Arc<Frame>, q: &[S], limits: &Limits) -> Result<(Bpa<S>, S)> {
    let n = lattice::check_lattice(frame, limits)?;
    if q.len() != 1usize << n {
        return Err(Error::InvalidArgument(format!(
            "commonality table has {} entries, expected {}",
            q.len(),
            1usize << n
        )));
    }
    let mut m = q.to_vec();
    m[0] = S::zero();
    lattice::mobius_superset(&mut m, n);
    let entries: Vec<(Bits, S)> = m
        .into_iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| !v.is_zero())
        .map(|(k, v)| (Bits::from_mask(frame.size(), k as u64), v))
        .collect();
    let bpa = Bpa::from_bits(frame.clone(), entries).map_err(|e| match e {
        Error::ZeroMeasure(_) => Error::ZeroMeasure("commonality inversion"),
        e => e,
    })?;
    let scale = bpa.scale.clone();
    Ok((bpa, scale))
}

/// Folds a sequence of bpas with Dempster's rule.
pub fn combine_all<'a, S: Scalar>(items: impl IntoIterator<Item = &'a Bpa<S>>) -> Result<Bpa<S>> {
    let mut it = items.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidArgument("nothing to combine".into()))?
        .clone();
    it.try_fold(first, |acc, m| acc.combine(m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<S> {
    pub abs_sum: S,
    pub signed_sum: S,
    pub min_bel: S,
    pub min_q: S,
    pub class: BpaClass,
    pub full_lattice: bool,
    /// False when a closure hit its cap and only focal elements were checked.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRow<S> {
    pub set: ConfigSet,
    pub mass: S,
    pub bel: S,
    pub pl: S,
    pub q: Option<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable<S> {
    pub frame: Arc<Frame>,
    pub rows: Vec<MeasureRow<S>>,
}

impl<S: Scalar> fmt::Display for Bpa<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bpa over {}", self.frame.names().join(","))?;
        for (set, m) in self.focal() {
            writeln!(f, "{m} : {set}")?;
        }
        Ok(())
    }
}
