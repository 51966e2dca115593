//! Labeled populations and destructive processes.
//!
//! Each object carries an attribute set and a label set. Its effective value
//! is their intersection, and the empirical belief function of a population
//! measures, for every set `A`, the share of objects whose effective value
//! lies inside `A`. A selection process `proc_B` rejects objects whose
//! effective value misses `B` and shrinks the labels of the others to
//! `label ∩ B`; its empirical result is Dempster conditioning on `B`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::bpa::Bpa;
use crate::error::{Error, Result};
use crate::frame::{Bits, ConfigSet, Frame};
use crate::rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn of<S: Scalar>(x: &S) -> Sign {
        if x.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledObject<S> {
    pub attribute: Bits,
    pub label: Bits,
    pub weight: S,
    pub sign: Sign,
}

impl<S: Scalar> LabeledObject<S> {
    pub fn effective(&self) -> Bits {
        self.attribute.and(&self.label)
    }

    pub fn signed_weight(&self) -> S {
        self.sign.apply(self.weight.clone())
    }
}

#[derive(Debug, Clone)]
pub struct Population<S> {
    frame: Arc<Frame>,
    objects: Vec<LabeledObject<S>>,
    provenance: String,
}

impl<S: Scalar> PartialEq for Population<S> {
    fn eq(&self, other: &Self) -> bool {
        Frame::same(&self.frame, &other.frame) && self.objects == other.objects
    }
}

/// Which constraint a random process applies to each object.
#[derive(Debug, Clone)]
struct ProcessDraws {
    sets: Vec<Bits>,
    probs: Vec<f64>,
}

impl<S: Scalar> Population<S> {
    pub fn new(frame: &Arc<Frame>) -> Self {
        Population {
            frame: frame.clone(),
            objects: Vec::new(),
            provenance: String::new(),
        }
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance = note.into();
        self
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn objects(&self) -> &[LabeledObject<S>] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Adds an object, enforcing nonempty attribute ∩ label and positive weight.
    pub fn push(&mut self, obj: LabeledObject<S>) -> Result<()> {
        let n = self.frame.size();
        if !obj.attribute.fits(n) || !obj.label.fits(n) {
            return Err(Error::FrameMismatch("object set outside the frame".into()));
        }
        if obj.effective().is_empty() {
            return Err(Error::EmptySet("attribute ∩ label of a live object".into()));
        }
        if obj.weight <= S::zero() {
            return Err(Error::InvalidArgument("object weight must be positive".into()));
        }
        self.objects.push(obj);
        Ok(())
    }

    /// Adds `weight` worth of objects with the given attribute and label `Ξ`.
    pub fn push_attribute(&mut self, attribute: &ConfigSet, weight: S) -> Result<()> {
        self.push_labeled(attribute, &self.frame.full_set(), weight, Sign::Plus)
    }

    pub fn push_labeled(&mut self, attribute: &ConfigSet, label: &ConfigSet, weight: S, sign: Sign) -> Result<()> {
        if !Frame::same(attribute.frame(), &self.frame) || !Frame::same(label.frame(), &self.frame) {
            return Err(Error::FrameMismatch("object sets on a foreign frame".into()));
        }
        self.push(LabeledObject {
            attribute: attribute.bits().clone(),
            label: label.bits().clone(),
            weight,
            sign,
        })
    }

    /// A population with one unit-weight object per count, label `Ξ`.
    pub fn from_counts(frame: &Arc<Frame>, counts: &[(ConfigSet, usize)]) -> Result<Self> {
        let mut pop = Population::new(frame);
        for (set, n) in counts {
            for _ in 0..*n {
                pop.push_attribute(set, S::one())?;
            }
        }
        Ok(pop)
    }

    pub fn total_weight(&self) -> S {
        self.objects.iter().fold(S::zero(), |a, o| a + o.signed_weight())
    }

    /// Net signed weight per effective set.
    pub fn cell_weights(&self) -> BTreeMap<Bits, S> {
        let mut cells: BTreeMap<Bits, S> = BTreeMap::new();
        for o in &self.objects {
            let slot = cells.entry(o.effective()).or_insert_with(S::zero);
            *slot = slot.clone() + o.signed_weight();
        }
        cells
    }

    /// Net weight of objects whose effective value equals `set`.
    pub fn cell_weight(&self, set: &ConfigSet) -> S {
        self.objects
            .iter()
            .filter(|o| o.effective() == *set.bits())
            .fold(S::zero(), |a, o| a + o.signed_weight())
    }

    /// `m(S)` = share of net weight whose effective value is exactly `S`.
    pub fn empirical_bpa(&self) -> Result<Bpa<S>> {
        if self.objects.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        if self.total_weight() <= S::zero() {
            return Err(Error::NonPositiveWeight);
        }
        Bpa::from_bits(self.frame.clone(), self.cell_weights()).map_err(|e| match e {
            Error::ZeroMeasure(_) => Error::NonPositiveWeight,
            e => e,
        })
    }

    /// Selection process `proc_B`: objects whose effective value misses `B` are
    /// rejected, survivors get `label ∩ B`. `B` may live on a sub-frame.
    pub fn apply_deterministic_process(&self, b: &ConfigSet) -> Result<Population<S>> {
        if b.is_empty() {
            return Err(Error::EmptySet("process set".into()));
        }
        let b = b.vacuous_extend(&self.frame)?;
        let objects: Vec<_> = self
            .objects
            .iter()
            .filter_map(|o| restrict(o, b.bits(), S::one()))
            .collect();
        self.survivors(objects)
    }

    fn survivors(&self, objects: Vec<LabeledObject<S>>) -> Result<Population<S>> {
        if objects.is_empty() {
            return Err(Error::Annihilated);
        }
        Ok(Population {
            frame: self.frame.clone(),
            objects,
            provenance: self.provenance.clone(),
        })
    }

    fn process_draws(&self, process: &Bpa<S>) -> Result<ProcessDraws> {
        if !process.is_proper() {
            return Err(Error::NotProper);
        }
        let process = process.coerce_to(&self.frame)?;
        let (sets, probs) = process
            .focal_bits()
            .iter()
            .map(|(b, m)| (b.clone(), m.to_f64_lossy()))
            .unzip();
        Ok(ProcessDraws { sets, probs })
    }

    /// Nondeterministic process family: each object independently picks one
    /// focal set `B_j` with probability `m(B_j)` and undergoes `proc_{B_j}`.
    /// Object `i` draws from substream `i` of `seed`.
    pub fn apply_random_process(&self, process: &Bpa<S>, seed: u64) -> Result<Population<S>> {
        self.apply_random_process_tagged(process, seed, 0)
    }

    pub(crate) fn apply_random_process_tagged(&self, process: &Bpa<S>, seed: u64, tag: u64) -> Result<Population<S>> {
        let draws = self.process_draws(process)?;
        let total: f64 = draws.probs.iter().sum();
        let objects: Vec<_> = self
            .objects
            .iter()
            .enumerate()
            .filter_map(|(i, o)| {
                let mut r = rng::substream(seed, tag, i as u64);
                let j = rng::draw_weighted(&mut r, &draws.probs, total);
                restrict(o, &draws.sets[j], S::one())
            })
            .collect();
        self.survivors(objects)
    }

    /// Analytic expectation of [`Population::apply_random_process`]: every
    /// object is split into fractional survivors, one per focal set, weighted
    /// by that set's probability.
    pub fn expected_counts(&self, process: &Bpa<S>) -> Result<Population<S>> {
        if !process.is_proper() {
            return Err(Error::NotProper);
        }
        let process = process.coerce_to(&self.frame)?;
        let mut objects = Vec::new();
        for o in &self.objects {
            for (b, p) in process.focal_bits() {
                if let Some(s) = restrict(o, b, p.clone()) {
                    objects.push(s);
                }
            }
        }
        Ok(self.survivors(objects)?.aggregated())
    }

    /// Merges objects with identical (attribute, label, sign), keeping first
    /// occurrence order.
    pub fn aggregated(&self) -> Population<S> {
        let mut index: BTreeMap<(Bits, Bits, Sign), usize> = BTreeMap::new();
        let mut objects: Vec<LabeledObject<S>> = Vec::new();
        for o in &self.objects {
            let key = (o.attribute.clone(), o.label.clone(), o.sign);
            match index.get(&key) {
                Some(&i) => objects[i].weight = objects[i].weight.clone() + o.weight.clone(),
                None => {
                    index.insert(key, objects.len());
                    objects.push(o.clone());
                }
            }
        }
        Population {
            frame: self.frame.clone(),
            objects,
            provenance: self.provenance.clone(),
        }
    }

    pub(crate) fn with_objects(&self, objects: Vec<LabeledObject<S>>) -> Population<S> {
        Population {
            frame: self.frame.clone(),
            objects,
            provenance: self.provenance.clone(),
        }
    }
}

fn restrict<S: Scalar>(o: &LabeledObject<S>, b: &Bits, factor: S) -> Option<LabeledObject<S>> {
    if !o.effective().intersects(b) {
        return None;
    }
    Some(LabeledObject {
        attribute: o.attribute.clone(),
        label: o.label.and(b),
        weight: if factor.is_one() {
            o.weight.clone()
        } else {
            o.weight.clone() * factor
        },
        sign: o.sign,
    })
}
