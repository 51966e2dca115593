//! Random populations from factored models.
//!
//! A pass starts from the full frame and intersects it with one focal set
//! drawn from every factor, each with probability proportional to `|m|`. A
//! negative mass inverts the object's mark. Pass `k` reads
//! [`rng::substream`]`(seed, tag, k)` where `tag` is fixed per routine.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bpa::Bpa;
use crate::error::{Error, Result};
use crate::frame::{Bits, Frame};
use crate::netmodel::{BeliefNetwork, FactoredModel, HypergraphModel};
use crate::population::{LabeledObject, Population, Sign};
use crate::rng;
use crate::scalar::Scalar;

const TAG_HYPERGRAPH: u64 = 1;
const TAG_NETWORK: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SampleStats {
    pub passes: usize,
    /// Objects emitted before cancellation.
    pub emitted: usize,
    /// Passes that ended on the empty set.
    pub failures: usize,
    /// Network passes with no focal set compatible with the partial object.
    pub aborted: usize,
    /// Objects removed by cancellation of opposite marks.
    pub cancelled: usize,
    pub seed: u64,
}

impl SampleStats {
    /// Emitted objects per pass.
    pub fn yield_rate(&self) -> f64 {
        if self.passes == 0 {
            0.0
        } else {
            self.emitted as f64 / self.passes as f64
        }
    }
}

/// One factor extended to the model frame, ready for drawing.
struct Urn<S> {
    sets: Vec<Bits>,
    masses: Vec<S>,
    abs: Vec<f64>,
}

impl<S: Scalar> Urn<S> {
    fn new(factor: &Bpa<S>, frame: &Arc<Frame>) -> Result<Self> {
        let ext = factor.vacuous_extend(frame)?;
        let mut urn = Urn {
            sets: Vec::with_capacity(ext.len()),
            masses: Vec::with_capacity(ext.len()),
            abs: Vec::with_capacity(ext.len()),
        };
        for (b, m) in ext.focal_bits() {
            urn.sets.push(b.clone());
            urn.abs.push(m.abs().to_f64_lossy());
            urn.masses.push(m.clone());
        }
        Ok(urn)
    }
}

fn urns<S: Scalar>(factors: &[Bpa<S>], frame: &Arc<Frame>) -> Result<Vec<Urn<S>>> {
    factors.iter().map(|f| Urn::new(f, frame)).collect()
}

fn run_hypergraph<S: Scalar>(model: &HypergraphModel<S>, attempts: usize, seed: u64) -> Result<(Population<S>, SampleStats)> {
    let frame = model.frame().clone();
    let urns = urns(model.factors(), &frame)?;
    let n = frame.size();
    let mut pop = Population::new(&frame).with_provenance(format!("hypergraph sample, seed {seed}"));
    let mut stats = SampleStats {
        passes: attempts,
        seed,
        ..Default::default()
    };
    for pass in 0..attempts {
        let mut r = rng::substream(seed, TAG_HYPERGRAPH, pass as u64);
        let mut cur = Bits::full(n);
        let mut sign = Sign::Plus;
        for urn in &urns {
            let j = rng::draw_weighted(&mut r, &urn.abs, 1.0);
            cur = cur.and(&urn.sets[j]);
            if urn.masses[j].is_negative() {
                sign = sign.flip();
            }
            if cur.is_empty() {
                break;
            }
        }
        if cur.is_empty() {
            stats.failures += 1;
            continue;
        }
        pop.push(LabeledObject {
            attribute: cur,
            label: Bits::full(n),
            weight: S::one(),
            sign,
        })?;
        stats.emitted += 1;
    }
    if stats.emitted == 0 {
        return Err(Error::ZeroYield { attempts });
    }
    Ok((pop, stats))
}

/// Samples `attempts` passes from a model of proper factors. Survivors are
/// distributed as the normalized Dempster combination of the factors.
pub fn sample_hypergraph<S: Scalar>(model: &HypergraphModel<S>, attempts: usize, seed: u64) -> Result<(Population<S>, SampleStats)> {
    if model.factors().iter().any(|f| !f.is_proper()) {
        return Err(Error::NotProper);
    }
    run_hypergraph(model, attempts, seed)
}

/// Like [`sample_hypergraph`] but admits pseudo factors, carrying `+`/`−`
/// marks. With `cancel`, opposite marks are cancelled before returning.
pub fn sample_signed<S: Scalar>(model: &HypergraphModel<S>, attempts: usize, seed: u64, cancel: bool) -> Result<(Population<S>, SampleStats)> {
    let (pop, mut stats) = run_hypergraph(model, attempts, seed)?;
    if !cancel {
        return Ok((pop, stats));
    }
    let before = pop.len();
    let pop = cancel_signed(&pop)?;
    stats.cancelled = before - pop.len();
    Ok((pop, stats))
}

/// Cancels opposite marks within each (attribute, label) cell. The net
/// weight of a cell is `Σ+ − Σ−`; cells with net ≤ 0 disappear, otherwise the
/// negative weight is taken off the cell's `+` objects in order. The result
/// holds `+` objects only.
pub fn cancel_signed<S: Scalar>(pop: &Population<S>) -> Result<Population<S>> {
    let mut debt: BTreeMap<(Bits, Bits), S> = BTreeMap::new();
    let mut credit: BTreeMap<(Bits, Bits), S> = BTreeMap::new();
    for o in pop.objects() {
        let key = (o.attribute.clone(), o.label.clone());
        let slot = match o.sign {
            Sign::Plus => &mut credit,
            Sign::Minus => &mut debt,
        };
        let acc = slot.entry(key).or_insert_with(S::zero);
        *acc = acc.clone() + o.weight.clone();
    }
    let mut out = Vec::with_capacity(pop.len());
    for o in pop.objects() {
        if o.sign == Sign::Minus {
            continue;
        }
        let key = (o.attribute.clone(), o.label.clone());
        let plus = &credit[&key];
        let Some(d) = debt.get_mut(&key) else {
            out.push(o.clone());
            continue;
        };
        if *plus <= d.clone() + S::negligible() {
            continue;
        }
        if d.is_zero() {
            out.push(o.clone());
        } else if o.weight <= *d {
            *d = d.clone() - o.weight.clone();
        } else {
            let mut kept = o.clone();
            kept.weight = o.weight.clone() - d.clone();
            *d = S::zero();
            out.push(kept);
        }
    }
    if out.is_empty() && !pop.is_empty() {
        return Err(Error::Annihilated);
    }
    Ok(pop.with_objects(out))
}

/// One pass per object: nodes are visited in topological order and each
/// draws among the focal sets of its factor that meet the object built so
/// far, proportionally to `|m|`.
///
/// When the compatible candidates of a node carry total `|m|` of `Z < 1`, the
/// emitted object is weighted by the product of those `Z`, which keeps the
/// sample an unbiased picture of the combined model. For proper factors
/// whose marginal on the parents is vacuous (every apriorical conditional),
/// `Z = 1` and all weights are exactly one.
pub fn sample_network<S: Scalar>(net: &BeliefNetwork<S>, n: usize, seed: u64) -> Result<(Population<S>, SampleStats)> {
    let frame = net.frame().clone();
    let order = net.dag().topological_order()?;
    let ordered: Vec<Bpa<S>> = order.iter().map(|&i| net.factor(i).clone()).collect();
    let urns = urns(&ordered, &frame)?;
    let size = frame.size();
    let mut pop = Population::new(&frame).with_provenance(format!("network sample, seed {seed}"));
    let mut stats = SampleStats {
        passes: n,
        seed,
        ..Default::default()
    };
    let mut probs: Vec<f64> = Vec::new();
    'pass: for pass in 0..n {
        let mut r = rng::substream(seed, TAG_NETWORK, pass as u64);
        let mut cur = Bits::full(size);
        let mut sign = Sign::Plus;
        let mut weight = S::one();
        for urn in &urns {
            probs.clear();
            let mut z = S::zero();
            for (set, m) in urn.sets.iter().zip(&urn.masses) {
                if set.intersects(&cur) {
                    probs.push(m.abs().to_f64_lossy());
                    z = z + m.abs();
                } else {
                    probs.push(0.0);
                }
            }
            if z.is_negligible() {
                stats.aborted += 1;
                continue 'pass;
            }
            let total: f64 = probs.iter().sum();
            let j = rng::draw_weighted(&mut r, &probs, total);
            cur = cur.and(&urn.sets[j]);
            if urn.masses[j].is_negative() {
                sign = sign.flip();
            }
            if !(z.clone() - S::one()).is_negligible() {
                weight = weight * z;
            }
        }
        pop.push(LabeledObject {
            attribute: cur,
            label: Bits::full(size),
            weight,
            sign,
        })?;
        stats.emitted += 1;
    }
    if stats.emitted == 0 {
        return Err(Error::ZeroYield { attempts: n });
    }
    let before = pop.len();
    let pop = cancel_signed(&pop)?;
    stats.cancelled = before - pop.len();
    Ok((pop, stats))
}

/// Exact law of one pass, by enumeration of every draw sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PassDistribution<S> {
    pub frame: Arc<Frame>,
    /// Expected signed weight of each final set per pass.
    pub mean: BTreeMap<Bits, S>,
    /// Expected squared weight of each final set per pass.
    pub second_moment: BTreeMap<Bits, S>,
    /// Probability that the pass emits nothing.
    pub failure: S,
}

impl<S: Scalar> PassDistribution<S> {
    /// The signed means as a bpa; Dempster's combination for a correct
    /// sampler.
    pub fn to_bpa(&self) -> Result<Bpa<S>> {
        Bpa::from_bits(self.frame.clone(), self.mean.iter().map(|(b, m)| (b.clone(), m.clone())))
    }
}

struct Enumerator<'a, S> {
    urns: &'a [Urn<S>],
    filtered: bool,
    out: PassDistribution<S>,
}

impl<S: Scalar> Enumerator<'_, S> {
    fn walk(&mut self, k: usize, cur: &Bits, prob: S, weight: S, sign: Sign) {
        if k == self.urns.len() {
            let w = sign.apply(weight.clone());
            let m = self.out.mean.entry(cur.clone()).or_insert_with(S::zero);
            *m = m.clone() + prob.clone() * w;
            let q = self.out.second_moment.entry(cur.clone()).or_insert_with(S::zero);
            *q = q.clone() + prob * weight.clone() * weight;
            return;
        }
        let urn = &self.urns[k];
        let z = if self.filtered {
            urn.sets
                .iter()
                .zip(&urn.masses)
                .filter(|(b, _)| b.intersects(cur))
                .fold(S::zero(), |a, (_, m)| a + m.abs())
        } else {
            S::one()
        };
        if z.is_negligible() {
            self.out.failure = self.out.failure.clone() + prob;
            return;
        }
        let step = if (z.clone() - S::one()).is_negligible() { S::one() } else { z.clone() };
        for (set, m) in urn.sets.iter().zip(&urn.masses) {
            if self.filtered && !set.intersects(cur) {
                continue;
            }
            let next = cur.and(set);
            let p = prob.clone() * m.abs() / z.clone();
            let s = if m.is_negative() { sign.flip() } else { sign };
            if next.is_empty() {
                self.out.failure = self.out.failure.clone() + p;
                continue;
            }
            self.walk(k + 1, &next, p, weight.clone() * step.clone(), s);
        }
    }
}

fn enumerate<S: Scalar>(frame: &Arc<Frame>, urns: &[Urn<S>], filtered: bool) -> PassDistribution<S> {
    let mut e = Enumerator {
        urns,
        filtered,
        out: PassDistribution {
            frame: frame.clone(),
            mean: BTreeMap::new(),
            second_moment: BTreeMap::new(),
            failure: S::zero(),
        },
    };
    e.walk(0, &Bits::full(frame.size()), S::one(), S::one(), Sign::Plus);
    e.out
}

/// Exact per-pass law of [`sample_hypergraph`] / [`sample_signed`].
/// Exponential in the number of factors; meant for small models.
pub fn hypergraph_pass_distribution<S: Scalar>(model: &HypergraphModel<S>) -> Result<PassDistribution<S>> {
    let frame = model.frame().clone();
    Ok(enumerate(&frame, &urns(model.factors(), &frame)?, false))
}

/// Exact per-pass law of [`sample_network`] before cancellation.
pub fn network_pass_distribution<S: Scalar>(net: &BeliefNetwork<S>) -> Result<PassDistribution<S>> {
    let frame = net.frame().clone();
    let ordered: Vec<Bpa<S>> = net
        .dag()
        .topological_order()?
        .into_iter()
        .map(|i| net.factor(i).clone())
        .collect();
    Ok(enumerate(&frame, &urns(&ordered, &frame)?, true))
}
