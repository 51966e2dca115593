//! Factored representations of joint belief functions.
//!
//! A [`HypergraphModel`] is an unordered list of factors whose Dempster
//! combination is the joint. A [`BeliefNetwork`] attaches one factor to each
//! node of a DAG, scoped on the node and its parents and meant to be the
//! apriorical conditional of the joint on the parents.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::bpa::{Bpa, BpaClass};
use crate::error::{Error, Result};
use crate::frame::{Frame, Limits};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn edgeless<N: AsRef<str>>(names: &[N]) -> Self {
        Dag {
            names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            parents: vec![Vec::new(); names.len()],
        }
    }

    /// Builds a graph from `parent -> child` pairs. Cycles are not rejected
    /// here; see [`Dag::topological_order`].
    pub fn from_edges<N: AsRef<str>>(names: &[N], edges: &[(&str, &str)]) -> Result<Self> {
        let mut dag = Dag::edgeless(names);
        for (from, to) in edges {
            dag.add_edge(from, to)?;
        }
        Ok(dag)
    }

    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<()> {
        let f = self.index(from)?;
        let t = self.index(to)?;
        if f == t {
            return Err(Error::Cycle(from.to_string()));
        }
        if !self.parents[t].contains(&f) {
            self.parents[t].push(f);
            self.parents[t].sort_unstable();
        }
        Ok(())
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn parent_names(&self, node: usize) -> Vec<&str> {
        self.parents[node].iter().map(|&p| self.names[p].as_str()).collect()
    }

    /// `{node} ∪ parents(node)` as names, in node index order.
    pub fn scope(&self, node: usize) -> Vec<&str> {
        let mut idx = self.parents[node].clone();
        idx.push(node);
        idx.sort_unstable();
        idx.into_iter().map(|i| self.names[i].as_str()).collect()
    }

    /// Directed edges `(parent, child)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Undirected skeleton as `(min, max)` index pairs.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.edges().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect()
    }

    /// Kahn's algorithm, lowest index first among ready nodes.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.names.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &c in &children[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
            return Err(Error::Cycle(self.names[stuck].clone()));
        }
        Ok(order)
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dag")?;
        for (p, c) in self.edges() {
            writeln!(f, "edge {} -> {}", self.names[p], self.names[c])?;
        }
        Ok(())
    }
}

/// Common interface of factored models: a frame and factors on sub-frames.
pub trait FactoredModel<S: Scalar> {
    fn frame(&self) -> &Arc<Frame>;
    fn factors(&self) -> &[Bpa<S>];

    /// Joint belief function: Dempster combination of all factors.
    fn joint(&self) -> Result<Bpa<S>> {
        joint_from_model(self)
    }
}

/// Combines all factors of `model`, smallest scope first (ties in factor
/// order), and returns the joint on the model frame.
pub fn joint_from_model<S: Scalar, M: FactoredModel<S> + ?Sized>(model: &M) -> Result<Bpa<S>> {
    let factors = model.factors();
    let mut order: Vec<usize> = (0..factors.len()).collect();
    order.sort_by_key(|&i| (factors[i].frame().size(), i));
    let mut acc: Option<Bpa<S>> = None;
    for i in order {
        acc = Some(match acc {
            None => factors[i].clone(),
            Some(a) => a.combine(&factors[i])?,
        });
    }
    match acc {
        Some(j) => j.vacuous_extend(model.frame()),
        None => Ok(Bpa::vacuous(model.frame())),
    }
}

impl<S: Scalar> FactoredModel<S> for Bpa<S> {
    fn frame(&self) -> &Arc<Frame> {
        Bpa::frame(self)
    }
    fn factors(&self) -> &[Bpa<S>] {
        std::slice::from_ref(self)
    }
}

#[derive(Debug, Clone)]
pub struct HypergraphModel<S> {
    frame: Arc<Frame>,
    factors: Vec<Bpa<S>>,
}

impl<S: Scalar> HypergraphModel<S> {
    /// Every factor must live on a sub-frame and together they must cover
    /// every frame variable.
    pub fn new(frame: &Arc<Frame>, factors: Vec<Bpa<S>>) -> Result<Self> {
        for f in &factors {
            if !f.frame().is_sub_frame_of(frame) {
                return Err(Error::ScopeMismatch(format!(
                    "factor over [{}] is not on the model frame",
                    f.frame().names().join(",")
                )));
            }
        }
        for v in frame.names() {
            if !factors.iter().any(|f| f.frame().contains_var(v)) {
                return Err(Error::ScopeMismatch(format!("variable `{v}` is not covered by any factor")));
            }
        }
        Ok(HypergraphModel {
            frame: frame.clone(),
            factors,
        })
    }
}

impl<S: Scalar> FactoredModel<S> for HypergraphModel<S> {
    fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }
    fn factors(&self) -> &[Bpa<S>] {
        &self.factors
    }
}

#[derive(Debug, Clone)]
pub struct BeliefNetwork<S> {
    frame: Arc<Frame>,
    dag: Dag,
    factors: Vec<Bpa<S>>,
}

impl<S: Scalar> BeliefNetwork<S> {
    /// Strict constructor: acyclic, one factor per node scoped exactly on
    /// `{node} ∪ parents`, every factor at least pseudo-valid.
    pub fn new(frame: &Arc<Frame>, dag: Dag, factors: Vec<Bpa<S>>) -> Result<Self> {
        let net = Self::from_parts(frame, dag, factors)?;
        let report = validate_model_network(&net, None, &Limits::default(), &S::default_tolerance());
        match report.issues.into_iter().next() {
            None => Ok(net),
            Some(ModelIssue::Cycle(v)) => Err(Error::Cycle(v)),
            Some(issue) => Err(Error::ScopeMismatch(issue.to_string())),
        }
    }

    /// Lenient constructor used for diagnostics; only the node/factor count
    /// and the variable set are enforced.
    pub fn from_parts(frame: &Arc<Frame>, dag: Dag, factors: Vec<Bpa<S>>) -> Result<Self> {
        let mut a: Vec<&str> = frame.names();
        let mut b: Vec<&str> = dag.names.iter().map(String::as_str).collect();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::ScopeMismatch("dag nodes differ from frame variables".into()));
        }
        if factors.len() != dag.len() {
            return Err(Error::ScopeMismatch(format!(
                "{} factors for {} nodes",
                factors.len(),
                dag.len()
            )));
        }
        Ok(BeliefNetwork {
            frame: frame.clone(),
            dag,
            factors,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn factor(&self, node: usize) -> &Bpa<S> {
        &self.factors[node]
    }

    /// The same factors viewed as a hypergraph model.
    pub fn to_hypergraph(&self) -> Result<HypergraphModel<S>> {
        HypergraphModel::new(&self.frame, self.factors.clone())
    }

    /// Factors listed in topological order of their nodes.
    pub fn topological_factors(&self) -> Result<Vec<(usize, &Bpa<S>)>> {
        Ok(self
            .dag
            .topological_order()?
            .into_iter()
            .map(|i| (i, &self.factors[i]))
            .collect())
    }
}

impl<S: Scalar> FactoredModel<S> for BeliefNetwork<S> {
    fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }
    fn factors(&self) -> &[Bpa<S>] {
        &self.factors
    }
}

/// Splits a joint into a belief network along `dag`: node `i` receives the
/// apriorical conditional of `m↓{i}∪π(i)` on `π(i)` (roots receive their
/// marginal).
pub fn decompose_joint<S: Scalar>(m: &Bpa<S>, dag: &Dag) -> Result<BeliefNetwork<S>> {
    decompose_joint_with(m, dag, &Limits::default(), &S::default_tolerance())
}

pub fn decompose_joint_with<S: Scalar>(m: &Bpa<S>, dag: &Dag, limits: &Limits, tol: &S) -> Result<BeliefNetwork<S>> {
    dag.topological_order()?;
    let mut factors = Vec::with_capacity(dag.len());
    for i in 0..dag.len() {
        let local = m.project(&dag.scope(i))?;
        factors.push(local.apriorical_conditional_with(&dag.parent_names(i), limits, tol)?);
    }
    BeliefNetwork::from_parts(m.frame(), dag.clone(), factors)
}

/// Brute-force check that `dag` is an independence map of `m`: along a
/// topological order, each node must be apriorically independent of its
/// non-parent predecessors given its parents, i.e.
/// `m↓P∪{i} = m↓P ⊕ (m↓{i}∪π(i) | π(i))`.
pub fn is_independence_map<S: Scalar>(m: &Bpa<S>, dag: &Dag, tol: &S) -> Result<bool> {
    let order = dag.topological_order()?;
    let mut preds: Vec<&str> = Vec::new();
    for &i in &order {
        if !preds.is_empty() {
            let mut with_i = preds.clone();
            with_i.push(&dag.names[i]);
            let lhs = m.project(&with_i)?;
            let cond = m
                .project(&dag.scope(i))?
                .apriorical_conditional_with(&dag.parent_names(i), &Limits::default(), tol)?;
            let rhs = m.project(&preds)?.combine(&cond)?.vacuous_extend(lhs.frame())?;
            if !lhs.approx_eq(&rhs, tol) {
                return Ok(false);
            }
        }
        preds.push(&dag.names[i]);
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelIssue {
    Cycle(String),
    /// Factor for `node` is not scoped on `{node} ∪ parents`.
    Scope { node: String, expected: Vec<String>, found: Vec<String> },
    Uncovered(String),
    InvalidFactor { index: usize, class: BpaClass },
    /// Joint differs from the supplied reference.
    RoundTrip { max_deviation: f64 },
    Joint(String),
}

impl fmt::Display for ModelIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelIssue::Cycle(v) => write!(f, "cycle through `{v}`"),
            ModelIssue::Scope { node, expected, found } => write!(
                f,
                "factor of `{node}` is over [{}], expected [{}]",
                found.join(","),
                expected.join(",")
            ),
            ModelIssue::Uncovered(v) => write!(f, "variable `{v}` not covered by any factor"),
            ModelIssue::InvalidFactor { index, class } => write!(f, "factor #{index} is {class}"),
            ModelIssue::RoundTrip { max_deviation } => {
                write!(f, "joint differs from reference by {max_deviation:e}")
            }
            ModelIssue::Joint(e) => write!(f, "joint not computable: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelReport {
    pub issues: Vec<ModelIssue>,
    /// Max mass deviation from the reference joint, when one was supplied.
    pub max_deviation: Option<f64>,
}

impl ModelReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

fn factor_issues<S: Scalar>(factors: &[Bpa<S>], limits: &Limits, tol: &S) -> Vec<ModelIssue> {
    factors
        .iter()
        .enumerate()
        .filter_map(|(i, f)| {
            let class = f.validate_with(limits, tol).class;
            (class == BpaClass::Invalid).then_some(ModelIssue::InvalidFactor { index: i, class })
        })
        .collect()
}

fn round_trip<S: Scalar, M: FactoredModel<S>>(model: &M, reference: Option<&Bpa<S>>, tol: &S, issues: &mut Vec<ModelIssue>) -> Option<f64> {
    let reference = reference?;
    match model.joint().and_then(|j| j.max_mass_diff(&reference.coerce_to(model.frame())?)) {
        Ok(d) => {
            let d = d.to_f64_lossy();
            if d > tol.to_f64_lossy() {
                issues.push(ModelIssue::RoundTrip { max_deviation: d });
            }
            Some(d)
        }
        Err(e) => {
            issues.push(ModelIssue::Joint(e.to_string()));
            None
        }
    }
}

fn validate_model_network<S: Scalar>(net: &BeliefNetwork<S>, reference: Option<&Bpa<S>>, limits: &Limits, tol: &S) -> ModelReport {
    let mut issues = Vec::new();
    if let Err(Error::Cycle(v)) = net.dag.topological_order() {
        issues.push(ModelIssue::Cycle(v));
    }
    for (i, f) in net.factors.iter().enumerate() {
        let expected: Vec<String> = net.dag.scope(i).into_iter().map(String::from).collect();
        let mut found: Vec<String> = f.frame().names().into_iter().map(String::from).collect();
        let mut exp_sorted = expected.clone();
        exp_sorted.sort();
        found.sort();
        if exp_sorted != found || !f.frame().is_sub_frame_of(&net.frame) {
            issues.push(ModelIssue::Scope {
                node: net.dag.names[i].clone(),
                expected,
                found,
            });
        }
    }
    issues.extend(factor_issues(&net.factors, limits, tol));
    let max_deviation = if issues.is_empty() {
        round_trip(net, reference, tol, &mut issues)
    } else {
        None
    };
    ModelReport { issues, max_deviation }
}

/// Structural and numerical checks on a belief network. With a reference
/// joint, also compares `joint_from_model` against it.
pub fn validate_network<S: Scalar>(net: &BeliefNetwork<S>, reference: Option<&Bpa<S>>, limits: &Limits, tol: &S) -> ModelReport {
    validate_model_network(net, reference, limits, tol)
}

pub fn validate_hypergraph<S: Scalar>(model: &HypergraphModel<S>, reference: Option<&Bpa<S>>, limits: &Limits, tol: &S) -> ModelReport {
    let mut issues = Vec::new();
    for v in model.frame.names() {
        if !model.factors.iter().any(|f| f.frame().contains_var(v)) {
            issues.push(ModelIssue::Uncovered(v.to_string()));
        }
    }
    issues.extend(factor_issues(&model.factors, limits, tol));
    let max_deviation = if issues.is_empty() {
        round_trip(model, reference, tol, &mut issues)
    } else {
        None
    };
    ModelReport { issues, max_deviation }
}

/// Breadth-first helper: nodes reachable from `start` along parent→child edges.
pub fn descendants(dag: &Dag, start: usize) -> BTreeSet<usize> {
    let mut children = vec![Vec::new(); dag.len()];
    for (p, c) in dag.edges() {
        children[p].push(c);
    }
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<usize> = children[start].iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        if seen.insert(n) {
            queue.extend(children[n].iter().copied());
        }
    }
    seen
}
