//! Multivariate frames of discernment and the subset algebra over them.
//!
//! A [`Frame`] is the cross product of named discrete variables. Joint
//! configurations are enumerated row-major in declaration order (the last
//! variable varies fastest), which fixes the bit layout of every [`Bits`]
//! value and therefore of all serialized sets.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Default cap on joint configurations for dense set storage.
pub const DEFAULT_SET_CAP: usize = 1 << 20;
/// Default cap on configurations for full subset-lattice transforms.
pub const DEFAULT_LATTICE_CAP: usize = 24;
/// Default cap on the size of generated intersection/union closures.
pub const DEFAULT_CLOSURE_CAP: usize = 1 << 16;

/// Size limits for exact set-algebra routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_configs: usize,
    /// Frames with at most this many configurations use full `2^n` lattices.
    pub lattice_configs: usize,
    pub max_closure: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_configs: DEFAULT_SET_CAP,
            lattice_configs: DEFAULT_LATTICE_CAP,
            max_closure: DEFAULT_CLOSURE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    name: String,
    labels: Vec<String>,
}

impl Variable {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// An immutable frame of discernment. Shared as `Arc<Frame>`; two frames are
/// compatible when they are structurally equal.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    vars: Vec<Variable>,
    strides: Vec<usize>,
    size: usize,
}

impl Frame {
    pub fn new<N, L>(vars: impl IntoIterator<Item = (N, Vec<L>)>) -> Result<Arc<Frame>>
    where
        N: Into<String>,
        L: Into<String>,
    {
        Self::with_cap(vars, DEFAULT_SET_CAP)
    }

    pub fn with_cap<N, L>(vars: impl IntoIterator<Item = (N, Vec<L>)>, cap: usize) -> Result<Arc<Frame>>
    where
        N: Into<String>,
        L: Into<String>,
    {
        let vars: Vec<Variable> = vars
            .into_iter()
            .map(|(n, ls)| Variable {
                name: n.into(),
                labels: ls.into_iter().map(Into::into).collect(),
            })
            .collect();
        Self::from_variables(vars, cap)
    }

    fn from_variables(vars: Vec<Variable>, cap: usize) -> Result<Arc<Frame>> {
        for (i, v) in vars.iter().enumerate() {
            for ident in std::iter::once(&v.name).chain(&v.labels) {
                if check_ident(ident).ok() != Some(ident.as_str()) {
                    return Err(Error::InvalidArgument(format!("bad identifier `{ident}`")));
                }
            }
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
            if v.labels.is_empty() {
                return Err(Error::EmptyDomain(v.name.clone()));
            }
            for (j, l) in v.labels.iter().enumerate() {
                if v.labels[..j].contains(l) {
                    return Err(Error::DuplicateLabel {
                        var: v.name.clone(),
                        label: l.clone(),
                    });
                }
            }
        }
        let mut size: usize = 1;
        for v in &vars {
            size = size.checked_mul(v.size()).filter(|&s| s <= cap).ok_or(Error::FrameTooLarge {
                configs: vars.iter().fold(1usize, |a, v| a.saturating_mul(v.size())),
                cap,
            })?;
        }
        let mut strides = vec![1; vars.len()];
        for i in (0..vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * vars[i + 1].size();
        }
        Ok(Arc::new(Frame { vars, strides, size }))
    }

    /// Number of joint configurations.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.var_index(name)
            .map(|i| &self.vars[i])
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn contains_var(&self, name: &str) -> bool {
        self.var_index(name).is_some()
    }

    /// Decodes a configuration index into per-variable value indices.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.vars.len()];
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = index / s;
            index %= s;
        }
        out
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    /// Sub-frame spanned by `names`, with variables kept in this frame's
    /// declaration order.
    pub fn sub_frame<S: AsRef<str>>(&self, names: &[S]) -> Result<Arc<Frame>> {
        let mut idx = Vec::with_capacity(names.len());
        for n in names {
            let i = self
                .var_index(n.as_ref())
                .ok_or_else(|| Error::UnknownVariable(n.as_ref().to_string()))?;
            if idx.contains(&i) {
                return Err(Error::BadVariableList);
            }
            idx.push(i);
        }
        idx.sort_unstable();
        let vars = idx.into_iter().map(|i| self.vars[i].clone()).collect();
        Self::from_variables(vars, usize::MAX)
    }

    /// True when every variable of `self` appears in `other` with the same domain.
    pub fn is_sub_frame_of(&self, other: &Frame) -> bool {
        self.vars
            .iter()
            .all(|v| other.vars.iter().any(|w| w == v))
    }

    /// Smallest common super-frame: `a`'s variables followed by `b`'s extras.
    pub fn union(a: &Arc<Frame>, b: &Arc<Frame>) -> Result<Arc<Frame>> {
        if b.is_sub_frame_of(a) {
            return Ok(a.clone());
        }
        let mut vars = a.vars.clone();
        for v in &b.vars {
            match a.vars.iter().find(|w| w.name == v.name) {
                Some(w) if w != v => return Err(Error::DomainMismatch(v.name.clone())),
                Some(_) => {}
                None => vars.push(v.clone()),
            }
        }
        Self::from_variables(vars, DEFAULT_SET_CAP)
    }

    /// For every configuration of `self`, the index of its projection in `sub`.
    pub fn projection_map(&self, sub: &Frame) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(sub.vars.len());
        for v in &sub.vars {
            let i = self
                .var_index(&v.name)
                .ok_or_else(|| Error::UnknownVariable(v.name.clone()))?;
            if self.vars[i] != *v {
                return Err(Error::DomainMismatch(v.name.clone()));
            }
            positions.push(i);
        }
        let mut map = Vec::with_capacity(self.size);
        let mut values = vec![0usize; self.vars.len()];
        for _ in 0..self.size {
            map.push(
                positions
                    .iter()
                    .zip(&sub.strides)
                    .map(|(&p, s)| values[p] * s)
                    .sum(),
            );
            for k in (0..values.len()).rev() {
                values[k] += 1;
                if values[k] < self.vars[k].size() {
                    break;
                }
                values[k] = 0;
            }
        }
        Ok(map)
    }

    pub fn full_set(self: &Arc<Self>) -> ConfigSet {
        ConfigSet {
            bits: Bits::full(self.size),
            frame: self.clone(),
        }
    }

    pub fn empty_set(self: &Arc<Self>) -> ConfigSet {
        ConfigSet {
            bits: Bits::empty(self.size),
            frame: self.clone(),
        }
    }

    /// Parses a cylinder expression such as `X={a,b} & Y={c} | X={d}`.
    pub fn parse_set(self: &Arc<Self>, text: &str) -> Result<ConfigSet> {
        let expr: CylinderExpr = text.parse()?;
        expr.to_set(self)
    }

    pub fn same(a: &Arc<Frame>, b: &Arc<Frame>) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vars {
            writeln!(f, "var {} : {}", v.name, v.labels.join(","))?;
        }
        Ok(())
    }
}

/// Dense membership bit-vector over configuration indices. Carries no length;
/// operations needing the universe size take it explicitly.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Bits(SmallVec<[u64; 2]>);

impl Bits {
    fn words(n: usize) -> usize {
        n.div_ceil(64).max(1)
    }

    pub fn empty(n: usize) -> Self {
        Bits(SmallVec::from_elem(0, Self::words(n)))
    }

    pub fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for i in 0..n / 64 {
            b.0[i] = u64::MAX;
        }
        if !n.is_multiple_of(64) {
            b.0[n / 64] = (1u64 << (n % 64)) - 1;
        }
        b
    }

    pub fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::empty(n);
        for i in idx {
            b.insert(i);
        }
        b
    }

    /// Low-order bits for frames of at most 64 configurations.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut b = Self::empty(n);
        b.0[0] = mask;
        b
    }

    /// True when this is a valid subset of a universe of `n` configurations.
    pub fn fits(&self, n: usize) -> bool {
        self.0.len() == Self::words(n) && self.is_subset(&Bits::full(n))
    }

    pub fn mask(&self) -> u64 {
        self.0[0]
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn or(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    pub fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn complement(&self, n: usize) -> Bits {
        Bits::full(n).and_not(self)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    /// Image of this set under a configuration map into a universe of `n`.
    pub fn map_through(&self, map: &[usize], n: usize) -> Bits {
        let mut out = Bits::empty(n);
        for i in self.ones() {
            out.insert(map[i]);
        }
        out
    }

    /// Preimage under a configuration map: all `i` with `map[i]` in `self`.
    pub fn preimage(&self, map: &[usize]) -> Bits {
        let mut out = Bits::empty(map.len());
        for (i, &j) in map.iter().enumerate() {
            if self.contains(j) {
                out.insert(i);
            }
        }
        out
    }

    /// Copies bits `[start, start + len)` into a fresh set.
    fn slice(&self, start: usize, len: usize) -> Bits {
        let mut out = Bits::empty(len);
        for i in 0..len {
            if self.contains(start + i) {
                out.insert(i);
            }
        }
        out
    }
}

/// A subset of a frame's configurations.
#[derive(Clone, Debug)]
pub struct ConfigSet {
    frame: Arc<Frame>,
    bits: Bits,
}

impl PartialEq for ConfigSet {
    fn eq(&self, other: &Self) -> bool {
        Frame::same(&self.frame, &other.frame) && self.bits == other.bits
    }
}

impl Eq for ConfigSet {}

impl ConfigSet {
    pub fn from_bits(frame: Arc<Frame>, bits: Bits) -> Result<Self> {
        if !bits.fits(frame.size) {
            return Err(Error::FrameMismatch("bit-vector does not fit the frame".into()));
        }
        Ok(ConfigSet { frame, bits })
    }

    pub(crate) fn from_bits_unchecked(frame: Arc<Frame>, bits: Bits) -> Self {
        ConfigSet { frame, bits }
    }

    pub fn from_indices(frame: &Arc<Frame>, idx: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = Bits::empty(frame.size);
        for i in idx {
            if i >= frame.size {
                return Err(Error::InvalidArgument(format!("configuration {i} out of range")));
            }
            bits.insert(i);
        }
        Ok(ConfigSet { frame: frame.clone(), bits })
    }

    /// Set of configurations given as label tuples in frame order.
    pub fn from_configs<L: AsRef<str>>(frame: &Arc<Frame>, configs: &[Vec<L>]) -> Result<Self> {
        let mut bits = Bits::empty(frame.size);
        for c in configs {
            if c.len() != frame.vars.len() {
                return Err(Error::InvalidArgument("configuration arity mismatch".into()));
            }
            let values = c
                .iter()
                .zip(&frame.vars)
                .map(|(l, v)| {
                    v.label_index(l.as_ref()).ok_or_else(|| Error::UnknownLabel {
                        var: v.name.clone(),
                        label: l.as_ref().to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            bits.insert(frame.encode(&values));
        }
        Ok(ConfigSet { frame: frame.clone(), bits })
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn into_bits(self) -> Bits {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.bits == Bits::full(self.frame.size)
    }

    pub fn contains(&self, config: usize) -> bool {
        config < self.frame.size && self.bits.contains(config)
    }

    pub fn configs(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    fn check(&self, other: &ConfigSet) -> Result<()> {
        if Frame::same(&self.frame, &other.frame) {
            Ok(())
        } else {
            Err(Error::FrameMismatch("sets live on different frames".into()))
        }
    }

    pub fn intersect(&self, other: &ConfigSet) -> Result<ConfigSet> {
        self.check(other)?;
        Ok(ConfigSet::from_bits_unchecked(self.frame.clone(), self.bits.and(&other.bits)))
    }

    pub fn union(&self, other: &ConfigSet) -> Result<ConfigSet> {
        self.check(other)?;
        Ok(ConfigSet::from_bits_unchecked(self.frame.clone(), self.bits.or(&other.bits)))
    }

    pub fn difference(&self, other: &ConfigSet) -> Result<ConfigSet> {
        self.check(other)?;
        Ok(ConfigSet::from_bits_unchecked(self.frame.clone(), self.bits.and_not(&other.bits)))
    }

    pub fn complement(&self) -> ConfigSet {
        ConfigSet::from_bits_unchecked(self.frame.clone(), self.bits.complement(self.frame.size))
    }

    pub fn is_subset(&self, other: &ConfigSet) -> Result<bool> {
        self.check(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    /// Projection onto `target` variables; the result lives on the sub-frame
    /// they span.
    pub fn project<S: AsRef<str>>(&self, target: &[S]) -> Result<ConfigSet> {
        if target.is_empty() {
            return Err(Error::BadVariableList);
        }
        let sub = self.frame.sub_frame(target)?;
        let map = self.frame.projection_map(&sub)?;
        Ok(ConfigSet::from_bits_unchecked(sub.clone(), self.bits.map_through(&map, sub.size)))
    }

    /// Vacuous extension onto a super-frame: every extension of every member.
    pub fn vacuous_extend(&self, super_frame: &Arc<Frame>) -> Result<ConfigSet> {
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
        Ok(ConfigSet::from_bits_unchecked(super_frame.clone(), self.bits.preimage(&map)))
    }

    pub fn to_expr(&self) -> CylinderExpr {
        CylinderExpr::from_bits(&self.frame, &self.bits)
    }
}

impl fmt::Display for ConfigSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Free-function form of [`ConfigSet::project`].
pub fn project_set<S: AsRef<str>>(set: &ConfigSet, target: &[S]) -> Result<ConfigSet> {
    set.project(target)
}

/// Free-function form of [`ConfigSet::vacuous_extend`].
pub fn vacuous_extend_set(set: &ConfigSet, super_frame: &Arc<Frame>) -> Result<ConfigSet> {
    set.vacuous_extend(super_frame)
}

/// Union of cartesian products. Each term constrains some variables to
/// nonempty value subsets; unconstrained variables range over their full
/// domain. No terms denotes the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderExpr {
    pub terms: Vec<Vec<(String, Vec<String>)>>,
}

impl CylinderExpr {
    pub fn full() -> Self {
        CylinderExpr { terms: vec![vec![]] }
    }

    pub fn to_set(&self, frame: &Arc<Frame>) -> Result<ConfigSet> {
        let mut bits = Bits::empty(frame.size);
        for term in &self.terms {
            let mut allowed: Vec<Option<Vec<bool>>> = vec![None; frame.vars.len()];
            for (name, labels) in term {
                let vi = frame
                    .var_index(name)
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                let var = &frame.vars[vi];
                if labels.is_empty() {
                    return Err(Error::EmptySet(format!("{name}={{}}")));
                }
                let mut mask = vec![false; var.size()];
                for l in labels {
                    let li = var.label_index(l).ok_or_else(|| Error::UnknownLabel {
                        var: name.clone(),
                        label: l.clone(),
                    })?;
                    mask[li] = true;
                }
                // repeated constraints on one variable intersect
                allowed[vi] = Some(match allowed[vi].take() {
                    Some(prev) => prev.iter().zip(&mask).map(|(a, b)| *a && *b).collect(),
                    None => mask,
                });
            }
            for c in 0..frame.size {
                let vals = frame.decode(c);
                if vals
                    .iter()
                    .zip(&allowed)
                    .all(|(v, a)| a.as_ref().is_none_or(|m| m[*v]))
                {
                    bits.insert(c);
                }
            }
        }
        Ok(ConfigSet::from_bits_unchecked(frame.clone(), bits))
    }

    /// Compact expression for a set: values of the leading variable that share
    /// the same residual set are grouped, recursively.
    pub fn from_bits(frame: &Frame, bits: &Bits) -> Self {
        CylinderExpr {
            terms: decompose(frame, 0, bits.clone()),
        }
    }
}

fn decompose(frame: &Frame, level: usize, block: Bits) -> Vec<Vec<(String, Vec<String>)>> {
    let block_len = if level == 0 {
        frame.size
    } else {
        frame.strides[level - 1]
    };
    if block.is_empty() {
        return vec![];
    }
    if block == Bits::full(block_len) || level == frame.vars.len() {
        return vec![vec![]];
    }
    let var = &frame.vars[level];
    let stride = frame.strides[level];
    let mut groups: Vec<(Bits, Vec<String>)> = Vec::new();
    for v in 0..var.size() {
        let sub = block.slice(v * stride, stride);
        if sub.is_empty() {
            continue;
        }
        match groups.iter_mut().find(|(b, _)| *b == sub) {
            Some((_, labels)) => labels.push(var.labels[v].clone()),
            None => groups.push((sub, vec![var.labels[v].clone()])),
        }
    }
    let mut terms = Vec::new();
    for (sub, labels) in groups {
        let whole = labels.len() == var.size();
        for mut t in decompose(frame, level + 1, sub) {
            if !whole {
                t.insert(0, (var.name.clone(), labels.clone()));
            }
            terms.push(t);
        }
    }
    terms
}

impl fmt::Display for CylinderExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            if t.is_empty() {
                write!(f, "*")?;
            }
            for (j, (name, labels)) in t.iter().enumerate() {
                if j > 0 {
                    write!(f, " & ")?;
                }
                write!(f, "{name}={{{}}}", labels.join(","))?;
            }
        }
        Ok(())
    }
}

const RESERVED: &[char] = &['=', '{', '}', '&', '|', ',', ';', ':', '*', '#'];

fn check_ident(s: &str) -> Result<&str> {
    let s = s.trim();
    if s.is_empty() || s.contains(RESERVED) || s.contains(char::is_whitespace) {
        Err(Error::parse(0, format!("bad identifier `{s}`")))
    } else {
        Ok(s)
    }
}

impl std::str::FromStr for CylinderExpr {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "{}" {
            return Ok(CylinderExpr { terms: vec![] });
        }
        let mut terms = Vec::new();
        for term in text.split('|') {
            let term = term.trim();
            if term == "*" {
                terms.push(vec![]);
                continue;
            }
            let mut atoms = Vec::new();
            for atom in term.split('&') {
                let (name, rhs) = atom
                    .split_once('=')
                    .ok_or_else(|| Error::parse(0, format!("expected `name=...` in `{}`", atom.trim())))?;
                let name = check_ident(name)?.to_string();
                let rhs = rhs.trim();
                let labels = match rhs.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
                    Some(inner) if inner.trim().is_empty() => vec![],
                    Some(inner) => inner
                        .split(',')
                        .map(|l| check_ident(l).map(str::to_string))
                        .collect::<Result<Vec<_>>>()?,
                    None => vec![check_ident(rhs)?.to_string()],
                };
                atoms.push((name, labels));
            }
            terms.push(atoms);
        }
        Ok(CylinderExpr { terms })
    }
}

/// Parses `var <name> : <label>,<label>,...` declarations into frame variables.
pub(crate) fn parse_var_line(rest: &str) -> Result<(String, Vec<String>)> {
    let (name, labels) = rest
        .split_once(':')
        .ok_or_else(|| Error::parse(0, "expected `var <name> : <labels>`"))?;
    let name = check_ident(name)?.to_string();
    let labels = labels
        .split(',')
        .map(|l| check_ident(l).map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    Ok((name, labels))
}

/// Groups configuration indices by their projection (helper for tests and tables).
pub fn group_by_projection(frame: &Frame, sub: &Frame) -> Result<BTreeMap<usize, Vec<usize>>> {
    let map = frame.projection_map(sub)?;
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, j) in map.into_iter().enumerate() {
        out.entry(j).or_default().push(i);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Arc<Frame> {
        Frame::new([("X", vec!["0", "1"]), ("Y", vec!["a", "b"])]).unwrap()
    }

    #[test]
    fn row_major_layout() {
        let f = Frame::new([("X", vec!["0", "1"]), ("Y", vec!["a", "b", "c"])]).unwrap();
        assert_eq!(f.size(), 6);
        assert_eq!(f.decode(4), vec![1, 1]);
        assert_eq!(f.encode(&[1, 2]), 5);
    }

    #[test]
    fn frame_validation() {
        assert!(matches!(
            Frame::new([("X", vec!["0"]), ("X", vec!["1"])]),
            Err(Error::DuplicateVariable(_))
        ));
        assert!(matches!(
            Frame::new([("X", vec!["0", "0"])]),
            Err(Error::DuplicateLabel { .. })
        ));
        assert!(matches!(
            Frame::new([("X", Vec::<String>::new())]),
            Err(Error::EmptyDomain(_))
        ));
        let big = (0..21).map(|i| (format!("V{i}"), vec!["0", "1"]));
        assert!(matches!(Frame::new(big), Err(Error::FrameTooLarge { .. })));
    }

    #[test]
    fn projection_of_fixed_coordinate() {
        let f = xy();
        let a = ConfigSet::from_configs(&f, &[vec!["0", "a"], vec!["0", "b"]]).unwrap();
        let p = a.project(&["X"]).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.contains(0));
        assert!(f.full_set().project(&["Y"]).unwrap().is_full());
        assert!(matches!(a.project(&["Z"]), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn vacuous_extension_unfolds() {
        let f = xy();
        let fx = f.sub_frame(&["X"]).unwrap();
        let b = ConfigSet::from_configs(&fx, &[vec!["0"]]).unwrap();
        let e = b.vacuous_extend(&f).unwrap();
        let want = ConfigSet::from_configs(&f, &[vec!["0", "a"], vec!["0", "b"]]).unwrap();
        assert_eq!(e, want);
        assert!(fx.full_set().vacuous_extend(&f).unwrap().is_full());
        let other = Frame::new([("Z", vec!["0"])]).unwrap();
        assert!(b.vacuous_extend(&other).is_err());
    }

    #[test]
    fn cross_frame_ops_fail() {
        let f = xy();
        let g = Frame::new([("X", vec!["0", "1"])]).unwrap();
        assert!(f.full_set().intersect(&g.full_set()).is_err());
    }

    #[test]
    fn cylinder_expressions_round_trip() {
        let f = Frame::new([
            ("X", vec!["0", "1", "2"]),
            ("Y", vec!["a", "b"]),
            ("Z", vec!["u", "v"]),
        ])
        .unwrap();
        let s = f.parse_set("X={0,1} & Y={a} | X={2} & Z={v}").unwrap();
        assert_eq!(s.len(), 2 * 2 + 2);
        let printed = s.to_string();
        assert_eq!(f.parse_set(&printed).unwrap(), s);
        assert_eq!(f.parse_set("*").unwrap(), f.full_set());
        assert_eq!(f.full_set().to_string(), "*");
        assert_eq!(f.empty_set().to_string(), "{}");
        assert!(f.parse_set("{}").unwrap().is_empty());
        assert_eq!(f.parse_set("Y=b").unwrap().len(), 6);
        assert!(f.parse_set("W={a}").is_err());
        assert!(f.parse_set("Y={q}").is_err());
    }

    #[test]
    fn bits_basics() {
        let n = 130;
        let a = Bits::from_indices(n, [0, 64, 129]);
        assert_eq!(a.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(a.complement(n).count(), 127);
        assert!(a.is_subset(&Bits::full(n)));
        assert!(!Bits::full(n).is_subset(&a));
    }
}
