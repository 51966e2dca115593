//! Subset-lattice transforms and set-family closures.
//!
//! Dense tables are indexed by bit mask: bit `i` of the index is membership of
//! configuration `i`. Only frames with at most `Limits::lattice_configs`
//! configurations are handled densely.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::frame::{Bits, Frame, Limits};
use crate::scalar::Scalar;

pub(crate) fn check_lattice(frame: &Frame, limits: &Limits) -> Result<usize> {
    let n = frame.size();
    if n > limits.lattice_configs || n > 30 {
        return Err(Error::LatticeTooLarge {
            configs: n,
            cap: limits.lattice_configs.min(30),
        });
    }
    Ok(n)
}

/// `f[A] <- sum over B ⊇ A of f[B]`
pub(crate) fn zeta_superset<S: Scalar>(f: &mut [S], n: usize) {
    for i in 0..n {
        let bit = 1usize << i;
        for a in 0..f.len() {
            if a & bit == 0 {
                let v = f[a | bit].clone();
                f[a] = f[a].clone() + v;
            }
        }
    }
}

/// Inverse of [`zeta_superset`].
pub(crate) fn mobius_superset<S: Scalar>(f: &mut [S], n: usize) {
    for i in 0..n {
        let bit = 1usize << i;
        for a in 0..f.len() {
            if a & bit == 0 {
                let v = f[a | bit].clone();
                f[a] = f[a].clone() - v;
            }
        }
    }
}

/// `f[A] <- sum over B ⊆ A of f[B]`
pub(crate) fn zeta_subset<S: Scalar>(f: &mut [S], n: usize) {
    for i in 0..n {
        let bit = 1usize << i;
        for a in 0..f.len() {
            if a & bit != 0 {
                let v = f[a ^ bit].clone();
                f[a] = f[a].clone() + v;
            }
        }
    }
}

pub(crate) fn dense<'a, S: Scalar>(n: usize, entries: impl IntoIterator<Item = (&'a Bits, &'a S)>) -> Vec<S> {
    let mut f = vec![S::zero(); 1usize << n];
    for (b, m) in entries {
        let k = b.mask() as usize;
        f[k] = f[k].clone() + m.clone();
    }
    f
}

/// All nonempty intersections of members of `gens` (including `gens` itself).
pub(crate) fn intersection_closure(gens: impl IntoIterator<Item = Bits>, cap: usize) -> Result<Vec<Bits>> {
    closure(gens, cap, |a, b| {
        let c = a.and(b);
        (!c.is_empty()).then_some(c)
    })
}

/// All unions of members of `gens` (including `gens` itself).
pub(crate) fn union_closure(gens: impl IntoIterator<Item = Bits>, cap: usize) -> Result<Vec<Bits>> {
    closure(gens, cap, |a, b| Some(a.or(b)))
}

fn closure(
    gens: impl IntoIterator<Item = Bits>,
    cap: usize,
    op: impl Fn(&Bits, &Bits) -> Option<Bits>,
) -> Result<Vec<Bits>> {
    let base: Vec<Bits> = gens.into_iter().filter(|b| !b.is_empty()).collect();
    let mut all: BTreeSet<Bits> = base.iter().cloned().collect();
    let mut frontier: Vec<Bits> = all.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for a in &frontier {
            for b in &base {
                if let Some(c) = op(a, b) {
                    if all.insert(c.clone()) {
                        if all.len() > cap {
                            return Err(Error::ClosureTooLarge(cap));
                        }
                        next.push(c);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(all.into_iter().collect())
}
