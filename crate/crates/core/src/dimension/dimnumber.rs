//! Dimensional numbers `s(u, v, i)` and `frak_s(u, v, a)` for rectangles shrinking at rates `u <= v`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Extended reals: a finite value or `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub enum Ext<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Ext<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Ext::Finite(t) => Some(t),
            Ext::Infinite => None,
        }
    }
}

/// Exponents `u_i <= v_i` with weights `delta_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimInputs<T> {
    pub u: Vec<T>,
    pub v: Vec<Ext<T>>,
    pub delta: Vec<T>,
}

impl<T: Scalar> DimInputs<T> {
    pub fn new(u: Vec<T>, v: Vec<Ext<T>>, delta: Option<Vec<T>>) -> Result<Self> {
        let d = u.len();
        let delta = delta.unwrap_or_else(|| alloc::vec![T::one(); d]);
        if v.len() != d || delta.len() != d || d == 0 {
            return Err(Error::InvalidInput("u, v and delta must share a positive length".into()));
        }
        for i in 0..d {
            if !(u[i] > T::zero()) || !(delta[i] > T::zero()) {
                return Err(Error::InvalidInput("u and delta must be positive".into()));
            }
            if let Ext::Finite(vi) = &v[i] {
                if *vi < u[i] {
                    return Err(Error::InvalidInput("each u_i must not exceed v_i".into()));
                }
            }
        }
        Ok(DimInputs { u, v, delta })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Indices with finite `v_i`.
    pub fn finite_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.v[i].finite().is_some()).collect()
    }

    /// Sorted distinct breakpoints `{u_i} ∪ {v_i finite}`.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut pts: Vec<T> = self.u.clone();
        pts.extend(self.v.iter().filter_map(|v| v.finite().cloned()));
        pts.sort_by(|a, b| a.cmp_tie(b));
        pts.dedup_by(|a, b| a.cmp_tie(b) == Ordering::Equal);
        pts
    }
}

/// Which way the boundary case `v_k = a` is assigned in the second index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieRule {
    /// `v_k <= a`
    Inclusive,
    /// `v_k < a`
    Strict,
}

/// `s(u, v, i)`.
pub fn s_dimnumber<T: Scalar>(inp: &DimInputs<T>, i: usize) -> T {
    match &inp.v[i] {
        Ext::Infinite => {
            let mut s = T::zero();
            for k in inp.finite_indices() {
                s = s + inp.delta[k].clone();
            }
            s
        }
        Ext::Finite(vi) => {
            let vi = vi.clone();
            let mut s = T::zero();
            for k in 0..inp.dim() {
                let dk = inp.delta[k].clone();
                let uk = inp.u[k].clone();
                if uk.cmp_tie(&vi) == Ordering::Greater {
                    s = s + dk;
                } else if matches!(&inp.v[k], Ext::Finite(vk) if vk.cmp_tie(&vi) != Ordering::Greater) {
                    let vk = inp.v[k].finite().expect("finite").clone();
                    s = s + dk * (T::one() - (vk - uk) / vi.clone());
                } else {
                    s = s + dk * uk / vi.clone();
                }
            }
            s
        }
    }
}

/// Index sets of `frak_s` at `a`: `(K1, K2, K3)`.
pub fn frak_sets<T: Scalar>(inp: &DimInputs<T>, a: &T, rule: TieRule) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let (mut k1, mut k2, mut k3) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..inp.dim() {
        let in_k2 = match &inp.v[k] {
            Ext::Finite(vk) => match rule {
                TieRule::Inclusive => vk.cmp_tie(a) != Ordering::Greater,
                TieRule::Strict => vk.cmp_tie(a) == Ordering::Less,
            },
            Ext::Infinite => false,
        };
        if inp.u[k].cmp_tie(a) == Ordering::Greater {
            k1.push(k);
        } else if in_k2 {
            k2.push(k);
        } else {
            k3.push(k);
        }
    }
    (k1, k2, k3)
}

/// Evaluates the `frak_s` sum for given index sets and denominator `a`.
pub fn frak_with_sets<T: Scalar>(inp: &DimInputs<T>, sets: &(Vec<usize>, Vec<usize>, Vec<usize>), a: &T) -> T {
    let mut s = T::zero();
    for &k in &sets.0 {
        s = s + inp.delta[k].clone();
    }
    for &k in &sets.1 {
        let vk = inp.v[k].finite().expect("second set has finite v").clone();
        s = s + inp.delta[k].clone() * (T::one() - (vk - inp.u[k].clone()) / a.clone());
    }
    for &k in &sets.2 {
        s = s + inp.delta[k].clone() * inp.u[k].clone() / a.clone();
    }
    s
}

/// `frak_s(u, v, a)`.
pub fn s_frak<T: Scalar>(inp: &DimInputs<T>, a: &T) -> Result<T> {
    s_frak_with_rule(inp, a, TieRule::Inclusive)
}

pub fn s_frak_with_rule<T: Scalar>(inp: &DimInputs<T>, a: &T, rule: TieRule) -> Result<T> {
    if !(*a > T::zero()) {
        return Err(Error::InvalidBreakpoint);
    }
    let sets = frak_sets(inp, a, rule);
    Ok(frak_with_sets(inp, &sets, a))
}

fn tie_eq<T: Scalar>(a: &T, b: &T) -> bool {
    a.cmp_tie(b) == Ordering::Equal
}

fn min_of<T: Scalar>(vals: impl Iterator<Item = T>) -> Option<T> {
    vals.fold(None, |acc, x| match acc {
        Some(m) if m <= x => Some(m),
        _ => Some(x),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinComparison<T> {
    pub min_over_breakpoints: T,
    pub min_over_indices: T,
    pub equal: bool,
}

/// Compares `min_{a in {u_i, v_i}} frak_s(a)` with `min_i s(u, v, i)`.
pub fn min_equivalence<T: Scalar>(inp: &DimInputs<T>) -> Result<MinComparison<T>> {
    if inp.v.iter().any(|v| v.finite().is_none()) {
        return Err(Error::InvalidInput("the breakpoint comparison needs finite v".into()));
    }
    let frak = min_of(inp.breakpoints().iter().map(|a| s_frak(inp, a)).collect::<Result<Vec<_>>>()?.into_iter())
        .expect("nonempty");
    let idx = min_of((0..inp.dim()).map(|i| s_dimnumber(inp, i))).expect("nonempty");
    let equal = tie_eq(&frak, &idx);
    Ok(MinComparison { min_over_breakpoints: frak, min_over_indices: idx, equal })
}

pub fn min_equivalence_check<T: Scalar>(inp: &DimInputs<T>) -> bool {
    min_equivalence(inp).map(|c| c.equal).unwrap_or(false)
}

/// For consecutive breakpoints `t_k < t_{k+1}`, the sum with index sets frozen at `t_k` and
/// denominator `t_{k+1}` must equal `frak_s(t_{k+1})`.
pub fn breakpoint_identity_check<T: Scalar>(inp: &DimInputs<T>) -> bool {
    if inp.v.iter().any(|v| v.finite().is_none()) {
        return false;
    }
    let pts = inp.breakpoints();
    pts.windows(2).all(|w| {
        let frozen = frak_sets(inp, &w[0], TieRule::Inclusive);
        let lhs = frak_with_sets(inp, &frozen, &w[1]);
        match s_frak(inp, &w[1]) {
            Ok(rhs) => tie_eq(&lhs, &rhs),
            Err(_) => false,
        }
    })
}
