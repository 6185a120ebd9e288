//! Finite measured G-spaces.
//!
//! A space is a finite point set `X` with a strictly positive measure and a
//! left action `g ↦ t_g` by permutations, so `t_{gh} = t_g ∘ t_h`. On a
//! finite discrete space topological freedom is the same as freeness.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

/// A point weight, exact when given as a rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Exact(Ratio<i64>),
    Real(f64),
}

impl Weight {
    pub fn value(&self) -> f64 {
        match self {
            Weight::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Weight::Real(v) => *v,
        }
    }

    fn is_positive(&self) -> bool {
        match self {
            Weight::Exact(r) => *r > Ratio::zero(),
            Weight::Real(v) => v.is_finite() && *v > 0.0,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Exact(r) => write!(f, "{r}"),
            Weight::Real(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse::<Ratio<i64>>()
            .map(Weight::Exact)
            .map_err(|_| Error::InvalidWeights(format!("`{s}` is not a rational")))
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Weight::Exact(r) => s.serialize_str(&r.to_string()),
            Weight::Real(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Weight::Real(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

pub fn uniform_weights(n: usize) -> Vec<Weight> {
    vec![Weight::Exact(Ratio::from_integer(1)); n]
}

/// Outcome of the freedom test, with a fixed point of a non-identity element
/// when the action is not free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Freedom {
    pub free: bool,
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredGSpace {
    group: Arc<FiniteGroup>,
    weights: Vec<Weight>,
    values: Vec<f64>,
    /// `perms[g][x] = t_g(x)`
    perms: Vec<Vec<usize>>,
    /// `inv_perms[g][x] = t_g^{-1}(x)`
    inv_perms: Vec<Vec<usize>>,
}

impl MeasuredGSpace {
    /// Build from one permutation per group element, validating the action.
    pub fn new(group: Arc<FiniteGroup>, weights: Vec<Weight>, perms: Vec<Vec<usize>>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Validation("space has no points".into()));
        }
        if let Some((x, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_positive()) {
            return Err(Error::InvalidWeights(format!("weight of point {x} is {w}, must be > 0")));
        }
        if perms.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "{} permutations given for a group of order {}",
                perms.len(),
                group.order()
            )));
        }
        for (g, p) in perms.iter().enumerate() {
            check_permutation(p, n).map_err(|m| Error::InvalidAction(format!("t_{g}: {m}")))?;
        }
        let e = group.identity();
        if perms[e].iter().enumerate().any(|(x, &y)| x != y) {
            return Err(Error::InvalidAction("t_e is not the identity".into()));
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                if (0..n).any(|x| perms[gh][x] != perms[g][perms[h][x]]) {
                    return Err(Error::InvalidAction(format!(
                        "t_{{gh}} != t_g ∘ t_h for (g, h) = ({g}, {h})"
                    )));
                }
            }
        }
        let inv_perms = group.elements().map(|g| perms[group.inv(g)].clone()).collect();
        let values = weights.iter().map(Weight::value).collect();
        Ok(MeasuredGSpace {
            group,
            weights,
            values,
            perms,
            inv_perms,
        })
    }

    /// Close a partial action given on generators, then validate it.
    pub fn from_generators(
        group: Arc<FiniteGroup>,
        weights: Vec<Weight>,
        generators: &[(usize, Vec<usize>)],
    ) -> Result<Self> {
        let n = weights.len();
        let order = group.order();
        let mut perms: Vec<Option<Vec<usize>>> = vec![None; order];
        for (g, p) in generators {
            group.check_element(*g)?;
            check_permutation(p, n).map_err(|m| Error::InvalidAction(format!("generator {g}: {m}")))?;
        }
        perms[group.identity()] = Some((0..n).collect());
        let mut frontier = vec![group.identity()];
        while let Some(h) = frontier.pop() {
            let th = perms[h].clone().unwrap();
            for (g, tg) in generators {
                let gh = group.mul(*g, h);
                let composed: Vec<usize> = th.iter().map(|&y| tg[y]).collect();
                match &perms[gh] {
                    Some(existing) if *existing != composed => {
                        return Err(Error::InvalidAction(format!(
                            "t_{{gh}} != t_g ∘ t_h for (g, h) = ({g}, {h})"
                        )))
                    }
                    Some(_) => {}
                    None => {
                        perms[gh] = Some(composed);
                        frontier.push(gh);
                    }
                }
            }
        }
        let perms = perms
            .into_iter()
            .enumerate()
            .map(|(g, p)| p.ok_or_else(|| Error::InvalidAction(format!("element {g} not generated"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, weights, perms)
    }

    /// Every point fixed by every element.
    pub fn trivial(group: Arc<FiniteGroup>, weights: Vec<Weight>) -> Result<Self> {
        let n = weights.len();
        let perms = vec![(0..n).collect(); group.order()];
        Self::new(group, weights, perms)
    }

    /// `X = G` with uniform measure and `t_g(x) = x·g^{-1}`, so that
    /// `a(t_g^{-1}(x)) = a(x·g)`.
    pub fn translation(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        let perms = group
            .elements()
            .map(|g| (0..n).map(|x| group.mul(x, group.inv(g))).collect())
            .collect();
        Self::new(group, uniform_weights(n), perms).expect("translation is a valid action")
    }

    /// Same group and action with a different measure.
    pub fn with_weights(&self, weights: Vec<Weight>) -> Result<Self> {
        if weights.len() != self.points() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} points",
                weights.len(),
                self.points()
            )));
        }
        Self::new(self.group.clone(), weights, self.perms.clone())
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    /// Weights as reals.
    pub fn measure(&self) -> &[f64] {
        &self.values
    }

    pub fn perm(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    #[inline]
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.perms[g][x]
    }

    #[inline]
    pub fn act_inv(&self, g: usize, x: usize) -> usize {
        self.inv_perms[g][x]
    }

    pub fn fixed_set(&self, g: usize) -> Vec<usize> {
        (0..self.points()).filter(|&x| self.act(g, x) == x).collect()
    }

    pub fn is_topologically_free(&self) -> Freedom {
        let e = self.group.identity();
        let witness = self
            .group
            .elements()
            .filter(|&g| g != e)
            .find_map(|g| self.fixed_set(g).first().map(|&x| (g, x)));
        Freedom {
            free: witness.is_none(),
            witness,
        }
    }

    pub fn is_free(&self) -> bool {
        self.is_topologically_free().free
    }

    /// `ρ_g(x) = μ(t_g^{-1}(x)) / μ(x)`, the density making `T_g` an ℓ^p isometry.
    pub fn rn_cocycle(&self, g: usize) -> Vec<f64> {
        (0..self.points())
            .map(|x| {
                let y = self.act_inv(g, x);
                match (&self.weights[y], &self.weights[x]) {
                    (Weight::Exact(a), Weight::Exact(b)) => (a / b).to_f64().unwrap_or(f64::NAN),
                    _ => self.values[y] / self.values[x],
                }
            })
            .collect()
    }

    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.points()];
        for g in self.group.elements() {
            seen[self.act(g, x)] = true;
        }
        (0..self.points()).filter(|&y| seen[y]).collect()
    }
}

fn check_permutation(p: &[usize], n: usize) -> std::result::Result<(), String> {
    if p.len() != n {
        return Err(format!("length {} for {n} points", p.len()));
    }
    let mut hit = vec![false; n];
    for &y in p {
        if y >= n || hit[y] {
            return Err(format!("not a permutation of 0..{n}"));
        }
        hit[y] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupDescriptor;

    fn grp(n: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::build(&GroupDescriptor::Cyclic(n)).unwrap())
    }

    fn transposition_space() -> MeasuredGSpace {
        MeasuredGSpace::new(grp(2), uniform_weights(3), vec![vec![0, 1, 2], vec![1, 0, 2]]).unwrap()
    }

    #[test]
    fn fixed_sets() {
        let s = transposition_space();
        assert_eq!(s.fixed_set(0), vec![0, 1, 2]);
        assert_eq!(s.fixed_set(1), vec![2]);
        let rot = MeasuredGSpace::translation(grp(4));
        assert!(rot.fixed_set(1).is_empty());
    }

    #[test]
    fn freedom_and_witnesses() {
        for n in 2..7 {
            assert!(MeasuredGSpace::translation(grp(n)).is_topologically_free().free);
        }
        let triv = MeasuredGSpace::trivial(grp(2), uniform_weights(3)).unwrap();
        assert_eq!(triv.is_topologically_free().witness, Some((1, 0)));
        assert_eq!(transposition_space().is_topologically_free().witness, Some((1, 2)));
        // trivial group acts freely on anything
        assert!(MeasuredGSpace::trivial(grp(1), uniform_weights(2)).unwrap().is_free());
    }

    #[test]
    fn cocycle_examples() {
        let w = vec![Weight::Exact(Ratio::from_integer(1)), Weight::Exact(Ratio::from_integer(3))];
        let s = MeasuredGSpace::new(grp(2), w, vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(s.rn_cocycle(0), vec![1.0, 1.0]);
        assert_eq!(s.rn_cocycle(1), vec![3.0, 1.0 / 3.0]);
        let u = MeasuredGSpace::translation(grp(5));
        assert!(u.group().elements().all(|g| u.rn_cocycle(g).iter().all(|&r| r == 1.0)));
    }

    #[test]
    fn translation_of_small_groups() {
        let z2 = MeasuredGSpace::translation(grp(2));
        assert_eq!(z2.perm(1), &[1, 0]);
        let z3 = MeasuredGSpace::translation(grp(3));
        assert_eq!(z3.perm(1), &[2, 0, 1]);
        let t = MeasuredGSpace::translation(grp(1));
        assert_eq!(t.points(), 1);
        assert_eq!(t.perm(0), &[0]);
    }

    #[test]
    fn orbits() {
        let z3 = MeasuredGSpace::translation(grp(3));
        assert_eq!(z3.orbit(1), vec![0, 1, 2]);
        let triv = MeasuredGSpace::trivial(grp(2), uniform_weights(3)).unwrap();
        assert_eq!(triv.orbit(1), vec![1]);
        let s = transposition_space();
        assert_eq!(s.orbit(0), vec![0, 1]);
        assert_eq!(s.orbit(2), vec![2]);
    }

    #[test]
    fn rejects_non_homomorphic_action() {
        // Z3 with t_1 a transposition: t_1∘t_1 != t_2
        let err = MeasuredGSpace::new(
            grp(3),
            uniform_weights(3),
            vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 0, 1]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidAction(ref m) if m.contains("(g, h) = (1, 1)")), "{err}");
    }

    #[test]
    fn rejects_bad_weights() {
        let w = vec![Weight::Real(1.0), Weight::Real(0.0)];
        assert!(matches!(
            MeasuredGSpace::trivial(grp(2), w),
            Err(Error::InvalidWeights(_))
        ));
    }

    #[test]
    fn generators_close_to_full_action() {
        let s = MeasuredGSpace::from_generators(grp(4), uniform_weights(4), &[(1, vec![1, 2, 3, 0])]).unwrap();
        assert_eq!(s.perm(2), &[2, 3, 0, 1]);
        assert!(s.is_free());
        // a generator of order 2 cannot represent an element of order 4 faithfully... but it is still
        // an action; an order-3 permutation is not
        let bad = MeasuredGSpace::from_generators(grp(4), uniform_weights(3), &[(1, vec![1, 2, 0])]);
        assert!(bad.is_err());
    }

    #[test]
    fn weight_text_forms() {
        let w: Weight = "1/3".parse().unwrap();
        assert_eq!(w, Weight::Exact(Ratio::new(1, 3)));
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"1/3\"");
        let r: Weight = serde_json::from_str("0.5").unwrap();
        assert_eq!(r, Weight::Real(0.5));
    }
}
