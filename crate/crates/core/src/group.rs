//! Finite groups given by composition tables, characters of abelian groups
//! and the Følner deficiency of a finite subset.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest group order accepted by [`FiniteGroup::build`].
pub const MAX_ORDER: usize = 1024;
/// Largest degree accepted for symmetric groups.
pub const MAX_SYMMETRIC_DEGREE: usize = 5;

/// Textual group descriptor: `cyclic:n`, `symmetric:n`,
/// `product:[cyclic:2,cyclic:3]` or `table:[[0,1],[1,0]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupDescriptor {
    Cyclic(usize),
    Symmetric(usize),
    Product(Vec<GroupDescriptor>),
    Table(Vec<Vec<usize>>),
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupDescriptor::Symmetric(n) => write!(f, "symmetric:{n}"),
            GroupDescriptor::Product(parts) => {
                write!(f, "product:[")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "]")
            }
            GroupDescriptor::Table(t) => {
                write!(f, "table:{}", serde_json::to_string(t).map_err(|_| fmt::Error)?)
            }
        }
    }
}

/// Split `a,b,[c,d]` at top-level commas.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts
}

impl FromStr for GroupDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadDescriptor(s.to_string());
        let s = s.trim();
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "cyclic" => Ok(GroupDescriptor::Cyclic(rest.trim().parse().map_err(|_| bad())?)),
            "symmetric" => Ok(GroupDescriptor::Symmetric(
                rest.trim().parse().map_err(|_| bad())?,
            )),
            "product" => {
                let inner = rest
                    .trim()
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(bad)?;
                if inner.trim().is_empty() {
                    return Ok(GroupDescriptor::Product(Vec::new()));
                }
                split_top_level(inner)
                    .into_iter()
                    .map(GroupDescriptor::from_str)
                    .collect::<Result<Vec<_>>>()
                    .map(GroupDescriptor::Product)
            }
            "table" => serde_json::from_str::<Vec<Vec<usize>>>(rest.trim())
                .map(GroupDescriptor::Table)
                .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl Serialize for GroupDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite group stored as its full composition table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn build(desc: &GroupDescriptor) -> Result<Self> {
        match desc {
            GroupDescriptor::Cyclic(n) => Self::cyclic(*n),
            GroupDescriptor::Symmetric(n) => Self::symmetric(*n),
            GroupDescriptor::Product(parts) => {
                let mut acc = Self::cyclic(1)?;
                for p in parts {
                    acc = acc.direct_product(&Self::build(p)?)?;
                }
                Ok(acc)
            }
            GroupDescriptor::Table(t) => Self::from_table(t.clone()),
        }
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("cyclic group of order 0".into()));
        }
        if n > MAX_ORDER {
            return Err(Error::SizeLimit(format!("cyclic:{n} exceeds order {MAX_ORDER}")));
        }
        let table = (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect();
        let inverses = (0..n).map(|g| (n - g) % n).collect();
        Ok(FiniteGroup {
            order: n,
            table,
            identity: 0,
            inverses,
        })
    }

    /// Permutations of `0..n` in lexicographic order, composed as
    /// `(σ·τ)(i) = σ(τ(i))`. The identity is element 0.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SYMMETRIC_DEGREE {
            return Err(Error::SizeLimit(format!(
                "symmetric:{n} outside 1..={MAX_SYMMETRIC_DEGREE}"
            )));
        }
        let perms = permutations(n);
        let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| {
                        let c: Vec<usize> = (0..n).map(|i| s[t[i]]).collect();
                        index(&c)
                    })
                    .collect()
            })
            .collect();
        Self::from_table_unchecked(table)
    }

    /// Validate an explicit composition table.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        if n > MAX_ORDER {
            return Err(Error::SizeLimit(format!("table of order {n} exceeds {MAX_ORDER}")));
        }
        for (g, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!("row {g} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidTable(format!("entry {bad} in row {g} out of range")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidTable(format!(
                            "associativity fails for ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Self::from_table_unchecked(table)
    }

    /// Locate identity and inverses; assumes associativity.
    fn from_table_unchecked(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidTable("no two-sided identity".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidTable(format!("element {g} has no inverse")))?;
            inverses.push(inv);
        }
        Ok(FiniteGroup {
            order: n,
            table,
            identity,
            inverses,
        })
    }

    /// Direct product; element `(a, b)` has index `a * other.order() + b`.
    pub fn direct_product(&self, other: &FiniteGroup) -> Result<Self> {
        let n = self.order * other.order;
        if n > MAX_ORDER {
            return Err(Error::SizeLimit(format!("product of order {n} exceeds {MAX_ORDER}")));
        }
        let m = other.order;
        let table = (0..n)
            .map(|g| {
                (0..n)
                    .map(|h| self.table[g / m][h / m] * m + other.table[g % m][h % m])
                    .collect()
            })
            .collect();
        Ok(FiniteGroup {
            order: n,
            table,
            identity: self.identity * m + other.identity,
            inverses: (0..n)
                .map(|g| self.inverses[g / m] * m + other.inverses[g % m])
                .collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn check_element(&self, g: usize) -> Result<()> {
        if g < self.order {
            Ok(())
        } else {
            Err(Error::BadElement(g))
        }
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|g| (0..g).all(|h| self.table[g][h] == self.table[h][g]))
    }

    /// All characters of an abelian group, trivial character first.
    ///
    /// Built by extending along a chain of subgroups `H ⊂ <H, g>`: if `k` is
    /// least with `g^k ∈ H`, each character of `H` has exactly `k`
    /// extensions, one per `k`-th root of its value at `g^k`.
    pub fn characters(&self) -> Result<Vec<Character>> {
        if !self.is_abelian() {
            return Err(Error::NonAbelianGroup);
        }
        let n = self.order;
        let e = self.identity;
        let mut members = vec![false; n];
        members[e] = true;
        let mut subgroup = vec![e];
        let mut phases: Vec<Vec<Option<Ratio<i64>>>> = vec![{
            let mut v = vec![None; n];
            v[e] = Some(Ratio::zero());
            v
        }];
        while subgroup.len() < n {
            let g = (0..n).find(|&g| !members[g]).expect("proper subgroup");
            let mut powers = vec![e, g];
            while !members[*powers.last().unwrap()] {
                let next = self.mul(*powers.last().unwrap(), g);
                powers.push(next);
            }
            let k = powers.len() - 1;
            let gk = powers[k];
            let mut next_subgroup = Vec::with_capacity(subgroup.len() * k);
            for &pj in &powers[..k] {
                for &h in &subgroup {
                    next_subgroup.push((h, pj));
                }
            }
            let mut next_phases = Vec::with_capacity(phases.len() * k);
            for chi in &phases {
                let base = chi[gk].expect("g^k lies in H");
                for m in 0..k as i64 {
                    let omega = frac(&((base + Ratio::from_integer(m)) / Ratio::from_integer(k as i64)));
                    let mut ext = vec![None; n];
                    for (j, &pj) in powers[..k].iter().enumerate() {
                        for &h in &subgroup {
                            let x = self.mul(h, pj);
                            let ph = chi[h].unwrap() + omega * Ratio::from_integer(j as i64);
                            ext[x] = Some(frac(&ph));
                        }
                    }
                    next_phases.push(ext);
                }
            }
            subgroup = next_subgroup
                .into_iter()
                .map(|(h, pj)| self.mul(h, pj))
                .collect();
            for &x in &subgroup {
                members[x] = true;
            }
            phases = next_phases;
        }
        Ok(phases
            .into_iter()
            .map(|p| Character {
                phases: p.into_iter().map(|v| v.unwrap()).collect(),
            })
            .collect())
    }

    /// `|(U·s) △ U| / |U|` for a nonempty subset `U`.
    pub fn folner_deficiency(&self, subset: &[usize], s: usize) -> Result<Ratio<u64>> {
        self.check_element(s)?;
        let mut in_u = vec![false; self.order];
        for &u in subset {
            self.check_element(u)?;
            in_u[u] = true;
        }
        let size = in_u.iter().filter(|&&b| b).count();
        if size == 0 {
            return Err(Error::EmptySubset);
        }
        let mut in_us = vec![false; self.order];
        for u in (0..self.order).filter(|&u| in_u[u]) {
            in_us[self.mul(u, s)] = true;
        }
        let sym = (0..self.order).filter(|&g| in_u[g] != in_us[g]).count();
        Ok(Ratio::new(sym as u64, size as u64))
    }
}

fn frac(r: &Ratio<i64>) -> Ratio<i64> {
    r - r.floor()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// A character of an abelian group. Values are held exactly as phases
/// `r ∈ [0, 1)` standing for `exp(2πi r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    phases: Vec<Ratio<i64>>,
}

impl Character {
    pub fn trivial(order: usize) -> Self {
        Character {
            phases: vec![Ratio::zero(); order],
        }
    }

    pub fn phases(&self) -> &[Ratio<i64>] {
        &self.phases
    }

    pub fn value(&self, g: usize) -> Complex64 {
        root_of_unity(&self.phases[g])
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.phases.iter().map(root_of_unity).collect()
    }

    pub fn conj(&self) -> Self {
        Character {
            phases: self.phases.iter().map(|r| frac(&-r)).collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.phases.iter().all(Zero::is_zero)
    }

    /// Check the homomorphism law against `group`.
    pub fn is_homomorphism(&self, group: &FiniteGroup) -> bool {
        self.phases.len() == group.order()
            && self.phases[group.identity()].is_zero()
            && group.elements().all(|g| {
                group
                    .elements()
                    .all(|h| frac(&(self.phases[g] + self.phases[h])) == self.phases[group.mul(g, h)])
            })
    }
}

/// `exp(2πi r)`, exact at multiples of a quarter turn.
pub fn root_of_unity(r: &Ratio<i64>) -> Complex64 {
    let r = frac(r);
    let quarter = Ratio::new(1, 4);
    if r.is_zero() {
        Complex64::new(1.0, 0.0)
    } else if r == quarter {
        Complex64::new(0.0, 1.0)
    } else if r == Ratio::new(1, 2) {
        Complex64::new(-1.0, 0.0)
    } else if r == quarter * Ratio::from_integer(3) {
        Complex64::new(0.0, -1.0)
    } else {
        let theta = 2.0 * std::f64::consts::PI * (*r.numer() as f64) / (*r.denom() as f64);
        Complex64::from_polar(1.0, theta)
    }
}

/// Normalized inner product `(1/|G|) Σ χ1(g) conj(χ2(g))`.
pub fn character_inner(a: &Character, b: &Character) -> Complex64 {
    let n = a.phases.len() as f64;
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x * y.conj())
        .sum::<Complex64>()
        / n
}

impl std::ops::Mul for Character {
    type Output = Character;
    fn mul(self, rhs: Character) -> Character {
        Character {
            phases: self
                .phases
                .iter()
                .zip(&rhs.phases)
                .map(|(a, b)| frac(&(a + b)))
                .collect(),
        }
    }
}
