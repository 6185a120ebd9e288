//! Finite sums `b = Σ_g a_g T_g` with matrix-valued coefficient fields.
//!
//! Coefficients are recoverable three ways: from storage
//! ([`AlgebraElement::coefficient`]), by averaging character twists
//! ([`AlgebraElement::character_average`]) and from a realized matrix
//! ([`reconstruct`]).

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::MeasuredGSpace;
use crate::error::{Error, Result};
use crate::group::Character;
use crate::norms::Realization;

pub type CMatrix = DMatrix<Complex64>;

/// Entries at or below this magnitude count as zero when reading a
/// realization back into coefficients.
pub const PATTERN_TOLERANCE: f64 = 1e-10;

/// A `d×d` complex matrix at every point of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    dim: usize,
    values: Vec<CMatrix>,
}

impl CoefficientField {
    pub fn new(values: Vec<CMatrix>) -> Result<Self> {
        let dim = values.first().map(|m| m.nrows()).unwrap_or(1);
        for m in &values {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(dim, m.nrows().max(m.ncols())));
            }
        }
        Ok(CoefficientField { dim, values })
    }

    pub fn zero(points: usize, dim: usize) -> Self {
        CoefficientField {
            dim,
            values: vec![CMatrix::zeros(dim, dim); points],
        }
    }

    pub fn identity(points: usize, dim: usize) -> Self {
        CoefficientField {
            dim,
            values: vec![CMatrix::identity(dim, dim); points],
        }
    }

    /// Scalar field from one complex value per point.
    pub fn scalar(values: &[Complex64]) -> Self {
        CoefficientField {
            dim: 1,
            values: values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect(),
        }
    }

    pub fn from_real(values: &[f64]) -> Self {
        let c: Vec<_> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::scalar(&c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, x: usize) -> &CMatrix {
        &self.values[x]
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|m| m.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_diff(&self, other: &CoefficientField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).norm()))
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CoefficientField {
            dim: self.dim,
            values: self.values.iter().map(|m| m * s).collect(),
        }
    }

    fn add_assign(&mut self, other: &CoefficientField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    /// Fiber operator norm `max_x ‖a(x)‖` (spectral norm).
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(spectral_norm).fold(0.0, f64::max)
    }
}

/// Largest singular value of a small dense matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// `b = Σ_{g∈F} a_g T_g` over a fixed measured space, in canonical form:
/// only nonzero coefficient fields are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    space: Arc<MeasuredGSpace>,
    dim: usize,
    terms: BTreeMap<usize, CoefficientField>,
}

impl AlgebraElement {
    pub fn zero(space: Arc<MeasuredGSpace>, dim: usize) -> Self {
        AlgebraElement {
            space,
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// `1·T_g`.
    pub fn shift(space: Arc<MeasuredGSpace>, dim: usize, g: usize) -> Result<Self> {
        space.group().check_element(g)?;
        let field = CoefficientField::identity(space.points(), dim);
        Self::from_terms(space, dim, vec![(g, field)])
    }

    /// `1·T_e`.
    pub fn identity(space: Arc<MeasuredGSpace>, dim: usize) -> Self {
        let e = space.group().identity();
        Self::shift(space, dim, e).expect("identity is a group element")
    }

    /// Sum the given terms; repeated group elements accumulate.
    pub fn from_terms(
        space: Arc<MeasuredGSpace>,
        dim: usize,
        terms: Vec<(usize, CoefficientField)>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<usize, CoefficientField> = BTreeMap::new();
        for (g, field) in terms {
            space.group().check_element(g)?;
            if field.dim() != dim {
                return Err(Error::DimensionMismatch(dim, field.dim()));
            }
            if field.points() != space.points() {
                return Err(Error::Validation(format!(
                    "coefficient at g = {g} has {} points, space has {}",
                    field.points(),
                    space.points()
                )));
            }
            match acc.get_mut(&g) {
                Some(existing) => existing.add_assign(&field),
                None => {
                    acc.insert(g, field);
                }
            }
        }
        Ok(AlgebraElement { space, dim, terms: acc }.pruned())
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, f| !f.is_zero());
        self
    }

    pub fn space(&self) -> &Arc<MeasuredGSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> Vec<usize> {
        self.terms.keys().copied().collect()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &CoefficientField)> {
        self.terms.iter().map(|(&g, f)| (g, f))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `N_g(b)`: the stored coefficient, or the zero field off the support.
    pub fn coefficient(&self, g: usize) -> CoefficientField {
        self.terms
            .get(&g)
            .cloned()
            .unwrap_or_else(|| CoefficientField::zero(self.space.points(), self.dim))
    }

    fn check_compatible(&self, other: &AlgebraElement) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &other.space) && *self.space != *other.space {
            return Err(Error::SpaceMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<Self> {
        self.check_compatible(other)?;
        let terms = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .map(|(&g, f)| (g, f.clone()))
            .collect();
        Self::from_terms(self.space.clone(), self.dim, terms)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        AlgebraElement {
            space: self.space.clone(),
            dim: self.dim,
            terms: self.terms.iter().map(|(&g, f)| (g, f.scale(s))).collect(),
        }
        .pruned()
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Product via `(a T_g)(a' T_h) = [a · (a' ∘ t_g^{-1})] T_{gh}`.
    pub fn multiply(&self, other: &AlgebraElement) -> Result<Self> {
        self.check_compatible(other)?;
        let group = self.space.group();
        let n = self.space.points();
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (&g, a) in &self.terms {
            for (&h, b) in &other.terms {
                let values = (0..n)
                    .map(|x| a.at(x) * b.at(self.space.act_inv(g, x)))
                    .collect();
                terms.push((group.mul(g, h), CoefficientField { dim: self.dim, values }));
            }
        }
        Self::from_terms(self.space.clone(), self.dim, terms)
    }

    /// `b(χ) = Σ_g χ(g) a_g T_g`.
    pub fn twist(&self, chi: &Character) -> Self {
        AlgebraElement {
            space: self.space.clone(),
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(&g, f)| (g, f.scale(chi.value(g))))
                .collect(),
        }
        .pruned()
    }

    /// `(1/|Ĝ|) Σ_χ conj(χ(g0)) b(χ)`, which equals `a_{g0} T_{g0}`.
    ///
    /// Terms away from `g0` cancel only up to rounding; fields whose entries
    /// all stay below `1e-12` are dropped.
    pub fn character_average(&self, g0: usize) -> Result<Self> {
        self.space.group().check_element(g0)?;
        let chars = self.space.group().characters()?;
        let weight = 1.0 / chars.len() as f64;
        let mut acc = AlgebraElement::zero(self.space.clone(), self.dim);
        for chi in &chars {
            let c = chi.value(g0).conj() * weight;
            acc = acc.add(&self.twist(chi).scale(c))?;
        }
        acc.terms.retain(|_, f| f.max_abs() > 1e-12);
        Ok(acc)
    }

    /// Largest entrywise difference over the union of supports.
    pub fn max_coefficient_diff(&self, other: &AlgebraElement) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|&g| self.coefficient(g).max_diff(&other.coefficient(g)))
            .fold(0.0, f64::max)
    }
}

/// Read every coefficient back out of a realization over a free action.
///
/// Block `(x, t_g^{-1}(x))` of the realization holds `ρ_g(x)^{1/p} a_g(x)`;
/// under a free action the source points `t_g^{-1}(x)` are distinct for
/// distinct `g`, so each block names exactly one coefficient.
pub fn reconstruct(space: &Arc<MeasuredGSpace>, r: &Realization) -> Result<AlgebraElement> {
    let freedom = space.is_topologically_free();
    if let Some((g, x)) = freedom.witness {
        return Err(Error::NotFreeAction { g, x });
    }
    let n = space.points();
    let d = r.fiber_dim();
    if r.points() != n {
        return Err(Error::Validation(format!(
            "realization has {} points, space has {n}",
            r.points()
        )));
    }
    let m = r.matrix();
    let inv_p = r.exponent().reciprocal();
    let group = space.group();
    let mut claimed = vec![false; n * n];
    let mut terms = Vec::with_capacity(group.order());
    for g in group.elements() {
        let rho = space.rn_cocycle(g);
        let mut values = Vec::with_capacity(n);
        for x in 0..n {
            let y = space.act_inv(g, x);
            claimed[x * n + y] = true;
            let factor = rho[x].powf(inv_p);
            values.push(m.view((x * d, y * d), (d, d)).map(|z| z / factor));
        }
        terms.push((g, CoefficientField { dim: d, values }));
    }
    for x in 0..n {
        for y in (0..n).filter(|&y| !claimed[x * n + y]) {
            for i in 0..d {
                for j in 0..d {
                    let v = m[(x * d + i, y * d + j)].norm();
                    if v > PATTERN_TOLERANCE {
                        return Err(Error::PatternViolation {
                            row: x * d + i,
                            col: y * d + j,
                            magnitude: v,
                        });
                    }
                }
            }
        }
    }
    AlgebraElement::from_terms(space.clone(), d, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{uniform_weights, Weight};
    use crate::group::{FiniteGroup, GroupDescriptor};
    use crate::norms::{realize, Exponent};
    use num_rational::Ratio;

    fn z2_space(weights: Vec<Weight>) -> Arc<MeasuredGSpace> {
        let g = Arc::new(FiniteGroup::build(&GroupDescriptor::Cyclic(2)).unwrap());
        Arc::new(MeasuredGSpace::new(g, weights, vec![vec![0, 1], vec![1, 0]]).unwrap())
    }

    fn running(space: Arc<MeasuredGSpace>) -> AlgebraElement {
        AlgebraElement::from_terms(
            space,
            1,
            vec![
                (0, CoefficientField::from_real(&[1.0, 2.0])),
                (1, CoefficientField::from_real(&[3.0, 1.0])),
            ],
        )
        .unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn shifts_compose_to_identity() {
        let s = z2_space(uniform_weights(2));
        let t = AlgebraElement::shift(s.clone(), 1, 1).unwrap();
        let prod = t.multiply(&t).unwrap();
        assert_eq!(prod, AlgebraElement::identity(s, 1));
    }

    #[test]
    fn diagonal_product_is_pointwise() {
        let s = z2_space(uniform_weights(2));
        let a = AlgebraElement::from_terms(s.clone(), 1, vec![(0, CoefficientField::from_real(&[2.0, 3.0]))]).unwrap();
        let b = AlgebraElement::from_terms(s, 1, vec![(0, CoefficientField::from_real(&[5.0, 7.0]))]).unwrap();
        let p = a.multiply(&b).unwrap();
        assert_eq!(p.support(), vec![0]);
        assert_eq!(p.coefficient(0), CoefficientField::from_real(&[10.0, 21.0]));
    }

    #[test]
    fn running_square_matches_matrix_square() {
        let s = z2_space(uniform_weights(2));
        let b = running(s);
        let sq = b.multiply(&b).unwrap();
        for p in [Exponent::ONE, Exponent::TWO, Exponent::INFINITY] {
            let rb = realize(&b, p);
            let lhs = realize(&sq, p);
            let rhs = rb.matrix() * rb.matrix();
            assert!((lhs.matrix() - rhs).iter().all(|z| z.norm() < 1e-12));
        }
        // hand expansion: (a_e + a_s T_s)^2 = (a_e^2 + a_s (a_s∘t_s)) + (a_e a_s + a_s (a_e∘t_s)) T_s
        assert_eq!(sq.coefficient(0), CoefficientField::from_real(&[1.0 + 3.0, 4.0 + 3.0]));
        assert_eq!(sq.coefficient(1), CoefficientField::from_real(&[3.0 + 6.0, 2.0 + 1.0]));
    }

    #[test]
    fn product_coefficient_is_shifted_pointwise_product() {
        let s = z2_space(vec![Weight::Exact(Ratio::from_integer(1)), Weight::Exact(Ratio::from_integer(3))]);
        let a = AlgebraElement::from_terms(s.clone(), 1, vec![(1, CoefficientField::from_real(&[2.0, -1.0]))]).unwrap();
        let b = AlgebraElement::from_terms(s, 1, vec![(1, CoefficientField::from_real(&[5.0, 4.0]))]).unwrap();
        let prod = a.multiply(&b).unwrap();
        // gh = e; a(x) · b(t_s^{-1} x)
        assert_eq!(prod.coefficient(0), CoefficientField::from_real(&[8.0, -5.0]));
        for p in [Exponent::ONE, Exponent::new(1.5).unwrap(), Exponent::INFINITY] {
            let composed = realize(&a, p).matrix() * realize(&b, p).matrix();
            assert!((realize(&prod, p).matrix() - composed).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn coefficient_extraction() {
        let s = z2_space(uniform_weights(2));
        let id = AlgebraElement::identity(s.clone(), 2);
        assert_eq!(id.coefficient(0), CoefficientField::identity(2, 2));
        assert!(id.coefficient(1).is_zero());
        assert!(AlgebraElement::shift(s, 1, 7).is_err());
    }

    #[test]
    fn z2_twist_flips_sign() {
        let s = z2_space(uniform_weights(2));
        let b = running(s.clone());
        let chars = s.group().characters().unwrap();
        assert_eq!(b.twist(&chars[0]), b);
        let t = b.twist(&chars[1]);
        assert_eq!(t.coefficient(0), b.coefficient(0));
        assert_eq!(t.coefficient(1), b.coefficient(1).scale(c(-1.0)));
        assert_eq!(t.twist(&chars[1].conj()), b);
    }

    #[test]
    fn z2_average_recovers_each_term() {
        let s = z2_space(uniform_weights(2));
        let b = running(s.clone());
        let ae = b.character_average(0).unwrap();
        assert_eq!(ae.support(), vec![0]);
        assert!(ae.coefficient(0).max_diff(&b.coefficient(0)) < 1e-12);
        let only_e = AlgebraElement::from_terms(s, 1, vec![(0, CoefficientField::from_real(&[1.0, 1.0]))]).unwrap();
        assert!(only_e.character_average(1).unwrap().is_zero());
    }

    #[test]
    fn mismatches_are_errors() {
        let s1 = z2_space(uniform_weights(2));
        let s2 = z2_space(vec![Weight::Real(1.0), Weight::Real(2.0)]);
        let a = AlgebraElement::identity(s1.clone(), 1);
        assert_eq!(a.multiply(&AlgebraElement::identity(s2, 1)), Err(Error::SpaceMismatch));
        assert_eq!(a.multiply(&AlgebraElement::identity(s1, 2)), Err(Error::DimensionMismatch(1, 2)));
    }

    #[test]
    fn reconstruct_basic_cases() {
        let s = z2_space(vec![Weight::Exact(Ratio::from_integer(1)), Weight::Exact(Ratio::from_integer(3))]);
        let zero = AlgebraElement::zero(s.clone(), 1);
        assert!(reconstruct(&s, &realize(&zero, Exponent::TWO)).unwrap().is_zero());
        let t = AlgebraElement::shift(s.clone(), 1, 1).unwrap();
        let back = reconstruct(&s, &realize(&t, Exponent::ONE)).unwrap();
        assert_eq!(back.support(), vec![1]);
        assert!(back.max_coefficient_diff(&t) < 1e-15);
        let b = running(s.clone());
        let back = reconstruct(&s, &realize(&b, Exponent::TWO)).unwrap();
        assert!(back.max_coefficient_diff(&b) < 1e-12);
    }

    #[test]
    fn reconstruct_rejects_non_free_and_stray_entries() {
        let g = Arc::new(FiniteGroup::build(&GroupDescriptor::Cyclic(2)).unwrap());
        let triv = Arc::new(MeasuredGSpace::trivial(g.clone(), uniform_weights(2)).unwrap());
        let b = AlgebraElement::identity(triv.clone(), 1);
        assert_eq!(
            reconstruct(&triv, &realize(&b, Exponent::ONE)),
            Err(Error::NotFreeAction { g: 1, x: 0 })
        );
        // Z2 acting freely on 4 points: two orbits; an entry linking orbits is off-pattern
        let s = Arc::new(
            MeasuredGSpace::new(g, uniform_weights(4), vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap(),
        );
        let r = realize(&AlgebraElement::identity(s.clone(), 1), Exponent::TWO);
        let mut m = r.matrix().clone();
        m[(0, 2)] = c(1e-3);
        let bad = Realization::from_parts(r.exponent(), m, s.measure().to_vec(), 1);
        assert!(matches!(reconstruct(&s, &bad), Err(Error::PatternViolation { row: 0, col: 2, .. })));
    }
}
