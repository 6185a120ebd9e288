//! Concrete ℓ^p realizations of algebra elements and their operator norms.
//!
//! The fiber `E = ℂ^d` carries the Euclidean norm, and `ℓ^p_μ(X, E)` the norm
//! `(Σ_x μ(x) ‖f(x)‖^p)^{1/p}`. Exact values are available at `p ∈ {1, ∞}` for
//! scalar fibers and at `p = 2` for all fibers; everything else is reported
//! as a lower/upper sandwich.

mod ascent;
mod formulas;
mod representation;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use ascent::{derive_seed, max_sum_of_norms, power_ascent, EstimateOptions, DEFAULT_RESTARTS};
pub use formulas::{interpolation_upper, norm_l1_formula, norm_sup_formula, pointwise_interpolation_upper};
pub use representation::{regular_representation, trajectory_norm, trajectory_operator};

use crate::algebra::{spectral_norm, AlgebraElement, CMatrix};
use crate::error::{Error, Result};

/// Bounds closer than this count as meeting.
pub const EXACT_GAP: f64 = 1e-9;

/// An exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 && !p.is_nan() {
            Ok(Exponent(p))
        } else {
            Err(Error::BadExponent(p.to_string()))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1/p`, zero at `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        if self.0.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INFINITY
        } else if self.0.is_infinite() {
            Exponent::ONE
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }

    pub fn is_two(self) -> bool {
        self.0 == 2.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// One of the exponents with an exact norm engine.
    pub fn is_endpoint(self) -> bool {
        self.is_one() || self.is_two() || self.is_infinite()
    }

    /// Parse a comma-separated list such as `1,1.5,inf`.
    pub fn parse_list(s: &str) -> Result<Vec<Exponent>> {
        s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INFINITY),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::BadExponent(s.to_string()))
                .and_then(Exponent::new),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// How a bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RowSum,
    ColumnSum,
    Svd,
    PowerAscent,
    SphereAscent,
    Triangle,
    RieszThorin,
    SupFormula,
    L1Formula,
    TrajectorySup,
    Zero,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from));
        write!(f, "{}", s.unwrap_or_default())
    }
}

/// A certified sandwich `lower ≤ ‖·‖ ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: Method,
    pub upper_method: Method,
    /// Set when the sandwich has closed to within [`EXACT_GAP`].
    pub exact: bool,
}

impl NormBounds {
    pub fn exact(value: f64, method: Method) -> Self {
        NormBounds {
            lower: value,
            upper: value,
            lower_method: method,
            upper_method: method,
            exact: true,
        }
    }

    pub fn between(lower: f64, lower_method: Method, upper: f64, upper_method: Method) -> Self {
        // an ascent may overshoot a closed-form upper bound by rounding only
        let upper = upper.max(lower);
        NormBounds {
            lower,
            upper,
            lower_method,
            upper_method,
            exact: upper - lower <= EXACT_GAP,
        }
    }

    /// Midpoint, the value reported when a single number is wanted.
    pub fn value(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Distance between two sandwiches: `|a - b|` when both are exact,
    /// otherwise the gap by which the intervals fail to overlap.
    pub fn discrepancy(&self, other: &NormBounds) -> f64 {
        if self.exact && other.exact {
            (self.value() - other.value()).abs()
        } else {
            (self.lower - other.upper).max(other.lower - self.upper).max(0.0)
        }
    }
}

/// A dense matrix acting on `ℓ^p_μ(X, ℂ^d)`, indexed `x * d + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    exponent: Exponent,
    matrix: CMatrix,
    weights: Vec<f64>,
    fiber_dim: usize,
}

impl Realization {
    pub fn from_parts(exponent: Exponent, matrix: CMatrix, weights: Vec<f64>, fiber_dim: usize) -> Self {
        assert_eq!(matrix.nrows(), weights.len() * fiber_dim);
        assert_eq!(matrix.ncols(), weights.len() * fiber_dim);
        Realization {
            exponent,
            matrix,
            weights,
            fiber_dim,
        }
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> usize {
        self.weights.len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn block(&self, x: usize, y: usize) -> CMatrix {
        let d = self.fiber_dim;
        self.matrix.view((x * d, y * d), (d, d)).into_owned()
    }

    pub fn apply(&self, f: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * f
    }

    /// Same matrix, viewed at another exponent.
    pub fn with_exponent(&self, p: Exponent) -> Self {
        Realization {
            exponent: p,
            ..self.clone()
        }
    }

    /// JSON form with complex entries as `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect())
            .collect();
        serde_json::json!({
            "p": self.exponent,
            "points": self.points(),
            "fiber_dim": self.fiber_dim,
            "weights": self.weights,
            "matrix": rows,
        })
    }

    /// CSV with header `row,col,re,im`, one line per entry.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["row", "col", "re", "im"]).map_err(|e| Error::Io(e.to_string()))?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.matrix[(i, j)];
                w.serialize((i, j, z.re, z.im)).map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Matrix of `b` on `ℓ^p_μ(X, E)`: block `(x, t_g^{-1}(x))` accumulates
/// `a_g(x) ρ_g(x)^{1/p}`, with factor 1 at `p = ∞`.
pub fn realize(b: &AlgebraElement, p: Exponent) -> Realization {
    let space = b.space();
    let n = space.points();
    let d = b.dim();
    let mut m = CMatrix::zeros(n * d, n * d);
    let inv_p = p.reciprocal();
    for (g, field) in b.terms() {
        let rho = space.rn_cocycle(g);
        for x in 0..n {
            let y = space.act_inv(g, x);
            let factor = rho[x].powf(inv_p);
            let mut view = m.view_mut((x * d, y * d), (d, d));
            view += field.at(x) * Complex64::new(factor, 0.0);
        }
    }
    Realization::from_parts(p, m, space.measure().to_vec(), d)
}

/// The ℓ^∞-side formal adjoint: block `(x, t_g(x))` accumulates
/// `[a_g(t_g(x))]^*`. Pairs with `realize(b, 1)` under [`pairing`].
pub fn formal_adjoint_matrix(b: &AlgebraElement) -> Realization {
    let space = b.space();
    let n = space.points();
    let d = b.dim();
    let mut m = CMatrix::zeros(n * d, n * d);
    for (g, field) in b.terms() {
        for x in 0..n {
            let y = space.act(g, x);
            let mut view = m.view_mut((x * d, y * d), (d, d));
            view += field.at(y).adjoint();
        }
    }
    Realization::from_parts(Exponent::INFINITY, m, space.measure().to_vec(), d)
}

/// `Σ_x μ(x) ⟨f(x), ξ(x)⟩`, linear in `f` and conjugate-linear in `ξ`.
pub fn pairing(weights: &[f64], dim: usize, f: &[Complex64], xi: &[Complex64]) -> Result<Complex64> {
    let n = weights.len() * dim;
    if f.len() != n {
        return Err(Error::DimensionMismatch(n, f.len()));
    }
    if xi.len() != n {
        return Err(Error::DimensionMismatch(n, xi.len()));
    }
    Ok(weights
        .iter()
        .enumerate()
        .map(|(x, &w)| {
            let s: Complex64 = (0..dim).map(|i| f[x * dim + i] * xi[x * dim + i].conj()).sum();
            s * w
        })
        .sum())
}

/// `(Σ_x μ(x) ‖f(x)‖^p)^{1/p}`, or `max_x ‖f(x)‖` at `p = ∞`.
pub fn weighted_norm(f: &[Complex64], p: Exponent, weights: &[f64], dim: usize) -> f64 {
    let fiber = |x: usize| -> f64 {
        f[x * dim..(x + 1) * dim].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    if p.is_infinite() {
        return (0..weights.len()).map(fiber).fold(0.0, f64::max);
    }
    let pv = p.value();
    let s: f64 = weights.iter().enumerate().map(|(x, &w)| w * fiber(x).powf(pv)).sum();
    s.powf(1.0 / pv)
}

/// Operator norm of a realization on its weighted space.
///
/// The realization is first conjugated by `D = diag(μ^{1/p})` onto the
/// unweighted space `ℓ^p(X, E)`; every engine below then works with unit
/// weights.
pub fn norm_p(r: &Realization, opts: &EstimateOptions) -> NormBounds {
    let p = r.exponent();
    let d = r.fiber_dim();
    let m = unweighted(r);
    if p.is_two() {
        return NormBounds::exact(spectral_norm(&m), Method::Svd);
    }
    if d == 1 {
        if p.is_one() {
            return NormBounds::exact(max_abs_sum(&m.transpose()), Method::ColumnSum);
        }
        if p.is_infinite() {
            return NormBounds::exact(max_abs_sum(&m), Method::RowSum);
        }
    }
    if p.is_one() {
        return sum_of_norms_bounds(&column_groups(&m, d), opts);
    }
    if p.is_infinite() {
        return sum_of_norms_bounds(&row_groups(&m, d), opts);
    }
    let upper = riesz_thorin_upper(&m, d, p);
    let lower = power_ascent(&m, d, p, opts);
    NormBounds::between(lower, Method::PowerAscent, upper, Method::RieszThorin)
}

/// `D B D^{-1}` with `D = diag(μ^{1/p})`, an isometric copy of the
/// realization on unweighted `ℓ^p`.
pub fn unweighted(r: &Realization) -> CMatrix {
    let d = r.fiber_dim();
    let w = r.weights();
    let s = r.exponent().reciprocal();
    let mut m = r.matrix().clone();
    if s == 0.0 || w.iter().all(|&v| v == w[0]) {
        return m;
    }
    let scale: Vec<f64> = w.iter().map(|v| v.powf(s)).collect();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= scale[i / d] / scale[j / d];
        }
    }
    m
}

fn max_abs_sum(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn block(m: &CMatrix, d: usize, x: usize, y: usize) -> CMatrix {
    m.view((x * d, y * d), (d, d)).into_owned()
}

fn nonzero(b: &CMatrix) -> bool {
    b.iter().any(|z| z.norm() > 0.0)
}

/// `‖M‖_1 = max_y sup_{‖v‖=1} Σ_x ‖M_{xy} v‖`.
fn column_groups(m: &CMatrix, d: usize) -> Vec<Vec<CMatrix>> {
    let n = m.nrows() / d;
    (0..n)
        .map(|y| (0..n).map(|x| block(m, d, x, y)).filter(nonzero).collect())
        .collect()
}

/// `‖M‖_∞ = max_x sup_{‖u‖=1} Σ_y ‖M_{xy}^* u‖`.
fn row_groups(m: &CMatrix, d: usize) -> Vec<Vec<CMatrix>> {
    let n = m.nrows() / d;
    (0..n)
        .map(|x| (0..n).map(|y| block(m, d, x, y).adjoint()).filter(nonzero).collect())
        .collect()
}

fn triangle_upper(groups: &[Vec<CMatrix>]) -> f64 {
    groups
        .iter()
        .map(|g| g.iter().map(spectral_norm).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `max_k sup_{‖u‖=1} Σ_i ‖C_{k,i} u‖`, bracketed by sphere ascent from below
/// and the triangle inequality from above.
pub(crate) fn sum_of_norms_bounds(groups: &[Vec<CMatrix>], opts: &EstimateOptions) -> NormBounds {
    let upper = triangle_upper(groups);
    let lowers = opts
        .exec
        .map_indexed(groups.len(), |k| max_sum_of_norms(&groups[k], &opts.for_stream(k as u64)));
    let lower = lowers.into_iter().fold(0.0, f64::max);
    NormBounds::between(lower, Method::SphereAscent, upper, Method::Triangle)
}

/// Riesz–Thorin upper bound for an unweighted matrix: the smaller of the
/// `(1, ∞)` interpolation and the one through `p = 2` on the same side.
fn riesz_thorin_upper(m: &CMatrix, d: usize, p: Exponent) -> f64 {
    let n1 = triangle_upper(&column_groups(m, d));
    let ninf = triangle_upper(&row_groups(m, d));
    let n2 = spectral_norm(m);
    let s = p.reciprocal();
    let via_ends = n1.powf(s) * ninf.powf(1.0 - s);
    let via_two = if s > 0.5 {
        // 1/p = (1 - θ) + θ/2
        let theta = 2.0 * (1.0 - s);
        n1.powf(1.0 - theta) * n2.powf(theta)
    } else {
        // 1/p = (1 - θ)/2
        let theta = 1.0 - 2.0 * s;
        n2.powf(1.0 - theta) * ninf.powf(theta)
    };
    via_ends.min(via_two)
}
