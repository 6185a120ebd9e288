//! Closed-form norm formulas over free actions and the interpolation upper
//! bounds built from them.

use super::{sum_of_norms_bounds, EstimateOptions, Exponent, Method, NormBounds};
use crate::algebra::{spectral_norm, AlgebraElement, CMatrix};

/// `‖b‖_∞ = sup_x sup_{f ∈ S_F(E)} ‖Σ_g a_g(x) f_g‖`.
///
/// Scalar fibers give `max_x Σ_g |a_g(x)|` exactly. Without a free action the
/// formula is only an upper bound and the result is not exact.
pub fn norm_sup_formula(b: &AlgebraElement, opts: &EstimateOptions) -> NormBounds {
    let space = b.space();
    let groups: Vec<Vec<CMatrix>> = (0..space.points())
        .map(|x| b.terms().map(|(_, a)| a.at(x).adjoint()).collect())
        .collect();
    formula_bounds(b, &groups, Method::SupFormula, opts)
}

/// `‖b‖_1 = sup_x sup_{f ∈ S_F(E*)} ‖Σ_g [a_g(t_g(x))]^* f_g‖`; scalar
/// fibers give `max_x Σ_g |a_g(t_g(x))|`.
pub fn norm_l1_formula(b: &AlgebraElement, opts: &EstimateOptions) -> NormBounds {
    let space = b.space();
    let groups: Vec<Vec<CMatrix>> = (0..space.points())
        .map(|x| b.terms().map(|(g, a)| a.at(space.act(g, x)).clone()).collect())
        .collect();
    formula_bounds(b, &groups, Method::L1Formula, opts)
}

/// `groups[x]` holds matrices `C` with the per-point quantity
/// `sup_{‖u‖=1} Σ ‖C u‖`.
fn formula_bounds(
    b: &AlgebraElement,
    groups: &[Vec<CMatrix>],
    method: Method,
    opts: &EstimateOptions,
) -> NormBounds {
    let free = b.space().is_free();
    if b.dim() == 1 {
        let v = groups
            .iter()
            .map(|g| g.iter().map(|c| c[(0, 0)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        return if free {
            NormBounds::exact(v, method)
        } else {
            NormBounds::between(0.0, Method::Zero, v, method)
        };
    }
    let bounds = sum_of_norms_bounds(groups, opts);
    if free {
        NormBounds {
            upper_method: Method::Triangle,
            ..bounds
        }
    } else {
        NormBounds::between(0.0, Method::Zero, bounds.upper, Method::Triangle)
    }
}

fn triangle_sup<F>(points: usize, per_point: F) -> f64
where
    F: Fn(usize) -> f64,
{
    (0..points).map(per_point).fold(0.0, f64::max)
}

fn endpoint_uppers(b: &AlgebraElement) -> (f64, f64) {
    let space = b.space();
    let n = space.points();
    let sup = triangle_sup(n, |x| b.terms().map(|(_, a)| spectral_norm(a.at(x))).sum());
    let l1 = triangle_sup(n, |x| b.terms().map(|(g, a)| spectral_norm(a.at(space.act(g, x)))).sum());
    (l1, sup)
}

fn interpolate(l1: f64, sup: f64, p: Exponent) -> f64 {
    let s = p.reciprocal();
    l1.powf(s) * sup.powf(1.0 - s)
}

/// `‖b‖_1^{1/p} · ‖b‖_∞^{1 - 1/p}`, using the formula values (exact for
/// scalar fibers, triangle upper bounds otherwise).
pub fn interpolation_upper(b: &AlgebraElement, p: Exponent) -> f64 {
    let (l1, sup) = endpoint_uppers(b);
    interpolate(l1, sup, p)
}

/// `sup_x ‖b_x‖_1^{1/p} · ‖b_x‖_∞^{1 - 1/p}` over the trajectory operators,
/// with
/// `‖b_x‖_∞ = max_h Σ_g ‖a_g(t_h^{-1}(x))‖` and
/// `‖b_x‖_1 = max_h Σ_g ‖a_g(t_{g h^{-1}}(x))‖`
/// (exact for scalar fibers, upper bounds otherwise).
pub fn pointwise_interpolation_upper(b: &AlgebraElement, p: Exponent) -> f64 {
    let space = b.space();
    let group = space.group();
    let norms: Vec<(usize, Vec<f64>)> = b
        .terms()
        .map(|(g, a)| (g, a.values().iter().map(spectral_norm).collect()))
        .collect();
    triangle_sup(space.points(), |x| {
        let sup = group
            .elements()
            .map(|h| norms.iter().map(|(_, a)| a[space.act_inv(h, x)]).sum::<f64>())
            .fold(0.0, f64::max);
        let l1 = group
            .elements()
            .map(|h| {
                norms
                    .iter()
                    .map(|(g, a)| a[space.act(group.mul(*g, group.inv(h)), x)])
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        interpolate(l1, sup, p)
    })
}
