//! Trajectory representations `π_x` on `ℓ^p(G, E)` and the regular
//! representation on `ℓ^p(G, ℓ^p_μ(X, E))`.

use num_complex::Complex64;

use super::{norm_p, EstimateOptions, Exponent, Method, NormBounds, Realization};
use crate::algebra::{AlgebraElement, CMatrix};

/// `b_x = π_x(b)` with `(π_x(a)ξ)_g = a(t_g^{-1}(x)) ξ_g` and
/// `(π_x(T_{g0})ξ)_g = ξ_{g·g0}`: block `(g, g·g0)` accumulates
/// `a_{g0}(t_g^{-1}(x))`. Counting measure on `G`.
pub fn trajectory_operator(b: &AlgebraElement, x: usize, p: Exponent) -> Realization {
    let space = b.space();
    let group = space.group();
    let order = group.order();
    let d = b.dim();
    let mut m = CMatrix::zeros(order * d, order * d);
    for (g0, a) in b.terms() {
        for g in group.elements() {
            let col = group.mul(g, g0);
            let mut view = m.view_mut((g * d, col * d), (d, d));
            view += a.at(space.act_inv(g, x));
        }
    }
    Realization::from_parts(p, m, vec![1.0; order], d)
}

/// `sup_x ‖b_x‖_p`, largest lower and largest upper over all points.
pub fn trajectory_norm(b: &AlgebraElement, p: Exponent, opts: &EstimateOptions) -> NormBounds {
    let n = b.space().points();
    let per_point = opts.exec.map_indexed(n, |x| {
        let inner = EstimateOptions {
            exec: crate::exec::Exec::Sequential,
            ..opts.for_stream(x as u64)
        };
        norm_p(&trajectory_operator(b, x, p), &inner)
    });
    let lower = per_point.iter().map(|nb| nb.lower).fold(0.0, f64::max);
    let upper = per_point.iter().map(|nb| nb.upper).fold(0.0, f64::max);
    let exact = per_point.iter().all(|nb| nb.exact);
    NormBounds {
        lower,
        upper,
        lower_method: Method::TrajectorySup,
        upper_method: Method::TrajectorySup,
        exact,
    }
}

/// `b̄ = Σ ā_{g0} V_{g0}` with `(V_{g0}ξ)(g) = ξ(g·g0)` and
/// `(āξ)(g) = T̂_g(a) ξ(g)`, `T̂_g(a)(y) = a(t_g^{-1}(y))`.
///
/// Index layout `(g, y, i) ↦ (g·|X| + y)·d + i`; the weight of `(g, y)` is
/// `μ(y)`.
pub fn regular_representation(b: &AlgebraElement, p: Exponent) -> Realization {
    let space = b.space();
    let group = space.group();
    let order = group.order();
    let n = space.points();
    let d = b.dim();
    let size = order * n * d;
    let mut m = CMatrix::zeros(size, size);
    for (g0, a) in b.terms() {
        for g in group.elements() {
            let target = group.mul(g, g0);
            for y in 0..n {
                let row = (g * n + y) * d;
                let col = (target * n + y) * d;
                let mut view = m.view_mut((row, col), (d, d));
                view += a.at(space.act_inv(g, y)) * Complex64::new(1.0, 0.0);
            }
        }
    }
    let weights = (0..order).flat_map(|_| space.measure().iter().copied()).collect();
    Realization::from_parts(p, m, weights, d)
}
