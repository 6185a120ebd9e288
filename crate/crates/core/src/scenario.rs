//! Scenario files and seeded random scenarios.
//!
//! ```json
//! {
//!   "label": "z2-running",
//!   "seed": 7,
//!   "group": "cyclic:2",
//!   "space": { "points": 2, "weights": ["1", "1"], "action": [[0, 1], [1, 0]] },
//!   "element": [
//!     { "g": 0, "coeff": [[[[1, 0]]], [[[2, 0]]]] },
//!     { "g": 1, "coeff": [[[[3, 0]]], [[[1, 0]]]] }
//!   ]
//! }
//! ```
//!
//! `action` is either one permutation per group element, an object
//! `{"generators": [{"g": 1, "perm": [...]}]}`, or one of the strings
//! `"translation"` / `"trivial"`. Weights are numbers or rational strings.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, CoefficientField};
use crate::dynamics::{uniform_weights, MeasuredGSpace, Weight};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupDescriptor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionSpec {
    Named(String),
    Elements(Vec<Vec<usize>>),
    Generators { generators: Vec<GeneratorSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub g: usize,
    pub perm: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub points: usize,
    pub weights: Vec<Weight>,
    pub action: ActionSpec,
}

/// One term `a_g T_g`; `coeff[x][i][j] = [re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub g: usize,
    pub coeff: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TermSpec {
    pub fn from_field(g: usize, field: &CoefficientField) -> Self {
        let coeff = field
            .values()
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect()
            })
            .collect();
        TermSpec { g, coeff }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub seed: u64,
    pub group: GroupDescriptor,
    pub space: SpaceSpec,
    #[serde(default)]
    pub element: Vec<TermSpec>,
    /// Needed only when `element` is empty and the fiber is not scalar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_dim: Option<usize>,
}

/// A validated scenario with its space and element built.
#[derive(Debug, Clone)]
pub struct Instance {
    pub space: Arc<MeasuredGSpace>,
    pub element: AlgebraElement,
}

impl Scenario {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.instantiate()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    pub fn build_space(&self) -> Result<Arc<MeasuredGSpace>> {
        let group = Arc::new(FiniteGroup::build(&self.group)?);
        let spec = &self.space;
        if spec.weights.len() != spec.points {
            return Err(Error::Validation(format!(
                "space.weights has {} entries for {} points",
                spec.weights.len(),
                spec.points
            )));
        }
        let weights = spec.weights.clone();
        let space = match &spec.action {
            ActionSpec::Named(name) => match name.as_str() {
                "trivial" => MeasuredGSpace::trivial(group, weights)?,
                "translation" => {
                    if spec.points != group.order() {
                        return Err(Error::Validation(format!(
                            "translation action needs {} points, got {}",
                            group.order(),
                            spec.points
                        )));
                    }
                    let t = MeasuredGSpace::translation(group);
                    t.with_weights(weights)?
                }
                other => return Err(Error::Validation(format!("unknown action `{other}`"))),
            },
            ActionSpec::Elements(perms) => MeasuredGSpace::new(group, weights, perms.clone())?,
            ActionSpec::Generators { generators } => {
                let gens: Vec<_> = generators.iter().map(|g| (g.g, g.perm.clone())).collect();
                MeasuredGSpace::from_generators(group, weights, &gens)?
            }
        };
        Ok(Arc::new(space))
    }

    /// Run every cross-reference and module invariant check.
    pub fn instantiate(&self) -> Result<Instance> {
        let space = self.build_space().map_err(|e| match e {
            Error::InvalidAction(m) => Error::Validation(format!("action: {m}")),
            Error::InvalidWeights(m) => Error::Validation(format!("weights: {m}")),
            other => other,
        })?;
        let dim = self
            .element
            .first()
            .and_then(|t| t.coeff.first())
            .map(|m| m.len())
            .or(self.fiber_dim)
            .unwrap_or(1);
        if let Some(fd) = self.fiber_dim {
            if fd != dim {
                return Err(Error::Validation(format!("fiber_dim {fd} but coefficients are {dim}x{dim}")));
            }
        }
        let n = space.points();
        let mut terms = Vec::with_capacity(self.element.len());
        for t in &self.element {
            space.group().check_element(t.g).map_err(|_| {
                Error::Validation(format!("element term g = {} is not a group element", t.g))
            })?;
            if t.coeff.len() != n {
                return Err(Error::Validation(format!(
                    "coefficient at g = {} has {} points, space has {n}",
                    t.g,
                    t.coeff.len()
                )));
            }
            let mut values = Vec::with_capacity(n);
            for (x, rows) in t.coeff.iter().enumerate() {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Validation(format!(
                        "coefficient at g = {}, point {x} is not {dim}x{dim}",
                        t.g
                    )));
                }
                values.push(DMatrix::from_fn(dim, dim, |i, j| {
                    let [re, im] = rows[i][j];
                    Complex64::new(re, im)
                }));
            }
            terms.push((t.g, CoefficientField::new(values)?));
        }
        let element = AlgebraElement::from_terms(space.clone(), dim, terms)?;
        Ok(Instance { space, element })
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_json_str(&text)
}

/// Parameters for [`random_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    pub group: GroupDescriptor,
    pub points: usize,
    pub dim: usize,
    pub support: usize,
    pub seed: u64,
    pub free: bool,
}

/// Deterministic random scenario: weights uniform in `[0.5, 2]`, coefficient
/// entries uniform in `[-1, 1]²`, and the action assembled from free orbits
/// (each a relabelled copy of the translation action). With `free = false`
/// at least one point is fixed by the whole group.
pub fn random_scenario(spec: &RandomSpec) -> Result<Scenario> {
    let group = FiniteGroup::build(&spec.group)?;
    let order = group.order();
    let n = spec.points;
    if n == 0 {
        return Err(Error::Validation("random scenario needs at least one point".into()));
    }
    let fixed = if spec.free {
        if !n.is_multiple_of(order) {
            return Err(Error::InfeasibleFreeAction { order, points: n });
        }
        0
    } else if n < order {
        n
    } else {
        match n % order {
            0 => order,
            r => r,
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut rng);
    let orbits = (n - fixed) / order;
    let mut perms = vec![vec![0usize; n]; order];
    for g in group.elements() {
        let ginv = group.inv(g);
        for j in 0..orbits {
            for h in group.elements() {
                perms[g][labels[j * order + h]] = labels[j * order + group.mul(h, ginv)];
            }
        }
        for &p in &labels[orbits * order..] {
            perms[g][p] = p;
        }
    }
    let weights = (0..n).map(|_| Weight::Real(rng.random_range(0.5..=2.0))).collect();
    let mut elements: Vec<usize> = group.elements().collect();
    elements.shuffle(&mut rng);
    let mut support: Vec<usize> = elements.into_iter().take(spec.support.min(order)).collect();
    support.sort_unstable();
    let d = spec.dim.max(1);
    let element = support
        .into_iter()
        .map(|g| {
            let coeff = (0..n)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            (0..d)
                                .map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])
                                .collect()
                        })
                        .collect()
                })
                .collect();
            TermSpec { g, coeff }
        })
        .collect::<Vec<_>>();
    Ok(Scenario {
        label: format!("random:{}:n{}:d{}:s{}", spec.group, n, d, spec.seed),
        seed: spec.seed,
        group: spec.group.clone(),
        space: SpaceSpec {
            points: n,
            weights,
            action: ActionSpec::Elements(perms),
        },
        fiber_dim: if element.is_empty() { Some(d) } else { None },
        element,
    })
}

fn real_term(g: usize, values: &[f64]) -> TermSpec {
    TermSpec {
        g,
        coeff: values.iter().map(|&v| vec![vec![[v, 0.0]]]).collect(),
    }
}

/// `Z₂` acting on two points by the swap, uniform measure,
/// `a_e = (1, 2)`, `a_s = (3, 1)`.
pub fn running_scenario() -> Scenario {
    Scenario {
        label: "z2-running".into(),
        seed: 7,
        group: GroupDescriptor::Cyclic(2),
        space: SpaceSpec {
            points: 2,
            weights: uniform_weights(2),
            action: ActionSpec::Elements(vec![vec![0, 1], vec![1, 0]]),
        },
        element: vec![real_term(0, &[1.0, 2.0]), real_term(1, &[3.0, 1.0])],
        fiber_dim: None,
    }
}

/// `Z₂` acting trivially, `b = T_e − T_s`. Realizes to the zero operator
/// while `‖a_e‖ = 1`.
pub fn counterexample_scenario() -> Scenario {
    Scenario {
        label: "z2-trivial-action".into(),
        seed: 7,
        group: GroupDescriptor::Cyclic(2),
        space: SpaceSpec {
            points: 2,
            weights: uniform_weights(2),
            action: ActionSpec::Named("trivial".into()),
        },
        element: vec![real_term(0, &[1.0, 1.0]), real_term(1, &[-1.0, -1.0])],
        fiber_dim: None,
    }
}
