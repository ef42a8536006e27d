//! Subsampling schemes, the survival bound ρ(D, Θ), and Monte Carlo
//! estimates of the robust-inference failure probability.

use serde::{Deserialize, Serialize};

use crate::combin::{binom, binom_f64};
use crate::error::{Error, Result};
use crate::models::{
    resample_outside, sample_planted, Instance, IndexScheme, PlantedModel, Solution,
};
use crate::rng::{chunked_reduce, stream_rng, trial_rng};
use crate::stats::{wilson_interval, Moments, Z95};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Keep each vertex; a coordinate survives iff all its vertices do.
    VertexBernoulli,
    /// Keep each coordinate independently.
    CoordinateBernoulli,
    /// Keep each CSP constraint slot (all of its fields) independently.
    ConstraintBernoulli,
    /// Keep each matrix row/column index; an entry survives iff both do.
    RowColumnBernoulli,
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" | "vertex-bernoulli" => Ok(SchemeKind::VertexBernoulli),
            "coordinate" | "coordinate-bernoulli" => Ok(SchemeKind::CoordinateBernoulli),
            "constraint" | "constraint-bernoulli" => Ok(SchemeKind::ConstraintBernoulli),
            "row-column" | "row-column-bernoulli" => Ok(SchemeKind::RowColumnBernoulli),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsampleScheme {
    pub kind: SchemeKind,
    pub rho: f64,
}

impl SubsampleScheme {
    pub fn new(kind: SchemeKind, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidArgument(format!("rho = {rho} outside [0, 1]")));
        }
        Ok(SubsampleScheme { kind, rho })
    }

    pub fn vertex(rho: f64) -> Self {
        SubsampleScheme { kind: SchemeKind::VertexBernoulli, rho }
    }

    pub fn coordinate(rho: f64) -> Self {
        SubsampleScheme { kind: SchemeKind::CoordinateBernoulli, rho }
    }

    pub fn constraint(rho: f64) -> Self {
        SubsampleScheme { kind: SchemeKind::ConstraintBernoulli, rho }
    }

    pub fn row_column(rho: f64) -> Self {
        SubsampleScheme { kind: SchemeKind::RowColumnBernoulli, rho }
    }

    pub fn check_compatible(&self, scheme: &IndexScheme) -> Result<()> {
        let ok = match self.kind {
            SchemeKind::VertexBernoulli | SchemeKind::CoordinateBernoulli => true,
            SchemeKind::ConstraintBernoulli => matches!(scheme, IndexScheme::CspSlots { .. }),
            SchemeKind::RowColumnBernoulli => matches!(scheme, IndexScheme::SymmetricMatrix { .. }),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Incompatible(format!(
                "{:?} subsampling on {}",
                self.kind,
                scheme.label()
            )))
        }
    }

    /// Number of independent Bernoulli draws per subsample.
    fn draws(&self, scheme: &IndexScheme) -> usize {
        match self.kind {
            SchemeKind::VertexBernoulli | SchemeKind::RowColumnBernoulli => scheme.n(),
            SchemeKind::CoordinateBernoulli => scheme.len(),
            SchemeKind::ConstraintBernoulli => scheme.units(),
        }
    }

    /// Coordinate survival pattern given the per-unit draws.
    fn survivors(&self, scheme: &IndexScheme, kept: &[bool]) -> Vec<bool> {
        match self.kind {
            SchemeKind::CoordinateBernoulli => kept.to_vec(),
            SchemeKind::ConstraintBernoulli => {
                (0..scheme.len()).map(|c| kept[scheme.unit_of(c)]).collect()
            }
            SchemeKind::VertexBernoulli | SchemeKind::RowColumnBernoulli => {
                let layout = scheme.layout();
                (0..scheme.len())
                    .map(|c| layout.coord_vertices(c).iter().all(|&v| kept[v as usize]))
                    .collect()
            }
        }
    }
}

/// A drawn subset S together with the sub-instance it exposes.
#[derive(Clone, Debug)]
pub struct Subsample {
    /// Sorted coordinates in S.
    pub keep: Vec<usize>,
    pub in_s: Vec<bool>,
    /// Surviving vertices for vertex and row-column schemes.
    pub vertices: Option<Vec<bool>>,
    /// The instance with every coordinate outside S set to 0.
    pub sub: Instance,
}

/// Draw S ∼ Θ. Units are decided by `u < ρ` on one uniform each, drawn in
/// unit order, so runs sharing a stream are coupled across ρ.
pub fn subsample<R: rand::Rng + ?Sized>(
    inst: &Instance,
    scheme: &SubsampleScheme,
    rng: &mut R,
) -> Result<Subsample> {
    scheme.check_compatible(&inst.scheme)?;
    let kept: Vec<bool> = (0..scheme.draws(&inst.scheme))
        .map(|_| rng.random::<f64>() < scheme.rho)
        .collect();
    let in_s = scheme.survivors(&inst.scheme, &kept);
    let keep: Vec<usize> = (0..in_s.len()).filter(|&c| in_s[c]).collect();
    let coords = inst
        .coords
        .iter()
        .zip(&in_s)
        .map(|(&x, &k)| if k { x } else { 0.0 })
        .collect();
    let vertices = matches!(
        scheme.kind,
        SchemeKind::VertexBernoulli | SchemeKind::RowColumnBernoulli
    )
    .then_some(kept);
    Ok(Subsample {
        keep,
        in_s,
        vertices,
        sub: Instance {
            scheme: inst.scheme.clone(),
            coords,
        },
    })
}

/// Fewest vertices spanning `d` distinct groups of `arity` vertices.
pub fn min_vertices(d: usize, arity: usize) -> usize {
    let mut m = arity;
    while (binom(m as u64, arity as u64) as usize) < d {
        m += 1;
    }
    m
}

/// `ρ(D, Θ) = max_{|α| ≥ D} Pr[α ⊆ S]`; 0 when no support of size D exists.
pub fn rho(big_d: usize, scheme: &SubsampleScheme, model: &PlantedModel) -> Result<f64> {
    let is = model.scheme();
    scheme.check_compatible(&is)?;
    if big_d == 0 {
        return Ok(1.0);
    }
    if big_d > is.len() {
        return Ok(0.0);
    }
    let exponent = match scheme.kind {
        SchemeKind::CoordinateBernoulli => big_d,
        SchemeKind::ConstraintBernoulli => big_d.div_ceil(is.fields()),
        SchemeKind::VertexBernoulli | SchemeKind::RowColumnBernoulli => {
            min_vertices(big_d.div_ceil(is.fields()), is.arity())
        }
    };
    Ok(scheme.rho.powi(exponent as i32))
}

/// A support of size `D` attaining `rho`.
pub fn rho_witness(big_d: usize, scheme: &SubsampleScheme, model: &PlantedModel) -> Result<Vec<usize>> {
    let is = model.scheme();
    scheme.check_compatible(&is)?;
    if big_d > is.len() {
        return Err(Error::InvalidArgument(format!(
            "no support of size {big_d} among {} coordinates",
            is.len()
        )));
    }
    // colex order packs the first groups onto the fewest vertices
    Ok((0..big_d).collect())
}

/// The sub-instance witness used in the robust-inference argument.
pub fn solution_map(model: &PlantedModel, s: &Subsample, planted: &Solution) -> Solution {
    match model {
        PlantedModel::Clique(_) => {
            let mut chosen: Vec<usize> = Vec::new();
            for i in (0..planted.x.len()).filter(|&i| planted.x[i] != 0.0) {
                if let Some(v) = &s.vertices {
                    if !v[i] {
                        continue;
                    }
                }
                // keep i only if every clique edge to the chosen set is exposed
                let visible = chosen.iter().all(|&j| {
                    let (a, b) = (i.min(j) as u32, i.max(j) as u32);
                    let e = crate::combin::colex_rank(&[a, b]);
                    s.in_s[e] && s.sub.coords[e] > 0.0
                });
                if visible {
                    chosen.push(i);
                }
            }
            let mut x = vec![0.0; planted.x.len()];
            for i in chosen {
                x[i] = 1.0;
            }
            Solution { x }
        }
        _ => planted.clone(),
    }
}

/// Feasibility of `x` for the problem's polynomial system on `inst`, and its objective value.
pub fn evaluate_solution(model: &PlantedModel, inst: &Instance, x: &Solution) -> (bool, f64) {
    let layout = inst.scheme.layout();
    let xs = &x.x;
    match model {
        PlantedModel::Clique(_) => {
            let boolean = xs.iter().all(|&v| v == 0.0 || v == 1.0);
            let clique = (0..layout.units()).all(|e| {
                let vs = layout.unit_vertices(e);
                xs[vs[0] as usize] * xs[vs[1] as usize] == 0.0 || inst.coords[e] > 0.0
            });
            (boolean && clique, xs.iter().sum())
        }
        PlantedModel::Csp(p) => {
            let f = p.k + 2;
            let boolean = xs.iter().all(|&v| v.abs() == 1.0);
            let mut sat = 0.0;
            for u in 0..layout.units() {
                let slot = &inst.coords[u * f..(u + 1) * f];
                if slot[0] <= 0.0 {
                    continue;
                }
                let mut mask = 0usize;
                for (j, &v) in layout.unit_vertices(u).iter().enumerate() {
                    if xs[v as usize] * slot[1 + j] < 0.0 {
                        mask |= 1 << j;
                    }
                }
                if p.predicate[mask] as f64 == slot[f - 1] {
                    sat += 1.0;
                }
            }
            (boolean, sat)
        }
        PlantedModel::Sbm(_) => {
            let ok = xs.iter().all(|&v| v.abs() == 1.0) && xs.iter().sum::<f64>() == 0.0;
            let value = (0..layout.units())
                .filter(|&e| inst.coords[e] > 0.0)
                .map(|e| {
                    let vs = layout.unit_vertices(e);
                    xs[vs[0] as usize] * xs[vs[1] as usize]
                })
                .sum();
            (ok, value)
        }
        PlantedModel::Dks(p) => {
            let ok = xs.iter().all(|&v| v == 0.0 || v == 1.0)
                && xs.iter().sum::<f64>() == p.k as f64;
            let value = (0..layout.units())
                .filter(|&e| inst.coords[e] > 0.0)
                .map(|e| {
                    let vs = layout.unit_vertices(e);
                    xs[vs[0] as usize] * xs[vs[1] as usize]
                })
                .sum();
            (ok, value)
        }
        PlantedModel::Tpca(_) => {
            let ok = xs.iter().all(|&v| v.abs() == 1.0);
            let value = (0..layout.units())
                .map(|a| {
                    let spike: f64 = layout.unit_vertices(a).iter().map(|&i| xs[i as usize]).product();
                    spike * inst.coords[a]
                })
                .sum();
            (ok, value)
        }
        PlantedModel::Spca(p) => {
            let ok = xs.iter().all(|&v| v == 0.0 || v.abs() == 1.0)
                && xs.iter().map(|v| v * v).sum::<f64>() == p.k as f64;
            let value = (0..layout.units())
                .map(|e| {
                    let vs = layout.unit_vertices(e);
                    xs[vs[0] as usize] * xs[vs[1] as usize] * inst.coords[e]
                })
                .sum();
            (ok, value)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub model: PlantedModel,
    pub scheme: SubsampleScheme,
    pub threshold: f64,
    pub trials: u64,
    pub failures: u64,
    pub eps_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Objective of the inferred solution on the completed instances.
    pub value_mean: f64,
    pub value_sd: f64,
    pub value_min: f64,
    pub value_max: f64,
}

/// Monte Carlo estimate of `Pr[x(I_S) infeasible on I_S ∘ I']`.
pub fn estimate_epsilon(
    model: &PlantedModel,
    scheme: &SubsampleScheme,
    threshold: f64,
    trials: u64,
    seed: u64,
) -> Result<RobustnessReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    model.validate()?;
    scheme.check_compatible(&model.scheme())?;
    let trial = |t: u64| -> Result<(bool, f64)> {
        let (inst, planted) = sample_planted(model, &mut trial_rng(seed, t))?;
        let s = subsample(&inst, scheme, &mut stream_rng(seed, t, 1))?;
        let completed = resample_outside(model, &inst, &s.keep, &mut stream_rng(seed, t, 2))?;
        let x = solution_map(model, &s, &planted);
        let (ok, value) = evaluate_solution(model, &completed, &x);
        Ok((ok && value >= threshold, value))
    };
    let (failures, values) = chunked_reduce(
        trials,
        64,
        || Ok((0u64, Moments::new())),
        |acc: &mut Result<(u64, Moments)>, t| {
            if let Ok((fails, m)) = acc {
                match trial(t) {
                    Ok((pass, value)) => {
                        *fails += u64::from(!pass);
                        m.push(value);
                    }
                    Err(e) => *acc = Err(e),
                }
            }
        },
        |acc, part| match (acc.as_mut(), part) {
            (Ok((fa, ma)), Ok((fb, mb))) => {
                *fa += fb;
                ma.merge(&mb);
            }
            (Ok(_), Err(e)) => *acc = Err(e),
            _ => {}
        },
    )?;
    let (ci_lo, ci_hi) = wilson_interval(failures, trials, Z95);
    Ok(RobustnessReport {
        model: model.clone(),
        scheme: *scheme,
        threshold,
        trials,
        failures,
        eps_hat: failures as f64 / trials as f64,
        ci_lo,
        ci_hi,
        value_mean: values.mean,
        value_sd: values.std_dev(),
        value_min: values.min,
        value_max: values.max,
    })
}

/// A shipped robust-inference configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustConfig {
    pub model: PlantedModel,
    pub scheme: SubsampleScheme,
    pub threshold: f64,
    pub trials: u64,
    pub target: f64,
}

/// Slack factor applied to the asymptotic thresholds at desk scale.
pub const DEFAULT_EPS: f64 = 0.2;

/// Default configuration for a problem name.
///
/// Thresholds follow the per-problem Chernoff arguments with ε = 0.2:
/// clique `|K ∩ U| ≥ 10` for a 30-clique at ρ = 1/2; csp `(1−ε)ρ(1−δ)m`;
/// sbm `(1−ε)(a−b)n/4` at `ρ = 1 − ε(a−b)/(10(a+b))`; dks `(1−ε)ρ q C(k,2)`;
/// tensor and sparse PCA half the retained signal.
pub fn default_config(problem: &str) -> Result<RobustConfig> {
    let e = DEFAULT_EPS;
    let cfg = match problem {
        "clique" => RobustConfig {
            model: PlantedModel::clique(200, 30),
            scheme: SubsampleScheme::vertex(0.5),
            threshold: 10.0,
            trials: 10_000,
            target: 0.01,
        },
        "csp" => {
            let (n, alpha, delta) = (30, 5.0, 0.1);
            let rho = 1.0 - e;
            RobustConfig {
                model: PlantedModel::csp_xor(n, 3, alpha, delta),
                scheme: SubsampleScheme::constraint(rho),
                threshold: (1.0 - e) * rho * (1.0 - delta) * alpha * n as f64,
                trials: 2_000,
                target: 0.05,
            }
        }
        "sbm" => {
            let (n, a, b) = (200, 30.0, 5.0);
            RobustConfig {
                model: PlantedModel::sbm(n, a, b),
                scheme: SubsampleScheme::coordinate(1.0 - e * (a - b) / (10.0 * (a + b))),
                threshold: (1.0 - e) * (a - b) * n as f64 / 4.0,
                trials: 2_000,
                target: 0.05,
            }
        }
        "dks" => {
            let (n, k, p, q) = (100, 20, 0.1, 0.6);
            let rho = 1.0 - e;
            RobustConfig {
                model: PlantedModel::dks(n, k, p, q),
                scheme: SubsampleScheme::coordinate(rho),
                threshold: (1.0 - e) * rho * q * binom_f64(k as u64, 2),
                trials: 2_000,
                target: 0.05,
            }
        }
        "tpca" => {
            let (n, k, lambda) = (30, 3, 60.0);
            let rho = 0.5;
            let eta = lambda * (n as f64).powf(-(k as f64) / 2.0);
            RobustConfig {
                model: PlantedModel::tpca_gaussian(n, k, lambda, 0.0),
                scheme: SubsampleScheme::coordinate(rho),
                threshold: rho * eta * binom_f64(n as u64, k as u64) / 2.0,
                trials: 2_000,
                target: 0.05,
            }
        }
        "spca" => {
            let (n, k, lambda) = (100, 20, 16.0);
            let rho = 0.5;
            RobustConfig {
                model: PlantedModel::spca_gaussian(n, k, lambda, 0.0),
                scheme: SubsampleScheme::coordinate(rho),
                threshold: rho * (lambda / k as f64) * binom_f64(k as u64, 2) / 2.0,
                trials: 2_000,
                target: 0.05,
            }
        }
        other => return Err(Error::InvalidArgument(format!("unknown problem `{other}`"))),
    };
    Ok(cfg)
}

/// Default subsampling scheme for a model, as used in the robustness arguments.
pub fn default_scheme_kind(model: &PlantedModel) -> SchemeKind {
    match model {
        PlantedModel::Clique(_) => SchemeKind::VertexBernoulli,
        PlantedModel::Csp(_) => SchemeKind::ConstraintBernoulli,
        _ => SchemeKind::CoordinateBernoulli,
    }
}
