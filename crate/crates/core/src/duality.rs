//! Exact primal/dual experiments on fully enumerable instance spaces.
//!
//! A [`MatrixValuedFn`] stores one symmetric matrix per instance. Inner
//! products are `⟨P, Q⟩_ν = E_{I∼ν} tr(P(I) Q(I))`, computed by enumeration.
//! Degree truncation is entrywise in the orthonormal product basis of ν.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{forward, inverse, ProductBasis};
use crate::linalg::psd_part;
use crate::models::{check_enumerable, density_deviation_table, Instance, PlantedModel, Solution};
use crate::pseudocal::TupleIndex;
use crate::robust::{evaluate_solution, rho, SchemeKind, SubsampleScheme};
use crate::rng::Rng;

/// Largest coordinate count accepted here.
pub const MAX_COORDS: usize = 16;

/// One symmetric matrix per instance mask, with the weights of ν.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixValuedFn {
    pub dim: usize,
    pub values: Vec<DMatrix<f64>>,
    weights: Vec<f64>,
    basis: ProductBasis,
}

/// ν-probability of every instance mask.
fn nu_weights(law_p: &[f64]) -> Vec<f64> {
    let mut w = vec![1.0];
    for &p in law_p {
        let mut next = Vec::with_capacity(2 * w.len());
        next.extend(w.iter().map(|x| x * p));
        next.extend(w.iter().map(|x| x * (1.0 - p)));
        w = next;
    }
    w
}

fn boolean_probs(model: &PlantedModel) -> Result<Vec<f64>> {
    let n = check_enumerable(model)?;
    if n > MAX_COORDS {
        return Err(Error::guard("instance coordinates N", n as f64, MAX_COORDS as f64));
    }
    match model.law() {
        crate::models::CoordLaw::Boolean(p) => Ok(p),
        crate::models::CoordLaw::Gaussian(_) => unreachable!("rejected by check_enumerable"),
    }
}

impl MatrixValuedFn {
    pub fn zeros(model: &PlantedModel, dim: usize) -> Result<Self> {
        let p = boolean_probs(model)?;
        let weights = nu_weights(&p);
        Ok(MatrixValuedFn {
            dim,
            values: vec![DMatrix::zeros(dim, dim); weights.len()],
            basis: ProductBasis::from_law(&model.law()),
            weights,
        })
    }

    /// Tabulates `f` over every instance.
    pub fn from_fn<F>(model: &PlantedModel, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&Instance) -> DMatrix<f64>,
    {
        let mut out = Self::zeros(model, dim)?;
        let scheme = model.scheme();
        for (mask, v) in out.values.iter_mut().enumerate() {
            let m = f(&Instance::from_mask(scheme.clone(), mask as u64));
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InvalidArgument(format!(
                    "matrix of shape {:?} where {dim}x{dim} was expected",
                    m.shape()
                )));
            }
            *v = m;
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_coords(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    fn zeros_like(&self) -> Self {
        MatrixValuedFn {
            dim: self.dim,
            values: vec![DMatrix::zeros(self.dim, self.dim); self.values.len()],
            weights: self.weights.clone(),
            basis: self.basis.clone(),
        }
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(&self.weights)
            .map(|((a, b), w)| w * a.dot(b))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b * c;
        }
        out
    }

    /// Pointwise projection onto the PSD cone.
    pub fn psd_part(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = psd_part(v));
        out
    }

    /// Applies `keep(support_mask)` as a 0/1 filter to every entry's coefficients.
    pub fn filter_coefficients<K: Fn(u64) -> bool>(&self, keep: K) -> Self {
        let mut out = self.zeros_like();
        let mut table = vec![0.0; self.values.len()];
        for i in 0..self.dim {
            for j in i..self.dim {
                for (t, v) in table.iter_mut().zip(&self.values) {
                    *t = v[(i, j)];
                }
                forward(&mut table, &self.basis);
                for (mask, c) in table.iter_mut().enumerate() {
                    if !keep(mask as u64) {
                        *c = 0.0;
                    }
                }
                inverse(&mut table, &self.basis);
                for (t, v) in table.iter().zip(out.values.iter_mut()) {
                    v[(i, j)] = *t;
                    v[(j, i)] = *t;
                }
            }
        }
        out
    }

    /// Entrywise degree-≤D projection.
    pub fn low_degree(&self, big_d: usize) -> Self {
        self.filter_coefficients(|m| m.count_ones() as usize <= big_d)
    }

    /// Largest pointwise PSD violation `max_I max(0, −λ_min(P(I)))`.
    pub fn psd_violation(&self) -> f64 {
        self.values
            .iter()
            .map(|v| {
                let ev = nalgebra::SymmetricEigen::new(v.clone()).eigenvalues;
                (-ev.min()).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// The degree-≤d monomial vector `x^{≤d}` indexed by tuples of distinct vertices.
pub fn monomials(x: &Solution, index: &TupleIndex) -> Vec<f64> {
    (0..index.len())
        .map(|r| index.tuple(r).iter().map(|&i| x.x[i as usize]).product())
        .collect()
}

/// One possible subset S with its probability under Θ.
#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub weight: f64,
    pub coord_mask: u64,
    /// Visible vertices (all vertices for coordinate and constraint schemes).
    pub vertex_mask: u64,
}

/// All S with nonzero probability under Θ.
pub fn enumerate_restrictions(model: &PlantedModel, scheme: &SubsampleScheme) -> Result<Vec<Restriction>> {
    let is = model.scheme();
    scheme.check_compatible(&is)?;
    let n_coords = boolean_probs(model)?.len();
    let layout = is.layout();
    let n = is.n();
    let all_vertices = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let bern = |k: u32, total: usize| {
        scheme.rho.powi(k as i32) * (1.0 - scheme.rho).powi(total as i32 - k as i32)
    };
    let mut out = Vec::new();
    match scheme.kind {
        SchemeKind::VertexBernoulli | SchemeKind::RowColumnBernoulli => {
            for u in 0..1u64 << n {
                let coord_mask = (0..n_coords)
                    .filter(|&c| layout.coord_vertices(c).iter().all(|&v| u >> v & 1 == 1))
                    .fold(0u64, |m, c| m | 1 << c);
                out.push(Restriction {
                    weight: bern(u.count_ones(), n),
                    coord_mask,
                    vertex_mask: u,
                });
            }
        }
        SchemeKind::CoordinateBernoulli => {
            for s in 0..1u64 << n_coords {
                out.push(Restriction {
                    weight: bern(s.count_ones(), n_coords),
                    coord_mask: s,
                    vertex_mask: all_vertices,
                });
            }
        }
        SchemeKind::ConstraintBernoulli => {
            let (units, f) = (is.units(), is.fields());
            for s in 0..1u64 << units {
                let coord_mask = (0..n_coords)
                    .filter(|&c| s >> (c / f) & 1 == 1)
                    .fold(0u64, |m, c| m | 1 << c);
                out.push(Restriction {
                    weight: bern(s.count_ones(), units),
                    coord_mask,
                    vertex_mask: all_vertices,
                });
            }
        }
    }
    out.retain(|r| r.weight > 0.0);
    Ok(out)
}

/// The sub-instance exposing only the coordinates of `r` (others set to 0).
pub fn restrict(inst: &Instance, r: &Restriction) -> Instance {
    let coords = inst
        .coords
        .iter()
        .enumerate()
        .map(|(c, &x)| if r.coord_mask >> c & 1 == 1 { x } else { 0.0 })
        .collect();
    Instance {
        scheme: inst.scheme.clone(),
        coords,
    }
}

/// Maximum clique among visible vertices using exposed edges (`coord > 0`).
/// Ties go to the lexicographically smallest vertex list.
pub fn max_clique_solver(sub: &Instance, r: &Restriction) -> Solution {
    let n = sub.n();
    let adjacent = |i: usize, j: usize| {
        let e = crate::combin::colex_rank(&[i.min(j) as u32, i.max(j) as u32]);
        sub.coords[e] > 0.0
    };
    let mut best: Vec<usize> = Vec::new();
    for set in 1u64..1 << n {
        if set & !r.vertex_mask != 0 || (set.count_ones() as usize) < best.len() {
            continue;
        }
        let vs: Vec<usize> = (0..n).filter(|&i| set >> i & 1 == 1).collect();
        let clique = vs
            .iter()
            .enumerate()
            .all(|(a, &i)| vs[a + 1..].iter().all(|&j| adjacent(i, j)));
        if clique && (vs.len() > best.len() || vs < best) {
            best = vs;
        }
    }
    let mut x = vec![0.0; n];
    for i in best {
        x[i] = 1.0;
    }
    Solution { x }
}

/// Assignment in `{±1}^n` satisfying the most exposed present constraints.
/// Assignments are scanned with `x_i = −1` on the set bits of a counter, so
/// ties go to the first in that order.
pub fn max_csp_solver(model: &PlantedModel, sub: &Instance) -> Solution {
    let n = sub.n();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for bits in 0u64..1 << n {
        let x: Vec<f64> = (0..n).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let sol = Solution { x };
        let (_, sat) = evaluate_solution(model, sub, &sol);
        if sat > best.0 {
            best = (sat, sol.x);
        }
    }
    Solution { x: best.1 }
}

/// One term `w_S Λ_S` of the subsample average.
#[derive(Clone, Debug)]
pub struct RestrictedPiece {
    pub restriction: Restriction,
    /// `Λ_S` without the weight `w_S`.
    pub piece: MatrixValuedFn,
}

#[derive(Clone, Debug)]
pub struct LambdaBuild {
    pub index: TupleIndex,
    pub lambda: MatrixValuedFn,
    pub pieces: Vec<RestrictedPiece>,
}

/// `Λ = E_S Λ_S` with `Λ_S(I) = E_{I'}[μ̂(I_S ∘ I'_S̄)] · x(I_S)^{≤d} (x(I_S)^{≤d})ᵀ`.
pub fn build_lambda_exact<F>(
    model: &PlantedModel,
    scheme: &SubsampleScheme,
    solver: F,
    d: usize,
) -> Result<LambdaBuild>
where
    F: Fn(&Instance, &Restriction) -> Solution,
{
    boolean_probs(model)?;
    let index = TupleIndex::new(model.n(), d)?;
    let dim = index.len();
    let basis = ProductBasis::from_law(&model.law());
    let mut density_hat = density_deviation_table(model)?;
    density_hat.iter_mut().for_each(|x| *x += 1.0);
    forward(&mut density_hat, &basis);

    let scheme_is = model.scheme();
    let mut lambda = MatrixValuedFn::zeros(model, dim)?;
    let mut pieces = Vec::new();
    for r in enumerate_restrictions(model, scheme)? {
        // marginal density of the exposed coordinates
        let mut marginal: Vec<f64> = density_hat
            .iter()
            .enumerate()
            .map(|(a, &c)| if a as u64 & !r.coord_mask == 0 { c } else { 0.0 })
            .collect();
        inverse(&mut marginal, &basis);
        let mut piece = MatrixValuedFn::zeros(model, dim)?;
        for (mask, v) in piece.values.iter_mut().enumerate() {
            let inst = Instance::from_mask(scheme_is.clone(), mask as u64);
            let x = solver(&restrict(&inst, &r), &r);
            let xv = nalgebra::DVector::from_vec(monomials(&x, &index));
            *v = &xv * xv.transpose() * marginal[mask];
        }
        lambda = lambda.axpy(r.weight, &piece);
        pieces.push(RestrictedPiece { restriction: r, piece });
    }
    Ok(LambdaBuild {
        index,
        lambda,
        pieces,
    })
}

/// One row of a solver trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub primal_residual: f64,
    pub psd_residual: f64,
}

#[derive(Clone, Debug)]
pub struct PrimalSolution {
    pub p: MatrixValuedFn,
    pub opt: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub psd_residual: f64,
    pub trace: Vec<TraceRow>,
}

pub const DYKSTRA_MAX_ITER: usize = 100_000;
pub const DYKSTRA_TOL: f64 = 1e-8;

fn trace_due(k: usize) -> bool {
    k < 1000 || k % 100 == 0
}

/// Program 3.1: `min ‖P‖²_ν` subject to `P^{≤D} = Λ^{≤D}` and `P(I) ⪰ 0`
/// for every I, by Dykstra's alternating projections started at 0.
pub fn solve_pseudodistribution_program(lambda: &MatrixValuedFn, big_d: usize) -> Result<PrimalSolution> {
    solve_pseudodistribution_program_with(lambda, big_d, DYKSTRA_MAX_ITER, DYKSTRA_TOL)
}

pub fn solve_pseudodistribution_program_with(
    lambda: &MatrixValuedFn,
    big_d: usize,
    max_iter: usize,
    tol: f64,
) -> Result<PrimalSolution> {
    let target = lambda.low_degree(big_d);
    let scale = target.norm().max(1.0);
    let project_affine = |x: &MatrixValuedFn| x.axpy(-1.0, &x.low_degree(big_d)).axpy(1.0, &target);
    let zero = lambda.scale(0.0);
    let (mut x, mut p_corr, mut q_corr) = (zero.clone(), zero.clone(), zero);
    let mut trace = Vec::new();
    for k in 0..max_iter {
        let y = project_affine(&x.axpy(1.0, &p_corr));
        p_corr = x.axpy(1.0, &p_corr).axpy(-1.0, &y);
        let yq = y.axpy(1.0, &q_corr);
        let x_new = yq.psd_part();
        q_corr = yq.axpy(-1.0, &x_new);
        let primal_residual = x_new.low_degree(big_d).axpy(-1.0, &target).norm() / scale;
        let psd_residual = y.axpy(-1.0, &y.psd_part()).norm() / scale;
        let step = x_new.axpy(-1.0, &x).norm() / scale;
        x = x_new;
        if trace_due(k) {
            trace.push(TraceRow {
                iteration: k,
                primal_residual,
                psd_residual,
            });
        }
        if primal_residual <= tol && psd_residual <= tol && step <= tol {
            if !trace_due(k) {
                trace.push(TraceRow {
                    iteration: k,
                    primal_residual,
                    psd_residual,
                });
            }
            return Ok(PrimalSolution {
                opt: x.norm_sq(),
                p: x,
                iterations: k + 1,
                primal_residual,
                psd_residual,
                trace,
            });
        }
    }
    Err(Error::NonConvergence {
        solver: "dykstra".into(),
        iterations: max_iter,
        residuals: trace.last().map(|r| vec![r.primal_residual, r.psd_residual]).unwrap_or_default(),
    })
}

#[derive(Clone, Debug)]
pub struct DualSolution {
    /// Feasible distinguisher with `‖Q₊‖_ν = 1` (or `Q = 0`).
    pub q: MatrixValuedFn,
    pub value: f64,
    /// Maximum of the penalized dual `⟨Y,Λ⟩ − ¼‖Y₊‖²`.
    pub penalized_value: f64,
    pub iterations: usize,
    /// `‖Λ^{≤D} − ½(Y₊)^{≤D}‖_ν / max(1, ‖Λ^{≤D}‖_ν)` at the returned iterate.
    pub kkt_residual: f64,
    pub lipschitz: f64,
}

pub const ASCENT_MAX_ITER: usize = 100_000;
pub const ASCENT_TOL: f64 = 1e-8;

/// Power iteration for the Lipschitz constant of `Y ↦ ½ (Y)^{≤D}`.
fn lipschitz_estimate(lambda: &MatrixValuedFn, big_d: usize, seed: u64) -> f64 {
    let mut rng = Rng::seed_from_u64(seed);
    let mut y = random_like(lambda, &mut rng).low_degree(big_d);
    let mut est = 0.0;
    for _ in 0..20 {
        let norm = y.norm();
        if norm == 0.0 {
            return 0.5;
        }
        y = y.scale(1.0 / norm);
        let z = y.low_degree(big_d).scale(0.5);
        est = z.inner(&y);
        y = z;
    }
    est.max(f64::EPSILON)
}

fn random_like(f: &MatrixValuedFn, rng: &mut Rng) -> MatrixValuedFn {
    let mut out = f.scale(0.0);
    for v in out.values.iter_mut() {
        for i in 0..f.dim {
            for j in i..f.dim {
                let g: f64 = StandardNormal.sample(rng);
                v[(i, j)] = g;
                v[(j, i)] = g;
            }
        }
    }
    out
}

/// Program 3.2: a degree-≤D `Q` with `‖Q₊‖_ν ≤ 1` and large `⟨Λ, Q⟩_ν`.
///
/// Maximizes the concave penalized dual `g(Y) = ⟨Y,Λ⟩ − ¼‖Y₊‖²` over
/// degree-≤D `Y` by accelerated gradient ascent with adaptive restart, then
/// returns `Q = Y/‖Y₊‖`. At the maximizer `⟨Q,Λ⟩ = √(max g)`.
/// `init_seed` starts from a random point instead of 0.
pub fn solve_low_degree_distinguisher(
    lambda: &MatrixValuedFn,
    big_d: usize,
    init_seed: Option<u64>,
) -> Result<DualSolution> {
    let target = lambda.low_degree(big_d);
    let scale = target.norm().max(1.0);
    let lipschitz = lipschitz_estimate(lambda, big_d, 0x5eed);
    let step = 1.0 / lipschitz;
    let g = |y: &MatrixValuedFn| y.inner(lambda) - 0.25 * y.psd_part().norm_sq();
    let grad = |y: &MatrixValuedFn| target.axpy(-0.5, &y.psd_part().low_degree(big_d));

    let mut y = match init_seed {
        Some(s) => random_like(lambda, &mut Rng::seed_from_u64(s)).low_degree(big_d),
        None => lambda.scale(0.0),
    };
    let mut z = y.clone();
    let mut t = 1.0f64;
    let mut g_prev = g(&y);
    let mut residual = f64::INFINITY;
    for k in 0..ASCENT_MAX_ITER {
        let gz = grad(&z);
        let y_next = z.axpy(step, &gz);
        let g_next = g(&y_next);
        if g_next < g_prev && t > 1.0 {
            // restart momentum
            z = y.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = y_next.axpy((t - 1.0) / t_next, &y_next.axpy(-1.0, &y));
        y = y_next;
        t = t_next;
        g_prev = g_next;
        residual = grad(&y).norm() / scale;
        if residual <= ASCENT_TOL {
            let pos = y.psd_part().norm();
            let q = if pos > 0.0 { y.scale(1.0 / pos) } else { y.scale(0.0) };
            return Ok(DualSolution {
                value: q.inner(lambda),
                q,
                penalized_value: g_prev,
                iterations: k + 1,
                kkt_residual: residual,
                lipschitz,
            });
        }
    }
    Err(Error::NonConvergence {
        solver: "accelerated-ascent".into(),
        iterations: ASCENT_MAX_ITER,
        residuals: vec![residual],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub primal_opt: f64,
    pub dual_value: f64,
    /// `‖Q₊‖_ν`.
    pub dual_psd_norm: f64,
    /// `dual_value / √primal_opt`.
    pub ratio: f64,
    pub primal_iterations: usize,
    pub dual_iterations: usize,
    pub primal_residual: f64,
    pub psd_residual: f64,
    pub kkt_residual: f64,
    /// `dual_value − √primal_opt`; weak duality makes this ≤ 0 up to solver tolerance.
    pub weak_duality_gap: f64,
}

impl DualityReport {
    pub fn new(primal: &PrimalSolution, dual: &DualSolution) -> Self {
        let root = primal.opt.sqrt();
        DualityReport {
            primal_opt: primal.opt,
            dual_value: dual.value,
            dual_psd_norm: dual.q.psd_part().norm(),
            ratio: if root > 0.0 { dual.value / root } else { f64::NAN },
            primal_iterations: primal.iterations,
            dual_iterations: dual.iterations,
            primal_residual: primal.primal_residual,
            psd_residual: primal.psd_residual,
            kkt_residual: dual.kkt_residual,
            weak_duality_gap: dual.value - root,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

pub const RATIO_FLOOR: f64 = 0.5;

/// `Pass` iff `dual_value ≥ ratio_floor·√primal_opt`; `Vacuous` when `primal_opt ≤ 1`.
pub fn verify_duality(primal_opt: f64, dual_value: f64, ratio_floor: f64) -> Verdict {
    if primal_opt <= 1.0 {
        Verdict::Vacuous
    } else if dual_value >= ratio_floor * primal_opt.sqrt() {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    /// `E_S ⟨P_S, R⟩_ν`.
    pub lhs: f64,
    /// `E_S ⟨P_S, R_S^{<D}⟩_ν`.
    pub low_degree_term: f64,
    pub rho: f64,
    /// `ρ^{1/2} (E_S ‖P_S‖²)^{1/2} ‖R‖_ν`.
    pub tail_bound: f64,
    /// `lhs − (low_degree_term − tail_bound)`.
    pub slack: f64,
}

/// Evaluates both sides of the random-restriction inequality exactly.
///
/// Each piece must depend only on the coordinates of its restriction.
pub fn random_restriction_check(
    pieces: &[RestrictedPiece],
    r: &MatrixValuedFn,
    model: &PlantedModel,
    scheme: &SubsampleScheme,
    big_d: usize,
) -> Result<RestrictionReport> {
    let rho_d = rho(big_d, scheme, model)?;
    let (mut lhs, mut low, mut p_sq) = (0.0, 0.0, 0.0);
    for piece in pieces {
        let w = piece.restriction.weight;
        let s = piece.restriction.coord_mask;
        let r_low = r.filter_coefficients(|a| a & !s == 0 && (a.count_ones() as usize) < big_d);
        lhs += w * piece.piece.inner(r);
        low += w * piece.piece.inner(&r_low);
        p_sq += w * piece.piece.norm_sq();
    }
    let tail_bound = rho_d.sqrt() * p_sq.sqrt() * r.norm();
    Ok(RestrictionReport {
        lhs,
        low_degree_term: low,
        rho: rho_d,
        tail_bound,
        slack: lhs - (low - tail_bound),
    })
}

/// A symmetric-Gaussian random matrix-valued function shaped like `like`.
pub fn random_matrix_fn(like: &MatrixValuedFn, seed: u64) -> MatrixValuedFn {
    random_like(like, &mut Rng::seed_from_u64(seed))
}

/// The planted-clique toy: `n = 4`, clique size 3, vertex subsampling.
pub fn clique_toy(rho_keep: f64, d: usize) -> Result<(PlantedModel, SubsampleScheme, LambdaBuild)> {
    let model = PlantedModel::clique(4, 3);
    let scheme = SubsampleScheme::vertex(rho_keep);
    let build = build_lambda_exact(&model, &scheme, max_clique_solver, d)?;
    Ok((model, scheme, build))
}

/// Full lab run: build Λ, solve both programs, and report.
pub fn run_duality_lab(
    model: &PlantedModel,
    scheme: &SubsampleScheme,
    d: usize,
    big_d: usize,
) -> Result<(LambdaBuild, PrimalSolution, DualSolution, DualityReport)> {
    run_duality_lab_with(model, scheme, d, big_d, DYKSTRA_MAX_ITER, DYKSTRA_TOL)
}

/// [`run_duality_lab`] with an explicit iteration cap and tolerance for the primal solver.
pub fn run_duality_lab_with(
    model: &PlantedModel,
    scheme: &SubsampleScheme,
    d: usize,
    big_d: usize,
    max_iter: usize,
    tol: f64,
) -> Result<(LambdaBuild, PrimalSolution, DualSolution, DualityReport)> {
    let build = match model {
        PlantedModel::Clique(_) => build_lambda_exact(model, scheme, max_clique_solver, d)?,
        PlantedModel::Csp(_) => {
            build_lambda_exact(model, scheme, |sub, _| max_csp_solver(model, sub), d)?
        }
        other => {
            return Err(Error::MethodUnavailable(format!(
                "no brute-force solver for {}",
                other.name()
            )))
        }
    };
    let primal = solve_pseudodistribution_program_with(&build.lambda, big_d, max_iter, tol)?;
    let dual = solve_low_degree_distinguisher(&build.lambda, big_d, None)?;
    let report = DualityReport::new(&primal, &dual);
    Ok((build, primal, dual, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_match_masks() {
        let w = nu_weights(&[0.3, 0.6]);
        // mask bit 0 set = coordinate 0 is −1
        assert!((w[0] - 0.3 * 0.6).abs() < 1e-15);
        assert!((w[1] - 0.7 * 0.6).abs() < 1e-15);
        assert!((w[2] - 0.3 * 0.4).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clique_solver_ties() {
        let m = PlantedModel::clique(4, 3);
        let all = Restriction { weight: 1.0, coord_mask: 63, vertex_mask: 15 };
        let empty = Instance::from_mask(m.scheme(), 63);
        assert_eq!(max_clique_solver(&empty, &all).x, vec![1.0, 0.0, 0.0, 0.0]);
        let full = Instance::from_mask(m.scheme(), 0);
        assert_eq!(max_clique_solver(&full, &all).x, vec![1.0; 4]);
        let none = Restriction { weight: 1.0, coord_mask: 0, vertex_mask: 0 };
        assert_eq!(max_clique_solver(&full, &none).x, vec![0.0; 4]);
    }

    #[test]
    fn verdicts() {
        assert_eq!(verify_duality(0.9, 0.0, 0.5), Verdict::Vacuous);
        assert_eq!(verify_duality(4.0, 2.0, 0.5), Verdict::Pass);
        assert_eq!(verify_duality(4.0, 0.9, 0.5), Verdict::Fail);
    }

    #[test]
    fn zero_lambda() {
        let m = PlantedModel::clique(4, 3);
        let z = MatrixValuedFn::zeros(&m, 3).unwrap();
        let p = solve_pseudodistribution_program(&z, 2).unwrap();
        assert_eq!(p.opt, 0.0);
        let q = solve_low_degree_distinguisher(&z, 2, None).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn constant_identity_closed_form() {
        let m = PlantedModel::clique(4, 3);
        let c = 1.7;
        let lam = MatrixValuedFn::from_fn(&m, 3, |_| DMatrix::identity(3, 3) * c).unwrap();
        let p = solve_pseudodistribution_program(&lam, 0).unwrap();
        assert!((p.opt - c * c * 3.0).abs() < 1e-7);
        let q = solve_low_degree_distinguisher(&lam, 0, None).unwrap();
        assert!((q.value - c * 3f64.sqrt()).abs() < 1e-7, "{}", q.value);
    }
}
