//! Moment matrices of uniform solution distributions, their smallest nonzero
//! eigenvalues, and the sign-rounding map from Gaussian to Boolean instances.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::combin::falling;
use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues;
use crate::models::{sample_uniform, Instance, PlantedModel};
use crate::pseudocal::PseudoCalibration;
use crate::rng::{chunked_reduce, trial_rng};
use crate::stats::{linear_fit, Moments};

/// Largest monomial basis accepted.
pub const MAX_MONOMIALS: usize = 5000;

/// Default relative rank tolerance.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolutionDistribution {
    /// Uniform on `{±1}^n`.
    Hypercube { n: usize },
    /// Uniform on the unit sphere in `ℝ^n`.
    Sphere { n: usize },
    /// Uniform on `{x ∈ {0,1}^n : Σx = k}`.
    BooleanSlice { n: usize, k: usize },
    /// Uniform on `{x ∈ {0,±1}^n : exactly k nonzeros}`.
    SignedSlice { n: usize, k: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistKind {
    Hypercube,
    Sphere,
    BooleanSlice,
    SignedSlice,
}

impl std::str::FromStr for DistKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hypercube" => Ok(DistKind::Hypercube),
            "sphere" => Ok(DistKind::Sphere),
            "boolean-slice" => Ok(DistKind::BooleanSlice),
            "signed-slice" => Ok(DistKind::SignedSlice),
            other => Err(Error::InvalidArgument(format!("unknown distribution `{other}`"))),
        }
    }
}

impl DistKind {
    /// The distribution at size n; slices use `k = ⌊n/2⌋`.
    pub fn at(self, n: usize) -> SolutionDistribution {
        match self {
            DistKind::Hypercube => SolutionDistribution::Hypercube { n },
            DistKind::Sphere => SolutionDistribution::Sphere { n },
            DistKind::BooleanSlice => SolutionDistribution::BooleanSlice { n, k: n / 2 },
            DistKind::SignedSlice => SolutionDistribution::SignedSlice { n, k: n / 2 },
        }
    }
}

impl SolutionDistribution {
    pub fn n(&self) -> usize {
        match *self {
            SolutionDistribution::Hypercube { n }
            | SolutionDistribution::Sphere { n }
            | SolutionDistribution::BooleanSlice { n, .. }
            | SolutionDistribution::SignedSlice { n, .. } => n,
        }
    }

    pub fn kind(&self) -> DistKind {
        match self {
            SolutionDistribution::Hypercube { .. } => DistKind::Hypercube,
            SolutionDistribution::Sphere { .. } => DistKind::Sphere,
            SolutionDistribution::BooleanSlice { .. } => DistKind::BooleanSlice,
            SolutionDistribution::SignedSlice { .. } => DistKind::SignedSlice,
        }
    }

    pub fn k(&self) -> Option<usize> {
        match *self {
            SolutionDistribution::BooleanSlice { k, .. } | SolutionDistribution::SignedSlice { k, .. } => Some(k),
            _ => None,
        }
    }

    /// Largest per-variable exponent in the reduced monomial basis.
    pub fn max_exponent(&self, d: usize) -> u32 {
        match self {
            SolutionDistribution::Hypercube { .. } | SolutionDistribution::BooleanSlice { .. } => 1,
            SolutionDistribution::SignedSlice { .. } => 2,
            SolutionDistribution::Sphere { .. } => d as u32,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if let Some(k) = self.k() {
            if k > self.n() {
                return Err(Error::InvalidArgument(format!("slice k = {k} > n = {}", self.n())));
            }
            if 2 * d > k {
                return Err(Error::InvalidArgument(format!(
                    "slice moments need 2d <= k (d = {d}, k = {k})"
                )));
            }
        }
        Ok(())
    }

    /// `E[x^β]` for an exponent vector β.
    pub fn moment(&self, beta: &[u32]) -> f64 {
        let support = beta.iter().filter(|&&b| b > 0).count() as u64;
        match *self {
            SolutionDistribution::Hypercube { .. } => {
                if beta.iter().all(|b| b % 2 == 0) {
                    1.0
                } else {
                    0.0
                }
            }
            SolutionDistribution::BooleanSlice { n, k } => falling(k as u64, support) / falling(n as u64, support),
            SolutionDistribution::SignedSlice { n, k } => {
                if beta.iter().all(|b| b % 2 == 0) {
                    falling(k as u64, support) / falling(n as u64, support)
                } else {
                    0.0
                }
            }
            SolutionDistribution::Sphere { n } => {
                if beta.iter().any(|b| b % 2 == 1) {
                    return 0.0;
                }
                let total: u32 = beta.iter().sum();
                let num: f64 = beta.iter().map(|&b| double_factorial(b.saturating_sub(1))).product();
                let den: f64 = (0..total / 2).map(|j| (n + 2 * j as usize) as f64).product();
                num / den
            }
        }
    }
}

/// `m!! = m (m−2) (m−4) ⋯`, with `0!! = 1`.
pub fn double_factorial(m: u32) -> f64 {
    (1..=m).rev().step_by(2).map(f64::from).product::<f64>().max(1.0)
}

/// Exponent vectors of total degree ≤ d with entries ≤ `max_exp`, by degree then lexicographically (descending in the first variable).
pub fn monomial_basis(n: usize, d: usize, max_exp: u32) -> Result<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    for deg in 0..=d as u32 {
        let mut cur = vec![0u32; n];
        fill(&mut cur, 0, deg, max_exp, &mut out);
        if out.len() > MAX_MONOMIALS {
            return Err(Error::guard("monomial count", out.len() as f64, MAX_MONOMIALS as f64));
        }
    }
    Ok(out)
}

fn fill(cur: &mut [u32], i: usize, left: u32, max_exp: u32, out: &mut Vec<Vec<u32>>) {
    if left == 0 {
        out.push(cur.to_vec());
        return;
    }
    if i == cur.len() {
        return;
    }
    for e in (0..=left.min(max_exp)).rev() {
        cur[i] = e;
        fill(cur, i + 1, left - e, max_exp, out);
    }
    cur[i] = 0;
}

/// `X_𝒟[β, β'] = E[x^{β+β'}]` over the reduced monomial basis of degree ≤ d.
pub fn solution_moment_matrix(dist: &SolutionDistribution, d: usize) -> Result<DMatrix<f64>> {
    dist.validate(d)?;
    let basis = monomial_basis(dist.n(), d, dist.max_exponent(d))?;
    let m = basis.len();
    let mut x = DMatrix::zeros(m, m);
    let mut beta = vec![0u32; dist.n()];
    for i in 0..m {
        for j in i..m {
            for (b, (p, q)) in beta.iter_mut().zip(basis[i].iter().zip(&basis[j])) {
                *b = p + q;
            }
            let v = dist.moment(&beta);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonzeroSpectrum {
    pub min_nonzero: f64,
    pub lambda_max: f64,
    /// Eigenvalues at or below `rank_tol·λ_max` in absolute value.
    pub kernel_dim: usize,
    pub min_eig: f64,
}

/// Smallest eigenvalue above `rank_tol·λ_max`; smaller ones count as kernel.
pub fn min_nonzero_eigenvalue(x: &DMatrix<f64>, rank_tol: f64) -> Result<NonzeroSpectrum> {
    let ev = sym_eigenvalues(x)?;
    let lambda_max = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if lambda_max == 0.0 {
        return Err(Error::ZeroNorm("zero matrix has no nonzero eigenvalue".into()));
    }
    let cut = rank_tol * lambda_max;
    let kernel_dim = ev.iter().filter(|v| v.abs() <= cut).count();
    let min_nonzero = ev.iter().copied().find(|&v| v > cut).unwrap_or(f64::NAN);
    Ok(NonzeroSpectrum {
        min_nonzero,
        lambda_max,
        kernel_dim,
        min_eig: ev[0],
    })
}

/// Kernel dimension predicted by the solution set's defining identities,
/// where it is known in closed form.
pub fn expected_kernel_dim(dist: &SolutionDistribution, d: usize) -> Option<usize> {
    let n = dist.n() as u64;
    match dist {
        SolutionDistribution::Hypercube { .. } => Some(0),
        // multiples of (Σx − k) of degree ≤ d, reduced multilinearly
        SolutionDistribution::BooleanSlice { .. } => {
            Some((0..d as u64).map(|j| crate::combin::binom(n, j) as usize).sum())
        }
        // multiples of (Σx² − 1) of degree ≤ d
        SolutionDistribution::Sphere { .. } => {
            Some(if d < 2 { 0 } else { monomial_basis(dist.n(), d - 2, (d - 2) as u32).ok()?.len() })
        }
        SolutionDistribution::SignedSlice { .. } => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RichnessFit {
    pub kind: DistKind,
    pub d: usize,
    pub ns: Vec<usize>,
    pub lambda_min: Vec<f64>,
    pub kernel_dims: Vec<usize>,
    /// Fitted c in `λ_min ≈ C·n^{−c·d}`.
    pub exponent: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

/// Log-log regression of the smallest nonzero eigenvalue against n.
pub fn spectral_richness_fit(kind: DistKind, d: usize, n_grid: &[usize]) -> Result<RichnessFit> {
    let mut ns = n_grid.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 || d == 0 {
        return Err(Error::InvalidArgument(
            "the fit needs d >= 1 and at least 3 distinct sizes".into(),
        ));
    }
    let mut lambda_min = Vec::new();
    let mut kernel_dims = Vec::new();
    for &n in &ns {
        let x = solution_moment_matrix(&kind.at(n), d)?;
        let s = min_nonzero_eigenvalue(&x, RANK_TOL)?;
        lambda_min.push(s.min_nonzero);
        kernel_dims.push(s.kernel_dim);
    }
    let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = lambda_min.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&lx, &ly).ok_or_else(|| Error::InvalidArgument("degenerate grid".into()))?;
    Ok(RichnessFit {
        kind,
        d,
        ns,
        lambda_min,
        kernel_dims,
        exponent: -fit.slope / d as f64 + 0.0,
        r_squared: fit.r_squared,
        residuals: fit.residuals,
    })
}

/// Entrywise sign with `sign(0) = +1`.
pub fn sign_round(t: &Instance) -> Instance {
    Instance {
        scheme: t.scheme.clone(),
        coords: t.coords.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect(),
    }
}

/// `E|g|` for a standard Gaussian.
pub fn sign_factor() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt()
}

/// Monte Carlo mean and standard error of `sign(g)·g` over `samples` standard normals.
pub fn sign_factor_mc(samples: u64, seed: u64) -> (f64, f64) {
    let m = chunked_reduce(
        samples,
        1 << 16,
        Moments::new,
        |acc, t| {
            let g: f64 = StandardNormal.sample(&mut trial_rng(seed, t));
            acc.push(if g < 0.0 { -g } else { g });
        },
        |acc, part| acc.merge(&part),
    );
    (m.mean, m.stderr())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub samples: u64,
    /// Samples whose Boolean witness was certified (PSD with positive `Λ_{∅,∅}`).
    pub certified: u64,
    /// Mean of `Σ_α T_α p̃E_{A(T)}[x^α]`.
    pub gaussian_objective: f64,
    /// Mean of `√(2/π) Σ_α A(T)_α p̃E_{A(T)}[x^α]`.
    pub scaled_boolean_objective: f64,
    /// Mean and standard error of their per-sample difference.
    pub diff_mean: f64,
    pub diff_stderr: f64,
}

/// Applies the Boolean pseudo-calibrated witness of `A = sign_round(T)` to
/// Gaussian null instances T and compares the Gaussian objective with the
/// rescaled Boolean one. The Boolean model uses the signal `λ·√(2/π)` that the
/// sign channel leaves on each entry to first order.
pub fn sign_round_transfer(
    gaussian: &PlantedModel,
    d: usize,
    big_d: usize,
    samples: u64,
    seed: u64,
    psd_tol: f64,
) -> Result<TransferReport> {
    let boolean = match gaussian {
        PlantedModel::Tpca(p) if p.gaussian => {
            PlantedModel::tpca(p.n, p.k, p.lambda * sign_factor(), p.eps_noise)
        }
        _ => {
            return Err(Error::MethodUnavailable(
                "sign rounding transfer expects a Gaussian tpca model".into(),
            ))
        }
    };
    let pc = PseudoCalibration::new(&boolean, d, big_d)?;
    let (mut gauss, mut bool_scaled, mut diff) = (Moments::new(), Moments::new(), Moments::new());
    for t in 0..samples {
        let tensor = sample_uniform(gaussian, &mut trial_rng(seed, t));
        let a = sign_round(&tensor);
        let Some(value) = pc.check(&a, psd_tol)?.certified_value else {
            continue;
        };
        let (moments, l00) = pc.coordinate_moments(&a)?;
        let g: f64 = tensor.coords.iter().zip(&moments).map(|(x, m)| x * m).sum::<f64>() / l00;
        let b = sign_factor() * value;
        gauss.push(g);
        bool_scaled.push(b);
        diff.push(g - b);
    }
    Ok(TransferReport {
        samples,
        certified: gauss.count,
        gaussian_objective: gauss.mean,
        scaled_boolean_objective: bool_scaled.mean,
        diff_mean: diff.mean,
        diff_stderr: diff.stderr(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(0), 1.0);
        assert_eq!(double_factorial(1), 1.0);
        assert_eq!(double_factorial(3), 3.0);
        assert_eq!(double_factorial(5), 15.0);
    }

    #[test]
    fn small_matrices() {
        let x = solution_moment_matrix(&SolutionDistribution::Hypercube { n: 3 }, 1).unwrap();
        assert_eq!(x, DMatrix::identity(4, 4));
        let s = solution_moment_matrix(&SolutionDistribution::Sphere { n: 2 }, 1).unwrap();
        assert_eq!(s, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, 0.5])));
        let s4 = SolutionDistribution::Sphere { n: 3 };
        assert!((s4.moment(&[4, 0, 0]) - 3.0 / 15.0).abs() < 1e-15);
        assert!((s4.moment(&[2, 2, 0]) - 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn nonzero_spectrum_semantics() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert_eq!(min_nonzero_eigenvalue(&i, RANK_TOL).unwrap().min_nonzero, 1.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e-30, 0.0]));
        let s = min_nonzero_eigenvalue(&d, RANK_TOL).unwrap();
        assert_eq!((s.min_nonzero, s.kernel_dim), (1.0, 2));
        assert!(min_nonzero_eigenvalue(&DMatrix::zeros(2, 2), RANK_TOL).is_err());
    }

    #[test]
    fn slice_needs_room() {
        assert!(solution_moment_matrix(&SolutionDistribution::BooleanSlice { n: 6, k: 3 }, 2).is_err());
    }

    #[test]
    fn sign_round_basics() {
        let m = PlantedModel::tpca_gaussian(5, 3, 1.0, 0.0);
        let t = sample_uniform(&m, &mut trial_rng(0, 0));
        let a = sign_round(&t);
        assert!(a.is_boolean());
        assert_eq!(sign_round(&a), a);
        let pos = Instance { scheme: t.scheme.clone(), coords: vec![0.3; t.len()] };
        assert!(sign_round(&pos).coords.iter().all(|&x| x == 1.0));
    }
}
