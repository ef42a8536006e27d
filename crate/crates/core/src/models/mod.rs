//! The six planted/uniform distribution pairs.
//!
//! Throughout, `ν` is the null product law and `μ` the planted law; the
//! relative density is `μ̂ = μ/ν`. Boolean coordinates are encoded as ±1 with
//! "edge present" (or "constraint present") mapped to +1.

mod density;
mod io;
mod sample;
mod scheme;

pub(crate) use density::check_enumerable;
pub use density::{density_deviation_table, enumerate_instances, relative_density, InstanceIter};
pub use io::{read_instances_csv, write_instances_binary, write_instances_csv, InstanceHeader};
pub use sample::{resample_outside, sample_planted, sample_uniform};
pub use scheme::{IndexScheme, Layout};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the instance space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub scheme: IndexScheme,
    pub coords: Vec<f64>,
}

impl Instance {
    pub fn new(scheme: IndexScheme, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != scheme.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates supplied for scheme {} of size {}",
                coords.len(),
                scheme.label(),
                scheme.len()
            )));
        }
        Ok(Instance { scheme, coords })
    }

    pub fn n(&self) -> usize {
        self.scheme.n()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_boolean(&self) -> bool {
        self.coords.iter().all(|&x| x == 1.0 || x == -1.0)
    }

    /// Boolean instance from an enumeration mask: bit `i` set means coordinate `i` is −1.
    pub fn from_mask(scheme: IndexScheme, mask: u64) -> Self {
        let coords = (0..scheme.len())
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        Instance { scheme, coords }
    }

    /// Inverse of [`Instance::from_mask`]; requires a Boolean instance with N ≤ 64.
    pub fn to_mask(&self) -> u64 {
        self.coords
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &x)| if x < 0.0 { m | 1 << i } else { m })
    }
}

/// The hidden structure returned alongside a planted sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliqueParams {
    pub n: usize,
    pub size: usize,
}

/// Random k-CSP. Each k-subset slot carries a constraint with probability
/// `alpha * n / C(n, k)`, so the expected constraint count is `alpha * n`.
/// The predicate table is indexed by the bitmask of inputs equal to −1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CspParams {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    pub predicate: Vec<i8>,
}

/// Two-community block model: edge probability `a/n` inside a community and
/// `b/n` across; the null is G(n, (a+b)/(2n)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

/// Densest-k-subgraph: background density `p`, planted k-set density `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DksParams {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpcaParams {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub eps_noise: f64,
    #[serde(default)]
    pub gaussian: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpcaParams {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub gamma: f64,
    #[serde(default)]
    pub gaussian: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "lowercase")]
pub enum PlantedModel {
    Clique(CliqueParams),
    Csp(CspParams),
    Sbm(SbmParams),
    Dks(DksParams),
    Tpca(TpcaParams),
    Spca(SpcaParams),
}

/// Per-coordinate null law.
#[derive(Clone, Debug, PartialEq)]
pub enum CoordLaw {
    /// Probability of +1 for each coordinate.
    Boolean(Vec<f64>),
    Gaussian(usize),
}

impl CoordLaw {
    pub fn len(&self) -> usize {
        match self {
            CoordLaw::Boolean(p) => p.len(),
            CoordLaw::Gaussian(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, CoordLaw::Boolean(p) if p.iter().all(|&q| q == 0.5))
    }
}

/// k-XOR predicate table.
pub fn xor_predicate(k: usize) -> Vec<i8> {
    (0..1usize << k)
        .map(|m| if m.count_ones() % 2 == 0 { 1 } else { -1 })
        .collect()
}

impl PlantedModel {
    pub fn clique(n: usize, size: usize) -> Self {
        PlantedModel::Clique(CliqueParams { n, size })
    }

    pub fn csp_xor(n: usize, k: usize, alpha: f64, delta: f64) -> Self {
        PlantedModel::Csp(CspParams {
            n,
            k,
            alpha,
            delta,
            predicate: xor_predicate(k),
        })
    }

    pub fn sbm(n: usize, a: f64, b: f64) -> Self {
        PlantedModel::Sbm(SbmParams { n, a, b })
    }

    pub fn dks(n: usize, k: usize, p: f64, q: f64) -> Self {
        PlantedModel::Dks(DksParams { n, k, p, q })
    }

    pub fn tpca(n: usize, k: usize, lambda: f64, eps_noise: f64) -> Self {
        PlantedModel::Tpca(TpcaParams {
            n,
            k,
            lambda,
            eps_noise,
            gaussian: false,
        })
    }

    pub fn tpca_gaussian(n: usize, k: usize, lambda: f64, eps_noise: f64) -> Self {
        PlantedModel::Tpca(TpcaParams {
            n,
            k,
            lambda,
            eps_noise,
            gaussian: true,
        })
    }

    pub fn spca(n: usize, k: usize, lambda: f64, gamma: f64) -> Self {
        PlantedModel::Spca(SpcaParams {
            n,
            k,
            lambda,
            gamma,
            gaussian: false,
        })
    }

    pub fn spca_gaussian(n: usize, k: usize, lambda: f64, gamma: f64) -> Self {
        PlantedModel::Spca(SpcaParams {
            n,
            k,
            lambda,
            gamma,
            gaussian: true,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PlantedModel::Clique(_) => "clique",
            PlantedModel::Csp(_) => "csp",
            PlantedModel::Sbm(_) => "sbm",
            PlantedModel::Dks(_) => "dks",
            PlantedModel::Tpca(_) => "tpca",
            PlantedModel::Spca(_) => "spca",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            PlantedModel::Clique(p) => p.n,
            PlantedModel::Csp(p) => p.n,
            PlantedModel::Sbm(p) => p.n,
            PlantedModel::Dks(p) => p.n,
            PlantedModel::Tpca(p) => p.n,
            PlantedModel::Spca(p) => p.n,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(
            self,
            PlantedModel::Tpca(TpcaParams { gaussian: true, .. })
                | PlantedModel::Spca(SpcaParams { gaussian: true, .. })
        )
    }

    pub fn scheme(&self) -> IndexScheme {
        match self {
            PlantedModel::Clique(p) => IndexScheme::GraphEdges { n: p.n },
            PlantedModel::Csp(p) => IndexScheme::CspSlots { n: p.n, k: p.k },
            PlantedModel::Sbm(p) => IndexScheme::GraphEdges { n: p.n },
            PlantedModel::Dks(p) => IndexScheme::GraphEdges { n: p.n },
            PlantedModel::Tpca(p) => IndexScheme::KSubsets { n: p.n, k: p.k },
            PlantedModel::Spca(p) => IndexScheme::SymmetricMatrix { n: p.n },
        }
    }

    /// Coordinate count N.
    pub fn num_coords(&self) -> usize {
        self.scheme().len()
    }

    /// Per-coordinate signal bias `λ n^{-k/2}` of tensor PCA.
    pub fn tpca_eta(p: &TpcaParams) -> f64 {
        p.lambda * (p.n as f64).powf(-(p.k as f64) / 2.0)
    }

    /// Vertex survival probability `n^{-ε}` (tpca) or `n^{-γ}` (spca).
    pub fn survival(&self) -> f64 {
        match self {
            PlantedModel::Tpca(p) => (p.n as f64).powf(-p.eps_noise),
            PlantedModel::Spca(p) => (p.n as f64).powf(-p.gamma),
            _ => 1.0,
        }
    }

    /// Constraint presence probability of the CSP model.
    pub fn csp_presence(p: &CspParams) -> f64 {
        p.alpha * p.n as f64 / crate::combin::binom_f64(p.n as u64, p.k as u64)
    }

    /// The null law ν.
    pub fn law(&self) -> CoordLaw {
        let n_coords = self.num_coords();
        match self {
            PlantedModel::Tpca(p) if p.gaussian => CoordLaw::Gaussian(n_coords),
            PlantedModel::Spca(p) if p.gaussian => CoordLaw::Gaussian(n_coords),
            PlantedModel::Clique(_) | PlantedModel::Tpca(_) | PlantedModel::Spca(_) => {
                CoordLaw::Boolean(vec![0.5; n_coords])
            }
            PlantedModel::Sbm(p) => {
                CoordLaw::Boolean(vec![(p.a + p.b) / (2.0 * p.n as f64); n_coords])
            }
            PlantedModel::Dks(p) => CoordLaw::Boolean(vec![p.p; n_coords]),
            PlantedModel::Csp(p) => {
                let pres = Self::csp_presence(p);
                let mut probs = vec![0.5; n_coords];
                for slot in probs.chunks_mut(p.k + 2) {
                    slot[0] = pres;
                }
                CoordLaw::Boolean(probs)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let prob = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} = {v} must lie in (0, 1)")))
            }
        };
        match self {
            PlantedModel::Clique(p) => {
                if p.n < 2 || p.size > p.n {
                    return bad(format!("clique size {} on n = {}", p.size, p.n));
                }
            }
            PlantedModel::Csp(p) => {
                if p.k < 1 || p.k > p.n {
                    return bad(format!("csp arity {} on n = {}", p.k, p.n));
                }
                if p.predicate.len() != 1 << p.k || p.predicate.iter().any(|&b| b != 1 && b != -1)
                {
                    return bad("csp predicate must be a ±1 table of size 2^k".into());
                }
                if !(0.0..=1.0).contains(&p.delta) {
                    return bad(format!("csp noise delta = {}", p.delta));
                }
                prob("csp constraint probability", Self::csp_presence(p))?;
            }
            PlantedModel::Sbm(p) => {
                if p.n < 2 || p.n % 2 != 0 {
                    return bad(format!("sbm needs an even n >= 2, got {}", p.n));
                }
                prob("a/n", p.a / p.n as f64)?;
                prob("b/n", p.b / p.n as f64)?;
            }
            PlantedModel::Dks(p) => {
                if p.k < 2 || p.k > p.n {
                    return bad(format!("dks k = {} on n = {}", p.k, p.n));
                }
                prob("p", p.p)?;
                prob("q", p.q)?;
            }
            PlantedModel::Tpca(p) => {
                if p.k < 2 || p.k > p.n {
                    return bad(format!("tpca order k = {} on n = {}", p.k, p.n));
                }
                if !(p.lambda >= 0.0 && p.lambda.is_finite()) || !(p.eps_noise >= 0.0) {
                    return bad(format!(
                        "tpca needs lambda >= 0 and eps_noise >= 0, got {} and {}",
                        p.lambda, p.eps_noise
                    ));
                }
                if !p.gaussian && Self::tpca_eta(p) > 1.0 {
                    return bad(format!(
                        "lambda n^(-k/2) = {} exceeds 1",
                        Self::tpca_eta(p)
                    ));
                }
            }
            PlantedModel::Spca(p) => {
                if p.k == 0 || p.k > p.n || p.n < 2 {
                    return bad(format!("spca sparsity k = {} on n = {}", p.k, p.n));
                }
                if !(p.lambda >= 0.0) || p.lambda > p.k as f64 || !(p.gamma >= 0.0) {
                    return bad(format!(
                        "spca needs 0 <= lambda <= k and gamma >= 0, got lambda = {}",
                        p.lambda
                    ));
                }
            }
        }
        Ok(())
    }
}
