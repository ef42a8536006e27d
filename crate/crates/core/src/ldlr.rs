//! Low-degree likelihood ratio: analytic planted Fourier coefficients, the
//! truncated-density norm `‖μ̂^{≤d} − 1‖²_ν`, and the optimal degree-d scalar
//! distinguisher.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combin::{binom_f64, falling, KahanSum};
use crate::error::{Error, Result};
use crate::fourier::{forward, FourierPoly, ProductBasis, SupportSet};
use crate::hypergraph::{enumerate_low_odd, even_counts};
use crate::models::{
    density_deviation_table, sample_planted, Layout, PlantedModel, SpcaParams, TpcaParams,
};
use crate::rng::{chunked_reduce, stream_rng};
use crate::stats::Moments;

/// Largest hyperedge count handled by the analytic path.
pub const MAX_T_CAP: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    ExactEnum,
    Mc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::ExactEnum => "exact-enum",
            Method::Mc => "mc",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Method::Analytic),
            "exact-enum" => Ok(Method::ExactEnum),
            "mc" => Ok(Method::Mc),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdlrReport {
    pub model: PlantedModel,
    pub degree: usize,
    /// `‖μ̂^{≤d} − 1‖²_ν`.
    pub norm_sq: f64,
    /// Contribution of supports with exactly `t` coordinates.
    pub per_t: BTreeMap<usize, f64>,
    pub method: Method,
    /// Standard error of `norm_sq` for the Monte Carlo method.
    pub stderr: Option<f64>,
}

fn tpca_params(model: &PlantedModel) -> Result<&TpcaParams> {
    match model {
        PlantedModel::Tpca(p) => Ok(p),
        _ => Err(Error::MethodUnavailable(format!(
            "expected a tpca model, got {}",
            model.name()
        ))),
    }
}

fn spca_params(model: &PlantedModel) -> Result<&SpcaParams> {
    match model {
        PlantedModel::Spca(p) => Ok(p),
        _ => Err(Error::MethodUnavailable(format!(
            "expected an spca model, got {}",
            model.name()
        ))),
    }
}

fn degree_parity(w: &SupportSet, layout: &Layout) -> Result<(bool, usize)> {
    if let Some(&c) = w.coords().iter().find(|&&c| c as usize >= layout.len()) {
        return Err(Error::OutOfRange {
            index: c as usize,
            len: layout.len(),
        });
    }
    let degs = w.vertex_degrees(layout);
    Ok((degs.iter().all(|&(_, d)| d % 2 == 0), degs.len()))
}

/// Planted Fourier coefficient `E_μ[χ_W]` of tensor PCA:
/// `(λ n^{-k/2})^{|W|} (n^{-ε})^{|V(W)|}` when every vertex of W has even
/// degree, else 0.
pub fn tpca_coeff(w: &SupportSet, model: &PlantedModel) -> Result<f64> {
    let p = tpca_params(model)?;
    let layout = model.scheme().layout();
    let (even, nv) = degree_parity(w, &layout)?;
    if !even {
        return Ok(0.0);
    }
    let eta = PlantedModel::tpca_eta(p);
    Ok(eta.powi(w.len() as i32) * model.survival().powi(nv as i32))
}

/// Planted Fourier coefficient of sparse PCA for an edge set W:
/// `(λ/k)^{|W|} · Pr[V(W) ⊆ supp v] · (n^{-γ})^{|V(W)|}` when W is even.
pub fn spca_coeff(w: &SupportSet, model: &PlantedModel) -> Result<f64> {
    let p = spca_params(model)?;
    let layout = model.scheme().layout();
    let (even, nv) = degree_parity(w, &layout)?;
    if !even || nv > p.k {
        return Ok(0.0);
    }
    Ok(spca_weight(p, w.len(), nv, model.survival()))
}

fn spca_weight(p: &SpcaParams, t: usize, m: usize, s: f64) -> f64 {
    let inclusion = falling(p.k as u64, m as u64) / falling(p.n as u64, m as u64);
    (p.lambda / p.k as f64).powi(t as i32) * inclusion * s.powi(m as i32)
}

fn check_t_cap(t_cap: usize) -> Result<()> {
    if t_cap > MAX_T_CAP {
        return Err(Error::guard("t_cap", t_cap as f64, MAX_T_CAP as f64));
    }
    Ok(())
}

fn empty_report(model: &PlantedModel, d: usize, method: Method) -> LdlrReport {
    LdlrReport {
        model: model.clone(),
        degree: d,
        norm_sq: 0.0,
        per_t: BTreeMap::new(),
        method,
        stderr: None,
    }
}

fn finish(mut report: LdlrReport) -> LdlrReport {
    report.norm_sq = report.per_t.values().copied().collect::<KahanSum>().value();
    report
}

/// `Σ_{t ≤ min(d, t_cap)} Σ_m c(t,m) C(n,m) (η^t s^m)²` from exact even-hypergraph counts.
pub fn tpca_norm_analytic(model: &PlantedModel, d: usize, t_cap: usize) -> Result<LdlrReport> {
    let p = tpca_params(model)?;
    model.validate()?;
    check_t_cap(t_cap)?;
    let eta = PlantedModel::tpca_eta(p);
    let s = model.survival();
    let mut report = empty_report(model, d, Method::Analytic);
    for t in 1..=d.min(t_cap) {
        let counts = even_counts(p.k, t)?;
        let mut acc = KahanSum::new();
        for (m, &c) in counts.iter().enumerate() {
            if c > 0 && m <= p.n {
                let coeff = eta.powi(t as i32) * s.powi(m as i32);
                acc.add(c as f64 * binom_f64(p.n as u64, m as u64) * coeff * coeff);
            }
        }
        report.per_t.insert(t, acc.value());
    }
    Ok(finish(report))
}

/// Sparse PCA analogue of [`tpca_norm_analytic`] over even graphs.
pub fn spca_norm_analytic(model: &PlantedModel, d: usize, t_cap: usize) -> Result<LdlrReport> {
    let p = spca_params(model)?;
    model.validate()?;
    check_t_cap(t_cap)?;
    let s = model.survival();
    let mut report = empty_report(model, d, Method::Analytic);
    for t in 1..=d.min(t_cap) {
        let counts = even_counts(2, t)?;
        let mut acc = KahanSum::new();
        for (m, &c) in counts.iter().enumerate() {
            if c > 0 && m <= p.k {
                let coeff = spca_weight(p, t, m, s);
                acc.add(c as f64 * binom_f64(p.n as u64, m as u64) * coeff * coeff);
            }
        }
        report.per_t.insert(t, acc.value());
    }
    Ok(finish(report))
}

/// Full coefficient table of `μ̂ − 1`, indexed by support mask.
fn deviation_coefficients(model: &PlantedModel) -> Result<Vec<f64>> {
    let mut table = density_deviation_table(model)?;
    forward(&mut table, &ProductBasis::from_law(&model.law()));
    Ok(table)
}

fn exact_enum_report(model: &PlantedModel, d: usize) -> Result<LdlrReport> {
    let coeffs = deviation_coefficients(model)?;
    let mut sums: Vec<KahanSum> = vec![KahanSum::new(); d + 1];
    for (mask, &c) in coeffs.iter().enumerate() {
        let t = mask.count_ones() as usize;
        if (1..=d).contains(&t) {
            sums[t].add(c * c);
        }
    }
    let mut report = empty_report(model, d, Method::ExactEnum);
    for (t, s) in sums.iter().enumerate().skip(1) {
        report.per_t.insert(t, s.value());
    }
    Ok(finish(report))
}

/// Unbiased Monte Carlo estimate: for independent planted draws A, A′,
/// `E[Σ_{1≤|W|≤d} φ_W(A) φ_W(A′)] = Σ_W μ̂(W)²`, and the inner sum is a sum of
/// elementary symmetric polynomials of `φ(A) ⊙ φ(A′)`.
fn mc_report(model: &PlantedModel, d: usize, trials: u64, seed: u64) -> Result<LdlrReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    model.validate()?;
    let basis = ProductBasis::from_law(&model.law());
    let acc = chunked_reduce(
        trials,
        256,
        || vec![Moments::new(); d + 1],
        |acc, t| {
            let (a, _) = sample_planted(model, &mut stream_rng(seed, t, 1)).expect("validated");
            let (b, _) = sample_planted(model, &mut stream_rng(seed, t, 2)).expect("validated");
            let mut e = vec![0.0; d + 1];
            e[0] = 1.0;
            for (i, (x, y)) in a.coords.iter().zip(&b.coords).enumerate() {
                let z = basis.phi(i, *x) * basis.phi(i, *y);
                for j in (1..=d).rev() {
                    e[j] += z * e[j - 1];
                }
            }
            let total: f64 = e[1..].iter().sum();
            for j in 1..=d {
                acc[j].push(e[j]);
            }
            acc[0].push(total);
        },
        |a, b| a.iter_mut().zip(&b).for_each(|(x, y)| x.merge(y)),
    );
    let mut report = empty_report(model, d, Method::Mc);
    for (t, m) in acc.iter().enumerate().skip(1) {
        report.per_t.insert(t, m.mean);
    }
    let mut report = finish(report);
    report.stderr = Some(acc[0].stderr());
    Ok(report)
}

/// `‖μ̂^{≤d} − 1‖²_ν` by the requested method.
///
/// The analytic path covers Boolean tpca/spca up to `t_cap = 5` hyperedges;
/// exact enumeration covers any Boolean model with N ≤ 24; the Monte Carlo
/// path covers every model (for Gaussian models it measures the multilinear
/// Hermite part).
pub fn ldlr_advantage(
    model: &PlantedModel,
    d: usize,
    method: Method,
    trials: u64,
    seed: u64,
) -> Result<LdlrReport> {
    if d == 0 {
        return Ok(empty_report(model, 0, method));
    }
    match method {
        Method::Analytic => {
            if model.is_gaussian() {
                return Err(Error::MethodUnavailable(
                    "the analytic path covers Boolean tpca and spca".into(),
                ));
            }
            match model {
                PlantedModel::Tpca(_) => tpca_norm_analytic(model, d, d.min(MAX_T_CAP)),
                PlantedModel::Spca(_) => spca_norm_analytic(model, d, d.min(MAX_T_CAP)),
                _ => Err(Error::MethodUnavailable(format!(
                    "no analytic coefficients for {}",
                    model.name()
                ))),
            }
        }
        Method::ExactEnum => {
            if model.is_gaussian() {
                return Err(Error::MethodUnavailable(
                    "Gaussian models cannot be enumerated".into(),
                ));
            }
            exact_enum_report(model, d)
        }
        Method::Mc => mc_report(model, d, trials, seed),
    }
}

/// Even supports with `1..=d` coordinates and their analytic coefficients.
fn analytic_terms(model: &PlantedModel, d: usize) -> Result<FourierPoly> {
    let layout = model.scheme().layout();
    if !layout.has_masks() {
        return Err(Error::guard("vertex count for support enumeration", layout.n as f64, 64.0));
    }
    let sets = enumerate_low_odd(layout.unit_masks(), layout.arity, d, 0, |_| true)?;
    let mut poly = FourierPoly::new(d);
    for i in 0..sets.len() {
        let edges = sets.term(i);
        if edges.is_empty() {
            continue;
        }
        let w = SupportSet::from_sorted(edges.to_vec());
        let c = match model {
            PlantedModel::Tpca(_) => tpca_coeff(&w, model)?,
            _ => spca_coeff(&w, model)?,
        };
        poly.add(w, c)?;
    }
    Ok(poly)
}

/// `p = (μ̂^{≤d} − 1)/‖μ̂^{≤d} − 1‖_ν`, the degree-d polynomial maximizing
/// `E_μ p` subject to `E_ν p = 0`, `E_ν p² = 1`. Its planted mean equals
/// `‖μ̂^{≤d} − 1‖_ν`.
pub fn optimal_scalar_distinguisher(model: &PlantedModel, d: usize) -> Result<FourierPoly> {
    model.validate()?;
    let mut poly = match model {
        PlantedModel::Tpca(_) | PlantedModel::Spca(_) if !model.is_gaussian() => {
            analytic_terms(model, d)?
        }
        _ => {
            let coeffs = deviation_coefficients(model)?;
            let mut poly = FourierPoly::new(d);
            for (mask, &c) in coeffs.iter().enumerate() {
                let t = mask.count_ones() as usize;
                if c != 0.0 && (1..=d).contains(&t) {
                    poly.terms.insert(SupportSet::from_mask(mask as u64), c);
                }
            }
            poly
        }
    };
    let norm = poly.norm_sq().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm(format!(
            "the degree-{d} projection of the {} density is constant; no distinguisher exists",
            model.name()
        )));
    }
    poly.scale(1.0 / norm);
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w_of(model: &PlantedModel, edges: &[&[u32]]) -> SupportSet {
        let scheme = model.scheme();
        SupportSet::new(
            edges
                .iter()
                .map(|e| scheme.unit_index(e).unwrap() as u32)
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn tpca_coefficients() {
        let m = PlantedModel::tpca(6, 3, 2.0, 0.0);
        assert_eq!(tpca_coeff(&SupportSet::empty(), &m).unwrap(), 1.0);
        assert_eq!(tpca_coeff(&w_of(&m, &[&[0, 1, 2]]), &m).unwrap(), 0.0);
        let w = w_of(&m, &[&[0, 1, 2], &[0, 3, 4], &[1, 3, 5], &[2, 4, 5]]);
        let want = (2.0 * 6f64.powf(-1.5)).powi(4);
        assert!((tpca_coeff(&w, &m).unwrap() - want).abs() < 1e-18);
        assert!((want - 3.4294e-4).abs() < 1e-8);
    }

    #[test]
    fn spca_coefficients() {
        let m = PlantedModel::spca(6, 3, 1.5, 0.0);
        assert_eq!(spca_coeff(&SupportSet::empty(), &m).unwrap(), 1.0);
        assert_eq!(spca_coeff(&w_of(&m, &[&[0, 1]]), &m).unwrap(), 0.0);
        let tri = w_of(&m, &[&[0, 1], &[1, 2], &[0, 2]]);
        let want = (1.5f64 / 3.0).powi(3) / 20.0;
        assert!((spca_coeff(&tri, &m).unwrap() - want).abs() < 1e-16);
        let square = w_of(&m, &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]]);
        assert_eq!(spca_coeff(&square, &m).unwrap(), 0.0);
    }

    #[test]
    fn analytic_small_cases() {
        let m = PlantedModel::tpca(6, 3, 1.0, 0.0);
        assert_eq!(tpca_norm_analytic(&m, 0, 4).unwrap().norm_sq, 0.0);
        assert_eq!(tpca_norm_analytic(&m, 3, 4).unwrap().norm_sq, 0.0);
        assert!(tpca_norm_analytic(&m, 4, 6).is_err());
        let r = tpca_norm_analytic(&m, 4, 4).unwrap();
        assert!(r.per_t[&1] == 0.0 && r.per_t[&3] == 0.0);
        let c = even_counts(3, 4).unwrap();
        let total: f64 = (0..c.len())
            .map(|mm| c[mm] as f64 * binom_f64(6, mm as u64))
            .sum();
        assert!((r.norm_sq - total * 6f64.powi(-12)).abs() < 1e-12 * r.norm_sq);
    }

    #[test]
    fn zero_signal_has_no_distinguisher() {
        let m = PlantedModel::tpca(5, 3, 0.0, 0.0);
        for method in [Method::Analytic, Method::ExactEnum] {
            assert_eq!(ldlr_advantage(&m, 4, method, 0, 0).unwrap().norm_sq, 0.0);
        }
        assert!(matches!(optimal_scalar_distinguisher(&m, 4), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn distinguisher_is_normalized() {
        let m = PlantedModel::tpca(6, 3, 2.0, 0.0);
        let p = optimal_scalar_distinguisher(&m, 4).unwrap();
        assert!((p.norm_sq() - 1.0).abs() < 1e-10);
        let m = PlantedModel::clique(5, 3);
        let p = optimal_scalar_distinguisher(&m, 3).unwrap();
        assert!((p.norm_sq() - 1.0).abs() < 1e-10);
    }
}
