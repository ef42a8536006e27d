//! Fourier analysis on product instance spaces.
//!
//! Coefficients are taken in the orthonormal product basis of the null law:
//! characters χ_W on the uniform cube, their biased analogue for biased
//! coordinates, and normalized Hermite polynomials for Gaussian coordinates.

mod transform;

pub use transform::{forward, inverse, ProductBasis};

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::combin::binom_f64;
use crate::error::{Error, Result};
use crate::models::{check_enumerable, Instance, Layout, PlantedModel};
use crate::rng::{chunked_reduce, trial_rng};

/// A set of instance coordinates, stored sorted and duplicate free.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SupportSet(Vec<u32>);

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// Rejects repeated coordinates: on the cube χ_i² = 1, so a repeated
    /// coordinate is never a valid multilinear support.
    pub fn new(mut coords: Vec<u32>) -> Result<Self> {
        coords.sort_unstable();
        if coords.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "support {coords:?} repeats a coordinate"
            )));
        }
        Ok(SupportSet(coords))
    }

    pub fn from_sorted(coords: Vec<u32>) -> Self {
        debug_assert!(coords.windows(2).all(|w| w[0] < w[1]));
        SupportSet(coords)
    }

    pub fn from_mask(mask: u64) -> Self {
        SupportSet((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &i| m | 1 << i)
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symmetric_difference(&self, other: &SupportSet) -> SupportSet {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    out.push(*x);
                    i += 1;
                }
                (Some(_), Some(y)) => {
                    out.push(*y);
                    j += 1;
                }
                (Some(x), None) => {
                    out.push(*x);
                    i += 1;
                }
                (None, Some(y)) => {
                    out.push(*y);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SupportSet(out)
    }

    /// Vertex degrees of the support viewed as a hypergraph, sorted by vertex.
    pub fn vertex_degrees(&self, layout: &Layout) -> Vec<(u32, u32)> {
        let mut deg: BTreeMap<u32, u32> = BTreeMap::new();
        for &c in &self.0 {
            for &v in layout.coord_vertices(c as usize) {
                *deg.entry(v).or_default() += 1;
            }
        }
        deg.into_iter().collect()
    }

    /// Vertices touched by the support.
    pub fn vertex_support(&self, layout: &Layout) -> Vec<u32> {
        self.vertex_degrees(layout).into_iter().map(|(v, _)| v).collect()
    }

    /// Vertices of odd degree.
    pub fn odd_vertices(&self, layout: &Layout) -> Vec<u32> {
        self.vertex_degrees(layout)
            .into_iter()
            .filter(|&(_, d)| d % 2 == 1)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn is_even(&self, layout: &Layout) -> bool {
        self.vertex_degrees(layout).iter().all(|&(_, d)| d % 2 == 0)
    }
}

impl std::fmt::Display for SupportSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn check_range(support: &[u32], len: usize) -> Result<()> {
    match support.iter().find(|&&i| i as usize >= len) {
        Some(&i) => Err(Error::OutOfRange {
            index: i as usize,
            len,
        }),
        None => Ok(()),
    }
}

/// χ_W(inst): product of the instance coordinates over W.
pub fn chi(w: &SupportSet, inst: &Instance) -> Result<f64> {
    check_range(w.coords(), inst.len())?;
    Ok(w.0.iter().map(|&i| inst.coords[i as usize]).product())
}

/// Normalized probabilists' Hermite polynomial `He_m(x)/√(m!)`.
pub fn hermite_1d(m: u32, x: f64) -> f64 {
    // normalized three-term recurrence: h_{j+1} = (x h_j − √j h_{j−1}) / √(j+1)
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..m {
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Product of normalized Hermite polynomials over `(coordinate, multiplicity)` pairs.
pub fn hermite(w: &[(usize, u32)], inst: &Instance) -> Result<f64> {
    if let Some(&(i, _)) = w.iter().find(|&&(i, _)| i >= inst.len()) {
        return Err(Error::OutOfRange {
            index: i,
            len: inst.len(),
        });
    }
    Ok(w.iter().map(|&(i, m)| hermite_1d(m, inst.coords[i])).product())
}

/// Sparse multilinear polynomial in the product basis of ν.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierPoly {
    pub terms: BTreeMap<SupportSet, f64>,
    pub max_degree: usize,
}

impl FourierPoly {
    pub fn new(max_degree: usize) -> Self {
        FourierPoly {
            terms: BTreeMap::new(),
            max_degree,
        }
    }

    /// Adds `value` to the coefficient of `w`; zero results are removed.
    pub fn add(&mut self, w: SupportSet, value: f64) -> Result<()> {
        if w.len() > self.max_degree {
            return Err(Error::InvalidArgument(format!(
                "support of size {} exceeds max degree {}",
                w.len(),
                self.max_degree
            )));
        }
        match self.terms.entry(w) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += value;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if value != 0.0 {
                    e.insert(value);
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, w: &SupportSet) -> f64 {
        self.terms.get(w).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&mut self, c: f64) {
        if c == 0.0 {
            self.terms.clear();
        } else {
            self.terms.values_mut().for_each(|v| *v *= c);
        }
    }

    /// Evaluates the polynomial in the given product basis.
    pub fn eval_in(&self, basis: &ProductBasis, coords: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(w, c)| c * basis.basis_fn(w.coords(), coords))
            .sum()
    }

    /// Evaluates with plain characters (uniform cube or multilinear Hermite part).
    pub fn eval(&self, inst: &Instance) -> f64 {
        self.terms
            .iter()
            .map(|(w, c)| c * w.0.iter().map(|&i| inst.coords[i as usize]).product::<f64>())
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        inner_product_nu(self, self)
    }

    /// CSV with columns `support` (space separated coordinates) and `coefficient`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["support", "coefficient"])?;
        for (k, v) in &self.terms {
            w.write_record([k.to_string(), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, max_degree: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut poly = FourierPoly::new(max_degree);
        let bad = |s: &str| Error::InvalidArgument(format!("bad CSV field {s:?}"));
        for rec in rdr.records() {
            let rec = rec?;
            let support = rec
                .get(0)
                .unwrap_or("")
                .split_whitespace()
                .map(|s| s.parse::<u32>().map_err(|_| bad(s)))
                .collect::<Result<Vec<u32>>>()?;
            let field = rec.get(1).unwrap_or("");
            let value: f64 = field.parse().map_err(|_| bad(field))?;
            poly.add(SupportSet::new(support)?, value)?;
        }
        Ok(poly)
    }
}

/// `⟨f, g⟩_ν = Σ_W f̂(W) ĝ(W)` (Parseval in an orthonormal basis).
pub fn inner_product_nu(f: &FourierPoly, g: &FourierPoly) -> f64 {
    let (small, large) = if f.len() <= g.len() { (f, g) } else { (g, f) };
    let mut s = crate::combin::KahanSum::new();
    for (w, a) in &small.terms {
        if let Some(b) = large.terms.get(w) {
            s.add(a * b);
        }
    }
    s.value()
}

/// Degree-≤D projection of a function tabulated over all instance masks.
pub fn project_table(mut table: Vec<f64>, basis: &ProductBasis, max_degree: usize) -> FourierPoly {
    forward(&mut table, basis);
    let mut poly = FourierPoly::new(max_degree);
    for (mask, &c) in table.iter().enumerate() {
        if c != 0.0 && (mask.count_ones() as usize) <= max_degree {
            poly.terms.insert(SupportSet::from_mask(mask as u64), c);
        }
    }
    poly
}

/// Tabulates `f` over the enumerated instance space of `model`.
pub fn tabulate<F>(f: F, model: &PlantedModel) -> Result<Vec<f64>>
where
    F: Fn(&Instance) -> f64 + Sync,
{
    let n_coords = check_enumerable(model)?;
    let scheme = model.scheme();
    Ok(crate::rng::par_map(1usize << n_coords, |mask| {
        f(&Instance::from_mask(scheme.clone(), mask as u64))
    }))
}

/// Exact degree-≤D projection of `f` under ν by full enumeration.
pub fn project_low_degree_exact<F>(f: F, model: &PlantedModel, max_degree: usize) -> Result<FourierPoly>
where
    F: Fn(&Instance) -> f64 + Sync,
{
    let table = tabulate(f, model)?;
    Ok(project_table(
        table,
        &ProductBasis::from_law(&model.law()),
        max_degree,
    ))
}

/// All supports of size ≤ `max_degree` over `n_coords` coordinates, by size then lexicographically.
pub fn supports_up_to(n_coords: usize, max_degree: usize) -> Vec<SupportSet> {
    let mut out = vec![SupportSet::empty()];
    for size in 1..=max_degree.min(n_coords) {
        for c in crate::combin::colex_subsets(n_coords, size) {
            out.push(SupportSet::from_sorted(c));
        }
    }
    out.sort();
    out.sort_by_key(|s| s.len());
    out
}

const MAX_MC_TERMS: f64 = 2e5;

/// Monte Carlo degree-≤D projection under ν with per-term standard errors.
///
/// Trial `t` draws its instance from `trial_rng(seed, t)`.
pub fn project_low_degree_mc<F>(
    f: F,
    model: &PlantedModel,
    max_degree: usize,
    trials: u64,
    seed: u64,
) -> Result<(FourierPoly, BTreeMap<SupportSet, f64>)>
where
    F: Fn(&Instance) -> f64 + Sync + Send,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let n_coords = model.num_coords();
    let n_terms: f64 = (0..=max_degree)
        .map(|j| binom_f64(n_coords as u64, j as u64))
        .sum();
    if n_terms > MAX_MC_TERMS {
        return Err(Error::guard("Monte Carlo projection terms", n_terms, MAX_MC_TERMS));
    }
    let supports = supports_up_to(n_coords, max_degree);
    let basis = ProductBasis::from_law(&model.law());
    let m = supports.len();
    let (sum, sum_sq) = chunked_reduce(
        trials,
        1024,
        || (vec![0.0; m], vec![0.0; m]),
        |acc, t| {
            let inst = crate::models::sample_uniform(model, &mut trial_rng(seed, t));
            let fx = f(&inst);
            for (j, w) in supports.iter().enumerate() {
                let y = fx * basis.basis_fn(w.coords(), &inst.coords);
                acc.0[j] += y;
                acc.1[j] += y * y;
            }
        },
        |a, b| {
            a.0.iter_mut().zip(&b.0).for_each(|(x, y)| *x += y);
            a.1.iter_mut().zip(&b.1).for_each(|(x, y)| *x += y);
        },
    );
    let tf = trials as f64;
    let mut poly = FourierPoly::new(max_degree);
    let mut stderr = BTreeMap::new();
    for (j, w) in supports.into_iter().enumerate() {
        let mean = sum[j] / tf;
        let var = if trials > 1 {
            ((sum_sq[j] - tf * mean * mean) / (tf - 1.0)).max(0.0)
        } else {
            0.0
        };
        stderr.insert(w.clone(), (var / tf).sqrt());
        if mean != 0.0 {
            poly.terms.insert(w, mean);
        }
    }
    Ok((poly, stderr))
}
