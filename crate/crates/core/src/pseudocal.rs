//! Pseudo-calibrated moment matrices `Λ^{≤D}(A)`.
//!
//! Rows and columns are indexed by tuples of distinct vertices of length ≤ d.
//! The entry for tuples `a, b` is the degree-≤D part of
//! `μ̂(A) · E[u^a u^b | A]`, where `u` is the planted vector (`v` for tensor
//! PCA, the surviving spike `v ⊙ 1_T` for sparse PCA). Its Fourier coefficient
//! at an edge set W is nonzero only when every vertex has even total degree in
//! `W ⊎ a ⊎ b`, so all entries sharing the odd set `a Δ b` (and, for sparse PCA,
//! the union `a ∪ b`) are the same function of A.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::combin::falling;
use crate::error::{Error, Result};
use crate::fourier::{FourierPoly, SupportSet};
use crate::hypergraph::{enumerate_low_odd, EdgeSets};
use crate::linalg::{check_finite, psd_part, sym_eigenvalues};
use crate::models::{Instance, PlantedModel};

/// Largest moment-matrix dimension accepted.
pub const MAX_DIM: usize = 5000;

/// Ordered tuples of distinct vertices of length ≤ d, by length then lexicographically.
#[derive(Clone, Debug)]
pub struct TupleIndex {
    pub n: usize,
    pub d: usize,
    tuples: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

/// `N_d = Σ_{s ≤ d} n (n−1) ⋯ (n−s+1)`.
pub fn tuple_count(n: usize, d: usize) -> f64 {
    (0..=d.min(n)).map(|s| falling(n as u64, s as u64)).sum()
}

impl TupleIndex {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        let count = tuple_count(n, d);
        if count > MAX_DIM as f64 {
            return Err(Error::guard("moment matrix dimension N_d", count, MAX_DIM as f64));
        }
        let mut tuples = vec![Vec::new()];
        let mut frontier: Vec<Vec<u32>> = vec![Vec::new()];
        for _ in 0..d.min(n) {
            let mut next = Vec::new();
            for t in &frontier {
                for v in 0..n as u32 {
                    if !t.contains(&v) {
                        let mut u = t.clone();
                        u.push(v);
                        next.push(u);
                    }
                }
            }
            tuples.extend(next.iter().cloned());
            frontier = next;
        }
        let lookup = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(TupleIndex {
            n,
            d,
            tuples,
            lookup,
        })
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, row: usize) -> &[u32] {
        &self.tuples[row]
    }

    pub fn position(&self, tuple: &[u32]) -> Option<usize> {
        self.lookup.get(tuple).copied()
    }

    pub fn mask(&self, row: usize) -> u64 {
        self.tuples[row].iter().fold(0u64, |m, &v| m | 1 << v)
    }
}

fn format_tuple(t: &[u32]) -> String {
    let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(" "))
}

#[derive(Clone, Debug)]
pub struct MomentMatrix {
    pub index: TupleIndex,
    pub data: DMatrix<f64>,
}

impl MomentMatrix {
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.norm()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| (self.data[(i, j)] - self.data[(j, i)]).abs() <= tol))
    }

    /// CSV dump with columns `row`, `col`, `value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "value"])?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                w.write_record([
                    format_tuple(self.index.tuple(i)),
                    format_tuple(self.index.tuple(j)),
                    format!("{:e}", self.data[(i, j)]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Smallest eigenvalue of the symmetrized matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    Ok(sym_eigenvalues(m)?.first().copied().unwrap_or(0.0))
}

/// Sparse coefficients of one matrix entry as a function of A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryCoeffs {
    pub row: Vec<u32>,
    pub col: Vec<u32>,
    pub poly: FourierPoly,
}

enum Law {
    Tpca { eta: f64, s: f64 },
    Spca { bias: f64, s: f64, n: u64, k: u64 },
}

impl Law {
    fn of(model: &PlantedModel) -> Result<Self> {
        model.validate()?;
        let s = model.survival();
        match model {
            PlantedModel::Tpca(p) => Ok(Law::Tpca {
                eta: PlantedModel::tpca_eta(p),
                s,
            }),
            PlantedModel::Spca(p) => Ok(Law::Spca {
                bias: p.lambda / p.k as f64,
                s,
                n: p.n as u64,
                k: p.k as u64,
            }),
            other => Err(Error::MethodUnavailable(format!(
                "pseudo-calibration is implemented for tpca and spca, not {}",
                other.name()
            ))),
        }
    }

    /// Coefficient of χ_W in the entry with odd set `odd(W)` and tuple union `union`.
    fn coeff(&self, edges: usize, verts: u64, union: u64) -> f64 {
        match *self {
            Law::Tpca { eta, s } => eta.powi(edges as i32) * s.powi(verts.count_ones() as i32),
            Law::Spca { bias, s, n, k } => {
                let m = (verts | union).count_ones() as u64;
                if m > k {
                    return 0.0;
                }
                bias.powi(edges as i32) * falling(k, m) / falling(n, m) * s.powi(m as i32)
            }
        }
    }

    /// Entry class key: tensor PCA entries depend on the odd set only.
    fn key(&self, odd: u64, union: u64) -> (u64, u64) {
        match self {
            Law::Tpca { .. } => (odd, 0),
            Law::Spca { .. } => (odd, union),
        }
    }
}

fn coord_masks(model: &PlantedModel) -> Result<(Vec<u64>, usize)> {
    let layout = model.scheme().layout();
    if !layout.has_masks() {
        return Err(Error::guard("vertex count", layout.n as f64, 64.0));
    }
    Ok((layout.unit_masks().to_vec(), layout.arity))
}

fn tuple_mask(t: &[u32], n: usize) -> Result<u64> {
    let mut m = 0u64;
    for &v in t {
        if v as usize >= n || m >> v & 1 == 1 {
            return Err(Error::InvalidArgument(format!(
                "{t:?} is not a tuple of distinct vertices of [{n}]"
            )));
        }
        m |= 1 << v;
    }
    Ok(m)
}

fn entry_coeffs(model: &PlantedModel, row: &[u32], col: &[u32], big_d: usize) -> Result<EntryCoeffs> {
    let law = Law::of(model)?;
    let n = model.n();
    let (a, b) = (tuple_mask(row, n)?, tuple_mask(col, n)?);
    let (odd, union) = (a ^ b, a | b);
    let (masks, arity) = coord_masks(model)?;
    let sets = enumerate_low_odd(&masks, arity, big_d, odd.count_ones() as usize, |o| o == odd)?;
    let mut poly = FourierPoly::new(big_d);
    for i in 0..sets.len() {
        let edges = sets.term(i);
        let c = law.coeff(edges.len(), sets.verts[i], union);
        poly.add(SupportSet::from_sorted(edges.to_vec()), c)?;
    }
    Ok(EntryCoeffs {
        row: row.to_vec(),
        col: col.to_vec(),
        poly,
    })
}

/// Fourier coefficients of the tensor PCA entry `Λ_{row,col}`, truncated at degree D.
pub fn lambda_entry_coeffs(
    model: &PlantedModel,
    row: &[u32],
    col: &[u32],
    big_d: usize,
) -> Result<EntryCoeffs> {
    if !matches!(model, PlantedModel::Tpca(_)) {
        return Err(Error::MethodUnavailable("expected a tpca model".into()));
    }
    entry_coeffs(model, row, col, big_d)
}

/// Fourier coefficients of the sparse PCA entry `Λ_{row,col}`, truncated at degree D.
pub fn spca_entry_coeffs(
    model: &PlantedModel,
    row: &[u32],
    col: &[u32],
    big_d: usize,
) -> Result<EntryCoeffs> {
    if !matches!(model, PlantedModel::Spca(_)) {
        return Err(Error::MethodUnavailable("expected an spca model".into()));
    }
    entry_coeffs(model, row, col, big_d)
}

/// Precomputed coefficient tables for evaluating `Λ^{≤D}(A)` on many instances.
pub struct PseudoCalibration {
    pub model: PlantedModel,
    pub d: usize,
    pub big_d: usize,
    index: TupleIndex,
    terms: EdgeSets,
    /// Per entry class: (term, coefficient) pairs.
    class_terms: Vec<Vec<(u32, f64)>>,
    /// Class of each matrix entry, row major.
    entry_class: Vec<u32>,
    /// Class of the moment `E[u^α]` for each coordinate α.
    coord_class: Vec<u32>,
    lambda00_class: u32,
}

/// The matrix and scalar summaries for one instance.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub matrix: MomentMatrix,
    pub lambda_00: f64,
    pub objective: f64,
}

impl PseudoCalibration {
    pub fn new(model: &PlantedModel, d: usize, big_d: usize) -> Result<Self> {
        let law = Law::of(model)?;
        let n = model.n();
        let index = TupleIndex::new(n, d)?;
        let (masks, arity) = coord_masks(model)?;
        let dim = index.len();

        let mut classes: HashMap<(u64, u64), u32> = HashMap::new();
        let mut class_keys: Vec<(u64, u64)> = Vec::new();
        let mut intern = |odd: u64, union: u64| -> u32 {
            let key = law.key(odd, union);
            *classes.entry(key).or_insert_with(|| {
                class_keys.push((odd, union));
                (class_keys.len() - 1) as u32
            })
        };
        let row_masks: Vec<u64> = (0..dim).map(|i| index.mask(i)).collect();
        let mut entry_class = Vec::with_capacity(dim * dim);
        for &a in &row_masks {
            for &b in &row_masks {
                entry_class.push(intern(a ^ b, a | b));
            }
        }
        let coord_class: Vec<u32> = masks.iter().map(|&m| intern(m, m)).collect();
        let lambda00_class = intern(0, 0);

        let mut by_odd: HashMap<u64, Vec<u32>> = HashMap::new();
        for (c, &(odd, _)) in class_keys.iter().enumerate() {
            by_odd.entry(odd).or_default().push(c as u32);
        }
        let max_odd = by_odd.keys().map(|o| o.count_ones() as usize).max().unwrap_or(0);
        let terms = enumerate_low_odd(&masks, arity, big_d, max_odd, |o| by_odd.contains_key(&o))?;
        let mut class_terms: Vec<Vec<(u32, f64)>> = vec![Vec::new(); class_keys.len()];
        for i in 0..terms.len() {
            for &c in &by_odd[&terms.odd[i]] {
                let (_, union) = class_keys[c as usize];
                let coeff = law.coeff(terms.term(i).len(), terms.verts[i], union);
                if coeff != 0.0 {
                    class_terms[c as usize].push((i as u32, coeff));
                }
            }
        }
        Ok(PseudoCalibration {
            model: model.clone(),
            d,
            big_d,
            index,
            terms,
            class_terms,
            entry_class,
            coord_class,
            lambda00_class,
        })
    }

    pub fn index(&self) -> &TupleIndex {
        &self.index
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn class_values(&self, inst: &Instance) -> Vec<f64> {
        let chi: Vec<f64> = (0..self.terms.len())
            .map(|i| {
                self.terms
                    .term(i)
                    .iter()
                    .map(|&c| inst.coords[c as usize])
                    .product()
            })
            .collect();
        self.class_terms
            .iter()
            .map(|ts| ts.iter().map(|&(t, c)| c * chi[t as usize]).sum())
            .collect()
    }

    pub fn eval(&self, inst: &Instance) -> Result<Evaluation> {
        if inst.scheme != self.model.scheme() {
            return Err(Error::InvalidArgument(
                "instance does not match the model's scheme".into(),
            ));
        }
        let class_values = self.class_values(inst);
        let dim = self.index.len();
        let data = DMatrix::from_fn(dim, dim, |i, j| {
            class_values[self.entry_class[i * dim + j] as usize]
        });
        let objective = inst
            .coords
            .iter()
            .zip(&self.coord_class)
            .map(|(a, &c)| a * class_values[c as usize])
            .sum();
        Ok(Evaluation {
            matrix: MomentMatrix {
                index: self.index.clone(),
                data,
            },
            lambda_00: class_values[self.lambda00_class as usize],
            objective,
        })
    }

    /// `(p̃E-numerators F_α(A) for every coordinate α, Λ_{∅,∅}(A))`, so that
    /// the objective is `Σ_α A_α F_α(A)`.
    pub fn coordinate_moments(&self, inst: &Instance) -> Result<(Vec<f64>, f64)> {
        if inst.scheme != self.model.scheme() {
            return Err(Error::InvalidArgument(
                "instance does not match the model's scheme".into(),
            ));
        }
        let values = self.class_values(inst);
        Ok((
            self.coord_class.iter().map(|&c| values[c as usize]).collect(),
            values[self.lambda00_class as usize],
        ))
    }

    /// Analytic `E_ν[objective]`: the constant term of `A_α · p̃E[u^α]` summed over α.
    pub fn expected_objective_null(&self) -> f64 {
        self.coord_class
            .iter()
            .enumerate()
            .map(|(alpha, &c)| {
                self.class_terms[c as usize]
                    .iter()
                    .filter(|&&(t, _)| self.terms.term(t as usize) == [alpha as u32])
                    .map(|&(_, coeff)| coeff)
                    .sum::<f64>()
            })
            .sum()
    }
}

/// `Λ^{≤D}(A)` for one instance.
pub fn eval_lambda_truncated(
    model: &PlantedModel,
    inst: &Instance,
    d: usize,
    big_d: usize,
) -> Result<MomentMatrix> {
    Ok(PseudoCalibration::new(model, d, big_d)?.eval(inst)?.matrix)
}

/// `(Λ^{≤D}_{∅,∅}(A), ⟨Λ^{≤D}(A), A⟩)`.
pub fn scalar_checks(model: &PlantedModel, inst: &Instance, d: usize, big_d: usize) -> Result<(f64, f64)> {
    let e = PseudoCalibration::new(model, d, big_d)?.eval(inst)?;
    Ok((e.lambda_00, e.objective))
}

/// Relative Frobenius norm of the part of `m` outside the subspace of
/// matrices that are constant on entry classes (odd set for tensor PCA;
/// odd set and tuple union for sparse PCA).
pub fn constraint_residual(m: &MomentMatrix, model: &PlantedModel) -> Result<f64> {
    let spca = matches!(model, PlantedModel::Spca(_));
    let dim = m.dim();
    let mut sums: HashMap<(u64, u64), (f64, usize)> = HashMap::new();
    let key = |i: usize, j: usize| {
        let (a, b) = (m.index.mask(i), m.index.mask(j));
        if spca {
            (a ^ b, a | b)
        } else {
            (a ^ b, 0)
        }
    };
    for i in 0..dim {
        for j in 0..dim {
            let e = sums.entry(key(i, j)).or_insert((0.0, 0));
            e.0 += m.data[(i, j)];
            e.1 += 1;
        }
    }
    let mut off = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let (s, c) = sums[&key(i, j)];
            off += (m.data[(i, j)] - s / c as f64).powi(2);
        }
    }
    let norm = m.frobenius();
    Ok(if norm == 0.0 { 0.0 } else { off.sqrt() / norm })
}

/// PSD, scalar and subspace diagnostics for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub min_eig: f64,
    /// `min_eig / ‖M‖_F`.
    pub min_eig_rel: f64,
    pub lambda_00: f64,
    pub objective: f64,
    pub residual: f64,
    pub certified_value: Option<f64>,
}

/// Default relative PSD tolerance.
pub const PSD_TOL: f64 = 1e-8;

impl PseudoCalibration {
    pub fn check(&self, inst: &Instance, psd_tol: f64) -> Result<CheckReport> {
        let e = self.eval(inst)?;
        check_finite(&e.matrix.data)?;
        let min_eig = min_eigenvalue(&e.matrix.data)?;
        let norm = e.matrix.frobenius();
        let residual = constraint_residual(&e.matrix, &self.model)?;
        let min_eig_rel = if norm == 0.0 { 0.0 } else { min_eig / norm };
        let certified_value = if min_eig >= -psd_tol * norm && e.lambda_00 > 0.0 {
            Some(e.objective / e.lambda_00)
        } else {
            None
        };
        Ok(CheckReport {
            min_eig,
            min_eig_rel,
            lambda_00: e.lambda_00,
            objective: e.objective,
            residual,
            certified_value,
        })
    }

    /// Normalized witness matrix `M₊ / Λ_{∅,∅}` with the tolerance-level
    /// negative part removed.
    pub fn witness(&self, inst: &Instance) -> Result<DMatrix<f64>> {
        let e = self.eval(inst)?;
        Ok(psd_part(&e.matrix.data) / e.lambda_00)
    }
}

/// Objective value of the normalized pseudo-expectation when `Λ^{≤D}(A)` is
/// PSD up to `psd_tol · ‖M‖_F` and `Λ_{∅,∅} > 0`; `None` otherwise.
pub fn certified_sos_value(
    model: &PlantedModel,
    inst: &Instance,
    d: usize,
    big_d: usize,
    psd_tol: f64,
) -> Result<Option<f64>> {
    Ok(PseudoCalibration::new(model, d, big_d)?
        .check(inst, psd_tol)?
        .certified_value)
}
