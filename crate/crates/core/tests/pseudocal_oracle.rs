//! Independent oracles for the pseudo-calibrated moment matrices.

use plantlab::combin::colex_subsets;
use plantlab::fourier::{project_table, ProductBasis, SupportSet};
use plantlab::models::{sample_uniform, Instance, PlantedModel};
use plantlab::pseudocal::*;
use plantlab::rng::trial_rng;
use plantlab::stats::Moments;
use proptest::prelude::*;

/// Table of `A ↦ Π_{α ⊆ S} (1 + η A_α)` averaged over `S`, for the all-ones spike.
fn spike_free_density(n: usize, eta: f64, s: f64, masks: &[u64]) -> Vec<f64> {
    let mut g = vec![0.0; 1 << masks.len()];
    for alive in 0u64..1 << n {
        let k = alive.count_ones() as i32;
        let w = s.powi(k) * (1.0 - s).powi(n as i32 - k);
        if w == 0.0 {
            continue;
        }
        let mut t = vec![1.0];
        for &m in masks {
            let inside = m & !alive == 0;
            let (fp, fm) = if inside { (1.0 + eta, 1.0 - eta) } else { (1.0, 1.0) };
            let mut next: Vec<f64> = t.iter().map(|x| x * fp).collect();
            next.extend(t.iter().map(|x| x * fm));
            t = next;
        }
        for (gi, ti) in g.iter_mut().zip(&t) {
            *gi += w * ti;
        }
    }
    g
}

/// `Λ_{a,b}(A) = E_v[v^a v^b G(A ⊙ v^{⊗k})]` tabulated over every instance.
fn exact_entry(n: usize, masks: &[u64], g: &[f64], a: &[u32], b: &[u32]) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    for v in 0u64..1 << n {
        let sign = |t: &[u32]| t.iter().map(|&i| if v >> i & 1 == 1 { -1.0 } else { 1.0 }).product::<f64>();
        let w = sign(a) * sign(b) / (1u64 << n) as f64;
        let flip = masks
            .iter()
            .enumerate()
            .filter(|(_, &m)| (m & v).count_ones() % 2 == 1)
            .fold(0usize, |acc, (c, _)| acc | 1 << c);
        for (mask, o) in out.iter_mut().enumerate() {
            *o += w * g[mask ^ flip];
        }
    }
    out
}

#[test]
fn tpca_entries_match_exhaustive_projection() {
    let (n, big_d) = (6, 4);
    let model = PlantedModel::tpca(n, 3, 2.0, 0.2);
    let eta = 2.0 * (n as f64).powf(-1.5);
    let layout = model.scheme().layout();
    let masks = layout.unit_masks().to_vec();
    let g = spike_free_density(n, eta, model.survival(), &masks);
    let basis = ProductBasis::uniform(masks.len());
    let pc = PseudoCalibration::new(&model, 1, big_d).unwrap();
    let samples: Vec<Instance> = (0..5).map(|t| sample_uniform(&model, &mut trial_rng(40, t))).collect();
    let evals: Vec<_> = samples.iter().map(|a| pc.eval(a).unwrap()).collect();
    let entries: [(&[u32], &[u32]); 6] = [(&[], &[]), (&[0], &[]), (&[0], &[0]), (&[0], &[1]), (&[1], &[2]), (&[5], &[3])];
    for (a, b) in entries {
        let exact = project_table(exact_entry(n, &masks, &g, a, b), &basis, big_d);
        let ours = lambda_entry_coeffs(&model, a, b, big_d).unwrap();
        let mut supports: Vec<&SupportSet> = exact.terms.keys().chain(ours.poly.terms.keys()).collect();
        supports.sort();
        supports.dedup();
        for w in supports {
            let (x, y) = (exact.get(w), ours.poly.get(w));
            assert!((x - y).abs() <= 1e-12, "entry {a:?},{b:?} at {w}: exhaustive {x}, ours {y}");
        }
        let (i, j) = (pc.index().position(a).unwrap(), pc.index().position(b).unwrap());
        for (inst, e) in samples.iter().zip(&evals) {
            let direct = exact.eval(inst);
            assert!((direct - e.matrix.data[(i, j)]).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }
}

#[test]
fn spca_entries_match_enumeration_over_sparse_vectors() {
    let (n, k, lambda, gamma) = (6usize, 3usize, 1.5, 0.3);
    let model = PlantedModel::spca(n, k, lambda, gamma);
    let bias = lambda / k as f64;
    let s = model.survival();
    let layout = model.scheme().layout();
    let edges: Vec<u64> = layout.unit_masks().to_vec();
    // (u vector, weight, alive mask) over every support, sign pattern and survivor set
    let mut laws: Vec<(Vec<f64>, f64, u64)> = Vec::new();
    let supports = colex_subsets(n, k);
    for sup in &supports {
        for signs in 0u32..1 << k {
            let mut v = vec![0.0; n];
            for (j, &i) in sup.iter().enumerate() {
                v[i as usize] = if signs >> j & 1 == 1 { -1.0 } else { 1.0 };
            }
            for alive in 0u64..1 << n {
                let c = alive.count_ones() as i32;
                let w = s.powi(c) * (1.0 - s).powi(n as i32 - c) / (supports.len() as f64 * f64::from(1u32 << k));
                let u: Vec<f64> = (0..n).map(|i| if alive >> i & 1 == 1 { v[i] } else { 0.0 }).collect();
                laws.push((u, w, alive));
            }
        }
    }
    let coeff = |a: &[u32], b: &[u32], w: &[usize]| -> f64 {
        laws.iter()
            .map(|(u, p, _)| {
                let mono: f64 = a.iter().chain(b).map(|&i| u[i as usize]).product();
                let spike: f64 = w
                    .iter()
                    .map(|&e| {
                        let m = edges[e];
                        let (i, j) = (m.trailing_zeros() as usize, 63 - m.leading_zeros() as usize);
                        bias * u[i] * u[j]
                    })
                    .product();
                p * mono * spike
            })
            .sum()
    };
    let tuples: Vec<Vec<u32>> = std::iter::once(vec![]).chain((0..n as u32).map(|i| vec![i])).collect();
    let mut ws: Vec<Vec<usize>> = vec![vec![]];
    ws.extend((0..edges.len()).map(|e| vec![e]));
    for e in 0..edges.len() {
        for f in e + 1..edges.len() {
            ws.push(vec![e, f]);
        }
    }
    for a in &tuples {
        for b in &tuples {
            let ours = spca_entry_coeffs(&model, a, b, 2).unwrap();
            for w in &ws {
                let want = coeff(a, b, w);
                let got = ours.poly.get(&SupportSet::from_sorted(w.iter().map(|&e| e as u32).collect()));
                assert!((want - got).abs() <= 1e-12, "{a:?},{b:?},{w:?}: {want} vs {got}");
            }
        }
    }
    // the two closed forms quoted for this law
    let diag = spca_entry_coeffs(&model, &[2], &[2], 2).unwrap();
    assert!((diag.poly.get(&SupportSet::empty()) - 0.5 * 6f64.powf(-gamma)).abs() < 1e-15);
}

#[test]
fn null_objective_mean_matches_analytic_sum() {
    let n = 8usize;
    let lambda = (n as f64).powf(0.55);
    let model = PlantedModel::tpca(n, 3, lambda, 0.1);
    let pc = PseudoCalibration::new(&model, 1, 4).unwrap();
    let analytic = pc.expected_objective_null();
    let closed = 56.0 * lambda * (n as f64).powf(-1.5) * model.survival().powi(3);
    assert!((analytic - closed).abs() < 1e-12 * closed);
    let mut m = Moments::new();
    for t in 0..10_000 {
        let a = sample_uniform(&model, &mut trial_rng(41, t));
        m.push(pc.eval(&a).unwrap().objective);
    }
    let z = (m.mean - analytic) / m.stderr();
    assert!(z.abs() < 3.0, "mean {} vs {analytic} (z = {z})", m.mean);
}

#[test]
fn residual_is_tiny_for_every_truncation() {
    let model = PlantedModel::tpca(6, 3, 2.5, 0.0);
    let a = sample_uniform(&model, &mut trial_rng(42, 0));
    for big_d in [2, 4, 6] {
        let m = eval_lambda_truncated(&model, &a, 2, big_d).unwrap();
        assert!(constraint_residual(&m, &model).unwrap() <= 1e-10);
        assert!(m.is_symmetric(1e-12));
    }
    let s = PlantedModel::spca(6, 4, 2.0, 0.1);
    let a = sample_uniform(&s, &mut trial_rng(42, 1));
    for big_d in [2, 4] {
        let m = eval_lambda_truncated(&s, &a, 2, big_d).unwrap();
        assert!(constraint_residual(&m, &s).unwrap() <= 1e-10);
    }
}

#[test]
fn constructed_failure_is_not_certified() {
    let model = PlantedModel::tpca(4, 3, 8.0, 0.0);
    for t in 0..10 {
        let a = sample_uniform(&model, &mut trial_rng(43, t));
        assert_eq!(certified_sos_value(&model, &a, 2, 2, PSD_TOL).unwrap(), None);
    }
}

#[test]
fn lambda00_variance_shrinks_with_signal() {
    let n = 8usize;
    let thr = (n as f64).powf(0.75 - 0.2);
    let mut vars = Vec::new();
    for lambda in [0.0, 0.5 * thr, thr] {
        let model = PlantedModel::tpca(n, 3, lambda, 0.0);
        let pc = PseudoCalibration::new(&model, 1, 4).unwrap();
        let mut m = Moments::new();
        for t in 0..200 {
            m.push(pc.eval(&sample_uniform(&model, &mut trial_rng(44, t))).unwrap().lambda_00);
        }
        vars.push(m.variance());
    }
    assert_eq!(vars[0], 0.0);
    assert!(vars[0] < vars[1] && vars[1] < vars[2], "{vars:?}");
}

#[test]
fn csv_dump_has_every_entry() {
    let model = PlantedModel::tpca(5, 3, 1.0, 0.0);
    let a = sample_uniform(&model, &mut trial_rng(45, 0));
    let m = eval_lambda_truncated(&model, &a, 1, 2).unwrap();
    let mut buf = Vec::new();
    m.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "row,col,value");
    assert_eq!(lines.len(), 1 + 36);
    assert!(lines[1].starts_with("(),(),"));
}

#[test]
fn report_json_fields() {
    let model = PlantedModel::tpca(6, 3, 1.0, 0.0);
    let pc = PseudoCalibration::new(&model, 1, 2).unwrap();
    let r = pc.check(&sample_uniform(&model, &mut trial_rng(46, 0)), PSD_TOL).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for key in ["min_eig", "lambda_00", "objective", "residual", "certified_value"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonzero_coefficients_have_even_parity(
        n in 4usize..7, lambda in 0.1f64..3.0, a0 in 0u32..4, b0 in 0u32..4, two in any::<bool>()
    ) {
        let model = PlantedModel::tpca(n, 3, lambda, 0.0);
        let layout = model.scheme().layout();
        let row = vec![a0];
        let col = if two { vec![b0, (b0 + 1) % n as u32] } else { vec![b0] };
        let e = lambda_entry_coeffs(&model, &row, &col, 3).unwrap();
        for (w, c) in &e.poly.terms {
            prop_assert!(*c != 0.0);
            let mut deg = vec![0u32; n];
            for (v, d) in w.vertex_degrees(&layout) { deg[v as usize] += d; }
            for &v in row.iter().chain(&col) { deg[v as usize] += 1; }
            prop_assert!(deg.iter().all(|d| d % 2 == 0), "{} {:?}", w, deg);
        }
    }

    #[test]
    fn evaluation_is_symmetric_and_in_subspace(seed in 0u64..1000, lambda in 0.0f64..4.0) {
        let model = PlantedModel::tpca(6, 3, lambda, 0.1);
        let a = sample_uniform(&model, &mut trial_rng(seed, 0));
        let m = eval_lambda_truncated(&model, &a, 1, 3).unwrap();
        prop_assert!(m.is_symmetric(1e-12));
        prop_assert!(constraint_residual(&m, &model).unwrap() <= 1e-10);
    }
}
