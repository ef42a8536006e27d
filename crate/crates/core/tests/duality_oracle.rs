//! Oracles for the enumerated primal/dual programs.

mod common;

use common::admm_primal;
use nalgebra::DVector;
use plantlab::duality::*;
use plantlab::models::{Instance, PlantedModel};
use plantlab::robust::SubsampleScheme;

#[test]
fn primal_optimum_matches_admm_oracle() {
    let (model, _, build) = clique_toy(0.5, 1).unwrap();
    let ours = solve_pseudodistribution_program(&build.lambda, 2).unwrap();
    let oracle = admm_primal(&model, &build.lambda, 2);
    assert!((ours.opt - oracle).abs() <= 1e-6 * oracle, "{} vs {oracle}", ours.opt);
    assert!(ours.primal_residual <= 1e-8 && ours.psd_residual <= 1e-8);
    assert!(ours.p.psd_violation() <= 1e-12);
}

#[test]
fn lambda_normalization_and_psd() {
    let (_, _, build) = clique_toy(0.5, 1).unwrap();
    let l = &build.lambda;
    let total: f64 = l.values.iter().zip(l.weights()).map(|(v, w)| w * v[(0, 0)]).sum();
    assert!((total - 1.0).abs() <= 1e-12, "{total}");
    assert_eq!(l.dim, 5);
    assert_eq!(l.len(), 64);
    for v in &l.values {
        let ev = nalgebra::SymmetricEigen::new(v.clone()).eigenvalues;
        assert!(ev.min() >= -1e-12);
    }
}

#[test]
fn marginal_density_matches_direct_completion_average() {
    let model = PlantedModel::clique(4, 3);
    let scheme = SubsampleScheme::vertex(0.5);
    let build = build_lambda_exact(&model, &scheme, max_clique_solver, 1).unwrap();
    let mu_hat: Vec<f64> = (0..64u64)
        .map(|m| plantlab::models::relative_density(&model, &Instance::from_mask(model.scheme(), m)).unwrap())
        .collect();
    for piece in &build.pieces {
        let s = piece.restriction.coord_mask;
        let free: Vec<u64> = (0..64u64).filter(|m| m & s == 0).collect();
        for mask in 0..64u64 {
            let direct: f64 = free.iter().map(|f| mu_hat[((mask & s) | f) as usize]).sum::<f64>() / free.len() as f64;
            let got = piece.piece.values[mask as usize][(0, 0)];
            assert!((direct - got).abs() < 1e-12, "S={s:b} I={mask:b}: {direct} vs {got}");
        }
    }
}

#[test]
fn degenerate_scheme_gives_rank_one_solutions() {
    // a one-vertex clique plants nothing, so μ = ν
    let model = PlantedModel::clique(4, 1);
    let build = build_lambda_exact(&model, &SubsampleScheme::vertex(1.0), max_clique_solver, 1).unwrap();
    assert_eq!(build.pieces.len(), 1);
    let all = Restriction { weight: 1.0, coord_mask: 63, vertex_mask: 15 };
    for (mask, v) in build.lambda.values.iter().enumerate() {
        let inst = Instance::from_mask(model.scheme(), mask as u64);
        let x = max_clique_solver(&inst, &all);
        let xv = DVector::from_vec(monomials(&x, &build.index));
        assert!((v - &xv * xv.transpose()).norm() < 1e-12);
    }
}

#[test]
fn full_degree_matching_pins_the_solution() {
    let (_, _, build) = clique_toy(0.5, 1).unwrap();
    let p = solve_pseudodistribution_program(&build.lambda, 6).unwrap();
    assert!(p.p.axpy(-1.0, &build.lambda).norm() <= 1e-10);
    assert!((p.opt - build.lambda.norm_sq()).abs() <= 1e-10 * p.opt);
}

#[test]
fn dykstra_trace_is_monotone() {
    let (_, _, build) = clique_toy(0.5, 1).unwrap();
    let p = solve_pseudodistribution_program(&build.lambda, 2).unwrap();
    assert!(!p.trace.is_empty());
    for w in p.trace.windows(2) {
        assert!(w[1].primal_residual <= w[0].primal_residual * (1.0 + 1e-12));
    }
    let err = solve_pseudodistribution_program_with(&build.lambda, 2, 3, 1e-8).unwrap_err();
    match err {
        plantlab::Error::NonConvergence { iterations, residuals, .. } => {
            assert_eq!(iterations, 3);
            assert_eq!(residuals.len(), 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn distinguisher_restarts_agree_and_respect_weak_duality() {
    let (_, _, build) = clique_toy(0.5, 1).unwrap();
    let primal = solve_pseudodistribution_program(&build.lambda, 2).unwrap();
    let a = solve_low_degree_distinguisher(&build.lambda, 2, Some(1)).unwrap();
    let b = solve_low_degree_distinguisher(&build.lambda, 2, Some(2)).unwrap();
    assert!((a.value - b.value).abs() <= 1e-6 * a.value);
    assert!(a.value <= build.lambda.norm());
    assert!((a.q.psd_part().norm() - 1.0).abs() <= 1e-9);
    let report = DualityReport::new(&primal, &a);
    assert!(report.dual_psd_norm <= 1.0 + 1e-6);
    assert!(report.weak_duality_gap <= 1e-6 * primal.opt.sqrt(), "{report:?}");
    assert_eq!(verify_duality(primal.opt, a.value, RATIO_FLOOR), Verdict::Pass);
    // the distinguisher is degree ≤ 2
    assert!(a.q.axpy(-1.0, &a.q.low_degree(2)).norm() <= 1e-12);
}

#[test]
fn restriction_inequality_special_cases() {
    let (model, scheme, build) = clique_toy(0.5, 1).unwrap();
    let big_d = 2;
    let r = random_matrix_fn(&build.lambda, 9).low_degree(big_d - 1);
    let rep = random_restriction_check(&build.pieces, &r, &model, &scheme, big_d).unwrap();
    assert!((rep.lhs - rep.low_degree_term).abs() <= 1e-12 * rep.lhs.abs().max(1.0));
    assert!(rep.slack >= 0.0);

    let full = SubsampleScheme::vertex(1.0);
    let b1 = build_lambda_exact(&model, &full, max_clique_solver, 1).unwrap();
    let r = random_matrix_fn(&b1.lambda, 10);
    let rep = random_restriction_check(&b1.pieces, &r, &model, &full, big_d).unwrap();
    assert_eq!(rep.rho, 1.0);
    let tail = rep.lhs - rep.low_degree_term;
    assert!(tail.abs() <= rep.tail_bound);
}

#[test]
fn csp_toy_is_normalized() {
    let model = PlantedModel::csp_xor(3, 2, 0.5, 0.1);
    let scheme = SubsampleScheme::constraint(0.5);
    let build = build_lambda_exact(&model, &scheme, |sub, _| max_csp_solver(&model, sub), 1).unwrap();
    let l = &build.lambda;
    let total: f64 = l.values.iter().zip(l.weights()).map(|(v, w)| w * v[(0, 0)]).sum();
    assert!((total - 1.0).abs() <= 1e-12);
}
