//! Oracles for the subsampling schemes and the ε estimator.

use plantlab::models::{sample_uniform, PlantedModel};
use plantlab::rng::stream_rng;
use plantlab::robust::*;
use plantlab::stats::binomial_cdf_below;
use proptest::prelude::*;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exact `Pr[α ⊆ S]` from the scheme's independent units.
fn containment_prob(model: &PlantedModel, scheme: &SubsampleScheme, alpha: &[usize]) -> f64 {
    let is = model.scheme();
    let layout = is.layout();
    let units: usize = match scheme.kind {
        SchemeKind::CoordinateBernoulli => alpha.len(),
        SchemeKind::ConstraintBernoulli => {
            let mut u: Vec<usize> = alpha.iter().map(|&c| is.unit_of(c)).collect();
            u.sort_unstable();
            u.dedup();
            u.len()
        }
        SchemeKind::VertexBernoulli | SchemeKind::RowColumnBernoulli => {
            let mut v: Vec<u32> = alpha.iter().flat_map(|&c| layout.coord_vertices(c).to_vec()).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        }
    };
    scheme.rho.powi(units as i32)
}

#[test]
fn rho_matches_exhaustive_maximum() {
    let cases = [
        (PlantedModel::clique(6, 3), SubsampleScheme::vertex(0.7)),
        (PlantedModel::clique(6, 3), SubsampleScheme::coordinate(0.7)),
        (PlantedModel::csp_xor(4, 2, 0.5, 0.1), SubsampleScheme::constraint(0.6)),
        (PlantedModel::csp_xor(4, 3, 0.5, 0.1), SubsampleScheme::constraint(0.6)),
        (PlantedModel::tpca(5, 3, 1.0, 0.0), SubsampleScheme::vertex(0.6)),
        (PlantedModel::dks(6, 3, 0.2, 0.7), SubsampleScheme::vertex(0.4)),
    ];
    for (model, scheme) in &cases {
        let len = model.num_coords();
        for big_d in 1..=4usize.min(len) {
            let exact = combinations(len, big_d)
                .iter()
                .map(|a| containment_prob(model, scheme, a))
                .fold(0.0f64, f64::max);
            let ours = rho(big_d, scheme, model).unwrap();
            assert!((ours - exact).abs() <= 1e-15, "{} D={big_d}: {ours} vs {exact}", model.name());
            let w = rho_witness(big_d, scheme, model).unwrap();
            assert_eq!(w.len(), big_d);
            assert!((containment_prob(model, scheme, &w) - exact).abs() <= 1e-15);
        }
    }
}

#[test]
fn rho_matches_monte_carlo_containment() {
    let model = PlantedModel::clique(5, 2);
    let scheme = SubsampleScheme::vertex(0.6);
    let big_d = 3;
    let witness = rho_witness(big_d, &scheme, &model).unwrap();
    let inst = sample_uniform(&model, &mut stream_rng(1, 0, 0));
    let draws = 1_000_000u64;
    let mut rng = stream_rng(7, 0, 1);
    let hits = (0..draws)
        .filter(|_| {
            let s = subsample(&inst, &scheme, &mut rng).unwrap();
            witness.iter().all(|&c| s.in_s[c])
        })
        .count() as f64;
    let p = rho(big_d, &scheme, &model).unwrap();
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    assert!((hits / draws as f64 - p).abs() <= 3.0 * se, "{} vs {p}", hits / draws as f64);
}

#[test]
fn clique_failure_rate_is_a_binomial_tail() {
    // the visible clique size is Bin(size, ρ) regardless of n
    let model = PlantedModel::clique(40, 30);
    let scheme = SubsampleScheme::vertex(0.5);
    let trials = 10_000;
    let rep = estimate_epsilon(&model, &scheme, 10.0, trials, 3).unwrap();
    let p = binomial_cdf_below(30, 0.5, 10);
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((rep.eps_hat - p).abs() <= 3.0 * se, "{} vs {p}", rep.eps_hat);
    assert!((rep.value_mean - 15.0).abs() <= 3.0 * (7.5f64 / trials as f64).sqrt());
    assert!(rep.ci_lo <= rep.eps_hat && rep.eps_hat <= rep.ci_hi);
}

#[test]
fn coupled_failures_decrease_with_rho() {
    let model = PlantedModel::clique(30, 12);
    let mut prev = u64::MAX;
    for rho in [0.2, 0.4, 0.6, 0.8, 1.0] {
        let rep = estimate_epsilon(&model, &SubsampleScheme::vertex(rho), 5.0, 500, 11).unwrap();
        assert!(rep.failures <= prev, "rho {rho}: {} > {prev}", rep.failures);
        prev = rep.failures;
    }
    assert_eq!(prev, 0);
}

#[test]
fn estimator_is_seed_deterministic() {
    let cfg = default_config("dks").unwrap();
    let a = estimate_epsilon(&cfg.model, &cfg.scheme, cfg.threshold, 200, 5).unwrap();
    let b = estimate_epsilon(&cfg.model, &cfg.scheme, cfg.threshold, 200, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn incompatible_scheme_is_rejected() {
    let model = PlantedModel::clique(6, 3);
    assert!(rho(2, &SubsampleScheme::constraint(0.5), &model).is_err());
    assert!(estimate_epsilon(&model, &SubsampleScheme::vertex(0.5), 1.0, 0, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subsample_structure(seed in 0u64..1000, rho in 0.0f64..=1.0) {
        let model = PlantedModel::clique(7, 3);
        let inst = sample_uniform(&model, &mut stream_rng(seed, 0, 0));
        let s = subsample(&inst, &SubsampleScheme::vertex(rho), &mut stream_rng(seed, 0, 1)).unwrap();
        let layout = model.scheme().layout();
        let verts = s.vertices.clone().unwrap();
        for c in 0..inst.len() {
            let expect = layout.coord_vertices(c).iter().all(|&v| verts[v as usize]);
            prop_assert_eq!(s.in_s[c], expect);
            prop_assert_eq!(s.sub.coords[c], if expect { inst.coords[c] } else { 0.0 });
        }
        prop_assert_eq!(s.keep.len(), s.in_s.iter().filter(|&&b| b).count());
    }

    #[test]
    fn rho_is_monotone_in_degree(rho_v in 0.01f64..1.0, d in 1usize..6) {
        let model = PlantedModel::tpca(6, 3, 1.0, 0.0);
        for scheme in [SubsampleScheme::vertex(rho_v), SubsampleScheme::coordinate(rho_v)] {
            prop_assert!(rho(d + 1, &scheme, &model).unwrap() <= rho(d, &scheme, &model).unwrap());
        }
    }
}
