//! Helpers shared by the integration test targets.

use nalgebra::{DMatrix, DVector};
use plantlab::duality::MatrixValuedFn;
use plantlab::fourier::{supports_up_to, ProductBasis};
use plantlab::models::{Instance, PlantedModel};

/// ADMM on `min ‖X‖²_ν` s.t. entrywise moment matching and `X ⪰ 0`, with the
/// constraint matrix built from explicit basis-function evaluations.
pub fn admm_primal(model: &PlantedModel, lambda: &MatrixValuedFn, big_d: usize) -> f64 {
    let n_coords = model.num_coords();
    let n_inst = 1usize << n_coords;
    let basis = ProductBasis::from_law(&model.law());
    let nu = lambda.weights().to_vec();
    let sups = supports_up_to(n_coords, big_d);
    let scheme = model.scheme();
    // C = Φᵀ diag(ν), one row per support
    let phi = DMatrix::from_fn(n_inst, sups.len(), |i, a| {
        let inst = Instance::from_mask(scheme.clone(), i as u64);
        basis.basis_fn(sups[a].coords(), &inst.coords)
    });
    let w = DVector::from_vec(nu.clone());
    let c = DMatrix::from_fn(sups.len(), n_inst, |a, i| phi[(i, a)] * w[i]);
    let winv_ct = DMatrix::from_fn(n_inst, sups.len(), |i, a| c[(a, i)] / w[i]);
    let gram = (&c * &winv_ct).cholesky().expect("gram positive definite");
    let dim = lambda.dim;
    let entry = |f: &MatrixValuedFn, i: usize, j: usize| DVector::from_fn(n_inst, |k, _| f.values[k][(i, j)]);
    let targets: Vec<Vec<DVector<f64>>> = (0..dim)
        .map(|i| (0..dim).map(|j| &c * entry(lambda, i, j)).collect())
        .collect();
    let project_affine = |x: &MatrixValuedFn| {
        let mut out = x.clone();
        for i in 0..dim {
            for j in i..dim {
                let v = entry(x, i, j);
                let r = &c * &v - &targets[i][j];
                let corr = &winv_ct * gram.solve(&r);
                let p = v - corr;
                for k in 0..n_inst {
                    out.values[k][(i, j)] = p[k];
                    out.values[k][(j, i)] = p[k];
                }
            }
        }
        out
    };
    let rho = 1.0;
    let zero = lambda.scale(0.0);
    let (mut z, mut u) = (zero.clone(), zero);
    for _ in 0..200_000 {
        let x = project_affine(&z.axpy(-1.0, &u).scale(rho / (2.0 + rho)));
        let z_new = x.axpy(1.0, &u).psd_part();
        u = u.axpy(1.0, &x).axpy(-1.0, &z_new);
        let primal = x.axpy(-1.0, &z_new).norm();
        let dual = rho * z_new.axpy(-1.0, &z).norm();
        z = z_new;
        if primal < 1e-12 && dual < 1e-12 {
            break;
        }
    }
    z.norm_sq()
}
