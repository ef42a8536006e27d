use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{CoordLaw, Instance, PlantedModel, Solution};
use crate::error::{Error, Result};

pub(crate) fn fill_from_law<R: Rng + ?Sized>(law: &CoordLaw, rng: &mut R, out: &mut [f64]) {
    match law {
        CoordLaw::Gaussian(_) => {
            for o in out.iter_mut() {
                *o = rng.sample(StandardNormal);
            }
        }
        CoordLaw::Boolean(probs) => {
            let mut bits = 0u64;
            let mut left = 0u32;
            for (o, &p) in out.iter_mut().zip(probs) {
                if p == 0.5 {
                    if left == 0 {
                        bits = rng.next_u64();
                        left = 64;
                    }
                    *o = if bits & 1 == 1 { -1.0 } else { 1.0 };
                    bits >>= 1;
                    left -= 1;
                } else {
                    *o = if rng.random::<f64>() < p { 1.0 } else { -1.0 };
                }
            }
        }
    }
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.next_u32() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Draws an instance from the null law ν.
pub fn sample_uniform<R: Rng + ?Sized>(model: &PlantedModel, rng: &mut R) -> Instance {
    let scheme = model.scheme();
    let mut coords = vec![0.0; scheme.len()];
    fill_from_law(&model.law(), rng, &mut coords);
    Instance { scheme, coords }
}

/// Redraws every coordinate outside `keep` from ν.
///
/// A full null instance is drawn first and then overwritten on `keep`, so the
/// random stream consumed does not depend on `keep`.
pub fn resample_outside<R: Rng + ?Sized>(
    model: &PlantedModel,
    inst: &Instance,
    keep: &[usize],
    rng: &mut R,
) -> Result<Instance> {
    let len = inst.len();
    if let Some(&bad) = keep.iter().find(|&&i| i >= len) {
        return Err(Error::OutOfRange { index: bad, len });
    }
    let mut fresh = sample_uniform(model, rng);
    if fresh.len() != len {
        return Err(Error::InvalidArgument(
            "instance does not belong to the model's scheme".into(),
        ));
    }
    for &i in keep {
        fresh.coords[i] = inst.coords[i];
    }
    Ok(fresh)
}

fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut v = index::sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

/// Draws `(instance, hidden solution)` from the planted law μ.
pub fn sample_planted<R: Rng + ?Sized>(
    model: &PlantedModel,
    rng: &mut R,
) -> Result<(Instance, Solution)> {
    model.validate()?;
    let scheme = model.scheme();
    let layout = scheme.layout();
    let n = model.n();
    let mut coords = vec![0.0; scheme.len()];
    let x = match model {
        PlantedModel::Clique(p) => {
            fill_from_law(&model.law(), rng, &mut coords);
            let members = random_subset(rng, n, p.size);
            let mut x = vec![0.0; n];
            for &i in &members {
                x[i] = 1.0;
            }
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    let e = scheme.unit_index(&[i as u32, j as u32])?;
                    coords[e] = 1.0;
                }
            }
            x
        }
        PlantedModel::Csp(p) => {
            let y: Vec<f64> = (0..n).map(|_| random_sign(rng)).collect();
            let pres = PlantedModel::csp_presence(p);
            let f = p.k + 2;
            for u in 0..layout.units() {
                let slot = &mut coords[u * f..(u + 1) * f];
                let present = rng.random::<f64>() < pres;
                slot[0] = if present { 1.0 } else { -1.0 };
                let mut mask = 0usize;
                for (j, &v) in layout.unit_vertices(u).iter().enumerate() {
                    let z = random_sign(rng);
                    slot[1 + j] = z;
                    if y[v as usize] * z < 0.0 {
                        mask |= 1 << j;
                    }
                }
                slot[f - 1] = if present && rng.random::<f64>() >= p.delta {
                    p.predicate[mask] as f64
                } else {
                    random_sign(rng)
                };
            }
            y
        }
        PlantedModel::Sbm(p) => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            let mut x = vec![-1.0; n];
            for &i in &perm[..n / 2] {
                x[i] = 1.0;
            }
            let (pin, pout) = (p.a / n as f64, p.b / n as f64);
            for (e, c) in coords.iter_mut().enumerate() {
                let vs = layout.unit_vertices(e);
                let q = if x[vs[0] as usize] == x[vs[1] as usize] {
                    pin
                } else {
                    pout
                };
                *c = if rng.random::<f64>() < q { 1.0 } else { -1.0 };
            }
            x
        }
        PlantedModel::Dks(p) => {
            let members = random_subset(rng, n, p.k);
            let mut x = vec![0.0; n];
            for &i in &members {
                x[i] = 1.0;
            }
            for (e, c) in coords.iter_mut().enumerate() {
                let vs = layout.unit_vertices(e);
                let inside = x[vs[0] as usize] == 1.0 && x[vs[1] as usize] == 1.0;
                let q = if inside { p.q } else { p.p };
                *c = if rng.random::<f64>() < q { 1.0 } else { -1.0 };
            }
            x
        }
        PlantedModel::Tpca(p) => {
            let v: Vec<f64> = (0..n).map(|_| random_sign(rng)).collect();
            let s = model.survival();
            let alive: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < s).collect();
            let eta = PlantedModel::tpca_eta(p);
            for (a, c) in coords.iter_mut().enumerate() {
                let vs = layout.unit_vertices(a);
                let spike: f64 = vs.iter().map(|&i| v[i as usize]).product();
                let inside = vs.iter().all(|&i| alive[i as usize]);
                if p.gaussian {
                    let g: f64 = rng.sample(StandardNormal);
                    *c = if inside { eta * spike + g } else { g };
                } else {
                    // keep the spike w.p. eta, then rerandomize outside the survivors
                    let kept = rng.random::<f64>() < eta;
                    let b = if kept { spike } else { random_sign(rng) };
                    *c = if inside { b } else { random_sign(rng) };
                }
            }
            v
        }
        PlantedModel::Spca(p) => {
            let support = random_subset(rng, n, p.k);
            let mut v = vec![0.0; n];
            for &i in &support {
                v[i] = random_sign(rng);
            }
            let s = model.survival();
            let alive: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < s).collect();
            let bias = p.lambda / p.k as f64;
            for (e, c) in coords.iter_mut().enumerate() {
                let vs = layout.unit_vertices(e);
                let (i, j) = (vs[0] as usize, vs[1] as usize);
                let spike = v[i] * v[j];
                let inside = alive[i] && alive[j];
                if p.gaussian {
                    let g: f64 = rng.sample(StandardNormal);
                    *c = if inside { bias * spike + g } else { g };
                } else {
                    let b = if spike != 0.0 && rng.random::<f64>() < bias {
                        spike
                    } else {
                        random_sign(rng)
                    };
                    *c = if inside { b } else { random_sign(rng) };
                }
            }
            v
        }
    };
    Ok((Instance { scheme, coords }, Solution { x }))
}
