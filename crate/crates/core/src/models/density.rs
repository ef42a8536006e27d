use super::{IndexScheme, Instance, Layout, PlantedModel};
use crate::combin::{binom_f64, colex_subsets};
use crate::error::{Error, Result};

/// Largest coordinate count for which instance spaces are enumerated.
pub const MAX_ENUM_COORDS: usize = 24;
const MAX_DENSITY_WORK: f64 = 2e9;
const MAX_TPCA_N: usize = 16;

/// Iterator over all 2^N Boolean instances, in mask order.
pub struct InstanceIter {
    scheme: IndexScheme,
    next: u64,
    total: u64,
}

impl Iterator for InstanceIter {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        if self.next >= self.total {
            return None;
        }
        let inst = Instance::from_mask(self.scheme.clone(), self.next);
        self.next += 1;
        Some(inst)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for InstanceIter {}

pub(crate) fn check_enumerable(model: &PlantedModel) -> Result<usize> {
    if model.is_gaussian() {
        return Err(Error::Intractable(
            "Gaussian instance spaces cannot be enumerated".into(),
        ));
    }
    let n_coords = model.num_coords();
    if n_coords > MAX_ENUM_COORDS {
        return Err(Error::guard(
            "instance coordinates N",
            n_coords as f64,
            MAX_ENUM_COORDS as f64,
        ));
    }
    Ok(n_coords)
}

/// Every Boolean instance of the model's space exactly once.
pub fn enumerate_instances(model: &PlantedModel) -> Result<InstanceIter> {
    let n_coords = check_enumerable(model)?;
    Ok(InstanceIter {
        scheme: model.scheme(),
        next: 0,
        total: 1u64 << n_coords,
    })
}

/// `μ̂(inst) = μ(inst) / ν(inst)`, computed by enumerating the hidden structure.
pub fn relative_density(model: &PlantedModel, inst: &Instance) -> Result<f64> {
    Ok(1.0 + density_deviation(model, inst)?)
}

/// Table of `μ̂ − 1` over all enumerated instances, indexed by instance mask.
///
/// The deviation is accumulated directly (never as `μ̂` followed by a
/// subtraction) so that small Fourier coefficients keep full relative precision.
pub fn density_deviation_table(model: &PlantedModel) -> Result<Vec<f64>> {
    model.validate()?;
    let n_coords = check_enumerable(model)?;
    match model {
        PlantedModel::Tpca(_) | PlantedModel::Spca(_) => {
            let fam = SubsetFamily::new(model)?;
            Ok(fam.deviation_table(n_coords))
        }
        _ => {
            check_work(model)?;
            let scheme = model.scheme();
            let layout = scheme.layout();
            let mut buf = Instance::from_mask(scheme, 0);
            (0..1u64 << n_coords)
                .map(|mask| {
                    for (i, c) in buf.coords.iter_mut().enumerate() {
                        *c = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                    }
                    Ok(structured_deviation(model, &layout, &buf.coords))
                })
                .collect()
        }
    }
}

fn density_deviation(model: &PlantedModel, inst: &Instance) -> Result<f64> {
    model.validate()?;
    if model.is_gaussian() {
        return Err(Error::Intractable(
            "Gaussian densities are available only through their Hermite coefficients".into(),
        ));
    }
    if inst.scheme != model.scheme() {
        return Err(Error::InvalidArgument(format!(
            "instance scheme {} does not match model scheme {}",
            inst.scheme.label(),
            model.scheme().label()
        )));
    }
    match model {
        PlantedModel::Tpca(_) | PlantedModel::Spca(_) => {
            Ok(SubsetFamily::new(model)?.deviation_at(&inst.coords))
        }
        _ => {
            check_work(model)?;
            Ok(structured_deviation(model, &model.scheme().layout(), &inst.coords))
        }
    }
}

/// Running value of `Π (1 + x_j) − 1`.
#[inline]
fn dev_mul(dev: f64, x: f64) -> f64 {
    dev + x * (1.0 + dev)
}

fn check_work(model: &PlantedModel) -> Result<()> {
    let (work, what) = match model {
        PlantedModel::Clique(p) => (
            binom_f64(p.n as u64, p.size as u64) * binom_f64(p.size as u64, 2).max(1.0),
            "clique placements",
        ),
        PlantedModel::Dks(p) => (
            binom_f64(p.n as u64, p.k as u64) * binom_f64(p.k as u64, 2),
            "dense-subgraph placements",
        ),
        PlantedModel::Sbm(p) => (
            binom_f64(p.n as u64, p.n as u64 / 2) * binom_f64(p.n as u64, 2),
            "balanced partitions",
        ),
        PlantedModel::Csp(p) => (
            2f64.powi(p.n as i32) * binom_f64(p.n as u64, p.k as u64),
            "planted assignments",
        ),
        _ => return Ok(()),
    };
    if work > MAX_DENSITY_WORK {
        return Err(Error::Intractable(format!(
            "{what}: density needs about {work:.3e} operations"
        )));
    }
    Ok(())
}

/// Density deviation for the graph and CSP models, by direct enumeration of
/// the planted structure.
fn structured_deviation(model: &PlantedModel, layout: &Layout, coords: &[f64]) -> f64 {
    let n = layout.n;
    let edge = |i: u32, j: u32| crate::combin::colex_rank(&[i.min(j), i.max(j)]);
    match model {
        PlantedModel::Clique(p) => {
            let placements = colex_subsets(n, p.size);
            let boost = 2f64.powi(binom_f64(p.size as u64, 2) as i32);
            let cliques = placements
                .iter()
                .filter(|k| {
                    (0..k.len()).all(|a| (a + 1..k.len()).all(|b| coords[edge(k[a], k[b])] > 0.0))
                })
                .count();
            (cliques as f64 * boost - placements.len() as f64) / placements.len() as f64
        }
        PlantedModel::Dks(p) => {
            let placements = colex_subsets(n, p.k);
            let up = p.q / p.p - 1.0;
            let down = (1.0 - p.q) / (1.0 - p.p) - 1.0;
            let total: f64 = placements
                .iter()
                .map(|k| {
                    let mut dev = 0.0;
                    for a in 0..k.len() {
                        for b in a + 1..k.len() {
                            let x = if coords[edge(k[a], k[b])] > 0.0 { up } else { down };
                            dev = dev_mul(dev, x);
                        }
                    }
                    dev
                })
                .sum();
            total / placements.len() as f64
        }
        PlantedModel::Sbm(p) => {
            let nf = n as f64;
            let p0 = (p.a + p.b) / (2.0 * nf);
            let ratio = |q: f64, present: bool| {
                if present {
                    q / p0 - 1.0
                } else {
                    (1.0 - q) / (1.0 - p0) - 1.0
                }
            };
            let halves = colex_subsets(n, n / 2);
            let total: f64 = halves
                .iter()
                .map(|h| {
                    let mut side = vec![false; n];
                    for &i in h {
                        side[i as usize] = true;
                    }
                    let mut dev = 0.0;
                    for (e, &c) in coords.iter().enumerate() {
                        let vs = layout.unit_vertices(e);
                        let same = side[vs[0] as usize] == side[vs[1] as usize];
                        let q = if same { p.a / nf } else { p.b / nf };
                        dev = dev_mul(dev, ratio(q, c > 0.0));
                    }
                    dev
                })
                .sum();
            total / halves.len() as f64
        }
        PlantedModel::Csp(p) => {
            let f = p.k + 2;
            let total: f64 = (0..1u64 << n)
                .map(|ymask| {
                    let mut dev = 0.0;
                    for u in 0..layout.units() {
                        let slot = &coords[u * f..(u + 1) * f];
                        if slot[0] < 0.0 {
                            continue;
                        }
                        let mut mask = 0usize;
                        for (j, &v) in layout.unit_vertices(u).iter().enumerate() {
                            let y = if ymask >> v & 1 == 1 { -1.0 } else { 1.0 };
                            if y * slot[1 + j] < 0.0 {
                                mask |= 1 << j;
                            }
                        }
                        let hit = slot[f - 1] == p.predicate[mask] as f64;
                        let r = if hit { 2.0 * (1.0 - p.delta) + p.delta } else { p.delta };
                        dev = dev_mul(dev, r - 1.0);
                    }
                    dev
                })
                .sum();
            total / 2f64.powi(n as i32)
        }
        PlantedModel::Tpca(_) | PlantedModel::Spca(_) => unreachable!(),
    }
}

/// The spiked models share one structure: a random vertex subset `U` carries a
/// uniformly random sign vector, and every coordinate inside `U` has bias `η`
/// towards the product of its signs. The density is
/// `Σ_U w_U E_{v_U} Π_{α ⊆ U} (1 + η v^α A_α)`.
struct SubsetFamily {
    layout: Layout,
    eta: f64,
    subsets: Vec<(u64, f64)>,
}

impl SubsetFamily {
    fn new(model: &PlantedModel) -> Result<Self> {
        let s = model.survival();
        let (n, eta, max_size, weight): (usize, f64, usize, Box<dyn Fn(usize) -> f64>) =
            match model {
                PlantedModel::Tpca(p) => {
                    if p.n > MAX_TPCA_N {
                        return Err(Error::guard("tpca density n", p.n as f64, MAX_TPCA_N as f64));
                    }
                    let n = p.n;
                    (
                        n,
                        PlantedModel::tpca_eta(p),
                        n,
                        Box::new(move |j| s.powi(j as i32) * (1.0 - s).powi((n - j) as i32)),
                    )
                }
                PlantedModel::Spca(p) => {
                    let (n, k) = (p.n, p.k);
                    (
                        n,
                        p.lambda / k as f64,
                        k,
                        Box::new(move |j| {
                            binom_f64((n - j) as u64, (k - j) as u64) / binom_f64(n as u64, k as u64)
                                * s.powi(j as i32)
                                * (1.0 - s).powi((k - j) as i32)
                        }),
                    )
                }
                _ => unreachable!(),
            };
        if n > 63 {
            return Err(Error::guard("density n", n as f64, 63.0));
        }
        let layout = model.scheme().layout();
        let arity = layout.arity as u64;
        let mut work = 0.0;
        for j in 0..=max_size {
            if weight(j) > 0.0 {
                work += binom_f64(n as u64, j as u64) * 2f64.powi(j as i32)
                    * binom_f64(j as u64, arity).max(1.0);
            }
        }
        if work > MAX_DENSITY_WORK {
            return Err(Error::Intractable(format!(
                "density enumeration needs about {work:.3e} operations"
            )));
        }
        let mut subsets = Vec::new();
        for u in 0u64..1 << n {
            let j = u.count_ones() as usize;
            if j <= max_size {
                let w = weight(j);
                if w > 0.0 {
                    subsets.push((u, w));
                }
            }
        }
        Ok(SubsetFamily {
            layout,
            eta,
            subsets,
        })
    }

    fn inside(&self, u: u64) -> Vec<(usize, u64)> {
        self.layout
            .unit_masks()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m & !u == 0)
            .map(|(c, &m)| (c, m))
            .collect()
    }

    fn deviation_at(&self, coords: &[f64]) -> f64 {
        let mut total = 0.0;
        for &(u, w) in &self.subsets {
            let inside = self.inside(u);
            let mut acc = 0.0;
            let mut count = 0u64;
            let mut v = u;
            loop {
                let mut dev = 0.0;
                for &(c, m) in &inside {
                    let sign = if (v & m).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    dev = dev_mul(dev, self.eta * sign * coords[c]);
                }
                acc += dev;
                count += 1;
                if v == 0 {
                    break;
                }
                v = (v - 1) & u;
            }
            total += w * acc / count as f64;
        }
        total
    }

    fn deviation_table(&self, n_coords: usize) -> Vec<f64> {
        let full_bits: u64 = (1u64 << n_coords) - 1;
        let mut table = vec![0.0; 1usize << n_coords];
        for &(u, w) in &self.subsets {
            let inside = self.inside(u);
            let r = inside.len();
            let mut acc = vec![0.0; 1 << r];
            let mut sub = vec![0.0; 1 << r];
            let mut count = 0u64;
            let mut v = u;
            loop {
                sub[0] = 0.0;
                for (j, &(_, m)) in inside.iter().enumerate() {
                    let sign = if (v & m).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    let x = self.eta * sign;
                    let half = 1usize << j;
                    for b in 0..half {
                        let d = sub[b];
                        sub[b | half] = dev_mul(d, -x);
                        sub[b] = dev_mul(d, x);
                    }
                }
                for (a, s) in acc.iter_mut().zip(&sub) {
                    *a += s;
                }
                count += 1;
                if v == 0 {
                    break;
                }
                v = (v - 1) & u;
            }
            let scale = w / count as f64;
            // scatter: instance mask = outside bits | deposit(inside bits)
            let deposit: Vec<u64> = (0..1u64 << r)
                .map(|b| {
                    inside
                        .iter()
                        .enumerate()
                        .fold(0u64, |m, (j, &(c, _))| if b >> j & 1 == 1 { m | 1 << c } else { m })
                })
                .collect();
            let inside_bits = deposit[(1usize << r) - 1];
            let outside = full_bits & !inside_bits;
            let mut o = 0u64;
            loop {
                for (b, &dep) in deposit.iter().enumerate() {
                    table[(o | dep) as usize] += scale * acc[b];
                }
                if o == outside {
                    break;
                }
                o = (o.wrapping_sub(outside)) & outside;
            }
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::KahanSum;

    #[test]
    fn zero_signal_density_is_one() {
        let m = PlantedModel::tpca(5, 3, 0.0, 0.2);
        for inst in enumerate_instances(&m).unwrap() {
            assert_eq!(relative_density(&m, &inst).unwrap(), 1.0);
        }
    }

    #[test]
    fn all_ones_tpca_matches_direct_sum() {
        // n = 4, k = 3, λ = 1: η = 1/8, four triples, A = all ones
        let m = PlantedModel::tpca(4, 3, 1.0, 0.0);
        let inst = Instance::from_mask(m.scheme(), 0);
        let subsets = colex_subsets(4, 3);
        let mut want = 0.0;
        for v in 0u32..16 {
            let sign = |i: u32| if v >> i & 1 == 1 { -1.0 } else { 1.0 };
            let prod: f64 = subsets
                .iter()
                .map(|a| 1.0 + a.iter().map(|&i| sign(i)).product::<f64>() / 8.0)
                .product();
            want += prod / 16.0;
        }
        let got = relative_density(&m, &inst).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn densities_average_to_one_and_tables_agree() {
        let models = [
            PlantedModel::tpca(5, 3, 2.0, 0.3),
            PlantedModel::spca(5, 3, 2.0, 0.2),
            PlantedModel::clique(5, 3),
            PlantedModel::dks(5, 3, 0.4, 0.8),
            PlantedModel::sbm(4, 3.0, 1.0),
            PlantedModel::csp_xor(3, 2, 0.5, 0.1),
        ];
        for m in &models {
            let table = density_deviation_table(m).unwrap();
            let mean: KahanSum = table.iter().copied().collect();
            let law = m.law();
            let weighted: f64 = if law.is_uniform() {
                mean.value() / table.len() as f64
            } else {
                let probs = match &law {
                    super::super::CoordLaw::Boolean(p) => p.clone(),
                    _ => unreachable!(),
                };
                table
                    .iter()
                    .enumerate()
                    .map(|(mask, d)| {
                        let w: f64 = probs
                            .iter()
                            .enumerate()
                            .map(|(i, &q)| if mask >> i & 1 == 1 { 1.0 - q } else { q })
                            .product();
                        w * d
                    })
                    .sum()
            };
            assert!(weighted.abs() < 1e-12, "{}: {weighted}", m.name());
            for (mask, d) in table.iter().enumerate().step_by(7) {
                let inst = Instance::from_mask(m.scheme(), mask as u64);
                let mu = relative_density(m, &inst).unwrap();
                assert!(mu >= 0.0);
                assert!((mu - 1.0 - d).abs() < 1e-12, "{}", m.name());
            }
        }
    }

    #[test]
    fn enumeration_guard() {
        assert_eq!(enumerate_instances(&PlantedModel::tpca(3, 2, 0.0, 0.0)).unwrap().count(), 8);
        let err = enumerate_instances(&PlantedModel::clique(8, 3)).err().unwrap();
        assert!(err.is_guard());
        assert!(relative_density(
            &PlantedModel::tpca_gaussian(4, 3, 1.0, 0.0),
            &Instance::from_mask(IndexScheme::KSubsets { n: 4, k: 3 }, 0)
        )
        .is_err());
    }
}
