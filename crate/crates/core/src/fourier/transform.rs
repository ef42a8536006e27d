use crate::models::CoordLaw;

/// Orthonormal product basis `φ_i(x) = (x − m_i)/σ_i` of a product law.
///
/// For the uniform ±1 law this is `φ_i(x) = x`, so `φ_W` is the character χ_W.
/// For Gaussian coordinates `φ_i(x) = x` is the first Hermite polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasis {
    p_plus: Vec<f64>,
    mean: Vec<f64>,
    sd: Vec<f64>,
    uniform: bool,
}

impl ProductBasis {
    pub fn uniform(n_coords: usize) -> Self {
        ProductBasis {
            p_plus: vec![0.5; n_coords],
            mean: vec![0.0; n_coords],
            sd: vec![1.0; n_coords],
            uniform: true,
        }
    }

    pub fn from_law(law: &CoordLaw) -> Self {
        match law {
            CoordLaw::Gaussian(n) => ProductBasis {
                p_plus: vec![0.5; *n],
                mean: vec![0.0; *n],
                sd: vec![1.0; *n],
                uniform: false,
            },
            CoordLaw::Boolean(p) => {
                let uniform = p.iter().all(|&q| q == 0.5);
                ProductBasis {
                    mean: p.iter().map(|&q| 2.0 * q - 1.0).collect(),
                    sd: p.iter().map(|&q| 2.0 * (q * (1.0 - q)).sqrt()).collect(),
                    p_plus: p.clone(),
                    uniform,
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    #[inline]
    pub fn phi(&self, i: usize, x: f64) -> f64 {
        if self.uniform {
            x
        } else {
            (x - self.mean[i]) / self.sd[i]
        }
    }

    /// `Π_{i∈W} φ_i(coords[i])`.
    pub fn basis_fn(&self, support: &[u32], coords: &[f64]) -> f64 {
        support
            .iter()
            .map(|&i| self.phi(i as usize, coords[i as usize]))
            .product()
    }
}

/// In place: values indexed by instance mask (bit set = coordinate −1) become
/// coefficients indexed by support mask.
pub fn forward(table: &mut [f64], basis: &ProductBasis) {
    let n = table.len().trailing_zeros() as usize;
    debug_assert_eq!(table.len(), 1 << n);
    for i in 0..n {
        let half = 1usize << i;
        if basis.uniform {
            for block in table.chunks_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (p, m) = (*a, *b);
                    *a = 0.5 * (p + m);
                    *b = 0.5 * (p - m);
                }
            }
        } else {
            let q = basis.p_plus[i];
            let fp = basis.phi(i, 1.0);
            let fm = basis.phi(i, -1.0);
            for block in table.chunks_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (p, m) = (q * *a, (1.0 - q) * *b);
                    *a = p + m;
                    *b = p * fp + m * fm;
                }
            }
        }
    }
}

/// Inverse of [`forward`].
pub fn inverse(table: &mut [f64], basis: &ProductBasis) {
    let n = table.len().trailing_zeros() as usize;
    for i in 0..n {
        let half = 1usize << i;
        let fp = basis.phi(i, 1.0);
        let fm = basis.phi(i, -1.0);
        for block in table.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (c0, c1) = (*a, *b);
                *a = c0 + c1 * fp;
                *b = c0 + c1 * fm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(table: &[f64], basis: &ProductBasis, support: u64) -> f64 {
        let n = table.len().trailing_zeros() as usize;
        let sup: Vec<u32> = (0..n as u32).filter(|i| support >> i & 1 == 1).collect();
        table
            .iter()
            .enumerate()
            .map(|(mask, f)| {
                let coords: Vec<f64> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect();
                let w: f64 = (0..n)
                    .map(|i| {
                        let q = basis.p_plus[i];
                        if coords[i] > 0.0 { q } else { 1.0 - q }
                    })
                    .product();
                w * f * basis.basis_fn(&sup, &coords)
            })
            .sum()
    }

    #[test]
    fn matches_direct_sums_and_inverts() {
        let vals: Vec<f64> = (0..32).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        for basis in [
            ProductBasis::uniform(5),
            ProductBasis::from_law(&CoordLaw::Boolean(vec![0.3, 0.5, 0.8, 0.1, 0.6])),
        ] {
            let mut t = vals.clone();
            forward(&mut t, &basis);
            for w in 0..32u64 {
                assert!((t[w as usize] - direct(&vals, &basis, w)).abs() < 1e-12);
            }
            inverse(&mut t, &basis);
            for (a, b) in t.iter().zip(&vals) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
