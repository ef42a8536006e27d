//! Small combinatorial helpers.

/// Binomial coefficient as `u128`, saturating on overflow.
pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Binomial coefficient in floating point.
pub fn binom_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// n (n-1) ... (n-m+1).
pub fn falling(n: u64, m: u64) -> f64 {
    if m > n {
        return 0.0;
    }
    (0..m).map(|i| (n - i) as f64).product()
}

/// Colexicographic rank of a strictly increasing sequence.
pub fn colex_rank(subset: &[u32]) -> usize {
    subset
        .iter()
        .enumerate()
        .map(|(i, &c)| binom(c as u64, i as u64 + 1) as usize)
        .sum()
}

/// Inverse of [`colex_rank`] for subsets of size `k`.
pub fn colex_unrank(mut rank: usize, k: usize) -> Vec<u32> {
    let mut out = vec![0u32; k];
    for i in (0..k).rev() {
        // largest c with C(c, i+1) <= rank
        let mut c = i as u64;
        while binom(c + 1, i as u64 + 1) as usize <= rank {
            c += 1;
        }
        out[i] = c as u32;
        rank -= binom(c, i as u64 + 1) as usize;
    }
    out
}

/// All k-subsets of `0..n` in colex order.
pub fn colex_subsets(n: usize, k: usize) -> Vec<Vec<u32>> {
    let total = binom(n as u64, k as u64) as usize;
    let mut out = Vec::with_capacity(total);
    if k > n {
        return out;
    }
    let mut cur: Vec<u32> = (0..k as u32).collect();
    loop {
        out.push(cur.clone());
        // advance in colex order: find first i with cur[i]+1 != cur[i+1]
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { cur[i + 1] } else { n as u32 };
            if cur[i] + 1 < limit {
                break;
            }
            i += 1;
        }
        if i == k {
            break;
        }
        cur[i] += 1;
        for (j, slot) in cur.iter_mut().enumerate().take(i) {
            *slot = j as u32;
        }
    }
    out
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}
