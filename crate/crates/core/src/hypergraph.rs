//! Enumeration of k-uniform hypergraphs by odd-degree vertex set, and exact
//! counts of even hypergraphs.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::combin::{binom, binom_f64};
use crate::error::{Error, Result};

/// Edge sets stored flat; term `i` owns `edges[offsets[i]..offsets[i + 1]]`.
#[derive(Clone, Debug, Default)]
pub struct EdgeSets {
    pub edges: Vec<u32>,
    pub offsets: Vec<usize>,
    /// Odd-degree vertex mask per term.
    pub odd: Vec<u64>,
    /// Vertex support mask per term.
    pub verts: Vec<u64>,
}

impl EdgeSets {
    pub fn len(&self) -> usize {
        self.odd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.odd.is_empty()
    }

    pub fn term(&self, i: usize) -> &[u32] {
        &self.edges[self.offsets[i]..self.offsets[i + 1]]
    }
}

const MAX_VISITS: f64 = 4e9;

/// All sets of at most `max_edges` edges (given as vertex masks of common
/// arity) whose odd-degree vertex set has at most `max_odd` vertices and
/// passes `keep`. Terms are emitted in depth-first lexicographic order.
pub fn enumerate_low_odd<K>(
    masks: &[u64],
    arity: usize,
    max_edges: usize,
    max_odd: usize,
    keep: K,
) -> Result<EdgeSets>
where
    K: Fn(u64) -> bool,
{
    let u = masks.len() as u64;
    let visits: f64 = (0..max_edges)
        .map(|j| binom_f64(u, j as u64) * u as f64)
        .sum();
    if visits > MAX_VISITS {
        return Err(Error::guard("hypergraph enumeration visits", visits, MAX_VISITS));
    }
    let mut out = EdgeSets {
        offsets: vec![0],
        ..Default::default()
    };
    let mut stack = Vec::with_capacity(max_edges);
    struct Ctx<'a, K> {
        masks: &'a [u64],
        arity: u32,
        max_edges: usize,
        max_odd: u32,
        keep: K,
    }
    fn dfs<K: Fn(u64) -> bool>(
        ctx: &Ctx<'_, K>,
        start: usize,
        odd: u64,
        verts: u64,
        stack: &mut Vec<u32>,
        out: &mut EdgeSets,
    ) {
        let depth = stack.len();
        let pc = odd.count_ones();
        if pc > ctx.max_odd + ctx.arity * (ctx.max_edges - depth) as u32 {
            return;
        }
        if pc <= ctx.max_odd && (ctx.keep)(odd) {
            out.edges.extend_from_slice(stack);
            out.offsets.push(out.edges.len());
            out.odd.push(odd);
            out.verts.push(verts);
        }
        if depth == ctx.max_edges {
            return;
        }
        for e in start..ctx.masks.len() {
            stack.push(e as u32);
            dfs(ctx, e + 1, odd ^ ctx.masks[e], verts | ctx.masks[e], stack, out);
            stack.pop();
        }
    }
    let ctx = Ctx {
        masks,
        arity: arity as u32,
        max_edges,
        max_odd: max_odd as u32,
        keep,
    };
    dfs(&ctx, 0, 0, 0, &mut stack, &mut out);
    Ok(out)
}

const MAX_COUNT_SUBSETS: u128 = 40_000_000;

fn compute_counts(k: usize, t: usize) -> Result<Vec<u64>> {
    let big_m = k * t / 2;
    if t == 0 {
        return Ok(vec![1]);
    }
    if (k * t) % 2 == 1 || big_m < k {
        return Ok(vec![0; big_m + 1]);
    }
    let n_edges = binom(big_m as u64, k as u64);
    let subsets = binom(n_edges as u64, t as u64);
    if subsets > MAX_COUNT_SUBSETS || big_m > 63 {
        return Err(Error::guard(
            "edge subsets for hypergraph counts",
            subsets as f64,
            MAX_COUNT_SUBSETS as f64,
        ));
    }
    let masks: Vec<u64> = crate::combin::colex_subsets(big_m, k)
        .iter()
        .map(|c| c.iter().fold(0u64, |m, &v| m | 1 << v))
        .collect();
    let sets = enumerate_low_odd(&masks, k, t, 0, |_| true)?;
    let mut by_size = vec![0u64; big_m + 1];
    for i in 0..sets.len() {
        if sets.term(i).len() == t {
            by_size[sets.verts[i].count_ones() as usize] += 1;
        }
    }
    let mut out = vec![0u64; big_m + 1];
    for (m, &c) in by_size.iter().enumerate() {
        let choose = binom(big_m as u64, m as u64) as u64;
        debug_assert_eq!(c % choose, 0);
        out[m] = c / choose;
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    k: usize,
    t: usize,
    counts: Vec<u64>,
}

fn cache() -> &'static Mutex<HashMap<(usize, usize), Arc<Vec<u64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<u64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `c(t, m)` for `m = 0..=⌊kt/2⌋`: the number of simple k-uniform hypergraphs
/// with `t` edges, all vertex degrees even, whose vertex support is one fixed
/// set of exactly `m` labeled vertices. Computed once per `(k, t)` by brute
/// force over edge subsets on `⌊kt/2⌋` vertices.
pub fn even_counts(k: usize, t: usize) -> Result<Arc<Vec<u64>>> {
    if let Some(v) = cache().lock().unwrap().get(&(k, t)) {
        return Ok(v.clone());
    }
    let counts = Arc::new(compute_counts(k, t)?);
    cache().lock().unwrap().insert((k, t), counts.clone());
    Ok(counts)
}

/// Loads previously saved counts into the in-memory cache.
pub fn load_count_cache(path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(path)?;
    let entries: Vec<CacheEntry> = serde_json::from_str(&text)?;
    let mut c = cache().lock().unwrap();
    for e in &entries {
        c.insert((e.k, e.t), Arc::new(e.counts.clone()));
    }
    Ok(entries.len())
}

/// Writes the in-memory cache as JSON.
pub fn save_count_cache(path: &Path) -> Result<()> {
    let c = cache().lock().unwrap();
    let mut entries: Vec<CacheEntry> = c
        .iter()
        .map(|(&(k, t), v)| CacheEntry {
            k,
            t,
            counts: v.as_ref().clone(),
        })
        .collect();
    entries.sort_by_key(|e| (e.k, e.t));
    std::fs::write(path, serde_json::to_string_pretty(&entries)?)?;
    Ok(())
}
