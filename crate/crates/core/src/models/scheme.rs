use serde::{Deserialize, Serialize};

use crate::combin::{binom, colex_rank, colex_unrank};
use crate::error::{Error, Result};

/// How instance coordinates are laid out over the vertex set `[n]`.
///
/// Vertex groups (edges, k-subsets, matrix cells, constraint slots) are listed
/// in colexicographic order. A constraint slot occupies `k + 2` consecutive
/// coordinates: presence, the `k` literal signs, and the right-hand side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IndexScheme {
    GraphEdges { n: usize },
    KSubsets { n: usize, k: usize },
    SymmetricMatrix { n: usize },
    CspSlots { n: usize, k: usize },
}

impl IndexScheme {
    pub fn n(&self) -> usize {
        match *self {
            IndexScheme::GraphEdges { n }
            | IndexScheme::KSubsets { n, .. }
            | IndexScheme::SymmetricMatrix { n }
            | IndexScheme::CspSlots { n, .. } => n,
        }
    }

    /// Vertices per group.
    pub fn arity(&self) -> usize {
        match *self {
            IndexScheme::GraphEdges { .. } | IndexScheme::SymmetricMatrix { .. } => 2,
            IndexScheme::KSubsets { k, .. } | IndexScheme::CspSlots { k, .. } => k,
        }
    }

    /// Coordinates per group.
    pub fn fields(&self) -> usize {
        match *self {
            IndexScheme::CspSlots { k, .. } => k + 2,
            _ => 1,
        }
    }

    /// Number of vertex groups.
    pub fn units(&self) -> usize {
        binom(self.n() as u64, self.arity() as u64) as usize
    }

    /// Coordinate count N.
    pub fn len(&self) -> usize {
        self.units() * self.fields()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unit_of(&self, coord: usize) -> usize {
        coord / self.fields()
    }

    pub fn unit_vertices(&self, unit: usize) -> Vec<u32> {
        colex_unrank(unit, self.arity())
    }

    /// Group index of a sorted vertex tuple.
    pub fn unit_index(&self, vertices: &[u32]) -> Result<usize> {
        if vertices.len() != self.arity()
            || vertices.windows(2).any(|w| w[0] >= w[1])
            || vertices.last().is_some_and(|&v| v as usize >= self.n())
        {
            return Err(Error::InvalidArgument(format!(
                "{vertices:?} is not a sorted {}-subset of [{}]",
                self.arity(),
                self.n()
            )));
        }
        Ok(colex_rank(vertices))
    }

    pub fn label(&self) -> String {
        match *self {
            IndexScheme::GraphEdges { n } => format!("graph-edges({n})"),
            IndexScheme::KSubsets { n, k } => format!("k-subsets({n},{k})"),
            IndexScheme::SymmetricMatrix { n } => format!("symmetric-matrix({n})"),
            IndexScheme::CspSlots { n, k } => format!("csp-slots({n},{k})"),
        }
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.clone())
    }
}

/// Precomputed vertex lists (and bitmasks when `n <= 64`) for every group.
#[derive(Clone, Debug)]
pub struct Layout {
    pub scheme: IndexScheme,
    pub n: usize,
    pub arity: usize,
    pub fields: usize,
    verts: Vec<u32>,
    masks: Vec<u64>,
}

impl Layout {
    pub fn new(scheme: IndexScheme) -> Self {
        let n = scheme.n();
        let arity = scheme.arity();
        let units = scheme.units();
        let mut verts = Vec::with_capacity(units * arity);
        for subset in crate::combin::colex_subsets(n, arity) {
            verts.extend_from_slice(&subset);
        }
        let masks = if n <= 64 {
            verts
                .chunks(arity)
                .map(|c| c.iter().fold(0u64, |m, &v| m | (1u64 << v)))
                .collect()
        } else {
            Vec::new()
        };
        Layout {
            fields: scheme.fields(),
            scheme,
            n,
            arity,
            verts,
            masks,
        }
    }

    pub fn units(&self) -> usize {
        self.verts.len() / self.arity.max(1)
    }

    pub fn len(&self) -> usize {
        self.units() * self.fields
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unit_vertices(&self, unit: usize) -> &[u32] {
        &self.verts[unit * self.arity..(unit + 1) * self.arity]
    }

    pub fn coord_vertices(&self, coord: usize) -> &[u32] {
        self.unit_vertices(coord / self.fields)
    }

    /// Vertex bitmask of a group; requires `n <= 64`.
    pub fn unit_mask(&self, unit: usize) -> u64 {
        self.masks[unit]
    }

    pub fn has_masks(&self) -> bool {
        !self.masks.is_empty() || self.units() == 0
    }

    pub fn unit_masks(&self) -> &[u64] {
        &self.masks
    }
}
