//! Hypergraphs: validated construction, random generation, size-based
//! partitioning, co-membership matrices and the JSON file format.

mod comembership;
mod generate;
mod io;

pub use comembership::{comembership, comembership_with, family_comembership, CoMembershipMatrix};
pub use generate::{generate_random, SizeSpec, SizesDisplay};
pub use io::{from_json_str, load, save, to_json_string};

use crate::error::{Error, Result};

/// Family identifier; families are numbered from 1.
pub type FamilyId = u32;

/// A node count plus an ordered multiset of hyperedges.
///
/// Hyperedges are stored as sorted id lists. Duplicate hyperedges are kept
/// and each copy contributes separately to every rate and count.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
    families: Option<Vec<FamilyId>>,
    /// `incidence[i]` lists the indices of edges containing node `i`.
    incidence: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Validates and builds a hypergraph. Edges keep their input order;
    /// member ids within an edge are sorted.
    pub fn build(
        n: usize,
        edges: Vec<Vec<usize>>,
        families: Option<Vec<FamilyId>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("hypergraph needs at least one node".into()));
        }
        let mut sorted_edges = Vec::with_capacity(edges.len());
        for (idx, mut edge) in edges.into_iter().enumerate() {
            if edge.len() < 2 {
                return Err(Error::InvalidEdge {
                    edge: idx,
                    reason: format!("size {} is below the minimum of 2", edge.len()),
                });
            }
            if let Some(&bad) = edge.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidEdge {
                    edge: idx,
                    reason: format!("node id {bad} is out of range for n = {n}"),
                });
            }
            edge.sort_unstable();
            if let Some(w) = edge.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidEdge {
                    edge: idx,
                    reason: format!("node id {} appears more than once", w[0]),
                });
            }
            sorted_edges.push(edge);
        }
        if let Some(fam) = &families {
            if fam.len() != sorted_edges.len() {
                return Err(Error::Validation(format!(
                    "family assignment covers {} edges but the hypergraph has {}",
                    fam.len(),
                    sorted_edges.len()
                )));
            }
            if let Some(idx) = fam.iter().position(|&s| s == 0) {
                return Err(Error::InvalidEdge {
                    edge: idx,
                    reason: "family ids start at 1".into(),
                });
            }
        }
        let mut incidence = vec![Vec::new(); n];
        for (h, edge) in sorted_edges.iter().enumerate() {
            for &i in edge {
                incidence[i].push(h);
            }
        }
        Ok(Hypergraph {
            n,
            edges: sorted_edges,
            families,
            incidence,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge(&self, h: usize) -> &[usize] {
        &self.edges[h]
    }

    /// Edges containing node `i`, by index.
    pub fn edges_of(&self, i: usize) -> &[usize] {
        &self.incidence[i]
    }

    /// Largest hyperedge size, or 0 with no edges.
    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn families(&self) -> Option<&[FamilyId]> {
        self.families.as_deref()
    }

    pub fn family_of(&self, h: usize) -> Option<FamilyId> {
        self.families.as_ref().map(|f| f[h])
    }

    /// Number of families, i.e. the largest family id in use (0 if untagged).
    pub fn family_count(&self) -> usize {
        self.families
            .as_ref()
            .and_then(|f| f.iter().max().copied())
            .unwrap_or(0) as usize
    }

    /// Returns a copy with every edge of size `k` tagged as family `k - 1`,
    /// so pairwise edges form family 1, triangles family 2, and so on.
    pub fn partition_by_size(&self) -> Hypergraph {
        let families = self
            .edges
            .iter()
            .map(|e| (e.len() - 1) as FamilyId)
            .collect();
        Hypergraph {
            families: Some(families),
            ..self.clone()
        }
    }

    /// Returns a copy with the given family tags.
    pub fn with_families(&self, families: Vec<FamilyId>) -> Result<Hypergraph> {
        Hypergraph::build(self.n, self.edges.clone(), Some(families))
    }

    /// Returns a copy with one more edge appended. Only untagged hypergraphs
    /// can grow this way.
    pub fn with_edge(&self, edge: Vec<usize>) -> Result<Hypergraph> {
        if self.families.is_some() {
            return Err(Error::Validation(
                "appending to a family-tagged hypergraph needs a family id".into(),
            ));
        }
        let mut edges = self.edges.clone();
        edges.push(edge);
        Hypergraph::build(self.n, edges, None)
    }

    /// Counts of edges per size, ascending by size.
    pub fn size_histogram(&self) -> Vec<(usize, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for e in &self.edges {
            *counts.entry(e.len()).or_insert(0usize) += 1;
        }
        counts.into_iter().collect()
    }
}
