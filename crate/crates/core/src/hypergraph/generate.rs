use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Hypergraph;
use crate::error::{Error, Result};

/// Hyperedge counts per size plus the generator seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSpec {
    /// `(size, count)` pairs, generated in this order.
    pub sizes: Vec<(usize, usize)>,
    pub seed: u64,
}

impl SizeSpec {
    pub fn new(sizes: Vec<(usize, usize)>, seed: u64) -> Self {
        SizeSpec { sizes, seed }
    }

    pub fn total_edges(&self) -> usize {
        self.sizes.iter().map(|&(_, m)| m).sum()
    }

    /// Parses `"2:400,3:200"` into `(size, count)` pairs.
    pub fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
        s.split(',')
            .filter(|part| !part.trim().is_empty())
            .map(|part| {
                let (k, m) = part.trim().split_once(':').ok_or_else(|| {
                    Error::Validation(format!("size entry `{part}` is not of the form size:count"))
                })?;
                let k = k.trim().parse::<usize>().map_err(|e| {
                    Error::Validation(format!("bad size in `{part}`: {e}"))
                })?;
                let m = m.trim().parse::<usize>().map_err(|e| {
                    Error::Validation(format!("bad count in `{part}`: {e}"))
                })?;
                Ok((k, m))
            })
            .collect()
    }
}

/// Sizes only, formatted as `2:400,3:200`.
pub struct SizesDisplay<'a>(pub &'a [(usize, usize)]);

impl fmt::Display for SizesDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, (k, m)) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}:{m}")?;
        }
        Ok(())
    }
}

impl FromStr for SizeSpec {
    type Err = Error;

    /// Accepts `sizes` or `sizes@seed`.
    fn from_str(s: &str) -> Result<Self> {
        let (sizes, seed) = match s.split_once('@') {
            Some((sizes, seed)) => (
                sizes,
                seed.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Validation(format!("bad seed `{seed}`: {e}")))?,
            ),
            None => (s, 0),
        };
        Ok(SizeSpec::new(SizeSpec::parse_sizes(sizes)?, seed))
    }
}

/// Draws every hyperedge independently as `k` distinct nodes chosen
/// uniformly without replacement. Duplicates are kept.
pub fn generate_random(n: usize, spec: &SizeSpec) -> Result<Hypergraph> {
    if n == 0 {
        return Err(Error::Validation("hypergraph needs at least one node".into()));
    }
    for &(k, _) in &spec.sizes {
        if k < 2 {
            return Err(Error::Validation(format!("hyperedge size {k} is below 2")));
        }
        if k > n {
            return Err(Error::Validation(format!(
                "hyperedge size {k} exceeds the node count {n}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::with_capacity(spec.total_edges());
    for &(k, m) in &spec.sizes {
        for _ in 0..m {
            edges.push(rand::seq::index::sample(&mut rng, n, k).into_vec());
        }
    }
    Hypergraph::build(n, edges, None)
}
