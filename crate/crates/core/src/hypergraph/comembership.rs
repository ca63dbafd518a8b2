use super::Hypergraph;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, StorageKind};

/// Symmetric matrix whose `(i, j)` entry counts the hyperedges containing
/// both `i` and `j`; the diagonal counts the hyperedges containing `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoMembershipMatrix(Matrix);

impl CoMembershipMatrix {
    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.0.get(i, j) as u64
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

fn accumulate<'a>(
    n: usize,
    edges: impl Iterator<Item = &'a Vec<usize>>,
    kind: StorageKind,
) -> CoMembershipMatrix {
    let triplets = edges.flat_map(|edge| {
        edge.iter()
            .flat_map(move |&i| edge.iter().map(move |&j| (i, j, 1.0)))
    });
    CoMembershipMatrix(Matrix::from_triplets(n, triplets, kind))
}

/// Builds `W` for the whole hypergraph, using dense storage up to
/// [`crate::matrix::DENSE_LIMIT`] nodes and sparse above.
pub fn comembership(hg: &Hypergraph) -> CoMembershipMatrix {
    comembership_with(hg, StorageKind::for_size(hg.node_count()))
}

pub fn comembership_with(hg: &Hypergraph, kind: StorageKind) -> CoMembershipMatrix {
    accumulate(hg.node_count(), hg.edges().iter(), kind)
}

/// Builds one `W^(s)` per family `s = 1..=S`, in family order. Families
/// without edges yield zero matrices.
pub fn family_comembership(hg: &Hypergraph) -> Result<Vec<CoMembershipMatrix>> {
    let families = hg.families().ok_or_else(|| {
        Error::Validation("hypergraph has no family assignment".into())
    })?;
    let kind = StorageKind::for_size(hg.node_count());
    let count = hg.family_count();
    Ok((1..=count as u32)
        .map(|s| {
            let edges = hg
                .edges()
                .iter()
                .zip(families)
                .filter(move |(_, &f)| f == s)
                .map(|(e, _)| e);
            accumulate(hg.node_count(), edges, kind)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_gives_all_ones() {
        let hg = Hypergraph::build(3, vec![vec![0, 1, 2]], None).unwrap();
        let w = comembership(&hg);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(w.count(i, j), 1);
            }
        }
    }

    #[test]
    fn multiset_counting() {
        let hg = Hypergraph::build(2, vec![vec![0, 1], vec![0, 1]], None).unwrap();
        let w = comembership(&hg);
        assert_eq!(w.count(0, 1), 2);
        assert_eq!(w.count(0, 0), 2);
        assert_eq!(w.count(1, 1), 2);
    }

    #[test]
    fn empty_edge_list_gives_zero() {
        let hg = Hypergraph::build(4, vec![], None).unwrap();
        assert!(comembership(&hg).as_matrix().is_zero());
    }

    #[test]
    fn two_families_are_additive() {
        let hg = Hypergraph::build(2, vec![vec![0, 1], vec![0, 1]], Some(vec![1, 2])).unwrap();
        let ws = family_comembership(&hg).unwrap();
        assert_eq!(ws.len(), 2);
        assert_eq!(ws[0].count(0, 1), 1);
        assert_eq!(ws[1].count(0, 1), 1);
        assert_eq!(comembership(&hg).count(0, 1), 2);
    }

    #[test]
    fn single_family_equals_full_matrix() {
        let hg = Hypergraph::build(4, vec![vec![0, 1], vec![1, 2, 3]], Some(vec![1, 1])).unwrap();
        let ws = family_comembership(&hg).unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0], comembership(&hg));
    }

    #[test]
    fn partition_by_size_gives_one_matrix_per_size_class() {
        let hg = Hypergraph::build(
            5,
            vec![vec![0, 1], vec![1, 2, 3], vec![0, 2, 4], vec![0, 1, 2, 3, 4]],
            None,
        )
        .unwrap()
        .partition_by_size();
        let ws = family_comembership(&hg).unwrap();
        // sizes 2, 3, 5 -> families 1, 2, 4; family 3 (size 4) is empty
        assert_eq!(ws.len(), 4);
        assert_eq!(ws[0].count(0, 1), 1);
        assert_eq!(ws[1].count(2, 2), 2);
        assert!(ws[2].as_matrix().is_zero());
        assert_eq!(ws[3].count(0, 4), 1);
    }

    #[test]
    fn untagged_family_request_fails() {
        let hg = Hypergraph::build(2, vec![vec![0, 1]], None).unwrap();
        assert!(family_comembership(&hg).is_err());
    }

    #[test]
    fn sparse_storage_matches_dense() {
        let hg = Hypergraph::build(5, vec![vec![0, 1, 4], vec![1, 2], vec![1, 2]], None).unwrap();
        let d = comembership_with(&hg, StorageKind::Dense);
        let s = comembership_with(&hg, StorageKind::Sparse);
        assert_eq!(d.as_matrix().to_dense_vec(), s.as_matrix().to_dense_vec());
    }
}
