//! JSON file format: `{"n": int, "edges": [[ids...], ...], "families": [int per edge]}`
//! with 0-based node ids and an optional `families` array.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::Hypergraph;
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HypergraphFile {
    n: usize,
    edges: Vec<Vec<usize>>,
    #[serde(default)]
    families: Option<Vec<Option<u32>>>,
}

/// Serializes with one edge per line so files diff cleanly.
pub fn to_json_string(hg: &Hypergraph) -> String {
    let mut out = String::new();
    writeln!(out, "{{").unwrap();
    writeln!(out, "  \"n\": {},", hg.node_count()).unwrap();
    if hg.edge_count() == 0 {
        write!(out, "  \"edges\": []").unwrap();
    } else {
        writeln!(out, "  \"edges\": [").unwrap();
        for (idx, edge) in hg.edges().iter().enumerate() {
            let ids: Vec<String> = edge.iter().map(usize::to_string).collect();
            let sep = if idx + 1 == hg.edge_count() { "" } else { "," };
            writeln!(out, "    [{}]{sep}", ids.join(", ")).unwrap();
        }
        write!(out, "  ]").unwrap();
    }
    if let Some(families) = hg.families() {
        let ids: Vec<String> = families.iter().map(u32::to_string).collect();
        write!(out, ",\n  \"families\": [{}]", ids.join(", ")).unwrap();
    }
    out.push_str("\n}\n");
    out
}

pub fn from_json_str(text: &str, origin: &Path) -> Result<Hypergraph> {
    let file: HypergraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let families = match file.families {
        None => None,
        Some(tags) => {
            if tags.len() != file.edges.len() {
                return Err(Error::Parse {
                    path: origin.to_path_buf(),
                    message: format!(
                        "field `families` has {} entries but `edges` has {}",
                        tags.len(),
                        file.edges.len()
                    ),
                });
            }
            let mut out = Vec::with_capacity(tags.len());
            for (idx, tag) in tags.into_iter().enumerate() {
                match tag {
                    Some(s) => out.push(s),
                    None => {
                        return Err(Error::Parse {
                            path: origin.to_path_buf(),
                            message: format!("field `families[{idx}]`: edge {idx} has no family tag"),
                        })
                    }
                }
            }
            Some(out)
        }
    };
    Hypergraph::build(file.n, file.edges, families)
}

pub fn save(hg: &Hypergraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(hg))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Hypergraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    from_json_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{generate_random, SizeSpec};

    fn parse(text: &str) -> Result<Hypergraph> {
        from_json_str(text, Path::new("<inline>"))
    }

    #[test]
    fn recipe_round_trip_through_file() {
        let hg = generate_random(
            400,
            &SizeSpec::new(vec![(2, 400), (3, 200), (4, 100), (5, 50)], 7),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hg.json");
        save(&hg, &path).unwrap();
        assert_eq!(load(&path).unwrap(), hg);

        let tagged = hg.partition_by_size();
        save(&tagged, &path).unwrap();
        assert_eq!(load(&path).unwrap(), tagged);
    }

    #[test]
    fn empty_edge_list_round_trips() {
        let hg = Hypergraph::build(3, vec![], None).unwrap();
        assert_eq!(parse(&to_json_string(&hg)).unwrap(), hg);
    }

    #[test]
    fn size_one_edge_is_rejected() {
        let err = parse(r#"{"n": 3, "edges": [[0, 1], [2]]}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidEdge { edge: 1, .. }), "{err}");
    }

    #[test]
    fn missing_family_tag_is_rejected() {
        let err = parse(r#"{"n": 3, "edges": [[0, 1], [1, 2]], "families": [1, null]}"#).unwrap_err();
        assert!(err.to_string().contains("families[1]"), "{err}");
        assert!(parse(r#"{"n": 3, "edges": [[0, 1], [1, 2]], "families": [1]}"#).is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse("{\n  \"n\": 3,\n  \"edges\": [[0, 1],\n}").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }
}
