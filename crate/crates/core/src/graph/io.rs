//! Text formats: whitespace-separated columns, `#` starts a comment.
//!
//! - edges: `src dst [weight]` (weight defaults to 1.0). A line holding a
//!   single name declares a node without adding an edge.
//! - seeds: `node label [score]`, score > 0, default 1.0.
//! - gold: `node label`.
//! - node lists: one node per line.

use std::io::BufRead;

use indexmap::IndexSet;

use super::{Graph, GraphError, SeedSet};

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String), GraphError>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(GraphError::Io(e))),
        Ok(line) => {
            let body = match line.find('#') {
                Some(p) => &line[..p],
                None => &line[..],
            };
            let body = body.trim();
            if body.is_empty() {
                None
            } else {
                Some(Ok((i + 1, body.to_string())))
            }
        }
    })
}

fn parse_weight(field: Option<&str>, line: usize, what: &str) -> Result<f64, GraphError> {
    match field {
        None => Ok(1.0),
        Some(s) => s.parse::<f64>().map_err(|_| GraphError::Parse {
            line,
            reason: format!("{what} {s:?} is not a number"),
        }),
    }
}

/// Whitespace-separated records of `min..=max` fields, with 1-based line
/// numbers, for formats without a fixed node universe.
pub fn read_records<R: BufRead>(reader: R, min: usize, max: usize) -> Result<Vec<(usize, Vec<String>)>, GraphError> {
    let mut out = Vec::new();
    for item in content_lines(reader) {
        let (line, body) = item?;
        let fields: Vec<String> = body.split_whitespace().map(str::to_string).collect();
        if fields.len() < min || fields.len() > max {
            return Err(GraphError::Parse { line, reason: format!("expected {min} to {max} fields, got {}", fields.len()) });
        }
        out.push((line, fields));
    }
    Ok(out)
}

/// Reads an edge list. Duplicate edges are summed and, when `undirected`,
/// each edge is stored in both directions.
pub fn load_edges<R: BufRead>(reader: R, undirected: bool) -> Result<Graph, GraphError> {
    let mut names: IndexSet<String> = IndexSet::new();
    let mut edges = Vec::new();
    for item in content_lines(reader) {
        let (line, body) = item?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields.as_slice() {
            [node] => {
                names.insert(node.to_string());
            }
            [src, dst, rest @ ..] if rest.len() <= 1 => {
                let w = parse_weight(rest.first().copied(), line, "weight")?;
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(GraphError::Parse {
                        line,
                        reason: format!("edge weight must be finite and non-negative, got {w}"),
                    });
                }
                let (u, _) = names.insert_full(src.to_string());
                let (v, _) = names.insert_full(dst.to_string());
                edges.push((u, v, w));
            }
            _ => {
                return Err(GraphError::Parse {
                    line,
                    reason: format!("expected `src dst [weight]`, got {} fields", fields.len()),
                })
            }
        }
    }
    Graph::from_named_edges(names, edges, undirected)
}

/// Reads seed labels for nodes of `graph`, interning labels in order of
/// first appearance.
pub fn load_seeds<R: BufRead>(reader: R, graph: &Graph) -> Result<SeedSet, GraphError> {
    let mut labels: IndexSet<String> = IndexSet::new();
    let mut entries = Vec::new();
    for item in content_lines(reader) {
        let (line, body) = item?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        let (node, label, score) = match fields.as_slice() {
            [n, l] => (*n, *l, 1.0),
            [n, l, s] => (*n, *l, parse_weight(Some(s), line, "score")?),
            _ => {
                return Err(GraphError::Parse {
                    line,
                    reason: format!("expected `node label [score]`, got {} fields", fields.len()),
                })
            }
        };
        let v = graph.node_id(node).ok_or_else(|| GraphError::UnknownNode(node.to_string()))?;
        if !(score > 0.0) || !score.is_finite() {
            return Err(GraphError::Parse { line, reason: format!("seed score must be positive, got {score}") });
        }
        let (l, _) = labels.insert_full(label.to_string());
        entries.push((v, l as u32, score));
    }
    SeedSet::new(graph.node_count(), labels, entries)
}

/// Gold labels by node. Names not in the label vocabulary are skipped with
/// a warning, as they can never be ranked.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GoldLabels {
    pub pairs: Vec<(usize, u32)>,
}

impl GoldLabels {
    pub fn labels_of(&self, v: usize) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().filter(move |p| p.0 == v).map(|p| p.1)
    }

    /// Gold labels grouped per node, indexed by node id.
    pub fn by_node(&self, n: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); n];
        for &(v, l) in &self.pairs {
            if !out[v].contains(&l) {
                out[v].push(l);
            }
        }
        out
    }
}

pub fn load_gold<R: BufRead>(reader: R, graph: &Graph, labels: &IndexSet<String>) -> Result<GoldLabels, GraphError> {
    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for item in content_lines(reader) {
        let (line, body) = item?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [node, label] = fields.as_slice() else {
            return Err(GraphError::Parse { line, reason: "expected `node label`".into() });
        };
        let v = graph.node_id(node).ok_or_else(|| GraphError::UnknownNode(node.to_string()))?;
        match labels.get_index_of(*label) {
            Some(l) => pairs.push((v, l as u32)),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} gold pair(s) whose label is outside the vocabulary");
    }
    Ok(GoldLabels { pairs })
}

pub fn load_node_list<R: BufRead>(reader: R, graph: &Graph) -> Result<Vec<usize>, GraphError> {
    let mut out = Vec::new();
    for item in content_lines(reader) {
        let (line, body) = item?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [node] = fields.as_slice() else {
            return Err(GraphError::Parse { line, reason: "expected one node per line".into() });
        };
        out.push(graph.node_id(node).ok_or_else(|| GraphError::UnknownNode(node.to_string()))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(text: &str) -> Result<Graph, GraphError> {
        load_edges(text.as_bytes(), true)
    }

    #[test]
    fn records_count_fields() {
        let recs = read_records("a b\n# x\nc d e\n".as_bytes(), 2, 3).unwrap();
        assert_eq!(recs, vec![(1, vec!["a".into(), "b".into()]), (3, vec!["c".into(), "d".into(), "e".into()])]);
        assert!(matches!(read_records("a\n".as_bytes(), 2, 3), Err(GraphError::Parse { line: 1, .. })));
    }

    #[test]
    fn two_edges() {
        let g = edges("a b 1.0\nb\tc\t2.0\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.degree(g.node_id("b").unwrap()), 3.0);
    }

    #[test]
    fn empty_and_comments() {
        assert_eq!(edges("").unwrap().node_count(), 0);
        let g = edges("# header\n\na b # trailing\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.degree(0), 1.0);
    }

    #[test]
    fn negative_weight_names_the_line() {
        match edges("a b -1") {
            Err(GraphError::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match edges("a b 1\nc d e f") {
            Err(GraphError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(edges("a b x"), Err(GraphError::Parse { line: 1, .. })));
    }

    #[test]
    fn duplicates_sum() {
        let g = edges("a b 1\na b 2\nb a 0.5").unwrap();
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![(1, 3.5)]);
    }

    #[test]
    fn write_then_load_is_identical() {
        let text = "x y 1\nq r 2\nx q 0.5\nr z 3\nlonely\n";
        let g = edges(text).unwrap();
        let mut buf = Vec::new();
        g.write_edges(&mut buf).unwrap();
        let back = edges(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, g);

        let d = load_edges(text.as_bytes(), false).unwrap();
        let mut buf = Vec::new();
        d.write_edges(&mut buf).unwrap();
        assert_eq!(load_edges(&buf[..], false).unwrap(), d);
    }

    #[test]
    fn seeds_distinct_labels() {
        let g = edges("a b\nb c").unwrap();
        let s = load_seeds("a A\nb B 1\nc C\n".as_bytes(), &g).unwrap();
        assert_eq!(s.num_labels(), 3);
        assert_eq!(s.k_sparsity(), 1.0);
        assert_eq!(s.seed_node_count(), 3);
    }

    #[test]
    fn node_with_two_labels_is_two_sparse() {
        let g = edges("a b\nb c").unwrap();
        let s = load_seeds("a A 1\na B 1\nc A\n".as_bytes(), &g).unwrap();
        assert_eq!(s.k_sparsity(), 2.0);
        assert_eq!(s.num_labels(), 2);
    }

    #[test]
    fn self_injection_protocol() {
        let text: String = (0..10).map(|i| format!("n{i} n{}\n", (i + 1) % 10)).collect();
        let g = edges(&text).unwrap();
        let seeds: String = (0..10).map(|i| format!("n{i} own{i}\n")).collect();
        let s = load_seeds(seeds.as_bytes(), &g).unwrap();
        assert_eq!((s.num_labels(), s.seed_node_count(), s.k_sparsity()), (10, 10, 1.0));
    }

    #[test]
    fn seed_errors() {
        let g = edges("a b").unwrap();
        assert!(matches!(load_seeds("zz A".as_bytes(), &g), Err(GraphError::UnknownNode(n)) if n == "zz"));
        assert!(matches!(load_seeds("a A 0".as_bytes(), &g), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(load_seeds("a A -2".as_bytes(), &g), Err(GraphError::Parse { line: 1, .. })));
    }

    #[test]
    fn gold_and_node_lists() {
        let g = edges("a b\nb c").unwrap();
        let labels: IndexSet<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let gold = load_gold("a A\nb B\nc Z\n".as_bytes(), &g, &labels).unwrap();
        assert_eq!(gold.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(gold.by_node(3), vec![vec![0], vec![1], vec![]]);
        assert_eq!(load_node_list("c\na\n".as_bytes(), &g).unwrap(), vec![2, 0]);
        assert!(load_node_list("nope\n".as_bytes(), &g).is_err());
    }
}
