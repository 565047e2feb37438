// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Text formats: whitespace edge lists, one-community-per-line cover files,
//! and the two-column id-map sidecar.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use super::{Cover, Graph, GraphError, NodeId};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Merge reciprocal arcs `a b` / `b a` into one undirected edge instead
    /// of rejecting the input as directed.
    pub symmetrize: bool,
}

/// Dense id to original label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdMap {
    labels: Vec<String>,
    index: BTreeMap<String, NodeId>,
}

impl IdMap {
    pub fn new(labels: Vec<String>) -> Result<Self, GraphError> {
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        Ok(IdMap { labels, index })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string()).collect()).expect("distinct labels")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.labels
            .iter()
            .enumerate()
            .all(|(i, l)| l.parse::<usize>() == Ok(i) && *l == i.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: IdMap,
}

fn text_of(bytes: &[u8]) -> Result<&str, GraphError> {
    std::str::from_utf8(bytes).map_err(|e| GraphError::Parse {
        line: 0,
        message: format!("input is not valid UTF-8: {e}"),
    })
}

/// Meaningful lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn load_graph(bytes: &[u8]) -> Result<LoadedGraph, GraphError> {
    load_graph_with(bytes, LoadOptions::default())
}

/// Parses an edge list: `a b [weight]` per line, `#` comments, and
/// single-token lines declaring (possibly isolated) nodes.
///
/// Labels are remapped to dense ids. When every label is a non-negative
/// integer the dense order follows numeric order, so files that already use
/// `0..n` keep their ids; otherwise labels are numbered by first appearance.
pub fn load_graph_with(bytes: &[u8], opts: LoadOptions) -> Result<LoadedGraph, GraphError> {
    let text = text_of(bytes)?;
    let mut order: Vec<&str> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut raw: Vec<(usize, usize, usize, f64)> = Vec::new();
    for (line, content) in content_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.len() {
            1 => {
                let t = tokens[0];
                if !seen.contains_key(t) {
                    seen.insert(t, order.len());
                    order.push(t);
                }
            }
            2 | 3 => {
                let (a, b) = (tokens[0], tokens[1]);
                if a == b {
                    return Err(GraphError::SelfLoop {
                        line,
                        label: a.to_string(),
                    });
                }
                let weight = match tokens.get(2) {
                    None => 1.0,
                    Some(t) => {
                        let w: f64 = t.parse().map_err(|_| GraphError::Parse {
                            line,
                            message: format!("weight `{t}` is not a number"),
                        })?;
                        if !(w.is_finite() && w > 0.0) {
                            return Err(GraphError::InvalidWeight { line, weight: w });
                        }
                        w
                    }
                };
                let mut ids = [0usize; 2];
                for (slot, t) in ids.iter_mut().zip([a, b]) {
                    *slot = match seen.get(t) {
                        Some(&i) => i,
                        None => {
                            seen.insert(t, order.len());
                            order.push(t);
                            order.len() - 1
                        }
                    };
                }
                raw.push((line, ids[0], ids[1], weight));
            }
            k => {
                return Err(GraphError::Parse {
                    line,
                    message: format!("expected 2 or 3 columns, found {k}"),
                })
            }
        }
    }

    // First-appearance index -> dense id.
    let numeric: Option<Vec<u64>> = order.iter().map(|l| l.parse::<u64>().ok()).collect();
    let remap: Vec<usize> = match numeric {
        Some(values) => {
            let mut by_value: Vec<usize> = (0..order.len()).collect();
            by_value.sort_by(|&x, &y| values[x].cmp(&values[y]).then(order[x].cmp(order[y])));
            let mut remap = vec![0; order.len()];
            for (dense, &first) in by_value.iter().enumerate() {
                remap[first] = dense;
            }
            remap
        }
        None => (0..order.len()).collect(),
    };
    let mut labels = vec![String::new(); order.len()];
    for (first, &dense) in remap.iter().enumerate() {
        labels[dense] = order[first].to_string();
    }

    let mut arcs: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::with_capacity(raw.len());
    for (line, a, b, w) in raw {
        let (u, v) = (remap[a], remap[b]);
        if !opts.symmetrize && arcs.contains(&(v, u)) {
            return Err(GraphError::Directed {
                line,
                label_a: labels[u].clone(),
                label_b: labels[v].clone(),
            });
        }
        arcs.insert((u, v));
        edges.push((u, v, w));
    }
    let graph = Graph::from_weighted_edges(labels.len(), edges)?;
    Ok(LoadedGraph {
        graph,
        ids: IdMap::new(labels)?,
    })
}

/// Canonical edge list in dense ids; a weight column is written only for
/// weighted graphs, isolated nodes as single-token lines.
pub fn write_graph(graph: &Graph) -> String {
    let mut out = String::new();
    let weighted = graph.is_weighted();
    for e in graph.edges() {
        if weighted {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
        } else {
            let _ = writeln!(out, "{} {}", e.u, e.v);
        }
    }
    for v in 0..graph.node_count() {
        if graph.degree(v) == 0 {
            let _ = writeln!(out, "{v}");
        }
    }
    out
}

/// Parses a cover file of dense node ids, one community per line.
pub fn load_cover(bytes: &[u8], n: usize) -> Result<Cover, GraphError> {
    let text = text_of(bytes)?;
    let mut communities = Vec::new();
    for (line, content) in content_lines(text) {
        let mut community = Vec::new();
        for t in content.split_whitespace() {
            let node: usize = t.parse().map_err(|_| GraphError::Parse {
                line,
                message: format!("node id `{t}` is not a non-negative integer"),
            })?;
            if node >= n {
                return Err(GraphError::OutOfRange { line, node, n });
            }
            community.push(node);
        }
        communities.push(community);
    }
    Cover::new(n, communities)
}

/// One community per line, ids ascending, communities ordered by smallest member.
pub fn write_cover(cover: &Cover) -> String {
    let mut out = String::new();
    for c in cover.canonical().communities() {
        let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Cover file whose tokens are labels (algorithm ids, original node labels).
pub fn load_labeled_cover(bytes: &[u8], ids: &IdMap) -> Result<Cover, GraphError> {
    let text = text_of(bytes)?;
    let mut communities = Vec::new();
    for (line, content) in content_lines(text) {
        let community = content
            .split_whitespace()
            .map(|t| {
                ids.id(t).ok_or_else(|| GraphError::Parse {
                    line,
                    message: format!("unknown label `{t}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        communities.push(community);
    }
    Cover::new(ids.len(), communities)
}

pub fn write_labeled_cover(cover: &Cover, ids: &IdMap) -> String {
    let mut out = String::new();
    for c in cover.canonical().communities() {
        let line: Vec<&str> = c.iter().map(|&v| ids.label(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Sidecar map: `original-label<TAB>dense-id`, one node per line.
pub fn write_id_map(ids: &IdMap) -> String {
    let mut out = String::new();
    for (i, l) in ids.labels().iter().enumerate() {
        let _ = writeln!(out, "{l}\t{i}");
    }
    out
}

pub fn read_id_map(bytes: &[u8]) -> Result<IdMap, GraphError> {
    let text = text_of(bytes)?;
    let mut pairs: Vec<(usize, String)> = Vec::new();
    for (line, content) in content_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let [label, dense] = tokens[..] else {
            return Err(GraphError::Parse {
                line,
                message: format!("expected 2 columns, found {}", tokens.len()),
            });
        };
        let dense: usize = dense.parse().map_err(|_| GraphError::Parse {
            line,
            message: format!("dense id `{dense}` is not a non-negative integer"),
        })?;
        pairs.push((dense, label.to_string()));
    }
    let n = pairs.len();
    let mut labels: Vec<Option<String>> = vec![None; n];
    for (k, (dense, label)) in pairs.into_iter().enumerate() {
        if dense >= n || labels[dense].is_some() {
            return Err(GraphError::Parse {
                line: k + 1,
                message: format!("dense ids must be a permutation of 0..{n}"),
            });
        }
        labels[dense] = Some(label);
    }
    IdMap::new(labels.into_iter().map(|l| l.expect("filled")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn path_graph() {
        let g = load_graph(b"0 1\n1 2\n").unwrap().graph;
        assert_eq!(g.node_count(), 3);
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
        assert!(!g.is_weighted());
    }

    #[test]
    fn duplicate_lines_sum_weights() {
        let g = load_graph(b"0 1\n0 1\n").unwrap().graph;
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_weight(0, 1), Some(2.0));
    }

    #[test]
    fn string_labels_remap_and_round_trip() {
        let loaded = load_graph(b"a b\n").unwrap();
        assert_eq!(loaded.ids.id("a"), Some(0));
        assert_eq!(loaded.ids.id("b"), Some(1));
        assert!(loaded.graph.has_edge(0, 1));
        let again = load_graph(write_graph(&loaded.graph).as_bytes()).unwrap();
        assert_eq!(again.graph, loaded.graph);
        let ids = read_id_map(write_id_map(&loaded.ids).as_bytes()).unwrap();
        assert_eq!(ids, loaded.ids);
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let loaded = load_graph(b"10 2\n2 7\n").unwrap();
        assert_eq!(loaded.ids.labels(), &["2", "7", "10"]);
        assert!(loaded.graph.has_edge(0, 2));
        assert!(loaded.graph.has_edge(0, 1));
    }

    #[test]
    fn isolated_nodes_and_comments() {
        let loaded = load_graph(b"# header\n0 1\n\n3\n").unwrap();
        assert_eq!(loaded.graph.node_count(), 3);
        assert_eq!(loaded.ids.labels(), &["0", "1", "3"]);
        let text = write_graph(&loaded.graph);
        assert_eq!(text, "0 1\n2\n");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            load_graph(b"0 0\n"),
            Err(GraphError::SelfLoop { line: 1, .. })
        ));
        assert!(matches!(
            load_graph(b"0 1\n1 2 x\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(load_graph(b"0 1 -2\n"), Err(GraphError::InvalidWeight { .. })));
        assert!(matches!(load_graph(b"0 1 0\n"), Err(GraphError::InvalidWeight { .. })));
        assert!(matches!(load_graph(b"0 1 2 3\n"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn reciprocal_arcs_need_symmetrize() {
        assert!(matches!(
            load_graph(b"0 1\n1 0\n"),
            Err(GraphError::Directed { line: 2, .. })
        ));
        let g = load_graph_with(b"0 1 1.5\n1 0 2\n", LoadOptions { symmetrize: true })
            .unwrap()
            .graph;
        assert_eq!(g.edge_weight(0, 1), Some(3.5));
    }

    #[test]
    fn cover_loading() {
        let c = load_cover(b"0 1\n2 3\n", 4).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.is_partition());

        let c = load_cover(b"0 1\n", 3).unwrap();
        assert_eq!(c.communities(), &[vec![0, 1], vec![2]]);

        let c = load_cover(b"0 1 2\n1 2 3\n", 4).unwrap();
        let s = c.memberships();
        assert_eq!((s[1], s[2]), (2, 2));

        let c = load_cover(b"", 3).unwrap();
        assert_eq!(c, Cover::singletons(3));

        assert!(matches!(
            load_cover(b"0 5\n", 3),
            Err(GraphError::OutOfRange { node: 5, .. })
        ));
        assert!(matches!(load_cover(b"0 x\n", 3), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn cover_writing_is_canonical() {
        let a = Cover::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let b = Cover::new(3, vec![vec![2], vec![1, 0]]).unwrap();
        assert_eq!(write_cover(&a), "0 1\n2\n");
        assert_eq!(write_cover(&b), "0 1\n2\n");
    }

    #[test]
    fn labeled_cover_round_trip() {
        let ids = IdMap::new(vec!["louvain".into(), "cnm".into(), "hlc".into()]).unwrap();
        let c = Cover::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let text = write_labeled_cover(&c, &ids);
        assert_eq!(text, "louvain cnm\ncnm hlc\n");
        assert!(load_labeled_cover(text.as_bytes(), &ids).unwrap().same_as(&c));
        assert!(load_labeled_cover(b"nope\n", &ids).is_err());
    }

    #[test]
    fn id_map_rejects_non_permutations() {
        assert!(read_id_map(b"a 0\nb 0\n").is_err());
        assert!(read_id_map(b"a 1\n").is_err());
        assert!(read_id_map(b"a 0\na 1\n").is_err());
    }

    fn arb_cover() -> impl Strategy<Value = Cover> {
        (1usize..30).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(0..n, 1..8), 0..8)
                .prop_map(move |cs| Cover::new(n, cs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn cover_round_trip(c in arb_cover()) {
            let back = load_cover(write_cover(&c).as_bytes(), c.node_count()).unwrap();
            prop_assert!(back.same_as(&c));
            let memberships: usize = c.memberships().iter().sum();
            prop_assert_eq!(memberships, c.total_membership());
        }

        #[test]
        fn canonical_serialization_is_idempotent(
            edges in prop::collection::vec((0u32..40, 0u32..40, 1u32..4), 0..60)
        ) {
            let mut text = String::new();
            for (a, b, w) in edges {
                if a != b {
                    text.push_str(&format!("{} {} {}\n", a.min(b), a.max(b), w));
                }
            }
            let first = load_graph(text.as_bytes()).unwrap().graph;
            let second = load_graph(write_graph(&first).as_bytes()).unwrap().graph;
            prop_assert_eq!(&first, &second);
            let third = load_graph(write_graph(&second).as_bytes()).unwrap().graph;
            prop_assert_eq!(second, third);
        }
    }
}
