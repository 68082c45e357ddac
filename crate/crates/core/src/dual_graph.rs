//! Weighted dual graphs of curve configurations on a smooth surface.
//!
//! Vertices are either exceptional curves of a minimal resolution
//! (self-intersection at most −2) or components of the curve germ
//! (self-intersection exactly −1). The text format is one directive per line:
//!
//! ```text
//! # comment
//! vertex <id> kind=exc|comp self=<integer>
//! edge <id> <id>
//! ```

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::{BigInt, Sign};
use serde::Serialize;
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Exceptional,
    Component,
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VertexKind::Exceptional => "exc",
            VertexKind::Component => "comp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vertex {
    pub id: String,
    pub kind: VertexKind,
    pub self_int: i64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown keyword `{keyword}`")]
    UnknownKeyword { line: usize, keyword: String },
    #[error("line {line}: duplicate vertex id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: self-intersection {self_int} out of range for {kind} vertex `{id}`")]
    SelfIntOutOfRange {
        line: usize,
        id: String,
        kind: VertexKind,
        self_int: i64,
    },
    #[error("line {line}: loop at `{id}`")]
    Loop { line: usize, id: String },
    #[error("line {line}: repeated edge `{a}`–`{b}`")]
    MultiEdge { line: usize, a: String, b: String },
    #[error("line {line}: unknown vertex `{id}`")]
    UnknownVertex { line: usize, id: String },
    #[error("line {line}: graph is disconnected (`{id}` is unreachable from the first vertex)")]
    Disconnected { line: usize, id: String },
    #[error("line {line}: graph has no vertices")]
    Empty { line: usize },
    #[error("unknown vertex id `{0}`")]
    UnknownId(String),
}

/// A validated, simple, connected weighted graph. Vertex order is input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigGraph {
    vertices: Vec<Vertex>,
    adj: Vec<BTreeSet<usize>>,
    index: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterShape {
    Chain,
    Fork,
    Other,
}

impl fmt::Display for ClusterShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterShape::Chain => "chain",
            ClusterShape::Fork => "fork",
            ClusterShape::Other => "other",
        })
    }
}

/// A connected component of the exceptional subgraph.
///
/// For chains the vertices are listed along the path, starting from the end
/// that comes first in input order; otherwise they are in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub vertices: Vec<usize>,
    pub shape: ClusterShape,
}

/// Symmetric integer matrix over an ordered list of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionMatrix {
    pub ids: Vec<String>,
    pub entries: Vec<Vec<i64>>,
}

impl IntersectionMatrix {
    pub fn from_entries(entries: Vec<Vec<i64>>) -> Self {
        let ids = (0..entries.len()).map(|i| format!("x{i}")).collect();
        IntersectionMatrix { ids, entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn to_bigint(&self) -> Vec<Vec<BigInt>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    pub fn leading_minors(&self) -> Vec<BigInt> {
        linalg::leading_minors(&self.to_bigint())
    }
}

fn check_range(kind: VertexKind, self_int: i64) -> bool {
    match kind {
        VertexKind::Exceptional => self_int <= -2,
        VertexKind::Component => self_int == -1,
    }
}

impl ConfigGraph {
    /// Builds a graph from parts, applying the same validation as the parser
    /// (line numbers are reported as 0).
    pub fn from_parts(
        vertices: Vec<Vertex>,
        edges: &[(String, String)],
    ) -> Result<Self, GraphError> {
        let mut b = Builder::default();
        for v in vertices {
            b.add_vertex(0, v)?;
        }
        for (x, y) in edges {
            b.add_edge(0, x, y)?;
        }
        b.finish(0)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i].iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(&j)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Edges as id pairs, each listed once in input order of the first endpoint.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for &j in &self.adj[i] {
                if i < j {
                    out.push((self.vertices[i].id.clone(), self.vertices[j].id.clone()));
                }
            }
        }
        out
    }

    pub fn component_vertices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.vertices[i].kind == VertexKind::Component)
            .collect()
    }

    pub fn ids(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.vertices[i].id.clone()).collect()
    }

    /// Renders the graph back into the text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            s.push_str(&format!(
                "vertex {} kind={} self={}\n",
                v.id, v.kind, v.self_int
            ));
        }
        for (a, b) in self.edges() {
            s.push_str(&format!("edge {a} {b}\n"));
        }
        s
    }
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Vertex>,
    lines: Vec<usize>,
    adj: Vec<BTreeSet<usize>>,
    index: BTreeMap<String, usize>,
}

impl Builder {
    fn add_vertex(&mut self, line: usize, v: Vertex) -> Result<(), GraphError> {
        if self.index.contains_key(&v.id) {
            return Err(GraphError::DuplicateId { line, id: v.id });
        }
        if !check_range(v.kind, v.self_int) {
            return Err(GraphError::SelfIntOutOfRange {
                line,
                id: v.id,
                kind: v.kind,
                self_int: v.self_int,
            });
        }
        self.index.insert(v.id.clone(), self.vertices.len());
        self.vertices.push(v);
        self.lines.push(line);
        self.adj.push(BTreeSet::new());
        Ok(())
    }

    fn add_edge(&mut self, line: usize, a: &str, b: &str) -> Result<(), GraphError> {
        let lookup = |id: &str| {
            self.index
                .get(id)
                .copied()
                .ok_or_else(|| GraphError::UnknownVertex {
                    line,
                    id: id.to_string(),
                })
        };
        let (i, j) = (lookup(a)?, lookup(b)?);
        if i == j {
            return Err(GraphError::Loop {
                line,
                id: a.to_string(),
            });
        }
        if !self.adj[i].insert(j) {
            return Err(GraphError::MultiEdge {
                line,
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        self.adj[j].insert(i);
        Ok(())
    }

    fn finish(self, last_line: usize) -> Result<ConfigGraph, GraphError> {
        if self.vertices.is_empty() {
            return Err(GraphError::Empty {
                line: last_line.max(1),
            });
        }
        let seen = bfs(&self.adj, 0, |_| true);
        if let Some(i) = (0..self.vertices.len()).find(|&i| !seen[i]) {
            return Err(GraphError::Disconnected {
                line: self.lines[i],
                id: self.vertices[i].id.clone(),
            });
        }
        Ok(ConfigGraph {
            vertices: self.vertices,
            adj: self.adj,
            index: self.index,
        })
    }
}

fn bfs(adj: &[BTreeSet<usize>], start: usize, allowed: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] && allowed(w) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

fn valid_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_id(line: usize, s: &str) -> Result<String, GraphError> {
    if valid_id(s) {
        Ok(s.to_string())
    } else {
        Err(GraphError::Syntax {
            line,
            message: format!("invalid vertex id `{s}`"),
        })
    }
}

/// Parses and validates the graph text format.
pub fn parse_graph(text: &str) -> Result<ConfigGraph, GraphError> {
    let mut b = Builder::default();
    let mut last = 0;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        last = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "vertex" => {
                if toks.len() != 4 {
                    return Err(GraphError::Syntax {
                        line,
                        message: "expected `vertex <id> kind=exc|comp self=<int>`".into(),
                    });
                }
                let id = parse_id(line, toks[1])?;
                let kind = match toks[2] {
                    "kind=exc" => VertexKind::Exceptional,
                    "kind=comp" => VertexKind::Component,
                    other => {
                        return Err(GraphError::Syntax {
                            line,
                            message: format!("bad kind field `{other}`"),
                        })
                    }
                };
                let self_int = toks[3]
                    .strip_prefix("self=")
                    .and_then(|v| v.parse::<i64>().ok())
                    .ok_or_else(|| GraphError::Syntax {
                        line,
                        message: format!("bad self field `{}`", toks[3]),
                    })?;
                b.add_vertex(line, Vertex { id, kind, self_int })?;
            }
            "edge" => {
                if toks.len() != 3 {
                    return Err(GraphError::Syntax {
                        line,
                        message: "expected `edge <id> <id>`".into(),
                    });
                }
                let x = parse_id(line, toks[1])?;
                let y = parse_id(line, toks[2])?;
                b.add_edge(line, &x, &y)?;
            }
            other => {
                return Err(GraphError::UnknownKeyword {
                    line,
                    keyword: other.to_string(),
                })
            }
        }
    }
    b.finish(last)
}

/// Connected and acyclic.
pub fn is_tree(g: &ConfigGraph) -> bool {
    g.edge_count() + 1 == g.len()
}

/// Connected components of the exceptional subgraph with their shapes.
pub fn exceptional_clusters(g: &ConfigGraph) -> Vec<Cluster> {
    let exc = |i: usize| g.vertices[i].kind == VertexKind::Exceptional;
    let mut assigned = vec![false; g.len()];
    let mut out = Vec::new();
    for s in 0..g.len() {
        if !exc(s) || assigned[s] {
            continue;
        }
        let seen = bfs(&g.adj, s, exc);
        let members: Vec<usize> = (0..g.len()).filter(|&i| seen[i]).collect();
        for &i in &members {
            assigned[i] = true;
        }
        out.push(shape_cluster(g, members));
    }
    out
}

fn shape_cluster(g: &ConfigGraph, members: Vec<usize>) -> Cluster {
    let inside: BTreeSet<usize> = members.iter().copied().collect();
    let deg = |v: usize| g.adj[v].iter().filter(|w| inside.contains(w)).count();
    let edges: usize = members.iter().map(|&v| deg(v)).sum::<usize>() / 2;
    let tree = edges + 1 == members.len();
    let max_deg = members.iter().map(|&v| deg(v)).max().unwrap_or(0);
    if tree && max_deg <= 2 {
        // Walk the path from the end that appears first in input order.
        let start = *members
            .iter()
            .find(|&&v| deg(v) <= 1)
            .expect("a path has an end");
        let mut path = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(next) = g.adj[cur]
            .iter()
            .copied()
            .find(|w| inside.contains(w) && *w != prev)
        {
            path.push(next);
            prev = cur;
            cur = next;
        }
        return Cluster {
            vertices: path,
            shape: ClusterShape::Chain,
        };
    }
    let branch = members.iter().filter(|&&v| deg(v) >= 3).count();
    let shape = if tree && max_deg == 3 && branch == 1 {
        ClusterShape::Fork
    } else {
        ClusterShape::Other
    };
    Cluster {
        vertices: members,
        shape,
    }
}

/// Intersection matrix over the given ids, in the given order.
pub fn intersection_matrix(
    g: &ConfigGraph,
    ids: &[&str],
) -> Result<IntersectionMatrix, GraphError> {
    let idx = ids
        .iter()
        .map(|id| {
            g.index_of(id)
                .ok_or_else(|| GraphError::UnknownId(id.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(intersection_matrix_idx(g, &idx))
}

pub(crate) fn intersection_matrix_idx(g: &ConfigGraph, idx: &[usize]) -> IntersectionMatrix {
    let entries = idx
        .iter()
        .map(|&i| {
            idx.iter()
                .map(|&j| {
                    if i == j {
                        g.vertices[i].self_int
                    } else if g.has_edge(i, j) {
                        1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    IntersectionMatrix {
        ids: g.ids(idx),
        entries,
    }
}

/// Sylvester's criterion for negative definiteness:
/// `(−1)^k · (k-th leading minor) > 0` for every `k`.
pub fn is_negative_definite(m: &IntersectionMatrix) -> bool {
    m.leading_minors().iter().enumerate().all(|(k, d)| {
        let want = if k % 2 == 0 { Sign::Minus } else { Sign::Plus };
        d.sign() == want
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAR: &str = "\
vertex c kind=exc self=-2
vertex a kind=exc self=-4
vertex b kind=exc self=-4
vertex d kind=exc self=-2
edge c a
edge c b
edge c d
";

    #[test]
    fn single_vertex() {
        let g = parse_graph("vertex a kind=exc self=-4").unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.vertex(0).self_int, -4);
        assert!(is_tree(&g));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = parse_graph("vertex a kind=exc self=-2\nedge a a\n").unwrap_err();
        assert_eq!(
            e,
            GraphError::Loop {
                line: 2,
                id: "a".into()
            }
        );
        let e = parse_graph("vertex a kind=exc self=-2\nvertex a kind=exc self=-3\n").unwrap_err();
        assert!(matches!(e, GraphError::DuplicateId { line: 2, .. }));
        let e = parse_graph("vertex a kind=comp self=-2\n").unwrap_err();
        assert!(matches!(e, GraphError::SelfIntOutOfRange { line: 1, .. }));
        let e = parse_graph("vertex a kind=exc self=-1\n").unwrap_err();
        assert!(matches!(e, GraphError::SelfIntOutOfRange { line: 1, .. }));
        let e = parse_graph(
            "# c\nvertex a kind=exc self=-2\nvertex b kind=exc self=-2\nedge a b\nedge b a\n",
        )
        .unwrap_err();
        assert!(matches!(e, GraphError::MultiEdge { line: 5, .. }));
        let e =
            parse_graph("vertex a kind=exc self=-2\n\nvertex b kind=exc self=-2\n").unwrap_err();
        assert_eq!(
            e,
            GraphError::Disconnected {
                line: 3,
                id: "b".into()
            }
        );
        let e = parse_graph("vertex a kind=exc self=-2\nnode b\n").unwrap_err();
        assert!(matches!(e, GraphError::UnknownKeyword { line: 2, .. }));
        let e = parse_graph("").unwrap_err();
        assert!(matches!(e, GraphError::Empty { .. }));
        let e = parse_graph("vertex a kind=exc self=-2\nedge a z\n").unwrap_err();
        assert!(matches!(e, GraphError::UnknownVertex { line: 2, .. }));
    }

    #[test]
    fn star_minors_and_shape() {
        let g = parse_graph(STAR).unwrap();
        let cl = exceptional_clusters(&g);
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].shape, ClusterShape::Fork);
        let m = intersection_matrix(&g, &["c", "a", "b", "d"]).unwrap();
        // Hand expansion: −2; 8−1; −4·(−2−(−1/4)−(−1/4))·4; (−4)(−4)(−2)(−2+1/4+1/4+1/2).
        let minors: Vec<i64> = m
            .leading_minors()
            .iter()
            .map(|d| d.try_into().unwrap())
            .collect();
        assert_eq!(minors, vec![-2, 7, -24, 32]);
        assert!(is_negative_definite(&m));
    }

    #[test]
    fn triangle_is_not_tree_nor_definite() {
        let g = parse_graph(
            "vertex a kind=exc self=-2\nvertex b kind=exc self=-2\nvertex c kind=exc self=-2\nedge a b\nedge b c\nedge c a\n",
        )
        .unwrap();
        assert!(!is_tree(&g));
        let m = intersection_matrix(&g, &["a", "b", "c"]).unwrap();
        assert!(!is_negative_definite(&m));
        assert_eq!(exceptional_clusters(&g)[0].shape, ClusterShape::Other);
    }

    #[test]
    fn unknown_id_in_matrix() {
        let g = parse_graph(STAR).unwrap();
        assert_eq!(
            intersection_matrix(&g, &["zz"]).unwrap_err(),
            GraphError::UnknownId("zz".into())
        );
    }

    #[test]
    fn chain_is_walked_in_path_order() {
        let g = parse_graph(
            "vertex m kind=exc self=-5\nvertex l kind=exc self=-2\nvertex r kind=exc self=-3\nvertex x kind=comp self=-1\nedge l m\nedge m r\nedge x r\n",
        )
        .unwrap();
        let cl = exceptional_clusters(&g);
        assert_eq!(cl[0].shape, ClusterShape::Chain);
        assert_eq!(g.ids(&cl[0].vertices), vec!["l", "m", "r"]);
    }

    #[test]
    fn no_exceptional_vertices() {
        let g = parse_graph("vertex a kind=comp self=-1\n").unwrap();
        assert!(exceptional_clusters(&g).is_empty());
    }
}
