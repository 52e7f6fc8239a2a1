//! Finite graphs with a chosen edge orientation, and their structural
//! matrices.
//!
//! Vertices and edges are indexed by their position in the input; every
//! matrix in the crate rows/columns against these orders, so results are
//! reproducible across runs. Self-loops are rejected (an incidence column
//! cannot carry both a -1 and a +1 on one vertex); parallel edges are
//! allowed.

use std::collections::{HashMap, VecDeque};

use num::One;

use crate::error::{Error, Result};
use crate::matrix::{rat, Rational, RationalMatrix};

/// A cell of the graph seen as a 1-complex: a vertex (0-cell) or an
/// oriented edge (1-cell).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cell {
    Vertex(usize),
    Edge(usize),
}

impl Cell {
    pub fn dimension(&self) -> usize {
        match self {
            Cell::Vertex(_) => 0,
            Cell::Edge(_) => 1,
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Cell::Vertex(i) | Cell::Edge(i) => *i,
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Vertex(i) => write!(f, "v{i}"),
            Cell::Edge(i) => write!(f, "e{i}"),
        }
    }
}

/// An oriented edge, stored as (tail, head) vertex indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    pub fn other_endpoint(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }

    pub fn has_endpoint(&self, v: usize) -> bool {
        v == self.tail || v == self.head
    }
}

/// A finite oriented graph. `vertex_labels` preserves the ids used in the
/// input file for reporting; all computation runs on indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_labels: Vec<u64>,
    edges: Vec<Edge>,
    /// Incident edge indices per vertex, in edge (file) order.
    incidence_lists: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph on `n` vertices labeled 0..n-1.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::with_labels((0..n as u64).collect(), edges)
    }

    pub fn with_labels(vertex_labels: Vec<u64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = vertex_labels.len();
        let mut parsed = Vec::with_capacity(edges.len());
        for (k, &(tail, head)) in edges.iter().enumerate() {
            if tail >= n || head >= n {
                return Err(Error::Precondition(format!(
                    "edge {k} references vertex index out of range"
                )));
            }
            if tail == head {
                return Err(Error::Precondition(format!(
                    "edge {k} is a self-loop at vertex {tail}"
                )));
            }
            parsed.push(Edge { tail, head });
        }
        let mut incidence_lists = vec![Vec::new(); n];
        for (k, e) in parsed.iter().enumerate() {
            incidence_lists[e.tail].push(k);
            incidence_lists[e.head].push(k);
        }
        Ok(Graph {
            vertex_labels,
            edges: parsed,
            incidence_lists,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn vertex_labels(&self) -> &[u64] {
        &self.vertex_labels
    }

    pub fn vertex_label(&self, v: usize) -> u64 {
        self.vertex_labels[v]
    }

    pub fn vertex_index(&self, label: u64) -> Option<usize> {
        self.vertex_labels.iter().position(|&l| l == label)
    }

    /// Incident edge indices at `v`, in file order.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incidence_lists[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence_lists[v].len()
    }

    /// True when no two edges join the same pair of vertices.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|e| {
            let key = (e.tail.min(e.head), e.tail.max(e.head));
            seen.insert(key)
        })
    }

    /// |V| x |V| 0/1 adjacency matrix: symmetric, zero diagonal. Parallel
    /// edges still give a 1.
    pub fn adjacency_matrix(&self) -> RationalMatrix {
        let n = self.vertex_count();
        let mut m = RationalMatrix::zeros(n, n);
        for e in &self.edges {
            m.set(e.tail, e.head, Rational::one());
            m.set(e.head, e.tail, Rational::one());
        }
        m
    }

    /// Diagonal matrix of vertex degrees (incident edge-endpoint counts).
    pub fn valence_matrix(&self) -> RationalMatrix {
        let n = self.vertex_count();
        let mut m = RationalMatrix::zeros(n, n);
        for v in 0..n {
            m.set(v, v, rat(self.degree(v) as i64));
        }
        m
    }

    /// |V| x |E| incidence matrix: -1 where the edge starts, +1 where it
    /// ends. Every column has exactly one -1 and one +1.
    pub fn incidence_matrix(&self) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(self.vertex_count(), self.edge_count());
        for (k, e) in self.edges.iter().enumerate() {
            m.set(e.tail, k, rat(-1));
            m.set(e.head, k, rat(1));
        }
        m
    }

    /// Vertex classes under connectivity (orientation ignored), ordered by
    /// smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut class = vec![start];
            comp[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &k in self.incident_edges(u) {
                    let w = self.edges[k].other_endpoint(u);
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        class.push(w);
                        queue.push_back(w);
                    }
                }
            }
            class.sort_unstable();
            classes.push(class);
        }
        classes
    }

    pub fn component_count(&self) -> usize {
        self.connected_components().len()
    }

    /// Number of independent cycles: |E| - |V| + #components.
    pub fn cycle_rank(&self) -> usize {
        self.edge_count() + self.component_count() - self.vertex_count()
    }

    /// Renders in the edge-list format with a `vertices N` header, edges
    /// as index pairs. Used for reproducer files.
    pub fn to_edge_list_format(&self) -> String {
        let mut out = format!("vertices {}\n", self.vertex_count());
        for e in &self.edges {
            out.push_str(&format!("{} {}\n", e.tail, e.head));
        }
        out
    }

    /// BFS spanning tree from `root`, scanning incident edges in file
    /// order so the result is deterministic. Fails on disconnected input,
    /// naming an unreached vertex.
    pub fn spanning_tree(&self, root: usize) -> Result<SpanningTree> {
        let n = self.vertex_count();
        if root >= n {
            return Err(Error::Precondition(format!(
                "root index {root} out of range"
            )));
        }
        let mut depth = vec![usize::MAX; n];
        let mut parent = vec![None; n];
        let mut tree_edges = Vec::new();
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &k in self.incident_edges(u) {
                let w = self.edges[k].other_endpoint(u);
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some(ParentLink { vertex: u, edge: k });
                    tree_edges.push(k);
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(Error::Disconnected {
                vertex: self.vertex_label(v),
            });
        }
        Ok(SpanningTree {
            root,
            tree_edges,
            parent,
            depth,
        })
    }
}

/// Parent pointer inside a spanning tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParentLink {
    pub vertex: usize,
    pub edge: usize,
}

/// A rooted BFS spanning tree; `depth` is the edge distance from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    pub root: usize,
    /// Tree edge indices in BFS discovery order.
    pub tree_edges: Vec<usize>,
    pub parent: Vec<Option<ParentLink>>,
    pub depth: Vec<usize>,
}

impl SpanningTree {
    pub fn contains_edge(&self, e: usize) -> bool {
        self.tree_edges.contains(&e)
    }
}

/// Parses the edge-list format: an optional `vertices N` header, then one
/// `tail head` pair per line; `#` starts a comment.
///
/// Without a header, vertex ids are arbitrary labels taken in first-
/// appearance order. With a header, ids must be 0..N-1.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut header: Option<usize> = None;
    let mut labels: Vec<u64> = Vec::new();
    let mut index_of: HashMap<u64, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut saw_content = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        if !saw_content {
            saw_content = true;
            if let Some(rest) = line.strip_prefix("vertices") {
                let n: usize = rest.trim().parse().map_err(|_| {
                    Error::parse(lineno, format!("bad vertex count '{}'", rest.trim()))
                })?;
                header = Some(n);
                labels = (0..n as u64).collect();
                for (i, &l) in labels.iter().enumerate() {
                    index_of.insert(l, i);
                }
                continue;
            }
        }
        let mut parts = line.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(
                lineno,
                format!("expected 'tail head', got '{line}'"),
            ));
        };
        let mut resolve = |tok: &str| -> Result<usize> {
            let id: u64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad vertex id '{tok}'")))?;
            match index_of.get(&id) {
                Some(&i) => Ok(i),
                None => {
                    if header.is_some() {
                        Err(Error::parse(lineno, format!("unknown vertex id {id}")))
                    } else {
                        let i = labels.len();
                        labels.push(id);
                        index_of.insert(id, i);
                        Ok(i)
                    }
                }
            }
        };
        let tail = resolve(a)?;
        let head = resolve(b)?;
        if tail == head {
            return Err(Error::parse(lineno, format!("self-loop at vertex {a}")));
        }
        edges.push((tail, head));
    }
    Graph::with_labels(labels, edges)
}

#[cfg(test)]
pub(crate) mod samples {
    use super::*;

    /// K2 with the arrow drawn from v1 to v2.
    pub fn k2() -> Graph {
        Graph::new(2, vec![(0, 1)]).unwrap()
    }

    /// The oriented triangle: e0 = v1->v2, e1 = v0->v2, e2 = v0->v1.
    pub fn k3() -> Graph {
        Graph::new(3, vec![(1, 2), (0, 2), (0, 1)]).unwrap()
    }

    /// Six vertices, seven edges, two independent cycles.
    pub fn two_cycle_graph() -> Graph {
        Graph::new(
            6,
            vec![(0, 1), (0, 3), (1, 3), (3, 4), (4, 5), (5, 2), (2, 4)],
        )
        .unwrap()
    }

    /// Rooted tree on eight vertices: root 0 with children 1, 2, 3;
    /// vertex 2 has children 4, 5, 6; vertex 3 has child 7.
    pub fn rooted_tree() -> Graph {
        Graph::new(
            8,
            vec![(0, 1), (0, 2), (0, 3), (2, 4), (2, 5), (2, 6), (3, 7)],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rat;

    #[test]
    fn parse_single_edge() {
        let g = parse_graph("1 2\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge(0), Edge { tail: 0, head: 1 });
        assert_eq!(g.vertex_labels(), &[1, 2]);
    }

    #[test]
    fn parse_header_allows_isolated_vertices() {
        let g = parse_graph("vertices 3\n# no edges\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn parse_two_cycle_graph_file() {
        let text = "vertices 6\n0 1\n0 3\n1 3\n3 4\n4 5\n5 2\n2 4\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 7);
        assert_eq!(g, samples::two_cycle_graph());
    }

    #[test]
    fn parse_rejects_malformed_input() {
        let err = parse_graph("1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_graph("1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_graph("vertices 2\n0 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn adjacency_examples() {
        assert_eq!(
            samples::k2().adjacency_matrix(),
            RationalMatrix::from_int_rows(&[vec![0, 1], vec![1, 0]])
        );
        let a3 = samples::k3().adjacency_matrix();
        assert_eq!(
            a3,
            RationalMatrix::from_int_rows(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]])
        );
        // entry (v4, v5) of the two-cycle graph is set by its fifth edge
        let g = samples::two_cycle_graph();
        assert_eq!(g.adjacency_matrix().get(4, 5), &rat(1));
    }

    #[test]
    fn adjacency_of_parallel_edges_stays_binary() {
        let g = Graph::new(2, vec![(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.adjacency_matrix().get(0, 1), &rat(1));
        assert_eq!(g.valence_matrix().get(0, 0), &rat(2));
        assert!(!g.is_simple());
    }

    #[test]
    fn valence_examples() {
        assert_eq!(
            samples::k3().valence_matrix(),
            RationalMatrix::from_int_rows(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]])
        );
        let v = samples::two_cycle_graph().valence_matrix();
        for (i, expected) in [2, 2, 2, 3, 3, 2].into_iter().enumerate() {
            assert_eq!(v.get(i, i), &rat(expected));
        }
    }

    #[test]
    fn incidence_examples() {
        assert_eq!(
            samples::k2().incidence_matrix(),
            RationalMatrix::from_int_rows(&[vec![-1], vec![1]])
        );
        assert_eq!(
            samples::k3().incidence_matrix(),
            RationalMatrix::from_int_rows(&[vec![0, -1, -1], vec![-1, 0, 1], vec![1, 1, 0]])
        );
        let empty = parse_graph("vertices 4\n").unwrap();
        let m = empty.incidence_matrix();
        assert_eq!((m.rows(), m.cols()), (4, 0));
    }

    #[test]
    fn incidence_columns_sum_to_zero() {
        let g = samples::two_cycle_graph();
        let m = g.incidence_matrix();
        for e in 0..g.edge_count() {
            let col: Vec<_> = (0..g.vertex_count()).map(|v| m.get(v, e).clone()).collect();
            let sum: Rational = col.iter().cloned().sum();
            assert!(sum == rat(0));
            assert_eq!(col.iter().filter(|x| **x == rat(1)).count(), 1);
            assert_eq!(col.iter().filter(|x| **x == rat(-1)).count(), 1);
        }
    }

    #[test]
    fn components_and_cycle_rank() {
        assert_eq!(samples::k3().component_count(), 1);
        assert_eq!(samples::k3().cycle_rank(), 1);
        assert_eq!(samples::two_cycle_graph().component_count(), 1);
        assert_eq!(samples::two_cycle_graph().cycle_rank(), 2);
        let g = parse_graph("vertices 3\n0 1\n").unwrap();
        assert_eq!(g.component_count(), 2);
        assert_eq!(g.cycle_rank(), 0);
        assert_eq!(samples::rooted_tree().cycle_rank(), 0);
    }

    #[test]
    fn bfs_tree_on_triangle() {
        // Rooted at v1 (the triangle's labeled v2): incident edges in file
        // order are e0 and e2, so both are taken into the tree.
        let t = samples::k3().spanning_tree(1).unwrap();
        assert_eq!(t.depth, vec![1, 0, 1]);
        assert_eq!(t.tree_edges, vec![0, 2]);
    }

    #[test]
    fn bfs_tree_on_path() {
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = g.spanning_tree(0).unwrap();
        assert_eq!(t.depth, vec![0, 1, 2, 3]);
        assert_eq!(t.tree_edges.len(), 3);
    }

    #[test]
    fn bfs_tree_on_rooted_tree_sample() {
        let t = samples::rooted_tree().spanning_tree(0).unwrap();
        assert_eq!(t.depth, vec![0, 1, 1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn bfs_depth_parent_consistency() {
        let g = samples::two_cycle_graph();
        let t = g.spanning_tree(0).unwrap();
        assert_eq!(t.tree_edges.len(), g.vertex_count() - 1);
        for v in 0..g.vertex_count() {
            if let Some(p) = t.parent[v] {
                assert_eq!(t.depth[p.vertex], t.depth[v] - 1);
                assert!(g.edge(p.edge).has_endpoint(v));
            }
        }
    }

    #[test]
    fn disconnected_tree_names_unreached_vertex() {
        let g = parse_graph("vertices 3\n0 1\n").unwrap();
        let err = g.spanning_tree(0).unwrap_err();
        assert!(matches!(err, Error::Disconnected { vertex: 2 }));
    }
}
