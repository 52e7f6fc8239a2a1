//! Discrete Morse functions on graphs.
//!
//! Cells are ordered by declaring each vertex smaller than each edge it
//! bounds. A rational-valued function on cells is Morse when every vertex
//! has at most one incident edge of value <= its own (MC1) and every edge
//! has at most one endpoint of value >= its own (MC2). Non-critical cells
//! pair up into a gradient field; flowing along it defines gradient
//! curves and the Morse differential, whose homology matches the graph's
//! Betti numbers.
//!
//! Ties define the pairing: a pair (v, e) satisfies f(e) <= f(v), so a
//! shared value pairs the vertex with the edge.

use std::fmt;

use num::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Cell, Graph, SpanningTree};
use crate::linalg::rational_rank;
use crate::matrix::{format_rational, parse_rational, rat, ratio, Rational, RationalMatrix};

/// Rational values on every vertex and edge of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseFunction {
    vertex_values: Vec<Rational>,
    edge_values: Vec<Rational>,
}

impl MorseFunction {
    pub fn new(vertex_values: Vec<Rational>, edge_values: Vec<Rational>) -> Self {
        MorseFunction {
            vertex_values,
            edge_values,
        }
    }

    pub fn from_ints(vertex_values: &[i64], edge_values: &[i64]) -> Self {
        Self::new(
            vertex_values.iter().map(|&v| rat(v)).collect(),
            edge_values.iter().map(|&v| rat(v)).collect(),
        )
    }

    pub fn vertex_value(&self, v: usize) -> &Rational {
        &self.vertex_values[v]
    }

    pub fn edge_value(&self, e: usize) -> &Rational {
        &self.edge_values[e]
    }

    pub fn value(&self, cell: Cell) -> &Rational {
        match cell {
            Cell::Vertex(v) => self.vertex_value(v),
            Cell::Edge(e) => self.edge_value(e),
        }
    }

    pub fn vertex_values(&self) -> &[Rational] {
        &self.vertex_values
    }

    pub fn edge_values(&self) -> &[Rational] {
        &self.edge_values
    }

    fn check_lengths(&self, g: &Graph) -> Result<()> {
        if self.vertex_values.len() != g.vertex_count()
            || self.edge_values.len() != g.edge_count()
        {
            return Err(Error::Precondition(format!(
                "Morse function covers {} vertices / {} edges, graph has {} / {}",
                self.vertex_values.len(),
                self.edge_values.len(),
                g.vertex_count(),
                g.edge_count()
            )));
        }
        Ok(())
    }

    /// Parses the Morse-function file format: `V <vertex_id> <rational>`
    /// and `E <edge_index> <rational>` lines, `#` comments. Every cell
    /// must be assigned exactly once; vertex ids are the labels from the
    /// graph file, edge indices are 0-based file positions.
    pub fn parse(text: &str, g: &Graph) -> Result<Self> {
        let mut vertex_values: Vec<Option<Rational>> = vec![None; g.vertex_count()];
        let mut edge_values: Vec<Option<Rational>> = vec![None; g.edge_count()];
        let mut line_count = 0;
        for (lineno, raw) in text.lines().enumerate() {
            line_count = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            let mut parts = line.split_whitespace();
            let (Some(kind), Some(id), Some(value), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(
                    lineno,
                    format!("expected 'V|E <id> <rational>', got '{line}'"),
                ));
            };
            let value = parse_rational(value)
                .map_err(|_| Error::parse(lineno, format!("bad rational '{value}'")))?;
            match kind {
                "V" => {
                    let label: u64 = id
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad vertex id '{id}'")))?;
                    let v = g.vertex_index(label).ok_or_else(|| {
                        Error::parse(lineno, format!("unknown vertex id {label}"))
                    })?;
                    if vertex_values[v].replace(value).is_some() {
                        return Err(Error::parse(lineno, format!("duplicate value for vertex {label}")));
                    }
                }
                "E" => {
                    let e: usize = id
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad edge index '{id}'")))?;
                    if e >= g.edge_count() {
                        return Err(Error::parse(lineno, format!("edge index {e} out of range")));
                    }
                    if edge_values[e].replace(value).is_some() {
                        return Err(Error::parse(lineno, format!("duplicate value for edge {e}")));
                    }
                }
                other => {
                    return Err(Error::parse(lineno, format!("unknown cell kind '{other}'")));
                }
            }
        }
        for (v, val) in vertex_values.iter().enumerate() {
            if val.is_none() {
                return Err(Error::parse(
                    line_count + 1,
                    format!("missing value for vertex {}", g.vertex_label(v)),
                ));
            }
        }
        for (e, val) in edge_values.iter().enumerate() {
            if val.is_none() {
                return Err(Error::parse(line_count + 1, format!("missing value for edge {e}")));
            }
        }
        Ok(MorseFunction {
            vertex_values: vertex_values.into_iter().map(Option::unwrap).collect(),
            edge_values: edge_values.into_iter().map(Option::unwrap).collect(),
        })
    }

    /// Renders in the Morse file format, with vertex labels from the graph.
    pub fn to_file_format(&self, g: &Graph) -> String {
        let mut out = String::new();
        for (v, value) in self.vertex_values.iter().enumerate() {
            out.push_str(&format!("V {} {}\n", g.vertex_label(v), format_rational(value)));
        }
        for (e, value) in self.edge_values.iter().enumerate() {
            out.push_str(&format!("E {e} {}\n", format_rational(value)));
        }
        out
    }
}

/// Which Morse condition a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorseCondition {
    /// MC1: more than one incident edge with value <= the vertex value.
    UpperNeighbors,
    /// MC2: more than one endpoint with value >= the edge value.
    LowerNeighbors,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseViolation {
    pub cell: Cell,
    pub condition: MorseCondition,
    pub offending: Vec<Cell>,
}

/// Result of checking the Morse conditions at every cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MorseReport {
    pub violations: Vec<MorseViolation>,
}

impl MorseReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for MorseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid discrete Morse function");
        }
        for v in &self.violations {
            let cond = match v.condition {
                MorseCondition::UpperNeighbors => "more than one incident edge of lower-or-equal value",
                MorseCondition::LowerNeighbors => "more than one endpoint of greater-or-equal value",
            };
            let offenders: Vec<String> = v.offending.iter().map(|c| c.to_string()).collect();
            writeln!(f, "  {}: {} ({})", v.cell, cond, offenders.join(", "))?;
        }
        Ok(())
    }
}

/// Checks MC1 and MC2 at every cell; the report lists each violating cell
/// with its offending neighbors.
pub fn validate_morse(g: &Graph, f: &MorseFunction) -> Result<MorseReport> {
    f.check_lengths(g)?;
    let mut violations = Vec::new();
    for v in 0..g.vertex_count() {
        let up: Vec<Cell> = g
            .incident_edges(v)
            .iter()
            .filter(|&&e| f.edge_value(e) <= f.vertex_value(v))
            .map(|&e| Cell::Edge(e))
            .collect();
        if up.len() > 1 {
            violations.push(MorseViolation {
                cell: Cell::Vertex(v),
                condition: MorseCondition::UpperNeighbors,
                offending: up,
            });
        }
    }
    for (e, edge) in g.edges().iter().enumerate() {
        let down: Vec<Cell> = [edge.tail, edge.head]
            .into_iter()
            .filter(|&v| f.vertex_value(v) >= f.edge_value(e))
            .map(Cell::Vertex)
            .collect();
        if down.len() > 1 {
            violations.push(MorseViolation {
                cell: Cell::Edge(e),
                condition: MorseCondition::LowerNeighbors,
                offending: down,
            });
        }
    }
    Ok(MorseReport { violations })
}

/// Exclusivity: at every cell, at most one of the MC1/MC2 witness sets is
/// nonempty. In the graph case vertices have nothing below and edges
/// nothing above, so this follows from validity; it is still checked
/// literally by the property suite.
pub fn exclusivity_holds(g: &Graph, f: &MorseFunction) -> bool {
    for v in 0..g.vertex_count() {
        let up = g
            .incident_edges(v)
            .iter()
            .filter(|&&e| f.edge_value(e) <= f.vertex_value(v))
            .count();
        let down = 0; // no cells below a vertex
        if up > 0 && down > 0 {
            return false;
        }
    }
    for (e, edge) in g.edges().iter().enumerate() {
        let down = [edge.tail, edge.head]
            .into_iter()
            .filter(|&v| f.vertex_value(v) >= f.edge_value(e))
            .count();
        let up = 0; // no 2-cells above an edge
        if up > 0 && down > 0 {
            return false;
        }
    }
    true
}

/// Critical cells, listed in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalCells {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl CriticalCells {
    pub fn c0(&self) -> usize {
        self.vertices.len()
    }

    pub fn c1(&self) -> usize {
        self.edges.len()
    }
}

/// The gradient vector field: the matching of non-critical (vertex, edge)
/// pairs with f(e) <= f(v), sorted by vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientField {
    pub pairs: Vec<(usize, usize)>,
}

/// An alternating vertex-edge sequence descending strictly in f:
/// `vertices` has one more entry than `edges`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientCurve {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl GradientCurve {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Sign of a gradient curve: the product over steps of
/// -I(v_i, e_i) I(v_{i+1}, e_i). Consecutive vertices are the two distinct
/// endpoints of the step edge, so every factor (and the product) is +1.
pub fn curve_multiplicity(curve: &GradientCurve, g: &Graph) -> i64 {
    let inc = |v: usize, e: usize| -> i64 {
        if g.edge(e).tail == v {
            -1
        } else {
            1
        }
    };
    let mut m = 1;
    for (i, &e) in curve.edges.iter().enumerate() {
        m *= -inc(curve.vertices[i], e) * inc(curve.vertices[i + 1], e);
    }
    m
}

/// Critical cells, the Morse differential (critical edges -> critical
/// vertices), and the homology ranks of the resulting two-term complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseComplex {
    pub critical: CriticalCells,
    /// c0 x c1 integer matrix; column j is the boundary of the j-th
    /// critical edge expressed in critical vertices.
    pub differential: RationalMatrix,
    /// (h0, h1) of the complex; equals the graph's Betti numbers.
    pub homology: (usize, usize),
}

/// A validated Morse function together with its derived structure.
///
/// Construction fails with the violation report when the function is not
/// Morse, so every method can rely on the matching structure.
#[derive(Debug, Clone)]
pub struct MorseAnalysis<'a> {
    graph: &'a Graph,
    f: &'a MorseFunction,
    /// Edge paired with each vertex, if any.
    pair_of_vertex: Vec<Option<usize>>,
    /// Vertex paired with each edge, if any.
    pair_of_edge: Vec<Option<usize>>,
    critical: CriticalCells,
}

impl<'a> MorseAnalysis<'a> {
    pub fn new(graph: &'a Graph, f: &'a MorseFunction) -> Result<Self> {
        let report = validate_morse(graph, f)?;
        if !report.is_valid() {
            return Err(Error::InvalidMorse(Box::new(report)));
        }
        let mut pair_of_vertex = vec![None; graph.vertex_count()];
        let mut pair_of_edge = vec![None; graph.edge_count()];
        for v in 0..graph.vertex_count() {
            for &e in graph.incident_edges(v) {
                if f.edge_value(e) <= f.vertex_value(v) {
                    // MC1/MC2 guarantee this is the only candidate on
                    // either side, so the pairs form a matching.
                    pair_of_vertex[v] = Some(e);
                    pair_of_edge[e] = Some(v);
                }
            }
        }
        let critical = CriticalCells {
            vertices: (0..graph.vertex_count())
                .filter(|&v| pair_of_vertex[v].is_none())
                .collect(),
            edges: (0..graph.edge_count())
                .filter(|&e| pair_of_edge[e].is_none())
                .collect(),
        };
        Ok(MorseAnalysis {
            graph,
            f,
            pair_of_vertex,
            pair_of_edge,
            critical,
        })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn function(&self) -> &MorseFunction {
        self.f
    }

    pub fn critical_cells(&self) -> &CriticalCells {
        &self.critical
    }

    pub fn is_critical_vertex(&self, v: usize) -> bool {
        self.pair_of_vertex[v].is_none()
    }

    /// The edge paired with `v` in the gradient field, if any.
    pub fn paired_edge(&self, v: usize) -> Option<usize> {
        self.pair_of_vertex[v]
    }

    /// The vertex paired with `e` in the gradient field, if any.
    pub fn paired_vertex(&self, e: usize) -> Option<usize> {
        self.pair_of_edge[e]
    }

    pub fn gradient_field(&self) -> GradientField {
        GradientField {
            pairs: self
                .pair_of_vertex
                .iter()
                .enumerate()
                .filter_map(|(v, e)| e.map(|e| (v, e)))
                .collect(),
        }
    }

    /// Follows the gradient field from `v` until an unpaired vertex is
    /// reached. Vertex values strictly decrease along the flow, so this
    /// terminates within |V| steps; running longer means the matching
    /// invariants are broken.
    pub fn flow_to_critical(&self, v: usize) -> Result<usize> {
        let mut current = v;
        for _ in 0..=self.graph.vertex_count() {
            match self.pair_of_vertex[current] {
                None => return Ok(current),
                Some(e) => current = self.graph.edge(e).other_endpoint(current),
            }
        }
        Err(Error::Internal(format!(
            "gradient flow from vertex {v} did not terminate"
        )))
    }

    /// All gradient curves from `from` to `to`, by depth-first
    /// enumeration. Includes the length-0 curve when the endpoints agree.
    /// Finite because vertex values strictly decrease along a curve.
    pub fn gradient_curves(&self, from: usize, to: usize) -> Vec<GradientCurve> {
        let mut out = Vec::new();
        let mut vertices = vec![from];
        let mut edges = Vec::new();
        self.curves_rec(from, to, &mut vertices, &mut edges, &mut out);
        out
    }

    fn curves_rec(
        &self,
        current: usize,
        to: usize,
        vertices: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        out: &mut Vec<GradientCurve>,
    ) {
        if current == to {
            out.push(GradientCurve {
                vertices: vertices.clone(),
                edges: edges.clone(),
            });
            // Values strictly decrease along a curve, so no extension can
            // return to `to`.
            return;
        }
        for &e in self.graph.incident_edges(current) {
            if self.f.edge_value(e) > self.f.vertex_value(current) {
                continue;
            }
            let next = self.graph.edge(e).other_endpoint(current);
            if self.f.vertex_value(next) >= self.f.edge_value(e) {
                continue;
            }
            vertices.push(next);
            edges.push(e);
            self.curves_rec(next, to, vertices, edges, out);
            vertices.pop();
            edges.pop();
        }
    }

    /// The Morse differential, computed two ways and cross-asserted:
    /// by summing signed gradient curves from the endpoints of each
    /// critical edge, and by the boundary formula e -> head' - tail'
    /// (flowing each endpoint to its critical vertex).
    pub fn morse_complex(&self) -> Result<MorseComplex> {
        let critical = self.critical.clone();
        let c0 = critical.c0();
        let c1 = critical.c1();
        let row_of_vertex: std::collections::HashMap<usize, usize> = critical
            .vertices
            .iter()
            .enumerate()
            .map(|(row, &v)| (v, row))
            .collect();

        // Route 1: signed curve counts.
        let mut via_curves = RationalMatrix::zeros(c0, c1);
        for (col, &e) in critical.edges.iter().enumerate() {
            let edge = self.graph.edge(e);
            for (endpoint, sign) in [(edge.tail, rat(-1)), (edge.head, rat(1))] {
                for (&sigma, &row) in &row_of_vertex {
                    let mut total = Rational::zero();
                    for curve in self.gradient_curves(endpoint, sigma) {
                        total += rat(curve_multiplicity(&curve, self.graph));
                    }
                    if !total.is_zero() {
                        let cur = via_curves.get(row, col) + &(&sign * &total);
                        via_curves.set(row, col, cur);
                    }
                }
            }
        }

        // Route 2: flow both endpoints and subtract.
        let mut via_flow = RationalMatrix::zeros(c0, c1);
        for (col, &e) in critical.edges.iter().enumerate() {
            let edge = self.graph.edge(e);
            let tail_end = self.flow_to_critical(edge.tail)?;
            let head_end = self.flow_to_critical(edge.head)?;
            let head_row = row_of_vertex[&head_end];
            let cur = via_flow.get(head_row, col) + &rat(1);
            via_flow.set(head_row, col, cur);
            let tail_row = row_of_vertex[&tail_end];
            let cur = via_flow.get(tail_row, col) - &rat(1);
            via_flow.set(tail_row, col, cur);
        }

        if via_curves != via_flow {
            return Err(Error::Internal(
                "curve-count differential disagrees with the flow boundary map".into(),
            ));
        }

        let rank = rational_rank(&via_curves);
        Ok(MorseComplex {
            critical,
            differential: via_curves,
            homology: (c0 - rank, c1 - rank),
        })
    }

    /// True when the boundary map vanishes on every critical edge, i.e.
    /// both endpoints flow to the same critical vertex. Holds for height
    /// functions on connected graphs.
    pub fn boundary_map_vanishes(&self) -> Result<bool> {
        for &e in &self.critical.edges {
            let edge = self.graph.edge(e);
            if self.flow_to_critical(edge.tail)? != self.flow_to_critical(edge.head)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The flat Morse function with the same critical cells and gradient
    /// field: critical cells take their dimension, each gradient pair a
    /// shared value in (0, 1].
    pub fn flatten(&self) -> MorseFunction {
        flat_from_matching(self.graph, &self.pair_of_vertex)
    }
}

/// Builds the flat Morse function realizing a given acyclic matching:
/// critical (unmatched) cells take their dimension; every pair takes a
/// common value. All pairs first try the value 1; if that breaks the Morse
/// conditions or disturbs the critical set, pairs instead take distinct
/// values (R + rank)/(2R) in [1/2, 1) increasing along a topological order
/// of the flow, so values still decrease strictly in the flow direction.
/// The shared denominator 2R keeps exponent rescaling cheap for the exact
/// substitution machinery downstream.
fn flat_from_matching(g: &Graph, pair_of_vertex: &[Option<usize>]) -> MorseFunction {
    let assemble = |pair_value: &dyn Fn(usize) -> Rational| -> MorseFunction {
        let mut vertex_values = vec![Rational::zero(); g.vertex_count()];
        let mut edge_values = vec![Rational::one(); g.edge_count()];
        for (v, pair) in pair_of_vertex.iter().enumerate() {
            if let Some(e) = pair {
                let value = pair_value(v);
                vertex_values[v] = value.clone();
                edge_values[*e] = value;
            }
        }
        MorseFunction::new(vertex_values, edge_values)
    };

    let simple = assemble(&|_| Rational::one());
    if matching_realized(g, &simple, pair_of_vertex) {
        return simple;
    }

    // Height of a pair: steps until the flow reaches a critical vertex.
    let paired: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| pair_of_vertex[v].is_some())
        .collect();
    let mut height = vec![0usize; g.vertex_count()];
    for &v in &paired {
        let mut steps = 0;
        let mut current = v;
        while let Some(e) = pair_of_vertex[current] {
            current = g.edge(e).other_endpoint(current);
            steps += 1;
            assert!(steps <= g.vertex_count(), "matching contains a closed flow cycle");
        }
        height[v] = steps - 1;
    }
    let mut order = paired;
    order.sort_by_key(|&v| (height[v], v));
    let mut rank_of = vec![0usize; g.vertex_count()];
    for (rank, &v) in order.iter().enumerate() {
        rank_of[v] = rank;
    }
    let perturbed = assemble(&|v| ratio(1 + rank_of[v] as i64, 2 + rank_of[v] as i64));
    debug_assert!(matching_realized(g, &perturbed, pair_of_vertex));
    perturbed
}

/// Does `f` validate as Morse with exactly the given matching as its
/// gradient field?
fn matching_realized(g: &Graph, f: &MorseFunction, pair_of_vertex: &[Option<usize>]) -> bool {
    match MorseAnalysis::new(g, f) {
        Ok(analysis) => analysis.pair_of_vertex == pair_of_vertex,
        Err(_) => false,
    }
}

/// The height function of a rooted spanning tree: vertices take their BFS
/// depth, tree edges the deeper endpoint's depth, non-tree edges one more
/// than their deeper endpoint. Critical cells are the root and the
/// non-tree edges, so the Morse inequalities are tight on connected
/// graphs.
pub fn height_function(g: &Graph, tree: &SpanningTree) -> MorseFunction {
    let mut in_tree = vec![false; g.edge_count()];
    for &e in &tree.tree_edges {
        in_tree[e] = true;
    }
    let vertex_values: Vec<Rational> = tree.depth.iter().map(|&d| rat(d as i64)).collect();
    let edge_values: Vec<Rational> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let deeper = tree.depth[edge.tail].max(tree.depth[edge.head]) as i64;
            rat(if in_tree[e] { deeper } else { deeper + 1 })
        })
        .collect();
    MorseFunction::new(vertex_values, edge_values)
}

/// Samples a random flat Morse function: a random acyclic matching of
/// vertex-edge incidences, realized through the same value scheme as
/// [`MorseAnalysis::flatten`]. The output always validates.
pub fn random_morse(g: &Graph, seed: u64) -> MorseFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(e, edge)| [(edge.tail, e), (edge.head, e)])
        .collect();
    candidates.shuffle(&mut rng);

    let mut pair_of_vertex: Vec<Option<usize>> = vec![None; g.vertex_count()];
    let mut edge_used = vec![false; g.edge_count()];
    for (v, e) in candidates {
        // Leave some cells critical so the sampled densities vary.
        if rng.random_range(0..4) == 0 {
            continue;
        }
        if pair_of_vertex[v].is_some() || edge_used[e] {
            continue;
        }
        // Adding (v, e) closes a flow cycle only if following the flow
        // from the opposite endpoint leads back to v.
        let mut current = g.edge(e).other_endpoint(v);
        let mut closes_cycle = false;
        while let Some(next_edge) = pair_of_vertex[current] {
            current = g.edge(next_edge).other_endpoint(current);
            if current == v {
                closes_cycle = true;
                break;
            }
        }
        if closes_cycle {
            continue;
        }
        pair_of_vertex[v] = Some(e);
        edge_used[e] = true;
    }
    flat_from_matching(g, &pair_of_vertex)
}
