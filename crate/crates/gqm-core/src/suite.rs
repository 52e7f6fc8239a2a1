//! Randomized invariant suite over (graph, Morse function) instances.
//!
//! Each instance samples a random graph and a random flat Morse function,
//! then checks every cross-module identity the crate claims: kernel
//! dimensions against combinatorial counts, cutoff cohomology, walk
//! oracles, Morse inequalities, the dual-route differential, and the
//! Witten limit and substitution bridges. Violations come back with a
//! minimized reproducer in the on-disk file formats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::linalg::{rational_kernel, symmetric_spectrum, DEFAULT_TOL};
use crate::matrix::{ratio, rat};
use crate::morse::{
    exclusivity_holds, random_morse, validate_morse, MorseAnalysis, MorseFunction,
};
use crate::spectral::{
    self, cutoff_cohomology, cutoff_complex, generalized_walk_count, generalized_walk_oracle,
    odd_walk_count, odd_walk_oracle,
};
use crate::witten::{limit_kernel_dims, substituted_kernel_dims};

/// Test-mode fault injection, used to verify that the suite actually
/// catches violations and emits reproducers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Perturb one entry of the even Laplacian before the kernel check.
    CorruptEvenLaplacian,
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub instances: usize,
    pub seed: u64,
    pub max_vertices: usize,
    pub max_edges: usize,
    pub fault: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            instances: 100,
            seed: 1,
            max_vertices: 8,
            max_edges: 12,
            fault: None,
        }
    }
}

/// A failed check with a minimized reproducer.
#[derive(Debug, Clone)]
pub struct SuiteViolation {
    pub instance: usize,
    pub check: String,
    pub detail: String,
    pub graph_text: String,
    pub morse_text: String,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteSummary {
    pub instances_run: usize,
    pub violations: Vec<SuiteViolation>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples a graph with 1..=max_vertices vertices and up to max_edges
/// edges; parallel edges occur but self-loops never do.
pub fn random_graph(rng: &mut ChaCha8Rng, max_vertices: usize, max_edges: usize) -> Graph {
    let n = rng.random_range(1..=max_vertices.max(1));
    let m = if n == 1 {
        0
    } else {
        rng.random_range(0..=max_edges)
    };
    let edges = (0..m)
        .map(|_| {
            let tail = rng.random_range(0..n);
            let mut head = rng.random_range(0..n - 1);
            if head >= tail {
                head += 1;
            }
            (tail, head)
        })
        .collect();
    Graph::new(n, edges).expect("sampled edges are loop-free and in range")
}

type CheckResult = Result<(), (String, String)>;

fn fail(check: &str, detail: impl Into<String>) -> CheckResult {
    Err((check.to_string(), detail.into()))
}

/// Runs every invariant check on one instance.
pub fn check_instance(g: &Graph, f: &MorseFunction, fault: Option<Fault>) -> CheckResult {
    // Exact Hodge counts; this is where fault injection lands.
    let mut even = spectral::even_laplacian_incidence(g);
    if fault == Some(Fault::CorruptEvenLaplacian) && g.vertex_count() > 0 {
        let bumped = even.get(0, 0) + &rat(1);
        even.set(0, 0, bumped);
    }
    let h0 = rational_kernel(&even).dimension();
    let h1 = rational_kernel(&spectral::odd_laplacian(g)).dimension();
    if h0 != g.component_count() {
        return fail(
            "hodge-even",
            format!("dim ker even = {h0}, components = {}", g.component_count()),
        );
    }
    if h1 != g.cycle_rank() {
        return fail(
            "hodge-odd",
            format!("dim ker odd = {h1}, cycle rank = {}", g.cycle_rank()),
        );
    }

    // The constant vertex state is harmonic.
    let ones = vec![rat(1); g.vertex_count()];
    if !even.apply(&ones).iter().all(num::Zero::is_zero) {
        return fail("harmonic-constant", "even Laplacian does not kill 1");
    }

    // Nonzero spectra of the two Laplacians coincide.
    let agreement =
        crate::linalg::verify_lemma_spectrum(&g.incidence_matrix(), DEFAULT_TOL)
            .map_err(|e| ("spectrum-lemma".to_string(), e.to_string()))?;
    if agreement.max_discrepancy > 1e-8 {
        return fail(
            "spectrum-lemma",
            format!("nonzero spectra differ by {}", agreement.max_discrepancy),
        );
    }

    // Cutoff cohomology is threshold-independent.
    let spec = symmetric_spectrum(&even, DEFAULT_TOL)
        .map_err(|e| ("cutoff".to_string(), e.to_string()))?;
    for a in cutoff_sample_points(&spec.eigenvalues, spec.tol_effective) {
        let c = cutoff_complex(g, a).map_err(|e| ("cutoff".to_string(), e.to_string()))?;
        let got = cutoff_cohomology(&c);
        if got != (h0, h1) {
            return fail("cutoff", format!("cohomology {got:?} at a = {a}, Betti ({h0}, {h1})"));
        }
    }

    // Morse side: validity, exclusivity, counts, differential, homology.
    let report = validate_morse(g, f).map_err(|e| ("morse-validate".to_string(), e.to_string()))?;
    if !report.is_valid() {
        return fail("morse-validate", report.to_string());
    }
    if !exclusivity_holds(g, f) {
        return fail("morse-exclusivity", "both witness sets nonempty at some cell");
    }
    let analysis =
        MorseAnalysis::new(g, f).map_err(|e| ("morse-validate".to_string(), e.to_string()))?;
    let (c0, c1) = (
        analysis.critical_cells().c0(),
        analysis.critical_cells().c1(),
    );
    if h0 > c0 || h1 > c1 {
        return fail(
            "morse-inequalities",
            format!("Betti ({h0}, {h1}) exceed critical counts ({c0}, {c1})"),
        );
    }
    if c0 as i64 - c1 as i64 != g.vertex_count() as i64 - g.edge_count() as i64 {
        return fail("morse-euler", format!("c0 - c1 = {} != |V| - |E|", c0 as i64 - c1 as i64));
    }
    let complex = analysis
        .morse_complex()
        .map_err(|e| ("morse-differential".to_string(), e.to_string()))?;
    if complex.homology != (h0, h1) {
        return fail(
            "morse-homology",
            format!("Morse homology {:?} != Betti ({h0}, {h1})", complex.homology),
        );
    }

    // Flattening preserves the derived structure.
    let flat = analysis.flatten();
    let flat_analysis =
        MorseAnalysis::new(g, &flat).map_err(|e| ("flatten".to_string(), e.to_string()))?;
    if flat_analysis.critical_cells() != analysis.critical_cells()
        || flat_analysis.gradient_field() != analysis.gradient_field()
    {
        return fail("flatten", "critical cells or gradient field changed");
    }

    // Witten bridge: limit kernel dims equal critical counts, and exact
    // substitution at finite s reproduces the Betti numbers.
    let dims = limit_kernel_dims(g, f).map_err(|e| ("witten-limit".to_string(), e.to_string()))?;
    if dims != (c0, c1) {
        return fail("witten-limit", format!("limit kernel dims {dims:?} != ({c0}, {c1})"));
    }
    let sub = substituted_kernel_dims(g, f, &ratio(1, 3))
        .map_err(|e| ("witten-substitution".to_string(), e.to_string()))?;
    if sub != (h0, h1) {
        return fail(
            "witten-substitution",
            format!("kernel dims at e^-s = 1/3 are {sub:?}, Betti ({h0}, {h1})"),
        );
    }

    // Walk oracles on small instances.
    if g.vertex_count() <= 6 && g.edge_count() <= 7 {
        for k in 0..=3 {
            for i in 0..g.vertex_count() {
                for j in 0..g.vertex_count() {
                    let fast = generalized_walk_count(g, k, i, j);
                    let slow = generalized_walk_oracle(g, k, i, j);
                    if fast != num::BigInt::from(slow) {
                        return fail(
                            "walk-oracle",
                            format!("k={k} ({i},{j}): matrix {fast}, enumeration {slow}"),
                        );
                    }
                }
            }
            for a in 0..g.edge_count() {
                for b in 0..g.edge_count() {
                    let fast = odd_walk_count(g, k, a, b);
                    let slow = odd_walk_oracle(g, k, a, b);
                    if fast != num::BigInt::from(slow) {
                        return fail(
                            "odd-walk-oracle",
                            format!("k={k} ({a},{b}): matrix {fast}, enumeration {slow}"),
                        );
                    }
                }
            }
        }
    }

    // Height functions on connected graphs achieve tight inequalities.
    if g.component_count() == 1 && g.vertex_count() > 0 {
        let tree = g
            .spanning_tree(0)
            .map_err(|e| ("height".to_string(), e.to_string()))?;
        let hf = crate::morse::height_function(g, &tree);
        let ha = MorseAnalysis::new(g, &hf).map_err(|e| ("height".to_string(), e.to_string()))?;
        if ha.critical_cells().c0() != 1 || ha.critical_cells().c1() != g.cycle_rank() {
            return fail("height", "height function critical cells not {root} + non-tree edges");
        }
        if !ha
            .boundary_map_vanishes()
            .map_err(|e| ("height".to_string(), e.to_string()))?
        {
            return fail("height", "boundary map does not vanish on critical edges");
        }
    }

    Ok(())
}

/// Energy thresholds to probe: zero, below the spectral gap, between
/// eigenvalue clusters, at the top, and beyond.
fn cutoff_sample_points(eigenvalues: &[f64], tol: f64) -> Vec<f64> {
    let mut samples = vec![0.0];
    let positives: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l > tol).collect();
    if let Some(&min_pos) = positives.first() {
        samples.push(min_pos / 2.0);
    }
    if positives.len() >= 2 {
        let mid = positives.len() / 2;
        if positives[mid] - positives[mid - 1] > 2.0 * tol {
            samples.push((positives[mid] + positives[mid - 1]) / 2.0);
        }
    }
    if let Some(&max) = positives.last() {
        samples.push(max);
        samples.push(max + 1.0);
    } else {
        samples.push(1.0);
    }
    samples
}

/// Runs the suite over `config.instances` random instances.
pub fn run_suite(config: &SuiteConfig) -> SuiteSummary {
    let mut summary = SuiteSummary::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for instance in 0..config.instances {
        let g = random_graph(&mut rng, config.max_vertices, config.max_edges);
        let f = random_morse(&g, config.seed.wrapping_add(instance as u64));
        summary.instances_run += 1;
        if let Err((check, detail)) = check_instance(&g, &f, config.fault) {
            let (min_g, min_f) = minimize(&g, &f, config.fault);
            // Relabel to plain indices so the two reproducer files agree.
            let canonical = Graph::new(
                min_g.vertex_count(),
                min_g.edges().iter().map(|e| (e.tail, e.head)).collect(),
            )
            .expect("minimized graph stays well-formed");
            summary.violations.push(SuiteViolation {
                instance,
                check,
                detail,
                graph_text: canonical.to_edge_list_format(),
                morse_text: min_f.to_file_format(&canonical),
            });
        }
    }
    summary
}

/// Greedily shrinks a violating instance: drop edges, then isolated
/// vertices, as long as some check still fails. Removing an edge keeps a
/// Morse function valid (the witness sets only shrink), so the reduced
/// instance is always well-formed.
fn minimize(g: &Graph, f: &MorseFunction, fault: Option<Fault>) -> (Graph, MorseFunction) {
    let mut g = g.clone();
    let mut f = f.clone();
    loop {
        let mut shrunk = false;
        for e in 0..g.edge_count() {
            let (cg, cf) = remove_edge(&g, &f, e);
            if check_instance(&cg, &cf, fault).is_err() {
                g = cg;
                f = cf;
                shrunk = true;
                break;
            }
        }
        if shrunk {
            continue;
        }
        for v in 0..g.vertex_count() {
            if g.degree(v) > 0 || g.vertex_count() == 1 {
                continue;
            }
            let (cg, cf) = remove_isolated_vertex(&g, &f, v);
            if check_instance(&cg, &cf, fault).is_err() {
                g = cg;
                f = cf;
                shrunk = true;
                break;
            }
        }
        if !shrunk {
            return (g, f);
        }
    }
}

fn remove_edge(g: &Graph, f: &MorseFunction, e: usize) -> (Graph, MorseFunction) {
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != e)
        .map(|(_, edge)| (edge.tail, edge.head))
        .collect();
    let graph = Graph::with_labels(g.vertex_labels().to_vec(), edges).expect("still loop-free");
    let edge_values = f
        .edge_values()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != e)
        .map(|(_, v)| v.clone())
        .collect();
    let morse = MorseFunction::new(f.vertex_values().to_vec(), edge_values);
    (graph, morse)
}

fn remove_isolated_vertex(g: &Graph, f: &MorseFunction, v: usize) -> (Graph, MorseFunction) {
    let labels: Vec<u64> = g
        .vertex_labels()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != v)
        .map(|(_, &l)| l)
        .collect();
    let shift = |u: usize| if u > v { u - 1 } else { u };
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|e| (shift(e.tail), shift(e.head)))
        .collect();
    let graph = Graph::with_labels(labels, edges).expect("vertex was isolated");
    let vertex_values = f
        .vertex_values()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != v)
        .map(|(_, val)| val.clone())
        .collect();
    let morse = MorseFunction::new(vertex_values, f.edge_values().to_vec());
    (graph, morse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_random_instances() {
        let summary = run_suite(&SuiteConfig {
            instances: 25,
            seed: 42,
            max_vertices: 6,
            max_edges: 8,
            fault: None,
        });
        assert_eq!(summary.instances_run, 25);
        assert!(summary.passed(), "violations: {:?}", summary.violations);
    }

    #[test]
    fn zero_instances_trivially_pass() {
        let summary = run_suite(&SuiteConfig {
            instances: 0,
            ..SuiteConfig::default()
        });
        assert!(summary.passed());
        assert_eq!(summary.instances_run, 0);
    }

    #[test]
    fn fault_injection_is_caught_and_minimized() {
        let summary = run_suite(&SuiteConfig {
            instances: 3,
            seed: 7,
            max_vertices: 6,
            max_edges: 8,
            fault: Some(Fault::CorruptEvenLaplacian),
        });
        assert!(!summary.passed());
        let v = &summary.violations[0];
        assert_eq!(v.check, "hodge-even");
        // The minimized reproducer parses and still violates.
        let g = crate::graph::parse_graph(&v.graph_text).unwrap();
        let f = MorseFunction::parse(&v.morse_text, &g).unwrap();
        assert!(check_instance(&g, &f, Some(Fault::CorruptEvenLaplacian)).is_err());
        assert!(check_instance(&g, &f, None).is_ok());
    }

    #[test]
    fn random_graphs_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let g = random_graph(&mut rng, 10, 15);
            assert!(g.vertex_count() >= 1 && g.vertex_count() <= 10);
            assert!(g.edge_count() <= 15);
            assert!(g.edges().iter().all(|e| e.tail != e.head));
        }
    }

}
