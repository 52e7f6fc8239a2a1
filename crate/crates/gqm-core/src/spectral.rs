//! Graph quantum mechanics: Laplacians, Hodge-style Betti numbers, heat
//! evolution, signed walk counts, and energy cutoffs.
//!
//! Two formulas for the even Laplacian exist: `val - A` and `I I^T`. They
//! coincide on simple graphs but differ on multigraphs (the adjacency
//! matrix stays 0/1 while the incidence product counts parallel edges).
//! [`even_laplacian`] returns the definitional `val - A`; everything
//! downstream (Betti numbers, walk counts, evolution, cutoffs) is built
//! from the incidence matrix so the homology and walk identities hold
//! verbatim on multigraphs too. [`laplacian_formulas_agree`] reports
//! whether the two coincide for a given graph.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::linalg::{self, rational_kernel, Spectrum, DEFAULT_TOL};
use crate::matrix::RationalMatrix;
use num::BigInt;

/// Even Laplacian by the valence-minus-adjacency definition.
pub fn even_laplacian(g: &Graph) -> RationalMatrix {
    let m = &g.valence_matrix() - &g.adjacency_matrix();
    debug_assert!(!g.is_simple() || m == even_laplacian_incidence(g));
    m
}

/// Even Laplacian as I I^T; acts on vertex states.
pub fn even_laplacian_incidence(g: &Graph) -> RationalMatrix {
    let inc = g.incidence_matrix();
    inc.matmul(&inc.transpose())
}

/// Odd Laplacian I^T I; acts on edge states, diagonal entries all 2.
pub fn odd_laplacian(g: &Graph) -> RationalMatrix {
    let inc = g.incidence_matrix();
    inc.transpose().matmul(&inc)
}

/// True when val - A equals I I^T (always the case for simple graphs).
pub fn laplacian_formulas_agree(g: &Graph) -> bool {
    even_laplacian(g) == even_laplacian_incidence(g)
}

/// (h0, h1) = (dim ker even Laplacian, dim ker odd Laplacian), exact.
/// Cross-checked against the combinatorial counts: components and
/// independent cycles.
pub fn betti_numbers(g: &Graph) -> (usize, usize) {
    let h0 = rational_kernel(&even_laplacian_incidence(g)).dimension();
    let h1 = rational_kernel(&odd_laplacian(g)).dimension();
    assert_eq!(h0, g.component_count(), "h0 must count components");
    assert_eq!(h1, g.cycle_rank(), "h1 must count independent cycles");
    (h0, h1)
}

fn even_spectrum(g: &Graph) -> Result<Spectrum> {
    linalg::symmetric_spectrum(&even_laplacian_incidence(g), DEFAULT_TOL)
}

/// Heat kernel exp(-t L) via eigen-decomposition.
fn heat_kernel(spectrum: &Spectrum, t: f64) -> DMatrix<f64> {
    let q = &spectrum.eigenvectors;
    let exp_diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        spectrum.eigenvalues.len(),
        spectrum.eigenvalues.iter().map(|l| (-l * t).exp()),
    ));
    q * exp_diag * q.transpose()
}

/// Schroedinger evolution of a vertex state: exp(-t Delta_+) applied to
/// the state. Componentwise action, so complex states evolve by applying
/// this to their real and imaginary parts. Total mass is conserved.
pub fn evolve(g: &Graph, state: &[f64], t: f64) -> Result<Vec<f64>> {
    if t < 0.0 {
        return Err(Error::Precondition("evolution time must be >= 0".into()));
    }
    if state.len() != g.vertex_count() {
        return Err(Error::Precondition(format!(
            "state length {} does not match vertex count {}",
            state.len(),
            g.vertex_count()
        )));
    }
    let z = partition_function(g, t)?;
    let v = nalgebra::DVector::from_column_slice(state);
    Ok((z * v).iter().copied().collect())
}

/// The partition function Z(t) = exp(-t Delta_+): symmetric, rows sum
/// to 1 (the constant vector is harmonic).
pub fn partition_function(g: &Graph, t: f64) -> Result<DMatrix<f64>> {
    Ok(heat_kernel(&even_spectrum(g)?, t))
}

/// Entries of (-Delta_+)^k: exact signed counts of generalized walks.
pub fn walk_matrix(g: &Graph, k: usize) -> RationalMatrix {
    (-&even_laplacian_incidence(g)).pow(k)
}

/// Signed count of generalized walks of length k from vertex i to j:
/// entry (i, j) of (-Delta_+)^k, always an exact integer.
pub fn generalized_walk_count(g: &Graph, k: usize, i: usize, j: usize) -> BigInt {
    let m = walk_matrix(g, k);
    let e = m.get(i, j);
    debug_assert!(num::One::is_one(e.denom()));
    e.numer().clone()
}

/// Entries of (Delta_-)^k: signed counts of adjacent-edge sequences.
pub fn odd_walk_matrix(g: &Graph, k: usize) -> RationalMatrix {
    odd_laplacian(g).pow(k)
}

pub fn odd_walk_count(g: &Graph, k: usize, a: usize, b: usize) -> BigInt {
    let m = odd_walk_matrix(g, k);
    let e = m.get(a, b);
    debug_assert!(num::One::is_one(e.denom()));
    e.numer().clone()
}

/// Brute-force oracle for [`generalized_walk_count`]: enumerates all
/// sequences (v_1, e_1), ..., (v_k, e_k) where e_m is incident to v_m and
/// v_{m+1} is an endpoint of e_m; a stationary step (v_{m+1} = v_m)
/// contributes a factor -1, a moving step +1.
pub fn generalized_walk_oracle(g: &Graph, k: usize, from: usize, to: usize) -> i64 {
    fn rec(g: &Graph, v: usize, remaining: usize, to: usize, sign: i64, acc: &mut i64) {
        if remaining == 0 {
            if v == to {
                *acc += sign;
            }
            return;
        }
        for &e in g.incident_edges(v) {
            // stay put while touching e
            rec(g, v, remaining - 1, to, -sign, acc);
            // traverse e
            rec(g, g.edge(e).other_endpoint(v), remaining - 1, to, sign, acc);
        }
    }
    let mut acc = 0;
    rec(g, from, k, to, 1, &mut acc);
    acc
}

fn incidence_sign(e: Edge, v: usize) -> i64 {
    if e.tail == v {
        -1
    } else {
        1
    }
}

/// Signed weight with which edge `a` meets edge `b`: the sum of
/// I(v,a) I(v,b) over shared endpoints. An edge meets itself with
/// weight 2; parallel edges sum over both shared vertices.
pub fn edge_meet_weight(g: &Graph, a: usize, b: usize) -> i64 {
    let ea = g.edge(a);
    let eb = g.edge(b);
    let mut w = 0;
    for v in [ea.tail, ea.head] {
        if eb.has_endpoint(v) {
            w += incidence_sign(ea, v) * incidence_sign(eb, v);
        }
    }
    w
}

/// Brute-force oracle for [`odd_walk_count`]: enumerates edge sequences
/// from `from` to `to` where consecutive edges share an endpoint, each
/// step weighted by [`edge_meet_weight`].
pub fn odd_walk_oracle(g: &Graph, k: usize, from: usize, to: usize) -> i64 {
    fn rec(g: &Graph, e: usize, remaining: usize, to: usize, weight: i64, acc: &mut i64) {
        if remaining == 0 {
            if e == to {
                *acc += weight;
            }
            return;
        }
        for next in 0..g.edge_count() {
            let w = edge_meet_weight(g, e, next);
            if w != 0 {
                rec(g, next, remaining - 1, to, weight * w, acc);
            }
        }
    }
    if g.edge_count() == 0 {
        return 0;
    }
    let mut acc = 0;
    rec(g, from, k, to, 1, &mut acc);
    acc
}

/// The sub-complex spanned by Laplacian eigenspaces with eigenvalue at
/// most the threshold, together with the coboundary restricted to it.
#[derive(Debug, Clone)]
pub struct CutoffComplex {
    pub threshold: f64,
    /// Orthonormal basis columns of the even cutoff space (|V| x k0).
    pub even_basis: DMatrix<f64>,
    /// Orthonormal basis columns of the odd cutoff space (|E| x k1).
    pub odd_basis: DMatrix<f64>,
    /// The coboundary compressed to the cutoff bases (k1 x k0).
    pub restricted_coboundary: DMatrix<f64>,
    /// Tolerance used for eigenvalue membership and rank decisions.
    pub tol: f64,
}

impl CutoffComplex {
    pub fn even_dim(&self) -> usize {
        self.even_basis.ncols()
    }

    pub fn odd_dim(&self) -> usize {
        self.odd_basis.ncols()
    }
}

/// Assembles a cutoff complex from eigen-decompositions of the even/odd
/// operators and the coboundary map C^0 -> C^1. Shared with the deformed
/// (Witten) variant.
pub(crate) fn cutoff_from_spectra(
    even: &Spectrum,
    odd: &Spectrum,
    coboundary: &DMatrix<f64>,
    a: f64,
) -> CutoffComplex {
    let tol = even.tol_effective.max(odd.tol_effective);
    let select = |s: &Spectrum| -> DMatrix<f64> {
        let cols: Vec<usize> = (0..s.eigenvalues.len())
            .filter(|&i| s.eigenvalues[i] <= a + tol)
            .collect();
        let n = s.eigenvectors.nrows();
        DMatrix::from_fn(n, cols.len(), |r, c| s.eigenvectors[(r, cols[c])])
    };
    let even_basis = select(even);
    let odd_basis = select(odd);
    let restricted_coboundary = odd_basis.transpose() * coboundary * &even_basis;
    CutoffComplex {
        threshold: a,
        even_basis,
        odd_basis,
        restricted_coboundary,
        tol,
    }
}

/// Eigenspaces of the (incidence-based) Laplacians up to energy `a`, with
/// the coboundary I^T restricted to them.
pub fn cutoff_complex(g: &Graph, a: f64) -> Result<CutoffComplex> {
    if a < 0.0 {
        return Err(Error::Precondition("energy threshold must be >= 0".into()));
    }
    let even = even_spectrum(g)?;
    let odd = linalg::symmetric_spectrum(&odd_laplacian(g), DEFAULT_TOL)?;
    let coboundary = g.incidence_matrix().transpose().to_f64();
    Ok(cutoff_from_spectra(&even, &odd, &coboundary, a))
}

fn numeric_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let scale = sv.iter().fold(1.0f64, |a, &b| a.max(b));
    sv.iter().filter(|&&s| s > tol * scale).count()
}

/// Cohomology of the two-term cutoff complex 0 -> C_a^0 -> C_a^1 -> 0:
/// kernel and cokernel dimensions of the restricted coboundary. Equals
/// the graph's Betti numbers for every threshold.
pub fn cutoff_cohomology(c: &CutoffComplex) -> (usize, usize) {
    let rank = numeric_rank(&c.restricted_coboundary, c.tol);
    (c.even_dim() - rank, c.odd_dim() - rank)
}
