//! Witten deformation of the graph coboundary, in exact arithmetic.
//!
//! The deformed boundary d_s = exp(fs) d exp(-fs) has entries of the form
//! c * e^{q s} with rational c and q, so deformed operators live in the
//! ring of finite sums of such terms ([`ExpPoly`]). Products, the s = 0
//! specialization, the s -> infinity limit, and exact substitutions
//! e^{-s} := r are all computed symbolically; floating point enters only
//! to evaluate spectra at a chosen s.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num::{BigInt, Integer, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{numeric_spectrum, rational_kernel, DEFAULT_TOL};
use crate::matrix::{format_rational, rat, Rational, RationalMatrix};
use crate::morse::{MorseAnalysis, MorseFunction};
use crate::spectral::{cutoff_cohomology, cutoff_from_spectra};

/// A finite sum of terms c * e^{q s}, keyed by the exponent q. Zero
/// coefficients are never stored, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpPoly {
    terms: BTreeMap<Rational, Rational>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Rational::zero())
    }

    /// The single term coeff * e^{exponent * s}.
    pub fn term(coeff: Rational, exponent: Rational) -> Self {
        let mut p = ExpPoly::default();
        p.add_term(exponent, coeff);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as (exponent, coefficient) pairs, ascending in exponent.
    pub fn terms(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.terms.iter()
    }

    fn add_term(&mut self, exponent: Rational, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(exponent.clone())
            .or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exponent);
        }
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (q, c) in &other.terms {
            out.add_term(q.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> ExpPoly {
        ExpPoly {
            terms: self.terms.iter().map(|(q, c)| (q.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::default();
        for (qa, ca) in &self.terms {
            for (qb, cb) in &other.terms {
                out.add_term(qa + qb, ca * cb);
            }
        }
        out
    }

    /// Numeric value at a given s.
    pub fn eval(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(q, c)| {
                crate::matrix::rational_to_f64(c)
                    * (crate::matrix::rational_to_f64(q) * s).exp()
            })
            .sum()
    }

    /// Exact value at s = 0 (sum of coefficients).
    pub fn at_zero(&self) -> Rational {
        self.terms.values().sum()
    }

    /// Exponents q > 0 carrying nonzero coefficients.
    pub fn positive_exponents(&self) -> Vec<Rational> {
        self.terms
            .keys()
            .filter(|q| q.is_positive())
            .cloned()
            .collect()
    }

    /// s -> infinity limit: terms with q < 0 vanish, the q = 0
    /// coefficient survives, any q > 0 term means divergence.
    pub fn limit(&self) -> Option<Rational> {
        if self.terms.keys().any(|q| q.is_positive()) {
            return None;
        }
        Some(
            self.terms
                .get(&Rational::zero())
                .cloned()
                .unwrap_or_else(Rational::zero),
        )
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Highest exponent first reads most naturally.
        for (i, (q, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if q.is_zero() {
                write!(f, "{}", format_rational(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", format_rational(&mag))?;
                }
                write!(f, "e^({}s)", format_rational(q))?;
            }
        }
        Ok(())
    }
}

/// Role of a deformed operator, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorRole {
    /// d_s: C^1 -> C^0 (boundary, |V| x |E|).
    Boundary,
    /// d_s^*: C^0 -> C^1 (coboundary, |E| x |V|).
    Coboundary,
    /// Delta_{+,s} on vertices.
    EvenLaplacian,
    /// Delta_{-,s} on edges.
    OddLaplacian,
}

/// A matrix of [`ExpPoly`] entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformedOperator {
    rows: usize,
    cols: usize,
    entries: Vec<ExpPoly>,
    pub role: OperatorRole,
}

impl DeformedOperator {
    fn zeros(rows: usize, cols: usize, role: OperatorRole) -> Self {
        DeformedOperator {
            rows,
            cols,
            entries: vec![ExpPoly::zero(); rows * cols],
            role,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &ExpPoly {
        &self.entries[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, p: ExpPoly) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn transpose(&self, role: OperatorRole) -> Self {
        let mut out = Self::zeros(self.cols, self.rows, role);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self, role: OperatorRole) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols, role);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = ExpPoly::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Exact specialization at s = 0.
    pub fn at_zero(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).at_zero())
    }

    /// Numeric evaluation at a given s.
    pub fn eval(&self, s: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(s))
    }

    /// Exact substitution: with L the least common denominator of every
    /// exponent in the matrix, sets e^{-s/L} := r, so each term
    /// c e^{q s} becomes c r^{-qL} with qL an integer. Rational Morse
    /// values always admit such an L; integer values give L = 1, i.e. the
    /// literal substitution e^{-s} := r.
    pub fn substitute(&self, r: &Rational) -> Result<RationalMatrix> {
        if !r.is_positive() {
            return Err(Error::Precondition(
                "substitution value for e^{-s} must be positive".into(),
            ));
        }
        let scale = self.exponent_denominator_lcm();
        Ok(RationalMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j)
                .terms()
                .map(|(q, c)| {
                    let k = q.numer() * (&scale / q.denom());
                    c * rational_int_pow(r, &-k)
                })
                .sum()
        }))
    }

    fn exponent_denominator_lcm(&self) -> BigInt {
        let mut l = BigInt::one();
        for p in &self.entries {
            for (q, _) in p.terms() {
                l = l.lcm(q.denom());
            }
        }
        l
    }

    /// Entrywise s -> infinity limit; divergent entries are collected
    /// rather than silently dropped.
    pub fn limit(&self) -> std::result::Result<RationalMatrix, Vec<DivergentEntry>> {
        let mut divergent = Vec::new();
        let mut out = RationalMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                match self.get(i, j).limit() {
                    Some(v) => out.set(i, j, v),
                    None => divergent.push(DivergentEntry {
                        row: i,
                        col: j,
                        exponents: self.get(i, j).positive_exponents(),
                    }),
                }
            }
        }
        if divergent.is_empty() {
            Ok(out)
        } else {
            Err(divergent)
        }
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}

/// Integer power of a positive rational; negative exponents invert.
fn rational_int_pow(r: &Rational, k: &BigInt) -> Rational {
    let mut base = if k.is_negative() {
        Rational::one() / r
    } else {
        r.clone()
    };
    let mut e = k.abs();
    let mut acc = Rational::one();
    while e.is_positive() {
        if e.is_odd() {
            acc *= &base;
        }
        let sq = &base * &base;
        base = sq;
        e /= 2;
    }
    acc
}

/// An entry that fails to converge as s -> infinity, with its offending
/// positive exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergentEntry {
    pub row: usize,
    pub col: usize,
    pub exponents: Vec<Rational>,
}

/// Divergent entries of the two limit Laplacians: (cell, incident cell)
/// index pairs per operator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DivergenceReport {
    pub even: Vec<DivergentEntry>,
    pub odd: Vec<DivergentEntry>,
}

impl DivergenceReport {
    pub fn is_empty(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }
}

impl fmt::Display for DivergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, entries) in [("even", &self.even), ("odd", &self.odd)] {
            for e in entries {
                let exps: Vec<String> = e.exponents.iter().map(format_rational).collect();
                writeln!(
                    f,
                    "  {label} Laplacian entry ({}, {}): positive exponents {}",
                    e.row,
                    e.col,
                    exps.join(", ")
                )?;
            }
        }
        Ok(())
    }
}

/// d_s = exp(fs) d exp(-fs): entry (v, e) is I(v, e) e^{(f(v) - f(e)) s}.
/// The coboundary d_s^* = exp(-fs) d^* exp(fs) is its entrywise
/// transpose, available via [`DeformedOperator::transpose`].
///
/// The conjugation is defined for any rational cell function (the zero
/// function leaves the boundary undeformed); Morse validity is required
/// only by the operations that reason about critical cells.
pub fn deform_boundary(g: &Graph, f: &MorseFunction) -> Result<DeformedOperator> {
    if f.vertex_values().len() != g.vertex_count() || f.edge_values().len() != g.edge_count() {
        return Err(Error::Precondition(
            "cell function does not cover the graph".into(),
        ));
    }
    let mut d = DeformedOperator::zeros(g.vertex_count(), g.edge_count(), OperatorRole::Boundary);
    for (e, edge) in g.edges().iter().enumerate() {
        for (v, sign) in [(edge.tail, rat(-1)), (edge.head, rat(1))] {
            let exponent = f.vertex_value(v) - f.edge_value(e);
            d.set(v, e, ExpPoly::term(sign, exponent));
        }
    }
    Ok(d)
}

/// The deformed Laplacians (Delta_{+,s}, Delta_{-,s}) = (d_s d_s^*,
/// d_s^* d_s), as exact ExpPoly matrices. At s = 0 they equal the
/// undeformed Laplacians.
pub fn deformed_laplacians(
    g: &Graph,
    f: &MorseFunction,
) -> Result<(DeformedOperator, DeformedOperator)> {
    let d = deform_boundary(g, f)?;
    let d_star = d.transpose(OperatorRole::Coboundary);
    let even = d.matmul(&d_star, OperatorRole::EvenLaplacian);
    let odd = d_star.matmul(&d, OperatorRole::OddLaplacian);
    debug_assert!(even.is_symmetric() && odd.is_symmetric());
    Ok((even, odd))
}

/// The s -> infinity limits of both deformed Laplacians.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitLaplacians {
    pub even: RationalMatrix,
    pub odd: RationalMatrix,
}

/// Evaluates both deformed Laplacians at s -> infinity. Entries with a
/// positive exponent are reported as divergent, never truncated; for flat
/// Morse functions (and more generally whenever f(v) <= f(e) on every
/// incidence) the limit exists and is a 0/1 diagonal matrix whose zero
/// columns mark the critical cells.
pub fn limit_laplacians(g: &Graph, f: &MorseFunction) -> Result<LimitLaplacians> {
    let (even_s, odd_s) = deformed_laplacians(g, f)?;
    match (even_s.limit(), odd_s.limit()) {
        (Ok(even), Ok(odd)) => Ok(LimitLaplacians { even, odd }),
        (even, odd) => Err(Error::Divergent(Box::new(DivergenceReport {
            even: even.err().unwrap_or_default(),
            odd: odd.err().unwrap_or_default(),
        }))),
    }
}

/// Exact kernel dimensions of the limit Laplacians. When the limit
/// exists these equal the critical-cell counts (c0, c1); that identity is
/// cross-checked here.
pub fn limit_kernel_dims(g: &Graph, f: &MorseFunction) -> Result<(usize, usize)> {
    let analysis = MorseAnalysis::new(g, f)?;
    let limits = limit_laplacians(g, f)?;
    let dims = (
        rational_kernel(&limits.even).dimension(),
        rational_kernel(&limits.odd).dimension(),
    );
    let critical = analysis.critical_cells();
    if dims != (critical.c0(), critical.c1()) {
        return Err(Error::Internal(format!(
            "limit kernel dims {dims:?} differ from critical counts ({}, {})",
            critical.c0(),
            critical.c1()
        )));
    }
    Ok(dims)
}

/// Exact kernel dimensions of the deformed Laplacians at a finite s,
/// realized by the rational substitution e^{-s/L} := r of
/// [`DeformedOperator::substitute`]. Equal to the Betti numbers for every
/// valid Morse function and every r in (0, 1).
pub fn substituted_kernel_dims(
    g: &Graph,
    f: &MorseFunction,
    r: &Rational,
) -> Result<(usize, usize)> {
    let (even_s, odd_s) = deformed_laplacians(g, f)?;
    Ok((
        rational_kernel(&even_s.substitute(r)?).dimension(),
        rational_kernel(&odd_s.substitute(r)?).dimension(),
    ))
}

/// Cutoff cohomology of the deformed complex at finite s and energy a:
/// evaluates the deformed Laplacians numerically, restricts the deformed
/// coboundary to the eigenspaces with eigenvalue <= a, and reads off
/// kernel/cokernel dimensions. Equals the Betti numbers for all s, a.
pub fn deformed_cutoff_cohomology(
    g: &Graph,
    f: &MorseFunction,
    s: f64,
    a: f64,
) -> Result<(usize, usize)> {
    if !s.is_finite() {
        return Err(Error::Precondition("s must be finite".into()));
    }
    if a < 0.0 {
        return Err(Error::Precondition("energy threshold must be >= 0".into()));
    }
    let d = deform_boundary(g, f)?;
    let d_star = d.transpose(OperatorRole::Coboundary);
    let even = d.matmul(&d_star, OperatorRole::EvenLaplacian);
    let odd = d_star.matmul(&d, OperatorRole::OddLaplacian);
    let even_spec = numeric_spectrum(&even.eval(s), DEFAULT_TOL);
    let odd_spec = numeric_spectrum(&odd.eval(s), DEFAULT_TOL);
    let complex = cutoff_from_spectra(&even_spec, &odd_spec, &d_star.eval(s), a);
    Ok(cutoff_cohomology(&complex))
}

/// One grid point of a spectral flow: all eigenvalues of both deformed
/// Laplacians at the given s, ascending.
#[derive(Debug, Clone)]
pub struct SpectralFlowRow {
    pub s: f64,
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
}

/// Eigenvalues of the deformed Laplacians along an s grid. As s grows,
/// the lowest c0 (resp. c1) eigenvalues collapse toward zero while the
/// rest stay bounded away; `even_gap`/`odd_gap` report the separation at
/// the final grid point.
#[derive(Debug, Clone)]
pub struct SpectralFlow {
    pub rows: Vec<SpectralFlowRow>,
    /// min(high group) - max(low group) for the even Laplacian at the
    /// final s; None when every eigenvalue belongs to the low group.
    pub even_gap: Option<f64>,
    pub odd_gap: Option<f64>,
    /// True when both gaps are positive (or vacuous).
    pub separated: bool,
}

pub fn spectral_flow(g: &Graph, f: &MorseFunction, s_grid: &[f64]) -> Result<SpectralFlow> {
    if s_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("s grid must be ascending".into()));
    }
    let analysis = MorseAnalysis::new(g, f)?;
    let (c0, c1) = (
        analysis.critical_cells().c0(),
        analysis.critical_cells().c1(),
    );
    let (even_s, odd_s) = deformed_laplacians(g, f)?;
    let rows: Vec<SpectralFlowRow> = s_grid
        .iter()
        .map(|&s| SpectralFlowRow {
            s,
            even: numeric_spectrum(&even_s.eval(s), DEFAULT_TOL).eigenvalues,
            odd: numeric_spectrum(&odd_s.eval(s), DEFAULT_TOL).eigenvalues,
        })
        .collect();
    let gap = |values: &[f64], low_count: usize| -> Option<f64> {
        if low_count == 0 || low_count >= values.len() {
            return None;
        }
        Some(values[low_count] - values[low_count - 1])
    };
    let (even_gap, odd_gap) = match rows.last() {
        Some(last) => (gap(&last.even, c0), gap(&last.odd, c1)),
        None => (None, None),
    };
    let separated = even_gap.unwrap_or(1.0) > 0.0 && odd_gap.unwrap_or(1.0) > 0.0;
    Ok(SpectralFlow {
        rows,
        even_gap,
        odd_gap,
        separated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::samples;
    use crate::matrix::ratio;
    use crate::spectral;

    /// K2 oriented so the worked deformation formulas hold verbatim:
    /// the edge runs v1 -> v0, f(v0) = 1, f(v1) = 0, f(e) = 1.
    fn k2_golden() -> (Graph, MorseFunction) {
        (
            Graph::new(2, vec![(1, 0)]).unwrap(),
            MorseFunction::from_ints(&[1, 0], &[1]),
        )
    }

    fn k3_f() -> MorseFunction {
        MorseFunction::from_ints(&[1, 0, 1], &[1, 2, 1])
    }

    fn k3_g() -> MorseFunction {
        MorseFunction::from_ints(&[0, 0, 0], &[1, 1, 1])
    }

    #[test]
    fn exppoly_canonical_form() {
        let a = ExpPoly::term(rat(1), rat(-1));
        let b = ExpPoly::term(rat(-1), rat(-1));
        assert!(a.add(&b).is_zero());
        assert_eq!(a.add(&a), ExpPoly::term(rat(2), rat(-1)));
        let p = ExpPoly::term(rat(2), ratio(1, 2)).mul(&ExpPoly::term(rat(3), ratio(-3, 2)));
        assert_eq!(p, ExpPoly::term(rat(6), rat(-1)));
    }

    #[test]
    fn exppoly_limits_and_eval() {
        let p = ExpPoly::constant(rat(2)).add(&ExpPoly::term(rat(5), rat(-1)));
        assert_eq!(p.limit(), Some(rat(2)));
        assert_eq!(p.at_zero(), rat(7));
        assert_eq!(ExpPoly::term(rat(1), rat(1)).limit(), None);
        let q = ExpPoly::constant(rat(1)).add(&ExpPoly::term(rat(1), rat(-2)));
        let s = 0.7;
        assert!((q.eval(s) - (1.0 + (-2.0 * s).exp())).abs() < 1e-14);
        assert_eq!(q.to_string(), "1 + e^(-2s)");
    }

    #[test]
    fn deformed_boundary_on_k2() {
        let (g, f) = k2_golden();
        let d = deform_boundary(&g, &f).unwrap();
        assert_eq!(d.get(0, 0), &ExpPoly::constant(rat(1)));
        assert_eq!(d.get(1, 0), &ExpPoly::term(rat(-1), rat(-1)));
    }

    #[test]
    fn deformed_boundary_on_k3() {
        let g = samples::k3();
        let d = deform_boundary(&g, &k3_f()).unwrap();
        let e = |c: i64, q: i64| ExpPoly::term(rat(c), rat(q));
        assert!(d.get(0, 0).is_zero());
        assert_eq!(d.get(0, 1), &e(-1, -1));
        assert_eq!(d.get(0, 2), &e(-1, 0));
        assert_eq!(d.get(1, 0), &e(-1, -1));
        assert!(d.get(1, 1).is_zero());
        assert_eq!(d.get(1, 2), &e(1, -1));
        assert_eq!(d.get(2, 0), &e(1, 0));
        assert_eq!(d.get(2, 1), &e(1, -1));
        assert!(d.get(2, 2).is_zero());
    }

    #[test]
    fn zero_function_leaves_boundary_undeformed() {
        let g = samples::k3();
        let f = MorseFunction::from_ints(&[0, 0, 0], &[0, 0, 0]);
        let d = deform_boundary(&g, &f).unwrap();
        assert_eq!(d.at_zero(), g.incidence_matrix());
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                assert!(d.get(i, j).terms().all(|(q, _)| q.is_zero()));
            }
        }
    }

    #[test]
    fn all_critical_boundary_has_uniform_exponent() {
        let d = deform_boundary(&samples::k3(), &k3_g()).unwrap();
        for (e, edge) in samples::k3().edges().iter().enumerate() {
            for v in [edge.tail, edge.head] {
                let terms: Vec<_> = d.get(v, e).terms().collect();
                assert_eq!(terms.len(), 1);
                assert_eq!(terms[0].0, &rat(-1));
            }
        }
    }

    #[test]
    fn deformed_laplacians_on_k2() {
        let (g, f) = k2_golden();
        let (even, odd) = deformed_laplacians(&g, &f).unwrap();
        let e = |c: i64, q: i64| ExpPoly::term(rat(c), rat(q));
        assert_eq!(even.get(0, 0), &e(1, 0));
        assert_eq!(even.get(0, 1), &e(-1, -1));
        assert_eq!(even.get(1, 0), &e(-1, -1));
        assert_eq!(even.get(1, 1), &e(1, -2));
        assert_eq!(odd.get(0, 0), &e(1, 0).add(&e(1, -2)));
    }

    #[test]
    fn deformed_laplacians_match_undeformed_at_zero() {
        let g = samples::two_cycle_graph();
        let f = crate::morse::random_morse(&g, 7);
        let (even, odd) = deformed_laplacians(&g, &f).unwrap();
        assert_eq!(even.at_zero(), spectral::even_laplacian_incidence(&g));
        assert_eq!(odd.at_zero(), spectral::odd_laplacian(&g));
    }

    #[test]
    fn all_critical_laplacians_scale_uniformly() {
        let g = samples::k3();
        let (even, _) = deformed_laplacians(&g, &k3_g()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let p = even.get(i, j);
                if !p.is_zero() {
                    let terms: Vec<_> = p.terms().collect();
                    assert_eq!(terms.len(), 1);
                    assert_eq!(terms[0].0, &rat(-2));
                }
            }
        }
    }

    #[test]
    fn limits_on_worked_examples() {
        let (g, f) = k2_golden();
        let limits = limit_laplacians(&g, &f).unwrap();
        assert_eq!(
            limits.even,
            RationalMatrix::from_int_rows(&[vec![1, 0], vec![0, 0]])
        );
        assert_eq!(limits.odd, RationalMatrix::from_int_rows(&[vec![1]]));
        assert_eq!(limit_kernel_dims(&g, &f).unwrap(), (1, 0));

        let g3 = samples::k3();
        let limits = limit_laplacians(&g3, &k3_f()).unwrap();
        let diag101 =
            RationalMatrix::from_int_rows(&[vec![1, 0, 0], vec![0, 0, 0], vec![0, 0, 1]]);
        assert_eq!(limits.even, diag101);
        assert_eq!(limits.odd, diag101);
        assert_eq!(limit_kernel_dims(&g3, &k3_f()).unwrap(), (1, 1));

        let limits = limit_laplacians(&g3, &k3_g()).unwrap();
        assert!(limits.even.is_zero());
        assert!(limits.odd.is_zero());
        assert_eq!(limit_kernel_dims(&g3, &k3_g()).unwrap(), (3, 3));
    }

    #[test]
    fn limit_kernels_are_spanned_by_critical_cells() {
        let g3 = samples::k3();
        let limits = limit_laplacians(&g3, &k3_f()).unwrap();
        let even_kernel = rational_kernel(&limits.even);
        assert_eq!(even_kernel.basis, vec![vec![rat(0), rat(1), rat(0)]]);
        let odd_kernel = rational_kernel(&limits.odd);
        assert_eq!(odd_kernel.basis, vec![vec![rat(0), rat(1), rat(0)]]);
    }

    #[test]
    fn strictly_descending_pair_diverges() {
        let g = samples::k2();
        let f = MorseFunction::from_ints(&[2, 0], &[1]);
        let err = limit_laplacians(&g, &f).unwrap_err();
        match err {
            Error::Divergent(report) => {
                assert!(report.even.iter().any(|e| (e.row, e.col) == (0, 0)));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
        assert!(limit_kernel_dims(&g, &f).is_err());
    }

    #[test]
    fn substitution_preserves_kernel_dimensions() {
        let g3 = samples::k3();
        let (h0, h1) = spectral::betti_numbers(&g3);
        for r in [ratio(1, 2), ratio(1, 3), ratio(1, 5)] {
            assert_eq!(substituted_kernel_dims(&g3, &k3_f(), &r).unwrap(), (h0, h1));
            assert_eq!(substituted_kernel_dims(&g3, &k3_g(), &r).unwrap(), (h0, h1));
        }
    }

    #[test]
    fn substitution_matches_literal_value_for_integer_exponents() {
        let (g, f) = k2_golden();
        let (even, _) = deformed_laplacians(&g, &f).unwrap();
        let m = even.substitute(&ratio(1, 2)).unwrap();
        // [[1, -1/2], [-1/2, 1/4]] at e^{-s} = 1/2
        assert_eq!(m.get(0, 1), &ratio(-1, 2));
        assert_eq!(m.get(1, 1), &ratio(1, 4));
    }

    #[test]
    fn deformed_cutoff_matches_betti() {
        let g3 = samples::k3();
        assert_eq!(
            deformed_cutoff_cohomology(&g3, &k3_f(), 3.0, 0.5).unwrap(),
            (1, 1)
        );
        assert_eq!(
            deformed_cutoff_cohomology(&g3, &k3_f(), 0.0, 10.0).unwrap(),
            spectral::betti_numbers(&g3)
        );
        let g = samples::two_cycle_graph();
        let f = crate::morse::height_function(&g, &g.spanning_tree(0).unwrap());
        assert_eq!(
            deformed_cutoff_cohomology(&g, &f, 5.0, 50.0).unwrap(),
            (1, 2)
        );
    }

    #[test]
    fn spectral_flow_on_k2() {
        let (g, f) = k2_golden();
        let flow = spectral_flow(&g, &f, &[0.0, 1.0, 2.0, 4.0, 8.0]).unwrap();
        // Closed form: eigenvalues of Delta_{+,s} are 0 and 1 + e^{-2s}.
        let first = &flow.rows[0];
        assert!((first.even[1] - 2.0).abs() < 1e-9);
        let last = flow.rows.last().unwrap();
        assert!(last.even[0].abs() < 1e-9);
        assert!((last.even[1] - (1.0 + (-16.0f64).exp())).abs() < 1e-9);
        assert!(flow.separated);
        assert!(flow.even_gap.unwrap() > 0.9);
    }

    #[test]
    fn spectral_flow_all_critical_scales_whole_spectrum() {
        let g3 = samples::k3();
        let flow = spectral_flow(&g3, &k3_g(), &[0.0, 1.0, 3.0]).unwrap();
        for row in &flow.rows {
            let scale = (-2.0 * row.s).exp();
            let expected = [0.0, 3.0 * scale, 3.0 * scale];
            for (got, want) in row.even.iter().zip(expected) {
                assert!((got - want).abs() < 1e-8, "s = {}", row.s);
            }
        }
        // Every eigenvalue collapses: low group is everything.
        assert!(flow.even_gap.is_none());
        assert!(flow.separated);
    }

    #[test]
    fn spectral_flow_rejects_unsorted_grid() {
        let (g, f) = k2_golden();
        assert!(spectral_flow(&g, &f, &[1.0, 0.5]).is_err());
    }
}
