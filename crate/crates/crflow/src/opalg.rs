//! Exact algebra for time-periodic operators held as finite Fourier series
//! with dense complex matrix coefficients, `A(t) = sum_k M_k exp(i w_k t)`.
//!
//! Frequencies are in MHz. Hermitian operators satisfy `M_{-w} = M_w^dag`
//! term by term. Dimensions stay at or below 64 (three four-level qubits),
//! so everything is dense; products still walk nonzero entries only because
//! the physical matrices are sparse.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;

/// Frequency-merge and resonance-pole tolerances, both in MHz.
///
/// Device frequencies are specified to ~kHz, so denominators below the pole
/// tolerance are treated as exact resonances and surfaced rather than
/// inverted into huge numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraTol {
    pub merge_mhz: f64,
    pub pole_mhz: f64,
}

impl Default for AlgebraTol {
    fn default() -> Self {
        Self {
            merge_mhz: 1e-7,
            pole_mhz: 1e-3,
        }
    }
}

/// A DC (or below-pole-tolerance) term handed to [`FourierOperator::antiderivative`].
#[derive(Debug, Clone, Error)]
#[error("resonance pole at {freq_mhz} MHz (strongest entry {max_abs:.3e})")]
pub struct ResonancePole {
    pub freq_mhz: f64,
    pub max_abs: f64,
    /// Strongest matrix entries driving the pole, as (row, col, value).
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl ResonancePole {
    pub fn from_matrix(freq: f64, m: &CMatrix) -> Self {
        Self::from_term(freq, m)
    }

    fn from_term(freq: f64, m: &CMatrix) -> Self {
        let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.norm() > 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        entries.sort_by(|a, b| b.2.norm().partial_cmp(&a.2.norm()).unwrap());
        entries.truncate(4);
        let max_abs = entries.first().map(|e| e.2.norm()).unwrap_or(0.0);
        Self {
            freq_mhz: freq,
            max_abs,
            entries,
        }
    }
}

/// Tensor-product block bookkeeping. Blocks are the Hilbert spaces of the
/// `target_factor`; two basis states share a block exactly when every
/// non-target factor index agrees. The block-diagonal part of an operator
/// preserves the non-target factors and acts freely inside the target factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    dims: Vec<usize>,
    target_factor: usize,
    labels: Vec<usize>,
}

impl BlockStructure {
    pub fn new(dims: Vec<usize>, target_factor: usize) -> Self {
        assert!(target_factor < dims.len());
        let total: usize = dims.iter().product();
        let mut labels = vec![0usize; total];
        for (state, label) in labels.iter_mut().enumerate() {
            let mut rest = state;
            let mut lab = 0usize;
            for (f, &d) in dims.iter().enumerate().rev() {
                let idx = rest % d;
                rest /= d;
                if f != target_factor {
                    lab = lab * d + idx;
                }
            }
            *label = lab;
        }
        Self {
            dims,
            target_factor,
            labels,
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn target_factor(&self) -> usize {
        self.target_factor
    }

    pub fn block_label(&self, state: usize) -> usize {
        self.labels[state]
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierOperator {
    dim: usize,
    /// Sorted by frequency, canonicalized; zero matrices pruned.
    terms: Vec<(f64, CMatrix)>,
}

impl FourierOperator {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<(f64, CMatrix)>, tol: &AlgebraTol) -> Self {
        let mut op = Self { dim, terms };
        op.canonicalize(tol);
        op
    }

    /// Single static term.
    pub fn from_static(m: CMatrix) -> Self {
        let dim = m.nrows();
        Self {
            dim,
            terms: if m.camax() > 0.0 {
                vec![(0.0, m)]
            } else {
                Vec::new()
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(f64, CMatrix)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, m)| m.camax())
            .fold(0.0, f64::max)
    }

    /// Sorts by frequency, merges terms closer than the merge tolerance and
    /// prunes exact-zero matrices. The merged frequency is the first of each
    /// group, which makes results independent of input term ordering.
    fn canonicalize(&mut self, tol: &AlgebraTol) {
        if self.terms.is_empty() {
            return;
        }
        self.terms
            .sort_by(|a, b| a.0.partial_cmp(&b.0).expect("non-finite frequency"));
        let mut merged: Vec<(f64, CMatrix)> = Vec::with_capacity(self.terms.len());
        for (f, m) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((f0, m0)) if (f - *f0).abs() <= tol.merge_mhz => {
                    *m0 += m;
                }
                _ => merged.push((f, m)),
            }
        }
        merged.retain(|(_, m)| m.camax() > 0.0);
        self.terms = merged;
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(f, m)| (*f, m * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self, tol: &AlgebraTol) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(self.dim, terms, tol)
    }

    pub fn sub(&self, other: &Self, tol: &AlgebraTol) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)), tol)
    }

    /// Hermitian conjugate: `(M_w e^{iwt})^dag = M_w^dag e^{-iwt}`.
    pub fn dagger(&self, tol: &AlgebraTol) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(f, m)| (-*f, m.adjoint()))
            .collect();
        Self::from_terms(self.dim, terms, tol)
    }

    /// Frequency convolution: terms multiply pairwise and land at summed
    /// frequencies.
    pub fn multiply(a: &Self, b: &Self, tol: &AlgebraTol) -> Self {
        assert_eq!(a.dim, b.dim);
        let d = a.dim;
        let mut terms: Vec<(f64, CMatrix)> = Vec::new();
        for (fb, mb) in &b.terms {
            let rows = row_lists(mb);
            for (fa, ma) in &a.terms {
                if let Some(prod) = mul_rowwise(ma, &rows, d) {
                    terms.push((fa + fb, prod));
                }
            }
        }
        Self::from_terms(d, terms, tol)
    }

    pub fn commutator(a: &Self, b: &Self, tol: &AlgebraTol) -> Self {
        Self::multiply(a, b, tol).sub(&Self::multiply(b, a, tol), tol)
    }

    /// Term-by-term integral with the zero-DC convention: `M e^{iwt}` maps to
    /// `M/(iw) e^{iwt}` and the integration constant is dropped. A term below
    /// the pole tolerance is an exact resonance unless its matrix is pure
    /// cancellation residue (below 1e-12 of the operator scale), which is
    /// discarded.
    pub fn antiderivative(&self, tol: &AlgebraTol) -> Result<Self, ResonancePole> {
        let scale = self.max_abs();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (f, m) in &self.terms {
            if f.abs() <= tol.pole_mhz {
                if m.camax() > scale * 1e-12 {
                    return Err(ResonancePole::from_term(*f, m));
                }
            } else {
                terms.push((*f, m / Complex64::new(0.0, *f)));
            }
        }
        Ok(Self {
            dim: self.dim,
            terms,
        })
    }

    /// `d/dt`: `M e^{iwt} -> iw M e^{iwt}`; DC terms vanish.
    pub fn time_derivative(&self) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| *f != 0.0)
                .map(|(f, m)| (*f, m * Complex64::new(0.0, *f)))
                .collect(),
        }
    }

    /// Splits into (block-diagonal, non-block-diagonal) parts with respect to
    /// the block structure; `B + N == A` entry by entry.
    pub fn block_split(&self, blocks: &BlockStructure) -> (Self, Self) {
        assert_eq!(self.dim, blocks.dim());
        let mut bd = Vec::new();
        let mut nd = Vec::new();
        for (f, m) in &self.terms {
            let mut b = CMatrix::zeros(self.dim, self.dim);
            let mut n = CMatrix::zeros(self.dim, self.dim);
            let mut any_b = false;
            let mut any_n = false;
            for c in 0..self.dim {
                for r in 0..self.dim {
                    let v = m[(r, c)];
                    if v.norm() == 0.0 {
                        continue;
                    }
                    if blocks.same_block(r, c) {
                        b[(r, c)] = v;
                        any_b = true;
                    } else {
                        n[(r, c)] = v;
                        any_n = true;
                    }
                }
            }
            if any_b {
                bd.push((*f, b));
            }
            if any_n {
                nd.push((*f, n));
            }
        }
        (
            Self {
                dim: self.dim,
                terms: bd,
            },
            Self {
                dim: self.dim,
                terms: nd,
            },
        )
    }

    /// The static (w = 0) coefficient, or a zero matrix if none is present.
    pub fn dc_part(&self, tol: &AlgebraTol) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (f, m) in &self.terms {
            if f.abs() <= tol.merge_mhz {
                out += m;
            }
        }
        out
    }

    /// Dense value at time `t` (microseconds when frequencies are MHz).
    pub fn evaluate(&self, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (f, m) in &self.terms {
            let ph = Complex64::from_polar(1.0, f * t);
            out += m * ph;
        }
        out
    }

    /// `true` when `M_{-w} = M_w^dag` for every term within `tol_abs`.
    pub fn is_hermitian_representable(&self, tol: &AlgebraTol, tol_abs: f64) -> bool {
        for (f, m) in &self.terms {
            let mut partner = CMatrix::zeros(self.dim, self.dim);
            for (g, p) in &self.terms {
                if (g + f).abs() <= tol.merge_mhz {
                    partner += p;
                }
            }
            let diff = partner - m.adjoint();
            if diff.camax() > tol_abs {
                return false;
            }
        }
        true
    }
}

fn row_lists(m: &CMatrix) -> Vec<Vec<(usize, Complex64)>> {
    let d = m.nrows();
    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); d];
    for c in 0..d {
        for r in 0..d {
            let v = m[(r, c)];
            if v.norm() > 0.0 {
                rows[r].push((c, v));
            }
        }
    }
    rows
}

fn mul_rowwise(a: &CMatrix, b_rows: &[Vec<(usize, Complex64)>], d: usize) -> Option<CMatrix> {
    let mut out = CMatrix::zeros(d, d);
    let mut any = false;
    for k in 0..d {
        if b_rows[k].is_empty() {
            continue;
        }
        for i in 0..d {
            let aik = a[(i, k)];
            if aik.norm() == 0.0 {
                continue;
            }
            for (j, bkj) in &b_rows[k] {
                out[(i, *j)] += aik * bkj;
                any = true;
            }
        }
    }
    if any {
        Some(out)
    } else {
        None
    }
}
