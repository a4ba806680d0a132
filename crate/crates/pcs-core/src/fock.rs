//! Truncated 2m-mode bosonic Fock space: basis enumeration, ladder
//! operators, state algebra and block-aware matrix exponentials.
//!
//! The basis is blocked by total photon number N (lexicographic within a
//! block), so any number-conserving generator is exactly block-diagonal and
//! its exponential can be taken densely per block with no truncation error.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{PcsError, Result};

/// Hard ceiling on the basis dimension; larger cutoffs signal a mistake.
pub const MAX_DIM: usize = 4_000_000;

/// Numerical tolerance bundle shared by every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub atol_linalg: f64,
    pub atol_phase: f64,
    /// Central finite-difference step (radians) for the numeric connection.
    pub fd_step: f64,
    pub segments_per_unit: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atol_linalg: 1e-12,
            atol_phase: 1e-6,
            fd_step: 1e-5,
            segments_per_unit: 1000,
        }
    }
}

/// Mode count, photon cutoff and tolerances: the numerical contract.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeConfig {
    pub m: usize,
    pub n_max: usize,
    pub tol: Tolerances,
}

impl ModeConfig {
    pub fn new(m: usize, n_max: usize) -> Result<Self> {
        let cfg = ModeConfig {
            m,
            n_max,
            tol: Tolerances::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tol(mut self, tol: Tolerances) -> Result<Self> {
        self.tol = tol;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(PcsError::InvalidConfig("m must be >= 1".into()));
        }
        let t = &self.tol;
        if !(t.atol_linalg > 0.0 && t.atol_phase > 0.0 && t.fd_step > 0.0) {
            return Err(PcsError::InvalidConfig("tolerances must be > 0".into()));
        }
        if t.segments_per_unit == 0 {
            return Err(PcsError::InvalidConfig(
                "segments_per_unit must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of bosonic modes (two polarizations per spatiotemporal mode).
    pub fn num_modes(&self) -> usize {
        2 * self.m
    }
}

/// Circular-polarization label of a mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub fn sign(self) -> f64 {
        match self {
            Helicity::Plus => 1.0,
            Helicity::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// Occupation-number multi-index, ordered (n+_1, n-_1, ..., n+_m, n-_m).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FockIndex(pub Vec<u32>);

impl FockIndex {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Ordered truncated Fock basis with constant-N blocks contiguous.
#[derive(Debug)]
pub struct Basis {
    config: ModeConfig,
    states: Vec<FockIndex>,
    index: HashMap<FockIndex, usize>,
    /// `blocks[n]` is the index range of the total-photon-number-n block.
    blocks: Vec<Range<usize>>,
}

fn enumerate_block(modes: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<FockIndex>) {
    if modes == 1 {
        prefix.push(total);
        out.push(FockIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        enumerate_block(modes - 1, total - first, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    usize::try_from(acc).ok()
}

impl Basis {
    /// Enumerate all occupations with total photon number <= n_max.
    pub fn new(config: ModeConfig) -> Result<Arc<Basis>> {
        config.validate()?;
        let modes = config.num_modes();
        let dim = binomial(config.n_max + modes, modes)
            .filter(|&d| d <= MAX_DIM)
            .ok_or(PcsError::DimensionOverflow {
                dim: usize::MAX,
                max: MAX_DIM,
            })?;
        let mut states = Vec::with_capacity(dim);
        let mut blocks = Vec::with_capacity(config.n_max + 1);
        for n in 0..=config.n_max as u32 {
            let start = states.len();
            enumerate_block(modes, n, &mut Vec::new(), &mut states);
            blocks.push(start..states.len());
        }
        debug_assert_eq!(states.len(), dim);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Arc::new(Basis {
            config,
            states,
            index,
            blocks,
        }))
    }

    pub fn config(&self) -> &ModeConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockIndex] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &FockIndex {
        &self.states[i]
    }

    pub fn position(&self, occ: &FockIndex) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Index range of the constant-N block.
    pub fn block(&self, n: usize) -> Range<usize> {
        self.blocks[n].clone()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Total photon number of the block holding basis index `i`.
    pub fn total_of(&self, i: usize) -> u32 {
        self.states[i].total()
    }

    /// Flat mode slot for (spatiotemporal mode j, helicity), 1-based j.
    pub fn slot(&self, j: usize, h: Helicity) -> Result<usize> {
        if j < 1 || j > self.config.m {
            return Err(PcsError::InvalidMode {
                j,
                m: self.config.m,
            });
        }
        Ok(2 * (j - 1)
            + match h {
                Helicity::Plus => 0,
                Helicity::Minus => 1,
            })
    }

    /// Interchangeability check: identical object or identical configuration.
    pub fn same(&self, other: &Basis) -> bool {
        std::ptr::eq(self, other) || self.config == other.config
    }
}

/// State vector over a truncated Fock basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub basis: Arc<Basis>,
    pub amp: Vec<Complex64>,
    /// Squared norm lost to the photon cutoff, where the constructor knows it
    /// (Glauber states); 0 for exact constructions.
    pub leakage: f64,
}

impl StateVector {
    pub fn zero(basis: &Arc<Basis>) -> StateVector {
        StateVector {
            basis: basis.clone(),
            amp: vec![Complex64::ZERO; basis.dim()],
            leakage: 0.0,
        }
    }

    pub fn vacuum(basis: &Arc<Basis>) -> StateVector {
        let mut s = Self::zero(basis);
        s.amp[0] = Complex64::ONE;
        s
    }

    /// Unit amplitude on a single occupation.
    pub fn basis_state(basis: &Arc<Basis>, occ: &FockIndex) -> Result<StateVector> {
        let i = basis
            .position(occ)
            .ok_or_else(|| PcsError::InvalidInput(format!("occupation {:?} not in basis", occ)))?;
        let mut s = Self::zero(basis);
        s.amp[i] = Complex64::ONE;
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(mut self) -> StateVector {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amp {
                *a /= n;
            }
        }
        self
    }

    pub fn scale(mut self, c: Complex64) -> StateVector {
        for a in &mut self.amp {
            *a *= c;
        }
        self
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if !self.basis.same(&other.basis) {
            return Err(PcsError::BasisMismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.amp.iter_mut().zip(&other.amp) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        if !self.basis.same(&other.basis) {
            return Err(PcsError::BasisMismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.amp.iter_mut().zip(&other.amp) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Inner product, conjugate-linear in the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if !a.basis.same(&b.basis) {
        return Err(PcsError::BasisMismatch);
    }
    Ok(a.amp
        .iter()
        .zip(&b.amp)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Sparse complex matrix over a Fock basis, CSR layout.
#[derive(Debug, Clone)]
pub struct Operator {
    pub basis: Arc<Basis>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl Operator {
    pub fn from_triplets(
        basis: &Arc<Basis>,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Operator {
        let dim = basis.dim();
        let mut rows: Vec<HashMap<usize, Complex64>> = vec![HashMap::new(); dim];
        for (r, c, v) in triplets {
            if v != Complex64::ZERO {
                *rows[r].entry(c).or_insert(Complex64::ZERO) += v;
            }
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            let mut entries: Vec<_> = row.into_iter().filter(|(_, v)| v.norm() > 0.0).collect();
            entries.sort_unstable_by_key(|&(c, _)| c);
            for (c, v) in entries {
                cols.push(c as u32);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Operator {
            basis: basis.clone(),
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn zero(basis: &Arc<Basis>) -> Operator {
        Self::from_triplets(basis, std::iter::empty())
    }

    pub fn identity(basis: &Arc<Basis>) -> Operator {
        let dim = basis.dim();
        Self::from_triplets(basis, (0..dim).map(|i| (i, i, Complex64::ONE)))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.basis.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.cols[k] as usize, self.vals[k]))
        })
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Sparse mat-vec.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if !self.basis.same(&s.basis) {
            return Err(PcsError::BasisMismatch);
        }
        let mut out = StateVector::zero(&self.basis);
        out.leakage = s.leakage;
        for r in 0..self.basis.dim() {
            let mut acc = Complex64::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * s.amp[self.cols[k] as usize];
            }
            out.amp[r] = acc;
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= c;
        }
        out
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if !self.basis.same(&other.basis) {
            return Err(PcsError::BasisMismatch);
        }
        Ok(Operator::from_triplets(
            &self.basis,
            self.entries().chain(other.entries()),
        ))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add(&other.scale(-Complex64::ONE))
    }

    /// Matrix product self * other (other acts first).
    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        if !self.basis.same(&other.basis) {
            return Err(PcsError::BasisMismatch);
        }
        let dim = self.basis.dim();
        let mut triplets = Vec::new();
        for r in 0..dim {
            let mut acc: HashMap<usize, Complex64> = HashMap::new();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.cols[k] as usize;
                let va = self.vals[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    *acc.entry(other.cols[k2] as usize)
                        .or_insert(Complex64::ZERO) += va * other.vals[k2];
                }
            }
            triplets.extend(acc.into_iter().map(|(c, v)| (r, c, v)));
        }
        Ok(Operator::from_triplets(&self.basis, triplets))
    }

    pub fn adjoint(&self) -> Operator {
        Operator::from_triplets(
            &self.basis,
            self.entries().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest |N(row) - N(col)| over nonzero entries.
    pub fn block_spread(&self) -> u32 {
        self.entries()
            .map(|(r, c, _)| {
                let nr = self.basis.total_of(r);
                let nc = self.basis.total_of(c);
                nr.abs_diff(nc)
            })
            .max()
            .unwrap_or(0)
    }

    /// Expectation value on a (not necessarily normalized) state.
    pub fn expectation(&self, s: &StateVector) -> Result<Complex64> {
        inner(s, &self.apply(s)?)
    }

    /// Dense copy of the constant-N block `n`.
    pub fn dense_block(&self, n: usize) -> DMatrix<Complex64> {
        let range = self.basis.block(n);
        let off = range.start;
        let size = range.len();
        let mut mat = DMatrix::zeros(size, size);
        for r in range.clone() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                if range.contains(&c) {
                    mat[(r - off, c - off)] = self.vals[k];
                }
            }
        }
        mat
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.basis.dim();
        let mut mat = DMatrix::zeros(dim, dim);
        for (r, c, v) in self.entries() {
            mat[(r, c)] = v;
        }
        mat
    }
}

/// Ladder operator on (mode j, helicity); creation entries that would exceed
/// the cutoff are dropped.
pub fn ladder(basis: &Arc<Basis>, j: usize, h: Helicity, kind: LadderKind) -> Result<Operator> {
    let slot = basis.slot(j, h)?;
    let n_max = basis.config().n_max as u32;
    let mut triplets = Vec::new();
    for (col, occ) in basis.states().iter().enumerate() {
        match kind {
            LadderKind::Create => {
                if occ.total() < n_max {
                    let mut target = occ.clone();
                    target.0[slot] += 1;
                    let row = basis.position(&target).expect("target under cutoff");
                    let amp = ((occ.0[slot] + 1) as f64).sqrt();
                    triplets.push((row, col, Complex64::new(amp, 0.0)));
                }
            }
            LadderKind::Annihilate => {
                if occ.0[slot] > 0 {
                    let mut target = occ.clone();
                    target.0[slot] -= 1;
                    let row = basis.position(&target).expect("target exists");
                    let amp = (occ.0[slot] as f64).sqrt();
                    triplets.push((row, col, Complex64::new(amp, 0.0)));
                }
            }
        }
    }
    Ok(Operator::from_triplets(basis, triplets))
}

/// Number operator for one slot.
pub fn number_op(basis: &Arc<Basis>, j: usize, h: Helicity) -> Result<Operator> {
    let slot = basis.slot(j, h)?;
    Ok(Operator::from_triplets(
        basis,
        basis
            .states()
            .iter()
            .enumerate()
            .map(|(i, occ)| (i, i, Complex64::new(occ.0[slot] as f64, 0.0))),
    ))
}

/// Dense matrix exponential by scaling-and-squaring with a Taylor core.
pub fn expm_dense(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    // crude norm estimate: max row sum
    let norm = (0..n)
        .map(|r| (0..n).map(|c| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30u32 {
        term = (&term * &scaled) / Complex64::new(k as f64, 0.0);
        result += &term;
        let tmax = term.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if tmax < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Apply exp(gen) to `s` block-by-block on the constant-N blocks.
///
/// `gen` must be anti-Hermitian and conserve total photon number; both are
/// checked against atol_linalg.
pub fn exp_antihermitian_apply(gen: &Operator, s: &StateVector) -> Result<StateVector> {
    if !gen.basis.same(&s.basis) {
        return Err(PcsError::BasisMismatch);
    }
    let atol = gen.basis.config().tol.atol_linalg;
    if gen.block_spread() != 0 {
        return Err(PcsError::NotBlockDiagonal);
    }
    let dev = gen.add(&gen.adjoint())?.max_abs();
    if dev > atol {
        return Err(PcsError::NotAntiHermitian { dev });
    }
    let mut out = StateVector::zero(&s.basis);
    out.leakage = s.leakage;
    for n in 0..s.basis.n_blocks() {
        let range = s.basis.block(n);
        let block_has_amp = range.clone().any(|i| s.amp[i] != Complex64::ZERO);
        if !block_has_amp {
            continue;
        }
        let g = gen.dense_block(n);
        if g.iter().all(|v| *v == Complex64::ZERO) {
            for i in range {
                out.amp[i] = s.amp[i];
            }
            continue;
        }
        let e = expm_dense(&g);
        let x = nalgebra::DVector::from_iterator(range.len(), range.clone().map(|i| s.amp[i]));
        let y = &e * x;
        for (k, i) in range.enumerate() {
            out.amp[i] = y[k];
        }
    }
    Ok(out)
}
