//! SU(2) quasiprobability machinery: density matrices, product quadrature
//! grids on the sphere, the Q-function against a coherent-state family and
//! the finite-grid resolution of identity.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{PcsError, Result};
use crate::fock::{Basis, ModeConfig, StateVector};
use crate::phase::StateFamily;
use crate::sphere::SpherePoint;
use crate::states::{HalfInt, ReferenceSpec};

/// A validated density operator on the truncated Fock space. Dense storage:
/// intended for the moderate dimensions the quasiprobability diagnostics
/// run at, not for the large Glauber cutoff bases.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub basis: Arc<Basis>,
    pub mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positive semidefiniteness.
    pub fn new(basis: Arc<Basis>, mat: DMatrix<Complex64>) -> Result<DensityMatrix> {
        let dim = basis.dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(PcsError::InvalidDensity(format!(
                "matrix is {}x{}, basis dimension is {dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let atol = basis.config().tol.atol_linalg;
        let herm_dev = (&mat - mat.adjoint()).norm();
        if herm_dev > atol * (dim as f64).sqrt() {
            return Err(PcsError::InvalidDensity(format!(
                "not Hermitian: deviation {herm_dev:.3e}"
            )));
        }
        let trace = mat.trace();
        if (trace - Complex64::ONE).norm() > 1e-10 * dim as f64 {
            return Err(PcsError::InvalidDensity(format!("trace is {trace}, not 1")));
        }
        let eig = mat.symmetric_eigenvalues();
        let min = eig.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if min < -1e-10 {
            return Err(PcsError::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix { basis, mat })
    }

    pub fn from_pure(state: &StateVector) -> Result<DensityMatrix> {
        let s = state.clone().normalize();
        let dim = s.basis.dim();
        let v = DMatrix::from_fn(dim, 1, |i, _| s.amp[i]);
        let mat = &v * v.adjoint();
        DensityMatrix::new(s.basis.clone(), mat)
    }

    /// <psi| rho |psi> (real up to roundoff for valid rho).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if !self.basis.same(&psi.basis) {
            return Err(PcsError::BasisMismatch);
        }
        let mut acc = Complex64::ZERO;
        for i in 0..self.basis.dim() {
            let mut row = Complex64::ZERO;
            for j in 0..self.basis.dim() {
                row += self.mat[(i, j)] * psi.amp[j];
            }
            acc += psi.amp[i].conj() * row;
        }
        Ok(acc.re)
    }

    /// Partial trace onto mode `j` (1-based): a density matrix on the
    /// single-mode basis with the same photon cutoff.
    pub fn reduce_to_mode(&self, j: usize) -> Result<DensityMatrix> {
        let m = self.basis.config().m;
        if j == 0 || j > m {
            return Err(PcsError::InvalidMode { j, m });
        }
        let target = Basis::new(
            ModeConfig::new(1, self.basis.config().n_max)?
                .with_tol(self.basis.config().tol.clone())?,
        )?;
        // map every full index to (local single-mode position, rest tuple)
        let split: Vec<(usize, Vec<u32>)> = (0..self.basis.dim())
            .map(|i| {
                let occ = &self.basis.state(i).0;
                let local = crate::fock::FockIndex(vec![occ[2 * (j - 1)], occ[2 * (j - 1) + 1]]);
                let rest: Vec<u32> = occ
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| k / 2 != j - 1)
                    .map(|(_, &n)| n)
                    .collect();
                (target.position(&local).expect("cutoff is shared"), rest)
            })
            .collect();
        let mut groups: HashMap<&[u32], Vec<usize>> = HashMap::new();
        for (i, (_, rest)) in split.iter().enumerate() {
            groups.entry(rest).or_default().push(i);
        }
        let mut red = DMatrix::zeros(target.dim(), target.dim());
        for indices in groups.values() {
            for &i in indices {
                for &k in indices {
                    red[(split[i].0, split[k].0)] += self.mat[(i, k)];
                }
            }
        }
        DensityMatrix::new(target, red)
    }
}

/// Product quadrature grid: Gauss-Legendre in cos(theta) times a uniform
/// azimuth grid. Weights sum to 4 pi.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// (point, weight) pairs covering the whole sphere.
    pub nodes: Vec<(SpherePoint, f64)>,
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=(n + 1) / 2 {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // p_k(x) and derivative via the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
        if 2 * i != n + 1 {
            out.push((-x, w));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<SphereGrid> {
        if n_theta == 0 || n_phi == 0 {
            return Err(PcsError::InsufficientGrid(
                "at least one node in each direction".into(),
            ));
        }
        let gl = gauss_legendre(n_theta);
        let wphi = TAU / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for &(x, w) in &gl {
            let theta = x.clamp(-1.0, 1.0).acos();
            for k in 0..n_phi {
                nodes.push((SpherePoint::new(theta, wphi * k as f64), w * wphi));
            }
        }
        Ok(SphereGrid {
            n_theta,
            n_phi,
            nodes,
        })
    }

    /// The default grid that integrates spin-p coherent projectors exactly.
    pub fn for_spin(p: HalfInt) -> Result<SphereGrid> {
        let dp = p.doubled().max(0) as usize;
        SphereGrid::new(dp + 2, 2 * dp + 4)
    }

    /// Exactness precondition for spin p: the theta rule must handle degree
    /// 2p in cos(theta) and the phi rule 2p harmonics.
    pub fn check_degree(&self, p: HalfInt) -> Result<()> {
        let dp = p.doubled();
        if (2 * self.n_theta as i32) < dp + 2 || (self.n_phi as i32) < 2 * dp + 1 {
            return Err(PcsError::InsufficientGrid(
                format!(
                    "spin {} needs >= {} theta nodes and >= {} phi nodes, grid is {}x{}",
                    dp as f64 / 2.0,
                    (dp + 3) / 2,
                    2 * dp + 1,
                    self.n_theta,
                    self.n_phi
                ),
            ));
        }
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|&(_, w)| w).sum()
    }
}

/// Q(theta, phi) = <theta, phi| rho |theta, phi> against the family's
/// coherent states.
pub fn q_function(family: &StateFamily, rho: &DensityMatrix, at: SpherePoint) -> Result<f64> {
    rho.expectation(&family.evaluate(at)?)
}

/// Q sampled over a grid, in the grid's node order.
pub fn q_on_grid(
    family: &StateFamily,
    rho: &DensityMatrix,
    grid: &SphereGrid,
) -> Result<Vec<f64>> {
    grid.nodes
        .iter()
        .map(|&(pt, _)| q_function(family, rho, pt))
        .collect()
}

fn family_spin(spec: &ReferenceSpec) -> Result<HalfInt> {
    match spec {
        ReferenceSpec::FockM1 { p, .. } => Ok(*p),
        ReferenceSpec::TwoMode { p, .. } => Ok(*p),
        other => Err(PcsError::InvalidInput(format!(
            "resolution of identity needs a single-spin reference, got {other:?}"
        ))),
    }
}

/// (2p+1)/(4 pi) * sum of w |theta,phi><theta,phi| over the grid. For a
/// spin-p reference and a grid passing [`SphereGrid::check_degree`] this is
/// exactly the projector onto the irreducible subspace carrying the family.
pub fn identity_resolution(
    family: &StateFamily,
    grid: &SphereGrid,
) -> Result<DMatrix<Complex64>> {
    let p = family_spin(family.spec())?;
    grid.check_degree(p)?;
    let dim = family.basis().dim();
    let mut acc = DMatrix::zeros(dim, dim);
    for &(pt, w) in &grid.nodes {
        let psi = family.evaluate(pt)?;
        let scale = w * (p.doubled() as f64 + 1.0) / (4.0 * PI);
        for i in 0..dim {
            if psi.amp[i].norm_sqr() < 1e-28 {
                continue;
            }
            let row = psi.amp[i] * scale;
            for k in 0..dim {
                acc[(i, k)] += row * psi.amp[k].conj();
            }
        }
    }
    Ok(acc)
}

/// Q-function of the state reduced to mode `j`, evaluated against a
/// single-mode family built from `spec`.
pub fn reduced_q(
    rho: &DensityMatrix,
    j: usize,
    spec: ReferenceSpec,
    at: SpherePoint,
) -> Result<f64> {
    let red = rho.reduce_to_mode(j)?;
    let family = StateFamily::new(spec, &red.basis)?;
    q_function(&family, &red, at)
}
