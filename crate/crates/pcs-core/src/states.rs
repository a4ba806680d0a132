//! Constructors for the polarization coherent-state families and the two
//! equivalent rotation pathways (displacement operator vs rotated creation
//! operators).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{PcsError, Result};
use crate::fock::{
    exp_antihermitian_apply, ladder, Basis, FockIndex, Helicity, LadderKind, Operator, StateVector,
};
use crate::quasispin::{build_quasispin, displacement_xi, mode_quasispin};

/// Half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(pub i32);

impl HalfInt {
    pub fn from_doubled(d: i32) -> Self {
        HalfInt(d)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn doubled(self) -> i32 {
        self.0
    }
}

/// Reference-state selector for every PCS family.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpec {
    /// Single spatiotemporal mode, 2p photons of one helicity.
    FockM1 { helicity: Helicity, p: HalfInt },
    /// Two spatiotemporal modes with biphoton clusters; 2t is the photon
    /// number difference between the modes.
    TwoMode {
        helicity: Helicity,
        p: HalfInt,
        n: u32,
        t: HalfInt,
    },
    /// Product of per-mode Fock states of one helicity.
    Independent { helicity: Helicity, n_list: Vec<u32> },
    /// Multimode Glauber coherent state, one (alpha+, alpha-) pair per mode.
    Glauber { alphas: Vec<(Complex64, Complex64)> },
}

/// Poincare-sphere rotation; `per_mode` drives the independent-mode picture.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSpec {
    pub theta: f64,
    pub phi: f64,
    pub per_mode: Option<Vec<(f64, f64)>>,
}

impl RotationSpec {
    pub fn collective(theta: f64, phi: f64) -> Self {
        RotationSpec {
            theta,
            phi,
            per_mode: None,
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// Total mean photon number of a Glauber spec.
pub fn glauber_mean_photons(alphas: &[(Complex64, Complex64)]) -> f64 {
    alphas
        .iter()
        .map(|(p, m)| p.norm_sqr() + m.norm_sqr())
        .sum()
}

/// Smallest cutoff whose Poisson tail (in total photon number) is below `tail`.
pub fn glauber_cutoff(alphas: &[(Complex64, Complex64)], tail: f64) -> usize {
    let mu = glauber_mean_photons(alphas);
    let mut pmf = (-mu).exp();
    let mut cdf = pmf;
    let mut n = 0usize;
    while 1.0 - cdf > tail && n < 10_000 {
        n += 1;
        pmf *= mu / n as f64;
        cdf += pmf;
    }
    n
}

fn check_fock_m1(basis: &Basis, p: HalfInt) -> Result<u32> {
    if basis.config().m != 1 {
        return Err(PcsError::InvalidQuantumNumbers(
            "fock_m1 reference requires m = 1".into(),
        ));
    }
    if p.doubled() < 0 {
        return Err(PcsError::InvalidQuantumNumbers("p must be >= 0".into()));
    }
    let n = p.doubled() as u32; // n = 2p
    if n as usize > basis.config().n_max {
        return Err(PcsError::CutoffTooSmall {
            n_max: basis.config().n_max,
            reason: format!("fock_m1 reference needs n_max >= {n}"),
        });
    }
    Ok(n)
}

fn check_two_mode(basis: &Basis, p: HalfInt, n: u32, t: HalfInt) -> Result<(u32, u32, u32)> {
    if basis.config().m != 2 {
        return Err(PcsError::InvalidQuantumNumbers(
            "two_mode reference requires m = 2".into(),
        ));
    }
    if p.doubled() < 0 {
        return Err(PcsError::InvalidQuantumNumbers("p must be >= 0".into()));
    }
    // n/2 - p must be a non-negative integer and |t| <= p
    let half_n_minus_p_doubled = n as i32 - p.doubled();
    if half_n_minus_p_doubled < 0 || half_n_minus_p_doubled % 2 != 0 {
        return Err(PcsError::InvalidQuantumNumbers(format!(
            "n/2 - p must be a non-negative integer (n = {n}, 2p = {})",
            p.doubled()
        )));
    }
    if t.doubled().abs() > p.doubled() || (t.doubled() - p.doubled()) % 2 != 0 {
        return Err(PcsError::InvalidQuantumNumbers(format!(
            "t must satisfy |t| <= p with p - t integer (2p = {}, 2t = {})",
            p.doubled(),
            t.doubled()
        )));
    }
    if n as usize > basis.config().n_max {
        return Err(PcsError::CutoffTooSmall {
            n_max: basis.config().n_max,
            reason: format!("two_mode reference needs n_max >= {n}"),
        });
    }
    let p_plus_t = ((p.doubled() + t.doubled()) / 2) as u32;
    let p_minus_t = ((p.doubled() - t.doubled()) / 2) as u32;
    let clusters = (half_n_minus_p_doubled / 2) as u32;
    Ok((p_plus_t, p_minus_t, clusters))
}

fn apply_power(op: &Operator, s: StateVector, power: u32) -> Result<StateVector> {
    let mut out = s;
    for _ in 0..power {
        out = op.apply(&out)?;
    }
    Ok(out)
}

/// Glauber state built directly from per-mode Poisson amplitudes; `leakage`
/// records the squared norm beyond the cutoff. The state is left
/// unnormalized so the deficiency stays visible.
fn glauber_state(basis: &Arc<Basis>, alphas: &[(Complex64, Complex64)]) -> Result<StateVector> {
    if alphas.len() != basis.config().m {
        return Err(PcsError::InvalidQuantumNumbers(format!(
            "glauber spec needs {} (alpha+, alpha-) pairs, got {}",
            basis.config().m,
            alphas.len()
        )));
    }
    let n_max = basis.config().n_max;
    // per-slot amplitude tables alpha^n / sqrt(n!), with the Gaussian
    // prefactor folded in per slot
    let mut tables: Vec<Vec<Complex64>> = Vec::with_capacity(2 * alphas.len());
    for (ap, am) in alphas {
        for alpha in [ap, am] {
            let pref = (-alpha.norm_sqr() / 2.0).exp();
            let mut tab = Vec::with_capacity(n_max + 1);
            let mut cur = Complex64::new(pref, 0.0);
            tab.push(cur);
            for n in 1..=n_max {
                cur *= alpha / Complex64::new((n as f64).sqrt(), 0.0);
                tab.push(cur);
            }
            tables.push(tab);
        }
    }
    let mut s = StateVector::zero(basis);
    for (i, occ) in basis.states().iter().enumerate() {
        let mut amp = Complex64::ONE;
        for (slot, &n) in occ.0.iter().enumerate() {
            amp *= tables[slot][n as usize];
        }
        s.amp[i] = amp;
    }
    s.leakage = (1.0 - s.norm().powi(2)).max(0.0);
    Ok(s)
}

/// Build the reference state of a family on the given basis.
pub fn make_reference(spec: &ReferenceSpec, basis: &Arc<Basis>) -> Result<StateVector> {
    match spec {
        ReferenceSpec::FockM1 { helicity, p } => {
            let n = check_fock_m1(basis, *p)?;
            let occ = match helicity {
                Helicity::Plus => vec![n, 0],
                Helicity::Minus => vec![0, n],
            };
            StateVector::basis_state(basis, &FockIndex(occ))
        }
        ReferenceSpec::TwoMode { helicity, p, n, t } => {
            let (p_plus_t, p_minus_t, clusters) = check_two_mode(basis, *p, *n, *t)?;
            let c1 = ladder(basis, 1, *helicity, LadderKind::Create)?;
            let c2 = ladder(basis, 2, *helicity, LadderKind::Create)?;
            let x = crate::quasispin::cluster_op(basis, 1, 2)?;
            let mut s = StateVector::vacuum(basis);
            s = apply_power(&x, s, clusters)?;
            s = apply_power(&c2, s, p_minus_t)?;
            s = apply_power(&c1, s, p_plus_t)?;
            // printed prefactor, then numeric renormalization
            let half_n_plus_p = ((*n as i32 + p.doubled()) / 2) as u32; // n/2 + p
            let num = factorial(half_n_plus_p + 1)
                * factorial(clusters)
                * factorial(p_plus_t)
                * factorial(p_minus_t);
            let den = factorial(p.doubled() as u32 + 1);
            let prefactor = (num / den).sqrt().recip();
            let s = s.scale(Complex64::new(prefactor, 0.0));
            let norm = s.norm();
            if (norm - 1.0).abs() > 1e-9 {
                log::warn!(
                    "two-mode reference prefactor gives norm {norm:.12}; renormalizing \
                     (2p = {}, n = {n}, 2t = {})",
                    p.doubled(),
                    t.doubled()
                );
            }
            Ok(s.normalize())
        }
        ReferenceSpec::Independent { helicity, n_list } => {
            if n_list.len() != basis.config().m {
                return Err(PcsError::InvalidQuantumNumbers(format!(
                    "independent spec needs {} photon numbers, got {}",
                    basis.config().m,
                    n_list.len()
                )));
            }
            let total: u32 = n_list.iter().sum();
            if total as usize > basis.config().n_max {
                return Err(PcsError::CutoffTooSmall {
                    n_max: basis.config().n_max,
                    reason: format!("independent reference needs n_max >= {total}"),
                });
            }
            let mut occ = vec![0u32; 2 * basis.config().m];
            for (j, &n) in n_list.iter().enumerate() {
                let slot = 2 * j
                    + match helicity {
                        Helicity::Plus => 0,
                        Helicity::Minus => 1,
                    };
                occ[slot] = n;
            }
            StateVector::basis_state(basis, &FockIndex(occ))
        }
        ReferenceSpec::Glauber { alphas } => {
            let s = glauber_state(basis, alphas)?;
            if s.leakage >= 1e-12 {
                return Err(PcsError::CutoffTooSmall {
                    n_max: basis.config().n_max,
                    reason: format!(
                        "glauber tail probability {:.3e} >= 1e-12; need n_max >= {}",
                        s.leakage,
                        glauber_cutoff(alphas, 1e-12)
                    ),
                });
            }
            Ok(s)
        }
    }
}

/// Apply the collective displacement exp(xi P+ - xi* P-) to a state.
pub fn rotate_state(s: &StateVector, rot: &RotationSpec) -> Result<StateVector> {
    let set = build_quasispin(&s.basis)?;
    rotate_state_with(&set.p_plus, &set.p_minus, s, rot.theta, rot.phi)
}

/// Displacement with pre-built quasispin raising/lowering operators.
pub fn rotate_state_with(
    p_plus: &Operator,
    p_minus: &Operator,
    s: &StateVector,
    theta: f64,
    phi: f64,
) -> Result<StateVector> {
    let xi = displacement_xi(theta, phi);
    let gen = p_plus.scale(xi).sub(&p_minus.scale(xi.conj()))?;
    exp_antihermitian_apply(&gen, s)
}

/// Rotated creation operator a+_h(j; theta, phi) of the elliptically
/// polarized photon.
pub fn rotated_creation(
    basis: &Arc<Basis>,
    j: usize,
    h: Helicity,
    theta: f64,
    phi: f64,
) -> Result<Operator> {
    let cp = ladder(basis, j, Helicity::Plus, LadderKind::Create)?;
    let cm = ladder(basis, j, Helicity::Minus, LadderKind::Create)?;
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    match h {
        Helicity::Plus => cp
            .scale(c)
            .add(&cm.scale(Complex64::new(0.0, phi).exp() * s)),
        Helicity::Minus => cm
            .scale(c)
            .sub(&cp.scale(Complex64::new(0.0, -phi).exp() * s)),
    }
}

/// The SU(2) map on Glauber parameters induced by the displacement.
pub fn transform_glauber_params(
    alphas: &[(Complex64, Complex64)],
    theta: f64,
    phi: f64,
) -> Vec<(Complex64, Complex64)> {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let e_minus = Complex64::new(0.0, -phi).exp();
    let e_plus = Complex64::new(0.0, phi).exp();
    alphas
        .iter()
        .map(|&(ap, am)| (ap * c - am * e_minus * s, am * c + ap * e_plus * s))
        .collect()
}

/// Build the rotated PCS.
///
/// Glauber references use the exact parameter transformation, the
/// independent kind applies per-mode displacements, everything else goes
/// through the collective displacement operator.
pub fn make_pcs(spec: &ReferenceSpec, rot: &RotationSpec, basis: &Arc<Basis>) -> Result<StateVector> {
    match spec {
        ReferenceSpec::Glauber { alphas } => {
            let rotated = transform_glauber_params(alphas, rot.theta, rot.phi);
            make_reference(&ReferenceSpec::Glauber { alphas: rotated }, basis)
        }
        ReferenceSpec::Independent { .. } => {
            let per_mode = rot.per_mode.as_ref().ok_or_else(|| {
                PcsError::InvalidInput(
                    "independent reference needs per_mode rotation angles".into(),
                )
            })?;
            if per_mode.len() != basis.config().m {
                return Err(PcsError::InvalidInput(format!(
                    "per_mode needs {} entries, got {}",
                    basis.config().m,
                    per_mode.len()
                )));
            }
            let mut s = make_reference(spec, basis)?;
            for (j, &(theta_j, phi_j)) in per_mode.iter().enumerate() {
                let (pp, pm) = mode_quasispin(basis, j + 1)?;
                s = rotate_state_with(&pp, &pm, &s, theta_j, phi_j)?;
            }
            Ok(s)
        }
        _ => {
            let reference = make_reference(spec, basis)?;
            rotate_state(&reference, rot)
        }
    }
}
