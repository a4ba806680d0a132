//! Polarization quasispin operators, the SU(2)-invariant biphoton cluster,
//! Stokes/Poincare expectation values and the Wigner D1 covariance matrix.
//!
//! Conventions: P+ = sum_j a+_+(j) a_-(j), P0 = (1/2) sum_j (n+_j - n-_j),
//! P1 = (P+ + P-)/2, P2 = (P+ - P-)/(2i). With these, the rotated
//! single-photon state gives the conventional Poincare parameterization
//! (<P0>, <P1>, <P2>) = R (cos t, sin t cos f, sin t sin f).

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{PcsError, Result};
use crate::fock::{expm_dense, ladder, Basis, Helicity, LadderKind, Operator, StateVector};

/// The collective polarization quasispin algebra on a basis.
#[derive(Debug, Clone)]
pub struct QuasispinSet {
    pub p_plus: Operator,
    pub p_minus: Operator,
    pub p0: Operator,
    pub p1: Operator,
    pub p2: Operator,
    pub p_squared: Operator,
    pub n_total: Operator,
}

/// Single-mode quasispin raising/lowering pair, used for the picture of
/// independent spatiotemporal modes.
pub fn mode_quasispin(basis: &Arc<Basis>, j: usize) -> Result<(Operator, Operator)> {
    let cp = ladder(basis, j, Helicity::Plus, LadderKind::Create)?;
    let am = ladder(basis, j, Helicity::Minus, LadderKind::Annihilate)?;
    let p_plus = cp.mul(&am)?;
    let p_minus = p_plus.adjoint();
    Ok((p_plus, p_minus))
}

pub fn build_quasispin(basis: &Arc<Basis>) -> Result<QuasispinSet> {
    let m = basis.config().m;
    let mut p_plus = Operator::zero(basis);
    let mut p0 = Operator::zero(basis);
    let mut n_total = Operator::zero(basis);
    for j in 1..=m {
        let (pp, _) = mode_quasispin(basis, j)?;
        p_plus = p_plus.add(&pp)?;
        let np = crate::fock::number_op(basis, j, Helicity::Plus)?;
        let nm = crate::fock::number_op(basis, j, Helicity::Minus)?;
        p0 = p0.add(&np.sub(&nm)?.scale(Complex64::new(0.5, 0.0)))?;
        n_total = n_total.add(&np.add(&nm)?)?;
    }
    let p_minus = p_plus.adjoint();
    let p1 = p_plus.add(&p_minus)?.scale(Complex64::new(0.5, 0.0));
    let p2 = p_plus.sub(&p_minus)?.scale(Complex64::new(0.0, -0.5));
    let p_squared = p_plus
        .mul(&p_minus)?
        .add(&p_minus.mul(&p_plus)?)?
        .scale(Complex64::new(0.5, 0.0))
        .add(&p0.mul(&p0)?)?;
    Ok(QuasispinSet {
        p_plus,
        p_minus,
        p0,
        p1,
        p2,
        p_squared,
        n_total,
    })
}

/// X+_ij = a+_+(i) a+_-(j) - a+_-(i) a+_+(j), the SU(2)-invariant
/// two-photon cluster creation operator.
pub fn cluster_op(basis: &Arc<Basis>, i: usize, j: usize) -> Result<Operator> {
    let m = basis.config().m;
    if i == j || i < 1 || j < 1 || i > m || j > m || i >= j {
        return Err(PcsError::InvalidInput(format!(
            "cluster indices require 1 <= i < j <= m, got ({i}, {j}) with m = {m}"
        )));
    }
    let cpi = ladder(basis, i, Helicity::Plus, LadderKind::Create)?;
    let cmi = ladder(basis, i, Helicity::Minus, LadderKind::Create)?;
    let cpj = ladder(basis, j, Helicity::Plus, LadderKind::Create)?;
    let cmj = ladder(basis, j, Helicity::Minus, LadderKind::Create)?;
    cpi.mul(&cmj)?.sub(&cmi.mul(&cpj)?)
}

/// Quantum Stokes vector with the Poincare-sphere radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasispinExpectation {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizePolicy {
    Reject,
    Normalize,
}

pub fn stokes_vector(
    set: &QuasispinSet,
    s: &StateVector,
    policy: NormalizePolicy,
) -> Result<QuasispinExpectation> {
    let atol = s.basis.config().tol.atol_linalg;
    let norm = s.norm();
    let s = if (norm - 1.0).abs() > atol {
        match policy {
            NormalizePolicy::Reject => return Err(PcsError::NotNormalized { norm }),
            NormalizePolicy::Normalize => s.clone().normalize(),
        }
    } else {
        s.clone()
    };
    let e0 = set.p0.expectation(&s)?;
    let e1 = set.p1.expectation(&s)?;
    let e2 = set.p2.expectation(&s)?;
    for e in [e0, e1, e2] {
        if e.im.abs() > 1e-10 {
            return Err(PcsError::InvalidInput(format!(
                "quasispin expectation has imaginary part {:.3e}",
                e.im
            )));
        }
    }
    let (p0, p1, p2) = (e0.re, e1.re, e2.re);
    Ok(QuasispinExpectation {
        p0,
        p1,
        p2,
        radius: (p0 * p0 + p1 * p1 + p2 * p2).sqrt(),
    })
}

/// Displacement parameter of the SU(2) rotation: xi = -(theta/2) e^{-i phi}.
pub fn displacement_xi(theta: f64, phi: f64) -> Complex64 {
    Complex64::new(0.0, -phi).exp() * Complex64::new(-theta / 2.0, 0.0)
}

/// The 3x3 rotation acting on (P0, P1, P2) expectation triples under the
/// displacement-operator rotation by (theta, phi).
///
/// Computed once from the N=1 block of the m=1 space, so it is exactly
/// consistent with the displacement convention xi = -(theta/2) e^{-i phi}.
pub fn wigner_d1(theta: f64, phi: f64) -> DMatrix<f64> {
    // N=1 block, basis order (|0,1>, |1,0>) = (minus, plus) per the
    // lexicographic enumeration.
    let z = Complex64::ZERO;
    let half = Complex64::new(0.5, 0.0);
    // P+ = |plus><minus|: row plus(index 1), col minus(index 0)
    let p_plus = DMatrix::from_row_slice(2, 2, &[z, z, Complex64::ONE, z]);
    let p_minus = p_plus.adjoint();
    let p0 = DMatrix::from_row_slice(2, 2, &[-half, z, z, half]);
    let p1 = (&p_plus + &p_minus) * half;
    let p2 = (&p_plus - &p_minus) * Complex64::new(0.0, -0.5);
    let xi = displacement_xi(theta, phi);
    let gen = &p_plus * xi - &p_minus * xi.conj();
    let u = expm_dense(&gen);
    let ops = [p0, p1, p2];
    let mut d = DMatrix::zeros(3, 3);
    for (a, pa) in ops.iter().enumerate() {
        let conj = u.adjoint() * pa * &u;
        for (b, pb) in ops.iter().enumerate() {
            // tr(Pa Pb) = delta_ab / 2 on the block
            let t = (&conj * pb).trace();
            d[(a, b)] = 2.0 * t.re;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{exp_antihermitian_apply, inner, FockIndex, ModeConfig};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn basis(m: usize, n_max: usize) -> Arc<Basis> {
        Basis::new(ModeConfig::new(m, n_max).unwrap()).unwrap()
    }

    fn single(b: &Arc<Basis>, occ: &[u32]) -> StateVector {
        StateVector::basis_state(b, &FockIndex(occ.to_vec())).unwrap()
    }

    #[test]
    fn p0_on_single_photons() {
        let b = basis(1, 2);
        let set = build_quasispin(&b).unwrap();
        let plus = single(&b, &[1, 0]);
        let minus = single(&b, &[0, 1]);
        assert_abs_diff_eq!(set.p0.expectation(&plus).unwrap().re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(set.p0.expectation(&minus).unwrap().re, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn quasispin_commutators_interior() {
        let b = basis(2, 3);
        let set = build_quasispin(&b).unwrap();
        // [P+, P-] = 2 P0 and [P0, P+] = P+; P ops conserve N so these hold
        // on every block.
        let c1 = set.p_plus.commutator(&set.p_minus).unwrap();
        let d1 = c1.sub(&set.p0.scale(Complex64::new(2.0, 0.0))).unwrap();
        assert!(d1.max_abs() < 1e-12);
        let c2 = set.p0.commutator(&set.p_plus).unwrap();
        let d2 = c2.sub(&set.p_plus).unwrap();
        assert!(d2.max_abs() < 1e-12);
    }

    #[test]
    fn n_commutes_with_p_exactly() {
        let b = basis(2, 3);
        let set = build_quasispin(&b).unwrap();
        for op in [&set.p_plus, &set.p_minus, &set.p0, &set.p1, &set.p2] {
            let c = set.n_total.commutator(op).unwrap();
            assert_eq!(c.nnz(), 0);
            assert_eq!(op.block_spread(), 0);
        }
    }

    #[test]
    fn cluster_expansion_and_norm() {
        let b = basis(2, 2);
        let x = cluster_op(&b, 1, 2).unwrap();
        let s = x.apply(&StateVector::vacuum(&b)).unwrap();
        let a = b.position(&FockIndex(vec![1, 0, 0, 1])).unwrap();
        let c = b.position(&FockIndex(vec![0, 1, 1, 0])).unwrap();
        assert_abs_diff_eq!(s.amp[a].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.amp[c].re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.norm(), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn cluster_invalid_indices() {
        let b = basis(2, 2);
        assert!(cluster_op(&b, 1, 1).is_err());
        assert!(cluster_op(&b, 2, 1).is_err());
        assert!(cluster_op(&b, 1, 3).is_err());
    }

    #[test]
    fn cluster_commutes_with_quasispin_interior() {
        // [P_alpha, X+_12] = 0 on states with N <= n_max - 2 (X raises N by 2).
        let b = basis(2, 4);
        let set = build_quasispin(&b).unwrap();
        let x = cluster_op(&b, 1, 2).unwrap();
        for op in [&set.p_plus, &set.p_minus, &set.p0] {
            let c = op.commutator(&x).unwrap();
            for (_, col, v) in c.entries() {
                if b.total_of(col) <= 2 {
                    assert!(v.norm() < 1e-12, "commutator entry {v}");
                }
            }
        }
    }

    #[test]
    fn stokes_on_helicity_eigenstate() {
        // |p=1>_+ = (a+_+)^2 |0> / sqrt(2)
        let b = basis(1, 2);
        let set = build_quasispin(&b).unwrap();
        let s = single(&b, &[2, 0]);
        let e = stokes_vector(&set, &s, NormalizePolicy::Reject).unwrap();
        assert_abs_diff_eq!(e.p0, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.p1, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.p2, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.radius, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn stokes_rejects_unnormalized() {
        let b = basis(1, 2);
        let set = build_quasispin(&b).unwrap();
        let s = single(&b, &[1, 0]).scale(Complex64::new(2.0, 0.0));
        assert!(matches!(
            stokes_vector(&set, &s, NormalizePolicy::Reject),
            Err(PcsError::NotNormalized { .. })
        ));
        let e = stokes_vector(&set, &s, NormalizePolicy::Normalize).unwrap();
        assert_abs_diff_eq!(e.p0, 0.5, epsilon = 1e-14);
    }

    fn rotate(b: &Arc<Basis>, set: &QuasispinSet, s: &StateVector, theta: f64, phi: f64) -> StateVector {
        let _ = b;
        let xi = displacement_xi(theta, phi);
        let gen = set
            .p_plus
            .scale(xi)
            .sub(&set.p_minus.scale(xi.conj()))
            .unwrap();
        exp_antihermitian_apply(&gen, s).unwrap()
    }

    #[test]
    fn rotated_half_spin_parameterizes_sphere() {
        // oracle: <P_alpha> = (1/2)(cos t, sin t cos f, sin t sin f)
        let b = basis(1, 1);
        let set = build_quasispin(&b).unwrap();
        let s = single(&b, &[1, 0]);
        for (theta, phi) in [(0.7, 1.3), (2.1, 4.9), (1.5707963267948966, 0.0)] {
            let r = rotate(&b, &set, &s, theta, phi);
            let e = stokes_vector(&set, &r, NormalizePolicy::Reject).unwrap();
            assert_abs_diff_eq!(e.p0, 0.5 * theta.cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(e.p1, 0.5 * theta.sin() * phi.cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(e.p2, 0.5 * theta.sin() * phi.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn wigner_d1_identity_and_pole_flip() {
        let d = wigner_d1(0.0, 1.234);
        assert!((&d - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
        let flip = wigner_d1(std::f64::consts::PI, 0.0);
        let v = flip * nalgebra::DVector::from_row_slice(&[1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(v[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn wigner_d1_orthogonal_det_one() {
        let d = wigner_d1(1.1, 2.7);
        let dtd = d.transpose() * &d;
        assert!((dtd - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
        let d = wigner_d1(1.1, 2.7);
        assert_abs_diff_eq!(d.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wigner_d1_covariance_random_states() {
        // D1 . stokes(psi) = stokes(rotate(psi)) for random states
        let b = basis(2, 3);
        let set = build_quasispin(&b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut s = StateVector::zero(&b);
            for a in &mut s.amp {
                *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let s = s.normalize();
            let theta = rng.gen_range(0.0..std::f64::consts::PI);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let e = stokes_vector(&set, &s, NormalizePolicy::Reject).unwrap();
            let rotated = rotate(&b, &set, &s, theta, phi);
            let er = stokes_vector(&set, &rotated, NormalizePolicy::Reject).unwrap();
            let d = wigner_d1(theta, phi);
            let v = d * nalgebra::DVector::from_row_slice(&[e.p0, e.p1, e.p2]);
            assert_abs_diff_eq!(er.p0, v[0], epsilon = 1e-10);
            assert_abs_diff_eq!(er.p1, v[1], epsilon = 1e-10);
            assert_abs_diff_eq!(er.p2, v[2], epsilon = 1e-10);
            // radius invariance
            assert_abs_diff_eq!(er.radius, e.radius, epsilon = 1e-10);
            // unitarity of the rotation
            assert_abs_diff_eq!(rotated.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                inner(&rotated, &rotated).unwrap().re,
                1.0,
                epsilon = 1e-12
            );
        }
    }
}
