//! Geometric phases of the coherent-state families: numeric gauge
//! potential, discrete overlap (Bargmann) product, closed-form overlaps and
//! phases, the quasispin-weighted component decomposition and Hannay angles.
//!
//! Sign convention: the overall sign of gamma is pinned so that the p = 1/2
//! family on the equator loop acquires +pi, i.e. half the enclosed solid
//! angle, matching the classical plane-wave result. With the displacement
//! convention xi = -(theta/2) e^{-i phi} this means
//! gamma = + loop integral of Im<psi|d psi>.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{PcsError, Result};
use crate::fock::{inner, Basis, Helicity, Operator, StateVector};
use crate::quasispin::build_quasispin;
use crate::sphere::{contour_integrals, ContourIntegrals, SpherePath, SpherePoint, POLE_GUARD};
use crate::states::{
    make_reference, rotate_state_with, transform_glauber_params, HalfInt, ReferenceSpec,
};

/// Numeric-connection samples never evaluate closer to a pole than this;
/// the nudge perturbs the integral by O(clamp^2).
const POLE_CLAMP: f64 = 1e-7;

/// A single-valued family of normalized states over the Poincare sphere,
/// obtained by displacing a fixed reference.
pub struct StateFamily {
    basis: Arc<Basis>,
    spec: ReferenceSpec,
    reference: StateVector,
    p_plus: Operator,
    p_minus: Operator,
}

impl StateFamily {
    pub fn new(spec: ReferenceSpec, basis: &Arc<Basis>) -> Result<StateFamily> {
        let reference = make_reference(&spec, basis)?.normalize();
        let set = build_quasispin(basis)?;
        Ok(StateFamily {
            basis: basis.clone(),
            spec,
            reference,
            p_plus: set.p_plus,
            p_minus: set.p_minus,
        })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn spec(&self) -> &ReferenceSpec {
        &self.spec
    }

    pub fn reference(&self) -> &StateVector {
        &self.reference
    }

    /// The normalized family member at (theta, phi).
    ///
    /// Glauber references go through the exact parameter transformation
    /// (identical to the displacement by construction); everything else is
    /// displaced from the cached reference.
    pub fn evaluate(&self, pt: SpherePoint) -> Result<StateVector> {
        match &self.spec {
            ReferenceSpec::Glauber { alphas } => {
                let rotated = transform_glauber_params(alphas, pt.theta, pt.phi);
                Ok(make_reference(&ReferenceSpec::Glauber { alphas: rotated }, &self.basis)?
                    .normalize())
            }
            _ => Ok(rotate_state_with(
                &self.p_plus,
                &self.p_minus,
                &self.reference,
                pt.theta,
                pt.phi,
            )?
            .normalize()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConnectionOptions {
    /// Two-step Richardson extrapolation of the finite differences.
    pub richardson: bool,
}

fn fd_partials(
    family: &StateFamily,
    at: SpherePoint,
    h: f64,
) -> Result<(StateVector, StateVector, StateVector)> {
    let psi = family.evaluate(at)?;
    let scale = Complex64::new(1.0 / (2.0 * h), 0.0);
    let dtheta = family
        .evaluate(SpherePoint::new(at.theta + h, at.phi))?
        .sub(&family.evaluate(SpherePoint::new(at.theta - h, at.phi))?)?
        .scale(scale);
    let dphi = family
        .evaluate(SpherePoint::new(at.theta, at.phi + h))?
        .sub(&family.evaluate(SpherePoint::new(at.theta, at.phi - h))?)?
        .scale(scale);
    Ok((psi, dtheta, dphi))
}

fn im_partials(family: &StateFamily, at: SpherePoint, opts: ConnectionOptions) -> Result<(f64, f64)> {
    let h = family.basis().config().tol.fd_step;
    let (psi, dt, dp) = fd_partials(family, at, h)?;
    let mut gt = inner(&psi, &dt)?.im;
    let mut gp = inner(&psi, &dp)?.im;
    if opts.richardson {
        let (psi2, dt2, dp2) = fd_partials(family, at, h / 2.0)?;
        let gt2 = inner(&psi2, &dt2)?.im;
        let gp2 = inner(&psi2, &dp2)?.im;
        gt = (4.0 * gt2 - gt) / 3.0;
        gp = (4.0 * gp2 - gp) / 3.0;
    }
    Ok((gt, gp))
}

/// The gauge potential A_s at a point, contracted with the path tangent
/// (d theta/ds, d phi/ds). The geometric phase is -loop_integral(A_s ds).
pub fn berry_connection(
    family: &StateFamily,
    at: SpherePoint,
    tangent: (f64, f64),
    opts: ConnectionOptions,
) -> Result<f64> {
    if at.theta < POLE_GUARD || at.theta > std::f64::consts::PI - POLE_GUARD {
        return Err(PcsError::PoleContact { theta: at.theta });
    }
    let (gt, gp) = im_partials(family, at, opts)?;
    Ok(-(gt * tangent.0 + gp * tangent.1))
}

/// One evaluation point of the numeric connection along a path.
#[derive(Debug, Clone, Copy)]
pub struct ConnectionSample {
    /// Arc parameter: segment index plus the position within the segment.
    pub s: f64,
    pub point: SpherePoint,
    /// Gauge potential contracted with the per-segment unit tangent.
    pub a_s: f64,
    /// Phase accumulated up to this sample.
    pub running_gamma: f64,
}

#[derive(Debug, Clone)]
pub struct ConnectionPhase {
    pub gamma: f64,
    pub per_segment: Vec<f64>,
    pub samples: Vec<ConnectionSample>,
    /// Largest |A_s| (per unit segment parameter) seen along the path.
    pub max_connection: f64,
}

/// gamma = -loop_integral(A_s ds) by composite trapezoid over the sampled
/// path; reported unwrapped. Sample points are clamped away from the poles.
pub fn phase_by_connection(
    family: &StateFamily,
    path: &SpherePath,
    opts: ConnectionOptions,
) -> Result<ConnectionPhase> {
    path.require_closed()?;
    let mut per_segment = Vec::with_capacity(path.segments.len());
    let mut samples = Vec::new();
    let mut max_connection: f64 = 0.0;
    let mut running = 0.0;
    for (seg_idx, pts) in path.sampled_segments().into_iter().enumerate() {
        let n = pts.len() - 1;
        let dt = 1.0 / n as f64;
        let mut integrands = Vec::with_capacity(pts.len());
        for (k, pt) in pts.iter().enumerate() {
            let clamped = SpherePoint::new(
                pt.theta.clamp(POLE_CLAMP, std::f64::consts::PI - POLE_CLAMP),
                pt.phi,
            );
            // tangent in the segment parameter by differences of samples
            let (lo, hi) = if k == 0 {
                (0, 1)
            } else if k == n {
                (n - 1, n)
            } else {
                (k - 1, k + 1)
            };
            let span = (hi - lo) as f64 * dt;
            let tangent = (
                (pts[hi].theta - pts[lo].theta) / span,
                (pts[hi].phi - pts[lo].phi) / span,
            );
            let (gt, gp) = im_partials(family, clamped, opts)?;
            let g = gt * tangent.0 + gp * tangent.1;
            max_connection = max_connection.max(g.abs());
            if k > 0 {
                running += 0.5 * (integrands[k - 1] + g) * dt;
            }
            integrands.push(g);
            samples.push(ConnectionSample {
                s: seg_idx as f64 + k as f64 * dt,
                point: *pt,
                a_s: -g,
                running_gamma: running,
            });
        }
        let mut seg = 0.0;
        for w in integrands.windows(2) {
            seg += 0.5 * (w[0] + w[1]) * dt;
        }
        per_segment.push(seg);
    }
    Ok(ConnectionPhase {
        gamma: per_segment.iter().sum(),
        per_segment,
        samples,
        max_connection,
    })
}

/// Discrete Pancharatnam/Bargmann product over the sampled loop. Converges
/// to `phase_by_connection` as the sampling refines; no dynamical phase
/// arises because the family is parameter-indexed, not time-evolved.
pub fn phase_by_overlaps(family: &StateFamily, path: &SpherePath) -> Result<f64> {
    path.require_closed()?;
    let pts = path.sample_loop()?;
    let states: Vec<StateVector> = pts
        .iter()
        .map(|pt| {
            family.evaluate(SpherePoint::new(
                pt.theta.clamp(POLE_CLAMP, std::f64::consts::PI - POLE_CLAMP),
                pt.phi,
            ))
        })
        .collect::<Result<_>>()?;
    let mut gamma = 0.0;
    for k in 0..states.len() {
        let next = (k + 1) % states.len();
        let ov = inner(&states[k], &states[next])?;
        if ov.norm() < 1e-3 {
            return Err(PcsError::UnderSampled {
                magnitude: ov.norm(),
            });
        }
        gamma += ov.arg();
    }
    Ok(gamma)
}

/// Closed-form overlap <theta,phi; p | u theta, v phi; p> of the m=1
/// helicity families.
pub fn overlap_pcs_closed(
    theta: f64,
    phi: f64,
    u: f64,
    v: f64,
    p: HalfInt,
    helicity: Helicity,
) -> Complex64 {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let cu = (u * theta / 2.0).cos();
    let su = (u * theta / 2.0).sin();
    let phase = Complex64::new(0.0, helicity.sign() * phi * (v - 1.0)).exp();
    let base = Complex64::new(c * cu, 0.0) + phase * (s * su);
    base.powi(p.doubled())
}

/// Closed-form Gaussian overlap of the Glauber families.
pub fn overlap_glauber_closed(
    alphas: &[(Complex64, Complex64)],
    theta: f64,
    phi: f64,
    u: f64,
    v: f64,
) -> Complex64 {
    let bra = transform_glauber_params(alphas, theta, phi);
    let ket = transform_glauber_params(alphas, u * theta, v * phi);
    let mut quad = 0.0;
    let mut cross = Complex64::ZERO;
    for ((b_p, b_m), (k_p, k_m)) in bra.iter().zip(&ket) {
        quad += b_p.norm_sqr() + b_m.norm_sqr() + k_p.norm_sqr() + k_m.norm_sqr();
        cross += b_p.conj() * k_p + b_m.conj() * k_m;
    }
    (Complex64::new(-0.5 * quad, 0.0) + cross).exp()
}

/// Closed-form phase of the helicity-eigenstate families:
/// gamma = sign(helicity) * 2p * loop_integral(sin^2(theta/2) d phi).
pub fn phase_closed_pcs(path: &SpherePath, p: HalfInt, helicity: Helicity) -> Result<f64> {
    let ci = contour_integrals(path)?;
    Ok(helicity.sign() * p.doubled() as f64 * ci.i0)
}

/// Quasispin-weighted decomposition of the Glauber-family phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlauberPhaseComponents {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// The state-independent contour integrals the components are built from.
    pub integrals: ContourIntegrals,
}

impl GlauberPhaseComponents {
    pub fn total(&self) -> f64 {
        self.gamma0 + self.gamma1 + self.gamma2
    }
}

/// Quasispin expectations of a Glauber parameter set:
/// 2<P0> = sum(|a+|^2 - |a-|^2), <P1> = Re K, <P2> = Im K with
/// K = sum a-_j (a+_j)*.
pub fn glauber_quasispin(alphas: &[(Complex64, Complex64)]) -> (f64, f64, f64) {
    let two_p0: f64 = alphas
        .iter()
        .map(|(p, m)| p.norm_sqr() - m.norm_sqr())
        .sum();
    let k: Complex64 = alphas.iter().map(|(p, m)| m * p.conj()).sum();
    (two_p0 / 2.0, k.re, k.im)
}

/// gamma = 2<P0> i0 + <P1> i1 + <P2> i2, the scalar product of the input
/// beam's quasispin vector with the state-independent contour integrals.
pub fn phase_closed_glauber(
    path: &SpherePath,
    alphas: &[(Complex64, Complex64)],
) -> Result<GlauberPhaseComponents> {
    let ci = contour_integrals(path)?;
    let (p0, p1, p2) = glauber_quasispin(alphas);
    Ok(GlauberPhaseComponents {
        gamma0: 2.0 * p0 * ci.i0,
        gamma1: p1 * ci.i1,
        gamma2: p2 * ci.i2,
        integrals: ci,
    })
}

/// Hannay angle by differencing the closed-form phase with respect to the
/// photon number: h = -(gamma(n + dn) - gamma(n))/dn with n = 2p. For the
/// helicity-eigenstate families this is exactly -Omega/2, independent of p.
pub fn hannay_numeric(path: &SpherePath, p: HalfInt, delta_n: u32) -> Result<f64> {
    if p.doubled() < 1 {
        return Err(PcsError::InvalidInput("hannay_numeric requires p >= 1/2".into()));
    }
    if delta_n == 0 {
        return Err(PcsError::InvalidInput("delta_n must be >= 1".into()));
    }
    let g0 = phase_closed_pcs(path, p, Helicity::Plus)?;
    let g1 = phase_closed_pcs(path, HalfInt(p.doubled() + delta_n as i32), Helicity::Plus)?;
    Ok(-(g1 - g0) / delta_n as f64)
}

/// The printed closed-form polarization Hannay angle for an initial
/// quasispin direction (theta0, phi0). Note this evaluates to +Omega at
/// theta0 = 0 while the difference formula gives -Omega/2; the mismatch is
/// reported by [`hannay_diagnostic`], not hidden.
pub fn hannay_closed(path: &SpherePath, theta0: f64, phi0: f64) -> Result<f64> {
    let ci = contour_integrals(path)?;
    Ok(2.0 * theta0.cos() * ci.i0 - theta0.sin() * phi0.cos() * ci.i1
        + theta0.sin() * phi0.sin() * ci.i2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HannayDiagnostic {
    pub numeric: f64,
    pub closed: f64,
    pub discrepancy: f64,
}

/// Evaluate both Hannay routes at the north-pole reference direction and
/// surface their difference.
pub fn hannay_diagnostic(path: &SpherePath, p: HalfInt) -> Result<HannayDiagnostic> {
    let numeric = hannay_numeric(path, p, 1)?;
    let closed = hannay_closed(path, 0.0, 0.0)?;
    Ok(HannayDiagnostic {
        numeric,
        closed,
        discrepancy: closed - numeric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiagnostics {
    pub fd_step: f64,
    pub samples_per_segment: usize,
    pub max_connection: f64,
}

/// Per-method geometric phase with the component breakdown where a closed
/// form exists.
#[derive(Debug, Clone)]
pub struct GeometricPhaseResult {
    pub gamma_connection: Option<f64>,
    pub gamma_overlap: Option<f64>,
    pub gamma_closed: Option<f64>,
    pub components: Option<GlauberPhaseComponents>,
    pub omega: f64,
    pub per_segment: Vec<f64>,
    /// Connection samples along the path (empty unless that method ran).
    pub samples: Vec<ConnectionSample>,
    pub diagnostics: PhaseDiagnostics,
}

impl GeometricPhaseResult {
    /// All requested methods agree within the phase tolerance.
    pub fn consistent(&self, atol_phase: f64) -> bool {
        if let Some(closed) = self.gamma_closed {
            for g in [self.gamma_connection, self.gamma_overlap].into_iter().flatten() {
                if (g - closed).abs() > atol_phase {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMethod {
    Connection,
    Overlaps,
    ClosedForm,
}

/// Run the requested methods for a family over a closed path. The closed
/// form is available for the m=1 helicity families and Glauber references.
pub fn analyze(
    family: &StateFamily,
    path: &SpherePath,
    methods: &[PhaseMethod],
    opts: ConnectionOptions,
) -> Result<GeometricPhaseResult> {
    path.require_closed()?;
    let mut result = GeometricPhaseResult {
        gamma_connection: None,
        gamma_overlap: None,
        gamma_closed: None,
        components: None,
        omega: crate::sphere::solid_angle(path)?,
        per_segment: Vec::new(),
        samples: Vec::new(),
        diagnostics: PhaseDiagnostics {
            fd_step: family.basis().config().tol.fd_step,
            samples_per_segment: path.samples_per_segment,
            max_connection: 0.0,
        },
    };
    for method in methods {
        match method {
            PhaseMethod::Connection => {
                let c = phase_by_connection(family, path, opts)?;
                result.gamma_connection = Some(c.gamma);
                result.per_segment = c.per_segment;
                result.samples = c.samples;
                result.diagnostics.max_connection = c.max_connection;
            }
            PhaseMethod::Overlaps => {
                result.gamma_overlap = Some(phase_by_overlaps(family, path)?);
            }
            PhaseMethod::ClosedForm => match family.spec() {
                ReferenceSpec::FockM1 { helicity, p } => {
                    result.gamma_closed = Some(phase_closed_pcs(path, *p, *helicity)?);
                }
                ReferenceSpec::Glauber { alphas } => {
                    let comp = phase_closed_glauber(path, alphas)?;
                    result.gamma_closed = Some(comp.total());
                    result.components = Some(comp);
                }
                other => {
                    return Err(PcsError::InvalidInput(format!(
                        "no closed-form phase for reference {other:?}"
                    )))
                }
            },
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ModeConfig;
    use crate::sphere::{latitude_loop, octant_triangle, out_and_back};
    use crate::states::glauber_cutoff;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn basis(m: usize, n_max: usize) -> Arc<Basis> {
        crate::fock::Basis::new(ModeConfig::new(m, n_max).unwrap()).unwrap()
    }

    fn fock_family(dp: i32, h: Helicity) -> StateFamily {
        let b = basis(1, dp as usize);
        StateFamily::new(
            ReferenceSpec::FockM1 {
                helicity: h,
                p: HalfInt(dp),
            },
            &b,
        )
        .unwrap()
    }

    #[test]
    fn connection_zero_tangent() {
        let f = fock_family(1, Helicity::Plus);
        let a = berry_connection(&f, SpherePoint::new(1.0, 0.5), (0.0, 0.0), Default::default())
            .unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn connection_pole_guard() {
        let f = fock_family(1, Helicity::Plus);
        assert!(matches!(
            berry_connection(&f, SpherePoint::new(0.0, 0.0), (0.0, 1.0), Default::default()),
            Err(PcsError::PoleContact { .. })
        ));
    }

    #[test]
    fn connection_matches_analytic_fock() {
        // oracle: differentiate the closed-form overlap analytically;
        // A(phi-tangent) = -2p sin^2(theta/2)
        for dp in [1, 2, 4] {
            let f = fock_family(dp, Helicity::Plus);
            for (theta, phi) in [(0.8, 0.3), (2.0, 4.0)] {
                let a = berry_connection(
                    &f,
                    SpherePoint::new(theta, phi),
                    (0.0, 1.0),
                    Default::default(),
                )
                .unwrap();
                let expect = -(dp as f64) * (theta / 2.0).sin().powi(2);
                assert_abs_diff_eq!(a, expect, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn connection_richardson_tightens() {
        let f = fock_family(4, Helicity::Plus);
        let at = SpherePoint::new(1.2, 0.7);
        let expect = -4.0 * (0.6f64).sin().powi(2);
        let plain =
            berry_connection(&f, at, (0.0, 1.0), ConnectionOptions { richardson: false }).unwrap();
        let rich =
            berry_connection(&f, at, (0.0, 1.0), ConnectionOptions { richardson: true }).unwrap();
        assert!((rich - expect).abs() <= (plain - expect).abs() + 1e-12);
        assert_abs_diff_eq!(rich, expect, epsilon = 1e-9);
    }

    /// Closed-form gauge potential of the Glauber families, used as an
    /// independent oracle for the finite-difference connection.
    fn glauber_connection_oracle(
        alphas: &[(Complex64, Complex64)],
        at: SpherePoint,
        tangent: (f64, f64),
    ) -> f64 {
        let (p0, _, _) = glauber_quasispin(alphas);
        let k: Complex64 = alphas.iter().map(|(p, m)| m * p.conj()).sum();
        let s2 = (at.theta / 2.0).sin().powi(2);
        let a1 = -tangent.1 * s2 * 2.0 * p0;
        let a2 = -((Complex64::new(at.theta.sin() * tangent.1, tangent.0)
            * Complex64::new(0.0, -at.phi).exp()
            * k)
            .re);
        a1 + a2
    }

    #[test]
    fn connection_matches_glauber_closed_form() {
        let alphas = vec![
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)),
            (Complex64::new(-0.3, 0.0), Complex64::new(0.8, 0.0)),
        ];
        let b = basis(2, glauber_cutoff(&alphas, 1e-13));
        let f = StateFamily::new(ReferenceSpec::Glauber { alphas: alphas.clone() }, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..6 {
            let at = SpherePoint::new(rng.gen_range(0.2..PI - 0.2), rng.gen_range(0.0..6.0));
            let tangent = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let numeric = berry_connection(&f, at, tangent, Default::default()).unwrap();
            let oracle = glauber_connection_oracle(&alphas, at, tangent);
            assert_abs_diff_eq!(numeric, oracle, epsilon = 1e-6);
        }
    }

    #[test]
    fn trivial_loop_zero_phase() {
        let f = fock_family(2, Helicity::Plus);
        let path = out_and_back(0.4, 1.3, 0.8, 300).unwrap();
        let c = phase_by_connection(&f, &path, Default::default()).unwrap();
        assert_abs_diff_eq!(c.gamma, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(phase_by_overlaps(&f, &path).unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn equator_half_spin_gives_pi() {
        let f = fock_family(1, Helicity::Plus);
        let path = latitude_loop(FRAC_PI_2, 1, 2000).unwrap();
        let c = phase_by_connection(&f, &path, Default::default()).unwrap();
        assert_abs_diff_eq!(c.gamma, PI, epsilon = 1e-6);
        assert_abs_diff_eq!(phase_by_overlaps(&f, &path).unwrap(), PI, epsilon = 1e-6);
        assert_abs_diff_eq!(
            phase_closed_pcs(&path, HalfInt(1), Helicity::Plus).unwrap(),
            PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn unwrapped_two_pi_not_collapsed() {
        // p = 2, theta0 = pi/3: gamma = 4 * 2pi * sin^2(pi/6) = 2pi, unwrapped
        let f = fock_family(4, Helicity::Plus);
        let path = latitude_loop(FRAC_PI_3, 1, 2000).unwrap();
        let c = phase_by_connection(&f, &path, Default::default()).unwrap();
        assert_abs_diff_eq!(c.gamma, 2.0 * PI, epsilon = 1e-6);
        assert_abs_diff_eq!(
            phase_closed_pcs(&path, HalfInt(4), Helicity::Plus).unwrap(),
            2.0 * PI,
            epsilon = 1e-10
        );
    }

    #[test]
    fn minus_helicity_negates_phase() {
        let f = fock_family(1, Helicity::Minus);
        let path = latitude_loop(FRAC_PI_2, 1, 1500).unwrap();
        let c = phase_by_connection(&f, &path, Default::default()).unwrap();
        assert_abs_diff_eq!(c.gamma, -PI, epsilon = 1e-6);
    }

    #[test]
    fn orientation_reversal_negates() {
        let f = fock_family(2, Helicity::Plus);
        let path = latitude_loop(1.0, 1, 1000).unwrap();
        let rev = path.reversed();
        let a = phase_by_connection(&f, &path, Default::default()).unwrap().gamma;
        let b = phase_by_connection(&f, &rev, Default::default()).unwrap().gamma;
        assert_abs_diff_eq!(a, -b, epsilon = 1e-8);
    }

    #[test]
    fn winding_additivity() {
        let f = fock_family(1, Helicity::Plus);
        let one = latitude_loop(1.1, 1, 1000).unwrap();
        let three = latitude_loop(1.1, 3, 3000).unwrap();
        let a = phase_by_connection(&f, &one, Default::default()).unwrap().gamma;
        let b = phase_by_connection(&f, &three, Default::default()).unwrap().gamma;
        assert_abs_diff_eq!(b, 3.0 * a, epsilon = 1e-6);
    }

    #[test]
    fn overlap_pcs_closed_matches_fock_inner() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dp in [1, 2, 3, 4, 6] {
            let b = basis(1, dp as usize);
            for h in [Helicity::Plus, Helicity::Minus] {
                let spec = ReferenceSpec::FockM1 {
                    helicity: h,
                    p: HalfInt(dp),
                };
                let f = StateFamily::new(spec, &b).unwrap();
                for _ in 0..20 {
                    let theta = rng.gen_range(0.05..PI - 0.05);
                    let phi = rng.gen_range(0.0..6.0);
                    let u = rng.gen_range(0.0..1.5);
                    let v = rng.gen_range(0.0..2.0);
                    let lhs = overlap_pcs_closed(theta, phi, u, v, HalfInt(dp), h);
                    let bra = f.evaluate(SpherePoint::new(theta, phi)).unwrap();
                    let ket = f.evaluate(SpherePoint::new(u * theta, v * phi)).unwrap();
                    let rhs = inner(&bra, &ket).unwrap();
                    assert!(
                        (lhs - rhs).norm() < 1e-10,
                        "2p={dp} h={h:?}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn overlap_pcs_closed_special_values() {
        assert!(
            (overlap_pcs_closed(1.1, 2.2, 1.0, 1.0, HalfInt(5), Helicity::Plus) - Complex64::ONE)
                .norm()
                < 1e-12
        );
        let half = overlap_pcs_closed(FRAC_PI_2, 1.7, 0.0, 1.0, HalfInt(2), Helicity::Plus);
        assert_abs_diff_eq!(half.re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(half.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn overlap_glauber_closed_matches_fock_inner() {
        let alphas = vec![(Complex64::new(1.0, 0.0), Complex64::ZERO)];
        let b = basis(1, glauber_cutoff(&alphas, 1e-14));
        let f = StateFamily::new(ReferenceSpec::Glauber { alphas: alphas.clone() }, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let theta = rng.gen_range(0.05..PI - 0.05);
            let phi = rng.gen_range(0.0..6.0);
            let u = rng.gen_range(0.0..1.5);
            let v = rng.gen_range(0.0..2.0);
            let lhs = overlap_glauber_closed(&alphas, theta, phi, u, v);
            let bra = f.evaluate(SpherePoint::new(theta, phi)).unwrap();
            let ket = f.evaluate(SpherePoint::new(u * theta, v * phi)).unwrap();
            let rhs = inner(&bra, &ket).unwrap();
            assert!((lhs - rhs).norm() < 1e-9, "{lhs} vs {rhs}");
        }
        // vacuum family is rotation-invariant
        let vac = overlap_glauber_closed(
            &[(Complex64::ZERO, Complex64::ZERO)],
            1.0,
            2.0,
            0.3,
            1.9,
        );
        assert!((vac - Complex64::ONE).norm() < 1e-14);
    }

    #[test]
    fn glauber_components_match_connection() {
        let alphas = vec![(
            Complex64::new(1.0, 0.0) / 2f64.sqrt(),
            Complex64::new(1.0, 0.0) / 2f64.sqrt(),
        )];
        // helicityless input: gamma0 = 0 but gamma1 + gamma2 nonzero on a
        // generic (pole-avoiding, theta-varying) loop
        let b = basis(1, glauber_cutoff(&alphas, 1e-13));
        let f = StateFamily::new(ReferenceSpec::Glauber { alphas: alphas.clone() }, &b).unwrap();
        let path = crate::sphere::SpherePath::new(
            vec![
                crate::sphere::Segment {
                    kind: crate::sphere::SegmentKind::LinearInAngles,
                    a: SpherePoint::new(0.7, 0.0),
                    b: SpherePoint::new(1.6, 1.2),
                },
                crate::sphere::Segment {
                    kind: crate::sphere::SegmentKind::LinearInAngles,
                    a: SpherePoint::new(1.6, 1.2),
                    b: SpherePoint::new(2.0, 2.9),
                },
                crate::sphere::Segment {
                    kind: crate::sphere::SegmentKind::LinearInAngles,
                    a: SpherePoint::new(2.0, 2.9),
                    b: SpherePoint::new(0.7, 0.0),
                },
            ],
            1200,
        )
        .unwrap();
        let comp = phase_closed_glauber(&path, &alphas).unwrap();
        assert_abs_diff_eq!(comp.gamma0, 0.0, epsilon = 1e-14);
        assert!(comp.total().abs() > 1e-3);
        let c = phase_by_connection(&f, &path, Default::default()).unwrap();
        assert_abs_diff_eq!(c.gamma, comp.total(), epsilon = 1e-6);
    }

    #[test]
    fn glauber_circular_input_reduces_to_gamma0() {
        let alphas = vec![(Complex64::new(1.0, 0.0), Complex64::ZERO)];
        let path = latitude_loop(FRAC_PI_2, 1, 500).unwrap();
        let comp = phase_closed_glauber(&path, &alphas).unwrap();
        assert_abs_diff_eq!(comp.gamma1, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(comp.gamma2, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(comp.total(), PI, epsilon = 1e-10);
    }

    #[test]
    fn components_consistent_with_integrated_gauge_potential() {
        // integrating the closed-form gauge potential reproduces the
        // component decomposition
        let alphas = vec![
            (Complex64::new(0.6, 0.1), Complex64::new(-0.2, 0.4)),
            (Complex64::new(0.3, -0.5), Complex64::new(0.1, 0.2)),
        ];
        let path = octant_triangle(4000);
        let comp = phase_closed_glauber(&path, &alphas).unwrap();
        let mut total = 0.0;
        for pts in path.sampled_segments() {
            let n = pts.len() - 1;
            let dt = 1.0 / n as f64;
            let vals: Vec<f64> = pts
                .iter()
                .enumerate()
                .map(|(k, pt)| {
                    let (lo, hi) = if k == 0 {
                        (0, 1)
                    } else if k == n {
                        (n - 1, n)
                    } else {
                        (k - 1, k + 1)
                    };
                    let span = (hi - lo) as f64 * dt;
                    let tangent = (
                        (pts[hi].theta - pts[lo].theta) / span,
                        (pts[hi].phi - pts[lo].phi) / span,
                    );
                    -glauber_connection_oracle(&alphas, *pt, tangent)
                })
                .collect();
            for w in vals.windows(2) {
                total += 0.5 * (w[0] + w[1]) * dt;
            }
        }
        assert_abs_diff_eq!(total, comp.total(), epsilon = 1e-7);
    }

    #[test]
    fn overlaps_undersampling_detected() {
        let f = fock_family(8, Helicity::Plus);
        let path = latitude_loop(FRAC_PI_2, 1, 2).unwrap();
        assert!(matches!(
            phase_by_overlaps(&f, &path),
            Err(PcsError::UnderSampled { .. })
        ));
    }

    #[test]
    fn hannay_numeric_equator() {
        let path = latitude_loop(FRAC_PI_2, 1, 100).unwrap();
        for dp in [1, 2, 6] {
            assert_abs_diff_eq!(
                hannay_numeric(&path, HalfInt(dp), 1).unwrap(),
                -PI,
                epsilon = 1e-12
            );
        }
        assert!(hannay_numeric(&path, HalfInt(0), 1).is_err());
    }

    #[test]
    fn hannay_zero_area_loop() {
        let path = out_and_back(0.3, 1.2, 0.5, 200).unwrap();
        assert_abs_diff_eq!(hannay_numeric(&path, HalfInt(1), 1).unwrap(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(hannay_closed(&path, 0.0, 0.0).unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn hannay_closed_printed_form() {
        // theta0 = 0, equator: 2 cos(0) * pi = 2 pi as printed
        let path = latitude_loop(FRAC_PI_2, 1, 100).unwrap();
        assert_abs_diff_eq!(hannay_closed(&path, 0.0, 0.0).unwrap(), 2.0 * PI, epsilon = 1e-10);
        let d = hannay_diagnostic(&path, HalfInt(1)).unwrap();
        assert_abs_diff_eq!(d.discrepancy, 3.0 * PI, epsilon = 1e-10);
        // theta0 = pi/2, phi0 = 0 on a latitude loop: only the i1 term could
        // contribute and it vanishes by periodicity
        let lp = latitude_loop(1.0, 1, 100).unwrap();
        let ci = contour_integrals(&lp).unwrap();
        assert_abs_diff_eq!(
            hannay_closed(&lp, FRAC_PI_2, 0.0).unwrap(),
            -ci.i1,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(ci.i1, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn analyze_collects_all_methods() {
        let b = basis(1, 1);
        let f = StateFamily::new(
            ReferenceSpec::FockM1 {
                helicity: Helicity::Plus,
                p: HalfInt(1),
            },
            &b,
        )
        .unwrap();
        let path = latitude_loop(FRAC_PI_2, 1, 2000).unwrap();
        let r = analyze(
            &f,
            &path,
            &[
                PhaseMethod::Connection,
                PhaseMethod::Overlaps,
                PhaseMethod::ClosedForm,
            ],
            Default::default(),
        )
        .unwrap();
        assert!(r.consistent(1e-6));
        assert_abs_diff_eq!(r.omega, 2.0 * PI, epsilon = 1e-12);
        assert_eq!(r.per_segment.len(), 1);
    }

    #[test]
    fn family_single_valued_at_origin() {
        let f = fock_family(2, Helicity::Plus);
        for phi in [0.0, 1.0, 4.0] {
            let s = f.evaluate(SpherePoint::new(1e-9, phi)).unwrap();
            assert!(s.max_abs_diff(f.reference()) < 1e-8);
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        }
    }
}
