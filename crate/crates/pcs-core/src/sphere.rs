//! Closed paths on the Poincare sphere: construction, sampling and the
//! contour integrals every closed-form phase expression is built from.
//!
//! phi is stored unwrapped (never reduced mod 2pi) so winding numbers are
//! well-defined and loop integrals of d(phi) see 2pi per revolution.

use crate::error::{PcsError, Result};

pub const POLE_GUARD: f64 = 1e-9;
const JOIN_TOL: f64 = 1e-9;

fn at_pole(theta: f64) -> bool {
    theta.abs() <= JOIN_TOL || (theta - std::f64::consts::PI).abs() <= JOIN_TOL
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub theta: f64,
    /// Unwrapped azimuth.
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        SpherePoint { theta, phi }
    }

    fn to_cartesian(self) -> [f64; 3] {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        [st * self.phi.cos(), st * self.phi.sin(), ct]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    /// Constant theta, phi linear in the parameter.
    Latitude,
    /// Great-circle arc, sampled uniformly in arc length.
    Geodesic,
    /// theta and phi both linear in the parameter.
    LinearInAngles,
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub kind: SegmentKind,
    pub a: SpherePoint,
    pub b: SpherePoint,
}

#[derive(Debug, Clone)]
pub struct SpherePath {
    pub segments: Vec<Segment>,
    pub closed: bool,
    pub samples_per_segment: usize,
    /// Net phi advance of a closed path in units of 2pi.
    pub winding: i32,
}

impl SpherePath {
    /// Validate joins and closure and record the winding number.
    pub fn new(segments: Vec<Segment>, samples_per_segment: usize) -> Result<SpherePath> {
        if segments.is_empty() {
            return Err(PcsError::InvalidPath("path has no segments".into()));
        }
        if samples_per_segment == 0 {
            return Err(PcsError::InvalidPath("samples_per_segment must be >= 1".into()));
        }
        for w in segments.windows(2) {
            let (end, start) = (w[0].b, w[1].a);
            let phi_ok = at_pole(end.theta) || (end.phi - start.phi).abs() <= JOIN_TOL;
            if (end.theta - start.theta).abs() > JOIN_TOL || !phi_ok {
                return Err(PcsError::InvalidPath(format!(
                    "consecutive segments do not join: ({}, {}) vs ({}, {})",
                    end.theta, end.phi, start.theta, start.phi
                )));
            }
        }
        let first = segments.first().unwrap().a;
        let last = segments.last().unwrap().b;
        let dphi = last.phi - first.phi;
        let winding = (dphi / std::f64::consts::TAU).round();
        let closed = (last.theta - first.theta).abs() <= JOIN_TOL
            && (at_pole(last.theta)
                || (dphi - winding * std::f64::consts::TAU).abs() <= JOIN_TOL);
        Ok(SpherePath {
            segments,
            closed,
            samples_per_segment,
            winding: winding as i32,
        })
    }

    pub fn require_closed(&self) -> Result<()> {
        if self.closed {
            Ok(())
        } else {
            Err(PcsError::OpenPath)
        }
    }

    /// Reverse orientation.
    pub fn reversed(&self) -> SpherePath {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                kind: s.kind,
                a: s.b,
                b: s.a,
            })
            .collect();
        SpherePath::new(segments, self.samples_per_segment).expect("reversal preserves validity")
    }

    /// Same geometry with a different sampling density.
    pub fn with_samples(&self, samples_per_segment: usize) -> Result<SpherePath> {
        SpherePath::new(self.segments.clone(), samples_per_segment)
    }

    /// Sample one segment at `n + 1` points including both endpoints.
    pub fn sample_segment(&self, seg: &Segment, n: usize) -> Vec<SpherePoint> {
        match seg.kind {
            SegmentKind::Latitude | SegmentKind::LinearInAngles => (0..=n)
                .map(|k| {
                    let t = k as f64 / n as f64;
                    SpherePoint::new(
                        seg.a.theta + t * (seg.b.theta - seg.a.theta),
                        seg.a.phi + t * (seg.b.phi - seg.a.phi),
                    )
                })
                .collect(),
            SegmentKind::Geodesic => {
                let va = seg.a.to_cartesian();
                let vb = seg.b.to_cartesian();
                let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
                let omega = dot.clamp(-1.0, 1.0).acos();
                let mut raw: Vec<(f64, Option<f64>)> = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    let t = k as f64 / n as f64;
                    let v = if omega < 1e-12 {
                        va
                    } else {
                        let (wa, wb) = (
                            ((1.0 - t) * omega).sin() / omega.sin(),
                            (t * omega).sin() / omega.sin(),
                        );
                        [
                            wa * va[0] + wb * vb[0],
                            wa * va[1] + wb * vb[1],
                            wa * va[2] + wb * vb[2],
                        ]
                    };
                    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
                    let phi = if theta.sin().abs() < 1e-12 {
                        None // at a pole the azimuth is a removable gap
                    } else {
                        Some(v[1].atan2(v[0]))
                    };
                    raw.push((theta, phi));
                }
                // fill pole gaps from the nearest defined neighbour, then
                // unwrap phi starting from the stated endpoint branch
                let mut phis: Vec<Option<f64>> = raw.iter().map(|&(_, p)| p).collect();
                for i in 0..phis.len() {
                    if phis[i].is_none() {
                        let next = phis[i..].iter().flatten().next().copied();
                        let prev = phis[..i].iter().rev().flatten().next().copied();
                        phis[i] = next.or(prev).or(Some(seg.a.phi));
                    }
                }
                let mut out = Vec::with_capacity(n + 1);
                let mut prev_phi = seg.a.phi;
                for (k, (&(theta, _), phi)) in raw.iter().zip(&phis).enumerate() {
                    let mut phi = phi.unwrap();
                    let turns = ((prev_phi - phi) / std::f64::consts::TAU).round();
                    phi += turns * std::f64::consts::TAU;
                    // pin the stated start; at a pole the stated phi is
                    // arbitrary, so keep the continuation branch instead
                    let theta = if k == 0 { seg.a.theta } else { theta };
                    if k == 0 && !at_pole(seg.a.theta) {
                        phi = seg.a.phi;
                    }
                    prev_phi = phi;
                    out.push(SpherePoint::new(theta, phi));
                }
                // pin the far endpoint's theta; phi keeps the unwrapped
                // continuation branch (at a pole the stated phi is arbitrary)
                if let Some(last) = out.last_mut() {
                    last.theta = seg.b.theta;
                    if !at_pole(seg.b.theta) {
                        let turns =
                            ((last.phi - seg.b.phi) / std::f64::consts::TAU).round();
                        last.phi = seg.b.phi + turns * std::f64::consts::TAU;
                    }
                }
                out
            }
        }
    }

    /// Per-segment sample arrays at the path's default density.
    pub fn sampled_segments(&self) -> Vec<Vec<SpherePoint>> {
        self.segments
            .iter()
            .map(|seg| self.sample_segment(seg, self.samples_per_segment))
            .collect()
    }

    /// One flat closed sample loop; duplicate junction points are dropped.
    pub fn sample_loop(&self) -> Result<Vec<SpherePoint>> {
        self.require_closed()?;
        let mut out = Vec::new();
        for pts in self.sampled_segments() {
            let skip = usize::from(!out.is_empty());
            out.extend(pts.into_iter().skip(skip));
        }
        out.pop(); // final point duplicates the start (up to winding)
        Ok(out)
    }
}

/// Constant-theta closed loop, phi from 0 to 2pi * winding.
pub fn latitude_loop(theta0: f64, winding: i32, samples: usize) -> Result<SpherePath> {
    if theta0 <= POLE_GUARD || theta0 >= std::f64::consts::PI - POLE_GUARD {
        return Err(PcsError::PoleContact { theta: theta0 });
    }
    if winding == 0 {
        return Err(PcsError::InvalidPath("winding must be nonzero".into()));
    }
    let end = std::f64::consts::TAU * winding as f64;
    SpherePath::new(
        vec![Segment {
            kind: SegmentKind::Latitude,
            a: SpherePoint::new(theta0, 0.0),
            b: SpherePoint::new(theta0, end),
        }],
        samples,
    )
}

/// Closed polygon of great-circle arcs.
pub fn geodesic_polygon(vertices: &[SpherePoint], samples: usize) -> Result<SpherePath> {
    if vertices.len() < 3 {
        return Err(PcsError::InvalidPath("polygon needs at least 3 vertices".into()));
    }
    let mut segments = Vec::with_capacity(vertices.len());
    for i in 0..vertices.len() {
        let a = vertices[i];
        let b = vertices[(i + 1) % vertices.len()];
        let va = a.to_cartesian();
        let vb = b.to_cartesian();
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        if dot > 1.0 - 1e-12 {
            return Err(PcsError::InvalidPath(format!(
                "repeated consecutive vertices at index {i}"
            )));
        }
        if dot < -1.0 + 1e-12 {
            return Err(PcsError::InvalidPath(format!(
                "antipodal consecutive vertices at index {i}: geodesic is ambiguous"
            )));
        }
        // wrap-around endpoint keeps the starting phi branch
        let b = if i + 1 == vertices.len() {
            SpherePoint::new(vertices[0].theta, vertices[0].phi)
        } else {
            b
        };
        segments.push(Segment {
            kind: SegmentKind::Geodesic,
            a,
            b,
        });
    }
    SpherePath::new(segments, samples)
}

/// A degenerate out-and-back path enclosing zero area; useful as a control.
pub fn out_and_back(theta0: f64, theta1: f64, phi: f64, samples: usize) -> Result<SpherePath> {
    SpherePath::new(
        vec![
            Segment {
                kind: SegmentKind::LinearInAngles,
                a: SpherePoint::new(theta0, phi),
                b: SpherePoint::new(theta1, phi),
            },
            Segment {
                kind: SegmentKind::LinearInAngles,
                a: SpherePoint::new(theta1, phi),
                b: SpherePoint::new(theta0, phi),
            },
        ],
        samples,
    )
}

/// The three state-independent contour integrals of the closed-form phases:
/// i0 = loop integral of sin^2(theta/2) d(phi),
/// i1 = loop integral of [sin(theta) cos(phi) d(phi) + sin(phi) d(theta)],
/// i2 = loop integral of [sin(theta) sin(phi) d(phi) - cos(phi) d(theta)].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourIntegrals {
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
}

/// Latitude segments are integrated analytically, the rest by composite
/// trapezoid at the path's sampling density.
pub fn contour_integrals(path: &SpherePath) -> Result<ContourIntegrals> {
    path.require_closed()?;
    let mut acc = ContourIntegrals {
        i0: 0.0,
        i1: 0.0,
        i2: 0.0,
    };
    for seg in &path.segments {
        match seg.kind {
            SegmentKind::Latitude => {
                let theta = seg.a.theta;
                let dphi = seg.b.phi - seg.a.phi;
                acc.i0 += (theta / 2.0).sin().powi(2) * dphi;
                acc.i1 += theta.sin() * (seg.b.phi.sin() - seg.a.phi.sin());
                acc.i2 += theta.sin() * (seg.a.phi.cos() - seg.b.phi.cos());
            }
            _ => {
                let pts = self_sample(path, seg);
                for w in pts.windows(2) {
                    let (p, q) = (w[0], w[1]);
                    let dphi = q.phi - p.phi;
                    let dtheta = q.theta - p.theta;
                    let f0 = |x: SpherePoint| (x.theta / 2.0).sin().powi(2);
                    let f1p = |x: SpherePoint| x.theta.sin() * x.phi.cos();
                    let f1t = |x: SpherePoint| x.phi.sin();
                    let f2p = |x: SpherePoint| x.theta.sin() * x.phi.sin();
                    let f2t = |x: SpherePoint| -x.phi.cos();
                    acc.i0 += 0.5 * (f0(p) + f0(q)) * dphi;
                    acc.i1 += 0.5 * (f1p(p) + f1p(q)) * dphi + 0.5 * (f1t(p) + f1t(q)) * dtheta;
                    acc.i2 += 0.5 * (f2p(p) + f2p(q)) * dphi + 0.5 * (f2t(p) + f2t(q)) * dtheta;
                }
            }
        }
    }
    Ok(acc)
}

fn self_sample(path: &SpherePath, seg: &Segment) -> Vec<SpherePoint> {
    path.sample_segment(seg, path.samples_per_segment)
}

/// Oriented solid angle, Omega = loop integral of (1 - cos theta) d(phi).
pub fn solid_angle(path: &SpherePath) -> Result<f64> {
    Ok(2.0 * contour_integrals(path)?.i0)
}


#[cfg(test)]
pub use tests::octant_triangle;
