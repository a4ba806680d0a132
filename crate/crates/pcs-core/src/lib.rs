//! Polarization coherent states of multimode light: truncated Fock spaces,
//! the polarization quasispin algebra, coherent-state families over the
//! Poincare sphere, geometric phases along closed contours, and the SU(2)
//! quasiprobability (Q-function) machinery.

pub mod error;
pub mod fock;
pub mod phase;
pub mod quasiprob;
pub mod quasispin;
pub mod sphere;
pub mod states;

pub use error::{PcsError, Result};
pub use fock::{
    inner, Basis, FockIndex, Helicity, LadderKind, ModeConfig, Operator, StateVector, Tolerances,
};
pub use phase::{
    analyze, berry_connection, phase_by_connection, phase_by_overlaps, phase_closed_glauber,
    phase_closed_pcs, ConnectionOptions, ConnectionPhase, ConnectionSample, GeometricPhaseResult,
    GlauberPhaseComponents, PhaseMethod, StateFamily,
};
pub use quasiprob::{DensityMatrix, SphereGrid};
pub use quasispin::{
    build_quasispin, stokes_vector, NormalizePolicy, QuasispinExpectation, QuasispinSet,
};
pub use sphere::{
    contour_integrals, geodesic_polygon, latitude_loop, solid_angle, ContourIntegrals, Segment,
    SegmentKind, SpherePath, SpherePoint,
};
pub use states::{HalfInt, ReferenceSpec, RotationSpec};
