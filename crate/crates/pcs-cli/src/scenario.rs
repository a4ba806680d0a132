//! Scenario file schema (`pcs-scenario/1`) and its translation into the
//! core types. Unknown keys are rejected everywhere; angles are radians,
//! with `*_deg` key variants accepted as an alternative on any angle field.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use pcs_core::fock::{Basis, Helicity, ModeConfig};
use pcs_core::sphere::{latitude_loop, geodesic_polygon, Segment, SegmentKind, SpherePath, SpherePoint};
use pcs_core::states::{glauber_cutoff, HalfInt, ReferenceSpec};
use pcs_core::PhaseMethod;

use crate::error::CliError;

pub const SCHEMA: &str = "pcs-scenario/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub modes: ModesSpec,
    pub state: StateSpec,
    pub path: PathSpec,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub numerics: NumericsSpec,
    #[serde(default)]
    pub qgrid: QGridSpec,
    #[serde(default)]
    pub outputs: OutputsSpec,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSpec {
    /// Spatiotemporal mode count; defaults to what the state requires.
    pub m: Option<usize>,
    /// Total photon cutoff; defaults to the smallest adequate value.
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Single-mode helicity eigenstate with n = 2p photons.
    FockM1 { helicity: HelicitySpec, two_p: i32 },
    /// Two-mode state with biphoton clusters; `two_t` is the doubled
    /// spatial photon-number imbalance (N(1) - N(2)) / 2.
    TwoMode {
        helicity: HelicitySpec,
        two_p: i32,
        n: u32,
        two_t: i32,
    },
    /// Independent per-mode helicity eigenstates.
    Independent {
        helicity: HelicitySpec,
        photons: Vec<u32>,
    },
    /// Multimode Glauber (coherent) state.
    Glauber { alphas: Vec<AlphaSpec> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HelicitySpec {
    Plus,
    Minus,
}

impl From<HelicitySpec> for Helicity {
    fn from(h: HelicitySpec) -> Helicity {
        match h {
            HelicitySpec::Plus => Helicity::Plus,
            HelicitySpec::Minus => Helicity::Minus,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSpec {
    /// [re, im] of the plus-helicity amplitude.
    pub plus: [f64; 2],
    /// [re, im] of the minus-helicity amplitude.
    pub minus: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    Latitude {
        #[serde(default)]
        theta0: Option<f64>,
        #[serde(default)]
        theta0_deg: Option<f64>,
        #[serde(default = "default_winding")]
        winding: i32,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// Closed polygon of great-circle arcs.
    GeodesicPolygon {
        vertices: Vec<VertexSpec>,
        #[serde(default = "default_samples_per_segment")]
        samples_per_segment: usize,
    },
    /// Closed polygon with theta and phi linear along each edge. If the last
    /// vertex repeats the first (same theta), no extra closing edge is added,
    /// which allows winding loops via an explicit final phi of 2 pi k.
    LinearLoop {
        vertices: Vec<VertexSpec>,
        #[serde(default = "default_samples_per_segment")]
        samples_per_segment: usize,
    },
}

fn default_winding() -> i32 {
    1
}
fn default_samples() -> usize {
    2000
}
fn default_samples_per_segment() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub theta_deg: Option<f64>,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub phi_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    Connection,
    Overlaps,
    ClosedForm,
}

impl From<MethodSpec> for PhaseMethod {
    fn from(m: MethodSpec) -> PhaseMethod {
        match m {
            MethodSpec::Connection => PhaseMethod::Connection,
            MethodSpec::Overlaps => PhaseMethod::Overlaps,
            MethodSpec::ClosedForm => PhaseMethod::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub richardson: bool,
    pub atol_phase: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QGridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for QGridSpec {
    fn default() -> Self {
        QGridSpec {
            n_theta: 25,
            n_phi: 24,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSpec {
    /// Summary destination; stdout when omitted.
    pub summary_json: Option<String>,
    pub samples_csv: Option<String>,
    pub qgrid_csv: Option<String>,
}

fn angle(rad: Option<f64>, deg: Option<f64>, name: &str) -> Result<f64, CliError> {
    match (rad, deg) {
        (Some(_), Some(_)) => Err(CliError::schema(format!(
            "both {name} and {name}_deg given; use exactly one"
        ))),
        (Some(r), None) => Ok(r),
        (None, Some(d)) => Ok(d.to_radians()),
        (None, None) => Err(CliError::schema(format!("missing angle {name}"))),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        let scenario: Scenario = serde_json::from_str(text)
            .map_err(|e| CliError::schema(format!("scenario parse error: {e}")))?;
        if scenario.schema != SCHEMA {
            return Err(CliError::schema(format!(
                "unsupported schema {:?}; expected {SCHEMA:?}",
                scenario.schema
            )));
        }
        if scenario.methods.is_empty() {
            return Err(CliError::schema("at least one method is required".into()));
        }
        Ok(scenario)
    }

    pub fn reference_spec(&self) -> Result<ReferenceSpec, CliError> {
        Ok(match &self.state {
            StateSpec::FockM1 { helicity, two_p } => ReferenceSpec::FockM1 {
                helicity: (*helicity).into(),
                p: HalfInt(*two_p),
            },
            StateSpec::TwoMode {
                helicity,
                two_p,
                n,
                two_t,
            } => ReferenceSpec::TwoMode {
                helicity: (*helicity).into(),
                p: HalfInt(*two_p),
                n: *n,
                t: HalfInt(*two_t),
            },
            StateSpec::Independent { helicity, photons } => ReferenceSpec::Independent {
                helicity: (*helicity).into(),
                n_list: photons.clone(),
            },
            StateSpec::Glauber { alphas } => ReferenceSpec::Glauber {
                alphas: alphas
                    .iter()
                    .map(|a| {
                        (
                            Complex64::new(a.plus[0], a.plus[1]),
                            Complex64::new(a.minus[0], a.minus[1]),
                        )
                    })
                    .collect(),
            },
        })
    }

    fn required_m(&self) -> usize {
        match &self.state {
            StateSpec::FockM1 { .. } => 1,
            StateSpec::TwoMode { .. } => 2,
            StateSpec::Independent { photons, .. } => photons.len(),
            StateSpec::Glauber { alphas } => alphas.len(),
        }
    }

    fn default_n_max(&self, spec: &ReferenceSpec) -> Result<usize, CliError> {
        Ok(match spec {
            ReferenceSpec::FockM1 { p, .. } => {
                usize::try_from(p.doubled().max(0)).expect("non-negative")
            }
            ReferenceSpec::TwoMode { n, .. } => *n as usize,
            ReferenceSpec::Independent { n_list, .. } => {
                n_list.iter().map(|&n| n as usize).sum()
            }
            ReferenceSpec::Glauber { alphas } => glauber_cutoff(alphas, 1e-12),
        })
    }

    pub fn build_basis(&self) -> Result<Arc<Basis>, CliError> {
        let spec = self.reference_spec()?;
        let m = match self.modes.m {
            Some(m) if m != self.required_m() => {
                return Err(CliError::schema(format!(
                    "modes.m = {m} but the state needs m = {}",
                    self.required_m()
                )))
            }
            Some(m) => m,
            None => self.required_m(),
        };
        let n_max = match self.modes.n_max {
            Some(n) => n,
            None => self.default_n_max(&spec)?,
        };
        let mut config = ModeConfig::new(m, n_max)?;
        if let Some(h) = self.numerics.fd_step {
            config.tol.fd_step = h;
        }
        if let Some(a) = self.numerics.atol_phase {
            config.tol.atol_phase = a;
        }
        let tol = config.tol.clone();
        let config = config.with_tol(tol)?; // revalidate overrides
        Ok(Basis::new(config)?)
    }

    pub fn build_path(&self) -> Result<SpherePath, CliError> {
        match &self.path {
            PathSpec::Latitude {
                theta0,
                theta0_deg,
                winding,
                samples,
            } => {
                let t0 = angle(*theta0, *theta0_deg, "theta0")?;
                Ok(latitude_loop(t0, *winding, *samples)?)
            }
            PathSpec::GeodesicPolygon {
                vertices,
                samples_per_segment,
            } => {
                let pts = resolve_vertices(vertices)?;
                Ok(geodesic_polygon(&pts, *samples_per_segment)?)
            }
            PathSpec::LinearLoop {
                vertices,
                samples_per_segment,
            } => {
                let mut pts = resolve_vertices(vertices)?;
                if pts.len() < 2 {
                    return Err(CliError::schema(
                        "linear_loop needs at least 2 vertices".into(),
                    ));
                }
                let first = pts[0];
                let last = *pts.last().unwrap();
                if (last.theta - first.theta).abs() > 1e-9 || pts.len() == 2 {
                    pts.push(first);
                }
                let segments: Vec<Segment> = pts
                    .windows(2)
                    .map(|w| Segment {
                        kind: SegmentKind::LinearInAngles,
                        a: w[0],
                        b: w[1],
                    })
                    .collect();
                Ok(SpherePath::new(segments, *samples_per_segment)?)
            }
        }
    }

    pub fn methods(&self) -> Vec<PhaseMethod> {
        self.methods.iter().map(|&m| m.into()).collect()
    }
}

fn resolve_vertices(vertices: &[VertexSpec]) -> Result<Vec<SpherePoint>, CliError> {
    vertices
        .iter()
        .map(|v| {
            Ok(SpherePoint::new(
                angle(v.theta, v.theta_deg, "theta")?,
                angle(v.phi, v.phi_deg, "phi")?,
            ))
        })
        .collect()
}
