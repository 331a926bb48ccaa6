//! Problem files: a set, an optional system and run options.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nagumo_core::checkers::DynamicalSystem;
use nagumo_core::sets::{ConvexSet, Ellipsoid, HPolyhedron, LorenzCone, VCone, VPolytope};
use nagumo_core::{Matrix, Tolerances};

use crate::expr::ExpressionField;

pub const SCHEMA: &str = "nagumo/1";

/// Invalid input, located by a JSON path such as `set.ellipsoid.Q`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct InputError {
    pub path: String,
    pub message: String,
}

impl InputError {
    pub fn new(path: impl Into<String>, message: impl ToString) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: String,
    pub set: SetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub options: OptionsSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Hpolyhedron {
        #[serde(rename = "G")]
        g: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Vpolytope {
        vertices: Vec<Vec<f64>>,
    },
    Vcone {
        rays: Vec<Vec<f64>>,
    },
    Ellipsoid {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    Lorenz {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        u_n: Option<Vec<f64>>,
    },
    Orthant {
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Linear {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
    },
    Expression {
        formulas: Vec<String>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_starts: Option<usize>,
}

/// Options after merging defaults, the file and command-line flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedOptions {
    pub tolerances: Tolerances,
    pub seed: u64,
    pub n_samples: usize,
    pub horizon: f64,
    pub step: f64,
    pub t0: f64,
    pub n_starts: usize,
}

impl Default for ResolvedOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::DEFAULT,
            seed: 0,
            n_samples: 10_000,
            horizon: 10.0,
            step: 1e-3,
            t0: 0.0,
            n_starts: 1000,
        }
    }
}

/// Layer applied on top of the file options; `tolerance` sets both the
/// boundary band and the tangent-cone tolerance.
impl ResolvedOptions {
    pub fn apply(&mut self, o: &OptionsSpec) {
        if let Some(t) = o.tolerances {
            self.tolerances = t;
        }
        if let Some(t) = o.tolerance {
            self.tolerances.boundary = t;
            self.tolerances.cone = t;
        }
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = o.$f { self.$f = v; })*};
        }
        take!(seed, n_samples, horizon, step, t0, n_starts);
    }

    pub fn validate(&self) -> Result<(), InputError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(InputError::new(format!("options.{name}"), format!("must be positive and finite, got {v}")))
            }
        };
        positive("tolerance", self.tolerances.boundary)?;
        positive("tolerance", self.tolerances.cone)?;
        positive("step", self.step)?;
        positive("horizon", self.horizon)?;
        if self.horizon < self.step {
            return Err(InputError::new("options.horizon", "must be at least one step"));
        }
        if !self.t0.is_finite() {
            return Err(InputError::new("options.t0", "must be finite"));
        }
        if self.n_samples == 0 {
            return Err(InputError::new("options.n_samples", "must be at least 1"));
        }
        if self.n_starts == 0 {
            return Err(InputError::new("options.n_starts", "must be at least 1"));
        }
        Ok(())
    }
}

/// The validated set. The orthant keeps its identity so that the Metzler
/// test applies.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Set(ConvexSet),
    Orthant(usize),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Set(s) => s.dim(),
            Domain::Orthant(n) => *n,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Domain::Set(s) => s.family(),
            Domain::Orthant(_) => "orthant",
        }
    }

    pub fn to_set(&self) -> ConvexSet {
        match self {
            Domain::Set(s) => s.clone(),
            Domain::Orthant(n) => HPolyhedron::orthant(*n).into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub domain: Domain,
    pub system: Option<(SystemKind, DynamicalSystem)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Linear,
    Expression,
}

fn matrix(path: &str, rows: &[Vec<f64>]) -> Result<Matrix, InputError> {
    Matrix::from_rows(rows).map_err(|e| InputError::new(path, e))
}

fn square(path: &str, rows: &[Vec<f64>]) -> Result<Matrix, InputError> {
    let m = matrix(path, rows)?;
    if !m.is_square() {
        return Err(InputError::new(path, format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    Ok(m)
}

impl SetSpec {
    pub fn build(&self) -> Result<Domain, InputError> {
        let set: ConvexSet = match self {
            SetSpec::Hpolyhedron { g, b } => {
                let g = matrix("set.hpolyhedron.G", g)?;
                HPolyhedron::new(g, b.clone())
                    .map_err(|e| InputError::new("set.hpolyhedron", e))?
                    .into()
            }
            SetSpec::Vpolytope { vertices } => VPolytope::new(vertices.clone())
                .map_err(|e| InputError::new("set.vpolytope.vertices", e))?
                .into(),
            SetSpec::Vcone { rays } => VCone::new(rays.clone())
                .map_err(|e| InputError::new("set.vcone.rays", e))?
                .into(),
            SetSpec::Ellipsoid { q } => Ellipsoid::new(square("set.ellipsoid.Q", q)?)
                .map_err(|e| InputError::new("set.ellipsoid.Q", e))?
                .into(),
            SetSpec::Lorenz { q, u_n } => LorenzCone::new(square("set.lorenz.Q", q)?, u_n.clone())
                .map_err(|e| InputError::new("set.lorenz", e))?
                .into(),
            SetSpec::Orthant { n } => {
                if *n == 0 {
                    return Err(InputError::new("set.orthant.n", "dimension must be at least 1"));
                }
                return Ok(Domain::Orthant(*n));
            }
        };
        Ok(Domain::Set(set))
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<(SystemKind, DynamicalSystem), InputError> {
        match self {
            SystemSpec::Linear { a } => {
                let a = square("system.linear.A", a)?;
                Ok((SystemKind::Linear, DynamicalSystem::Linear(a)))
            }
            SystemSpec::Expression { formulas } => {
                if formulas.is_empty() {
                    return Err(InputError::new("system.expression.formulas", "need one formula per coordinate"));
                }
                let field = ExpressionField::parse(formulas).map_err(|e| {
                    InputError::new(format!("system.expression.formulas[{}]", e.formula), e)
                })?;
                let dim = field.dim();
                Ok((
                    SystemKind::Expression,
                    DynamicalSystem::general(dim, move |t, x| field.eval(t, x)),
                ))
            }
        }
    }
}

impl ProblemFile {
    /// Parses JSON text, naming the failing field on error.
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            InputError::new(if path == "." { "(root)".to_string() } else { path }, e.into_inner())
        })?;
        if file.schema != SCHEMA {
            return Err(InputError::new(
                "schema",
                format!("unsupported schema '{}', expected '{SCHEMA}'", file.schema),
            ));
        }
        Ok(file)
    }

    pub fn build(&self) -> Result<Model, InputError> {
        let domain = self.set.build()?;
        let system = match &self.system {
            Some(s) => {
                let (kind, sys) = s.build()?;
                if sys.dim() != domain.dim() {
                    return Err(InputError::new(
                        "system",
                        format!("system lives in R^{} but the set in R^{}", sys.dim(), domain.dim()),
                    ));
                }
                Some((kind, sys))
            }
            None => None,
        };
        Ok(Model { domain, system })
    }
}
