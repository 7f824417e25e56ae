//! Problem files: one JSON document per problem, tagged by `kind`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tbvp_core::bounded::{BoundaryKind, BoundedProblem};
use tbvp_core::curvflow::FlowProblem;
use tbvp_core::funcrep::Sampled;
use tbvp_core::line1d::{LineProblem, SeedChoice};
use tbvp_core::nd3::{Field3, Problem3D};
use tbvp_core::nonlinear::WaveMapProblem;
use tbvp_core::periodic::PeriodicProblem;
use tbvp_core::Func;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Line,
    Periodic,
    Circle,
    Dirichlet,
    Neumann,
    Wavemap,
    String,
    Curvflow,
    Wave3d,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Line => "line",
            Kind::Periodic => "periodic",
            Kind::Circle => "circle",
            Kind::Dirichlet => "dirichlet",
            Kind::Neumann => "neumann",
            Kind::Wavemap => "wavemap",
            Kind::String => "string",
            Kind::Curvflow => "curvflow",
            Kind::Wave3d => "wave3d",
        }
    }
}

/// A data function: an expression in `x`, or `{"csv": "path"}` with a
/// two-column `x,value` table (paths relative to the problem file).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FnSpec {
    Expr(String),
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub f: FnSpec,
    pub g: FnSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedName {
    #[default]
    Polynomial,
    Trig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Fourier tail tolerance for the spectral solvers.
    pub solve: f64,
    /// Max-norm error of the endpoint profiles.
    pub terminal: f64,
    /// Boundary trace error.
    pub trace: f64,
    /// Minimum observed order of the finite-difference residual.
    pub order: f64,
    /// Max deviation from the leapfrog oracle.
    pub oracle: f64,
    /// Pointwise endpoint error of the 3-D evaluator.
    pub point3d: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solve: 1e-9,
            terminal: 1e-7,
            trace: 1e-5,
            order: 1.9,
            oracle: 1e-4,
            point3d: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputControls {
    /// Spatial points per row of `y.csv`.
    pub nx: usize,
    /// Time levels in `y.csv`.
    pub nt: usize,
    /// Rows of `v.csv`.
    pub velocity_points: usize,
    /// Curvature-flow frames.
    pub frames: usize,
    /// Cells of the oracle grid.
    pub oracle_nx: usize,
    /// Probe radius of the 3-D point evaluator.
    pub rprobe: f64,
    /// Output times for `wave3d`; default `0, T/4, ..., T`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

impl Default for OutputControls {
    fn default() -> Self {
        OutputControls {
            nx: 201,
            nt: 11,
            velocity_points: 2001,
            frames: 16,
            oracle_nx: 1000,
            rprobe: tbvp_core::nd3::DEFAULT_RPROBE,
            times: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<FnSpec>,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kstar: Option<f64>,
    /// Boundary data at `x = 0` (`h`, or `H` for Neumann).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<FnSpec>,
    /// Boundary data at `x = L` (`l`, or `K` for Neumann).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<FnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Component>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub seed: SeedName,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputControls,
}

/// The problem file plus the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub file: ProblemFile,
    pub base: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedProblem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file = parse(&text).map_err(|e| match e {
        CliError::Json { line, column, message, .. } => CliError::Json {
            path: path.to_path_buf(),
            line,
            column,
            message,
        },
        other => other,
    })?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
        .canonicalize()
        .unwrap_or_else(|_| PathBuf::from("."));
    Ok(LoadedProblem { file, base })
}

pub fn parse(text: &str) -> Result<ProblemFile, CliError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Json {
        path: PathBuf::new(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.validate()?;
    Ok(file)
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{name} must be positive, got {v}")))
    }
}

impl ProblemFile {
    fn require<'a, T>(&self, name: &str, v: &'a Option<T>) -> Result<&'a T, CliError> {
        v.as_ref()
            .ok_or_else(|| CliError::Invalid(format!("kind \"{}\" requires field \"{name}\"", self.kind.name())))
    }

    /// Kind-specific required fields and positivity of the scalars.
    pub fn validate(&self) -> Result<(), CliError> {
        positive("T", self.t_final)?;
        if let Some(c) = self.c {
            positive("c", c)?;
        }
        if let Some(l) = self.length {
            positive("L", l)?;
        }
        let t = &self.tolerances;
        for (name, v) in [("tolerances.solve", t.solve), ("tolerances.terminal", t.terminal), ("tolerances.oracle", t.oracle)] {
            positive(name, v)?;
        }
        let o = &self.output;
        if o.nx < 2 || o.nt < 2 || o.velocity_points < 2 {
            return Err(CliError::Invalid("output.nx, output.nt and output.velocity_points must be >= 2".into()));
        }
        positive("output.rprobe", o.rprobe)?;
        match self.kind {
            Kind::String => {
                let comps = self.require("components", &self.components)?;
                if comps.is_empty() {
                    return Err(CliError::Invalid("\"components\" must not be empty".into()));
                }
            }
            Kind::Curvflow => {
                self.require("f", &self.f)?;
                self.require("L", &self.length)?;
                self.require("kstar", &self.kstar)?;
            }
            _ => {
                self.require("f", &self.f)?;
                self.require("g", &self.g)?;
            }
        }
        match self.kind {
            Kind::Periodic | Kind::Dirichlet | Kind::Neumann => {
                self.require("L", &self.length)?;
            }
            Kind::Wave3d => {
                self.require("points", &self.points)?;
                for spec in [&self.f, &self.g].into_iter().flatten() {
                    if matches!(spec, FnSpec::Csv { .. }) {
                        return Err(CliError::Invalid("wave3d data must be expressions".into()));
                    }
                }
            }
            _ => {}
        }
        if self.left.is_some() != self.right.is_some() {
            return Err(CliError::Invalid("boundary data needs both \"left\" and \"right\"".into()));
        }
        if self.left.is_some() && !matches!(self.kind, Kind::Dirichlet | Kind::Neumann) {
            return Err(CliError::Invalid(format!(
                "kind \"{}\" takes no boundary data",
                self.kind.name()
            )));
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        self.c.unwrap_or(1.0)
    }

    pub fn period(&self) -> f64 {
        match self.kind {
            Kind::Circle => std::f64::consts::TAU,
            _ => self.length.unwrap_or(0.0),
        }
    }

    pub fn seed_choice(&self) -> SeedChoice {
        match self.seed {
            SeedName::Polynomial => SeedChoice::Polynomial,
            SeedName::Trig => SeedChoice::Trigonometric,
        }
    }
}

impl LoadedProblem {
    pub fn func(&self, spec: &FnSpec) -> Result<Func, CliError> {
        Ok(match spec {
            FnSpec::Expr(src) => Func::parse(src)?,
            FnSpec::Csv { csv } => Func::new(Sampled::from_csv(&self.base.join(csv))?),
        })
    }

    fn data(&self) -> Result<(Func, Func), CliError> {
        let p = &self.file;
        let f = self.func(p.require("f", &p.f)?)?;
        let g = self.func(p.require("g", &p.g)?)?;
        Ok((f, g))
    }

    pub fn line(&self) -> Result<LineProblem, CliError> {
        let (f, g) = self.data()?;
        Ok(LineProblem::with_speed(f, g, self.file.t_final, self.file.speed())?)
    }

    pub fn components(&self) -> Result<Vec<LineProblem>, CliError> {
        let p = &self.file;
        p.require("components", &p.components)?
            .iter()
            .map(|c| {
                Ok(LineProblem::with_speed(
                    self.func(&c.f)?,
                    self.func(&c.g)?,
                    p.t_final,
                    p.speed(),
                )?)
            })
            .collect()
    }

    pub fn periodic(&self) -> Result<PeriodicProblem, CliError> {
        let (f, g) = self.data()?;
        Ok(PeriodicProblem::new(f, g, self.file.t_final, self.file.period())?)
    }

    pub fn bounded(&self) -> Result<BoundedProblem, CliError> {
        let p = &self.file;
        let (f, g) = self.data()?;
        let kind = match p.kind {
            Kind::Neumann => BoundaryKind::Neumann,
            _ => BoundaryKind::Dirichlet,
        };
        let problem = BoundedProblem::new(f, g, p.t_final, p.period(), kind)?;
        Ok(match (&p.left, &p.right) {
            (Some(l), Some(r)) => problem.with_boundary(self.func(l)?, self.func(r)?),
            _ => problem,
        })
    }

    pub fn wavemap(&self) -> Result<WaveMapProblem, CliError> {
        let (f, g) = self.data()?;
        Ok(WaveMapProblem::new(f, g, self.file.t_final)?)
    }

    pub fn flow(&self) -> Result<FlowProblem, CliError> {
        let p = &self.file;
        let f = self.func(p.require("f", &p.f)?)?;
        Ok(FlowProblem::new(f, p.period(), p.t_final, *p.require("kstar", &p.kstar)?)?)
    }

    pub fn wave3d(&self) -> Result<Problem3D, CliError> {
        let p = &self.file;
        let field = |spec: &FnSpec| match spec {
            FnSpec::Expr(src) => Ok(Field3::parse(src)?),
            FnSpec::Csv { .. } => Err(CliError::Invalid("wave3d data must be expressions".into())),
        };
        Ok(Problem3D::new(
            field(p.require("f", &p.f)?)?,
            field(p.require("g", &p.g)?)?,
            p.t_final,
            p.require("points", &p.points)?.clone(),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_line_problem() {
        let p = parse(r#"{"kind": "line", "f": "0", "g": "x", "T": 1}"#).unwrap();
        assert_eq!(p.kind, Kind::Line);
        assert_eq!(p.speed(), 1.0);
        assert_eq!(p.tolerances.terminal, 1e-7);
        assert_eq!(p.output.nx, 201);
    }

    #[test]
    fn csv_reference_and_overrides() {
        let p = parse(
            r#"{"kind": "periodic", "f": {"csv": "f.csv"}, "g": "0", "T": 0.25, "L": 1,
                "tolerances": {"terminal": 1e-6}, "output": {"nt": 3}}"#,
        )
        .unwrap();
        assert!(matches!(p.f, Some(FnSpec::Csv { .. })));
        assert_eq!(p.tolerances.terminal, 1e-6);
        assert_eq!(p.tolerances.solve, 1e-9);
        assert_eq!(p.output.nt, 3);
    }

    #[test]
    fn missing_and_bad_fields() {
        for text in [
            r#"{"kind": "periodic", "f": "0", "g": "0", "T": 1}"#,
            r#"{"kind": "line", "f": "0", "T": 1}"#,
            r#"{"kind": "line", "f": "0", "g": "0", "T": -1}"#,
            r#"{"kind": "curvflow", "f": "1", "T": 1, "L": 2}"#,
            r#"{"kind": "line", "f": "0", "g": "0", "T": 1, "left": "0", "right": "0"}"#,
            r#"{"kind": "dirichlet", "f": "0", "g": "0", "T": 1, "L": 2, "left": "0"}"#,
            r#"{"kind": "wave3d", "f": "0", "g": "0", "T": 1}"#,
        ] {
            assert!(matches!(parse(text), Err(CliError::Invalid(_))), "{text}");
        }
        assert!(matches!(
            parse(r#"{"kind": "line", "f": "0", "g": "0", "T": 1, "extra": 2}"#),
            Err(CliError::Json { .. })
        ));
        assert!(matches!(parse(r#"{"kind": "sphere", "T": 1}"#), Err(CliError::Json { .. })));
    }

    #[test]
    fn malformed_json_has_position() {
        match parse("{\n  \"kind\": \"line\",\n  \"T\": ,\n}") {
            Err(CliError::Json { line, column, .. }) => assert_eq!((line, column), (3, 8)),
            other => panic!("{other:?}"),
        }
    }
}
