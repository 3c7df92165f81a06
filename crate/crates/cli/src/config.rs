//! Experiment configuration: TOML primary, JSON accepted. Unknown keys are
//! rejected so a typo cannot silently change an experiment.

use std::collections::BTreeMap;
use std::path::Path;

use admitlab_core::fem::Regime;
use admitlab_core::oned::Coefficient1d;
use admitlab_core::C64;
use serde::Deserialize;

use crate::CliError;

/// Scalar coefficient component as a function of position.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarSpec {
    /// Constant value.
    Const(f64),
    /// `a + b·x₁ + c·x₂`.
    Affine([f64; 3]),
}

impl ScalarSpec {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match self {
            ScalarSpec::Const(c) => *c,
            ScalarSpec::Affine([a, b, c]) => a + b * p[0] + c * p[1],
        }
    }
}

/// Complex coefficient built from two scalar components.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub re: ScalarSpec,
    #[serde(default = "zero_scalar")]
    pub im: ScalarSpec,
}

fn zero_scalar() -> ScalarSpec {
    ScalarSpec::Const(0.0)
}

impl CoefficientSpec {
    pub fn eval(&self, p: [f64; 2]) -> C64 {
        C64::new(self.re.eval(p), self.im.eval(p))
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKindSpec {
    UnitSquare,
    UnitDisc,
    Interval,
}

impl From<DomainKindSpec> for admitlab_core::geometry::DomainKind {
    fn from(v: DomainKindSpec) -> Self {
        match v {
            DomainKindSpec::UnitSquare => Self::UnitSquare,
            DomainKindSpec::UnitDisc => Self::UnitDisc,
            DomainKindSpec::Interval => Self::Interval,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKindSpec,
    pub resolution: u32,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeSpec {
    ConstantPair,
    RealBackground,
    General,
}

impl From<RegimeSpec> for Regime {
    fn from(v: RegimeSpec) -> Self {
        match v {
            RegimeSpec::ConstantPair => Regime::ConstantPair,
            RegimeSpec::RealBackground => Regime::RealBackground,
            RegimeSpec::General => Regime::General,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    #[serde(flatten)]
    pub coefficient: CoefficientSpec,
    #[serde(default = "default_regime")]
    pub regime: RegimeSpec,
    /// Declared dissipativity constant; data-derived when omitted.
    pub c0: Option<f64>,
    pub lipschitz: Option<f64>,
}

fn default_regime() -> RegimeSpec {
    RegimeSpec::General
}

/// Inclusion geometry: a single shape or a family.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Disc { center: [f64; 2], radius: f64 },
    Discs { center: [f64; 2], radii: Vec<f64> },
    HalfDiscs { center: [f64; 2], radii: Vec<f64> },
    Strip { x_range: [f64; 2] },
    RandomDiscs {
        count: usize,
        radius_range: [f64; 2],
        margin: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    pub shape: ShapeSpec,
    pub value: CoefficientSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentSpec {
    /// Oscillatory modes `[κ, re, im]` in the arclength angle.
    #[serde(default)]
    pub modes: Vec<[f64; 3]>,
    /// Opposed constant flux `±K` on the two vertical sides (quasi-1D).
    pub side_flux: Option<[f64; 2]>,
    /// Arclength support window.
    pub support: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub identity_gate: Option<f64>,
    pub gap_floor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Optional propagation-of-smallness radius; reports the induced
    /// mask-bound exponent next to the fitted one.
    pub lps_rho: Option<f64>,
}

/// One-dimensional closed-form experiment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneDSpec {
    pub gamma0: Coefficient1dSpec,
    pub gamma1: Coefficient1dSpec,
    pub flux: [f64; 2],
    #[serde(default)]
    pub intervals: Vec<[f64; 2]>,
    /// Additional seeded random intervals.
    #[serde(default)]
    pub random_intervals: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient1dSpec {
    Const([f64; 2]),
    /// `a + b x` with complex `a`, `b`.
    Affine { a: [f64; 2], b: [f64; 2] },
    /// Complex polynomial coefficients, low degree first.
    Poly(Vec<[f64; 2]>),
    /// `(α + iβx)²`.
    SquaredImaginaryLinear { alpha: f64, beta: f64 },
}

impl Coefficient1dSpec {
    pub fn build(&self) -> Coefficient1d {
        match self {
            Coefficient1dSpec::Const([re, im]) => Coefficient1d::constant(C64::new(*re, *im)),
            Coefficient1dSpec::Affine { a, b } => {
                Coefficient1d::affine(C64::new(a[0], a[1]), C64::new(b[0], b[1]))
            }
            Coefficient1dSpec::Poly(coeffs) => Coefficient1d::poly(
                coeffs.iter().map(|[re, im]| C64::new(*re, *im)).collect(),
            ),
            Coefficient1dSpec::SquaredImaginaryLinear { alpha, beta } => {
                Coefficient1d::squared_imaginary_linear(*alpha, *beta)
            }
        }
    }
}

/// Unique-continuation diagnostics configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UcpSpec {
    /// Analytic harmonic monomial degree; when set, diagnostics run on it
    /// instead of a FEM solution.
    pub analytic_degree: Option<u32>,
    #[serde(default = "default_center")]
    pub center: [f64; 2],
    #[serde(default)]
    pub radii: Vec<f64>,
    pub three_radii: Option<[f64; 3]>,
    pub doubling_radius: Option<f64>,
    pub rho: Option<f64>,
    #[serde(default = "default_angular_nodes")]
    pub angular_nodes: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Oscillation-quotient inputs for the mask-bound constants.
    pub rbar: Option<f64>,
    #[serde(default = "default_osc_c")]
    pub oscillation_c: f64,
}

fn default_center() -> [f64; 2] {
    [0.0, 0.0]
}

fn default_angular_nodes() -> usize {
    256
}

fn default_samples() -> usize {
    512
}

fn default_osc_c() -> f64 {
    1.0
}

/// Flat-boundary reflection experiment on the half square `(0,1)×(0,1/2)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectSpec {
    pub resolution: u32,
    pub a_xx: ScalarSpec,
    pub a_yy: ScalarSpec,
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Option<DomainSpec>,
    pub background: Option<BackgroundSpec>,
    pub inclusion: Option<InclusionSpec>,
    pub current: Option<CurrentSpec>,
    pub tolerances: Option<ToleranceSpec>,
    pub sweep: Option<SweepSpec>,
    pub oned: Option<OneDSpec>,
    pub ucp: Option<UcpSpec>,
    pub reflect: Option<ReflectSpec>,
}

/// The parsed configuration together with its raw text (echoed into reports).
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub raw: String,
}

/// Loads TOML (default) or JSON (by extension) and rejects unknown keys.
pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false);
    let config: ExperimentConfig = if is_json {
        serde_json::from_str(&raw).map_err(|e| {
            CliError::Config(format!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?
    } else {
        toml::from_str(&raw).map_err(|e| {
            let loc = e
                .span()
                .map(|s| location_of(&raw, s.start))
                .map(|(l, c)| format!("line {l}, column {c}: "))
                .unwrap_or_default();
            CliError::Config(format!("{}: {loc}{e}", path.display()))
        })?
    };
    Ok(LoadedConfig { config, raw })
}

fn location_of(text: &str, byte: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, ch) in text.char_indices() {
        if i >= byte {
            break;
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

/// `--tol NAME=VALUE` overrides.
#[derive(Debug, Clone, Default)]
pub struct ToleranceOverrides {
    pub values: BTreeMap<String, f64>,
}

impl ToleranceOverrides {
    pub fn parse(args: &[String]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for arg in args {
            let (name, value) = arg.split_once('=').ok_or_else(|| {
                CliError::Config(format!("--tol expects NAME=VALUE, got `{arg}`"))
            })?;
            let parsed: f64 = value
                .parse()
                .map_err(|_| CliError::Config(format!("--tol {name}: `{value}` is not a number")))?;
            if !matches!(name, "identity_gate" | "gap_floor" | "reflect_residual") {
                return Err(CliError::Config(format!("unknown tolerance name `{name}`")));
            }
            values.insert(name.to_string(), parsed);
        }
        Ok(Self { values })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}
