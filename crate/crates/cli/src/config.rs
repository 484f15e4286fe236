//! Run configuration: a TOML document with one table per component, every
//! field defaulted, plus command-line overrides.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use mdspde::control::{ControlKind, ControlPolicy};
use mdspde::model::{ModelKind, ModelSpec, Sign};
use mdspde::solver::{steps_for, SolverConfig};
use mdspde::spectral::{
    check_spectral_gap, laplacian_spectrum, linearized_spectrum, BoundaryCondition, SpectralBasis,
};

pub const REFERENCE_EPSILON: [f64; 9] = [
    0.01, 0.004, 0.002, 0.0008, 0.0004, 0.0001, 0.00006, 0.000008, 0.000004,
];
pub const REFERENCE_HORIZON: [f64; 6] = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    pub mu: f64,
    pub bc: String,
    pub ell: f64,
    pub sign: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: "allen-cahn".into(),
            mu: -0.5,
            bc: "neumann".into(),
            ell: 1.0,
            sign: "+".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub galerkin: usize,
    pub steps_per_unit: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub seed: u64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            galerkin: 50,
            steps_per_unit: 100,
            l: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub variant: String,
    pub kappa: f64,
    pub k0: usize,
    pub h_exponent: f64,
}

impl Default for ControlSection {
    fn default() -> Self {
        Self {
            variant: "mollified".into(),
            kappa: 0.9,
            k0: 1,
            h_exponent: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSection {
    pub samples: usize,
    pub threads: usize,
    pub epsilon: Vec<f64>,
    pub horizon: Vec<f64>,
}

impl Default for CampaignSection {
    fn default() -> Self {
        Self {
            samples: 50_000,
            threads: 1,
            epsilon: REFERENCE_EPSILON.to_vec(),
            horizon: REFERENCE_HORIZON.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<String>,
    pub path_dump: Option<String>,
    pub paper_style: bool,
    pub omit_timing: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub model: ModelSection,
    pub solver: SolverSection,
    pub control: ControlSection,
    pub campaign: CampaignSection,
    pub output: OutputSection,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub mu: Option<f64>,
    pub bc: Option<String>,
    pub ell: Option<f64>,
    pub sign: Option<String>,
    pub galerkin: Option<usize>,
    pub steps_per_unit: Option<usize>,
    pub radius: Option<f64>,
    pub seed: Option<u64>,
    pub control: Option<String>,
    pub kappa: Option<f64>,
    pub k0: Option<usize>,
    pub h_exponent: Option<f64>,
    pub samples: Option<usize>,
    pub threads: Option<usize>,
    pub epsilon: Option<Vec<f64>>,
    pub horizon: Option<Vec<f64>>,
    pub out: Option<String>,
    pub path_dump: Option<String>,
    pub paper_style: bool,
    pub omit_timing: bool,
}

impl RawConfig {
    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(o.model => self.model.kind);
        set!(o.mu => self.model.mu);
        set!(o.bc => self.model.bc);
        set!(o.ell => self.model.ell);
        set!(o.sign => self.model.sign);
        set!(o.galerkin => self.solver.galerkin);
        set!(o.steps_per_unit => self.solver.steps_per_unit);
        set!(o.radius => self.solver.l);
        set!(o.seed => self.solver.seed);
        set!(o.control => self.control.variant);
        set!(o.kappa => self.control.kappa);
        set!(o.k0 => self.control.k0);
        set!(o.h_exponent => self.control.h_exponent);
        set!(o.samples => self.campaign.samples);
        set!(o.threads => self.campaign.threads);
        set!(o.epsilon => self.campaign.epsilon);
        set!(o.horizon => self.campaign.horizon);
        if o.out.is_some() {
            self.output.csv = o.out;
        }
        if o.path_dump.is_some() {
            self.output.path_dump = o.path_dump;
        }
        self.output.paper_style |= o.paper_style;
        self.output.omit_timing |= o.omit_timing;
    }
}

/// A validated configuration with the derived model, basis and policy.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub model: ModelSpec,
    pub basis: SpectralBasis,
    pub policy: ControlPolicy,
}

/// Parses a TOML document; syntax errors carry line and column.
pub fn parse_document(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| anyhow!("malformed configuration: {e}"))
}

/// Parses and validates a document with no overrides.
#[cfg_attr(not(test), allow(dead_code))]
pub fn parse_config(text: &str) -> Result<RunConfig> {
    validate(parse_document(text)?)
}

fn parse_kind(raw: &ModelSection) -> Result<ModelKind> {
    match raw.kind.to_ascii_lowercase().replace('_', "-").as_str() {
        "allen-cahn" | "ac" => Ok(ModelKind::AllenCahn),
        "quintic" => Ok(ModelKind::Quintic { mu: raw.mu }),
        other => bail!("model.kind: unknown model '{other}' (expected allen-cahn or quintic)"),
    }
}

fn parse_sign(s: &str) -> Result<Sign> {
    match s {
        "+" | "plus" | "+1" => Ok(Sign::Plus),
        "-" | "minus" | "-1" => Ok(Sign::Minus),
        other => bail!("model.sign: expected + or -, got '{other}'"),
    }
}

pub fn parse_control(s: &str, k0: usize) -> Result<ControlKind> {
    match s.to_ascii_lowercase().as_str() {
        "none" | "smc" => Ok(ControlKind::None),
        "asymptotic" => Ok(ControlKind::Asymptotic { k0 }),
        "mollified" | "is" => Ok(ControlKind::Mollified),
        other => bail!(
            "control.variant: unknown control '{other}' (expected none, asymptotic or mollified)"
        ),
    }
}

/// Re-checks every component invariant and builds the derived objects.
pub fn validate(raw: RawConfig) -> Result<RunConfig> {
    let bc: BoundaryCondition = raw.model.bc.parse().map_err(|e| anyhow!("model.bc: {e}"))?;
    let kind = parse_kind(&raw.model)?;
    let sign = parse_sign(&raw.model.sign)?;
    let model = ModelSpec::new(kind, bc, raw.model.ell, sign).context("model")?;
    if raw.solver.galerkin < 2 {
        bail!(
            "solver.galerkin: must be at least 2, got {}",
            raw.solver.galerkin
        );
    }
    if raw.solver.steps_per_unit == 0 {
        bail!("solver.steps_per_unit: must be at least 1");
    }
    if raw.campaign.samples == 0 {
        bail!("campaign.samples: must be at least 1");
    }
    if raw.campaign.epsilon.is_empty() {
        bail!("campaign.epsilon: grid must be non-empty");
    }
    if raw.campaign.horizon.is_empty() {
        bail!("campaign.horizon: grid must be non-empty");
    }
    let lap = laplacian_spectrum(bc, raw.model.ell, raw.solver.galerkin).context("solver")?;
    let basis = linearized_spectrum(&model, &lap).context("model")?;
    let control = parse_control(&raw.control.variant, raw.control.k0)?;
    let policy =
        ControlPolicy::new(control, raw.solver.l, raw.control.kappa, &basis).context("control")?;
    for &eps in &raw.campaign.epsilon {
        for &t in &raw.campaign.horizon {
            cell_config(&raw, eps, t)
                .validate()
                .with_context(|| format!("campaign (epsilon = {eps}, T = {t})"))?;
        }
    }
    mdspde::campaign::scaling_diagnostic(&raw.campaign.epsilon, raw.control.h_exponent);
    Ok(RunConfig {
        raw,
        model,
        basis,
        policy,
    })
}

/// Solver configuration of one `(ε, T)` cell.
pub fn cell_config(raw: &RawConfig, epsilon: f64, horizon: f64) -> SolverConfig {
    SolverConfig {
        epsilon,
        horizon,
        steps: steps_for(horizon, raw.solver.steps_per_unit),
        h_exponent: raw.control.h_exponent,
        l: raw.solver.l,
        seed: raw.solver.seed,
        record_path: false,
    }
}

impl RunConfig {
    pub fn gap(&self) -> mdspde::spectral::GapReport {
        check_spectral_gap(self.basis.lin_eigenvalues())
    }
}
