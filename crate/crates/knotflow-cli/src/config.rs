//! Run configuration: TOML schema, defaults, and construction of the library
//! objects it describes.

use anyhow::{bail, Context};
use knotflow::{ClosedCurve, EnergyParams, FlowConfig, Integrator};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    pub curve: CurveSection,
    pub energy: EnergySection,
    pub flow: FlowSection,
    /// Optional parameter grid for the sweep subcommand.
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    /// 0 means the library default.
    #[serde(default)]
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 0, threads: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub kind: String,
    pub n: usize,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub p: Option<u32>,
    #[serde(default)]
    pub q: Option<u32>,
    #[serde(default)]
    pub big_radius: Option<f64>,
    #[serde(default)]
    pub small_radius: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub band: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    pub alpha: f64,
    pub lambda: f64,
    #[serde(default = "default_exclusion")]
    pub exclusion: usize,
    #[serde(default = "default_true")]
    pub local_correction: bool,
}

fn default_exclusion() -> usize {
    2
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    #[serde(default = "default_integrator")]
    pub integrator: String,
    #[serde(default = "default_dt0")]
    pub dt0: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_reparam")]
    pub reparam_interval: usize,
    #[serde(default = "default_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_stride")]
    pub frame_stride: usize,
}

fn default_integrator() -> String {
    "imex".into()
}
fn default_dt0() -> f64 {
    0.02
}
fn default_dt_min() -> f64 {
    1e-10
}
fn default_dt_max() -> f64 {
    1.0
}
fn default_reparam() -> usize {
    10
}
fn default_tol() -> f64 {
    1e-6
}
fn default_t_max() -> f64 {
    2000.0
}
fn default_stride() -> usize {
    50
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).context("parsing config")?;
        Ok(cfg)
    }

    pub fn build_curve(&self, seed_override: Option<u64>) -> anyhow::Result<ClosedCurve<f64>> {
        let c = &self.curve;
        let seed = seed_override.unwrap_or(self.run.seed);
        let curve = match c.kind.as_str() {
            "circle" => knotflow::circle(
                c.radius.context("circle needs `radius`")?,
                c.n,
            )?,
            "torus_knot" => knotflow::torus_knot(
                c.p.context("torus_knot needs `p`")?,
                c.q.context("torus_knot needs `q`")?,
                c.big_radius.context("torus_knot needs `big_radius`")?,
                c.small_radius.context("torus_knot needs `small_radius`")?,
                c.n,
            )?,
            "fourier_perturbed_circle" => knotflow::fourier_perturbed_circle(
                seed,
                c.amplitude.context("fourier_perturbed_circle needs `amplitude`")?,
                c.band.context("fourier_perturbed_circle needs `band`")?,
                c.n,
            )?,
            other => bail!("unknown curve kind '{other}'"),
        };
        Ok(curve)
    }

    pub fn energy_params(&self) -> anyhow::Result<EnergyParams<f64>> {
        let mut p = EnergyParams::new(self.energy.alpha, self.energy.lambda)?;
        p.exclusion = self.energy.exclusion;
        p.local_correction = self.energy.local_correction;
        Ok(p)
    }

    pub fn flow_config(&self) -> anyhow::Result<FlowConfig<f64>> {
        let integrator = match self.flow.integrator.as_str() {
            "imex" => Integrator::Imex,
            "explicit" => Integrator::Explicit,
            other => bail!("unknown integrator '{other}' (use 'imex' or 'explicit')"),
        };
        let cfg = FlowConfig {
            params: self.energy_params()?,
            integrator,
            dt0: self.flow.dt0,
            dt_min: self.flow.dt_min,
            dt_max: self.flow.dt_max,
            reparam_interval: self.flow.reparam_interval,
            residual_tol: self.flow.residual_tol,
            t_max: self.flow.t_max,
            frame_stride: self.flow.frame_stride,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
