//! Run-configuration schema: flat TOML with one section per block.
//! Unknown keys are rejected so typos cannot silently change a run.

use serde::{Deserialize, Serialize};
use spinor_sbo::misf::Method;
use spinor_sbo::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    MisfAfm,
    MisfFm,
    MisfFieldT,
    Mott1Diagram,
    Mott2Diagram,
    QcCurve,
}

impl Scenario {
    #[cfg_attr(not(test), allow(dead_code))]
    pub const ALL: [Scenario; 6] = [
        Scenario::MisfAfm,
        Scenario::MisfFm,
        Scenario::MisfFieldT,
        Scenario::Mott1Diagram,
        Scenario::Mott2Diagram,
        Scenario::QcCurve,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::MisfAfm => "misf-afm",
            Scenario::MisfFm => "misf-fm",
            Scenario::MisfFieldT => "misf-field-t",
            Scenario::Mott1Diagram => "mott1-diagram",
            Scenario::Mott2Diagram => "mott2-diagram",
            Scenario::QcCurve => "qc-curve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Analytic,
    SelfConsistent,
}

impl From<MethodChoice> for Method {
    fn from(m: MethodChoice) -> Method {
        match m {
            MethodChoice::Analytic => Method::Analytic,
            MethodChoice::SelfConsistent => Method::SelfConsistent,
        }
    }
}

/// Hubbard-model block (misf and mott2 scenarios).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub u0: f64,
    pub u2: f64,
    pub dim: u32,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
}

fn default_n_max() -> u32 {
    8
}

impl ParamsBlock {
    pub fn model(&self, mu: f64) -> ModelParams {
        ModelParams {
            t: 0.0,
            u0: self.u0,
            u2: self.u2,
            mu,
            eta: self.eta,
            temperature: self.temperature,
            dim: self.dim,
        }
    }
}

/// Exchange-coupling block (mott1 and qc scenarios). Couplings may be
/// given directly or through the polar magnitude (the theta sweep then
/// supplies the angle).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpinBlock {
    #[serde(default)]
    pub j1: Option<f64>,
    #[serde(default)]
    pub j2: Option<f64>,
    #[serde(default)]
    pub j: Option<f64>,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AxisBlock {
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisBlock {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default = "default_points_per_axis")]
    pub points_per_axis: usize,
}

fn default_points_per_axis() -> usize {
    64
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { points_per_axis: default_points_per_axis() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_results")]
    pub results: String,
    #[serde(default = "default_metadata")]
    pub metadata: String,
    #[serde(default)]
    pub plot_script: Option<String>,
}

fn default_results() -> String {
    "results.csv".into()
}

fn default_metadata() -> String {
    "run_metadata.toml".into()
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            results: default_results(),
            metadata: default_metadata(),
            plot_script: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub method: Option<MethodChoice>,
    #[serde(default)]
    pub params: Option<ParamsBlock>,
    #[serde(default)]
    pub spin: Option<SpinBlock>,
    pub sweep: AxisBlock,
    #[serde(default)]
    pub sweep2: Option<AxisBlock>,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.sweep.points < 2 {
            return Err("sweep axis needs at least 2 points".into());
        }
        if let Some(s2) = &self.sweep2 {
            if s2.points < 2 {
                return Err("second sweep axis needs at least 2 points".into());
            }
        }
        if !self.sweep.min.is_finite() || !self.sweep.max.is_finite() || self.sweep.min >= self.sweep.max
        {
            return Err("sweep range must be finite with min < max".into());
        }
        match self.scenario {
            Scenario::MisfAfm | Scenario::MisfFm | Scenario::MisfFieldT | Scenario::Mott2Diagram => {
                let p = self
                    .params
                    .as_ref()
                    .ok_or_else(|| format!("scenario {} needs a [params] block", self.scenario.name()))?;
                if !(p.u0 > 0.0) {
                    return Err("params.u0 must be > 0".into());
                }
                if !(1..=3).contains(&p.dim) {
                    return Err("params.dim must be 1..=3".into());
                }
                if p.temperature < 0.0 {
                    return Err("params.temperature must be >= 0".into());
                }
                match self.scenario {
                    Scenario::MisfAfm | Scenario::MisfFieldT | Scenario::Mott2Diagram
                        if p.u2 <= 0.0 =>
                    {
                        return Err("this scenario needs antiferromagnetic u2 > 0".into());
                    }
                    Scenario::MisfFm if p.u2 >= 0.0 => {
                        return Err("misf-fm needs ferromagnetic u2 < 0".into());
                    }
                    _ => {}
                }
                if self.scenario == Scenario::MisfFieldT && p.eta == 0.0 {
                    return Err("misf-field-t needs a nonzero params.eta".into());
                }
            }
            Scenario::Mott1Diagram => {
                let s = self.spin.as_ref().ok_or("mott1-diagram needs a [spin] block")?;
                if s.j1.is_none() || s.j2.is_none() {
                    return Err("mott1-diagram needs spin.j1 and spin.j2".into());
                }
                if self.sweep2.is_none() {
                    return Err("mott1-diagram needs a [sweep2] block (the q axis)".into());
                }
            }
            Scenario::QcCurve => {
                let s = self.spin.as_ref().ok_or("qc-curve needs a [spin] block")?;
                if s.j.is_none() {
                    return Err("qc-curve needs spin.j (coupling magnitude for the theta sweep)".into());
                }
            }
        }
        Ok(())
    }

    pub fn method(&self, cli_override: Option<MethodChoice>) -> Method {
        cli_override
            .or(self.method)
            .unwrap_or(MethodChoice::Analytic)
            .into()
    }
}
