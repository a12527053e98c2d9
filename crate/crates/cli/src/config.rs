use std::path::Path;

use contrarian_core::{ConvolutionSet, Engine, GroupParams, RunManifest, Scaling, Stride};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every setting a run can take. Fields are optional so a config file, a
/// manifest and command-line flags can be layered; `resolve_*` fills in
/// defaults and the resolved value is what the manifest records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(rename = "C", alias = "c", skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(rename = "C2", alias = "c2", skip_serializing_if = "Option::is_none")]
    pub c2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub find_q: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<usize>>,
    #[serde(rename = "L", alias = "l", skip_serializing_if = "Option::is_none")]
    pub big_l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<u32>,
}

macro_rules! layer {
    ($top:expr, $base:expr, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Values from `self` win over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        layer!(
            self, base, example, n, m, c, c2, q, p, d, seed, steps, scaling, stride, engine,
            p_grid, agent, resolution, find_q, q_lo, q_hi, alpha, t_grid, big_l, l_max
        )
    }

    /// Reads a TOML config file, or the `config` block of a run manifest
    /// (`.json`). A manifest written by another subcommand is rejected.
    pub fn load(path: &Path, command: &str) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: RunManifest = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if manifest.command != command {
                return Err(CliError::Config(format!(
                    "manifest was written by `{}`, not `{command}`",
                    manifest.command
                )));
            }
            serde_json::from_value(manifest.config)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
        value
            .clone()
            .ok_or_else(|| CliError::Config(format!("missing required setting --{flag}")))
    }

    /// The group and first convolution set. `m` defaults to the dimension of
    /// the points in `C`.
    pub fn system(&self) -> Result<(GroupParams, ConvolutionSet), CliError> {
        let n = Self::require(&self.n, "n")?;
        let text = Self::require(&self.c, "C")?;
        let g = self.group(n, &text)?;
        let c = ConvolutionSet::parse(&g, &text)?;
        Ok((g, c))
    }

    fn group(&self, n: u32, text: &str) -> Result<GroupParams, CliError> {
        let m = match self.m {
            Some(m) => m,
            None => contrarian_core::lattice::parse_points(text)?
                .first()
                .map_or(1, |pt| pt.len() as u32),
        };
        Ok(GroupParams::new(n, m)?)
    }

    pub fn stride(&self) -> Stride {
        self.stride.map_or(Stride::Default, Stride::Every)
    }
}
