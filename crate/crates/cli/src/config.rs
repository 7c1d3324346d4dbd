//! Run configuration: defaults, config-file parsing, flag merging, and the
//! resolved echo embedded in every report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use curvelab_core::finitetype::{FitThresholds, SampleStrategy};
use curvelab_core::forms::FundamentalForm;
use curvelab_core::surfaces::{
    make_surface_with, EngineSettings, SurfacePatch, SurfaceSpec,
};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceConfig {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplingConfig {
    pub strategy: SampleStrategy,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceConfig {
    pub tau_pass: f64,
    pub tau_fail: f64,
    pub k_min: f64,
    pub jet_order: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: String,
}

/// Fully resolved configuration, echoed verbatim into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    pub form: FundamentalForm,
    pub sampling: SamplingConfig,
    pub tolerances: ToleranceConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn thresholds(&self) -> FitThresholds {
        FitThresholds {
            tau_pass: self.tolerances.tau_pass,
            tau_fail: self.tolerances.tau_fail,
        }
    }

    pub fn engine_settings(&self) -> EngineSettings {
        EngineSettings {
            jet_order: self.tolerances.jet_order,
            k_min: self.tolerances.k_min,
        }
    }

    pub fn wants_csv(&self) -> bool {
        matches!(self.output.formats.as_str(), "csv" | "both")
    }

    /// Builds the configured catalog surface.
    pub fn build_patch(&self) -> Result<SurfacePatch, CliError> {
        let s = &self.surface;
        let need = |field: Option<f64>, name: &str| {
            field.ok_or_else(|| {
                CliError::Usage(format!(
                    "surface '{}' requires parameter --{name}",
                    s.name
                ))
            })
        };
        let spec = match s.name.as_str() {
            "sphere" => SurfaceSpec::Sphere {
                r: s.r.unwrap_or(1.0),
            },
            "helicoid" => SurfaceSpec::Helicoid {
                c: s.c.unwrap_or(1.0),
                l: s.l.unwrap_or(0.0),
            },
            "quadric1" => SurfaceSpec::Quadric1 {
                a: need(s.a, "a")?,
                b: need(s.b, "b")?,
                c: need(s.c, "c")?,
            },
            "quadric2" => SurfaceSpec::Quadric2 {
                a: need(s.a, "a")?,
                b: need(s.b, "b")?,
            },
            "cylinder" => SurfaceSpec::Cylinder {
                r: s.r.unwrap_or(1.0),
            },
            "catenoid" => SurfaceSpec::Catenoid {
                c: s.c.unwrap_or(1.0),
            },
            "torus" => SurfaceSpec::Torus {
                rr: s.big_r.unwrap_or(2.0),
                r: s.r.unwrap_or(0.5),
            },
            "plane" => SurfaceSpec::plane(),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown surface '{other}' (see `curvelab catalog`)"
                )))
            }
        };
        make_surface_with(spec, self.engine_settings()).map_err(CliError::Engine)
    }
}

/// Key-value config file: one `key = value` pair per line, `#` comments,
/// optional quotes around values.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected `key = value`, got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(
            key.trim().to_string(),
            value.trim().trim_matches('"').to_string(),
        );
    }
    Ok(map)
}

pub fn parse_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("config key '{key}': bad number '{v}'")))
        })
        .transpose()
}

pub fn parse_usize(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("config key '{key}': bad integer '{v}'")))
        })
        .transpose()
}

pub fn parse_u64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse::<u64>()
                .map_err(|_| CliError::Usage(format!("config key '{key}': bad integer '{v}'")))
        })
        .transpose()
}
