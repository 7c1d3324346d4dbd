//! Report envelope, JSON bodies, and CSV writers.
//!
//! Every command emits one JSON document with a fixed envelope (schema tag,
//! command, timestamp, engine version, resolved config); the body is
//! command-specific. Serialization goes through structs with a fixed field
//! order, so identical configurations produce byte-identical documents
//! modulo the timestamp field.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Vector3};
use serde::Serialize;

use curvelab_core::finitetype::{Classification, FitSample};
use curvelab_core::forms::{ConnectionCoeffs, FrameData};

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA: &str = "curvelab/1";

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub timestamp: String,
    pub engine_version: &'static str,
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub body: T,
}

/// Serializes the envelope, writes the timestamped report file, prints the
/// JSON body to stdout and a one-line summary to stderr.
pub fn emit<T: Serialize>(
    config: &RunConfig,
    command: &str,
    body: T,
    summary: &str,
) -> Result<(), CliError> {
    let now = chrono::Utc::now();
    let envelope = Envelope {
        schema: SCHEMA,
        command,
        timestamp: now.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        engine_version: env!("CARGO_PKG_VERSION"),
        config,
        body,
    };
    let json = serde_json::to_string_pretty(&envelope)
        .map_err(|e| CliError::Io(format!("serialize report: {e}")))?;

    let dir = &config.output.dir;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("create {}: {e}", dir.display())))?;
    let fname = format!("{command}-{}.json", now.format("%Y%m%dT%H%M%S%3fZ"));
    std::fs::write(dir.join(&fname), &json)
        .map_err(|e| CliError::Io(format!("write report: {e}")))?;

    println!("{json}");
    eprintln!("{summary}");
    Ok(())
}

fn mat2(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn vec3(v: &Vector3<f64>) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn conn(c: &ConnectionCoeffs) -> [[[f64; 2]; 2]; 2] {
    c.raw()
}

/// Full frame dump with fixed field names.
#[derive(Serialize)]
pub struct FormsBody {
    pub surface: String,
    pub at: [f64; 2],
    pub x: [f64; 3],
    pub xu: [f64; 3],
    pub xv: [f64; 3],
    pub xuu: [f64; 3],
    pub xuv: [f64; 3],
    pub xvv: [f64; 3],
    pub xuuu: [f64; 3],
    pub xuuv: [f64; 3],
    pub xuvv: [f64; 3],
    pub xvvv: [f64; 3],
    pub n: [f64; 3],
    pub nu: [f64; 3],
    pub nv: [f64; 3],
    pub nuu: [f64; 3],
    pub nuv: [f64; 3],
    pub nvv: [f64; 3],
    pub g: [[f64; 2]; 2],
    pub b: [[f64; 2]; 2],
    pub e: [[f64; 2]; 2],
    pub ginv: [[f64; 2]; 2],
    pub binv: [[f64; 2]; 2],
    pub einv: [[f64; 2]; 2],
    pub dg: [[[f64; 2]; 2]; 2],
    pub db: [[[f64; 2]; 2]; 2],
    pub de: [[[f64; 2]; 2]; 2],
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "Kgrad")]
    pub k_grad: [f64; 2],
    #[serde(rename = "Hgrad")]
    pub h_grad: [f64; 2],
    #[serde(rename = "Gamma")]
    pub gamma: [[[f64; 2]; 2]; 2],
    #[serde(rename = "Pi")]
    pub pi: [[[f64; 2]; 2]; 2],
    #[serde(rename = "LambdaSym")]
    pub lambda_sym: [[[f64; 2]; 2]; 2],
    #[serde(rename = "T")]
    pub t: [[[f64; 2]; 2]; 2],
    #[serde(rename = "Ttilde")]
    pub t_tilde: [[[f64; 2]; 2]; 2],
}

impl FormsBody {
    pub fn from_frame(surface: &str, f: &FrameData) -> Self {
        FormsBody {
            surface: surface.to_string(),
            at: [f.u, f.v],
            x: vec3(&f.x),
            xu: vec3(&f.x_u),
            xv: vec3(&f.x_v),
            xuu: vec3(&f.x_uu),
            xuv: vec3(&f.x_uv),
            xvv: vec3(&f.x_vv),
            xuuu: vec3(&f.x_uuu),
            xuuv: vec3(&f.x_uuv),
            xuvv: vec3(&f.x_uvv),
            xvvv: vec3(&f.x_vvv),
            n: vec3(&f.n),
            nu: vec3(&f.n_u),
            nv: vec3(&f.n_v),
            nuu: vec3(&f.n_uu),
            nuv: vec3(&f.n_uv),
            nvv: vec3(&f.n_vv),
            g: mat2(&f.g),
            b: mat2(&f.b),
            e: mat2(&f.e),
            ginv: mat2(&f.g_inv),
            binv: mat2(&f.b_inv),
            einv: mat2(&f.e_inv),
            dg: [mat2(&f.dg[0]), mat2(&f.dg[1])],
            db: [mat2(&f.db[0]), mat2(&f.db[1])],
            de: [mat2(&f.de[0]), mat2(&f.de[1])],
            k: f.gauss_curvature,
            h: f.mean_curvature,
            k_grad: f.k_grad,
            h_grad: f.h_grad,
            gamma: conn(&f.gamma),
            pi: conn(&f.pi),
            lambda_sym: conn(&f.lambda_sym),
            t: conn(&f.t),
            t_tilde: conn(&f.t_tilde),
        }
    }
}

#[derive(Serialize)]
pub struct DetectBody {
    pub surface: String,
    pub form: String,
    pub lambda: [[f64; 3]; 3],
    pub offset: [f64; 3],
    pub residual_max_rel: f64,
    pub residual_rms: f64,
    pub cond: f64,
    pub verdict: String,
    pub identity_channel: Option<curvelab_core::finitetype::IdentityChannel>,
    pub expectation_mismatch: Option<bool>,
    pub samples: Option<String>,
}

impl DetectBody {
    pub fn from_classification(c: &Classification, samples_path: Option<String>) -> Self {
        DetectBody {
            surface: c.surface.clone(),
            form: c.form.to_string(),
            lambda: c.fit.matrix,
            offset: c.fit.offset,
            residual_max_rel: c.fit.residual_max_rel,
            residual_rms: c.fit.residual_rms,
            cond: c.fit.condition_number,
            verdict: c.fit.verdict.to_string(),
            identity_channel: c.identity_channel.clone(),
            expectation_mismatch: c.expectation_mismatch,
            samples: samples_path,
        }
    }
}

/// Per-sample CSV dump for detect runs.
pub fn write_detect_csv(
    dir: &Path,
    surface: &str,
    detail: &[FitSample],
) -> Result<PathBuf, CliError> {
    let slug: String = surface
        .chars()
        .map(|ch| if ch.is_alphanumeric() { ch } else { '_' })
        .collect();
    let path = dir.join(format!("detect-{slug}-samples.csv"));
    let mut out = String::from("u,v,n1,n2,n3,lap1,lap2,lap3,residual\n");
    for s in detail {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.point.0,
            s.point.1,
            s.gauss_map[0],
            s.gauss_map[1],
            s.gauss_map[2],
            s.target[0],
            s.target[1],
            s.target[2],
            s.residual
        ));
    }
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("create {}: {e}", dir.display())))?;
    std::fs::write(&path, out).map_err(|e| CliError::Io(format!("write csv: {e}")))?;
    Ok(path)
}

/// Generic CSV writer: header plus numeric rows.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: &[Vec<f64>],
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("create {}: {e}", dir.display())))?;
    std::fs::write(&path, out).map_err(|e| CliError::Io(format!("write csv: {e}")))?;
    Ok(path)
}
