//! Subcommand implementations.

use serde::Serialize;

use curvelab_core::beltrami::{
    laplacian_gauss_map, laplacian_position, laplacian_scalar, ScalarField,
};
use curvelab_core::closedforms::{xval_quadric1, xval_quadric2, xval_ruled, XvalReport};
use curvelab_core::finitetype::{classify_with_samples, sample, Verdict};
use curvelab_core::forms::evaluate_frame;
use curvelab_core::identities::evaluate_identities;
use curvelab_core::surfaces::CurvePair;

use crate::config::RunConfig;
use crate::report::{emit, write_csv, write_detect_csv, DetectBody, FormsBody};
use crate::CliError;

fn parse_point(text: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--at expects \"u,v\", got '{text}'"
        )));
    }
    let u = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("bad u coordinate '{}'", parts[0])))?;
    let v = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("bad v coordinate '{}'", parts[1])))?;
    Ok((u, v))
}

pub fn cmd_forms(cfg: &RunConfig, at: &str) -> Result<i32, CliError> {
    let patch = cfg.build_patch()?;
    let (u, v) = parse_point(at)?;
    let frame = evaluate_frame(&patch, u, v)?;
    let body = FormsBody::from_frame(patch.name(), &frame);
    emit(
        cfg,
        "forms",
        body,
        &format!(
            "forms {} at ({u}, {v}): K = {:.6e}, H = {:.6e}",
            patch.name(),
            frame.gauss_curvature,
            frame.mean_curvature
        ),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct LaplacianPointBody {
    surface: String,
    form: String,
    field: String,
    at: [f64; 2],
    value: serde_json::Value,
}

#[derive(Serialize)]
struct LaplacianGridBody {
    surface: String,
    form: String,
    field: String,
    grid: usize,
    rows: usize,
    csv: String,
}

enum FieldKind {
    GaussMap,
    Position,
    Scalar(ScalarField),
}

fn resolve_field(patch: &curvelab_core::surfaces::SurfacePatch, name: &str) -> Result<FieldKind, CliError> {
    Ok(match name {
        "n" => FieldKind::GaussMap,
        "x" => FieldKind::Position,
        "K" => FieldKind::Scalar(ScalarField::gauss_curvature(patch)),
        "H" => FieldKind::Scalar(ScalarField::mean_curvature(patch)),
        "x1" | "x2" | "x3" => {
            let axis = name[1..].parse::<usize>().unwrap() - 1;
            FieldKind::Scalar(ScalarField::coordinate(patch, axis))
        }
        "n1" | "n2" | "n3" => {
            let axis = name[1..].parse::<usize>().unwrap() - 1;
            FieldKind::Scalar(ScalarField::gauss_map_component(patch, axis))
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown field '{other}' (expected n, x, K, H, x1..x3, n1..n3)"
            )))
        }
    })
}

fn field_value(
    patch: &curvelab_core::surfaces::SurfacePatch,
    form: curvelab_core::forms::FundamentalForm,
    kind: &FieldKind,
    at: (f64, f64),
) -> Result<Vec<f64>, CliError> {
    Ok(match kind {
        FieldKind::GaussMap => {
            let v = laplacian_gauss_map(patch, form, at)?;
            vec![v[0], v[1], v[2]]
        }
        FieldKind::Position => {
            let v = laplacian_position(patch, form, at)?;
            vec![v[0], v[1], v[2]]
        }
        FieldKind::Scalar(f) => vec![laplacian_scalar(patch, form, f, at)?],
    })
}

pub fn cmd_laplacian(
    cfg: &RunConfig,
    field: &str,
    at: Option<&str>,
    grid: Option<usize>,
) -> Result<i32, CliError> {
    let patch = cfg.build_patch()?;
    let kind = resolve_field(&patch, field)?;

    match (at, grid) {
        (Some(at), None) => {
            let point = parse_point(at)?;
            let value = field_value(&patch, cfg.form, &kind, point)?;
            let json_value = if value.len() == 1 {
                serde_json::json!(value[0])
            } else {
                serde_json::json!(value)
            };
            let body = LaplacianPointBody {
                surface: patch.name().to_string(),
                form: cfg.form.to_string(),
                field: field.to_string(),
                at: [point.0, point.1],
                value: json_value,
            };
            emit(
                cfg,
                "laplacian",
                body,
                &format!(
                    "laplacian[{}] {} of {} at ({}, {}) = {value:?}",
                    cfg.form,
                    field,
                    patch.name(),
                    point.0,
                    point.1
                ),
            )?;
            Ok(0)
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(CliError::Usage("--grid must be positive".into()));
            }
            let mut rows = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let (u, v) = patch.domain().cell_center(i, j, n);
                    if !patch.admissible(u, v) {
                        continue;
                    }
                    if let Ok(value) = field_value(&patch, cfg.form, &kind, (u, v)) {
                        let mut row = vec![u, v];
                        row.extend(value);
                        rows.push(row);
                    }
                }
            }
            let header = match kind {
                FieldKind::Scalar(_) => "u,v,value".to_string(),
                _ => "u,v,value1,value2,value3".to_string(),
            };
            let csv = write_csv(
                &cfg.output.dir,
                &format!("laplacian-{field}-{}.csv", cfg.form),
                &header,
                &rows,
            )?;
            let body = LaplacianGridBody {
                surface: patch.name().to_string(),
                form: cfg.form.to_string(),
                field: field.to_string(),
                grid: n,
                rows: rows.len(),
                csv: csv.display().to_string(),
            };
            let summary = format!(
                "laplacian[{}] {} of {}: {} rows -> {}",
                cfg.form,
                field,
                patch.name(),
                rows.len(),
                csv.display()
            );
            emit(cfg, "laplacian", body, &summary)?;
            Ok(0)
        }
        _ => Err(CliError::Usage(
            "laplacian needs exactly one of --at u,v or --grid N".into(),
        )),
    }
}

pub fn cmd_identities(cfg: &RunConfig, grid: Option<usize>) -> Result<i32, CliError> {
    let patch = cfg.build_patch()?;
    let count = grid.unwrap_or(cfg.sampling.count);
    let samples = sample(&patch, cfg.sampling.strategy, count, cfg.sampling.seed)?;
    let report = evaluate_identities(&patch, &samples)?;
    let pass = report.pass;
    let worst = report
        .stats
        .iter()
        .max_by(|x, y| x.max_residual.total_cmp(&y.max_residual))
        .map(|s| format!("worst {} = {:.3e}", s.name, s.max_residual))
        .unwrap_or_default();
    emit(
        cfg,
        "identities",
        report,
        &format!(
            "identities {}: {} over {count} samples ({worst})",
            patch.name(),
            if pass { "all hold" } else { "VIOLATED" },
        ),
    )?;
    Ok(if pass { 0 } else { 1 })
}

pub fn cmd_detect(cfg: &RunConfig) -> Result<i32, CliError> {
    let patch = cfg.build_patch()?;
    let samples = sample(
        &patch,
        cfg.sampling.strategy,
        cfg.sampling.count,
        cfg.sampling.seed,
    )?;
    let classification = classify_with_samples(&patch, cfg.form, &samples, cfg.thresholds())?;

    let samples_path = if cfg.wants_csv() {
        Some(
            write_detect_csv(&cfg.output.dir, patch.name(), &classification.detail)?
                .display()
                .to_string(),
        )
    } else {
        None
    };

    let verdict = classification.fit.verdict;
    let mut summary = format!(
        "detect {} form {}: {} (residual_max_rel = {:.3e})",
        patch.name(),
        cfg.form,
        verdict,
        classification.fit.residual_max_rel
    );
    if classification.expectation_mismatch == Some(true) {
        summary.push_str(" [disagrees with the catalog expectation for this family]");
    }
    let body = DetectBody::from_classification(&classification, samples_path);
    emit(cfg, "detect", body, &summary)?;

    Ok(match verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Indeterminate => 2,
    })
}

pub fn cmd_xval(cfg: &RunConfig, pipeline: &str, grid: usize) -> Result<i32, CliError> {
    let s = &cfg.surface;
    let report: XvalReport = match pipeline {
        "ruled" => {
            if s.name != "helicoid" {
                return Err(CliError::Usage(
                    "pipeline 'ruled' expects --surface helicoid (the catalog ruled exemplar)"
                        .into(),
                ));
            }
            let pair = CurvePair::helicoid(s.c.unwrap_or(1.0), s.l.unwrap_or(0.0))?;
            xval_ruled(&pair, grid)?
        }
        "quadric1" => {
            if s.name != "quadric1" {
                return Err(CliError::Usage(
                    "pipeline 'quadric1' expects --surface quadric1".into(),
                ));
            }
            let missing = |p: Option<f64>, n: &str| {
                p.ok_or_else(|| CliError::Usage(format!("quadric1 requires --{n}")))
            };
            xval_quadric1(
                missing(s.a, "a")?,
                missing(s.b, "b")?,
                missing(s.c, "c")?,
                grid,
            )?
        }
        "quadric2" => {
            if s.name != "quadric2" {
                return Err(CliError::Usage(
                    "pipeline 'quadric2' expects --surface quadric2".into(),
                ));
            }
            let missing = |p: Option<f64>, n: &str| {
                p.ok_or_else(|| CliError::Usage(format!("quadric2 requires --{n}")))
            };
            xval_quadric2(missing(s.a, "a")?, missing(s.b, "b")?, grid)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown pipeline '{other}' (ruled, quadric1 or quadric2)"
            )))
        }
    };

    let pass = report.pass;
    let summary = format!(
        "xval {} on {}: {} ({} checks, {} gating)",
        report.pipeline,
        report.surface,
        if pass { "consistent" } else { "MISMATCH" },
        report.checks.len(),
        report.checks.iter().filter(|c| c.gating).count()
    );
    emit(cfg, "xval", report, &summary)?;
    Ok(if pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct CatalogEntry {
    name: &'static str,
    parameters: &'static str,
    domain: &'static str,
    notes: &'static str,
}

#[derive(Serialize)]
struct CatalogBody {
    surfaces: Vec<CatalogEntry>,
}

pub fn cmd_catalog(cfg: &RunConfig) -> Result<i32, CliError> {
    let body = CatalogBody {
        surfaces: vec![
            CatalogEntry {
                name: "sphere",
                parameters: "--r radius (default 1)",
                domain: "geographic chart, poles excluded",
                notes: "satisfies the second-form Gauss-map eigenrelation",
            },
            CatalogEntry {
                name: "helicoid",
                parameters: "--c pitch (default 1), --l radial offset (default 0)",
                domain: "s in [-pi, pi], t in [-1.5, 1.5]",
                notes: "minimal ruled surface; verdict reported empirically",
            },
            CatalogEntry {
                name: "quadric1",
                parameters: "--a, --b, --c with a*b*c != 0 (required)",
                domain: "[-0.7, 0.7]^2 minus zones where omega or phi <= 0",
                notes: "central quadric z^2 = c + a x^2 + b y^2; a = b = -1 is a sphere",
            },
            CatalogEntry {
                name: "quadric2",
                parameters: "--a > 0, --b > 0 (required)",
                domain: "[-1, 1]^2",
                notes: "paraboloid z = (a/2) x^2 + (b/2) y^2",
            },
            CatalogEntry {
                name: "cylinder",
                parameters: "--r radius (default 1)",
                domain: "u in [-pi, pi], v in [-1, 1]",
                notes: "flat (K = 0): first-form operations only",
            },
            CatalogEntry {
                name: "catenoid",
                parameters: "--c waist (default 1)",
                domain: "u in [-pi, pi], v in [-1, 1]",
                notes: "minimal surface of revolution",
            },
            CatalogEntry {
                name: "torus",
                parameters: "--R major (default 2), --r minor (default 0.5)",
                domain: "[-pi, pi]^2 minus a band around the flat circles",
                notes: "K changes sign; sampling avoids |K| below the floor",
            },
            CatalogEntry {
                name: "plane",
                parameters: "none",
                domain: "[-1, 1]^2",
                notes: "flat: first-form operations only",
            },
        ],
    };
    emit(cfg, "catalog", body, "catalog: 8 surfaces")?;
    Ok(0)
}
