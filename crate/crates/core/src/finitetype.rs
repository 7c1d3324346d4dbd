//! Detection of matrix eigenrelations for the Gauss map and position vector:
//! least-squares fits of Δn = Λn and Δx = Ax + B over a deterministic sample
//! set, with residual diagnostics and a three-way verdict.
//!
//! Fits are solved row-by-row (three small least-squares problems sharing one
//! design matrix) through an SVD; the accumulation and residual reduction run
//! in sample order, so results are bit-reproducible for a fixed seed.

use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beltrami::{laplacian_gauss_map, laplacian_position};
use crate::error::{Error, Result};
use crate::forms::{evaluate_frame, FundamentalForm, JetFrame};
use crate::identities::gauss_relation_residual;
use crate::surfaces::{GaussRelationExpectation, SurfacePatch};

/// Residual band separating PASS from FAIL.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitThresholds {
    pub tau_pass: f64,
    pub tau_fail: f64,
}

impl Default for FitThresholds {
    fn default() -> Self {
        FitThresholds {
            tau_pass: 1e-6,
            tau_fail: 1e-3,
        }
    }
}

impl FitThresholds {
    pub fn verdict(&self, residual_max_rel: f64) -> Verdict {
        if residual_max_rel <= self.tau_pass {
            Verdict::Pass
        } else if residual_max_rel >= self.tau_fail {
            Verdict::Fail
        } else {
            Verdict::Indeterminate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "INDETERMINATE")]
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Indeterminate => "INDETERMINATE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleStrategy {
    #[serde(rename = "grid")]
    Grid,
    #[serde(rename = "jittered-grid")]
    JitteredGrid,
}

impl std::str::FromStr for SampleStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(SampleStrategy::Grid),
            "jittered-grid" | "jittered" => Ok(SampleStrategy::JitteredGrid),
            other => Err(Error::Config(format!("unknown sample strategy '{other}'"))),
        }
    }
}

/// Admissible, pairwise-distinct parameter points, deterministic for a fixed
/// seed.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Vec<(f64, f64)>,
    pub strategy: SampleStrategy,
    pub seed: u64,
    pub count: usize,
}

/// A sample point must lie inside the domain, outside excluded zones, be a
/// regular point, and (away from flat catalog members) carry |K| above the
/// floor.
fn point_admissible(patch: &SurfacePatch, u: f64, v: f64, require_curved: bool) -> bool {
    if !patch.admissible(u, v) {
        return false;
    }
    match JetFrame::build(patch, u, v) {
        Ok(jf) => !require_curved || jf.gauss_curvature().abs() >= patch.k_min(),
        Err(_) => false,
    }
}

/// Draws `count` admissible sample points. Flat catalog members (K ≡ 0 within
/// the floor, e.g. cylinders) waive the curvature requirement so first-form
/// pipelines stay usable on them.
pub fn sample(
    patch: &SurfacePatch,
    strategy: SampleStrategy,
    count: usize,
    seed: u64,
) -> Result<SampleSet> {
    if count < 12 {
        return Err(Error::Config(format!(
            "sample count {count} below the minimum of 12"
        )));
    }
    let require_curved = !patch.is_flat();
    let domain = patch.domain();
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(count);

    match strategy {
        SampleStrategy::Grid => {
            let mut m = (count as f64).sqrt().ceil() as usize;
            for _ in 0..8 {
                points.clear();
                'grid: for i in 0..m {
                    for j in 0..m {
                        let (u, v) = domain.cell_center(i, j, m);
                        if point_admissible(patch, u, v, require_curved) {
                            points.push((u, v));
                            if points.len() == count {
                                break 'grid;
                            }
                        }
                    }
                }
                if points.len() == count {
                    break;
                }
                m += 1;
            }
        }
        SampleStrategy::JitteredGrid => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = (count as f64).sqrt().ceil() as usize;
            let (du, dv) = domain.cell_size(m);
            for _round in 0..32 {
                for i in 0..m {
                    for j in 0..m {
                        if points.len() == count {
                            break;
                        }
                        let (cu, cv) = domain.cell_center(i, j, m);
                        let u = cu + (rng.random::<f64>() - 0.5) * du * 0.95;
                        let v = cv + (rng.random::<f64>() - 0.5) * dv * 0.95;
                        if point_admissible(patch, u, v, require_curved)
                            && !points.iter().any(|&(pu, pv)| pu == u && pv == v)
                        {
                            points.push((u, v));
                        }
                    }
                }
                if points.len() == count {
                    break;
                }
            }
        }
    }

    if points.len() < count {
        return Err(Error::Sampling(format!(
            "found only {} of {count} admissible points on '{}'",
            points.len(),
            patch.name()
        )));
    }
    Ok(SampleSet {
        points,
        strategy,
        seed,
        count,
    })
}

/// Result of a least-squares matrix fit with residual diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFit {
    /// Fitted 3×3 matrix (Λ for the Gauss-map fit, A for the affine fit).
    pub matrix: [[f64; 3]; 3],
    /// Affine offset B (zero for the Gauss-map fit).
    pub offset: [f64; 3],
    /// max_p ‖r(p)‖ / max(1, max_p ‖target(p)‖).
    pub residual_max_rel: f64,
    /// RMS of ‖r(p)‖ with the same normalizer.
    pub residual_rms: f64,
    /// σ_max/σ_min of the design matrix.
    pub condition_number: f64,
    pub verdict: Verdict,
}

const CONDITION_LIMIT: f64 = 1e8;

/// Row-wise least squares: for each ambient axis i, minimize
/// Σ_p (target_i(p) − row·design(p))² over the row. All three rows share the
/// design matrix, so one SVD serves the whole fit.
fn fit_rows(
    design: &[Vec<f64>],
    targets: &[Vector3<f64>],
    cols: usize,
    thresholds: FitThresholds,
) -> Result<MatrixFit> {
    let rows = design.len();
    let d = DMatrix::from_fn(rows, cols, |r, c| design[r][c]);
    let rhs = DMatrix::from_fn(rows, 3, |r, c| targets[r][c]);

    let svd = d.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::IllPosedFit { condition });
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Internal(format!("svd solve failed: {e}")))?;

    let mut matrix = [[0.0; 3]; 3];
    let mut offset = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            matrix[i][j] = sol[(j, i)];
        }
        if cols == 4 {
            offset[i] = sol[(3, i)];
        }
    }

    // fixed sequential reduction order: residuals are bit-reproducible
    let mut max_target = 0.0_f64;
    let mut max_resid = 0.0_f64;
    let mut sum_sq = 0.0_f64;
    for (row, target) in design.iter().zip(targets) {
        let mut r = *target;
        for i in 0..3 {
            let mut fitted = 0.0;
            for (j, dj) in row.iter().enumerate() {
                fitted += sol[(j, i)] * dj;
            }
            r[i] -= fitted;
        }
        max_target = max_target.max(target.norm());
        let rn = r.norm();
        max_resid = max_resid.max(rn);
        sum_sq += rn * rn;
    }
    let denom = max_target.max(1.0);
    let residual_max_rel = max_resid / denom;
    let residual_rms = (sum_sq / rows as f64).sqrt() / denom;

    Ok(MatrixFit {
        matrix,
        offset,
        residual_max_rel,
        residual_rms,
        condition_number: condition,
        verdict: thresholds.verdict(residual_max_rel),
    })
}

/// Per-sample data retained for reports and CSV dumps.
#[derive(Debug, Clone)]
pub struct FitSample {
    pub point: (f64, f64),
    pub gauss_map: Vector3<f64>,
    pub target: Vector3<f64>,
    pub residual: f64,
}

/// Fits Δn = Λn over the sample set for the selected form.
pub fn fit_gauss_matrix(
    patch: &SurfacePatch,
    form: FundamentalForm,
    samples: &SampleSet,
    thresholds: FitThresholds,
) -> Result<MatrixFit> {
    fit_gauss_matrix_detailed(patch, form, samples, thresholds).map(|(fit, _)| fit)
}

pub fn fit_gauss_matrix_detailed(
    patch: &SurfacePatch,
    form: FundamentalForm,
    samples: &SampleSet,
    thresholds: FitThresholds,
) -> Result<(MatrixFit, Vec<FitSample>)> {
    let mut design = Vec::with_capacity(samples.points.len());
    let mut targets = Vec::with_capacity(samples.points.len());
    let mut gmaps = Vec::with_capacity(samples.points.len());
    for &(u, v) in &samples.points {
        let gm = crate::forms::gauss_map(patch, u, v)?;
        let lap = laplacian_gauss_map(patch, form, (u, v))?;
        design.push(vec![gm.n[0], gm.n[1], gm.n[2]]);
        targets.push(lap);
        gmaps.push(gm.n);
    }
    let fit = fit_rows(&design, &targets, 3, thresholds)?;
    let detail = assemble_detail(&samples.points, &gmaps, &targets, &fit, false);
    Ok((fit, detail))
}

/// Fits Δx = Ax + B over the sample set for the selected form.
pub fn fit_position_affine(
    patch: &SurfacePatch,
    form: FundamentalForm,
    samples: &SampleSet,
    thresholds: FitThresholds,
) -> Result<MatrixFit> {
    let mut design = Vec::with_capacity(samples.points.len());
    let mut targets = Vec::with_capacity(samples.points.len());
    for &(u, v) in &samples.points {
        let xj = patch.evaluate(u, v, 3)?;
        let lap = laplacian_position(patch, form, (u, v))?;
        design.push(vec![xj[0].value(), xj[1].value(), xj[2].value(), 1.0]);
        targets.push(lap);
    }
    fit_rows(&design, &targets, 4, thresholds)
}

fn assemble_detail(
    points: &[(f64, f64)],
    bases: &[Vector3<f64>],
    targets: &[Vector3<f64>],
    fit: &MatrixFit,
    affine: bool,
) -> Vec<FitSample> {
    points
        .iter()
        .zip(bases.iter().zip(targets))
        .map(|(&point, (&basis, &target))| {
            let mut fitted = Vector3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    fitted[i] += fit.matrix[i][j] * basis[j];
                }
                if affine {
                    fitted[i] += fit.offset[i];
                }
            }
            FitSample {
                point,
                gauss_map: basis,
                target,
                residual: (target - fitted).norm(),
            }
        })
        .collect()
}

/// Residual statistics of the Gauss-map laplacian relation, attached to
/// second-form classifications as a sanity channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityChannel {
    pub max_rel: f64,
    pub rms: f64,
}

/// Full classification output: the fit, the sanity channel, and whether the
/// verdict disagrees with the catalog expectation for the surface family.
#[derive(Debug, Clone)]
pub struct Classification {
    pub surface: String,
    pub form: FundamentalForm,
    pub fit: MatrixFit,
    pub samples: SampleSet,
    pub detail: Vec<FitSample>,
    pub identity_channel: Option<IdentityChannel>,
    pub expectation_mismatch: Option<bool>,
}

/// Runs the Gauss-map fit with default sampling (jittered grid, 64 points,
/// seed 0) and assembles the report data.
pub fn classify(
    patch: &SurfacePatch,
    form: FundamentalForm,
    thresholds: FitThresholds,
) -> Result<Classification> {
    let samples = sample(patch, SampleStrategy::JitteredGrid, 64, 0)?;
    classify_with_samples(patch, form, &samples, thresholds)
}

pub fn classify_with_samples(
    patch: &SurfacePatch,
    form: FundamentalForm,
    samples: &SampleSet,
    thresholds: FitThresholds,
) -> Result<Classification> {
    let (fit, detail) = fit_gauss_matrix_detailed(patch, form, samples, thresholds)?;

    let identity_channel = if matches!(form, FundamentalForm::Second) {
        let mut max_rel = 0.0_f64;
        let mut sum_sq = 0.0_f64;
        for &(u, v) in &samples.points {
            let frame = evaluate_frame(patch, u, v)?;
            let r = gauss_relation_residual(&frame);
            max_rel = max_rel.max(r);
            sum_sq += r * r;
        }
        Some(IdentityChannel {
            max_rel,
            rms: (sum_sq / samples.points.len() as f64).sqrt(),
        })
    } else {
        None
    };

    let expectation_mismatch = patch.gauss_relation_expectation().map(|exp| {
        let expected_pass = exp == GaussRelationExpectation::Satisfies;
        match fit.verdict {
            Verdict::Pass => !expected_pass,
            Verdict::Fail => expected_pass,
            Verdict::Indeterminate => false,
        }
    });

    Ok(Classification {
        surface: patch.name().to_string(),
        form,
        fit,
        samples: samples.clone(),
        detail,
        identity_channel,
        expectation_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{make_surface, SurfaceSpec};
    use nalgebra::Matrix3;

    fn as_matrix(fit: &MatrixFit) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| fit.matrix[i][j])
    }

    #[test]
    fn grid_sampling_is_a_lattice() {
        let patch = make_surface(SurfaceSpec::Quadric2 { a: 1.0, b: 1.0 }).unwrap();
        let s = sample(&patch, SampleStrategy::Grid, 16, 0).unwrap();
        assert_eq!(s.points.len(), 16);
        // 4x4 cell centers of [-1,1]^2
        let expect = [-0.75, -0.25, 0.25, 0.75];
        for (idx, &(u, v)) in s.points.iter().enumerate() {
            assert!((u - expect[idx / 4]).abs() < 1e-15);
            assert!((v - expect[idx % 4]).abs() < 1e-15);
        }
    }

    #[test]
    fn jittered_sampling_is_deterministic() {
        let patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let s1 = sample(&patch, SampleStrategy::JitteredGrid, 25, 42).unwrap();
        let s2 = sample(&patch, SampleStrategy::JitteredGrid, 25, 42).unwrap();
        assert_eq!(s1.points, s2.points);
        let s3 = sample(&patch, SampleStrategy::JitteredGrid, 25, 43).unwrap();
        assert_ne!(s1.points, s3.points);
    }

    #[test]
    fn sphere_samples_avoid_polar_zone() {
        let patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let s = sample(&patch, SampleStrategy::JitteredGrid, 25, 0).unwrap();
        for &(_, v) in &s.points {
            assert!(v.cos().abs() >= 1e-6);
        }
    }

    #[test]
    fn count_below_minimum_rejected() {
        let patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        assert!(matches!(
            sample(&patch, SampleStrategy::Grid, 11, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unit_sphere_gauss_fit() {
        let patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let samples = sample(&patch, SampleStrategy::JitteredGrid, 32, 0).unwrap();
        let fit = fit_gauss_matrix(
            &patch,
            FundamentalForm::Second,
            &samples,
            FitThresholds::default(),
        )
        .unwrap();
        assert_eq!(fit.verdict, Verdict::Pass);
        assert!(fit.residual_max_rel <= 1e-10);
        let lambda = as_matrix(&fit);
        assert!((lambda - Matrix3::identity() * -2.0).abs().max() < 1e-8);
    }

    #[test]
    fn sphere_radius_scaling_of_lambda() {
        for r in [0.5, 2.0, 3.0] {
            let patch = make_surface(SurfaceSpec::Sphere { r }).unwrap();
            let samples = sample(&patch, SampleStrategy::JitteredGrid, 32, 1).unwrap();
            let fit = fit_gauss_matrix(
                &patch,
                FundamentalForm::Second,
                &samples,
                FitThresholds::default(),
            )
            .unwrap();
            let lambda = as_matrix(&fit);
            assert!(
                (lambda - Matrix3::identity() * (-2.0 / r)).abs().max() < 1e-8,
                "r = {r}"
            );
        }
    }

    #[test]
    fn paraboloid_fails_gauss_relation() {
        let patch = make_surface(SurfaceSpec::Quadric2 { a: 1.0, b: 1.0 }).unwrap();
        let samples = sample(&patch, SampleStrategy::JitteredGrid, 64, 0).unwrap();
        let fit = fit_gauss_matrix(
            &patch,
            FundamentalForm::Second,
            &samples,
            FitThresholds::default(),
        )
        .unwrap();
        assert_eq!(fit.verdict, Verdict::Fail);
        assert!(fit.residual_max_rel >= 1e-2);
    }

    #[test]
    fn takahashi_style_position_fits() {
        // catenoid: minimal, A = 0, B = 0
        let catenoid = make_surface(SurfaceSpec::Catenoid { c: 1.0 }).unwrap();
        let samples = sample(&catenoid, SampleStrategy::JitteredGrid, 32, 0).unwrap();
        let fit = fit_position_affine(
            &catenoid,
            FundamentalForm::First,
            &samples,
            FitThresholds::default(),
        )
        .unwrap();
        assert_eq!(fit.verdict, Verdict::Pass);
        let a = as_matrix(&fit);
        assert!(a.abs().max() < 1e-8);
        assert!(Vector3::from_row_slice(&fit.offset).norm() < 1e-8);

        // cylinder: A = diag(1, 1, 0), B = 0 (flat: first-form only)
        let cylinder = make_surface(SurfaceSpec::Cylinder { r: 1.0 }).unwrap();
        let samples = sample(&cylinder, SampleStrategy::JitteredGrid, 32, 0).unwrap();
        let fit = fit_position_affine(
            &cylinder,
            FundamentalForm::First,
            &samples,
            FitThresholds::default(),
        )
        .unwrap();
        assert_eq!(fit.verdict, Verdict::Pass);
        let a = as_matrix(&fit);
        assert!(
            (a - Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0)))
                .abs()
                .max()
                < 1e-8
        );

        // sphere radius r: A = (2/r^2) I, B = 0 for the origin-centered chart
        for r in [1.0, 2.0] {
            let sphere = make_surface(SurfaceSpec::Sphere { r }).unwrap();
            let samples = sample(&sphere, SampleStrategy::JitteredGrid, 32, 0).unwrap();
            let fit = fit_position_affine(
                &sphere,
                FundamentalForm::First,
                &samples,
                FitThresholds::default(),
            )
            .unwrap();
            assert_eq!(fit.verdict, Verdict::Pass);
            let a = as_matrix(&fit);
            assert!(
                (a - Matrix3::identity() * (2.0 / (r * r))).abs().max() < 1e-8,
                "r = {r}"
            );
            assert!(Vector3::from_row_slice(&fit.offset).norm() < 1e-8);
        }
    }

    #[test]
    fn verdict_invariant_under_rotation() {
        // rotate ambient space: residual unchanged, Lambda -> R Lambda R^T
        let angle: f64 = 0.83;
        let (s, c) = angle.sin_cos();
        let rot = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        let base = make_surface(SurfaceSpec::Quadric1 {
            a: 2.0,
            b: 3.0,
            c: 1.0,
        })
        .unwrap();
        let rotated = base.transformed(rot, "rotated").unwrap();
        let samples = sample(&base, SampleStrategy::JitteredGrid, 32, 3).unwrap();
        let f0 = fit_gauss_matrix(
            &base,
            FundamentalForm::Second,
            &samples,
            FitThresholds::default(),
        )
        .unwrap();
        let f1 = fit_gauss_matrix(
            &rotated,
            FundamentalForm::Second,
            &samples,
            FitThresholds::default(),
        )
        .unwrap();
        assert_eq!(f0.verdict, f1.verdict);
        assert!((f0.residual_max_rel - f1.residual_max_rel).abs() < 1e-9);
        let expected = rot * as_matrix(&f0) * rot.transpose();
        assert!((as_matrix(&f1) - expected).abs().max() < 1e-7);
    }

    #[test]
    fn verdict_invariant_under_operator_sign() {
        // fitting -targets gives -Lambda with the same residuals
        let design = vec![
            vec![1.0, 0.1, 0.2],
            vec![0.3, 1.0, -0.4],
            vec![-0.2, 0.5, 0.9],
            vec![0.9, -0.3, 0.1],
            vec![0.4, 0.8, -0.6],
            vec![-0.7, 0.2, 0.5],
            vec![0.1, -0.9, 0.3],
            vec![0.6, 0.4, 0.7],
            vec![-0.5, 0.6, -0.1],
            vec![0.2, 0.3, 0.8],
            vec![0.8, -0.1, -0.3],
            vec![-0.4, 0.7, 0.6],
        ];
        let targets: Vec<Vector3<f64>> = design
            .iter()
            .map(|r| Vector3::new(r[0] * 2.0 + 0.01, r[1] - r[2], r[0] + r[1] * 0.5))
            .collect();
        let neg: Vec<Vector3<f64>> = targets.iter().map(|t| -t).collect();
        let f0 = fit_rows(&design, &targets, 3, FitThresholds::default()).unwrap();
        let f1 = fit_rows(&design, &neg, 3, FitThresholds::default()).unwrap();
        assert_eq!(f0.verdict, f1.verdict);
        assert!((f0.residual_max_rel - f1.residual_max_rel).abs() < 1e-15);
        assert!((as_matrix(&f0) + as_matrix(&f1)).abs().max() < 1e-12);
    }

    #[test]
    fn verdicts_stable_across_seeds() {
        let pass_patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let fail_patch = make_surface(SurfaceSpec::Quadric2 { a: 2.0, b: 3.0 }).unwrap();
        for seed in 0..5 {
            let s = sample(&pass_patch, SampleStrategy::JitteredGrid, 32, seed).unwrap();
            let fit = fit_gauss_matrix(
                &pass_patch,
                FundamentalForm::Second,
                &s,
                FitThresholds::default(),
            )
            .unwrap();
            assert_eq!(fit.verdict, Verdict::Pass, "seed {seed}");

            let s = sample(&fail_patch, SampleStrategy::JitteredGrid, 32, seed).unwrap();
            let fit = fit_gauss_matrix(
                &fail_patch,
                FundamentalForm::Second,
                &s,
                FitThresholds::default(),
            )
            .unwrap();
            assert_eq!(fit.verdict, Verdict::Fail, "seed {seed}");
        }
    }

    #[test]
    fn classification_attaches_channels() {
        let patch = make_surface(SurfaceSpec::Quadric1 {
            a: -1.0,
            b: -1.0,
            c: 1.0,
        })
        .unwrap();
        let report = classify(&patch, FundamentalForm::Second, FitThresholds::default()).unwrap();
        assert_eq!(report.fit.verdict, Verdict::Pass);
        assert_eq!(report.expectation_mismatch, Some(false));
        let channel = report.identity_channel.unwrap();
        assert!(channel.max_rel < 1e-8);
    }

    #[test]
    fn helicoid_classification_reports_mismatch_flag() {
        // empirical verdict; the flag must track (expected Satisfies) != verdict
        let patch = make_surface(SurfaceSpec::Helicoid { c: 1.0, l: 0.0 }).unwrap();
        let report = classify(&patch, FundamentalForm::Second, FitThresholds::default()).unwrap();
        let flag = report.expectation_mismatch.unwrap();
        match report.fit.verdict {
            Verdict::Fail => assert!(flag),
            Verdict::Pass => assert!(!flag),
            Verdict::Indeterminate => assert!(!flag),
        }
    }
}
