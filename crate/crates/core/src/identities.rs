//! Tensor and operator identities evaluated per point and aggregated over a
//! sample set. These relations hold exactly for any regular surface with
//! nonvanishing Gaussian curvature, so their numerical residuals double as an
//! end-to-end self-check of the jet engine and the form machinery.
//!
//! Relations covered, with their pinned tolerances:
//! - the Gauss-map laplacian relation
//!   lap_II n = (1/2K) grad_I K + 2H n                    (relative, 1e-8)
//! - the gradient-exchange relation, for h in {K, H, x1, x2, x3}:
//!   b^{ij} h_{,i} n_{,j} + grad_I h = 0                  (relative, 1e-8)
//! - difference-tensor cancellation T + T~ = 0                      (1e-9)
//! - both covariant-derivative routes to the difference tensors     (1e-9)
//! - compatibility residual of the second form
//!   (cov_I)_k b_ij - (cov_I)_i b_jk = 0                            (1e-9)
//! - equality of the two trace routes to 2H                         (1e-9)
//! - the linear combination III - 2H*II + K*I = 0                   (1e-9)
//! - position-vector relation lap_I x + 2H n = 0                    (1e-9)
//! - contracted-symbol identities C^j_{ij} = det_{,i}/(2 det)       (1e-9)

use serde::{Deserialize, Serialize};

use crate::beltrami::{laplacian_gauss_map_frame, laplacian_position_frame};
use crate::error::Result;
use crate::finitetype::SampleSet;
use crate::forms::{covariant_derivative, evaluate_frame, FrameData, FundamentalForm};
use crate::surfaces::SurfacePatch;

pub const TOL_GAUSS_RELATION: f64 = 1e-8;
pub const TOL_GRADIENT_EXCHANGE: f64 = 1e-8;
pub const TOL_TENSOR: f64 = 1e-9;

/// Normalized residual of lap_II n - (1/2K) grad_I K - 2H n at one frame.
pub fn gauss_relation_residual(frame: &FrameData) -> f64 {
    let lap = laplacian_gauss_map_frame(frame, FundamentalForm::Second);
    let grad_k = frame.gradient_of(FundamentalForm::First, frame.k_grad);
    let rhs = grad_k / (2.0 * frame.gauss_curvature) + frame.n * (2.0 * frame.mean_curvature);
    (lap - rhs).norm() / (1.0 + lap.norm())
}

/// Normalized residual of b^{ij} h_{,i} n_{,j} + grad_I h for a scalar with
/// known parameter-partials dh.
pub fn gradient_exchange_residual(frame: &FrameData, dh: [f64; 2]) -> f64 {
    let nd = [frame.n_u, frame.n_v];
    let mut mixed = nalgebra::Vector3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            mixed += nd[j] * (frame.b_inv[(i, j)] * dh[i]);
        }
    }
    let grad = frame.gradient_of(FundamentalForm::First, dh);
    (mixed + grad).norm() / (1.0 + grad.norm())
}

/// All per-point identity residuals.
#[derive(Debug, Clone)]
pub struct PointResiduals {
    pub gauss_relation: f64,
    /// Gradient exchange for h in {K, H, x1, x2, x3}, in that order.
    pub gradient_exchange: [f64; 5],
    pub difference_sum: f64,
    pub covariant_t: f64,
    pub covariant_t_tilde: f64,
    pub compatibility: f64,
    pub trace_equality: f64,
    pub form_combination: f64,
    pub position_relation: f64,
    pub contracted_symbols: f64,
}

pub fn point_residuals(patch: &SurfacePatch, u: f64, v: f64) -> Result<PointResiduals> {
    let frame = evaluate_frame(patch, u, v)?;
    Ok(point_residuals_from_frame(&frame))
}

pub fn point_residuals_from_frame(frame: &FrameData) -> PointResiduals {
    let gauss_relation = gauss_relation_residual(frame);

    let gradient_exchange = [
        gradient_exchange_residual(frame, frame.k_grad),
        gradient_exchange_residual(frame, frame.h_grad),
        gradient_exchange_residual(frame, [frame.x_u[0], frame.x_v[0]]),
        gradient_exchange_residual(frame, [frame.x_u[1], frame.x_v[1]]),
        gradient_exchange_residual(frame, [frame.x_u[2], frame.x_v[2]]),
    ];

    let difference_sum = (frame.t + frame.t_tilde).max_abs();

    // T^k_ij = -1/2 b^{kr} (cov_I)_r b_ij and the third-form analogue
    let mut covariant_t = 0.0_f64;
    let mut covariant_t_tilde = 0.0_f64;
    let cov_first = [
        covariant_derivative(&frame.b, &frame.db, &frame.gamma, 0),
        covariant_derivative(&frame.b, &frame.db, &frame.gamma, 1),
    ];
    let cov_third = [
        covariant_derivative(&frame.b, &frame.db, &frame.lambda_sym, 0),
        covariant_derivative(&frame.b, &frame.db, &frame.lambda_sym, 1),
    ];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut t_expect = 0.0;
                let mut tt_expect = 0.0;
                for r in 0..2 {
                    t_expect += -0.5 * frame.b_inv[(k, r)] * cov_first[r][(i, j)];
                    tt_expect += -0.5 * frame.b_inv[(k, r)] * cov_third[r][(i, j)];
                }
                covariant_t = covariant_t.max((frame.t.at(k, i, j) - t_expect).abs());
                covariant_t_tilde =
                    covariant_t_tilde.max((frame.t_tilde.at(k, i, j) - tt_expect).abs());
            }
        }
    }

    // (cov_I)_k b_ij is totally symmetric in (k, i, j)
    let mut compatibility = 0.0_f64;
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let r = cov_first[k][(i, j)] - cov_first[i][(j, k)];
                compatibility = compatibility.max(r.abs());
            }
        }
    }

    let trace_b = (frame.b * frame.g_inv).trace();
    let trace_e = (frame.e * frame.b_inv).trace();
    let trace_equality = (trace_b - trace_e).abs();

    let comb =
        frame.e - frame.b * (2.0 * frame.mean_curvature) + frame.g * frame.gauss_curvature;
    let form_combination = comb.abs().max();

    let lap_x = laplacian_position_frame(frame, FundamentalForm::First);
    let position_relation = (lap_x + frame.n * (2.0 * frame.mean_curvature)).norm();

    let mut contracted_symbols = 0.0_f64;
    for (conn, t, dt) in [
        (&frame.gamma, &frame.g, &frame.dg),
        (&frame.pi, &frame.b, &frame.db),
    ] {
        let det = t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(0, 1)];
        for i in 0..2 {
            let trace: f64 = (0..2).map(|j| conn.at(j, i, j)).sum();
            let ddet = dt[i][(0, 0)] * t[(1, 1)] + t[(0, 0)] * dt[i][(1, 1)]
                - 2.0 * t[(0, 1)] * dt[i][(0, 1)];
            contracted_symbols = contracted_symbols.max((trace - ddet / (2.0 * det)).abs());
        }
    }

    PointResiduals {
        gauss_relation,
        gradient_exchange,
        difference_sum,
        covariant_t,
        covariant_t_tilde,
        compatibility,
        trace_equality,
        form_combination,
        position_relation,
        contracted_symbols,
    }
}

/// Aggregated residual statistics for one identity over a sample set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityStat {
    pub name: String,
    pub max_residual: f64,
    pub rms_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub surface: String,
    pub sample_count: usize,
    pub seed: u64,
    pub stats: Vec<IdentityStat>,
    pub pass: bool,
}

struct Accum {
    name: &'static str,
    tolerance: f64,
    max: f64,
    sum_sq: f64,
}

impl Accum {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Accum {
            name,
            tolerance,
            max: 0.0,
            sum_sq: 0.0,
        }
    }

    fn push(&mut self, r: f64) {
        self.max = self.max.max(r);
        self.sum_sq += r * r;
    }

    fn finish(self, count: usize) -> IdentityStat {
        IdentityStat {
            name: self.name.to_string(),
            max_residual: self.max,
            rms_residual: (self.sum_sq / count.max(1) as f64).sqrt(),
            tolerance: self.tolerance,
            pass: self.max <= self.tolerance,
        }
    }
}

/// Evaluates the whole identity battery over a sample set.
pub fn evaluate_identities(patch: &SurfacePatch, samples: &SampleSet) -> Result<IdentityReport> {
    let mut accums = vec![
        Accum::new("gauss-map-laplacian-relation", TOL_GAUSS_RELATION),
        Accum::new("gradient-exchange[K]", TOL_GRADIENT_EXCHANGE),
        Accum::new("gradient-exchange[H]", TOL_GRADIENT_EXCHANGE),
        Accum::new("gradient-exchange[x1]", TOL_GRADIENT_EXCHANGE),
        Accum::new("gradient-exchange[x2]", TOL_GRADIENT_EXCHANGE),
        Accum::new("gradient-exchange[x3]", TOL_GRADIENT_EXCHANGE),
        Accum::new("difference-tensor-sum", TOL_TENSOR),
        Accum::new("difference-tensor-covariant-first", TOL_TENSOR),
        Accum::new("difference-tensor-covariant-third", TOL_TENSOR),
        Accum::new("second-form-compatibility", TOL_TENSOR),
        Accum::new("mean-curvature-trace-equality", TOL_TENSOR),
        Accum::new("form-linear-combination", TOL_TENSOR),
        Accum::new("position-laplacian-relation", TOL_TENSOR),
        Accum::new("contracted-symbol-traces", TOL_TENSOR),
    ];

    for &(u, v) in &samples.points {
        let r = point_residuals(patch, u, v)?;
        accums[0].push(r.gauss_relation);
        for (k, g) in r.gradient_exchange.iter().enumerate() {
            accums[1 + k].push(*g);
        }
        accums[6].push(r.difference_sum);
        accums[7].push(r.covariant_t);
        accums[8].push(r.covariant_t_tilde);
        accums[9].push(r.compatibility);
        accums[10].push(r.trace_equality);
        accums[11].push(r.form_combination);
        accums[12].push(r.position_relation);
        accums[13].push(r.contracted_symbols);
    }

    let count = samples.points.len();
    let stats: Vec<IdentityStat> = accums.into_iter().map(|a| a.finish(count)).collect();
    let pass = stats.iter().all(|s| s.pass);
    Ok(IdentityReport {
        surface: patch.name().to_string(),
        sample_count: count,
        seed: samples.seed,
        stats,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finitetype::{sample, SampleStrategy};
    use crate::surfaces::{make_surface, SurfaceSpec};

    fn check_surface(spec: SurfaceSpec) {
        let patch = make_surface(spec).unwrap();
        let samples = sample(&patch, SampleStrategy::JitteredGrid, 25, 0).unwrap();
        let report = evaluate_identities(&patch, &samples).unwrap();
        for stat in &report.stats {
            assert!(
                stat.pass,
                "{} violated {} (max {})",
                patch.name(),
                stat.name,
                stat.max_residual
            );
        }
    }

    #[test]
    fn identities_hold_on_sphere() {
        check_surface(SurfaceSpec::Sphere { r: 1.0 });
    }

    #[test]
    fn identities_hold_on_helicoid() {
        check_surface(SurfaceSpec::Helicoid { c: 1.0, l: 0.0 });
    }

    #[test]
    fn identities_hold_on_quadrics() {
        check_surface(SurfaceSpec::Quadric1 {
            a: 2.0,
            b: 3.0,
            c: 1.0,
        });
        check_surface(SurfaceSpec::Quadric2 { a: 1.0, b: 1.0 });
    }

    #[test]
    fn identities_hold_on_torus() {
        check_surface(SurfaceSpec::Torus { rr: 2.0, r: 0.5 });
    }

    #[test]
    fn sphere_difference_tensor_vanishes() {
        let patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let frame = evaluate_frame(&patch, 0.4, -0.2).unwrap();
        assert!(frame.t.max_abs() < 1e-11);
        assert!(frame.t_tilde.max_abs() < 1e-11);
    }

    #[test]
    fn gauss_relation_residual_small_on_catalog() {
        for spec in [
            SurfaceSpec::Sphere { r: 2.0 },
            SurfaceSpec::Helicoid { c: 2.0, l: 1.0 },
            SurfaceSpec::Catenoid { c: 1.0 },
        ] {
            let patch = make_surface(spec).unwrap();
            let samples = sample(&patch, SampleStrategy::JitteredGrid, 16, 1).unwrap();
            for &(u, v) in &samples.points {
                let frame = evaluate_frame(&patch, u, v).unwrap();
                let r = gauss_relation_residual(&frame);
                assert!(r < 1e-8, "{} at ({u}, {v}): {r}", patch.name());
            }
        }
    }
}
