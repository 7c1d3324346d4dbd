//! Finite-difference verification of the Beltrami operators, built on the
//! divergence form Δ f = −(1/w)·∂_j(w a^{ij} f_{,i}) with w = sqrt(|det a|).
//!
//! This is the independent oracle for the Christoffel-form runtime
//! implementation: the flux is assembled from pointwise form tensors and
//! differentiated by central differences. Compiled only for test builds
//! (feature `fdcheck`), never part of the runtime.

use nalgebra::Matrix2;

use crate::beltrami::ScalarField;
use crate::error::{Error, Result};
use crate::forms::{FundamentalForm, JetFrame};
use crate::surfaces::SurfacePatch;

fn tensor_at(patch: &SurfacePatch, form: FundamentalForm, u: f64, v: f64) -> Result<Matrix2<f64>> {
    let jf = JetFrame::build(patch, u, v)?;
    Ok(jf.tensor_values(form))
}

fn flux_weight(t: &Matrix2<f64>) -> Result<(Matrix2<f64>, f64)> {
    let det = t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(1, 0)];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Internal(format!("singular form in fd oracle, det = {det}")));
    }
    let inv = Matrix2::new(t[(1, 1)], -t[(0, 1)], -t[(1, 0)], t[(0, 0)]) / det;
    Ok((inv, det.abs().sqrt()))
}

/// w(q) · Σ_i a^{ij}(q) f_{,i}(q) for j = 0, 1.
fn flux(
    patch: &SurfacePatch,
    form: FundamentalForm,
    f: &ScalarField,
    u: f64,
    v: f64,
) -> Result<[f64; 2]> {
    let (inv, w) = flux_weight(&tensor_at(patch, form, u, v)?)?;
    let jet = f.eval_jet(u, v, 2)?;
    let df = [jet.partial(1, 0)?, jet.partial(0, 1)?];
    let mut out = [0.0; 2];
    for (j, o) in out.iter_mut().enumerate() {
        for (i, dfi) in df.iter().enumerate() {
            *o += w * inv[(i, j)] * dfi;
        }
    }
    Ok(out)
}

/// Central-difference evaluation of the divergence form at (u, v) with step h.
pub fn divergence_laplacian_fd(
    patch: &SurfacePatch,
    form: FundamentalForm,
    f: &ScalarField,
    at: (f64, f64),
    h: f64,
) -> Result<f64> {
    let (u, v) = at;
    let (_, w0) = flux_weight(&tensor_at(patch, form, u, v)?)?;
    let fu_plus = flux(patch, form, f, u + h, v)?[0];
    let fu_minus = flux(patch, form, f, u - h, v)?[0];
    let fv_plus = flux(patch, form, f, u, v + h)?[1];
    let fv_minus = flux(patch, form, f, u, v - h)?[1];
    let div = (fu_plus - fu_minus + fv_plus - fv_minus) / (2.0 * h);
    Ok(-div / w0)
}
