//! Pointwise tensor geometry: fundamental forms, curvatures, Gauss map,
//! Christoffel symbols of all three forms, and the difference tensors.
//!
//! Everything is extracted from one jet evaluation of the immersion. With x
//! carried at order p (default 3), first derivatives of x live at order p−1,
//! the Gauss map at p−1, and the second/third form tensors at p−2 — exactly
//! enough for the Christoffel symbols of every form and for first derivatives
//! of K and H.

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{cross3, deriv3, dot3, truncate3, Jet2, Var};
use crate::surfaces::SurfacePatch;

/// Selector for the three fundamental forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FundamentalForm {
    #[serde(rename = "I")]
    First,
    #[serde(rename = "II")]
    Second,
    #[serde(rename = "III")]
    Third,
}

impl FundamentalForm {
    pub fn name(&self) -> &'static str {
        match self {
            FundamentalForm::First => "I",
            FundamentalForm::Second => "II",
            FundamentalForm::Third => "III",
        }
    }
}

impl std::fmt::Display for FundamentalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FundamentalForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" | "first" => Ok(FundamentalForm::First),
            "II" | "ii" | "2" | "second" => Ok(FundamentalForm::Second),
            "III" | "iii" | "3" | "third" => Ok(FundamentalForm::Third),
            other => Err(Error::Config(format!("unknown fundamental form '{other}'"))),
        }
    }
}

/// Coefficients C^k_{ij}, symmetric in (i, j). Used for the Christoffel
/// symbols of each form and for the difference tensors, which share the
/// index symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionCoeffs([[[f64; 2]; 2]; 2]);

impl ConnectionCoeffs {
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut c = [[[0.0; 2]; 2]; 2];
        for (k, ck) in c.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    ck[i][j] = f(k, i, j);
                }
            }
        }
        ConnectionCoeffs(c)
    }

    pub fn zero() -> Self {
        ConnectionCoeffs([[[0.0; 2]; 2]; 2])
    }

    /// C^k_{ij}.
    #[inline]
    pub fn at(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][i][j]
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    m = m.max(self.0[k][i][j].abs());
                }
            }
        }
        m
    }

    pub fn raw(&self) -> [[[f64; 2]; 2]; 2] {
        self.0
    }
}

impl std::ops::Sub for ConnectionCoeffs {
    type Output = ConnectionCoeffs;
    fn sub(self, rhs: ConnectionCoeffs) -> ConnectionCoeffs {
        ConnectionCoeffs::from_fn(|k, i, j| self.at(k, i, j) - rhs.at(k, i, j))
    }
}

impl std::ops::Add for ConnectionCoeffs {
    type Output = ConnectionCoeffs;
    fn add(self, rhs: ConnectionCoeffs) -> ConnectionCoeffs {
        ConnectionCoeffs::from_fn(|k, i, j| self.at(k, i, j) + rhs.at(k, i, j))
    }
}

const REGULARITY_FLOOR: f64 = 1e-12;

/// Jet-level view of all pointwise geometry. Orders: x at p, x_u/x_v/n/g at
/// p−1, b/e/K/H at p−2.
pub(crate) struct JetFrame {
    pub u: f64,
    pub v: f64,
    pub k_min: f64,
    pub x: [Jet2; 3],
    pub xu: [Jet2; 3],
    pub xv: [Jet2; 3],
    pub n: [Jet2; 3],
    pub g: [[Jet2; 2]; 2],
    pub b: [[Jet2; 2]; 2],
    pub e: [[Jet2; 2]; 2],
    pub k: Jet2,
    pub h: Jet2,
}

impl JetFrame {
    pub fn build(patch: &SurfacePatch, u: f64, v: f64) -> Result<JetFrame> {
        Self::build_with_order(patch, u, v, patch.jet_order())
    }

    pub fn build_with_order(
        patch: &SurfacePatch,
        u: f64,
        v: f64,
        order: usize,
    ) -> Result<JetFrame> {
        if !patch.in_domain(u, v) {
            return Err(Error::Inadmissible {
                u,
                v,
                reason: "outside parameter domain".into(),
            });
        }
        if patch.is_excluded(u, v) {
            return Err(Error::Inadmissible {
                u,
                v,
                reason: "inside an excluded zone".into(),
            });
        }
        if order < 3 {
            return Err(Error::Config(format!(
                "frame evaluation needs jet order >= 3, got {order}"
            )));
        }

        let x = patch.evaluate(u, v, order)?;
        let xu = deriv3(&x, Var::U);
        let xv = deriv3(&x, Var::V);

        let cross = cross3(&xu, &xv);
        let norm_sq = dot3(&cross, &cross);
        if norm_sq.value() < REGULARITY_FLOOR * REGULARITY_FLOOR {
            return Err(Error::Regularity {
                u,
                v,
                cross_norm: norm_sq.value().max(0.0).sqrt(),
            });
        }
        let inv_norm = norm_sq.sqrt()?.recip()?;
        let n = [cross[0] * inv_norm, cross[1] * inv_norm, cross[2] * inv_norm];

        let tang = [&xu, &xv];
        let mut g = [[xu[0] * 0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] = dot3(tang[i], tang[j]);
            }
        }

        // second derivatives of x and first derivatives of n live one order lower
        let low = order - 2;
        let n_low = truncate3(&n, low);
        let xdd = [
            [deriv3(&xu, Var::U), deriv3(&xu, Var::V)],
            [deriv3(&xv, Var::U), deriv3(&xv, Var::V)],
        ];
        let nd = [deriv3(&n, Var::U), deriv3(&n, Var::V)];

        let mut b = [[n_low[0] * 0.0; 2]; 2];
        let mut e = [[n_low[0] * 0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                b[i][j] = dot3(&xdd[i][j], &n_low);
                e[i][j] = dot3(&nd[i], &nd[j]);
            }
        }
        // symmetrize exactly (x_uv == x_vu analytically; enforce bitwise)
        b[1][0] = b[0][1];
        e[1][0] = e[0][1];

        let det_g_low = (g[0][0] * g[1][1] - g[0][1] * g[0][1]).truncated(low);
        let det_b = b[0][0] * b[1][1] - b[0][1] * b[0][1];
        let k = det_b.checked_div(&det_g_low)?;

        let ginv_low = invert2_jets(
            &[
                [g[0][0].truncated(low), g[0][1].truncated(low)],
                [g[0][1].truncated(low), g[1][1].truncated(low)],
            ],
            &det_g_low,
        )?;
        let h = (b[0][0] * ginv_low[0][0]
            + b[0][1] * ginv_low[0][1] * 2.0
            + b[1][1] * ginv_low[1][1])
            * 0.5;

        Ok(JetFrame {
            u,
            v,
            k_min: patch.k_min(),
            x,
            xu,
            xv,
            n,
            g,
            b,
            e,
            k,
            h,
        })
    }

    pub fn gauss_curvature(&self) -> f64 {
        self.k.value()
    }

    pub fn tensor_jets(&self, form: FundamentalForm) -> &[[Jet2; 2]; 2] {
        match form {
            FundamentalForm::First => &self.g,
            FundamentalForm::Second => &self.b,
            FundamentalForm::Third => &self.e,
        }
    }

    pub fn tensor_values(&self, form: FundamentalForm) -> Matrix2<f64> {
        let t = self.tensor_jets(form);
        Matrix2::new(
            t[0][0].value(),
            t[0][1].value(),
            t[1][0].value(),
            t[1][1].value(),
        )
    }
}

fn invert2_jets(t: &[[Jet2; 2]; 2], det: &Jet2) -> Result<[[Jet2; 2]; 2]> {
    let inv_det = det.recip()?;
    Ok([
        [t[1][1] * inv_det, -(t[0][1] * inv_det)],
        [-(t[0][1] * inv_det), t[0][0] * inv_det],
    ])
}

/// Christoffel symbols of the second kind for a symmetric 2×2 tensor carried
/// as jets with at least first derivatives:
/// C^k_{ij} = ½ a^{kr} (−a_{ij/r} + a_{ir/j} + a_{jr/i}).
fn christoffel_from_jets(t: &[[Jet2; 2]; 2]) -> Result<ConnectionCoeffs> {
    let det = t[0][0].value() * t[1][1].value() - t[0][1].value() * t[0][1].value();
    if det == 0.0 {
        return Err(Error::Internal("christoffel on exactly singular tensor".into()));
    }
    let inv = [
        [t[1][1].value() / det, -t[0][1].value() / det],
        [-t[0][1].value() / det, t[0][0].value() / det],
    ];
    let d = |i: usize, j: usize, r: usize| -> f64 {
        let jet = &t[i][j];
        match r {
            0 => jet.coeff(1, 0),
            _ => jet.coeff(0, 1),
        }
    };
    let mut out = [[[0.0; 2]; 2]; 2];
    for (k, ok) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for r in 0..2 {
                    acc += inv[k][r] * (-d(i, j, r) + d(i, r, j) + d(j, r, i));
                }
                ok[i][j] = 0.5 * acc;
            }
        }
    }
    Ok(ConnectionCoeffs(out))
}

/// Inverse of the selected form plus its Christoffel symbols; the minimal
/// geometry a Beltrami operator needs. Form I is available at every regular
/// point; forms II and III require |K| above the configured floor.
pub(crate) struct FormGeometry {
    pub a_inv: Matrix2<f64>,
    pub conn: ConnectionCoeffs,
}

pub(crate) fn form_geometry(jf: &JetFrame, form: FundamentalForm) -> Result<FormGeometry> {
    if !matches!(form, FundamentalForm::First) && jf.k.value().abs() < jf.k_min {
        let t = jf.tensor_values(form);
        return Err(Error::SingularForm {
            form: form.name(),
            u: jf.u,
            v: jf.v,
            det: t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(0, 1)],
        });
    }
    let a = jf.tensor_values(form);
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(0, 1)];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularForm {
            form: form.name(),
            u: jf.u,
            v: jf.v,
            det,
        });
    }
    let a_inv = Matrix2::new(a[(1, 1)], -a[(0, 1)], -a[(0, 1)], a[(0, 0)]) / det;
    let conn = christoffel_from_jets(jf.tensor_jets(form))?;
    Ok(FormGeometry { a_inv, conn })
}

/// All pointwise geometry at (u, v): partials of x through order 3, the Gauss
/// map with partials through order 2, the three fundamental tensors with
/// inverses and first derivatives, curvatures with first derivatives,
/// Christoffel symbols of every form, and the difference tensors.
#[derive(Debug, Clone)]
pub struct FrameData {
    pub u: f64,
    pub v: f64,
    pub x: Vector3<f64>,
    pub x_u: Vector3<f64>,
    pub x_v: Vector3<f64>,
    pub x_uu: Vector3<f64>,
    pub x_uv: Vector3<f64>,
    pub x_vv: Vector3<f64>,
    pub x_uuu: Vector3<f64>,
    pub x_uuv: Vector3<f64>,
    pub x_uvv: Vector3<f64>,
    pub x_vvv: Vector3<f64>,
    pub n: Vector3<f64>,
    pub n_u: Vector3<f64>,
    pub n_v: Vector3<f64>,
    pub n_uu: Vector3<f64>,
    pub n_uv: Vector3<f64>,
    pub n_vv: Vector3<f64>,
    pub g: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub e: Matrix2<f64>,
    pub g_inv: Matrix2<f64>,
    pub b_inv: Matrix2<f64>,
    pub e_inv: Matrix2<f64>,
    /// First derivatives of the tensors: dg[k] = ∂ g / ∂u^k, etc.
    pub dg: [Matrix2<f64>; 2],
    pub db: [Matrix2<f64>; 2],
    pub de: [Matrix2<f64>; 2],
    pub gauss_curvature: f64,
    pub mean_curvature: f64,
    /// ∂K/∂u^k and ∂H/∂u^k.
    pub k_grad: [f64; 2],
    pub h_grad: [f64; 2],
    pub gamma: ConnectionCoeffs,
    pub pi: ConnectionCoeffs,
    pub lambda_sym: ConnectionCoeffs,
    pub t: ConnectionCoeffs,
    pub t_tilde: ConnectionCoeffs,
}

fn vec3_value(j: &[Jet2; 3]) -> Vector3<f64> {
    Vector3::new(j[0].value(), j[1].value(), j[2].value())
}

fn vec3_coeff(j: &[Jet2; 3], i: usize, jj: usize, scale: f64) -> Vector3<f64> {
    Vector3::new(
        j[0].coeff(i, jj) * scale,
        j[1].coeff(i, jj) * scale,
        j[2].coeff(i, jj) * scale,
    )
}

fn mat2_value(t: &[[Jet2; 2]; 2]) -> Matrix2<f64> {
    Matrix2::new(
        t[0][0].value(),
        t[0][1].value(),
        t[1][0].value(),
        t[1][1].value(),
    )
}

fn mat2_deriv(t: &[[Jet2; 2]; 2], var: usize) -> Matrix2<f64> {
    let pick = |jet: &Jet2| -> f64 {
        match var {
            0 => jet.coeff(1, 0),
            _ => jet.coeff(0, 1),
        }
    };
    Matrix2::new(pick(&t[0][0]), pick(&t[0][1]), pick(&t[1][0]), pick(&t[1][1]))
}

fn invert2(m: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Internal(format!("2x2 inverse of singular matrix, det = {det}")));
    }
    Ok(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

/// Full frame evaluation. Errors on inadmissible points, singular immersions,
/// and |K| below the configured floor (flat points make II/III degenerate).
pub fn evaluate_frame(patch: &SurfacePatch, u: f64, v: f64) -> Result<FrameData> {
    let jf = JetFrame::build(patch, u, v)?;
    frame_data_from_jets(&jf)
}

pub(crate) fn frame_data_from_jets(jf: &JetFrame) -> Result<FrameData> {
    let (u, v) = (jf.u, jf.v);
    let k_val = jf.k.value();
    if k_val.abs() < jf.k_min {
        return Err(Error::FlatPoint {
            u,
            v,
            k: k_val,
            k_min: jf.k_min,
        });
    }

    let g = mat2_value(&jf.g);
    let b = mat2_value(&jf.b);
    let e = mat2_value(&jf.e);
    let g_inv = invert2(&g)?;
    let b_inv = invert2(&b)?;
    let e_inv = invert2(&e)?;

    let gamma = christoffel_from_jets(&jf.g)?;
    let pi = christoffel_from_jets(&jf.b)?;
    let lambda_sym = christoffel_from_jets(&jf.e)?;
    let t = gamma - pi;
    let t_tilde = lambda_sym - pi;

    let h_val = jf.h.value();
    // engine self-check: the two trace routes to 2H must agree
    let trace_b = (b * g_inv).trace();
    let trace_e = (e * b_inv).trace();
    if (trace_b - trace_e).abs() > 1e-9 * (1.0 + trace_b.abs()) {
        return Err(Error::Internal(format!(
            "mean-curvature traces disagree at ({u}, {v}): {trace_b} vs {trace_e}"
        )));
    }

    let n = vec3_value(&jf.n);
    let x_u = vec3_value(&jf.xu);
    let x_v = vec3_value(&jf.xv);
    if (n.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Internal(format!("gauss map not unit at ({u}, {v})")));
    }
    if n.dot(&x_u).abs() > 1e-10 * (1.0 + x_u.norm()) || n.dot(&x_v).abs() > 1e-10 * (1.0 + x_v.norm())
    {
        return Err(Error::Internal(format!("gauss map not normal at ({u}, {v})")));
    }

    Ok(FrameData {
        u,
        v,
        x: vec3_value(&jf.x),
        x_u,
        x_v,
        x_uu: vec3_coeff(&jf.x, 2, 0, 2.0),
        x_uv: vec3_coeff(&jf.x, 1, 1, 1.0),
        x_vv: vec3_coeff(&jf.x, 0, 2, 2.0),
        x_uuu: vec3_coeff(&jf.x, 3, 0, 6.0),
        x_uuv: vec3_coeff(&jf.x, 2, 1, 2.0),
        x_uvv: vec3_coeff(&jf.x, 1, 2, 2.0),
        x_vvv: vec3_coeff(&jf.x, 0, 3, 6.0),
        n,
        n_u: vec3_coeff(&jf.n, 1, 0, 1.0),
        n_v: vec3_coeff(&jf.n, 0, 1, 1.0),
        n_uu: vec3_coeff(&jf.n, 2, 0, 2.0),
        n_uv: vec3_coeff(&jf.n, 1, 1, 1.0),
        n_vv: vec3_coeff(&jf.n, 0, 2, 2.0),
        g,
        b,
        e,
        g_inv,
        b_inv,
        e_inv,
        dg: [mat2_deriv(&jf.g, 0), mat2_deriv(&jf.g, 1)],
        db: [mat2_deriv(&jf.b, 0), mat2_deriv(&jf.b, 1)],
        de: [mat2_deriv(&jf.e, 0), mat2_deriv(&jf.e, 1)],
        gauss_curvature: k_val,
        mean_curvature: h_val,
        k_grad: [jf.k.coeff(1, 0), jf.k.coeff(0, 1)],
        h_grad: [jf.h.coeff(1, 0), jf.h.coeff(0, 1)],
        gamma,
        pi,
        lambda_sym,
        t,
        t_tilde,
    })
}

impl FrameData {
    pub fn tensor(&self, form: FundamentalForm) -> &Matrix2<f64> {
        match form {
            FundamentalForm::First => &self.g,
            FundamentalForm::Second => &self.b,
            FundamentalForm::Third => &self.e,
        }
    }

    pub fn tensor_inverse(&self, form: FundamentalForm) -> &Matrix2<f64> {
        match form {
            FundamentalForm::First => &self.g_inv,
            FundamentalForm::Second => &self.b_inv,
            FundamentalForm::Third => &self.e_inv,
        }
    }

    pub fn tensor_derivatives(&self, form: FundamentalForm) -> &[Matrix2<f64>; 2] {
        match form {
            FundamentalForm::First => &self.dg,
            FundamentalForm::Second => &self.db,
            FundamentalForm::Third => &self.de,
        }
    }

    pub fn connection(&self, form: FundamentalForm) -> &ConnectionCoeffs {
        match form {
            FundamentalForm::First => &self.gamma,
            FundamentalForm::Second => &self.pi,
            FundamentalForm::Third => &self.lambda_sym,
        }
    }

    /// Gradient of a scalar with known parameter-partials, as an ambient
    /// tangent vector: a^{ij} h_{,i} x_{,j}.
    pub fn gradient_of(&self, form: FundamentalForm, dh: [f64; 2]) -> Vector3<f64> {
        let a_inv = self.tensor_inverse(form);
        let tang = [self.x_u, self.x_v];
        let mut out = Vector3::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out += tang[j] * (a_inv[(i, j)] * dh[i]);
            }
        }
        out
    }
}

/// The Gauss map with partials through order 2.
#[derive(Debug, Clone, Copy)]
pub struct GaussMapData {
    pub n: Vector3<f64>,
    pub n_u: Vector3<f64>,
    pub n_v: Vector3<f64>,
    pub n_uu: Vector3<f64>,
    pub n_uv: Vector3<f64>,
    pub n_vv: Vector3<f64>,
}

/// Unit normal n = (x_u × x_v)/‖x_u × x_v‖ and its partials. This orientation
/// convention is global and never flipped per-surface.
pub fn gauss_map(patch: &SurfacePatch, u: f64, v: f64) -> Result<GaussMapData> {
    let jf = JetFrame::build(patch, u, v)?;
    Ok(GaussMapData {
        n: vec3_value(&jf.n),
        n_u: vec3_coeff(&jf.n, 1, 0, 1.0),
        n_v: vec3_coeff(&jf.n, 0, 1, 1.0),
        n_uu: vec3_coeff(&jf.n, 2, 0, 2.0),
        n_uv: vec3_coeff(&jf.n, 1, 1, 1.0),
        n_vv: vec3_coeff(&jf.n, 0, 2, 2.0),
    })
}

/// (K, H) from a frame. Both trace routes to 2H were already reconciled when
/// the frame was built.
pub fn curvatures(frame: &FrameData) -> (f64, f64) {
    (frame.gauss_curvature, frame.mean_curvature)
}

/// Christoffel symbols of the selected form at a point. Form I only needs a
/// regular immersion; forms II and III additionally need |K| above the floor.
pub fn christoffel(
    patch: &SurfacePatch,
    form: FundamentalForm,
    u: f64,
    v: f64,
) -> Result<ConnectionCoeffs> {
    let jf = JetFrame::build(patch, u, v)?;
    Ok(form_geometry(&jf, form)?.conn)
}

/// The difference tensors (Γ − Π, Λ − Π).
pub fn difference_tensors(frame: &FrameData) -> (ConnectionCoeffs, ConnectionCoeffs) {
    (frame.t, frame.t_tilde)
}

/// Covariant derivative of a symmetric 2×2 tensor along direction k with the
/// given connection: ∇_k t_{ij} = t_{ij/k} − C^m_{ki} t_{mj} − C^m_{kj} t_{im}.
pub fn covariant_derivative(
    t: &Matrix2<f64>,
    dt: &[Matrix2<f64>; 2],
    conn: &ConnectionCoeffs,
    k: usize,
) -> Matrix2<f64> {
    let mut out = dt[k];
    for i in 0..2 {
        for j in 0..2 {
            let mut corr = 0.0;
            for m in 0..2 {
                corr += conn.at(m, k, i) * t[(m, j)] + conn.at(m, k, j) * t[(i, m)];
            }
            out[(i, j)] -= corr;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{make_surface, SurfaceSpec};
    use nalgebra::Matrix3;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn unit_sphere_frame_at_origin() {
        let patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let f = evaluate_frame(&patch, 0.0, 0.0).unwrap();
        assert!((f.g - Matrix2::identity()).norm() < 1e-12);
        assert!((f.b + Matrix2::identity()).norm() < 1e-12);
        assert!((f.n - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!(close(f.gauss_curvature, 1.0, 1e-12));
        assert!(close(f.mean_curvature, -1.0, 1e-12));
    }

    #[test]
    fn sphere_gauss_map_is_radial() {
        let patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        for &(u, v) in &[(0.3, 0.4), (-1.2, 0.9), (2.0, -0.7)] {
            let f = evaluate_frame(&patch, u, v).unwrap();
            assert!((f.n - f.x).norm() < 1e-12, "outward normal equals x on the unit sphere");
        }
    }

    #[test]
    fn helicoid_metric_and_curvatures() {
        let patch = make_surface(SurfaceSpec::Helicoid { c: 1.0, l: 0.0 }).unwrap();
        for &(s, t) in &[(0.0, 1.0), (0.8, -0.7), (-2.0, 0.4)] {
            let f = evaluate_frame(&patch, s, t).unwrap();
            assert!(close(f.g[(0, 0)], t * t + 1.0, 1e-12));
            assert!(close(f.g[(0, 1)], 0.0, 1e-12));
            assert!(close(f.g[(1, 1)], 1.0, 1e-12));
            let q = t * t + 1.0;
            assert!(close(f.gauss_curvature, -1.0 / (q * q), 1e-12));
            assert!(close(f.mean_curvature, 0.0, 1e-12));
        }
        let f = evaluate_frame(&patch, 0.3, 1.0).unwrap();
        assert!(close(f.gauss_curvature, -0.25, 1e-12));
    }

    #[test]
    fn helicoid_gauss_map_closed_form() {
        let c = 1.0;
        let patch = make_surface(SurfaceSpec::Helicoid { c, l: 0.0 }).unwrap();
        for &(s, t) in &[(0.0, 1.0), (1.1, -0.5)] {
            let gm = gauss_map(&patch, s, t).unwrap();
            let denom = (c * c + t * t).sqrt();
            let expect = Vector3::new(-c * s.sin(), c * s.cos(), -t) / denom;
            assert!((gm.n - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn quadric2_printed_tensors() {
        let (a, b) = (2.0, 3.0);
        let patch = make_surface(SurfaceSpec::Quadric2 { a, b }).unwrap();
        for &(u, v) in &[(0.1, 0.2), (-0.6, 0.45)] {
            let f = evaluate_frame(&patch, u, v).unwrap();
            let g = 1.0 + a * a * u * u + b * b * v * v;
            assert!(close(f.b[(0, 0)], a / g.sqrt(), 1e-12));
            assert!(close(f.b[(0, 1)], 0.0, 1e-12));
            assert!(close(f.b[(1, 1)], b / g.sqrt(), 1e-12));
            assert!(close(f.gauss_curvature, a * b / (g * g), 1e-12));
            let h_expect = (a * (1.0 + b * b * v * v) + b * (1.0 + a * a * u * u))
                / (2.0 * g.powf(1.5));
            assert!(close(f.mean_curvature, h_expect, 1e-12));
        }
    }

    #[test]
    fn quadric1_gauss_map_closed_form() {
        let (a, b, c) = (2.0, 3.0, 1.0);
        let patch = make_surface(SurfaceSpec::Quadric1 { a, b, c }).unwrap();
        for &(u, v) in &[(0.2, 0.1), (-0.4, 0.3)] {
            let f = evaluate_frame(&patch, u, v).unwrap();
            let phi = c + a * (a + 1.0) * u * u + b * (b + 1.0) * v * v;
            let omega = c + a * u * u + b * v * v;
            let expect = Vector3::new(-a * u, -b * v, omega.sqrt()) / phi.sqrt();
            assert!((f.n - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_christoffels_vanish() {
        let patch = make_surface(SurfaceSpec::plane()).unwrap();
        let gamma = christoffel(&patch, FundamentalForm::First, 0.3, -0.4).unwrap();
        assert!(gamma.max_abs() < 1e-14);
        // second form is degenerate on the plane
        assert!(matches!(
            christoffel(&patch, FundamentalForm::Second, 0.3, -0.4),
            Err(Error::SingularForm { .. })
        ));
    }

    #[test]
    fn sphere_second_form_christoffels_match_first() {
        // b = -g on the unit sphere, so Pi == Gamma (constant rescale)
        let patch = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let f = evaluate_frame(&patch, 0.7, 0.3).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(close(f.gamma.at(k, i, j), f.pi.at(k, i, j), 1e-11));
                }
            }
        }
        // and the difference tensor vanishes
        assert!(f.t.max_abs() < 1e-11);
    }

    #[test]
    fn contracted_christoffel_traces() {
        // C^j_{ij} = (det)_{,i} / (2 det) for each form's own connection
        let patch = make_surface(SurfaceSpec::Quadric2 { a: 2.0, b: 3.0 }).unwrap();
        let f = evaluate_frame(&patch, 0.3, -0.2).unwrap();
        for (conn, t, dt) in [(&f.gamma, &f.g, &f.dg), (&f.pi, &f.b, &f.db)] {
            let det = t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(0, 1)];
            for i in 0..2 {
                let trace: f64 = (0..2).map(|j| conn.at(j, i, j)).sum();
                let ddet = dt[i][(0, 0)] * t[(1, 1)] + t[(0, 0)] * dt[i][(1, 1)]
                    - 2.0 * t[(0, 1)] * dt[i][(0, 1)];
                assert!(
                    close(trace, ddet / (2.0 * det), 1e-9),
                    "form trace identity failed"
                );
            }
        }
    }

    #[test]
    fn flat_point_error_on_cylinder_frame() {
        let patch = make_surface(SurfaceSpec::Cylinder { r: 1.0 }).unwrap();
        assert!(matches!(
            evaluate_frame(&patch, 0.5, 0.2),
            Err(Error::FlatPoint { .. })
        ));
    }

    #[test]
    fn scaling_covariance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let lambda = 1.7;
        for spec in [
            SurfaceSpec::Sphere { r: 1.0 },
            SurfaceSpec::Quadric2 { a: 1.0, b: 1.0 },
        ] {
            let patch = make_surface(spec).unwrap();
            let scaled = patch
                .transformed(Matrix3::identity() * lambda, "scaled")
                .unwrap();
            let dom = patch.domain();
            for _ in 0..10 {
                let u = rng.random_range(dom.u.0 * 0.8..dom.u.1 * 0.8);
                let v = rng.random_range(dom.v.0 * 0.8..dom.v.1 * 0.8);
                if !patch.admissible(u, v) {
                    continue;
                }
                let f0 = evaluate_frame(&patch, u, v).unwrap();
                let f1 = evaluate_frame(&scaled, u, v).unwrap();
                assert!((f1.g - f0.g * lambda * lambda).norm() < 1e-9);
                assert!((f1.b - f0.b * lambda).norm() < 1e-9);
                assert!(close(f1.gauss_curvature, f0.gauss_curvature / (lambda * lambda), 1e-9));
                assert!(close(f1.mean_curvature, f0.mean_curvature / lambda, 1e-9));
                assert!((f1.n - f0.n).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn form_combination_identity() {
        // III - 2H*II + K*I = 0 componentwise
        for spec in [
            SurfaceSpec::Sphere { r: 2.0 },
            SurfaceSpec::Helicoid { c: 1.0, l: 0.0 },
            SurfaceSpec::Torus { rr: 2.0, r: 0.5 },
        ] {
            let patch = make_surface(spec).unwrap();
            let dom = patch.domain();
            let (u, v) = dom.cell_center(7, 11, 20);
            if !patch.admissible(u, v) {
                continue;
            }
            let f = evaluate_frame(&patch, u, v).unwrap();
            let resid = f.e - f.b * (2.0 * f.mean_curvature) + f.g * f.gauss_curvature;
            assert!(resid.norm() < 1e-9, "{}: resid {}", patch.name(), resid.norm());
        }
    }
}
