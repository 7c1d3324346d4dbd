//! First and second Beltrami differential parameters of forms I, II and III,
//! applied to scalar fields, the position vector and the Gauss map.
//!
//! Sign convention (engine-wide): Δ f = −a^{ij} (f_{,ij} − C^k_{ij} f_{,k}),
//! where (a^{ij}) inverts the selected form and C is its Christoffel symbol
//! set. The Christoffel route is the runtime implementation; jets make the
//! tensor derivatives exact. The divergence form serves as a finite-difference
//! oracle in the verification suite, not here.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector3};

use crate::error::{Error, Result};
use crate::forms::{form_geometry, ConnectionCoeffs, FrameData, FundamentalForm, JetFrame};
use crate::jet::{Jet2, MAX_ORDER};
use crate::surfaces::SurfacePatch;

type FieldEval = Arc<dyn Fn(f64, f64, usize) -> Result<Jet2> + Send + Sync>;

/// A scalar quantity on the surface, evaluable as a jet of requested order at
/// any admissible parameter point. Geometry-derived fields (K, H, components
/// of x and n) internally raise the immersion order as needed, so a laplacian
/// of K is available whenever order + 2 stays within the jet cap.
#[derive(Clone)]
pub struct ScalarField {
    label: String,
    eval: FieldEval,
}

impl ScalarField {
    pub fn new(label: impl Into<String>, eval: FieldEval) -> Self {
        ScalarField {
            label: label.into(),
            eval,
        }
    }

    /// Field defined directly by a jet-evaluable closure on seeded (u, v).
    pub fn from_jet_fn(
        label: impl Into<String>,
        f: impl Fn(Jet2, Jet2) -> Result<Jet2> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            label: label.into(),
            eval: Arc::new(move |u, v, order| {
                let (ju, jv) = Jet2::seed_pair(u, v, order)?;
                f(ju, jv)
            }),
        }
    }

    /// Ambient coordinate x_axis of the immersion (labels "x1", "x2", "x3").
    pub fn coordinate(patch: &SurfacePatch, axis: usize) -> Self {
        assert!(axis < 3);
        let patch = patch.clone();
        ScalarField {
            label: format!("x{}", axis + 1),
            eval: Arc::new(move |u, v, order| Ok(patch.evaluate(u, v, order)?[axis])),
        }
    }

    /// Component of the Gauss map (labels "n1", "n2", "n3"). Costs one extra
    /// immersion order.
    pub fn gauss_map_component(patch: &SurfacePatch, axis: usize) -> Self {
        assert!(axis < 3);
        let patch = patch.clone();
        ScalarField {
            label: format!("n{}", axis + 1),
            eval: Arc::new(move |u, v, order| {
                let need = order + 1;
                if need > MAX_ORDER {
                    return Err(Error::Config(format!(
                        "gauss map component at order {order} needs immersion order {need} > {MAX_ORDER}"
                    )));
                }
                let jf = JetFrame::build_with_order(&patch, u, v, need.max(3))?;
                Ok(jf.n[axis].truncated(order))
            }),
        }
    }

    /// Gaussian curvature as a field. Costs two extra immersion orders.
    pub fn gauss_curvature(patch: &SurfacePatch) -> Self {
        let patch = patch.clone();
        ScalarField {
            label: "K".into(),
            eval: Arc::new(move |u, v, order| {
                let need = order + 2;
                if need > MAX_ORDER {
                    return Err(Error::Config(format!(
                        "curvature field at order {order} needs immersion order {need} > {MAX_ORDER}"
                    )));
                }
                let jf = JetFrame::build_with_order(&patch, u, v, need.max(3))?;
                Ok(jf.k.truncated(order))
            }),
        }
    }

    /// Mean curvature as a field. Costs two extra immersion orders.
    pub fn mean_curvature(patch: &SurfacePatch) -> Self {
        let patch = patch.clone();
        ScalarField {
            label: "H".into(),
            eval: Arc::new(move |u, v, order| {
                let need = order + 2;
                if need > MAX_ORDER {
                    return Err(Error::Config(format!(
                        "curvature field at order {order} needs immersion order {need} > {MAX_ORDER}"
                    )));
                }
                let jf = JetFrame::build_with_order(&patch, u, v, need.max(3))?;
                Ok(jf.h.truncated(order))
            }),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval_jet(&self, u: f64, v: f64, order: usize) -> Result<Jet2> {
        (self.eval)(u, v, order)
    }
}

fn first_partials(j: &Jet2) -> [f64; 2] {
    [j.coeff(1, 0), j.coeff(0, 1)]
}

fn second_partials(j: &Jet2) -> Result<[[f64; 2]; 2]> {
    if j.order() < 2 {
        return Err(Error::Config(
            "laplacian needs a field evaluable to order 2".into(),
        ));
    }
    let fuu = j.partial(2, 0)?;
    let fuv = j.partial(1, 1)?;
    let fvv = j.partial(0, 2)?;
    Ok([[fuu, fuv], [fuv, fvv]])
}

fn lap_parts(a_inv: &Matrix2<f64>, conn: &ConnectionCoeffs, d1: [f64; 2], d2: [[f64; 2]; 2]) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut inner = d2[i][j];
            for k in 0..2 {
                inner -= conn.at(k, i, j) * d1[k];
            }
            acc += a_inv[(i, j)] * inner;
        }
    }
    -acc
}

/// First Beltrami parameter ∇(f, h) = a^{ij} f_{,i} h_{,j}.
pub fn beltrami_first(
    patch: &SurfacePatch,
    form: FundamentalForm,
    f: &ScalarField,
    h: &ScalarField,
    at: (f64, f64),
) -> Result<f64> {
    let jf = JetFrame::build(patch, at.0, at.1)?;
    let geo = form_geometry(&jf, form)?;
    let df = first_partials(&f.eval_jet(at.0, at.1, 2)?);
    let dh = first_partials(&h.eval_jet(at.0, at.1, 2)?);
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += geo.a_inv[(i, j)] * df[i] * dh[j];
        }
    }
    Ok(acc)
}

/// Vector-valued first parameter with the Gauss map: a^{ij} h_{,i} n_{,j}.
pub fn beltrami_first_gauss_map(
    patch: &SurfacePatch,
    form: FundamentalForm,
    h: &ScalarField,
    at: (f64, f64),
) -> Result<Vector3<f64>> {
    let jf = JetFrame::build(patch, at.0, at.1)?;
    let geo = form_geometry(&jf, form)?;
    let dh = first_partials(&h.eval_jet(at.0, at.1, 2)?);
    let nd = [
        Vector3::new(jf.n[0].coeff(1, 0), jf.n[1].coeff(1, 0), jf.n[2].coeff(1, 0)),
        Vector3::new(jf.n[0].coeff(0, 1), jf.n[1].coeff(0, 1), jf.n[2].coeff(0, 1)),
    ];
    let mut acc = Vector3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            acc += nd[j] * (geo.a_inv[(i, j)] * dh[i]);
        }
    }
    Ok(acc)
}

/// Gradient as an ambient tangent vector: a^{ij} f_{,i} x_{,j}.
pub fn gradient(
    patch: &SurfacePatch,
    form: FundamentalForm,
    f: &ScalarField,
    at: (f64, f64),
) -> Result<Vector3<f64>> {
    let jf = JetFrame::build(patch, at.0, at.1)?;
    let geo = form_geometry(&jf, form)?;
    let df = first_partials(&f.eval_jet(at.0, at.1, 2)?);
    let tang = [
        Vector3::new(jf.xu[0].value(), jf.xu[1].value(), jf.xu[2].value()),
        Vector3::new(jf.xv[0].value(), jf.xv[1].value(), jf.xv[2].value()),
    ];
    let mut acc = Vector3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            acc += tang[j] * (geo.a_inv[(i, j)] * df[i]);
        }
    }
    Ok(acc)
}

/// Second Beltrami parameter Δ f = −a^{ij}(f_{,ij} − C^k_{ij} f_{,k}).
pub fn laplacian_scalar(
    patch: &SurfacePatch,
    form: FundamentalForm,
    f: &ScalarField,
    at: (f64, f64),
) -> Result<f64> {
    let jf = JetFrame::build(patch, at.0, at.1)?;
    let geo = form_geometry(&jf, form)?;
    let jet = f.eval_jet(at.0, at.1, 2)?;
    Ok(lap_parts(
        &geo.a_inv,
        &geo.conn,
        first_partials(&jet),
        second_partials(&jet)?,
    ))
}

/// Componentwise laplacian of three scalar fields.
pub fn laplacian_fields(
    patch: &SurfacePatch,
    form: FundamentalForm,
    fields: [&ScalarField; 3],
    at: (f64, f64),
) -> Result<Vector3<f64>> {
    let jf = JetFrame::build(patch, at.0, at.1)?;
    let geo = form_geometry(&jf, form)?;
    let mut out = Vector3::zeros();
    for (axis, field) in fields.iter().enumerate() {
        let jet = field.eval_jet(at.0, at.1, 2)?;
        out[axis] = lap_parts(
            &geo.a_inv,
            &geo.conn,
            first_partials(&jet),
            second_partials(&jet)?,
        );
    }
    Ok(out)
}

/// Δ applied componentwise to the Gauss map, in one frame evaluation.
pub fn laplacian_gauss_map(
    patch: &SurfacePatch,
    form: FundamentalForm,
    at: (f64, f64),
) -> Result<Vector3<f64>> {
    let jf = JetFrame::build(patch, at.0, at.1)?;
    let geo = form_geometry(&jf, form)?;
    let mut out = Vector3::zeros();
    for axis in 0..3 {
        out[axis] = lap_parts(
            &geo.a_inv,
            &geo.conn,
            first_partials(&jf.n[axis]),
            second_partials(&jf.n[axis])?,
        );
    }
    Ok(out)
}

/// Δ applied componentwise to the position vector.
pub fn laplacian_position(
    patch: &SurfacePatch,
    form: FundamentalForm,
    at: (f64, f64),
) -> Result<Vector3<f64>> {
    let jf = JetFrame::build(patch, at.0, at.1)?;
    let geo = form_geometry(&jf, form)?;
    let mut out = Vector3::zeros();
    for axis in 0..3 {
        out[axis] = lap_parts(
            &geo.a_inv,
            &geo.conn,
            first_partials(&jf.x[axis]),
            second_partials(&jf.x[axis])?,
        );
    }
    Ok(out)
}

/// Gauss-map laplacian straight from a prebuilt frame (no re-evaluation).
pub fn laplacian_gauss_map_frame(frame: &FrameData, form: FundamentalForm) -> Vector3<f64> {
    let a_inv = frame.tensor_inverse(form);
    let conn = frame.connection(form);
    let mut out = Vector3::zeros();
    for axis in 0..3 {
        let d1 = [frame.n_u[axis], frame.n_v[axis]];
        let d2 = [
            [frame.n_uu[axis], frame.n_uv[axis]],
            [frame.n_uv[axis], frame.n_vv[axis]],
        ];
        out[axis] = lap_parts(a_inv, conn, d1, d2);
    }
    out
}

/// Position laplacian straight from a prebuilt frame.
pub fn laplacian_position_frame(frame: &FrameData, form: FundamentalForm) -> Vector3<f64> {
    let a_inv = frame.tensor_inverse(form);
    let conn = frame.connection(form);
    let mut out = Vector3::zeros();
    for axis in 0..3 {
        let d1 = [frame.x_u[axis], frame.x_v[axis]];
        let d2 = [
            [frame.x_uu[axis], frame.x_uv[axis]],
            [frame.x_uv[axis], frame.x_vv[axis]],
        ];
        out[axis] = lap_parts(a_inv, conn, d1, d2);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{make_surface, SurfaceSpec};

    fn field_u() -> ScalarField {
        ScalarField::from_jet_fn("u", |u, _| Ok(u))
    }

    fn field_v() -> ScalarField {
        ScalarField::from_jet_fn("v", |_, v| Ok(v))
    }

    #[test]
    fn plane_first_parameter_and_gradient() {
        let plane = make_surface(SurfaceSpec::plane()).unwrap();
        let u = field_u();
        let got = beltrami_first(&plane, FundamentalForm::First, &u, &u, (0.2, -0.3)).unwrap();
        assert!((got - 1.0).abs() < 1e-14);

        let grad = gradient(&plane, FundamentalForm::First, &u, (0.2, -0.3)).unwrap();
        assert!((grad - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-14);

        let lap = laplacian_scalar(&plane, FundamentalForm::First, &u, (0.2, -0.3)).unwrap();
        assert!(lap.abs() < 1e-14);
    }

    #[test]
    fn sphere_meridian_coordinate() {
        // g^{22} = 1 in the geographic chart
        let sphere = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let v = field_v();
        let got = beltrami_first(&sphere, FundamentalForm::First, &v, &v, (0.7, 0.2)).unwrap();
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_parameter_symmetry() {
        let patch = make_surface(SurfaceSpec::Quadric2 { a: 2.0, b: 3.0 }).unwrap();
        let f = ScalarField::from_jet_fn("f", |u, v| Ok(u * u + v.sin()));
        let h = ScalarField::from_jet_fn("h", |u, v| Ok(u * v));
        for form in [FundamentalForm::First, FundamentalForm::Second, FundamentalForm::Third] {
            let a = beltrami_first(&patch, form, &f, &h, (0.3, 0.2)).unwrap();
            let b = beltrami_first(&patch, form, &h, &f, (0.3, 0.2)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_is_tangent() {
        let patch = make_surface(SurfaceSpec::Torus { rr: 2.0, r: 0.5 }).unwrap();
        let f = ScalarField::from_jet_fn("f", |u, v| Ok(u.sin() * v + u));
        let at = (0.4, 0.8);
        let grad = gradient(&patch, FundamentalForm::First, &f, at).unwrap();
        let frame = crate::forms::evaluate_frame(&patch, at.0, at.1).unwrap();
        assert!(grad.dot(&frame.n).abs() < 1e-10);
    }

    #[test]
    fn helicoid_curvature_gradient() {
        // K = -1/(1+t^2)^2, so grad K at t = 1 is 0.5 (cos s, sin s, 0)
        let patch = make_surface(SurfaceSpec::Helicoid { c: 1.0, l: 0.0 }).unwrap();
        let k = ScalarField::gauss_curvature(&patch);
        for &s in &[0.0, 0.9, -1.7] {
            let grad = gradient(&patch, FundamentalForm::First, &k, (s, 1.0)).unwrap();
            let expect = Vector3::new(s.cos(), s.sin(), 0.0) * 0.5;
            assert!((grad - expect).norm() < 1e-10, "at s = {s}: {grad:?}");
        }
    }

    #[test]
    fn helicoid_second_form_laplacian_closed_form() {
        // II = (2c/sqrt(q)) ds dt makes the operator -(2 sqrt(q)/c) d^2/(ds dt)
        let c = 1.0;
        let patch = make_surface(SurfaceSpec::Helicoid { c, l: 0.0 }).unwrap();
        let f = ScalarField::from_jet_fn("st", |u, v| Ok(u * v));
        for &(s, t) in &[(0.0, 1.0), (0.5, -0.8), (1.4, 0.3)] {
            let got = laplacian_scalar(&patch, FundamentalForm::Second, &f, (s, t)).unwrap();
            let q: f64 = t * t + c * c;
            assert!(
                (got - (-2.0 * q.sqrt() / c)).abs() < 1e-11,
                "at ({s},{t}): {got}"
            );
        }
    }

    #[test]
    fn paraboloid_third_form_coordinate_laplacians() {
        let (a, b) = (1.0, 1.0);
        let patch = make_surface(SurfaceSpec::Quadric2 { a, b }).unwrap();
        for &(u, v) in &[(1.0, 0.0), (0.0, 0.0), (0.4, -0.6)] {
            let lap = laplacian_position(&patch, FundamentalForm::Third, (u, v)).unwrap();
            let g = 1.0 + a * a * u * u + b * b * v * v;
            assert!((lap[0] - (-2.0 * u * g)).abs() < 1e-10, "x1 at ({u},{v}): {}", lap[0]);
            assert!((lap[1] - (-2.0 * v * g)).abs() < 1e-10, "x2 at ({u},{v}): {}", lap[1]);
        }
    }

    #[test]
    fn position_laplacian_eigenrelations() {
        // unit sphere: lap_I x = 2x; catenoid: minimal, lap_I x = 0
        let sphere = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let at = (0.5, 0.3);
        let lap = laplacian_position(&sphere, FundamentalForm::First, at).unwrap();
        let x = sphere.evaluate(at.0, at.1, 3).unwrap();
        let x = Vector3::new(x[0].value(), x[1].value(), x[2].value());
        assert!((lap - x * 2.0).norm() < 1e-11);

        let catenoid = make_surface(SurfaceSpec::Catenoid { c: 1.0 }).unwrap();
        let lap = laplacian_position(&catenoid, FundamentalForm::First, (0.8, 0.4)).unwrap();
        assert!(lap.norm() < 1e-11);
    }

    #[test]
    fn sphere_gauss_map_laplacian() {
        let sphere = make_surface(SurfaceSpec::Sphere { r: 1.0 }).unwrap();
        let at = (1.2, -0.4);
        let lap = laplacian_gauss_map(&sphere, FundamentalForm::Second, at).unwrap();
        let frame = crate::forms::evaluate_frame(&sphere, at.0, at.1).unwrap();
        assert!((lap + frame.n * 2.0).norm() < 1e-11, "expected -2n, got {lap:?}");
    }

    #[test]
    fn helicoid_gauss_map_laplacian_value() {
        let patch = make_surface(SurfaceSpec::Helicoid { c: 1.0, l: 0.0 }).unwrap();
        let lap = laplacian_gauss_map(&patch, FundamentalForm::Second, (0.0, 1.0)).unwrap();
        assert!(
            (lap - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-9,
            "got {lap:?}"
        );
    }

    #[test]
    fn sphere_like_quadric_gauss_map_laplacian() {
        let patch = make_surface(SurfaceSpec::Quadric1 {
            a: -1.0,
            b: -1.0,
            c: 1.0,
        })
        .unwrap();
        for &(u, v) in &[(0.0, 0.0), (0.3, 0.2), (-0.45, 0.1)] {
            let lap = laplacian_gauss_map(&patch, FundamentalForm::Second, (u, v)).unwrap();
            let frame = crate::forms::evaluate_frame(&patch, u, v).unwrap();
            assert!((lap + frame.n * 2.0).norm() < 1e-10, "at ({u},{v}): {lap:?}");
        }
    }

    #[test]
    fn laplacian_linearity() {
        let patch = make_surface(SurfaceSpec::Torus { rr: 2.0, r: 0.5 }).unwrap();
        let f = ScalarField::from_jet_fn("f", |u, v| Ok(u.sin() + v * v));
        let h = ScalarField::from_jet_fn("h", |u, v| Ok(u * v));
        let combo = ScalarField::from_jet_fn("combo", |u, v| {
            Ok((u.sin() + v * v) * 2.5 + u * v * (-1.25))
        });
        let at = (0.7, 0.5);
        for form in [FundamentalForm::First, FundamentalForm::Second] {
            let lf = laplacian_scalar(&patch, form, &f, at).unwrap();
            let lh = laplacian_scalar(&patch, form, &h, at).unwrap();
            let lc = laplacian_scalar(&patch, form, &combo, at).unwrap();
            assert!((lc - (2.5 * lf - 1.25 * lh)).abs() < 1e-10);
        }
    }

    #[test]
    fn frame_variant_matches_patch_variant() {
        let patch = make_surface(SurfaceSpec::Quadric1 {
            a: 2.0,
            b: 3.0,
            c: 1.0,
        })
        .unwrap();
        let at = (0.25, -0.15);
        let frame = crate::forms::evaluate_frame(&patch, at.0, at.1).unwrap();
        for form in [FundamentalForm::First, FundamentalForm::Second, FundamentalForm::Third] {
            let a = laplacian_gauss_map(&patch, form, at).unwrap();
            let b = laplacian_gauss_map_frame(&frame, form);
            assert!((a - b).norm() < 1e-12);
            let c = laplacian_position(&patch, form, at).unwrap();
            let d = laplacian_position_frame(&frame, form);
            assert!((c - d).norm() < 1e-12);
        }
    }
}
