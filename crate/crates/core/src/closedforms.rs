//! Hand-derived closed-form pipelines for ruled surfaces and both quadric
//! kinds, cross-validated against the generic jet engine.
//!
//! Each pipeline evaluates the closed forms exactly as tabulated in the hand
//! derivation and compares them with the engine. Where the tabulation is
//! known to be defective, a corrected variant (rederived termwise from the
//! operator expansion and validated numerically) ships alongside, clearly
//! labeled; the tabulated variant is still evaluated so the discrepancy is
//! visible in cross-validation reports rather than silently patched.
//!
//! Known tabulation defects surfaced by this module:
//! - ruled f1: tabulated as degree 5; the true coefficient polynomial has
//!   degree 3 (the leading terms cancel) and several terms differ.
//! - ruled f2: the t^2 coefficient carries a stray factor (4l^2 n instead of
//!   4l^2) and the tabulated sign is opposite to f4's relative to the same
//!   operator expansion.
//! - ruled f3: one term is unparseable as printed; it is read here as
//!   3 k' A^3, and further terms are missing the ruling invariant factor.
//! - first-kind quadric operator: the mixed-derivative term needs sign +2uv
//!   (tabulated -2uv) and the f_vv term its derivative symbol; only with both
//!   corrections does the operator reproduce its own tabulated outputs for
//!   the Gauss-map components, which themselves match the engine exactly.

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::beltrami::{laplacian_gauss_map, laplacian_position, laplacian_scalar, ScalarField};
use crate::error::{Error, Result};
use crate::forms::evaluate_frame;
use crate::forms::FundamentalForm;
use crate::jet::{add3, cross3, deriv3, dot3, scale3, truncate3, Jet2, Var};
use crate::surfaces::{make_surface, CurvePair, SurfacePatch, SurfaceSpec};

fn v3(j: &[Jet2; 3]) -> Vector3<f64> {
    Vector3::new(j[0].value(), j[1].value(), j[2].value())
}

fn v3_sderiv(j: &[Jet2; 3]) -> Vector3<f64> {
    Vector3::new(j[0].coeff(1, 0), j[1].coeff(1, 0), j[2].coeff(1, 0))
}

fn triple(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    a.dot(&b.cross(c))
}

/// Polynomial evaluation, coefficients lowest power first.
pub fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// Scalar invariants of a ruled surface at (s, t): the metric/shape data
/// q, p, A and the frame invariants k, l, m, n, r with the s-derivatives
/// needed by the coefficient polynomials.
#[derive(Debug, Clone, Copy)]
pub struct RuledScalars {
    pub q: f64,
    pub p: f64,
    /// Ruling invariant A = (sigma', tau, tau'); must not vanish.
    pub a: f64,
    pub k: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub r: f64,
    pub k_s: f64,
    pub l_s: f64,
}

fn frame_invariants(curves: &CurvePair, s: f64) -> Result<RuledScalars> {
    let sigma = curves.sigma_jet(s, 3)?;
    let tau = curves.tau_jet(s, 3)?;
    let sig_p = deriv3(&sigma, Var::U);
    let tau_p = deriv3(&tau, Var::U);
    let sig_pp = deriv3(&sig_p, Var::U);
    let tau_pp = deriv3(&tau_p, Var::U);

    let k_jet = dot3(&sig_p, &sig_p);
    let l_jet = dot3(&sig_p, &tau_p);
    let sv = v3(&sig_p);
    let tv = v3(&tau);
    let tpv = v3(&tau_p);
    let sppv = v3(&sig_pp);
    let tppv = v3(&tau_pp);

    let a = triple(&sv, &tv, &tpv);
    if a.abs() < 1e-12 {
        return Err(Error::DegenerateRuling { s, a });
    }
    Ok(RuledScalars {
        q: 0.0,
        p: 0.0,
        a,
        k: k_jet.value(),
        l: l_jet.value(),
        m: triple(&tpv, &tv, &tppv),
        n: triple(&sv, &tv, &tppv) + triple(&tpv, &tv, &sppv),
        r: triple(&sv, &tv, &sppv),
        k_s: k_jet.coeff(1, 0),
        l_s: l_jet.coeff(1, 0),
    })
}

/// All ruled-surface scalars at (s, t), cross-checked against the metric and
/// second form of the generic engine: q = g_11, p = b_11 sqrt(q),
/// A = b_12 sqrt(q), b_22 = 0.
pub fn ruled_scalars(curves: &CurvePair, s: f64, t: f64) -> Result<RuledScalars> {
    let mut inv = frame_invariants(curves, s)?;
    inv.q = t * t + 2.0 * inv.l * t + inv.k;
    inv.p = inv.m * t * t + inv.n * t + inv.r;
    Ok(inv)
}

/// Engine-side values of (q, p, A, b_22) recovered from the metric and second
/// form: q = g_11, p = b_11 sqrt(q), A = b_12 sqrt(q); b_22 must vanish.
pub(crate) fn ruled_engine_reference(
    patch: &SurfacePatch,
    s: f64,
    t: f64,
) -> Result<[f64; 4]> {
    let frame = evaluate_frame(patch, s, t)?;
    let q_engine = frame.g[(0, 0)];
    let sq = q_engine.max(0.0).sqrt();
    Ok([
        q_engine,
        frame.b[(0, 0)] * sq,
        frame.b[(0, 1)] * sq,
        frame.b[(1, 1)],
    ])
}

/// The four coefficient polynomials of the Gauss-map laplacian decomposition
/// lap n = (1/q^2)[f1 Q/A^2 + f2 Q'/A + f3 P/A^2 + f4 P'/A],
/// with P = sigma' x tau, Q = tau' x tau. Coefficients lowest power first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FPolynomials {
    /// Hand-tabulated coefficients, reproduced verbatim. f1 is tabulated with
    /// degree 5, and the one unparseable f3 term is read as 3 k' A^3. These
    /// are retained for discrepancy reporting, not for computation.
    pub tabulated: [Vec<f64>; 4],
    /// Termwise rederivation from the operator expansion (leading-minus
    /// convention); matches the jet engine. All four have degree <= 3.
    pub corrected: [Vec<f64>; 4],
}

/// Coefficient polynomials at arc-length s.
pub fn f_polynomials(curves: &CurvePair, s: f64) -> Result<FPolynomials> {
    let inv = frame_invariants(curves, s)?;
    Ok(f_polynomials_from(&inv))
}

fn f_polynomials_from(inv: &RuledScalars) -> FPolynomials {
    let RuledScalars {
        a,
        k,
        l,
        m,
        n,
        r,
        k_s: kp,
        l_s: lp,
        ..
    } = *inv;

    let tabulated = [
        vec![
            -k * k * n - k * kp * a,
            3.0 * k * r - 3.0 * l * l * r - 2.0 * k * l * n - 2.0 * k * k * m + kp * l * a
                - 4.0 * k * lp * a,
            3.0 * k * n - 3.0 * l * l * n - 4.0 * k * l * m + 2.0 * kp * a - 2.0 * l * lp * a,
            3.0 * k * l - 3.0 * l * l * m + 2.0 * l * n + 2.0 * lp * a,
            n + 4.0 * l * m,
            2.0 * m,
        ],
        vec![
            2.0 * k * k,
            6.0 * k * l,
            4.0 * l * l * n + 2.0 * k,
            2.0 * l,
        ],
        vec![
            k * r + k * l * n - 2.0 * k * lp - 3.0 * l * l * r + 3.0 * kp * l,
            2.0 * k * n - l * l * n + 2.0 * k * l * m + 3.0 * kp * a * a * a + 2.0 * l * lp
                - 4.0 * l * r,
            4.0 * lp + l * l * m - l * n - 2.0 * r + 3.0 * k * m,
            2.0 * l * m - n,
        ],
        vec![
            2.0 * k * l,
            4.0 * l * l + 2.0 * k,
            6.0 * l,
            2.0,
        ],
    ];

    let corrected = [
        vec![
            a * kp * k + k * k * n - 2.0 * k * l * r,
            4.0 * a * k * lp - a * kp * l + 2.0 * k * k * m + k * l * n - 3.0 * k * r
                - l * l * r,
            -2.0 * a * kp + 2.0 * a * l * lp + 4.0 * k * l * m - 2.0 * k * n + l * l * n
                - 2.0 * l * r,
            -2.0 * a * lp - k * m + 3.0 * l * l * m - l * n,
        ],
        vec![
            -2.0 * k * k,
            -6.0 * k * l,
            -(2.0 * k + 4.0 * l * l),
            -2.0 * l,
        ],
        vec![
            2.0 * a * k * lp - 3.0 * a * kp * l - k * l * n - k * r + 3.0 * l * l * r,
            -3.0 * a * kp - 2.0 * a * l * lp - 2.0 * k * l * m - 2.0 * k * n + l * l * n
                + 4.0 * l * r,
            -4.0 * a * lp - 3.0 * k * m - l * l * m + l * n + 2.0 * r,
            n - 2.0 * l * m,
        ],
        vec![
            2.0 * k * l,
            2.0 * k + 4.0 * l * l,
            6.0 * l,
            2.0,
        ],
    ];

    FPolynomials {
        tabulated,
        corrected,
    }
}

/// One f_i evaluated both ways at a point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermComparison {
    pub name: String,
    pub tabulated: f64,
    pub corrected: f64,
    pub abs_diff: f64,
}

/// Gauss-map laplacian of a ruled surface along every available route.
#[derive(Debug, Clone)]
pub struct RuledGaussLaplacian {
    /// Generic jet engine, canonical (leading-minus) convention.
    pub engine: Vector3<f64>,
    /// The tabulated mixed/t-derivative operator applied to (P + tQ)/sqrt(q)
    /// via jets. Related to the engine by `operator_sign`.
    pub operator_direct: Vector3<f64>,
    /// Assembly with the tabulated f polynomials.
    pub assembled_tabulated: Vector3<f64>,
    /// Assembly with the corrected f polynomials; matches the engine.
    pub assembled_corrected: Vector3<f64>,
    /// Sign relating `operator_direct` to `engine`.
    pub operator_sign: f64,
    /// f_i values at this t, both variants.
    pub terms: [TermComparison; 4],
}

fn relation_sign(lhs: &Vector3<f64>, rhs: &Vector3<f64>) -> f64 {
    if lhs.dot(rhs) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Evaluates every route to the ruled Gauss-map laplacian at (s, t).
pub fn ruled_laplacian_gauss_map(
    curves: &CurvePair,
    s: f64,
    t: f64,
) -> Result<RuledGaussLaplacian> {
    let patch = curves.ruled_patch(ruled_t_range(t))?;
    ruled_laplacian_with_patch(curves, &patch, s, t)
}

fn ruled_t_range(t: f64) -> (f64, f64) {
    (t.min(-1.5) - 0.1, t.max(1.5) + 0.1)
}

pub(crate) fn ruled_laplacian_with_patch(
    curves: &CurvePair,
    patch: &SurfacePatch,
    s: f64,
    t: f64,
) -> Result<RuledGaussLaplacian> {
    let scalars = ruled_scalars(curves, s, t)?;
    let engine = laplacian_gauss_map(patch, FundamentalForm::Second, (s, t))?;

    // jets of the closed-form Gauss map (P + tQ)/sqrt(q), s seeded in u, t in v
    let sigma = curves.sigma_jet(s, 3)?;
    let tau = curves.tau_jet(s, 3)?;
    let sig_p = deriv3(&sigma, Var::U);
    let tau_p = deriv3(&tau, Var::U);
    let tau2 = truncate3(&tau, 2);
    let p_jets = cross3(&sig_p, &tau2);
    let q_jets = cross3(&tau_p, &tau2);

    let t_jet = Jet2::seed(Var::V, t, 2)?;
    let k_jet = dot3(&sig_p, &sig_p);
    let l_jet = dot3(&sig_p, &tau_p);
    let q_metric = t_jet * t_jet + l_jet * t_jet * 2.0 + k_jet;
    let inv_sqrt_q = q_metric.sqrt()?.recip()?;
    let n_closed = scale3(&add3(&p_jets, &scale3(&q_jets, t_jet)), inv_sqrt_q);

    // tabulated operator: (2 sqrt(q)/A) f_st - (p sqrt(q)/A^2) f_tt - (sqrt(q) p_t/A^2) f_t
    let sq = scalars.q.sqrt();
    let p_t = 2.0 * scalars.m * t + scalars.n;
    let mut operator_direct = Vector3::zeros();
    for axis in 0..3 {
        let f = &n_closed[axis];
        let f_st = f.partial(1, 1)?;
        let f_tt = f.partial(0, 2)?;
        let f_t = f.partial(0, 1)?;
        operator_direct[axis] = (2.0 * sq / scalars.a) * f_st
            - (scalars.p * sq / (scalars.a * scalars.a)) * f_tt
            - (sq * p_t / (scalars.a * scalars.a)) * f_t;
    }

    let polys = f_polynomials_from(&scalars);
    let p_val = v3(&p_jets);
    let q_val = v3(&q_jets);
    let p_prime = v3_sderiv(&p_jets);
    let q_prime = v3_sderiv(&q_jets);

    let assemble = |f: &[Vec<f64>; 4]| -> Vector3<f64> {
        let f1 = eval_poly(&f[0], t);
        let f2 = eval_poly(&f[1], t);
        let f3 = eval_poly(&f[2], t);
        let f4 = eval_poly(&f[3], t);
        let a = scalars.a;
        let q2 = scalars.q * scalars.q;
        (q_val * (f1 / (a * a)) + q_prime * (f2 / a) + p_val * (f3 / (a * a))
            + p_prime * (f4 / a))
            / q2
    };

    let assembled_tabulated = assemble(&polys.tabulated);
    let assembled_corrected = assemble(&polys.corrected);

    let names = ["f1", "f2", "f3", "f4"];
    let terms = std::array::from_fn(|i| {
        let tv = eval_poly(&polys.tabulated[i], t);
        let cv = eval_poly(&polys.corrected[i], t);
        TermComparison {
            name: names[i].to_string(),
            tabulated: tv,
            corrected: cv,
            abs_diff: (tv - cv).abs(),
        }
    });

    Ok(RuledGaussLaplacian {
        engine,
        operator_direct,
        assembled_tabulated,
        assembled_corrected,
        operator_sign: relation_sign(&operator_direct, &engine),
        terms,
    })
}

/// Closed forms of the first quadric kind z^2 = c + a x^2 + b y^2 at (u, v).
#[derive(Debug, Clone)]
pub struct Quadric1Closed {
    pub omega: f64,
    pub phi: f64,
    pub g: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub n: Vector3<f64>,
    /// Closed-form laplacian of the first two Gauss-map components.
    pub lap_n1: f64,
    pub lap_n2: f64,
    /// Generic engine value for comparison.
    pub engine_lap_n: Vector3<f64>,
    /// Sign relating the closed-form laplacians to the engine.
    pub operator_sign: f64,
}

/// Evaluates the first-kind closed forms and compares with the engine.
pub fn quadric1_pipeline(a: f64, b: f64, c: f64, u: f64, v: f64) -> Result<Quadric1Closed> {
    let patch = make_surface(SurfaceSpec::Quadric1 { a, b, c })?;
    quadric1_with_patch(&patch, a, b, c, u, v)
}

pub(crate) fn quadric1_with_patch(
    patch: &SurfacePatch,
    a: f64,
    b: f64,
    c: f64,
    u: f64,
    v: f64,
) -> Result<Quadric1Closed> {
    let omega = c + a * u * u + b * v * v;
    let phi = c + a * (a + 1.0) * u * u + b * (b + 1.0) * v * v;
    if omega <= 1e-6 || phi <= 1e-6 {
        return Err(Error::Inadmissible {
            u,
            v,
            reason: format!("omega = {omega}, phi = {phi} not positive"),
        });
    }
    let sqrt_phi = phi.sqrt();

    let g = Matrix2::new(
        1.0 + a * a * u * u / omega,
        a * b * u * v / omega,
        a * b * u * v / omega,
        1.0 + b * b * v * v / omega,
    );
    let bmat = Matrix2::new(
        a * (b * v * v + c) / (omega * sqrt_phi),
        -a * b * u * v / (omega * sqrt_phi),
        -a * b * u * v / (omega * sqrt_phi),
        b * (a * u * u + c) / (omega * sqrt_phi),
    );
    let n = Vector3::new(-a * u, -b * v, omega.sqrt()) / sqrt_phi;

    let lap_n1 = a * u / (phi * phi)
        * (3.0 * b * (b + 1.0) * (b - a) * v * v - 3.0 * a * c - (b + 2.0) * phi);
    let lap_n2 = b * v / (phi * phi)
        * (3.0 * a * (a + 1.0) * (a - b) * u * u - 3.0 * b * c - (a + 2.0) * phi);

    let engine_lap_n = laplacian_gauss_map(patch, FundamentalForm::Second, (u, v))?;
    let closed12 = Vector3::new(lap_n1, lap_n2, 0.0);
    let engine12 = Vector3::new(engine_lap_n[0], engine_lap_n[1], 0.0);

    Ok(Quadric1Closed {
        omega,
        phi,
        g,
        b: bmat,
        n,
        lap_n1,
        lap_n2,
        engine_lap_n,
        operator_sign: relation_sign(&closed12, &engine12),
    })
}

fn quadric1_operator_parts(
    a: f64,
    b: f64,
    c: f64,
    f: &ScalarField,
    at: (f64, f64),
) -> Result<(f64, f64)> {
    let (u, v) = at;
    let phi = c + a * (a + 1.0) * u * u + b * (b + 1.0) * v * v;
    if phi <= 0.0 {
        return Err(Error::Inadmissible {
            u,
            v,
            reason: format!("phi = {phi} not positive"),
        });
    }
    let jet = f.eval_jet(u, v, 2)?;
    let f_u = jet.partial(1, 0)?;
    let f_v = jet.partial(0, 1)?;
    let f_uu = jet.partial(2, 0)?;
    let f_uv = jet.partial(1, 1)?;
    let f_vv = jet.partial(0, 2)?;
    let scale = -phi.sqrt() / c;
    let base = (a * u * u + c) / a * f_uu
        + (b * v * v + c) / b * f_vv
        + 2.0 * u * f_u
        + 2.0 * v * f_v;
    let mixed = 2.0 * u * v * f_uv;
    Ok((scale * (base + mixed), scale * (base - mixed)))
}

/// Second-order operator of the first quadric kind, corrected reading:
/// -(sqrt(Phi)/c)[(au^2+c)/a f_uu + 2uv f_uv + (bv^2+c)/b f_vv + 2u f_u + 2v f_v].
/// Matches the divergence form and reproduces the closed-form Gauss-map
/// laplacians.
pub fn quadric1_operator_corrected(
    a: f64,
    b: f64,
    c: f64,
    f: &ScalarField,
    at: (f64, f64),
) -> Result<f64> {
    quadric1_operator_parts(a, b, c, f, at).map(|(corrected, _)| corrected)
}

/// Same operator with the mixed term as tabulated (-2uv); kept for the
/// discrepancy report. Deviates from the divergence form off the axes.
pub fn quadric1_operator_tabulated(
    a: f64,
    b: f64,
    c: f64,
    f: &ScalarField,
    at: (f64, f64),
) -> Result<f64> {
    quadric1_operator_parts(a, b, c, f, at).map(|(_, tabulated)| tabulated)
}

/// Closed forms of the second quadric kind z = (a/2)x^2 + (b/2)y^2 at (u, v).
#[derive(Debug, Clone)]
pub struct Quadric2Closed {
    pub g: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub e: Matrix2<f64>,
    pub det_g: f64,
    /// Closed-form third-form laplacians of the coordinate functions:
    /// -2ug and -2vg.
    pub lap_u: f64,
    pub lap_v: f64,
    /// Generic engine third-form laplacian of the position vector.
    pub engine_lap_x: Vector3<f64>,
    pub operator_sign: f64,
}

/// Evaluates the second-kind closed forms and compares with the engine.
pub fn quadric2_pipeline(a: f64, b: f64, u: f64, v: f64) -> Result<Quadric2Closed> {
    let patch = make_surface(SurfaceSpec::Quadric2 { a, b })?;
    quadric2_with_patch(&patch, a, b, u, v)
}

pub(crate) fn quadric2_with_patch(
    patch: &SurfacePatch,
    a: f64,
    b: f64,
    u: f64,
    v: f64,
) -> Result<Quadric2Closed> {
    let det_g = 1.0 + a * a * u * u + b * b * v * v;
    let sq = det_g.sqrt();
    let g = Matrix2::new(
        1.0 + a * a * u * u,
        a * b * u * v,
        a * b * u * v,
        1.0 + b * b * v * v,
    );
    let bmat = Matrix2::new(a / sq, 0.0, 0.0, b / sq);
    let e = Matrix2::new(
        a * a * (1.0 + b * b * v * v) / (det_g * det_g),
        -a * a * b * b * u * v / (det_g * det_g),
        -a * a * b * b * u * v / (det_g * det_g),
        b * b * (1.0 + a * a * u * u) / (det_g * det_g),
    );

    let lap_u = -2.0 * u * det_g;
    let lap_v = -2.0 * v * det_g;
    let engine_lap_x = laplacian_position(patch, FundamentalForm::Third, (u, v))?;
    let closed12 = Vector3::new(lap_u, lap_v, 0.0);
    let engine12 = Vector3::new(engine_lap_x[0], engine_lap_x[1], 0.0);

    Ok(Quadric2Closed {
        g,
        b: bmat,
        e,
        det_g,
        lap_u,
        lap_v,
        engine_lap_x,
        operator_sign: relation_sign(&closed12, &engine12),
    })
}

/// Second-order third-form operator of the second quadric kind, as tabulated:
/// -(g(1+a^2u^2)/a^2) f_uu - (g(1+b^2v^2)/b^2) f_vv - 2uvg f_uv - 2ug f_u - 2vg f_v.
pub fn quadric2_operator(a: f64, b: f64, f: &ScalarField, at: (f64, f64)) -> Result<f64> {
    let (u, v) = at;
    let g = 1.0 + a * a * u * u + b * b * v * v;
    let jet = f.eval_jet(u, v, 2)?;
    let f_u = jet.partial(1, 0)?;
    let f_v = jet.partial(0, 1)?;
    let f_uu = jet.partial(2, 0)?;
    let f_uv = jet.partial(1, 1)?;
    let f_vv = jet.partial(0, 2)?;
    Ok(-(g * (1.0 + a * a * u * u) / (a * a)) * f_uu
        - (g * (1.0 + b * b * v * v) / (b * b)) * f_vv
        - 2.0 * u * v * g * f_uv
        - 2.0 * u * g * f_u
        - 2.0 * v * g * f_v)
}

/// Per-quantity cross-validation outcome. Non-gating checks document known
/// tabulation defects and do not affect the overall verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantityCheck {
    pub name: String,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    /// Reconciliation sign applied to the closed form before comparison.
    pub sign: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub gating: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XvalReport {
    pub pipeline: String,
    pub surface: String,
    pub grid: usize,
    pub checks: Vec<QuantityCheck>,
    /// True when every gating check passes.
    pub pass: bool,
}

const XVAL_TOL: f64 = 1e-8;
const XVAL_TOL_K: f64 = 1e-10;

struct CheckAccum {
    name: String,
    tolerance: f64,
    gating: bool,
    sign: f64,
    sign_fixed: bool,
    max_abs: f64,
    max_rel: f64,
    consistent: bool,
}

impl CheckAccum {
    fn new(name: &str, tolerance: f64, gating: bool) -> Self {
        CheckAccum {
            name: name.to_string(),
            tolerance,
            gating,
            sign: 1.0,
            sign_fixed: false,
            max_abs: 0.0,
            max_rel: 0.0,
            consistent: true,
        }
    }

    /// Fixed-sign comparison (forms and maps must match without flips).
    fn push(&mut self, closed: f64, engine: f64) {
        let abs = (closed - engine).abs();
        self.max_abs = self.max_abs.max(abs);
        self.max_rel = self.max_rel.max(abs / (1.0 + engine.abs()));
    }

    /// Comparison up to one global sign, locked on the first significant
    /// sample; later sign flips mark the check inconsistent.
    fn push_signed(&mut self, closed: f64, engine: f64) {
        if !self.sign_fixed && closed.abs() > 1e-9 && engine.abs() > 1e-9 {
            self.sign = if (closed / engine) < 0.0 { -1.0 } else { 1.0 };
            self.sign_fixed = true;
        }
        self.push(self.sign * closed, engine);
    }

    fn push_signed_vec(&mut self, closed: &Vector3<f64>, engine: &Vector3<f64>) {
        if !self.sign_fixed && closed.norm() > 1e-9 && engine.norm() > 1e-9 {
            self.sign = if closed.dot(engine) < 0.0 { -1.0 } else { 1.0 };
            self.sign_fixed = true;
        }
        for i in 0..3 {
            self.push(self.sign * closed[i], engine[i]);
        }
    }

    fn finish(self) -> QuantityCheck {
        QuantityCheck {
            name: self.name,
            max_abs_err: self.max_abs,
            max_rel_err: self.max_rel,
            sign: self.sign,
            tolerance: self.tolerance,
            pass: self.consistent && self.max_rel <= self.tolerance,
            gating: self.gating,
        }
    }
}

fn grid_points(patch: &SurfacePatch, grid: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let (u, v) = patch.domain().cell_center(i, j, grid);
            if patch.admissible(u, v) {
                pts.push((u, v));
            }
        }
    }
    pts
}

/// Cross-validates the ruled pipeline on a grid over (s, t).
pub fn xval_ruled(curves: &CurvePair, grid: usize) -> Result<XvalReport> {
    let patch = curves.ruled_patch((-1.5, 1.5))?;
    let mut q_chk = CheckAccum::new("q", XVAL_TOL, true);
    let mut p_chk = CheckAccum::new("p", XVAL_TOL, true);
    let mut a_chk = CheckAccum::new("A", XVAL_TOL, true);
    let mut k_chk = CheckAccum::new("K", XVAL_TOL_K, true);
    let mut n_chk = CheckAccum::new("gauss-map", XVAL_TOL, true);
    let mut b22_chk = CheckAccum::new("b22-vanishes", XVAL_TOL, true);
    let mut lap_corr = CheckAccum::new("gauss-laplacian[corrected]", XVAL_TOL, true);
    let mut lap_op = CheckAccum::new("gauss-laplacian[operator]", XVAL_TOL, true);
    let mut lap_tab = CheckAccum::new("gauss-laplacian[tabulated]", XVAL_TOL, false);

    for (s, t) in grid_points(&patch, grid) {
        let scalars = ruled_scalars(curves, s, t)?;
        let engine = ruled_engine_reference(&patch, s, t)?;
        q_chk.push(scalars.q, engine[0]);
        p_chk.push(scalars.p, engine[1]);
        a_chk.push(scalars.a, engine[2]);
        b22_chk.push(0.0, engine[3]);

        let frame = evaluate_frame(&patch, s, t)?;
        let k_closed = -scalars.a * scalars.a / (scalars.q * scalars.q);
        k_chk.push(k_closed, frame.gauss_curvature);

        // closed Gauss map (P + tQ)/sqrt(q)
        let sigma = curves.sigma_jet(s, 2)?;
        let tau = curves.tau_jet(s, 2)?;
        let p_vec = v3(&cross3(&deriv3(&sigma, Var::U), &truncate3(&tau, 1)));
        let q_vec = v3(&cross3(&deriv3(&tau, Var::U), &truncate3(&tau, 1)));
        let n_closed = (p_vec + q_vec * t) / scalars.q.sqrt();
        for i in 0..3 {
            n_chk.push(n_closed[i], frame.n[i]);
        }

        let lap = ruled_laplacian_with_patch(curves, &patch, s, t)?;
        lap_corr.push_signed_vec(&lap.assembled_corrected, &lap.engine);
        lap_op.push_signed_vec(&lap.operator_direct, &lap.engine);
        lap_tab.push_signed_vec(&lap.assembled_tabulated, &lap.engine);
    }

    let checks: Vec<QuantityCheck> = vec![
        q_chk.finish(),
        p_chk.finish(),
        a_chk.finish(),
        b22_chk.finish(),
        k_chk.finish(),
        n_chk.finish(),
        lap_corr.finish(),
        lap_op.finish(),
        lap_tab.finish(),
    ];
    let pass = checks.iter().filter(|c| c.gating).all(|c| c.pass);
    Ok(XvalReport {
        pipeline: "ruled".into(),
        surface: patch.name().to_string(),
        grid,
        checks,
        pass,
    })
}

/// Cross-validates the first-kind quadric pipeline on a grid.
pub fn xval_quadric1(a: f64, b: f64, c: f64, grid: usize) -> Result<XvalReport> {
    let patch = make_surface(SurfaceSpec::Quadric1 { a, b, c })?;
    let mut g_chk = CheckAccum::new("g", XVAL_TOL, true);
    let mut b_chk = CheckAccum::new("b", XVAL_TOL, true);
    let mut n_chk = CheckAccum::new("gauss-map", XVAL_TOL, true);
    let mut lap_chk = CheckAccum::new("gauss-laplacian[closed]", XVAL_TOL, true);
    let mut op_corr = CheckAccum::new("operator[corrected]", XVAL_TOL, true);
    let mut op_tab = CheckAccum::new("operator[tabulated]", XVAL_TOL, false);
    let field = ScalarField::from_jet_fn("uv2", |u, v| Ok(u * v * v + u));

    for (u, v) in grid_points(&patch, grid) {
        let closed = quadric1_with_patch(&patch, a, b, c, u, v)?;
        let frame = evaluate_frame(&patch, u, v)?;
        for i in 0..2 {
            for j in 0..2 {
                g_chk.push(closed.g[(i, j)], frame.g[(i, j)]);
                b_chk.push(closed.b[(i, j)], frame.b[(i, j)]);
            }
        }
        for i in 0..3 {
            n_chk.push(closed.n[i], frame.n[i]);
        }
        lap_chk.push_signed_vec(
            &Vector3::new(closed.lap_n1, closed.lap_n2, 0.0),
            &Vector3::new(closed.engine_lap_n[0], closed.engine_lap_n[1], 0.0),
        );

        let engine_lap = laplacian_scalar(&patch, FundamentalForm::Second, &field, (u, v))?;
        op_corr.push_signed(
            quadric1_operator_corrected(a, b, c, &field, (u, v))?,
            engine_lap,
        );
        op_tab.push_signed(
            quadric1_operator_tabulated(a, b, c, &field, (u, v))?,
            engine_lap,
        );
    }

    let checks: Vec<QuantityCheck> = vec![
        g_chk.finish(),
        b_chk.finish(),
        n_chk.finish(),
        lap_chk.finish(),
        op_corr.finish(),
        op_tab.finish(),
    ];
    let pass = checks.iter().filter(|c| c.gating).all(|c| c.pass);
    Ok(XvalReport {
        pipeline: "quadric1".into(),
        surface: patch.name().to_string(),
        grid,
        checks,
        pass,
    })
}

/// Cross-validates the second-kind quadric pipeline on a grid.
pub fn xval_quadric2(a: f64, b: f64, grid: usize) -> Result<XvalReport> {
    let patch = make_surface(SurfaceSpec::Quadric2 { a, b })?;
    let mut g_chk = CheckAccum::new("g", XVAL_TOL, true);
    let mut b_chk = CheckAccum::new("b", XVAL_TOL, true);
    let mut e_chk = CheckAccum::new("e", XVAL_TOL, true);
    let mut lap_chk = CheckAccum::new("coordinate-laplacians[closed]", XVAL_TOL, true);
    let mut op_chk = CheckAccum::new("operator", XVAL_TOL, true);
    let field = ScalarField::from_jet_fn("suv", |u, v| Ok(u.sin() * v + u * u));

    for (u, v) in grid_points(&patch, grid) {
        let closed = quadric2_with_patch(&patch, a, b, u, v)?;
        let frame = evaluate_frame(&patch, u, v)?;
        for i in 0..2 {
            for j in 0..2 {
                g_chk.push(closed.g[(i, j)], frame.g[(i, j)]);
                b_chk.push(closed.b[(i, j)], frame.b[(i, j)]);
                e_chk.push(closed.e[(i, j)], frame.e[(i, j)]);
            }
        }
        lap_chk.push_signed_vec(
            &Vector3::new(closed.lap_u, closed.lap_v, 0.0),
            &Vector3::new(closed.engine_lap_x[0], closed.engine_lap_x[1], 0.0),
        );
        let engine_lap = laplacian_scalar(&patch, FundamentalForm::Third, &field, (u, v))?;
        op_chk.push_signed(quadric2_operator(a, b, &field, (u, v))?, engine_lap);
    }

    let checks: Vec<QuantityCheck> = vec![
        g_chk.finish(),
        b_chk.finish(),
        e_chk.finish(),
        lap_chk.finish(),
        op_chk.finish(),
    ];
    let pass = checks.iter().filter(|c| c.gating).all(|c| c.pass);
    Ok(XvalReport {
        pipeline: "quadric2".into(),
        surface: patch.name().to_string(),
        grid,
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use rand::{Rng, SeedableRng};

    fn helicoid_pair() -> CurvePair {
        CurvePair::helicoid(1.0, 0.0).unwrap()
    }

    #[test]
    fn helicoid_scalars() {
        let pair = helicoid_pair();
        for &(s, t) in &[(0.0, 1.0), (0.7, -0.9)] {
            let sc = ruled_scalars(&pair, s, t).unwrap();
            assert!((sc.k - 1.0).abs() < 1e-12);
            assert!(sc.l.abs() < 1e-12);
            assert!(sc.m.abs() < 1e-12);
            assert!(sc.n.abs() < 1e-12);
            assert!(sc.r.abs() < 1e-12);
            assert!((sc.a - 1.0).abs() < 1e-12);
            assert!((sc.q - (t * t + 1.0)).abs() < 1e-12);
            assert!(sc.p.abs() < 1e-12);
        }
        // K = -A^2/q^2 at t = 1
        let sc = ruled_scalars(&pair, 0.3, 1.0).unwrap();
        assert!((-sc.a * sc.a / (sc.q * sc.q) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn helicoid_f_polynomials() {
        let pair = helicoid_pair();
        let polys = f_polynomials(&pair, 0.4).unwrap();
        // tabulated f4 = 2t^3 + 2t and f2 = 2t^2 + 2 at k = 1, l = 0
        for t in [0.0, 0.5, 1.0, -1.3] {
            assert!((eval_poly(&polys.tabulated[3], t) - (2.0 * t * t * t + 2.0 * t)).abs() < 1e-12);
            assert!((eval_poly(&polys.tabulated[1], t) - (2.0 * t * t + 2.0)).abs() < 1e-12);
            // corrected f4 agrees with tabulated on this pair; f2 is opposite in sign
            assert!(
                (eval_poly(&polys.corrected[3], t) - eval_poly(&polys.tabulated[3], t)).abs()
                    < 1e-12
            );
            assert!(
                (eval_poly(&polys.corrected[1], t) + eval_poly(&polys.tabulated[1], t)).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn helicoid_laplacian_routes() {
        let pair = helicoid_pair();
        let lap = ruled_laplacian_gauss_map(&pair, 0.0, 1.0).unwrap();
        let expect = Vector3::new(-1.0, 0.0, 0.0);
        assert!((lap.engine - expect).norm() < 1e-9, "engine {:?}", lap.engine);
        // the tabulated operator lands on the opposite sign
        assert!((lap.operator_direct + expect).norm() < 1e-9);
        assert_eq!(lap.operator_sign, -1.0);
        // corrected assembly matches the engine; on the helicoid pair the
        // tabulated assembly does too (f1 = f3 = 0 and Q' = 0 hide the defects)
        assert!((lap.assembled_corrected - lap.engine).norm() < 1e-10);
        assert!((lap.assembled_tabulated - lap.engine).norm() < 1e-10);
    }

    fn random_pair(seed: u64) -> CurvePair {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = rng.random_range(-0.6..0.6);
        let a0 = rng.random_range(-0.8..0.8);
        let b0 = rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let axis_angle = nalgebra::Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize()
            * angle;
        let rot = nalgebra::Rotation3::new(axis_angle);
        CurvePair::circle_pair(format!("random({seed})"), h, a0, b0, *rot.matrix()).unwrap()
    }

    #[test]
    fn corrected_assembly_matches_engine_on_random_pairs() {
        for seed in 0..4 {
            let pair = random_pair(seed);
            let patch = pair.ruled_patch((-1.5, 1.5)).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100 + seed);
            for _ in 0..6 {
                let s = rng.random_range(-1.2..1.2);
                let t = rng.random_range(-1.2..1.2);
                let lap = ruled_laplacian_with_patch(&pair, &patch, s, t).unwrap();
                let scale = 1.0 + lap.engine.norm();
                assert!(
                    (lap.assembled_corrected - lap.engine).norm() / scale < 1e-8,
                    "pair {seed} at ({s}, {t}): corrected {:?} vs engine {:?}",
                    lap.assembled_corrected,
                    lap.engine
                );
                assert!(
                    (lap.operator_direct + lap.engine).norm() / scale < 1e-8,
                    "operator route is the engine negated"
                );
            }
        }
    }

    #[test]
    fn tabulated_f_defects_visible_on_general_pairs() {
        // on pairs with l != 0 or m != 0 the tabulated f1/f3 disagree with the
        // corrected rederivation
        let pair = random_pair(11);
        let lap = ruled_laplacian_gauss_map(&pair, 0.3, 0.8).unwrap();
        assert!(
            lap.terms[0].abs_diff > 1e-6 || lap.terms[2].abs_diff > 1e-6,
            "expected visible f1/f3 discrepancies, got {:?}",
            lap.terms
        );
    }

    #[test]
    fn eq8_curvature_against_engine_on_five_pairs() {
        let mut pairs = vec![helicoid_pair()];
        for seed in 0..4 {
            pairs.push(random_pair(seed));
        }
        for pair in &pairs {
            let patch = pair.ruled_patch((-1.5, 1.5)).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            for _ in 0..8 {
                let s = rng.random_range(-1.2..1.2);
                let t = rng.random_range(-1.2..1.2);
                let sc = ruled_scalars(pair, s, t).unwrap();
                let frame = evaluate_frame(&patch, s, t).unwrap();
                let k_closed = -sc.a * sc.a / (sc.q * sc.q);
                assert!(
                    (k_closed - frame.gauss_curvature).abs() < 1e-10,
                    "{}: K mismatch at ({s}, {t})",
                    pair.name()
                );
            }
        }
    }

    #[test]
    fn quadric1_sphere_case() {
        let closed = quadric1_pipeline(-1.0, -1.0, 1.0, 0.3, 0.2).unwrap();
        assert!((closed.phi - 1.0).abs() < 1e-14);
        // n = (u, v, sqrt(omega)) and lap n1 = -2 n1
        assert!((closed.n[0] - 0.3).abs() < 1e-14);
        assert!((closed.lap_n1 - (-2.0 * 0.3)).abs() < 1e-12);
        assert!((closed.engine_lap_n - Vector3::new(-0.6, -0.4, -2.0 * closed.n[2])).norm() < 1e-10);
        assert_eq!(closed.operator_sign, 1.0);
    }

    #[test]
    fn quadric1_odd_symmetry() {
        let closed = quadric1_pipeline(1.0, 1.0, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(closed.lap_n2, 0.0);
    }

    #[test]
    fn quadric1_closed_matches_engine() {
        let closed = quadric1_pipeline(-1.0, -1.0, 1.0, 0.3, 0.2).unwrap();
        assert!((closed.lap_n1 - closed.engine_lap_n[0]).abs() < 1e-9);
        assert!((closed.lap_n2 - closed.engine_lap_n[1]).abs() < 1e-9);
        let closed = quadric1_pipeline(2.0, 3.0, 1.0, 0.25, -0.4).unwrap();
        assert!((closed.lap_n1 - closed.engine_lap_n[0]).abs() < 1e-8 * (1.0 + closed.engine_lap_n[0].abs()));
        assert!((closed.lap_n2 - closed.engine_lap_n[1]).abs() < 1e-8 * (1.0 + closed.engine_lap_n[1].abs()));
    }

    #[test]
    fn quadric2_closed_values() {
        let closed = quadric2_pipeline(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!((closed.lap_u - (-4.0)).abs() < 1e-14); // -2*1*g, g = 2
        let closed = quadric2_pipeline(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(closed.lap_u, 0.0);
        assert_eq!(closed.lap_v, 0.0);
    }

    #[test]
    fn quadric2_printed_third_form_matches_jets() {
        let closed = quadric2_pipeline(2.0, 3.0, 0.1, 0.2).unwrap();
        let patch = make_surface(SurfaceSpec::Quadric2 { a: 2.0, b: 3.0 }).unwrap();
        let frame = evaluate_frame(&patch, 0.1, 0.2).unwrap();
        assert!((closed.e - frame.e).abs().max() < 1e-10);
    }

    #[test]
    fn xval_reports_pass_with_expected_defects() {
        let rep = xval_quadric2(1.0, 1.0, 6).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = xval_quadric1(2.0, 3.0, 1.0, 6).unwrap();
        assert!(rep.pass, "{rep:?}");
        let tab = rep
            .checks
            .iter()
            .find(|c| c.name == "operator[tabulated]")
            .unwrap();
        assert!(!tab.gating);
        assert!(!tab.pass, "tabulated operator should deviate off-axis");

        let pair = helicoid_pair();
        let rep = xval_ruled(&pair, 6).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn xval_ruled_flags_tabulated_assembly_on_general_pair() {
        let pair = random_pair(3);
        let rep = xval_ruled(&pair, 5).unwrap();
        assert!(rep.pass, "gating checks must hold: {rep:?}");
        let tab = rep
            .checks
            .iter()
            .find(|c| c.name == "gauss-laplacian[tabulated]")
            .unwrap();
        assert!(!tab.pass, "tabulated assembly should mismatch on l != 0 pairs");
    }

    #[test]
    fn rotation_leaves_ruled_scalars_invariant() {
        let rot = nalgebra::Rotation3::new(Vector3::new(0.3, -0.8, 0.5));
        let base = CurvePair::circle_pair("base", 0.4, 0.3, 1.1, Matrix3::identity()).unwrap();
        let rotated = CurvePair::circle_pair("rot", 0.4, 0.3, 1.1, *rot.matrix()).unwrap();
        let s0 = ruled_scalars(&base, 0.6, 0.9).unwrap();
        let s1 = ruled_scalars(&rotated, 0.6, 0.9).unwrap();
        for (x0, x1) in [
            (s0.q, s1.q),
            (s0.p, s1.p),
            (s0.a, s1.a),
            (s0.k, s1.k),
            (s0.l, s1.l),
            (s0.m, s1.m),
            (s0.n, s1.n),
            (s0.r, s1.r),
        ] {
            assert!((x0 - x1).abs() < 1e-10);
        }
    }
}
