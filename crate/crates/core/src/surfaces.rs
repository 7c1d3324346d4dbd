//! Surface catalog and the generic parametric-patch abstraction.
//!
//! A [`SurfacePatch`] is an immersion (u, v) → ℝ³ over a rectangular parameter
//! domain, evaluable on jets. Construction runs a probe over a 20×20 grid:
//! every non-excluded probe point must be a regular point of the immersion,
//! and the Gaussian curvature statistics decide whether the patch is flat
//! (K ≡ 0 within the configured floor, e.g. cylinders and planes). Flat
//! patches stay usable for first-form operations; anything involving the
//! second or third form reports a flat-point/singular-form error instead.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::forms::JetFrame;
use crate::jet::{add3, scale3, Jet2, Var};

/// Jet order and curvature floor used when evaluating a patch.
#[derive(Debug, Clone, Copy)]
pub struct EngineSettings {
    /// Truncation order for immersion jets (3 or 4).
    pub jet_order: usize,
    /// Floor on |K| below which a point counts as flat.
    pub k_min: f64,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            jet_order: 3,
            k_min: 1e-8,
        }
    }
}

impl EngineSettings {
    pub fn validate(&self) -> Result<()> {
        if !(3..=4).contains(&self.jet_order) {
            return Err(Error::Config(format!(
                "jet order {} not in 3..=4",
                self.jet_order
            )));
        }
        if !(self.k_min > 0.0 && self.k_min.is_finite()) {
            return Err(Error::Config(format!("k_min {} must be positive", self.k_min)));
        }
        Ok(())
    }
}

/// Rectangular parameter domain.
#[derive(Debug, Clone, Copy)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Domain {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        Domain { u, v }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u.0 && u <= self.u.1 && v >= self.v.0 && v <= self.v.1
    }

    /// Center of cell (i, j) of an m×m subdivision.
    pub fn cell_center(&self, i: usize, j: usize, m: usize) -> (f64, f64) {
        let fu = (i as f64 + 0.5) / m as f64;
        let fv = (j as f64 + 0.5) / m as f64;
        (
            self.u.0 + fu * (self.u.1 - self.u.0),
            self.v.0 + fv * (self.v.1 - self.v.0),
        )
    }

    pub fn cell_size(&self, m: usize) -> (f64, f64) {
        (
            (self.u.1 - self.u.0) / m as f64,
            (self.v.1 - self.v.0) / m as f64,
        )
    }
}

pub type ImmersionFn = Arc<dyn Fn(Jet2, Jet2) -> Result<[Jet2; 3]> + Send + Sync>;
pub type ExclusionFn = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;
pub type CurveFn = Arc<dyn Fn(Jet2) -> Result<[Jet2; 3]> + Send + Sync>;
pub type MongeFn = Arc<dyn Fn(Jet2, Jet2) -> Result<Jet2> + Send + Sync>;

/// Catalog expectation for the second-form Gauss-map relation Δn = Λn,
/// attached where the surface family has a known outcome. `classify` compares
/// it with the fitted verdict and flags disagreements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussRelationExpectation {
    Satisfies,
    Fails,
}

/// A parametric immersion over a rectangular domain, evaluable on jets.
#[derive(Clone)]
pub struct SurfacePatch {
    name: String,
    domain: Domain,
    immersion: ImmersionFn,
    excluded: Vec<ExclusionFn>,
    settings: EngineSettings,
    flat: bool,
    expectation: Option<GaussRelationExpectation>,
}

impl fmt::Debug for SurfacePatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfacePatch")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("flat", &self.flat)
            .finish()
    }
}

impl SurfacePatch {
    pub fn builder(
        name: impl Into<String>,
        domain: Domain,
        immersion: ImmersionFn,
    ) -> PatchBuilder {
        PatchBuilder {
            name: name.into(),
            domain,
            immersion,
            excluded: Vec::new(),
            settings: EngineSettings::default(),
            expectation: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn settings(&self) -> EngineSettings {
        self.settings
    }

    pub fn jet_order(&self) -> usize {
        self.settings.jet_order
    }

    pub fn k_min(&self) -> f64 {
        self.settings.k_min
    }

    /// True when the construction probe found |K| below the floor everywhere:
    /// the patch supports first-form operations only.
    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn gauss_relation_expectation(&self) -> Option<GaussRelationExpectation> {
        self.expectation
    }

    pub fn in_domain(&self, u: f64, v: f64) -> bool {
        self.domain.contains(u, v)
    }

    pub fn is_excluded(&self, u: f64, v: f64) -> bool {
        self.excluded.iter().any(|p| p(u, v))
    }

    /// Inside the domain and outside every excluded zone. Pointwise
    /// regularity and the |K| floor are enforced by frame evaluation.
    pub fn admissible(&self, u: f64, v: f64) -> bool {
        self.in_domain(u, v) && !self.is_excluded(u, v)
    }

    /// Raw jet evaluation of the immersion at the given truncation order.
    pub fn evaluate(&self, u: f64, v: f64, order: usize) -> Result<[Jet2; 3]> {
        let (ju, jv) = Jet2::seed_pair(u, v, order)?;
        (self.immersion)(ju, jv)
    }

    /// Same patch with a constant linear map applied in ambient space
    /// (rotations, scalings). Re-runs the construction probe.
    pub fn transformed(&self, map: Matrix3<f64>, name: impl Into<String>) -> Result<SurfacePatch> {
        let inner = self.immersion.clone();
        let immersion: ImmersionFn = Arc::new(move |u, v| {
            let x = inner(u, v)?;
            let mut out = [x[0] * 0.0; 3];
            for (i, o) in out.iter_mut().enumerate() {
                *o = x[0] * map[(i, 0)] + x[1] * map[(i, 1)] + x[2] * map[(i, 2)];
            }
            Ok(out)
        });
        let mut builder = SurfacePatch::builder(name, self.domain, immersion)
            .with_settings(self.settings);
        for e in &self.excluded {
            builder = builder.exclude_arc(e.clone());
        }
        if let Some(exp) = self.expectation {
            builder = builder.expect_gauss_relation(exp);
        }
        builder.build()
    }

    /// Same patch with different engine settings; re-probes.
    pub fn with_settings(&self, settings: EngineSettings) -> Result<SurfacePatch> {
        let mut builder =
            SurfacePatch::builder(self.name.clone(), self.domain, self.immersion.clone())
                .with_settings(settings);
        for e in &self.excluded {
            builder = builder.exclude_arc(e.clone());
        }
        if let Some(exp) = self.expectation {
            builder = builder.expect_gauss_relation(exp);
        }
        builder.build()
    }
}

pub struct PatchBuilder {
    name: String,
    domain: Domain,
    immersion: ImmersionFn,
    excluded: Vec<ExclusionFn>,
    settings: EngineSettings,
    expectation: Option<GaussRelationExpectation>,
}

impl PatchBuilder {
    pub fn exclude(mut self, pred: impl Fn(f64, f64) -> bool + Send + Sync + 'static) -> Self {
        self.excluded.push(Arc::new(pred));
        self
    }

    fn exclude_arc(mut self, pred: ExclusionFn) -> Self {
        self.excluded.push(pred);
        self
    }

    pub fn with_settings(mut self, settings: EngineSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn expect_gauss_relation(mut self, exp: GaussRelationExpectation) -> Self {
        self.expectation = Some(exp);
        self
    }

    /// Runs the construction probe and finalizes the patch.
    pub fn build(self) -> Result<SurfacePatch> {
        self.settings.validate()?;
        let mut patch = SurfacePatch {
            name: self.name,
            domain: self.domain,
            immersion: self.immersion,
            excluded: self.excluded,
            settings: self.settings,
            flat: false,
            expectation: self.expectation,
        };

        const PROBE: usize = 20;
        let mut probed = 0usize;
        let mut all_flat = true;
        for i in 0..PROBE {
            for j in 0..PROBE {
                let (u, v) = patch.domain.cell_center(i, j, PROBE);
                if patch.is_excluded(u, v) {
                    continue;
                }
                let frame = JetFrame::build(&patch, u, v).map_err(|e| {
                    Error::Construction(format!(
                        "probe failed for '{}' at ({u:.4}, {v:.4}): {e}",
                        patch.name
                    ))
                })?;
                if frame.gauss_curvature().abs() >= patch.settings.k_min {
                    all_flat = false;
                }
                probed += 1;
            }
        }
        if probed == 0 {
            return Err(Error::Construction(format!(
                "no admissible probe points for '{}'",
                patch.name
            )));
        }
        patch.flat = all_flat;
        Ok(patch)
    }
}

/// A directrix/ruling pair (σ, τ) defining a non-cylindrical ruled surface
/// x(s, t) = σ(s) + t·τ(s), with s the arc length along the spherical curve τ.
#[derive(Clone)]
pub struct CurvePair {
    name: String,
    sigma: CurveFn,
    tau: CurveFn,
    s_domain: (f64, f64),
}

impl fmt::Debug for CurvePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvePair")
            .field("name", &self.name)
            .field("s_domain", &self.s_domain)
            .finish()
    }
}

impl CurvePair {
    /// Checks the normalization invariants ⟨τ,τ⟩ = 1, ⟨τ′,τ′⟩ = 1, ⟨σ′,τ⟩ = 0
    /// on a probe grid before accepting the pair.
    pub fn new(
        name: impl Into<String>,
        sigma: CurveFn,
        tau: CurveFn,
        s_domain: (f64, f64),
    ) -> Result<Self> {
        let pair = CurvePair {
            name: name.into(),
            sigma,
            tau,
            s_domain,
        };
        const PROBE: usize = 17;
        const TOL: f64 = 1e-10;
        for i in 0..PROBE {
            let s = s_domain.0 + (i as f64 + 0.5) / PROBE as f64 * (s_domain.1 - s_domain.0);
            let tau = pair.tau_jet(s, 2)?;
            let sigma = pair.sigma_jet(s, 2)?;
            let taup = crate::jet::deriv3(&tau, Var::U);
            let sigp = crate::jet::deriv3(&sigma, Var::U);
            let tt = crate::jet::dot3(&tau, &tau).value();
            let tptp = crate::jet::dot3(&taup, &taup).value();
            let spt = sigp[0].value() * tau[0].value()
                + sigp[1].value() * tau[1].value()
                + sigp[2].value() * tau[2].value();
            if (tt - 1.0).abs() > TOL || (tptp - 1.0).abs() > TOL || spt.abs() > TOL {
                return Err(Error::Construction(format!(
                    "curve pair '{}' violates normalization at s = {s:.4}: \
                     |tau|^2 = {tt}, |tau'|^2 = {tptp}, <sigma',tau> = {spt}",
                    pair.name
                )));
            }
        }
        Ok(pair)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn s_domain(&self) -> (f64, f64) {
        self.s_domain
    }

    /// Directrix jets at arc-length s (s seeded as the first variable).
    pub fn sigma_jet(&self, s: f64, order: usize) -> Result<[Jet2; 3]> {
        let js = Jet2::seed(Var::U, s, order)?;
        (self.sigma)(js)
    }

    /// Ruling-direction jets at arc-length s.
    pub fn tau_jet(&self, s: f64, order: usize) -> Result<[Jet2; 3]> {
        let js = Jet2::seed(Var::U, s, order)?;
        (self.tau)(js)
    }

    /// The canonical helicoid pair σ = l·τ + (0, 0, c·s), τ = (cos s, sin s, 0).
    pub fn helicoid(c: f64, l: f64) -> Result<Self> {
        if c == 0.0 {
            return Err(Error::Construction(
                "helicoid pair requires c != 0".into(),
            ));
        }
        Self::circle_pair(format!("helicoid(c={c},l={l})"), 0.0, l, c, Matrix3::identity())
    }

    /// Pair built from a unit-speed circle on the sphere at height `h`
    /// (|h| < 1; h = 0 is a great circle) with σ′ = a0·τ′ + b0·(τ×τ′), the
    /// whole frame rotated by `rot`. The normalization invariants hold by
    /// construction for any parameter choice, and the ruling invariant is
    /// A = b0 (so b0 must be nonzero).
    pub fn circle_pair(
        name: impl Into<String>,
        h: f64,
        a0: f64,
        b0: f64,
        rot: Matrix3<f64>,
    ) -> Result<Self> {
        if h.abs() >= 1.0 {
            return Err(Error::Construction(format!(
                "circle height {h} must satisfy |h| < 1"
            )));
        }
        if b0 == 0.0 {
            return Err(Error::Construction(
                "circle pair requires b0 != 0 (degenerate ruling otherwise)".into(),
            ));
        }
        let rho = (1.0 - h * h).sqrt();

        let rotate = move |v: [Jet2; 3]| -> [Jet2; 3] {
            let mut out = [v[0] * 0.0; 3];
            for (i, o) in out.iter_mut().enumerate() {
                *o = v[0] * rot[(i, 0)] + v[1] * rot[(i, 1)] + v[2] * rot[(i, 2)];
            }
            out
        };

        let tau: CurveFn = Arc::new(move |s: Jet2| {
            let w = s * (1.0 / rho);
            Ok(rotate([w.cos() * rho, w.sin() * rho, Jet2::constant(h, s.order())?]))
        });
        let sigma: CurveFn = Arc::new(move |s: Jet2| {
            let w = s * (1.0 / rho);
            let tau_val = [w.cos() * rho, w.sin() * rho, Jet2::constant(h, s.order())?];
            // antiderivative of tau x tau' = (-h cos w, -h sin w, rho)
            let anti = [
                w.sin() * (-h * rho),
                w.cos() * (h * rho),
                s * rho,
            ];
            Ok(rotate([
                tau_val[0] * a0 + anti[0] * b0,
                tau_val[1] * a0 + anti[1] * b0,
                tau_val[2] * a0 + anti[2] * b0,
            ]))
        });
        Self::new(name, sigma, tau, (-1.5, 1.5))
    }

    /// Ruled patch x(s, t) = σ(s) + t·τ(s) over `t_range`.
    pub fn ruled_patch(&self, t_range: (f64, f64)) -> Result<SurfacePatch> {
        let sigma = self.sigma.clone();
        let tau = self.tau.clone();
        let immersion: ImmersionFn = Arc::new(move |s, t| {
            let sig = sigma(s)?;
            let ru = tau(s)?;
            Ok(add3(&sig, &scale3(&ru, t)))
        });
        SurfacePatch::builder(
            format!("ruled[{}]", self.name),
            Domain::new(self.s_domain, t_range),
            immersion,
        )
        .build()
    }
}

/// Catalog specification accepted by [`make_surface`].
#[derive(Clone)]
pub enum SurfaceSpec {
    Sphere { r: f64 },
    Helicoid { c: f64, l: f64 },
    Ruled { curves: CurvePair, t_range: (f64, f64) },
    Quadric1 { a: f64, b: f64, c: f64 },
    Quadric2 { a: f64, b: f64 },
    Cylinder { r: f64 },
    Catenoid { c: f64 },
    Torus { rr: f64, r: f64 },
    Monge { name: String, f: MongeFn },
}

impl SurfaceSpec {
    /// Monge patch z = f(u, v) over [-1, 1]².
    pub fn monge(
        name: impl Into<String>,
        f: impl Fn(Jet2, Jet2) -> Result<Jet2> + Send + Sync + 'static,
    ) -> Self {
        SurfaceSpec::Monge {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// The plane z = 0 (a flat Monge patch).
    pub fn plane() -> Self {
        SurfaceSpec::monge("plane", |u, _v| Ok(u * 0.0))
    }
}

/// Builds a catalog surface with default engine settings.
pub fn make_surface(spec: SurfaceSpec) -> Result<SurfacePatch> {
    make_surface_with(spec, EngineSettings::default())
}

/// Builds a catalog surface with explicit engine settings.
pub fn make_surface_with(spec: SurfaceSpec, settings: EngineSettings) -> Result<SurfacePatch> {
    settings.validate()?;
    match spec {
        SurfaceSpec::Sphere { r } => {
            if !(r > 0.0) {
                return Err(Error::Construction(format!("sphere radius {r} must be positive")));
            }
            // geographic chart, poles excluded
            let immersion: ImmersionFn = Arc::new(move |u: Jet2, v: Jet2| {
                let cv = v.cos();
                Ok([
                    u.cos() * cv * r,
                    u.sin() * cv * r,
                    v.sin() * r,
                ])
            });
            let vmax = std::f64::consts::FRAC_PI_2 - 0.35;
            SurfacePatch::builder(
                format!("sphere(r={r})"),
                Domain::new((-std::f64::consts::PI, std::f64::consts::PI), (-vmax, vmax)),
                immersion,
            )
            .exclude(|_, v| v.cos().abs() < 1e-6)
            .with_settings(settings)
            .expect_gauss_relation(GaussRelationExpectation::Satisfies)
            .build()
        }
        SurfaceSpec::Helicoid { c, l } => {
            if c == 0.0 {
                return Err(Error::Construction("helicoid requires c != 0".into()));
            }
            let immersion: ImmersionFn = Arc::new(move |s: Jet2, t: Jet2| {
                let radial = t + l;
                Ok([radial * s.cos(), radial * s.sin(), s * c])
            });
            SurfacePatch::builder(
                format!("helicoid(c={c},l={l})"),
                Domain::new((-std::f64::consts::PI, std::f64::consts::PI), (-1.5, 1.5)),
                immersion,
            )
            .with_settings(settings)
            .expect_gauss_relation(GaussRelationExpectation::Satisfies)
            .build()
        }
        SurfaceSpec::Ruled { curves, t_range } => {
            let patch = curves.ruled_patch(t_range)?;
            patch.with_settings(settings)
        }
        SurfaceSpec::Quadric1 { a, b, c } => {
            if a * b * c == 0.0 {
                return Err(Error::Construction(format!(
                    "quadric of the first kind requires a*b*c != 0 (got a={a}, b={b}, c={c})"
                )));
            }
            let immersion: ImmersionFn = Arc::new(move |u: Jet2, v: Jet2| {
                let omega = u * u * a + v * v * b + c;
                Ok([u, v, omega.sqrt()?])
            });
            // stability margin for sampling; evaluation itself only needs omega > 0
            let expectation = if a == -1.0 && b == -1.0 {
                GaussRelationExpectation::Satisfies
            } else {
                GaussRelationExpectation::Fails
            };
            SurfacePatch::builder(
                format!("quadric1(a={a},b={b},c={c})"),
                Domain::new((-0.7, 0.7), (-0.7, 0.7)),
                immersion,
            )
            .exclude(move |u, v| {
                let omega = a * u * u + b * v * v + c;
                let phi = c + a * (a + 1.0) * u * u + b * (b + 1.0) * v * v;
                omega <= 1e-3 || phi <= 1e-3
            })
            .with_settings(settings)
            .expect_gauss_relation(expectation)
            .build()
        }
        SurfaceSpec::Quadric2 { a, b } => {
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::Construction(format!(
                    "quadric of the second kind requires a > 0, b > 0 (got a={a}, b={b})"
                )));
            }
            let immersion: ImmersionFn = Arc::new(move |u: Jet2, v: Jet2| {
                Ok([u, v, u * u * (a / 2.0) + v * v * (b / 2.0)])
            });
            SurfacePatch::builder(
                format!("quadric2(a={a},b={b})"),
                Domain::new((-1.0, 1.0), (-1.0, 1.0)),
                immersion,
            )
            .with_settings(settings)
            .expect_gauss_relation(GaussRelationExpectation::Fails)
            .build()
        }
        SurfaceSpec::Cylinder { r } => {
            if !(r > 0.0) {
                return Err(Error::Construction(format!(
                    "cylinder radius {r} must be positive"
                )));
            }
            let immersion: ImmersionFn = Arc::new(move |u: Jet2, v: Jet2| {
                Ok([u.cos() * r, u.sin() * r, v])
            });
            SurfacePatch::builder(
                format!("cylinder(r={r})"),
                Domain::new((-std::f64::consts::PI, std::f64::consts::PI), (-1.0, 1.0)),
                immersion,
            )
            .with_settings(settings)
            .build()
        }
        SurfaceSpec::Catenoid { c } => {
            if !(c > 0.0) {
                return Err(Error::Construction(format!(
                    "catenoid parameter {c} must be positive"
                )));
            }
            let immersion: ImmersionFn = Arc::new(move |u: Jet2, v: Jet2| {
                let w = v * (1.0 / c);
                let cosh = (w.exp() + (-w).exp()) * 0.5;
                let radial = cosh * c;
                Ok([radial * u.cos(), radial * u.sin(), v])
            });
            SurfacePatch::builder(
                format!("catenoid(c={c})"),
                Domain::new((-std::f64::consts::PI, std::f64::consts::PI), (-1.0, 1.0)),
                immersion,
            )
            .with_settings(settings)
            .build()
        }
        SurfaceSpec::Torus { rr, r } => {
            if !(r > 0.0 && rr > r) {
                return Err(Error::Construction(format!(
                    "torus requires R > r > 0 (got R={rr}, r={r})"
                )));
            }
            let immersion: ImmersionFn = Arc::new(move |u: Jet2, v: Jet2| {
                let ring = v.cos() * r + rr;
                Ok([ring * u.cos(), ring * u.sin(), v.sin() * r])
            });
            // K changes sign across cos v = 0; keep samples away from the flat circles
            SurfacePatch::builder(
                format!("torus(R={rr},r={r})"),
                Domain::new(
                    (-std::f64::consts::PI, std::f64::consts::PI),
                    (-std::f64::consts::PI, std::f64::consts::PI),
                ),
                immersion,
            )
            .exclude(|_, v| v.cos().abs() < 0.15)
            .with_settings(settings)
            .build()
        }
        SurfaceSpec::Monge { name, f } => {
            let immersion: ImmersionFn = Arc::new(move |u: Jet2, v: Jet2| {
                Ok([u, v, f(u, v)?])
            });
            SurfacePatch::builder(name, Domain::new((-1.0, 1.0), (-1.0, 1.0)), immersion)
                .with_settings(settings)
                .build()
        }
    }
}
