//! Bivariate truncated-Taylor ("jet") arithmetic.
//!
//! A [`Jet2`] carries the Taylor expansion of a scalar quantity f(u, v) around a
//! point, truncated at a configurable total order (seeded at 2..=4). Storage is
//! Taylor-normalized: slot (i, j) holds ∂^{i+j} f / ∂u^i ∂v^j divided by i!·j!,
//! which keeps multiplication a plain Cauchy product. Seeding the two parameters
//! and pushing them through an immersion yields exact partial derivatives of
//! every downstream quantity, so nothing in the geometry pipeline ever touches a
//! finite difference.
//!
//! Derived quantities naturally carry reduced orders: [`Jet2::derivative`] drops
//! the order by one, and products require equal orders (use [`Jet2::truncated`]
//! to align). Univariate curve evaluation reuses the same type with the second
//! variable unseeded.

use crate::error::{Error, Result};

/// Lowest order accepted when seeding a jet.
pub const MIN_ORDER: usize = 2;
/// Highest supported truncation order.
pub const MAX_ORDER: usize = 4;

const CAP: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

const FACT: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// The two surface parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

#[inline]
fn slot(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Truncated bivariate Taylor expansion; the derivative carrier for all geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    order: u8,
    c: [f64; CAP],
}

impl Jet2 {
    fn raw(order: usize) -> Self {
        debug_assert!(order <= MAX_ORDER);
        Jet2 {
            order: order as u8,
            c: [0.0; CAP],
        }
    }

    /// Constant jet: value with all derivatives zero.
    ///
    /// `order` must lie in [`MIN_ORDER`]..=[`MAX_ORDER`].
    pub fn constant(value: f64, order: usize) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
            return Err(Error::Config(format!(
                "jet order {order} outside supported range {MIN_ORDER}..={MAX_ORDER}"
            )));
        }
        let mut jet = Jet2::raw(order);
        jet.c[0] = value;
        Ok(jet)
    }

    /// Seed one of the two variables: constant term `value`, unit first-order
    /// coefficient in the seeded direction, everything else zero.
    pub fn seed(var: Var, value: f64, order: usize) -> Result<Self> {
        let mut jet = Jet2::constant(value, order)?;
        match var {
            Var::U => jet.c[slot(1, 0)] = 1.0,
            Var::V => jet.c[slot(0, 1)] = 1.0,
        }
        Ok(jet)
    }

    /// Seeds for both variables at once.
    pub fn seed_pair(u: f64, v: f64, order: usize) -> Result<(Self, Self)> {
        Ok((Self::seed(Var::U, u, order)?, Self::seed(Var::V, v, order)?))
    }

    /// Truncation order carried by this jet.
    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// Constant term (the value of the quantity at the expansion point).
    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor-normalized coefficient (i, j). Slots beyond the carried order
    /// read as zero.
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i + j <= MAX_ORDER);
        self.c[slot(i, j)]
    }

    /// The partial derivative ∂^{i+j} f / ∂u^i ∂v^j, i.e. the stored
    /// coefficient rescaled by i!·j!.
    pub fn partial(&self, i: usize, j: usize) -> Result<f64> {
        if i + j > self.order() {
            return Err(Error::PartialOutOfOrder {
                i,
                j,
                order: self.order(),
            });
        }
        Ok(self.c[slot(i, j)] * FACT[i] * FACT[j])
    }

    /// Copy truncated to a lower (or equal) order.
    pub fn truncated(&self, order: usize) -> Self {
        debug_assert!(order <= self.order());
        let mut out = Jet2::raw(order);
        for d in 0..=order {
            for j in 0..=d {
                let k = slot(d - j, j);
                out.c[k] = self.c[k];
            }
        }
        out
    }

    /// Jet of the first partial derivative in the given direction; the carried
    /// order drops by one.
    pub fn derivative(&self, var: Var) -> Self {
        debug_assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let order = self.order() - 1;
        let mut out = Jet2::raw(order);
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                out.c[slot(i, j)] = match var {
                    Var::U => self.c[slot(i + 1, j)] * (i + 1) as f64,
                    Var::V => self.c[slot(i, j + 1)] * (j + 1) as f64,
                };
            }
        }
        out
    }

    /// True when every coefficient is finite.
    pub fn is_finite(&self) -> bool {
        self.active_slots().all(|k| self.c[k].is_finite())
    }

    fn active_slots(&self) -> impl Iterator<Item = usize> + '_ {
        let order = self.order();
        (0..=order).flat_map(move |d| (0..=d).map(move |j| slot(d - j, j)))
    }

    #[inline]
    fn check_order(&self, rhs: &Self) {
        assert_eq!(
            self.order, rhs.order,
            "jet order mismatch: {} vs {}",
            self.order, rhs.order
        );
    }

    /// Composes a univariate analytic function onto this jet. `derivs[k]` must
    /// hold f^(k)(value)/k! for k = 0..=order; the expansion is exact through
    /// the carried order because the shifted jet has no constant term.
    fn compose(&self, derivs: &[f64]) -> Self {
        let order = self.order();
        debug_assert_eq!(derivs.len(), order + 1);
        let mut shifted = *self;
        shifted.c[0] = 0.0;
        let mut acc = Jet2::raw(order);
        acc.c[0] = derivs[order];
        for k in (0..order).rev() {
            acc = acc * shifted;
            acc.c[0] += derivs[k];
        }
        acc
    }

    /// Reciprocal. Errors when the constant term vanishes.
    pub fn recip(&self) -> Result<Self> {
        let x0 = self.value();
        if x0 == 0.0 {
            return Err(Error::JetDivisionByZero);
        }
        let order = self.order();
        let mut derivs = [0.0; MAX_ORDER + 1];
        let inv = 1.0 / x0;
        let mut acc = inv;
        for d in derivs.iter_mut().take(order + 1) {
            *d = acc;
            acc *= -inv;
        }
        Ok(self.compose(&derivs[..=order]))
    }

    /// Quotient. Errors when the divisor's constant term vanishes.
    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(*self * rhs.recip()?)
    }

    /// Square root. Errors unless the constant term is strictly positive.
    pub fn sqrt(&self) -> Result<Self> {
        let x0 = self.value();
        if x0 <= 0.0 {
            return Err(Error::JetSqrtDomain(x0));
        }
        let order = self.order();
        let root = x0.sqrt();
        // (sqrt)^(k)(x0)/k! = C(1/2, k) x0^(1/2 - k)
        let mut derivs = [0.0; MAX_ORDER + 1];
        let mut binom = 1.0;
        for (k, d) in derivs.iter_mut().enumerate().take(order + 1) {
            *d = binom * root * x0.powi(-(k as i32));
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.compose(&derivs[..=order]))
    }

    /// Sine.
    pub fn sin(&self) -> Self {
        self.trig(true)
    }

    /// Cosine.
    pub fn cos(&self) -> Self {
        self.trig(false)
    }

    fn trig(&self, sine: bool) -> Self {
        let x0 = self.value();
        let (s, c) = x0.sin_cos();
        let cycle = if sine { [s, c, -s, -c] } else { [c, -s, -c, s] };
        let order = self.order();
        let mut derivs = [0.0; MAX_ORDER + 1];
        for (k, d) in derivs.iter_mut().enumerate().take(order + 1) {
            *d = cycle[k % 4] / FACT[k];
        }
        self.compose(&derivs[..=order])
    }

    /// Exponential.
    pub fn exp(&self) -> Self {
        let e0 = self.value().exp();
        let order = self.order();
        let mut derivs = [0.0; MAX_ORDER + 1];
        for (k, d) in derivs.iter_mut().enumerate().take(order + 1) {
            *d = e0 / FACT[k];
        }
        self.compose(&derivs[..=order])
    }

    /// Integer power. Negative exponents go through [`Jet2::recip`] and share
    /// its zero-constant-term error.
    pub fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Jet2::constant(1.0, self.order()).expect("order already validated");
        let mut base = *self;
        let mut n = n as u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        Ok(acc)
    }
}

impl std::ops::Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        self.check_order(&rhs);
        let mut out = self;
        for k in 0..CAP {
            out.c[k] += rhs.c[k];
        }
        out
    }
}

impl std::ops::Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self.check_order(&rhs);
        let mut out = self;
        for k in 0..CAP {
            out.c[k] -= rhs.c[k];
        }
        out
    }
}

impl std::ops::Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        let mut out = self;
        for c in out.c.iter_mut() {
            *c = -*c;
        }
        out
    }
}

impl std::ops::Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        self.check_order(&rhs);
        let order = self.order();
        let mut out = Jet2::raw(order);
        for d1 in 0..=order {
            for j1 in 0..=d1 {
                let i1 = d1 - j1;
                let a = self.c[slot(i1, j1)];
                if a == 0.0 {
                    continue;
                }
                for d2 in 0..=(order - d1) {
                    for j2 in 0..=d2 {
                        let i2 = d2 - j2;
                        out.c[slot(i1 + i2, j1 + j2)] += a * rhs.c[slot(i2, j2)];
                    }
                }
            }
        }
        out
    }
}

impl std::ops::Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: f64) -> Jet2 {
        let mut out = self;
        out.c[0] += rhs;
        out
    }
}

impl std::ops::Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: f64) -> Jet2 {
        let mut out = self;
        out.c[0] -= rhs;
        out
    }
}

impl std::ops::Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        let mut out = self;
        for c in out.c.iter_mut() {
            *c *= rhs;
        }
        out
    }
}

impl std::ops::Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        rhs + self
    }
}

impl std::ops::Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        -rhs + self
    }
}

impl std::ops::Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        rhs * self
    }
}

/// Dot product of jet-valued 3-vectors.
pub fn dot3(a: &[Jet2; 3], b: &[Jet2; 3]) -> Jet2 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Cross product of jet-valued 3-vectors.
pub fn cross3(a: &[Jet2; 3], b: &[Jet2; 3]) -> [Jet2; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn add3(a: &[Jet2; 3], b: &[Jet2; 3]) -> [Jet2; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: &[Jet2; 3], b: &[Jet2; 3]) -> [Jet2; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(a: &[Jet2; 3], s: Jet2) -> [Jet2; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Componentwise derivative of a jet-valued 3-vector.
pub fn deriv3(a: &[Jet2; 3], var: Var) -> [Jet2; 3] {
    [
        a[0].derivative(var),
        a[1].derivative(var),
        a[2].derivative(var),
    ]
}

pub fn truncate3(a: &[Jet2; 3], order: usize) -> [Jet2; 3] {
    [
        a[0].truncated(order),
        a[1].truncated(order),
        a[2].truncated(order),
    ]
}
