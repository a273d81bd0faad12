//! Good and bad unimodal maps of the unit interval.
//!
//! Every builtin family is compiled into two branch shapes, one on `(0, c)`
//! and one on `(c, 1)`. A shape knows its exact value, its first three
//! derivatives, and how distances to either end of its domain are carried to
//! distances from the corresponding end of its image. The last part is what
//! lets orbits be followed through critical points without losing precision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::{Anchor, Offset, Point};

/// Largest accepted residual `|T(x) - y|` of a branch inversion.
pub const INVERSION_TOL: f64 = 1e-12;
/// Bisection step limit.
pub const INVERSION_MAX_ITER: usize = 200;
/// `|DT|` below this counts as a critical point.
pub const DERIV_ZERO_TOL: f64 = 1e-30;
/// Largest Schwarzian value still counted as non-positive.
pub const SCHWARZIAN_TOL: f64 = 1e-9;

const END_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("derivative vanishes at x = {x}")]
    CriticalPoint { x: f64 },
    #[error("y = {y} lies outside the branch range [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
    #[error("inversion of y = {y} left residual {residual:e}")]
    Inversion { y: f64, residual: f64 },
    #[error("invalid map parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Good,
    Bad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchDescriptor {
    pub side: Side,
    pub domain: (f64, f64),
    pub range: (f64, f64),
    pub monotonicity: Monotonicity,
}

/// Parametric families of builtin maps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Two linear full branches.
    Doubling,
    /// `a x (1 - x)`; needs `c = 1/2`.
    Logistic { a: f64 },
    /// `1 - |x - c|^r / len^r` on each side.
    PowerGood { r: f64 },
    /// `c - c |x - c|^l / len^l` on each side; with `flip` the left branch
    /// is `c + (1 - c) |x - c|^l / c^l` instead.
    PowerBad { ell: f64, flip: bool },
    /// Linear fractional branches fixing `{0, c}` and `{c, 1}` with
    /// `|DT(c)| = s`.
    Mobius { s: f64 },
}

impl Family {
    pub fn default_kind(&self) -> MapKind {
        match *self {
            Family::Doubling | Family::PowerGood { .. } => MapKind::Good,
            Family::PowerBad { .. } | Family::Mobius { .. } => MapKind::Bad,
            Family::Logistic { a } => {
                if (a - 4.0).abs() < 1e-12 {
                    MapKind::Good
                } else {
                    MapKind::Bad
                }
            }
        }
    }

    pub fn order(&self) -> f64 {
        match *self {
            Family::Doubling | Family::Mobius { .. } => 1.0,
            Family::Logistic { .. } => 2.0,
            Family::PowerGood { r } => r,
            Family::PowerBad { ell, .. } => ell,
        }
    }
}

/// Where a branch end lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EndImage {
    Zero,
    Crit,
    One,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    /// `base + sigma * scale * w^p`, `w = |x - c| / len`.
    Power {
        base: f64,
        sigma: f64,
        scale: f64,
        p: f64,
    },
    /// Left: `a x / (1 + b x)`. Right: `1 - a w / (1 + b w)`, `w = 1 - x`.
    Mobius { a: f64, b: f64 },
}

#[inline]
fn pw(w: f64, p: f64) -> f64 {
    if p == 1.0 {
        w
    } else if p == 2.0 {
        w * w
    } else if p == 3.0 {
        w * w * w
    } else {
        w.powf(p)
    }
}

fn falling(p: f64, k: u32) -> f64 {
    (0..k).map(|i| p - i as f64).product()
}

/// `1 - (1 - t)^p` without cancellation.
#[inline]
fn one_minus_pow_complement(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        t
    } else if p == 2.0 {
        t * (2.0 - t)
    } else if p == 3.0 {
        let s = 1.0 - t;
        t * (1.0 + s + s * s)
    } else {
        -(p * (-t).ln_1p()).exp_m1()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct BranchImpl {
    side: Side,
    shape: Shape,
    /// Distance from `c` to the far end of the domain.
    len: f64,
    c: f64,
}

impl BranchImpl {
    /// Distance from the critical end, `|x - c|`.
    #[inline]
    fn w_of(&self, x: f64) -> f64 {
        match self.side {
            Side::Left => (self.c - x) / self.len,
            Side::Right => (x - self.c) / self.len,
        }
    }

    /// `d w / d x`
    #[inline]
    fn kappa(&self) -> f64 {
        match self.side {
            Side::Left => -1.0 / self.len,
            Side::Right => 1.0 / self.len,
        }
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        match self.shape {
            Shape::Power {
                base,
                sigma,
                scale,
                p,
            } => base + sigma * scale * pw(self.w_of(x).max(0.0), p),
            Shape::Mobius { a, b } => match self.side {
                Side::Left => a * x / (1.0 + b * x),
                Side::Right => {
                    let w = 1.0 - x;
                    1.0 - a * w / (1.0 + b * w)
                }
            },
        }
    }

    fn eval3(&self, x: f64) -> [f64; 4] {
        match self.shape {
            Shape::Power {
                base,
                sigma,
                scale,
                p,
            } => {
                let w = self.w_of(x).max(0.0);
                let k = self.kappa();
                let mut out = [base + sigma * scale * pw(w, p), 0.0, 0.0, 0.0];
                for (j, slot) in out.iter_mut().enumerate().skip(1) {
                    let f = falling(p, j as u32);
                    if f != 0.0 {
                        *slot = sigma * scale * f * w.powf(p - j as f64) * k.powi(j as i32);
                    }
                }
                out
            }
            Shape::Mobius { a, b } => {
                let (w, sign) = match self.side {
                    Side::Left => (x, 1.0),
                    Side::Right => (1.0 - x, -1.0),
                };
                let q = 1.0 + b * w;
                let g = a * w / q;
                let g1 = a / (q * q);
                let g2 = -2.0 * a * b / (q * q * q);
                let g3 = 6.0 * a * b * b / (q * q * q * q);
                match self.side {
                    Side::Left => [g, g1, g2, g3],
                    // T = 1 - g(1 - x)
                    Side::Right => [1.0 - g, g1, sign * g2, g3],
                }
            }
        }
    }

    fn crit_end_value(&self) -> f64 {
        match self.shape {
            Shape::Power { base, .. } => base,
            Shape::Mobius { .. } => self.c,
        }
    }

    fn far_end_value(&self) -> f64 {
        match self.shape {
            Shape::Power {
                base, sigma, scale, ..
            } => base + sigma * scale,
            Shape::Mobius { .. } => match self.side {
                Side::Left => 0.0,
                Side::Right => 1.0,
            },
        }
    }

    /// Sign of the image displacement away from the crit-end value.
    fn crit_end_dir(&self) -> f64 {
        match self.shape {
            Shape::Power { sigma, .. } => sigma,
            Shape::Mobius { .. } => match self.side {
                Side::Left => -1.0,
                Side::Right => 1.0,
            },
        }
    }

    fn far_end_dir(&self) -> f64 {
        match self.shape {
            Shape::Power { sigma, .. } => -sigma,
            Shape::Mobius { .. } => match self.side {
                Side::Left => 1.0,
                Side::Right => -1.0,
            },
        }
    }

    /// Image distance from the crit-end value for a point at distance `v`
    /// from `c`.
    #[inline]
    fn from_crit_end(&self, v: Offset) -> Offset {
        let len = self.len;
        match self.shape {
            Shape::Power { scale, p, .. } => {
                v.map_germ(|v| scale * pw(v / len, p), scale / len.powf(p), p)
            }
            Shape::Mobius { a, b } => v.map_germ(|v| v / (1.0 + b * (len - v)), 1.0 / a, 1.0),
        }
    }

    /// Image distance from the far-end value for a point at distance `u`
    /// from the far end of the domain.
    #[inline]
    fn from_far_end(&self, u: Offset) -> Offset {
        let len = self.len;
        match self.shape {
            Shape::Power { scale, p, .. } => u.map_germ(
                |u| scale * one_minus_pow_complement(u / len, p),
                scale * p / len,
                1.0,
            ),
            Shape::Mobius { a, b } => u.map_germ(|u| a * u / (1.0 + b * u), a, 1.0),
        }
    }

    fn ln_abs_deriv_crit_end(&self, v: Offset) -> f64 {
        match self.shape {
            Shape::Power { scale, p, .. } => {
                let lead = (scale * p / self.len).ln();
                if p == 1.0 {
                    lead
                } else {
                    lead + (p - 1.0) * (v.ln() - self.len.ln())
                }
            }
            Shape::Mobius { a, b } => {
                let q = 1.0 + b * (self.len - v.value());
                (a / (q * q)).ln()
            }
        }
    }

    fn ln_abs_deriv_far_end(&self, u: Offset) -> f64 {
        match self.shape {
            Shape::Power { scale, p, .. } => {
                let lead = (scale * p / self.len).ln();
                lead + (p - 1.0) * (-u.value() / self.len).ln_1p()
            }
            Shape::Mobius { a, b } => {
                let q = 1.0 + b * u.value();
                (a / (q * q)).ln()
            }
        }
    }
}

/// One interval map together with its critical data.
#[derive(Clone, Debug, PartialEq)]
pub struct MapDescriptor {
    pub name: String,
    pub family: Family,
    pub kind: MapKind,
    pub c: f64,
    pub order: f64,
    pub env_k: f64,
    pub env_m: f64,
    branches: [BranchImpl; 2],
    crit_value: f64,
    /// `[left crit end, left far end, right crit end, right far end]`
    ends: Option<[EndImage; 4]>,
}

fn classify_end(v: f64, c: f64) -> Option<EndImage> {
    if v.abs() < END_TOL {
        Some(EndImage::Zero)
    } else if (v - 1.0).abs() < END_TOL {
        Some(EndImage::One)
    } else if (v - c).abs() < END_TOL {
        Some(EndImage::Crit)
    } else {
        None
    }
}

impl MapDescriptor {
    /// Builds a map from a family with analytic or fitted envelope
    /// constants and the family's natural kind.
    pub fn new(name: &str, family: Family, c: f64) -> Result<MapDescriptor, KernelError> {
        if !(c > 0.0 && c < 1.0) {
            return Err(KernelError::InvalidParameter(format!("c = {c} not in (0,1)")));
        }
        let left = |shape| BranchImpl {
            side: Side::Left,
            shape,
            len: c,
            c,
        };
        let right = |shape| BranchImpl {
            side: Side::Right,
            shape,
            len: 1.0 - c,
            c,
        };
        let power = |base, sigma, scale, p| Shape::Power {
            base,
            sigma,
            scale,
            p,
        };
        let branches = match family {
            Family::Doubling => [left(power(1.0, -1.0, 1.0, 1.0)), right(power(0.0, 1.0, 1.0, 1.0))],
            Family::Logistic { a } => {
                if c != 0.5 {
                    return Err(KernelError::InvalidParameter(
                        "the logistic family needs c = 0.5".into(),
                    ));
                }
                if !(a > 0.0 && a <= 4.0) {
                    return Err(KernelError::InvalidParameter(format!("a = {a} not in (0,4]")));
                }
                let s = power(a / 4.0, -1.0, a / 4.0, 2.0);
                [left(s), right(s)]
            }
            Family::PowerGood { r } => {
                if !(r >= 1.0) {
                    return Err(KernelError::InvalidParameter(format!("r = {r} < 1")));
                }
                let s = power(1.0, -1.0, 1.0, r);
                [left(s), right(s)]
            }
            Family::PowerBad { ell, flip } => {
                if !(ell > 1.0) {
                    return Err(KernelError::InvalidParameter(format!("ell = {ell} <= 1")));
                }
                let l = if flip {
                    power(c, 1.0, 1.0 - c, ell)
                } else {
                    power(c, -1.0, c, ell)
                };
                [left(l), right(power(c, -1.0, c, ell))]
            }
            Family::Mobius { s } => {
                if !(s > 0.0 && s < 1.0) {
                    return Err(KernelError::InvalidParameter(format!("s = {s} not in (0,1)")));
                }
                let a = 1.0 / s;
                [
                    left(Shape::Mobius { a, b: (a - 1.0) / c }),
                    right(Shape::Mobius {
                        a,
                        b: (a - 1.0) / (1.0 - c),
                    }),
                ]
            }
        };
        let crit_value = match family {
            Family::Doubling => 0.0,
            _ => branches[0].crit_end_value(),
        };
        let ends = [
            classify_end(branches[0].crit_end_value(), c),
            classify_end(branches[0].far_end_value(), c),
            classify_end(branches[1].crit_end_value(), c),
            classify_end(branches[1].far_end_value(), c),
        ];
        let ends = if ends.iter().all(Option::is_some) {
            Some(ends.map(Option::unwrap))
        } else {
            None
        };
        let order = family.order();
        let mut map = MapDescriptor {
            name: name.to_string(),
            family,
            kind: family.default_kind(),
            c,
            order,
            env_k: 0.0,
            env_m: 0.0,
            branches,
            crit_value,
            ends,
        };
        let (k, m) = match family {
            Family::Mobius { .. } => fit_envelope(&map, 4097),
            _ => {
                // |DT| = A |x - c|^(p - 1) exactly, A = scale p / len^p
                let coef = |b: &BranchImpl| match b.shape {
                    Shape::Power { scale, p, .. } => scale * p / b.len.powf(p),
                    Shape::Mobius { .. } => unreachable!(),
                };
                let (a0, a1) = (coef(&branches[0]), coef(&branches[1]));
                (
                    0.99 * a0.min(a1).min(1.0),
                    a0.max(a1).max(order) + 0.01,
                )
            }
        };
        map.env_k = k;
        map.env_m = m;
        Ok(map)
    }

    pub fn with_kind(mut self, kind: MapKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_envelope(mut self, env_k: f64, env_m: f64) -> Self {
        self.env_k = env_k;
        self.env_m = env_m;
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// `x -> 2x mod 1`
    pub fn doubling() -> Self {
        Self::new("doubling", Family::Doubling, 0.5).unwrap()
    }

    /// `4x(1 - x)`
    pub fn logistic4() -> Self {
        Self::new("T4", Family::Logistic { a: 4.0 }, 0.5).unwrap()
    }

    /// `2x(1 - x)`
    pub fn logistic2() -> Self {
        Self::new("T2", Family::Logistic { a: 2.0 }, 0.5).unwrap()
    }

    /// `1/2 - 4(x - 1/2)^3`
    pub fn cubic() -> Self {
        Self::new(
            "cubic",
            Family::PowerBad {
                ell: 3.0,
                flip: true,
            },
            0.5,
        )
        .unwrap()
    }

    pub fn power_good(r: f64) -> Result<Self, KernelError> {
        Self::new(&format!("G{r}"), Family::PowerGood { r }, 0.5)
    }

    pub fn power_bad(ell: f64) -> Result<Self, KernelError> {
        Self::new(&format!("B{ell}"), Family::PowerBad { ell, flip: false }, 0.5)
    }

    pub fn mobius(s: f64) -> Result<Self, KernelError> {
        Self::new(&format!("mobius{s}"), Family::Mobius { s }, 0.5)
    }

    /// Looks up a parameter-free builtin by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "doubling" => Some(Self::doubling()),
            "T4" | "logistic4" => Some(Self::logistic4()),
            "T2" | "logistic2" => Some(Self::logistic2()),
            "cubic" => Some(Self::cubic()),
            _ => Self::builtin_catalog().into_iter().find(|m| m.name == name),
        }
    }

    /// Representative members of every builtin family.
    pub fn builtin_catalog() -> Vec<Self> {
        vec![
            Self::doubling(),
            Self::logistic4(),
            Self::power_good(1.0).unwrap(),
            Self::power_good(3.0).unwrap(),
            Self::logistic2(),
            Self::cubic(),
            Self::power_bad(2.5).unwrap(),
            Self::mobius(0.5).unwrap(),
        ]
    }

    pub fn branch(&self, side: Side) -> BranchDescriptor {
        let b = &self.branches[side.index()];
        let domain = match side {
            Side::Left => (0.0, self.c),
            Side::Right => (self.c, 1.0),
        };
        let (y0, y1) = (b.eval(domain.0), b.eval(domain.1));
        BranchDescriptor {
            side,
            domain,
            range: (y0.min(y1), y0.max(y1)),
            monotonicity: if y1 > y0 {
                Monotonicity::Increasing
            } else {
                Monotonicity::Decreasing
            },
        }
    }

    pub fn branches(&self) -> [BranchDescriptor; 2] {
        [self.branch(Side::Left), self.branch(Side::Right)]
    }

    /// Value of the map at its critical point.
    pub fn crit_value(&self) -> f64 {
        self.crit_value
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.c {
            self.branches[0].eval(x)
        } else if x > self.c {
            self.branches[1].eval(x)
        } else {
            self.crit_value
        }
        .clamp(0.0, 1.0)
    }

    /// `[T, DT, D^2 T, D^3 T]` at `x`; at `c` the right-hand limits are
    /// used for the derivatives.
    pub fn eval3(&self, x: f64) -> [f64; 4] {
        let mut out = if x < self.c {
            self.branches[0].eval3(x)
        } else {
            self.branches[1].eval3(x)
        };
        if x == self.c {
            out[0] = self.crit_value;
        }
        out
    }

    /// Derivative of order 1, 2 or 3.
    pub fn deriv(&self, x: f64, order: usize) -> f64 {
        assert!((1..=3).contains(&order), "derivative order must be 1, 2 or 3");
        self.eval3(x)[order]
    }

    pub fn schwarzian(&self, x: f64) -> Result<f64, KernelError> {
        let [_, d1, d2, d3] = self.eval3(x);
        if d1.abs() < DERIV_ZERO_TOL {
            return Err(KernelError::CriticalPoint { x });
        }
        let q = d2 / d1;
        Ok(d3 / d1 - 1.5 * q * q)
    }

    /// Schwarzian of `self ∘ inner` at `x` computed twice: from the
    /// derivatives of the composition, and as `S_f(g x) g'(x)^2 + S_g(x)`.
    pub fn schwarzian_after(&self, inner: &MapDescriptor, x: f64) -> Result<(f64, f64), KernelError> {
        let [_, g1, g2, g3] = inner.eval3(x);
        let y = inner.eval(x);
        let [_, f1, f2, f3] = self.eval3(y);
        let d1 = f1 * g1;
        if d1.abs() < DERIV_ZERO_TOL {
            return Err(KernelError::CriticalPoint { x });
        }
        let d2 = f2 * g1 * g1 + f1 * g2;
        let d3 = f3 * g1 * g1 * g1 + 3.0 * f2 * g1 * g2 + f1 * g3;
        let q = d2 / d1;
        let direct = d3 / d1 - 1.5 * q * q;
        let identity = self.schwarzian(y)? * g1 * g1 + inner.schwarzian(x)?;
        Ok((direct, identity))
    }

    /// Preimage of `y` on one branch by bisection.
    pub fn branch_inverse(&self, side: Side, y: f64) -> Result<f64, KernelError> {
        let d = self.branch(side);
        let (lo, hi) = d.range;
        if !(y >= lo - END_TOL && y <= hi + END_TOL) {
            return Err(KernelError::OutOfRange { y, lo, hi });
        }
        let b = &self.branches[side.index()];
        // the crit end is flat for orders above one, so snap exact end values
        if y == b.crit_end_value() {
            return Ok(self.c);
        }
        if y == b.far_end_value() {
            return Ok(match side {
                Side::Left => 0.0,
                Side::Right => 1.0,
            });
        }
        let inc = d.monotonicity == Monotonicity::Increasing;
        let (mut a, mut z) = d.domain;
        for _ in 0..INVERSION_MAX_ITER {
            let m = 0.5 * (a + z);
            if m <= a || m >= z {
                break;
            }
            if (b.eval(m) < y) == inc {
                a = m;
            } else {
                z = m;
            }
        }
        let (ra, rz) = ((b.eval(a) - y).abs(), (b.eval(z) - y).abs());
        let (x, residual) = if ra <= rz { (a, ra) } else { (z, rz) };
        if residual > INVERSION_TOL {
            return Err(KernelError::Inversion { y, residual });
        }
        Ok(x)
    }

    /// Applies the map to a high dynamic range point.
    #[inline]
    pub fn step_point(&self, p: Point) -> Point {
        let c = self.c;
        let Some(ends) = self.ends else {
            return Point::from_x(self.eval(p.x(c)), c);
        };
        let (end, dir, d) = match p.anchor {
            Anchor::Zero => {
                let b = &self.branches[0];
                (ends[1], b.far_end_dir(), b.from_far_end(p.offset))
            }
            Anchor::One => {
                let b = &self.branches[1];
                (ends[3], b.far_end_dir(), b.from_far_end(p.offset))
            }
            Anchor::CritLeft | Anchor::CritRight if p.offset.is_zero() => {
                return Point::from_x(self.crit_value, c);
            }
            Anchor::CritLeft => {
                let b = &self.branches[0];
                (ends[0], b.crit_end_dir(), b.from_crit_end(p.offset))
            }
            Anchor::CritRight => {
                let b = &self.branches[1];
                (ends[2], b.crit_end_dir(), b.from_crit_end(p.offset))
            }
        };
        let anchor = match end {
            EndImage::Zero => Anchor::Zero,
            EndImage::One => Anchor::One,
            EndImage::Crit if dir < 0.0 => Anchor::CritLeft,
            EndImage::Crit => Anchor::CritRight,
        };
        Point { anchor, offset: d }.normalized(c)
    }

    /// `ln |DT|` at a high dynamic range point.
    pub fn ln_abs_deriv_point(&self, p: Point) -> f64 {
        match p.anchor {
            Anchor::Zero => self.branches[0].ln_abs_deriv_far_end(p.offset),
            Anchor::One => self.branches[1].ln_abs_deriv_far_end(p.offset),
            Anchor::CritLeft if !p.offset.is_zero() => {
                self.branches[0].ln_abs_deriv_crit_end(p.offset)
            }
            Anchor::CritRight if !p.offset.is_zero() => {
                self.branches[1].ln_abs_deriv_crit_end(p.offset)
            }
            _ => self.deriv(self.c, 1).abs().ln(),
        }
    }

    pub fn validate(&self, grid_points: usize) -> ValidationReport {
        validate_map(self, grid_points)
    }
}

/// Envelope constants from a grid sweep, shrunk and inflated by 1%.
pub fn fit_envelope(map: &MapDescriptor, grid_points: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..grid_points {
        let x = i as f64 / (grid_points - 1) as f64;
        let h = (x - map.c).abs();
        if h == 0.0 && map.order > 1.0 {
            continue;
        }
        let ratio = map.deriv(x, 1).abs() / h.powf(map.order - 1.0);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    ((0.99 * lo).min(0.99), (1.01 * hi).max(map.order + 0.01))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Parameters,
    BranchRanges,
    Monotonicity,
    Envelope,
    Schwarzian,
    EndpointExpansion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub passed: bool,
    /// Worst grid point, when the check is pointwise.
    pub witness: Option<f64>,
    /// Positive when satisfied with room to spare.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub map: String,
    pub grid_points: usize,
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, condition: Condition) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }
}

fn check(condition: Condition, margin: f64, witness: Option<f64>) -> ConditionCheck {
    ConditionCheck {
        condition,
        passed: margin >= 0.0,
        witness,
        margin,
    }
}

/// Checks the class conditions on a uniform grid of `grid_points` points.
pub fn validate_map(map: &MapDescriptor, grid_points: usize) -> ValidationReport {
    let n = grid_points.max(64);
    let c = map.c;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut checks = Vec::new();

    let order_ok = match map.kind {
        MapKind::Good => map.order >= 1.0,
        MapKind::Bad => map.order >= 1.0,
    };
    let param_margin = [
        c,
        1.0 - c,
        map.env_k,
        1.0 - map.env_k,
        map.env_m - map.order,
        if order_ok { 1.0 } else { -1.0 },
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let mut pc = check(Condition::Parameters, param_margin, None);
    pc.passed = param_margin > 0.0;
    checks.push(pc);

    // branch end images
    let l = &map.branches[0];
    let r = &map.branches[1];
    let dev = match map.kind {
        MapKind::Good => {
            let in01 = |v: f64| v.abs().min((v - 1.0).abs());
            let full = |b: &BranchImpl| {
                let (a, z) = (b.crit_end_value(), b.far_end_value());
                in01(a).max(in01(z)).max(1.0 - (a - z).abs())
            };
            full(l).max(full(r)).max(in01(map.crit_value))
        }
        MapKind::Bad => {
            let in01 = |v: f64| v.abs().min((v - 1.0).abs());
            (l.crit_end_value() - c)
                .abs()
                .max((r.crit_end_value() - c).abs())
                .max(in01(l.far_end_value()))
                .max(in01(r.far_end_value()))
                .max((map.crit_value - c).abs())
        }
    };
    checks.push(check(Condition::BranchRanges, END_TOL - dev, None));

    // monotonicity and envelope
    let mut mono_margin = f64::INFINITY;
    let mut mono_witness = None;
    let mut env_margin = f64::INFINITY;
    let mut env_witness = None;
    let mut s_max = f64::NEG_INFINITY;
    let mut s_witness = None;
    let signs = map.branches().map(|b| match b.monotonicity {
        Monotonicity::Increasing => 1.0,
        Monotonicity::Decreasing => -1.0,
    });
    for &x in &grid {
        let [_, d1, _, _] = map.eval3(x);
        let h = (x - c).abs();
        if x > 0.0 && x < 1.0 && h > 1e-9 {
            let sign = if x < c { signs[0] } else { signs[1] };
            let m = sign * d1;
            if m < mono_margin {
                mono_margin = m;
                mono_witness = Some(x);
            }
        }
        let scale = h.powf(map.order - 1.0);
        let lower = map.env_k * scale;
        let upper = map.env_m * scale;
        if upper > 0.0 {
            let a = d1.abs();
            let m = (a * (1.0 + 1e-12) / lower - 1.0).min(1.0 - a / (upper * (1.0 + 1e-12)));
            if m < env_margin {
                env_margin = m;
                env_witness = Some(x);
            }
        }
        if h > 1e-6 {
            if let Ok(s) = map.schwarzian(x) {
                if s > s_max {
                    s_max = s;
                    s_witness = Some(x);
                }
            }
        }
    }
    let mut mc = check(Condition::Monotonicity, mono_margin, mono_witness);
    mc.passed = mono_margin > 0.0;
    checks.push(mc);
    checks.push(check(Condition::Envelope, env_margin, env_witness));
    checks.push(check(Condition::Schwarzian, SCHWARZIAN_TOL - s_max, s_witness));

    let d0 = map.deriv(0.0, 1).abs();
    let d1 = map.deriv(1.0, 1).abs();
    let (m, w) = if d0 <= d1 { (d0 - 1.0, 0.0) } else { (d1 - 1.0, 1.0) };
    let mut ec = check(Condition::EndpointExpansion, m, Some(w));
    ec.passed = m > 0.0;
    checks.push(ec);

    ValidationReport {
        map: map.name.clone(),
        grid_points: n,
        checks,
    }
}
