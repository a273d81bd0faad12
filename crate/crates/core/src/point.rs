//! High dynamic range representation of points of `[0, 1]`.
//!
//! Under the bad maps the distance to the critical point is squared (or
//! worse) at every step, so after a handful of iterations it leaves the
//! range of `f64` entirely. A point is therefore stored as one of the three
//! special points `{0, c, 1}` plus a displacement whose magnitude switches to
//! logarithmic form once it drops below [`LINEAR_FLOOR`].

use serde::{Deserialize, Serialize};

/// Magnitudes below this are kept as logarithms.
pub const LINEAR_FLOOR: f64 = 1e-280;

/// Natural logarithm of [`LINEAR_FLOOR`].
pub fn ln_linear_floor() -> f64 {
    LINEAR_FLOOR.ln()
}

/// Non-negative magnitude of a displacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Offset {
    Linear(f64),
    /// Natural logarithm of the magnitude.
    Log(f64),
}

impl Offset {
    pub const ZERO: Offset = Offset::Linear(0.0);

    pub fn from_f64(v: f64) -> Offset {
        let v = v.abs();
        if v == 0.0 || v >= LINEAR_FLOOR {
            Offset::Linear(v)
        } else {
            Offset::Log(v.ln())
        }
    }

    pub fn from_ln(ln: f64) -> Offset {
        if ln == f64::NEG_INFINITY {
            Offset::ZERO
        } else if ln < ln_linear_floor() {
            Offset::Log(ln)
        } else {
            Offset::Linear(ln.exp())
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Offset::Linear(v) if v == 0.0)
    }

    /// Plain value; logarithmic magnitudes flush to zero.
    pub fn value(self) -> f64 {
        match self {
            Offset::Linear(v) => v,
            Offset::Log(_) => 0.0,
        }
    }

    pub fn ln(self) -> f64 {
        match self {
            Offset::Linear(v) => v.ln(),
            Offset::Log(l) => l,
        }
    }

    /// Applies a branch germ: the exact map `exact` for ordinary magnitudes,
    /// and the leading term `coef * u^power` once the result would leave the
    /// linear range.
    #[inline]
    pub fn map_germ(self, exact: impl Fn(f64) -> f64, coef: f64, power: f64) -> Offset {
        match self {
            Offset::Linear(u) => {
                if u == 0.0 {
                    return Offset::ZERO;
                }
                let out = exact(u);
                if out >= LINEAR_FLOOR {
                    Offset::Linear(out)
                } else {
                    Offset::from_ln(coef.ln() + power * u.ln())
                }
            }
            Offset::Log(l) => Offset::from_ln(coef.ln() + power * l),
        }
    }
}

/// The special point a [`Point`] is measured from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Anchor {
    /// `x = offset`
    Zero,
    /// `x = c - offset`
    CritLeft,
    /// `x = c + offset`
    CritRight,
    /// `x = 1 - offset`
    One,
}

/// A point of `[0, 1]` as an anchor plus a displacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub anchor: Anchor,
    pub offset: Offset,
}

impl Point {
    /// Anchors `x` at the nearest of `{0, c, 1}`.
    pub fn from_x(x: f64, c: f64) -> Point {
        let x = x.clamp(0.0, 1.0);
        let d0 = x;
        let d1 = 1.0 - x;
        let dc = (x - c).abs();
        let (anchor, off) = if d0 <= dc && d0 <= d1 {
            (Anchor::Zero, d0)
        } else if d1 <= dc {
            (Anchor::One, d1)
        } else if x < c {
            (Anchor::CritLeft, c - x)
        } else {
            (Anchor::CritRight, x - c)
        };
        Point {
            anchor,
            offset: Offset::from_f64(off),
        }
    }

    pub fn at_crit() -> Point {
        Point {
            anchor: Anchor::CritRight,
            offset: Offset::ZERO,
        }
    }

    /// Plain coordinate; displacements below the linear floor vanish.
    pub fn x(&self, c: f64) -> f64 {
        let v = self.offset.value();
        match self.anchor {
            Anchor::Zero => v,
            Anchor::CritLeft => c - v,
            Anchor::CritRight => c + v,
            Anchor::One => 1.0 - v,
        }
    }

    /// `ln |x - c|`, exact for points anchored at `c`.
    pub fn ln_dist_to_crit(&self, c: f64) -> f64 {
        match self.anchor {
            Anchor::CritLeft | Anchor::CritRight => self.offset.ln(),
            _ => (self.x(c) - c).abs().ln(),
        }
    }

    /// `ln min(x, 1 - x)`, exact for points anchored at an endpoint.
    pub fn ln_dist_to_boundary(&self, c: f64) -> f64 {
        match self.anchor {
            Anchor::Zero | Anchor::One => {
                let x = self.x(c);
                if x.min(1.0 - x) < self.offset.value() {
                    x.min(1.0 - x).ln()
                } else {
                    self.offset.ln()
                }
            }
            _ => {
                let x = self.x(c);
                x.min(1.0 - x).ln()
            }
        }
    }

    /// True when the point sits exactly on 0 or 1.
    pub fn is_absorbed(&self) -> bool {
        matches!(self.anchor, Anchor::Zero | Anchor::One) && self.offset.is_zero()
    }

    /// Re-anchors at the nearest special point when the displacement has
    /// grown past half the distance between anchors.
    #[inline]
    pub fn normalized(self, c: f64) -> Point {
        match self.offset {
            Offset::Log(_) => self,
            Offset::Linear(v) => {
                let reach = match self.anchor {
                    Anchor::Zero | Anchor::CritLeft => c,
                    Anchor::One | Anchor::CritRight => 1.0 - c,
                };
                if v <= 0.5 * reach {
                    self
                } else {
                    Point::from_x(self.x(c), c)
                }
            }
        }
    }
}
