//! Exact dyadic coordinates on the reference triangle.
//!
//! Every vertex produced by bisection of the reference triangle
//! `{x >= 0, y >= 0, x + y <= 1}` has dyadic-rational coordinates. They are
//! stored as integer numerators over the fixed denominator `2^DYADIC_BITS`, so
//! node identity (including across patch boundaries) is integer comparison.

use crate::error::{Error, Result};

/// Number of fractional bits of a parametric coordinate.
pub const DYADIC_BITS: u32 = 48;

/// The numerator representing `1`.
pub const DYADIC_ONE: u64 = 1 << DYADIC_BITS;

/// A point of the reference triangle with coordinates `x / 2^DYADIC_BITS`, `y / 2^DYADIC_BITS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicPoint {
    pub x: u64,
    pub y: u64,
}

impl DyadicPoint {
    pub const ORIGIN: DyadicPoint = DyadicPoint { x: 0, y: 0 };
    pub const E1: DyadicPoint = DyadicPoint {
        x: DYADIC_ONE,
        y: 0,
    };
    pub const E2: DyadicPoint = DyadicPoint {
        x: 0,
        y: DYADIC_ONE,
    };

    pub const fn new(x: u64, y: u64) -> Self {
        DyadicPoint { x, y }
    }

    /// Exact midpoint; fails when the resolution is exhausted.
    pub fn midpoint(self, other: DyadicPoint) -> Result<DyadicPoint> {
        let sx = self.x + other.x;
        let sy = self.y + other.y;
        if sx % 2 != 0 || sy % 2 != 0 {
            return Err(Error::DepthExceeded);
        }
        Ok(DyadicPoint {
            x: sx / 2,
            y: sy / 2,
        })
    }

    pub fn to_f64(self) -> [f64; 2] {
        let scale = DYADIC_ONE as f64;
        [self.x as f64 / scale, self.y as f64 / scale]
    }

    pub fn corner(index: usize) -> DyadicPoint {
        match index {
            0 => Self::ORIGIN,
            1 => Self::E1,
            2 => Self::E2,
            _ => panic!("reference triangle has three corners"),
        }
    }
}

/// Twice the signed area of the triangle `(a, b, c)` as an exact integer.
pub fn twice_signed_area(a: DyadicPoint, b: DyadicPoint, c: DyadicPoint) -> i128 {
    let (ax, ay) = (a.x as i128, a.y as i128);
    let (bx, by) = (b.x as i128, b.y as i128);
    let (cx, cy) = (c.x as i128, c.y as i128);
    (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
}

/// Exact squared distance, in units of `2^(-2 DYADIC_BITS)`.
pub fn squared_distance(a: DyadicPoint, b: DyadicPoint) -> u128 {
    let dx = (a.x as i128 - b.x as i128).unsigned_abs();
    let dy = (a.y as i128 - b.y as i128).unsigned_abs();
    dx * dx + dy * dy
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_is_exact() {
        let m = DyadicPoint::E1.midpoint(DyadicPoint::E2).unwrap();
        assert_eq!(m.to_f64(), [0.5, 0.5]);
    }

    #[test]
    fn midpoint_fails_past_resolution() {
        let a = DyadicPoint::new(1, 0);
        assert!(matches!(
            a.midpoint(DyadicPoint::ORIGIN),
            Err(Error::DepthExceeded)
        ));
    }

    #[test]
    fn reference_area() {
        let twice = twice_signed_area(DyadicPoint::ORIGIN, DyadicPoint::E1, DyadicPoint::E2);
        assert_eq!(twice, (DYADIC_ONE as i128) * (DYADIC_ONE as i128));
    }
}
