//! Q2.30 fixed-point emulation of the hardware datapath.
//!
//! A [`FixedPoint`] is a 32-bit signed integer with 30 fractional bits, so the
//! representable range is `[-2, 2)` with a resolution of `2^-30`.

use serde::{Deserialize, Serialize};

pub const FRAC_BITS: u32 = 30;
pub const SCALE: f64 = (1u64 << FRAC_BITS) as f64;
/// Smallest representable increment.
pub const EPSILON: f64 = 1.0 / SCALE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct FixedPoint(pub i32);

impl FixedPoint {
    pub const MAX: FixedPoint = FixedPoint(i32::MAX);
    pub const MIN: FixedPoint = FixedPoint(i32::MIN);

    /// Round-to-nearest conversion. The flag is set when `x` fell outside
    /// `[-2, 2)` (or was NaN) and the result was saturated.
    pub fn from_f64(x: f64) -> (FixedPoint, bool) {
        if x.is_nan() {
            return (FixedPoint(0), true);
        }
        let scaled = (x * SCALE).round();
        if scaled > i32::MAX as f64 {
            (Self::MAX, true)
        } else if scaled < i32::MIN as f64 {
            (Self::MIN, true)
        } else {
            (FixedPoint(scaled as i32), false)
        }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE
    }

    #[inline]
    pub fn raw(self) -> i32 {
        self.0
    }
}

/// Counts saturating conversions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedStats {
    pub conversions: u64,
    pub saturations: u64,
}

impl FixedStats {
    pub fn encode(&mut self, x: f64) -> FixedPoint {
        let (f, saturated) = FixedPoint::from_f64(x);
        self.conversions += 1;
        if saturated {
            self.saturations += 1;
        }
        f
    }

    /// Snap `x` onto the fixed-point grid.
    pub fn quantize(&mut self, x: f64) -> f64 {
        self.encode(x).to_f64()
    }
}

pub fn to_fixed(x: f64) -> FixedPoint {
    FixedPoint::from_f64(x).0
}

pub fn from_fixed(f: FixedPoint) -> f64 {
    f.to_f64()
}
