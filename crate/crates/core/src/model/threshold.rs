use std::fmt;

use crate::error::{Error, Result};

/// A similarity threshold held as an exact decimal fraction `num / den`.
///
/// The value is recovered from the shortest decimal representation of the
/// `f64` the caller supplied, so `0.7` is exactly `7/10`. Every prefix length,
/// overlap bound and similarity decision goes through integer arithmetic on
/// this fraction, which keeps the filters and the final predicate in
/// agreement at boundaries such as `0.7 * 10 == 7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    num: u64,
    den: u64,
}

const MAX_FRACTION_DIGITS: usize = 18;

impl Threshold {
    /// Parses a visual threshold in `(0, 1]`.
    pub fn visual(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 || value > 1.0 {
            return Err(Error::InvalidThreshold {
                name: "visual",
                value,
                reason: "must lie in (0, 1]",
            });
        }
        Self::from_decimal(value).ok_or(Error::InvalidThreshold {
            name: "visual",
            value,
            reason: "needs more than 18 decimal digits",
        })
    }

    pub fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num, den);
        Threshold {
            num: num / g,
            den: den / g,
        }
    }

    fn from_decimal(value: f64) -> Option<Self> {
        // Display for f64 prints the shortest round-trip form without exponent.
        let text = format!("{value}");
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text.as_str(), ""),
        };
        if frac_part.len() > MAX_FRACTION_DIGITS {
            return None;
        }
        let den = 10u64.checked_pow(frac_part.len() as u32)?;
        let int: u64 = int_part.parse().ok()?;
        let frac: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().ok()?
        };
        let num = int.checked_mul(den)?.checked_add(frac)?;
        Some(Self::from_ratio(num, den))
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `inter / union >= threshold`, false when `union == 0`.
    pub fn admits(&self, inter: u64, union: u64) -> bool {
        union > 0 && inter as u128 * self.den as u128 >= self.num as u128 * union as u128
    }

    /// `small / large >= threshold`: the size ratio any qualifying pair must meet.
    #[inline]
    pub fn length_compatible(&self, a: u64, b: u64) -> bool {
        let (small, large) = if a <= b { (a, b) } else { (b, a) };
        small as u128 * self.den as u128 >= self.num as u128 * large as u128
    }

    /// Minimum overlap weight for two sets of total weight `total_a` and
    /// `total_b` to reach the threshold: `ceil(t / (1 + t) * (total_a + total_b))`.
    #[inline]
    pub fn overlap_needed(&self, total_a: u64, total_b: u64) -> u64 {
        if let Some(p) = total_a.checked_add(total_b).and_then(|s| s.checked_mul(self.num)) {
            if let Some(d) = self.num.checked_add(self.den) {
                return p.div_ceil(d);
            }
        }
        let sum = total_a as u128 + total_b as u128;
        ceil_div(self.num as u128 * sum, self.num as u128 + self.den as u128) as u64
    }

    /// `x >= overlap_needed(a, b)` where `sum = a + b`, without dividing.
    #[inline]
    pub fn overlap_reaches(&self, x: u64, sum: u64) -> bool {
        x as u128 * (self.num as u128 + self.den as u128) >= self.num as u128 * sum as u128
    }

    /// `ceil(t * n)`.
    pub fn ceil_scaled(&self, n: u64) -> u64 {
        ceil_div(self.num as u128 * n as u128, self.den as u128) as u64
    }

    /// `ceil(2t / (1 + t) * n)`.
    pub fn ceil_scaled_index(&self, n: u64) -> u64 {
        ceil_div(
            2 * self.num as u128 * n as u128,
            self.num as u128 + self.den as u128,
        ) as u64
    }

    /// `rest < t * total`.
    pub fn below_probe_bound(&self, rest: u64, total: u64) -> bool {
        (rest as u128) * (self.den as u128) < (self.num as u128) * (total as u128)
    }

    /// `rest < 2t / (1 + t) * total`.
    pub fn below_index_bound(&self, rest: u64, total: u64) -> bool {
        (rest as u128) * (self.num as u128 + self.den as u128)
            < 2 * (self.num as u128) * (total as u128)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_values_are_exact() {
        let t = Threshold::visual(0.7).unwrap();
        assert_eq!((t.num(), t.den()), (7, 10));
        let t = Threshold::visual(1.0).unwrap();
        assert_eq!((t.num(), t.den()), (1, 1));
        let t = Threshold::visual(0.125).unwrap();
        assert_eq!((t.num(), t.den()), (1, 8));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Threshold::visual(0.0).is_err());
        assert!(Threshold::visual(1.5).is_err());
        assert!(Threshold::visual(f64::NAN).is_err());
    }

    #[test]
    fn boundary_ratio_is_admitted() {
        let t = Threshold::visual(0.7).unwrap();
        assert!(t.admits(7, 10));
        assert!(!t.admits(69, 100));
        assert!(!t.admits(0, 0));
        // 0.1 as f64 is slightly above 1/10; the decimal reading still admits 1/10.
        let t = Threshold::visual(0.1).unwrap();
        assert!(t.admits(1, 10));
    }

    #[test]
    fn ceilings_at_integral_products() {
        let t = Threshold::visual(0.5).unwrap();
        assert_eq!(t.ceil_scaled(4), 2);
        assert_eq!(t.ceil_scaled(5), 3);
        let t = Threshold::visual(0.7).unwrap();
        assert_eq!(t.ceil_scaled(10), 7);
        assert_eq!(t.ceil_scaled_index(5), 5);
        assert_eq!(t.overlap_needed(5, 5), 5);
        for sum in 0..200 {
            for x in 0..120 {
                assert_eq!(t.overlap_reaches(x, sum), x >= t.overlap_needed(sum, 0));
            }
        }
    }
}
