use std::fmt;
use std::str::FromStr;

/// A probability stored as `threshold / 2^32`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FixedProb(u32);

impl FixedProb {
    pub const ZERO: Self = Self(0);
    pub const HALF: Self = Self(1 << 31);
    /// The largest representable probability, `1 - 2^-32`.
    pub const MAX: Self = Self(u32::MAX);

    pub const fn from_threshold(threshold: u32) -> Self {
        Self(threshold)
    }

    pub const fn threshold(self) -> u32 {
        self.0
    }

    /// `floor(2^32 * num / den)`, saturating at [`FixedProb::MAX`].
    /// Returns `None` for `den == 0` or `num > den`.
    pub fn from_ratio(num: u64, den: u64) -> Option<Self> {
        if den == 0 || num > den {
            return None;
        }
        let t = ((num as u128) << 32) / den as u128;
        Some(Self(t.min(u32::MAX as u128) as u32))
    }
}

impl fmt::Debug for FixedProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedProb({}/2^32)", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseProbError(pub String);

impl fmt::Display for ParseProbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid probability {:?}: expected NUM/DEN with NUM <= DEN", self.0)
    }
}

impl std::error::Error for ParseProbError {}

impl FromStr for FixedProb {
    type Err = ParseProbError;

    /// Parses a rational `NUM/DEN` (or a bare `0` / `1`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseProbError(s.to_string());
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = num.parse::<u64>().map_err(|_| err())?;
        let den = den.parse::<u64>().map_err(|_| err())?;
        Self::from_ratio(num, den).ok_or_else(err)
    }
}
