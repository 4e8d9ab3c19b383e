use crate::{Error, Result};

/// Sub-interval of `[0, 1]` with explicit endpoint inclusion. All endpoint
/// conventions for atoms go through [`Interval::contains`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub include_a: bool,
    pub include_b: bool,
}

impl Interval {
    pub fn new(a: f64, b: f64, include_a: bool, include_b: bool) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::InvalidArgument(format!("interval endpoints {a}, {b} not ordered in [0,1]")));
        }
        Ok(Self { a, b, include_a, include_b })
    }

    /// `(a, b]`
    pub fn open_closed(a: f64, b: f64) -> Self {
        Self::new(a, b, false, true).expect("valid interval")
    }

    /// `[a, b)`
    pub fn closed_open(a: f64, b: f64) -> Self {
        Self::new(a, b, true, false).expect("valid interval")
    }

    /// `(a, b)`
    pub fn open(a: f64, b: f64) -> Self {
        Self::new(a, b, false, false).expect("valid interval")
    }

    /// `[a, b]`
    pub fn closed(a: f64, b: f64) -> Self {
        Self::new(a, b, true, true).expect("valid interval")
    }

    /// The whole circle as `(0, 1]`.
    pub fn circle() -> Self {
        Self::open_closed(0.0, 1.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        let lower = if self.include_a { x >= self.a } else { x > self.a };
        let upper = if self.include_b { x <= self.b } else { x < self.b };
        lower && upper
    }

    /// Overlap of the interior with `[p, q]`, if it has positive length.
    pub fn clip(&self, p: f64, q: f64) -> Option<(f64, f64)> {
        let lo = p.max(self.a);
        let hi = q.min(self.b);
        (hi > lo).then_some((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_conventions() {
        assert!(!Interval::open_closed(0.2, 0.5).contains(0.2));
        assert!(Interval::open_closed(0.2, 0.5).contains(0.5));
        assert!(Interval::closed_open(0.2, 0.5).contains(0.2));
        assert!(!Interval::closed_open(0.2, 0.5).contains(0.5));
        assert!(!Interval::open(0.2, 0.5).contains(0.5));
        assert!(Interval::closed(0.2, 0.5).contains(0.2) && Interval::closed(0.2, 0.5).contains(0.5));
        assert!(Interval::new(0.5, 0.2, true, true).is_err());
    }
}
