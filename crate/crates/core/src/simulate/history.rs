//! Sampled input history for dead-time channels.

/// Fixed-capacity ring of input samples on a uniform grid `t_n = n·h`.
///
/// Queries are made in grid units (`t/h`). Anything before `t = 0` reads as
/// zero deviation; in between samples the value is interpolated linearly.
#[derive(Debug, Clone)]
pub(crate) struct InputHistory {
    ring: Vec<f64>,
    /// Grid index of the newest sample; `None` before the first push.
    newest: Option<usize>,
}

impl InputHistory {
    /// Holds enough samples to look back `span` grid steps.
    pub(crate) fn new(span: f64) -> Self {
        let cap = span.ceil().max(0.0) as usize + 3;
        InputHistory {
            ring: vec![0.0; cap],
            newest: None,
        }
    }

    pub(crate) fn push(&mut self, value: f64) {
        let n = self.newest.map_or(0, |n| n + 1);
        let cap = self.ring.len();
        self.ring[n % cap] = value;
        self.newest = Some(n);
    }

    fn at(&self, n: usize) -> f64 {
        let newest = self.newest.expect("history has samples");
        debug_assert!(
            n <= newest && newest - n < self.ring.len(),
            "sample {n} evicted or in the future"
        );
        self.ring[n % self.ring.len()]
    }

    /// Value at grid position `pos` (may be fractional).
    pub(crate) fn sample(&self, pos: f64) -> f64 {
        if pos < 0.0 {
            return 0.0;
        }
        let newest = self.newest.expect("history has samples");
        let lo = pos.floor();
        let frac = pos - lo;
        let lo = lo as usize;
        if lo >= newest {
            debug_assert!(lo == newest && frac < 1e-9, "query beyond newest sample");
            return self.at(newest);
        }
        let a = self.at(lo);
        if frac == 0.0 {
            return a;
        }
        a + frac * (self.at(lo + 1) - a)
    }

    /// Mean value over `[a, b]` in grid units, integrating the interpolant
    /// exactly. The jump from zero at `t = 0` is resolved sharply.
    pub(crate) fn average(&self, a: f64, b: f64) -> f64 {
        debug_assert!(b > a);
        let mut p = a.max(0.0);
        let mut area = 0.0;
        while p < b {
            let end = (p.floor() + 1.0).min(b);
            area += 0.5 * (self.sample(p) + self.sample(end)) * (end - p);
            p = end;
        }
        area / (b - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn before_start_is_zero() {
        let mut h = InputHistory::new(5.0);
        h.push(1.0);
        assert_eq!(h.sample(-0.5), 0.0);
        assert_eq!(h.sample(-1e-12), 0.0);
        assert_eq!(h.sample(0.0), 1.0);
    }

    #[test]
    fn interpolates_between_samples() {
        let mut h = InputHistory::new(4.0);
        for v in [0.0, 2.0, 4.0, 10.0] {
            h.push(v);
        }
        assert_eq!(h.sample(1.0), 2.0);
        assert_eq!(h.sample(1.5), 3.0);
        assert_eq!(h.sample(2.25), 5.5);
        assert_eq!(h.sample(3.0), 10.0);
    }

    #[test]
    fn averages_piecewise_linear() {
        let mut h = InputHistory::new(4.0);
        for v in [4.0, 2.0, 2.0, 6.0] {
            h.push(v);
        }
        assert_eq!(h.average(0.0, 1.0), 3.0);
        assert_eq!(h.average(1.0, 2.0), 2.0);
        assert_eq!(h.average(-0.5, 0.5), 1.75);
        assert_eq!(h.average(-3.0, -2.0), 0.0);
        assert!((h.average(1.5, 2.5) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn ring_wraps() {
        let mut h = InputHistory::new(2.0);
        for n in 0..20 {
            h.push(n as f64);
        }
        assert_eq!(h.sample(17.5), 17.5);
        assert_eq!(h.sample(19.0), 19.0);
    }
}
