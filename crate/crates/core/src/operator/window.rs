use std::cmp::Ordering;

use super::OperatorError;

/// Absolute tolerance used when an eigenvalue sits on a window endpoint.
/// Closed endpoints admit eigenvalues up to this distance outside, open
/// endpoints reject eigenvalues up to this distance inside.
pub const WINDOW_SNAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Closed(f64),
    Open(f64),
    Unbounded,
}

impl Endpoint {
    fn value(self) -> Option<f64> {
        match self {
            Endpoint::Closed(v) | Endpoint::Open(v) => Some(v),
            Endpoint::Unbounded => None,
        }
    }

    fn admits_from_below(self, x: f64) -> bool {
        match self {
            Endpoint::Closed(a) => x >= a - WINDOW_SNAP_TOLERANCE,
            Endpoint::Open(a) => x > a + WINDOW_SNAP_TOLERANCE,
            Endpoint::Unbounded => true,
        }
    }

    fn admits_from_above(self, x: f64) -> bool {
        match self {
            Endpoint::Closed(b) => x <= b + WINDOW_SNAP_TOLERANCE,
            Endpoint::Open(b) => x < b - WINDOW_SNAP_TOLERANCE,
            Endpoint::Unbounded => true,
        }
    }
}

// Orders lower endpoints from least to most restrictive.
fn cmp_lower(a: Endpoint, b: Endpoint) -> Ordering {
    match (a, b) {
        (Endpoint::Unbounded, Endpoint::Unbounded) => Ordering::Equal,
        (Endpoint::Unbounded, _) => Ordering::Less,
        (_, Endpoint::Unbounded) => Ordering::Greater,
        _ => {
            let (x, y) = (a.value().unwrap(), b.value().unwrap());
            x.total_cmp(&y).then_with(|| match (a, b) {
                (Endpoint::Closed(_), Endpoint::Open(_)) => Ordering::Less,
                (Endpoint::Open(_), Endpoint::Closed(_)) => Ordering::Greater,
                _ => Ordering::Equal,
            })
        }
    }
}

// Orders upper endpoints from most to least restrictive.
fn cmp_upper(a: Endpoint, b: Endpoint) -> Ordering {
    match (a, b) {
        (Endpoint::Unbounded, Endpoint::Unbounded) => Ordering::Equal,
        (Endpoint::Unbounded, _) => Ordering::Greater,
        (_, Endpoint::Unbounded) => Ordering::Less,
        _ => {
            let (x, y) = (a.value().unwrap(), b.value().unwrap());
            x.total_cmp(&y).then_with(|| match (a, b) {
                (Endpoint::Open(_), Endpoint::Closed(_)) => Ordering::Less,
                (Endpoint::Closed(_), Endpoint::Open(_)) => Ordering::Greater,
                _ => Ordering::Equal,
            })
        }
    }
}

/// A real interval with independently closed, open or infinite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: Endpoint,
    pub upper: Endpoint,
}

impl Interval {
    pub fn new(lower: Endpoint, upper: Endpoint) -> Self {
        Self { lower, upper }
    }

    pub fn closed(a: f64, b: f64) -> Self {
        Self::new(Endpoint::Closed(a), Endpoint::Closed(b))
    }

    pub fn open(a: f64, b: f64) -> Self {
        Self::new(Endpoint::Open(a), Endpoint::Open(b))
    }

    /// `[a, b)`.
    pub fn closed_open(a: f64, b: f64) -> Self {
        Self::new(Endpoint::Closed(a), Endpoint::Open(b))
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower.admits_from_below(x) && self.upper.admits_from_above(x)
    }

    /// True when no real number lies inside.
    pub fn is_empty(&self) -> bool {
        match (self.lower.value(), self.upper.value()) {
            (Some(a), Some(b)) => {
                a > b
                    || (a == b
                        && !(matches!(self.lower, Endpoint::Closed(_))
                            && matches!(self.upper, Endpoint::Closed(_))))
            }
            _ => false,
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lower = if cmp_lower(self.lower, other.lower) == Ordering::Less {
            other.lower
        } else {
            self.lower
        };
        let upper = if cmp_upper(self.upper, other.upper) == Ordering::Less {
            self.upper
        } else {
            other.upper
        };
        Interval { lower, upper }
    }

    // True when `self` ends strictly before `next` begins.
    fn precedes(&self, next: &Interval) -> bool {
        match (self.upper.value(), next.lower.value()) {
            (Some(b), Some(a)) => {
                b < a
                    || (b == a
                        && !(matches!(self.upper, Endpoint::Closed(_))
                            && matches!(next.lower, Endpoint::Closed(_))))
            }
            _ => false,
        }
    }
}

/// A finite union of pairwise disjoint intervals, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWindow {
    intervals: Vec<Interval>,
}

impl SpectralWindow {
    /// Sorts the intervals, drops empty ones and rejects overlaps or NaN
    /// endpoints.
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self, OperatorError> {
        for iv in &intervals {
            if iv.lower.value().is_some_and(f64::is_nan) || iv.upper.value().is_some_and(f64::is_nan)
            {
                return Err(OperatorError::Window("NaN endpoint".into()));
            }
        }
        intervals.retain(|iv| !iv.is_empty());
        intervals.sort_by(|a, b| cmp_lower(a.lower, b.lower));
        for pair in intervals.windows(2) {
            if !pair[0].precedes(&pair[1]) {
                return Err(OperatorError::Window(format!(
                    "intervals {:?} and {:?} overlap",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn interval(interval: Interval) -> Self {
        Self::new(vec![interval]).expect("a single interval is always disjoint")
    }

    pub fn closed(a: f64, b: f64) -> Self {
        Self::interval(Interval::closed(a, b))
    }

    /// The whole real line.
    pub fn all() -> Self {
        Self::interval(Interval::new(Endpoint::Unbounded, Endpoint::Unbounded))
    }

    pub fn empty() -> Self {
        Self {
            intervals: Vec::new(),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn intersect(&self, other: &SpectralWindow) -> SpectralWindow {
        let mut pieces = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let c = a.intersect(b);
                if !c.is_empty() {
                    pieces.push(c);
                }
            }
        }
        SpectralWindow::new(pieces).expect("intersections of disjoint families are disjoint")
    }

    /// Splits `[lo, hi]` at the given interior cut points into
    /// `[lo, c1), [c1, c2), ..., [ck, hi]`.
    pub fn partition(lo: f64, hi: f64, cuts: &[f64]) -> Result<Vec<SpectralWindow>, OperatorError> {
        let mut points = vec![lo];
        points.extend_from_slice(cuts);
        points.push(hi);
        if points.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(OperatorError::Window(
                "partition points must be strictly increasing".into(),
            ));
        }
        let last = points.len() - 2;
        Ok(points
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let upper = if i == last {
                    Endpoint::Closed(w[1])
                } else {
                    Endpoint::Open(w[1])
                };
                SpectralWindow::interval(Interval::new(Endpoint::Closed(w[0]), upper))
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_membership_with_snap() {
        let w = SpectralWindow::interval(Interval::closed_open(1.0, 2.0));
        assert!(w.contains(1.0));
        assert!(w.contains(1.0 - 5e-13));
        assert!(!w.contains(2.0));
        assert!(!w.contains(2.0 - 5e-13));
        assert!(w.contains(1.999));
        let all = SpectralWindow::all();
        assert!(all.contains(-1e300) && all.contains(1e300));
        assert!(!SpectralWindow::empty().contains(0.0));
    }

    #[test]
    fn rejects_overlap() {
        assert!(SpectralWindow::new(vec![Interval::closed(0.0, 1.0), Interval::closed(1.0, 2.0)]).is_err());
        assert!(SpectralWindow::new(vec![Interval::closed(0.0, 1.5), Interval::closed(1.0, 2.0)]).is_err());
        let ok = SpectralWindow::new(vec![Interval::closed(2.0, 3.0), Interval::closed_open(0.0, 2.0)]).unwrap();
        assert_eq!(ok.intervals()[0], Interval::closed_open(0.0, 2.0));
        let nan = SpectralWindow::new(vec![Interval::closed(f64::NAN, 1.0)]);
        assert!(nan.is_err());
    }

    #[test]
    fn empty_intervals_are_dropped() {
        let w = SpectralWindow::new(vec![Interval::open(1.0, 1.0), Interval::closed(3.0, 2.0)]).unwrap();
        assert!(w.intervals().is_empty());
        let point = SpectralWindow::closed(1.0, 1.0);
        assert!(point.contains(1.0));
    }

    #[test]
    fn intersection() {
        let a = SpectralWindow::new(vec![Interval::closed(0.0, 2.0), Interval::open(3.0, 5.0)]).unwrap();
        let b = SpectralWindow::closed(1.0, 4.0);
        let c = a.intersect(&b);
        assert_eq!(
            c.intervals(),
            &[
                Interval::closed(1.0, 2.0),
                Interval::new(Endpoint::Open(3.0), Endpoint::Closed(4.0))
            ]
        );
        let d = SpectralWindow::interval(Interval::closed_open(0.0, 1.0))
            .intersect(&SpectralWindow::closed(1.0, 2.0));
        assert!(d.intervals().is_empty());
    }

    #[test]
    fn partition_covers_each_point_once() {
        let parts = SpectralWindow::partition(-1.0, 1.0, &[-0.5, 0.0, 0.25]).unwrap();
        for k in 0..=200 {
            let x = -1.0 + k as f64 / 100.0;
            let hits = parts.iter().filter(|w| w.contains(x)).count();
            assert_eq!(hits, 1, "x = {x}");
        }
        assert!(SpectralWindow::partition(0.0, 1.0, &[2.0]).is_err());
    }
}
