//! Closed angular intervals on [−π, π] and the interval stabbing sweep.

use crate::float::Real;
use crate::geom::wrap_angle;

/// A closed interval [lo, hi] ⊆ [−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleInterval<S> {
    lo: S,
    hi: S,
}

impl<S: Real> AngleInterval<S> {
    /// Panics if the endpoints are out of range or reversed.
    pub fn new(lo: S, hi: S) -> Self {
        assert!(
            lo <= hi && lo >= -S::PI() && hi <= S::PI(),
            "invalid angle interval [{lo}, {hi}]"
        );
        Self { lo, hi }
    }

    pub fn lo(&self) -> S {
        self.lo
    }

    pub fn hi(&self) -> S {
        self.hi
    }

    pub fn contains(&self, theta: S) -> bool {
        self.lo <= theta && theta <= self.hi
    }
}

/// A set of at most two disjoint closed intervals: the wrap-around of one
/// connected arc of rotation angles.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet<S> {
    pieces: Vec<AngleInterval<S>>,
}

impl<S: Real> IntervalSet<S> {
    /// The full circle [−π, π].
    pub fn full() -> Self {
        Self {
            pieces: vec![AngleInterval::new(-S::PI(), S::PI())],
        }
    }

    pub fn is_full(&self) -> bool {
        self.pieces.len() == 1 && self.pieces[0].lo == -S::PI() && self.pieces[0].hi == S::PI()
    }

    /// Build from a connected arc [lo, hi] that may extend beyond ±π; the
    /// overhang wraps around into a second piece. Arcs of width ≥ 2π give
    /// the full circle.
    pub fn from_wrapped(lo: S, hi: S) -> Self {
        let pi = S::PI();
        let two_pi = pi + pi;
        debug_assert!(lo <= hi);
        if hi - lo >= two_pi {
            return Self::full();
        }
        if lo >= -pi && hi <= pi {
            return Self {
                pieces: vec![AngleInterval::new(lo, hi)],
            };
        }
        if hi > pi {
            // [lo, π] and [−π, hi − 2π]
            return Self {
                pieces: vec![
                    AngleInterval::new(-pi, (hi - two_pi).min(pi)),
                    AngleInterval::new(lo.max(-pi), pi),
                ],
            };
        }
        // lo < −π: [lo + 2π, π] and [−π, hi]
        Self {
            pieces: vec![
                AngleInterval::new(-pi, hi.min(pi)),
                AngleInterval::new((lo + two_pi).max(-pi), pi),
            ],
        }
    }

    pub fn pieces(&self) -> &[AngleInterval<S>] {
        &self.pieces
    }

    /// Membership of an angle, interpreted on the circle (±π identified).
    pub fn contains(&self, theta: S) -> bool {
        let t = wrap_angle(theta);
        self.pieces.iter().any(|p| {
            p.contains(t)
                || (t == S::PI() && p.lo == -S::PI())
                || (t == -S::PI() && p.hi == S::PI())
        })
    }
}

/// Maximum interval stabbing: the largest number of closed intervals sharing
/// a common point, and a point attaining it.
///
/// O(n log n) sweep over endpoint events; at equal coordinates start events
/// precede end events so closed-interval touching counts. The witness is the
/// start endpoint of the first maximal stab region; empty input gives (0, 0).
pub fn interval_stab<S: Real>(intervals: &[AngleInterval<S>]) -> (usize, S) {
    let (count, lo, _hi) = interval_stab_region(intervals);
    (count, lo)
}

/// Like [`interval_stab`], also returning the full extent [lo, hi] of the
/// first maximal stab region. Any point of it solves the stabbing problem;
/// candidate rotations are realized at its midpoint.
pub fn interval_stab_region<S: Real>(intervals: &[AngleInterval<S>]) -> (usize, S, S) {
    if intervals.is_empty() {
        return (0, S::zero(), S::zero());
    }
    // (coordinate, kind): kind 0 = start, 1 = end.
    let mut events: Vec<(S, u8)> = Vec::with_capacity(intervals.len() * 2);
    for iv in intervals {
        events.push((iv.lo, 0));
        events.push((iv.hi, 1));
    }
    events.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));

    let mut active: usize = 0;
    let mut best: usize = 0;
    let mut region_lo = events[0].0;
    let mut region_hi = events[0].0;
    let mut closed = true;
    for (coord, kind) in events {
        if kind == 0 {
            active += 1;
            if active > best {
                best = active;
                region_lo = coord;
                region_hi = coord;
                closed = false;
            }
        } else {
            if !closed && active == best {
                region_hi = coord;
                closed = true;
            }
            active -= 1;
        }
    }
    (best, region_lo, region_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn iv(lo: f64, hi: f64) -> AngleInterval<f64> {
        AngleInterval::new(lo, hi)
    }

    /// Brute-force oracle: evaluate the stab count at every endpoint (the
    /// maximum of a closed-interval arrangement is attained at an endpoint).
    fn stab_oracle(intervals: &[AngleInterval<f64>]) -> usize {
        let mut best = 0;
        for probe in intervals.iter().flat_map(|i| [i.lo(), i.hi()]) {
            let count = intervals.iter().filter(|i| i.contains(probe)).count();
            best = best.max(count);
        }
        best
    }

    #[test]
    fn single_interval() {
        let (count, theta) = interval_stab(&[iv(-1.0, 1.0)]);
        assert_eq!(count, 1);
        assert!((-1.0..=1.0).contains(&theta));
    }

    #[test]
    fn empty_input() {
        assert_eq!(interval_stab::<f64>(&[]), (0, 0.0));
    }

    #[test]
    fn overlapping_pair_beats_third() {
        let set = [iv(0.0, 2.0), iv(1.0, 3.0), iv(2.5, 3.0)];
        let (count, theta) = interval_stab(&set);
        assert_eq!(count, 2);
        assert_eq!(count, stab_oracle(&set));
        assert_eq!(set.iter().filter(|i| i.contains(theta)).count(), 2);
    }

    #[test]
    fn closed_intervals_touching_at_endpoint_count_together() {
        let set = [iv(0.0, 1.0), iv(1.0, 2.0)];
        let (count, theta) = interval_stab(&set);
        assert_eq!(count, 2);
        assert_eq!(theta, 1.0);
    }

    #[test]
    fn agrees_with_endpoint_oracle_on_random_sets() {
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let n = 1 + (rng() * 50.0) as usize;
            let set: Vec<_> = (0..n)
                .map(|_| {
                    let a = rng() * 2.0 * PI - PI;
                    let b = rng() * 2.0 * PI - PI;
                    iv(a.min(b), a.max(b))
                })
                .collect();
            let (count, theta) = interval_stab(&set);
            assert_eq!(count, stab_oracle(&set));
            assert_eq!(set.iter().filter(|i| i.contains(theta)).count(), count);
        }
    }

    #[test]
    fn wrapping_splits_and_membership() {
        let s = IntervalSet::from_wrapped(2.0, 4.0); // hi beyond π
        assert_eq!(s.pieces().len(), 2);
        assert!(s.contains(3.0 - 2.0 * PI));
        assert!(s.contains(2.5));
        assert!(!s.contains(0.0));

        let s = IntervalSet::from_wrapped(-4.0, -2.0); // lo beyond −π
        assert_eq!(s.pieces().len(), 2);
        assert!(s.contains(-3.0 + 2.0 * PI));
        assert!(!s.contains(0.0));

        let s = IntervalSet::from_wrapped(-0.5, 0.75);
        assert_eq!(s.pieces().len(), 1);
        assert!(s.contains(0.0));

        assert!(IntervalSet::from_wrapped(-4.0, 4.0).is_full());
        assert!(IntervalSet::<f64>::full().contains(PI));
        assert!(IntervalSet::<f64>::full().contains(-PI));
    }

    #[test]
    fn circle_membership_identifies_pi_with_minus_pi() {
        let s = IntervalSet::from_wrapped(3.0, 3.3); // splits across π
        assert!(s.contains(PI));
        assert!(s.contains(-PI));
        assert!(s.contains(3.2 - 2.0 * PI));
    }
}
