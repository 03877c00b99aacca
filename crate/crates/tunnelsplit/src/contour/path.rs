use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// One piece of a path in the q-plane, parametrised by t in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Line { a: Complex64, b: Complex64 },
    /// Arc from angle `start` through `sweep` radians (positive = counterclockwise).
    Arc { center: Complex64, radius: f64, start: f64, sweep: f64 },
}

impl Segment {
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { a, b } => a + (b - a) * t,
            Segment::Arc { center, radius, start, sweep } => center + Complex64::from_polar(radius, start + sweep * t),
        }
    }

    pub fn deriv(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { a, b } => b - a,
            Segment::Arc { radius, start, sweep, .. } => {
                Complex64::new(0.0, sweep) * Complex64::from_polar(radius, start + sweep * t)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { a, b } => (b - a).norm(),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { a, b } => Segment::Line { a: b, b: a },
            Segment::Arc { center, radius, start, sweep } => Segment::Arc {
                center,
                radius,
                start: start + sweep,
                sweep: -sweep,
            },
        }
    }

    /// Smallest distance from `s` to the segment.
    pub fn distance_to(&self, s: Complex64) -> f64 {
        match *self {
            Segment::Line { a, b } => {
                let d = b - a;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (s - a).norm();
                }
                let t = ((s - a) * d.conj()).re / len2;
                (s - (a + d * t.clamp(0.0, 1.0))).norm()
            }
            Segment::Arc { center, radius, start, sweep } => {
                let rel = s - center;
                let ang = rel.arg();
                let on_arc = if sweep.abs() >= TAU {
                    true
                } else {
                    let (lo, span) = if sweep >= 0.0 { (start, sweep) } else { (start + sweep, -sweep) };
                    (ang - lo).rem_euclid(TAU) <= span
                };
                let radial = (rel.norm() - radius).abs();
                if on_arc {
                    radial
                } else {
                    (s - self.start()).norm().min((s - self.end()).norm())
                }
            }
        }
    }
}

/// A piecewise path with the sheet it starts on (global anchor labeling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub segments: Vec<Segment>,
    pub start_sheet: usize,
    pub closed: bool,
}

impl PathSpec {
    /// Straight segments through `waypoints`; `closed` appends the return leg.
    pub fn polygon(waypoints: &[Complex64], start_sheet: usize, closed: bool) -> Self {
        let mut pts = waypoints.to_vec();
        if closed && pts.first() != pts.last() {
            pts.push(pts[0]);
        }
        let segments = pts
            .windows(2)
            .filter(|w| w[0] != w[1])
            .map(|w| Segment::Line { a: w[0], b: w[1] })
            .collect();
        Self { segments, start_sheet, closed }
    }

    /// Circle starting at angle `start`; `turns` < 0 runs clockwise.
    pub fn circle(center: Complex64, radius: f64, start: f64, turns: f64, start_sheet: usize) -> Self {
        Self {
            segments: vec![Segment::Arc { center, radius, start, sweep: turns * TAU }],
            start_sheet,
            closed: true,
        }
    }

    /// Axis-aligned rectangle traversed counterclockwise from its lower-left corner.
    pub fn rectangle(lo: Complex64, hi: Complex64, start_sheet: usize) -> Self {
        let pts = [
            lo,
            Complex64::new(hi.re, lo.im),
            hi,
            Complex64::new(lo.re, hi.im),
        ];
        Self::polygon(&pts, start_sheet, true)
    }

    pub fn start(&self) -> Complex64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> Complex64 {
        self.segments.last().unwrap().end()
    }

    pub fn waypoints(&self) -> Vec<Complex64> {
        let mut w: Vec<_> = self.segments.iter().map(|s| s.start()).collect();
        w.push(self.end());
        w
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(|s| s.reversed()).collect(),
            start_sheet: self.start_sheet,
            closed: self.closed,
        }
    }

    /// Concatenate; `other` must start where `self` ends.
    pub fn then(&self, other: &PathSpec) -> Self {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().copied());
        Self {
            segments,
            start_sheet: self.start_sheet,
            closed: (self.start() - other.end()).norm() == 0.0,
        }
    }

    pub fn with_sheet(mut self, sheet: usize) -> Self {
        self.start_sheet = sheet;
        self
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn distance_to(&self, s: Complex64) -> f64 {
        self.segments.iter().map(|g| g.distance_to(s)).fold(f64::INFINITY, f64::min)
    }

    /// Winding number of a closed path around `s` (path must avoid `s`).
    pub fn winding_number(&self, s: Complex64) -> i64 {
        let mut total = 0.0;
        for seg in &self.segments {
            total += match *seg {
                Segment::Line { a, b } => ((b - s) / (a - s)).arg(),
                Segment::Arc { center, radius, start, sweep } => {
                    if (s - center).norm() < radius {
                        sweep
                    } else {
                        // split the arc so every piece subtends less than π
                        let n = (sweep.abs() / (PI / 2.0)).ceil().max(1.0) as usize;
                        (0..n)
                            .map(|k| {
                                let a = center + Complex64::from_polar(radius, start + sweep * k as f64 / n as f64);
                                let b = center + Complex64::from_polar(radius, start + sweep * (k + 1) as f64 / n as f64);
                                ((b - s) / (a - s)).arg()
                            })
                            .sum()
                    }
                }
            };
        }
        (total / TAU).round() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rectangle_winds_once() {
        let r = PathSpec::rectangle(c(-1.0, -1.0), c(1.0, 1.0), 0);
        assert_eq!(r.winding_number(c(0.0, 0.0)), 1);
        assert_eq!(r.winding_number(c(3.0, 0.0)), 0);
        assert_eq!(r.reversed().winding_number(c(0.2, 0.1)), -1);
    }

    #[test]
    fn circle_winding_and_distance() {
        let p = PathSpec::circle(c(1.0, 0.0), 0.5, 0.0, -2.0, 0);
        assert_eq!(p.winding_number(c(1.1, 0.0)), -2);
        assert!((p.distance_to(c(1.0, 0.0)) - 0.5).abs() < 1e-15);
        assert!((p.end() - p.start()).norm() < 1e-12);
    }

    #[test]
    fn partial_arc_distance() {
        let s = Segment::Arc { center: c(0.0, 0.0), radius: 1.0, start: 0.0, sweep: PI / 2.0 };
        assert!((s.distance_to(c(0.0, -2.0)) - (5.0f64).sqrt()).abs() < 1e-12);
        assert!((s.distance_to(c(0.0, 2.0)) - 1.0).abs() < 1e-12);
    }
}
