use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bounded convex planar domain.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// `x1^2 + x2^2 < 1`
    Disk,
    /// `|x1|^2.5 + |x2|^2.5 < 1`
    SmoothedSquare,
    /// `x1^2 + 2 x2^2 < 1`
    Ellipse,
    /// `-x1(1 - x1) < x2 < x1(1 - x1)`, `0 < x1 < 1`
    Eye,
    /// Strictly convex polygon, vertices counterclockwise.
    Polygon(Vec<[f64; 2]>),
}

impl DomainSpec {
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidArgument("polygon needs at least three vertices".into()));
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if turn <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "polygon is not strictly convex and counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(DomainSpec::Polygon(vertices))
    }

    pub fn unit_square() -> Self {
        DomainSpec::Polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::Disk => "disk",
            DomainSpec::SmoothedSquare => "smoothed-square",
            DomainSpec::Ellipse => "ellipse",
            DomainSpec::Eye => "eye",
            DomainSpec::Polygon(_) => "polygon",
        }
    }

    /// Area of the exact (curved) domain.
    pub fn exact_area(&self) -> f64 {
        match self {
            DomainSpec::Disk => PI,
            DomainSpec::Ellipse => PI / SQRT_2,
            DomainSpec::Eye => 1.0 / 3.0,
            // 4 Gamma(1.4)^2 / Gamma(1.8)
            DomainSpec::SmoothedSquare => 3.380_935_362_537_384,
            DomainSpec::Polygon(v) => shoelace(v),
        }
    }

    /// Strict interior test for the exact domain.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [x, y] = p;
        match self {
            DomainSpec::Disk => x * x + y * y < 1.0,
            DomainSpec::SmoothedSquare => x.abs().powf(2.5) + y.abs().powf(2.5) < 1.0,
            DomainSpec::Ellipse => x * x + 2.0 * y * y < 1.0,
            DomainSpec::Eye => x > 0.0 && x < 1.0 && y.abs() < x * (1.0 - x),
            DomainSpec::Polygon(v) => {
                let n = v.len();
                (0..n).all(|i| {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) > 0.0
                })
            }
        }
    }

    /// How far `p` is from satisfying the boundary equation (0 on the boundary).
    pub fn boundary_residual(&self, p: [f64; 2]) -> f64 {
        let [x, y] = p;
        match self {
            DomainSpec::Disk => (x * x + y * y - 1.0).abs(),
            DomainSpec::SmoothedSquare => (x.abs().powf(2.5) + y.abs().powf(2.5) - 1.0).abs(),
            DomainSpec::Ellipse => (x * x + 2.0 * y * y - 1.0).abs(),
            DomainSpec::Eye => (y.abs() - x * (1.0 - x)).abs(),
            DomainSpec::Polygon(v) => {
                let n = v.len();
                (0..n)
                    .map(|i| point_segment_distance(p, v[i], v[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Counterclockwise boundary samples with arclength spacing at most `spacing`.
    pub(crate) fn boundary_points(&self, spacing: f64) -> Vec<[f64; 2]> {
        match self {
            DomainSpec::Disk => sample_closed_curve(spacing, |t| {
                let (s, c) = t.sin_cos();
                [c, s]
            }),
            DomainSpec::Ellipse => sample_closed_curve(spacing, |t| {
                let (s, c) = t.sin_cos();
                [c, s / SQRT_2]
            }),
            DomainSpec::SmoothedSquare => sample_closed_curve(spacing, |t| {
                let (s, c) = t.sin_cos();
                [c.signum() * c.abs().powf(0.8), s.signum() * s.abs().powf(0.8)]
            }),
            DomainSpec::Eye => {
                // upper arc from (1, 0) to (0, 0), then lower arc back
                let upper = sample_open_curve(spacing, |t| {
                    let x = 1.0 - t;
                    [x, x * (1.0 - x)]
                });
                let lower = sample_open_curve(spacing, |t| [t, -t * (1.0 - t)]);
                let mut pts = upper;
                pts.pop();
                pts.extend_from_slice(&lower[..lower.len() - 1]);
                pts
            }
            DomainSpec::Polygon(v) => {
                let n = v.len();
                let mut pts = Vec::new();
                for i in 0..n {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                    let segs = (len / spacing).ceil().max(1.0) as usize;
                    for k in 0..segs {
                        let t = k as f64 / segs as f64;
                        pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    }
                }
                pts
            }
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(DomainSpec::Disk),
            "smoothed-square" | "square" => Ok(DomainSpec::SmoothedSquare),
            "ellipse" => Ok(DomainSpec::Ellipse),
            "eye" => Ok(DomainSpec::Eye),
            "unit-square" => Ok(DomainSpec::unit_square()),
            other => Err(Error::InvalidArgument(format!("unknown domain '{other}'"))),
        }
    }
}

pub(crate) fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

pub(crate) fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

const ARCLENGTH_SAMPLES: usize = 1 << 16;

/// Cumulative chord length of `curve` on a fine uniform grid over `[0, t_max]`.
fn arclength_table(curve: &impl Fn(f64) -> [f64; 2], t_max: f64) -> (Vec<f64>, Vec<f64>) {
    let ts: Vec<f64> = (0..=ARCLENGTH_SAMPLES)
        .map(|i| t_max * i as f64 / ARCLENGTH_SAMPLES as f64)
        .collect();
    let mut s = Vec::with_capacity(ts.len());
    s.push(0.0);
    let mut prev = curve(ts[0]);
    for &t in &ts[1..] {
        let p = curve(t);
        let last = *s.last().unwrap();
        s.push(last + (p[0] - prev[0]).hypot(p[1] - prev[1]));
        prev = p;
    }
    (ts, s)
}

fn parameter_at(ts: &[f64], s: &[f64], target: f64) -> f64 {
    let i = s.partition_point(|&v| v <= target).clamp(1, s.len() - 1);
    let (s0, s1) = (s[i - 1], s[i]);
    let w = if s1 > s0 { (target - s0) / (s1 - s0) } else { 0.0 };
    ts[i - 1] + w * (ts[i] - ts[i - 1])
}

fn sample_closed_curve(spacing: f64, curve: impl Fn(f64) -> [f64; 2]) -> Vec<[f64; 2]> {
    let (ts, s) = arclength_table(&curve, 2.0 * PI);
    let total = *s.last().unwrap();
    let n = (total / spacing).ceil().max(3.0) as usize;
    (0..n)
        .map(|k| curve(parameter_at(&ts, &s, total * k as f64 / n as f64)))
        .collect()
}

/// Samples including both endpoints `curve(0)` and `curve(1)`.
fn sample_open_curve(spacing: f64, curve: impl Fn(f64) -> [f64; 2]) -> Vec<[f64; 2]> {
    let (ts, s) = arclength_table(&curve, 1.0);
    let total = *s.last().unwrap();
    let n = (total / spacing).ceil().max(1.0) as usize;
    let mut pts: Vec<[f64; 2]> = (0..n)
        .map(|k| curve(parameter_at(&ts, &s, total * k as f64 / n as f64)))
        .collect();
    pts.push(curve(1.0));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_convex_polygon() {
        let dart = vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.3], [1.0, 2.0]];
        assert!(DomainSpec::polygon(dart).is_err());
        let cw = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        assert!(DomainSpec::polygon(cw).is_err());
        assert!(DomainSpec::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).is_ok());
    }

    #[test]
    fn boundary_samples_lie_on_curves() {
        for d in [
            DomainSpec::Disk,
            DomainSpec::Ellipse,
            DomainSpec::SmoothedSquare,
            DomainSpec::Eye,
        ] {
            let pts = d.boundary_points(0.05);
            assert!(pts.len() >= 8);
            for p in &pts {
                assert!(d.boundary_residual(*p) < 1e-12, "{d}: {p:?}");
            }
            let n = pts.len();
            for i in 0..n {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                assert!((a[0] - b[0]).hypot(a[1] - b[1]) <= 0.05 * (1.0 + 1e-9));
            }
            assert!(shoelace(&pts) > 0.0, "{d} not counterclockwise");
        }
    }

    #[test]
    fn eye_corners_are_pinned() {
        let pts = DomainSpec::Eye.boundary_points(0.1);
        assert!(pts.contains(&[0.0, 0.0]));
        assert!(pts.contains(&[1.0, 0.0]));
    }

    #[test]
    fn smoothed_square_area_constant() {
        // Monte-Carlo-free check: polygon area of a fine sampling
        let pts = DomainSpec::SmoothedSquare.boundary_points(1e-3);
        let a = shoelace(&pts);
        assert!((a - DomainSpec::SmoothedSquare.exact_area()).abs() < 1e-4, "{a}");
    }
}
