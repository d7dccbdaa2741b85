use serde::{Deserialize, Serialize};

use super::InstanceError;

/// Nondecreasing concave piecewise-linear function on `[0, ∞)`.
///
/// Evaluation interpolates linearly between breakpoints and extrapolates with
/// the last slope beyond the final one. A single breakpoint is a constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct ConcaveFn {
    points: Vec<(f64, f64)>,
}

impl ConcaveFn {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, InstanceError> {
        Self::with_tol(points, super::DEFAULT_TOL)
    }

    pub fn with_tol(points: Vec<(f64, f64)>, tol: f64) -> Result<Self, InstanceError> {
        let bad = |reason: String| InstanceError::invalid("g", reason);
        let Some(&(x0, _)) = points.first() else {
            return Err(bad("empty breakpoint list".into()));
        };
        if x0 != 0.0 {
            return Err(bad(format!("first breakpoint must be at x = 0, got {x0}")));
        }
        if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite() || y < 0.0) {
            return Err(bad("breakpoints must be finite with y >= 0".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(bad("breakpoint x values must be strictly increasing".into()));
            }
            if w[1].1 < w[0].1 - tol {
                return Err(bad("function must be nondecreasing".into()));
            }
        }
        let slopes: Vec<f64> = points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        for (k, w) in slopes.windows(2).enumerate() {
            if w[1] > w[0] + tol * (1.0 + w[0].abs()) {
                return Err(bad(format!(
                    "chord slopes increase at breakpoint {} ({} -> {}); not concave",
                    k + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    /// Linear function `slope * x` through the origin.
    pub fn linear(slope: f64) -> Result<Self, InstanceError> {
        Self::new(vec![(0.0, 0.0), (1.0, slope)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn at_zero(&self) -> f64 {
        self.points[0].1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= 0.0 || pts.len() == 1 {
            return pts[0].1;
        }
        // first breakpoint with abscissa >= x
        let idx = pts.partition_point(|&(px, _)| px < x);
        let (a, b) = if idx == 0 {
            (pts[0], pts[1])
        } else if idx >= pts.len() {
            (pts[pts.len() - 2], pts[pts.len() - 1])
        } else {
            (pts[idx - 1], pts[idx])
        };
        if x == b.0 {
            return b.1;
        }
        a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
    }
}

impl TryFrom<Vec<(f64, f64)>> for ConcaveFn {
    type Error = InstanceError;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<ConcaveFn> for Vec<(f64, f64)> {
    fn from(g: ConcaveFn) -> Self {
        g.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_and_extrapolates() {
        let g = ConcaveFn::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]).unwrap();
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(1.0), 2.0);
        assert_eq!(g.eval(2.0), 2.5);
        assert_eq!(g.eval(5.0), 4.0);
    }

    #[test]
    fn rejects_convex_and_decreasing() {
        assert!(ConcaveFn::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(ConcaveFn::new(vec![(0.0, 1.0), (1.0, 0.5)]).is_err());
        assert!(ConcaveFn::new(vec![(0.5, 1.0)]).is_err());
        assert!(ConcaveFn::new(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn single_point_is_constant() {
        let g = ConcaveFn::new(vec![(0.0, 2.0)]).unwrap();
        assert_eq!(g.eval(7.0), 2.0);
    }
}
