use serde::Serialize;

/// Dense distance matrix over an abstract point set.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    pub dist: Vec<Vec<f64>>,
}

impl MetricSpace {
    pub fn new(dist: Vec<Vec<f64>>) -> Self {
        Self { dist }
    }

    /// Euclidean distances between planar points.
    pub fn euclidean(points: &[(f64, f64)]) -> Self {
        let dist = points
            .iter()
            .map(|a| {
                points
                    .iter()
                    .map(|b| (a.0 - b.0).hypot(a.1 - b.1))
                    .collect()
            })
            .collect();
        Self { dist }
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum MetricViolation {
    NonSquare { row: usize, len: usize },
    Negative { a: usize, b: usize },
    NonzeroDiagonal { a: usize },
    Asymmetry { a: usize, b: usize },
    /// `dist[a][c] > dist[a][b] + dist[b][c] + tol`, reported once with `a < c`.
    Triangle { a: usize, b: usize, c: usize },
}

/// Lists every way `m` fails to be a metric within `tol`.
///
/// Structural problems (non-square rows) are reported and the remaining checks
/// are skipped, since they index past the short rows.
pub fn validate_metric(m: &MetricSpace, tol: f64) -> Vec<MetricViolation> {
    let n = m.dist.len();
    let mut out = Vec::new();
    for (row, r) in m.dist.iter().enumerate() {
        if r.len() != n {
            out.push(MetricViolation::NonSquare { row, len: r.len() });
        }
    }
    if !out.is_empty() {
        return out;
    }
    let d = &m.dist;
    for a in 0..n {
        if d[a][a].abs() > tol {
            out.push(MetricViolation::NonzeroDiagonal { a });
        }
        for b in 0..n {
            if d[a][b] < 0.0 || d[a][b].is_nan() {
                out.push(MetricViolation::Negative { a, b });
            }
            if a < b && (d[a][b] - d[b][a]).abs() > tol {
                out.push(MetricViolation::Asymmetry { a, b });
            }
        }
    }
    for a in 0..n {
        for c in a + 1..n {
            for b in 0..n {
                if b == a || b == c {
                    continue;
                }
                if d[a][c] > d[a][b] + d[b][c] + tol {
                    out.push(MetricViolation::Triangle { a, b, c });
                }
            }
        }
    }
    out
}
