use serde::Serialize;

use super::ValueLine;
use crate::instances::{ConcaveFn, InstanceError};

/// Lower envelope of a family of value lines sampled at `{0} ∪ xs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub g: ConcaveFn,
    /// Index of the cheapest line at each breakpoint of `g` (lowest index on
    /// ties), origin included.
    pub achieving: Vec<usize>,
}

/// `g(x) = min_i (n_i x + H_i)` at `x ∈ {0} ∪ xs`, linearly interpolated.
pub fn value_envelope(lines: &[ValueLine], xs: &[f64]) -> Result<Envelope, InstanceError> {
    if lines.is_empty() {
        return Err(InstanceError::invalid("lines", "at least one value line is required"));
    }
    if lines.iter().any(|l| !(l.deliveries >= 0.0 && l.holding >= 0.0)) {
        return Err(InstanceError::invalid("lines", "value lines must be nonnegative"));
    }
    if xs.iter().any(|&x| !(x.is_finite() && x >= 0.0)) || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(InstanceError::invalid("xs", "must be finite, nonnegative and strictly increasing"));
    }
    let mut grid = vec![0.0];
    grid.extend(xs.iter().copied().filter(|&x| x > 0.0));
    let mut points = Vec::with_capacity(grid.len());
    let mut achieving = Vec::with_capacity(grid.len());
    for &x in &grid {
        let (idx, v) = lines
            .iter()
            .enumerate()
            .map(|(i, l)| (i, l.at(x)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("nonempty");
        points.push((x, v));
        achieving.push(idx);
    }
    // A minimum of lines is concave; the tolerance absorbs rounding.
    let g = ConcaveFn::with_tol(points, 1e-7)?;
    Ok(Envelope { g, achieving })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceOutcome {
    /// Index into the input lines of the schedule kept at each distance.
    pub chosen: Vec<usize>,
    pub values: Vec<f64>,
    /// Whether `(0, 0)` followed by `(xs[i], values[i])` is nondecreasing
    /// and concave.
    pub concave_nondecreasing: bool,
}

/// The sequential keep-or-replace construction: keep the previous schedule
/// when it is strictly cheaper at the next distance than the fresh one.
/// `lines[i]` is the schedule computed for delivery price `xs[i]`.
pub fn sequential_envelope(lines: &[ValueLine], xs: &[f64]) -> SequenceOutcome {
    assert_eq!(lines.len(), xs.len(), "one schedule per distance");
    let mut chosen: Vec<usize> = Vec::with_capacity(xs.len());
    let mut values = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let pick = match chosen.last() {
            Some(&prev) if lines[prev].at(x) < lines[i].at(x) => prev,
            _ => i,
        };
        chosen.push(pick);
        values.push(lines[pick].at(x));
    }
    let mut pts = vec![(0.0, 0.0)];
    pts.extend(xs.iter().copied().zip(values.iter().copied()).filter(|&(x, _)| x > 0.0));
    let concave_nondecreasing = ConcaveFn::with_tol(pts, 1e-9).is_ok();
    SequenceOutcome {
        chosen,
        values,
        concave_nondecreasing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: f64, h: f64) -> ValueLine {
        ValueLine { deliveries: n, holding: h }
    }

    #[test]
    fn single_line() {
        let e = value_envelope(&[line(2.0, 3.0)], &[1.0, 2.0]).unwrap();
        let pts = e.g.breakpoints();
        assert_eq!(pts, &[(0.0, 3.0), (1.0, 5.0), (2.0, 7.0)]);
    }

    #[test]
    fn two_lines_cross() {
        let e = value_envelope(&[line(2.0, 3.0), line(1.0, 4.0)], &[1.0, 2.0]).unwrap();
        assert_eq!(e.g.eval(1.0), 5.0);
        assert_eq!(e.g.eval(2.0), 6.0);
        assert_eq!(e.achieving, vec![0, 0, 1]);
        assert_eq!(value_envelope(&[line(2.0, 3.0), line(1.0, 4.0)], &[0.5]).unwrap().g.eval(0.5), 4.0);
    }

    #[test]
    fn sequence_with_equal_schedules() {
        let out = sequential_envelope(&[line(1.0, 1.0), line(1.0, 1.0)], &[1.0, 2.0]);
        assert_eq!(out.values, vec![2.0, 3.0]);
        assert!(out.concave_nondecreasing);
    }

    #[test]
    fn sequence_can_decrease() {
        let out = sequential_envelope(&[line(2.0, 3.0), line(1.0, 2.0)], &[1.0, 2.0]);
        assert_eq!(out.chosen, vec![0, 1]);
        assert_eq!(out.values, vec![5.0, 4.0]);
        assert!(!out.concave_nondecreasing);
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(value_envelope(&[line(1.0, 0.0)], &[2.0, 1.0]).is_err());
        assert!(value_envelope(&[], &[1.0]).is_err());
    }
}
