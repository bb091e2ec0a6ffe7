//! Sampling helpers shared by the grid sweeps.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// `samples` equispaced points `r e^{2πi j/samples}`, `j = 0..samples`.
pub fn circle(r: f64, samples: usize) -> impl Iterator<Item = Complex64> {
    (0..samples).map(move |j| Complex64::from_polar(r, TAU * j as f64 / samples as f64))
}

/// Winding number of the closed polygon `values` around the origin.
///
/// Each step contributes the principal argument of `w_{j+1}/w_j`, so the
/// sampling must be fine enough that consecutive values turn by less than π.
pub fn winding_number(values: &[Complex64]) -> i64 {
    if values.len() < 2 {
        return 0;
    }
    let total: f64 = values
        .iter()
        .zip(values.iter().cycle().skip(1))
        .map(|(a, b)| (b / a).arg())
        .sum();
    (total / TAU).round() as i64
}

/// Index and value of the maximum; ties keep the earliest index.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Neumaier-compensated sum in iteration order.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_of_powers() {
        for k in -3i32..=3 {
            let values: Vec<_> = circle(1.0, 512).map(|z| z.powi(k)).collect();
            assert_eq!(winding_number(&values), k as i64);
        }
        let shifted: Vec<_> = circle(1.0, 512).map(|z| z + 2.0).collect();
        assert_eq!(winding_number(&shifted), 0);
    }

    #[test]
    fn argmax_keeps_first_tie() {
        assert_eq!(argmax([1.0, 3.0, 3.0, 2.0]), Some((1, 3.0)));
        assert_eq!(argmax(Vec::<f64>::new()), None);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let values = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(values), 2.0);
    }
}
