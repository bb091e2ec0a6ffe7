//! Area quantities of a meromorphic `f`: the Dirichlet integral of the
//! Taylor part and the area of the complement of `f(|z| < r)`, each with
//! an independent numerical oracle.
//!
//! With `T(r) = Σ n |a_n|² r^{2n}` and `P(r) = Σ k |c_{-k}|² r^{-2k}` the
//! complement area is `π |P(r) - T(r)|`; the Dirichlet integral is `π T(r)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::compensated_sum;
use crate::meromorphic::{PolarizedMeromorphic, LAURENT_MAX_ORDER};
use crate::series::TruncatedSeries;

/// Relative accuracy targeted by the adaptive Laurent energy sum.
const ENERGY_RELATIVE_TARGET: f64 = 1e-16;

/// Minimum number of boundary samples accepted by the curve oracle.
pub const MIN_CURVE_SAMPLES: usize = 1024;

/// Sub-samples per axis in quadrature cells cut by the disk boundary.
const BOUNDARY_SUPERSAMPLING: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub value: f64,
    pub tail_estimate: f64,
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub r: f64,
    pub taylor_energy: f64,
    pub laurent_energy: f64,
    pub complement_area: f64,
    /// Sign of `P(r) - T(r)`; `+1` for genuinely univalent members.
    pub orientation: i8,
    pub tail_estimate: f64,
    pub laurent_terms: usize,
}

/// `T(r) = Σ_{n≥1} n |a_n|² r^{2n}` over the stored coefficients; the tail
/// estimate comes from the series' truncation metadata (zero when exact).
pub fn taylor_energy(taylor: &TruncatedSeries, r: f64) -> Energy {
    let r2 = r * r;
    let mut weight = 1.0;
    let value = compensated_sum(taylor.coefficients().iter().enumerate().skip(1).map(|(n, a)| {
        weight *= r2;
        n as f64 * a.norm_sqr() * weight
    }));
    Energy {
        value,
        tail_estimate: taylor.tail_bound().map_or(0.0, |t| t.weighted_square_sum(r)),
        terms: taylor.order(),
    }
}

/// `P(r) = Σ_{k≥1} k |c_{-k}|² r^{-2k}`, summed until the geometric tail
/// estimate is negligible or the order cap is reached.
pub fn laurent_energy(f: &PolarizedMeromorphic, r: f64) -> Result<Energy> {
    let p = f.p();
    if !(r > p) {
        return Err(Error::domain(format!("r = {r} must exceed the pole location p = {p}")));
    }
    let principal = f.principal();
    let m = f.pole_order();
    let inv_r2 = 1.0 / (r * r);

    let mut order = LAURENT_MAX_ORDER;
    let mut tail_estimate = f64::INFINITY;
    let mut running = 0.0;
    let mut weight = 1.0;
    for k in 1..=LAURENT_MAX_ORDER {
        weight *= inv_r2;
        let b = principal.recentred_bound(k);
        running += k as f64 * b * b * weight;
        if p == 0.0 && k >= m {
            order = k;
            tail_estimate = 0.0;
            break;
        }
        if k >= m {
            let q = principal.recentred_ratio(k + 1);
            let ratio = (k as f64 + 1.0) / k as f64 * q * q * inv_r2;
            if ratio < 1.0 {
                let b_next = principal.recentred_bound(k + 1);
                let next = (k as f64 + 1.0) * b_next * b_next * weight * inv_r2;
                let tail = next / (1.0 - ratio);
                if tail <= ENERGY_RELATIVE_TARGET * running.max(f64::MIN_POSITIVE) {
                    order = k;
                    tail_estimate = tail;
                    break;
                }
                tail_estimate = tail;
            }
        }
    }

    let tail = f.laurent_recentre(order)?;
    let mut weight = 1.0;
    let value = compensated_sum(tail.coefficients.iter().enumerate().map(|(idx, c)| {
        weight *= inv_r2;
        (idx + 1) as f64 * c.norm_sqr() * weight
    }));
    Ok(Energy {
        value,
        tail_estimate,
        terms: order,
    })
}

/// `π Σ n |a_n|² r^{2n}` for the Taylor part of `f`.
pub fn dirichlet_integral(f: &PolarizedMeromorphic, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("r = {r} is outside (0, 1]")));
    }
    Ok(PI * taylor_energy(f.taylor(), r).value)
}

/// Complement area `π |P(r) - T(r)|` for `p < r ≤ 1`.
pub fn complement_area_series(f: &PolarizedMeromorphic, r: f64) -> Result<AreaReport> {
    if !(r > f.p() && r <= 1.0) {
        return Err(Error::domain(format!("r = {r} must satisfy p = {} < r <= 1", f.p())));
    }
    if r > f.taylor().declared_radius() {
        return Err(Error::domain(format!(
            "r = {r} exceeds the Taylor part's declared radius {}",
            f.taylor().declared_radius()
        )));
    }
    let laurent = laurent_energy(f, r)?;
    let taylor = taylor_energy(f.taylor(), r);
    let difference = laurent.value - taylor.value;
    Ok(AreaReport {
        r,
        taylor_energy: taylor.value,
        laurent_energy: laurent.value,
        complement_area: PI * difference.abs(),
        orientation: if difference >= 0.0 { 1 } else { -1 },
        tail_estimate: PI * (laurent.tail_estimate + taylor.tail_estimate),
        laurent_terms: laurent.terms,
    })
}

/// Samples `θ ↦ f(r e^{iθ})` at `samples` equispaced angles.
pub fn image_curve(f: &PolarizedMeromorphic, r: f64, samples: usize) -> Result<Vec<(f64, Complex64)>> {
    (0..samples)
        .map(|j| {
            let theta = TAU * j as f64 / samples as f64;
            Ok((theta, f.evaluate_f(Complex64::from_polar(r, theta))?))
        })
        .collect()
}

/// Signed shoelace area of a closed polygon (positive when counter-clockwise).
pub fn shoelace_area(points: &[Complex64]) -> f64 {
    let Some(&origin) = points.first() else {
        return 0.0;
    };
    let n = points.len();
    0.5 * compensated_sum((0..n).map(|i| {
        let a = points[i] - origin;
        let b = points[(i + 1) % n] - origin;
        a.re * b.im - b.re * a.im
    }))
}

/// Area enclosed by the image of `|z| = r`, from the sampled polygon.
///
/// Fails with [`Error::SelfIntersection`] (carrying the area anyway) when
/// the sampled curve crosses itself.
pub fn complement_area_curve_oracle(f: &PolarizedMeromorphic, r: f64, samples: usize) -> Result<f64> {
    if !(r > f.p() && r < 1.0) {
        return Err(Error::domain(format!("r = {r} must satisfy p = {} < r < 1", f.p())));
    }
    if samples < MIN_CURVE_SAMPLES {
        return Err(Error::invalid(format!(
            "curve oracle needs at least {MIN_CURVE_SAMPLES} samples, got {samples}"
        )));
    }
    let points: Vec<Complex64> = image_curve(f, r, samples)?.into_iter().map(|(_, w)| w).collect();
    let area = shoelace_area(&points).abs();
    if polygon_self_intersects(&points) {
        return Err(Error::SelfIntersection { area });
    }
    Ok(area)
}

fn orientation(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Proper crossings between non-adjacent edges of a closed polygon, found
/// by bucketing edges into a uniform grid over the bounding box.
pub fn polygon_self_intersects(points: &[Complex64]) -> bool {
    let n = points.len();
    if n < 4 {
        return false;
    }
    let (mut lo, mut hi) = (points[0], points[0]);
    for w in points {
        lo = Complex64::new(lo.re.min(w.re), lo.im.min(w.im));
        hi = Complex64::new(hi.re.max(w.re), hi.im.max(w.im));
    }
    let cells_per_axis = ((n as f64).sqrt().ceil() as usize).max(1);
    let span_x = (hi.re - lo.re).max(f64::MIN_POSITIVE);
    let span_y = (hi.im - lo.im).max(f64::MIN_POSITIVE);
    let cell_of = |w: Complex64| {
        let cx = (((w.re - lo.re) / span_x) * cells_per_axis as f64) as usize;
        let cy = (((w.im - lo.im) / span_y) * cells_per_axis as f64) as usize;
        (cx.min(cells_per_axis - 1), cy.min(cells_per_axis - 1))
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells_per_axis * cells_per_axis];
    for i in 0..n {
        let (ax, ay) = cell_of(points[i]);
        let (bx, by) = cell_of(points[(i + 1) % n]);
        for cx in ax.min(bx)..=ax.max(bx) {
            for cy in ay.min(by)..=ay.max(by) {
                buckets[cy * cells_per_axis + cx].push(i);
            }
        }
    }
    buckets.iter().any(|bucket| {
        bucket.iter().enumerate().any(|(s, &i)| {
            bucket[s + 1..].iter().any(|&j| {
                let gap = i.abs_diff(j);
                if gap <= 1 || gap == n - 1 {
                    return false;
                }
                segments_cross(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n])
            })
        })
    })
}

/// Midpoint-rule quadrature of `∬_{|z|<r} |s'(z)|² dx dy` on a
/// `grid × grid` mesh; cells cut by the circle are supersampled so that
/// only their covered part contributes.
pub fn dirichlet_quadrature_oracle(s: &TruncatedSeries, r: f64, grid: usize) -> Result<f64> {
    if !(r > 0.0 && r <= s.declared_radius()) {
        return Err(Error::domain(format!(
            "r = {r} is outside (0, {}]",
            s.declared_radius()
        )));
    }
    if grid == 0 {
        return Err(Error::invalid("quadrature grid must be positive"));
    }
    if s.order() == 0 {
        return Ok(0.0);
    }
    let derivative = s.differentiate()?;
    let h = 2.0 * r / grid as f64;
    let r2 = r * r;
    let sub = BOUNDARY_SUPERSAMPLING;
    let sub_h = h / sub as f64;

    let rows: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let x0 = -r + i as f64 * h;
            compensated_sum((0..grid).map(|j| {
                let y0 = -r + j as f64 * h;
                let (x1, y1) = (x0 + h, y0 + h);
                let far_x = x0.abs().max(x1.abs());
                let far_y = y0.abs().max(y1.abs());
                let near_x = if x0 <= 0.0 && x1 >= 0.0 {
                    0.0
                } else {
                    x0.abs().min(x1.abs())
                };
                let near_y = if y0 <= 0.0 && y1 >= 0.0 {
                    0.0
                } else {
                    y0.abs().min(y1.abs())
                };
                if near_x * near_x + near_y * near_y >= r2 {
                    0.0
                } else if far_x * far_x + far_y * far_y <= r2 {
                    let z = Complex64::new(x0 + 0.5 * h, y0 + 0.5 * h);
                    derivative.horner(z).norm_sqr() * h * h
                } else {
                    let mut acc = 0.0;
                    for a in 0..sub {
                        for b in 0..sub {
                            let z = Complex64::new(x0 + (a as f64 + 0.5) * sub_h, y0 + (b as f64 + 0.5) * sub_h);
                            if z.norm_sqr() < r2 {
                                acc += derivative.horner(z).norm_sqr();
                            }
                        }
                    }
                    acc * sub_h * sub_h
                }
            }))
        })
        .collect();
    Ok(compensated_sum(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meromorphic::PrincipalPart;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn simple(p: f64, a: Complex64, taylor: TruncatedSeries) -> PolarizedMeromorphic {
        PolarizedMeromorphic::new(PrincipalPart::new(p, vec![a]).unwrap(), taylor)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn dirichlet_examples() {
        let a1 = c(0.3, -0.4);
        let f = simple(0.5, c(1.0, 0.0), TruncatedSeries::unit(vec![c(0.0, 0.0), a1]).unwrap());
        let r = 0.7;
        assert!(rel(dirichlet_integral(&f, r).unwrap(), PI * a1.norm_sqr() * r * r) < 1e-15);

        let f = PolarizedMeromorphic::extremal(
            PrincipalPart::new(0.5, vec![c(1.0, 0.0)]).unwrap(),
            c(0.0, 0.0),
            c(0.3, 0.0),
            200,
        )
        .unwrap();
        assert!(rel(dirichlet_integral(&f, 1.0).unwrap(), PI * 0.16) < 1e-14);

        let f = simple(0.5, c(1.0, 0.0), TruncatedSeries::zero(3));
        assert_eq!(dirichlet_integral(&f, 1.0).unwrap(), 0.0);
        assert!(dirichlet_integral(&f, 0.0).is_err());
        assert!(dirichlet_integral(&f, 1.5).is_err());
    }

    #[test]
    fn complement_area_examples() {
        let f = simple(0.5, c(1.0, 0.0), TruncatedSeries::zero(0));
        let report = complement_area_series(&f, 0.75).unwrap();
        let closed = PI * 0.5625 / (0.3125f64 * 0.3125);
        assert!(rel(report.complement_area, closed) < 1e-12);
        assert!((report.complement_area - 18.0956).abs() < 1e-4);
        assert_eq!(report.orientation, 1);

        let f = simple(0.0, c(1.0, 0.0), TruncatedSeries::zero(0));
        assert!(rel(complement_area_series(&f, 1.0).unwrap().complement_area, PI) < 1e-15);

        let (k, p) = (0.4, 0.3);
        let f = PolarizedMeromorphic::extremal(
            PrincipalPart::new(p, vec![c(1.0, 0.0)]).unwrap(),
            c(0.0, 0.0),
            c(0.0, k),
            200,
        )
        .unwrap();
        let area = complement_area_series(&f, 1.0).unwrap().complement_area;
        assert!(rel(area, PI * (1.0 - k * k) / (1.0 - p * p).powi(2)) < 1e-12);

        assert!(matches!(complement_area_series(&f, 0.3), Err(Error::Domain(_))));
        assert!(matches!(complement_area_series(&f, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn m1_reduction_on_grid() {
        let taylor = TruncatedSeries::unit(vec![c(0.1, 0.0), c(0.05, 0.02), c(-0.01, 0.03)]).unwrap();
        let a = c(0.8, -0.3);
        for &p in &[0.0, 0.2, 0.5] {
            for &r in &[0.6, 0.75, 0.9] {
                let f = simple(p, a, taylor.clone());
                let report = complement_area_series(&f, r).unwrap();
                let t = taylor_energy(&taylor, r).value;
                let closed = PI * a.norm_sqr() * r * r / (r * r - p * p).powi(2) - PI * t;
                assert!(rel(report.complement_area, closed) < 1e-8, "p={p} r={r}");
            }
        }
    }

    #[test]
    fn curve_oracle_examples() {
        let f = simple(0.0, c(1.0, 0.0), TruncatedSeries::zero(0));
        let area = complement_area_curve_oracle(&f, 0.9, 8192).unwrap();
        assert!(rel(area, PI / 0.81) < 1e-6);

        let f = simple(0.5, c(1.0, 0.0), TruncatedSeries::zero(0));
        let oracle = complement_area_curve_oracle(&f, 0.75, 8192).unwrap();
        let series = complement_area_series(&f, 0.75).unwrap().complement_area;
        assert!(rel(oracle, series) < 1e-4);

        assert!(matches!(
            complement_area_curve_oracle(&f, 0.5, 8192),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            complement_area_curve_oracle(&f, 0.4, 8192),
            Err(Error::Domain(_))
        ));
        assert!(complement_area_curve_oracle(&f, 0.75, 100).is_err());
    }

    #[test]
    fn curve_oracle_flags_non_univalent_images() {
        // z^-1 + 2 z^3 winds the image of |z| = 0.9 into loops
        let f = simple(
            0.0,
            c(1.0, 0.0),
            TruncatedSeries::from_real(&[0.0, 0.0, 0.0, 2.0]).unwrap(),
        );
        assert!(matches!(
            complement_area_curve_oracle(&f, 0.9, 2048),
            Err(Error::SelfIntersection { .. })
        ));
    }

    #[test]
    fn self_intersection_detector() {
        let square = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        assert!(!polygon_self_intersects(&square));
        let bowtie = [c(0.0, 0.0), c(1.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)];
        assert!(polygon_self_intersects(&bowtie));
        assert_eq!(shoelace_area(&square), 1.0);
    }

    #[test]
    fn quadrature_examples() {
        let identity = TruncatedSeries::from_real(&[0.0, 1.0]).unwrap();
        let q = dirichlet_quadrature_oracle(&identity, 0.5, 512).unwrap();
        assert!((q - PI * 0.25).abs() < 1e-3);

        let square = TruncatedSeries::from_real(&[0.0, 0.0, 1.0]).unwrap();
        let q = dirichlet_quadrature_oracle(&square, 0.5, 1024).unwrap();
        let series = PI * 2.0 * 0.5f64.powi(4);
        assert!(rel(q, series) < 1e-3);

        let zero = TruncatedSeries::zero(4);
        assert_eq!(dirichlet_quadrature_oracle(&zero, 0.5, 64).unwrap(), 0.0);
    }
}
