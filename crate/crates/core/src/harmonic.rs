//! Sense-preserving harmonic maps `f = h + ḡ` on bounded convex domains.
//!
//! The extension condition compares `|h' - η'| + |g'|` against `k K(η, Ω)`,
//! where `K(η, Ω)` is the co-Lipschitz constant of a reference univalent
//! `η`. `K` is estimated from sampled `|η'|`, never proven.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{inputs_digest, Certificate, CriterionId};
use crate::error::{Error, Result};
use crate::grid::winding_number;
use crate::series::TruncatedSeries;

pub const MIN_GRID: usize = 64;
pub const BOUNDARY_SAMPLES: usize = 4096;
const DEGENERATE_ETA: f64 = 1e-12;
const VANISHING_H: f64 = 1e-12;
/// Allowed deviation from convexity in the polygon cross products.
const CONVEXITY_SLACK: f64 = 1e-12;
pub const MIN_BILIPSCHITZ_PAIRS: usize = 10_000;
/// Relative tolerance of the bi-Lipschitz comparisons, per unit `|Δz|`.
pub const BILIPSCHITZ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "DomainShape")]
pub enum ConvexDomain {
    Disk { center: Complex64, radius: f64 },
    Polygon { vertices: Vec<Complex64> },
}

/// Unvalidated form of [`ConvexDomain`], as read from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainShape {
    Disk { center: Complex64, radius: f64 },
    Polygon { vertices: Vec<Complex64> },
}

impl TryFrom<DomainShape> for ConvexDomain {
    type Error = Error;

    fn try_from(shape: DomainShape) -> Result<Self> {
        match shape {
            DomainShape::Disk { center, radius } => ConvexDomain::disk(center, radius),
            DomainShape::Polygon { vertices } => ConvexDomain::polygon(vertices),
        }
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

impl ConvexDomain {
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::invalid(format!(
                "disk needs a finite center and positive radius, got {radius}"
            )));
        }
        Ok(ConvexDomain::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        ConvexDomain::Disk {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    /// Convex polygon with counterclockwise vertices.
    pub fn polygon(vertices: Vec<Complex64>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::invalid("a polygon needs at least three vertices"));
        }
        if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("polygon vertices must be finite"));
        }
        let scale = vertices.iter().map(|v| v.norm_sqr()).fold(1.0, f64::max);
        let mut area2 = 0.0;
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if cross(b - a, c - b) < -CONVEXITY_SLACK * scale {
                return Err(Error::invalid(format!(
                    "polygon is not convex and counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
            area2 += cross(a, b);
        }
        if !(area2 > CONVEXITY_SLACK * scale) {
            return Err(Error::invalid("polygon has no interior"));
        }
        Ok(ConvexDomain::Polygon { vertices })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            ConvexDomain::Disk { center, radius } => (z - center).norm() <= *radius,
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| cross(vertices[(i + 1) % n] - vertices[i], z - vertices[i]) >= 0.0)
            }
        }
    }

    /// Largest `|z|` over the closed domain.
    pub fn max_modulus(&self) -> f64 {
        match self {
            ConvexDomain::Disk { center, radius } => center.norm() + radius,
            ConvexDomain::Polygon { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// `(min corner, max corner)` of the bounding box.
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        match self {
            ConvexDomain::Disk { center, radius } => (
                center - radius * Complex64::new(1.0, 1.0),
                center + radius * Complex64::new(1.0, 1.0),
            ),
            ConvexDomain::Polygon { vertices } => {
                let lo = vertices
                    .iter()
                    .fold(Complex64::new(f64::INFINITY, f64::INFINITY), |a, v| {
                        Complex64::new(a.re.min(v.re), a.im.min(v.im))
                    });
                let hi = vertices
                    .iter()
                    .fold(Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |a, v| {
                        Complex64::new(a.re.max(v.re), a.im.max(v.im))
                    });
                (lo, hi)
            }
        }
    }

    /// `samples` points along the boundary, counterclockwise.
    pub fn boundary(&self, samples: usize) -> Vec<Complex64> {
        match self {
            ConvexDomain::Disk { center, radius } => (0..samples)
                .map(|j| center + Complex64::from_polar(*radius, TAU * j as f64 / samples as f64))
                .collect(),
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                let lengths: Vec<f64> = (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).collect();
                let perimeter: f64 = lengths.iter().sum();
                let mut out = Vec::with_capacity(samples);
                for j in 0..samples {
                    let mut s = perimeter * j as f64 / samples as f64;
                    let mut i = 0;
                    while i + 1 < n && s > lengths[i] {
                        s -= lengths[i];
                        i += 1;
                    }
                    let t = if lengths[i] > 0.0 {
                        (s / lengths[i]).min(1.0)
                    } else {
                        0.0
                    };
                    out.push(vertices[i] + (vertices[(i + 1) % n] - vertices[i]) * t);
                }
                out
            }
        }
    }

    /// Points of an `n × n` lattice on the bounding box that fall in the domain.
    pub fn interior_grid(&self, n: usize) -> Vec<Complex64> {
        let (lo, hi) = self.bounding_box();
        let step = |a: f64, b: f64, i: usize| a + (b - a) * (i as f64 + 0.5) / n as f64;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| Complex64::new(step(lo.re, hi.re, i), step(lo.im, hi.im, j))))
            .filter(|z| self.contains(*z))
            .collect()
    }

    /// Interior lattice followed by the boundary samples.
    pub fn sample_points(&self, n: usize) -> Vec<Complex64> {
        let mut points = self.interior_grid(n);
        points.extend(self.boundary(BOUNDARY_SAMPLES.max(4 * n)));
        points
    }

    fn random_point<R: Rng>(&self, rng: &mut R) -> Complex64 {
        let (lo, hi) = self.bounding_box();
        loop {
            let z = Complex64::new(rng.gen_range(lo.re..=hi.re), rng.gen_range(lo.im..=hi.im));
            if self.contains(z) {
                return z;
            }
        }
    }
}

fn derivative_series(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    if s.order() == 0 {
        Ok(TruncatedSeries::zero(0))
    } else {
        s.differentiate()
    }
}

fn ensure_covers(s: &TruncatedSeries, domain: &ConvexDomain, name: &str) -> Result<()> {
    if domain.max_modulus() > s.declared_radius() {
        return Err(Error::domain(format!(
            "{name} is declared on |z| <= {} but the domain reaches |z| = {}",
            s.declared_radius(),
            domain.max_modulus()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMapSpec {
    h: TruncatedSeries,
    g: TruncatedSeries,
    domain: ConvexDomain,
}

impl HarmonicMapSpec {
    /// Validates that both series cover the domain and that `|g'| < |h'|`
    /// at every sample of a 64×64 lattice plus the boundary.
    pub fn new(h: TruncatedSeries, g: TruncatedSeries, domain: ConvexDomain) -> Result<Self> {
        ensure_covers(&h, &domain, "h")?;
        ensure_covers(&g, &domain, "g")?;
        let (dh, dg) = (derivative_series(&h)?, derivative_series(&g)?);
        let points = domain.sample_points(MIN_GRID);
        let bad = points
            .par_iter()
            .position_first(|&z| !(dg.horner(z).norm() < dh.horner(z).norm()));
        if let Some(i) = bad {
            return Err(Error::invalid(format!(
                "harmonic map is not sense-preserving: |g'| >= |h'| at {}",
                points[i]
            )));
        }
        Ok(HarmonicMapSpec { h, g, domain })
    }

    pub fn h(&self) -> &TruncatedSeries {
        &self.h
    }

    pub fn g(&self) -> &TruncatedSeries {
        &self.g
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    /// `h(z) + conj(g(z))`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.h.evaluate(z)? + self.g.evaluate(z)?.conj())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoLipschitzEstimate {
    /// Minimum sampled `|η'|`, the estimate of `K(η, Ω)`.
    pub k_lower: f64,
    /// Maximum sampled `|η'|`.
    pub m_upper: f64,
    pub argmin: Complex64,
    pub eta: TruncatedSeries,
}

/// Sampled `min |η'|` and `max |η'|` over the closed domain.
///
/// A zero of `η'` strictly inside can fall between lattice points, so the
/// winding number of `η'` along the boundary is checked as well.
pub fn co_lipschitz_estimate(eta: &TruncatedSeries, domain: &ConvexDomain, grid: usize) -> Result<CoLipschitzEstimate> {
    if grid < MIN_GRID {
        return Err(Error::invalid(format!("grid {grid} is below the minimum {MIN_GRID}")));
    }
    ensure_covers(eta, domain, "eta")?;
    let d = derivative_series(eta)?;
    let points = domain.sample_points(grid);
    let moduli: Vec<f64> = points.par_iter().map(|&z| d.horner(z).norm()).collect();
    let (mut min_i, mut max_v) = (0, 0.0f64);
    for (i, &v) in moduli.iter().enumerate() {
        if v < moduli[min_i] {
            min_i = i;
        }
        max_v = max_v.max(v);
    }
    let min_v = moduli[min_i];
    let boundary: Vec<Complex64> = domain
        .boundary(BOUNDARY_SAMPLES.max(4 * grid))
        .iter()
        .map(|&z| d.horner(z))
        .collect();
    let winding = if min_v < DEGENERATE_ETA {
        0
    } else {
        winding_number(&boundary)
    };
    if min_v < DEGENERATE_ETA || winding != 0 {
        return Err(Error::DegenerateEta {
            min_abs: min_v,
            winding,
        });
    }
    Ok(CoLipschitzEstimate {
        k_lower: min_v,
        m_upper: max_v,
        argmin: points[min_i],
        eta: eta.clone(),
    })
}

/// Pass iff `max (|h' - η'| + |g'|) ≤ k K(η, Ω)` over the sampled domain.
pub fn check_extension_condition(
    spec: &HarmonicMapSpec,
    eta: &TruncatedSeries,
    k: f64,
    grid: usize,
) -> Result<Certificate> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::invalid(format!("k = {k} outside [0, 1)")));
    }
    let estimate = co_lipschitz_estimate(eta, spec.domain(), grid)?;
    let (dh, dg, de) = (
        derivative_series(spec.h())?,
        derivative_series(spec.g())?,
        derivative_series(eta)?,
    );
    let points = spec.domain().sample_points(grid);
    let lhs = points
        .par_iter()
        .map(|&z| (dh.horner(z) - de.horner(z)).norm() + dg.horner(z).norm())
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    let bound = k * estimate.k_lower;
    Ok(Certificate::from_margin(
        CriterionId::HarmonicExtension,
        bound - lhs,
        inputs_digest(&(spec, eta, k)),
        format!(
            "max |h'-eta'|+|g'|={lhs:e} kK={bound:e} K={:e} M={:e}",
            estimate.k_lower, estimate.m_upper
        ),
    ))
}

/// `ω_f = g' / h'`.
pub fn dilatation_omega_f(spec: &HarmonicMapSpec, z: Complex64) -> Result<Complex64> {
    spec.h().check_radius(z)?;
    spec.g().check_radius(z)?;
    let dh = spec.h().jet3(z)[1];
    if dh.norm() < VANISHING_H {
        return Err(Error::VanishingDenominator { z, abs: dh.norm() });
    }
    Ok(spec.g().jet3(z)[1] / dh)
}

/// Largest sampled `|ω_f|` on the lattice plus boundary.
pub fn max_dilatation_omega_f(spec: &HarmonicMapSpec, grid: usize) -> Result<f64> {
    let values: Result<Vec<f64>> = spec
        .domain()
        .sample_points(grid)
        .par_iter()
        .map(|&z| dilatation_omega_f(spec, z).map(|w| w.norm()))
        .collect();
    Ok(values?.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilipschitzViolation {
    pub z1: Complex64,
    pub z2: Complex64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilipschitzReport {
    pub pairs: usize,
    pub seed: u64,
    pub lower_constant: f64,
    pub upper_constant: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower_violations: usize,
    pub upper_violations: usize,
    /// The first violations found, in sampling order.
    pub examples: Vec<BilipschitzViolation>,
}

impl BilipschitzReport {
    pub fn is_clean(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0
    }
}

const REPORTED_VIOLATIONS: usize = 32;

/// Checks `(1 - k) K |Δz| ≤ |Δf| ≤ (M + k K) |Δz|` on random pairs, with
/// `K`, `M` from [`co_lipschitz_estimate`] on a 64×64 lattice.
pub fn bilipschitz_sample_check(
    spec: &HarmonicMapSpec,
    eta: &TruncatedSeries,
    k: f64,
    pairs: usize,
    seed: u64,
) -> Result<BilipschitzReport> {
    if pairs < MIN_BILIPSCHITZ_PAIRS {
        return Err(Error::invalid(format!(
            "at least {MIN_BILIPSCHITZ_PAIRS} pairs are needed, got {pairs}"
        )));
    }
    if !(0.0..1.0).contains(&k) {
        return Err(Error::invalid(format!("k = {k} outside [0, 1)")));
    }
    let estimate = co_lipschitz_estimate(eta, spec.domain(), MIN_GRID)?;
    let lower = (1.0 - k) * estimate.k_lower;
    let upper = estimate.m_upper + k * estimate.k_lower;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(Complex64, Complex64)> = (0..pairs)
        .map(|_| {
            (
                spec.domain().random_point(&mut rng),
                spec.domain().random_point(&mut rng),
            )
        })
        .collect();
    let ratios: Vec<Option<f64>> = draws
        .par_iter()
        .map(|&(z1, z2)| {
            let dz = (z2 - z1).norm();
            if dz == 0.0 {
                return Ok(None);
            }
            Ok(Some((spec.evaluate(z2)? - spec.evaluate(z1)?).norm() / dz))
        })
        .collect::<Result<_>>()?;

    let mut report = BilipschitzReport {
        pairs,
        seed,
        lower_constant: lower,
        upper_constant: upper,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        lower_violations: 0,
        upper_violations: 0,
        examples: Vec::new(),
    };
    for (&(z1, z2), ratio) in draws.iter().zip(ratios) {
        let Some(ratio) = ratio else { continue };
        report.min_ratio = report.min_ratio.min(ratio);
        report.max_ratio = report.max_ratio.max(ratio);
        let low = ratio < lower - BILIPSCHITZ_TOL;
        let high = ratio > upper + BILIPSCHITZ_TOL;
        report.lower_violations += low as usize;
        report.upper_violations += high as usize;
        if (low || high) && report.examples.len() < REPORTED_VIOLATIONS {
            report.examples.push(BilipschitzViolation { z1, z2, ratio });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn series(coefficients: &[f64]) -> TruncatedSeries {
        TruncatedSeries::from_real(coefficients).unwrap()
    }

    fn identity() -> TruncatedSeries {
        series(&[0.0, 1.0])
    }

    /// `g(z) = 0.15 z²`, so `g'(z) = 0.3 z`.
    fn passing_spec() -> HarmonicMapSpec {
        HarmonicMapSpec::new(identity(), series(&[0.0, 0.0, 0.15]), ConvexDomain::unit_disk()).unwrap()
    }

    #[test]
    fn domain_validation() {
        assert!(ConvexDomain::disk(c(0.0, 0.0), 0.0).is_err());
        let square = vec![c(-0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5), c(-0.5, 0.5)];
        assert!(ConvexDomain::polygon(square.clone()).is_ok());
        let mut clockwise = square.clone();
        clockwise.reverse();
        assert!(ConvexDomain::polygon(clockwise).is_err());
        let dart = vec![c(0.0, 0.0), c(1.0, -1.0), c(0.2, 0.0), c(1.0, 1.0)];
        assert!(ConvexDomain::polygon(dart).is_err());
        assert!(ConvexDomain::polygon(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]).is_err());
    }

    #[test]
    fn polygon_sampling_stays_inside() {
        let tri = ConvexDomain::polygon(vec![c(-0.5, -0.4), c(0.6, -0.3), c(0.0, 0.7)]).unwrap();
        for z in tri.boundary(300) {
            let n = 3;
            let ConvexDomain::Polygon { vertices } = &tri else {
                unreachable!()
            };
            let on_edge = (0..n).any(|i| cross(vertices[(i + 1) % n] - vertices[i], z - vertices[i]).abs() < 1e-12);
            assert!(on_edge);
        }
        assert!(tri.interior_grid(64).iter().all(|z| tri.contains(*z)));
    }

    #[test]
    fn co_lipschitz_examples() {
        let est = co_lipschitz_estimate(&identity(), &ConvexDomain::unit_disk(), 64).unwrap();
        assert_eq!((est.k_lower, est.m_upper), (1.0, 1.0));

        let est = co_lipschitz_estimate(&series(&[0.0, 1.0, 0.2]), &ConvexDomain::unit_disk(), 64).unwrap();
        assert!((est.k_lower - 0.6).abs() < 1e-12);
        assert!((est.m_upper - 1.4).abs() < 1e-12);
        assert!((est.argmin - c(-1.0, 0.0)).norm() < 1e-12);

        assert!(matches!(
            co_lipschitz_estimate(&series(&[0.0, 0.0, 1.0]), &ConvexDomain::unit_disk(), 64),
            Err(Error::DegenerateEta { .. })
        ));
        assert!(co_lipschitz_estimate(&identity(), &ConvexDomain::unit_disk(), 32).is_err());
    }

    #[test]
    fn extension_condition_examples() {
        let spec = passing_spec();
        let cert = check_extension_condition(&spec, &identity(), 0.45, 64).unwrap();
        assert!(cert.passed());
        assert!((cert.margin - 0.15).abs() < 1e-12);

        let cert = check_extension_condition(&spec, &identity(), 0.2, 64).unwrap();
        assert!(!cert.passed());
        assert!((cert.margin + 0.1).abs() < 1e-12);

        let conformal = HarmonicMapSpec::new(identity(), series(&[0.0]), ConvexDomain::unit_disk()).unwrap();
        for k in [0.0, 0.5] {
            let cert = check_extension_condition(&conformal, &identity(), k, 64).unwrap();
            assert!(cert.passed());
        }
    }

    #[test]
    fn omega_f_examples() {
        let spec = passing_spec();
        assert!((dilatation_omega_f(&spec, c(0.5, 0.0)).unwrap() - c(0.15, 0.0)).norm() < 1e-15);
        let max = max_dilatation_omega_f(&spec, 64).unwrap();
        assert!((max - 0.3).abs() < 1e-12 && max < 0.45);

        let conformal = HarmonicMapSpec::new(identity(), series(&[0.0]), ConvexDomain::unit_disk()).unwrap();
        assert_eq!(max_dilatation_omega_f(&conformal, 64).unwrap(), 0.0);
    }

    #[test]
    fn sense_reversing_spec_is_rejected() {
        let err = HarmonicMapSpec::new(identity(), series(&[0.0, 1.2]), ConvexDomain::unit_disk());
        assert!(matches!(err, Err(Error::InvalidInput(_))));
        let outside = ConvexDomain::disk(c(0.5, 0.0), 0.8).unwrap();
        assert!(HarmonicMapSpec::new(identity(), series(&[0.0]), outside).is_err());
    }

    #[test]
    fn bilipschitz_examples() {
        let report = bilipschitz_sample_check(&passing_spec(), &identity(), 0.45, 10_000, 11).unwrap();
        assert!(report.is_clean(), "{report:?}");
        assert!(report.min_ratio >= 0.55 && report.max_ratio <= 1.45);

        let conformal = HarmonicMapSpec::new(identity(), series(&[0.0]), ConvexDomain::unit_disk()).unwrap();
        let report = bilipschitz_sample_check(&conformal, &identity(), 0.3, 10_000, 11).unwrap();
        assert!(report.is_clean());
        assert!((report.min_ratio - 1.0).abs() < 1e-12 && (report.max_ratio - 1.0).abs() < 1e-12);

        let folded = HarmonicMapSpec::new(identity(), series(&[0.0, 0.9]), ConvexDomain::unit_disk()).unwrap();
        let report = bilipschitz_sample_check(&folded, &identity(), 0.45, 10_000, 11).unwrap();
        assert!(report.lower_violations > 0);
        assert_eq!(
            report,
            bilipschitz_sample_check(&folded, &identity(), 0.45, 10_000, 11).unwrap()
        );
    }

    #[test]
    fn polygon_condition() {
        let square = ConvexDomain::polygon(vec![c(-0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5), c(-0.5, 0.5)]).unwrap();
        let spec = HarmonicMapSpec::new(identity(), series(&[0.0, 0.0, 0.15]), square).unwrap();
        let cert = check_extension_condition(&spec, &identity(), 0.45, 64).unwrap();
        // max 0.3|z| is reached at the corners, |z| = √2/2
        assert!((cert.margin - (0.45 - 0.3 * 0.5f64.sqrt())).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn passing_condition_bounds_omega_f(a in 0.0f64..0.5, b in 0.0f64..0.3, k in 0.05f64..0.95) {
            let h = series(&[0.0, 1.0, a * 0.1]);
            let g = series(&[0.0, b, 0.1 * b]);
            let Ok(spec) = HarmonicMapSpec::new(h, g, ConvexDomain::unit_disk()) else { return Ok(()); };
            let cert = check_extension_condition(&spec, &identity(), k, 64).unwrap();
            if cert.passed() {
                prop_assert!(max_dilatation_omega_f(&spec, 64).unwrap() < k);
            }
        }

        #[test]
        fn margin_decreases_when_g_grows(b in 0.01f64..0.15, s in 1.0f64..3.0) {
            let run = |scale: f64| {
                let spec = HarmonicMapSpec::new(identity(), series(&[0.0, 0.0, b * scale]), ConvexDomain::unit_disk()).unwrap();
                check_extension_condition(&spec, &identity(), 0.6, 64).unwrap()
            };
            let (base, scaled) = (run(1.0), run(s));
            prop_assert!(scaled.margin <= base.margin);
            prop_assert!(base.passed() || !scaled.passed());
        }
    }
}
