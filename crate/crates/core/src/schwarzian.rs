//! Schwarzian derivative, its hyperbolically weighted norm, and Möbius maps.

use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{inputs_digest, Certificate, CriterionId};
use crate::error::{Error, Result};
use crate::meromorphic::PolarizedMeromorphic;
use crate::series::TruncatedSeries;

/// `|f'|` below this is treated as a critical point.
pub const CRITICAL_GUARD: f64 = 1e-12;
pub const DETERMINANT_GUARD: f64 = 1e-12;
pub const NORM_RADIUS_CAP: f64 = 1.0 - 1e-4;
pub const NORM_IMPROVEMENT_TOL: f64 = 1e-6;
pub const BOUND_SLACK: f64 = 1e-6;
pub const DEFAULT_REFINEMENTS: usize = 200;
const MIN_REFINE_STEP: f64 = 1e-9;

/// A map holomorphic near the points where it is sampled.
pub trait HolomorphicMap {
    /// `[f, f', f'', f''']` at `z`.
    fn jet3(&self, z: Complex64) -> Result<[Complex64; 4]>;

    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet3(z)?[0])
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet3(z)?[1])
    }
}

impl HolomorphicMap for PolarizedMeromorphic {
    fn jet3(&self, z: Complex64) -> Result<[Complex64; 4]> {
        PolarizedMeromorphic::jet3(self, z)
    }
}

impl HolomorphicMap for TruncatedSeries {
    fn jet3(&self, z: Complex64) -> Result<[Complex64; 4]> {
        self.check_radius(z)?;
        Ok(TruncatedSeries::jet3(self, z))
    }
}

/// `z ↦ (a z + b) / (c z + d)`, stored with `a d - b c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.norm() >= DETERMINANT_GUARD) {
            return Err(Error::DegenerateMap { det_abs: det.norm() });
        }
        let s = det.sqrt();
        Ok(MobiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn identity() -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        MobiusMap {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// `z ↦ (z + p) / (1 + p z)`, sending `0` to `p` and the disk onto itself.
    pub fn disk_automorphism(p: f64) -> Result<Self> {
        if !(p.abs() < 1.0) {
            return Err(Error::invalid(format!("automorphism parameter {p} outside (-1, 1)")));
        }
        let (one, p) = (Complex64::new(1.0, 0.0), Complex64::new(p, 0.0));
        Self::new(one, p, p, one)
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    fn denominator(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() < CRITICAL_GUARD * (self.c.norm() * z.norm() + self.d.norm()).max(1.0) {
            return Err(Error::VanishingDenominator { z, abs: den.norm() });
        }
        Ok(den)
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.a * z + self.b) / self.denominator(z)?)
    }

    pub fn inverse(&self) -> Self {
        MobiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> Self {
        MobiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// `1 / (c z + d)²`.
    pub fn derivative_at(&self, z: Complex64) -> Result<Complex64> {
        let den = self.denominator(z)?;
        Ok((den * den).inv())
    }
}

impl HolomorphicMap for MobiusMap {
    fn jet3(&self, z: Complex64) -> Result<[Complex64; 4]> {
        let w = self.denominator(z)?.inv();
        let w2 = w * w;
        Ok([
            (self.a * z + self.b) * w,
            w2,
            -2.0 * self.c * w2 * w,
            6.0 * self.c * self.c * w2 * w2,
        ])
    }
}

/// `z ↦ z / (1 - k z²)`, the extremal map for the Schwarzian bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpExtremal {
    pub k: f64,
}

impl SharpExtremal {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::invalid(format!("k = {k} outside [0, 1)")));
        }
        Ok(SharpExtremal { k })
    }

    /// Closed form `6k / (1 + k z²)²`.
    pub fn schwarzian_closed_form(&self, z: Complex64) -> Complex64 {
        let q = 1.0 + self.k * z * z;
        6.0 * self.k / (q * q)
    }

    /// The pole-shifted member `z ↦ f(φ⁻¹(z))` with `φ(z) = (z + p)/(1 + p z)`.
    pub fn shifted(&self, p: f64) -> Result<Composed<SharpExtremal>> {
        Ok(Composed {
            outer: *self,
            inner: MobiusMap::disk_automorphism(p)?.inverse(),
        })
    }
}

impl HolomorphicMap for SharpExtremal {
    fn jet3(&self, z: Complex64) -> Result<[Complex64; 4]> {
        let k = self.k;
        let z2 = z * z;
        let q = 1.0 - k * z2;
        if q.norm() < CRITICAL_GUARD {
            return Err(Error::VanishingDenominator { z, abs: q.norm() });
        }
        let w = q.inv();
        let w2 = w * w;
        Ok([
            z * w,
            (1.0 + k * z2) * w2,
            2.0 * k * z * (3.0 + k * z2) * w2 * w,
            6.0 * k * (1.0 + 6.0 * k * z2 + k * k * z2 * z2) * w2 * w2,
        ])
    }
}

/// `outer ∘ inner` for a Möbius `inner`, differentiated by the chain rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composed<F> {
    pub outer: F,
    pub inner: MobiusMap,
}

impl<F: HolomorphicMap> HolomorphicMap for Composed<F> {
    fn jet3(&self, z: Complex64) -> Result<[Complex64; 4]> {
        let [w, d1, d2, d3] = self.inner.jet3(z)?;
        let [f0, f1, f2, f3] = self.outer.jet3(w)?;
        Ok([
            f0,
            f1 * d1,
            f2 * d1 * d1 + f1 * d2,
            f3 * d1 * d1 * d1 + 3.0 * f2 * d1 * d2 + f1 * d3,
        ])
    }
}

/// `S_f = f'''/f' - (3/2)(f''/f')²`.
pub fn schwarzian_at<F: HolomorphicMap + ?Sized>(f: &F, z: Complex64) -> Result<Complex64> {
    let [_, d1, d2, d3] = f.jet3(z)?;
    if !(d1.norm() >= CRITICAL_GUARD) {
        return Err(Error::CriticalPoint { z, abs: d1.norm() });
    }
    let ratio = d2 / d1;
    Ok(d3 / d1 - 1.5 * ratio * ratio)
}

/// Schwarzian from 5-point central differences of `f'` with step `h`.
///
/// Differencing `f'` rather than `f` keeps the roundoff in `f'''` near
/// `ε/h²` instead of `ε/h³`.
pub fn schwarzian_fd<F: HolomorphicMap + ?Sized>(f: &F, z: Complex64, h: f64) -> Result<Complex64> {
    let d = |t: f64| f.derivative(z + t);
    let (m2, m1, c0, p1, p2) = (d(-2.0 * h)?, d(-h)?, d(0.0)?, d(h)?, d(2.0 * h)?);
    if !(c0.norm() >= CRITICAL_GUARD) {
        return Err(Error::CriticalPoint { z, abs: c0.norm() });
    }
    let second = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let third = (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * h * h);
    let ratio = second / c0;
    Ok(third / c0 - 1.5 * ratio * ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateSchwarzian {
    /// `S_{f∘φ}(z)` from the chain-rule jet of the composition.
    pub direct: Complex64,
    /// `S_f(φ(z)) φ'(z)²`, using `S_φ = 0`.
    pub law: Complex64,
}

impl ConjugateSchwarzian {
    pub fn residual(&self) -> f64 {
        (self.direct - self.law).norm()
    }
}

pub fn conjugate_schwarzian<F: HolomorphicMap + Clone>(
    f: &F,
    phi: &MobiusMap,
    z: Complex64,
) -> Result<ConjugateSchwarzian> {
    let composed = Composed {
        outer: f.clone(),
        inner: *phi,
    };
    let direct = schwarzian_at(&composed, z)?;
    let d = phi.derivative_at(z)?;
    let law = schwarzian_at(f, phi.apply(z)?)? * d * d;
    Ok(ConjugateSchwarzian { direct, law })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radial_count: usize,
    pub angular_count: usize,
    pub r_max: f64,
}

impl Default for PolarGrid {
    fn default() -> Self {
        PolarGrid {
            radial_count: 128,
            angular_count: 512,
            r_max: NORM_RADIUS_CAP,
        }
    }
}

impl PolarGrid {
    pub fn new(radial_count: usize, angular_count: usize, r_max: f64) -> Result<Self> {
        if radial_count < 2 || angular_count < 1 {
            return Err(Error::invalid("polar grid needs at least two radii and one angle"));
        }
        if !(r_max > 0.0 && r_max <= NORM_RADIUS_CAP) {
            return Err(Error::invalid(format!(
                "outer radius {r_max} outside (0, {NORM_RADIUS_CAP}]"
            )));
        }
        Ok(PolarGrid {
            radial_count,
            angular_count,
            r_max,
        })
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.r_max * i as f64 / (self.radial_count - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.radius(i), TAU * j as f64 / self.angular_count as f64)
    }
}

/// `(1 - |z|²)² |S_f(z)|`.
pub fn weighted_schwarzian<F: HolomorphicMap + ?Sized>(f: &F, z: Complex64) -> Result<f64> {
    let w = 1.0 - z.norm_sqr();
    Ok(w * w * schwarzian_at(f, z)?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub z: Complex64,
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSchwarzianField {
    /// Radial-major samples; points where `S_f` could not be evaluated are omitted.
    pub samples: Vec<WeightedSample>,
    pub skipped: usize,
    pub grid: PolarGrid,
}

impl WeightedSchwarzianField {
    /// CSV with header `re,im,weighted_abs_schwarzian`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.samples.is_empty() {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "empty Schwarzian field"));
        }
        writeln!(out, "re,im,weighted_abs_schwarzian")?;
        for s in &self.samples {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", s.z.re, s.z.im, s.weighted)?;
        }
        Ok(())
    }
}

pub fn weighted_field<F: HolomorphicMap + Sync + ?Sized>(f: &F, grid: &PolarGrid) -> WeightedSchwarzianField {
    let rows: Vec<Vec<Option<WeightedSample>>> = (0..grid.radial_count)
        .into_par_iter()
        .map(|i| {
            (0..grid.angular_count)
                .map(|j| {
                    let z = grid.point(i, j);
                    weighted_schwarzian(f, z)
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(|weighted| WeightedSample { z, weighted })
                })
                .collect()
        })
        .collect();
    let total = grid.radial_count * grid.angular_count;
    let samples: Vec<WeightedSample> = rows.into_iter().flatten().flatten().collect();
    WeightedSchwarzianField {
        skipped: total - samples.len(),
        samples,
        grid: *grid,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzianNormReport {
    pub norm_estimate: f64,
    pub argmax_z: Complex64,
    pub grid: PolarGrid,
    pub refinement_count: usize,
    pub convergence_flag: bool,
    pub skipped: usize,
}

/// Grid estimate of `sup (1 - |z|²)² |S_f(z)|` over the disk, followed by a
/// compass search around the best sample. Ties on the grid go to the smaller
/// radius, then the smaller angle.
pub fn schwarzian_norm<F: HolomorphicMap + Sync + ?Sized>(
    f: &F,
    grid: &PolarGrid,
    refinements: usize,
) -> SchwarzianNormReport {
    let field = weighted_field(f, grid);
    let best = field.samples.iter().fold(None::<WeightedSample>, |acc, s| match acc {
        Some(b) if s.weighted <= b.weighted => Some(b),
        _ => Some(*s),
    });
    let Some(best) = best else {
        return SchwarzianNormReport {
            norm_estimate: 0.0,
            argmax_z: Complex64::new(0.0, 0.0),
            grid: *grid,
            refinement_count: 0,
            convergence_flag: false,
            skipped: field.skipped,
        };
    };

    let eval = |z: Complex64| -> Option<f64> {
        if z.norm() > grid.r_max {
            return None;
        }
        weighted_schwarzian(f, z).ok().filter(|v| v.is_finite())
    };
    let (mut z, mut value) = (best.z, best.weighted);
    let mut step = grid.r_max / (grid.radial_count - 1) as f64;
    let mut converged = false;
    let mut count = 0;
    let directions = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    while count < refinements {
        count += 1;
        let candidate = directions
            .iter()
            .filter_map(|d| {
                let w = z + d * step;
                eval(w).map(|v| (w, v))
            })
            .fold(None::<(Complex64, f64)>, |acc, c| match acc {
                Some(a) if c.1 <= a.1 => Some(a),
                _ => Some(c),
            });
        match candidate {
            Some((w, v)) if v > value => {
                let improvement = v - value;
                z = w;
                value = v;
                if improvement < NORM_IMPROVEMENT_TOL && step < grid.r_max / grid.angular_count as f64 {
                    converged = true;
                    break;
                }
            }
            _ => {
                step *= 0.5;
                if step < MIN_REFINE_STEP {
                    converged = true;
                    break;
                }
            }
        }
    }
    SchwarzianNormReport {
        norm_estimate: value,
        argmax_z: z,
        grid: *grid,
        refinement_count: count,
        convergence_flag: converged,
        skipped: field.skipped,
    }
}

/// `6k / (1 - p²)²`.
pub fn schwarzian_bound(k: f64, p: f64) -> f64 {
    6.0 * k / (1.0 - p * p).powi(2)
}

/// Pass iff the estimated norm is at most `6k/(1 - p²)² + 1e-6`.
pub fn check_schwarzian_bound<F>(f: &F, k: f64, p: f64) -> Result<Certificate>
where
    F: HolomorphicMap + Serialize + Sync + ?Sized,
{
    let report = schwarzian_norm(f, &PolarGrid::default(), DEFAULT_REFINEMENTS);
    schwarzian_bound_certificate(f, k, p, &report)
}

/// [`check_schwarzian_bound`] against an already computed norm report.
pub fn schwarzian_bound_certificate<F>(f: &F, k: f64, p: f64, report: &SchwarzianNormReport) -> Result<Certificate>
where
    F: Serialize + ?Sized,
{
    if !(0.0..1.0).contains(&k) || !(0.0..1.0).contains(&p) {
        return Err(Error::invalid(format!("k = {k}, p = {p} must lie in [0, 1)")));
    }
    let bound = schwarzian_bound(k, p);
    Ok(Certificate::from_margin(
        CriterionId::SchwarzianBound,
        bound + BOUND_SLACK - report.norm_estimate,
        inputs_digest(&(f, k, p)),
        format!(
            "norm={:e} bound={bound:e} argmax=({:e},{:e}) converged={}",
            report.norm_estimate, report.argmax_z.re, report.argmax_z.im, report.convergence_flag
        ),
    ))
}
