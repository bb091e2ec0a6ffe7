//! Explicit quasiconformal extensions across the unit circle.
//!
//! Two exterior rules are supported. `ReflectOmega` continues `f = R + ω`
//! by `R(z) + ω(1/z̄)`; `ExtremalTail` continues the extremal family by
//! `R(z) + a₀ + a₁/(z̄ - p)`. Both agree with the interior on `|z| = 1`.

use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{argmax, circle, winding_number};
use crate::meromorphic::{PolarizedMeromorphic, PrincipalPart};
use crate::series::{TruncatedSeries, DEFAULT_ORDER};

pub const NONDEGENERACY_SAMPLES: usize = 8192;
pub const MIN_BOUNDARY_SAMPLES: usize = 4096;
/// Target for the omitted tail of the `R̃'` series.
const EXTERIOR_TAIL_TARGET: f64 = 1e-13;
const EXTERIOR_ORDER_CAP: usize = 20_000;
const ZERO_ON_BOUNDARY: f64 = 1e-12;
pub const OMEGA_BOUND_TOLERANCE: f64 = 1e-8;
const VANISHING_DERIVATIVE: f64 = 1e-14;
/// First sampled radius of the exterior grid.
const EXTERIOR_START: f64 = 1.0 + 1e-12;
pub const DEFAULT_EXTERIOR_RADIUS: f64 = 10.0;
pub const MIN_RADIAL: usize = 64;
pub const MIN_ANGULAR: usize = 256;
pub const MIN_INJECTIVITY_PAIRS: usize = 10_000;
/// Pairs farther apart than this whose images are closer than
/// [`COLLISION_IMAGE_GAP`] are reported as collisions.
pub const COLLISION_DOMAIN_GAP: f64 = 1e-6;
pub const COLLISION_IMAGE_GAP: f64 = 1e-10;
/// Sample points closer than this to the pole are skipped.
const POLE_EXCLUSION: f64 = 1e-3;
const NEWTON_STEPS: usize = 60;

/// `K = (1 + k) / (1 - k)`.
pub fn distortion_from_dilatation(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::invalid(format!("dilatation bound k = {k} outside [0, 1)")));
    }
    Ok((1.0 + k) / (1.0 - k))
}

/// `k = (K - 1) / (K + 1)`.
pub fn dilatation_from_distortion(big_k: f64) -> Result<f64> {
    if !(big_k >= 1.0 && big_k.is_finite()) {
        return Err(Error::invalid(format!(
            "distortion K = {big_k} must be finite and at least 1"
        )));
    }
    Ok((big_k - 1.0) / (big_k + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonDegeneracyEstimate {
    pub constant: f64,
    pub argmin_zeta: Complex64,
    pub zero_free_certified: bool,
    pub winding: i64,
    pub series_order: usize,
}

/// Lower bound `C` of `|R̃'|` on the closed unit disk, where `R̃(ζ) = R(1/ζ)`.
///
/// Zero-freeness inside is decided by the winding number of `R̃'` along the
/// sampled circle; when it vanishes, the minimum modulus principle puts the
/// minimum on the circle.
pub fn nondegeneracy_constant(principal: &PrincipalPart, boundary_samples: usize) -> Result<NonDegeneracyEstimate> {
    if boundary_samples < MIN_BOUNDARY_SAMPLES {
        return Err(Error::invalid(format!(
            "at least {MIN_BOUNDARY_SAMPLES} boundary samples are needed, got {boundary_samples}"
        )));
    }
    let order = principal.exterior_order_for(1, EXTERIOR_TAIL_TARGET, EXTERIOR_ORDER_CAP);
    if order >= EXTERIOR_ORDER_CAP {
        return Err(Error::NonConvergence {
            what: "exterior form derivative",
            tail: f64::INFINITY,
            limit: EXTERIOR_TAIL_TARGET,
        });
    }
    let derivative = principal.exterior_form(order).differentiate()?;
    let points: Vec<Complex64> = circle(1.0, boundary_samples).collect();
    let values: Vec<Complex64> = points.par_iter().map(|&zeta| derivative.horner(zeta)).collect();
    let (idx, neg_min) = argmax(values.iter().map(|v| -v.norm())).ok_or(Error::EmptyField)?;
    let min_abs = -neg_min;
    if min_abs < ZERO_ON_BOUNDARY {
        return Err(Error::ZeroOnBoundary {
            zeta: points[idx],
            min_abs,
        });
    }
    let winding = winding_number(&values);
    let zero_free = winding == 0;
    Ok(NonDegeneracyEstimate {
        constant: if zero_free { min_abs } else { 0.0 },
        argmin_zeta: points[idx],
        zero_free_certified: zero_free,
        winding,
        series_order: order,
    })
}

/// Estimate of `sup_{|z| ≤ 1} |s(z)|`: the boundary maximum at 4096 and 8192
/// points, extrapolated once, plus the truncation tail.
pub fn boundary_sup(s: &TruncatedSeries) -> f64 {
    let sample = |n: usize| -> f64 {
        let values: Vec<f64> = circle(1.0, n)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&z| s.horner(z).norm())
            .collect();
        values.into_iter().fold(0.0, f64::max)
    };
    let coarse = sample(MIN_BOUNDARY_SAMPLES);
    let fine = sample(2 * MIN_BOUNDARY_SAMPLES);
    // the sampled maximum converges quadratically in the mesh width
    let extrapolated = fine + (fine - coarse) / 3.0;
    let tail = s.tail_bound().map_or(0.0, |t| t.bound_value(1.0));
    coarse.max(fine).max(extrapolated) + tail
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ExteriorRule {
    ReflectOmega { omega: TruncatedSeries },
    ExtremalTail { a0: Complex64, a1: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionMap {
    pub interior: PolarizedMeromorphic,
    pub rule: ExteriorRule,
    pub k: f64,
    /// `(k / (1 + p)^{m+1}) / C`, set for `ReflectOmega`.
    pub kappa: Option<f64>,
    pub nondegeneracy: Option<NonDegeneracyEstimate>,
    pub omega_derivative_sup: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    pub boundary_samples: usize,
    /// Replace `ω` by `z ↦ ω(r z)` before building, for `ω` known only on
    /// the open disk.
    pub omega_dilation: Option<f64>,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions {
            boundary_samples: NONDEGENERACY_SAMPLES,
            omega_dilation: None,
        }
    }
}

/// `ReflectOmega` extension of `f = R + ω`, after checking
/// `sup |ω'| ≤ k / (1 + p)^{m+1}`, `C > 0` and `κ < 1`.
pub fn build_extension(f: &PolarizedMeromorphic, omega: &TruncatedSeries, k: f64) -> Result<ExtensionMap> {
    build_extension_with(f, omega, k, &ExtensionOptions::default())
}

pub fn build_extension_with(
    f: &PolarizedMeromorphic,
    omega: &TruncatedSeries,
    k: f64,
    options: &ExtensionOptions,
) -> Result<ExtensionMap> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::invalid(format!("k = {k} outside [0, 1)")));
    }
    if omega.declared_radius() < 1.0 {
        return Err(Error::invalid(format!(
            "omega must be analytic on the unit disk, declared radius {}",
            omega.declared_radius()
        )));
    }
    let len = f.taylor().order().max(omega.order()) + 1;
    if let Some(index) = (0..len).find(|&n| f.taylor().coefficient(n) != omega.coefficient(n)) {
        return Err(Error::TaylorMismatch { index });
    }
    let omega = match options.omega_dilation {
        Some(r) => omega.dilate(r)?,
        None => omega.clone(),
    };

    let m = f.pole_order() as i32;
    let bound = k / (1.0 + f.p()).powi(m + 1);
    let sup = if omega.order() == 0 {
        0.0
    } else {
        boundary_sup(&omega.differentiate()?)
    };
    if sup > bound + OMEGA_BOUND_TOLERANCE {
        return Err(Error::OmegaBoundViolation { sup, bound });
    }

    let estimate = nondegeneracy_constant(f.principal(), options.boundary_samples)?;
    if estimate.constant <= 0.0 {
        return Err(Error::DegeneratePrincipalPart);
    }
    let kappa = bound / estimate.constant;
    if kappa >= 1.0 {
        return Err(Error::DilatationNotContractive { kappa });
    }
    Ok(ExtensionMap {
        interior: PolarizedMeromorphic::new(f.principal().clone(), omega.clone()),
        rule: ExteriorRule::ReflectOmega { omega },
        k,
        kappa: Some(kappa),
        nondegeneracy: Some(estimate),
        omega_derivative_sup: Some(sup),
    })
}

impl ExtensionMap {
    /// Extremal extension `R + a₀ + a₁/(z̄ - p)` outside the disk; needs `|a₁| ≤ k`.
    pub fn extremal(principal: PrincipalPart, a0: Complex64, a1: Complex64, k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::invalid(format!("k = {k} outside [0, 1)")));
        }
        if a1.norm() > k {
            return Err(Error::invalid(format!("|a1| = {} exceeds k = {k}", a1.norm())));
        }
        Self::extremal_unchecked(principal, a0, a1, k)
    }

    /// As [`ExtensionMap::extremal`] without the `|a₁| ≤ k` guard, for
    /// building deliberately broken maps.
    pub fn extremal_unchecked(principal: PrincipalPart, a0: Complex64, a1: Complex64, k: f64) -> Result<Self> {
        let interior = PolarizedMeromorphic::extremal(principal, a0, a1, DEFAULT_ORDER)?;
        Ok(ExtensionMap {
            interior,
            rule: ExteriorRule::ExtremalTail { a0, a1 },
            k,
            kappa: None,
            nondegeneracy: None,
            omega_derivative_sup: None,
        })
    }

    pub fn p(&self) -> f64 {
        self.interior.p()
    }

    pub fn principal(&self) -> &PrincipalPart {
        self.interior.principal()
    }

    /// `F(z)`: the interior rule on `|z| ≤ 1`, the exterior rule outside.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() <= 1.0 {
            self.evaluate_interior(z)
        } else {
            self.evaluate_exterior(z)
        }
    }

    /// Interior rule, valid on the closed disk. The extremal tail is summed
    /// in closed form, `a₀ + a₁ z / (1 - p z)`.
    pub fn evaluate_interior(&self, z: Complex64) -> Result<Complex64> {
        let r = self.principal().evaluate(z)?;
        match &self.rule {
            ExteriorRule::ReflectOmega { omega } => Ok(r + omega.evaluate(z)?),
            ExteriorRule::ExtremalTail { a0, a1 } => Ok(r + a0 + a1 * z / (1.0 - self.p() * z)),
        }
    }

    /// Exterior rule, valid for `|z| ≥ 1`.
    pub fn evaluate_exterior(&self, z: Complex64) -> Result<Complex64> {
        let r = self.principal().evaluate(z)?;
        let zb = z.conj();
        match &self.rule {
            ExteriorRule::ReflectOmega { omega } => Ok(r + omega.evaluate(zb.inv())?),
            ExteriorRule::ExtremalTail { a0, a1 } => Ok(r + a0 + a1 / (zb - self.p())),
        }
    }

    /// Wirtinger derivatives `(∂F, ∂̄F)` of the active rule at `z`.
    pub fn wirtinger(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let dr = self.principal().derivative(z)?;
        let zero = Complex64::new(0.0, 0.0);
        if z.norm() <= 1.0 {
            let dt = match &self.rule {
                ExteriorRule::ReflectOmega { omega } => {
                    omega.check_radius(z)?;
                    omega.jet3(z)[1]
                }
                ExteriorRule::ExtremalTail { a1, .. } => {
                    let d = 1.0 - self.p() * z;
                    a1 / (d * d)
                }
            };
            return Ok((dr + dt, zero));
        }
        let zb = z.conj();
        let dbar = match &self.rule {
            ExteriorRule::ReflectOmega { omega } => {
                let w = zb.inv();
                omega.check_radius(w)?;
                -omega.jet3(w)[1] / (zb * zb)
            }
            ExteriorRule::ExtremalTail { a1, .. } => {
                let d = zb - self.p();
                -a1 / (d * d)
            }
        };
        Ok((dr, dbar))
    }

    /// Largest `|interior(z) - exterior(z)|` over `samples` points of `|z| = 1`.
    pub fn seam_discrepancy(&self, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for z in circle(1.0, samples) {
            worst = worst.max((self.evaluate_interior(z)? - self.evaluate_exterior(z)?).norm());
        }
        Ok(worst)
    }
}

/// `μ = ∂̄F / ∂F` from the closed-form derivatives of the exterior rule.
pub fn dilatation_analytic(map: &ExtensionMap, z: Complex64) -> Result<Complex64> {
    if !(z.norm() > 1.0) {
        return Err(Error::domain(format!(
            "dilatation is sampled on |z| > 1, got |z| = {}",
            z.norm()
        )));
    }
    let (d, dbar) = map.wirtinger(z)?;
    if d.norm() < VANISHING_DERIVATIVE {
        return Err(Error::VanishingDenominator { z, abs: d.norm() });
    }
    Ok(dbar / d)
}

/// `μ` from central differences of `F` with step `h`.
pub fn dilatation_fd_oracle(map: &ExtensionMap, z: Complex64, h: f64) -> Result<Complex64> {
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::invalid(format!("step h = {h} outside [1e-6, 1e-3]")));
    }
    if !(z.norm() > 1.0 + 2.0 * h) {
        return Err(Error::domain(format!(
            "|z| = {} is too close to the unit circle",
            z.norm()
        )));
    }
    let i = Complex64::i();
    let dx = map.evaluate(z + h)? - map.evaluate(z - h)?;
    let dy = map.evaluate(z + i * h)? - map.evaluate(z - i * h)?;
    let d = (dx - i * dy) / (4.0 * h);
    let dbar = (dx + i * dy) / (4.0 * h);
    Ok(dbar / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilatationSample {
    pub z: Complex64,
    pub mu: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilatationGrid {
    pub radial_count: usize,
    pub angular_count: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl DilatationGrid {
    pub fn new(radial_count: usize, angular_count: usize, r_max: f64) -> Result<Self> {
        if radial_count < MIN_RADIAL || angular_count < MIN_ANGULAR {
            return Err(Error::invalid(format!(
                "grid {radial_count}x{angular_count} is below the {MIN_RADIAL}x{MIN_ANGULAR} minimum"
            )));
        }
        if !(r_max >= 2.0 && r_max.is_finite()) {
            return Err(Error::invalid(format!("outer radius {r_max} must be at least 2")));
        }
        Ok(DilatationGrid {
            radial_count,
            angular_count,
            r_min: EXTERIOR_START,
            r_max,
        })
    }

    /// Log-spaced radius `i` of `radial_count`.
    pub fn radius(&self, i: usize) -> f64 {
        let t = i as f64 / (self.radial_count - 1) as f64;
        (self.r_min.ln() + t * (self.r_max.ln() - self.r_min.ln())).exp()
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.angular_count as f64
    }
}

impl Default for DilatationGrid {
    fn default() -> Self {
        DilatationGrid {
            radial_count: MIN_RADIAL,
            angular_count: MIN_ANGULAR,
            r_min: EXTERIOR_START,
            r_max: DEFAULT_EXTERIOR_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilatationField {
    /// Radial-major samples: index `i * angular_count + j`.
    pub samples: Vec<DilatationSample>,
    pub sup_abs_mu: f64,
    pub argmax: Complex64,
    pub grid: DilatationGrid,
}

impl DilatationField {
    /// CSV with header `re,im,mu_re,mu_im,abs_mu`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.samples.is_empty() {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "empty dilatation field"));
        }
        writeln!(out, "re,im,mu_re,mu_im,abs_mu")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.z.re,
                s.z.im,
                s.mu.re,
                s.mu.im,
                s.mu.norm()
            )?;
        }
        Ok(())
    }
}

/// Samples [`dilatation_analytic`] on a log-radial by uniform-angular grid
/// over `1 < |z| ≤ R`. Ties for the maximum go to the smallest angular
/// index, then the smallest radial index.
pub fn sup_dilatation(map: &ExtensionMap, grid: &DilatationGrid) -> Result<DilatationField> {
    let rows: Vec<Result<Vec<DilatationSample>>> = (0..grid.radial_count)
        .into_par_iter()
        .map(|i| {
            let r = grid.radius(i);
            (0..grid.angular_count)
                .map(|j| {
                    let z = Complex64::from_polar(r, grid.angle(j));
                    Ok(DilatationSample {
                        z,
                        mu: dilatation_analytic(map, z)?,
                    })
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(grid.radial_count * grid.angular_count);
    for row in rows {
        samples.extend(row?);
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for (idx, s) in samples.iter().enumerate() {
        let (i, j) = (idx / grid.angular_count, idx % grid.angular_count);
        let v = s.mu.norm();
        if !v.is_finite() {
            return Err(Error::VanishingDenominator { z: s.z, abs: 0.0 });
        }
        best = match best {
            Some((bi, bj, bv)) if v < bv || (v == bv && (bj, bi) <= (j, i)) => Some((bi, bj, bv)),
            _ => Some((i, j, v)),
        };
    }
    let (bi, bj, sup) = best.ok_or(Error::EmptyField)?;
    Ok(DilatationField {
        argmax: samples[bi * grid.angular_count + bj].z,
        samples,
        sup_abs_mu: sup,
        grid: *grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub z1: Complex64,
    pub z2: Complex64,
    pub image_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub pairs: usize,
    pub seed: u64,
    pub radius: f64,
    pub newton_converged: usize,
    pub collision_count: usize,
    /// The first collisions found, in sampling order.
    pub collisions: Vec<Collision>,
}

impl InjectivityReport {
    pub fn is_clean(&self) -> bool {
        self.collision_count == 0
    }
}

const REPORTED_COLLISIONS: usize = 32;

/// Sampled homeomorphism diagnostic on `|z| ≤ radius`.
///
/// For each pair `(z₁, z₂)` drawn at random, `z₂` is used as the start of a
/// Newton iteration for `F(z) = F(z₁)`; independent pairs alone would
/// practically never land on a collision. A pair counts as a collision when
/// the endpoints stay apart and their images coincide.
pub fn injectivity_sample_check(map: &ExtensionMap, pairs: usize, seed: u64, radius: f64) -> Result<InjectivityReport> {
    if pairs < MIN_INJECTIVITY_PAIRS {
        return Err(Error::invalid(format!(
            "at least {MIN_INJECTIVITY_PAIRS} pairs are needed, got {pairs}"
        )));
    }
    if !(radius > 1.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("sampling radius {radius} must exceed 1")));
    }
    let p = Complex64::new(map.p(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let r = radius * rng.gen::<f64>().sqrt();
        let z = Complex64::from_polar(r, TAU * rng.gen::<f64>());
        if (z - p).norm() > POLE_EXCLUSION {
            return z;
        }
    };
    let starts: Vec<(Complex64, Complex64)> = (0..pairs).map(|_| (draw(), draw())).collect();

    let outcomes: Vec<(bool, Option<Collision>)> = starts
        .par_iter()
        .map(|&(z1, z2)| {
            let Ok(target) = map.evaluate(z1) else {
                return (false, None);
            };
            match newton_preimage(map, target, z2, radius, p) {
                Some(z) => {
                    let gap = map.evaluate(z).map_or(f64::INFINITY, |w| (w - target).norm());
                    let collision =
                        ((z - z1).norm() > COLLISION_DOMAIN_GAP && gap < COLLISION_IMAGE_GAP).then_some(Collision {
                            z1,
                            z2: z,
                            image_gap: gap,
                        });
                    (true, collision)
                }
                None => (false, None),
            }
        })
        .collect();
    let newton_converged = outcomes.iter().filter(|o| o.0).count();
    let all: Vec<Collision> = outcomes.into_iter().filter_map(|o| o.1).collect();
    Ok(InjectivityReport {
        pairs,
        seed,
        radius,
        newton_converged,
        collision_count: all.len(),
        collisions: all.into_iter().take(REPORTED_COLLISIONS).collect(),
    })
}

/// Solves `F(z) = target` by Newton on the real 2x2 Jacobian
/// `δF = ∂F δ + ∂̄F δ̄`, staying inside `|z| ≤ radius` and away from `p`.
fn newton_preimage(
    map: &ExtensionMap,
    target: Complex64,
    start: Complex64,
    radius: f64,
    p: Complex64,
) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..NEWTON_STEPS {
        let residual = map.evaluate(z).ok()? - target;
        if residual.norm() < 0.1 * COLLISION_IMAGE_GAP {
            return Some(z);
        }
        let (a, b) = map.wirtinger(z).ok()?;
        // a δ + b δ̄ = r together with its conjugate gives
        // δ = (ā r - b r̄) / (|a|² - |b|²)
        let det = a.norm_sqr() - b.norm_sqr();
        if det.abs() < 1e-300 {
            return None;
        }
        let r = -residual;
        let delta = (r * a.conj() - b * r.conj()) / det;
        z += delta;
        if !(z.norm() <= radius) || (z - p).norm() <= POLE_EXCLUSION || !z.re.is_finite() {
            return None;
        }
    }
    let residual = (map.evaluate(z).ok()? - target).norm();
    (residual < COLLISION_IMAGE_GAP).then_some(z)
}
