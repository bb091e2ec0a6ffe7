//! Truncated complex power series.
//!
//! A [`TruncatedSeries`] holds the coefficients `c_0..c_N` of `Σ c_n z^n`
//! together with the radius inside which the truncation is trusted. Every
//! operation returns a fresh value; nothing mutates in place.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order for all series built from closed forms.
pub const DEFAULT_ORDER: usize = 200;

/// Relative slack when comparing `|z|` against a declared radius, so that
/// points computed as `r e^{iθ}` are not rejected for a last-bit overshoot.
const RADIUS_SLACK: f64 = 1e-12;

/// Largest `n` for which `binom(n, k)` is computed on the exact integer path.
const EXACT_BINOMIAL_LIMIT: u64 = 62;

pub(crate) fn ensure_finite(z: Complex64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} is not finite: {z}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coefficients: Vec<Complex64>,
    declared_radius: f64,
    /// Bound on the omitted coefficients when the series truncates an
    /// infinite expansion; `None` means the coefficients are exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailBound>,
}

impl TruncatedSeries {
    pub fn new(coefficients: Vec<Complex64>, declared_radius: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("a series needs at least the constant coefficient"));
        }
        if !(declared_radius > 0.0 && declared_radius <= 1.0) {
            return Err(Error::invalid(format!(
                "declared radius {declared_radius} is outside (0, 1]"
            )));
        }
        for (n, c) in coefficients.iter().enumerate() {
            ensure_finite(*c, &format!("coefficient {n}"))?;
        }
        Ok(TruncatedSeries {
            coefficients,
            declared_radius,
            tail: None,
        })
    }

    /// Attaches truncation metadata.
    pub fn with_tail(mut self, tail: TailBound) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn tail_bound(&self) -> Option<&TailBound> {
        self.tail.as_ref()
    }

    /// Series on the closed unit disk.
    pub fn unit(coefficients: Vec<Complex64>) -> Result<Self> {
        Self::new(coefficients, 1.0)
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::unit(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        TruncatedSeries {
            coefficients: vec![Complex64::new(0.0, 0.0); order + 1],
            declared_radius: 1.0,
            tail: None,
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Truncation order `N` (the series holds `N + 1` coefficients).
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn declared_radius(&self) -> f64 {
        self.declared_radius
    }

    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.coefficients.get(n).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub(crate) fn check_radius(&self, z: Complex64) -> Result<()> {
        ensure_finite(z, "evaluation point")?;
        if z.norm() > self.declared_radius * (1.0 + RADIUS_SLACK) {
            return Err(Error::domain(format!(
                "|z| = {} exceeds the declared radius {}",
                z.norm(),
                self.declared_radius
            )));
        }
        Ok(())
    }

    /// Horner evaluation, highest degree first.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        self.check_radius(z)?;
        Ok(self.horner(z))
    }

    /// Horner evaluation without the radius guard. Callers must have
    /// validated `z` already.
    pub(crate) fn horner(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Value and first three derivatives at `z` in one backward sweep.
    pub(crate) fn jet3(&self, z: Complex64) -> [Complex64; 4] {
        let zero = Complex64::new(0.0, 0.0);
        let (mut f0, mut f1, mut f2, mut f3) = (zero, zero, zero, zero);
        for c in self.coefficients.iter().rev() {
            f3 = f3 * z + f2;
            f2 = f2 * z + f1;
            f1 = f1 * z + f0;
            f0 = f0 * z + c;
        }
        // f2 and f3 accumulate p''/2! and p'''/3!
        [f0, f1, f2 * 2.0, f3 * 6.0]
    }

    pub fn differentiate(&self) -> Result<TruncatedSeries> {
        if self.order() == 0 {
            return Err(Error::domain("cannot differentiate a constant series of order 0"));
        }
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c * n as f64)
            .collect();
        Ok(TruncatedSeries {
            coefficients,
            declared_radius: self.declared_radius,
            tail: self.tail.and_then(|t| t.differentiated()),
        })
    }

    /// Product truncated to `min(N_a, N_b)` with the smaller declared radius.
    pub fn cauchy_product(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(other.order());
        let coefficients = (0..=order)
            .map(|n| (0..=n).map(|i| self.coefficients[i] * other.coefficients[n - i]).sum())
            .collect();
        TruncatedSeries {
            coefficients,
            declared_radius: self.declared_radius.min(other.declared_radius),
            tail: None,
        }
    }

    /// Coefficient-wise sum; the result has the larger order.
    pub fn add(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().max(other.order());
        let coefficients = (0..=order)
            .map(|n| self.coefficient(n) + other.coefficient(n))
            .collect();
        TruncatedSeries {
            coefficients,
            declared_radius: self.declared_radius.min(other.declared_radius),
            tail: None,
        }
    }

    pub fn scale(&self, factor: Complex64) -> TruncatedSeries {
        TruncatedSeries {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
            declared_radius: self.declared_radius,
            tail: self.tail.map(|t| TailBound {
                leading_bound: t.leading_bound * factor.norm(),
                ..t
            }),
        }
    }

    /// Multiplication by `z^k`, keeping the truncation order.
    pub fn shift(&self, k: usize) -> TruncatedSeries {
        let n = self.coefficients.len();
        let mut coefficients = vec![Complex64::new(0.0, 0.0); n];
        coefficients[k.min(n)..].copy_from_slice(&self.coefficients[..n.saturating_sub(k)]);
        TruncatedSeries {
            coefficients,
            declared_radius: self.declared_radius,
            tail: None,
        }
    }

    /// `z ↦ s(ρ z)`; the image series is trusted on `|z| ≤ min(1, R/ρ)`.
    pub fn dilate(&self, rho: f64) -> Result<TruncatedSeries> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::invalid(format!("dilation factor {rho} outside (0, 1]")));
        }
        let mut scale = 1.0;
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| {
                let out = c * scale;
                scale *= rho;
                out
            })
            .collect();
        let order = self.order();
        Ok(TruncatedSeries {
            coefficients,
            declared_radius: (self.declared_radius / rho).min(1.0),
            tail: self.tail.map(|t| TailBound {
                geometric_ratio: t.geometric_ratio * rho,
                leading_bound: t.leading_bound * rho.powi(order as i32 + 1),
                ..t
            }),
        })
    }

    /// Maximum of `|s(z)|` over `samples` equispaced points of `|z| = r`.
    pub fn max_modulus_on_circle(&self, r: f64, samples: usize) -> Result<f64> {
        self.check_radius(Complex64::new(r, 0.0))?;
        Ok(crate::grid::circle(r, samples)
            .map(|z| self.horner(z).norm())
            .fold(0.0, f64::max))
    }
}

/// `binom(n, k)` as a float; exact integer arithmetic for `n ≤ 62`,
/// the multiplicative recurrence `binom(n, k) = binom(n-1, k-1) · n / k`
/// beyond.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= EXACT_BINOMIAL_LIMIT {
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as f64
    } else {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }
}

/// Taylor coefficients of `(1 - p x)^{-j}` up to order `order`:
/// term `l` is `binom(j + l - 1, l) p^l`.
pub fn binomial_expand(j: u32, p: f64, order: usize) -> Result<TruncatedSeries> {
    if j == 0 {
        return Err(Error::domain("binomial exponent j must be at least 1"));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!("p = {p} is outside [0, 1)")));
    }
    let j = j as u64;
    let mut coefficients = Vec::with_capacity(order + 1);
    let mut p_pow = 1.0;
    for l in 0..=order as u64 {
        let n = j + l - 1;
        coefficients.push(Complex64::new(binomial(n, l) * p_pow, 0.0));
        p_pow *= p;
    }
    Ok(TruncatedSeries {
        coefficients,
        declared_radius: 1.0,
        tail: TailBound::for_binomial(j as u32, p, order).ok(),
    })
}

/// Bound on the omitted tail `Σ_{n>N} |c_n| r^n` of a series whose terms
/// decay at least geometrically beyond the truncation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub geometric_ratio: f64,
    pub leading_bound: f64,
    pub order: usize,
}

impl TailBound {
    pub fn new(geometric_ratio: f64, leading_bound: f64, order: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&geometric_ratio) {
            return Err(Error::invalid(format!(
                "geometric ratio {geometric_ratio} outside [0, 1)"
            )));
        }
        if !(leading_bound >= 0.0) {
            return Err(Error::invalid("leading bound must be non-negative"));
        }
        Ok(TailBound {
            geometric_ratio,
            leading_bound,
            order,
        })
    }

    /// Tail of [`binomial_expand`]`(j, p, order)`. The ratio of consecutive
    /// terms, `p (j + l) / (l + 1)`, decreases in `l`, so its value at the
    /// first omitted index dominates the whole tail.
    pub fn for_binomial(j: u32, p: f64, order: usize) -> Result<Self> {
        let j = j as u64;
        let first = order as u64 + 1;
        let leading = binomial(j + first - 1, first) * p.powi(first as i32);
        let ratio = p * (j + first) as f64 / (first + 1) as f64;
        if ratio >= 1.0 {
            return Err(Error::NonConvergence {
                what: "binomial tail ratio",
                tail: ratio,
                limit: 1.0,
            });
        }
        Self::new(ratio, leading, order)
    }

    /// `leading_bound · r^{N+1} / (1 - ratio · r)`, monotone in `r`.
    pub fn bound_value(&self, r: f64) -> f64 {
        self.leading_bound * r.powi(self.order as i32 + 1) / (1.0 - self.geometric_ratio * r)
    }

    /// Bound on `Σ_{n>N} n |c_n|` (the tail at `r = 1` weighted by `n`).
    pub fn weighted_abs_sum(&self) -> f64 {
        let q = self.geometric_ratio;
        let first = self.order as f64 + 1.0;
        self.leading_bound * (first / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)))
    }

    /// Bound on `Σ_{n>N} n |c_n|² r^{2n}` for `r ≤ 1`.
    pub fn weighted_square_sum(&self, r: f64) -> f64 {
        let q2 = (self.geometric_ratio * r).powi(2);
        let first = self.order as f64 + 1.0;
        let lead = self.leading_bound * self.leading_bound * r.powi(2 * (self.order as i32 + 1));
        lead * (first / (1.0 - q2) + q2 / ((1.0 - q2) * (1.0 - q2)))
    }

    /// Tail bound of the term-wise derivative, when the inflated ratio
    /// `q (N+2)/(N+1)` stays below one.
    fn differentiated(self) -> Option<TailBound> {
        let first = self.order as f64 + 1.0;
        let ratio = self.geometric_ratio * (first + 1.0) / first;
        (ratio < 1.0 && self.order >= 1).then(|| TailBound {
            geometric_ratio: ratio,
            leading_bound: self.leading_bound * first,
            order: self.order - 1,
        })
    }
}
