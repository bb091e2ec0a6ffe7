//! Meromorphic functions on the unit disk with one pole of order `m` at a
//! real point `p ∈ [0, 1)`:
//!
//! ```text
//! f(z) = Σ_{j=1}^{m} a_{-j} / (z - p)^j + Σ_{n=0}^{N} a_n z^n
//! ```
//!
//! The principal part is evaluated exactly through powers of `1/(z - p)`;
//! the Taylor part is a [`TruncatedSeries`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{binomial, binomial_expand, ensure_finite, TailBound, TruncatedSeries};

/// Evaluation is refused closer than this to the pole.
pub const POLE_GUARD: f64 = 1e-9;

/// Target for the geometric tail estimate of the re-centred coefficients.
pub const LAURENT_TAIL_TARGET: f64 = 1e-14;

/// Hard cap on the number of re-centred coefficients.
pub const LAURENT_MAX_ORDER: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalPart {
    p: f64,
    /// `coefficients[j - 1]` holds `a_{-j}`.
    coefficients: Vec<Complex64>,
}

impl PrincipalPart {
    pub fn new(p: f64, coefficients: Vec<Complex64>) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::invalid(format!("pole location p = {p} is outside [0, 1)")));
        }
        let Some(top) = coefficients.last() else {
            return Err(Error::invalid("pole order must be at least 1"));
        };
        if top.re == 0.0 && top.im == 0.0 {
            return Err(Error::invalid(format!(
                "top coefficient a_-{} vanishes; the pole order is not exact",
                coefficients.len()
            )));
        }
        for (j, c) in coefficients.iter().enumerate() {
            ensure_finite(*c, &format!("a_-{}", j + 1))?;
        }
        Ok(PrincipalPart { p, coefficients })
    }

    /// `a / (z - p)^m`, the single-coefficient shape.
    pub fn monomial(p: f64, m: usize, a: Complex64) -> Result<Self> {
        let mut coefficients = vec![Complex64::new(0.0, 0.0); m];
        if let Some(top) = coefficients.last_mut() {
            *top = a;
        }
        Self::new(p, coefficients)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `a_{-j}` for `1 ≤ j ≤ m`, zero beyond.
    pub fn coefficient(&self, j: usize) -> Complex64 {
        if j == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients
            .get(j - 1)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn top(&self) -> Complex64 {
        self.coefficients[self.coefficients.len() - 1]
    }

    /// True when only `a_{-m}` is nonzero.
    pub fn is_monomial(&self) -> bool {
        self.coefficients[..self.coefficients.len() - 1]
            .iter()
            .all(|c| c.re == 0.0 && c.im == 0.0)
    }

    fn inverse_distance(&self, z: Complex64) -> Result<Complex64> {
        ensure_finite(z, "evaluation point")?;
        let d = z - self.p;
        if d.norm() <= POLE_GUARD {
            return Err(Error::PoleProximity {
                z,
                p: self.p,
                guard: POLE_GUARD,
            });
        }
        Ok(d.inv())
    }

    /// `R(z)` anywhere in the plane except near `p`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let w = self.inverse_distance(z)?;
        Ok(self
            .coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, a| (acc + a) * w))
    }

    /// `R` and its first three derivatives. With `w = 1/(z - p)`,
    /// `d^n/dz^n w^j = (-1)^n j (j+1) ⋯ (j+n-1) w^{j+n}`.
    pub fn jet3(&self, z: Complex64) -> Result<[Complex64; 4]> {
        let w = self.inverse_distance(z)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = [zero; 4];
        let mut w_pow = w;
        for (idx, a) in self.coefficients.iter().enumerate() {
            let j = (idx + 1) as f64;
            out[0] += a * w_pow;
            out[1] -= a * w_pow * w * j;
            out[2] += a * w_pow * w * w * (j * (j + 1.0));
            out[3] -= a * w_pow * w * w * w * (j * (j + 1.0) * (j + 2.0));
            w_pow *= w;
        }
        Ok(out)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet3(z)?[1])
    }

    /// Taylor coefficients of `R̃(ζ) = R(1/ζ) = Σ a_{-j} ζ^j / (1 - pζ)^j`.
    pub fn exterior_form(&self, order: usize) -> TruncatedSeries {
        let mut acc = TruncatedSeries::zero(order);
        for (idx, a) in self.coefficients.iter().enumerate() {
            let j = idx + 1;
            let mut monomial = vec![Complex64::new(0.0, 0.0); order + 1];
            if j <= order {
                monomial[j] = *a;
            }
            let monomial = TruncatedSeries::unit(monomial).expect("finite coefficients");
            let expansion = binomial_expand(j as u32, self.p, order).expect("p validated at construction");
            acc = acc.add(&monomial.cauchy_product(&expansion));
        }
        acc
    }

    /// Smallest order whose tail estimate `Σ_{n>N} |coef_n|` of the
    /// exterior form's `derivative`-th derivative falls below `target`.
    pub(crate) fn exterior_order_for(&self, derivative: u32, target: f64, cap: usize) -> usize {
        if self.p == 0.0 {
            return self.order() + 1;
        }
        let m = self.order() as f64;
        let d = derivative as f64;
        let amplitude: f64 = self.coefficients.iter().map(|a| a.norm()).sum();
        // Coefficient n of R̃ is at most amplitude · binom(n-1, m-1) p^{n-m}
        // (times n^d after d differentiations); successive terms shrink by
        // at least p · ((n+1)/n)^d · n / (n - m + 1).
        let mut n = self.order();
        while n < cap {
            n += 1;
            let nf = n as f64;
            let ratio = self.p * ((nf + 1.0) / nf).powf(d) * nf / (nf - m + 1.0);
            if ratio < 1.0 {
                let term =
                    amplitude * binomial(n as u64 - 1, self.order() as u64 - 1) * self.p.powf(nf - m) * nf.powf(d);
                if term / (1.0 - ratio) < target {
                    return n;
                }
            }
        }
        cap
    }

    /// `b_k = Σ_j |a_{-j}| binom(k-1, j-1) p^{k-j}`, an upper bound on `|c_{-k}|`.
    pub(crate) fn recentred_bound(&self, k: usize) -> f64 {
        (1..=self.order().min(k))
            .map(|j| self.coefficient(j).norm() * binomial(k as u64 - 1, j as u64 - 1) * self.p.powi((k - j) as i32))
            .sum()
    }

    /// Upper bound on `b_{k+1} / b_k` valid for `k ≥ m`.
    pub(crate) fn recentred_ratio(&self, k: usize) -> f64 {
        let m = self.order();
        if k < m {
            return f64::INFINITY;
        }
        self.p * k as f64 / (k - m + 1) as f64
    }
}

/// `f = R + Σ a_n z^n` on the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizedMeromorphic {
    principal: PrincipalPart,
    taylor: TruncatedSeries,
}

impl PolarizedMeromorphic {
    pub fn new(principal: PrincipalPart, taylor: TruncatedSeries) -> Self {
        PolarizedMeromorphic { principal, taylor }
    }

    /// `Σ a_{-j}/(z-p)^j + a_0 + a_1 z/(1 - pz)`, the extremal family of the
    /// area inequality, with the Taylor tail truncated at `order`.
    pub fn extremal(principal: PrincipalPart, a0: Complex64, a1: Complex64, order: usize) -> Result<Self> {
        let p = principal.p();
        let mut coefficients = Vec::with_capacity(order + 1);
        coefficients.push(a0);
        let mut p_pow = 1.0;
        for _ in 1..=order {
            coefficients.push(a1 * p_pow);
            p_pow *= p;
        }
        let tail = TailBound::new(p, a1.norm() * p.powi(order as i32), order)?;
        Ok(Self::new(
            principal,
            TruncatedSeries::unit(coefficients)?.with_tail(tail),
        ))
    }

    pub fn principal(&self) -> &PrincipalPart {
        &self.principal
    }

    pub fn taylor(&self) -> &TruncatedSeries {
        &self.taylor
    }

    pub fn p(&self) -> f64 {
        self.principal.p
    }

    pub fn pole_order(&self) -> usize {
        self.principal.order()
    }

    pub fn evaluate_f(&self, z: Complex64) -> Result<Complex64> {
        self.taylor.check_radius(z)?;
        Ok(self.principal.evaluate(z)? + self.taylor.horner(z))
    }

    pub fn derivative_f(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet3(z)?[1])
    }

    /// `f, f', f'', f'''` at `z`: exact rational derivatives of the principal
    /// part plus term-wise derivatives of the Taylor part.
    pub fn jet3(&self, z: Complex64) -> Result<[Complex64; 4]> {
        self.taylor.check_radius(z)?;
        let r = self.principal.jet3(z)?;
        let t = self.taylor.jet3(z);
        Ok([r[0] + t[0], r[1] + t[1], r[2] + t[2], r[3] + t[3]])
    }

    pub fn exterior_form(&self, order: usize) -> TruncatedSeries {
        self.principal.exterior_form(order)
    }

    /// Coefficients `c_{-k} = Σ_{j=1}^{min(m,k)} a_{-j} binom(k-1, j-1) p^{k-j}`
    /// of the principal part re-expanded about the origin on `|p| < |z|`.
    pub fn laurent_recentre(&self, order: usize) -> Result<LaurentTail> {
        if order == 0 {
            return Err(Error::domain("Laurent truncation order must be at least 1"));
        }
        let p = self.p();
        let m = self.pole_order();
        let coefficients = (1..=order)
            .map(|k| {
                (1..=m.min(k))
                    .map(|j| {
                        self.principal.coefficient(j) * (binomial(k as u64 - 1, j as u64 - 1) * p.powi((k - j) as i32))
                    })
                    .sum()
            })
            .collect();
        Ok(LaurentTail {
            coefficients,
            annulus_inner: p,
            annulus_outer: 1.0,
        })
    }

    /// Smallest `K` whose geometric tail estimate of `|c_{-k}|` is below
    /// [`LAURENT_TAIL_TARGET`], capped at [`LAURENT_MAX_ORDER`].
    pub fn default_laurent_order(&self) -> usize {
        let m = self.pole_order();
        if self.p() == 0.0 {
            return m;
        }
        for k in m..LAURENT_MAX_ORDER {
            let ratio = self.principal.recentred_ratio(k + 1);
            if ratio < 1.0 {
                let tail = self.principal.recentred_bound(k + 1) / (1.0 - ratio);
                if tail < LAURENT_TAIL_TARGET {
                    return k;
                }
            }
        }
        LAURENT_MAX_ORDER
    }
}

/// Negative-power coefficients of `f` about the origin, valid on `p < |z| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentTail {
    /// `coefficients[k - 1]` holds `c_{-k}`.
    pub coefficients: Vec<Complex64>,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
}

impl LaurentTail {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `c_{-k}` for `k ≥ 1`.
    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.coefficients[k - 1]
    }

    /// `Σ_k c_{-k} z^{-k}`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        ensure_finite(z, "evaluation point")?;
        if z.norm() <= self.annulus_inner {
            return Err(Error::domain(format!(
                "|z| = {} is inside the inner annulus radius {}",
                z.norm(),
                self.annulus_inner
            )));
        }
        let w = z.inv();
        Ok(self
            .coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| (acc + c) * w))
    }
}
