//! Membership and inequality certificates.
//!
//! Every checker returns a [`Certificate`]: a verdict, the slack of the
//! inequality it tested, and a digest of its inputs. A certificate passes
//! exactly when its margin is non-negative.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::area::{laurent_energy, taylor_energy};
use crate::error::{Error, Result};
use crate::grid::compensated_sum;
use crate::meromorphic::{PolarizedMeromorphic, PrincipalPart};
use crate::series::TruncatedSeries;

/// Largest tail estimate of `Σ k |c_{-k}|²` accepted by the area checks.
pub const AREA_TAIL_LIMIT: f64 = 1e-8;

/// Largest tail estimate of `Σ n |a_n|` accepted by the membership check.
pub const MEMBERSHIP_TAIL_LIMIT: f64 = 1e-10;

/// Relative allowance for roundoff in non-strict comparisons of computed
/// sums; it is added to the reported margin.
pub const ROUNDOFF_ALLOWANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionId {
    /// `T ≤ (P - T) k²`, the area inequality in its printed form.
    AreaInequalityAsPrinted,
    /// `T ≤ k² P`, the form that the Jacobian argument actually yields.
    AreaInequalityDerived,
    FirstCoefficientBound,
    SufficientMembership,
    OmegaDerivativeBound,
    /// Sampled `sup |μ|` of an extension against its admissible bound.
    DilatationBound,
    HadamardAlpha,
    SchwarzianBound,
    HarmonicExtension,
}

impl CriterionId {
    /// Advisory certificates are reported but do not decide an overall run.
    pub fn is_advisory(self) -> bool {
        matches!(self, CriterionId::AreaInequalityAsPrinted)
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub criterion_id: CriterionId,
    pub verdict: Verdict,
    pub margin: f64,
    pub inputs_digest: String,
    pub notes: String,
}

impl Certificate {
    /// Pass iff `margin ≥ 0`.
    pub fn from_margin(criterion_id: CriterionId, margin: f64, inputs_digest: String, notes: String) -> Self {
        let verdict = if margin >= 0.0 { Verdict::Pass } else { Verdict::Fail };
        Certificate {
            criterion_id,
            verdict,
            margin,
            inputs_digest,
            notes,
        }
    }

    /// Pass iff `value < bound`. An exact tie is reported with the smallest
    /// negative margin so that `margin ≥ 0` still coincides with a pass.
    pub fn strict(criterion_id: CriterionId, value: f64, bound: f64, inputs_digest: String, notes: String) -> Self {
        let slack = bound - value;
        let margin = if slack > 0.0 {
            slack
        } else {
            slack.min(-f64::MIN_POSITIVE)
        };
        Self::from_margin(criterion_id, margin, inputs_digest, notes)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Stable hex digest (first 16 hex digits of SHA-256) of a value's JSON form.
pub fn inputs_digest<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("inputs serialize to JSON");
    let hash = Sha256::digest(&bytes);
    hex::encode(&hash[..8])
}

fn check_k(k: f64) -> Result<()> {
    if (0.0..1.0).contains(&k) {
        Ok(())
    } else {
        Err(Error::invalid(format!("k = {k} is outside [0, 1)")))
    }
}

fn allowance(scale: f64) -> f64 {
    ROUNDOFF_ALLOWANCE * scale.abs()
}

/// Both readings of the area inequality at `r → 1`:
/// `(as printed, derived)` with `T = Σ n|a_n|²`, `P = Σ k|c_{-k}|²`.
pub fn check_area_inequality(f: &PolarizedMeromorphic, k: f64) -> Result<(Certificate, Certificate)> {
    check_k(k)?;
    let laurent = laurent_energy(f, 1.0)?;
    if !(laurent.tail_estimate <= AREA_TAIL_LIMIT) {
        return Err(Error::NonConvergence {
            what: "Laurent energy P at r = 1",
            tail: laurent.tail_estimate,
            limit: AREA_TAIL_LIMIT,
        });
    }
    let t = taylor_energy(f.taylor(), 1.0).value;
    let p = laurent.value;
    let k2 = k * k;
    let digest = inputs_digest(f);

    let printed_bound = (p - t) * k2;
    let printed = Certificate::from_margin(
        CriterionId::AreaInequalityAsPrinted,
        printed_bound - t + allowance(t.max(printed_bound)),
        digest.clone(),
        format!("T={t:e} P={p:e} bound=(P-T)k^2={printed_bound:e}; advisory: the derived form is T <= k^2 P"),
    );
    let derived_bound = k2 * p;
    let derived = Certificate::from_margin(
        CriterionId::AreaInequalityDerived,
        derived_bound - t + allowance(t.max(derived_bound)),
        digest,
        format!("T={t:e} P={p:e} bound=k^2 P={derived_bound:e}"),
    );
    Ok((printed, derived))
}

/// `|a_1| < k / (1 - p²)^m`.
pub fn check_first_coefficient(f: &PolarizedMeromorphic, k: f64) -> Result<Certificate> {
    check_k(k)?;
    let p = f.p();
    let bound = k / (1.0 - p * p).powi(f.pole_order() as i32);
    let a1 = f.taylor().coefficient(1).norm();
    Ok(Certificate::strict(
        CriterionId::FirstCoefficientBound,
        a1,
        bound,
        inputs_digest(f),
        format!("|a1|={a1:e} bound={bound:e}"),
    ))
}

/// `Σ n |a_n| ≤ |a_{-m}| k / (1 + p)^{m+1}`; a pass certifies membership.
pub fn check_sufficient_membership(f: &PolarizedMeromorphic, k: f64) -> Result<Certificate> {
    check_k(k)?;
    let tail = f.taylor().tail_bound().map_or(0.0, |t| t.weighted_abs_sum());
    if !(tail <= MEMBERSHIP_TAIL_LIMIT) {
        return Err(Error::NonConvergence {
            what: "sum of n |a_n|",
            tail,
            limit: MEMBERSHIP_TAIL_LIMIT,
        });
    }
    let sum = weighted_abs_sum(f.taylor());
    let m = f.pole_order() as i32;
    let bound = f.principal().top().norm() * k / (1.0 + f.p()).powi(m + 1);
    Ok(Certificate::from_margin(
        CriterionId::SufficientMembership,
        bound - sum + allowance(sum.max(bound)),
        inputs_digest(f),
        format!("sum n|a_n|={sum:e} bound={bound:e}"),
    ))
}

/// `Σ_{n≥1} n |a_n|`.
pub fn weighted_abs_sum(s: &TruncatedSeries) -> f64 {
    compensated_sum(
        s.coefficients()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, a)| n as f64 * a.norm()),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardProductSpec {
    pub left: PolarizedMeromorphic,
    pub right: PolarizedMeromorphic,
    pub product: PolarizedMeromorphic,
}

/// `(f ⋆ g)(z) = a b / (z - p)^m + Σ a_n b_n z^n` for `f = a/(z-p)^m + …`
/// and `g = b/(z-p)^m + …`.
pub fn hadamard_product(left: &PolarizedMeromorphic, right: &PolarizedMeromorphic) -> Result<HadamardProductSpec> {
    if left.p() != right.p() {
        return Err(Error::Mismatch(format!(
            "pole locations differ: {} vs {}",
            left.p(),
            right.p()
        )));
    }
    if left.pole_order() != right.pole_order() {
        return Err(Error::Mismatch(format!(
            "pole orders differ: {} vs {}",
            left.pole_order(),
            right.pole_order()
        )));
    }
    if !left.principal().is_monomial() || !right.principal().is_monomial() {
        return Err(Error::Mismatch(
            "the modified Hadamard product needs principal parts of the form a/(z-p)^m".into(),
        ));
    }
    let principal = PrincipalPart::monomial(
        left.p(),
        left.pole_order(),
        left.principal().top() * right.principal().top(),
    )?;
    let order = left.taylor().order().min(right.taylor().order());
    let coefficients: Vec<Complex64> = (0..=order)
        .map(|n| left.taylor().coefficient(n) * right.taylor().coefficient(n))
        .collect();
    let radius = left.taylor().declared_radius().min(right.taylor().declared_radius());
    let product = PolarizedMeromorphic::new(principal, TruncatedSeries::new(coefficients, radius)?);
    Ok(HadamardProductSpec {
        left: left.clone(),
        right: right.clone(),
        product,
    })
}

/// `α_m = |a_{-1}| |b_{-1}| k₁ k₂ (1 - p)^{-2m}`, with `a_{-1}`, `b_{-1}` the
/// top pole coefficients. Symmetric in its operands bit for bit.
pub fn hadamard_alpha(spec: &HadamardProductSpec, k1: f64, k2: f64) -> f64 {
    let amplitude = spec.left.principal().top().norm() * spec.right.principal().top().norm();
    let m = spec.product.pole_order() as i32;
    amplitude * (k1 * k2) / (1.0 - spec.product.p()).powi(2 * m)
}

/// The three quantities of the Cauchy–Schwarz chain
/// `Σ n|a_n b_n| ≤ √(Σ n|a_n|²) √(Σ n|b_n|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchySchwarzChain {
    pub product_sum: f64,
    pub geometric_mean: f64,
}

impl CauchySchwarzChain {
    pub fn new(a: &TruncatedSeries, b: &TruncatedSeries) -> Self {
        let order = a.order().min(b.order());
        let product_sum =
            compensated_sum((1..=order).map(|n| n as f64 * (a.coefficient(n).norm() * b.coefficient(n).norm())));
        let a_energy = taylor_energy(a, 1.0).value;
        let b_energy = taylor_energy(b, 1.0).value;
        CauchySchwarzChain {
            product_sum,
            geometric_mean: a_energy.sqrt() * b_energy.sqrt(),
        }
    }

    pub fn slack(&self) -> f64 {
        self.geometric_mean - self.product_sum
    }
}

/// Pass iff `α_m < 1`; on a pass the notes also carry the slacks of the
/// chain `Σ n|a_n b_n| ≤ √(Σ n|a_n|²)√(Σ n|b_n|²) ≤ α_m / (1 + p)^{2m}`.
pub fn certify_hadamard(spec: &HadamardProductSpec, k1: f64, k2: f64) -> Result<Certificate> {
    check_k(k1)?;
    check_k(k2)?;
    let alpha = hadamard_alpha(spec, k1, k2);
    let digest = inputs_digest(&spec.product);
    let mut notes = format!("alpha_m={alpha:e}");
    if alpha < 1.0 {
        let chain = CauchySchwarzChain::new(spec.left.taylor(), spec.right.taylor());
        let m = spec.product.pole_order() as i32;
        let ceiling = alpha / (1.0 + spec.product.p()).powi(2 * m);
        notes.push_str(&format!(
            " cauchy_schwarz_slack={:e} coefficient_slack={:e}",
            chain.slack(),
            ceiling - chain.geometric_mean
        ));
    }
    Ok(Certificate::strict(
        CriterionId::HadamardAlpha,
        alpha,
        1.0,
        digest,
        notes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn with_taylor(p: f64, m: usize, top: f64, taylor: &[f64]) -> PolarizedMeromorphic {
        PolarizedMeromorphic::new(
            PrincipalPart::monomial(p, m, c(top, 0.0)).unwrap(),
            TruncatedSeries::from_real(taylor).unwrap(),
        )
    }

    fn extremal(p: f64, a1: Complex64) -> PolarizedMeromorphic {
        PolarizedMeromorphic::extremal(PrincipalPart::new(p, vec![c(1.0, 0.0)]).unwrap(), c(0.0, 0.0), a1, 200).unwrap()
    }

    #[test]
    fn area_inequality_at_the_extremal() {
        let (p, k) = (0.3, 0.4);
        let f = extremal(p, c(k, 0.0));
        let (printed, derived) = check_area_inequality(&f, k).unwrap();
        assert!(derived.passed());
        assert!(derived.margin.abs() <= 1e-10);
        // the printed form is strictly stronger and fails here
        assert!(!printed.passed());
        let t = k * k / (1.0 - p * p).powi(2);
        let expected_gap = t - (1.0 / (1.0 - p * p).powi(2) - t) * k * k;
        assert!((printed.margin + expected_gap).abs() < 1e-10);
        assert!(printed.criterion_id.is_advisory());
    }

    #[test]
    fn area_inequality_edge_cases() {
        let f = with_taylor(0.3, 1, 1.0, &[0.0, 0.2]);
        let (printed, derived) = check_area_inequality(&f, 0.0).unwrap();
        assert!(!printed.passed() && !derived.passed());

        let f = with_taylor(0.3, 2, 1.0, &[0.7]);
        let (printed, derived) = check_area_inequality(&f, 0.5).unwrap();
        assert!(printed.passed() && derived.passed());
        let p = laurent_energy(&f, 1.0).unwrap().value;
        assert!((derived.margin - 0.25 * p).abs() < 1e-10);

        assert!(check_area_inequality(&f, 1.0).is_err());
    }

    #[test]
    fn area_inequality_reports_non_convergence() {
        let f = with_taylor(0.9999, 1, 1.0, &[0.0]);
        assert!(matches!(
            check_area_inequality(&f, 0.5),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn first_coefficient_examples() {
        let f = with_taylor(0.3, 1, 1.0, &[0.0, 0.3]);
        let cert = check_first_coefficient(&f, 0.4).unwrap();
        assert!(cert.passed());
        assert!((cert.margin - (0.4 / 0.91 - 0.3)).abs() < 1e-15);
        assert!((cert.margin - 0.13956).abs() < 1e-5);

        let f = with_taylor(0.3, 2, 1.0, &[0.0, 0.45]);
        let cert = check_first_coefficient(&f, 0.4).unwrap();
        assert!(cert.passed());
        assert!((0.4f64 / 0.8281 - 0.48303).abs() < 1e-5);

        let f = with_taylor(0.3, 2, 1.0, &[0.0, 0.0]);
        for k in [0.01, 0.5, 0.99] {
            assert!(check_first_coefficient(&f, k).unwrap().passed());
        }
    }

    #[test]
    fn strict_tie_fails_with_negative_margin() {
        let cert = Certificate::strict(
            CriterionId::FirstCoefficientBound,
            0.5,
            0.5,
            String::new(),
            String::new(),
        );
        assert!(!cert.passed());
        assert!(cert.margin < 0.0);
    }

    #[test]
    fn sufficient_membership_examples() {
        let f = with_taylor(0.0, 1, 1.0, &[0.0, 0.3]);
        let cert = check_sufficient_membership(&f, 0.5).unwrap();
        assert!(cert.passed());
        assert!((cert.margin - 0.2).abs() < 1e-12);

        let f = with_taylor(0.5, 1, 1.0, &[0.0, 0.3]);
        let cert = check_sufficient_membership(&f, 0.5).unwrap();
        assert!(!cert.passed());
        assert!((cert.margin - (0.5 / 2.25 - 0.3)).abs() < 1e-12);

        let f = with_taylor(0.5, 3, 1.0, &[4.0]);
        assert!(check_sufficient_membership(&f, 0.0).unwrap().passed());
    }

    #[test]
    fn hadamard_examples() {
        let f = with_taylor(0.2, 1, 1.0, &[0.0, 1.0, 1.0]);
        let g = with_taylor(0.2, 1, 1.0, &[0.0, 2.0, 3.0]);
        let spec = hadamard_product(&f, &g).unwrap();
        assert_eq!(
            spec.product.taylor().coefficients(),
            &[c(0.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]
        );

        let zero = with_taylor(0.2, 1, 2.0, &[0.0, 0.0, 0.0]);
        let spec = hadamard_product(&f, &zero).unwrap();
        assert!(spec.product.taylor().is_zero());
        assert_eq!(spec.product.principal().top(), c(2.0, 0.0));

        let a1 = c(0.3, 0.1);
        let e = extremal(0.4, a1);
        let spec = hadamard_product(&e, &e).unwrap();
        for n in 1..30 {
            let expected = a1 * a1 * 0.4f64.powi(2 * (n as i32 - 1));
            assert!((spec.product.taylor().coefficient(n) - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn hadamard_mismatches() {
        let f = with_taylor(0.2, 1, 1.0, &[0.0]);
        assert!(matches!(
            hadamard_product(&f, &with_taylor(0.3, 1, 1.0, &[0.0])),
            Err(Error::Mismatch(_))
        ));
        assert!(matches!(
            hadamard_product(&f, &with_taylor(0.2, 2, 1.0, &[0.0])),
            Err(Error::Mismatch(_))
        ));
        let general = PolarizedMeromorphic::new(
            PrincipalPart::new(0.2, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap(),
            TruncatedSeries::zero(0),
        );
        let monomial = with_taylor(0.2, 2, 1.0, &[0.0]);
        assert!(matches!(hadamard_product(&general, &monomial), Err(Error::Mismatch(_))));
    }

    #[test]
    fn certify_hadamard_examples() {
        let f = with_taylor(0.2, 1, 1.0, &[0.0, 0.01]);
        let spec = hadamard_product(&f, &f).unwrap();
        let cert = certify_hadamard(&spec, 0.3, 0.3).unwrap();
        assert!(cert.passed());
        assert!((hadamard_alpha(&spec, 0.3, 0.3) - 0.140625).abs() <= 1e-15);
        assert!(cert.notes.contains("cauchy_schwarz_slack"));

        let f = with_taylor(0.5, 2, 1.0, &[0.0]);
        let spec = hadamard_product(&f, &f).unwrap();
        let cert = certify_hadamard(&spec, 0.8, 0.8).unwrap();
        assert!(!cert.passed());
        assert!((hadamard_alpha(&spec, 0.8, 0.8) - 10.24).abs() <= 1e-14);

        let cert = certify_hadamard(&spec, 0.0, 0.8).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.margin, 1.0);
    }

    #[test]
    fn digest_is_stable_and_discriminating() {
        let f = with_taylor(0.2, 1, 1.0, &[0.0, 0.1]);
        let g = with_taylor(0.2, 1, 1.0, &[0.0, 0.2]);
        assert_eq!(inputs_digest(&f), inputs_digest(&f.clone()));
        assert_ne!(inputs_digest(&f), inputs_digest(&g));
        assert_eq!(inputs_digest(&f).len(), 16);
    }

    fn series_strategy() -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=33).prop_map(|v| {
            TruncatedSeries::unit(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cauchy_schwarz_chain_holds(a in series_strategy(), b in series_strategy()) {
            prop_assert!(CauchySchwarzChain::new(&a, &b).slack() >= -1e-15);
        }

        #[test]
        fn certify_hadamard_is_symmetric(
            a in series_strategy(), b in series_strategy(),
            ta in 0.1f64..2.0, tb in 0.1f64..2.0,
            k1 in 0.0f64..1.0, k2 in 0.0f64..1.0, p in 0.0f64..0.9,
        ) {
            let f = PolarizedMeromorphic::new(PrincipalPart::monomial(p, 2, c(ta, 0.0)).unwrap(), a);
            let g = PolarizedMeromorphic::new(PrincipalPart::monomial(p, 2, c(0.0, tb)).unwrap(), b);
            let fg = certify_hadamard(&hadamard_product(&f, &g).unwrap(), k1, k2).unwrap();
            let gf = certify_hadamard(&hadamard_product(&g, &f).unwrap(), k2, k1).unwrap();
            prop_assert_eq!(fg, gf);
        }

        #[test]
        fn printed_pass_implies_derived_pass(
            a in series_strategy(), top in 0.2f64..2.0, p in 0.0f64..0.8, k in 0.0f64..1.0,
        ) {
            let f = PolarizedMeromorphic::new(PrincipalPart::monomial(p, 1, c(top, 0.0)).unwrap(), a);
            let (printed, derived) = check_area_inequality(&f, k).unwrap();
            prop_assert!(!printed.passed() || derived.passed());
        }
    }
}
