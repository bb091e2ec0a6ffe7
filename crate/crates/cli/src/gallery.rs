//! Reproducible example inputs written by `qcx gallery`.

use serde_json::Value;

use qcx_core::formats::{
    family_to_json, function_to_json, harmonic_to_json, ExtensionRequest, Family, FunctionSpec, HarmonicInput,
};
use qcx_core::{
    Complex64, ConvexDomain, HarmonicMapSpec, PolarizedMeromorphic, PrincipalPart, Result, TruncatedSeries,
};

/// Truncation order of the geometric Taylor part of the extremal example.
pub const EXTREMAL_ORDER: usize = 200;

fn extremal_function(name: &str, extension: Option<ExtensionRequest>) -> Result<Value> {
    let (p, k) = (0.3, 0.4);
    let principal = PrincipalPart::monomial(p, 1, Complex64::new(1.0, 0.0))?;
    let function = PolarizedMeromorphic::extremal(
        principal,
        Complex64::new(0.0, 0.0),
        Complex64::new(k, 0.0),
        EXTREMAL_ORDER,
    )?;
    Ok(function_to_json(&FunctionSpec {
        name: Some(name.into()),
        function,
        k: Some(k),
        extension,
    }))
}

/// `(file stem, document)` pairs, in a fixed order.
pub fn gallery() -> Result<Vec<(&'static str, Value)>> {
    let reflect = {
        let principal = PrincipalPart::monomial(0.0, 1, Complex64::new(1.0, 0.0))?;
        let omega = TruncatedSeries::from_real(&[0.0, 0.3])?;
        function_to_json(&FunctionSpec {
            name: Some("reflect_omega".into()),
            function: PolarizedMeromorphic::new(principal, omega),
            k: Some(0.5),
            extension: Some(ExtensionRequest::ReflectOmega),
        })
    };
    let harmonic = harmonic_to_json(&HarmonicInput {
        name: Some("harmonic_shear".into()),
        spec: HarmonicMapSpec::new(
            TruncatedSeries::from_real(&[0.0, 1.0])?,
            TruncatedSeries::from_real(&[0.0, 0.0, 0.15])?,
            ConvexDomain::unit_disk(),
        )?,
        eta: TruncatedSeries::from_real(&[0.0, 1.0])?,
        k: Some(0.5),
    });
    Ok(vec![
        ("extremal_m1", extremal_function("extremal_m1", None)?),
        (
            "extremal_m1_extension",
            extremal_function(
                "extremal_m1_extension",
                Some(ExtensionRequest::ExtremalTail {
                    a0: Complex64::new(0.0, 0.0),
                    a1: Complex64::new(0.4, 0.0),
                }),
            )?,
        ),
        (
            "sharp_extremal_p0",
            family_to_json(Some("sharp_extremal_p0"), &Family::SharpExtremal { k: 0.4, p: 0.0 }),
        ),
        (
            "sharp_extremal_p03",
            family_to_json(Some("sharp_extremal_p03"), &Family::SharpExtremal { k: 0.4, p: 0.3 }),
        ),
        ("reflect_omega", reflect),
        ("harmonic_shear", harmonic),
    ])
}
