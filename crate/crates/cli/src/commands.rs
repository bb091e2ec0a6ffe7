//! One analysis unit per input (per input pair for `hadamard`).

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use qcx_core::area::{complement_area_series, dirichlet_integral};
use qcx_core::certify::{
    certify_hadamard, check_area_inequality, check_first_coefficient, check_sufficient_membership, hadamard_product,
    inputs_digest, Certificate, CriterionId, ROUNDOFF_ALLOWANCE,
};
use qcx_core::extension::{
    boundary_sup, build_extension_with, injectivity_sample_check, sup_dilatation, DilatationGrid, ExtensionMap,
    ExtensionOptions, OMEGA_BOUND_TOLERANCE,
};
use qcx_core::formats::{ExtensionRequest, Family, FunctionSpec, HarmonicInput, InputDocument};
use qcx_core::harmonic::{bilipschitz_sample_check, check_extension_condition, max_dilatation_omega_f};
use qcx_core::schwarzian::{
    schwarzian_bound_certificate, schwarzian_norm, weighted_field, HolomorphicMap, SharpExtremal,
};
use qcx_core::{Error, PolarizedMeromorphic};

use crate::manifest::{Command, Tolerances};

/// Slack on `sup |μ| ≤ κ` for sampled dilatation fields.
pub const DILATATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Passed,
    Failed,
    NonConvergence,
}

/// A report line without the run-wide fields, plus the CSV files it produced.
#[derive(Debug, Default)]
pub struct UnitOutput {
    pub entries: Vec<Value>,
    pub csvs: Vec<(String, Vec<u8>)>,
    failed: bool,
    non_convergence: bool,
}

impl UnitOutput {
    pub fn status(&self) -> Status {
        if self.non_convergence {
            Status::NonConvergence
        } else if self.failed {
            Status::Failed
        } else {
            Status::Passed
        }
    }

    fn certificate(&mut self, cert: Certificate) {
        let advisory = cert.criterion_id.is_advisory();
        if !advisory && !cert.passed() {
            self.failed = true;
        }
        self.entries
            .push(json!({"kind": "certificate", "advisory": advisory, "certificate": cert}));
    }

    fn report<T: Serialize>(&mut self, name: &str, value: &T) {
        self.entries
            .push(json!({"kind": "report", "report_type": name, "report": value}));
    }

    fn error(&mut self, err: &Error) {
        if matches!(err, Error::NonConvergence { .. }) {
            self.non_convergence = true;
        } else {
            self.failed = true;
        }
        self.entries
            .push(json!({"kind": "error", "error": {"type": error_type(err), "message": err.to_string()}}));
    }

    fn absorb(&mut self, result: qcx_core::Result<()>) {
        if let Err(e) = result {
            self.error(&e);
        }
    }
}

fn error_type(err: &Error) -> String {
    let debug = format!("{err:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

/// Input-level problems detected before any analysis runs.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub field: String,
    pub message: String,
}

fn usage(field: &str, message: impl Into<String>) -> UsageError {
    UsageError {
        field: field.into(),
        message: message.into(),
    }
}

fn resolve_k(own: Option<f64>, tol: &Tolerances) -> Result<f64, UsageError> {
    let k = own
        .or(tol.k)
        .ok_or_else(|| usage("k", "missing; give it in the input or with --tol k=..."))?;
    if (0.0..1.0).contains(&k) {
        Ok(k)
    } else {
        Err(usage("k", format!("k = {k} must lie in [0, 1)")))
    }
}

/// Checks that `doc` suits `command` and that every required field is known.
pub fn validate(command: Command, doc: &InputDocument, tol: &Tolerances) -> Result<(), UsageError> {
    let expect = |ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(usage(
                "",
                format!("`{command}` does not accept {} documents", doc.kind()),
            ))
        }
    };
    match (command, doc) {
        (Command::Area, d) => expect(matches!(d, InputDocument::Function(_))),
        (Command::Certify | Command::Extend | Command::Hadamard, InputDocument::Function(spec)) => {
            resolve_k(spec.k, tol).map(|_| ())
        }
        (Command::Schwarzian, InputDocument::Function(spec)) => resolve_k(spec.k, tol).map(|_| ()),
        (Command::Schwarzian, InputDocument::Family { .. }) => Ok(()),
        (Command::Harmonic, InputDocument::Harmonic(input)) => resolve_k(input.k, tol).map(|_| ()),
        (Command::Gallery, _) => Err(usage("", "`gallery` takes no inputs")),
        _ => expect(false),
    }
}

pub fn run_unit(command: Command, docs: &[&InputDocument], tol: &Tolerances, seed: u64, stem: &str) -> UnitOutput {
    let mut out = UnitOutput::default();
    match (command, docs) {
        (Command::Area, [InputDocument::Function(spec)]) => area(&mut out, spec, tol),
        (Command::Certify, [InputDocument::Function(spec)]) => certify(&mut out, spec, tol),
        (Command::Extend, [InputDocument::Function(spec)]) => {
            let result = extend(&mut out, spec, tol, seed, stem);
            out.absorb(result);
        }
        (Command::Schwarzian, [InputDocument::Function(spec)]) => {
            let k = resolve_k(spec.k, tol).expect("validated");
            let result = schwarzian(&mut out, &spec.function, k, spec.function.p(), tol, stem);
            out.absorb(result);
        }
        (Command::Schwarzian, [InputDocument::Family { family, .. }]) => {
            let Family::SharpExtremal { k, p } = *family;
            let result = SharpExtremal::new(k).and_then(|f0| {
                if p == 0.0 {
                    schwarzian(&mut out, &f0, k, p, tol, stem)
                } else {
                    schwarzian(&mut out, &f0.shifted(p)?, k, p, tol, stem)
                }
            });
            out.absorb(result);
        }
        (Command::Hadamard, [InputDocument::Function(left), InputDocument::Function(right)]) => {
            let result = hadamard(&mut out, left, right, tol);
            out.absorb(result);
        }
        (Command::Harmonic, [InputDocument::Harmonic(input)]) => {
            let result = harmonic(&mut out, input, tol, seed);
            out.absorb(result);
        }
        _ => unreachable!("inputs are validated before dispatch"),
    }
    out
}

fn area(out: &mut UnitOutput, spec: &FunctionSpec, tol: &Tolerances) {
    let f = &spec.function;
    match complement_area_series(f, tol.area_r).and_then(|r| Ok((r, dirichlet_integral(f, tol.area_r)?))) {
        Ok((report, dirichlet)) => {
            out.report("area", &report);
            out.report("dirichlet_integral", &json!({"r": tol.area_r, "value": dirichlet}));
        }
        Err(e) => out.error(&e),
    }
}

fn certify(out: &mut UnitOutput, spec: &FunctionSpec, tol: &Tolerances) {
    let k = resolve_k(spec.k, tol).expect("validated");
    match check_area_inequality(&spec.function, k) {
        Ok((printed, derived)) => {
            out.certificate(printed);
            out.certificate(derived);
        }
        Err(e) => out.error(&e),
    }
    match check_first_coefficient(&spec.function, k) {
        Ok(cert) => out.certificate(cert),
        Err(e) => out.error(&e),
    }
}

fn dilatation_certificate(map: &ExtensionMap, sup: f64, bound: f64, slack: f64) -> Certificate {
    Certificate::from_margin(
        CriterionId::DilatationBound,
        bound + slack - sup,
        inputs_digest(map),
        format!("sup|mu|={sup:e} bound={bound:e}"),
    )
}

fn extend(out: &mut UnitOutput, spec: &FunctionSpec, tol: &Tolerances, seed: u64, stem: &str) -> qcx_core::Result<()> {
    let k = resolve_k(spec.k, tol).expect("validated");
    let f = &spec.function;
    let (map, bound, slack) = match spec.extension.as_ref().unwrap_or(&ExtensionRequest::ReflectOmega) {
        ExtensionRequest::ExtremalTail { a0, a1 } => {
            let map = ExtensionMap::extremal(f.principal().clone(), *a0, *a1, k)?;
            // |μ| equals |a₁| up to rounding in the quotient
            (map, k, ROUNDOFF_ALLOWANCE * k.max(1.0))
        }
        ExtensionRequest::ReflectOmega => {
            out.certificate(check_sufficient_membership(f, k)?);
            let omega = f.taylor();
            let m = f.pole_order() as i32;
            let omega_bound = k / (1.0 + f.p()).powi(m + 1);
            let sup = match tol.omega_dilation {
                Some(r) => omega.dilate(r)?,
                None => omega.clone(),
            };
            let sup = if sup.order() == 0 {
                0.0
            } else {
                boundary_sup(&sup.differentiate()?)
            };
            out.certificate(Certificate::from_margin(
                CriterionId::OmegaDerivativeBound,
                omega_bound + OMEGA_BOUND_TOLERANCE - sup,
                inputs_digest(f),
                format!("sup|omega'|={sup:e} bound={omega_bound:e}"),
            ));
            if sup > omega_bound + OMEGA_BOUND_TOLERANCE {
                return Ok(());
            }
            let options = ExtensionOptions {
                boundary_samples: tol.boundary_samples,
                omega_dilation: tol.omega_dilation,
            };
            let map = build_extension_with(f, omega, k, &options)?;
            let kappa = map.kappa.expect("set by build_extension");
            (map, kappa, DILATATION_SLACK)
        }
    };
    out.report(
        "extension",
        &json!({
            "rule": map.rule,
            "k": map.k,
            "kappa": map.kappa,
            "nondegeneracy": map.nondegeneracy,
            "omega_derivative_sup": map.omega_derivative_sup,
            "seam_discrepancy": map.seam_discrepancy(1024)?,
        }),
    );
    let grid = DilatationGrid::new(tol.radial, tol.angular, tol.exterior_radius)?;
    let field = sup_dilatation(&map, &grid)?;
    let mut csv = Vec::new();
    field.write_csv(&mut csv).expect("writing to memory");
    let file = format!("{stem}_dilatation.csv");
    out.report(
        "dilatation_field",
        &json!({"sup_abs_mu": field.sup_abs_mu, "argmax": field.argmax, "grid": field.grid, "csv": file}),
    );
    out.csvs.push((file, csv));
    out.certificate(dilatation_certificate(&map, field.sup_abs_mu, bound, slack));
    let injectivity = injectivity_sample_check(&map, tol.pairs, seed, tol.exterior_radius)?;
    out.report("injectivity", &injectivity);
    Ok(())
}

fn schwarzian<F>(out: &mut UnitOutput, f: &F, k: f64, p: f64, tol: &Tolerances, stem: &str) -> qcx_core::Result<()>
where
    F: HolomorphicMap + Serialize + Sync,
{
    let grid = tol.polar_grid()?;
    let report = schwarzian_norm(f, &grid, tol.refinements);
    out.report("schwarzian_norm", &report);
    out.certificate(schwarzian_bound_certificate(f, k, p, &report)?);
    let field = weighted_field(f, &grid);
    let mut csv = Vec::new();
    if field.write_csv(&mut csv).is_ok() {
        out.csvs.push((format!("{stem}_schwarzian.csv"), csv));
    }
    Ok(())
}

fn hadamard(out: &mut UnitOutput, left: &FunctionSpec, right: &FunctionSpec, tol: &Tolerances) -> qcx_core::Result<()> {
    let k1 = resolve_k(left.k, tol).expect("validated");
    let k2 = resolve_k(right.k, tol).expect("validated");
    let spec = hadamard_product(&left.function, &right.function)?;
    out.report("hadamard_product", &product_summary(&spec.product));
    out.certificate(certify_hadamard(&spec, k1, k2)?);
    Ok(())
}

fn product_summary(f: &PolarizedMeromorphic) -> Value {
    let pairs = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    json!({
        "pole": {"p": f.p(), "m": f.pole_order(), "principal": pairs(f.principal().coefficients())},
        "taylor": pairs(f.taylor().coefficients()),
        "radius": f.taylor().declared_radius(),
    })
}

fn harmonic(out: &mut UnitOutput, input: &HarmonicInput, tol: &Tolerances, seed: u64) -> qcx_core::Result<()> {
    let k = resolve_k(input.k, tol).expect("validated");
    let cert = check_extension_condition(&input.spec, &input.eta, k, tol.harmonic_grid)?;
    let passed = cert.passed();
    out.certificate(cert);
    out.report(
        "omega_f",
        &json!({"max_abs_omega_f": max_dilatation_omega_f(&input.spec, tol.harmonic_grid)?}),
    );
    if passed {
        let report = bilipschitz_sample_check(&input.spec, &input.eta, k, tol.pairs, seed)?;
        out.report("bilipschitz", &report);
    }
    Ok(())
}
