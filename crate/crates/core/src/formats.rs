//! JSON input documents.
//!
//! Three document kinds are recognised by their top-level keys:
//!
//! * function spec, `{"pole": {"p", "m", "principal"}, "taylor", "radius"}`
//!   with optional `"k"`, `"name"`, `"tail"` and `"extension"`;
//! * family spec, `{"family": "sharp_extremal", "k", "p"}`;
//! * harmonic spec, `{"h", "g", "domain"}` with optional `"eta"` and `"k"`.
//!
//! Complex numbers are `[re, im]` pairs. Errors name the offending field.

use std::fmt;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::harmonic::{ConvexDomain, HarmonicMapSpec};
use crate::meromorphic::{PolarizedMeromorphic, PrincipalPart};
use crate::series::{TailBound, TruncatedSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct FormatError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for FormatError {}

type Parsed<T> = std::result::Result<T, FormatError>;

fn fail<T>(field: &str, message: impl Into<String>) -> Parsed<T> {
    Err(FormatError {
        field: field.to_string(),
        message: message.into(),
    })
}

fn join(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_string()
    } else {
        format!("{parent}.{key}")
    }
}

fn object<'a>(value: &'a Value, field: &str) -> Parsed<&'a Map<String, Value>> {
    value.as_object().map_or_else(|| fail(field, "expected an object"), Ok)
}

fn required<'a>(map: &'a Map<String, Value>, parent: &str, key: &str) -> Parsed<&'a Value> {
    map.get(key).map_or_else(|| fail(&join(parent, key), "missing"), Ok)
}

fn number(value: &Value, field: &str) -> Parsed<f64> {
    match value.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => fail(field, "expected a finite number"),
    }
}

fn complex(value: &Value, field: &str) -> Parsed<Complex64> {
    match value.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(Complex64::new(
            number(re, &format!("{field}[0]"))?,
            number(im, &format!("{field}[1]"))?,
        )),
        _ => fail(field, "expected a [re, im] pair"),
    }
}

fn complex_list(value: &Value, field: &str) -> Parsed<Vec<Complex64>> {
    let items = value
        .as_array()
        .map_or_else(|| fail(field, "expected an array of [re, im] pairs"), Ok)?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| complex(v, &format!("{field}[{i}]")))
        .collect()
}

fn optional_number(map: &Map<String, Value>, parent: &str, key: &str) -> Parsed<Option<f64>> {
    map.get(key).map(|v| number(v, &join(parent, key))).transpose()
}

fn check_k(k: Option<f64>, field: &str) -> Parsed<Option<f64>> {
    match k {
        Some(k) if !(0.0..1.0).contains(&k) => fail(field, format!("k = {k} must lie in [0, 1)")),
        _ => Ok(k),
    }
}

fn series(map: &Map<String, Value>, parent: &str, key: &str, radius: f64) -> Parsed<TruncatedSeries> {
    let field = join(parent, key);
    let coefficients = complex_list(required(map, parent, key)?, &field)?;
    TruncatedSeries::new(coefficients, radius).or_else(|e| fail(&field, e.to_string()))
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn complex_list_json(values: &[Complex64]) -> Value {
    Value::Array(values.iter().map(|&z| complex_json(z)).collect())
}

/// Exterior rule requested by a function spec.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionRequest {
    ReflectOmega,
    ExtremalTail { a0: Complex64, a1: Complex64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub name: Option<String>,
    pub function: PolarizedMeromorphic,
    pub k: Option<f64>,
    pub extension: Option<ExtensionRequest>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `z / (1 - k z²)` composed with the disk automorphism taking `p` to `0`.
    SharpExtremal { k: f64, p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicInput {
    pub name: Option<String>,
    pub spec: HarmonicMapSpec,
    /// Reference univalent map; `h` when absent.
    pub eta: TruncatedSeries,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputDocument {
    Function(FunctionSpec),
    Family { name: Option<String>, family: Family },
    Harmonic(HarmonicInput),
}

impl InputDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            InputDocument::Function(_) => "function",
            InputDocument::Family { .. } => "family",
            InputDocument::Harmonic(_) => "harmonic",
        }
    }
}

pub fn parse_document(text: &str) -> Parsed<InputDocument> {
    let value: Value = serde_json::from_str(text).or_else(|e| fail("", format!("malformed JSON: {e}")))?;
    let map = object(&value, "")?;
    let name = match map.get("name") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return fail("name", "expected a string"),
    };
    if map.contains_key("family") {
        Ok(InputDocument::Family {
            name,
            family: parse_family(map)?,
        })
    } else if map.contains_key("h") {
        let mut input = parse_harmonic(map)?;
        input.name = name;
        Ok(InputDocument::Harmonic(input))
    } else if map.contains_key("pole") {
        let mut spec = parse_function(map)?;
        spec.name = name;
        Ok(InputDocument::Function(spec))
    } else {
        fail("", "unrecognised document: expected a `pole`, `family` or `h` key")
    }
}

fn parse_family(map: &Map<String, Value>) -> Parsed<Family> {
    match required(map, "", "family")?.as_str() {
        Some("sharp_extremal") => {
            let k = number(required(map, "", "k")?, "k")?;
            check_k(Some(k), "k")?;
            let p = optional_number(map, "", "p")?.unwrap_or(0.0);
            if !(0.0..1.0).contains(&p) {
                return fail("p", format!("p = {p} must lie in [0, 1)"));
            }
            Ok(Family::SharpExtremal { k, p })
        }
        Some(other) => fail("family", format!("unknown family `{other}`")),
        None => fail("family", "expected a string"),
    }
}

pub fn parse_function(map: &Map<String, Value>) -> Parsed<FunctionSpec> {
    let pole = object(required(map, "", "pole")?, "pole")?;
    let p = number(required(pole, "pole", "p")?, "pole.p")?;
    let m_value = required(pole, "pole", "m")?;
    let m = m_value
        .as_u64()
        .filter(|&m| m >= 1)
        .map_or_else(|| fail("pole.m", "expected a positive integer"), Ok)? as usize;
    let principal = complex_list(required(pole, "pole", "principal")?, "pole.principal")?;
    if principal.len() != m {
        return fail(
            "pole.principal",
            format!("expected {m} coefficients (a_-1 first), found {}", principal.len()),
        );
    }
    let principal = PrincipalPart::new(p, principal).or_else(|e| fail("pole", e.to_string()))?;

    let radius = number(required(map, "", "radius")?, "radius")?;
    let mut taylor = series(map, "", "taylor", radius)?;
    if let Some(tail) = map.get("tail") {
        let t = object(tail, "tail")?;
        let ratio = number(required(t, "tail", "geometric_ratio")?, "tail.geometric_ratio")?;
        let lead = number(required(t, "tail", "leading_bound")?, "tail.leading_bound")?;
        let bound = TailBound::new(ratio, lead, taylor.order()).or_else(|e| fail("tail", e.to_string()))?;
        taylor = taylor.with_tail(bound);
    }
    let k = check_k(optional_number(map, "", "k")?, "k")?;
    let extension = match map.get("extension") {
        None => None,
        Some(v) => Some(parse_extension(object(v, "extension")?)?),
    };
    Ok(FunctionSpec {
        name: None,
        function: PolarizedMeromorphic::new(principal, taylor),
        k,
        extension,
    })
}

fn parse_extension(map: &Map<String, Value>) -> Parsed<ExtensionRequest> {
    match required(map, "extension", "rule")?.as_str() {
        Some("reflect_omega") => Ok(ExtensionRequest::ReflectOmega),
        Some("extremal_tail") => Ok(ExtensionRequest::ExtremalTail {
            a0: complex(required(map, "extension", "a0")?, "extension.a0")?,
            a1: complex(required(map, "extension", "a1")?, "extension.a1")?,
        }),
        Some(other) => fail("extension.rule", format!("unknown rule `{other}`")),
        None => fail("extension.rule", "expected a string"),
    }
}

fn parse_domain(value: &Value) -> Parsed<ConvexDomain> {
    let map = object(value, "domain")?;
    match required(map, "domain", "kind")?.as_str() {
        Some("disk") => {
            let center = match map.get("center") {
                Some(v) => complex(v, "domain.center")?,
                None => Complex64::new(0.0, 0.0),
            };
            let radius = number(required(map, "domain", "radius")?, "domain.radius")?;
            ConvexDomain::disk(center, radius).or_else(|e| fail("domain", e.to_string()))
        }
        Some("polygon") => {
            let vertices = complex_list(required(map, "domain", "vertices")?, "domain.vertices")?;
            ConvexDomain::polygon(vertices).or_else(|e| fail("domain.vertices", e.to_string()))
        }
        Some(other) => fail("domain.kind", format!("unknown domain kind `{other}`")),
        None => fail("domain.kind", "expected a string"),
    }
}

fn parse_harmonic(map: &Map<String, Value>) -> Parsed<HarmonicInput> {
    let radius = optional_number(map, "", "radius")?.unwrap_or(1.0);
    let h = series(map, "", "h", radius)?;
    let g = series(map, "", "g", radius)?;
    let eta = if map.contains_key("eta") {
        series(map, "", "eta", radius)?
    } else {
        h.clone()
    };
    let domain = parse_domain(required(map, "", "domain")?)?;
    let spec = HarmonicMapSpec::new(h, g, domain).or_else(|e| fail("", e.to_string()))?;
    let k = check_k(optional_number(map, "", "k")?, "k")?;
    Ok(HarmonicInput {
        name: None,
        spec,
        eta,
        k,
    })
}

/// Function-spec JSON for `spec`, parseable by [`parse_document`].
pub fn function_to_json(spec: &FunctionSpec) -> Value {
    let f = &spec.function;
    let mut map = Map::new();
    if let Some(name) = &spec.name {
        map.insert("name".into(), json!(name));
    }
    map.insert(
        "pole".into(),
        json!({
            "p": f.p(),
            "m": f.pole_order(),
            "principal": complex_list_json(f.principal().coefficients()),
        }),
    );
    map.insert("taylor".into(), complex_list_json(f.taylor().coefficients()));
    map.insert("radius".into(), json!(f.taylor().declared_radius()));
    if let Some(t) = f.taylor().tail_bound() {
        map.insert(
            "tail".into(),
            json!({"geometric_ratio": t.geometric_ratio, "leading_bound": t.leading_bound}),
        );
    }
    if let Some(k) = spec.k {
        map.insert("k".into(), json!(k));
    }
    match &spec.extension {
        None => {}
        Some(ExtensionRequest::ReflectOmega) => {
            map.insert("extension".into(), json!({"rule": "reflect_omega"}));
        }
        Some(ExtensionRequest::ExtremalTail { a0, a1 }) => {
            map.insert(
                "extension".into(),
                json!({"rule": "extremal_tail", "a0": complex_json(*a0), "a1": complex_json(*a1)}),
            );
        }
    }
    Value::Object(map)
}

pub fn family_to_json(name: Option<&str>, family: &Family) -> Value {
    let Family::SharpExtremal { k, p } = family;
    let mut value = json!({"family": "sharp_extremal", "k": k, "p": p});
    if let Some(name) = name {
        value["name"] = json!(name);
    }
    value
}

pub fn harmonic_to_json(input: &HarmonicInput) -> Value {
    let spec = &input.spec;
    let domain = match spec.domain() {
        ConvexDomain::Disk { center, radius } => {
            json!({"kind": "disk", "center": complex_json(*center), "radius": radius})
        }
        ConvexDomain::Polygon { vertices } => json!({"kind": "polygon", "vertices": complex_list_json(vertices)}),
    };
    let mut value = json!({
        "h": complex_list_json(spec.h().coefficients()),
        "g": complex_list_json(spec.g().coefficients()),
        "eta": complex_list_json(input.eta.coefficients()),
        "radius": spec.h().declared_radius().min(spec.g().declared_radius()),
        "domain": domain,
    });
    if let Some(name) = &input.name {
        value["name"] = json!(name);
    }
    if let Some(k) = input.k {
        value["k"] = json!(k);
    }
    value
}
