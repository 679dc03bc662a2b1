//! JSON encodings.
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs. A group element
//! is `{"spec": {"family": "U", "n": 2}, "matrix": ...}`. Floats are rounded
//! to 15 significant digits by [`canonicalize`] so output is byte-stable.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::homotopy::{certify_path, GroupPath, PathEnd, PathKind, Pin};
use crate::lie::{CMat, GroupElement, GroupSpec, C64};
use crate::surface::{relation_residual, SurfaceSig, TuplePoint};
use crate::tol;

pub fn complex_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(v: &Value) -> Result<C64> {
    match v {
        Value::Array(p) if p.len() == 2 => {
            let re = p[0].as_f64().ok_or_else(|| bad("real part"))?;
            let im = p[1].as_f64().ok_or_else(|| bad("imaginary part"))?;
            Ok(C64::new(re, im))
        }
        Value::Number(x) => Ok(C64::new(x.as_f64().ok_or_else(|| bad("number"))?, 0.0)),
        _ => Err(bad("complex number")),
    }
}

fn bad(what: &str) -> Error {
    Error::InvalidInput(format!("malformed {what} in JSON"))
}

pub fn matrix_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| bad("matrix"))?;
    let n = rows.len();
    let mut m = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| bad("matrix row"))?;
        if row.len() != n {
            return Err(Error::InvalidInput(format!("matrix must be square, row {i} has {} entries", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = complex_from_json(z)?;
        }
    }
    Ok(m)
}

pub fn element_to_json(g: &GroupElement) -> Value {
    json!({ "spec": g.spec(), "matrix": matrix_to_json(g.matrix()) })
}

/// Parse and validate at the post-computation tier.
pub fn element_from_json(v: &Value) -> Result<GroupElement> {
    let spec: GroupSpec = serde_json::from_value(v.get("spec").cloned().ok_or_else(|| bad("element spec"))?)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let m = matrix_from_json(v.get("matrix").ok_or_else(|| bad("element matrix"))?)?;
    GroupElement::with_tolerance(spec, m, tol::POST)
}

pub fn tuple_to_json(x: &TuplePoint) -> Value {
    json!({
        "surface": x.sig(),
        "group": x.spec(),
        "generators": x.generators().iter().map(|g| matrix_to_json(g.matrix())).collect::<Vec<_>>(),
        "residual": relation_residual(x),
    })
}

pub fn tuple_from_json(v: &Value) -> Result<TuplePoint> {
    let sig: SurfaceSig = serde_json::from_value(v.get("surface").cloned().ok_or_else(|| bad("surface"))?)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let spec: GroupSpec = serde_json::from_value(v.get("group").cloned().ok_or_else(|| bad("group"))?)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    tuple_gens_from_json(sig, spec, v.get("generators").ok_or_else(|| bad("generators"))?)
}

fn tuple_gens_from_json(sig: SurfaceSig, spec: GroupSpec, v: &Value) -> Result<TuplePoint> {
    let gens = v
        .as_array()
        .ok_or_else(|| bad("generators"))?
        .iter()
        .map(|m| GroupElement::with_tolerance(spec, matrix_from_json(m)?, tol::POST))
        .collect::<Result<Vec<_>>>()?;
    TuplePoint::from_generators(sig, spec, gens)
}

fn kind_tag(k: PathKind) -> &'static str {
    match k {
        PathKind::DeformSs => "deform_ss",
        PathKind::Odd => "odd",
        PathKind::Even => "even",
    }
}

pub fn path_to_json(p: &GroupPath) -> Value {
    let start = p.start();
    json!({
        "kind": kind_tag(p.kind()),
        "surface": start.sig(),
        "group": start.spec(),
        "lift": p.lift().map(complex_to_json),
        "target": matrix_to_json(p.target().matrix()),
        "pins": p.pins().iter().map(|pin| json!({
            "end": pin.end,
            "slot": pin.slot,
            "matrix": matrix_to_json(pin.target.matrix()),
        })).collect::<Vec<_>>(),
        "steps": p.steps().iter().zip(p.residuals()).map(|((t, x), r)| json!({
            "t": t,
            "residual": r,
            "generators": x.generators().iter().map(|g| matrix_to_json(g.matrix())).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "certificate": certify_path(p),
    })
}

/// Rebuild a path; stored residuals and certificates are ignored and
/// recomputed from the points.
pub fn path_from_json(v: &Value) -> Result<GroupPath> {
    let get = |k: &str| v.get(k).ok_or_else(|| bad(k));
    let kind = match get("kind")?.as_str() {
        Some("deform_ss") => PathKind::DeformSs,
        Some("odd") => PathKind::Odd,
        Some("even") => PathKind::Even,
        _ => return Err(bad("path kind")),
    };
    let sig: SurfaceSig =
        serde_json::from_value(get("surface")?.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let spec: GroupSpec =
        serde_json::from_value(get("group")?.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let lift = match v.get("lift") {
        None | Some(Value::Null) => None,
        Some(z) => Some(complex_from_json(z)?),
    };
    let target = GroupElement::with_tolerance(spec, matrix_from_json(get("target")?)?, tol::POST)?;
    let pins = get("pins")?
        .as_array()
        .ok_or_else(|| bad("pins"))?
        .iter()
        .map(|p| {
            let end: PathEnd = serde_json::from_value(p.get("end").cloned().ok_or_else(|| bad("pin end"))?)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            let slot = p.get("slot").and_then(Value::as_u64).ok_or_else(|| bad("pin slot"))? as usize;
            let m = matrix_from_json(p.get("matrix").ok_or_else(|| bad("pin matrix"))?)?;
            Ok(Pin { end, slot, target: GroupElement::with_tolerance(spec, m, tol::POST)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = get("steps")?
        .as_array()
        .ok_or_else(|| bad("steps"))?
        .iter()
        .map(|s| {
            let t = s.get("t").and_then(Value::as_f64).ok_or_else(|| bad("step time"))?;
            let x = tuple_gens_from_json(sig, spec, s.get("generators").ok_or_else(|| bad("step generators"))?)?;
            Ok((t, x))
        })
        .collect::<Result<Vec<_>>>()?;
    if steps.is_empty() {
        return Err(bad("empty path"));
    }
    Ok(GroupPath::from_parts(kind, steps, target, lift, pins))
}

/// Round a float to 15 significant digits; `-0` becomes `0`.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Recursively round every float in `v`.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round15(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonicalize(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Canonical pretty-printed JSON with the schema tag inserted first.
pub fn render(v: Value) -> String {
    let mut out = Map::new();
    out.insert("schema".into(), Value::String(crate::SCHEMA.into()));
    match canonicalize(v) {
        Value::Object(o) => out.extend(o),
        other => {
            out.insert("result".into(), other);
        }
    }
    serde_json::to_string_pretty(&Value::Object(out)).unwrap_or_default()
}
