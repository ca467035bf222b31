//! JSON documents for plants, FIR gains and dynamic controllers.
//!
//! Matrices are arrays of rows. Numbers are written with the shortest
//! representation that parses back to the same `f64`.

use std::path::Path;

use firsyn::matlib::{Matrix, Polynomial};
use firsyn::sysmodel::{DynamicController, FirGains, PlantModel, StateSpaceSystem, TransferFunctionSiso};
use serde_json::{json, Map, Value};

use crate::error::CliError;

fn field_error(field: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Field { field: field.into(), msg: msg.into() }
}

fn parse_json(text: &str) -> Result<Map<String, Value>, CliError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Syntax { line: e.line(), column: e.column(), msg: e.to_string() })?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(field_error("<root>", "expected an object")),
    }
}

fn get<'a>(map: &'a Map<String, Value>, field: &str) -> Result<&'a Value, CliError> {
    map.get(field).ok_or_else(|| field_error(field, "missing"))
}

fn get_str<'a>(map: &'a Map<String, Value>, field: &str) -> Result<&'a str, CliError> {
    get(map, field)?.as_str().ok_or_else(|| field_error(field, "expected a string"))
}

fn number(v: &Value, path: &str) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| field_error(path, "expected a number"))
}

fn vector(v: &Value, path: &str) -> Result<Vec<f64>, CliError> {
    let arr = v.as_array().ok_or_else(|| field_error(path, "expected an array of numbers"))?;
    arr.iter().enumerate().map(|(i, x)| number(x, &format!("{path}[{i}]"))).collect()
}

/// Parses an array of rows. An empty array yields a `0 × empty_cols` matrix.
fn matrix(v: &Value, path: &str, empty_cols: usize) -> Result<Matrix, CliError> {
    let rows = v.as_array().ok_or_else(|| field_error(path, "expected an array of rows"))?;
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, empty_cols));
    }
    let parsed: Vec<Vec<f64>> =
        rows.iter().enumerate().map(|(i, r)| vector(r, &format!("{path}[{i}]"))).collect::<Result<_, _>>()?;
    let width = parsed[0].len();
    if let Some((i, r)) = parsed.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(field_error(format!("{path}[{i}]"), format!("ragged matrix: row has {} entries, expected {width}", r.len())));
    }
    if width == 0 {
        return Ok(Matrix::zeros(parsed.len(), 0));
    }
    Matrix::from_rows(&parsed).map_err(|e| field_error(path, e.to_string()))
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array(m.to_rows().into_iter().map(|r| json!(r)).collect())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })
}

fn check_kind(map: &Map<String, Value>, expected: &[&str]) -> Result<String, CliError> {
    let kind = get_str(map, "kind")?;
    if !expected.contains(&kind) {
        return Err(field_error("kind", format!("unknown kind `{kind}`, expected one of {}", expected.join(", "))));
    }
    Ok(kind.to_owned())
}

/// A named plant read from or written to a system document.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemFile {
    pub name: String,
    pub model: PlantModel,
}

impl SystemFile {
    pub fn new(name: impl Into<String>, model: PlantModel) -> Self {
        Self { name: name.into(), model }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let map = parse_json(text)?;
        let name = get_str(&map, "name")?.to_owned();
        let model = match check_kind(&map, &["state_space", "transfer_function"])?.as_str() {
            "state_space" => {
                let a = matrix(get(&map, "A")?, "A", 0)?;
                let b = matrix(get(&map, "B")?, "B", 0)?;
                let c = matrix(get(&map, "C")?, "C", a.cols())?;
                PlantModel::StateSpace(StateSpaceSystem::new(a, b, c).map_err(|e| field_error("A/B/C", e.to_string()))?)
            }
            _ => {
                let num = vector(get(&map, "num")?, "num")?;
                let den = vector(get(&map, "den")?, "den")?;
                let num = Polynomial::new(num).map_err(|e| field_error("num", e.to_string()))?;
                let den = Polynomial::new(den).map_err(|e| field_error("den", e.to_string()))?;
                PlantModel::TransferFunction(TransferFunctionSiso::new(num, den).map_err(|e| field_error("num/den", e.to_string()))?)
            }
        };
        Ok(Self { name, model })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?).map_err(|e| e.in_file(path))
    }

    pub fn to_json(&self) -> String {
        let doc = match &self.model {
            PlantModel::StateSpace(s) => json!({
                "name": self.name,
                "kind": "state_space",
                "A": matrix_json(s.a()),
                "B": matrix_json(s.b()),
                "C": matrix_json(s.c()),
            }),
            PlantModel::TransferFunction(tf) => json!({
                "name": self.name,
                "kind": "transfer_function",
                "num": tf.num().coeffs(),
                "den": tf.den().coeffs(),
            }),
        };
        pretty(&doc)
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Gains `(F_0, …, F_ℓ)` with optional design metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GainsFile {
    pub name: String,
    pub gains: FirGains,
    pub extra: Map<String, Value>,
}

impl GainsFile {
    pub fn new(name: impl Into<String>, gains: FirGains) -> Self {
        Self { name: name.into(), gains, extra: Map::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.extra.insert(key.to_owned(), value);
        self
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = parse_json(text)?;
        let name = get_str(&map, "name")?.to_owned();
        check_kind(&map, &["fir_gains"])?;
        let list = get(&map, "gains")?.as_array().ok_or_else(|| field_error("gains", "expected an array of matrices"))?;
        if list.is_empty() {
            return Err(field_error("gains", "at least F0 is required"));
        }
        let mats = list
            .iter()
            .enumerate()
            .map(|(i, m)| matrix(m, &format!("gains[{i}]"), 0))
            .collect::<Result<Vec<_>, _>>()?;
        let gains = FirGains::new(mats).map_err(|e| field_error("gains", e.to_string()))?;
        for key in ["name", "kind", "gains"] {
            map.remove(key);
        }
        Ok(Self { name, gains, extra: map })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?).map_err(|e| e.in_file(path))
    }

    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("name".into(), json!(self.name));
        map.insert("kind".into(), json!("fir_gains"));
        map.insert("order".into(), json!(self.gains.order()));
        map.insert("gains".into(), Value::Array(self.gains.gains().iter().map(matrix_json).collect()));
        for (k, v) in &self.extra {
            map.insert(k.clone(), v.clone());
        }
        Value::Object(map)
    }

    pub fn to_json(&self) -> String {
        pretty(&self.to_value())
    }
}

/// Dynamic controller `ξ(k+1) = H ξ(k) + G y(k)`, `u(k) = E ξ(k) + D y(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerFile {
    pub name: String,
    pub controller: DynamicController,
}

impl ControllerFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let map = parse_json(text)?;
        let name = get_str(&map, "name")?.to_owned();
        check_kind(&map, &["dynamic_controller"])?;
        let d = matrix(get(&map, "D")?, "D", 0)?;
        let h = matrix(get(&map, "H")?, "H", 0)?;
        let g = matrix(get(&map, "G")?, "G", d.cols())?;
        let e = matrix(get(&map, "E")?, "E", h.rows())?;
        let controller = DynamicController::new(h, g, e, d).map_err(|e| field_error("H/G/E/D", e.to_string()))?;
        Ok(Self { name, controller })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?).map_err(|e| e.in_file(path))
    }

    pub fn to_json(&self) -> String {
        let c = &self.controller;
        pretty(&json!({
            "name": self.name,
            "kind": "dynamic_controller",
            "H": matrix_json(c.h()),
            "G": matrix_json(c.g()),
            "E": matrix_json(c.e()),
            "D": matrix_json(c.d()),
        }))
    }
}
