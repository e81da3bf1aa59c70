use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use super::{hexfloat, Activation, Layer, Network};
use crate::error::{Error, Result};

pub(super) fn to_json(net: &Network) -> String {
    let layers: Vec<Value> = net
        .layers()
        .iter()
        .map(|l| {
            let mut obj = Map::new();
            obj.insert("w".into(), matrix(&l.weights));
            obj.insert("b".into(), vector(&l.bias));
            obj.insert("act".into(), Value::from(l.activation.name()));
            if let Activation::LeakyRelu(alpha) = l.activation {
                obj.insert("alpha".into(), Value::from(hexfloat::format(alpha)));
            }
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "layers": layers,
        "final_w": matrix(net.final_weights()),
        "final_b": vector(net.final_bias()),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serialising a Value");
    text.push('\n');
    text
}

fn vector(v: &DVector<f64>) -> Value {
    Value::Array(
        v.iter()
            .map(|&x| Value::from(hexfloat::format(x)))
            .collect(),
    )
}

fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|&x| Value::from(hexfloat::format(x)))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub(super) fn from_json(text: &str) -> Result<Network> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let root = doc
        .as_object()
        .ok_or_else(|| Error::parse("document", "expected an object"))?;
    let layers_value = field(root, "layers", "document")?;
    let layer_values = layers_value
        .as_array()
        .ok_or_else(|| Error::parse("layers", "expected an array"))?;

    let mut layers = Vec::with_capacity(layer_values.len());
    let mut width: Option<usize> = None;
    for (i, value) in layer_values.iter().enumerate() {
        let at = format!("layers[{i}]");
        let obj = value
            .as_object()
            .ok_or_else(|| Error::parse(&at, "expected an object"))?;
        let w = read_matrix(field(obj, "w", &at)?, &format!("{at}.w"), width)?;
        let b = read_vector(field(obj, "b", &at)?, &format!("{at}.b"), Some(w.nrows()))?;
        let act = read_activation(obj, &at)?;
        width = Some(w.nrows());
        layers.push(Layer::new(w, b, act).map_err(|e| Error::parse(&at, e.to_string()))?);
    }
    let final_w = read_matrix(field(root, "final_w", "document")?, "final_w", width)?;
    let final_b = read_vector(
        field(root, "final_b", "document")?,
        "final_b",
        Some(final_w.nrows()),
    )?;
    Network::new(layers, final_w, final_b).map_err(|e| Error::parse("document", e.to_string()))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(at, format!("missing field `{key}`")))
}

fn read_number(value: &Value, at: &str) -> Result<f64> {
    match value {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::parse(at, "number out of range")),
        Value::String(s) => {
            hexfloat::parse(s).ok_or_else(|| Error::parse(at, format!("`{s}` is not a hex float")))
        }
        _ => Err(Error::parse(at, "expected a number or hex-float string")),
    }
}

fn read_vector(value: &Value, at: &str, expected: Option<usize>) -> Result<DVector<f64>> {
    let items = value
        .as_array()
        .ok_or_else(|| Error::parse(at, "expected an array"))?;
    if let Some(n) = expected {
        if items.len() != n {
            return Err(Error::parse(
                at,
                format!("expected {n} entries, found {}", items.len()),
            ));
        }
    }
    let values = items
        .iter()
        .enumerate()
        .map(|(i, v)| read_number(v, &format!("{at}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

fn read_matrix(value: &Value, at: &str, cols: Option<usize>) -> Result<DMatrix<f64>> {
    let rows = value
        .as_array()
        .ok_or_else(|| Error::parse(at, "expected an array of rows"))?;
    if rows.is_empty() {
        return Err(Error::parse(at, "matrix has no rows"));
    }
    let mut cols = cols;
    let mut data = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        let row_at = format!("{at} row {r}");
        let items = row
            .as_array()
            .ok_or_else(|| Error::parse(&row_at, "expected an array"))?;
        let n = *cols.get_or_insert(items.len());
        if items.len() != n {
            return Err(Error::parse(
                &row_at,
                format!("expected {n} columns, found {}", items.len()),
            ));
        }
        for (c, item) in items.iter().enumerate() {
            data.push(read_number(item, &format!("{at}[{r}][{c}]"))?);
        }
    }
    let ncols = cols.unwrap_or(0);
    if ncols == 0 {
        return Err(Error::parse(at, "matrix has no columns"));
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &data))
}

fn read_activation(obj: &Map<String, Value>, at: &str) -> Result<Activation> {
    let name = field(obj, "act", at)?
        .as_str()
        .ok_or_else(|| Error::parse(format!("{at}.act"), "expected a string"))?;
    if name == "leaky_relu" {
        let alpha = read_number(field(obj, "alpha", at)?, &format!("{at}.alpha"))?;
        return Activation::leaky_relu(alpha)
            .map_err(|e| Error::parse(format!("{at}.alpha"), e.to_string()));
    }
    name.parse()
        .map_err(|_| Error::parse(format!("{at}.act"), format!("unknown activation `{name}`")))
}
