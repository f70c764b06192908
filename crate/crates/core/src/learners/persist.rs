//! Plain-text key-value persistence for trained models.
//!
//! One `key = value` pair per line; weight arrays are space-separated
//! decimals printed at full round-trip precision. The format is documented
//! in the repository README.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::learners::mlp::MlpModel;
use crate::learners::svr::{Kernel, SvrModel};
use crate::scalar::Scalar;

fn fmt_scalar<T: Scalar>(v: T) -> String {
    // f64 Display prints the shortest decimal that round-trips
    format!("{}", v.to_f64().expect("scalar convertible to f64"))
}

fn fmt_row<T: Scalar>(row: &[T]) -> String {
    row.iter()
        .map(|&v| fmt_scalar(v))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Serializes an MLP to the key-value text format.
pub fn mlp_to_text<T: Scalar>(model: &MlpModel<T>) -> String {
    let mut out = String::new();
    out.push_str("format = wavecast-model v1\n");
    out.push_str("kind = mlp\n");
    out.push_str(&format!("n_input = {}\n", model.n_input()));
    out.push_str(&format!("n_hidden = {}\n", model.n_hidden()));
    for (j, row) in model.hidden_weights.iter().enumerate() {
        out.push_str(&format!("hidden_weights[{j}] = {}\n", fmt_row(row)));
    }
    out.push_str(&format!("hidden_bias = {}\n", fmt_row(&model.hidden_bias)));
    out.push_str(&format!(
        "output_weights = {}\n",
        fmt_row(&model.output_weights)
    ));
    out.push_str(&format!(
        "output_bias = {}\n",
        fmt_scalar(model.output_bias)
    ));
    out
}

/// Serializes an SVR model to the key-value text format.
pub fn svr_to_text<T: Scalar>(model: &SvrModel<T>) -> String {
    let mut out = String::new();
    out.push_str("format = wavecast-model v1\n");
    out.push_str("kind = svr\n");
    match &model.kernel {
        Kernel::Rbf { gamma } => {
            out.push_str("kernel = rbf\n");
            out.push_str(&format!("gamma = {}\n", fmt_scalar(*gamma)));
        }
        Kernel::Polynomial { degree, coef } => {
            out.push_str("kernel = polynomial\n");
            out.push_str(&format!("degree = {degree}\n"));
            out.push_str(&format!("coef = {}\n", fmt_scalar(*coef)));
        }
        Kernel::Linear => out.push_str("kernel = linear\n"),
    }
    out.push_str(&format!("n_support = {}\n", model.support_vectors.len()));
    out.push_str(&format!("bias = {}\n", fmt_scalar(model.bias)));
    out.push_str(&format!(
        "dual_coeffs = {}\n",
        fmt_row(&model.dual_coeffs)
    ));
    for (i, sv) in model.support_vectors.iter().enumerate() {
        out.push_str(&format!("support_vector[{i}] = {}\n", fmt_row(sv)));
    }
    out
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Serialization(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn require<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Serialization(format!("missing key `{key}`")))
}

fn parse_scalar<T: Scalar>(s: &str, key: &str) -> Result<T> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Serialization(format!("key `{key}`: bad number `{s}`")))?;
    T::from_f64(v).ok_or_else(|| Error::Serialization(format!("key `{key}`: unrepresentable")))
}

fn parse_row<T: Scalar>(s: &str, key: &str) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|tok| parse_scalar(tok, key))
        .collect()
}

/// Parses an MLP from the key-value text format.
pub fn mlp_from_text<T: Scalar>(text: &str) -> Result<MlpModel<T>> {
    let map = parse_kv(text)?;
    if require(&map, "kind")? != "mlp" {
        return Err(Error::Serialization("kind is not `mlp`".into()));
    }
    let n_input: usize = require(&map, "n_input")?
        .parse()
        .map_err(|_| Error::Serialization("bad n_input".into()))?;
    let n_hidden: usize = require(&map, "n_hidden")?
        .parse()
        .map_err(|_| Error::Serialization("bad n_hidden".into()))?;
    let mut hidden_weights = Vec::with_capacity(n_hidden);
    for j in 0..n_hidden {
        let key = format!("hidden_weights[{j}]");
        let row: Vec<T> = parse_row(require(&map, &key)?, &key)?;
        if row.len() != n_input {
            return Err(Error::Serialization(format!(
                "`{key}` has {} entries, expected {n_input}",
                row.len()
            )));
        }
        hidden_weights.push(row);
    }
    let hidden_bias = parse_row(require(&map, "hidden_bias")?, "hidden_bias")?;
    let output_weights = parse_row(require(&map, "output_weights")?, "output_weights")?;
    if hidden_bias.len() != n_hidden || output_weights.len() != n_hidden {
        return Err(Error::Serialization("bias/weight length mismatch".into()));
    }
    let output_bias = parse_scalar(require(&map, "output_bias")?, "output_bias")?;
    Ok(MlpModel {
        hidden_weights,
        hidden_bias,
        output_weights,
        output_bias,
    })
}

/// Parses an SVR model from the key-value text format.
pub fn svr_from_text<T: Scalar>(text: &str) -> Result<SvrModel<T>> {
    let map = parse_kv(text)?;
    if require(&map, "kind")? != "svr" {
        return Err(Error::Serialization("kind is not `svr`".into()));
    }
    let kernel = match require(&map, "kernel")? {
        "rbf" => Kernel::Rbf {
            gamma: parse_scalar(require(&map, "gamma")?, "gamma")?,
        },
        "polynomial" => Kernel::Polynomial {
            degree: require(&map, "degree")?
                .parse()
                .map_err(|_| Error::Serialization("bad degree".into()))?,
            coef: parse_scalar(require(&map, "coef")?, "coef")?,
        },
        "linear" => Kernel::Linear,
        other => {
            return Err(Error::Serialization(format!("unknown kernel `{other}`")));
        }
    };
    let n_support: usize = require(&map, "n_support")?
        .parse()
        .map_err(|_| Error::Serialization("bad n_support".into()))?;
    let bias = parse_scalar(require(&map, "bias")?, "bias")?;
    let dual_coeffs: Vec<T> = parse_row(require(&map, "dual_coeffs")?, "dual_coeffs")?;
    if dual_coeffs.len() != n_support {
        return Err(Error::Serialization(format!(
            "{} dual coefficients for {n_support} support vectors",
            dual_coeffs.len()
        )));
    }
    let mut support_vectors = Vec::with_capacity(n_support);
    for i in 0..n_support {
        let key = format!("support_vector[{i}]");
        support_vectors.push(parse_row(require(&map, &key)?, &key)?);
    }
    Ok(SvrModel {
        support_vectors,
        dual_coeffs,
        bias,
        kernel,
    })
}
