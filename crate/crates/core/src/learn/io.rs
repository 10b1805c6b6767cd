//! Line-oriented model files.
//!
//! ```text
//! flownav-model-v1 kind=svm
//! # optional comment lines
//! param C=1.0000000000000000e1
//! param gamma=...
//! scaler <dims>
//! <min> <max>            (one line per dimension)
//! sv <count>
//! <coef> <x_1> ... <x_d> (one line per support vector)
//! ```
//!
//! Numbers are written with 17 significant digits so reloading reproduces
//! predictions bit for bit. A perceptron stores its weight vector as a single
//! `sv` line with coefficient 1.

use std::fmt::Write as _;

use crate::features::MinMaxScaler;

use super::kernel::KernelParams;
use super::{LearnError, Model, ModelKind, PerceptronModel, SvmModel, SvrModel};

pub const MODEL_VERSION: &str = "flownav-model-v1";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes any built-in model. `comments` are written verbatim after the
/// version line and must start with `#`.
pub fn save_model(model: &dyn Model, comments: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_VERSION} kind={}", model.kind());
    for c in comments {
        let _ = writeln!(out, "{c}");
    }
    let any = model.as_any();
    if let Some(m) = any.downcast_ref::<SvmModel>() {
        let _ = writeln!(out, "param C={}", num(m.c));
        let _ = writeln!(out, "param gamma={}", num(m.kernel.gamma));
        let _ = writeln!(out, "param bias={}", num(m.bias));
        let _ = writeln!(out, "param classes=-1,+1");
        let _ = writeln!(
            out,
            "param class_weights={},{}",
            num(m.class_weights.0),
            num(m.class_weights.1)
        );
        write_scaler(&mut out, &m.scaler);
        write_svs(&mut out, &m.coefs, &m.support_vectors);
    } else if let Some(m) = any.downcast_ref::<SvrModel>() {
        let _ = writeln!(out, "param C={}", num(m.c));
        let _ = writeln!(out, "param gamma={}", num(m.kernel.gamma));
        let _ = writeln!(out, "param epsilon={}", num(m.epsilon));
        let _ = writeln!(out, "param bias={}", num(m.bias));
        let _ = writeln!(out, "param threshold_cm={}", num(m.threshold_cm));
        let _ = writeln!(out, "param classes=-1,+1");
        write_scaler(&mut out, &m.scaler);
        write_svs(&mut out, &m.coefs, &m.support_vectors);
    } else if let Some(m) = any.downcast_ref::<PerceptronModel>() {
        let _ = writeln!(out, "param bias={}", num(m.bias));
        let _ = writeln!(out, "param epochs_run={}", m.epochs_run);
        let _ = writeln!(out, "param updates={}", m.updates);
        let _ = writeln!(out, "param classes=-1,+1");
        write_scaler(&mut out, &m.scaler);
        write_svs(&mut out, &[1.0], std::slice::from_ref(&m.weights));
    } else {
        unreachable!("model kind {} has no serializer", model.kind());
    }
    out
}

fn write_scaler(out: &mut String, s: &MinMaxScaler) {
    let _ = writeln!(out, "scaler {}", s.dims());
    for &(lo, hi) in s.bounds() {
        let _ = writeln!(out, "{} {}", num(lo), num(hi));
    }
}

fn write_svs(out: &mut String, coefs: &[f64], svs: &[Vec<f64>]) {
    let _ = writeln!(out, "sv {}", coefs.len());
    for (c, sv) in coefs.iter().zip(svs) {
        out.push_str(&num(*c));
        for v in sv {
            out.push(' ');
            out.push_str(&num(*v));
        }
        out.push('\n');
    }
}

struct ParsedModel {
    kind: ModelKind,
    params: Vec<(String, String)>,
    scaler: MinMaxScaler,
    coefs: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl ParsedModel {
    fn param(&self, key: &str) -> Result<&str, LearnError> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| LearnError::CorruptSection(format!("missing param {key}")))
    }

    fn real(&self, key: &str) -> Result<f64, LearnError> {
        parse_f64(self.param(key)?, key)
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, LearnError> {
    s.trim()
        .parse()
        .map_err(|_| LearnError::CorruptSection(format!("{what}: bad number {s:?}")))
}

fn parse(text: &str) -> Result<ParsedModel, LearnError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let first = lines
        .next()
        .ok_or_else(|| LearnError::BadVersion("empty file".into()))?;
    let mut head = first.split_whitespace();
    let version = head.next().unwrap_or_default();
    if version != MODEL_VERSION {
        return Err(LearnError::BadVersion(version.to_string()));
    }
    let kind = match head.next().and_then(|k| k.strip_prefix("kind=")) {
        Some("svm") => ModelKind::Svm,
        Some("svr") => ModelKind::Svr,
        Some("perceptron") => ModelKind::Perceptron,
        other => {
            return Err(LearnError::CorruptSection(format!(
                "unknown model kind {other:?}"
            )))
        }
    };

    let mut params = Vec::new();
    let mut line = lines.next();
    while let Some(l) = line {
        let Some(rest) = l.strip_prefix("param ") else {
            break;
        };
        let (k, v) = rest
            .split_once('=')
            .ok_or_else(|| LearnError::CorruptSection(format!("bad param line {l:?}")))?;
        params.push((k.trim().to_string(), v.trim().to_string()));
        line = lines.next();
    }

    let dims = section_count(line, "scaler")?;
    let mut bounds = Vec::with_capacity(dims);
    for i in 0..dims {
        let l = lines
            .next()
            .ok_or_else(|| LearnError::CorruptSection(format!("scaler ends after {i} of {dims} rows")))?;
        let vals: Vec<&str> = l.split_whitespace().collect();
        if vals.len() != 2 {
            return Err(LearnError::CorruptSection(format!("scaler row {i}: {l:?}")));
        }
        bounds.push((parse_f64(vals[0], "scaler")?, parse_f64(vals[1], "scaler")?));
    }

    let count = section_count(lines.next(), "sv")?;
    let mut coefs = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for i in 0..count {
        let l = lines.next().ok_or_else(|| {
            LearnError::CorruptSection(format!("sv section ends after {i} of {count} rows"))
        })?;
        let vals = l
            .split_whitespace()
            .map(|s| parse_f64(s, "sv"))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != dims + 1 {
            return Err(LearnError::CorruptSection(format!(
                "sv row {i} has {} values, expected {}",
                vals.len(),
                dims + 1
            )));
        }
        coefs.push(vals[0]);
        vectors.push(vals[1..].to_vec());
    }
    if let Some(extra) = lines.next() {
        return Err(LearnError::CorruptSection(format!("trailing line {extra:?}")));
    }
    Ok(ParsedModel {
        kind,
        params,
        scaler: MinMaxScaler::from_bounds(bounds),
        coefs,
        vectors,
    })
}

fn section_count(line: Option<&str>, name: &str) -> Result<usize, LearnError> {
    let l = line.ok_or_else(|| LearnError::CorruptSection(format!("missing {name} section")))?;
    let rest = l
        .strip_prefix(name)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| LearnError::CorruptSection(format!("expected `{name} <count>`, got {l:?}")))?;
    rest.trim()
        .parse()
        .map_err(|_| LearnError::CorruptSection(format!("bad {name} count {rest:?}")))
}

/// Parses any built-in model kind.
pub fn load_model(text: &str) -> Result<Box<dyn Model>, LearnError> {
    let p = parse(text)?;
    match p.kind {
        ModelKind::Svm => {
            let weights = p.param("class_weights")?;
            let (wn, wp) = weights
                .split_once(',')
                .ok_or_else(|| LearnError::CorruptSection("class_weights".into()))?;
            Ok(Box::new(SvmModel {
                c: p.real("C")?,
                kernel: KernelParams::new(p.real("gamma")?)?,
                bias: p.real("bias")?,
                class_weights: (parse_f64(wn, "class_weights")?, parse_f64(wp, "class_weights")?),
                support_vectors: p.vectors,
                coefs: p.coefs,
                scaler: p.scaler,
                sv_indices: Vec::new(),
                diagnostics: None,
            }))
        }
        ModelKind::Svr => Ok(Box::new(SvrModel {
            c: p.real("C")?,
            kernel: KernelParams::new(p.real("gamma")?)?,
            epsilon: p.real("epsilon")?,
            bias: p.real("bias")?,
            threshold_cm: p.real("threshold_cm")?,
            support_vectors: p.vectors,
            coefs: p.coefs,
            scaler: p.scaler,
            sv_indices: Vec::new(),
            diagnostics: None,
        })),
        ModelKind::Perceptron => {
            if p.coefs.len() != 1 || p.coefs[0] != 1.0 {
                return Err(LearnError::CorruptSection(
                    "perceptron needs exactly one weight row with coefficient 1".into(),
                ));
            }
            let parse_count = |k: &str| -> Result<usize, LearnError> {
                p.param(k)?
                    .parse()
                    .map_err(|_| LearnError::CorruptSection(format!("bad {k}")))
            };
            Ok(Box::new(PerceptronModel {
                bias: p.real("bias")?,
                epochs_run: parse_count("epochs_run")?,
                updates: parse_count("updates")?,
                weights: p.vectors.into_iter().next().unwrap_or_default(),
                scaler: p.scaler,
            }))
        }
    }
}
