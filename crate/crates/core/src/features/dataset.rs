use std::io::{BufRead, Write};

use super::{FeatureError, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: Label,
    /// Ground-truth obstacle distance in centimetres, when known.
    pub distance: Option<f64>,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, label: Label, distance: Option<f64>) -> Self {
        Self {
            features,
            label,
            distance,
        }
    }
}

/// Geometry of the observation pattern that produced the features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternMeta {
    pub rings: usize,
    pub per_ring: usize,
    pub width: usize,
    pub height: usize,
}

impl PatternMeta {
    pub fn feature_len(&self) -> usize {
        2 * (1 + self.rings * self.per_ring)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    meta: Option<PatternMeta>,
    threshold_cm: f64,
}

impl Dataset {
    /// Validates equal feature lengths, pattern consistency and that every
    /// sample closer than the threshold is labelled positive.
    pub fn new(
        samples: Vec<LabeledSample>,
        meta: Option<PatternMeta>,
        threshold_cm: f64,
    ) -> Result<Self, FeatureError> {
        if !(threshold_cm > 0.0) {
            return Err(FeatureError::BadThreshold(threshold_cm));
        }
        if let Some(first) = samples.first() {
            let len = first.features.len();
            if let Some(bad) = samples.iter().find(|s| s.features.len() != len) {
                return Err(FeatureError::LengthMismatch {
                    expected: len,
                    found: bad.features.len(),
                });
            }
            if let Some(m) = meta {
                if m.feature_len() != len {
                    return Err(FeatureError::Inconsistent(format!(
                        "pattern rings={} per_ring={} implies {} features, samples have {len}",
                        m.rings,
                        m.per_ring,
                        m.feature_len()
                    )));
                }
            }
        }
        for (i, s) in samples.iter().enumerate() {
            if let Some(d) = s.distance {
                if d < 0.0 || d.is_nan() {
                    return Err(FeatureError::NegativeDistance(d));
                }
                if d < threshold_cm && s.label != Label::Positive {
                    return Err(FeatureError::Inconsistent(format!(
                        "sample {i} at {d} cm is below the {threshold_cm} cm threshold but labelled -1"
                    )));
                }
            }
        }
        Ok(Self {
            samples,
            meta,
            threshold_cm,
        })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn meta(&self) -> Option<PatternMeta> {
        self.meta
    }

    pub fn threshold_cm(&self) -> f64 {
        self.threshold_cm
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.samples.first().map_or(0, |s| s.features.len())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn positives(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.label == Label::Positive)
            .count()
    }

    /// Sub-dataset with the samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            meta: self.meta,
            threshold_cm: self.threshold_cm,
        }
    }

    /// Concatenates datasets sharing a feature layout and threshold.
    pub fn concat(parts: Vec<Dataset>) -> Result<Dataset, FeatureError> {
        let mut iter = parts.into_iter();
        let Some(first) = iter.next() else {
            return Err(FeatureError::Inconsistent("no datasets to concatenate".into()));
        };
        let (meta, threshold) = (first.meta, first.threshold_cm);
        let mut samples = first.samples;
        for part in iter {
            if part.meta != meta || part.threshold_cm != threshold {
                return Err(FeatureError::Inconsistent(
                    "datasets differ in pattern or threshold".into(),
                ));
            }
            samples.extend(part.samples);
        }
        Dataset::new(samples, meta, threshold)
    }
}

fn fmt9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Writes the CSV layout: header, `#meta` line, optional extra comment
/// lines, then one row per sample.
pub fn save_dataset<W: Write>(
    ds: &Dataset,
    mut sink: W,
    comments: &[String],
) -> Result<(), FeatureError> {
    let io = |e: std::io::Error| FeatureError::Io(e.to_string());
    let dims = ds.dims();
    if dims % 2 != 0 {
        return Err(FeatureError::Inconsistent(format!(
            "feature length {dims} is not a whole number of (magnitude, phase) pairs"
        )));
    }
    let mut header = String::from("label,distance_cm");
    for p in 0..dims / 2 {
        header.push_str(&format!(",f{p:03}_mag,f{p:03}_phase"));
    }
    writeln!(sink, "{header}").map_err(io)?;
    let mut meta_line = String::from("#meta");
    if let Some(m) = ds.meta {
        meta_line.push_str(&format!(
            " rings={} per_ring={} width={} height={}",
            m.rings, m.per_ring, m.width, m.height
        ));
    }
    meta_line.push_str(&format!(" threshold_cm={}", ds.threshold_cm));
    writeln!(sink, "{meta_line}").map_err(io)?;
    for c in comments {
        writeln!(sink, "{c}").map_err(io)?;
    }
    let mut line = String::new();
    for s in &ds.samples {
        line.clear();
        line.push_str(&s.label.to_string());
        line.push(',');
        if let Some(d) = s.distance {
            line.push_str(&fmt9(d));
        }
        for v in &s.features {
            line.push(',');
            line.push_str(&fmt9(*v));
        }
        writeln!(sink, "{line}").map_err(io)?;
    }
    sink.flush().map_err(io)
}

pub fn load_dataset<R: BufRead>(source: R) -> Result<Dataset, FeatureError> {
    let mut lines = source.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, Ok(l))) if l.trim().is_empty() => continue,
            Some((_, Ok(l))) if l.starts_with('#') => continue,
            Some((_, Ok(l))) => break l,
            Some((_, Err(e))) => return Err(FeatureError::Io(e.to_string())),
            None => return Err(FeatureError::BadHeader("empty file".into())),
        }
    };
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 2 || cols[0] != "label" || cols[1] != "distance_cm" {
        return Err(FeatureError::BadHeader(
            "expected `label,distance_cm,...`".into(),
        ));
    }
    let feat_cols = &cols[2..];
    if feat_cols.len() % 2 != 0 {
        return Err(FeatureError::BadHeader("odd number of feature columns".into()));
    }
    for (p, pair) in feat_cols.chunks(2).enumerate() {
        if pair[0] != format!("f{p:03}_mag") || pair[1] != format!("f{p:03}_phase") {
            return Err(FeatureError::BadHeader(format!(
                "expected f{p:03}_mag,f{p:03}_phase, found {},{}",
                pair[0], pair[1]
            )));
        }
    }

    let mut meta_fields: Vec<(String, String)> = Vec::new();
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| FeatureError::Io(e.to_string()))?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("#meta") {
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    meta_fields.push((k.to_string(), v.to_string()));
                }
            }
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != cols.len() {
            return Err(FeatureError::RaggedRow {
                line: lineno,
                expected: cols.len(),
                found: fields.len(),
            });
        }
        let label = Label::parse(fields[0]).ok_or_else(|| FeatureError::BadLabel {
            line: lineno,
            value: fields[0].to_string(),
        })?;
        let num = |s: &str| -> Result<f64, FeatureError> {
            s.trim().parse::<f64>().map_err(|_| FeatureError::BadNumber {
                line: lineno,
                value: s.to_string(),
            })
        };
        let distance = if fields[1].trim().is_empty() {
            None
        } else {
            Some(num(fields[1])?)
        };
        let features = fields[2..].iter().map(|s| num(s)).collect::<Result<_, _>>()?;
        samples.push(LabeledSample::new(features, label, distance));
    }

    let get = |key: &str| -> Result<Option<f64>, FeatureError> {
        meta_fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| {
                v.parse::<f64>()
                    .map_err(|_| FeatureError::BadHeader(format!("bad #meta value {key}={v}")))
            })
            .transpose()
    };
    let threshold = get("threshold_cm")?.unwrap_or(super::DEFAULT_THRESHOLD_CM);
    let meta = match (get("rings")?, get("per_ring")?, get("width")?, get("height")?) {
        (Some(r), Some(p), Some(w), Some(h)) => Some(PatternMeta {
            rings: r as usize,
            per_ring: p as usize,
            width: w as usize,
            height: h as usize,
        }),
        _ => None,
    };
    Dataset::new(samples, meta, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        let samples = vec![
            LabeledSample::new(vec![1.5, -0.25, 0.0, 3.141592653589793], Label::Positive, Some(12.5)),
            LabeledSample::new(vec![123.456789, 0.5, 2.0, -1.0], Label::Negative, None),
        ];
        Dataset::new(samples, None, 50.0).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let ds = tiny();
        let mut buf = Vec::new();
        save_dataset(&ds, &mut buf, &["# flownav v1 seed=1".to_string()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("label,distance_cm,f000_mag,f000_phase,f001_mag,f001_phase\n#meta threshold_cm=50\n"));
        let back = load_dataset(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.samples()[1].distance, None);
        for (a, b) in back.samples().iter().zip(ds.samples()) {
            for (x, y) in a.features.iter().zip(&b.features) {
                assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0));
            }
        }
        // a second pass is exact
        let mut again = Vec::new();
        save_dataset(&back, &mut again, &["# flownav v1 seed=1".to_string()]).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn ragged_row_rejected() {
        let text = "label,distance_cm,f000_mag,f000_phase\n-1,,1.0\n";
        assert!(matches!(
            load_dataset(text.as_bytes()),
            Err(FeatureError::RaggedRow { line: 2, expected: 4, found: 3 })
        ));
    }

    #[test]
    fn bad_label_rejected() {
        let text = "label,distance_cm,f000_mag,f000_phase\n0,,1.0,0.0\n";
        assert!(matches!(
            load_dataset(text.as_bytes()),
            Err(FeatureError::BadLabel { .. })
        ));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(
            load_dataset("lbl,distance_cm\n".as_bytes()),
            Err(FeatureError::BadHeader(_))
        ));
        assert!(matches!(
            load_dataset("label,distance_cm,f000_mag,f001_phase\n".as_bytes()),
            Err(FeatureError::BadHeader(_))
        ));
    }

    #[test]
    fn meta_line_parsed() {
        let mut header = String::from("label,distance_cm");
        for p in 0..5 {
            header.push_str(&format!(",f{p:03}_mag,f{p:03}_phase"));
        }
        let row = format!("+1,20{}", ",0".repeat(10));
        let text = format!("{header}\n#meta rings=1 per_ring=4 width=64 height=48 threshold_cm=30\n{row}\n");
        let ds = load_dataset(text.as_bytes()).unwrap();
        assert_eq!(
            ds.meta(),
            Some(PatternMeta { rings: 1, per_ring: 4, width: 64, height: 48 })
        );
        assert_eq!(ds.threshold_cm(), 30.0);
    }

    #[test]
    fn mislabeled_close_sample_rejected() {
        let s = LabeledSample::new(vec![0.0, 0.0], Label::Negative, Some(10.0));
        assert!(matches!(
            Dataset::new(vec![s], None, 50.0),
            Err(FeatureError::Inconsistent(_))
        ));
    }
}
