use super::FeatureError;

/// Per-dimension affine map fitted so the training range becomes `[0, 1]`.
/// Constant dimensions map to 0; values outside the training range are not
/// clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    bounds: Vec<(f64, f64)>,
}

impl MinMaxScaler {
    pub fn from_bounds(bounds: Vec<(f64, f64)>) -> Self {
        Self { bounds }
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, FeatureError> {
        if x.len() != self.bounds.len() {
            return Err(FeatureError::LengthMismatch {
                expected: self.bounds.len(),
                found: x.len(),
            });
        }
        Ok(x
            .iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }
}

pub fn fit_scaler<'a, I>(rows: I) -> Result<MinMaxScaler, FeatureError>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut iter = rows.into_iter();
    let first = iter.next().ok_or(FeatureError::EmptyTraining)?;
    let mut bounds: Vec<(f64, f64)> = first.iter().map(|&v| (v, v)).collect();
    for row in iter {
        if row.len() != bounds.len() {
            return Err(FeatureError::LengthMismatch {
                expected: bounds.len(),
                found: row.len(),
            });
        }
        for (b, &v) in bounds.iter_mut().zip(row) {
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    Ok(MinMaxScaler { bounds })
}
