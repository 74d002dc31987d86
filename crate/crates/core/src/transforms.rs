//! Compositional transformations: zero replacement, closure, clr, log and
//! power transforms, and the centering projector `G = I - J/p`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Nonnegative counts with row/column labels (e.g. documents × words).
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrix {
    values: DMatrix<f64>,
    row_ids: Vec<String>,
    col_ids: Vec<String>,
}

impl CountMatrix {
    pub fn new(values: DMatrix<f64>, row_ids: Vec<String>, col_ids: Vec<String>) -> Result<Self> {
        if row_ids.len() != values.nrows() || col_ids.len() != values.ncols() {
            return Err(Error::Dimension(format!(
                "{}x{} counts with {} row labels and {} column labels",
                values.nrows(),
                values.ncols(),
                row_ids.len(),
                col_ids.len()
            )));
        }
        for (i, row) in values.row_iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::BadRow { row: i, reason: format!("count {v} is negative or not finite") });
            }
        }
        Ok(Self { values, row_ids, col_ids })
    }

    /// Unlabeled counts; rows and columns are numbered from 1.
    pub fn from_values(values: DMatrix<f64>) -> Result<Self> {
        let rows = (1..=values.nrows()).map(|i| i.to_string()).collect();
        let cols = (1..=values.ncols()).map(|j| format!("V{j}")).collect();
        Self::new(values, rows, cols)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }
}

/// Rows on the open simplex: strictly positive, each summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionMatrix {
    values: DMatrix<f64>,
}

impl CompositionMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        for (i, row) in values.row_iter().enumerate() {
            if row.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::BadRow { row: i, reason: "composition entries must be positive".into() });
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > 1e-12 * row.len().max(1) as f64 {
                return Err(Error::BadRow { row: i, reason: format!("row sums to {s}, not 1") });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformTag {
    Clr,
    Log,
    Raw,
    Power,
    OracleLogBasis,
    /// Supplied already transformed; used as given.
    Precomputed,
}

impl std::fmt::Display for TransformTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TransformTag::Clr => "clr",
            TransformTag::Log => "log",
            TransformTag::Raw => "raw",
            TransformTag::Power => "power",
            TransformTag::OracleLogBasis => "oracle-log-basis",
            TransformTag::Precomputed => "precomputed",
        })
    }
}

/// Data matrix after one of the transforms, tagged with its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedMatrix {
    values: DMatrix<f64>,
    tag: TransformTag,
}

impl TransformedMatrix {
    pub fn new(values: DMatrix<f64>, tag: TransformTag) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("transformed matrix has non-finite entries"));
        }
        if tag == TransformTag::Clr {
            for (i, row) in values.row_iter().enumerate() {
                let s = row.sum();
                if s.abs() > 1e-10 {
                    return Err(Error::BadRow { row: i, reason: format!("clr row sums to {s:e}") });
                }
            }
        }
        Ok(Self { values, tag })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn tag(&self) -> TransformTag {
        self.tag
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Rows selected by index, keeping the tag.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self { values: self.values.select_rows(rows), tag: self.tag }
    }
}

/// Replaces every zero count with `pseudocount`.
pub fn replace_zeros(counts: &CountMatrix, pseudocount: f64) -> Result<CountMatrix> {
    if !(pseudocount > 0.0) || !pseudocount.is_finite() {
        return Err(invalid(format!("pseudocount must be positive, got {pseudocount}")));
    }
    let values = counts.values.map(|v| if v == 0.0 { pseudocount } else { v });
    Ok(CountMatrix { values, row_ids: counts.row_ids.clone(), col_ids: counts.col_ids.clone() })
}

/// Divides each row by its sum. Every entry must already be positive.
pub fn closure(counts: &CountMatrix) -> Result<CompositionMatrix> {
    closure_values(&counts.values)
}

pub(crate) fn closure_values(values: &DMatrix<f64>) -> Result<CompositionMatrix> {
    let mut out = values.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        if row.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::BadRow { row: i, reason: "zero entry; replace zeros before closure".into() });
        }
        let s: f64 = row.sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::BadRow { row: i, reason: format!("row sum {s} is not positive") });
        }
        row /= s;
    }
    Ok(CompositionMatrix { values: out })
}

fn check_positive(x: &DMatrix<f64>) -> Result<()> {
    for (i, row) in x.row_iter().enumerate() {
        if row.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::BadRow { row: i, reason: "nonpositive entry".into() });
        }
    }
    Ok(())
}

/// Centered log-ratio: `log x_j - mean_i log x_i`, row-wise.
pub fn clr(x: &CompositionMatrix) -> Result<TransformedMatrix> {
    check_positive(&x.values)?;
    let mut z = x.values.map(f64::ln);
    for mut row in z.row_iter_mut() {
        let m = row.mean();
        row.add_scalar_mut(-m);
    }
    TransformedMatrix::new(z, TransformTag::Clr)
}

pub fn log_transform(x: &CompositionMatrix) -> Result<TransformedMatrix> {
    check_positive(&x.values)?;
    TransformedMatrix::new(x.values.map(f64::ln), TransformTag::Log)
}

/// The raw compositions, unchanged.
pub fn raw(x: &CompositionMatrix) -> TransformedMatrix {
    TransformedMatrix { values: x.values.clone(), tag: TransformTag::Raw }
}

/// Power closure `x_j^a / sum_i x_i^a` with `a` in `(0, 1]`.
pub fn power_transform(x: &CompositionMatrix, a: f64) -> Result<TransformedMatrix> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(invalid(format!("power exponent must lie in (0, 1], got {a}")));
    }
    check_positive(&x.values)?;
    // x^a computed in the log domain, shifted by the row max so the largest term is 1.
    let mut out = x.values.map(|v| a * v.ln());
    for mut row in out.row_iter_mut() {
        let mx = row.max();
        row.apply(|v| *v = (*v - mx).exp());
        let s = row.sum();
        row /= s;
    }
    TransformedMatrix::new(out, TransformTag::Power)
}

impl std::str::FromStr for TransformTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clr" => Ok(TransformTag::Clr),
            "log" => Ok(TransformTag::Log),
            "raw" => Ok(TransformTag::Raw),
            "power" => Ok(TransformTag::Power),
            "precomputed" => Ok(TransformTag::Precomputed),
            _ => Err(invalid(format!("unknown transform {s:?}; expected clr, log, raw, power or precomputed"))),
        }
    }
}

pub const DEFAULT_PSEUDOCOUNT: f64 = 0.05;
pub const DEFAULT_POWER_A: f64 = 0.5;

/// Count-to-feature pipeline: zero replacement, closure, then a transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preprocessing {
    pub transform: TransformTag,
    pub pseudocount: f64,
    pub power_a: f64,
}

impl Default for Preprocessing {
    fn default() -> Self {
        Self { transform: TransformTag::Clr, pseudocount: DEFAULT_PSEUDOCOUNT, power_a: DEFAULT_POWER_A }
    }
}

impl Preprocessing {
    /// Applies the pipeline to raw values. With [`TransformTag::Precomputed`]
    /// the values are only checked for finiteness.
    pub fn apply(&self, values: &DMatrix<f64>) -> Result<TransformedMatrix> {
        let x = match self.transform {
            TransformTag::Precomputed => return TransformedMatrix::new(values.clone(), TransformTag::Precomputed),
            TransformTag::OracleLogBasis => {
                return Err(invalid("the oracle log-basis is only available in simulations"))
            }
            _ => closure(&replace_zeros(&CountMatrix::from_values(values.clone())?, self.pseudocount)?)?,
        };
        match self.transform {
            TransformTag::Clr => clr(&x),
            TransformTag::Log => log_transform(&x),
            TransformTag::Raw => Ok(raw(&x)),
            _ => power_transform(&x, self.power_a),
        }
    }
}

/// `G = I - J/p`, the projector annihilating the all-ones direction.
pub fn centering_matrix(p: usize) -> Result<DMatrix<f64>> {
    if p < 2 {
        return Err(invalid(format!("centering matrix needs p >= 2, got {p}")));
    }
    let inv = 1.0 / p as f64;
    Ok(DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 - inv } else { -inv }))
}
