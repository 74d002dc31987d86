//! Scores and loadings on the first two estimated components.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::io::{csv_field, fmt_f64};
use crate::transforms::TransformedMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct BiplotData {
    pub row_ids: Vec<String>,
    /// `n × 2`: column-centered data times the first two columns of `V̂`.
    pub scores: DMatrix<f64>,
    pub labels: Vec<String>,
    /// `p × 2`: first two columns of `V̂`.
    pub loadings: DMatrix<f64>,
    /// Labels of variables with a nonzero loading on either component.
    pub kept_labels: Vec<String>,
}

pub fn biplot_data(
    z: &TransformedMatrix,
    row_ids: &[String],
    labels: &[String],
    v_hat: &DMatrix<f64>,
) -> Result<BiplotData> {
    let (n, p) = (z.nrows(), z.ncols());
    if v_hat.ncols() < 2 {
        return Err(Error::Dimension(format!("a biplot needs at least 2 components, fit has {}", v_hat.ncols())));
    }
    if v_hat.nrows() != p || labels.len() != p || row_ids.len() != n {
        return Err(Error::Dimension(format!(
            "data is {n}x{p} with {} row and {} column labels, loadings have {} rows",
            row_ids.len(),
            labels.len(),
            v_hat.nrows()
        )));
    }
    let loadings = v_hat.columns(0, 2).into_owned();
    let mut centered = z.values().clone();
    for mut col in centered.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    let scores = &centered * &loadings;
    let kept_labels = labels
        .iter()
        .zip(loadings.row_iter())
        .filter(|(_, r)| r.iter().any(|x| *x != 0.0))
        .map(|(l, _)| l.clone())
        .collect();
    Ok(BiplotData { row_ids: row_ids.to_vec(), scores, labels: labels.to_vec(), loadings, kept_labels })
}

impl BiplotData {
    /// Long-format CSV `kind,label,pc1,pc2,kept`: one `score` line per
    /// observation, then one `loading` line per variable with `kept` set to
    /// `true` or `false` (blank for scores).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,label,pc1,pc2,kept\n");
        for (id, r) in self.row_ids.iter().zip(self.scores.row_iter()) {
            out.push_str(&format!("score,{},{},{},\n", csv_field(id), fmt_f64(r[0]), fmt_f64(r[1])));
        }
        for (l, r) in self.labels.iter().zip(self.loadings.row_iter()) {
            let kept = r.iter().any(|x| *x != 0.0);
            out.push_str(&format!("loading,{},{},{},{kept}\n", csv_field(l), fmt_f64(r[0]), fmt_f64(r[1])));
        }
        out
    }
}
