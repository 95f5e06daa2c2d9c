use serde::{Deserialize, Serialize};

use super::CoeffMatrix;
use crate::error::Result;

/// Thin singular value decomposition `m = u · diag(s) · v_t`, with `s`
/// sorted in descending order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Svd {
    pub u: CoeffMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: CoeffMatrix,
}

pub fn svd(m: &CoeffMatrix) -> Result<Svd> {
    let dm = m.to_dmatrix();
    let dec = dm.svd(true, true);
    let u = dec.u.expect("requested");
    let v_t = dec.v_t.expect("requested");
    let s = dec.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));

    let k = s.len();
    let mut u_sorted = nalgebra::DMatrix::zeros(u.nrows(), k);
    let mut vt_sorted = nalgebra::DMatrix::zeros(k, v_t.ncols());
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        vt_sorted.set_row(dst, &v_t.row(src));
    }
    Ok(Svd {
        u: CoeffMatrix::from_dmatrix(&u_sorted)?,
        singular_values: order.iter().map(|&i| s[i]).collect(),
        v_t: CoeffMatrix::from_dmatrix(&vt_sorted)?,
    })
}

impl Svd {
    pub fn reconstruct(&self) -> CoeffMatrix {
        let u = self.u.to_dmatrix();
        let s = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular_values));
        CoeffMatrix::from_dmatrix(&(u * s * self.v_t.to_dmatrix())).expect("finite factors give a finite product")
    }

    pub fn largest(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}
