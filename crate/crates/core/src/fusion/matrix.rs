use std::collections::HashMap;

use super::FusionSystem;
use crate::error::{Error, Result};

/// Truncated fusion matrix `Γ_U`, entry `(s, t)` = multiplicity of `s` in
/// `U ⊗ t`, restricted to a caller-supplied label list. Summands outside the
/// list are dropped, so this is a corner of the full matrix.
#[derive(Clone, Debug)]
pub struct FusionMatrix<L> {
    pub tensoring: L,
    pub labels: Vec<L>,
    /// Row `s` holds `(t, N)` pairs with `N > 0`, sorted by `t`.
    rows: Vec<Vec<(usize, u32)>>,
}

pub fn fusion_matrix<S: FusionSystem>(
    sys: &S,
    u: &S::Label,
    labels: &[S::Label],
) -> Result<FusionMatrix<S::Label>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l, i).is_some() {
            return Err(Error::DuplicateLabel(l.to_string()));
        }
    }
    let mut rows = vec![Vec::new(); labels.len()];
    for (t, lt) in labels.iter().enumerate() {
        for (s, m) in sys.decompose(u, lt) {
            if let Some(&si) = index.get(&s) {
                rows[si].push((t, m));
            }
        }
    }
    for r in &mut rows {
        r.sort_unstable();
    }
    Ok(FusionMatrix {
        tensoring: u.clone(),
        labels: labels.to_vec(),
        rows,
    })
}

impl<L> FusionMatrix<L> {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn entry(&self, s: usize, t: usize) -> u32 {
        self.rows[s]
            .iter()
            .find(|(c, _)| *c == t)
            .map_or(0, |(_, m)| *m)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    /// `y = Γ x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (s, row) in self.rows.iter().enumerate() {
            y[s] = row.iter().map(|&(t, m)| f64::from(m) * x[t]).sum();
        }
    }

    /// `y = Γᵀ x`.
    pub fn tr_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (s, row) in self.rows.iter().enumerate() {
            for &(t, m) in row {
                y[t] += f64::from(m) * x[s];
            }
        }
    }

    /// Dense row-major copy, for small oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        let mut d = vec![vec![0.0; n]; n];
        for (s, row) in self.rows.iter().enumerate() {
            for &(t, m) in row {
                d[s][t] = f64::from(m);
            }
        }
        d
    }
}
