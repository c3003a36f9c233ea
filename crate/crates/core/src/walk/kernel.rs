use std::collections::{BTreeMap, HashMap};

use super::measure::AtomicMeasure;
use crate::error::{Error, Result};
use crate::fusion::FusionSystem;

/// Leak below which a row counts as interior.
pub const INTERIOR_LEAK: f64 = 1e-9;

/// Markov kernel of the classical fusion walk on a truncated label set.
///
/// `p(x, w) = Σ_s μ(s) N_{x,s}^w d(w) / (d(x) d(s))`; mass landing outside
/// the truncation is kept per row as `leak`.
#[derive(Clone, Debug)]
pub struct TransitionKernel<L> {
    labels: Vec<L>,
    index: HashMap<L, usize>,
    rows: Vec<Vec<(usize, f64)>>,
    leak: Vec<f64>,
}

pub fn walk_kernel<S: FusionSystem>(
    sys: &S,
    mu: &AtomicMeasure<S::Label>,
    labels: &[S::Label],
) -> Result<TransitionKernel<S::Label>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(Error::DuplicateLabel(l.to_string()));
        }
    }
    let mut rows = Vec::with_capacity(labels.len());
    let mut leak = Vec::with_capacity(labels.len());
    for x in labels {
        let dx = sys.qdim(x);
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        let mut lost = 0.0;
        for (s, ms) in mu.iter() {
            let ds = sys.qdim(s);
            for (w, mult) in sys.decompose(x, s) {
                let p = ms * f64::from(mult) * sys.qdim(&w) / (dx * ds);
                match index.get(&w) {
                    Some(&wi) => *row.entry(wi).or_insert(0.0) += p,
                    None => lost += p,
                }
            }
        }
        rows.push(row.into_iter().collect());
        leak.push(lost);
    }
    Ok(TransitionKernel {
        labels: labels.to_vec(),
        index,
        rows,
        leak,
    })
}

impl<L: Clone + Eq + std::hash::Hash + std::fmt::Display> TransitionKernel<L> {
    /// A kernel from explicit rows of `(column, probability)` pairs. Each row
    /// sums to at most 1; the deficit becomes its leak.
    pub fn from_rows(labels: Vec<L>, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: rows.len(),
            });
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        let mut leak = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let bad = row
                .iter()
                .any(|&(j, p)| j >= labels.len() || !(p >= 0.0) || !p.is_finite());
            let total: f64 = row.iter().map(|(_, p)| p).sum();
            if bad || total > 1.0 + 1e-12 {
                return Err(Error::InvalidMeasure(format!("row {i} is not substochastic")));
            }
            leak.push((1.0 - total).max(0.0));
        }
        Ok(TransitionKernel {
            labels,
            index,
            rows,
            leak,
        })
    }
}

impl<L: Clone + Eq + std::hash::Hash> TransitionKernel<L> {
    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, l: &L) -> Option<usize> {
        self.index.get(l).copied()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn leak(&self, i: usize) -> f64 {
        self.leak[i]
    }

    pub fn prob(&self, from: &L, to: &L) -> f64 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(i), Some(j)) => self.rows[i]
                .iter()
                .find(|(c, _)| *c == j)
                .map_or(0.0, |(_, p)| *p),
            _ => 0.0,
        }
    }

    /// Row vector times kernel, `m P`. Returns the image and the mass lost
    /// through leaking rows.
    pub fn apply_left(&self, m: &[f64]) -> Result<(Vec<f64>, f64)> {
        if m.len() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: m.len(),
            });
        }
        let mut out = vec![0.0; self.size()];
        let mut lost = 0.0;
        for (i, &mi) in m.iter().enumerate() {
            if mi == 0.0 {
                continue;
            }
            for &(j, p) in &self.rows[i] {
                out[j] += mi * p;
            }
            lost += mi * self.leak[i];
        }
        Ok((out, lost))
    }

    /// Kernel times column vector, `P f`.
    pub fn apply_right(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, p)| p * f[j]).sum())
            .collect()
    }
}

/// `max |Σ_w p(x,w) f(w) − f(x)|` over interior rows (leak below
/// [`INTERIOR_LEAK`]).
pub fn harmonic_residual<L, F>(f: F, kernel: &TransitionKernel<L>) -> f64
where
    L: Clone + Eq + std::hash::Hash,
    F: Fn(&L) -> f64,
{
    let values: Vec<f64> = kernel.labels().iter().map(f).collect();
    let pf = kernel.apply_right(&values);
    (0..kernel.size())
        .filter(|&i| kernel.leak(i) < INTERIOR_LEAK)
        .map(|i| (pf[i] - values[i]).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{FreeUnitary, IntegerSpin, QParam, TemperleyLieb, Word};

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn tl_rows() {
        let tl = TemperleyLieb::new(q(0.5));
        let labels: Vec<u32> = (0..=10).collect();
        let k = walk_kernel(&tl, &AtomicMeasure::dirac(1), &labels).unwrap();
        assert_eq!(k.prob(&0, &1), 1.0);
        assert!((k.prob(&1, &0) - 0.16).abs() < 1e-15);
        assert!((k.prob(&1, &2) - 0.84).abs() < 1e-15);
        // last row leaks upward
        assert!(k.leak(10) > 0.5);
    }

    #[test]
    fn free_unitary_row_at_unit() {
        let sys = FreeUnitary::new(q(0.5));
        let labels: Vec<Word> = Word::all_up_to(3).collect();
        let mu = AtomicMeasure::parse_spec("a:0.5,b:0.5").unwrap();
        let k = walk_kernel(&sys, &mu, &labels).unwrap();
        let e = Word::empty();
        assert_eq!(k.prob(&e, &"a".parse().unwrap()), 0.5);
        assert_eq!(k.prob(&e, &"b".parse().unwrap()), 0.5);
        assert_eq!(k.row(0).len(), 2);
    }

    #[test]
    fn rows_plus_leak_sum_to_one() {
        let sys = FreeUnitary::new(q(0.3));
        let labels: Vec<Word> = Word::all_up_to(5).collect();
        let mu = AtomicMeasure::parse_spec("a:0.25,b:0.25,ab:0.5").unwrap();
        let k = walk_kernel(&sys, &mu, &labels).unwrap();
        for i in 0..k.size() {
            let s: f64 = k.row(i).iter().map(|(_, p)| p).sum();
            assert!((s + k.leak(i) - 1.0).abs() < 1e-12);
            assert!(k.row(i).iter().all(|(_, p)| *p >= 0.0));
        }
        let spin = IntegerSpin::new(q(0.7));
        let labels: Vec<u32> = (0..=20).step_by(2).collect();
        let k = walk_kernel(&spin, &AtomicMeasure::dirac(2), &labels).unwrap();
        for i in 0..k.size() {
            let s: f64 = k.row(i).iter().map(|(_, p)| p).sum();
            assert!((s + k.leak(i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_residual_examples() {
        let tl = TemperleyLieb::new(q(0.5));
        let labels: Vec<u32> = (0..=30).collect();
        let k = walk_kernel(&tl, &AtomicMeasure::dirac(1), &labels).unwrap();
        assert!(harmonic_residual(|_| 1.0, &k) < 1e-15);
        assert!(harmonic_residual(|n| f64::from(*n), &k) > 0.1);
    }

    #[test]
    fn apply_left_rejects_wrong_length() {
        let tl = TemperleyLieb::new(q(0.5));
        let k = walk_kernel(&tl, &AtomicMeasure::dirac(1), &[0, 1, 2]).unwrap();
        assert!(matches!(
            k.apply_left(&[1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let (m, lost) = k.apply_left(&[0.0, 0.0, 1.0]).unwrap();
        assert!((m[1] + lost - 1.0).abs() < 1e-15);
    }
}
