use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fusion::Word;

/// Finitely supported nonnegative measure with the mass removed by
/// truncation kept alongside.
///
/// Atoms are stored in a `BTreeMap`, so every sum over atoms runs in label
/// order and results are reproducible bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure<L: Ord> {
    atoms: BTreeMap<L, f64>,
    pruned: f64,
}

impl<L: Ord + Clone> AtomicMeasure<L> {
    pub fn zero() -> Self {
        AtomicMeasure {
            atoms: BTreeMap::new(),
            pruned: 0.0,
        }
    }

    pub fn dirac(l: L) -> Self {
        let mut m = Self::zero();
        m.atoms.insert(l, 1.0);
        m
    }

    /// Build from `(label, mass)` pairs. Repeated labels accumulate; masses
    /// must be positive and finite.
    pub fn from_pairs<I: IntoIterator<Item = (L, f64)>>(pairs: I) -> Result<Self> {
        let mut m = Self::zero();
        for (l, v) in pairs {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidMeasure(format!("mass {v} is not positive")));
            }
            m.add(l, v);
        }
        Ok(m)
    }

    /// Like [`from_pairs`](Self::from_pairs) but also requires total mass 1
    /// within 1e-12.
    pub fn probability<I: IntoIterator<Item = (L, f64)>>(pairs: I) -> Result<Self> {
        let m = Self::from_pairs(pairs)?;
        let total = m.total_mass();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("masses sum to {total}, not 1")));
        }
        Ok(m)
    }

    /// Add mass to an atom; nonpositive contributions are ignored.
    pub(crate) fn add(&mut self, l: L, v: f64) {
        if v > 0.0 {
            *self.atoms.entry(l).or_insert(0.0) += v;
        }
    }

    pub(crate) fn add_pruned(&mut self, v: f64) {
        self.pruned += v;
    }

    pub fn get(&self, l: &L) -> f64 {
        self.atoms.get(l).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, f64)> {
        self.atoms.iter().map(|(l, v)| (l, *v))
    }

    pub fn labels(&self) -> impl Iterator<Item = &L> {
        self.atoms.keys()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sum of atom masses (pruned mass excluded).
    pub fn total_mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    /// Upper bound on the total-variation mass lost to truncation.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned
    }

    /// Delete atoms lighter than `eps` and move their mass into the pruned
    /// tally.
    pub fn prune(&mut self, eps: f64) {
        if eps <= 0.0 {
            return;
        }
        let mut lost = 0.0;
        self.atoms.retain(|_, v| {
            if *v < eps {
                lost += *v;
                false
            } else {
                true
            }
        });
        self.pruned += lost;
    }

    /// Largest atomwise difference against another measure.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let a = self.atoms.iter().map(|(l, v)| (v - other.get(l)).abs());
        let b = other
            .atoms
            .iter()
            .filter(|(l, _)| !self.atoms.contains_key(l))
            .map(|(_, v)| v.abs());
        a.chain(b).fold(0.0, f64::max)
    }
}

impl<L: Ord + Clone> AtomicMeasure<L> {
    /// Parse `label:mass` pairs separated by commas into a probability
    /// measure, reading labels with `parse`.
    pub fn parse_spec_with(s: &str, parse: impl Fn(&str) -> Result<L>) -> Result<Self> {
        let pairs = s
            .split(',')
            .map(|item| {
                let (l, v) = item
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidMeasure(format!("missing ':' in {item:?}")))?;
                let label = parse(l.trim())?;
                let mass: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidMeasure(format!("bad mass {v:?}")))?;
                Ok((label, mass))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::probability(pairs)
    }
}

impl AtomicMeasure<Word> {
    /// Parse `word:mass` pairs separated by commas, e.g. `a:0.5,b:0.5`.
    pub fn parse_spec(s: &str) -> Result<Self> {
        Self::parse_spec_with(s, str::parse)
    }
}

impl<L: Ord + Clone + fmt::Display> fmt::Display for AtomicMeasure<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (l, v) in &self.atoms {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{l}:{v}")?;
        }
        Ok(())
    }
}
