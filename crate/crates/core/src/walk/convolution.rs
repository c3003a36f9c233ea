use rand::Rng;

use super::measure::AtomicMeasure;
use crate::error::{Error, Result};
use crate::fusion::{qint, Letter, QParam, Word};

/// The cylinder `Δ̄_y`: all finite or left-infinite words ending in `suffix`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cylinder {
    pub suffix: Word,
}

impl Cylinder {
    pub fn new(suffix: Word) -> Self {
        Cylinder { suffix }
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.ends_with(&self.suffix)
    }

    /// All cylinders with suffix length at most `maxlen`, shortlex.
    pub fn all_up_to(maxlen: usize) -> Vec<Cylinder> {
        Word::all_up_to(maxlen).map(Cylinder::new).collect()
    }
}

/// First block boundary at or after `from`: the smallest `b > from` with
/// `ls[b-1] == ls[b]`, or `ls.len()`.
fn boundary_after(ls: &[Letter], from: usize) -> usize {
    (from + 1..ls.len())
        .find(|&b| ls[b - 1] == ls[b])
        .unwrap_or(ls.len())
}

/// Last block boundary strictly before `upto`: the largest `a < upto` with
/// `a ≥ 1` and `ls[a-1] == ls[a]`, or `0`.
fn boundary_before(ls: &[Letter], upto: usize) -> usize {
    (1..upto).rev().find(|&a| ls[a - 1] == ls[a]).unwrap_or(0)
}

/// `δ_z * δ_y`: the summand `z₀y₀` of `z ⊗ y` (for `z = z₀u`, `y = ūy₀`)
/// carries weight `d(z₀y₀)/(d(z)d(y))`.
///
/// Dimensions are multiplicative across a repeated letter (`x ⊗ y` is
/// irreducible when `x` ends with the letter `y` starts with), so each weight
/// only involves the blocks around the junction and long words cost no more
/// than short ones.
pub fn convolve_point(z: &Word, y: &Word, q: QParam) -> AtomicMeasure<Word> {
    let mut out = AtomicMeasure::zero();
    for (j, w) in point_weights(z, y, q) {
        let zs = z.letters();
        let ys = y.letters();
        let mut v = Vec::with_capacity(zs.len() + ys.len() - 2 * j);
        v.extend_from_slice(&zs[..zs.len() - j]);
        v.extend_from_slice(&ys[j..]);
        out.add(Word::from_letters(v), w);
    }
    out
}

/// `(j, weight)` for every admissible cancellation length `j`.
fn point_weights(z: &Word, y: &Word, q: QParam) -> Vec<(usize, f64)> {
    slice_weights(z.letters(), y.letters(), |n| qint(n as u32 + 1, q))
}

/// Product of `block(len)` over the maximal alternating blocks of `ls`.
fn blocks_dim(ls: &[Letter], block: &impl Fn(usize) -> f64) -> f64 {
    let mut d = 1.0;
    let mut start = 0;
    for i in 1..=ls.len() {
        if i == ls.len() || ls[i - 1] == ls[i] {
            d *= block(i - start);
            start = i;
        }
    }
    d
}

/// [`point_weights`] on letter slices. `block(n)` is the dimension of an
/// alternating block of `n` letters, `[n+1]_q`.
pub(crate) fn slice_weights(
    zs: &[Letter],
    ys: &[Letter],
    block: impl Fn(usize) -> f64,
) -> Vec<(usize, f64)> {
    let jmax = zs
        .iter()
        .rev()
        .zip(ys.iter())
        .take_while(|(a, b)| a.conj() == **b)
        .count();
    (0..=jmax)
        .map(|j| {
            let keep = zs.len() - j;
            let a = boundary_before(zs, keep);
            let b = if j == ys.len() { j } else { boundary_after(ys, j) };
            let (l1, l2) = (keep - a, b - j);
            let num = if l1 > 0 && l2 > 0 && zs[keep - 1] == ys[j] {
                block(l1) * block(l2)
            } else {
                block(l1 + l2)
            };
            let den = blocks_dim(&zs[a..], &block) * blocks_dim(&ys[..b], &block);
            (j, num / den)
        })
        .collect()
}

/// `λ * m = Σ_x m(x) λ * δ_x`. Pruned masses add.
pub fn convolve(
    lambda: &AtomicMeasure<Word>,
    m: &AtomicMeasure<Word>,
    q: QParam,
) -> AtomicMeasure<Word> {
    let mut out = AtomicMeasure::zero();
    for (x, mx) in m.iter() {
        for (z, lz) in lambda.iter() {
            for (w, p) in convolve_point(z, x, q).iter() {
                out.add(w.clone(), lz * mx * p);
            }
        }
    }
    out.add_pruned(lambda.pruned_mass() + m.pruned_mass());
    out
}

#[derive(Clone, Copy, Debug)]
pub struct PowerOptions {
    /// Atoms lighter than this are dropped after every step.
    pub prune_eps: f64,
    /// Abort when the support grows beyond this many atoms.
    pub max_support: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            prune_eps: 0.0,
            max_support: 1 << 21,
        }
    }
}

/// `m^{*n}` by repeated convolution, pruning after every step. `n = 0` gives
/// `δ_e`.
pub fn convolve_power(
    m: &AtomicMeasure<Word>,
    n: usize,
    opts: PowerOptions,
    q: QParam,
) -> Result<AtomicMeasure<Word>> {
    let mut acc = AtomicMeasure::dirac(Word::empty());
    for step in 1..=n {
        acc = convolve(&acc, m, q);
        acc.prune(opts.prune_eps);
        if acc.len() > opts.max_support {
            return Err(Error::SupportOverflow {
                size: acc.len(),
                cap: opts.max_support,
                step,
            });
        }
    }
    Ok(acc)
}

/// `λ(Δ_y)`: total mass of atoms ending in the cylinder suffix.
pub fn cylinder_mass(lambda: &AtomicMeasure<Word>, c: &Cylinder) -> f64 {
    lambda
        .iter()
        .filter(|(w, _)| c.contains(w))
        .map(|(_, v)| v)
        .sum()
}

/// `[z]_N`, the last `N` letters.
pub fn tail_word(z: &Word, n: usize) -> Result<Word> {
    if z.len() < n {
        return Err(Error::TailTooShort { len: z.len(), n });
    }
    Ok(z.suffix(n))
}

/// Lower bound `1 − q^{2(k+1)}/(1 − q²)` on the mass `λ * δ_y` puts on
/// `Δ̄_{[x]_N}` when `[y]_{N+k} = [x]_{N+k}`. Negative values are returned
/// as is; the inequality is then vacuous.
pub fn estimate_bound(q: QParam, k: usize) -> f64 {
    let q2 = q.value() * q.value();
    // one division, so k = 0 at q = 1/2 gives the double nearest 2/3
    (1.0 - q2 - q2.powi(k as i32 + 1)) / (1.0 - q2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateCheck {
    pub measured: f64,
    pub bound: f64,
    pub k: usize,
    pub ok: bool,
}

/// Check the boundary estimate for `λ * δ_y` on `Δ̄_{[x]_N}`. The excess
/// agreement `k` is the common tail length of `y` and `x_tail` minus `N`.
pub fn verify_estimate(
    lambda: &AtomicMeasure<Word>,
    y: &Word,
    x_tail: &Word,
    n: usize,
    q: QParam,
) -> Result<EstimateCheck> {
    let target = Cylinder::new(tail_word(x_tail, n)?);
    let common = y.common_tail(x_tail);
    if common < n {
        return Err(Error::HypothesisViolated { common, n });
    }
    let k = common - n;
    let measured = cylinder_mass(&convolve(lambda, &AtomicMeasure::dirac(y.clone()), q), &target);
    let bound = estimate_bound(q, k);
    Ok(EstimateCheck {
        measured,
        bound,
        k,
        ok: measured >= bound - 1e-12,
    })
}

pub(crate) fn random_word<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Word {
    Word::from_letters(
        (0..len)
            .map(|_| if rng.random::<bool>() { Letter::B } else { Letter::A })
            .collect(),
    )
}

/// An admissible instance for [`verify_estimate`]: a random probability
/// measure on words of length at most `maxlen`, a target `x_tail` with
/// `N ≤ |x_tail| ≤ max(maxlen, N)`, and `y` ending in `[x_tail]_{N+k}` for a
/// random `k`.
pub fn random_estimate_instance<R: Rng + ?Sized>(
    rng: &mut R,
    maxlen: usize,
    n: usize,
) -> (AtomicMeasure<Word>, Word, Word) {
    let atoms = rng.random_range(1..=4);
    let pairs: Vec<(Word, f64)> = (0..atoms)
        .map(|_| {
            let len = rng.random_range(0..=maxlen);
            (random_word(rng, len), rng.random_range(0.05..1.0))
        })
        .collect();
    let total: f64 = pairs.iter().map(|(_, v)| v).sum();
    let lambda = AtomicMeasure::from_pairs(pairs.into_iter().map(|(w, v)| (w, v / total)))
        .expect("positive masses");
    let xlen = rng.random_range(n..=maxlen.max(n));
    let x_tail = random_word(rng, xlen);
    let k = rng.random_range(0..=xlen - n);
    let head_len = rng.random_range(0..=maxlen);
    let y = random_word(rng, head_len).concat(&x_tail.suffix(n + k));
    (lambda, y, x_tail)
}
