//! Lumped measures for long convolution powers.
//!
//! `μ^{*n}` for a generating `μ` spreads over exponentially many words, but
//! cylinder masses at short suffixes only need the last few letters. Building
//! the power from the left (`ν ← μ * ν`) touches only the front of each word,
//! so a long word can be stored as
//!
//! * its first `head` letters, which the next convolutions rewrite,
//! * its last `tail` letters, which the cylinder masses read,
//! * `run`: how many letters after the head continue the alternating block
//!   the head ends in.
//!
//! Dimensions are multiplicative across a repeated letter, so the head and
//! `run` determine every convolution weight exactly. What is lost is the rest
//! of the middle: a cancellation that would consume the whole head cannot be
//! resolved, and its mass goes into the pruned tally. The tally bounds the
//! total-variation error of every cylinder mass.

use rustc_hash::FxHashMap;

use super::convolution::{slice_weights, Cylinder};
use super::measure::AtomicMeasure;
use crate::fusion::{qint, Letter, QParam, Word};

/// Longest word stored exactly, and hence the cap on `head + tail`.
const MAX_PACKED: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LumpOptions {
    /// Letters kept at the front of a cut word. Must be at least 1.
    pub head: usize,
    /// Letters kept at the back; the longest cylinder suffix that can be
    /// queried.
    pub tail: usize,
    /// States lighter than this are dropped after each step (counted as
    /// pruned).
    pub prune_eps: f64,
}

impl LumpOptions {
    pub fn with_tail(tail: usize) -> Self {
        LumpOptions {
            tail,
            ..Self::default()
        }
    }
}

impl Default for LumpOptions {
    fn default() -> Self {
        LumpOptions {
            head: 10,
            tail: 3,
            prune_eps: 0.0,
        }
    }
}

/// Up to 64 letters, bit `i` set when letter `i` is `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Packed {
    bits: u64,
    len: u8,
}

impl Packed {
    const EMPTY: Packed = Packed { bits: 0, len: 0 };

    fn from_letters(ls: &[Letter]) -> Packed {
        debug_assert!(ls.len() <= MAX_PACKED);
        let bits = ls
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Letter::B)
            .fold(0u64, |acc, (i, _)| acc | (1 << i));
        Packed {
            bits,
            len: ls.len() as u8,
        }
    }

    fn letter(self, i: usize) -> Letter {
        if self.bits >> i & 1 == 1 {
            Letter::B
        } else {
            Letter::A
        }
    }

    fn unpack_into(self, out: &mut Vec<Letter>) {
        out.clear();
        out.extend((0..usize::from(self.len)).map(|i| self.letter(i)));
    }

    fn to_word(self) -> Word {
        let mut v = Vec::with_capacity(usize::from(self.len));
        self.unpack_into(&mut v);
        Word::from_letters(v)
    }

    fn ends_with(self, suffix: &Word) -> bool {
        let (n, k) = (usize::from(self.len), suffix.len());
        k <= n && (0..k).all(|i| self.letter(n - k + i) == suffix.letters()[i])
    }
}

/// A word stored exactly, or cut into head, run and tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct State {
    cut: bool,
    front: Packed,
    run: u32,
    tail: Packed,
}

impl State {
    fn exact(ls: &[Letter]) -> State {
        State {
            cut: false,
            front: Packed::from_letters(ls),
            run: 0,
            tail: Packed::EMPTY,
        }
    }

    fn from_letters(ls: &[Letter], opts: &LumpOptions) -> State {
        if ls.len() <= opts.head + opts.tail {
            return State::exact(ls);
        }
        let run = (opts.head..ls.len())
            .take_while(|&i| ls[i] != ls[i - 1])
            .count() as u32;
        State {
            cut: true,
            front: Packed::from_letters(&ls[..opts.head]),
            run,
            tail: Packed::from_letters(&ls[ls.len() - opts.tail..]),
        }
    }

    /// A cut state with the given head, shortened to `opts.head` letters.
    fn cut(head: &[Letter], mut run: u32, tail: Packed, opts: &LumpOptions) -> State {
        let keep = head.len().min(opts.head);
        for i in (keep..head.len()).rev() {
            run = if head[i - 1] != head[i] { run + 1 } else { 0 };
        }
        State {
            cut: true,
            front: Packed::from_letters(&head[..keep]),
            run,
            tail,
        }
    }

    fn ends_with(&self, suffix: &Word) -> bool {
        if self.cut {
            self.tail.ends_with(suffix)
        } else {
            self.front.ends_with(suffix)
        }
    }
}

/// Reusable buffers for [`left_point`].
#[derive(Default)]
struct Scratch {
    front: Vec<Letter>,
    joined: Vec<Letter>,
}

/// `δ_z * state`, reported through `emit`. Returns `false` when the mass
/// cannot be resolved.
fn left_point(
    zs: &[Letter],
    state: &State,
    qints: &[f64],
    opts: &LumpOptions,
    scratch: &mut Scratch,
    mut emit: impl FnMut(State, f64),
) -> bool {
    state.front.unpack_into(&mut scratch.front);
    let hlen = scratch.front.len();
    if state.cut {
        let jmax = zs
            .iter()
            .rev()
            .zip(&scratch.front)
            .take_while(|(a, b)| a.conj() == **b)
            .count();
        if jmax >= hlen {
            return false;
        }
        // head followed by the rest of its last alternating block
        let mut l = scratch.front[hlen - 1];
        for _ in 0..state.run {
            l = l.conj();
            scratch.front.push(l);
        }
    }
    for (j, w) in slice_weights(zs, &scratch.front, |n| qints[n + 1]) {
        scratch.joined.clear();
        scratch.joined.extend_from_slice(&zs[..zs.len() - j]);
        if state.cut {
            scratch.joined.extend_from_slice(&scratch.front[j..hlen]);
            emit(State::cut(&scratch.joined, state.run, state.tail, opts), w);
        } else {
            scratch.joined.extend_from_slice(&scratch.front[j..]);
            emit(State::from_letters(&scratch.joined, opts), w);
        }
    }
    true
}

/// A probability measure on words in lumped form, with pruned mass.
#[derive(Clone, Debug)]
pub struct LumpedMeasure {
    /// Sorted by state, so sums run in a fixed order.
    atoms: Vec<(State, f64)>,
    pruned: f64,
    opts: LumpOptions,
    q: QParam,
}

fn sorted(map: FxHashMap<State, f64>) -> Vec<(State, f64)> {
    let mut v: Vec<(State, f64)> = map.into_iter().collect();
    v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    v
}

impl LumpedMeasure {
    /// Panics unless `head ≥ 1` and `head + tail ≤ 64`.
    pub fn from_measure(m: &AtomicMeasure<Word>, opts: LumpOptions, q: QParam) -> Self {
        assert!(opts.head >= 1, "lumped head must keep at least one letter");
        assert!(
            opts.head + opts.tail <= MAX_PACKED,
            "lumped head + tail exceeds {MAX_PACKED} letters"
        );
        let mut atoms = FxHashMap::default();
        for (w, v) in m.iter() {
            *atoms.entry(State::from_letters(w.letters(), &opts)).or_insert(0.0) += v;
        }
        LumpedMeasure {
            atoms: sorted(atoms),
            pruned: m.pruned_mass(),
            opts,
            q,
        }
    }

    pub fn dirac(w: Word, opts: LumpOptions, q: QParam) -> Self {
        Self::from_measure(&AtomicMeasure::dirac(w), opts, q)
    }

    /// `μ^{*n}`, built as `μ * (μ * (… * μ))`.
    pub fn power(mu: &AtomicMeasure<Word>, n: usize, opts: LumpOptions, q: QParam) -> Self {
        let mut acc = Self::dirac(Word::empty(), opts, q);
        for _ in 0..n {
            acc = acc.left_convolve(mu);
        }
        acc
    }

    /// `m * self`.
    pub fn left_convolve(&self, m: &AtomicMeasure<Word>) -> Self {
        let mut atoms: FxHashMap<State, f64> = FxHashMap::default();
        atoms.reserve(self.atoms.len() * 2);
        let mut pruned = self.pruned + m.pruned_mass();
        let mut scratch = Scratch::default();
        // a block can reach over the head, the run and every new letter
        let longest_run = self.atoms.iter().map(|(s, _)| s.run).max().unwrap_or(0) as u32;
        let longest_z = m.labels().map(Word::len).max().unwrap_or(0) as u32;
        let top = self.opts.head as u32 + self.opts.tail as u32 + longest_run + 2 * longest_z + 2;
        let qints: Vec<f64> = (0..=top).map(|n| qint(n, self.q)).collect();
        for (state, sv) in &self.atoms {
            for (z, zv) in m.iter() {
                let scale = sv * zv;
                let resolved = left_point(z.letters(), state, &qints, &self.opts, &mut scratch, |s, w| {
                    *atoms.entry(s).or_insert(0.0) += w * scale;
                });
                if !resolved {
                    pruned += scale;
                }
            }
        }
        if self.opts.prune_eps > 0.0 {
            let eps = self.opts.prune_eps;
            atoms.retain(|_, v| {
                if *v < eps {
                    pruned += *v;
                    false
                } else {
                    true
                }
            });
        }
        LumpedMeasure {
            atoms: sorted(atoms),
            pruned,
            opts: self.opts,
            q: self.q,
        }
    }

    /// Mass on `Δ̄_y`. Panics when the suffix is longer than the kept tail.
    pub fn cylinder_mass(&self, c: &Cylinder) -> f64 {
        assert!(
            c.suffix.len() <= self.opts.tail,
            "cylinder suffix {} longer than lumped tail {}",
            c.suffix,
            self.opts.tail
        );
        self.atoms
            .iter()
            .filter(|(s, _)| s.ends_with(&c.suffix))
            .map(|(_, v)| v)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, v)| v).sum()
    }

    /// Total-variation error bound from unresolved cancellations and
    /// pruning.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned
    }

    /// Number of lumped states.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn options(&self) -> LumpOptions {
        self.opts
    }

    /// Exact atoms only (words short enough not to be cut).
    pub fn exact_atoms(&self) -> Vec<(Word, f64)> {
        self.atoms
            .iter()
            .filter(|(s, _)| !s.cut)
            .map(|(s, v)| (s.front.to_word(), *v))
            .collect()
    }
}
