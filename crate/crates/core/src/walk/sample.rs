//! Monte Carlo paths of the free unitary walk.
//!
//! Randomness is counter based: the draw for step `m` of path `i` under seed
//! `s` comes from a ChaCha8 stream keyed by `s`, stream id `i`, at word
//! position `2m`. No generator state is shared between paths or steps, so
//! results do not depend on how paths are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::convolution::convolve_point;
use super::measure::AtomicMeasure;
use crate::error::{Error, Result};
use crate::fusion::{QParam, Word};

/// One sampled trajectory `x₀ = e, x₁, …, x_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub seed: u64,
    pub path_index: u64,
    pub labels: Vec<Word>,
    pub tail_len: usize,
    /// First step `m` such that every `x_j`, `j ≥ m`, has the same last
    /// `tail_len` letters as the final word. `None` when the final word is
    /// shorter than `tail_len`.
    pub stabilize_step: Option<usize>,
}

impl PathSample {
    pub fn final_word(&self) -> &Word {
        self.labels.last().expect("paths start at e")
    }

    pub fn steps(&self) -> usize {
        self.labels.len() - 1
    }

    /// Whether the tail has been constant for at least `window` final steps.
    pub fn settled(&self, window: usize) -> bool {
        self.stabilize_step
            .is_some_and(|s| s + window <= self.steps())
    }
}

fn uniform(seed: u64, path: u64, step: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng.set_word_pos(u128::from(step) * 2);
    // 53 random bits
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Outcomes of `μ * δ_x` in a fixed order with their probabilities.
fn step_distribution(mu: &AtomicMeasure<Word>, x: &Word, q: QParam) -> Vec<(Word, f64)> {
    let mut out = Vec::new();
    for (s, ms) in mu.iter() {
        for (w, p) in convolve_point(s, x, q).iter() {
            out.push((w.clone(), ms * p));
        }
    }
    out
}

fn stabilization(labels: &[Word], tail: usize) -> Option<usize> {
    let last = labels.last()?;
    if last.len() < tail {
        return None;
    }
    let target = last.suffix(tail);
    let mut m = labels.len() - 1;
    while m > 0 {
        let prev = &labels[m - 1];
        if prev.len() >= tail && prev.ends_with(&target) {
            m -= 1;
        } else {
            break;
        }
    }
    Some(m)
}

/// Sample path `path_index` of the walk driven by `μ`. Each step draws
/// `x_{m+1}` from `μ * δ_{x_m}`: a generator is fused onto the left, so the
/// word grows at the front and its last letters settle.
pub fn sample_path(
    mu: &AtomicMeasure<Word>,
    steps: usize,
    seed: u64,
    path_index: u64,
    q: QParam,
    tail_len: usize,
) -> PathSample {
    let mut labels = Vec::with_capacity(steps + 1);
    labels.push(Word::empty());
    for m in 0..steps {
        let dist = step_distribution(mu, &labels[m], q);
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        let u = uniform(seed, path_index, m as u64) * total;
        let mut acc = 0.0;
        let mut next = &dist[dist.len() - 1].0;
        for (w, p) in &dist {
            acc += p;
            if u < acc {
                next = w;
                break;
            }
        }
        labels.push(next.clone());
    }
    let stabilize_step = stabilization(&labels, tail_len);
    PathSample {
        seed,
        path_index,
        labels,
        tail_len,
        stabilize_step,
    }
}

/// Per-path record kept by [`sample_paths`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSummary {
    pub path_index: u64,
    pub final_word: Word,
    pub stabilize_step: Option<usize>,
}

/// Aggregate statistics. Merging is integer addition, hence associative and
/// independent of worker count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PathStats {
    pub paths: u64,
    pub settled: u64,
    pub stabilized: u64,
    pub final_len_sum: u64,
}

impl PathStats {
    pub fn merge(self, other: PathStats) -> PathStats {
        PathStats {
            paths: self.paths + other.paths,
            settled: self.settled + other.settled,
            stabilized: self.stabilized + other.stabilized,
            final_len_sum: self.final_len_sum + other.final_len_sum,
        }
    }

    pub fn settled_fraction(&self) -> f64 {
        self.settled as f64 / self.paths as f64
    }
}

/// Sample `paths` independent paths on `threads` workers (0 picks the rayon
/// default). Output is ordered by path index and identical for every worker
/// count. A path counts as settled when its tail has been constant over the
/// second half of the run.
pub fn sample_paths(
    mu: &AtomicMeasure<Word>,
    paths: u64,
    steps: usize,
    seed: u64,
    q: QParam,
    tail_len: usize,
    threads: usize,
) -> Result<(Vec<PathSummary>, PathStats)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let window = steps / 2;
    let summaries: Vec<(PathSummary, PathStats)> = pool.install(|| {
        (0..paths)
            .into_par_iter()
            .map(|i| {
                let p = sample_path(mu, steps, seed, i, q, tail_len);
                let stats = PathStats {
                    paths: 1,
                    settled: u64::from(p.settled(window)),
                    stabilized: u64::from(p.stabilize_step.is_some()),
                    final_len_sum: p.final_word().len() as u64,
                };
                let summary = PathSummary {
                    path_index: i,
                    final_word: p.final_word().clone(),
                    stabilize_step: p.stabilize_step,
                };
                (summary, stats)
            })
            .collect()
    });
    let stats = summaries
        .iter()
        .fold(PathStats::default(), |acc, (_, s)| acc.merge(*s));
    Ok((summaries.into_iter().map(|(p, _)| p).collect(), stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn single_letter_walk_is_deterministic() {
        let mu = AtomicMeasure::dirac("a".parse::<Word>().unwrap());
        let p = sample_path(&mu, 5, 1, 0, q(0.5), 2);
        let s: Vec<String> = p.labels.iter().map(|w| w.to_string()).collect();
        assert_eq!(s, ["e", "a", "aa", "aaa", "aaaa", "aaaaa"]);
        assert_eq!(p.stabilize_step, Some(2));
    }

    #[test]
    fn rerun_is_identical() {
        let mu = AtomicMeasure::parse_spec("a:0.5,b:0.5").unwrap();
        let a = sample_path(&mu, 60, 42, 3, q(0.5), 3);
        let b = sample_path(&mu, 60, 42, 3, q(0.5), 3);
        assert_eq!(a, b);
        let c = sample_path(&mu, 60, 42, 4, q(0.5), 3);
        assert_ne!(a.labels, c.labels);
    }

    #[test]
    fn consecutive_labels_are_connected() {
        let mu = AtomicMeasure::parse_spec("a:0.3,b:0.3,ab:0.4").unwrap();
        let p = sample_path(&mu, 80, 9, 0, q(0.6), 3);
        for win in p.labels.windows(2) {
            let support: Vec<Word> = step_distribution(&mu, &win[0], q(0.6))
                .into_iter()
                .map(|(w, _)| w)
                .collect();
            assert!(support.contains(&win[1]));
        }
    }

    #[test]
    fn stabilization_step() {
        let ws = |v: &[&str]| -> Vec<Word> { v.iter().map(|s| s.parse().unwrap()).collect() };
        assert_eq!(stabilization(&ws(&["e", "a", "ba", "a", "aa"]), 1), Some(1));
        assert_eq!(stabilization(&ws(&["e", "a", "ba", "a", "aa"]), 2), Some(4));
        assert_eq!(stabilization(&ws(&["e", "a", "e"]), 1), None);
        assert_eq!(stabilization(&ws(&["e", "b"]), 0), Some(0));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mu = AtomicMeasure::parse_spec("a:0.5,b:0.5").unwrap();
        let r1 = sample_paths(&mu, 64, 30, 5, q(0.5), 3, 1).unwrap();
        let r3 = sample_paths(&mu, 64, 30, 5, q(0.5), 3, 3).unwrap();
        assert_eq!(r1, r3);
        assert_eq!(r1.1.paths, 64);
    }

    #[test]
    fn uniform_in_unit_interval() {
        for step in 0..1000 {
            let u = uniform(11, 2, step);
            assert!((0.0..1.0).contains(&u));
        }
        assert_ne!(uniform(11, 2, 0), uniform(11, 3, 0));
        assert_ne!(uniform(11, 2, 0), uniform(12, 2, 0));
    }
}
