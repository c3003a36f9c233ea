//! Measures on the free unitary fusion semigroup and its end
//! compactification.
//!
//! Words grow and shrink at the left end under `μ * ·` and keep their last
//! letters, so the boundary is the set of left-infinite words and a measure
//! on it is described by its cylinder masses `λ(Δ̄_y)`.

mod convolution;
mod kernel;
mod lumped;
mod measure;
mod sample;

pub use convolution::{
    convolve, convolve_point, convolve_power, cylinder_mass, estimate_bound,
    random_estimate_instance, tail_word, verify_estimate, Cylinder, EstimateCheck, PowerOptions,
};
pub use kernel::{harmonic_residual, walk_kernel, TransitionKernel, INTERIOR_LEAK};
pub use lumped::{LumpOptions, LumpedMeasure};
pub use measure::AtomicMeasure;
pub use sample::{sample_path, sample_paths, PathSample, PathStats, PathSummary};

use crate::fusion::{QParam, Word};

/// Cached approximant of `μ^{*n}` for repeated cylinder queries from
/// different starting measures.
#[derive(Clone, Debug)]
pub struct BoundaryApproximant {
    power: LumpedMeasure,
}

impl BoundaryApproximant {
    pub fn new(mu: &AtomicMeasure<Word>, n: usize, q: QParam, opts: LumpOptions) -> Self {
        BoundaryApproximant {
            power: LumpedMeasure::power(mu, n, opts, q),
        }
    }

    pub fn power(&self) -> &LumpedMeasure {
        &self.power
    }

    /// `λ * μ^{*n}`.
    pub fn started_at(&self, lambda: &AtomicMeasure<Word>) -> LumpedMeasure {
        self.power.left_convolve(lambda)
    }

    /// `(δ_x * μ^{*n})(Δ̄_c)`, the finite-`n` harmonic measure of the
    /// cylinder seen from `x`.
    pub fn hitting(&self, x: &Word, c: &Cylinder) -> f64 {
        self.started_at(&AtomicMeasure::dirac(x.clone()))
            .cylinder_mass(c)
    }
}

/// Result of [`stationarity_gap`]. The true gap lies within `pruned_mass` of
/// `gap`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationarityGap {
    pub gap: f64,
    pub pruned_mass: f64,
}

/// `max_y |(λ * μ^{*n})(Δ̄_y) − μ^{*n}(Δ̄_y)|` over the given cylinders: how
/// far the walk started from `λ` is from the walk started at `e`.
pub fn stationarity_gap(
    lambda: &AtomicMeasure<Word>,
    mu: &AtomicMeasure<Word>,
    n: usize,
    suffixes: &[Cylinder],
    q: QParam,
) -> StationarityGap {
    let tail = suffixes.iter().map(|c| c.suffix.len()).max().unwrap_or(0);
    let approx = BoundaryApproximant::new(mu, n, q, LumpOptions::with_tail(tail));
    stationarity_gap_with(&approx, lambda, suffixes)
}

/// [`stationarity_gap`] against a precomputed approximant.
pub fn stationarity_gap_with(
    approx: &BoundaryApproximant,
    lambda: &AtomicMeasure<Word>,
    suffixes: &[Cylinder],
) -> StationarityGap {
    let reference = approx.power();
    let started = approx.started_at(lambda);
    let gap = suffixes
        .iter()
        .map(|c| (started.cylinder_mass(c) - reference.cylinder_mass(c)).abs())
        .fold(0.0, f64::max);
    StationarityGap {
        gap,
        pruned_mass: started.pruned_mass() + reference.pruned_mass(),
    }
}

/// `(δ_x * μ^{*n})(Δ̄_c)`.
pub fn hitting_estimate(x: &Word, c: &Cylinder, mu: &AtomicMeasure<Word>, n: usize, q: QParam) -> f64 {
    BoundaryApproximant::new(mu, n, q, LumpOptions::with_tail(c.suffix.len())).hitting(x, c)
}
