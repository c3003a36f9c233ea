//! Amenability diagnostics: norms of truncated fusion matrices against
//! quantum dimensions, and invariant-mean residuals of the classical walk
//! operators.
//!
//! Finite truncations can neither certify nor rule out an invariant mean;
//! residuals are reported as numbers, to be read as trends over growing
//! windows and truncations.

use crate::error::{Error, Result};
use crate::fusion::{fusion_matrix, FusionMatrix, FusionSystem};
use crate::walk::TransitionKernel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormOptions {
    /// Stop once the eigen-residual of `ΓᵀΓ` drops below `tol` times the
    /// current eigenvalue estimate.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            tol: 1e-11,
            max_iter: 500_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralNorm {
    /// `√θ` for the Rayleigh quotient `θ` of the last iterate; never above
    /// the true norm.
    pub estimate: f64,
    /// `‖ΓᵀΓv − θv‖` for the normalized last iterate `v`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖Γ‖` by power iteration on `ΓᵀΓ` from the all-ones vector. When
/// `max_iter` runs out the best estimate is returned with `converged` unset.
pub fn spectral_norm<L>(gamma: &FusionMatrix<L>, opts: NormOptions) -> Result<SpectralNorm> {
    if gamma.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let n = gamma.size();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut gv = vec![0.0; n];
    let mut bv = vec![0.0; n];
    let mut best = SpectralNorm {
        estimate: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
        converged: false,
    };
    for it in 1..=opts.max_iter {
        gamma.mul_vec(&v, &mut gv);
        gamma.tr_mul_vec(&gv, &mut bv);
        let theta: f64 = v.iter().zip(&bv).map(|(a, b)| a * b).sum();
        let residual = norm2(
            &bv.iter()
                .zip(&v)
                .map(|(b, a)| b - theta * a)
                .collect::<Vec<_>>(),
        );
        best = SpectralNorm {
            estimate: theta.max(0.0).sqrt(),
            residual,
            iterations: it,
            converged: residual <= opts.tol * theta.max(f64::MIN_POSITIVE),
        };
        if best.converged {
            break;
        }
        let len = norm2(&bv);
        if len == 0.0 {
            // v lies in the kernel; nothing further to find
            break;
        }
        v.iter_mut().zip(&bv).for_each(|(a, b)| *a = b / len);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmenabilityReport<L> {
    pub label: L,
    pub truncation_size: usize,
    pub norm: f64,
    pub norm_residual: f64,
    pub norm_converged: bool,
    pub qdim: f64,
    /// `d_q(U) − ‖Γ_U‖`.
    pub gap: f64,
    /// The `q = 1` dimension of the same label.
    pub classical_dim: f64,
    /// Set when `gap` is below the caller's tolerance.
    pub amenable_at_truncation: bool,
}

/// Compare `‖Γ_U‖` on the truncation with `d_q(U)`.
pub fn amenability_gap<S: FusionSystem>(
    sys: &S,
    u: &S::Label,
    truncation: &[S::Label],
    opts: NormOptions,
    flag_tol: f64,
) -> Result<AmenabilityReport<S::Label>> {
    if !truncation.contains(u) {
        return Err(Error::InvalidLabel(format!("{u} is not in the truncation")));
    }
    let gamma = fusion_matrix(sys, u, truncation)?;
    let norm = spectral_norm(&gamma, opts)?;
    let qdim = sys.qdim(u);
    let gap = qdim - norm.estimate;
    Ok(AmenabilityReport {
        label: u.clone(),
        truncation_size: truncation.len(),
        norm: norm.estimate,
        norm_residual: norm.residual,
        norm_converged: norm.converged,
        qdim,
        gap,
        classical_dim: sys.classical_dim(u),
        amenable_at_truncation: gap < flag_tol,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanCandidate {
    pub m: Vec<f64>,
    /// `‖mP_s − m‖₁ + leak_s` per kernel.
    pub residuals: Vec<f64>,
    /// Mass `m` loses through leaking rows of each kernel.
    pub leaks: Vec<f64>,
    /// Largest residual.
    pub aggregate: f64,
}

fn check_probability(m: &[f64]) -> Result<()> {
    if m.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidMeasure("negative or non-finite entry".into()));
    }
    let total: f64 = m.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidMeasure(format!("total mass {total}, expected 1")));
    }
    Ok(())
}

/// How far `m` is from being invariant under every kernel.
pub fn mean_residual<L>(m: &[f64], kernels: &[TransitionKernel<L>]) -> Result<MeanCandidate>
where
    L: Clone + Eq + std::hash::Hash,
{
    check_probability(m)?;
    let mut residuals = Vec::with_capacity(kernels.len());
    let mut leaks = Vec::with_capacity(kernels.len());
    for k in kernels {
        let (mp, lost) = k.apply_left(m)?;
        let l1: f64 = mp.iter().zip(m).map(|(a, b)| (a - b).abs()).sum();
        residuals.push(l1 + lost);
        leaks.push(lost);
    }
    let aggregate = residuals.iter().copied().fold(0.0, f64::max);
    Ok(MeanCandidate {
        m: m.to_vec(),
        residuals,
        leaks,
        aggregate,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CesaroMean {
    /// Renormalized average, a probability vector.
    pub m: Vec<f64>,
    /// Average mass that left the truncation before renormalizing.
    pub leak: f64,
}

/// `(1/window) Σ_{k=1}^{window} start P^k`, renormalized over the truncation.
pub fn cesaro_mean<L>(start: &[f64], kernel: &TransitionKernel<L>, window: usize) -> Result<CesaroMean>
where
    L: Clone + Eq + std::hash::Hash,
{
    let mut all = cesaro_trajectory(start, kernel, window)?;
    Ok(all.pop().expect("window is at least 1"))
}

/// [`cesaro_mean`] for every window `1..=window`.
pub fn cesaro_trajectory<L>(
    start: &[f64],
    kernel: &TransitionKernel<L>,
    window: usize,
) -> Result<Vec<CesaroMean>>
where
    L: Clone + Eq + std::hash::Hash,
{
    if window == 0 {
        return Err(Error::Config("Cesàro window must be at least 1".into()));
    }
    check_probability(start)?;
    let mut cur = start.to_vec();
    let mut acc = vec![0.0; start.len()];
    let (mut lost, mut lost_acc) = (0.0, 0.0);
    let mut out = Vec::with_capacity(window);
    for w in 1..=window {
        let (next, l) = kernel.apply_left(&cur)?;
        cur = next;
        lost += l;
        lost_acc += lost;
        acc.iter_mut().zip(&cur).for_each(|(a, c)| *a += c);
        let total: f64 = acc.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidMeasure("all mass left the truncation".into()));
        }
        out.push(CesaroMean {
            m: acc.iter().map(|a| a / total).collect(),
            leak: lost_acc / w as f64,
        });
    }
    Ok(out)
}
