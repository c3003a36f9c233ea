//! Fusion rules, conjugation and quantum dimensions.
//!
//! Three fusion systems are supported:
//!
//! * [`FreeUnitary`]: the free unitary family. Labels are words over `{a, b}`,
//!   conjugation is [`Word::involute`], and `x ⊗ y` decomposes as the sum of
//!   `x₀y₀` over every split `x = x₀u`, `y = ūy₀`.
//! * [`TemperleyLieb`]: SU_q(2)-type fusion on nonnegative integers with the
//!   fundamental object labelled `1`; `n ⊗ m = |n−m| ⊕ |n−m|+2 ⊕ … ⊕ n+m`.
//! * [`IntegerSpin`]: the even part of Temperley–Lieb (SO_q(3)-type). Labels
//!   keep the doubled convention, so the spin-1 object is `2`.
//!
//! The only input that matters at fusion-ring level is the scalar `q`; the
//! generator dimension is `δ = q + 1/q`.
//!
//! Word dimensions are not given in closed form by the fusion rule, only on
//! generators. Applying `d(x)d(g) = Σ d(summands)` to `x ⊗ g` for a letter
//! `g` gives the recursion used by [`FreeUnitary::qdim`]: `x ⊗ g = xg` when the
//! last letter of `x` is not `ḡ`, and `x ⊗ g = xg ⊕ x'` (with `x = x'ḡ`)
//! otherwise, so `d(xg) = δ d(x) − [last(x) = ḡ] d(x')`.

mod matrix;
mod word;

pub use matrix::{fusion_matrix, FusionMatrix};
pub use word::{Letter, Word};

use std::fmt;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Deformation parameter, strictly between 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q < 1.0 {
            Ok(QParam(q))
        } else {
            Err(Error::InvalidQ(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `δ = q + 1/q`, the dimension of the fundamental object.
    pub fn delta(self) -> f64 {
        self.0 + 1.0 / self.0
    }
}

impl fmt::Display for QParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The q-integer `[n]_q = (qⁿ − q⁻ⁿ)/(q − q⁻¹)`.
///
/// Evaluated through the three-term recurrence `[n+1] = δ[n] − [n−1]`, which
/// avoids the cancellation in the closed form for small `n`.
pub fn qint(n: u32, q: QParam) -> f64 {
    let delta = q.delta();
    let (mut prev, mut cur) = (0.0_f64, 1.0_f64);
    if n == 0 {
        return 0.0;
    }
    for _ in 1..n {
        let next = delta * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Abstract fusion data: simple labels, unit, conjugation, tensor
/// multiplicities and a dimension function.
pub trait FusionSystem: Sync {
    type Label: Clone + Eq + Ord + Hash + fmt::Debug + fmt::Display + Send + Sync;

    fn name(&self) -> &'static str;

    fn q(&self) -> QParam;

    fn unit(&self) -> Self::Label;

    fn conj(&self, x: &Self::Label) -> Self::Label;

    /// Simple summands of `x ⊗ y` with multiplicities.
    fn decompose(&self, x: &Self::Label, y: &Self::Label) -> Vec<(Self::Label, u32)>;

    /// Quantum dimension.
    fn qdim(&self, x: &Self::Label) -> f64;

    /// Dimension of the corresponding undeformed (q = 1) object.
    fn classical_dim(&self, x: &Self::Label) -> f64;

    fn parse_label(&self, s: &str) -> Result<Self::Label>;

    /// `N_{x,y}^z`, the multiplicity of `z` in `x ⊗ y`.
    fn multiplicity(&self, x: &Self::Label, y: &Self::Label, z: &Self::Label) -> u32 {
        self.decompose(x, y)
            .into_iter()
            .filter(|(w, _)| w == z)
            .map(|(_, m)| m)
            .sum()
    }
}

/// `|Σ_z N_{x,y}^z d(z) − d(x)d(y)|`.
pub fn dimension_identity_residual<S: FusionSystem>(sys: &S, x: &S::Label, y: &S::Label) -> f64 {
    let lhs: f64 = sys
        .decompose(x, y)
        .iter()
        .map(|(z, m)| f64::from(*m) * sys.qdim(z))
        .sum();
    (lhs - sys.qdim(x) * sys.qdim(y)).abs()
}

/// Fusion of the free unitary quantum group with deformation `q`.
#[derive(Clone, Copy, Debug)]
pub struct FreeUnitary {
    q: QParam,
}

impl FreeUnitary {
    pub fn new(q: QParam) -> Self {
        FreeUnitary { q }
    }

    /// Number of admissible cancellations in `x ⊗ y`, minus one: the largest
    /// `j` such that the last `j` letters of `x`, involuted, are a prefix of
    /// `y`. Admissibility is monotone in `j`, so every `0..=j` qualifies.
    pub fn max_cancellation(x: &Word, y: &Word) -> usize {
        let (xs, ys) = (x.letters(), y.letters());
        xs.iter()
            .rev()
            .zip(ys.iter())
            .take_while(|(a, b)| a.conj() == **b)
            .count()
    }

    /// Summands of `x ⊗ y`, longest first. The `j`-th entry drops `j` letters
    /// from each side.
    pub fn summands(x: &Word, y: &Word) -> Vec<Word> {
        let jmax = Self::max_cancellation(x, y);
        let (xs, ys) = (x.letters(), y.letters());
        (0..=jmax)
            .map(|j| {
                let mut v = Vec::with_capacity(xs.len() + ys.len() - 2 * j);
                v.extend_from_slice(&xs[..xs.len() - j]);
                v.extend_from_slice(&ys[j..]);
                Word::from_letters(v)
            })
            .collect()
    }

    /// Quantum dimension by the letter-append recursion over prefixes.
    ///
    /// The recursion only sees the cancellation pattern (which adjacent
    /// pairs are `xḡ`). Involution reverses that pattern, so the pattern is
    /// walked in a canonical direction and `d(x̄) = d(x)` holds bit for bit.
    pub fn word_dim(x: &Word, q: QParam) -> f64 {
        Self::letters_dim(x.letters(), q)
    }

    /// [`word_dim`](Self::word_dim) on a letter slice.
    pub fn letters_dim(ls: &[Letter], q: QParam) -> f64 {
        Self::chain_dim(ls, &[], q)
    }

    /// Dimension of the concatenation `a · b` without materializing it.
    pub fn chain_dim(a: &[Letter], b: &[Letter], q: QParam) -> f64 {
        let len = a.len() + b.len();
        let at = |i: usize| if i < a.len() { a[i] } else { b[i - a.len()] };
        let d = pattern_dim(len, |k| at(k) == at(k + 1).conj(), q.delta());
        assert!(
            d >= 1.0 - 1e-12 && d.is_finite(),
            "quantum dimension out of range: {d}"
        );
        d
    }
}

/// Dimension from the cancellation pattern of a word of length `len`:
/// `cancels(k)` is set when letter `k + 1` cancels against letter `k`.
fn pattern_dim(len: usize, cancels: impl Fn(usize) -> bool, delta: f64) -> f64 {
    if len == 0 {
        return 1.0;
    }
    let m = len - 1;
    let forward = (0..m)
        .map(|i| (cancels(i), cancels(m - 1 - i)))
        .find(|(f, r)| f != r)
        .is_none_or(|(f, r)| f < r);
    let step = |(before, cur): (f64, f64), c: bool| (cur, cur * delta - if c { before } else { 0.0 });
    // the first letter contributes d = δ with nothing to cancel
    let init = (1.0_f64, delta);
    let (_, d) = if forward {
        (0..m).map(&cancels).fold(init, step)
    } else {
        (0..m).rev().map(&cancels).fold(init, step)
    };
    d
}

impl FusionSystem for FreeUnitary {
    type Label = Word;

    fn name(&self) -> &'static str {
        "auf"
    }

    fn q(&self) -> QParam {
        self.q
    }

    fn unit(&self) -> Word {
        Word::empty()
    }

    fn conj(&self, x: &Word) -> Word {
        x.involute()
    }

    fn decompose(&self, x: &Word, y: &Word) -> Vec<(Word, u32)> {
        Self::summands(x, y).into_iter().map(|z| (z, 1)).collect()
    }

    fn qdim(&self, x: &Word) -> f64 {
        Self::word_dim(x, self.q)
    }

    fn classical_dim(&self, x: &Word) -> f64 {
        // the q = 1 recursion, with δ = 2
        let ls = x.letters();
        pattern_dim(ls.len(), |k| ls[k] == ls[k + 1].conj(), 2.0)
    }

    fn parse_label(&self, s: &str) -> Result<Word> {
        s.parse()
    }

    fn multiplicity(&self, x: &Word, y: &Word, z: &Word) -> u32 {
        // Summand lengths are |x|+|y|-2j, so at most one j can match.
        let total = x.len() + y.len();
        if z.len() > total || (total - z.len()) % 2 != 0 {
            return 0;
        }
        let j = (total - z.len()) / 2;
        if j > Self::max_cancellation(x, y) {
            return 0;
        }
        let (xs, ys) = (x.letters(), y.letters());
        let zs = z.letters();
        let cut = xs.len() - j;
        u32::from(zs[..cut] == xs[..cut] && zs[cut..] == ys[j..])
    }
}

/// Temperley–Lieb / SU_q(2) fusion, labels `n ≥ 0` with `d(n) = [n+1]_q`.
#[derive(Clone, Copy, Debug)]
pub struct TemperleyLieb {
    q: QParam,
}

impl TemperleyLieb {
    pub fn new(q: QParam) -> Self {
        TemperleyLieb { q }
    }
}

impl FusionSystem for TemperleyLieb {
    type Label = u32;

    fn name(&self) -> &'static str {
        "tl"
    }

    fn q(&self) -> QParam {
        self.q
    }

    fn unit(&self) -> u32 {
        0
    }

    fn conj(&self, x: &u32) -> u32 {
        *x
    }

    fn decompose(&self, x: &u32, y: &u32) -> Vec<(u32, u32)> {
        let lo = x.abs_diff(*y);
        (lo..=x + y).step_by(2).map(|k| (k, 1)).collect()
    }

    fn qdim(&self, x: &u32) -> f64 {
        qint(x + 1, self.q)
    }

    fn classical_dim(&self, x: &u32) -> f64 {
        f64::from(x + 1)
    }

    fn parse_label(&self, s: &str) -> Result<u32> {
        s.trim()
            .parse()
            .map_err(|_| Error::InvalidLabel(format!("{s:?} is not a nonnegative integer")))
    }
}

/// The integer-spin (SO_q(3)-type) part of Temperley–Lieb: even labels only.
#[derive(Clone, Copy, Debug)]
pub struct IntegerSpin {
    tl: TemperleyLieb,
}

impl IntegerSpin {
    pub fn new(q: QParam) -> Self {
        IntegerSpin {
            tl: TemperleyLieb::new(q),
        }
    }
}

impl FusionSystem for IntegerSpin {
    type Label = u32;

    fn name(&self) -> &'static str {
        "spin"
    }

    fn q(&self) -> QParam {
        self.tl.q
    }

    fn unit(&self) -> u32 {
        0
    }

    fn conj(&self, x: &u32) -> u32 {
        *x
    }

    fn decompose(&self, x: &u32, y: &u32) -> Vec<(u32, u32)> {
        debug_assert!(x % 2 == 0 && y % 2 == 0, "odd label in integer-spin system");
        self.tl.decompose(x, y)
    }

    fn qdim(&self, x: &u32) -> f64 {
        self.tl.qdim(x)
    }

    fn classical_dim(&self, x: &u32) -> f64 {
        self.tl.classical_dim(x)
    }

    fn parse_label(&self, s: &str) -> Result<u32> {
        let n = self.tl.parse_label(s)?;
        if n % 2 != 0 {
            return Err(Error::InvalidLabel(format!("{s} is odd; integer-spin labels are even")));
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    /// Closed-form oracle: a word splits at repeated letters into maximal
    /// alternating blocks, and `d` is the product of `[len + 1]_q` over them.
    fn block_product_dim(x: &Word, q: QParam) -> f64 {
        let ls = x.letters();
        if ls.is_empty() {
            return 1.0;
        }
        let mut d = 1.0;
        let mut run = 1u32;
        for i in 1..ls.len() {
            if ls[i] == ls[i - 1] {
                d *= qint(run + 1, q);
                run = 1;
            } else {
                run += 1;
            }
        }
        d * qint(run + 1, q)
    }

    /// Brute-force decomposition straight from the rule: enumerate all
    /// suffixes `u` of `x` and test whether `ū` is a prefix of `y`.
    fn brute_decompose(x: &Word, y: &Word) -> Vec<Word> {
        let mut out = Vec::new();
        for j in 0..=x.len() {
            let u = x.suffix(j);
            let ubar = u.involute();
            if ubar.len() <= y.len() && y.prefix(ubar.len()) == ubar {
                out.push(x.prefix(x.len() - j).concat(&y.suffix(y.len() - j)));
            }
        }
        out
    }

    #[test]
    fn qparam_rejects_out_of_range() {
        for bad in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(QParam::new(bad).is_err());
        }
        assert_eq!(q(0.5).delta(), 2.5);
    }

    #[test]
    fn qint_examples() {
        assert_eq!(qint(0, q(0.5)), 0.0);
        assert_eq!(qint(1, q(0.5)), 1.0);
        assert!((qint(2, q(0.5)) - 2.5).abs() < 1e-15);
        assert!((qint(3, q(0.5)) - 5.25).abs() < 1e-15);
        for n in 1..30 {
            let qq = 0.7_f64;
            let closed = (qq.powi(n) - qq.powi(-n)) / (qq - 1.0 / qq);
            assert!((qint(n as u32, q(qq)) - closed).abs() < 1e-10 * closed);
        }
    }

    #[test]
    fn decompose_examples() {
        let sys = FreeUnitary::new(q(0.5));
        let d = |x: &str, y: &str| -> Vec<String> {
            sys.decompose(&w(x), &w(y))
                .into_iter()
                .map(|(z, m)| format!("{z} {m}"))
                .collect()
        };
        assert_eq!(d("a", "b"), ["ab 1", "e 1"]);
        assert_eq!(d("e", "abb"), ["abb 1"]);
        assert_eq!(d("ab", "ab"), ["abab 1", "ab 1", "e 1"]);
        assert_eq!(d("a", "a"), ["aa 1"]);
        let tl = TemperleyLieb::new(q(0.5));
        assert_eq!(tl.decompose(&3, &1), vec![(2, 1), (4, 1)]);
        assert_eq!(tl.decompose(&0, &5), vec![(5, 1)]);
    }

    #[test]
    fn decompose_matches_brute_force() {
        for x in Word::all_up_to(5) {
            for y in Word::all_up_to(5) {
                assert_eq!(FreeUnitary::summands(&x, &y), brute_decompose(&x, &y));
            }
        }
    }

    #[test]
    fn qdim_examples() {
        let sys = FreeUnitary::new(q(0.5));
        assert_eq!(sys.qdim(&w("e")), 1.0);
        assert_eq!(sys.qdim(&w("a")), 2.5);
        assert!((sys.qdim(&w("ab")) - 5.25).abs() < 1e-14);
        assert_eq!(sys.qdim(&w("aa")), 6.25);
    }

    #[test]
    fn qdim_matches_block_product() {
        for qq in [0.3, 0.5, 0.8] {
            for x in Word::all_up_to(10) {
                let a = FreeUnitary::word_dim(&x, q(qq));
                let b = block_product_dim(&x, q(qq));
                assert!((a - b).abs() <= 1e-12 * b, "{x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn qdim_symmetric_under_involution_and_swap() {
        let sys = FreeUnitary::new(q(0.3));
        for x in Word::all_up_to(8) {
            assert_eq!(sys.qdim(&x), sys.qdim(&x.involute()));
            let swapped = Word::from_letters(x.letters().iter().map(|l| l.conj()).collect());
            assert_eq!(sys.qdim(&x), sys.qdim(&swapped));
        }
    }

    #[test]
    fn dimension_axiom_free_unitary() {
        for qq in [0.3, 0.5, 0.8] {
            let sys = FreeUnitary::new(q(qq));
            let words: Vec<Word> = Word::all_up_to(6).collect();
            for x in &words {
                for y in &words {
                    let r = dimension_identity_residual(&sys, x, y);
                    assert!(r <= 1e-9 * sys.qdim(x) * sys.qdim(y), "{x} {y}: {r}");
                }
            }
        }
        let sys = FreeUnitary::new(q(0.5));
        assert_eq!(dimension_identity_residual(&sys, &w("e"), &w("abab")), 0.0);
        assert!(dimension_identity_residual(&sys, &w("a"), &w("b")) < 1e-12);
        assert!(dimension_identity_residual(&sys, &w("ab"), &w("ab")) < 1e-12);
    }

    #[test]
    fn dimension_axiom_temperley_lieb_and_spin() {
        let tl = TemperleyLieb::new(q(0.6));
        let spin = IntegerSpin::new(q(0.6));
        for n in 0..20u32 {
            for m in 0..20u32 {
                let r = dimension_identity_residual(&tl, &n, &m);
                assert!(r <= 1e-9 * tl.qdim(&n) * tl.qdim(&m));
                if n % 2 == 0 && m % 2 == 0 {
                    assert!(spin.decompose(&n, &m).iter().all(|(k, _)| k % 2 == 0));
                }
            }
        }
        assert!(spin.parse_label("3").is_err());
        assert_eq!(spin.parse_label("4").unwrap(), 4);
    }

    #[test]
    fn frobenius_reciprocity() {
        let sys = FreeUnitary::new(q(0.5));
        let words: Vec<Word> = Word::all_up_to(3).collect();
        for x in &words {
            for y in &words {
                for z in &words {
                    assert_eq!(
                        sys.multiplicity(x, y, z),
                        sys.multiplicity(&x.involute(), z, y),
                        "{x} {y} {z}"
                    );
                }
            }
        }
        let tl = TemperleyLieb::new(q(0.5));
        for x in 0..6 {
            for y in 0..6 {
                for z in 0..12 {
                    assert_eq!(tl.multiplicity(&x, &y, &z), tl.multiplicity(&x, &z, &y));
                }
            }
        }
    }

    #[test]
    fn multiplicity_shortcut_agrees_with_decompose() {
        let sys = FreeUnitary::new(q(0.5));
        let words: Vec<Word> = Word::all_up_to(3).collect();
        for x in &words {
            for y in &words {
                let dec = sys.decompose(x, y);
                for z in Word::all_up_to(6) {
                    let via_dec = dec.iter().filter(|(s, _)| *s == z).count() as u32;
                    assert_eq!(sys.multiplicity(x, y, &z), via_dec);
                }
            }
        }
    }

    #[test]
    fn summands_graded_and_multiplicity_free() {
        for x in Word::all_up_to(5) {
            for y in Word::all_up_to(5) {
                let s = FreeUnitary::summands(&x, &y);
                for (j, z) in s.iter().enumerate() {
                    assert_eq!(z.len(), x.len() + y.len() - 2 * j);
                }
            }
        }
    }

    #[test]
    fn dimension_inequalities() {
        for qq in [0.3, 0.5, 0.8] {
            let qp = q(qq);
            for z in Word::all_up_to(8) {
                let dz = FreeUnitary::word_dim(&z, qp);
                for k in 0..=z.len() {
                    let z0 = z.prefix(z.len() - k);
                    let bound = qq.powi(-(k as i32)) * FreeUnitary::word_dim(&z0, qp);
                    assert!(dz >= bound * (1.0 - 1e-12), "{z} split {k}");
                }
            }
            for z0 in Word::all_up_to(4) {
                for y0 in Word::all_up_to(4) {
                    let lhs = FreeUnitary::word_dim(&z0.concat(&y0), qp);
                    let rhs = FreeUnitary::word_dim(&z0, qp) * FreeUnitary::word_dim(&y0, qp);
                    assert!(lhs <= rhs * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn classical_dims() {
        let sys = FreeUnitary::new(q(0.5));
        assert_eq!(sys.classical_dim(&w("e")), 1.0);
        assert_eq!(sys.classical_dim(&w("a")), 2.0);
        assert_eq!(sys.classical_dim(&w("ab")), 3.0);
        assert_eq!(sys.classical_dim(&w("aa")), 4.0);
        assert_eq!(TemperleyLieb::new(q(0.5)).classical_dim(&3), 4.0);
    }
}
