//! Minimal idempotents in finite-dimensional convex semigroups of
//! contractions, and the Choi–Effros product on the image of a ucp
//! idempotent.
//!
//! Matrices act on column vectors. For maps on `M_n` the coordinate vector
//! of `X` is its row-major flattening, so `X ↦ AXB` is `A ⊗ Bᵀ`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Slack on the operator norm of a plain contraction.
pub const NORM_SLACK: f64 = 1e-12;
/// Eigenvalue and unitality tolerance for ucp checks.
pub const UCP_TOL: f64 = 1e-10;
/// Eigenvalue tolerance of [`precedes`].
pub const PRECEDES_TOL: f64 = 1e-10;
/// Above this dimension spectral projections are replaced by averaging.
pub const DENSE_LIMIT: usize = 512;

const KERNEL_TOL: f64 = 1e-8;

pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn min_hermitian_eigenvalue(h: &CMatrix) -> f64 {
    let sym = (h + h.adjoint()).scale(0.5);
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// `n` with `n² = d`, if any.
fn matrix_side(d: usize) -> Option<usize> {
    let n = (d as f64).sqrt().round() as usize;
    (n * n == d).then_some(n)
}

/// Row-major flattening of an `n × n` matrix.
pub fn vectorize(x: &CMatrix) -> nalgebra::DVector<C64> {
    let n = x.nrows();
    nalgebra::DVector::from_fn(n * x.ncols(), |k, _| x[(k / n, k % n)])
}

pub fn unvectorize(v: &nalgebra::DVector<C64>, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// Apply a map on `M_n`, given on coordinate vectors, to `x`.
pub fn apply_map(s: &CMatrix, x: &CMatrix) -> CMatrix {
    unvectorize(&(s * vectorize(x)), x.nrows())
}

/// Choi matrix `Σ E_ij ⊗ Φ(E_ij)` of a map on `M_n`.
pub fn choi_matrix(s: &CMatrix, n: usize) -> CMatrix {
    CMatrix::from_fn(n * n, n * n, |r, c| {
        let (i, k) = (r / n, r % n);
        let (j, l) = (c / n, c % n);
        s[(k * n + l, i * n + j)]
    })
}

/// Why `s` fails to be a unital completely positive map on `M_n`, if it
/// does.
fn ucp_defect(s: &CMatrix, n: usize) -> Option<String> {
    let choi = choi_matrix(s, n);
    let skew = operator_norm(&(&choi - choi.adjoint()));
    if skew > UCP_TOL {
        return Some(format!("Choi matrix not Hermitian (defect {skew:e})"));
    }
    let low = min_hermitian_eigenvalue(&choi);
    if low < -UCP_TOL {
        return Some(format!("Choi matrix has eigenvalue {low:e}"));
    }
    let id = CMatrix::identity(n, n);
    let unit = (apply_map(s, &id) - &id).norm();
    if unit > UCP_TOL {
        return Some(format!("unit moved by {unit:e}"));
    }
    None
}

/// Generators of a convex semigroup of contractions on `C^d`.
#[derive(Clone, Debug)]
pub struct ContractionFamily {
    dim: usize,
    maps: Vec<CMatrix>,
    ucp: bool,
}

impl ContractionFamily {
    /// Plain contractions: every operator norm at most `1 + 1e-12`.
    pub fn new(dim: usize, maps: Vec<CMatrix>) -> Result<Self> {
        Self::build(dim, maps, false)
    }

    /// Unital completely positive maps on `M_n`, `n² = dim`, checked through
    /// their Choi matrices.
    pub fn ucp(dim: usize, maps: Vec<CMatrix>) -> Result<Self> {
        Self::build(dim, maps, true)
    }

    fn build(dim: usize, maps: Vec<CMatrix>, ucp: bool) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let side = if ucp {
            Some(matrix_side(dim).ok_or_else(|| Error::NotUcp {
                index: 0,
                reason: format!("dimension {dim} is not a square"),
            })?)
        } else {
            None
        };
        for (index, m) in maps.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: if m.nrows() != dim { m.nrows() } else { m.ncols() },
                });
            }
            match side {
                Some(n) => {
                    if let Some(reason) = ucp_defect(m, n) {
                        return Err(Error::NotUcp { index, reason });
                    }
                }
                None => {
                    let norm = operator_norm(m);
                    if norm > 1.0 + NORM_SLACK {
                        return Err(Error::NotContractive { index, norm });
                    }
                }
            }
        }
        Ok(ContractionFamily { dim, maps, ucp })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn maps(&self) -> &[CMatrix] {
        &self.maps
    }

    pub fn is_ucp(&self) -> bool {
        self.ucp
    }

    /// `n` for a ucp family on `M_n`.
    pub fn matrix_side(&self) -> Option<usize> {
        if self.ucp {
            matrix_side(self.dim)
        } else {
            None
        }
    }

    pub fn average(&self) -> CMatrix {
        let sum = self
            .maps
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, m| acc + m);
        sum.scale(1.0 / self.maps.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdempotentResult {
    pub matrix: CMatrix,
    /// `‖E² − E‖`.
    pub idempotency_residual: f64,
    /// `max_ψ ‖EψE − E‖` over the generators considered.
    pub minimality_residual: f64,
    pub log: Vec<String>,
    pub converged: bool,
    /// Both residuals within tolerance and the procedure converged.
    pub certified: bool,
}

fn minimality(e: &CMatrix, gens: &[CMatrix]) -> f64 {
    gens.iter()
        .map(|g| operator_norm(&(e * g * e - e)))
        .fold(0.0, f64::max)
}

/// Projection onto `ker(ψ − I)` along `ran(ψ − I)`, or `None` when the
/// eigenproblem is too ill-conditioned to trust.
fn spectral_projection(psi: &CMatrix) -> Option<CMatrix> {
    let d = psi.nrows();
    let shifted = psi - CMatrix::identity(d, d);
    let svd = shifted.svd(true, true);
    let (u, vt) = (svd.u?, svd.v_t?);
    let small: Vec<usize> = (0..d)
        .filter(|&i| svd.singular_values[i] <= KERNEL_TOL)
        .collect();
    if small.is_empty() {
        return Some(CMatrix::zeros(d, d));
    }
    // right kernel K from V, left kernel L from U
    let k = CMatrix::from_fn(d, small.len(), |r, c| vt[(small[c], r)].conj());
    let l = CMatrix::from_fn(d, small.len(), |r, c| u[(r, small[c])]);
    let gram = l.adjoint() * &k;
    let sv = gram.clone().svd(false, false).singular_values;
    if sv.min() < KERNEL_TOL * sv.max().max(1.0) {
        return None;
    }
    let inv = gram.try_inverse()?;
    Some(&k * inv * l.adjoint())
}

/// `((I + ψ)/2)^{2^k}`: same fixed space as `ψ`, every other eigenvalue
/// strictly inside the disc.
fn averaged_powers(psi: &CMatrix, tol: f64, log: &mut Vec<String>) -> (CMatrix, bool) {
    let d = psi.nrows();
    let mut t = (psi + CMatrix::identity(d, d)).scale(0.5);
    for k in 1..=64 {
        let sq = &t * &t;
        let r = operator_norm(&(&sq - &t));
        t = sq;
        if r <= tol {
            log.push(format!("averaging converged after {k} squarings"));
            return (t, true);
        }
    }
    log.push("averaging budget exhausted".to_string());
    (t, false)
}

fn cesaro_core(psi: &CMatrix, tol: f64) -> IdempotentResult {
    let mut log = Vec::new();
    let projected = if psi.nrows() <= DENSE_LIMIT {
        spectral_projection(psi)
    } else {
        None
    };
    let (e, mut converged) = match projected {
        Some(e) => {
            log.push(format!("spectral projection, rank {}", e.rank(1e-9)));
            (e, true)
        }
        None => {
            log.push("spectral projection unavailable, averaging".to_string());
            averaged_powers(psi, tol, &mut log)
        }
    };
    let idem = operator_norm(&(&e * &e - &e));
    if idem > tol {
        converged = false;
        log.push(format!("idempotency residual {idem:e} above tolerance"));
    }
    let min = minimality(&e, std::slice::from_ref(psi));
    IdempotentResult {
        matrix: e,
        idempotency_residual: idem,
        minimality_residual: min,
        certified: converged && min <= tol,
        log,
        converged,
    }
}

/// The mean-ergodic limit `lim (1/n) Σ_{k=1}^n ψᵏ` of a contraction.
pub fn cesaro_idempotent(psi: &CMatrix, tol: f64) -> Result<IdempotentResult> {
    if psi.nrows() != psi.ncols() {
        return Err(Error::DimensionMismatch {
            expected: psi.nrows(),
            got: psi.ncols(),
        });
    }
    let norm = operator_norm(psi);
    if norm > 1.0 + NORM_SLACK {
        return Err(Error::NotContractive { index: 0, norm });
    }
    Ok(cesaro_core(psi, tol))
}

/// `φ ≺ ψ`, i.e. `‖φx‖ ≤ ‖ψx‖` for every `x`: `ψ*ψ − φ*φ ⪰ 0`.
///
/// Panics when the shapes differ.
pub fn precedes(phi: &CMatrix, psi: &CMatrix) -> bool {
    assert_eq!(phi.shape(), psi.shape(), "precedes needs equal shapes");
    if phi.is_empty() {
        return true;
    }
    let gap = psi.adjoint() * psi - phi.adjoint() * phi;
    min_hermitian_eigenvalue(&gap) >= -PRECEDES_TOL
}

fn strictly_precedes(phi: &CMatrix, psi: &CMatrix) -> bool {
    precedes(phi, psi) && !precedes(psi, phi)
}

/// Descend from the Cesàro idempotent of the generator average: for each
/// generator `ψ`, replace `E` by the Cesàro idempotent of `EψE` when that
/// is strictly smaller. The minimality residual is the certificate.
pub fn minimal_idempotent(fam: &ContractionFamily, tol: f64, budget: usize) -> IdempotentResult {
    let start = cesaro_core(&fam.average(), tol);
    let mut log = start.log.clone();
    log.insert(0, format!("start: Cesàro idempotent of the average of {} maps", fam.maps().len()));
    let mut e = start.matrix;
    let mut converged = start.converged;
    let mut settled = false;
    for round in 1..=budget {
        let mut improved = false;
        for (i, psi) in fam.maps().iter().enumerate() {
            let f = cesaro_core(&(&e * psi * &e), tol);
            if f.converged && strictly_precedes(&f.matrix, &e) {
                log.push(format!("round {round}: descended along map {i}"));
                e = f.matrix;
                improved = true;
            }
        }
        if !improved {
            log.push(format!("round {round}: no strict descent"));
            settled = true;
            break;
        }
    }
    if !settled {
        log.push(format!("budget of {budget} rounds exhausted"));
        converged = false;
    }
    let idem = operator_norm(&(&e * &e - &e));
    let min = minimality(&e, fam.maps());
    let certified = converged && idem <= tol && min <= tol;
    if !certified {
        log.push(format!("not certified: idempotency {idem:e}, minimality {min:e}"));
    }
    IdempotentResult {
        matrix: e,
        idempotency_residual: idem,
        minimality_residual: min,
        log,
        converged,
        certified,
    }
}

/// Cesàro idempotent of the generator average, with the minimality
/// residual taken over every generator.
pub fn family_cesaro(fam: &ContractionFamily, tol: f64) -> IdempotentResult {
    let mut r = cesaro_core(&fam.average(), tol);
    r.minimality_residual = minimality(&r.matrix, fam.maps());
    r.certified = r.converged && r.minimality_residual <= tol;
    r
}

/// Choi–Effros product `E(ab)` of two elements of the image of a ucp
/// idempotent `E` on `M_n`.
pub fn choi_effros_product(e: &CMatrix, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    for m in [a, b] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.ncols(),
            });
        }
    }
    if e.nrows() != n * n || e.ncols() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: e.nrows(),
        });
    }
    let idem = operator_norm(&(e * e - e));
    if idem > UCP_TOL {
        return Err(Error::NotIdempotent(idem));
    }
    if let Some(reason) = ucp_defect(e, n) {
        return Err(Error::NotUcp { index: 0, reason });
    }
    for m in [a, b] {
        let r = (apply_map(e, m) - m).norm();
        if r > UCP_TOL {
            return Err(Error::NotInImage(r));
        }
    }
    Ok(apply_map(e, &(a * b)))
}

/// Row-major matrix with optional imaginary part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let re = (0..m.len()).map(|k| m[(k / m.ncols(), k % m.ncols())].re).collect();
        let im: Vec<f64> = (0..m.len()).map(|k| m[(k / m.ncols(), k % m.ncols())].im).collect();
        MatrixDoc {
            re,
            im: im.iter().any(|v| *v != 0.0).then_some(im),
        }
    }

    pub fn to_matrix(&self, rows: usize, cols: usize) -> Result<CMatrix> {
        let len = rows * cols;
        if self.re.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: self.re.len(),
            });
        }
        if let Some(im) = &self.im {
            if im.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    got: im.len(),
                });
            }
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let k = i * cols + j;
            C64::new(self.re[k], self.im.as_ref().map_or(0.0, |im| im[k]))
        }))
    }
}

/// Family input document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub dimension: usize,
    #[serde(default)]
    pub ucp: bool,
    pub matrices: Vec<MatrixDoc>,
    /// Operands of a Choi–Effros product, `n × n` with `n² = dimension`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixDoc>,
}

impl FamilyDoc {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn family(&self) -> Result<ContractionFamily> {
        let maps = self
            .matrices
            .iter()
            .map(|m| m.to_matrix(self.dimension, self.dimension))
            .collect::<Result<Vec<_>>>()?;
        if self.ucp {
            ContractionFamily::ucp(self.dimension, maps)
        } else {
            ContractionFamily::new(self.dimension, maps)
        }
    }

    pub fn from_family(fam: &ContractionFamily) -> Self {
        FamilyDoc {
            dimension: fam.dim(),
            ucp: fam.is_ucp(),
            matrices: fam.maps().iter().map(MatrixDoc::from_matrix).collect(),
            a: None,
            b: None,
        }
    }
}

/// Result output document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub dimension: usize,
    pub matrix: MatrixDoc,
    pub idempotency_residual: f64,
    pub minimality_residual: f64,
    pub converged: bool,
    pub certified: bool,
    pub log: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<MatrixDoc>,
}

impl From<&IdempotentResult> for ResultDoc {
    fn from(r: &IdempotentResult) -> Self {
        ResultDoc {
            dimension: r.matrix.nrows(),
            matrix: MatrixDoc::from_matrix(&r.matrix),
            idempotency_residual: r.idempotency_residual,
            minimality_residual: r.minimality_residual,
            converged: r.converged,
            certified: r.certified,
            log: r.log.clone(),
            product: None,
        }
    }
}

/// Unitary conjugation `X ↦ UXU*` on coordinate vectors: `U ⊗ Ū`.
pub fn conjugation_map(u: &CMatrix) -> CMatrix {
    u.kronecker(&u.map(|z| z.conj()))
}

/// The permutation matrix of `i ↦ i + 1 mod n`.
pub fn cyclic_shift(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == (j + 1) % n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
