use std::cmp::Ordering;

use nalgebra::{Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::assembly::{CMatrix, GalerkinMatrix, OperatorKind};
use crate::error::{Error, Result};
use crate::wire;

const ITERATIONS_PER_ROW: usize = 200;

/// Precedence: smaller real part first, then smaller imaginary part.
/// Exact floating-point comparison; `-0.0` and `0.0` tie.
pub fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    match a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal) {
        Ordering::Equal => a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal),
        other => other,
    }
}

/// Stable lexicographic sort.
pub fn lex_sort(values: &[Complex64]) -> Vec<Complex64> {
    let mut out = values.to_vec();
    out.sort_by(lex_cmp);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverRoute {
    Diagonal,
    Hermitian,
    Schur,
}

/// Eigenpairs in lexicographic order; `vectors` column `j` belongs to `values[j]`.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
    pub route: SolverRoute,
    /// `max_j ||A v_j - lambda_j v_j|| / ||A||`, unit vectors.
    pub residual: f64,
    pub norm: f64,
}

fn is_diagonal(a: &CMatrix) -> bool {
    let n = a.nrows();
    (0..n).all(|j| (0..n).all(|k| j == k || a[(j, k)] == Complex64::new(0.0, 0.0)))
}

fn is_exactly_hermitian(a: &CMatrix) -> bool {
    let n = a.nrows();
    (0..n).all(|j| a[(j, j)].im == 0.0 && (j + 1..n).all(|k| a[(j, k)] == a[(k, j)].conj()))
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Eigenvectors of an upper-triangular matrix by back substitution; tiny
/// pivots are lifted to `eps * ||T||` so repeated eigenvalues stay finite.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let small = (f64::EPSILON * scale).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        y[(i, i)] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in j + 1..=i {
                acc += t[(j, l)] * y[(l, i)];
            }
            let mut pivot = t[(j, j)] - lambda;
            if pivot.norm() < small {
                pivot = Complex64::new(small, 0.0);
            }
            y[(j, i)] = -acc / pivot;
        }
    }
    y
}

fn normalize_columns(v: &mut CMatrix) {
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
    }
}

fn residual(a: &CMatrix, values: &[Complex64], vectors: &CMatrix, norm: f64) -> f64 {
    if norm == 0.0 {
        return 0.0;
    }
    let av = a * vectors;
    values
        .iter()
        .enumerate()
        .map(|(j, &lambda)| (av.column(j) - vectors.column(j) * lambda).norm() / norm)
        .fold(0.0, f64::max)
}

/// Dense eigendecomposition. Diagonal input returns its diagonal exactly;
/// exactly Hermitian input goes through the symmetric solver; everything else
/// through a complex Schur factorization.
pub fn eigen_decompose(a: &CMatrix) -> Result<EigenDecomp> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let max_iter = ITERATIONS_PER_ROW * n.max(1);
    let (values, vectors, route, norm) = if is_diagonal(a) {
        let values: Vec<Complex64> = (0..n).map(|j| a[(j, j)]).collect();
        let norm = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (values, CMatrix::identity(n, n), SolverRoute::Diagonal, norm)
    } else if is_exactly_hermitian(a) {
        let eig =
            SymmetricEigen::try_new(a.clone(), f64::EPSILON, max_iter).ok_or(Error::Solver { iterations: max_iter })?;
        let values: Vec<Complex64> = eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let norm = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
        (values, eig.eigenvectors, SolverRoute::Hermitian, norm)
    } else {
        let schur = Schur::try_new(a.clone(), f64::EPSILON, max_iter).ok_or(Error::Solver { iterations: max_iter })?;
        let (q, t) = schur.unpack();
        let values: Vec<Complex64> = (0..n).map(|j| t[(j, j)]).collect();
        let mut vectors = q * triangular_eigenvectors(&t);
        normalize_columns(&mut vectors);
        (values, vectors, SolverRoute::Schur, spectral_norm(a))
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lex_cmp(&values[i], &values[j]));
    let values: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    let residual = residual(a, &values, &vectors, norm);
    Ok(EigenDecomp {
        values,
        vectors,
        route,
        residual,
        norm,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    #[serde(with = "wire::pair_vec")]
    pub eigenvalues: Vec<Complex64>,
    pub kind: OperatorKind,
    pub m: u32,
    pub half_width: usize,
    pub fingerprint: String,
    pub residual: f64,
    /// Spectral norm of the assembled matrix.
    pub norm: f64,
    pub route: SolverRoute,
}

impl SpectrumReport {
    pub fn max_abs_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

pub fn eigen(a: &GalerkinMatrix) -> Result<SpectrumReport> {
    let dec = eigen_decompose(a.entries())?;
    Ok(SpectrumReport {
        eigenvalues: dec.values,
        kind: a.kind(),
        m: a.order(),
        half_width: a.half_width(),
        fingerprint: a.fingerprint().to_string(),
        residual: dec.residual,
        norm: dec.norm,
        route: dec.route,
    })
}
