//! Truncated Fourier-Galerkin matrices for `D^{2m} + V`.
//!
//! In the exponential basis the form matrix and the operator matrix coincide:
//! `A[j][k] = (pi f_j)^{2m} [j = k] + V(f_j - f_k)` where `f_j` is the physical
//! frequency of row `j`. The basis is orthonormal on its own interval, so no
//! mass matrix appears.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::potentials::{check_parity_pure, materialize, PotentialSpec};
use crate::seqspace::{conv_gate, CoeffSeq, FreqLattice, Parity};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    #[serde(rename = "plus")]
    SPlus,
    #[serde(rename = "minus")]
    SMinus,
    #[serde(rename = "full")]
    SFull,
}

impl OperatorKind {
    pub fn parity(self) -> Parity {
        match self {
            OperatorKind::SPlus => Parity::PeriodicPlus,
            OperatorKind::SMinus => Parity::SemiperiodicMinus,
            OperatorKind::SFull => Parity::FullTwoPeriodic,
        }
    }

    pub fn lattice(self, half_width: usize) -> Result<FreqLattice> {
        FreqLattice::new(self.parity(), half_width)
    }

    pub fn as_str(self) -> &'static str {
        self.parity().as_str()
    }

    /// Plus-lattice window a potential needs so every matrix entry of this
    /// kind at `half_width` is represented.
    pub fn coverage(self, half_width: usize) -> Result<FreqLattice> {
        match self {
            OperatorKind::SPlus | OperatorKind::SMinus => FreqLattice::plus(2 * half_width),
            OperatorKind::SFull => FreqLattice::plus(half_width),
        }
    }
}

/// `(pi p)^{2m}`; the same expression serves every lattice so equal physical
/// frequencies produce bit-identical entries.
pub fn free_symbol(phys: i64, m: u32) -> f64 {
    (PI * phys as f64).powi(2 * m as i32)
}

pub fn free_diagonal(kind: OperatorKind, m: u32, lattice: FreqLattice) -> Result<Vec<f64>> {
    if lattice.parity() != kind.parity() {
        return Err(Error::Domain(format!(
            "operator {} cannot act on the {} lattice",
            kind.as_str(),
            lattice.parity().as_str()
        )));
    }
    Ok(lattice.phys_list().into_iter().map(|p| free_symbol(p, m)).collect())
}

/// Toeplitz-by-frequency matrix `M[j][k] = V(p_j - p_k)` on an arbitrary
/// list of physical frequencies.
pub fn multiplication_on_phys(v: &CoeffSeq, phys: &[i64]) -> Result<CMatrix> {
    check_parity_pure(v)?;
    let n = phys.len();
    Ok(CMatrix::from_fn(n, n, |j, k| v.at_phys(phys[j] - phys[k])))
}

pub fn multiplication_matrix(v: &CoeffSeq, lattice: FreqLattice) -> Result<CMatrix> {
    multiplication_on_phys(v, &lattice.phys_list())
}

/// Galerkin matrix of `D^{2m} + V` restricted to the given frequencies.
pub fn galerkin_on_phys(m: u32, v: &CoeffSeq, phys: &[i64]) -> Result<CMatrix> {
    let mut a = multiplication_on_phys(v, phys)?;
    for (j, &p) in phys.iter().enumerate() {
        a[(j, j)] += Complex64::new(free_symbol(p, m), 0.0);
    }
    Ok(a)
}

#[derive(Debug, Clone)]
pub struct GalerkinMatrix {
    kind: OperatorKind,
    order: u32,
    lattice: FreqLattice,
    entries: CMatrix,
    potential: CoeffSeq,
    fingerprint: String,
}

pub fn fingerprint(v: &CoeffSeq) -> String {
    let mut hasher = Sha256::new();
    hasher.update(v.lattice().parity().as_str().as_bytes());
    hasher.update((v.half_width() as u64).to_le_bytes());
    for z in v.coeffs() {
        hasher.update(z.re.to_le_bytes());
        hasher.update(z.im.to_le_bytes());
    }
    hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl GalerkinMatrix {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn lattice(&self) -> FreqLattice {
        self.lattice
    }

    pub fn half_width(&self) -> usize {
        self.lattice.half_width()
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn potential(&self) -> &CoeffSeq {
        &self.potential
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// `max |A[j][k] - conj(A[k][j])|`.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.entries)
    }

    pub fn to_json(&self) -> GalerkinMatrixJson {
        let n = self.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                re.push(self.entries[(j, k)].re);
                im.push(self.entries[(j, k)].im);
            }
        }
        GalerkinMatrixJson {
            kind: self.kind,
            m: self.order,
            half_width: self.half_width(),
            re,
            im,
        }
    }

    /// Column-major dump, little-endian `f64`, real and imaginary parts interleaved.
    pub fn write_raw<W: Write>(&self, mut out: W) -> Result<()> {
        for z in self.entries.iter() {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in j..n {
            worst = worst.max((a[(j, k)] - a[(k, j)].conj()).norm());
        }
    }
    worst
}

/// Reads a column-major raw dump back into a square matrix.
pub fn read_raw(bytes: &[u8], dim: usize) -> Result<CMatrix> {
    if bytes.len() != dim * dim * 16 {
        return Err(Error::Dimension(format!(
            "raw dump has {} bytes, expected {} for dimension {dim}",
            bytes.len(),
            dim * dim * 16
        )));
    }
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok(CMatrix::from_vec(dim, dim, values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalerkinMatrixJson {
    pub kind: OperatorKind,
    pub m: u32,
    pub half_width: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Galerkin matrix of `S_kind(V)` at the given half-width. Coefficients of
/// `V` outside its own window count as zero.
pub fn assemble(kind: OperatorKind, m: u32, v: &CoeffSeq, half_width: usize) -> Result<GalerkinMatrix> {
    if m == 0 {
        return Err(Error::Domain("operator order m must be positive".into()));
    }
    let gate = conv_gate(m as f64, m as f64, m as f64)?;
    if !gate.licensed() {
        return Err(Error::Domain(format!("convolution gate refuses m = {m}")));
    }
    let lattice = kind.lattice(half_width)?;
    let entries = galerkin_on_phys(m, v, &lattice.phys_list())?;
    Ok(GalerkinMatrix {
        kind,
        order: m,
        lattice,
        entries,
        potential: v.clone(),
        fingerprint: fingerprint(v),
    })
}

/// Materializes `spec` on the covering window and assembles.
pub fn assemble_spec(kind: OperatorKind, m: u32, spec: &PotentialSpec, half_width: usize) -> Result<GalerkinMatrix> {
    let v = materialize(spec, kind.coverage(half_width)?)?;
    assemble(kind, m, &v, half_width)
}

/// Windows on which the 2-periodic operator splits exactly into the periodic
/// and semiperiodic ones.
///
/// The full lattice of half-width `2N + 1` holds the periodic frequencies
/// `-2N ..= 2N` (plus half-width `N`) and the odd frequencies
/// `-(2N+1) ..= 2N+1`. The semiperiodic lattice of half-width `N` covers only
/// `-(2N-1) ..= 2N+1`, so the odd block is the semiperiodic Galerkin matrix on
/// the reflection-symmetric odd window, see [`minus_symmetric_phys`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedWindows {
    pub plus: FreqLattice,
    pub minus: FreqLattice,
    pub full: FreqLattice,
}

pub fn matched_windows(half_width: usize) -> Result<MatchedWindows> {
    Ok(MatchedWindows {
        plus: FreqLattice::plus(half_width)?,
        minus: FreqLattice::minus(half_width)?,
        full: FreqLattice::full(2 * half_width + 1)?,
    })
}

/// Odd frequencies `-(2N+1), ..., -1, 1, ..., 2N+1` in increasing order.
pub fn minus_symmetric_phys(half_width: usize) -> Vec<i64> {
    let top = 2 * half_width as i64 + 1;
    (-top..=top).filter(|p| p.rem_euclid(2) == 1).collect()
}

/// Semiperiodic Galerkin matrix on the symmetric odd window of [`matched_windows`].
pub fn assemble_minus_symmetric(m: u32, v: &CoeffSeq, half_width: usize) -> Result<CMatrix> {
    galerkin_on_phys(m, v, &minus_symmetric_phys(half_width))
}

#[derive(Debug, Clone)]
pub struct ParityBlocks {
    pub plus: CMatrix,
    pub minus: CMatrix,
    /// Full-lattice slots, even frequencies first, then odd.
    pub perm: Vec<usize>,
    pub plus_phys: Vec<i64>,
    pub minus_phys: Vec<i64>,
}

/// Splits a full-lattice matrix into its even- and odd-frequency blocks after
/// checking that every coupling between them is exactly zero.
pub fn parity_blocks(a: &GalerkinMatrix) -> Result<ParityBlocks> {
    if a.kind() != OperatorKind::SFull {
        return Err(Error::Domain("parity blocks need a full-lattice operator".into()));
    }
    check_parity_pure(a.potential())?;
    let lattice = a.lattice();
    let phys = lattice.phys_list();
    let (even, odd): (Vec<usize>, Vec<usize>) = (0..phys.len()).partition(|&s| phys[s] % 2 == 0);
    let entries = a.entries();
    for &j in &even {
        for &k in &odd {
            if entries[(j, k)] != Complex64::new(0.0, 0.0) || entries[(k, j)] != Complex64::new(0.0, 0.0) {
                return Err(Error::Domain(format!(
                    "nonzero coupling between frequencies {} and {}",
                    phys[j], phys[k]
                )));
            }
        }
    }
    let block = |idx: &[usize]| CMatrix::from_fn(idx.len(), idx.len(), |r, c| entries[(idx[r], idx[c])]);
    Ok(ParityBlocks {
        plus: block(&even),
        minus: block(&odd),
        plus_phys: even.iter().map(|&s| phys[s]).collect(),
        minus_phys: odd.iter().map(|&s| phys[s]).collect(),
        perm: even.into_iter().chain(odd).collect(),
    })
}

/// `P^T A P` for a slot permutation.
pub fn permute(a: &CMatrix, perm: &[usize]) -> CMatrix {
    CMatrix::from_fn(perm.len(), perm.len(), |r, c| a[(perm[r], perm[c])])
}
