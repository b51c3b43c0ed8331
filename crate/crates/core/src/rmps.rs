//! Haar-random unitaries and periodic random matrix product states.
//!
//! Site `j` carries a unitary `U_j ∈ U(dB)` acting on a physical `d`-level
//! system and a `B`-dimensional bond. The physical input is fixed to `|0⟩`,
//! which selects the site tensor `A^i[b', b] = ⟨i, b'|U|0, b⟩`, and the state
//! has amplitudes `ψ(i₁…iₙ) = tr[A₁^{i₁}⋯Aₙ^{iₙ}]`. Basis index `i₁` is the
//! most significant digit throughout the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, MagicError, Result};
use crate::pauli::checked_dim;

/// Largest entry of `U†U − I` accepted as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;
/// Raw norms below this cannot be normalized.
pub const ZERO_NORM_THRESHOLD: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A unitary on `C^d ⊗ C^B`, physical factor most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteUnitary {
    d: usize,
    b: usize,
    matrix: DMatrix<Complex64>,
}

impl SiteUnitary {
    pub fn new(d: usize, b: usize, matrix: DMatrix<Complex64>) -> Result<SiteUnitary> {
        if d < 2 || b < 1 {
            return domain(format!("site unitary needs d ≥ 2 and B ≥ 1, got d = {d}, B = {b}"));
        }
        let dim = d * b;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(MagicError::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        let dev = unitarity_deviation(&matrix);
        if dev > UNITARITY_TOLERANCE {
            return domain(format!("matrix is not unitary (max |U†U − I| = {dev:e})"));
        }
        Ok(SiteUnitary { d, b, matrix })
    }

    pub fn identity(d: usize, b: usize) -> Result<SiteUnitary> {
        SiteUnitary::new(d, b, DMatrix::identity(d * b, d * b))
    }

    /// A Haar-random site unitary.
    pub fn sample<R: Rng + ?Sized>(d: usize, b: usize, rng: &mut R) -> Result<SiteUnitary> {
        SiteUnitary::new(d, b, sample_haar_unitary(d * b, rng)?)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

/// `max |U†U − I|` over entries.
pub fn unitarity_deviation(u: &DMatrix<Complex64>) -> f64 {
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Haar-distributed `dim × dim` unitary: QR of a complex Ginibre matrix with
/// column `j` of `Q` rescaled by `r_jj / |r_jj|`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DMatrix<Complex64>> {
    if dim == 0 {
        return domain("unitary dimension must be at least 1");
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    loop {
        let z = DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        });
        let qr = z.qr();
        let r = qr.r();
        if (0..dim).any(|j| r[(j, j)].norm() < 1e-300) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..dim {
            let phase = r[(j, j)] / r[(j, j)].norm();
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        return Ok(q);
    }
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for site `site` of sample `sample` under `root_seed`. Depends only on
/// the three counters, so any scheduling of samples reproduces the ensemble.
pub fn sub_seed(root_seed: u64, sample: u64, site: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(root_seed) ^ sample) ^ site.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn site_rng(root_seed: u64, sample: u64, site: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(root_seed, sample, site))
}

/// The `n` site unitaries of sample `sample`.
pub fn sample_site_unitaries(
    n: usize,
    d: usize,
    b: usize,
    root_seed: u64,
    sample: u64,
) -> Result<Vec<SiteUnitary>> {
    (0..n).map(|j| SiteUnitary::sample(d, b, &mut site_rng(root_seed, sample, j as u64))).collect()
}

/// `A^i[b', b] = U[i·B + b', b]` for `i = 0..d`.
pub fn extract_site_tensor(u: &SiteUnitary) -> Vec<DMatrix<Complex64>> {
    let (d, b) = (u.d, u.b);
    (0..d).map(|i| DMatrix::from_fn(b, b, |bp, bb| u.matrix[(i * b + bp, bb)])).collect()
}

/// Same as [`extract_site_tensor`] for a bare matrix with a declared
/// `(d, B)` factorization.
pub fn extract_site_tensor_from(
    d: usize,
    b: usize,
    matrix: &DMatrix<Complex64>,
) -> Result<Vec<DMatrix<Complex64>>> {
    if matrix.nrows() != d * b || matrix.ncols() != d * b {
        return Err(MagicError::DimensionMismatch { expected: d * b, got: matrix.nrows() });
    }
    Ok(extract_site_tensor(&SiteUnitary { d, b, matrix: matrix.clone() }))
}

#[derive(Clone, Debug)]
pub struct RmpsState {
    pub n: usize,
    pub d: usize,
    pub b: usize,
    pub site_tensors: Vec<Vec<DMatrix<Complex64>>>,
    pub statevector: Vec<Complex64>,
    pub normalized: bool,
    /// Euclidean norm of the raw amplitudes.
    pub raw_norm: f64,
}

impl RmpsState {
    pub fn dim(&self) -> usize {
        self.statevector.len()
    }

    /// The unnormalized amplitudes, whatever `normalized` says.
    pub fn raw_amplitudes(&self) -> Vec<Complex64> {
        if self.normalized {
            self.statevector.iter().map(|a| a * self.raw_norm).collect()
        } else {
            self.statevector.clone()
        }
    }
}

/// Contracts the periodic MPS to its `dⁿ` amplitudes.
pub fn build_rmps(
    n: usize,
    d: usize,
    b: usize,
    unitaries: &[SiteUnitary],
    normalize: bool,
) -> Result<RmpsState> {
    if n < 2 {
        return domain(format!("an RMPS needs n ≥ 2 sites, got {n}"));
    }
    if unitaries.len() != n {
        return Err(MagicError::DimensionMismatch { expected: n, got: unitaries.len() });
    }
    if let Some(u) = unitaries.iter().find(|u| u.d != d || u.b != b) {
        return domain(format!("site unitary has (d, B) = ({}, {}), expected ({d}, {b})", u.d, u.b));
    }
    let tensors: Vec<_> = unitaries.iter().map(extract_site_tensor).collect();
    let mut statevector = contract_periodic(&tensors, d, b)?;
    let raw_norm = statevector.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if normalize {
        if raw_norm < ZERO_NORM_THRESHOLD {
            return Err(MagicError::ZeroNorm(raw_norm));
        }
        statevector.iter_mut().for_each(|a| *a /= raw_norm);
    }
    Ok(RmpsState { n, d, b, site_tensors: tensors, statevector, normalized: normalize, raw_norm })
}

/// Samples and builds one RMPS from counter-derived seeds.
pub fn sample_rmps(
    n: usize,
    d: usize,
    b: usize,
    root_seed: u64,
    sample: u64,
    normalize: bool,
) -> Result<RmpsState> {
    let us = sample_site_unitaries(n, d, b, root_seed, sample)?;
    build_rmps(n, d, b, &us, normalize)
}

/// Depth-first left fold: each internal node of the prefix tree holds
/// `A₁^{i₁}⋯A_k^{i_k}`, and the last site only needs `tr[P·A]`.
fn contract_periodic(tensors: &[Vec<DMatrix<Complex64>>], d: usize, b: usize) -> Result<Vec<Complex64>> {
    let n = tensors.len();
    let dim = checked_dim(d, n)?;
    let mut out = vec![ZERO; dim];
    let mut stack: Vec<DMatrix<Complex64>> = Vec::with_capacity(n);
    stack.push(DMatrix::identity(b, b));
    descend(tensors, 0, 0, &mut stack, &mut out);
    Ok(out)
}

fn descend(
    tensors: &[Vec<DMatrix<Complex64>>],
    site: usize,
    prefix: usize,
    stack: &mut Vec<DMatrix<Complex64>>,
    out: &mut [Complex64],
) {
    let n = tensors.len();
    let d = tensors[site].len();
    if site + 1 == n {
        let p = stack.last().expect("prefix stack is never empty");
        for (i, a) in tensors[site].iter().enumerate() {
            out[prefix * d + i] = trace_of_product(p, a);
        }
        return;
    }
    for (i, a) in tensors[site].iter().enumerate() {
        let next = stack.last().expect("prefix stack is never empty") * a;
        stack.push(next);
        descend(tensors, site + 1, prefix * d + i, stack, out);
        stack.pop();
    }
}

fn trace_of_product(p: &DMatrix<Complex64>, a: &DMatrix<Complex64>) -> Complex64 {
    let mut acc = ZERO;
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            acc += p[(r, c)] * a[(c, r)];
        }
    }
    acc
}

/// Debug dump of one state.
#[derive(Debug, Serialize)]
pub struct RmpsDump {
    pub n: usize,
    pub d: usize,
    pub b: usize,
    pub normalized: bool,
    pub raw_norm: f64,
    /// `[re, im]` pairs.
    pub statevector: Vec<[f64; 2]>,
    /// `site_tensors[j][i]` is `A_j^i` as rows of `[re, im]` pairs.
    pub site_tensors: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

impl From<&RmpsState> for RmpsDump {
    fn from(s: &RmpsState) -> RmpsDump {
        let pair = |z: &Complex64| [z.re, z.im];
        RmpsDump {
            n: s.n,
            d: s.d,
            b: s.b,
            normalized: s.normalized,
            raw_norm: s.raw_norm,
            statevector: s.statevector.iter().map(pair).collect(),
            site_tensors: s
                .site_tensors
                .iter()
                .map(|site| {
                    site.iter()
                        .map(|m| {
                            (0..m.nrows())
                                .map(|r| (0..m.ncols()).map(|c| pair(&m[(r, c)])).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}
