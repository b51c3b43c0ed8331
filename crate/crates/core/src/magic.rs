//! L1-norm magic, fourth-moment Pauli sums and the lower bound linking them.
//!
//! All `d^{2n}` expectations `⟨ψ|X^r Z^s|ψ⟩` are produced shift by shift:
//! for a fixed shift vector `r`, `f_r[j] = conj(ψ[j+r])·ψ[j]` and the
//! expectations over every `s` are the `n`-dimensional discrete Fourier
//! transform of `f_r` (a Walsh–Hadamard transform at `d = 2`). The cost is
//! `O(n·d·d^{2n})` time and `O(dⁿ)` memory per worker.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, MagicError, Result};
use crate::pauli::{classify_site, fourth_power_phase, SiteClass, SitePauli};

/// Accepted deviation of `‖ψ‖` from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Slack in the per-state inequality `M ≥ d^{n/2}/√Σ|⟨P⟩|⁴`.
pub const BOUND_SLACK: f64 = 1e-10;
/// Slack in `‖v‖₁ ≥ 1/‖v‖₄²`.
pub const NORM_INEQUALITY_SLACK: f64 = 1e-12;

/// Number of qudits `n` with `dⁿ = len`.
pub fn qudit_count(len: usize, d: usize) -> Result<usize> {
    if d < 2 {
        return domain(format!("local dimension d = {d} < 2"));
    }
    let mut n = 0;
    let mut size = 1usize;
    while size < len {
        size = size.checked_mul(d).ok_or_else(|| MagicError::Domain("state too large".into()))?;
        n += 1;
    }
    if size != len || n == 0 {
        return domain(format!("state length {len} is not a positive power of d = {d}"));
    }
    Ok(n)
}

fn check_normalized(state: &[Complex64]) -> Result<()> {
    let norm = state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(MagicError::Unnormalized(norm));
    }
    Ok(())
}

fn roots_of_unity(d: usize) -> Vec<Complex64> {
    (0..d).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)).collect()
}

/// Scratch state for evaluating one shift vector at a time.
struct ShiftKernel<'a> {
    state: &'a [Complex64],
    d: usize,
    n: usize,
    roots: Vec<Complex64>,
}

impl<'a> ShiftKernel<'a> {
    fn new(state: &'a [Complex64], d: usize, n: usize) -> Self {
        ShiftKernel { state, d, n, roots: roots_of_unity(d) }
    }

    /// Fills `buf[s] = ⟨ψ|X^r Z^s|ψ⟩` for every `s` (mixed radix, site 1
    /// most significant) at the shift with mixed-radix index `shift`.
    fn expectations(&self, shift: usize, buf: &mut [Complex64], tmp: &mut [Complex64]) {
        let (d, n) = (self.d, self.n);
        let dim = self.state.len();
        let mut digits = vec![0usize; n];
        let mut rdig = vec![0usize; n];
        let mut rest = shift;
        for k in (0..n).rev() {
            rdig[k] = rest % d;
            rest /= d;
        }
        for (j, slot) in buf.iter_mut().enumerate().take(dim) {
            if j > 0 {
                for k in (0..n).rev() {
                    digits[k] += 1;
                    if digits[k] < d {
                        break;
                    }
                    digits[k] = 0;
                }
            }
            let target = digits.iter().zip(&rdig).fold(0usize, |acc, (&x, &r)| acc * d + (x + r) % d);
            *slot = self.state[target].conj() * self.state[j];
        }
        let mut stride = 1usize;
        for _ in 0..n {
            let block = stride * d;
            for base in (0..dim).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    if d == 2 {
                        let (a, b) = (buf[start], buf[start + stride]);
                        buf[start] = a + b;
                        buf[start + stride] = a - b;
                        continue;
                    }
                    for (s, slot) in tmp.iter_mut().enumerate().take(d) {
                        *slot = (0..d).map(|t| self.roots[(s * t) % d] * buf[start + t * stride]).sum();
                    }
                    for s in 0..d {
                        buf[start + s * stride] = tmp[s];
                    }
                }
            }
            stride = block;
        }
    }
}

/// Sums over every string of `|E|`, `|E|²` and `|E|⁴`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PauliMoments {
    pub n: usize,
    pub d: usize,
    pub abs_sum: f64,
    pub square_sum: f64,
    pub fourth_sum: f64,
}

/// Runs `f(shift, expectations)` for every shift in parallel, returning
/// per-shift results in shift order.
fn map_shifts<T: Send>(
    state: &[Complex64],
    d: usize,
    n: usize,
    f: impl Fn(usize, &[Complex64]) -> T + Sync,
) -> Vec<T> {
    let kernel = ShiftKernel::new(state, d, n);
    (0..state.len())
        .into_par_iter()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); state.len()], vec![Complex64::new(0.0, 0.0); d]),
            |(buf, tmp), shift| {
                kernel.expectations(shift, buf, tmp);
                f(shift, buf)
            },
        )
        .collect()
}

/// Pairwise summation in a fixed tree order, independent of thread count.
fn pairwise_sum<const K: usize>(parts: &[[f64; K]]) -> [f64; K] {
    match parts.len() {
        0 => [0.0; K],
        1 => parts[0],
        len => {
            let (l, r) = parts.split_at(len / 2);
            let (a, b) = (pairwise_sum(l), pairwise_sum(r));
            std::array::from_fn(|i| a[i] + b[i])
        }
    }
}

/// Moments of the Pauli spectrum without a normalization check.
pub fn pauli_moments(state: &[Complex64], d: usize) -> Result<PauliMoments> {
    let n = qudit_count(state.len(), d)?;
    let parts = map_shifts(state, d, n, |_, e| {
        let mut acc = [0.0f64; 3];
        for z in e {
            let sq = z.norm_sqr();
            acc[0] += sq.sqrt();
            acc[1] += sq;
            acc[2] += sq * sq;
        }
        acc
    });
    let [abs_sum, square_sum, fourth_sum] = pairwise_sum(&parts);
    Ok(PauliMoments { n, d, abs_sum, square_sum, fourth_sum })
}

/// All `d^{2n}` expectations, indexed as [`crate::pauli::PauliString::from_index`].
pub fn pauli_expectations(state: &[Complex64], d: usize) -> Result<Vec<Complex64>> {
    let n = qudit_count(state.len(), d)?;
    let dim = state.len();
    let rows = map_shifts(state, d, n, |_, e| e.to_vec());
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (shift, row) in rows.iter().enumerate() {
        for (s, val) in row.iter().enumerate() {
            let (mut r, mut ss, mut idx, mut place) = (shift, s, 0usize, 1usize);
            for _ in 0..n {
                idx += ((r % d) * d + ss % d) * place;
                place *= d * d;
                r /= d;
                ss /= d;
            }
            out[idx] = *val;
        }
    }
    Ok(out)
}

/// `M(ψ) = d^{−n} Σ_a |⟨ψ|P_a|ψ⟩|`.
pub fn magic_l1(state: &[Complex64], d: usize) -> Result<f64> {
    Ok(magic_report(state, d)?.magic_l1)
}

/// `Σ_a |⟨ψ|P_a|ψ⟩|⁴`.
pub fn fourth_moment_sum(state: &[Complex64], d: usize) -> Result<f64> {
    Ok(magic_report(state, d)?.fourth_moment_sum)
}

/// `d^{n/2} / √sum`.
pub fn magic_lower_bound(fourth_moment_sum: f64, n: usize, d: usize) -> Result<f64> {
    if fourth_moment_sum.is_nan() || fourth_moment_sum <= 0.0 || fourth_moment_sum.is_infinite() {
        return domain(format!("fourth-moment sum must be positive, got {fourth_moment_sum}"));
    }
    if d < 2 {
        return domain(format!("local dimension d = {d} < 2"));
    }
    Ok((d as f64).powf(n as f64 / 2.0) / fourth_moment_sum.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MagicReport {
    pub n: usize,
    pub d: usize,
    pub magic_l1: f64,
    pub fourth_moment_sum: f64,
    pub lower_bound: f64,
    pub log_d_magic: f64,
}

impl MagicReport {
    pub fn bound_holds(&self) -> bool {
        self.magic_l1 >= self.lower_bound - BOUND_SLACK
    }

    /// Stabilizer Rényi entropy of order 1/2, `2 ln M`.
    pub fn renyi_half(&self) -> f64 {
        2.0 * self.magic_l1.ln()
    }

    /// Stabilizer Rényi entropy of order 2, `−ln(d^{−n} Σ|⟨P⟩|⁴)`.
    pub fn renyi_two(&self) -> f64 {
        -(self.fourth_moment_sum / (self.d as f64).powi(self.n as i32)).ln()
    }
}

/// Magic, fourth-moment sum and the derived bound of a normalized state.
pub fn magic_report(state: &[Complex64], d: usize) -> Result<MagicReport> {
    let n = qudit_count(state.len(), d)?;
    check_normalized(state)?;
    let m = pauli_moments(state, d)?;
    let dn = (d as f64).powi(n as i32);
    let magic = m.abs_sum / dn;
    Ok(MagicReport {
        n,
        d,
        magic_l1: magic,
        fourth_moment_sum: m.fourth_sum,
        lower_bound: magic_lower_bound(m.fourth_sum, n, d)?,
        log_d_magic: magic.ln() / (d as f64).ln(),
    })
}

/// `Σ_{non-null a} Re(⟨ψ|P_a|ψ⟩⁴ · ω^{−e(a)})` where `ω^{e(a)}` is the phase
/// of `tr P_a⁴ / dⁿ`. Its Haar mean over unnormalized RMPSs is the transfer-
/// matrix moment sum; null strings have zero mean and are skipped.
pub fn phase_corrected_fourth_moment(state: &[Complex64], d: usize) -> Result<f64> {
    let n = qudit_count(state.len(), d)?;
    let roots = roots_of_unity(d);
    // site table indexed by r·d + s: phase exponent, or None for Null sites
    let site: Vec<Option<usize>> = (0..d * d)
        .map(|a| {
            let p = SitePauli::new(d as u32, (a / d) as u32, (a % d) as u32).expect("d ≥ 2");
            (classify_site(&p) != SiteClass::Null).then(|| fourth_power_phase(&p) as usize)
        })
        .collect();
    let parts = map_shifts(state, d, n, |shift, e| {
        let mut rdig = vec![0usize; n];
        let mut rest = shift;
        for k in (0..n).rev() {
            rdig[k] = rest % d;
            rest /= d;
        }
        let mut acc = 0.0;
        'strings: for (s, z) in e.iter().enumerate() {
            let mut phase = 0usize;
            let mut rest = s;
            for k in (0..n).rev() {
                match site[rdig[k] * d + rest % d] {
                    Some(p) => phase += p,
                    None => continue 'strings,
                }
                rest /= d;
            }
            acc += (z.powu(4) * roots[(d - phase % d) % d]).re;
        }
        [acc]
    });
    Ok(pairwise_sum(&parts)[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `‖v‖₁ ≥ 1/‖v‖₄²` for a unit vector `v`.
pub fn norm_inequality_check(v: &[Complex64]) -> Result<NormInequality> {
    if v.is_empty() {
        return domain("empty vector");
    }
    check_normalized(v)?;
    let lhs: f64 = v.iter().map(|z| z.norm()).sum();
    let four: f64 = v.iter().map(|z| z.norm_sqr().powi(2)).sum();
    let rhs = 1.0 / four.sqrt();
    Ok(NormInequality { lhs, rhs, holds: lhs >= rhs - NORM_INEQUALITY_SLACK })
}
