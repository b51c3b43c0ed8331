//! Numeric and closed-form spectra of the interaction blocks, and grid
//! verification of the spectral-radius bounds.

use std::io::Write;

use nalgebra::{linalg::Schur, DMatrix};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, MagicError, Result};
use crate::exact::Rational;
use crate::pauli::SiteClass;
use crate::polynomial::{named, Poly};
use crate::transfer::{build_block_variant, max_norm, site_sum_matrix, TransferBlock};
use crate::weingarten::WgVariant;

/// Largest tolerated `|Im λ|` relative to the block's max-norm.
pub const IMAG_TOLERANCE: f64 = 1e-9;
/// Slack allowed on bound and non-negativity comparisons.
pub const BOUND_SLACK: f64 = 1e-10;
/// Relative tolerance when reconciling closed forms with numeric spectra.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-9;

/// Deflation tolerances tried in turn by [`eigenvalues`].
const SCHUR_TOLERANCES: [f64; 4] = [f64::EPSILON, 1e-15, 1e-14, 1e-13];
const SCHUR_MAX_ITER: usize = 20_000;

/// Eigenvalues of a real square matrix from a real Schur decomposition with
/// a bounded iteration count, retried at looser deflation tolerances when
/// the QR iteration stalls.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    for eps in SCHUR_TOLERANCES {
        if let Some(schur) = Schur::try_new(m.clone(), eps, SCHUR_MAX_ITER) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(MagicError::Degenerate(format!(
        "Schur iteration did not converge for a {}x{} matrix",
        m.nrows(),
        m.ncols()
    )))
}

pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

pub(crate) fn check_grid_range(d_range: (i64, i64), b_range: (i64, i64)) -> Result<()> {
    for (name, (lo, hi)) in [("d", d_range), ("B", b_range)] {
        if lo < 2 || hi > 12 || lo > hi {
            return domain(format!("{name} range {lo}..{hi} must lie within 2..12"));
        }
    }
    Ok(())
}

/// Spectral-radius bound for a class: `1`, `2/d²` or `3/d³`.
pub fn radius_bound(class: SiteClass, d: u64) -> f64 {
    let d = d as f64;
    match class {
        SiteClass::Identity => 1.0,
        SiteClass::O1 => 2.0 / (d * d),
        SiteClass::O2 => 3.0 / (d * d * d),
        SiteClass::Null => 0.0,
    }
}

/// The sharper `1/d²` bound claimed for the `O1` block at `d = 2`.
pub fn refined_bound(class: SiteClass, d: u64) -> Option<f64> {
    (class == SiteClass::O1 && d == 2).then_some(0.25)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub d: u64,
    pub b: u64,
    pub class: SiteClass,
    pub variant: WgVariant,
    /// Real parts, sorted descending.
    pub eigenvalues: Vec<f64>,
    pub max_imag: f64,
    pub spectral_radius: f64,
    pub bound: f64,
    pub bound_satisfied: bool,
    pub refined_bound: Option<f64>,
    pub refined_satisfied: Option<bool>,
    pub min_eigenvalue: f64,
    pub nonnegative: bool,
}

impl SpectralReport {
    pub fn margin(&self) -> f64 {
        self.bound - self.spectral_radius
    }

    pub fn all_satisfied(&self) -> bool {
        self.bound_satisfied && self.nonnegative && self.refined_satisfied.unwrap_or(true)
    }
}

/// Full complex eigendecomposition of a block.
pub fn numeric_spectrum(block: &TransferBlock) -> Result<SpectralReport> {
    let eig = eigenvalues(&block.entries)?;
    let max_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let limit = IMAG_TOLERANCE * max_norm(block);
    if max_imag >= limit {
        return Err(MagicError::NonRealSpectrum { max_imag, limit });
    }
    let spectral_radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut eigenvalues: Vec<f64> = eig.iter().map(|z| z.re).collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let min_eigenvalue = *eigenvalues.last().expect("24 eigenvalues");
    let bound = radius_bound(block.class, block.d);
    let refined = refined_bound(block.class, block.d);
    Ok(SpectralReport {
        d: block.d,
        b: block.b,
        class: block.class,
        variant: block.variant,
        eigenvalues,
        max_imag,
        spectral_radius,
        bound,
        bound_satisfied: spectral_radius <= bound + BOUND_SLACK,
        refined_bound: refined,
        refined_satisfied: refined.map(|r| spectral_radius <= r + BOUND_SLACK),
        min_eigenvalue,
        nonnegative: min_eigenvalue >= -BOUND_SLACK,
    })
}

/// One printed eigenvalue formula `(P ± K·√A) / Q`.
#[derive(Clone, Copy, Debug)]
struct Formula {
    num: &'static str,
    root: Option<(i8, &'static str, &'static str)>,
    den: &'static str,
}

const fn rational(num: &'static str, den: &'static str) -> Formula {
    Formula { num, root: None, den }
}

const fn surd(
    num: &'static str,
    sign: i8,
    coeff: &'static str,
    radicand: &'static str,
    den: &'static str,
) -> Formula {
    Formula { num, root: Some((sign, coeff, radicand)), den }
}

const B_DEN3: &str = "B(B^2d^2-3)(B^2d^2-2)(B^2d^2-1)";

const IDENTITY_FORMULAS: [Formula; 9] = [
    rational("(B^5-5B^3+4B)d(B^2d^2-9)", B_DEN3),
    rational("(B^5-5B^3+4B)d^2(B^2d^2-9)", B_DEN3),
    rational("(B^3-B)(B^4d^4-13B^2d^2+36)", B_DEN3),
    rational("(B^2-1)d(B^4d^4-13B^2d^2+36)", named::DEN3),
    rational(named::RADIUS_IDENTITY_NUM, "(B^2d^2-3)(B^2d^2-2)"),
    surd(named::A1, -1, named::ROOT_COEFF, named::A2, named::A3),
    surd(named::A1, 1, named::ROOT_COEFF, named::A2, named::A3),
    surd(named::A4, -1, "(B^3-B)(d-1)d", named::A5, named::A6),
    surd(named::A4, 1, "(B^3-B)(d-1)d", named::A5, named::A6),
];

const O1_FORMULAS: [Formula; 6] = [
    rational("0", "1"),
    rational("(B^3-B)(d^3B^4-4d^2B^2-9dB^2+36)", B_DEN3),
    surd(named::C1, -1, named::ROOT_COEFF, named::C2, named::C3),
    surd(named::C1, 1, named::ROOT_COEFF, named::C2, named::C3),
    surd(named::C4, -1, "B(d-1)d", named::C5, named::C6),
    surd(named::C4, 1, "B(d-1)d", named::C5, named::C6),
];

const O2_FORMULAS: [Formula; 4] = [
    rational("0", "1"),
    rational("(B^3-B)(B^4d^3-4B^2d^2-9B^2d+36)", B_DEN3),
    rational("B^6d^3+5B^4d^3-20B^4d^2+B^4d-16B^2d^2+65B^2d-36", named::DEN3),
    rational("(B^3-B)(B^4d^4-2B^2d^3-11B^2d^2+18d+18)", "Bd(B^2d^2-3)(B^2d^2-2)(B^2d^2-1)"),
];

fn formulas(class: SiteClass) -> Result<&'static [Formula]> {
    match class {
        SiteClass::Identity => Ok(&IDENTITY_FORMULAS),
        SiteClass::O1 => Ok(&O1_FORMULAS),
        SiteClass::O2 => Ok(&O2_FORMULAS),
        SiteClass::Null => Err(MagicError::NullClass(0)),
    }
}

/// Decimal digits carried by the scaled integer square root.
const SQRT_DIGITS: u32 = 60;

fn eval(expr: &str, b: u64, d: u64) -> Result<BigInt> {
    Ok(Poly::parse(expr)?.eval(b as i64, d as i64))
}

/// Evaluates one formula with the radical computed to `SQRT_DIGITS` digits.
fn evaluate(f: &Formula, b: u64, d: u64) -> Result<f64> {
    let p = eval(f.num, b, d)?;
    let q = eval(f.den, b, d)?;
    if q.is_zero() {
        return domain(format!("closed-form denominator vanishes at d = {d}, B = {b}"));
    }
    let value = match f.root {
        None => Rational::new(p, q),
        Some((sign, coeff, radicand)) => {
            let k = eval(coeff, b, d)?;
            let a = eval(radicand, b, d)?;
            if a.is_negative() {
                return domain(format!("negative radicand at d = {d}, B = {b}"));
            }
            let scale = BigInt::from(10u32).pow(SQRT_DIGITS);
            let root = (&a * &scale * &scale).sqrt();
            let n = &p * &scale + BigInt::from(sign) * k * root;
            Rational::new(n, q * scale)
        }
    };
    Ok(value.to_f64().unwrap_or(f64::NAN))
}

/// The printed eigenvalue formulas in list order.
pub fn closed_form_values(d: u64, b: u64, class: SiteClass) -> Result<Vec<f64>> {
    if d < 2 || b < 2 {
        return domain(format!("need d ≥ 2 and B ≥ 2, got d = {d}, B = {b}"));
    }
    formulas(class)?.iter().map(|f| evaluate(f, b, d)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormValue {
    /// 1-based position in the printed list.
    pub index: usize,
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormEigenvalues {
    pub d: u64,
    pub b: u64,
    pub class: SiteClass,
    pub variant: WgVariant,
    pub values: Vec<ClosedFormValue>,
    /// Largest `|λ_num − λ_cf| / max(|λ_cf|, ρ)` over the numeric spectrum.
    pub max_relative_deviation: f64,
    /// Formula attaining the numeric spectral radius.
    pub radius_index: usize,
    pub reconciled: bool,
    pub unmatched_numeric: Vec<f64>,
    pub unmatched_formulas: Vec<usize>,
}

/// Matches printed formulas against the numeric spectrum of the block built
/// with `variant`, inferring multiplicities. Never errors on a mismatch.
pub fn compare_closed_form(
    d: u64,
    b: u64,
    class: SiteClass,
    variant: WgVariant,
) -> Result<ClosedFormEigenvalues> {
    let cf = closed_form_values(d, b, class)?;
    let block = build_block_variant(d, b, class, variant)?;
    let report = numeric_spectrum(&block)?;
    let rho = report.spectral_radius;
    let scale = |v: f64| v.abs().max(rho).max(f64::MIN_POSITIVE);
    let mut multiplicity = vec![0usize; cf.len()];
    let mut unmatched_numeric = Vec::new();
    let mut max_dev: f64 = 0.0;
    for &lambda in &report.eigenvalues {
        // nearest formula, earliest index on ties
        let (best, dev) = cf
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, (lambda - v).abs() / scale(v)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        max_dev = max_dev.max(dev);
        if dev <= CLOSED_FORM_TOLERANCE {
            multiplicity[best] += 1;
        } else {
            unmatched_numeric.push(lambda);
        }
    }
    let unmatched_formulas: Vec<usize> = cf
        .iter()
        .enumerate()
        .filter(|(_, &v)| {
            !report.eigenvalues.iter().any(|&l| (l - v).abs() / scale(v) <= CLOSED_FORM_TOLERANCE)
        })
        .map(|(i, _)| i + 1)
        .collect();
    let radius_index = cf
        .iter()
        .enumerate()
        .map(|(i, &v)| (i, (v.abs() - rho).abs()))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
        .0
        + 1;
    let values = cf
        .iter()
        .zip(&multiplicity)
        .enumerate()
        .map(|(i, (&value, &m))| ClosedFormValue { index: i + 1, value, multiplicity: m })
        .collect();
    Ok(ClosedFormEigenvalues {
        d,
        b,
        class,
        variant,
        values,
        max_relative_deviation: max_dev,
        radius_index,
        reconciled: unmatched_numeric.is_empty() && unmatched_formulas.is_empty(),
        unmatched_numeric,
        unmatched_formulas,
    })
}

/// Closed-form spectrum of the block built with the printed Weingarten
/// table, which is the construction the printed formulas describe.
pub fn closed_form_spectrum(d: u64, b: u64, class: SiteClass) -> Result<ClosedFormEigenvalues> {
    let cmp = compare_closed_form(d, b, class, WgVariant::PrintedTable)?;
    if !cmp.reconciled {
        return Err(MagicError::SpectrumMismatch(format!(
            "d = {d}, B = {b}, {class}: {} numeric eigenvalues and formulas {:?} unmatched (max deviation {:.3e})",
            cmp.unmatched_numeric.len(),
            cmp.unmatched_formulas,
            cmp.max_relative_deviation
        )));
    }
    Ok(cmp)
}

#[derive(Clone, Debug, Serialize)]
pub struct SubadditivityCheck {
    pub d: u64,
    pub b: u64,
    /// `ρ(G + c₁B₁ + c₂B₂)`.
    pub lhs: f64,
    /// `ρ(G) + c₁ρ(B₁) + c₂ρ(B₂)`.
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsGridReport {
    pub variant: WgVariant,
    pub reports: Vec<SpectralReport>,
    pub subadditivity: Vec<SubadditivityCheck>,
    pub violations: Vec<String>,
}

impl BoundsGridReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn grid_point(
    d: u64,
    b: u64,
    variant: WgVariant,
) -> Result<(Vec<SpectralReport>, Option<SubadditivityCheck>)> {
    let mut reports = Vec::with_capacity(3);
    for class in [SiteClass::Identity, SiteClass::O1, SiteClass::O2] {
        reports.push(numeric_spectrum(&*build_block_variant(d, b, class, variant)?)?);
    }
    let (m, c1, c2) = site_sum_matrix(d, b, variant)?;
    let sub = if c1 + c2 == 0 {
        None
    } else {
        let lhs = spectral_radius(&m)?;
        let rhs = reports[0].spectral_radius
            + c1 as f64 * reports[1].spectral_radius
            + c2 as f64 * reports[2].spectral_radius;
        Some(SubadditivityCheck { d, b, lhs, rhs, holds: lhs <= rhs + BOUND_SLACK })
    };
    Ok((reports, sub))
}

/// Bounds, refined `d = 2` bound, non-negativity and subadditivity on every
/// grid point. Violations are collected, never raised.
pub fn verify_bounds_grid(
    d_range: (i64, i64),
    b_range: (i64, i64),
    variant: WgVariant,
) -> Result<BoundsGridReport> {
    check_grid_range(d_range, b_range)?;
    let points: Vec<(u64, u64)> = (d_range.0..=d_range.1)
        .flat_map(|d| (b_range.0..=b_range.1).map(move |b| (d as u64, b as u64)))
        .collect();
    let results: Vec<_> = points.par_iter().map(|&(d, b)| grid_point(d, b, variant)).collect();
    let mut reports = Vec::new();
    let mut subadditivity = Vec::new();
    let mut violations = Vec::new();
    for ((d, b), res) in points.iter().zip(results) {
        match res {
            Ok((reps, sub)) => {
                for r in &reps {
                    if !r.bound_satisfied {
                        violations.push(format!(
                            "d={d} B={b} {}: radius {:.12} exceeds bound {:.12}",
                            r.class, r.spectral_radius, r.bound
                        ));
                    }
                    if r.refined_satisfied == Some(false) {
                        violations.push(format!(
                            "d={d} B={b} {}: radius {:.12} exceeds refined bound {:.12}",
                            r.class,
                            r.spectral_radius,
                            r.refined_bound.unwrap_or_default()
                        ));
                    }
                    if !r.nonnegative {
                        violations.push(format!(
                            "d={d} B={b} {}: eigenvalue {:.3e} below zero",
                            r.class, r.min_eigenvalue
                        ));
                    }
                }
                if let Some(s) = &sub {
                    if !s.holds {
                        violations.push(format!("d={d} B={b}: subadditivity {:.12} > {:.12}", s.lhs, s.rhs));
                    }
                }
                reports.extend(reps);
                subadditivity.extend(sub);
            }
            Err(e) => violations.push(format!("d={d} B={b}: {e}")),
        }
    }
    Ok(BoundsGridReport { variant, reports, subadditivity, violations })
}

/// One row per `(d, B, class)` with radius, bound, margin and min eigenvalue.
pub fn write_bounds_csv<W: Write>(report: &BoundsGridReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "d",
        "B",
        "class",
        "variant",
        "spectral_radius",
        "bound",
        "margin",
        "refined_bound",
        "min_eigenvalue",
        "satisfied",
    ])?;
    for r in &report.reports {
        w.write_record([
            r.d.to_string(),
            r.b.to_string(),
            r.class.to_string(),
            r.variant.name().to_string(),
            format!("{:.15e}", r.spectral_radius),
            format!("{:.15e}", r.bound),
            format!("{:.15e}", r.margin()),
            r.refined_bound.map(|v| format!("{v:.15e}")).unwrap_or_default(),
            format!("{:.15e}", r.min_eigenvalue),
            r.all_satisfied().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
