//! The 24×24 interaction blocks of the fourth-moment transfer-matrix model
//! and the partition functions built from them.
//!
//! `Block[σ][π] = Σ_τ Wg(σ⁻¹τ, dB) · v(τ) · B^{#cycles(τ⁻¹π)}` where `v(τ)`
//! is the physical contraction `⟨τ|O⟩` of the site operator: `d^{#cycles(τ)}`
//! for the identity, `(0,0,d²,0,d)` by cycle type for `O1`, `(0,0,0,0,d)`
//! for `O2`. The product of blocks around a ring, traced, is the Haar average
//! of `tr[(P ψψ†)^{⊗4}]` for the unnormalized periodic MPS.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, MagicError, Result};
use crate::exact::{Rational, RationalMatrix};
use crate::pauli::{site_class_counts, SiteClass};
use crate::sym4::{enumerate_s4, CycleType, ORDER};
use crate::weingarten::{contraction_matrix, int_pow, weingarten_matrix_variant, WgVariant};

#[derive(Clone, Debug)]
pub struct TransferBlock {
    pub d: u64,
    pub b: u64,
    pub class: SiteClass,
    pub variant: WgVariant,
    pub exact: RationalMatrix,
    pub entries: DMatrix<f64>,
}

type CacheKey = (u64, u64, SiteClass, WgVariant);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<TransferBlock>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<TransferBlock>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn check_dims(d: u64, b: u64) -> Result<()> {
    if d < 2 || b < 2 {
        return domain(format!("need d ≥ 2 and B ≥ 2, got d = {d}, B = {b}"));
    }
    Ok(())
}

/// Physical contraction weight `v(τ)` for one site class.
fn site_weight(class: SiteClass, ct: CycleType, d: u64) -> Rational {
    match class {
        SiteClass::Identity => int_pow(d, ct.cycle_count()),
        SiteClass::O1 => match ct {
            CycleType::DoubleTransposition => int_pow(d, 2),
            CycleType::FourCycle => int_pow(d, 1),
            _ => Rational::zero(),
        },
        SiteClass::O2 => match ct {
            CycleType::FourCycle => int_pow(d, 1),
            _ => Rational::zero(),
        },
        SiteClass::Null => Rational::zero(),
    }
}

fn assemble(d: u64, b: u64, class: SiteClass, variant: WgVariant) -> Result<TransferBlock> {
    let wg = weingarten_matrix_variant(d * b, variant)?;
    let bond = contraction_matrix(b);
    let perms = enumerate_s4();
    let weights: Vec<Rational> = perms.iter().map(|t| site_weight(class, t.cycle_type(), d)).collect();
    // fold the diagonal weight into the Weingarten columns, then contract the bond
    let scaled = RationalMatrix::from_fn(ORDER, |s, t| wg.entries.get(s, t) * &weights[t]);
    let exact = scaled.mul(&bond);
    let entries = exact.to_f64();
    Ok(TransferBlock { d, b, class, variant, exact, entries })
}

/// Block built from the Gram-inverse Weingarten matrix.
pub fn build_block(d: u64, b: u64, class: SiteClass) -> Result<Arc<TransferBlock>> {
    build_block_variant(d, b, class, WgVariant::GramInverse)
}

/// Cached block for any Weingarten variant.
pub fn build_block_variant(
    d: u64,
    b: u64,
    class: SiteClass,
    variant: WgVariant,
) -> Result<Arc<TransferBlock>> {
    check_dims(d, b)?;
    if class == SiteClass::Null {
        return Err(MagicError::NullClass(0));
    }
    let key = (d, b, class, variant);
    if let Some(hit) = cache().lock().expect("block cache poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let block = Arc::new(assemble(d, b, class, variant)?);
    let mut guard = cache().lock().expect("block cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(block)))
}

fn check_classes(classes: &[SiteClass]) -> Result<()> {
    if classes.is_empty() {
        return domain("string must have at least one site");
    }
    if let Some(pos) = classes.iter().position(|c| *c == SiteClass::Null) {
        return Err(MagicError::NullClass(pos));
    }
    Ok(())
}

/// `tr[Block(c₁)⋯Block(cₙ)]`, the Haar average of `tr[(P ψψ†)^{⊗4}]` for
/// the unnormalized RMPS and a string with the given site classes.
pub fn per_string_expectation(d: u64, b: u64, classes: &[SiteClass]) -> Result<f64> {
    per_string_expectation_variant(d, b, classes, WgVariant::GramInverse)
}

pub fn per_string_expectation_variant(
    d: u64,
    b: u64,
    classes: &[SiteClass],
    variant: WgVariant,
) -> Result<f64> {
    check_classes(classes)?;
    let mut acc = DMatrix::<f64>::identity(ORDER, ORDER);
    for &c in classes {
        acc *= &build_block_variant(d, b, c, variant)?.entries;
    }
    Ok(acc.trace())
}

/// Exact rational form of [`per_string_expectation`].
pub fn per_string_expectation_exact(
    d: u64,
    b: u64,
    classes: &[SiteClass],
    variant: WgVariant,
) -> Result<Rational> {
    check_classes(classes)?;
    let mut acc = RationalMatrix::identity(ORDER);
    for &c in classes {
        acc = acc.mul(&build_block_variant(d, b, c, variant)?.exact);
    }
    Ok(acc.trace())
}

/// Which of the three local-dimension cases applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DimensionCase {
    #[serde(rename = "odd-d")]
    OddD,
    #[serde(rename = "2k-odd")]
    TwiceOdd,
    #[serde(rename = "4k")]
    FourK,
}

impl DimensionCase {
    pub fn of(d: u64) -> DimensionCase {
        if d % 2 == 1 {
            DimensionCase::OddD
        } else if d % 4 == 2 {
            DimensionCase::TwiceOdd
        } else {
            DimensionCase::FourK
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            DimensionCase::OddD => "odd-d",
            DimensionCase::TwiceOdd => "2k-odd",
            DimensionCase::FourK => "4k",
        }
    }

    /// Growth constant `C` with `moment sum ≤ 24·Cⁿ`.
    pub fn bound_base(self, d: u64) -> f64 {
        let d2 = (d * d) as f64;
        match self {
            DimensionCase::OddD => 1.0,
            DimensionCase::TwiceOdd if d == 2 => 1.0 + 3.0 / d2,
            DimensionCase::TwiceOdd => 1.0 + 6.0 / d2,
            DimensionCase::FourK => 1.0 + 9.0 / d2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentSumResult {
    pub d: u64,
    pub b: u64,
    pub n: usize,
    pub value: f64,
    pub case_tag: DimensionCase,
    pub bound_base_c: f64,
    /// Multiplicities of `O1` and `O2` site operators used in the resummation.
    pub o1_count: usize,
    pub o2_count: usize,
    pub variant: WgVariant,
}

impl MomentSumResult {
    pub fn bound(&self) -> f64 {
        24.0 * self.bound_base_c.powi(self.n as i32)
    }

    pub fn within_bound(&self) -> bool {
        self.value <= self.bound()
    }
}

/// The single-site sum `G + c₁·B₁ + c₂·B₂` whose `n`th power traced gives the
/// moment sum over every Pauli string.
pub fn site_sum_matrix(d: u64, b: u64, variant: WgVariant) -> Result<(DMatrix<f64>, usize, usize)> {
    check_dims(d, b)?;
    let (c1, c2) = site_class_counts(d as u32)?;
    let mut m = build_block_variant(d, b, SiteClass::Identity, variant)?.entries.clone();
    if c1 > 0 {
        m += &build_block_variant(d, b, SiteClass::O1, variant)?.entries * c1 as f64;
    }
    if c2 > 0 {
        m += &build_block_variant(d, b, SiteClass::O2, variant)?.entries * c2 as f64;
    }
    Ok((m, c1, c2))
}

/// `Σ_a E tr[(P_a ψψ†)^{⊗4}]` over all `d^{2n}` strings (Null strings add 0).
pub fn analytic_moment_sum(d: u64, b: u64, n: usize) -> Result<MomentSumResult> {
    analytic_moment_sum_variant(d, b, n, WgVariant::GramInverse)
}

pub fn analytic_moment_sum_variant(d: u64, b: u64, n: usize, variant: WgVariant) -> Result<MomentSumResult> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    let (m, o1_count, o2_count) = site_sum_matrix(d, b, variant)?;
    let value = m.pow(n as u32).trace();
    let case = DimensionCase::of(d);
    Ok(MomentSumResult {
        d,
        b,
        n,
        value,
        case_tag: case,
        bound_base_c: case.bound_base(d),
        o1_count,
        o2_count,
        variant,
    })
}

/// Exact rational moment sum.
pub fn analytic_moment_sum_exact(d: u64, b: u64, n: usize, variant: WgVariant) -> Result<Rational> {
    check_dims(d, b)?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    let (c1, c2) = site_class_counts(d as u32)?;
    let mut m = build_block_variant(d, b, SiteClass::Identity, variant)?.exact.clone();
    for (class, count) in [(SiteClass::O1, c1), (SiteClass::O2, c2)] {
        if count > 0 {
            let blk = build_block_variant(d, b, class, variant)?;
            m = m.add(&blk.exact.scale(&Rational::from_integer((count as i64).into())));
        }
    }
    let mut acc = RationalMatrix::identity(ORDER);
    for _ in 0..n {
        acc = acc.mul(&m);
    }
    Ok(acc.trace())
}

/// `tr[Gⁿ]`, the all-identity string.
pub fn identity_trace_power(d: u64, b: u64, n: usize) -> Result<f64> {
    per_string_expectation(d, b, &vec![SiteClass::Identity; n])
}

/// Spectral radius of the site-sum matrix, reported alongside `C`.
pub fn site_sum_radius(d: u64, b: u64, variant: WgVariant) -> Result<f64> {
    let (m, _, _) = site_sum_matrix(d, b, variant)?;
    crate::spectra::spectral_radius(&m)
}

/// Serializable form of a block, row-major with labels `1..=24`.
#[derive(Clone, Debug, Serialize)]
pub struct BlockDump {
    pub d: u64,
    pub b: u64,
    pub class: SiteClass,
    pub variant: WgVariant,
    pub labels: Vec<String>,
    pub entries: Vec<Vec<f64>>,
    pub exact: Vec<Vec<String>>,
}

impl From<&TransferBlock> for BlockDump {
    fn from(blk: &TransferBlock) -> BlockDump {
        let labels = enumerate_s4().iter().map(|p| p.notation().to_string()).collect();
        BlockDump {
            d: blk.d,
            b: blk.b,
            class: blk.class,
            variant: blk.variant,
            labels,
            entries: (0..ORDER).map(|i| (0..ORDER).map(|j| blk.entries[(i, j)]).collect()).collect(),
            exact: (0..ORDER)
                .map(|i| (0..ORDER).map(|j| blk.exact.get(i, j).to_string()).collect())
                .collect(),
        }
    }
}

/// Writes blocks as CSV: one row per entry with `class,row,col,value,exact`.
pub fn write_blocks_csv<W: Write>(blocks: &[Arc<TransferBlock>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "B", "class", "variant", "row", "col", "value", "exact"])?;
    for blk in blocks {
        for i in 0..ORDER {
            for j in 0..ORDER {
                w.write_record([
                    blk.d.to_string(),
                    blk.b.to_string(),
                    blk.class.to_string(),
                    blk.variant.name().to_string(),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    format!("{:.17e}", blk.entries[(i, j)]),
                    blk.exact.get(i, j).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Largest |entry| of the exact block as f64.
pub fn max_norm(blk: &TransferBlock) -> f64 {
    blk.exact.max_abs().to_f64().unwrap_or(f64::INFINITY)
}

/// All class multisets of length `n`, weighted by their string counts, summed
/// directly. Exposed so the binomial resummation can be checked exactly.
pub fn explicit_class_sum_exact(d: u64, b: u64, n: usize, variant: WgVariant) -> Result<Rational> {
    let (c1, c2) = site_class_counts(d as u32)?;
    let options: Vec<(SiteClass, u64)> =
        [(SiteClass::Identity, 1), (SiteClass::O1, c1 as u64), (SiteClass::O2, c2 as u64)]
            .into_iter()
            .filter(|(_, m)| *m > 0)
            .collect();
    let mut total = Rational::zero();
    let mut idx = vec![0usize; n];
    loop {
        let classes: Vec<SiteClass> = idx.iter().map(|&i| options[i].0).collect();
        let weight: u64 = idx.iter().map(|&i| options[i].1).product();
        let value = per_string_expectation_exact(d, b, &classes, variant)?;
        total += value * Rational::from_integer(weight.into());
        let mut k = 0;
        loop {
            if k == n {
                return Ok(total);
            }
            idx[k] += 1;
            if idx[k] < options.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{classify_site, PauliString};

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_block(1, 2, SiteClass::Identity).is_err());
        assert!(build_block(2, 1, SiteClass::Identity).is_err());
        assert!(matches!(build_block(2, 2, SiteClass::Null), Err(MagicError::NullClass(_))));
        assert!(matches!(
            per_string_expectation(2, 2, &[SiteClass::Identity, SiteClass::Null]),
            Err(MagicError::NullClass(1))
        ));
        assert!(per_string_expectation(2, 2, &[]).is_err());
    }

    #[test]
    fn identity_block_radius_table_variant() {
        let blk = build_block_variant(2, 2, SiteClass::Identity, WgVariant::PrintedTable).unwrap();
        let rho = crate::spectra::spectral_radius(&blk.entries).unwrap();
        assert!((rho - 6.0 / 13.0).abs() < 1e-12, "rho = {rho}");
    }

    #[test]
    fn gram_identity_block_has_unit_radius() {
        // tr Gⁿ counts ⟨ψ|ψ⟩⁴ and must tend to 1
        for (d, b) in [(2, 2), (3, 2), (2, 5), (4, 3)] {
            let blk = build_block(d, b, SiteClass::Identity).unwrap();
            let rho = crate::spectra::spectral_radius(&blk.entries).unwrap();
            assert!((rho - 1.0).abs() < 1e-10, "d={d} B={b} rho={rho}");
        }
        let t = identity_trace_power(2, 2, 40).unwrap();
        assert!((t - 1.0).abs() < 1e-3, "{t}");
    }

    #[test]
    fn o2_block_only_sees_four_cycles() {
        let blk = build_block(4, 2, SiteClass::O2).unwrap();
        let perms = enumerate_s4();
        let wg = weingarten_matrix_variant(8, WgVariant::GramInverse).unwrap();
        let bond = contraction_matrix(2);
        for s in [0, 5, 19] {
            for p in [0, 9, 23] {
                let mut expect = Rational::zero();
                for (t, perm) in perms.iter().enumerate() {
                    if perm.cycle_type() == CycleType::FourCycle {
                        expect += wg.entries.get(s, t) * int_pow(4, 1) * bond.get(t, p);
                    }
                }
                assert_eq!(*blk.exact.get(s, p), expect);
            }
        }
    }

    #[test]
    fn cyclic_rotation_invariance() {
        let classes = [SiteClass::Identity, SiteClass::O1, SiteClass::O1, SiteClass::Identity, SiteClass::O2];
        let base = per_string_expectation_exact(4, 2, &classes, WgVariant::GramInverse).unwrap();
        for r in 1..classes.len() {
            let mut rot = classes.to_vec();
            rot.rotate_left(r);
            assert_eq!(per_string_expectation_exact(4, 2, &rot, WgVariant::GramInverse).unwrap(), base);
        }
    }

    #[test]
    fn resummation_identity_exact() {
        for d in [2u64, 4] {
            for b in [2u64, 3] {
                for n in 1..=3 {
                    let direct = explicit_class_sum_exact(d, b, n, WgVariant::GramInverse).unwrap();
                    let resummed = analytic_moment_sum_exact(d, b, n, WgVariant::GramInverse).unwrap();
                    assert_eq!(direct, resummed, "d={d} B={b} n={n}");
                    let float = analytic_moment_sum(d, b, n).unwrap().value;
                    let rel = (float - direct.to_f64().unwrap()).abs() / float.abs();
                    assert!(rel < 1e-10);
                }
            }
        }
    }

    #[test]
    fn moment_sum_equals_sum_over_all_strings() {
        let (d, b, n) = (2u64, 2u64, 3usize);
        let total = (d * d).pow(n as u32) as usize;
        let mut sum = 0.0;
        for idx in 0..total {
            let p = PauliString::from_index(d as u32, n, idx).unwrap();
            let classes: Vec<SiteClass> = p.sites().iter().map(classify_site).collect();
            sum += per_string_expectation(d, b, &classes).unwrap();
        }
        let analytic = analytic_moment_sum(d, b, n).unwrap().value;
        assert!((sum - analytic).abs() < 1e-10 * analytic);
    }

    #[test]
    fn odd_d_collapses_to_identity_trace() {
        for n in 2..=6 {
            let r = analytic_moment_sum(3, 2, n).unwrap();
            assert_eq!(r.case_tag, DimensionCase::OddD);
            assert_eq!((r.o1_count, r.o2_count), (0, 0));
            assert_eq!(r.value, identity_trace_power(3, 2, n).unwrap());
            assert!(r.value <= 24.0);
        }
    }

    #[test]
    fn moment_sums_within_case_bounds() {
        for d in [2u64, 3, 4, 6, 8] {
            for b in [2u64, 3] {
                for n in [1usize, 2, 5, 12] {
                    let r = analytic_moment_sum(d, b, n).unwrap();
                    assert!(r.value >= 0.0);
                    assert!(r.within_bound(), "d={d} B={b} n={n} {} > {}", r.value, r.bound());
                }
            }
        }
        assert_eq!(DimensionCase::of(6).bound_base(6), 1.0 + 6.0 / 36.0);
        assert_eq!(DimensionCase::of(2).bound_base(2), 1.75);
    }

    #[test]
    fn spectra_are_real() {
        for variant in [WgVariant::GramInverse, WgVariant::PrintedTable] {
            for class in [SiteClass::Identity, SiteClass::O1, SiteClass::O2] {
                let blk = build_block_variant(4, 3, class, variant).unwrap();
                let imag = crate::spectra::eigenvalues(&blk.entries)
                    .unwrap()
                    .iter()
                    .map(|z| z.im.abs())
                    .fold(0.0, f64::max);
                assert!(imag < 1e-9 * max_norm(&blk));
            }
        }
    }

    #[test]
    fn csv_dump_has_all_entries() {
        let blk = build_block(2, 2, SiteClass::O1).unwrap();
        let mut buf = Vec::new();
        write_blocks_csv(std::slice::from_ref(&blk), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 24 * 24);
        let dump = BlockDump::from(blk.as_ref());
        assert_eq!(dump.labels[0], "()");
        assert_eq!(dump.entries.len(), 24);
    }
}
