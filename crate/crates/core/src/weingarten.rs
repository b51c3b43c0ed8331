//! Gram matrix of S4 permutation states and the fourth-order Weingarten
//! matrix, both in exact rational arithmetic.
//!
//! The Weingarten matrix is *defined* here as the exact inverse of the Gram
//! matrix `⟨σ|π⟩ = q^{#cycles(σ⁻¹π)}`. The closed-form table with the
//! printed common denominator `q²(q²−1)(q²−2)(q²−3)` is kept as a separate,
//! selectable variant so that it can be compared against the inverse and
//! against Haar sampling.

use num_bigint::BigInt;
use num_traits::{Pow, Zero};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exact::{Rational, RationalMatrix};
use crate::sym4::{enumerate_s4, relative_cycle_type, CycleType, ORDER};

/// Which definition of `Wg(s, q)` to use when assembling matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WgVariant {
    /// Exact inverse of the Gram matrix.
    GramInverse,
    /// Closed-form numerators over the printed denominator `q²(q²−1)(q²−2)(q²−3)`.
    PrintedTable,
}

impl WgVariant {
    pub fn name(self) -> &'static str {
        match self {
            WgVariant::GramInverse => "gram-inverse",
            WgVariant::PrintedTable => "printed-table",
        }
    }
}

impl std::str::FromStr for WgVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gram" | "gram-inverse" => Ok(WgVariant::GramInverse),
            "table" | "printed-table" => Ok(WgVariant::PrintedTable),
            other => Err(format!("unknown Weingarten variant `{other}` (expected gram|table)")),
        }
    }
}

/// `⟨σ|π⟩` for all pairs; entries are integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix {
    pub q: u64,
    pub entries: RationalMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeingartenMatrix {
    pub q: u64,
    pub variant: WgVariant,
    pub entries: RationalMatrix,
}

fn check_q(q: u64) -> Result<()> {
    if q < 4 {
        return domain(format!("q = {q} < 4: fourth-moment Gram matrix is singular"));
    }
    Ok(())
}

/// Integer power `base^exp` as a rational.
pub(crate) fn int_pow(base: u64, exp: u32) -> Rational {
    Rational::from_integer(BigInt::from(base).pow(exp))
}

/// Gram matrix without the validity check; for `q < 4` it is singular but
/// its entries are still the bond contractions `B^{#cycles}` used by the
/// transfer blocks.
pub(crate) fn contraction_matrix(q: u64) -> RationalMatrix {
    let perms = enumerate_s4();
    RationalMatrix::from_fn(ORDER, |i, j| int_pow(q, relative_cycle_type(&perms[i], &perms[j]).cycle_count()))
}

pub fn gram_matrix(q: u64) -> Result<GramMatrix> {
    check_q(q)?;
    Ok(GramMatrix { q, entries: contraction_matrix(q) })
}

/// Exact inverse of [`gram_matrix`].
///
/// The inverse of a class-function matrix is again a class function, so the
/// five class values are solved from `Σ_τ Wg(σ⁻¹τ)·⟨τ|π⟩ = δ_{σπ}` restricted
/// to `σ = identity` and one `π` per class. Callers that need certainty can
/// check `W·G = I` on the full matrix.
pub fn weingarten_matrix(q: u64) -> Result<WeingartenMatrix> {
    check_q(q)?;
    let perms = enumerate_s4();
    let k = CycleType::ALL.len();
    // system[c][c'] = Σ_{τ of class c'} q^{#cycles(τ⁻¹π_c)}
    let mut system = RationalMatrix::zeros(k);
    for (row, ct) in CycleType::ALL.iter().enumerate() {
        let rep = perms.iter().find(|p| p.cycle_type() == *ct).expect("class representative");
        for tau in perms.iter() {
            let col = tau.cycle_type().index();
            let v = system.get(row, col) + int_pow(q, relative_cycle_type(tau, rep).cycle_count());
            system.set(row, col, v);
        }
    }
    let inv = system
        .inverse()
        .ok_or_else(|| crate::MagicError::Domain(format!("Gram matrix singular at q = {q}")))?;
    // right-hand side is δ at the identity class
    let values: Vec<Rational> = (0..k).map(|c| inv.get(c, CycleType::Identity.index()).clone()).collect();
    let entries = RationalMatrix::from_fn(ORDER, |i, j| {
        values[relative_cycle_type(&perms[i], &perms[j]).index()].clone()
    });
    Ok(WeingartenMatrix { q, variant: WgVariant::GramInverse, entries })
}

/// Gauss-Jordan inverse of the full 24×24 Gram matrix, independent of the
/// class-function reduction used by [`weingarten_matrix`].
pub fn gram_inverse_direct(q: u64) -> Result<RationalMatrix> {
    gram_matrix(q)?
        .entries
        .inverse()
        .ok_or_else(|| crate::MagicError::Domain(format!("Gram matrix singular at q = {q}")))
}

/// Weingarten matrix assembled from [`weingarten_table`].
pub fn weingarten_matrix_from_table(q: u64) -> Result<WeingartenMatrix> {
    check_q(q)?;
    let values: Vec<Rational> =
        CycleType::ALL.iter().map(|&ct| weingarten_table(ct, q)).collect::<Result<_>>()?;
    let perms = enumerate_s4();
    let entries = RationalMatrix::from_fn(ORDER, |i, j| {
        values[relative_cycle_type(&perms[i], &perms[j]).index()].clone()
    });
    Ok(WeingartenMatrix { q, variant: WgVariant::PrintedTable, entries })
}

pub fn weingarten_matrix_variant(q: u64, variant: WgVariant) -> Result<WeingartenMatrix> {
    match variant {
        WgVariant::GramInverse => weingarten_matrix(q),
        WgVariant::PrintedTable => weingarten_matrix_from_table(q),
    }
}

/// Numerator of the closed-form `Wg(s, q)` for each cycle type.
pub fn table_numerator(s: CycleType, q: u64) -> BigInt {
    let q = BigInt::from(q);
    let q2 = &q * &q;
    match s {
        CycleType::Identity => &q2 * &q2 - 8 * &q2 + 6,
        CycleType::Transposition => -(&q2 * &q) + 4 * &q,
        CycleType::DoubleTransposition => &q2 + 6,
        CycleType::ThreeCycle => 2 * &q2 - 3,
        CycleType::FourCycle => -5 * &q,
    }
}

/// Printed common denominator `q²(q²−1)(q²−2)(q²−3)`.
pub fn table_denominator(q: u64) -> BigInt {
    let q2 = BigInt::from(q) * BigInt::from(q);
    &q2 * (&q2 - 1) * (&q2 - 2) * (&q2 - 3)
}

/// Closed-form `Wg(s, q)` exactly as tabulated (numerator over the printed
/// common denominator).
pub fn weingarten_table(s: CycleType, q: u64) -> Result<Rational> {
    let den = table_denominator(q);
    if den.is_zero() {
        return domain(format!("printed Weingarten denominator vanishes at q = {q}"));
    }
    Ok(Rational::new(table_numerator(s, q), den))
}

/// Per-class comparison between the printed table and the Gram inverse.
#[derive(Clone, Debug, Serialize)]
pub struct ClassComparison {
    pub cycle_type: String,
    pub table: String,
    pub gram_inverse: String,
    pub agree: bool,
    /// Whether the tabulated numerator over `q²(q²−1)(q²−4)(q²−9)` equals the
    /// Gram-inverse value.
    pub agrees_with_alternate_denominator: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyProbe {
    pub q: u64,
    /// `W·G == I` exactly.
    pub inverse_exact: bool,
    /// Every entry depends only on the cycle type of `σ⁻¹π`.
    pub class_function: bool,
    pub symmetric: bool,
    pub classes: Vec<ClassComparison>,
}

impl ConsistencyProbe {
    pub fn table_agrees(&self) -> bool {
        self.classes.iter().all(|c| c.agree)
    }
}

/// Class representative values of a class-function matrix, or `None` if the
/// matrix is not constant on classes.
pub fn class_values(m: &RationalMatrix) -> Option<Vec<Rational>> {
    let perms = enumerate_s4();
    let mut vals: Vec<Option<Rational>> = vec![None; CycleType::ALL.len()];
    for i in 0..ORDER {
        for j in 0..ORDER {
            let ct = relative_cycle_type(&perms[i], &perms[j]).index();
            match &vals[ct] {
                None => vals[ct] = Some(m.get(i, j).clone()),
                Some(v) if v == m.get(i, j) => {}
                Some(_) => return None,
            }
        }
    }
    vals.into_iter().collect()
}

/// Compares the printed table with the Gram inverse at one `q`.
pub fn consistency_probe(q: u64) -> Result<ConsistencyProbe> {
    let gram = gram_matrix(q)?;
    let wg = weingarten_matrix(q)?;
    let inverse_exact = wg.entries.mul(&gram.entries).is_identity();
    let values = class_values(&wg.entries);
    let class_function = values.is_some();
    let values = values.unwrap_or_default();
    let qb = BigInt::from(q);
    let q2 = &qb * &qb;
    let alt_den: BigInt = &q2 * (&q2 - 1) * (&q2 - 4) * (&q2 - 9);
    let mut classes = Vec::new();
    for (ct, gram_val) in CycleType::ALL.iter().zip(values.iter()) {
        let table = weingarten_table(*ct, q)?;
        let alt = Rational::new(table_numerator(*ct, q), alt_den.clone());
        classes.push(ClassComparison {
            cycle_type: ct.to_string(),
            table: table.to_string(),
            gram_inverse: gram_val.to_string(),
            agree: &table == gram_val,
            agrees_with_alternate_denominator: &alt == gram_val,
        });
    }
    Ok(ConsistencyProbe { q, inverse_exact, class_function, symmetric: wg.entries.is_symmetric(), classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_frac};
    use crate::sym4::Perm4;

    fn find(s: &str) -> Perm4 {
        enumerate_s4().into_iter().find(|p| p.notation() == s).unwrap()
    }

    #[test]
    fn gram_entries() {
        let g4 = gram_matrix(4).unwrap();
        assert_eq!(*g4.entries.get(0, 0), rat(256));
        let id = Perm4::identity().index();
        assert_eq!(*g4.entries.get(id, find("(12)").index()), rat(64));
        let g5 = gram_matrix(5).unwrap();
        assert_eq!(*g5.entries.get(id, find("(1234)").index()), rat(5));
        assert!(g5.entries.is_symmetric());
        for i in 0..ORDER {
            assert_eq!(*g5.entries.get(i, i), rat(625));
        }
    }

    #[test]
    fn rejects_small_q() {
        assert!(gram_matrix(3).is_err());
        assert!(weingarten_matrix(2).is_err());
        assert!(weingarten_matrix_from_table(1).is_err());
    }

    #[test]
    fn exact_inverse_and_class_function() {
        for q in 4..=9 {
            let g = gram_matrix(q).unwrap();
            let w = weingarten_matrix(q).unwrap();
            assert!(w.entries.mul(&g.entries).is_identity(), "q = {q}");
            assert!(class_values(&w.entries).is_some());
            assert!(w.entries.is_symmetric());
        }
    }

    #[test]
    fn class_reduction_matches_direct_inverse() {
        for q in [4, 5] {
            assert_eq!(weingarten_matrix(q).unwrap().entries, gram_inverse_direct(q).unwrap());
        }
    }

    #[test]
    fn table_values() {
        let q = 7u64;
        let den = 49 * 48 * 47 * 46;
        assert_eq!(weingarten_table(CycleType::DoubleTransposition, q).unwrap(), rat_frac(49 + 6, den));
        assert_eq!(table_numerator(CycleType::FourCycle, q), BigInt::from(-35));
        assert_eq!(weingarten_table(CycleType::Identity, 4).unwrap(), rat_frac(134, 43680));
    }

    #[test]
    fn gram_inverse_diagonal_versus_table_at_q4() {
        // The printed denominator does not reproduce the inverse; the tabulated
        // numerators over q²(q²−1)(q²−4)(q²−9) do.
        let w = weingarten_matrix(4).unwrap();
        let diag = w.entries.get(0, 0).clone();
        assert_ne!(diag, weingarten_table(CycleType::Identity, 4).unwrap());
        assert_eq!(diag, rat_frac(134, 16 * 15 * 12 * 7));
    }

    #[test]
    fn probe_flags_printed_denominator() {
        for q in [4, 6, 11] {
            let probe = consistency_probe(q).unwrap();
            assert!(probe.inverse_exact);
            assert!(probe.class_function);
            assert!(probe.symmetric);
            assert!(!probe.table_agrees());
            assert!(probe.classes.iter().all(|c| c.agrees_with_alternate_denominator));
        }
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("gram".parse::<WgVariant>().unwrap(), WgVariant::GramInverse);
        assert_eq!("table".parse::<WgVariant>().unwrap(), WgVariant::PrintedTable);
        assert!("other".parse::<WgVariant>().is_err());
    }
}
