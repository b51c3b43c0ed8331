//! Generalized qudit Pauli operators `X^r Z^s` and their S4 contractions.
//!
//! `X|j⟩ = |j+1 mod d⟩`, `Z|j⟩ = ω^j |j⟩` with `ω = exp(2πi/d)`. Powers are
//! tracked with exact phase exponents: `(X^r Z^s)^m = ω^{rs·m(m−1)/2} X^{mr} Z^{ms}`,
//! so traces, contraction vectors and the site classification are exact for
//! every `d`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, MagicError, Result};
use crate::sym4::CycleType;

/// A single-site operator `X^r Z^s` on a `d`-level system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SitePauli {
    d: u32,
    r: u32,
    s: u32,
}

impl SitePauli {
    /// Exponents are reduced mod `d`.
    pub fn new(d: u32, r: u32, s: u32) -> Result<SitePauli> {
        if d < 2 {
            return domain(format!("local dimension d = {d} < 2"));
        }
        Ok(SitePauli { d, r: r % d, s: s % d })
    }

    pub fn identity(d: u32) -> Result<SitePauli> {
        SitePauli::new(d, 0, 0)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn is_identity(&self) -> bool {
        self.r == 0 && self.s == 0
    }

    /// All `d²` operators, lexicographic in `(r, s)`.
    pub fn all(d: u32) -> Result<Vec<SitePauli>> {
        if d < 2 {
            return domain(format!("local dimension d = {d} < 2"));
        }
        Ok((0..d).flat_map(|r| (0..d).map(move |s| SitePauli { d, r, s })).collect())
    }
}

impl fmt::Display for SitePauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.r, self.s) {
            (0, 0) => write!(f, "I"),
            (r, 0) => write!(f, "X^{r}"),
            (0, s) => write!(f, "Z^{s}"),
            (r, s) => write!(f, "X^{r}Z^{s}"),
        }
    }
}

/// Tensor product of single-site operators sharing one `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    d: u32,
    sites: Vec<SitePauli>,
}

impl PauliString {
    pub fn new(sites: Vec<SitePauli>) -> Result<PauliString> {
        let Some(first) = sites.first() else {
            return domain("Pauli string must have at least one site");
        };
        let d = first.d;
        if let Some(bad) = sites.iter().find(|p| p.d != d) {
            return domain(format!("mixed local dimensions {d} and {}", bad.d));
        }
        Ok(PauliString { d, sites })
    }

    /// Builds a string from `(r, s)` pairs.
    pub fn from_exponents(d: u32, exps: &[(u32, u32)]) -> Result<PauliString> {
        let sites = exps.iter().map(|&(r, s)| SitePauli::new(d, r, s)).collect::<Result<_>>()?;
        PauliString::new(sites)
    }

    /// The string with lexicographic index `index` in `(r₁,s₁,…,rₙ,sₙ)`.
    pub fn from_index(d: u32, n: usize, mut index: usize) -> Result<PauliString> {
        let dd = (d as usize) * (d as usize);
        let mut exps = vec![(0u32, 0u32); n];
        for k in (0..n).rev() {
            let a = index % dd;
            index /= dd;
            exps[k] = ((a / d as usize) as u32, (a % d as usize) as u32);
        }
        PauliString::from_exponents(d, &exps)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[SitePauli] {
        &self.sites
    }

    pub fn classes(&self) -> Vec<SiteClass> {
        self.sites.iter().map(classify_site).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sites.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join("⊗"))
    }
}

/// An exact value `magnitude · ω^exponent` with `ω = exp(2πi/d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootMultiple {
    pub d: u32,
    /// Reduced mod `d`; zero whenever `magnitude` is zero.
    pub exponent: u32,
    pub magnitude: u128,
}

impl RootMultiple {
    pub fn zero(d: u32) -> RootMultiple {
        RootMultiple { d, exponent: 0, magnitude: 0 }
    }

    pub fn new(d: u32, exponent: u64, magnitude: u128) -> RootMultiple {
        if magnitude == 0 {
            return RootMultiple::zero(d);
        }
        RootMultiple { d, exponent: (exponent % d as u64) as u32, magnitude }
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude == 0
    }

    pub fn mul(&self, other: &RootMultiple) -> RootMultiple {
        debug_assert_eq!(self.d, other.d);
        RootMultiple::new(
            self.d,
            self.exponent as u64 + other.exponent as u64,
            self.magnitude * other.magnitude,
        )
    }

    pub fn pow(&self, k: u32) -> RootMultiple {
        (0..k).fold(RootMultiple::new(self.d, 0, 1), |acc, _| acc.mul(self))
    }

    /// `true` iff the value is the positive real `magnitude`.
    pub fn is_positive_real(&self) -> bool {
        self.magnitude > 0 && self.exponent == 0
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.magnitude == 0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.magnitude as f64, 2.0 * PI * self.exponent as f64 / self.d as f64)
    }
}

/// `tr[(X^r Z^s)^m]`, exact.
pub fn pauli_power_trace(p: &SitePauli, m: u32) -> RootMultiple {
    let d = p.d as u64;
    let (r, s, m64) = (p.r as u64, p.s as u64, m as u64);
    if (m64 * r) % d != 0 || (m64 * s) % d != 0 {
        return RootMultiple::zero(p.d);
    }
    let phase = (r * s % d) * ((m64 * m64.saturating_sub(1) / 2) % d);
    RootMultiple::new(p.d, phase, d as u128)
}

/// The contractions `⟨σ|O⟩` ordered by cycle type:
/// `((trO)⁴, trO²·(trO)², (trO²)², trO³·trO, trO⁴)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContractionVector {
    pub components: [RootMultiple; 5],
}

impl ContractionVector {
    pub fn get(&self, ct: CycleType) -> RootMultiple {
        self.components[ct.index()]
    }

    pub fn to_complex(&self) -> [Complex64; 5] {
        self.components.map(|c| c.to_complex())
    }

    pub fn moduli(&self) -> [u128; 5] {
        self.components.map(|c| c.magnitude)
    }
}

pub fn contraction_vector(p: &SitePauli) -> ContractionVector {
    let t1 = pauli_power_trace(p, 1);
    let t2 = pauli_power_trace(p, 2);
    let t3 = pauli_power_trace(p, 3);
    let t4 = pauli_power_trace(p, 4);
    ContractionVector { components: [t1.pow(4), t2.mul(&t1.pow(2)), t2.pow(2), t3.mul(&t1), t4] }
}

/// Single-site classes by their S4 contraction pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SiteClass {
    Identity,
    /// `⟨σ|O⟩ = (0,0,d²,0,d)`: `O² ∝ I`.
    O1,
    /// `⟨σ|O⟩ = (0,0,0,0,d)`: `O⁴ ∝ I`, `O² ∉ span(I)`.
    O2,
    /// All contractions vanish.
    Null,
}

impl SiteClass {
    pub fn name(self) -> &'static str {
        match self {
            SiteClass::Identity => "identity",
            SiteClass::O1 => "o1",
            SiteClass::O2 => "o2",
            SiteClass::Null => "null",
        }
    }
}

impl fmt::Display for SiteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SiteClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "i" | "green" => Ok(SiteClass::Identity),
            "o1" | "blue" => Ok(SiteClass::O1),
            "o2" | "purple" => Ok(SiteClass::O2),
            "null" => Ok(SiteClass::Null),
            other => Err(format!("unknown site class `{other}`")),
        }
    }
}

/// Classifies from traces: `O1` iff `|trO²| = d` and `|trO⁴| = d`; `O2` iff
/// `trO² = 0` and `|trO⁴| = d`; otherwise `Null`. Phases are ignored since a
/// global phase on `O` cannot change which contractions vanish.
pub fn classify_site(p: &SitePauli) -> SiteClass {
    if p.is_identity() {
        return SiteClass::Identity;
    }
    let d = p.d as u128;
    let cv = contraction_vector(p);
    let sq = cv.get(CycleType::DoubleTransposition).magnitude;
    let four = cv.get(CycleType::FourCycle).magnitude;
    match (sq, four) {
        (s, f) if s == d * d && f == d => SiteClass::O1,
        (0, f) if f == d => SiteClass::O2,
        _ => SiteClass::Null,
    }
}

/// Exhaustive `(#O1, #O2)` over the `d²` single-site operators.
pub fn site_class_counts(d: u32) -> Result<(usize, usize)> {
    let all = SitePauli::all(d)?;
    let count = |c: SiteClass| all.iter().filter(|p| classify_site(p) == c).count();
    Ok((count(SiteClass::O1), count(SiteClass::O2)))
}

/// Exponent `e` with `trO⁴ = d·ω^e`; used to remove the global phase that
/// makes `tr[(P ψψ†)^{⊗4}]` differ between operators of the same class.
pub fn fourth_power_phase(p: &SitePauli) -> u32 {
    pauli_power_trace(p, 4).exponent
}

/// Matrix of `X^r Z^s` in the computational basis.
pub fn pauli_matrix(p: &SitePauli) -> DMatrix<Complex64> {
    let d = p.d as usize;
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * PI * ((p.s as usize * j) % d) as f64 / d as f64;
        m[((j + p.r as usize) % d, j)] = Complex64::from_polar(1.0, phase);
    }
    m
}

/// Dense `dⁿ × dⁿ` matrix of a string; for tests and small brute-force checks.
pub fn pauli_string_matrix(p: &PauliString) -> DMatrix<Complex64> {
    p.sites
        .iter()
        .fold(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), |acc, s| acc.kronecker(&pauli_matrix(s)))
}

/// `⟨ψ|P|ψ⟩` by index shifts and phase accumulation; site 1 is the most
/// significant digit of the basis index.
pub fn pauli_string_expectation(state: &[Complex64], p: &PauliString) -> Result<Complex64> {
    let d = p.d as usize;
    let n = p.len();
    let dim = checked_dim(d, n)?;
    if state.len() != dim {
        return Err(MagicError::DimensionMismatch { expected: dim, got: state.len() });
    }
    let roots: Vec<Complex64> =
        (0..d).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut digits = vec![0usize; n];
    for (j, amp) in state.iter().enumerate() {
        if j > 0 {
            // increment the mixed-radix counter
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < d {
                    break;
                }
                digits[k] = 0;
            }
        }
        let mut target = 0usize;
        let mut phase = 0usize;
        for (k, site) in p.sites.iter().enumerate() {
            target = target * d + (digits[k] + site.r as usize) % d;
            phase += site.s as usize * digits[k];
        }
        acc += state[target].conj() * roots[phase % d] * amp;
    }
    Ok(acc)
}

pub(crate) fn checked_dim(d: usize, n: usize) -> Result<usize> {
    d.checked_pow(n as u32).ok_or_else(|| MagicError::Domain(format!("dimension {d}^{n} overflows")))
}
