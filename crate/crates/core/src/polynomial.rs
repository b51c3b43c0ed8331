//! Integer polynomials in the two variables `B` and `d`, a small expression
//! parser for them, and the catalogue of inequality polynomials whose
//! non-negativity underlies the spectral bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;

use crate::error::{MagicError, Result};

/// A polynomial with integer coefficients, keyed by `(exp_B, exp_d)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Poly {
        Poly::monomial(c, 0, 0)
    }

    pub fn monomial(c: impl Into<BigInt>, eb: u32, ed: u32) -> Poly {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((eb, ed), c);
        }
        Poly { terms }
    }

    pub fn var_b() -> Poly {
        Poly::monomial(1, 1, 0)
    }

    pub fn var_d() -> Poly {
        Poly::monomial(1, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonzero monomials.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(1), |acc, _| &acc * self)
    }

    pub fn eval(&self, b: i64, d: i64) -> BigInt {
        let (b, d) = (BigInt::from(b), BigInt::from(d));
        self.terms
            .iter()
            .fold(BigInt::zero(), |acc, (&(eb, ed), c)| acc + c * Pow::pow(&b, eb) * Pow::pow(&d, ed))
    }

    /// Parses an expression over `B`, `d`, integers, `+ - * ^` and
    /// parentheses. Juxtaposition such as `2B^2d` is read as a product.
    pub fn parse(src: &str) -> Result<Poly> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let poly = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(poly)
    }

    fn add_term(&mut self, key: (u32, u32), c: BigInt) {
        let entry = self.terms.entry(key).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&(b1, d1), c1) in &self.terms {
            for (&(b2, d2), c2) in &rhs.terms {
                out.add_term((b1 + b2, d1 + d2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (&(eb, ed), c) in self.terms.iter().rev() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let mut factors = Vec::new();
            if !mag.is_one() || (eb == 0 && ed == 0) {
                factors.push(mag.to_string());
            }
            for (name, e) in [("B", eb), ("d", ed)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    e => factors.push(format!("{name}^{e}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> MagicError {
        MagicError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some(c) if c == b'(' || c == b'B' || c == b'd' || c.is_ascii_digit() => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            let e: u32 = e.try_into().map_err(|_| self.error("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'B') => {
                self.pos += 1;
                Ok(Poly::var_b())
            }
            Some(b'd') => {
                self.pos += 1;
                Ok(Poly::var_d())
            }
            Some(c) if c.is_ascii_digit() => Ok(Poly::constant(self.integer()?)),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn integer(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.error("integer out of range"))
    }
}

/// Named polynomials appearing in the closed-form block eigenvalues.
pub mod named {
    pub const DEN3: &str = "(B^2d^2-3)(B^2d^2-2)(B^2d^2-1)";

    pub const A1: &str =
        "B^7(d^5+d^4)+B^5(-3d^5-3d^4-11d^3-11d^2)+B^3(2d^5+2d^4+29d^3+29d^2+18d+18)+B(-18d^3-18d^2-18d-18)";
    pub const A2: &str = "B^4d^4+B^2(-4d^4-4d^2)+4d^4+16d^3+40d^2+16d+4";
    pub const A3: &str = "2Bd(B^2d^2-3)(B^2d^2-2)(B^2d^2-1)";
    pub const A4: &str =
        "B^7(d^5+d^4)+B^5(-15d^4-14d^3+d^2)+B^3(-d^5+44d^4+20d^3+5d^2+30d)+B(-30d^4-6d^3-6d^2-30d)";
    pub const A5: &str = "B^8d^6+B^6(2d^6+30d^5+2d^4)+B^4(d^6-110d^5+19d^4-110d^3+d^2)+B^2(60d^5-708d^4-600d^3-708d^2+60d)+900d^4+2160d^3+3816d^2+2160d+900";
    pub const A6: &str = A3;

    pub const C1: &str =
        "B^7(d^5+d^4)+B^5(-d^5-5d^4-11d^3-11d^2)+B^3(4d^4+11d^3+47d^2+18d+18)+B(-36d^2-18d-18)";
    pub const C2: &str = "B^4d^4-4B^2d^2+16d^2+16d+4";
    pub const C3: &str = A3;
    pub const C4: &str = "B^7(d^5+d^4)+B^5(2d^5-5d^4-26d^3+d^2)+B^3(-8d^4+23d^3+65d^2+18d)+B(-18d^2-54d)";
    pub const C5: &str = "B^12d^6+B^10(4d^6+6d^5+2d^4)+B^8(4d^6-36d^5-213d^4-158d^3+d^2)+B^6(-24d^5+156d^4+1078d^3+1282d^2+36d)+B^4(64d^4-488d^3-2075d^2-2736d+324)+B^2(288d^2+1836d+648)+324";
    pub const C6: &str = A3;

    /// Coefficient of the square root in the identity and O1 quadratic pairs.
    pub const ROOT_COEFF: &str = "(B^3-B)(B^2d^3-B^2d^2-9d+9)";
    pub const RADIUS_IDENTITY_NUM: &str = "B^4d^4-13B^2d^2+36";
}

/// Where an inequality is claimed to hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PolyDomain {
    /// `d ≥ 2`, `B ≥ 2`.
    All,
    /// `d = 2`, `B ≥ 2`; the polynomial is written in `B` alone.
    DEqualsTwo,
}

impl PolyDomain {
    pub fn contains(self, _b: i64, d: i64) -> bool {
        match self {
            PolyDomain::All => true,
            PolyDomain::DEqualsTwo => d == 2,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CatalogueEntry {
    pub name: &'static str,
    pub expr: &'static str,
    pub domain: PolyDomain,
}

const fn entry(name: &'static str, expr: &'static str) -> CatalogueEntry {
    CatalogueEntry { name, expr, domain: PolyDomain::All }
}

const fn entry_d2(name: &'static str, expr: &'static str) -> CatalogueEntry {
    CatalogueEntry { name, expr, domain: PolyDomain::DEqualsTwo }
}

/// Every inequality polynomial claimed non-negative for integer `d, B ≥ 2`.
pub const CATALOGUE: &[CatalogueEntry] = &[
    entry("common denominator", "B^6d^6-6B^4d^4+11B^2d^2-6"),
    entry("identity radius <= 1", "8B^2d^2-30"),
    entry("o1 radius radicand", named::C5),
    entry(
        "o1 radius <= 2/d^2 (squared)",
        "B^12(8d^12-4d^11)+B^10(-16d^12+36d^11+8d^10-12d^9)+B^8(72d^11-552d^9+176d^8+104d^7)\
         +B^6(-8d^11-32d^10-572d^9+144d^8+1388d^7-1120d^6-40d^5)\
         +B^4(176d^9+488d^8+3092d^7-416d^6-344d^5+256d^4+48d^3)\
         +B^2(-1224d^7-2088d^6-7008d^5+3264d^4+3120d^3-1248d^2)+2592d^5+2592d^4-864d^3-2592d^2+576",
    ),
    entry_d2(
        "o1 radius <= 1/4 at d=2",
        "8192B^10+111104B^8-532096B^6+813312B^4-516288B^2+115920",
    ),
    entry(
        "o2 radius <= 3/d^3",
        "2B^6d^6+B^4(-5d^6+20d^5-19d^4)+B^2(16d^5-65d^4+33d^2)+36d^3-18",
    ),
    // upper bounds on every eigenvalue
    entry(
        "identity ev2 <= 1",
        "B^7(d^6-d^4)+B^5(9d^2-d^4)+B^3(-4d^4-34d^2)+B(36d^2-6)",
    ),
    entry(
        "identity ev4 <= 1",
        "B^6(d^6-d^5)+B^4(d^5-6d^4+13d^3)+B^2(-13d^3+11d^2-36d)+36d-6",
    ),
    entry(
        "identity ev7 <= 1",
        "B^12(4d^14-4d^12-4d^11+4d^9)+B^10(-36d^12+12d^11+68d^10+44d^9-88d^7)\
         +B^8(-8d^12-8d^11+44d^10-152d^9-380d^8+148d^7+612d^5)\
         +B^6(120d^10+104d^9+324d^8+108d^7+940d^6-2732d^5-1296d^3)\
         +B^4(-520d^8-168d^7-1008d^6+3728d^5-1056d^4+6720d^3)\
         +B^2(840d^6-1608d^5+960d^4-10176d^3+432d^2+432d)-432d^4+4752d^3-288d^2-432d",
    ),
    entry("identity A1", named::A1),
    entry("identity A2", named::A2),
    entry(
        "identity A3 - A1",
        "B^7(2d^7-d^5-d^4)+B^5(-9d^5+3d^4+11d^3+11d^2)+B^3(-2d^5-2d^4-7d^3-29d^2-18d-18)+B(18d^3+18d^2+6d+18)",
    ),
    entry("identity root factor", "B^2d^3-B^2d^2-9d+9"),
    entry(
        "identity ev9 <= 1",
        "B^12(4d^14-4d^12-4d^11+4d^9)+B^10(-48d^12+60d^11+80d^10-40d^9-52d^7)\
         +B^8(4d^12-176d^11+152d^10-128d^9-500d^8+760d^7+144d^5)\
         +B^6(120d^11+740d^9+24d^8-2496d^7+1360d^6-2180d^5)\
         +B^4(-576d^9-100d^8+2340d^7-828d^6+8492d^5-1656d^4+24d^3)\
         +B^2(-552d^7+240d^6-10920d^5+1272d^4+120d^3+720d^2)+4464d^5-144d^4-144d^3-576d^2",
    ),
    entry("identity A4", named::A4),
    entry("identity A5", named::A5),
    entry("identity A6 - A4", "2Bd(B^2d^2-3)(B^2d^2-2)(B^2d^2-1) - (B^7(d^5+d^4)+B^5(-15d^4-14d^3+d^2)+B^3(-d^5+44d^4+20d^3+5d^2+30d)+B(-30d^4-6d^3-6d^2-30d))"),
    entry(
        "o1 ev2 <= 2/d^2",
        "B^6(2d^6-d^5)+B^4(d^5-8d^4+9d^3)+B^2(-4d^4-9d^3-14d^2)+36d^2-12",
    ),
    entry(
        "o1 ev4 <= 2/d^2",
        "B^12(8d^14-4d^13)+B^10(8d^14+24d^13-64d^12+48d^11)+B^8(-12d^13-120d^12-264d^11+344d^10-148d^9)\
         +B^6(-8d^13-8d^12+40d^11+408d^10+392d^9-1648d^8+584d^7)\
         +B^4(176d^11+176d^10+980d^9+568d^8-56d^7+3568d^6-2112d^5)\
         +B^2(-1224d^9-1224d^8-3120d^7-3072d^6+3840d^5-1248d^4+864d^3)\
         +2592d^7+2592d^6-1728d^5-864d^4-864d^3+576d^2",
    ),
    entry("o1 C1", named::C1),
    entry("o1 C2", named::C2),
    entry(
        "o1 2C3 - d^2 C1",
        "2*2Bd(B^2d^2-3)(B^2d^2-2)(B^2d^2-1) - d^2(B^7(d^5+d^4)+B^5(-d^5-5d^4-11d^3-11d^2)+B^3(4d^4+11d^3+47d^2+18d+18)+B(-36d^2-18d-18))",
    ),
    entry(
        "o2 ev2 <= 3/d^3",
        "2B^6d^6+B^4(d^6+4d^5-9d^4)+B^2(-4d^5-9d^4-36d^3+33d^2)+36d^3-18",
    ),
    entry(
        "o2 ev4 <= 3/d^3",
        "2B^6d^6+B^4(d^6+2d^5-7d^4)+B^2(-2d^5-11d^4-18d^3+15d^2)+18d^3+18d^2-18",
    ),
    entry_d2("o1 ev2 <= 1/4 at d=2", "32B^6+72B^4-236B^2+138"),
    entry_d2(
        "o1 ev4 <= 1/4 at d=2",
        "106496B^10+57344B^8-1271296B^6+2403072B^4-1755264B^2+460224",
    ),
    // non-negativity of every eigenvalue
    entry(
        "identity ev2 >= 0",
        "B^7d^4+B^5(-5d^4-9d^2)+B^3(4d^4+45d^2)-36Bd^2",
    ),
    entry("identity ev4 >= 0", named::RADIUS_IDENTITY_NUM),
    entry(
        "identity ev6 >= 0",
        "4B^12d^9+B^10(-24d^9-88d^7)+B^8(36d^9+528d^7+612d^5)+B^6(-16d^9-792d^7-3672d^5-1296d^3)\
         +B^4(352d^7+5508d^5+7776d^3)+B^2(-2448d^5-11664d^3)+5184d^3",
    ),
    entry(
        "identity ev8 >= 0",
        "4B^12d^9+B^10(-60d^9-52d^7)+B^8(252d^9+780d^7+144d^5)+B^6(-340d^9-3276d^7-2160d^5)\
         +B^4(144d^9+4420d^7+9072d^5)+B^2(-1872d^7-12240d^5)+5184d^5",
    ),
    entry("o1 ev2 >= 0", "(B^2-1)(Bd-3)(Bd+3)(B^2d-4)"),
    entry(
        "o1 ev3 >= 0",
        "4B^12d^9+B^10(-16d^9-8d^8-88d^7)+B^8(20d^9+16d^8+352d^7+176d^6+612d^5)\
         +B^6(-8d^9-8d^8-440d^7-352d^6-2448d^5-1224d^4-1296d^3)\
         +B^4(176d^7+176d^6+3060d^5+2448d^4+5184d^3+2592d^2)\
         +B^2(-1224d^5-1224d^4-6480d^3-5184d^2)+2592d^3+2592d^2",
    ),
    entry(
        "o1 ev5 >= 0",
        "4B^12d^7+B^10(-4d^7-56d^6-52d^5)+B^8(8d^7+88d^6+208d^5+728d^4+144d^3)\
         +B^6(-8d^7-32d^6-332d^5-1216d^4-2172d^3-2016d^2)+B^4(176d^5+488d^4+3252d^3+4104d^2+5616d)\
         +B^2(-1224d^3-2088d^2-8208d-2592)+2592d+2592",
    ),
    entry("o2 ev2 >= 0", "B^4d^3-4B^2d^2-9B^2d+36"),
    entry("o2 ev3 >= 0", "B^6d^3+B^4(5d^3-20d^2+d)+B^2(65d-16d^2)-36"),
    entry("o2 ev4 >= 0", "B^4d^4+B^2(-2d^3-11d^2)+18d+18"),
];

/// One catalogued polynomial that went negative.
#[derive(Clone, Debug, Serialize)]
pub struct PolyViolation {
    pub name: String,
    pub d: i64,
    pub b: i64,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolynomialReport {
    pub d_range: (i64, i64),
    pub b_range: (i64, i64),
    pub polynomials_checked: usize,
    pub evaluations: usize,
    pub violations: Vec<PolyViolation>,
}

impl PolynomialReport {
    pub fn all_nonnegative(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn catalogue_polynomials() -> Result<Vec<(CatalogueEntry, Poly)>> {
    CATALOGUE.iter().map(|e| Poly::parse(e.expr).map(|p| (*e, p))).collect()
}

/// Evaluates every catalogued polynomial exactly on the integer grid.
pub fn verify_appendix_polynomials(d_range: (i64, i64), b_range: (i64, i64)) -> Result<PolynomialReport> {
    crate::spectra::check_grid_range(d_range, b_range)?;
    let polys = catalogue_polynomials()?;
    let mut violations = Vec::new();
    let mut evaluations = 0;
    for (entry, poly) in &polys {
        for d in d_range.0..=d_range.1 {
            for b in b_range.0..=b_range.1 {
                if !entry.domain.contains(b, d) {
                    continue;
                }
                evaluations += 1;
                let v = poly.eval(b, d);
                if v.is_negative() {
                    violations.push(PolyViolation {
                        name: entry.name.to_string(),
                        d,
                        b,
                        value: v.to_string(),
                    });
                }
            }
        }
    }
    Ok(PolynomialReport { d_range, b_range, polynomials_checked: polys.len(), evaluations, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    fn by_name(name: &str) -> Poly {
        let e = CATALOGUE.iter().find(|e| e.name == name).unwrap();
        p(e.expr)
    }

    #[test]
    fn parser_basics() {
        assert_eq!(p("B^2d").eval(3, 5), BigInt::from(45));
        assert_eq!(p("-(B-d)^2").eval(1, 4), BigInt::from(-9));
        assert_eq!(p("2*3B + 1").eval(2, 0), BigInt::from(13));
        assert_eq!(p("(B+1)(B-1)"), &p("B^2") - &p("1"));
        assert!(Poly::parse("B^").is_err());
        assert!(Poly::parse("(B").is_err());
        assert!(Poly::parse("B x").is_err());
        assert!(p("d - d").is_zero());
    }

    #[test]
    fn display_round_trips() {
        for e in CATALOGUE {
            let poly = p(e.expr);
            assert_eq!(p(&poly.to_string()), poly, "{}", e.name);
        }
    }

    #[test]
    fn printed_point_values() {
        assert_eq!(by_name("common denominator").eval(2, 2), BigInt::from(2730));
        assert_eq!(by_name("identity radius <= 1").eval(2, 2), BigInt::from(98));
        assert_eq!(p(named::C5).eval(2, 2), BigInt::from(85572));
        assert_eq!(p(named::A5).eval(2, 2), BigInt::from(8100));
        assert_eq!(p("B^2d^3-B^2d^2-9d+9").eval(2, 2), BigInt::from(7));
        assert_eq!(by_name("o1 ev3 >= 0").eval(2, 2), BigInt::from(169344));
        assert_eq!(by_name("o1 ev5 >= 0").eval(2, 2), BigInt::from(66528));
        assert_eq!(by_name("o1 ev5 >= 0").eval(2, 3), BigInt::from(6345216));
        assert_eq!(by_name("o2 ev2 >= 0").eval(2, 2), BigInt::from(28));
        assert_eq!(by_name("o2 ev3 >= 0").eval(2, 2), BigInt::from(132));
        for d in 2..9 {
            assert!(by_name("identity ev6 >= 0").eval(2, d).is_zero());
            assert!(by_name("identity ev8 >= 0").eval(2, d).is_zero());
            assert!(by_name("identity ev8 >= 0").eval(3, d).is_zero());
        }
    }

    #[test]
    fn printed_specializations() {
        // radicand at B = 2
        let expanded = p("9216d^6-4608d^5-41472d^4+20736d^3+50256d^2-34128d+8100");
        // identity A1 and A4 at B = 2
        let a1 = p("48d^5+48d^4-156d^3-156d^2+108d+108");
        let a4 = p("120d^5-60d^4-300d^3+60d^2+180d");
        let a5 = p("400d^6+400d^5-1500d^4-2000d^3+1000d^2+2400d+900");
        let c1 = p("96d^5-264d^3-48d^2+108d+108");
        for d in 0..12 {
            assert_eq!(p(named::C5).eval(2, d), expanded.eval(0, d));
            assert_eq!(p(named::A1).eval(2, d), a1.eval(0, d));
            assert_eq!(p(named::A4).eval(2, d), a4.eval(0, d));
            assert_eq!(p(named::A5).eval(2, d), a5.eval(0, d));
            assert_eq!(p(named::C1).eval(2, d), c1.eval(0, d));
        }
    }

    #[test]
    fn expanded_difference_matches_definitions() {
        let lhs = by_name("identity A3 - A1");
        let rhs = &p(named::A3) - &p(named::A1);
        assert_eq!(lhs.eval(3, 4), rhs.eval(3, 4));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn full_grid_is_nonnegative() {
        let report = verify_appendix_polynomials((2, 12), (2, 12)).unwrap();
        assert!(report.all_nonnegative(), "{:?}", report.violations);
        assert_eq!(report.polynomials_checked, CATALOGUE.len());
    }

    #[test]
    fn d2_entries_only_evaluated_at_d2() {
        let report = verify_appendix_polynomials((3, 4), (2, 3)).unwrap();
        let d2 = CATALOGUE.iter().filter(|e| e.domain == PolyDomain::DEqualsTwo).count();
        assert_eq!(report.evaluations, (CATALOGUE.len() - d2) * 4);
    }
}
