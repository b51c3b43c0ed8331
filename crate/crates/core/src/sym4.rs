//! The symmetric group S4 in a fixed enumeration.
//!
//! Elements are labelled 1..=24: the identity, then the six transpositions,
//! the three double transpositions, the eight 3-cycles and finally the six
//! 4-cycles. Within each class the order is frozen so that 24×24 matrices
//! indexed by permutations are comparable entry-by-entry across runs.
//!
//! Composition applies the right operand first: `compose(p, q)(x) = p(q(x))`.

use std::fmt;

/// Images (0-based) and cycle notation of every element, in label order.
const TABLE: [([u8; 4], &str); 24] = [
    ([0, 1, 2, 3], "()"),
    ([1, 0, 2, 3], "(12)"),
    ([2, 1, 0, 3], "(13)"),
    ([3, 1, 2, 0], "(14)"),
    ([0, 2, 1, 3], "(23)"),
    ([0, 3, 2, 1], "(24)"),
    ([0, 1, 3, 2], "(34)"),
    ([1, 0, 3, 2], "(12)(34)"),
    ([2, 3, 0, 1], "(13)(24)"),
    ([3, 2, 1, 0], "(14)(23)"),
    ([1, 2, 0, 3], "(123)"),
    ([2, 0, 1, 3], "(132)"),
    ([1, 3, 2, 0], "(124)"),
    ([3, 0, 2, 1], "(142)"),
    ([2, 1, 3, 0], "(134)"),
    ([3, 1, 0, 2], "(143)"),
    ([0, 2, 3, 1], "(234)"),
    ([0, 3, 1, 2], "(243)"),
    ([1, 2, 3, 0], "(1234)"),
    ([1, 3, 0, 2], "(1243)"),
    ([2, 3, 1, 0], "(1324)"),
    ([2, 0, 3, 1], "(1342)"),
    ([3, 2, 0, 1], "(1423)"),
    ([3, 0, 1, 2], "(1432)"),
];

/// Number of elements of S4.
pub const ORDER: usize = 24;

/// An element of S4 together with its canonical label.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm4 {
    images: [u8; 4],
    label: u8,
}

/// Conjugacy classes of S4, named by the partition of 4 they induce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CycleType {
    /// {1,1,1,1}
    Identity,
    /// {2,1,1}
    Transposition,
    /// {2,2}
    DoubleTransposition,
    /// {3,1}
    ThreeCycle,
    /// {4}
    FourCycle,
}

impl CycleType {
    /// All five classes in label order.
    pub const ALL: [CycleType; 5] = [
        CycleType::Identity,
        CycleType::Transposition,
        CycleType::DoubleTransposition,
        CycleType::ThreeCycle,
        CycleType::FourCycle,
    ];

    pub fn partition(self) -> &'static [u8] {
        match self {
            CycleType::Identity => &[1, 1, 1, 1],
            CycleType::Transposition => &[2, 1, 1],
            CycleType::DoubleTransposition => &[2, 2],
            CycleType::ThreeCycle => &[3, 1],
            CycleType::FourCycle => &[4],
        }
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(self) -> u32 {
        self.partition().len() as u32
    }

    /// Position of this class in [`CycleType::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Range of labels (1-based, inclusive) occupied by the class.
    pub fn label_range(self) -> std::ops::RangeInclusive<u8> {
        match self {
            CycleType::Identity => 1..=1,
            CycleType::Transposition => 2..=7,
            CycleType::DoubleTransposition => 8..=10,
            CycleType::ThreeCycle => 11..=18,
            CycleType::FourCycle => 19..=24,
        }
    }

    fn from_partition(mut parts: Vec<u8>) -> CycleType {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        match parts.as_slice() {
            [1, 1, 1, 1] => CycleType::Identity,
            [2, 1, 1] => CycleType::Transposition,
            [2, 2] => CycleType::DoubleTransposition,
            [3, 1] => CycleType::ThreeCycle,
            [4] => CycleType::FourCycle,
            _ => unreachable!("not a partition of 4: {parts:?}"),
        }
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.partition().iter().map(u8::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Perm4 {
    /// The element with canonical label `label` (1..=24).
    pub fn from_label(label: u8) -> Option<Perm4> {
        let idx = (label as usize).checked_sub(1)?;
        TABLE.get(idx).map(|(images, _)| Perm4 { images: *images, label })
    }

    /// Builds a permutation from its (0-based) images; `None` if not a bijection.
    pub fn from_images(images: [u8; 4]) -> Option<Perm4> {
        TABLE.iter().position(|(im, _)| *im == images).map(|i| Perm4 { images, label: i as u8 + 1 })
    }

    pub fn identity() -> Perm4 {
        Perm4 { images: TABLE[0].0, label: 1 }
    }

    /// Canonical label in 1..=24.
    pub fn label(&self) -> u8 {
        self.label
    }

    /// Zero-based index into [`enumerate_s4`].
    pub fn index(&self) -> usize {
        self.label as usize - 1
    }

    /// Images of 0..4 (0-based).
    pub fn images(&self) -> [u8; 4] {
        self.images
    }

    /// Image of `x` (0-based).
    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn compose(&self, right: &Perm4) -> Perm4 {
        compose(self, right)
    }

    pub fn inverse(&self) -> Perm4 {
        inverse(self)
    }

    pub fn cycle_type(&self) -> CycleType {
        cycle_type(self)
    }

    pub fn cycle_count(&self) -> u32 {
        self.cycle_type().cycle_count()
    }

    /// Cycle notation on {1,2,3,4}, e.g. `(1243)`.
    pub fn notation(&self) -> &'static str {
        TABLE[self.index()].1
    }
}

impl fmt::Debug for Perm4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm4#{}{}", self.label, self.notation())
    }
}

impl fmt::Display for Perm4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.notation())
    }
}

/// All 24 elements, element `i` carrying label `i + 1`.
pub fn enumerate_s4() -> [Perm4; ORDER] {
    std::array::from_fn(|i| Perm4 { images: TABLE[i].0, label: i as u8 + 1 })
}

/// `x ↦ p(q(x))`.
pub fn compose(p: &Perm4, q: &Perm4) -> Perm4 {
    let images = std::array::from_fn(|x| p.images[q.images[x] as usize]);
    Perm4::from_images(images).expect("composition of bijections is a bijection")
}

pub fn inverse(p: &Perm4) -> Perm4 {
    let mut images = [0u8; 4];
    for (x, &y) in p.images.iter().enumerate() {
        images[y as usize] = x as u8;
    }
    Perm4::from_images(images).expect("inverse of a bijection is a bijection")
}

/// Partition of 4 given by the cycle lengths of `p`, fixed points included.
pub fn cycle_type(p: &Perm4) -> CycleType {
    let mut seen = [false; 4];
    let mut parts = Vec::with_capacity(4);
    for start in 0..4 {
        if seen[start] {
            continue;
        }
        let mut len = 0u8;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = p.images[x] as usize;
            len += 1;
        }
        parts.push(len);
    }
    CycleType::from_partition(parts)
}

/// Cycle type of `σ⁻¹π`, the datum every Gram and Weingarten entry depends on.
pub fn relative_cycle_type(sigma: &Perm4, pi: &Perm4) -> CycleType {
    cycle_type(&compose(&inverse(sigma), pi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(label: u8) -> Perm4 {
        Perm4::from_label(label).unwrap()
    }

    fn by_notation(s: &str) -> Perm4 {
        enumerate_s4().into_iter().find(|q| q.notation() == s).unwrap()
    }

    #[test]
    fn enumeration_matches_table_rows() {
        let all = enumerate_s4();
        assert_eq!(all[0], Perm4::identity());
        assert_eq!(all[0].label(), 1);
        assert_eq!(all[7].notation(), "(12)(34)");
        assert_eq!(all[7].label(), 8);
        assert_eq!(all[18].notation(), "(1234)");
        assert_eq!(all[18].label(), 19);
        for (i, q) in all.iter().enumerate() {
            assert_eq!(q.label() as usize, i + 1);
        }
        let mut imgs: Vec<[u8; 4]> = all.iter().map(|q| q.images()).collect();
        imgs.sort();
        imgs.dedup();
        assert_eq!(imgs.len(), 24);
    }

    #[test]
    fn notation_agrees_with_images() {
        // parse cycle notation independently and compare with the stored images
        for q in enumerate_s4() {
            let mut images = [0u8, 1, 2, 3];
            for cyc in q.notation().split(')').filter(|s| s.len() > 1) {
                let pts: Vec<u8> = cyc.trim_start_matches('(').bytes().map(|b| b - b'1').collect();
                for k in 0..pts.len() {
                    images[pts[k] as usize] = pts[(k + 1) % pts.len()];
                }
            }
            assert_eq!(images, q.images(), "{}", q.notation());
        }
    }

    #[test]
    fn compose_examples() {
        let t = by_notation("(12)");
        assert_eq!(compose(&t, &t), Perm4::identity());
        for s in enumerate_s4() {
            assert_eq!(compose(&s, &Perm4::identity()), s);
            assert_eq!(compose(&Perm4::identity(), &s), s);
        }
        let c = by_notation("(123)");
        assert_eq!(compose(&c, &c), by_notation("(132)"));
    }

    #[test]
    fn compose_applies_right_operand_first() {
        // (12)∘(23): 1 -> 1 -> 2, 2 -> 3 -> 3, 3 -> 2 -> 1  => (123)
        let r = compose(&by_notation("(12)"), &by_notation("(23)"));
        assert_eq!(r, by_notation("(123)"));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&Perm4::identity()), Perm4::identity());
        assert_eq!(inverse(&by_notation("(1234)")), by_notation("(1432)"));
        let dt = by_notation("(12)(34)");
        assert_eq!(inverse(&dt), dt);
    }

    #[test]
    fn cycle_type_examples() {
        let id = cycle_type(&Perm4::identity());
        assert_eq!(id, CycleType::Identity);
        assert_eq!(id.cycle_count(), 4);
        let t = cycle_type(&by_notation("(12)"));
        assert_eq!(t, CycleType::Transposition);
        assert_eq!(t.cycle_count(), 3);
        let f = cycle_type(&by_notation("(1234)"));
        assert_eq!(f, CycleType::FourCycle);
        assert_eq!(f.cycle_count(), 1);
    }

    #[test]
    fn group_axioms() {
        let all = enumerate_s4();
        for a in &all {
            for b in &all {
                let ab = compose(a, b);
                for c in &all {
                    assert_eq!(compose(&ab, c), compose(a, &compose(b, c)));
                }
            }
        }
        for a in &all {
            let inv: Vec<_> = all.iter().filter(|b| compose(a, b) == Perm4::identity()).collect();
            assert_eq!(inv.len(), 1);
            assert_eq!(*inv[0], inverse(a));
            assert_eq!(compose(inv[0], a), Perm4::identity());
        }
        let ids: Vec<_> = all.iter().filter(|e| all.iter().all(|a| compose(e, a) == *a)).collect();
        assert_eq!(ids.len(), 1);
    }

    #[test]
    fn class_sizes_match_label_ranges() {
        let all = enumerate_s4();
        let sizes = [1, 6, 3, 8, 6];
        for (ct, size) in CycleType::ALL.iter().zip(sizes) {
            let labels: Vec<u8> = all.iter().filter(|q| q.cycle_type() == *ct).map(|q| q.label()).collect();
            assert_eq!(labels.len(), size);
            assert_eq!(labels, ct.label_range().collect::<Vec<_>>());
        }
    }

    #[test]
    fn relative_cycle_type_is_symmetric() {
        let all = enumerate_s4();
        for s in &all {
            for q in &all {
                assert_eq!(relative_cycle_type(s, q), relative_cycle_type(q, s));
            }
        }
        assert_eq!(p(1).cycle_count(), 4);
    }
}
