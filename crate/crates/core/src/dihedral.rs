//! Exact algebra of the dihedral group D_n.
//!
//! An element is written `s^j r^k` with `j ∈ {0, 1}` and `0 ≤ k < n`: first
//! rotate by `k` steps, then (if `j = 1`) apply the base reflection `s`.
//! Composition follows the four-case rule
//!
//! ```text
//! r^i · r^j     = r^(i+j)        r^i · s r^j   = s r^(j-i)
//! s r^i · r^j   = s r^(i+j)      s r^i · s r^j = r^(j-i)
//! ```
//!
//! D4 additionally has a faithful integer matrix representation acting on the
//! plane (x right, y up, counterclockwise rotations): `r` is the 90° rotation
//! and the reflections are labelled `s = V`, `sr = D1`, `sr² = H`, `sr³ = D2`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest order for which associativity is checked over every triple.
pub const EXHAUSTIVE_ASSOCIATIVITY_MAX_ORDER: u32 = 8;
const SAMPLED_TRIPLES: usize = 4096;
const SAMPLE_SEED: u64 = 0x00d4_d4d4;

/// An element `s^j r^k` of D_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    order: u32,
    reflection: bool,
    rotation: u32,
}

impl GroupElement {
    /// Builds `s^j r^k` in D_n, reducing `k` modulo `n`.
    pub fn new(order: u32, reflection: bool, rotation: i64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(0));
        }
        Ok(Self::reduced(order, reflection, rotation))
    }

    fn reduced(order: u32, reflection: bool, rotation: i64) -> Self {
        GroupElement {
            order,
            reflection,
            rotation: rotation.rem_euclid(order as i64) as u32,
        }
    }

    pub fn identity(order: u32) -> Result<Self> {
        Self::new(order, false, 0)
    }

    /// The rotation `r^k`.
    pub fn rotation(order: u32, k: i64) -> Result<Self> {
        Self::new(order, false, k)
    }

    /// The reflection `s r^k`.
    pub fn reflection(order: u32, k: i64) -> Result<Self> {
        Self::new(order, true, k)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_reflection(&self) -> bool {
        self.reflection
    }

    /// The exponent `j` of `s`, either 0 or 1.
    pub fn reflection_j(&self) -> u8 {
        self.reflection as u8
    }

    /// The exponent `k` of `r`, always in `0..n`.
    pub fn rotation_k(&self) -> u32 {
        self.rotation
    }

    pub fn is_identity(&self) -> bool {
        !self.reflection && self.rotation == 0
    }

    /// Position of this element in the canonical listing of [`elements`].
    pub fn index(&self) -> usize {
        self.reflection as usize * self.order as usize + self.rotation as usize
    }

    /// Parses a canonical name such as `e`, `r3`, `s` or `sr2` in D_n.
    pub fn parse(order: u32, name: &str) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(0));
        }
        let unknown = || Error::UnknownElement(name.to_string());
        let (reflection, rest) = match name.strip_prefix('s') {
            Some(rest) => (true, rest),
            None if name == "e" => return Self::identity(order),
            None => (false, name),
        };
        let rotation = match rest {
            "" if reflection => 0,
            "r" => 1,
            _ => {
                let digits = rest.strip_prefix('r').ok_or_else(unknown)?;
                // "r0", "r1", "r+2" and friends are not canonical spellings
                if digits.len() > 1 && digits.starts_with('0')
                    || !digits.bytes().all(|b| b.is_ascii_digit())
                {
                    return Err(unknown());
                }
                let k: u32 = digits.parse().map_err(|_| unknown())?;
                if k < 2 {
                    return Err(unknown());
                }
                k
            }
        };
        if rotation >= order {
            return Err(unknown());
        }
        Self::new(order, reflection, rotation as i64)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.reflection, self.rotation) {
            (false, 0) => f.write_str("e"),
            (false, 1) => f.write_str("r"),
            (false, k) => write!(f, "r{k}"),
            (true, 0) => f.write_str("s"),
            (true, 1) => f.write_str("sr"),
            (true, k) => write!(f, "sr{k}"),
        }
    }
}

/// The product `a · b`.
pub fn compose(a: GroupElement, b: GroupElement) -> Result<GroupElement> {
    if a.order != b.order {
        return Err(Error::OrderMismatch {
            left: a.order,
            right: b.order,
        });
    }
    Ok(compose_unchecked(a, b))
}

fn compose_unchecked(a: GroupElement, b: GroupElement) -> GroupElement {
    let (i, j) = (a.rotation as i64, b.rotation as i64);
    if b.reflection {
        // r^i · s r^j = s r^(j-i) and s r^i · s r^j = r^(j-i)
        GroupElement::reduced(a.order, !a.reflection, j - i)
    } else {
        GroupElement::reduced(a.order, a.reflection, i + j)
    }
}

pub fn inverse(g: GroupElement) -> GroupElement {
    if g.reflection {
        g
    } else {
        GroupElement::reduced(g.order, false, -(g.rotation as i64))
    }
}

/// `g` composed with itself `m` times; negative `m` uses the inverse.
pub fn power(g: GroupElement, m: i64) -> GroupElement {
    let identity = GroupElement::reduced(g.order, false, 0);
    if g.reflection {
        return if m.rem_euclid(2) == 0 { identity } else { g };
    }
    let n = g.order as i64;
    // (k * m) mod n without overflow
    let k = ((g.rotation as i128 * m as i128).rem_euclid(n as i128)) as i64;
    GroupElement::reduced(g.order, false, k)
}

/// All 2n elements in the order `e, r, …, r^(n-1), s, sr, …, sr^(n-1)`.
pub fn elements(n: u32) -> Result<Vec<GroupElement>> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    Ok([false, true]
        .into_iter()
        .flat_map(|reflection| {
            (0..n).map(move |k| GroupElement {
                order: n,
                reflection,
                rotation: k,
            })
        })
        .collect())
}

/// Names of the eight D4 matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixLabel {
    R0,
    R1,
    R2,
    R3,
    V,
    H,
    D1,
    D2,
}

impl MatrixLabel {
    pub const ALL: [MatrixLabel; 8] = [
        MatrixLabel::R0,
        MatrixLabel::R1,
        MatrixLabel::R2,
        MatrixLabel::R3,
        MatrixLabel::V,
        MatrixLabel::H,
        MatrixLabel::D1,
        MatrixLabel::D2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatrixLabel::R0 => "R0",
            MatrixLabel::R1 => "R1",
            MatrixLabel::R2 => "R2",
            MatrixLabel::R3 => "R3",
            MatrixLabel::V => "V",
            MatrixLabel::H => "H",
            MatrixLabel::D1 => "D1",
            MatrixLabel::D2 => "D2",
        }
    }

    /// The D4 element this matrix represents.
    pub fn element(self) -> GroupElement {
        let (reflection, rotation) = match self {
            MatrixLabel::R0 => (false, 0),
            MatrixLabel::R1 => (false, 1),
            MatrixLabel::R2 => (false, 2),
            MatrixLabel::R3 => (false, 3),
            MatrixLabel::V => (true, 0),
            MatrixLabel::D1 => (true, 1),
            MatrixLabel::H => (true, 2),
            MatrixLabel::D2 => (true, 3),
        };
        GroupElement::reduced(4, reflection, rotation)
    }

    fn entries(self) -> [[i32; 2]; 2] {
        match self {
            MatrixLabel::R0 => [[1, 0], [0, 1]],
            MatrixLabel::R1 => [[0, -1], [1, 0]],
            MatrixLabel::R2 => [[-1, 0], [0, -1]],
            MatrixLabel::R3 => [[0, 1], [-1, 0]],
            MatrixLabel::V => [[-1, 0], [0, 1]],
            MatrixLabel::H => [[1, 0], [0, -1]],
            MatrixLabel::D1 => [[0, 1], [1, 0]],
            MatrixLabel::D2 => [[0, -1], [-1, 0]],
        }
    }
}

impl fmt::Display for MatrixLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MatrixLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::UnknownElement(s.to_string()))
    }
}

/// Exact 2×2 integer matrix of a D4 element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransformMatrix {
    entries: [[i32; 2]; 2],
    label: MatrixLabel,
}

impl TransformMatrix {
    pub fn entries(&self) -> [[i32; 2]; 2] {
        self.entries
    }

    pub fn label(&self) -> MatrixLabel {
        self.label
    }

    pub fn determinant(&self) -> i32 {
        let m = self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn transpose(&self) -> [[i32; 2]; 2] {
        let m = self.entries;
        [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
    }

    /// Applies the matrix to an integer column vector.
    pub fn apply_i64(&self, x: i64, y: i64) -> (i64, i64) {
        let m = self.entries;
        (
            m[0][0] as i64 * x + m[0][1] as i64 * y,
            m[1][0] as i64 * x + m[1][1] as i64 * y,
        )
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = self.entries;
        (
            m[0][0] as f64 * x + m[0][1] as f64 * y,
            m[1][0] as f64 * x + m[1][1] as f64 * y,
        )
    }
}

/// Plain integer 2×2 product, row-major.
pub fn mat_mul(a: [[i32; 2]; 2], b: [[i32; 2]; 2]) -> [[i32; 2]; 2] {
    let mut out = [[0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Matrix representation of a D4 element.
pub fn matrix_of(g: GroupElement) -> Result<TransformMatrix> {
    if g.order != 4 {
        return Err(Error::UnsupportedOrder(g.order));
    }
    let label = match (g.reflection, g.rotation) {
        (false, 0) => MatrixLabel::R0,
        (false, 1) => MatrixLabel::R1,
        (false, 2) => MatrixLabel::R2,
        (false, _) => MatrixLabel::R3,
        (true, 0) => MatrixLabel::V,
        (true, 1) => MatrixLabel::D1,
        (true, 2) => MatrixLabel::H,
        (true, _) => MatrixLabel::D2,
    };
    Ok(TransformMatrix {
        entries: label.entries(),
        label,
    })
}

/// Multiplication table of D_n over the canonical element order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTable {
    elements: Vec<GroupElement>,
    products: Vec<Vec<GroupElement>>,
}

impl CayleyTable {
    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// `elements[row] · elements[col]`.
    pub fn get(&self, row: usize, col: usize) -> GroupElement {
        self.products[row][col]
    }

    pub fn rows(&self) -> &[Vec<GroupElement>] {
        &self.products
    }

    /// True when every row and every column is a permutation of the elements.
    pub fn is_latin_square(&self) -> bool {
        let size = self.elements.len();
        let is_perm = |items: &mut dyn Iterator<Item = GroupElement>| {
            let mut seen = vec![false; size];
            for g in items {
                let idx = g.index();
                if idx >= size || seen[idx] {
                    return false;
                }
                seen[idx] = true;
            }
            seen.iter().all(|&s| s)
        };
        (0..size).all(|r| is_perm(&mut self.products[r].iter().copied()))
            && (0..size).all(|c| is_perm(&mut self.products.iter().map(|row| row[c])))
    }

    /// CSV with a header row and a leading label column.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for g in &self.elements {
            out.push(',');
            out.push_str(&g.to_string());
        }
        out.push('\n');
        for (g, row) in self.elements.iter().zip(&self.products) {
            out.push_str(&g.to_string());
            for h in row {
                out.push(',');
                out.push_str(&h.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn cayley_table(n: u32) -> Result<CayleyTable> {
    let elements = elements(n)?;
    let products = elements
        .iter()
        .map(|&a| elements.iter().map(|&b| compose_unchecked(a, b)).collect())
        .collect();
    Ok(CayleyTable { elements, products })
}

/// A single failed group law, naming the offending elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomViolation {
    Closure {
        a: GroupElement,
        b: GroupElement,
    },
    Identity {
        g: GroupElement,
    },
    Inverse {
        g: GroupElement,
    },
    Associativity {
        a: GroupElement,
        b: GroupElement,
        c: GroupElement,
    },
    RotationOrder,
    /// `s r^k · s ≠ r^(-k)`
    ReflectionConjugation {
        k: u32,
    },
    /// `(s r^k)² ≠ e`
    ReflectionInvolution {
        k: u32,
    },
    Cardinality {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::Closure { a, b } => write!(f, "closure fails for ({a},{b})"),
            AxiomViolation::Identity { g } => write!(f, "identity fails for {g}"),
            AxiomViolation::Inverse { g } => write!(f, "inverse fails for {g}"),
            AxiomViolation::Associativity { a, b, c } => {
                write!(f, "associativity fails for ({a},{b},{c})")
            }
            AxiomViolation::RotationOrder => f.write_str("r^n != e"),
            AxiomViolation::ReflectionConjugation { k } => write!(f, "sr^{k} s != r^-{k}"),
            AxiomViolation::ReflectionInvolution { k } => write!(f, "(sr^{k})^2 != e"),
            AxiomViolation::Cardinality { expected, found } => {
                write!(f, "expected {expected} elements, found {found}")
            }
        }
    }
}

/// Outcome of [`verify_group_axioms`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub order: u32,
    pub element_count: usize,
    pub exhaustive_associativity: bool,
    pub triples_checked: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,status,detail\n");
        let status = |pred: &dyn Fn(&AxiomViolation) -> bool| {
            let failures: Vec<String> = self
                .violations
                .iter()
                .filter(|v| pred(v))
                .map(ToString::to_string)
                .collect();
            if failures.is_empty() {
                ("pass", String::new())
            } else {
                ("fail", failures.join("; "))
            }
        };
        type Matcher = Box<dyn Fn(&AxiomViolation) -> bool>;
        let rows: [(&str, Matcher); 7] = [
            (
                "cardinality",
                Box::new(|v| matches!(v, AxiomViolation::Cardinality { .. })),
            ),
            (
                "closure",
                Box::new(|v| matches!(v, AxiomViolation::Closure { .. })),
            ),
            (
                "identity",
                Box::new(|v| matches!(v, AxiomViolation::Identity { .. })),
            ),
            (
                "inverse",
                Box::new(|v| matches!(v, AxiomViolation::Inverse { .. })),
            ),
            (
                "associativity",
                Box::new(|v| matches!(v, AxiomViolation::Associativity { .. })),
            ),
            (
                "rotation_order",
                Box::new(|v| matches!(v, AxiomViolation::RotationOrder)),
            ),
            (
                "reflection_identities",
                Box::new(|v| {
                    matches!(
                        v,
                        AxiomViolation::ReflectionConjugation { .. }
                            | AxiomViolation::ReflectionInvolution { .. }
                    )
                }),
            ),
        ];
        for (name, pred) in rows.iter() {
            let (st, mut detail) = status(pred.as_ref());
            if *name == "associativity" && detail.is_empty() {
                let mode = if self.exhaustive_associativity {
                    "exhaustive"
                } else {
                    "sampled"
                };
                detail = format!("{mode} {} triples", self.triples_checked);
            }
            out.push_str(&format!("{name},{st},{detail}\n"));
        }
        out
    }
}

/// Checks the group laws for D_n as implemented by [`compose`].
///
/// Associativity is exhaustive for `n ≤ 8` and sampled with a fixed seed
/// above that.
pub fn verify_group_axioms(n: u32) -> Result<AxiomReport> {
    verify_with(n, compose_unchecked)
}

pub(crate) fn verify_with(
    n: u32,
    op: impl Fn(GroupElement, GroupElement) -> GroupElement,
) -> Result<AxiomReport> {
    let all = elements(n)?;
    let e = all[0];
    let size = 2 * n as usize;
    let mut violations = Vec::new();
    if all.len() != size {
        violations.push(AxiomViolation::Cardinality {
            expected: size,
            found: all.len(),
        });
    }
    let in_group = |g: GroupElement| g.order == n && g.rotation < n;

    for &a in &all {
        for &b in &all {
            if !in_group(op(a, b)) {
                violations.push(AxiomViolation::Closure { a, b });
            }
        }
    }
    for &g in &all {
        if op(e, g) != g || op(g, e) != g {
            violations.push(AxiomViolation::Identity { g });
        }
        let inv = inverse(g);
        if op(g, inv) != e || op(inv, g) != e {
            violations.push(AxiomViolation::Inverse { g });
        }
    }

    let exhaustive = n <= EXHAUSTIVE_ASSOCIATIVITY_MAX_ORDER;
    let mut check_triple = |a: GroupElement, b: GroupElement, c: GroupElement| {
        if op(op(a, b), c) != op(a, op(b, c)) {
            violations.push(AxiomViolation::Associativity { a, b, c });
        }
    };
    let triples_checked = if exhaustive {
        for &a in &all {
            for &b in &all {
                for &c in &all {
                    check_triple(a, b, c);
                }
            }
        }
        size * size * size
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ n as u64);
        for _ in 0..SAMPLED_TRIPLES {
            let a = all[rng.random_range(0..size)];
            let b = all[rng.random_range(0..size)];
            let c = all[rng.random_range(0..size)];
            check_triple(a, b, c);
        }
        SAMPLED_TRIPLES
    };

    let r = GroupElement::reduced(n, false, 1);
    let mut acc = e;
    for _ in 0..n {
        acc = op(acc, r);
    }
    if acc != e {
        violations.push(AxiomViolation::RotationOrder);
    }
    let s = GroupElement::reduced(n, true, 0);
    for k in 0..n {
        let srk = GroupElement::reduced(n, true, k as i64);
        if op(srk, s) != GroupElement::reduced(n, false, -(k as i64)) {
            violations.push(AxiomViolation::ReflectionConjugation { k });
        }
        if op(srk, srk) != e {
            violations.push(AxiomViolation::ReflectionInvolution { k });
        }
    }

    Ok(AxiomReport {
        order: n,
        element_count: all.len(),
        exhaustive_associativity: exhaustive,
        triples_checked,
        violations,
    })
}
