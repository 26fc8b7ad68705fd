//! Arithmetic for the binary extension fields GF(q), q = 2^p, together with
//! the group transform used by the soft-decision check-node update.
//!
//! Elements are stored as integers in `0..q` interpreted as coefficient
//! vectors of the polynomial basis. Multiplication goes through exp/log
//! tables built from a fixed primitive polynomial per extension degree, so
//! that element labels are reproducible across runs.

use std::fmt;

/// A field element. Fields up to GF(256) are supported, so a byte is enough.
pub type Symbol = u8;

/// Primitive polynomials per extension degree `p` (index 1..=8), written with
/// the top coefficient included, e.g. `0b111` is x^2 + x + 1.
const PRIMITIVE_POLY: [u16; 9] = [
    0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10001001, 0b100011101,
];

/// Errors from field construction and element arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    /// The requested order is not a power of two in `[2, 256]`.
    InvalidOrder(usize),
    /// Multiplicative inverse of zero.
    DivisionByZero,
    /// A probability vector's length does not match the field order.
    Dimension { expected: usize, got: usize },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::InvalidOrder(q) => {
                write!(f, "invalid field order {q}: must be a power of 2 in [2, 256]")
            }
            FieldError::DivisionByZero => write!(f, "multiplicative inverse of zero"),
            FieldError::Dimension { expected, got } => {
                write!(f, "vector length {got} does not match field order {expected}")
            }
        }
    }
}

impl std::error::Error for FieldError {}

/// Arithmetic context for GF(q), q = 2^p.
///
/// Immutable after construction; all operations are pure, so a `GField` can be
/// shared freely across worker threads.
#[derive(Debug, Clone)]
pub struct GField {
    q: usize,
    ext_degree: u32,
    exp: Vec<Symbol>,
    log: Vec<u16>,
}

impl GField {
    /// Builds the arithmetic context for GF(q).
    ///
    /// Fails unless `q` is a power of two in `[2, 256]`.
    pub fn new(q: usize) -> Result<Self, FieldError> {
        if !(2..=256).contains(&q) || !q.is_power_of_two() {
            return Err(FieldError::InvalidOrder(q));
        }
        let p = q.trailing_zeros();
        let poly = PRIMITIVE_POLY[p as usize] as usize;

        // exp[i] = alpha^i for i in 0..q-1; log is its inverse on 1..q.
        let mut exp = vec![0 as Symbol; q - 1];
        let mut log = vec![0u16; q];
        let mut x = 1usize;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = x as Symbol;
            log[x] = i as u16;
            x <<= 1;
            if x & q != 0 {
                x ^= poly;
            }
        }
        debug_assert_eq!(x, 1, "primitive polynomial must generate the full group");

        Ok(GField { q, ext_degree: p, exp, log })
    }

    /// Field order q.
    pub fn order(&self) -> usize {
        self.q
    }

    /// Extension degree p, with q = 2^p.
    pub fn ext_degree(&self) -> u32 {
        self.ext_degree
    }

    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> Symbol {
        self.exp[if self.q == 2 { 0 } else { 1 }]
    }

    /// Addition; characteristic 2, so this is XOR and is its own inverse.
    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        let i = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.exp[i % (self.q - 1)]
    }

    /// Multiplicative inverse; fails on zero.
    #[inline]
    pub fn inv(&self, a: Symbol) -> Result<Symbol, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let i = (self.q - 1 - self.log[a as usize] as usize) % (self.q - 1);
        Ok(self.exp[i])
    }

    /// Repeated multiplication, `a^e`, with `a^0 = 1`.
    pub fn pow(&self, a: Symbol, e: u32) -> Symbol {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let i = self.log[a as usize] as usize * e as usize;
        self.exp[i % (self.q - 1)]
    }

    /// All nonzero elements, ascending.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = Symbol> + '_ {
        (1..self.q).map(|x| x as Symbol)
    }
}

/// A length-q vector of probabilities indexed by field element.
///
/// Entry `i` is the probability of symbol `i`; element 0 is included so the
/// vector spans the full additive group, which the transform requires.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

/// Lower clamp applied during normalization to keep products away from zero.
pub const PROB_FLOOR: f64 = 1e-30;

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Self {
        ProbVector { entries }
    }

    /// Point mass on one symbol.
    pub fn delta(q: usize, at: Symbol) -> Self {
        let mut entries = vec![0.0; q];
        entries[at as usize] = 1.0;
        ProbVector { entries }
    }

    pub fn uniform(q: usize) -> Self {
        ProbVector { entries: vec![1.0 / q as f64; q] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    /// Floors entries at `PROB_FLOOR` and rescales to sum 1; afterwards every
    /// entry lies in `[PROB_FLOOR, 1]`.
    pub fn normalize(&mut self) {
        for e in &mut self.entries {
            if !e.is_finite() || *e < PROB_FLOOR {
                *e = PROB_FLOOR;
            }
        }
        let total: f64 = self.entries.iter().sum();
        for e in &mut self.entries {
            *e /= total;
        }
    }

    /// Index of the largest entry, lowest index on ties.
    pub fn argmax(&self) -> Symbol {
        let mut best = 0usize;
        for (i, &v) in self.entries.iter().enumerate() {
            if v > self.entries[best] {
                best = i;
            }
        }
        best as Symbol
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Direction of [`group_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    Forward,
    Inverse,
}

/// Walsh–Hadamard transform over the additive group of GF(2^p).
///
/// The forward transform maps a distribution to its character spectrum; the
/// inverse is the forward pass scaled by 1/q. The transform turns additive
/// convolution over the field into an entrywise product, which is what the
/// check-node update of the sum-product decoder exploits.
pub fn group_transform(
    field: &GField,
    v: &ProbVector,
    direction: TransformDirection,
) -> Result<ProbVector, FieldError> {
    if v.len() != field.order() {
        return Err(FieldError::Dimension { expected: field.order(), got: v.len() });
    }
    let mut data = v.entries.clone();
    wht_in_place(&mut data);
    if direction == TransformDirection::Inverse {
        let scale = 1.0 / field.order() as f64;
        for x in &mut data {
            *x *= scale;
        }
    }
    Ok(ProbVector { entries: data })
}

/// In-place butterfly; `data.len()` must be a power of two.
pub(crate) fn wht_in_place(data: &mut [f64]) {
    debug_assert!(data.len().is_power_of_two());
    let mut h = 1;
    while h < data.len() {
        for block in (0..data.len()).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (data[i], data[i + h]);
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}
