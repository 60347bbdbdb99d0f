//! Exact arithmetic over GF(2^w) and its degree-m extensions GF((2^w)^m).
//!
//! Base fields use log/antilog tables built once at construction (w <= 16).
//! Extension fields represent elements as length-m coordinate vectors over
//! the base field in a polynomial basis; the modulus is found by a
//! deterministic search so the same (w, m) pair always yields the same field.
//!
//! All operations are pure; a [`Field`] is an immutable handle that can be
//! shared freely across threads. Elements carry the id of the field they
//! belong to and mixing elements of different fields is rejected.

mod ext;
mod matrix;

pub use matrix::Matrix;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default irreducible (primitive) polynomials per word size.
/// 0x13 = x^4+x+1, 0x11d = x^8+x^4+x^3+x^2+1, 0x1100b = x^16+x^12+x^3+x+1.
const DEFAULT_POLY: [(u32, u32); 3] = [(4, 0x13), (8, 0x11d), (16, 0x1100b)];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("element belongs to a different field")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("operation requires an extension field element")]
    NotExtension,
    #[error("word size {0} unsupported (expected 2..=16)")]
    UnsupportedWidth(u32),
    #[error("polynomial 0x{0:x} is not primitive of degree {1}")]
    NotPrimitive(u32, u32),
    #[error("no default polynomial for w={0}")]
    NoDefaultPoly(u32),
    #[error("extension degree must be at least 2")]
    DegenerateExtension,
    #[error("no irreducible modulus found for degree {0}")]
    NoIrreducible(usize),
    #[error("value 0x{0:x} out of range for the field")]
    ValueOutOfRange(u64),
    #[error("wrong coordinate count: got {got}, field degree is {want}")]
    WrongDegree { got: usize, want: usize },
    #[error("singular matrix")]
    Singular,
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Stable identifier derived from the field parameters, used to reject
/// cross-field element mixing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldId(u64);

/// Serializable description of a field: word size, polynomial bits and,
/// for extensions, the degree. The extension modulus is re-derived
/// deterministically rather than serialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub w: u32,
    pub poly: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

struct FieldRepr {
    id: FieldId,
    w: u32,
    poly: u32,
    /// 2^w - 1
    order: u32,
    log: Vec<u16>,
    /// Doubled antilog table so products of logs index without a modulo.
    exp: Vec<u16>,
    ext: Option<ext::Extension>,
}

/// Handle to a finite field; cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<FieldRepr>);

/// An element of a [`Field`]. Base field elements hold a single w-bit word,
/// extension elements hold m words (coordinates in the polynomial basis).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: FieldId,
    words: Vec<u16>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.words.len() == 1 {
            write!(f, "fe({:#x})", self.words[0])
        } else {
            write!(f, "fe({:x?})", self.words)
        }
    }
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&x| x == 0)
    }

    /// Coordinates over the base field (length 1 for base field elements).
    pub fn words(&self) -> &[u16] {
        &self.words
    }

    /// The value of a base field element.
    pub fn base_value(&self) -> Option<u16> {
        if self.words.len() == 1 {
            Some(self.words[0])
        } else {
            None
        }
    }
}

fn fnv1a(data: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &d in data {
        for b in d.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

impl Field {
    /// The base field GF(2^w) with the given polynomial (top bit included).
    /// The polynomial must be primitive with x as a generator so the
    /// log/antilog tables cover every nonzero element.
    pub fn gf(w: u32, poly: u32) -> Result<Field, FieldError> {
        let (log, exp, order) = build_tables(w, poly)?;
        let id = FieldId(fnv1a(&[w as u64, poly as u64, 1]));
        Ok(Field(Arc::new(FieldRepr {
            id,
            w,
            poly,
            order,
            log,
            exp,
            ext: None,
        })))
    }

    /// GF(2^w) with the default published polynomial for w in {4, 8, 16}.
    pub fn gf_default(w: u32) -> Result<Field, FieldError> {
        let poly = DEFAULT_POLY
            .iter()
            .find(|&&(dw, _)| dw == w)
            .map(|&(_, p)| p)
            .ok_or(FieldError::NoDefaultPoly(w))?;
        Field::gf(w, poly)
    }

    /// The degree-m extension GF((2^w)^m) in a polynomial basis. The modulus
    /// is the first irreducible monic polynomial in a fixed enumeration, so
    /// the construction is deterministic. Built fields are cached: the
    /// modulus search and Frobenius table are worth reusing.
    pub fn extension(w: u32, poly: u32, m: usize) -> Result<Field, FieldError> {
        use std::collections::HashMap;
        use std::sync::{Mutex, OnceLock};
        static CACHE: OnceLock<Mutex<HashMap<(u32, u32, usize), Field>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(f) = cache.lock().unwrap().get(&(w, poly, m)) {
            return Ok(f.clone());
        }
        let built = Self::extension_uncached(w, poly, m)?;
        cache.lock().unwrap().insert((w, poly, m), built.clone());
        Ok(built)
    }

    fn extension_uncached(w: u32, poly: u32, m: usize) -> Result<Field, FieldError> {
        if m < 2 {
            return Err(FieldError::DegenerateExtension);
        }
        let (log, exp, order) = build_tables(w, poly)?;
        let base = FieldRepr {
            id: FieldId(0),
            w,
            poly,
            order,
            log,
            exp,
            ext: None,
        };
        let extension = ext::Extension::build(&base, m)?;
        let mut seed: Vec<u64> = vec![w as u64, poly as u64, m as u64];
        seed.extend(extension.modulus.iter().map(|&c| c as u64));
        let id = FieldId(fnv1a(&seed));
        Ok(Field(Arc::new(FieldRepr {
            id,
            ext: Some(extension),
            ..base
        })))
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Field, FieldError> {
        match spec.m {
            None | Some(1) => Field::gf(spec.w, spec.poly),
            Some(m) => Field::extension(spec.w, spec.poly, m),
        }
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            w: self.0.w,
            poly: self.0.poly,
            m: self.0.ext.as_ref().map(|e| e.m),
        }
    }

    pub fn id(&self) -> FieldId {
        self.0.id
    }

    pub fn w(&self) -> u32 {
        self.0.w
    }

    /// Polynomial bits of the base field modulus.
    pub fn poly(&self) -> u32 {
        self.0.poly
    }

    /// Number of base-field coordinates per element (1 for the base field).
    pub fn degree(&self) -> usize {
        self.0.ext.as_ref().map_or(1, |e| e.m)
    }

    pub fn is_extension(&self) -> bool {
        self.0.ext.is_some()
    }

    /// Number of elements in the base field (2^w).
    pub fn base_size(&self) -> u32 {
        self.0.order + 1
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.0.id,
            words: vec![0; self.degree()],
        }
    }

    pub fn one(&self) -> FieldElement {
        let mut words = vec![0; self.degree()];
        words[0] = 1;
        FieldElement {
            field: self.0.id,
            words,
        }
    }

    /// Element with the given base-field value: the value itself in a base
    /// field, the constant-coordinate embedding in an extension.
    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if value > self.0.order as u64 {
            return Err(FieldError::ValueOutOfRange(value));
        }
        let mut words = vec![0; self.degree()];
        words[0] = value as u16;
        Ok(FieldElement {
            field: self.0.id,
            words,
        })
    }

    /// Element from explicit base-field coordinates.
    pub fn from_words(&self, words: Vec<u16>) -> Result<FieldElement, FieldError> {
        if words.len() != self.degree() {
            return Err(FieldError::WrongDegree {
                got: words.len(),
                want: self.degree(),
            });
        }
        for &c in &words {
            if c as u32 > self.0.order {
                return Err(FieldError::ValueOutOfRange(c as u64));
            }
        }
        Ok(FieldElement {
            field: self.0.id,
            words,
        })
    }

    /// The multiplicative generator used for deterministic evaluation-point
    /// sequences: x, i.e. base value 2.
    pub fn generator(&self) -> FieldElement {
        self.element(2).expect("2 is a valid element for w >= 2")
    }

    pub fn contains(&self, e: &FieldElement) -> bool {
        e.field == self.0.id
    }

    fn check<'a>(&self, e: &'a FieldElement) -> Result<&'a [u16], FieldError> {
        if e.field != self.0.id {
            return Err(FieldError::FieldMismatch);
        }
        Ok(&e.words)
    }

    fn wrap(&self, words: Vec<u16>) -> FieldElement {
        debug_assert_eq!(words.len(), self.degree());
        FieldElement {
            field: self.0.id,
            words,
        }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        let (wa, wb) = (self.check(a)?, self.check(b)?);
        Ok(self.wrap(wa.iter().zip(wb).map(|(&x, &y)| x ^ y).collect()))
    }

    /// Subtraction equals addition in characteristic 2.
    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        self.add(a, b)
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        let (wa, wb) = (self.check(a)?, self.check(b)?);
        Ok(self.wrap(self.mul_words(wa, wb)))
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        let wa = self.check(a)?;
        Ok(self.wrap(self.inv_words(wa)?))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        let inv = self.inv(b)?;
        self.mul(a, &inv)
    }

    pub fn pow(&self, a: &FieldElement, mut e: u64) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            base = self.mul(&base, &base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// a^(q^times) where q = 2^w. Only defined on extension fields; the map
    /// is linear over the base field and has order dividing m.
    pub fn frobenius(&self, a: &FieldElement, times: usize) -> Result<FieldElement, FieldError> {
        let wa = self.check(a)?;
        let ext = self.0.ext.as_ref().ok_or(FieldError::NotExtension)?;
        let mut cur = wa.to_vec();
        for _ in 0..times % ext.m {
            cur = ext.frobenius(&self.0, &cur);
        }
        Ok(self.wrap(cur))
    }

    /// Rank over the base field of the coordinate vectors of extension
    /// elements. An empty list has rank 0.
    pub fn rank_over_base(&self, elems: &[FieldElement]) -> Result<usize, FieldError> {
        if self.0.ext.is_none() {
            return Err(FieldError::NotExtension);
        }
        let mut rows: Vec<Vec<u16>> = Vec::with_capacity(elems.len());
        for e in elems {
            rows.push(self.check(e)?.to_vec());
        }
        Ok(self.word_rank(rows))
    }

    /// Gaussian elimination rank of raw coordinate rows.
    pub(crate) fn word_rank(&self, mut rows: Vec<Vec<u16>>) -> usize {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = self.inv_word(rows[rank][col]).expect("pivot is nonzero");
            for c in col..cols {
                rows[rank][c] = self.mul_word(rows[rank][c], inv);
            }
            for r in 0..rows.len() {
                if r != rank && rows[r][col] != 0 {
                    let f = rows[r][col];
                    for c in col..cols {
                        let t = self.mul_word(f, rows[rank][c]);
                        rows[r][c] ^= t;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    // ---- raw single-word base field arithmetic ----

    pub(crate) fn mul_word(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let r = &self.0;
        r.exp[r.log[a as usize] as usize + r.log[b as usize] as usize]
    }

    pub(crate) fn inv_word(&self, a: u16) -> Result<u16, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let r = &self.0;
        Ok(r.exp[(r.order - r.log[a as usize] as u32) as usize])
    }

    // ---- raw word-vector arithmetic (extension aware) ----

    pub(crate) fn mul_words(&self, a: &[u16], b: &[u16]) -> Vec<u16> {
        match &self.0.ext {
            None => vec![self.mul_word(a[0], b[0])],
            Some(e) => e.mul(&self.0, a, b),
        }
    }

    pub(crate) fn inv_words(&self, a: &[u16]) -> Result<Vec<u16>, FieldError> {
        match &self.0.ext {
            None => Ok(vec![self.inv_word(a[0])?]),
            Some(e) => e.inv(&self.0, a),
        }
    }

    pub(crate) fn frob_words(&self, a: &[u16]) -> Vec<u16> {
        match &self.0.ext {
            None => a.to_vec(),
            Some(e) => e.frobenius(&self.0, a),
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.0;
        match &r.ext {
            None => write!(f, "GF(2^{}; poly={:#x})", r.w, r.poly),
            Some(e) => write!(f, "GF((2^{})^{}; poly={:#x})", r.w, e.m, r.poly),
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for Field {}

fn build_tables(w: u32, poly: u32) -> Result<(Vec<u16>, Vec<u16>, u32), FieldError> {
    if !(2..=16).contains(&w) {
        return Err(FieldError::UnsupportedWidth(w));
    }
    if poly >> w != 1 {
        return Err(FieldError::NotPrimitive(poly, w));
    }
    let order = (1u32 << w) - 1;
    let mut log = vec![0u16; 1 << w];
    let mut exp = vec![0u16; 2 * order as usize];
    let mut v: u32 = 1;
    for i in 0..order {
        if v == 1 && i != 0 {
            // x has smaller multiplicative order than 2^w - 1
            return Err(FieldError::NotPrimitive(poly, w));
        }
        exp[i as usize] = v as u16;
        exp[(i + order) as usize] = v as u16;
        log[v as usize] = i as u16;
        v <<= 1;
        if v >> w == 1 {
            v ^= poly;
        }
    }
    if v != 1 {
        return Err(FieldError::NotPrimitive(poly, w));
    }
    Ok((log, exp, order))
}
