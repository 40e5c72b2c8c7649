//! Table-backed arithmetic in GF(p^m) for p^m <= 256.
//!
//! Elements are stored as their canonical integer encoding: for m > 1 the
//! base-p digits of the integer are the polynomial coefficients, constant
//! term least significant.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub const MAX_ORDER: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{m} exceeds {MAX_ORDER}")]
    OrderTooLarge { p: u32, m: u32 },
    #[error("modulus {0:?} is reducible")]
    ReduciblePolynomial(Vec<u8>),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("{0} is not a prime power of at most {MAX_ORDER}")]
    InvalidOrder(usize),
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{value} is not an element of a field of order {order}")]
    OutOfRange { value: u32, order: usize },
}

struct Tables {
    p: u32,
    m: u32,
    /// Monic modulus, low-to-high, length m + 1. Empty for prime fields.
    modulus: Vec<u8>,
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

/// A finite field GF(p^m). Cheap to clone; the tables are shared.
#[derive(Clone)]
pub struct Field {
    tables: Arc<Tables>,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    (2..)
        .take_while(|d| d * d <= n)
        .all(|d| !n.is_multiple_of(d))
}

fn to_digits(mut v: usize, p: u32, m: u32) -> Vec<u8> {
    let mut digits = Vec::with_capacity(m as usize);
    for _ in 0..m {
        digits.push((v % p as usize) as u8);
        v /= p as usize;
    }
    digits
}

fn from_digits(digits: &[u8], p: u32) -> usize {
    digits
        .iter()
        .rev()
        .fold(0usize, |acc, &d| acc * p as usize + d as usize)
}

/// Remainder of `a` modulo the monic polynomial `b` (both low-to-high).
fn poly_rem(a: &[u8], b: &[u8], p: u32) -> Vec<u8> {
    let p = p as u16;
    let mut r: Vec<u16> = a.iter().map(|&x| x as u16).collect();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = r[r.len() - 1] % p;
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let t = (lead * bc as u16) % p;
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
        }
        r.pop();
    }
    r.into_iter().map(|x| (x % p) as u8).collect()
}

/// Trial division by every monic polynomial of degree 1..=deg/2.
fn is_irreducible(modulus: &[u8], p: u32) -> bool {
    let deg = modulus.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as usize).pow(d as u32);
        for v in 0..count {
            let mut divisor = to_digits(v, p, d as u32);
            divisor.push(1);
            if poly_rem(modulus, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The monic irreducible of degree `m` whose non-leading coefficients,
/// read as a base-p integer with the constant term least significant,
/// are smallest.
pub fn default_modulus(p: u32, m: u32) -> Vec<u8> {
    let count = (p as usize).pow(m);
    (0..count)
        .map(|v| {
            let mut poly = to_digits(v, p, m);
            poly.push(1);
            poly
        })
        .find(|poly| is_irreducible(poly, p))
        .expect("an irreducible polynomial exists for every degree")
}

impl Field {
    /// Builds GF(p^m). When `modulus` is omitted and m > 1 the default
    /// irreducible from [`default_modulus`] is used.
    pub fn new(p: u32, m: u32, modulus: Option<&[u8]>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64)
            .checked_pow(m)
            .filter(|&q| q <= MAX_ORDER as u64)
            .ok_or(FieldError::OrderTooLarge { p, m })? as usize;

        let modulus = match (m, modulus) {
            (1, None) => Vec::new(),
            (1, Some(_)) => {
                return Err(FieldError::InvalidModulus(
                    "prime fields take no modulus".into(),
                ))
            }
            (_, None) => default_modulus(p, m),
            (_, Some(given)) => {
                if given.len() != m as usize + 1 {
                    return Err(FieldError::InvalidModulus(format!(
                        "expected {} coefficients, got {}",
                        m + 1,
                        given.len()
                    )));
                }
                if given.iter().any(|&c| c as u32 >= p) {
                    return Err(FieldError::InvalidModulus(format!(
                        "coefficients must be below {p}"
                    )));
                }
                if given[m as usize] != 1 {
                    return Err(FieldError::InvalidModulus("modulus must be monic".into()));
                }
                if !is_irreducible(given, p) {
                    return Err(FieldError::ReduciblePolynomial(given.to_vec()));
                }
                given.to_vec()
            }
        };

        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        let digits: Vec<Vec<u8>> = (0..q).map(|v| to_digits(v, p, m)).collect();
        for a in 0..q {
            for b in 0..q {
                let sum: Vec<u8> = digits[a]
                    .iter()
                    .zip(&digits[b])
                    .map(|(&x, &y)| ((x as u32 + y as u32) % p) as u8)
                    .collect();
                add[a * q + b] = from_digits(&sum, p) as u8;

                let prod = if m == 1 {
                    (a * b) % p as usize
                } else {
                    let mut raw = vec![0u32; 2 * m as usize - 1];
                    for (i, &x) in digits[a].iter().enumerate() {
                        for (j, &y) in digits[b].iter().enumerate() {
                            raw[i + j] = (raw[i + j] + x as u32 * y as u32) % p;
                        }
                    }
                    let raw: Vec<u8> = raw.into_iter().map(|c| c as u8).collect();
                    let mut rem = poly_rem(&raw, &modulus, p);
                    rem.resize(m as usize, 0);
                    from_digits(&rem, p)
                };
                mul[a * q + b] = prod as u8;
            }
        }

        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u8;
            if a != 0 {
                inv[a] = (1..q)
                    .find(|&b| mul[a * q + b] == 1)
                    .ok_or_else(|| FieldError::ReduciblePolynomial(modulus.clone()))?
                    as u8;
            }
        }

        Ok(Field {
            tables: Arc::new(Tables {
                p,
                m,
                modulus,
                q,
                add,
                mul,
                neg,
                inv,
            }),
        })
    }

    pub fn prime(p: u32) -> Result<Self, FieldError> {
        Field::new(p, 1, None)
    }

    /// GF(q) with the default modulus.
    pub fn with_order(q: usize) -> Result<Self, FieldError> {
        if !(2..=MAX_ORDER).contains(&q) {
            return Err(FieldError::InvalidOrder(q));
        }
        let p = (2..=q as u32)
            .find(|&d| (q as u32).is_multiple_of(d))
            .unwrap();
        let mut m = 0;
        let mut rest = q as u32;
        while rest.is_multiple_of(p) {
            rest /= p;
            m += 1;
        }
        if rest != 1 {
            return Err(FieldError::InvalidOrder(q));
        }
        Field::new(p, m, None)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.tables.q
    }

    pub fn characteristic(&self) -> u32 {
        self.tables.p
    }

    pub fn degree(&self) -> u32 {
        self.tables.m
    }

    /// Monic modulus, low-to-high; empty for prime fields.
    pub fn modulus(&self) -> &[u8] {
        &self.tables.modulus
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        (v as usize) < self.tables.q
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.tables.add[a as usize * self.tables.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.tables.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.tables.mul[a as usize * self.tables.q + b as usize]
    }

    pub fn inv(&self, a: u8) -> Result<u8, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.tables.inv[a as usize])
    }

    /// Inverse of a value the caller knows to be nonzero.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.tables.inv[a as usize]
    }

    pub fn pow(&self, a: u8, mut e: u64) -> u8 {
        let mut base = a;
        let mut acc = 1u8;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if !self.contains(value) {
            return Err(FieldError::OutOfRange {
                value,
                order: self.order(),
            });
        }
        Ok(FieldElement {
            field: self.clone(),
            value: value as u8,
        })
    }

    /// Reduces a signed integer into the prime subfield, e.g. -1 -> p - 1.
    pub fn from_i64(&self, v: i64) -> u8 {
        v.rem_euclid(self.tables.p as i64) as u8
    }

    pub fn elements(&self) -> impl Iterator<Item = u8> {
        (0..self.order() as u16).map(|v| v as u8)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.tables, &other.tables)
            || (self.tables.p == other.tables.p
                && self.tables.m == other.tables.m
                && self.tables.modulus == other.tables.modulus)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tables.m == 1 {
            write!(f, "GF({})", self.tables.p)
        } else {
            write!(
                f,
                "GF({}^{}; {:?})",
                self.tables.p, self.tables.m, self.tables.modulus
            )
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.tables.q)
    }
}

/// A single field element carrying its field, for checked arithmetic.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: u8,
}

impl FieldElement {
    pub fn value(&self) -> u8 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    fn with(&self, value: u8) -> Self {
        FieldElement {
            field: self.field.clone(),
            value,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with(self.field.sub(self.value, other.value)))
    }

    pub fn neg(&self) -> Self {
        self.with(self.field.neg(self.value))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.with(self.field.pow(self.value, e))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self.value, self.field)
    }
}
