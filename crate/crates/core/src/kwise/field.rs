//! Binary extension fields GF(2^m) for 1 ≤ m ≤ 32.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 32;

/// Low-weight irreducible polynomials over GF(2), indexed by degree.
/// Bit `i` is the coefficient of `x^i`; the leading term is included.
const REDUCTION_POLYNOMIALS: [u64; 33] = [
    0,
    0b11,                              // x + 1
    0b111,                             // x^2 + x + 1
    (1 << 3) | 0b11,                   // x^3 + x + 1
    (1 << 4) | 0b11,                   // x^4 + x + 1
    (1 << 5) | (1 << 2) | 1,           // x^5 + x^2 + 1
    (1 << 6) | 0b11,                   // x^6 + x + 1
    (1 << 7) | 0b11,                   // x^7 + x + 1
    (1 << 8) | (1 << 4) | (1 << 3) | 0b11,
    (1 << 9) | (1 << 4) | 1,
    (1 << 10) | (1 << 3) | 1,
    (1 << 11) | (1 << 2) | 1,
    (1 << 12) | (1 << 3) | 1,
    (1 << 13) | (1 << 4) | (1 << 3) | 0b11,
    (1 << 14) | (1 << 5) | 1,
    (1 << 15) | 0b11,
    (1 << 16) | (1 << 5) | (1 << 3) | 0b11,
    (1 << 17) | (1 << 3) | 1,
    (1 << 18) | (1 << 7) | 1,
    (1 << 19) | (1 << 5) | (1 << 2) | 0b11,
    (1 << 20) | (1 << 3) | 1,
    (1 << 21) | (1 << 2) | 1,
    (1 << 22) | 0b11,
    (1 << 23) | (1 << 5) | 1,
    (1 << 24) | (1 << 4) | (1 << 3) | 0b11,
    (1 << 25) | (1 << 3) | 1,
    (1 << 26) | (1 << 4) | (1 << 3) | 0b11,
    (1 << 27) | (1 << 5) | (1 << 2) | 0b11,
    (1 << 28) | 0b11,
    (1 << 29) | (1 << 2) | 1,
    (1 << 30) | 0b11,
    (1 << 31) | (1 << 3) | 1,
    (1 << 32) | (1 << 7) | (1 << 3) | (1 << 2) | 1,
];

static IRREDUCIBLE: [OnceLock<bool>; 33] = [const { OnceLock::new() }; 33];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FieldSpec {
    m: u32,
    reduction_polynomial: u64,
}

impl FieldSpec {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::invalid(format!(
                "extension degree must be in 1..={MAX_DEGREE}, got {m}"
            )));
        }
        let poly = REDUCTION_POLYNOMIALS[m as usize];
        let ok = *IRREDUCIBLE[m as usize].get_or_init(|| is_irreducible(poly));
        if !ok {
            return Err(Error::invalid(format!(
                "reduction polynomial {poly:#b} for degree {m} is reducible"
            )));
        }
        Ok(Self {
            m,
            reduction_polynomial: poly,
        })
    }

    /// Smallest field with at least `size` elements (and at least 2).
    pub fn with_capacity(size: u64) -> Result<Self> {
        Self::new(bits_for(size).max(1))
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn reduction_polynomial(&self) -> u64 {
        self.reduction_polynomial
    }

    pub fn order(&self) -> u64 {
        1u64 << self.m
    }

    #[inline]
    pub fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let top = 1u64 << self.m;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.reduction_polynomial;
            }
        }
        acc
    }

    /// Horner evaluation of `Σ_j coeffs[j]·x^j`.
    #[inline]
    pub fn eval_poly(&self, coeffs: &[u64], x: u64) -> u64 {
        let mut acc = 0;
        for &c in coeffs.iter().rev() {
            acc = self.mul(acc, x) ^ c;
        }
        acc
    }
}

/// `⌈log₂ size⌉`, with `bits_for(0) = bits_for(1) = 0`.
pub fn bits_for(size: u64) -> u32 {
    if size <= 1 {
        0
    } else {
        64 - (size - 1).leading_zeros()
    }
}

fn degree_of(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = degree_of(b);
    while a != 0 && degree_of(a) >= db {
        a ^= b << (degree_of(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn is_irreducible(p: u64) -> bool {
    let d = degree_of(p);
    if d < 1 {
        return false;
    }
    for g in 2u64..(1u64 << (d / 2 + 1)) {
        if poly_rem(p, g) == 0 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_table_entry_is_irreducible() {
        for m in 1..=MAX_DEGREE {
            assert!(FieldSpec::new(m).is_ok(), "degree {m}");
        }
    }

    #[test]
    fn reducible_polynomials_detected() {
        // x^2 + 1 = (x + 1)^2, x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert!(!is_irreducible(0b101));
        assert!(!is_irreducible(0b10101));
        assert!(is_irreducible(0b1011));
    }

    #[test]
    fn multiplicative_group_is_a_group() {
        for m in 1..=8 {
            let f = FieldSpec::new(m).unwrap();
            for a in 1..f.order() {
                let inv_exists = (1..f.order()).any(|b| f.mul(a, b) == 1);
                assert!(inv_exists, "m={m}, a={a}");
            }
        }
    }

    #[test]
    fn aes_field_known_product() {
        let f = FieldSpec::new(8).unwrap();
        assert_eq!(f.mul(0x57, 0x83), 0xc1);
        assert_eq!(f.mul(0x57, 0x13), 0xfe);
    }

    #[test]
    fn capacity() {
        assert_eq!(FieldSpec::with_capacity(1).unwrap().degree(), 1);
        assert_eq!(FieldSpec::with_capacity(4).unwrap().degree(), 2);
        assert_eq!(FieldSpec::with_capacity(5).unwrap().degree(), 3);
        assert_eq!(FieldSpec::with_capacity(64).unwrap().degree(), 6);
        assert!(FieldSpec::new(0).is_err());
        assert!(FieldSpec::new(33).is_err());
    }
}
