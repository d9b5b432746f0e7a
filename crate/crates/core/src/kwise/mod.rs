//! Exact d-wise independent families from polynomial evaluation over GF(2^m).
//!
//! A seed is an integer holding `d` field coefficients, little-endian,
//! coefficient `j` in bits `[j·m, (j+1)·m)`. Index `i` is evaluated at the
//! field element whose bit pattern is `i`; outputs are the low bits of the
//! polynomial value.

mod field;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub use field::{bits_for, FieldSpec, MAX_DEGREE};

/// `d = 2·max(1, ⌈log₂k⌉)`.
pub fn hash_degree_for(k: usize) -> usize {
    2 * log2_ceil_floor1(k)
}

/// `d = 4·max(1, ⌈log₂k⌉)`.
pub fn sign_degree_for(k: usize) -> usize {
    4 * log2_ceil_floor1(k)
}

fn log2_ceil_floor1(k: usize) -> usize {
    (bits_for(k as u64) as usize).max(1)
}

/// Reads `len ≤ 64` bits starting at bit `start` of a little-endian limb array.
pub(crate) fn extract_bits(limbs: &[u64], start: u64, len: u32) -> u64 {
    if len == 0 {
        return 0;
    }
    let word = (start / 64) as usize;
    let off = (start % 64) as u32;
    let lo = limbs.get(word).copied().unwrap_or(0) >> off;
    let hi = if off == 0 {
        0
    } else {
        limbs.get(word + 1).copied().unwrap_or(0) << (64 - off)
    };
    let v = lo | hi;
    if len == 64 {
        v
    } else {
        v & ((1u64 << len) - 1)
    }
}

pub(crate) fn decode_limbs(limbs: &[u64], d: usize, m: u32) -> Vec<u64> {
    (0..d)
        .map(|j| extract_bits(limbs, j as u64 * m as u64, m))
        .collect()
}

fn check_seed(seed: &BigUint, bits: u64) -> Result<Vec<u64>> {
    if seed.bits() > bits {
        return Err(Error::SeedOutOfRange { bits });
    }
    Ok(seed.to_u64_digits())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HashFamilySpec {
    n: usize,
    t: u64,
    d: usize,
    field: FieldSpec,
}

impl HashFamilySpec {
    /// Family of maps `[n] → [t]`; `t` must be a power of two.
    pub fn new(n: usize, t: u64, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("hash domain must be non-empty"));
        }
        if !t.is_power_of_two() {
            return Err(Error::invalid(format!("hash range {t} is not a power of two")));
        }
        let field = FieldSpec::with_capacity((n as u64).max(t))?;
        Ok(Self { n, t, d, field })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn t(&self) -> u64 {
        self.t
    }
    pub fn degree(&self) -> usize {
        self.d
    }
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }
    pub fn seed_bits(&self) -> u64 {
        self.d as u64 * self.field.degree() as u64
    }

    pub fn decode(&self, seed: &BigUint) -> Result<Vec<u64>> {
        let limbs = check_seed(seed, self.seed_bits())?;
        Ok(decode_limbs(&limbs, self.d, self.field.degree()))
    }

    #[inline]
    pub fn eval(&self, coeffs: &[u64], i: usize) -> u64 {
        self.field.eval_poly(coeffs, i as u64) & (self.t - 1)
    }

    pub fn hash_eval(&self, seed: &BigUint, i: usize) -> Result<u64> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        Ok(self.eval(&self.decode(seed)?, i))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignGeneratorSpec {
    n: usize,
    d: usize,
    field: FieldSpec,
}

impl SignGeneratorSpec {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("sign generator length must be non-empty"));
        }
        let field = FieldSpec::with_capacity(n as u64)?;
        Ok(Self { n, d, field })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> usize {
        self.d
    }
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }
    pub fn seed_bits(&self) -> u64 {
        self.d as u64 * self.field.degree() as u64
    }

    pub fn decode(&self, seed: &BigUint) -> Result<Vec<u64>> {
        let limbs = check_seed(seed, self.seed_bits())?;
        Ok(decode_limbs(&limbs, self.d, self.field.degree()))
    }

    /// Output bit before the `0 → +1, 1 → −1` map.
    #[inline]
    pub fn bit(&self, coeffs: &[u64], i: usize) -> u64 {
        self.field.eval_poly(coeffs, i as u64) & 1
    }

    #[inline]
    pub fn sign(&self, coeffs: &[u64], i: usize) -> i8 {
        1 - 2 * self.bit(coeffs, i) as i8
    }

    pub fn fill(&self, coeffs: &[u64], out: &mut [i8]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.sign(coeffs, i);
        }
    }

    pub fn sign_eval(&self, seed: &BigUint, i: usize) -> Result<i8> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        Ok(self.sign(&self.decode(seed)?, i))
    }

    pub fn generate(&self, seed: &BigUint) -> Result<Vec<i8>> {
        let coeffs = self.decode(seed)?;
        let mut out = vec![0; self.n];
        self.fill(&coeffs, &mut out);
        Ok(out)
    }
}

/// A seeded family `[n] → [range]` whose d-wise uniformity can be checked by
/// enumeration.
pub trait BoundedIndependent: Sync {
    fn domain(&self) -> usize;
    fn range(&self) -> u64;
    fn degree(&self) -> usize;
    fn seed_bits(&self) -> u64;
    /// Evaluates with a seed given as a machine integer (`seed_bits ≤ 64`).
    fn eval_u64(&self, seed: u64, i: usize) -> u64;
}

impl BoundedIndependent for HashFamilySpec {
    fn domain(&self) -> usize {
        self.n
    }
    fn range(&self) -> u64 {
        self.t
    }
    fn degree(&self) -> usize {
        self.d
    }
    fn seed_bits(&self) -> u64 {
        HashFamilySpec::seed_bits(self)
    }
    fn eval_u64(&self, seed: u64, i: usize) -> u64 {
        self.eval(&decode_limbs(&[seed], self.d, self.field.degree()), i)
    }
}

impl BoundedIndependent for SignGeneratorSpec {
    fn domain(&self) -> usize {
        self.n
    }
    fn range(&self) -> u64 {
        2
    }
    fn degree(&self) -> usize {
        self.d
    }
    fn seed_bits(&self) -> u64 {
        SignGeneratorSpec::seed_bits(self)
    }
    fn eval_u64(&self, seed: u64, i: usize) -> u64 {
        self.bit(&decode_limbs(&[seed], self.d, self.field.degree()), i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub subset: Vec<usize>,
    pub values: Vec<u64>,
    pub count: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub max_subset: usize,
    pub subsets_checked: u64,
    pub seeds: u64,
    pub violation: Option<Violation>,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Exhaustively checks that every subset of size `≤ min(d, max_subset)` has
/// an exactly uniform joint law over all seeds.
pub fn verify_independence<G: BoundedIndependent>(
    family: &G,
    max_subset: usize,
    budget: u64,
) -> Result<IndependenceReport> {
    verify_independence_with(
        family.domain(),
        family.range(),
        family.degree(),
        family.seed_bits(),
        max_subset,
        budget,
        |seed, i| family.eval_u64(seed, i),
    )
}

/// As [`verify_independence`], for an arbitrary evaluation closure.
pub fn verify_independence_with<F>(
    n: usize,
    range: u64,
    d: usize,
    seed_bits: u64,
    max_subset: usize,
    budget: u64,
    eval: F,
) -> Result<IndependenceReport>
where
    F: Fn(u64, usize) -> u64 + Sync,
{
    let size = d.min(max_subset).min(n);
    if size == 0 {
        return Ok(IndependenceReport {
            max_subset: 0,
            subsets_checked: 0,
            seeds: 0,
            violation: None,
        });
    }
    if seed_bits >= 64 {
        return Err(Error::BudgetExceeded {
            required: format!("2^{seed_bits}"),
            budget,
        });
    }
    let seeds = 1u64 << seed_bits;
    let subsets: u128 = (1..=size).map(|s| binomial(n as u64, s as u64)).sum();
    let cost = subsets.saturating_mul(seeds as u128);
    if cost > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: cost.to_string(),
            budget,
        });
    }
    let joint = (range as u128).checked_pow(size as u32).unwrap_or(u128::MAX);
    if joint > 1 << 26 {
        return Err(Error::BudgetExceeded {
            required: format!("{joint} joint outcomes per subset"),
            budget,
        });
    }

    let table: Vec<u64> = (0..seeds)
        .into_par_iter()
        .flat_map_iter(|s| (0..n).map(move |i| (s, i)))
        .map(|(s, i)| eval(s, i))
        .collect();

    let mut all = Vec::new();
    for s in 1..=size {
        let mut comb: Vec<usize> = (0..s).collect();
        loop {
            all.push(comb.clone());
            if !next_combination(&mut comb, n) {
                break;
            }
        }
    }

    let violation = all.par_iter().find_map_first(|subset| {
        let outcomes = (range as usize).pow(subset.len() as u32);
        let mut counts = vec![0u64; outcomes];
        for s in 0..seeds as usize {
            let row = &table[s * n..(s + 1) * n];
            let mut key = 0usize;
            for &i in subset.iter().rev() {
                let v = row[i];
                if v >= range {
                    // out-of-range output can never be uniform
                    return Some(Violation {
                        subset: subset.clone(),
                        values: vec![v],
                        count: 1,
                        expected: 0,
                    });
                }
                key = key * range as usize + v as usize;
            }
            counts[key] += 1;
        }
        let expected = if seeds.is_multiple_of(outcomes as u64) {
            seeds / outcomes as u64
        } else {
            u64::MAX
        };
        counts.iter().enumerate().find_map(|(key, &c)| {
            (c != expected).then(|| {
                let mut values = Vec::with_capacity(subset.len());
                let mut rest = key;
                for _ in subset {
                    values.push((rest % range as usize) as u64);
                    rest /= range as usize;
                }
                Violation {
                    subset: subset.clone(),
                    values,
                    count: c,
                    expected,
                }
            })
        })
    });

    Ok(IndependenceReport {
        max_subset: size,
        subsets_checked: all.len() as u64,
        seeds,
        violation,
    })
}

fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let s = comb.len();
    let mut i = s;
    while i > 0 {
        i -= 1;
        if comb[i] < n - s + i {
            comb[i] += 1;
            for j in i + 1..s {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
