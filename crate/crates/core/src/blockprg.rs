//! The block generator over `{±1}ⁿ`: a bounded-independence hash splits the
//! coordinates into blocks and every block is filled from its own
//! bounded-independence sign seed.
//!
//! Seeds serialize to one integer: the hash seed in the low bits, then
//! `z[0], z[1], …` in ascending order.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{count_in_span, Basis};
use crate::kwise::{
    decode_limbs, extract_bits, hash_degree_for, sign_degree_for, HashFamilySpec,
    SignGeneratorSpec,
};
use crate::polytope::CubeEvaluator;

/// Hard cap on the number of blocks a parameter set may request.
pub const MAX_BLOCKS: u64 = 1 << 24;

/// `ε = δ⁵ / (max(1, log₂k)^{8.1} · ln(1/δ))`, capped at 1.
pub fn eps_from_delta(k: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0,1), got {delta}")));
    }
    let log_k = (k.max(1) as f64).log2().max(1.0);
    let eps = delta.powi(5) / (log_k.powf(8.1) * (1.0 / delta).ln());
    Ok(eps.min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrgParams {
    pub n: usize,
    pub k: usize,
    pub delta: Option<f64>,
    pub eps: f64,
    /// Nominal block count `⌈1/ε⌉`.
    pub t: u64,
    /// Hash range actually used: `t` rounded up to a power of two.
    pub blocks: u64,
    pub hash: HashFamilySpec,
    pub sign: SignGeneratorSpec,
}

/// Flat view of [`PrgParams`] for report headers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamsSummary {
    pub n: usize,
    pub k: usize,
    pub delta: Option<f64>,
    pub eps: f64,
    pub t: u64,
    pub blocks: u64,
    pub d_hash: usize,
    pub d_sign: usize,
    pub hash_field_bits: u32,
    pub sign_field_bits: u32,
    pub hash_seed_bits: u64,
    pub sign_seed_bits: u64,
    pub total_seed_bits: u64,
}

impl PrgParams {
    /// `ε` from `δ`, degrees from `k`.
    pub fn from_delta(n: usize, k: usize, delta: f64) -> Result<Self> {
        let eps = eps_from_delta(k, delta)?;
        let mut p = Self::with_eps(n, k, eps)?;
        p.delta = Some(delta);
        Ok(p)
    }

    pub fn with_eps(n: usize, k: usize, eps: f64) -> Result<Self> {
        Self::with_degrees(n, k, eps, hash_degree_for(k), sign_degree_for(k))
    }

    pub fn with_degrees(n: usize, k: usize, eps: f64, d_hash: usize, d_sign: usize) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0,1], got {eps}")));
        }
        if k == 0 {
            return Err(Error::invalid("face count k must be at least 1"));
        }
        let t_real = (1.0 / eps).ceil();
        let sign = SignGeneratorSpec::new(n, d_sign)?;
        if t_real > MAX_BLOCKS as f64 {
            let blocks = t_real as u128;
            return Err(Error::SeedOverflow {
                blocks,
                required_bits: blocks.saturating_mul(sign.seed_bits() as u128),
            });
        }
        let t = t_real as u64;
        let blocks = t.next_power_of_two();
        let hash = HashFamilySpec::new(n, blocks, d_hash)?;
        Ok(Self {
            n,
            k,
            delta: None,
            eps,
            t,
            blocks,
            hash,
            sign,
        })
    }

    pub fn total_seed_bits(&self) -> u64 {
        self.hash.seed_bits() + self.blocks * self.sign.seed_bits()
    }

    pub fn summary(&self) -> ParamsSummary {
        ParamsSummary {
            n: self.n,
            k: self.k,
            delta: self.delta,
            eps: self.eps,
            t: self.t,
            blocks: self.blocks,
            d_hash: self.hash.degree(),
            d_sign: self.sign.degree(),
            hash_field_bits: self.hash.field().degree(),
            sign_field_bits: self.sign.field().degree(),
            hash_seed_bits: self.hash.seed_bits(),
            sign_seed_bits: self.sign.seed_bits(),
            total_seed_bits: self.total_seed_bits(),
        }
    }

    /// Writes `G(seed)` into `out`, reading the seed's packed limbs directly.
    pub fn generate_from_limbs(&self, limbs: &[u64], out: &mut [i8]) {
        debug_assert_eq!(out.len(), self.n);
        let hm = self.hash.field().degree();
        let sm = self.sign.field().degree();
        let hash_coeffs = decode_limbs(limbs, self.hash.degree(), hm);
        let base = self.hash.seed_bits();
        let block_bits = self.sign.seed_bits();
        let mut cache: HashMap<u64, Vec<u64>> = HashMap::new();
        for (j, o) in out.iter_mut().enumerate() {
            let b = self.hash.eval(&hash_coeffs, j);
            let z = cache.entry(b).or_insert_with(|| {
                let start = base + b * block_bits;
                (0..self.sign.degree())
                    .map(|c| extract_bits(limbs, start + c as u64 * sm as u64, sm))
                    .collect()
            });
            *o = self.sign.sign(z, j);
        }
    }

    pub fn generate_integer(&self, seed: &BigUint) -> Result<Vec<i8>> {
        if seed.bits() > self.total_seed_bits() {
            return Err(Error::SeedOutOfRange {
                bits: self.total_seed_bits(),
            });
        }
        let mut out = vec![0; self.n];
        self.generate_from_limbs(&seed.to_u64_digits(), &mut out);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seed {
    pub h_seed: BigUint,
    pub z: Vec<BigUint>,
}

impl Seed {
    pub fn validate(&self, params: &PrgParams) -> Result<()> {
        if self.z.len() as u64 != params.blocks {
            return Err(Error::DimensionMismatch {
                expected: params.blocks as usize,
                got: self.z.len(),
            });
        }
        if self.h_seed.bits() > params.hash.seed_bits() {
            return Err(Error::SeedOutOfRange {
                bits: params.hash.seed_bits(),
            });
        }
        for z in &self.z {
            if z.bits() > params.sign.seed_bits() {
                return Err(Error::SeedOutOfRange {
                    bits: params.sign.seed_bits(),
                });
            }
        }
        Ok(())
    }

    pub fn to_integer(&self, params: &PrgParams) -> Result<BigUint> {
        self.validate(params)?;
        let mut acc = self.h_seed.clone();
        let mut shift = params.hash.seed_bits();
        for z in &self.z {
            acc |= z << shift;
            shift += params.sign.seed_bits();
        }
        Ok(acc)
    }

    pub fn from_integer(params: &PrgParams, seed: &BigUint) -> Result<Self> {
        if seed.bits() > params.total_seed_bits() {
            return Err(Error::SeedOutOfRange {
                bits: params.total_seed_bits(),
            });
        }
        let mask = |bits: u64| (BigUint::one() << bits) - BigUint::one();
        let hb = params.hash.seed_bits();
        let sb = params.sign.seed_bits();
        let h_seed = seed & mask(hb);
        let z = (0..params.blocks)
            .map(|b| (seed >> (hb + b * sb)) & mask(sb))
            .collect();
        Ok(Self { h_seed, z })
    }
}

/// `x_j = G₀(z[h(j)])_j`.
pub fn generate(params: &PrgParams, seed: &Seed) -> Result<Vec<i8>> {
    let int = seed.to_integer(params)?;
    let mut out = vec![0; params.n];
    params.generate_from_limbs(&int.to_u64_digits(), &mut out);
    Ok(out)
}

/// Deterministic walk over an integer seed space of `bits` bits.
///
/// Enumerates every seed in increasing order when the space fits in
/// `budget`; otherwise visits `budget` distinct seeds `j·s mod 2^bits` with an
/// odd golden-ratio stride `s`.
#[derive(Clone, Debug)]
pub struct SeedStream {
    bits: u64,
    len: u64,
    stride: BigUint,
    modulus: BigUint,
    sampled: bool,
    next: u64,
}

impl SeedStream {
    pub fn new(bits: u64, budget: u64) -> Self {
        let full = bits < 64 && (1u64 << bits) <= budget;
        let modulus = BigUint::one() << bits;
        let (len, stride, sampled) = if full {
            (1u64 << bits, BigUint::one(), false)
        } else {
            // ⌊2^bits · (φ − 1)⌋ | 1 at full precision
            let root5 = (BigUint::from(5u8) << (2 * bits)).sqrt();
            let stride = ((root5 - &modulus) >> 1u32) | BigUint::one();
            (budget, stride % &modulus, true)
        };
        Self {
            bits,
            len,
            stride,
            modulus,
            sampled,
            next: 0,
        }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn total(&self) -> u64 {
        self.len
    }

    pub fn sampled(&self) -> bool {
        self.sampled
    }

    /// The `j`-th seed of the walk (random access; independent of iteration).
    pub fn seed_at(&self, j: u64) -> BigUint {
        if self.sampled {
            (BigUint::from(j) * &self.stride) % &self.modulus
        } else {
            BigUint::from(j)
        }
    }
}

impl Iterator for SeedStream {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if self.next >= self.len {
            return None;
        }
        let s = self.seed_at(self.next);
        self.next += 1;
        Some(s)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = (self.len - self.next) as usize;
        (rest, Some(rest))
    }
}

/// Stream of [`Seed`]s for a parameter set.
pub struct PrgSeeds<'a> {
    params: &'a PrgParams,
    inner: SeedStream,
}

impl PrgSeeds<'_> {
    pub fn sampled(&self) -> bool {
        self.inner.sampled()
    }
    pub fn total(&self) -> u64 {
        self.inner.total()
    }
}

impl Iterator for PrgSeeds<'_> {
    type Item = Seed;

    fn next(&mut self) -> Option<Seed> {
        let int = self.inner.next()?;
        Some(Seed::from_integer(self.params, &int).expect("stream stays in range"))
    }
}

pub fn iterate_seeds(params: &PrgParams, budget: u64) -> PrgSeeds<'_> {
    PrgSeeds {
        params,
        inner: SeedStream::new(params.total_seed_bits(), budget),
    }
}

/// Acceptance count over a seed walk, evaluated point by point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedWalkCount {
    pub accepted: u64,
    pub seeds: u64,
    pub sampled: bool,
}

impl SeedWalkCount {
    pub fn fraction(&self) -> f64 {
        if self.seeds == 0 {
            0.0
        } else {
            self.accepted as f64 / self.seeds as f64
        }
    }
}

/// Runs `G` on every seed of [`SeedStream::new`]`(total_seed_bits, budget)`.
pub fn seed_walk_count<E: CubeEvaluator>(params: &PrgParams, eval: &E, budget: u64) -> Result<SeedWalkCount> {
    if eval.dim() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: eval.dim(),
        });
    }
    let stream = SeedStream::new(params.total_seed_bits(), budget);
    let accepted = (0..stream.total())
        .into_par_iter()
        .map_init(
            || vec![0i8; params.n],
            |x, j| {
                let seed = stream.seed_at(j);
                params.generate_from_limbs(&seed.to_u64_digits(), x);
                u64::from(eval.contains_signs(x))
            },
        )
        .sum();
    Ok(SeedWalkCount {
        accepted,
        seeds: stream.total(),
        sampled: stream.sampled(),
    })
}

/// Exact acceptance probability over the full seed space, as
/// `numerator / 2^log2_denominator`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedSpaceFraction {
    pub numerator: u128,
    pub log2_denominator: u32,
    pub hash_rank: u32,
    pub sign_rank: u32,
    pub distinct_subspaces: u64,
    pub points_evaluated: u128,
}

impl SeedSpaceFraction {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / 2f64.powi(self.log2_denominator as i32)
    }
}

/// Sign patterns of the generator `G₀` for a single set seed bit `b`.
fn sign_code_basis(sign: &SignGeneratorSpec) -> Vec<u64> {
    let m = sign.field().degree() as u64;
    let mut basis = Basis::new(1);
    for b in 0..sign.seed_bits() {
        let mut coeffs = vec![0u64; sign.degree()];
        coeffs[(b / m) as usize] = 1 << (b % m);
        let mask = (0..sign.n()).fold(0u64, |acc, i| acc | sign.bit(&coeffs, i) << i);
        basis.insert(vec![mask]);
    }
    basis.canonical().into_iter().map(|r| r[0]).collect()
}

/// Hash images `(h(0), …, h(n−1))` packed `log₂(blocks)` bits per index.
fn hash_image_basis(hash: &HashFamilySpec) -> (Basis, u32) {
    let m = hash.field().degree() as u64;
    let tau = hash.t().trailing_zeros();
    let words = (hash.n() * tau as usize).div_ceil(64).max(1);
    let mut basis = Basis::new(words);
    for b in 0..hash.seed_bits() {
        let mut coeffs = vec![0u64; hash.degree()];
        coeffs[(b / m) as usize] = 1 << (b % m);
        let mut row = vec![0u64; words];
        for i in 0..hash.n() {
            let v = hash.eval(&coeffs, i);
            for bit in 0..tau {
                if v >> bit & 1 == 1 {
                    let pos = i * tau as usize + bit as usize;
                    row[pos / 64] |= 1 << (pos % 64);
                }
            }
        }
        basis.insert(row);
    }
    (basis, tau)
}

fn block_of(packed: &[u64], i: usize, tau: u32) -> u64 {
    extract_bits(packed, (i * tau as usize) as u64, tau)
}

/// Exact acceptance probability of `G` over its entire seed space.
///
/// Both the hash and the sign generator are GF(2)-linear in their seeds, so
/// every distinct hash image is hit equally often, and for a fixed hash the
/// output is uniform on the direct sum of the sign code restricted to each
/// block. Summing over distinct hash images and, for each, over that
/// subspace gives the same value as running every seed, at a cost of
/// `2^rank(hash) + Σ 2^dim(subspace)` evaluations. Requires `n ≤ 64`.
pub fn seed_space_fraction<E: CubeEvaluator>(
    params: &PrgParams,
    eval: &E,
    budget: u64,
) -> Result<SeedSpaceFraction> {
    let n = params.n;
    if eval.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: eval.dim(),
        });
    }
    if n > 64 {
        return Err(Error::invalid("seed-space evaluation supports n ≤ 64"));
    }
    let code = sign_code_basis(&params.sign);
    let (hash_basis, tau) = hash_image_basis(&params.hash);
    let hash_rank = hash_basis.dim() as u32;
    if hash_rank >= 63 || (1u64 << hash_rank) > budget {
        return Err(Error::BudgetExceeded {
            required: format!("2^{hash_rank} hash images"),
            budget,
        });
    }
    if hash_rank as usize + n > 127 {
        return Err(Error::invalid("seed-space denominator exceeds 128 bits"));
    }

    let subspaces: HashMap<Vec<u64>, u64> = (0..1u64 << hash_rank)
        .into_par_iter()
        .fold(HashMap::new, |mut acc: HashMap<Vec<u64>, u64>, j| {
            let packed = hash_basis.element(j);
            let mut masks = vec![0u64; params.blocks as usize];
            for i in 0..n {
                masks[block_of(&packed, i, tau) as usize] |= 1 << i;
            }
            let mut v = Basis::new(1);
            for &c in &code {
                for &mask in masks.iter().filter(|m| **m != 0) {
                    v.insert(vec![c & mask]);
                }
            }
            let key: Vec<u64> = v.canonical().into_iter().map(|r| r[0]).collect();
            *acc.entry(key).or_insert(0) += 1;
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let mut keys: Vec<(&Vec<u64>, &u64)> = subspaces.iter().collect();
    keys.sort();
    let points: u128 = keys.iter().map(|(k, _)| 1u128 << k.len()).sum();
    if points + (1u128 << hash_rank) > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: (points + (1u128 << hash_rank)).to_string(),
            budget,
        });
    }
    let mut numerator: u128 = 0;
    for (key, mult) in keys {
        let count = count_in_span(eval, key) as u128;
        numerator += (*mult as u128 * count) << (n - key.len());
    }
    Ok(SeedSpaceFraction {
        numerator,
        log2_denominator: hash_rank + n as u32,
        hash_rank,
        sign_rank: code.len() as u32,
        distinct_subspaces: subspaces.len() as u64,
        points_evaluated: points,
    })
}

/// `2^bits` as a float, for reporting.
pub fn seed_space_size(bits: u64) -> f64 {
    2f64.powf(bits as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::normalize;
    use num_traits::ToPrimitive;

    #[test]
    fn degrees_for_two_faces() {
        let p = PrgParams::with_eps(16, 2, 0.5).unwrap();
        assert_eq!(p.hash.degree(), 2);
        assert_eq!(p.sign.degree(), 4);
        assert_eq!(p.t, 2);
    }

    #[test]
    fn eps_formula_at_half() {
        // 0.5^5 / (1 · ln 2)
        let eps = eps_from_delta(2, 0.5).unwrap();
        assert!((eps - 0.03125 / std::f64::consts::LN_2).abs() < 1e-15);
        assert!((eps - 0.0451).abs() < 1e-4);
        let p = PrgParams::from_delta(32, 2, 0.5).unwrap();
        assert_eq!(p.t, 23);
        assert_eq!(p.blocks, 32);
        assert_eq!(p.delta, Some(0.5));
    }

    #[test]
    fn eps_override() {
        let p = PrgParams::with_eps(8, 3, 0.25).unwrap();
        assert_eq!(p.t, 4);
        assert!(PrgParams::with_eps(8, 3, 0.0).is_err());
        assert!(PrgParams::with_eps(8, 3, 1.5).is_err());
        assert!(eps_from_delta(2, 1.0).is_err());
    }

    #[test]
    fn tiny_delta_overflows() {
        let err = PrgParams::from_delta(64, 1024, 0.01).unwrap_err();
        assert!(matches!(err, Error::SeedOverflow { .. }), "{err:?}");
    }

    #[test]
    fn single_block_copies_sign_generator() {
        let p = PrgParams::with_eps(8, 2, 1.0).unwrap();
        assert_eq!(p.blocks, 1);
        for z in [0u32, 5, 0xabc, 0xfff] {
            for h in [0u32, 3, 0x3f] {
                let seed = Seed {
                    h_seed: BigUint::from(h),
                    z: vec![BigUint::from(z)],
                };
                let out = generate(&p, &seed).unwrap();
                assert_eq!(out, p.sign.generate(&BigUint::from(z)).unwrap());
            }
        }
    }

    #[test]
    fn block_locality() {
        let p = PrgParams::with_eps(16, 2, 0.25).unwrap();
        let hs = BigUint::from(0b1011_0110u32);
        let base = Seed {
            h_seed: hs.clone(),
            z: (0..4u32).map(|b| BigUint::from(0x1111 * (b + 1))).collect(),
        };
        let mut other = base.clone();
        other.z[2] = BigUint::from(0xbeefu32);
        let a = generate(&p, &base).unwrap();
        let b = generate(&p, &other).unwrap();
        let coeffs = p.hash.decode(&hs).unwrap();
        for j in 0..16 {
            if p.hash.eval(&coeffs, j) != 2 {
                assert_eq!(a[j], b[j], "coordinate {j} outside block 2 changed");
            }
        }
    }

    #[test]
    fn seed_integer_roundtrip() {
        let p = PrgParams::with_eps(8, 2, 0.5).unwrap();
        let s = Seed {
            h_seed: BigUint::from(0x2du32),
            z: vec![BigUint::from(0x123u32), BigUint::from(0xfedu32)],
        };
        let int = s.to_integer(&p).unwrap();
        assert_eq!(Seed::from_integer(&p, &int).unwrap(), s);
        assert_eq!(generate(&p, &s).unwrap(), p.generate_integer(&int).unwrap());
        let bad = Seed {
            h_seed: BigUint::from(1u32) << 64u32,
            z: s.z.clone(),
        };
        assert!(generate(&p, &bad).is_err());
    }

    #[test]
    fn marginals_exactly_balanced_over_full_enumeration() {
        // n = 8, t = 2: 6 + 2·12 = 30 bits is too many; use degree-2 signs.
        let p = PrgParams::with_degrees(8, 2, 0.5, 2, 2).unwrap();
        assert!(p.total_seed_bits() <= 24);
        let mut plus = [0u64; 8];
        let mut total = 0u64;
        for seed in iterate_seeds(&p, 1 << 24) {
            let x = generate(&p, &seed).unwrap();
            for (c, v) in plus.iter_mut().zip(&x) {
                if *v == 1 {
                    *c += 1;
                }
            }
            total += 1;
        }
        assert_eq!(total, 1 << p.total_seed_bits());
        assert!(plus.iter().all(|&c| 2 * c == total), "{plus:?}");
    }

    #[test]
    fn block_independence_given_hash() {
        // for each fixed hash, coordinates in different blocks are independent
        let p = PrgParams::with_degrees(4, 2, 0.5, 2, 2).unwrap();
        let hb = p.hash.seed_bits();
        let sb = p.sign.seed_bits();
        for h in 0..1u64 << hb {
            let coeffs = p.hash.decode(&BigUint::from(h)).unwrap();
            let blocks: Vec<u64> = (0..4).map(|j| p.hash.eval(&coeffs, j)).collect();
            for a in 0..4 {
                for b in 0..4 {
                    if blocks[a] == blocks[b] {
                        continue;
                    }
                    let mut joint = [[0u64; 2]; 2];
                    for z in 0..1u64 << (2 * sb) {
                        let int = BigUint::from(h | z << hb);
                        let x = p.generate_integer(&int).unwrap();
                        joint[(x[a] < 0) as usize][(x[b] < 0) as usize] += 1;
                    }
                    let q = 1u64 << (2 * sb - 2);
                    assert_eq!(joint, [[q, q], [q, q]], "h={h} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn stream_full_enumeration() {
        let s = SeedStream::new(10, 1 << 20);
        assert!(!s.sampled());
        let v: Vec<u64> = s.map(|b| b.to_u64().unwrap()).collect();
        assert_eq!(v, (0..1024).collect::<Vec<_>>());
    }

    #[test]
    fn stream_empty_budget() {
        let s = SeedStream::new(10, 0);
        assert!(s.sampled());
        assert_eq!(s.count(), 0);
    }

    #[test]
    fn stream_sampled_distinct() {
        let s = SeedStream::new(40, 1 << 20);
        assert!(s.sampled());
        let mut v: Vec<u64> = s.map(|b| b.to_u64().unwrap()).collect();
        assert_eq!(v.len(), 1 << 20);
        assert!(v.iter().all(|x| *x < 1 << 40));
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), 1 << 20);
    }

    #[test]
    fn seed_space_fraction_equals_literal_enumeration() {
        let p = PrgParams::with_eps(4, 2, 0.5).unwrap();
        assert_eq!(p.total_seed_bits(), 20);
        let polys = [
            normalize(4, vec![vec![1.0, 1.0, 1.0, 1.0]], vec![0.0]).unwrap(),
            normalize(4, vec![vec![1.0, -2.0, 0.5, 1.0], vec![0.3, 0.3, -1.0, 2.0]], vec![0.1, 0.4]).unwrap(),
            normalize(4, vec![vec![1.0, 1.0, 1.0, 0.0], vec![0.0, 1.0, -1.0, 1.0]], vec![-0.2, 0.6]).unwrap(),
        ];
        for poly in &polys {
            let walk = seed_walk_count(&p, poly, 1 << 20).unwrap();
            assert!(!walk.sampled);
            let exact = seed_space_fraction(&p, poly, 1 << 24).unwrap();
            // accepted / 2^20 == numerator / 2^den
            let lhs = (walk.accepted as u128) << exact.log2_denominator;
            let rhs = exact.numerator << 20;
            assert_eq!(lhs, rhs, "{exact:?} vs {walk:?}");
        }
    }

    #[test]
    fn seed_space_fraction_with_four_blocks() {
        let p = PrgParams::with_degrees(4, 2, 0.25, 2, 2).unwrap();
        assert_eq!(p.blocks, 4);
        assert!(p.total_seed_bits() <= 24, "{}", p.total_seed_bits());
        let poly = normalize(
            4,
            vec![vec![1.0, 0.5, -0.25, 1.0], vec![0.2, 1.0, 1.0, -0.5]],
            vec![0.05, 0.5],
        )
        .unwrap();
        let walk = seed_walk_count(&p, &poly, 1 << 24).unwrap();
        let exact = seed_space_fraction(&p, &poly, 1 << 24).unwrap();
        let bits = p.total_seed_bits() as u32;
        assert_eq!(
            (walk.accepted as u128) << exact.log2_denominator,
            exact.numerator << bits
        );
    }

    #[test]
    fn coordinate_bias_is_zero_at_default_degrees() {
        let p = PrgParams::with_eps(8, 2, 0.5).unwrap();
        assert_eq!(p.total_seed_bits(), 30);
        for j in 0..8 {
            let mut col = vec![0.0; 8];
            col[j] = 1.0;
            let half = normalize(8, vec![col], vec![0.0]).unwrap();
            let f = seed_space_fraction(&p, &half, 1 << 24).unwrap();
            assert_eq!(f.numerator << 1, 1u128 << f.log2_denominator, "coordinate {j}");
        }
    }

    #[test]
    fn sign_code_dimension_matches_trace_structure() {
        // degree-4 polynomials over GF(16): constants, linear and cubic terms
        let g = SignGeneratorSpec::new(16, 4).unwrap();
        assert_eq!(sign_code_basis(&g).len(), 9);
    }
}
