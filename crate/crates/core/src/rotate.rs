//! Derandomized rotations `H·D(x)` and the Gaussian / spherical generators
//! built on them.
//!
//! `H` is the normalized Sylvester–Hadamard matrix of order `N = 2^⌈log₂n⌉`;
//! inputs of dimension `n < N` are zero-padded.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::blockprg::{eps_from_delta, PrgParams, Seed, SeedStream, SeedWalkCount};
use crate::error::{Error, Result};
use crate::kwise::{bits_for, SignGeneratorSpec};
use crate::polytope::PolytopeSpec;

/// In-place normalized Walsh–Hadamard transform, `N log N` butterflies.
pub fn fwht(v: &mut [f64]) -> Result<()> {
    let len = v.len();
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let mut h = 1;
    while h < len {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (len as f64).sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
    Ok(())
}

pub fn padded_dim(n: usize) -> usize {
    n.next_power_of_two()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationParams {
    pub n: usize,
    /// Padded dimension, a power of two.
    pub big_n: usize,
    pub k: usize,
    pub delta: f64,
    /// Multiplier on `⌈log₂(k/δ)⌉` for the independence of `G₁`.
    pub c_degree: usize,
    /// Multiplier on `log₂²(k/δ)/N` for the regularity threshold.
    pub c_threshold: f64,
    pub g1: SignGeneratorSpec,
}

impl RotationParams {
    pub fn new(n: usize, k: usize, delta: f64) -> Result<Self> {
        Self::with_constants(n, k, delta, 2, 1.0)
    }

    pub fn with_constants(n: usize, k: usize, delta: f64, c_degree: usize, c_threshold: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0,1], got {delta}")));
        }
        if k == 0 || n == 0 {
            return Err(Error::invalid("n and k must be positive"));
        }
        let big_n = padded_dim(n);
        let d = c_degree * Self::log_ratio_ceil(k, delta);
        let g1 = SignGeneratorSpec::new(big_n, d)?;
        Ok(Self {
            n,
            big_n,
            k,
            delta,
            c_degree,
            c_threshold,
            g1,
        })
    }

    /// `max(1, log₂(k/δ))`.
    pub fn log_ratio(k: usize, delta: f64) -> f64 {
        (k as f64 / delta).log2().max(1.0)
    }

    fn log_ratio_ceil(k: usize, delta: f64) -> usize {
        (k as f64 / delta).log2().ceil().max(1.0) as usize
    }

    /// `C·max(1, log₂(k/δ))²/N`.
    pub fn threshold(&self) -> f64 {
        self.c_threshold * Self::log_ratio(self.k, self.delta).powi(2) / self.big_n as f64
    }

    /// Warns when `δ ≤ log²k / n^{1/11}`, outside the asymptotic regime.
    pub fn regime_warning(&self) -> Option<String> {
        let bound = (self.k as f64).log2().max(0.0).powi(2) / (self.n as f64).powf(1.0 / 11.0);
        (self.delta <= bound).then(|| {
            format!(
                "delta = {} is below log2(k)^2 / n^(1/11) = {bound:.4}; guarantees are asymptotic only",
                self.delta
            )
        })
    }
}

/// Returns the polytope with matrix `H·D(signs)·W` and the same offsets.
pub fn rotate_polytope(poly: &PolytopeSpec, signs: &[i8]) -> Result<PolytopeSpec> {
    let n = poly.n();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if signs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: signs.len(),
        });
    }
    let mut out = Vec::with_capacity(n * poly.k());
    for col in poly.columns() {
        let mut v: Vec<f64> = col.iter().zip(signs).map(|(w, &s)| w * f64::from(s)).collect();
        fwht(&mut v)?;
        out.extend(v);
    }
    Ok(PolytopeSpec::from_raw_unit(n, out, poly.theta().to_vec()))
}

/// `‖v‖₄⁴`.
pub fn fourth_moment(v: &[f64]) -> f64 {
    v.iter().map(|x| x.powi(4)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationCheck {
    pub big_n: usize,
    pub threshold: f64,
    pub seeds_examined: u64,
    pub sampled: bool,
    pub failures: u64,
    pub failure_fraction: f64,
    /// `δ/k`, the allowed failure rate.
    pub allowed_fraction: f64,
    pub max_fourth_moment: f64,
    pub min_fourth_moment: f64,
}

/// For each examined `G₁` seed, the largest `‖H·D(G₁(x))·Wᵖ‖₄⁴` over faces
/// compared against [`RotationParams::threshold`].
pub fn rotation_regularity_check(poly: &PolytopeSpec, params: &RotationParams, budget: u64) -> Result<RotationCheck> {
    let poly = if poly.n() == params.big_n {
        poly.clone()
    } else {
        poly.pad(params.big_n)?
    };
    let stream = SeedStream::new(params.g1.seed_bits(), budget);
    let threshold = params.threshold();
    let (failures, max_m, min_m) = (0..stream.total())
        .into_par_iter()
        .map(|j| {
            let seed = stream.seed_at(j);
            let x = params.g1.generate(&seed).expect("stream stays in range");
            let rotated = rotate_polytope(&poly, &x).expect("dimensions checked");
            let worst = rotated.columns().map(fourth_moment).fold(0.0, f64::max);
            (u64::from(worst >= threshold), worst, worst)
        })
        .reduce(
            || (0, 0.0, f64::INFINITY),
            |a, b| (a.0 + b.0, a.1.max(b.1), a.2.min(b.2)),
        );
    let examined = stream.total();
    Ok(RotationCheck {
        big_n: params.big_n,
        threshold,
        seeds_examined: examined,
        sampled: stream.sampled(),
        failures,
        failure_fraction: if examined == 0 { 0.0 } else { failures as f64 / examined as f64 },
        allowed_fraction: params.delta / params.k as f64,
        max_fourth_moment: max_m,
        min_fourth_moment: min_m,
    })
}

/// `G_N(x, y) = D(G₁(x))·H·G(y)` over the padded dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianPrg {
    pub rotation: RotationParams,
    pub block: PrgParams,
}

impl GaussianPrg {
    /// Block generator at the `ε` implied by `δ`.
    pub fn new(n: usize, k: usize, delta: f64) -> Result<Self> {
        let eps = eps_from_delta(k, delta)?;
        let mut g = Self::with_eps(n, k, delta, eps)?;
        g.block.delta = Some(delta);
        Ok(g)
    }

    pub fn with_eps(n: usize, k: usize, delta: f64, eps: f64) -> Result<Self> {
        let rotation = RotationParams::new(n, k, delta)?;
        let block = PrgParams::with_eps(rotation.big_n, k, eps)?;
        Ok(Self { rotation, block })
    }

    pub fn from_parts(rotation: RotationParams, block: PrgParams) -> Result<Self> {
        if block.n != rotation.big_n {
            return Err(Error::DimensionMismatch {
                expected: rotation.big_n,
                got: block.n,
            });
        }
        Ok(Self { rotation, block })
    }

    pub fn dim(&self) -> usize {
        self.rotation.big_n
    }

    pub fn g1_seed_bits(&self) -> u64 {
        self.rotation.g1.seed_bits()
    }

    /// `G₁` seed in the low bits, then the block seed.
    pub fn total_seed_bits(&self) -> u64 {
        self.g1_seed_bits() + self.block.total_seed_bits()
    }

    pub fn generate(&self, g1_seed: &BigUint, seed: &Seed) -> Result<Vec<f64>> {
        let signs = self.rotation.g1.generate(g1_seed)?;
        let y = crate::blockprg::generate(&self.block, seed)?;
        self.combine(&signs, &y)
    }

    /// Same as [`generate`](Self::generate) with both seeds packed in one integer.
    pub fn generate_packed(&self, seed: &BigUint) -> Result<Vec<f64>> {
        if seed.bits() > self.total_seed_bits() {
            return Err(Error::SeedOutOfRange {
                bits: self.total_seed_bits(),
            });
        }
        let g1_bits = self.g1_seed_bits();
        let g1_seed = seed & ((BigUint::from(1u8) << g1_bits) - 1u8);
        let block_seed = seed >> g1_bits;
        let signs = self.rotation.g1.generate(&g1_seed)?;
        let y = self.block.generate_integer(&block_seed)?;
        self.combine(&signs, &y)
    }

    fn combine(&self, signs: &[i8], y: &[i8]) -> Result<Vec<f64>> {
        let mut v: Vec<f64> = y.iter().map(|&s| f64::from(s)).collect();
        fwht(&mut v)?;
        for (o, &s) in v.iter_mut().zip(signs) {
            *o *= f64::from(s);
        }
        Ok(v)
    }
}

pub fn gaussian_generate(prg: &GaussianPrg, g1_seed: &BigUint, seed: &Seed) -> Result<Vec<f64>> {
    prg.generate(g1_seed, seed)
}

/// `G_N / √N`: a point on the unit sphere.
pub fn spherical_generate(prg: &GaussianPrg, g1_seed: &BigUint, seed: &Seed) -> Result<Vec<f64>> {
    let mut v = prg.generate(g1_seed, seed)?;
    let scale = 1.0 / (prg.dim() as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointMode {
    Gauss,
    Sphere,
}

/// Acceptance of `poly` (padded to `N` if needed) over a walk of packed seeds.
pub fn seed_walk_acceptance(prg: &GaussianPrg, poly: &PolytopeSpec, mode: PointMode, budget: u64) -> Result<SeedWalkCount> {
    let poly = if poly.n() == prg.dim() {
        poly.clone()
    } else {
        poly.pad(prg.dim())?
    };
    let stream = SeedStream::new(prg.total_seed_bits(), budget);
    let scale = match mode {
        PointMode::Gauss => 1.0,
        PointMode::Sphere => 1.0 / (prg.dim() as f64).sqrt(),
    };
    let accepted = (0..stream.total())
        .into_par_iter()
        .map(|j| {
            let mut v = prg.generate_packed(&stream.seed_at(j)).expect("stream stays in range");
            if scale != 1.0 {
                v.iter_mut().for_each(|x| *x *= scale);
            }
            u64::from(poly.member_unchecked(&v))
        })
        .sum();
    Ok(SeedWalkCount {
        accepted,
        seeds: stream.total(),
        sampled: stream.sampled(),
    })
}

/// Number of bits needed to index `n` coordinates.
pub fn log2_dim(n: usize) -> u32 {
    bits_for(n as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{gaussian_mc_prob, normal_cdf, CounterStream, McConfig};
    use crate::polytope::normalize;
    use rand_core::RngCore;

    fn naive_hadamard(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let s = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if (i & j).count_ones() % 2 == 0 { v[j] } else { -v[j] })
                    .sum::<f64>()
                    * s
            })
            .collect()
    }

    fn random_vec(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = CounterStream::new(seed).rng(n as u64);
        (0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0).collect()
    }

    #[test]
    fn fwht_small_and_errors() {
        let mut v = vec![1.0, 1.0];
        fwht(&mut v).unwrap();
        assert!((v[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(v[1].abs() < 1e-15);
        assert!(matches!(fwht(&mut [1.0, 2.0, 3.0]), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn fwht_matches_naive_involution_and_isometry() {
        let mut n = 1;
        while n <= 256 {
            let v = random_vec(n as u64 + 99, n);
            let mut fast = v.clone();
            fwht(&mut fast).unwrap();
            let slow = naive_hadamard(&v);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "n={n}");
            }
            let norm_v: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let norm_f: f64 = fast.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm_v - norm_f).abs() < 1e-10);
            fwht(&mut fast).unwrap();
            for (a, b) in fast.iter().zip(&v) {
                assert!((a - b).abs() < 1e-10);
            }
            n *= 2;
        }
    }

    #[test]
    fn rotated_basis_vector_is_flat() {
        let n = 64;
        let mut col = vec![0.0; n];
        col[0] = 1.0;
        let p = normalize(n, vec![col], vec![0.0]).unwrap();
        let g1 = SignGeneratorSpec::new(n, 8).unwrap();
        for seed in [0u32, 1, 12345, 999_999] {
            let x = g1.generate(&BigUint::from(seed)).unwrap();
            let r = rotate_polytope(&p, &x).unwrap();
            assert!(r.column(0).iter().all(|v| v.abs() == 0.125));
            assert_eq!(fourth_moment(r.column(0)), 1.0 / 64.0);
            assert_eq!(r.regularity().eps, 0.125);
        }
    }

    #[test]
    fn rotation_preserves_norms_and_adjoint_identity() {
        let n = 16;
        let cols: Vec<Vec<f64>> = (0..3).map(|p| random_vec(p + 1, n)).collect();
        let p = normalize(n, cols, vec![0.1, 0.2, -0.3]).unwrap();
        let signs: Vec<i8> = (0..n).map(|i| if (i * 7) % 3 == 0 { -1 } else { 1 }).collect();
        let r = rotate_polytope(&p, &signs).unwrap();
        for c in r.columns() {
            let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        for s in 0..20 {
            let z = random_vec(1000 + s, n);
            // (H D W)ᵀ z = Wᵀ D Hᵀ z, and H is symmetric
            let mut hz = z.clone();
            fwht(&mut hz).unwrap();
            let dhz: Vec<f64> = hz.iter().zip(&signs).map(|(v, &s)| v * f64::from(s)).collect();
            let lhs = r.project(&z).unwrap();
            let rhs = p.project(&dhz).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_preserves_gaussian_probability() {
        let n = 16;
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let mut c = vec![0.0; n];
                c[i] = 1.0;
                c
            })
            .collect();
        let p = normalize(n, cols, vec![0.5, 0.0, -0.25]).unwrap();
        let signs = SignGeneratorSpec::new(n, 4).unwrap().generate(&BigUint::from(77u32)).unwrap();
        let r = rotate_polytope(&p, &signs).unwrap();
        let cfg = McConfig::new(200_000, 4);
        let before = gaussian_mc_prob(&p, &cfg).unwrap();
        let after = gaussian_mc_prob(&r, &McConfig::new(200_000, 5)).unwrap();
        assert!((before.estimate - after.estimate).abs() <= before.half_width + after.half_width);
    }

    #[test]
    fn regularity_check_examples() {
        let n = 64;
        let params = RotationParams::new(n, 4, 0.25).unwrap();
        assert_eq!(params.threshold(), 16.0 / 64.0);
        assert_eq!(params.g1.degree(), 8);

        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let p = normalize(n, vec![e1], vec![0.0]).unwrap();
        let r = rotation_regularity_check(&p, &params, 1 << 12).unwrap();
        assert_eq!(r.failures, 0);
        assert_eq!(r.max_fourth_moment, 1.0 / 64.0);
        assert_eq!(r.min_fourth_moment, 1.0 / 64.0);

        let flat = normalize(n, vec![vec![1.0; n]], vec![0.0]).unwrap();
        let r = rotation_regularity_check(&flat, &params, 1 << 14).unwrap();
        assert!(r.sampled);
        assert!(r.failure_fraction <= r.allowed_fraction, "{r:?}");
    }

    #[test]
    fn threshold_floor_for_trivial_ratio() {
        let p = RotationParams::new(8, 1, 1.0).unwrap();
        assert_eq!(p.threshold(), 1.0 / 8.0);
        assert_eq!(p.g1.degree(), 2);
    }

    #[test]
    fn gaussian_output_norm_and_determinism() {
        let prg = GaussianPrg::with_eps(50, 2, 0.2, 0.5).unwrap();
        assert_eq!(prg.dim(), 64);
        let g1 = BigUint::from(12345u32);
        let seed = Seed::from_integer(&prg.block, &BigUint::from(987_654_321u64)).unwrap();
        let a = gaussian_generate(&prg, &g1, &seed).unwrap();
        let b = gaussian_generate(&prg, &g1, &seed).unwrap();
        assert_eq!(a, b);
        let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 8.0).abs() < 1e-10);
        let s = spherical_generate(&prg, &g1, &seed).unwrap();
        let snorm: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((snorm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn packed_seed_matches_split_seed() {
        let prg = GaussianPrg::with_eps(16, 2, 0.3, 0.5).unwrap();
        let g1 = BigUint::from(0x3a5u32);
        let block = BigUint::from(0x1234_5678u64);
        let packed = &g1 | (&block << prg.g1_seed_bits());
        let seed = Seed::from_integer(&prg.block, &block).unwrap();
        assert_eq!(prg.generate_packed(&packed).unwrap(), prg.generate(&g1, &seed).unwrap());
    }

    #[test]
    fn antipodal_seed_pair() {
        // xor-ing 1 into the constant coefficient flips every sign of G₀
        let prg = GaussianPrg::with_eps(32, 2, 0.3, 1.0).unwrap();
        assert_eq!(prg.block.blocks, 1);
        let g1 = BigUint::from(77u32);
        let z = BigUint::from(0x5_5555u32);
        let a = Seed { h_seed: BigUint::from(3u32), z: vec![z.clone()] };
        let b = Seed { h_seed: BigUint::from(3u32), z: vec![z ^ BigUint::from(1u32)] };
        let va = spherical_generate(&prg, &g1, &a).unwrap();
        let vb = spherical_generate(&prg, &g1, &b).unwrap();
        for (x, y) in va.iter().zip(&vb) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn halfspace_acceptance_near_half() {
        let prg = GaussianPrg::with_eps(64, 1, 0.1, 0.25).unwrap();
        let w = random_vec(5, 64);
        let p = normalize(64, vec![w], vec![0.0]).unwrap();
        let g = seed_walk_acceptance(&prg, &p, PointMode::Gauss, 1 << 14).unwrap();
        assert!((g.fraction() - normal_cdf(0.0)).abs() <= 0.05, "{g:?}");
        let s = seed_walk_acceptance(&prg, &p, PointMode::Sphere, 1 << 14).unwrap();
        assert!((s.fraction() - 0.5).abs() <= 0.05);
    }

    #[test]
    fn regime_warning_fires_at_desk_scale() {
        let p = RotationParams::new(64, 16, 0.1).unwrap();
        assert!(p.regime_warning().is_some());
        let q = RotationParams::new(64, 1, 0.5).unwrap();
        assert!(q.regime_warning().is_none());
    }
}
