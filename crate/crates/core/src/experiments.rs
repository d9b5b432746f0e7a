//! Empirical checks of the analytic claims: the cube/Gaussian invariance
//! gap, Gaussian shell mass (anti-concentration), noise sensitivity of
//! intersections of halfspaces, and the sphere/Gaussian gap.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rand_core::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{
    disjoint_cube_prob, exact_cube_prob, fill_gaussian, gaussian_mc_prob, mc_prob, mc_tally, normal_quantile,
    separable_gaussian_prob, uniform, CounterStream, Estimate, McConfig, Measure,
};
use crate::polytope::{in_shell, normalize, CubeEvaluator, PolytopeSpec};

/// `log₂^{8/5}(k)·(ε ln(1/ε))^{1/5}`, the invariance bound with unit constant.
pub fn invariance_bound(k: usize, eps: f64) -> f64 {
    let log_k = (k as f64).log2().max(0.0);
    let inner = if eps >= 1.0 { 0.0 } else { eps * (1.0 / eps).ln() };
    log_k.powf(1.6) * inner.powf(0.2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceRecord {
    pub id: String,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub theta: Vec<f64>,
    pub cube_prob: f64,
    /// `exact`, `exact-disjoint` or `mc`.
    pub cube_method: String,
    pub cube_half_width: f64,
    pub gauss_prob: f64,
    /// `closed-form` or `mc`.
    pub gauss_method: String,
    pub gauss_half_width: f64,
    pub gap: f64,
    /// Sum of the two half-widths.
    pub gap_half_width: f64,
    pub predicted_bound: f64,
}

/// Cube side exact when `2ⁿ ≤ budget` or the faces have disjoint supports,
/// else Monte Carlo; Gaussian side closed form for orthogonal faces, else
/// Monte Carlo.
pub fn invariance_gap(id: &str, poly: &PolytopeSpec, cfg: &McConfig, budget: u64) -> Result<InvarianceRecord> {
    let n = poly.n();
    let (cube_prob, cube_method, cube_hw) = if n < 63 && (1u64 << n) <= budget {
        (exact_cube_prob(poly, budget)?.value(), "exact", 0.0)
    } else if let Ok(p) = disjoint_cube_prob(poly, budget) {
        (p, "exact-disjoint", 0.0)
    } else {
        let e = mc_prob(poly, Measure::Cube, cfg)?;
        (e.estimate, "mc", e.half_width)
    };
    let (gauss_prob, gauss_method, gauss_hw) = match separable_gaussian_prob(poly) {
        Ok(p) => (p, "closed-form", 0.0),
        Err(Error::NotOrthogonal { .. }) => {
            let e = gaussian_mc_prob(poly, &cfg.derived(1))?;
            (e.estimate, "mc", e.half_width)
        }
        Err(e) => return Err(e),
    };
    let eps = poly.regularity().eps;
    Ok(InvarianceRecord {
        id: id.to_string(),
        n,
        k: poly.k(),
        eps,
        theta: poly.theta().to_vec(),
        cube_prob,
        cube_method: cube_method.into(),
        cube_half_width: cube_hw,
        gauss_prob,
        gauss_method: gauss_method.into(),
        gauss_half_width: gauss_hw,
        gap: (cube_prob - gauss_prob).abs(),
        gap_half_width: cube_hw + gauss_hw,
        predicted_bound: invariance_bound(poly.k(), eps),
    })
}

/// `k` faces, face `p` the normalized all-ones vector on block `p` of an
/// even split of `n` coordinates, all offsets `θ`.
pub fn block_polytope(n: usize, k: usize, theta: f64) -> Result<PolytopeSpec> {
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::invalid(format!("{k} blocks do not split n = {n}")));
    }
    let size = n / k;
    let cols = (0..k)
        .map(|b| (0..n).map(|i| if i / size == b { 1.0 } else { 0.0 }).collect())
        .collect();
    normalize(n, cols, vec![theta; k])
}

/// Shape of one face in [`spiked_family`]: a spike on one coordinate, a
/// fixed Gaussian-weighted part and a flat part, the latter two sharing the
/// non-spike mass in a fixed ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpikedShape {
    pub generic: usize,
    pub flat: usize,
    /// Share of the non-spike squared mass on the Gaussian part.
    pub generic_share: f64,
}

impl Default for SpikedShape {
    fn default() -> Self {
        Self {
            generic: 16,
            flat: 240,
            generic_share: 0.2,
        }
    }
}

impl SpikedShape {
    pub fn face_len(&self) -> usize {
        1 + self.generic + self.flat
    }
}

/// A face of regularity exactly `eps`; the Gaussian part is fixed by
/// `stream`, so varying `eps` only moves mass between the spike and the rest.
pub fn spiked_face(shape: &SpikedShape, eps: f64, stream: &CounterStream) -> Result<Vec<f64>> {
    let mut g = vec![0.0; shape.generic];
    fill_gaussian(&mut stream.rng(0), &mut g);
    let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    g.iter_mut().for_each(|v| *v /= gn);
    let q: f64 = g.iter().map(|v| v.powi(4)).sum();
    let share = shape.generic_share;
    // ε² = A² + (1 − A)²·c with A the spike's squared weight
    let c = share * share * q + (1.0 - share).powi(2) / shape.flat as f64;
    let e2 = eps * eps;
    let floor = c / (1.0 + c);
    if !(e2 >= floor && eps <= 1.0) {
        return Err(Error::invalid(format!(
            "eps must lie in [{:.4}, 1] for this shape, got {eps}",
            floor.sqrt()
        )));
    }
    let a2 = ((c + (c * c - (1.0 + c) * (c - e2)).max(0.0).sqrt()) / (1.0 + c)).min(1.0);
    let rest = 1.0 - a2;
    let gamma = (share * rest).sqrt();
    let beta = ((1.0 - share) * rest / shape.flat as f64).sqrt();
    let mut face = Vec::with_capacity(shape.face_len());
    face.push(a2.sqrt());
    face.extend(g.iter().map(|v| gamma * v));
    face.extend(std::iter::repeat_n(beta, shape.flat));
    Ok(face)
}

/// `k` spiked faces on disjoint coordinate blocks, all at offset `θ`.
pub fn spiked_polytope(shape: &SpikedShape, k: usize, eps: f64, theta: f64, stream_seed: u64) -> Result<PolytopeSpec> {
    let len = shape.face_len();
    let n = k * len;
    let stream = CounterStream::new(stream_seed);
    let mut cols = Vec::with_capacity(k);
    for p in 0..k {
        let face = spiked_face(shape, eps, &stream.derive(p as u64))?;
        let mut col = vec![0.0; n];
        col[p * len..(p + 1) * len].copy_from_slice(&face);
        cols.push(col);
    }
    normalize(n, cols, vec![theta; k])
}

/// Invariance records along the spiked family at each `eps`.
pub fn spiked_family(
    shape: &SpikedShape,
    k: usize,
    eps_values: &[f64],
    theta: f64,
    stream_seed: u64,
    cfg: &McConfig,
    budget: u64,
) -> Result<Vec<InvarianceRecord>> {
    eps_values
        .iter()
        .map(|&eps| {
            let p = spiked_polytope(shape, k, eps, theta, stream_seed)?;
            invariance_gap(&format!("spiked-k{k}-eps{eps}"), &p, cfg, budget)
        })
        .collect()
}

/// `k` columns of normalized dense sign vectors (`ε = n^{-1/2}`) with offsets
/// uniform in `[−2, 2]`, all drawn from `stream_seed`.
pub fn random_regular_polytope(n: usize, k: usize, stream_seed: u64) -> Result<PolytopeSpec> {
    let stream = CounterStream::new(stream_seed);
    let mut cols = Vec::with_capacity(k);
    let mut theta = Vec::with_capacity(k);
    for p in 0..k {
        let mut rng = stream.rng(p as u64);
        let mut col = Vec::with_capacity(n);
        let mut bits = 0;
        for i in 0..n {
            if i % 64 == 0 {
                bits = rng.next_u64();
            }
            col.push(if bits >> (i % 64) & 1 == 1 { -1.0 } else { 1.0 });
        }
        cols.push(col);
        theta.push(4.0 * uniform(&mut rng) - 2.0);
    }
    normalize(n, cols, theta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NsMethod {
    Exact,
    PairedMc,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseSensitivityRecord {
    pub delta: f64,
    pub estimate: f64,
    pub method: NsMethod,
    pub sample_count: u64,
    pub ci_half_width: f64,
    /// Exact value as a reduced fraction, on the exact path.
    pub exact: Option<String>,
}

/// Exact binary rational value of a float.
pub fn exact_rational(x: f64) -> Result<BigRational> {
    BigRational::from_f64(x).ok_or_else(|| Error::invalid(format!("{x} is not finite")))
}

/// `Σ_{|S|=d} f̂(S)²·4ⁿ` for `f = ±1` acceptance indicator, by an integer
/// Walsh–Hadamard transform of the truth table.
pub fn fourier_level_weights<E: CubeEvaluator>(eval: &E, budget: u64) -> Result<Vec<u128>> {
    let n = eval.dim();
    if n > 26 || (1u64 << n) > budget {
        return Err(Error::BudgetExceeded {
            required: format!("2^{n}"),
            budget,
        });
    }
    let size = 1usize << n;
    let mut table: Vec<i64> = (0..size as u64)
        .into_par_iter()
        .map_init(
            || vec![0i8; n],
            |x, mask| {
                for (i, v) in x.iter_mut().enumerate() {
                    *v = if mask >> i & 1 == 1 { -1 } else { 1 };
                }
                if eval.contains_signs(x) {
                    1
                } else {
                    -1
                }
            },
        )
        .collect();
    let mut h = 1;
    while h < size {
        table.par_chunks_mut(2 * h).for_each(|block| {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        });
        h *= 2;
    }
    let mut weights = vec![0u128; n + 1];
    for (s, &c) in table.iter().enumerate() {
        weights[s.count_ones() as usize] += (c as i128 * c as i128) as u128;
    }
    Ok(weights)
}

/// `NS_δ(f) = (1 − Σ_S (1−2δ)^{|S|} f̂(S)²)/2`, exactly in rationals.
pub fn noise_sensitivity_exact<E: CubeEvaluator>(eval: &E, delta: f64, budget: u64) -> Result<BigRational> {
    check_delta(delta)?;
    let weights = fourier_level_weights(eval, budget)?;
    let n = eval.dim();
    let rho = BigRational::one() - exact_rational(delta)? * BigRational::from_integer(BigInt::from(2));
    let mut acc = BigRational::zero();
    let mut pow = BigRational::one();
    for w in &weights {
        acc += &pow * BigRational::from_integer(BigInt::from(*w));
        pow *= &rho;
    }
    let four_n = BigRational::from_integer(BigInt::from(1u8) << (2 * n));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    Ok(half * (BigRational::one() - acc / four_n))
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::invalid(format!("delta must lie in [0,1], got {delta}")))
    }
}

/// Pairs `(x, z)` with `x` uniform on the cube and `z` flipping each bit of
/// `x` independently with probability `δ`; sample `i` uses stream index `i`.
pub fn noise_sensitivity_mc<E: CubeEvaluator>(eval: &E, delta: f64, cfg: &McConfig) -> Result<Estimate> {
    check_delta(delta)?;
    cfg.validate()?;
    let n = eval.dim();
    let stream = cfg.stream();
    let flips: u64 = (0..cfg.samples)
        .into_par_iter()
        .map_init(
            || (vec![0i8; n], vec![0i8; n]),
            |(x, z), i| {
                let mut rng = stream.rng(i);
                let mut bits = 0;
                for (j, v) in x.iter_mut().enumerate() {
                    if j % 64 == 0 {
                        bits = rng.next_u64();
                    }
                    *v = if bits >> (j % 64) & 1 == 1 { -1 } else { 1 };
                }
                for (zj, &xj) in z.iter_mut().zip(x.iter()) {
                    *zj = if uniform(&mut rng) < delta { -xj } else { xj };
                }
                u64::from(eval.contains_signs(x) != eval.contains_signs(z))
            },
        )
        .sum();
    Ok(Estimate::from_counts(flips, cfg.samples, cfg.ci_level))
}

/// Exact when `2ⁿ ≤ budget`, else paired Monte Carlo.
pub fn noise_sensitivity<E: CubeEvaluator>(
    eval: &E,
    delta: f64,
    cfg: &McConfig,
    budget: u64,
) -> Result<NoiseSensitivityRecord> {
    let n = eval.dim();
    if n <= 26 && (1u64 << n) <= budget {
        let ns = noise_sensitivity_exact(eval, delta, budget)?;
        return Ok(NoiseSensitivityRecord {
            delta,
            estimate: ns.to_f64().unwrap_or(f64::NAN),
            method: NsMethod::Exact,
            sample_count: 0,
            ci_half_width: 0.0,
            exact: Some(ns.to_string()),
        });
    }
    let e = noise_sensitivity_mc(eval, delta, cfg)?;
    Ok(NoiseSensitivityRecord {
        delta,
        estimate: e.estimate,
        method: NsMethod::PairedMc,
        sample_count: e.samples,
        ci_half_width: e.half_width,
        exact: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellPoint {
    pub lambda: f64,
    pub mass: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnticoncentrationCurve {
    pub n: usize,
    pub k: usize,
    pub points: Vec<ShellPoint>,
    /// Least-squares slope of mass against λ through the origin.
    pub slope: f64,
}

/// Gaussian mass of `Rect(θ) \ Rect(θ − λ𝟙)` for each `λ`, all from the
/// same samples.
pub fn anticoncentration_curve(poly: &PolytopeSpec, lambdas: &[f64], cfg: &McConfig) -> Result<AnticoncentrationCurve> {
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::invalid(format!("lambda must lie in (0,1), got {l}")));
    }
    let theta = poly.theta();
    let hits = mc_tally(poly.n(), Measure::Gaussian, cfg, lambdas.len(), |x, out| {
        let proj: Vec<f64> = poly.columns().map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
        for (o, &l) in out.iter_mut().zip(lambdas) {
            *o = in_shell(&proj, theta, l);
        }
    })?;
    let points: Vec<ShellPoint> = lambdas
        .iter()
        .zip(hits)
        .map(|(&lambda, h)| ShellPoint {
            lambda,
            mass: Estimate::from_counts(h, cfg.samples, cfg.ci_level),
        })
        .collect();
    let num: f64 = points.iter().map(|p| p.lambda * p.mass.estimate).sum();
    let den: f64 = points.iter().map(|p| p.lambda * p.lambda).sum();
    Ok(AnticoncentrationCurve {
        n: poly.n(),
        k: poly.k(),
        points,
        slope: num / den,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereGapRecord {
    pub n: usize,
    pub sphere: Estimate,
    /// `Pr[Y/√n ∈ K]` for standard Gaussian `Y`.
    pub gauss: Estimate,
    pub gap: f64,
    /// From the paired differences, at the configured level.
    pub gap_half_width: f64,
    /// `log n · log₂ k / √n` with unit constant.
    pub predicted_bound: f64,
}

/// Sphere vs scaled Gaussian acceptance for `family(n)` at each `n`. Both
/// sides use the same Gaussian draw `Y`: `Y/‖Y‖` and `Y/√n`.
pub fn sphere_gap<F>(family: F, ladder: &[usize], cfg: &McConfig) -> Result<Vec<SphereGapRecord>>
where
    F: Fn(usize) -> Result<PolytopeSpec>,
{
    cfg.validate()?;
    let z = normal_quantile(0.5 + cfg.ci_level / 2.0);
    ladder
        .iter()
        .map(|&n| {
            let poly = family(n)?;
            if poly.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: poly.n() });
            }
            let theta = poly.theta();
            let root_n = (n as f64).sqrt();
            // outcomes: sphere hit, gauss hit, sphere only, gauss only
            let t = mc_tally(n, Measure::Gaussian, cfg, 4, |y, out| {
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let (mut s, mut g) = (true, true);
                for (c, &th) in poly.columns().zip(theta) {
                    let d: f64 = c.iter().zip(y).map(|(a, b)| a * b).sum();
                    s &= d / norm <= th;
                    g &= d / root_n <= th;
                }
                out[0] = s;
                out[1] = g;
                out[2] = s && !g;
                out[3] = g && !s;
            })?;
            let m = cfg.samples as f64;
            let (a, b) = (t[2] as f64 / m, t[3] as f64 / m);
            let var = (a + b - (a - b).powi(2)) / m;
            let k = poly.k();
            Ok(SphereGapRecord {
                n,
                sphere: Estimate::from_counts(t[0], cfg.samples, cfg.ci_level),
                gauss: Estimate::from_counts(t[1], cfg.samples, cfg.ci_level),
                gap: (a - b).abs(),
                gap_half_width: z * var.sqrt(),
                predicted_bound: (n as f64).ln() * (k as f64).log2().max(1.0) / root_n,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::normal_cdf;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn odd_blocks_have_zero_gap() {
        let p = block_polytope(9, 3, 0.0).unwrap();
        let r = invariance_gap("odd", &p, &McConfig::default(), 1 << 20).unwrap();
        assert_eq!(r.cube_prob, 0.125);
        assert_eq!(r.cube_method, "exact");
        assert_eq!(r.gauss_prob, 0.125);
        assert_eq!(r.gauss_method, "closed-form");
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn majority_face_gap_is_zero() {
        let p = normalize(15, vec![vec![1.0; 15]], vec![0.0]).unwrap();
        let r = invariance_gap("maj15", &p, &McConfig::default(), 1 << 20).unwrap();
        assert_eq!(r.cube_prob, 0.5);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn dictator_face_gap() {
        let p = normalize(4, vec![e(4, 0)], vec![0.5]).unwrap();
        let r = invariance_gap("e1", &p, &McConfig::default(), 1 << 20).unwrap();
        assert_eq!(r.cube_prob, 0.5);
        assert!((r.gap - (normal_cdf(0.5) - 0.5)).abs() < 1e-15);
        assert!((r.gap - 0.1915).abs() < 1e-4);
        assert_eq!(r.eps, 1.0);
    }

    #[test]
    fn mc_fallbacks_cover_exact_values() {
        let cfg = McConfig::new(100_000, 3);
        let p = normalize(6, vec![vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 1.0, 0.0, 0.0]], vec![0.2, 0.1])
            .unwrap();
        let exact = invariance_gap("x", &p, &cfg, 1 << 20).unwrap();
        let mc = invariance_gap("x", &p, &cfg, 8).unwrap();
        assert_eq!(mc.cube_method, "mc");
        assert_eq!(mc.gauss_method, "mc");
        assert!((mc.cube_prob - exact.cube_prob).abs() <= mc.cube_half_width);
    }

    #[test]
    fn bound_formula() {
        assert_eq!(invariance_bound(1, 0.3), 0.0);
        assert_eq!(invariance_bound(4, 1.0), 0.0);
        let v = invariance_bound(4, 0.25);
        let want = 2f64.powf(1.6) * (0.25 * 4f64.ln()).powf(0.2);
        assert!((v - want).abs() < 1e-15);
    }

    #[test]
    fn spiked_faces_hit_target_regularity() {
        let shape = SpikedShape::default();
        let s = CounterStream::new(5);
        for eps in [1.0, 0.5, 0.25, 0.125] {
            let f = spiked_face(&shape, eps, &s).unwrap();
            let norm: f64 = f.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            let reg = f.iter().map(|v| v.powi(4)).sum::<f64>().sqrt();
            assert!((reg - eps).abs() < 1e-12, "{eps}: {reg}");
        }
        let one = spiked_face(&shape, 1.0, &s).unwrap();
        assert_eq!(one[0], 1.0);
        assert!(one[1..].iter().all(|v| *v == 0.0));
        assert!(spiked_face(&shape, 0.01, &s).is_err());
    }

    #[test]
    fn spiked_cube_side_matches_mc() {
        let shape = SpikedShape {
            generic: 6,
            flat: 30,
            generic_share: 0.3,
        };
        let p = spiked_polytope(&shape, 2, 0.4, 0.5, 1).unwrap();
        let exact = disjoint_cube_prob(&p, 1 << 10).unwrap();
        let mc = mc_prob(&p, Measure::Cube, &McConfig::new(200_000, 9)).unwrap();
        assert!(mc.covers(exact), "{exact} {mc:?}");
    }

    #[test]
    fn random_regular_family_is_reproducible() {
        let a = random_regular_polytope(64, 8, 3).unwrap();
        let b = random_regular_polytope(64, 8, 3).unwrap();
        assert_eq!(a, b);
        assert!((a.regularity().eps - 0.125).abs() < 1e-15);
        assert!(a.theta().iter().all(|t| (-2.0..=2.0).contains(t)));
        assert_ne!(a, random_regular_polytope(64, 8, 4).unwrap());
    }

    fn maj3_oracle(delta: &BigRational) -> BigRational {
        // Σ_x Σ_F [f(x) ≠ f(x ⊕ F)] δ^{|F|} (1 − δ)^{3 − |F|} / 8
        let maj = |m: u32| (m.count_ones() >= 2) as u8;
        let mut acc = BigRational::zero();
        let q = BigRational::one() - delta;
        for x in 0u32..8 {
            for f in 0u32..8 {
                if maj(x) != maj(x ^ f) {
                    let w = f.count_ones() as i32;
                    acc += num_traits::pow(delta.clone(), w as usize) * num_traits::pow(q.clone(), (3 - w) as usize);
                }
            }
        }
        acc / BigRational::from_integer(BigInt::from(8))
    }

    #[test]
    fn maj3_matches_exhaustive_oracle() {
        let p = normalize(3, vec![vec![1.0; 3]], vec![0.0]).unwrap();
        for delta in [0.1, 0.25, 0.5] {
            let got = noise_sensitivity_exact(&p, delta, 1 << 10).unwrap();
            assert_eq!(got, maj3_oracle(&exact_rational(delta).unwrap()));
        }
        // δ = 1/2 gives 1/2 for any balanced f
        let r = noise_sensitivity(&p, 0.5, &McConfig::default(), 1 << 10).unwrap();
        assert_eq!(r.exact.as_deref(), Some("1/2"));
    }

    #[test]
    fn dictator_noise_sensitivity_is_delta() {
        let p = normalize(5, vec![e(5, 2)], vec![0.0]).unwrap();
        for delta in [0.0, 0.1, 0.25] {
            let got = noise_sensitivity_exact(&p, delta, 1 << 10).unwrap();
            assert_eq!(got, exact_rational(delta).unwrap());
        }
    }

    #[test]
    fn paired_mc_tracks_exact() {
        let p = normalize(9, vec![vec![1.0; 9], e(9, 0)], vec![0.2, 0.0]).unwrap();
        let exact = noise_sensitivity_exact(&p, 0.1, 1 << 10).unwrap().to_f64().unwrap();
        let mc = noise_sensitivity_mc(&p, 0.1, &McConfig::new(200_000, 4)).unwrap();
        assert!(mc.covers(exact), "{exact} {mc:?}");
        let zero = noise_sensitivity_mc(&p, 0.0, &McConfig::new(1000, 4)).unwrap();
        assert_eq!(zero.successes, 0);
    }

    #[test]
    fn noise_sensitivity_is_monotone_and_bounded() {
        let p = normalize(10, vec![vec![1.0; 10], vec![1.0, -1.0, 1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]], vec![0.3, 0.1])
            .unwrap();
        let acc = exact_cube_prob(&p, 1 << 10).unwrap().value();
        let mut last = 0.0;
        for i in 0..=10 {
            let d = i as f64 * 0.05;
            let ns = noise_sensitivity_exact(&p, d, 1 << 10).unwrap().to_f64().unwrap();
            assert!(ns >= last);
            assert!(ns <= 2.0 * acc.min(1.0 - acc) + 1e-15);
            last = ns;
        }
    }

    #[test]
    fn single_face_shell_matches_cdf() {
        let p = normalize(3, vec![e(3, 1)], vec![0.0]).unwrap();
        let lambdas = [0.05, 0.1, 0.2];
        let c = anticoncentration_curve(&p, &lambdas, &McConfig::new(400_000, 2)).unwrap();
        for pt in &c.points {
            let want = normal_cdf(0.0) - normal_cdf(-pt.lambda);
            assert!(pt.mass.covers(want), "{pt:?} {want}");
        }
        assert!((c.slope - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 0.02);
        assert!(anticoncentration_curve(&p, &[0.0], &McConfig::default()).is_err());
    }

    #[test]
    fn hemisphere_sphere_gap_is_zero() {
        let fam = |n: usize| normalize(n, vec![e(n, 0)], vec![0.0]);
        let recs = sphere_gap(fam, &[16, 64], &McConfig::new(20_000, 1)).unwrap();
        for r in recs {
            assert_eq!(r.gap, 0.0);
            assert_eq!(r.sphere, r.gauss);
        }
    }

    #[test]
    fn cap_sphere_gap_shrinks() {
        let fam = |n: usize| normalize(n, vec![e(n, 0)], vec![1.0 / (n as f64).sqrt()]);
        let recs = sphere_gap(fam, &[16, 256], &McConfig::new(200_000, 1)).unwrap();
        assert!(recs[1].gap <= recs[0].gap + recs[0].gap_half_width + recs[1].gap_half_width);
    }
}
