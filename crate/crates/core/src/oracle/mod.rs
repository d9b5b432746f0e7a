//! Ground-truth acceptance probabilities: exact hypercube enumeration, closed
//! forms for separable polytopes, and Monte Carlo under the Gaussian, sphere
//! and hypercube measures.

mod stats;
mod stream;

use std::collections::BTreeMap;

use rand_core::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{count_in_span, cube_basis};
use crate::polytope::{CubeEvaluator, PolytopeSpec};

pub use stats::{normal_cdf, normal_quantile, Estimate};
pub use stream::{fill_gaussian, uniform, uniform_open0, CounterStream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub samples: u64,
    pub stream_seed: u64,
    pub ci_level: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            stream_seed: 0,
            ci_level: 0.999,
        }
    }
}

impl McConfig {
    pub fn new(samples: u64, stream_seed: u64) -> Self {
        Self {
            samples,
            stream_seed,
            ..Self::default()
        }
    }

    pub fn stream(&self) -> CounterStream {
        CounterStream::new(self.stream_seed)
    }

    /// Same settings on an independent stream labelled `label`.
    pub fn derived(&self, label: u64) -> Self {
        Self {
            stream_seed: self.stream().derive(label).key(),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("sample_count must be at least 1"));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::invalid(format!("ci_level must lie in (0,1), got {}", self.ci_level)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Standard Gaussian `N(0, I_n)`.
    Gaussian,
    /// Uniform on the unit sphere `S^{n−1}`.
    Sphere,
    /// Uniform on `{±1}ⁿ`.
    Cube,
}

/// `count / 2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExactFraction {
    pub count: u64,
    pub log2_total: u32,
}

impl ExactFraction {
    pub fn value(&self) -> f64 {
        self.count as f64 / 2f64.powi(self.log2_total as i32)
    }
}

impl std::fmt::Display for ExactFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.count, 1u128 << self.log2_total)
    }
}

/// Exact `Pr_{x ∈ {±1}ⁿ}[x ∈ K]` by Gray-code enumeration.
pub fn exact_cube_prob<E: CubeEvaluator>(eval: &E, budget: u64) -> Result<ExactFraction> {
    let n = eval.dim();
    if n >= 63 || (1u64 << n) > budget {
        return Err(Error::BudgetExceeded {
            required: format!("2^{n}"),
            budget,
        });
    }
    Ok(ExactFraction {
        count: count_in_span(eval, &cube_basis(n)),
        log2_total: n as u32,
    })
}

/// Draws sample `i` of `measure` into `buf`.
pub fn draw(measure: Measure, stream: &CounterStream, i: u64, buf: &mut [f64]) {
    let mut rng = stream.rng(i);
    match measure {
        Measure::Gaussian => fill_gaussian(&mut rng, buf),
        Measure::Sphere => {
            fill_gaussian(&mut rng, buf);
            let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in buf.iter_mut() {
                *v /= norm;
            }
        }
        Measure::Cube => {
            let mut bits = 0u64;
            for (j, v) in buf.iter_mut().enumerate() {
                if j % 64 == 0 {
                    bits = rng.next_u64();
                }
                *v = if bits >> (j % 64) & 1 == 1 { -1.0 } else { 1.0 };
            }
        }
    }
}

/// Monte Carlo tally of `outcomes` events per sample; `f` marks which events
/// occurred. Counts are summed, so results do not depend on scheduling.
pub fn mc_tally<F>(n: usize, measure: Measure, cfg: &McConfig, outcomes: usize, f: F) -> Result<Vec<u64>>
where
    F: Fn(&[f64], &mut [bool]) + Sync,
{
    cfg.validate()?;
    let stream = cfg.stream();
    let tally = (0..cfg.samples)
        .into_par_iter()
        .fold(
            || (vec![0.0; n], vec![false; outcomes], vec![0u64; outcomes]),
            |(mut buf, mut hit, mut acc), i| {
                draw(measure, &stream, i, &mut buf);
                hit.iter_mut().for_each(|h| *h = false);
                f(&buf, &mut hit);
                for (a, h) in acc.iter_mut().zip(&hit) {
                    *a += u64::from(*h);
                }
                (buf, hit, acc)
            },
        )
        .map(|(_, _, acc)| acc)
        .reduce(
            || vec![0u64; outcomes],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(tally)
}

pub fn mc_prob(poly: &PolytopeSpec, measure: Measure, cfg: &McConfig) -> Result<Estimate> {
    let hits = mc_tally(poly.n(), measure, cfg, 1, |x, out| {
        out[0] = poly.member_unchecked(x);
    })?;
    Ok(Estimate::from_counts(hits[0], cfg.samples, cfg.ci_level))
}

pub fn gaussian_mc_prob(poly: &PolytopeSpec, cfg: &McConfig) -> Result<Estimate> {
    mc_prob(poly, Measure::Gaussian, cfg)
}

pub fn sphere_mc_prob(poly: &PolytopeSpec, cfg: &McConfig) -> Result<Estimate> {
    mc_prob(poly, Measure::Sphere, cfg)
}

pub fn cube_mc_prob(poly: &PolytopeSpec, cfg: &McConfig) -> Result<Estimate> {
    mc_prob(poly, Measure::Cube, cfg)
}

/// `∏ₚ Φ(θ_p)` for mutually orthogonal faces.
pub fn separable_gaussian_prob(poly: &PolytopeSpec) -> Result<f64> {
    poly.check_orthogonal(1e-10)?;
    Ok(poly.theta().iter().map(|&t| normal_cdf(t)).product())
}

/// Exact cube probability for faces with pairwise disjoint supports: the
/// faces are independent, so the probability factorizes. Within a face,
/// coordinates sharing a weight magnitude contribute a binomial term, and
/// the remaining distinct magnitudes are enumerated (at most `budget`
/// patterns per face).
pub fn disjoint_cube_prob(poly: &PolytopeSpec, budget: u64) -> Result<f64> {
    let n = poly.n();
    let mut used = vec![false; n];
    let mut prob = 1.0;
    for (p, (col, &theta)) in poly.columns().zip(poly.theta()).enumerate() {
        let support: Vec<usize> = (0..n).filter(|&i| col[i] != 0.0).collect();
        for &i in &support {
            if used[i] {
                return Err(Error::invalid(format!("face {p} shares coordinate {i} with an earlier face")));
            }
            used[i] = true;
        }
        let weights: Vec<f64> = support.iter().map(|&i| col[i]).collect();
        prob *= face_cube_prob(&weights, theta, budget)?;
    }
    Ok(prob)
}

/// `Pr_x[⟨w, x⟩ ≤ θ]` for uniform `x ∈ {±1}^{len(w)}`.
pub fn face_cube_prob(weights: &[f64], theta: f64, budget: u64) -> Result<f64> {
    let mut classes: BTreeMap<u64, usize> = BTreeMap::new();
    for w in weights {
        *classes.entry(w.abs().to_bits()).or_insert(0) += 1;
    }
    let singles: Vec<f64> = classes
        .iter()
        .filter(|(_, &c)| c == 1)
        .map(|(&b, _)| f64::from_bits(b))
        .collect();
    let m = singles.len();
    if m >= 63 || (1u64 << m) > budget {
        return Err(Error::BudgetExceeded {
            required: format!("2^{m}"),
            budget,
        });
    }

    // law of the repeated-magnitude part: (value, probability) pairs
    let mut law: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for (&bits, &s) in classes.iter().filter(|(_, &c)| c > 1) {
        let mag = f64::from_bits(bits);
        let mut binom = Vec::with_capacity(s + 1);
        let mut b = 0.5f64.powi(s as i32);
        for j in 0..=s {
            binom.push((mag * (s as f64 - 2.0 * j as f64), b));
            b = b * (s - j) as f64 / (j + 1) as f64;
        }
        if (law.len() * binom.len()) as u64 > budget {
            return Err(Error::BudgetExceeded {
                required: format!("{} repeated-weight terms", law.len() * binom.len()),
                budget,
            });
        }
        law = law
            .iter()
            .flat_map(|&(v, p)| binom.iter().map(move |&(u, q)| (v + u, p * q)))
            .collect();
    }

    let mut sums: Vec<f64> = (0..1u64 << m)
        .map(|mask| {
            singles
                .iter()
                .enumerate()
                .map(|(i, w)| if mask >> i & 1 == 1 { -w } else { *w })
                .sum()
        })
        .collect();
    sums.sort_by(f64::total_cmp);
    let total = sums.len() as f64;
    Ok(law
        .iter()
        .map(|&(v, p)| p * sums.partition_point(|&s| s + v <= theta) as f64 / total)
        .sum())
}
