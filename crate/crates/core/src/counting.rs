//! Dense covering programs and {0,1} contingency tables as polytopes over
//! `{±1}` variables, and solution counting by exact enumeration or by
//! running the block generator over its seeds.
//!
//! A 0/1 variable `X` maps to `x = 2X − 1`, so a linear constraint with
//! integer coefficients stays integral over `x`. Counting always evaluates
//! membership on those integer constraints; the normalized float polytope
//! is only handed out for regularity reports.

use std::path::Path;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::blockprg::{seed_space_fraction, seed_walk_count, ParamsSummary, PrgParams};
use crate::error::{Error, Result};
use crate::oracle::{exact_cube_prob, CounterStream, Estimate};
use crate::polytope::{normalize, CubeEvaluator, PolytopeSpec};

/// `Σᵢ aᵢxᵢ ≤ b` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntFace {
    pub coeffs: Vec<i64>,
    pub bound: i64,
}

/// Intersection of integer halfspaces over `{±1}ⁿ`, evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegerPolytope {
    n: usize,
    faces: Vec<IntFace>,
}

impl IntegerPolytope {
    pub fn new(n: usize, faces: Vec<IntFace>) -> Result<Self> {
        for f in &faces {
            if f.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: f.coeffs.len(),
                });
            }
        }
        Ok(Self { n, faces })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[IntFace] {
        &self.faces
    }

    /// Some face has no variables and a negative bound.
    pub fn trivially_empty(&self) -> bool {
        self.faces
            .iter()
            .any(|f| f.bound < 0 && f.coeffs.iter().all(|&a| a == 0))
    }

    /// The same constraints with unit normals. Faces without variables
    /// cannot be normalized and are left out; see [`trivially_empty`](Self::trivially_empty).
    pub fn to_polytope(&self) -> Result<Option<PolytopeSpec>> {
        let (cols, theta): (Vec<Vec<f64>>, Vec<f64>) = self
            .faces
            .iter()
            .filter(|f| f.coeffs.iter().any(|&a| a != 0))
            .map(|f| (f.coeffs.iter().map(|&a| a as f64).collect(), f.bound as f64))
            .unzip();
        if cols.is_empty() {
            return Ok(None);
        }
        normalize(self.n, cols, theta).map(Some)
    }

    pub fn member(&self, x: &[i8]) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.contains_signs(x))
    }
}

impl CubeEvaluator for IntegerPolytope {
    type State = Vec<i64>;

    fn dim(&self) -> usize {
        self.n
    }

    fn init_state(&self, x: &[i8]) -> Vec<i64> {
        self.faces
            .iter()
            .map(|f| f.coeffs.iter().zip(x).map(|(&a, &s)| a * i64::from(s)).sum())
            .collect()
    }

    fn flip(&self, state: &mut Vec<i64>, i: usize, new_value: i8) {
        let step = 2 * i64::from(new_value);
        for (s, f) in state.iter_mut().zip(&self.faces) {
            *s += step * f.coeffs[i];
        }
    }

    fn accepts(&self, state: &Vec<i64>) -> bool {
        state.iter().zip(&self.faces).all(|(s, f)| *s <= f.bound)
    }

    fn contains_signs(&self, x: &[i8]) -> bool {
        self.faces.iter().all(|f| {
            let s: i64 = f.coeffs.iter().zip(x).map(|(&a, &v)| a * i64::from(v)).sum();
            s <= f.bound
        })
    }
}

/// Covering program `Σ_{i ∋ j} Xᵢ ≥ c_j` over sets `X ∈ {0,1}ⁿ`, with an
/// optional budget `Σ Xᵢ ≤ B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCoverInstance {
    /// Number of sets (variables).
    pub n: usize,
    /// Number of elements (covering constraints).
    pub universe: usize,
    /// Elements of each set.
    pub sets: Vec<Vec<usize>>,
    pub thresholds: Vec<i64>,
    #[serde(default)]
    pub budget: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub declared_eps: f64,
    /// `⌈1/ε²⌉`.
    pub required_occupancy: usize,
    pub min_occupancy: usize,
    /// `min_occupancy^{-1/2}`: regularity of the sparsest covering face.
    pub achieved_eps: f64,
    pub passes: bool,
}

impl SetCoverInstance {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sets.len() != self.n {
            return Err(Error::invalid(format!("expected {} sets, got {}", self.n, self.sets.len())));
        }
        if self.thresholds.len() != self.universe {
            return Err(Error::invalid(format!(
                "expected {} thresholds, got {}",
                self.universe,
                self.thresholds.len()
            )));
        }
        for (i, set) in self.sets.iter().enumerate() {
            let mut seen = set.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != set.len() {
                return Err(Error::invalid(format!("set {i} lists an element twice")));
            }
            if let Some(&e) = set.iter().find(|&&e| e >= self.universe) {
                return Err(Error::IndexOutOfRange {
                    index: e,
                    len: self.universe,
                });
            }
        }
        Ok(())
    }

    /// Sets containing each element.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.universe];
        for (i, set) in self.sets.iter().enumerate() {
            for &e in set {
                inc[e].push(i);
            }
        }
        inc
    }

    pub fn density(&self, eps: f64) -> Result<DensityReport> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0,1], got {eps}")));
        }
        let min_occupancy = self.incidence().iter().map(Vec::len).min().unwrap_or(self.n);
        let required = (1.0 / (eps * eps)).ceil() as usize;
        Ok(DensityReport {
            declared_eps: eps,
            required_occupancy: required,
            min_occupancy,
            achieved_eps: if min_occupancy == 0 {
                f64::INFINITY
            } else {
                (min_occupancy as f64).powf(-0.5)
            },
            passes: min_occupancy >= required,
        })
    }

    /// Each element `j` with member sets `S` gives `Σ_{i∈S} (−xᵢ) ≤ |S| − 2c_j`;
    /// the budget gives `Σ xᵢ ≤ 2B − n`.
    pub fn to_integer_polytope(&self) -> IntegerPolytope {
        let mut faces: Vec<IntFace> = self
            .incidence()
            .iter()
            .zip(&self.thresholds)
            .map(|(members, &c)| {
                let mut coeffs = vec![0i64; self.n];
                for &i in members {
                    coeffs[i] = -1;
                }
                IntFace {
                    coeffs,
                    bound: members.len() as i64 - 2 * c,
                }
            })
            .collect();
        if let Some(b) = self.budget {
            faces.push(IntFace {
                coeffs: vec![1; self.n],
                bound: 2 * b - self.n as i64,
            });
        }
        IntegerPolytope {
            n: self.n,
            faces,
        }
    }

    /// Brute-force feasibility of a 0/1 assignment.
    pub fn satisfied_by(&self, chosen: &[bool]) -> bool {
        let covers = self
            .incidence()
            .iter()
            .zip(&self.thresholds)
            .all(|(members, &c)| members.iter().filter(|&&i| chosen[i]).count() as i64 >= c);
        let within = self
            .budget
            .is_none_or(|b| chosen.iter().filter(|&&c| c).count() as i64 <= b);
        covers && within
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompiledProgram {
    pub integer: IntegerPolytope,
    pub polytope: Option<PolytopeSpec>,
    /// An element lies in no set but needs covering.
    pub infeasible_by_construction: bool,
}

pub fn setcover_to_polytope(inst: &SetCoverInstance) -> Result<CompiledProgram> {
    inst.validate()?;
    compile(inst.to_integer_polytope())
}

fn compile(integer: IntegerPolytope) -> Result<CompiledProgram> {
    Ok(CompiledProgram {
        polytope: integer.to_polytope()?,
        infeasible_by_construction: integer.trivially_empty(),
        integer,
    })
}

/// A random instance in which every element lies in at least `⌈1/ε²⌉` sets.
/// Occupancies are uniform in `[⌈1/ε²⌉, n]`, members uniform among sets,
/// and thresholds `⌊m/2⌋` or `⌊m/2⌋ − 1`.
pub fn generate_dense_setcover(n: usize, universe: usize, eps: f64, stream_seed: u64) -> Result<SetCoverInstance> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0,1], got {eps}")));
    }
    let need = (1.0 / (eps * eps)).ceil() as usize;
    if need > n {
        return Err(Error::invalid(format!("density 1/eps^2 = {need} exceeds n = {n}")));
    }
    let stream = CounterStream::new(stream_seed);
    let mut sets = vec![Vec::new(); n];
    let mut thresholds = Vec::with_capacity(universe);
    for j in 0..universe {
        let mut rng = stream.rng(j as u64);
        let m = need + (rng.next_u64() % (n - need + 1) as u64) as usize;
        let mut order: Vec<usize> = (0..n).collect();
        for a in 0..m {
            let b = a + (rng.next_u64() % (n - a) as u64) as usize;
            order.swap(a, b);
        }
        for &i in &order[..m] {
            sets[i].push(j);
        }
        let half = (m / 2) as i64;
        thresholds.push((half - (rng.next_u64() & 1) as i64).max(0));
    }
    Ok(SetCoverInstance {
        n,
        universe,
        sets,
        thresholds,
        budget: None,
    })
}

/// {0,1} matrices with row sums `rows` and column sums `cols`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTableSpec {
    pub rows: Vec<i64>,
    pub cols: Vec<i64>,
}

impl ContingencyTableSpec {
    pub fn new(rows: Vec<i64>, cols: Vec<i64>) -> Result<Self> {
        let spec = Self { rows, cols };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.rows.len() as i64, self.cols.len() as i64);
        if n == 0 || k == 0 {
            return Err(Error::invalid("contingency table needs at least one row and one column"));
        }
        if let Some(r) = self.rows.iter().find(|&&r| !(0..=k).contains(&r)) {
            return Err(Error::invalid(format!("row sum {r} outside [0, {k}]")));
        }
        if let Some(c) = self.cols.iter().find(|&&c| !(0..=n).contains(&c)) {
            return Err(Error::invalid(format!("column sum {c} outside [0, {n}]")));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn k_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn variables(&self) -> usize {
        self.n_rows() * self.k_cols()
    }

    pub fn conserved(&self) -> bool {
        self.rows.iter().sum::<i64>() == self.cols.iter().sum::<i64>()
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Variable `(i, j)` is coordinate `i·k_cols + j`. Each sum `Σ x = 2s − len`
    /// becomes the pair `Σ x ≤ 2s − len`, `Σ (−x) ≤ len − 2s`.
    pub fn to_integer_polytope(&self) -> IntegerPolytope {
        let (n, k) = (self.n_rows(), self.k_cols());
        let mut faces = Vec::with_capacity(2 * (n + k));
        let mut push_pair = |vars: Vec<usize>, sum: i64| {
            let len = vars.len() as i64;
            for sign in [1i64, -1] {
                let mut coeffs = vec![0i64; n * k];
                for &v in &vars {
                    coeffs[v] = sign;
                }
                faces.push(IntFace {
                    coeffs,
                    bound: sign * (2 * sum - len),
                });
            }
        };
        for (i, &r) in self.rows.iter().enumerate() {
            push_pair((0..k).map(|j| i * k + j).collect(), r);
        }
        for (j, &c) in self.cols.iter().enumerate() {
            push_pair((0..n).map(|i| i * k + j).collect(), c);
        }
        IntegerPolytope { n: n * k, faces }
    }
}

pub fn ctable_to_polytope(spec: &ContingencyTableSpec) -> Result<CompiledProgram> {
    spec.validate()?;
    compile(spec.to_integer_polytope())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    ExactHypercube,
    PrgEnumerated,
    PrgSampled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    /// Exact if `2^n ≤ budget`, else the full seed space if it fits, else sampled seeds.
    #[default]
    Auto,
    Exact,
    PrgEnumerated,
    PrgSampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub method: CountMethod,
    pub variables: usize,
    pub faces: usize,
    pub fraction_estimate: f64,
    /// `fraction_estimate · 2^variables`.
    pub count_estimate: f64,
    /// `numerator/denominator` when the fraction is exact.
    pub exact_fraction: Option<String>,
    /// Additive error claimed: 0 when exact, otherwise the configured δ.
    pub error_budget: Option<f64>,
    pub sampling_ci: Option<Estimate>,
    /// Generator or hypercube points evaluated.
    pub points_evaluated: u128,
    /// Seeds represented by the estimate, as a power of two for full enumeration.
    pub seeds_covered: String,
    pub budget: u64,
    pub params: Option<ParamsSummary>,
}

fn fraction_string(numerator: u128, log2_denominator: u32) -> String {
    if numerator == 0 {
        return "0/1".into();
    }
    let shift = numerator.trailing_zeros().min(log2_denominator);
    let (num, den) = (numerator >> shift, log2_denominator - shift);
    if den < 64 {
        format!("{num}/{}", 1u64 << den)
    } else {
        format!("{num}/2^{den}")
    }
}

/// Counts points of `{±1}ⁿ` in `poly`.
pub fn count(
    poly: &IntegerPolytope,
    params: &PrgParams,
    method: MethodChoice,
    budget: u64,
    ci_level: f64,
) -> Result<CountReport> {
    if budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    let n = poly.n();
    if params.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: params.n,
        });
    }
    let cube_fits = n < 63 && (1u64 << n) <= budget;
    let mut enumerated = None;
    let method = match method {
        MethodChoice::Exact => CountMethod::ExactHypercube,
        MethodChoice::PrgEnumerated => CountMethod::PrgEnumerated,
        MethodChoice::PrgSampled => CountMethod::PrgSampled,
        MethodChoice::Auto if cube_fits => CountMethod::ExactHypercube,
        MethodChoice::Auto if n > 64 => CountMethod::PrgSampled,
        MethodChoice::Auto => match seed_space_fraction(params, poly, budget) {
            Ok(f) => {
                enumerated = Some(f);
                CountMethod::PrgEnumerated
            }
            Err(Error::BudgetExceeded { .. }) => CountMethod::PrgSampled,
            Err(e) => return Err(e),
        },
    };
    let total = 2f64.powi(n as i32);
    let base = |fraction: f64| CountReport {
        method,
        variables: n,
        faces: poly.k(),
        fraction_estimate: fraction,
        count_estimate: fraction * total,
        exact_fraction: None,
        error_budget: params.delta,
        sampling_ci: None,
        points_evaluated: 0,
        seeds_covered: String::new(),
        budget,
        params: Some(params.summary()),
    };
    Ok(match method {
        CountMethod::ExactHypercube => {
            let exact = exact_cube_prob(poly, budget)?;
            CountReport {
                exact_fraction: Some(fraction_string(exact.count as u128, exact.log2_total)),
                error_budget: Some(0.0),
                points_evaluated: 1u128 << n,
                seeds_covered: format!("2^{n}"),
                params: None,
                ..base(exact.value())
            }
        }
        CountMethod::PrgEnumerated => {
            let f = match enumerated {
                Some(f) => f,
                None => seed_space_fraction(params, poly, budget)?,
            };
            CountReport {
                exact_fraction: Some(fraction_string(f.numerator, f.log2_denominator)),
                points_evaluated: f.points_evaluated + (1u128 << f.hash_rank),
                seeds_covered: format!("2^{}", params.total_seed_bits()),
                ..base(f.value())
            }
        }
        CountMethod::PrgSampled => {
            let w = seed_walk_count(params, poly, budget)?;
            let est = Estimate::from_counts(w.accepted, w.seeds, ci_level);
            CountReport {
                points_evaluated: w.seeds as u128,
                seeds_covered: if w.sampled {
                    w.seeds.to_string()
                } else {
                    format!("2^{}", params.total_seed_bits())
                },
                sampling_ci: w.sampled.then_some(est),
                ..base(w.fraction())
            }
        }
    })
}
