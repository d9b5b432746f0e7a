//! Polytopes `K(W, θ) = {x : Wᵀx ≤ θ}` with unit-norm face normals.
//!
//! The matrix is stored column-major: face `p` occupies
//! `columns[p * n .. (p + 1) * n]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeSpec {
    n: usize,
    k: usize,
    columns: Vec<f64>,
    theta: Vec<f64>,
    scales: Vec<f64>,
}

/// Per-face regularity: entry `p` is `(Σᵢ W_ip⁴)^{1/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub per_column_eps: Vec<f64>,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub n: usize,
    pub k: usize,
    pub columns: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
}

/// Scales every column to unit norm and `θ` by the same factor.
pub fn normalize(n: usize, columns: Vec<Vec<f64>>, theta: Vec<f64>) -> Result<PolytopeSpec> {
    if n == 0 {
        return Err(Error::invalid("dimension n must be at least 1"));
    }
    if columns.is_empty() {
        return Err(Error::invalid("polytope needs at least one face"));
    }
    if theta.len() != columns.len() {
        return Err(Error::DimensionMismatch {
            expected: columns.len(),
            got: theta.len(),
        });
    }
    let k = columns.len();
    let mut flat = Vec::with_capacity(n * k);
    let mut scaled_theta = Vec::with_capacity(k);
    let mut scales = Vec::with_capacity(k);
    for (p, (col, th)) in columns.into_iter().zip(theta).enumerate() {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: col.len(),
            });
        }
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroColumn { column: p });
        }
        if norm == 1.0 {
            flat.extend_from_slice(&col);
            scaled_theta.push(th);
        } else {
            flat.extend(col.iter().map(|v| v / norm));
            scaled_theta.push(th / norm);
        }
        scales.push(norm);
    }
    Ok(PolytopeSpec {
        n,
        k,
        columns: flat,
        theta: scaled_theta,
        scales,
    })
}

impl PolytopeSpec {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Original column norms divided out by [`normalize`].
    pub fn scale_factors(&self) -> &[f64] {
        &self.scales
    }

    pub fn column(&self, p: usize) -> &[f64] {
        &self.columns[p * self.n..(p + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.columns.chunks_exact(self.n)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: PolytopeJson = serde_json::from_str(s)?;
        Self::from_json(raw)
    }

    pub fn from_json(raw: PolytopeJson) -> Result<Self> {
        if raw.columns.len() != raw.k {
            return Err(Error::DimensionMismatch {
                expected: raw.k,
                got: raw.columns.len(),
            });
        }
        normalize(raw.n, raw.columns, raw.theta)
    }

    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson {
            n: self.n,
            k: self.k,
            columns: self.columns().map(|c| c.to_vec()).collect(),
            theta: self.theta.clone(),
        }
    }

    /// Same faces, new offsets.
    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: theta.len(),
            });
        }
        Ok(Self {
            theta,
            ..self.clone()
        })
    }

    /// Appends zero rows up to dimension `dim`. Inner products are unchanged.
    pub fn pad(&self, dim: usize) -> Result<Self> {
        if dim < self.n {
            return Err(Error::invalid(format!(
                "cannot pad dimension {} down to {dim}",
                self.n
            )));
        }
        let mut columns = Vec::with_capacity(dim * self.k);
        for col in self.columns() {
            columns.extend_from_slice(col);
            columns.extend(std::iter::repeat_n(0.0, dim - self.n));
        }
        Ok(Self {
            n: dim,
            columns,
            ..self.clone()
        })
    }

    /// Builds a spec from columns that are already unit norm; used by
    /// transformations that preserve norms exactly in exact arithmetic.
    pub(crate) fn from_raw_unit(n: usize, columns: Vec<f64>, theta: Vec<f64>) -> Self {
        let k = theta.len();
        debug_assert_eq!(columns.len(), n * k);
        Self {
            n,
            k,
            columns,
            theta,
            scales: vec![1.0; k],
        }
    }

    pub fn regularity(&self) -> RegularityReport {
        let per_column_eps: Vec<f64> = self
            .columns()
            .map(|c| c.iter().map(|v| v.powi(4)).sum::<f64>().sqrt())
            .collect();
        let eps = per_column_eps.iter().copied().fold(0.0, f64::max);
        RegularityReport {
            per_column_eps,
            eps,
        }
    }

    /// `Wᵀx`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        Ok(self.columns().map(|c| dot(c, x)).collect())
    }

    pub fn member(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self.member_unchecked(x))
    }

    pub(crate) fn member_unchecked(&self, x: &[f64]) -> bool {
        self.columns()
            .zip(&self.theta)
            .all(|(c, &th)| dot(c, x) <= th)
    }

    /// True iff `Wᵀx ∈ Rect(θ) \ Rect(θ − λ𝟙)`.
    pub fn shell_member(&self, x: &[f64], lambda: f64) -> Result<bool> {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("shell width must be positive, got {lambda}")));
        }
        let proj = self.project(x)?;
        Ok(in_shell(&proj, &self.theta, lambda))
    }

    /// Fails on the first pair of faces with `|⟨Wᵖ, W^q⟩| > tol`.
    pub fn check_orthogonal(&self, tol: f64) -> Result<()> {
        for a in 0..self.k {
            for b in a + 1..self.k {
                let d = dot(self.column(a), self.column(b));
                if d.abs() > tol {
                    return Err(Error::NotOrthogonal { a, b, dot: d });
                }
            }
        }
        Ok(())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }
}

pub(crate) fn in_shell(proj: &[f64], theta: &[f64], lambda: f64) -> bool {
    let outer = proj.iter().zip(theta).all(|(v, t)| *v <= *t);
    let inner = proj.iter().zip(theta).all(|(v, t)| *v <= *t - lambda);
    outer && !inner
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Incremental membership over `{±1}ⁿ`, used by Gray-code style enumerators.
///
/// `flip(i, v)` is called after coordinate `i` changed to `v`.
pub trait CubeEvaluator: Sync {
    type State: Clone + Send;

    fn dim(&self) -> usize;
    fn init_state(&self, x: &[i8]) -> Self::State;
    fn flip(&self, state: &mut Self::State, i: usize, new_value: i8);
    fn accepts(&self, state: &Self::State) -> bool;

    fn contains_signs(&self, x: &[i8]) -> bool {
        self.accepts(&self.init_state(x))
    }
}

/// Incremental sums drift from the direct dot product by rounding, so faces
/// whose running sum lies this close to `θ` are re-evaluated directly.
const RECHECK_BAND: f64 = 1e-9;

/// Running face sums plus the point itself.
#[derive(Clone, Debug)]
pub struct PolytopeState {
    sums: Vec<f64>,
    x: Vec<f64>,
}

impl CubeEvaluator for PolytopeSpec {
    type State = PolytopeState;

    fn dim(&self) -> usize {
        self.n
    }

    fn init_state(&self, x: &[i8]) -> PolytopeState {
        let x: Vec<f64> = x.iter().map(|&s| f64::from(s)).collect();
        PolytopeState {
            sums: self.columns().map(|c| dot(c, &x)).collect(),
            x,
        }
    }

    fn flip(&self, state: &mut PolytopeState, i: usize, new_value: i8) {
        let v = f64::from(new_value);
        state.x[i] = v;
        let step = 2.0 * v;
        for (p, s) in state.sums.iter_mut().enumerate() {
            *s += step * self.columns[p * self.n + i];
        }
    }

    fn accepts(&self, state: &PolytopeState) -> bool {
        state.sums.iter().zip(&self.theta).enumerate().all(|(p, (&s, &t))| {
            if (s - t).abs() > RECHECK_BAND {
                s <= t
            } else {
                dot(self.column(p), &state.x) <= t
            }
        })
    }

    fn contains_signs(&self, x: &[i8]) -> bool {
        self.columns().zip(&self.theta).all(|(c, &th)| {
            let s: f64 = c.iter().zip(x).map(|(w, &v)| w * f64::from(v)).sum();
            s <= th
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn normalize_scales_column_and_theta() {
        let p = normalize(2, vec![vec![3.0, 4.0]], vec![5.0]).unwrap();
        assert_eq!(p.column(0), &[0.6, 0.8]);
        assert_eq!(p.theta(), &[1.0]);
        assert_eq!(p.scale_factors(), &[5.0]);

        let q = normalize(2, vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert_eq!(q.column(0), &[1.0, 0.0]);
        assert_eq!(q.theta(), &[0.0]);
    }

    #[test]
    fn normalize_rejects_zero_column() {
        let err = normalize(2, vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::ZeroColumn { column: 1 }));
    }

    #[test]
    fn regularity_examples() {
        for n in [1usize, 4, 9, 64] {
            let u = vec![1.0 / (n as f64).sqrt(); n];
            let p = normalize(n, vec![u, e(n, 0)], vec![0.0, 0.0]).unwrap();
            let r = p.regularity();
            assert!((r.per_column_eps[0] - (n as f64).powf(-0.5)).abs() < 1e-12);
            assert!((r.per_column_eps[1] - 1.0).abs() < 1e-15);
            assert_eq!(r.eps, 1.0);
        }
    }

    #[test]
    fn uniform_column_attains_lower_bound() {
        for n in 1..=64usize {
            let p = normalize(n, vec![vec![1.0; n]], vec![0.0]).unwrap();
            let eps = p.regularity().eps;
            let bound = (n as f64).powf(-0.5);
            assert!((eps - bound).abs() < 1e-12, "n={n}: {eps} vs {bound}");
        }
    }

    #[test]
    fn membership_examples() {
        let p = normalize(3, vec![e(3, 0)], vec![0.0]).unwrap();
        assert!(p.member(&[-1.0, 1.0, 1.0]).unwrap());
        assert!(!p.member(&[1.0, 1.0, 1.0]).unwrap());
        assert!(p.member(&[0.0, 5.0, 5.0]).unwrap());

        let orthant = normalize(3, vec![e(3, 0), e(3, 1)], vec![0.0, 0.0]).unwrap();
        assert!(orthant.member(&[-1.0, -1.0, 7.0]).unwrap());
        assert!(matches!(
            orthant.member(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn shell_examples() {
        let p = normalize(2, vec![e(2, 0), e(2, 1)], vec![0.5, 0.25]).unwrap();
        // Wᵀx = θ
        assert!(p.shell_member(&[0.5, 0.25], 0.1).unwrap());
        // Wᵀx = θ − 0.2
        assert!(!p.shell_member(&[0.3, 0.05], 0.1).unwrap());
        // outside
        assert!(!p.shell_member(&[0.6, 0.0], 0.1).unwrap());
        assert!(p.shell_member(&[0.0, 0.0], 0.0).is_err());
        assert!(p.shell_member(&[0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn pad_preserves_inner_products() {
        let p = normalize(3, vec![vec![1.0, 2.0, 2.0]], vec![0.1]).unwrap();
        let q = p.pad(4).unwrap();
        assert_eq!(q.n(), 4);
        let x = [0.5, -1.0, 2.0];
        let xp = [0.5, -1.0, 2.0, 9.0];
        assert_eq!(p.project(&x).unwrap(), q.project(&xp).unwrap());
        assert!(p.pad(2).is_err());
    }

    #[test]
    fn json_roundtrip_records_scales() {
        let s = r#"{"n":2,"k":1,"columns":[[3,4]],"theta":[5]}"#;
        let p = PolytopeSpec::from_json_str(s).unwrap();
        assert_eq!(p.scale_factors(), &[5.0]);
        let back = PolytopeSpec::from_json(p.to_json()).unwrap();
        assert_eq!(back.column(0), p.column(0));
    }

    #[test]
    fn incremental_state_matches_direct() {
        let p = normalize(3, vec![vec![1.0, -2.0, 0.5], vec![0.0, 1.0, 1.0]], vec![0.2, 0.0]).unwrap();
        let mut x = [1i8, 1, 1];
        let mut st = p.init_state(&x);
        for i in [0usize, 2, 1, 0] {
            x[i] = -x[i];
            p.flip(&mut st, i, x[i]);
            let fresh = p.init_state(&x);
            for (a, b) in st.sums.iter().zip(&fresh.sums) {
                assert!((a - b).abs() < 1e-12);
            }
            assert_eq!(p.accepts(&st), p.contains_signs(&x));
        }
    }

    fn arb_polytope() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, Vec<f64>)> {
        (1usize..6, 1usize..4).prop_flat_map(|(n, k)| {
            (
                Just(n),
                prop::collection::vec(
                    prop::collection::vec(-1.0f64..1.0, n).prop_filter("nonzero", |c| {
                        c.iter().any(|v| v.abs() > 1e-3)
                    }),
                    k,
                ),
                prop::collection::vec(-2.0f64..2.0, k),
            )
        })
    }

    proptest! {
        #[test]
        fn member_monotone_in_theta(
            (n, cols, theta) in arb_polytope(),
            bump in prop::collection::vec(0.0f64..1.0, 4),
            x in prop::collection::vec(-2.0f64..2.0, 6),
        ) {
            let p = normalize(n, cols, theta.clone()).unwrap();
            let wider: Vec<f64> = p.theta().iter().zip(bump.iter().cycle()).map(|(t, b)| t + b).collect();
            let q = p.with_theta(wider).unwrap();
            let x = &x[..n];
            if p.member(x).unwrap() {
                prop_assert!(q.member(x).unwrap());
            }
        }

        #[test]
        fn shell_is_outer_minus_inner(
            (n, cols, theta) in arb_polytope(),
            lambda in 0.001f64..1.0,
            x in prop::collection::vec(-2.0f64..2.0, 6),
        ) {
            let p = normalize(n, cols, theta).unwrap();
            let inner = p.with_theta(p.theta().iter().map(|t| t - lambda).collect()).unwrap();
            let x = &x[..n];
            let expected = p.member(x).unwrap() && !inner.member(x).unwrap();
            prop_assert_eq!(p.shell_member(x, lambda).unwrap(), expected);
        }

        #[test]
        fn regularity_invariant_under_signs_and_row_permutation(
            (n, cols, theta) in arb_polytope(),
            signs in prop::collection::vec(any::<bool>(), 6),
            rot in 0usize..6,
        ) {
            let p = normalize(n, cols.clone(), theta.clone()).unwrap();
            let moved: Vec<Vec<f64>> = cols
                .iter()
                .map(|c| {
                    let mut c: Vec<f64> = c
                        .iter()
                        .zip(&signs)
                        .map(|(v, s)| if *s { -v } else { *v })
                        .collect();
                    c.rotate_left(rot % n);
                    c
                })
                .collect();
            let q = normalize(n, moved, theta).unwrap();
            for (a, b) in p.regularity().per_column_eps.iter().zip(&q.regularity().per_column_eps) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn normalized_columns_have_unit_norm((n, cols, theta) in arb_polytope()) {
            let p = normalize(n, cols, theta).unwrap();
            for c in p.columns() {
                let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!((norm - 1.0).abs() < 1e-12);
            }
            let r = p.regularity();
            for v in &r.per_column_eps {
                prop_assert!(*v >= (n as f64).powf(-0.5) - 1e-12 && *v <= 1.0 + 1e-12);
            }
        }
    }
}
