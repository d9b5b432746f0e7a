//! Linear algebra over GF(2) on packed bit rows, and Gray-code enumeration
//! of `{±1}` points whose sign pattern ranges over a subspace.

use rayon::prelude::*;

use crate::polytope::CubeEvaluator;

/// Row-echelon basis of packed bit vectors, all of the same word width.
#[derive(Clone, Debug, Default)]
pub struct Basis {
    words: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

fn leading_bit(row: &[u64]) -> Option<usize> {
    row.iter()
        .enumerate()
        .rev()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
}

#[inline]
fn has_bit(row: &[u64], bit: usize) -> bool {
    row[bit / 64] >> (bit % 64) & 1 == 1
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

impl Basis {
    pub fn new(words: usize) -> Self {
        Self {
            words,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Adds `row` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, mut row: Vec<u64>) -> bool {
        debug_assert_eq!(row.len(), self.words);
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            if has_bit(&row, p) {
                xor_into(&mut row, r);
            }
        }
        match leading_bit(&row) {
            None => false,
            Some(p) => {
                // keep pivots strictly decreasing so a single pass reduces
                let pos = self.pivots.partition_point(|&q| q > p);
                self.rows.insert(pos, row);
                self.pivots.insert(pos, p);
                true
            }
        }
    }

    /// Fully reduced echelon form: a canonical key for the span.
    pub fn canonical(mut self) -> Vec<Vec<u64>> {
        for i in 0..self.rows.len() {
            let p = self.pivots[i];
            for j in 0..self.rows.len() {
                if j != i && has_bit(&self.rows[j], p) {
                    let src = self.rows[i].clone();
                    xor_into(&mut self.rows[j], &src);
                }
            }
        }
        self.rows
    }

    /// The `j`-th span element: XOR of the rows selected by the bits of `j`.
    pub fn element(&self, j: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.words];
        let mut rest = j;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            xor_into(&mut out, &self.rows[b]);
            rest &= rest - 1;
        }
        out
    }
}

const CHUNK: u64 = 1 << 12;

/// Counts points of `{±1}ⁿ` accepted by `eval` whose `−1` pattern lies in the
/// span of `basis` (single-word masks, `n ≤ 64`). The whole span is visited
/// once, in Gray-code order within fixed chunks.
pub fn count_in_span<E: CubeEvaluator>(eval: &E, basis: &[u64]) -> u64 {
    let n = eval.dim();
    let dim = basis.len();
    assert!(dim < 64, "span too large to enumerate");
    let total = 1u64 << dim;
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let gray = start ^ (start >> 1);
            let mut mask = 0u64;
            let mut rest = gray;
            while rest != 0 {
                mask ^= basis[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            let mut x: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            let mut state = eval.init_state(&x);
            let mut accepted = u64::from(eval.accepts(&state));
            for g in start + 1..end {
                let mut v = basis[g.trailing_zeros() as usize];
                while v != 0 {
                    let i = v.trailing_zeros() as usize;
                    x[i] = -x[i];
                    eval.flip(&mut state, i, x[i]);
                    v &= v - 1;
                }
                accepted += u64::from(eval.accepts(&state));
            }
            accepted
        })
        .sum()
}

/// Unit vectors `e_0 … e_{n−1}` as single-word masks.
pub fn cube_basis(n: usize) -> Vec<u64> {
    (0..n).map(|i| 1u64 << i).collect()
}
