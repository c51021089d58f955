//! Dense arbitrary-precision integer matrices and Smith normal form with
//! tracked unimodular transforms.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Row-major construction from machine integers.
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows * cols");
        Self { rows, cols, data: entries.iter().map(|&e| BigInt::from(e)).collect() }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_i64(rows.len(), cols, &rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = IntegerMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Product with a column vector.
    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> IntegerMatrix {
        let mut out = IntegerMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Columns `range` as a new matrix.
    pub fn column_block(&self, start: usize, end: usize) -> IntegerMatrix {
        let mut out = IntegerMatrix::zeros(self.rows, end - start);
        for i in 0..self.rows {
            for j in start..end {
                out.data[i * (end - start) + j - start] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Rows `range` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> IntegerMatrix {
        IntegerMatrix { rows: end - start, cols: self.cols, data: self.data[start * self.cols..end * self.cols].to_vec() }
    }

    /// Entries as machine integers, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|e| e.to_i64()).collect()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] -= q * row[src]
    fn row_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j];
            if !s.is_zero() {
                let delta = q * s;
                self.data[dst * self.cols + j] -= delta;
            }
        }
    }

    /// col[dst] -= q * col[src]
    fn col_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src];
            if !s.is_zero() {
                let delta = q * s;
                self.data[i * self.cols + dst] -= delta;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let e = &mut self.data[i * self.cols + j];
            *e = -std::mem::take(e);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let e = &mut self.data[i * self.cols + j];
            *e = -std::mem::take(e);
        }
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Serialize for IntegerMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Vec<serde_json::Value>> = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|e| match e.to_i64() {
                        Some(v) => serde_json::Value::from(v),
                        None => serde_json::Value::from(e.to_string()),
                    })
                    .collect()
            })
            .collect();
        let mut s = serializer.serialize_struct("IntegerMatrix", 3)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

/// How the next pivot is chosen from the remaining submatrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotStrategy {
    /// Entry of smallest absolute value (ties: first in column-major order).
    #[default]
    SmallestMagnitude,
    /// First nonzero entry in column-major order.
    FirstNonzero,
}

/// `U · M · V = S` with `U`, `V` unimodular and `S` diagonal with
/// non-negative entries each dividing the next. The inverses of `U` and `V`
/// are carried along.
#[derive(Debug, Clone, PartialEq)]
pub struct SnfResult {
    pub u: IntegerMatrix,
    pub s: IntegerMatrix,
    pub v: IntegerMatrix,
    pub u_inv: IntegerMatrix,
    pub v_inv: IntegerMatrix,
    pub rank: usize,
}

impl SnfResult {
    /// Nonzero diagonal entries of `S`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.s.get(i, i).clone()).collect()
    }
}

pub fn smith_normal_form(m: &IntegerMatrix) -> SnfResult {
    smith_normal_form_with(m, PivotStrategy::default())
}

pub fn smith_normal_form_with(m: &IntegerMatrix, strategy: PivotStrategy) -> SnfResult {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntegerMatrix::identity(rows);
    let mut u_inv = IntegerMatrix::identity(rows);
    let mut v = IntegerMatrix::identity(cols);
    let mut v_inv = IntegerMatrix::identity(cols);

    // Elementary operations applied to `a` together with the transforms.
    let swap_rows = |a: &mut IntegerMatrix, u: &mut IntegerMatrix, ui: &mut IntegerMatrix, i: usize, j: usize| {
        a.swap_rows(i, j);
        u.swap_rows(i, j);
        ui.swap_cols(i, j);
    };
    let swap_cols = |a: &mut IntegerMatrix, v: &mut IntegerMatrix, vi: &mut IntegerMatrix, i: usize, j: usize| {
        a.swap_cols(i, j);
        v.swap_cols(i, j);
        vi.swap_rows(i, j);
    };
    // row[dst] -= q row[src]
    let row_sub = |a: &mut IntegerMatrix, u: &mut IntegerMatrix, ui: &mut IntegerMatrix, dst: usize, src: usize, q: &BigInt| {
        a.row_sub(dst, src, q);
        u.row_sub(dst, src, q);
        let neg = -q;
        ui.col_sub(src, dst, &neg);
    };
    // col[dst] -= q col[src]
    let col_sub = |a: &mut IntegerMatrix, v: &mut IntegerMatrix, vi: &mut IntegerMatrix, dst: usize, src: usize, q: &BigInt| {
        a.col_sub(dst, src, q);
        v.col_sub(dst, src, q);
        let neg = -q;
        vi.row_sub(src, dst, &neg);
    };

    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = choose_pivot(&a, t, strategy) else { break };
        swap_rows(&mut a, &mut u, &mut u_inv, t, pi);
        swap_cols(&mut a, &mut v, &mut v_inv, t, pj);
        loop {
            // Clear the pivot column below the pivot.
            let mut smallest: Option<usize> = None;
            for i in t + 1..rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = a.get(i, t) / a.get(t, t);
                if !q.is_zero() {
                    row_sub(&mut a, &mut u, &mut u_inv, i, t, &q);
                }
                if !a.get(i, t).is_zero() && smallest.is_none_or(|s| a.get(i, t).abs() < a.get(s, t).abs()) {
                    smallest = Some(i);
                }
            }
            if let Some(i) = smallest {
                swap_rows(&mut a, &mut u, &mut u_inv, t, i);
                continue;
            }
            // Clear the pivot row right of the pivot.
            let mut smallest: Option<usize> = None;
            for j in t + 1..cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = a.get(t, j) / a.get(t, t);
                if !q.is_zero() {
                    col_sub(&mut a, &mut v, &mut v_inv, j, t, &q);
                }
                if !a.get(t, j).is_zero() && smallest.is_none_or(|s| a.get(t, j).abs() < a.get(t, s).abs()) {
                    smallest = Some(j);
                }
            }
            if let Some(j) = smallest {
                swap_cols(&mut a, &mut v, &mut v_inv, t, j);
                continue;
            }
            // Enforce divisibility of the remaining block by the pivot.
            let p = a.get(t, t).clone();
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    // row[t] += row[i]
                    row_sub(&mut a, &mut u, &mut u_inv, t, i, &-BigInt::one());
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
        t += 1;
    }
    SnfResult { u, s: a, v, u_inv, v_inv, rank: t }
}

fn choose_pivot(a: &IntegerMatrix, t: usize, strategy: PivotStrategy) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for j in t..a.cols {
        for i in t..a.rows {
            let e = a.get(i, j);
            if e.is_zero() {
                continue;
            }
            match strategy {
                PivotStrategy::FirstNonzero => return Some((i, j)),
                PivotStrategy::SmallestMagnitude => {
                    if best.is_none_or(|(bi, bj)| e.abs() < a.get(bi, bj).abs()) {
                        best = Some((i, j));
                        if e.abs().is_one() {
                            return best;
                        }
                    }
                }
            }
        }
    }
    best
}
