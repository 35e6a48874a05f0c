//! Dense row-major kernels used by the forward and backward passes.
//!
//! Everything here is plain `f64` storage with value semantics. Sparsity is
//! tracked elsewhere by masks and zero counts, never by storage format.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Entrywise sum; lengths must agree.
    pub fn add(&self, other: &Vector) -> Result<Vector> {
        if self.len() != other.len() {
            return Err(Error::shape(
                "vector add",
                format!("length {}", self.len()),
                format!("length {}", other.len()),
            ));
        }
        Ok(Vector(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Index of the largest entry, lowest index on ties. `None` when empty.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &x) in self.0.iter().enumerate() {
            match best {
                Some((_, b)) if x <= b => {}
                _ => best = Some((i, x)),
            }
        }
        best.map(|(i, _)| i)
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::shape(
                "matrix construction",
                format!("{rows}x{cols}"),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape(
                "matrix construction",
                format!("{cols} columns"),
                "ragged rows",
            ));
        }
        Matrix::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn dims(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            writeln!(f, "{:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// `result[j] = sum_i m[j, i] * v[i]`.
pub fn matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.cols != v.len() {
        return Err(Error::shape(
            "matvec",
            format!("matrix {}", m.dims()),
            format!("vector of length {}", v.len()),
        ));
    }
    Ok(Vector(
        (0..m.rows)
            .map(|j| m.row(j).iter().zip(v.iter()).map(|(w, x)| w * x).sum())
            .collect(),
    ))
}

/// Transposed product `result[i] = sum_j m[j, i] * v[j]`, used to carry
/// deltas back one layer.
pub fn matvec_transposed(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.rows != v.len() {
        return Err(Error::shape(
            "transposed matvec",
            format!("matrix {}", m.dims()),
            format!("vector of length {}", v.len()),
        ));
    }
    let mut out = vec![0.0; m.cols];
    for (j, &vj) in v.iter().enumerate() {
        for (o, &w) in out.iter_mut().zip(m.row(j)) {
            *o += w * vj;
        }
    }
    Ok(Vector(out))
}

/// `result[j, i] = u[j] * v[i]`.
pub fn outer(u: &Vector, v: &Vector) -> Matrix {
    let mut data = Vec::with_capacity(u.len() * v.len());
    for &a in u.iter() {
        data.extend(v.iter().map(|&b| a * b));
    }
    Matrix {
        rows: u.len(),
        cols: v.len(),
        data,
    }
}

/// Applies an activation entrywise. Per-neuron thresholds are indexed by
/// position, so their count must match `v`.
pub fn map(kind: &ActivationKind, v: &Vector) -> Result<Vector> {
    kind.check_width(v.len())?;
    Ok(Vector(
        v.iter()
            .enumerate()
            .map(|(j, &x)| kind.eval_at(j, x))
            .collect(),
    ))
}
