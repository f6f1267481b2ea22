//! Matrices over a finite PIR: row-echelon form, the unique reduced
//! row-echelon form, the echelon verification algorithm, and membership
//! testing against an echelon basis.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::ring::{Ring, Value};

/// Rectangular matrix over one ring. Rows may be zero; no canonicity is
/// implied. The empty matrix (zero rows) is allowed and represents the zero
/// module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    ring: Arc<Ring>,
    rows: usize,
    cols: usize,
    data: Vec<Value>,
}

impl Matrix {
    pub fn from_rows(ring: Arc<Ring>, cols: usize, rows: Vec<Vec<Value>>) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row has {} entries, expected {}",
                    row.len(),
                    cols
                )));
            }
            for v in row {
                if !ring.contains(v) {
                    return Err(Error::InvalidParameter(format!(
                        "{v} is not a canonical element of {ring}"
                    )));
                }
                data.push(v.clone());
            }
        }
        Ok(Matrix {
            ring,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn zero(ring: Arc<Ring>, rows: usize, cols: usize) -> Matrix {
        let z = ring.zero();
        Matrix {
            ring,
            rows,
            cols,
            data: vec![z; rows * cols],
        }
    }

    pub fn identity(ring: Arc<Ring>, n: usize) -> Matrix {
        let mut m = Matrix::zero(ring.clone(), n, n);
        let one = ring.one();
        for i in 0..n {
            m.set(i, i, one.clone());
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(
        ring: Arc<Ring>,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Matrix {
        let data = (0..rows * cols).map(|_| ring.random_element(rng)).collect();
        Matrix {
            ring,
            rows,
            cols,
            data,
        }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &Value {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Value) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Value] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Value>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(|v| self.ring.is_zero(v))
    }

    /// Append the rows of `other` below `self`.
    pub fn stack(&self, other: &Matrix) -> Result<Matrix> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "stack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix {
            ring: self.ring.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ring = &self.ring;
        let mut out = Matrix::zero(ring.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = ring.zero();
                for k in 0..self.cols {
                    acc = ring.add(&acc, &ring.mul(self.entry(i, k), other.entry(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("matrix addition".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.ring.add(a, b))
            .collect();
        Ok(Matrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

/// Index of the first nonzero entry; `None` is the +infinity sentinel for
/// the zero vector and sorts after every finite position.
pub fn leading_position(ring: &Ring, v: &[Value]) -> Option<usize> {
    v.iter().position(|x| !ring.is_zero(x))
}

fn scale_row(ring: &Ring, c: &Value, row: &[Value]) -> Vec<Value> {
    row.iter().map(|x| ring.mul(c, x)).collect()
}

fn combine_rows(ring: &Ring, a: &Value, u: &[Value], b: &Value, w: &[Value]) -> Vec<Value> {
    u.iter()
        .zip(w)
        .map(|(x, y)| ring.add(&ring.mul(a, x), &ring.mul(b, y)))
        .collect()
}

fn is_zero_vec(ring: &Ring, v: &[Value]) -> bool {
    v.iter().all(|x| ring.is_zero(x))
}

/// Matrix in row-echelon form (no zero rows, strictly increasing leading
/// positions, tail-span condition). When `reduced` is set the pivots are
/// canonical ideal generators and entries above each pivot are canonical
/// residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EchelonMatrix {
    matrix: Matrix,
    pivot_cols: Vec<usize>,
    reduced: bool,
}

impl EchelonMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    pub fn pivot(&self, i: usize) -> &Value {
        self.matrix.entry(i, self.pivot_cols[i])
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// Module length: the sum of the pivot ideal lengths.
    pub fn length(&self) -> u64 {
        let ring = self.matrix.ring();
        (0..self.rows())
            .map(|i| ring.ideal_length(self.pivot(i)))
            .sum()
    }
}

/// Row-echelon form, preserving the row module. Repeatedly: take the least
/// leading position, collapse all rows leading there with the 2x2 transform,
/// append the annihilator multiple of the pivot row (dropped when zero), and
/// continue on the remaining rows. Zero rows never appear in the output; the
/// row count may exceed the input's.
pub fn row_echelon(a: &Matrix) -> EchelonMatrix {
    let ring = a.ring().clone();
    let mut pending: Vec<Vec<Value>> = (0..a.rows())
        .filter(|&i| !a.is_zero_row(i))
        .map(|i| a.row(i).to_vec())
        .collect();
    let mut out_rows: Vec<Vec<Value>> = Vec::new();
    let mut pivot_cols: Vec<usize> = Vec::new();

    while !pending.is_empty() {
        let j = pending
            .iter()
            .filter_map(|r| leading_position(&ring, r))
            .min()
            .expect("pending rows are nonzero");
        let mut pivot_row: Option<Vec<Value>> = None;
        let mut rest: Vec<Vec<Value>> = Vec::new();
        for row in pending.drain(..) {
            if leading_position(&ring, &row) == Some(j) {
                match pivot_row.take() {
                    None => pivot_row = Some(row),
                    Some(p) => {
                        let s = ring.stab2(&p[j], &row[j]);
                        let new_p = combine_rows(&ring, &s.x, &p, &s.y, &row);
                        let new_q = combine_rows(&ring, &s.z, &p, &s.t, &row);
                        pivot_row = Some(new_p);
                        if !is_zero_vec(&ring, &new_q) {
                            rest.push(new_q);
                        }
                    }
                }
            } else {
                rest.push(row);
            }
        }
        let p = pivot_row.expect("a row led at column j");
        let ann = ring.annihilator(&p[j]);
        if !ring.is_zero(&ann) {
            let ann_row = scale_row(&ring, &ann, &p);
            if !is_zero_vec(&ring, &ann_row) {
                rest.push(ann_row);
            }
        }
        out_rows.push(p);
        pivot_cols.push(j);
        pending = rest;
    }

    let matrix = Matrix::from_rows(ring, a.cols(), out_rows).expect("rows stay rectangular");
    EchelonMatrix {
        matrix,
        pivot_cols,
        reduced: false,
    }
}

/// The unique reduced row-echelon form for the fixed canonical generators
/// and residue representatives.
pub fn rref(a: &Matrix) -> EchelonMatrix {
    let ech = row_echelon(a);
    let ring = ech.matrix.ring().clone();
    let pivot_cols = ech.pivot_cols.clone();
    let mut rows = ech.matrix.row_vecs();

    // scale each row so its pivot is the canonical ideal generator
    for (i, &j) in pivot_cols.iter().enumerate() {
        let u = ring.normalizing_unit(&rows[i][j]);
        if u != ring.one() {
            rows[i] = scale_row(&ring, &u, &rows[i]);
        }
    }

    // canonicalize entries above each pivot, top pivot first so that later
    // reductions never disturb earlier pivot columns
    for i in 0..rows.len() {
        let j = pivot_cols[i];
        let d = rows[i][j].clone();
        for s in 0..i {
            let cur = rows[s][j].clone();
            let rep = ring.canonical_residue(&cur, &d);
            if rep != cur {
                let delta = ring.sub(&cur, &rep);
                let q = ring.divide(&delta, &d).expect("delta lies in (d)");
                let sub = scale_row(&ring, &q, &rows[i]);
                rows[s] = rows[s]
                    .iter()
                    .zip(&sub)
                    .map(|(x, y)| ring.sub(x, y))
                    .collect();
            }
        }
    }

    let matrix = Matrix::from_rows(ring, ech.matrix.cols(), rows).expect("rows stay rectangular");
    EchelonMatrix {
        matrix,
        pivot_cols,
        reduced: true,
    }
}

/// Verdict of the row-echelon verification algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EchelonCheck {
    Yes,
    No(String),
}

impl EchelonCheck {
    pub fn is_yes(&self) -> bool {
        matches!(self, EchelonCheck::Yes)
    }
}

/// The YES/NO echelon test: strictly increasing leading positions, the last
/// row's pivot divides all its entries, and for every earlier row i the
/// annihilator multiple of row i lies in the span of the rows below it
/// (checked backwards, so the suffix is already verified echelon).
pub fn check_row_echelon(a: &Matrix) -> EchelonCheck {
    let ring = a.ring();
    let t = a.rows();
    for i in 0..t {
        if a.is_zero_row(i) {
            return EchelonCheck::No(format!("row {} is zero", i + 1));
        }
    }
    let leads: Vec<usize> = (0..t)
        .map(|i| leading_position(ring, a.row(i)).expect("nonzero row"))
        .collect();
    for i in 0..t.saturating_sub(1) {
        if leads[i + 1] <= leads[i] {
            return EchelonCheck::No(format!(
                "leading positions of rows {} and {} do not increase",
                i + 1,
                i + 2
            ));
        }
    }
    if t == 0 {
        return EchelonCheck::Yes;
    }
    let last = t - 1;
    let pivot = a.entry(last, leads[last]);
    for j in leads[last]..a.cols() {
        if !ring.divides(pivot, a.entry(last, j)) {
            return EchelonCheck::No(format!(
                "pivot of last row does not divide its entry in column {}",
                j + 1
            ));
        }
    }
    for i in (0..last).rev() {
        let ann = ring.annihilator(a.entry(i, leads[i]));
        let w = scale_row(ring, &ann, a.row(i));
        let suffix_rows: Vec<&[Value]> = (i + 1..t).map(|r| a.row(r)).collect();
        let suffix_leads = &leads[i + 1..];
        if member_in_rows(ring, &w, &suffix_rows, suffix_leads).is_none() {
            return EchelonCheck::No(format!(
                "annihilator multiple of row {} is not in the span of the rows below",
                i + 1
            ));
        }
    }
    EchelonCheck::Yes
}

/// Membership of `v` in the row module of an echelon basis. On success,
/// returns coefficients `r` with `sum r_i row_i = v` (reproducible, not
/// unique in general). Greedy: repeatedly divide the leading entry of the
/// residual by the pivot leading at the same column.
pub fn member(v: &[Value], e: &EchelonMatrix) -> Option<Vec<Value>> {
    let ring = e.matrix.ring();
    let rows: Vec<&[Value]> = (0..e.rows()).map(|i| e.matrix.row(i)).collect();
    member_in_rows(ring, v, &rows, &e.pivot_cols)
}

fn member_in_rows(
    ring: &Arc<Ring>,
    v: &[Value],
    rows: &[&[Value]],
    leads: &[usize],
) -> Option<Vec<Value>> {
    let mut v = v.to_vec();
    let mut coeffs = vec![ring.zero(); rows.len()];
    while let Some(j) = leading_position(ring, &v) {
        let i = leads.iter().position(|&l| l == j)?;
        let pivot = &rows[i][j];
        if !ring.divides(pivot, &v[j]) {
            return None;
        }
        let r = ring.divide(&v[j], pivot).expect("divisibility checked");
        for (x, y) in v.iter_mut().zip(rows[i]) {
            *x = ring.sub(x, &ring.mul(&r, y));
        }
        coeffs[i] = r;
    }
    Some(coeffs)
}

/// A random invertible matrix built as a product of elementary unimodular
/// operations: row swaps, unit row scalings, and 2x2 elimination transforms
/// on random element pairs.
pub fn random_invertible<R: Rng + ?Sized>(ring: &Arc<Ring>, n: usize, rng: &mut R) -> Matrix {
    let mut m = Matrix::identity(ring.clone(), n);
    if n == 0 {
        return m;
    }
    let ops = 3 * n * n + 4;
    for _ in 0..ops {
        match rng.gen_range(0..3u32) {
            0 if n >= 2 => {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n);
                if i == j {
                    j = (j + 1) % n;
                }
                for c in 0..n {
                    let vi = m.entry(i, c).clone();
                    let vj = m.entry(j, c).clone();
                    m.set(i, c, vj);
                    m.set(j, c, vi);
                }
            }
            1 => {
                let i = rng.gen_range(0..n);
                let u = ring.random_unit(rng);
                for c in 0..n {
                    let v = ring.mul(&u, m.entry(i, c));
                    m.set(i, c, v);
                }
            }
            _ if n >= 2 => {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n);
                if i == j {
                    j = (j + 1) % n;
                }
                let a = ring.random_element(rng);
                let b = ring.random_element(rng);
                let s = ring.stab2(&a, &b);
                for c in 0..n {
                    let vi = m.entry(i, c).clone();
                    let vj = m.entry(j, c).clone();
                    m.set(
                        i,
                        c,
                        ring.add(&ring.mul(&s.x, &vi), &ring.mul(&s.y, &vj)),
                    );
                    m.set(
                        j,
                        c,
                        ring.add(&ring.mul(&s.z, &vi), &ring.mul(&s.t, &vj)),
                    );
                }
            }
            _ => {}
        }
    }
    m
}
