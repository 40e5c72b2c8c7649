//! Dense matrices over a [`Field`] and the exact Gaussian-elimination
//! routines built on them.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Range;

use itertools::Itertools;
use rand::Rng;
use thiserror::Error;

use crate::galois::Field;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrices are over different fields")]
    FieldMismatch,
    #[error("matrix is {0}x{1}, not square")]
    NotSquare(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("entry {value} is not an element of a field of order {order}")]
    OutOfRange { value: u32, order: usize },
    #[error("rows have differing lengths")]
    Ragged,
    #[error("enumeration of {rows}x{cols} matrices is too large to index")]
    EnumerationTooLarge { rows: usize, cols: usize },
}

/// Row-major matrix over a finite field. Zero-row matrices are allowed
/// (an empty nullspace basis is one).
#[derive(Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Hash for FieldMatrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} over {} [", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", self.row(r).iter().join(" "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            writeln!(f, "{}", self.row(r).iter().join(" "))?;
        }
        Ok(())
    }
}

impl FieldMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(
        field: &Field,
        rows: usize,
        cols: usize,
        data: Vec<u8>,
    ) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Ragged);
        }
        if let Some(&bad) = data.iter().find(|&&v| !field.contains(v as u32)) {
            return Err(LinalgError::OutOfRange {
                value: bad as u32,
                order: field.order(),
            });
        }
        Ok(FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from rows of canonical integers. An empty slice is
    /// rejected because the column count would be unknown.
    pub fn from_rows<R: AsRef<[u32]>>(field: &Field, rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or(LinalgError::Ragged)?;
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(LinalgError::Ragged);
            }
            for &v in row {
                if !field.contains(v) {
                    return Err(LinalgError::OutOfRange {
                        value: v,
                        order: field.order(),
                    });
                }
                data.push(v as u8);
            }
        }
        Ok(FieldMatrix {
            field: field.clone(),
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Like [`from_rows`](Self::from_rows) but reduces signed integers into
    /// the prime subfield, so `-1` may be written directly.
    pub fn from_signed_rows<R: AsRef<[i64]>>(
        field: &Field,
        rows: &[R],
    ) -> Result<Self, LinalgError> {
        let reduced: Vec<Vec<u32>> = rows
            .iter()
            .map(|r| {
                r.as_ref()
                    .iter()
                    .map(|&v| field.from_i64(v) as u32)
                    .collect()
            })
            .collect();
        Self::from_rows(field, &reduced)
    }

    pub fn row_vector(field: &Field, entries: &[u8]) -> Result<Self, LinalgError> {
        Self::from_vec(field, 1, entries.len(), entries.to_vec())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u8) -> Result<(), LinalgError> {
        if !self.field.contains(v as u32) {
            return Err(LinalgError::OutOfRange {
                value: v as u32,
                order: self.field.order(),
            });
        }
        self.data[r * self.cols + c] = v;
        Ok(())
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_matrix(&self, r: usize) -> FieldMatrix {
        FieldMatrix {
            field: self.field.clone(),
            rows: 1,
            cols: self.cols,
            data: self.row(r).to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..self.cols).all(|c| self.get(r, c) == u8::from(r == c)))
    }

    fn check_field(&self, other: &FieldMatrix) -> Result<(), LinalgError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(LinalgError::FieldMismatch)
        }
    }

    pub fn matmul(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &FieldMatrix) -> FieldMatrix {
        let f = &self.field;
        let mut out = FieldMatrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = f.add(*d, f.mul(a, b));
                }
            }
        }
        out
    }

    /// Row vector `coeffs` times this matrix.
    pub(crate) fn combine_rows(&self, coeffs: &[u8]) -> Vec<u8> {
        let f = &self.field;
        let mut out = vec![0u8; self.cols];
        for (r, &a) in coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (d, &b) in out.iter_mut().zip(self.row(r)) {
                *d = f.add(*d, f.mul(a, b));
            }
        }
        out
    }

    pub fn add(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.field.add(a, b))
            .collect();
        Ok(FieldMatrix {
            data,
            ..self.clone()
        })
    }

    pub fn scale(&self, s: u8) -> FieldMatrix {
        let data = self.data.iter().map(|&a| self.field.mul(a, s)).collect();
        FieldMatrix {
            data,
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    /// Stacks matrices vertically. All parts must share field and width.
    pub fn vstack(parts: &[&FieldMatrix]) -> Result<FieldMatrix, LinalgError> {
        let first = parts.first().ok_or(LinalgError::Ragged)?;
        let mut data = Vec::new();
        let mut rows = 0;
        for part in parts {
            first.check_field(part)?;
            if part.cols != first.cols {
                return Err(LinalgError::DimensionMismatch {
                    op: "vstack",
                    left: first.shape(),
                    right: part.shape(),
                });
            }
            data.extend_from_slice(&part.data);
            rows += part.rows;
        }
        Ok(FieldMatrix {
            field: first.field.clone(),
            rows,
            cols: first.cols,
            data,
        })
    }

    pub fn select_rows(&self, indices: &[usize]) -> FieldMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FieldMatrix {
            field: self.field.clone(),
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn pow(&self, mut e: u64) -> Result<FieldMatrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let mut acc = FieldMatrix::identity(&self.field, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Determinant by Gaussian elimination, first nonzero entry as pivot.
    pub fn det(&self) -> Result<u8, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let f = &self.field;
        let n = self.rows;
        let mut m = self.data.clone();
        let mut det = 1u8;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| m[r * n + col] != 0) else {
                return Ok(0);
            };
            if piv != col {
                for c in 0..n {
                    m.swap(piv * n + c, col * n + c);
                }
                det = f.neg(det);
            }
            let pv = m[col * n + col];
            det = f.mul(det, pv);
            let pinv = f.inv_nonzero(pv);
            for r in col + 1..n {
                let factor = f.mul(m[r * n + col], pinv);
                if factor == 0 {
                    continue;
                }
                for c in col..n {
                    let t = f.mul(factor, m[col * n + c]);
                    m[r * n + c] = f.sub(m[r * n + c], t);
                }
            }
        }
        Ok(det)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.reduce_in_place(self.cols).len()
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (FieldMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.reduce_in_place(self.cols);
        (m, pivots)
    }

    /// RREF with zero rows dropped.
    pub fn row_basis(&self) -> FieldMatrix {
        let (m, pivots) = self.rref();
        let keep: Vec<usize> = (0..pivots.len()).collect();
        m.select_rows(&keep)
    }

    /// Full reduction, searching pivots only in the first `pivot_cols`
    /// columns. Returns the pivot columns in order.
    fn reduce_in_place(&mut self, pivot_cols: usize) -> Vec<usize> {
        let f = self.field.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..pivot_cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| self.data[i * cols + col] != 0) else {
                continue;
            };
            if piv != r {
                for c in 0..cols {
                    self.data.swap(piv * cols + c, r * cols + c);
                }
            }
            let pinv = f.inv_nonzero(self.data[r * cols + col]);
            for c in 0..cols {
                self.data[r * cols + c] = f.mul(self.data[r * cols + c], pinv);
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let factor = self.data[i * cols + col];
                if factor == 0 {
                    continue;
                }
                for c in 0..cols {
                    let t = f.mul(factor, self.data[r * cols + c]);
                    self.data[i * cols + c] = f.sub(self.data[i * cols + c], t);
                }
            }
            pivots.push(col);
            r += 1;
        }
        pivots
    }

    pub fn invert(&self) -> Result<FieldMatrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut aug = FieldMatrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            aug.data[r * 2 * n..r * 2 * n + n].copy_from_slice(self.row(r));
            aug.data[r * 2 * n + n + r] = 1;
        }
        if aug.reduce_in_place(n).len() < n {
            return Err(LinalgError::Singular);
        }
        let mut out = FieldMatrix::zeros(&self.field, n, n);
        for r in 0..n {
            out.data[r * n..(r + 1) * n].copy_from_slice(&aug.data[r * 2 * n + n..(r + 1) * 2 * n]);
        }
        Ok(out)
    }

    /// Basis (as rows) of the right nullspace `{v : self * v^T = 0}`,
    /// one vector per free column in ascending order.
    pub fn nullspace(&self) -> FieldMatrix {
        let f = &self.field;
        let (reduced, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = FieldMatrix::zeros(f, free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            out.data[i * self.cols + fc] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                out.data[i * self.cols + pc] = f.neg(reduced.get(r, fc));
            }
        }
        out
    }

    /// True when every row of `other` lies in the row space of `self`.
    pub fn row_space_contains(&self, other: &FieldMatrix) -> bool {
        matches!(solve_left(other, self), Ok(Some(_)))
    }

    pub fn random<R: Rng + ?Sized>(field: &Field, rows: usize, cols: usize, rng: &mut R) -> Self {
        let q = field.order();
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(0..q) as u8)
            .collect();
        FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            data,
        }
    }

    /// Uniform among matrices of full row rank (rejection sampling).
    pub fn random_full_rank<R: Rng + ?Sized>(
        field: &Field,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Self {
        assert!(rows <= cols, "full row rank needs rows <= cols");
        loop {
            let m = Self::random(field, rows, cols, rng);
            if m.rank() == rows {
                return m;
            }
        }
    }
}

/// Finds `C` with `C * generators = target`, or `None` when some target row
/// is outside the row span of `generators`. Free coordinates of each
/// solution row are set to zero.
pub fn solve_left(
    target: &FieldMatrix,
    generators: &FieldMatrix,
) -> Result<Option<FieldMatrix>, LinalgError> {
    target.check_field(generators)?;
    if target.cols != generators.cols {
        return Err(LinalgError::DimensionMismatch {
            op: "solve_left",
            left: target.shape(),
            right: generators.shape(),
        });
    }
    let f = &target.field;
    let g = generators.rows;
    let t = target.rows;
    let n = target.cols;
    // Solve G^T x = t^T for every target row at once: [G^T | T^T].
    let mut aug = FieldMatrix::zeros(f, n, g + t);
    for r in 0..n {
        for c in 0..g {
            aug.data[r * (g + t) + c] = generators.get(c, r);
        }
        for c in 0..t {
            aug.data[r * (g + t) + g + c] = target.get(c, r);
        }
    }
    let pivots = aug.reduce_in_place(g);
    for r in pivots.len()..n {
        if aug.data[r * (g + t) + g..(r + 1) * (g + t)]
            .iter()
            .any(|&v| v != 0)
        {
            return Ok(None);
        }
    }
    let mut c = FieldMatrix::zeros(f, t, g);
    for (r, &pc) in pivots.iter().enumerate() {
        for i in 0..t {
            c.data[i * g + pc] = aug.data[r * (g + t) + g + i];
        }
    }
    Ok(Some(c))
}

/// All nonzero vectors in the span of `basis`, one per scalar class
/// (normalized so the leading coefficient over the basis is 1).
pub fn projective_points(basis: &FieldMatrix) -> Vec<Vec<u8>> {
    if basis.rows == 0 {
        return Vec::new();
    }
    let coeffs = RrefEnumeration::new(&basis.field, 1, basis.rows).expect("projective enumeration");
    coeffs
        .iter()
        .map(|c| basis.combine_rows(c.row(0)))
        .collect()
}

#[derive(Debug, Clone)]
struct PivotBlock {
    pivots: Vec<usize>,
    /// Free positions in row-major order; the last one is the fastest digit.
    free: Vec<(usize, usize)>,
    start: u64,
    count: u64,
}

/// Every full-row-rank RREF matrix of a fixed shape, each exactly once.
///
/// Order: pivot-column sets lexicographically, then the free entries as a
/// row-major odometer (last free entry varies fastest). Indexable, so the
/// range `0..len()` can be split for sharded or resumed searches.
#[derive(Debug, Clone)]
pub struct RrefEnumeration {
    field: Field,
    rows: usize,
    cols: usize,
    blocks: Vec<PivotBlock>,
    total: u64,
}

impl RrefEnumeration {
    pub fn new(field: &Field, rows: usize, cols: usize) -> Result<Self, LinalgError> {
        if rows > cols {
            return Err(LinalgError::DimensionMismatch {
                op: "enumerate_rref",
                left: (rows, cols),
                right: (rows, cols),
            });
        }
        let q = field.order() as u64;
        let too_large = LinalgError::EnumerationTooLarge { rows, cols };
        let mut blocks = Vec::new();
        let mut total = 0u64;
        for pivots in (0..cols).combinations(rows) {
            let free: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(r, &p)| {
                    let pivots = &pivots;
                    (p + 1..cols)
                        .filter(move |c| !pivots.contains(c))
                        .map(move |c| (r, c))
                })
                .collect();
            let count = q.checked_pow(free.len() as u32).ok_or(too_large.clone())?;
            blocks.push(PivotBlock {
                pivots,
                free,
                start: total,
                count,
            });
            total = total.checked_add(count).ok_or(too_large.clone())?;
        }
        Ok(RrefEnumeration {
            field: field.clone(),
            rows,
            cols,
            blocks,
            total,
        })
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn locate(&self, index: u64) -> Option<(usize, Vec<u8>)> {
        if index >= self.total {
            return None;
        }
        let b = self
            .blocks
            .partition_point(|blk| blk.start + blk.count <= index);
        let block = &self.blocks[b];
        let q = self.field.order() as u64;
        let mut offset = index - block.start;
        let mut digits = vec![0u8; block.free.len()];
        for d in digits.iter_mut().rev() {
            *d = (offset % q) as u8;
            offset /= q;
        }
        Some((b, digits))
    }

    fn build(&self, block: usize, digits: &[u8]) -> FieldMatrix {
        let block = &self.blocks[block];
        let mut m = FieldMatrix::zeros(&self.field, self.rows, self.cols);
        for (r, &p) in block.pivots.iter().enumerate() {
            m.data[r * self.cols + p] = 1;
        }
        for (&(r, c), &d) in block.free.iter().zip(digits) {
            m.data[r * self.cols + c] = d;
        }
        m
    }

    pub fn get(&self, index: u64) -> Option<FieldMatrix> {
        self.locate(index).map(|(b, digits)| self.build(b, &digits))
    }

    pub fn iter(&self) -> RrefIter<'_> {
        self.range(0..self.total)
    }

    pub fn range(&self, range: Range<u64>) -> RrefIter<'_> {
        let end = range.end.min(self.total);
        let start = range.start.min(end);
        let state = self.locate(start);
        RrefIter {
            enumeration: self,
            state,
            remaining: end - start,
        }
    }

    /// Uniformly random element, drawn by index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<FieldMatrix> {
        if self.total == 0 {
            return None;
        }
        self.get(rng.gen_range(0..self.total))
    }
}

pub struct RrefIter<'a> {
    enumeration: &'a RrefEnumeration,
    state: Option<(usize, Vec<u8>)>,
    remaining: u64,
}

impl Iterator for RrefIter<'_> {
    type Item = FieldMatrix;

    fn next(&mut self) -> Option<FieldMatrix> {
        if self.remaining == 0 {
            return None;
        }
        let (block, digits) = self.state.as_mut()?;
        let out = self.enumeration.build(*block, digits);
        self.remaining -= 1;

        let q = self.enumeration.field.order() as u16;
        let mut carried = true;
        for d in digits.iter_mut().rev() {
            let next = *d as u16 + 1;
            if next < q {
                *d = next as u8;
                carried = false;
                break;
            }
            *d = 0;
        }
        if carried {
            *block += 1;
            if *block < self.enumeration.blocks.len() {
                *digits = vec![0u8; self.enumeration.blocks[*block].free.len()];
            } else {
                self.state = None;
            }
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}
