//! Regenerating-code data model: parameters, explicit codes, rotationally
//! symmetric seeds, bandwidth formulas and code transformations.
//!
//! Nodes are numbered `1..=n` throughout the public API. A symmetric seed
//! with base `A` and rotation `R` stores `A * R^(i-1)` at node `i`, so the
//! base is node 1's storage matrix, and node `i` sends `B_{(i-j) mod n}`
//! when node `j` is being rebuilt.

use std::collections::BTreeMap;

use num_rational::Rational64;
use thiserror::Error;

use crate::galois::Field;
use crate::linalg::{FieldMatrix, LinalgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("no period-{n} permutation rotation fits in dimension {dim}")]
    NoValidRotation { n: usize, dim: usize },
    #[error("{what} has shape {got:?}, expected {expected:?}")]
    Shape {
        what: String,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("{0} is over a different field")]
    FieldMismatch(String),
    #[error("transmission vector {0} is zero")]
    ZeroTransmission(String),
    #[error("missing transmission vector B{0}_{1}")]
    MissingTransmission(usize, usize),
    #[error("rotation does not have exact period {0}")]
    BadRotationPeriod(usize),
    #[error("transform matrix is singular")]
    Singular,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `(n, k)` with `d = n - 1` helpers and `alpha = n - k` packets per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParameters {
    n: usize,
    k: usize,
}

impl CodeParameters {
    pub fn new(n: usize, k: usize) -> Result<Self, ModelError> {
        if k < 2 || k >= n {
            return Err(ModelError::InvalidParameters(format!(
                "need 2 <= k < n, got n={n} k={k}"
            )));
        }
        Ok(CodeParameters { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Helpers contacted during repair.
    pub fn d(&self) -> usize {
        self.n - 1
    }

    /// Packets stored per node.
    pub fn alpha(&self) -> usize {
        self.n - self.k
    }

    /// Source packets, the width of every storage matrix.
    pub fn total_cols(&self) -> usize {
        self.k * (self.n - self.k)
    }

    /// Rows of the unrecovered-coefficient basis `Y_j`.
    pub fn unrecovered_dim(&self) -> usize {
        (self.k - 1) * (self.n - self.k - 1)
    }

    /// Lower bound on each helper's choice of transmission vectors,
    /// `(n-k) - (k-1)(n-k-1)`. May be zero or negative.
    pub fn nullity_bound(&self) -> i64 {
        self.alpha() as i64 - self.unrecovered_dim() as i64
    }
}

/// Repair bandwidth figures for a file of size `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateParameters {
    pub file_size: Rational64,
    pub n: usize,
    pub k: usize,
    pub gamma_naive: Rational64,
    pub gamma_msr: Rational64,
    pub gamma_ia: Rational64,
    pub subpacket_size: Rational64,
}

impl RateParameters {
    pub fn matches_cut_set(&self) -> bool {
        self.gamma_msr == self.gamma_ia
    }
}

/// Cut-set bound `(M/k)(n-1)/(n-k)` and the interference-alignment rate
/// `(M/k)((k-1)(n-k)+1)/(n-k)`, exactly.
pub fn rates(n: usize, k: usize, file_size: Rational64) -> Result<RateParameters, ModelError> {
    let params = CodeParameters::new(n, k)?;
    if file_size <= Rational64::from_integer(0) {
        return Err(ModelError::InvalidParameters(
            "file size must be positive".into(),
        ));
    }
    let (n, k) = (params.n as i64, params.k as i64);
    let per_node = file_size / k;
    Ok(RateParameters {
        file_size,
        n: params.n,
        k: params.k,
        gamma_naive: file_size,
        gamma_msr: per_node * Rational64::new(n - 1, n - k),
        gamma_ia: per_node * Rational64::new((k - 1) * (n - k) + 1, n - k),
        subpacket_size: file_size / (k * (n - k)),
    })
}

/// The canonical rotation: an n-cycle on the first `n` coordinates
/// (`v * R` shifts coordinate `c` to `c + 1`) and the identity elsewhere.
pub fn rotation_matrix(params: &CodeParameters, field: &Field) -> Result<FieldMatrix, ModelError> {
    let (n, dim) = (params.n, params.total_cols());
    if dim < n {
        return Err(ModelError::NoValidRotation { n, dim });
    }
    let mut r = FieldMatrix::zeros(field, dim, dim);
    for i in 0..dim {
        let target = if i < n { (i + 1) % n } else { i };
        r.set(i, target, 1)?;
    }
    Ok(r)
}

/// Cycle lengths of a permutation matrix, or `None` for anything else.
pub fn permutation_cycles(r: &FieldMatrix) -> Option<Vec<usize>> {
    if !r.is_square() {
        return None;
    }
    let dim = r.rows();
    let mut image = vec![0usize; dim];
    for (i, slot) in image.iter_mut().enumerate() {
        let ones: Vec<usize> = (0..dim).filter(|&c| r.get(i, c) != 0).collect();
        if ones.len() != 1 || r.get(i, ones[0]) != 1 {
            return None;
        }
        *slot = ones[0];
    }
    let mut sorted = image.clone();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &v)| i != v) {
        return None;
    }
    let mut seen = vec![false; dim];
    let mut cycles = Vec::new();
    for start in 0..dim {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = image[i];
            len += 1;
        }
        if len > 0 {
            cycles.push(len);
        }
    }
    Some(cycles)
}

/// Fully explicit code: every storage matrix and every transmission vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegeneratingCode {
    params: CodeParameters,
    field: Field,
    storage: Vec<FieldMatrix>,
    transmissions: BTreeMap<(usize, usize), FieldMatrix>,
}

fn check_shape(
    m: &FieldMatrix,
    field: &Field,
    what: impl Fn() -> String,
    expected: (usize, usize),
) -> Result<(), ModelError> {
    if m.field() != field {
        return Err(ModelError::FieldMismatch(what()));
    }
    if m.shape() != expected {
        return Err(ModelError::Shape {
            what: what(),
            got: m.shape(),
            expected,
        });
    }
    Ok(())
}

impl RegeneratingCode {
    /// `storage[i-1]` is node `i`'s matrix; `transmissions[(i, j)]` is what
    /// node `i` sends to rebuild node `j`.
    pub fn new(
        params: CodeParameters,
        field: Field,
        storage: Vec<FieldMatrix>,
        transmissions: BTreeMap<(usize, usize), FieldMatrix>,
    ) -> Result<Self, ModelError> {
        let (n, alpha, cols) = (params.n, params.alpha(), params.total_cols());
        if storage.len() != n {
            return Err(ModelError::InvalidParameters(format!(
                "expected {n} storage matrices, got {}",
                storage.len()
            )));
        }
        for (idx, a) in storage.iter().enumerate() {
            check_shape(a, &field, || format!("A{}", idx + 1), (alpha, cols))?;
        }
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                let b = transmissions
                    .get(&(i, j))
                    .ok_or(ModelError::MissingTransmission(i, j))?;
                check_shape(b, &field, || format!("B{i}_{j}"), (1, alpha))?;
                if b.is_zero() {
                    return Err(ModelError::ZeroTransmission(format!("B{i}_{j}")));
                }
            }
        }
        if transmissions.len() != n * (n - 1) {
            return Err(ModelError::InvalidParameters(
                "transmissions must be indexed by distinct node pairs in 1..=n".into(),
            ));
        }
        Ok(RegeneratingCode {
            params,
            field,
            storage,
            transmissions,
        })
    }

    pub fn params(&self) -> &CodeParameters {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Storage matrix of node `i` (1-based).
    pub fn storage(&self, i: usize) -> &FieldMatrix {
        &self.storage[i - 1]
    }

    pub fn storage_matrices(&self) -> &[FieldMatrix] {
        &self.storage
    }

    /// Vector node `i` sends when node `j` is rebuilt.
    pub fn transmission(&self, i: usize, j: usize) -> &FieldMatrix {
        &self.transmissions[&(i, j)]
    }

    pub fn transmissions(&self) -> &BTreeMap<(usize, usize), FieldMatrix> {
        &self.transmissions
    }

    /// Rows `B_{i,j} A_i` for every helper `i != j`, ascending `i`.
    pub fn transmitted_stack(&self, j: usize) -> FieldMatrix {
        let rows: Vec<FieldMatrix> = (1..=self.params.n)
            .filter(|&i| i != j)
            .map(|i| self.transmission(i, j).mul_unchecked(self.storage(i)))
            .collect();
        let refs: Vec<&FieldMatrix> = rows.iter().collect();
        FieldMatrix::vstack(&refs).expect("uniform widths")
    }

    /// Stack of the first `k` storage matrices.
    pub fn systematic_stack(&self) -> FieldMatrix {
        let refs: Vec<&FieldMatrix> = self.storage[..self.params.k].iter().collect();
        FieldMatrix::vstack(&refs).expect("uniform widths")
    }

    /// `T A_i` and `B_{i,j} T^-1` for an invertible `alpha x alpha` matrix.
    pub fn row_transform(&self, t: &FieldMatrix) -> Result<Self, ModelError> {
        let alpha = self.params.alpha();
        check_shape(t, &self.field, || "T".into(), (alpha, alpha))?;
        let t_inv = t.invert().map_err(|_| ModelError::Singular)?;
        Ok(RegeneratingCode {
            params: self.params,
            field: self.field.clone(),
            storage: self.storage.iter().map(|a| t.mul_unchecked(a)).collect(),
            transmissions: self
                .transmissions
                .iter()
                .map(|(&key, b)| (key, b.mul_unchecked(&t_inv)))
                .collect(),
        })
    }

    /// `A_i T` for an invertible `k(n-k)` square matrix; transmissions kept.
    pub fn column_transform(&self, t: &FieldMatrix) -> Result<Self, ModelError> {
        let dim = self.params.total_cols();
        check_shape(t, &self.field, || "T".into(), (dim, dim))?;
        if t.det()? == 0 {
            return Err(ModelError::Singular);
        }
        Ok(RegeneratingCode {
            storage: self.storage.iter().map(|a| a.mul_unchecked(t)).collect(),
            ..self.clone()
        })
    }

    /// Column transform by the inverse of the first `k` storage matrices,
    /// returning the systematic code and the transform used.
    pub fn to_systematic(&self) -> Result<(Self, FieldMatrix), ModelError> {
        let t = self
            .systematic_stack()
            .invert()
            .map_err(|_| ModelError::Singular)?;
        Ok((self.column_transform(&t)?, t))
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic_stack().is_identity()
    }
}

/// Compact rotationally symmetric code: base `A`, rotation `R` of exact
/// period `n`, and `B_1..B_{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricSeed {
    params: CodeParameters,
    field: Field,
    base: FieldMatrix,
    rotation: FieldMatrix,
    b_vectors: Vec<FieldMatrix>,
}

/// Checks `R^n = I` and `R^t != I` for `0 < t < n`.
pub fn has_exact_period(r: &FieldMatrix, n: usize) -> bool {
    if !r.is_square() {
        return false;
    }
    let mut acc = FieldMatrix::identity(r.field(), r.rows());
    for t in 1..=n {
        acc = acc.mul_unchecked(r);
        if acc.is_identity() != (t == n) {
            return false;
        }
    }
    true
}

/// `A, A R, A R^2, ..., A R^(n-1)`: storage of nodes `1..=n`.
pub fn rotation_orbit(base: &FieldMatrix, rotation: &FieldMatrix, n: usize) -> Vec<FieldMatrix> {
    let mut orbit = Vec::with_capacity(n);
    orbit.push(base.clone());
    for _ in 1..n {
        let next = orbit.last().unwrap().mul_unchecked(rotation);
        orbit.push(next);
    }
    orbit
}

impl SymmetricSeed {
    pub fn new(
        params: CodeParameters,
        field: Field,
        base: FieldMatrix,
        rotation: FieldMatrix,
        b_vectors: Vec<FieldMatrix>,
    ) -> Result<Self, ModelError> {
        let (n, alpha, dim) = (params.n, params.alpha(), params.total_cols());
        check_shape(&base, &field, || "A".into(), (alpha, dim))?;
        check_shape(&rotation, &field, || "R".into(), (dim, dim))?;
        if !has_exact_period(&rotation, n) {
            return Err(ModelError::BadRotationPeriod(n));
        }
        if b_vectors.len() != n - 1 {
            return Err(ModelError::InvalidParameters(format!(
                "expected {} transmission vectors, got {}",
                n - 1,
                b_vectors.len()
            )));
        }
        for (idx, b) in b_vectors.iter().enumerate() {
            check_shape(b, &field, || format!("B{}", idx + 1), (1, alpha))?;
            if b.is_zero() {
                return Err(ModelError::ZeroTransmission(format!("B{}", idx + 1)));
            }
        }
        Ok(SymmetricSeed {
            params,
            field,
            base,
            rotation,
            b_vectors,
        })
    }

    /// Seed using the canonical rotation for these parameters.
    pub fn with_canonical_rotation(
        params: CodeParameters,
        field: Field,
        base: FieldMatrix,
        b_vectors: Vec<FieldMatrix>,
    ) -> Result<Self, ModelError> {
        let rotation = rotation_matrix(&params, &field)?;
        Self::new(params, field, base, rotation, b_vectors)
    }

    pub fn params(&self) -> &CodeParameters {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn base(&self) -> &FieldMatrix {
        &self.base
    }

    pub fn rotation(&self) -> &FieldMatrix {
        &self.rotation
    }

    /// `B_t` for `t` in `1..n`.
    pub fn b_vector(&self, t: usize) -> &FieldMatrix {
        &self.b_vectors[t - 1]
    }

    pub fn b_vectors(&self) -> &[FieldMatrix] {
        &self.b_vectors
    }

    pub fn orbit(&self) -> Vec<FieldMatrix> {
        rotation_orbit(&self.base, &self.rotation, self.params.n)
    }

    pub fn expand(&self) -> RegeneratingCode {
        let n = self.params.n;
        let mut transmissions = BTreeMap::new();
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                let t = (i + n - j) % n;
                transmissions.insert((i, j), self.b_vectors[t - 1].clone());
            }
        }
        RegeneratingCode {
            params: self.params,
            field: self.field.clone(),
            storage: self.orbit(),
            transmissions,
        }
    }

    /// `T A` and `B_t T^-1`; the rotation is unchanged.
    pub fn row_transform(&self, t: &FieldMatrix) -> Result<Self, ModelError> {
        let alpha = self.params.alpha();
        check_shape(t, &self.field, || "T".into(), (alpha, alpha))?;
        let t_inv = t.invert().map_err(|_| ModelError::Singular)?;
        Ok(SymmetricSeed {
            base: t.mul_unchecked(&self.base),
            b_vectors: self
                .b_vectors
                .iter()
                .map(|b| b.mul_unchecked(&t_inv))
                .collect(),
            ..self.clone()
        })
    }

    /// `A T` with rotation `T^-1 R T`.
    pub fn column_transform(&self, t: &FieldMatrix) -> Result<Self, ModelError> {
        let dim = self.params.total_cols();
        check_shape(t, &self.field, || "T".into(), (dim, dim))?;
        let t_inv = t.invert().map_err(|_| ModelError::Singular)?;
        Ok(SymmetricSeed {
            base: self.base.mul_unchecked(t),
            rotation: t_inv.mul_unchecked(&self.rotation).mul_unchecked(t),
            ..self.clone()
        })
    }

    /// Systematic form of the seed together with the column transform.
    pub fn to_systematic(&self) -> Result<(Self, FieldMatrix), ModelError> {
        let orbit = self.orbit();
        let refs: Vec<&FieldMatrix> = orbit[..self.params.k].iter().collect();
        let t = FieldMatrix::vstack(&refs)?
            .invert()
            .map_err(|_| ModelError::Singular)?;
        Ok((self.column_transform(&t)?, t))
    }
}
