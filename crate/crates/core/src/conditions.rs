//! Independence (MDS) and exact-recovery checks, plus the
//! unrecovered-coefficient subspaces used to derive transmission vectors.
//!
//! Transmission vectors are characterised by `B A_i Y^T = 0`, where the rows
//! of `Y` span the coefficients a repair does not recover. No projection
//! matrices are formed: `X X^T` can be singular over a finite field.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use itertools::Itertools;
use rand::Rng;
use thiserror::Error;

use crate::linalg::{solve_left, FieldMatrix, LinalgError, RrefEnumeration};
use crate::model::{CodeParameters, RegeneratingCode, SymmetricSeed};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error("storage matrix does not have full row rank")]
    RankDeficient,
    #[error("{0}")]
    NotAnnihilating(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceVerdict {
    pub independent: bool,
    /// First singular k-subset (1-based nodes) in lexicographic order.
    pub failing_subset: Option<Vec<usize>>,
    pub determinants_checked: usize,
}

fn subsets_independent<I>(storage: &[FieldMatrix], subsets: I) -> IndependenceVerdict
where
    I: Iterator<Item = Vec<usize>>,
{
    let mut checked = 0;
    for subset in subsets {
        checked += 1;
        let parts: Vec<&FieldMatrix> = subset.iter().map(|&i| &storage[i - 1]).collect();
        let stack = FieldMatrix::vstack(&parts).expect("uniform widths");
        if stack.det().expect("square stack") == 0 {
            return IndependenceVerdict {
                independent: false,
                failing_subset: Some(subset),
                determinants_checked: checked,
            };
        }
    }
    IndependenceVerdict {
        independent: true,
        failing_subset: None,
        determinants_checked: checked,
    }
}

/// Every k-subset of storage matrices must stack to a nonsingular matrix.
pub fn check_independence(code: &RegeneratingCode) -> IndependenceVerdict {
    let p = code.params();
    subsets_independent(code.storage_matrices(), (1..=p.n()).combinations(p.k()))
}

/// Independence for storage `A R^(i-1)`: only subsets containing node 1
/// need checking, since any other subset is a rotation of one of those.
pub fn orbit_independence(orbit: &[FieldMatrix], k: usize) -> IndependenceVerdict {
    let n = orbit.len();
    let subsets = (2..=n).combinations(k - 1).map(|rest| {
        let mut s = Vec::with_capacity(k);
        s.push(1);
        s.extend(rest);
        s
    });
    subsets_independent(orbit, subsets)
}

pub fn check_independence_symmetric(seed: &SymmetricSeed) -> IndependenceVerdict {
    orbit_independence(&seed.orbit(), seed.params().k())
}

/// Rebuild matrix `C_j` with `C_j * stack = A_j`, where the stack holds
/// `B_{i,j} A_i` for all helpers in ascending order.
pub fn check_recovery(code: &RegeneratingCode, j: usize) -> Option<FieldMatrix> {
    let stack = code.transmitted_stack(j);
    solve_left(code.storage(j), &stack).expect("shapes checked at construction")
}

/// Stack of `B_t A R^t` for `t = 1..n-1`.
pub fn symmetric_stack(orbit: &[FieldMatrix], b_rows: &[&[u8]]) -> FieldMatrix {
    let cols = orbit[0].cols();
    let field = orbit[0].field();
    let mut data = Vec::with_capacity(b_rows.len() * cols);
    for (t, b) in b_rows.iter().enumerate() {
        data.extend(orbit[t + 1].combine_rows(b));
    }
    FieldMatrix::from_vec(field, b_rows.len(), cols, data).expect("field entries")
}

/// The single recovery condition of a symmetric code:
/// `A = C * stack(B_t A R^t)`.
pub fn check_recovery_symmetric(seed: &SymmetricSeed) -> Option<FieldMatrix> {
    let orbit = seed.orbit();
    let rows: Vec<&[u8]> = seed.b_vectors().iter().map(|b| b.row(0)).collect();
    let stack = symmetric_stack(&orbit, &rows);
    solve_left(seed.base(), &stack).expect("uniform widths")
}

/// Left-nullspace bases of `A_i Y^T` for every helper `i != j`, ascending.
/// Entries may have zero rows.
pub fn helper_nullspaces(storage: &[FieldMatrix], y: &FieldMatrix, j: usize) -> Vec<FieldMatrix> {
    (1..=storage.len())
        .filter(|&i| i != j)
        .map(|i| {
            // b (A_i Y^T) = 0  <=>  (Y A_i^T) b^T = 0
            y.mul_unchecked(&storage[i - 1].transpose()).nullspace()
        })
        .collect()
}

/// Candidate transmission vectors per helper (a basis of the allowed
/// space), or `None` when some helper has no admissible vector.
pub fn derive_b_vectors(
    storage: &[FieldMatrix],
    y: &FieldMatrix,
    j: usize,
) -> Option<Vec<FieldMatrix>> {
    let spaces = helper_nullspaces(storage, y, j);
    if spaces.iter().any(|s| s.rows() == 0) {
        None
    } else {
        Some(spaces)
    }
}

/// Recovered coefficients `X_j = [Z_j; A_j]` and their complement `Y_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoverySubspace {
    pub node: usize,
    pub extra_rows: FieldMatrix,
    pub full_stack: FieldMatrix,
    pub complement: FieldMatrix,
}

impl RecoverySubspace {
    /// From a basis `Y` annihilating `A_j`: `X_j` is everything orthogonal
    /// to `Y`, and `Z_j` extends `A_j`'s rows to a basis of it.
    pub fn from_complement(
        node: usize,
        storage_j: &FieldMatrix,
        y: &FieldMatrix,
    ) -> Result<Self, ConditionError> {
        if storage_j.rank() != storage_j.rows() {
            return Err(ConditionError::RankDeficient);
        }
        if !storage_j.matmul(&y.transpose())?.is_zero() {
            return Err(ConditionError::NotAnnihilating("A_j Y^T must vanish"));
        }
        let recovered = y.nullspace();
        let mut extra: Vec<u8> = Vec::new();
        let mut basis = storage_j.clone();
        for r in 0..recovered.rows() {
            let candidate = recovered.row_matrix(r);
            let grown = FieldMatrix::vstack(&[&basis, &candidate])?;
            if grown.rank() > basis.rank() {
                extra.extend_from_slice(candidate.row(0));
                basis = grown;
            }
        }
        let cols = storage_j.cols();
        let extra_rows = FieldMatrix::from_vec(storage_j.field(), extra.len() / cols, cols, extra)?;
        let full_stack = FieldMatrix::vstack(&[&extra_rows, storage_j])?;
        Ok(RecoverySubspace {
            node,
            extra_rows,
            full_stack,
            complement: y.clone(),
        })
    }

    /// From additional recovered rows `Z_j`; `Y_j` is the nullspace of
    /// `[Z_j; A_j]`.
    pub fn from_extra_rows(
        node: usize,
        storage_j: &FieldMatrix,
        z: &FieldMatrix,
    ) -> Result<Self, ConditionError> {
        let full_stack = FieldMatrix::vstack(&[z, storage_j])?;
        if full_stack.rank() != full_stack.rows() {
            return Err(ConditionError::RankDeficient);
        }
        Ok(RecoverySubspace {
            node,
            extra_rows: z.clone(),
            complement: full_stack.nullspace(),
            full_stack,
        })
    }
}

/// Candidate `Y` bases for node 1: every subspace of `nullspace(A_1)` with
/// dimension `(k-1)(n-k-1)`, each as its RREF basis.
#[derive(Debug, Clone)]
pub struct YSubspaces {
    basis: FieldMatrix,
    coefficients: RrefEnumeration,
}

pub fn enumerate_y_subspaces(
    a1: &FieldMatrix,
    params: &CodeParameters,
) -> Result<YSubspaces, ConditionError> {
    if a1.rank() != params.alpha() || a1.cols() != params.total_cols() {
        return Err(ConditionError::RankDeficient);
    }
    let basis = a1.nullspace();
    let coefficients = RrefEnumeration::new(a1.field(), params.unrecovered_dim(), basis.rows())?;
    Ok(YSubspaces {
        basis,
        coefficients,
    })
}

impl YSubspaces {
    pub fn len(&self) -> u64 {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn lift(&self, coeffs: FieldMatrix) -> FieldMatrix {
        coeffs.mul_unchecked(&self.basis).rref().0
    }

    pub fn get(&self, index: u64) -> Option<FieldMatrix> {
        self.coefficients.get(index).map(|c| self.lift(c))
    }

    pub fn iter(&self) -> impl Iterator<Item = FieldMatrix> + '_ {
        self.coefficients.iter().map(|c| self.lift(c))
    }
}

/// Uniformly random `Y` candidate for node 1, without building the
/// enumeration (usable when it would not fit in 64-bit indices).
pub fn sample_y_subspace<R: Rng + ?Sized>(
    a1: &FieldMatrix,
    params: &CodeParameters,
    rng: &mut R,
) -> FieldMatrix {
    let basis = a1.nullspace();
    let coeffs =
        FieldMatrix::random_full_rank(a1.field(), params.unrecovered_dim(), basis.rows(), rng);
    coeffs.mul_unchecked(&basis).rref().0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralPositionVerdict {
    pub holds: bool,
    /// First singular row subset (1-based rows of the full storage stack).
    pub failing_rows: Option<Vec<usize>>,
}

/// Every `k(n-k)` of the `n(n-k)` storage rows must be independent.
pub fn check_general_position(code: &RegeneratingCode) -> GeneralPositionVerdict {
    let refs: Vec<&FieldMatrix> = code.storage_matrices().iter().collect();
    let all = FieldMatrix::vstack(&refs).expect("uniform widths");
    let dim = code.params().total_cols();
    for rows in (0..all.rows()).combinations(dim) {
        if all.select_rows(&rows).det().expect("square") == 0 {
            return GeneralPositionVerdict {
                holds: false,
                failing_rows: Some(rows.into_iter().map(|r| r + 1).collect()),
            };
        }
    }
    GeneralPositionVerdict {
        holds: true,
        failing_rows: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Dependent { subset: Vec<usize> },
    Unrecoverable { node: usize },
    NotGeneralPosition { rows: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationVerdict {
    pub independent: bool,
    pub recoverable: bool,
    pub general_position: Option<bool>,
    pub failures: Vec<Failure>,
    /// `C_j` for every node that can be rebuilt.
    pub rebuild_matrices: BTreeMap<usize, FieldMatrix>,
    n: usize,
}

impl VerificationVerdict {
    pub fn passed(&self) -> bool {
        self.independent && self.recoverable && self.general_position != Some(false)
    }

    /// One line per condition: `OK`, or `FAIL` and a witness.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let dependent = self.failures.iter().find_map(|f| match f {
            Failure::Dependent { subset } => Some(subset),
            _ => None,
        });
        match dependent {
            None => writeln!(out, "independence OK"),
            Some(s) => writeln!(out, "independence FAIL subset {{{}}}", s.iter().join(",")),
        }
        .unwrap();
        for j in 1..=self.n {
            if self.rebuild_matrices.contains_key(&j) {
                writeln!(out, "recovery node {j} OK").unwrap();
            } else {
                writeln!(out, "recovery node {j} FAIL no rebuild matrix").unwrap();
            }
        }
        if let Some(gp) = self.general_position {
            let rows = self.failures.iter().find_map(|f| match f {
                Failure::NotGeneralPosition { rows } => Some(rows),
                _ => None,
            });
            match (gp, rows) {
                (true, _) => writeln!(out, "general_position OK").unwrap(),
                (false, Some(r)) => {
                    writeln!(out, "general_position FAIL rows {{{}}}", r.iter().join(",")).unwrap()
                }
                (false, None) => writeln!(out, "general_position FAIL").unwrap(),
            }
        }
        out
    }
}

/// Runs every check on an explicit code.
pub fn verify(code: &RegeneratingCode, general_position: bool) -> VerificationVerdict {
    let mut failures = Vec::new();
    let ind = check_independence(code);
    if let Some(subset) = ind.failing_subset.clone() {
        failures.push(Failure::Dependent { subset });
    }
    let mut rebuild_matrices = BTreeMap::new();
    for j in 1..=code.params().n() {
        match check_recovery(code, j) {
            Some(c) => {
                rebuild_matrices.insert(j, c);
            }
            None => failures.push(Failure::Unrecoverable { node: j }),
        }
    }
    let gp = general_position.then(|| check_general_position(code));
    if let Some(GeneralPositionVerdict {
        failing_rows: Some(rows),
        ..
    }) = &gp
    {
        failures.push(Failure::NotGeneralPosition { rows: rows.clone() });
    }
    VerificationVerdict {
        independent: ind.independent,
        recoverable: rebuild_matrices.len() == code.params().n(),
        general_position: gp.map(|g| g.holds),
        failures,
        rebuild_matrices,
        n: code.params().n(),
    }
}
