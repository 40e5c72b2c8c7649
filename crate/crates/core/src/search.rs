//! Search driver: canonical `A` outer loop, `Y` subspaces inner loop,
//! transmission vectors derived per `Y` and recovery tested last.

use std::ops::Range;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conditions::{
    check_general_position, check_independence_symmetric, check_recovery_symmetric,
    enumerate_y_subspaces, helper_nullspaces, orbit_independence, sample_y_subspace,
    symmetric_stack, verify,
};
use crate::galois::Field;
use crate::linalg::{projective_points, solve_left, FieldMatrix, LinalgError, RrefEnumeration};
use crate::model::{rotation_matrix, rotation_orbit, CodeParameters, ModelError, SymmetricSeed};

pub const DEFAULT_LIMIT: usize = 10;
pub const DEFAULT_Y_DRAWS: u64 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot merge reports from different configurations")]
    MixedConfigs,
    #[error("emitted seed failed re-verification: {0}")]
    VerificationMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    /// `samples` uniformly drawn canonical `A`, each tried against
    /// `y_draws` uniformly drawn `Y` subspaces.
    Random {
        seed: u64,
        samples: u64,
        y_draws: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub params: CodeParameters,
    pub field: Field,
    pub mode: SearchMode,
    /// Maximum number of seeds to emit; 0 means no cap.
    pub limit: usize,
    pub a_range: Option<Range<u64>>,
    pub require_general_position: bool,
}

impl SearchConfig {
    pub fn exhaustive(params: CodeParameters, field: Field) -> Self {
        SearchConfig {
            params,
            field,
            mode: SearchMode::Exhaustive,
            limit: DEFAULT_LIMIT,
            a_range: None,
            require_general_position: false,
        }
    }

    pub fn random(params: CodeParameters, field: Field, seed: u64, samples: u64) -> Self {
        SearchConfig {
            mode: SearchMode::Random {
                seed,
                samples,
                y_draws: DEFAULT_Y_DRAWS,
            },
            ..Self::exhaustive(params, field)
        }
    }

    /// Canonical `A` candidates: `alpha x k(n-k)` matrices in RREF.
    pub fn a_enumeration(&self) -> Result<RrefEnumeration, SearchError> {
        Ok(RrefEnumeration::new(
            &self.field,
            self.params.alpha(),
            self.params.total_cols(),
        )?)
    }

    fn validate(&self) -> Result<(), SearchError> {
        rotation_matrix(&self.params, &self.field)?;
        match self.mode {
            SearchMode::Exhaustive => {
                let total = self.a_enumeration()?.len();
                if let Some(r) = &self.a_range {
                    if r.start > r.end || r.end > total {
                        return Err(SearchError::InvalidConfig(format!(
                            "A range {}..{} outside 0..{total}",
                            r.start, r.end
                        )));
                    }
                }
            }
            SearchMode::Random { y_draws, .. } => {
                if self.a_range.is_some() {
                    return Err(SearchError::InvalidConfig(
                        "A range requires exhaustive mode".into(),
                    ));
                }
                if y_draws == 0 {
                    return Err(SearchError::InvalidConfig(
                        "y_draws must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchCounts {
    pub a_candidates: u64,
    pub a_independent: u64,
    /// Independent `A` for which at least one `Y` yields a working code.
    pub a_recoverable: u64,
    pub y_candidates: u64,
    /// `Y` candidates where some helper has no admissible vector.
    pub y_blocked: u64,
    pub zero_nullity_helpers: u64,
    pub min_helper_nullity: Option<usize>,
    pub codes_found: u64,
    pub gp_codes: u64,
}

impl SearchCounts {
    fn note_nullity(&mut self, nullity: Option<usize>) {
        self.min_helper_nullity = match (self.min_helper_nullity, nullity) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }

    fn absorb(&mut self, other: &SearchCounts) {
        self.a_candidates += other.a_candidates;
        self.a_independent += other.a_independent;
        self.a_recoverable += other.a_recoverable;
        self.y_candidates += other.y_candidates;
        self.y_blocked += other.y_blocked;
        self.zero_nullity_helpers += other.zero_nullity_helpers;
        self.note_nullity(other.min_helper_nullity);
        self.codes_found += other.codes_found;
        self.gp_codes += other.gp_codes;
    }
}

fn ratio(num: u64, den: u64) -> Option<Rational64> {
    (den > 0).then(|| Rational64::new(num as i64, den as i64))
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub params: CodeParameters,
    pub field: Field,
    pub mode: SearchMode,
    pub require_general_position: bool,
    pub counts: SearchCounts,
    pub elapsed: Duration,
    pub emitted: Vec<SymmetricSeed>,
}

impl SearchReport {
    pub fn independence_fraction(&self) -> Option<Rational64> {
        ratio(self.counts.a_independent, self.counts.a_candidates)
    }

    /// Share of tested `Y` subspaces (all belonging to independent `A`)
    /// that produce a working code.
    pub fn recovery_fraction(&self) -> Option<Rational64> {
        ratio(self.counts.codes_found, self.counts.y_candidates)
    }

    /// Share of independent `A` that admit at least one working code.
    pub fn a_recovery_fraction(&self) -> Option<Rational64> {
        ratio(self.counts.a_recoverable, self.counts.a_independent)
    }
}

struct Searcher<'a> {
    config: &'a SearchConfig,
    rotation: FieldMatrix,
    counts: SearchCounts,
    emitted: Vec<SymmetricSeed>,
}

impl<'a> Searcher<'a> {
    fn wants_more(&self) -> bool {
        self.config.limit == 0 || self.emitted.len() < self.config.limit
    }

    /// Working transmission vectors for this `Y`, trying every
    /// combination of projective candidates depth-first.
    fn try_y(
        &mut self,
        a: &FieldMatrix,
        orbit: &[FieldMatrix],
        y: &FieldMatrix,
    ) -> Option<Vec<Vec<u8>>> {
        self.counts.y_candidates += 1;
        let spaces = helper_nullspaces(orbit, y, 1);
        let zero = spaces.iter().filter(|s| s.rows() == 0).count() as u64;
        self.counts
            .note_nullity(spaces.iter().map(|s| s.rows()).min());
        if zero > 0 {
            self.counts.zero_nullity_helpers += zero;
            self.counts.y_blocked += 1;
            return None;
        }
        let candidates: Vec<Vec<Vec<u8>>> = spaces.iter().map(projective_points).collect();
        candidates
            .into_iter()
            .multi_cartesian_product()
            .find(|choice| {
                let rows: Vec<&[u8]> = choice.iter().map(|b| b.as_slice()).collect();
                let stack = symmetric_stack(orbit, &rows);
                solve_left(a, &stack).expect("uniform widths").is_some()
            })
    }

    fn emit(&mut self, a: &FieldMatrix, b: Vec<Vec<u8>>) -> Result<(), SearchError> {
        let field = &self.config.field;
        let b_vectors = b
            .iter()
            .map(|row| FieldMatrix::row_vector(field, row))
            .collect::<Result<Vec<_>, _>>()?;
        let seed = SymmetricSeed::new(
            self.config.params,
            field.clone(),
            a.clone(),
            self.rotation.clone(),
            b_vectors,
        )?;
        if self.config.require_general_position {
            if !check_general_position(&seed.expand()).holds {
                return Ok(());
            }
            self.counts.gp_codes += 1;
        }
        if self.wants_more() && !self.emitted.contains(&seed) {
            reverify(&seed)?;
            self.emitted.push(seed);
        }
        Ok(())
    }

    fn visit_a(
        &mut self,
        a: &FieldMatrix,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(), SearchError> {
        self.counts.a_candidates += 1;
        let n = self.config.params.n();
        let orbit = rotation_orbit(a, &self.rotation, n);
        if !orbit_independence(&orbit, self.config.params.k()).independent {
            return Ok(());
        }
        self.counts.a_independent += 1;
        let mut recoverable = false;
        let mut handle = |s: &mut Self, y: FieldMatrix| -> Result<(), SearchError> {
            if let Some(b) = s.try_y(a, &orbit, &y) {
                s.counts.codes_found += 1;
                recoverable = true;
                s.emit(a, b)?;
            }
            Ok(())
        };
        match (self.config.mode, rng) {
            (SearchMode::Random { y_draws, .. }, Some(rng)) => {
                for _ in 0..y_draws {
                    let y = sample_y_subspace(a, &self.config.params, rng);
                    handle(self, y)?;
                }
            }
            _ => {
                let ys = enumerate_y_subspaces(a, &self.config.params)
                    .map_err(|e| SearchError::InvalidConfig(e.to_string()))?;
                for y in ys.iter() {
                    handle(self, y)?;
                }
            }
        }
        if recoverable {
            self.counts.a_recoverable += 1;
        }
        Ok(())
    }
}

fn reverify(seed: &SymmetricSeed) -> Result<(), SearchError> {
    if !check_independence_symmetric(seed).independent {
        return Err(SearchError::VerificationMismatch(
            "symmetric independence".into(),
        ));
    }
    if check_recovery_symmetric(seed).is_none() {
        return Err(SearchError::VerificationMismatch(
            "symmetric recovery".into(),
        ));
    }
    if !verify(&seed.expand(), false).passed() {
        return Err(SearchError::VerificationMismatch(
            "explicit verification".into(),
        ));
    }
    Ok(())
}

/// Runs the configured search. Counting continues after the emission cap
/// is reached.
pub fn run_search(config: &SearchConfig) -> Result<SearchReport, SearchError> {
    config.validate()?;
    let start = Instant::now();
    let mut searcher = Searcher {
        config,
        rotation: rotation_matrix(&config.params, &config.field)?,
        counts: SearchCounts::default(),
        emitted: Vec::new(),
    };
    match config.mode {
        SearchMode::Exhaustive => {
            let enumeration = config.a_enumeration()?;
            let range = config.a_range.clone().unwrap_or(0..enumeration.len());
            for a in enumeration.range(range) {
                searcher.visit_a(&a, None)?;
            }
        }
        SearchMode::Random { seed, samples, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (rows, cols) = (config.params.alpha(), config.params.total_cols());
            for _ in 0..samples {
                let a = FieldMatrix::random_full_rank(&config.field, rows, cols, &mut rng)
                    .rref()
                    .0;
                searcher.visit_a(&a, Some(&mut rng))?;
            }
        }
    }
    Ok(SearchReport {
        params: config.params,
        field: config.field.clone(),
        mode: config.mode,
        require_general_position: config.require_general_position,
        counts: searcher.counts,
        elapsed: start.elapsed(),
        emitted: searcher.emitted,
    })
}

/// Splits the canonical `A` range into `parts` contiguous pieces whose
/// sizes differ by at most one, larger pieces first.
pub fn shard(config: &SearchConfig, parts: usize) -> Result<Vec<SearchConfig>, SearchError> {
    if parts == 0 {
        return Err(SearchError::InvalidConfig(
            "shard count must be at least 1".into(),
        ));
    }
    if config.mode != SearchMode::Exhaustive {
        return Err(SearchError::InvalidConfig(
            "sharding requires exhaustive mode".into(),
        ));
    }
    config.validate()?;
    if parts == 1 {
        return Ok(vec![config.clone()]);
    }
    let range = match &config.a_range {
        Some(r) => r.clone(),
        None => 0..config.a_enumeration()?.len(),
    };
    let total = range.end - range.start;
    let (base, extra) = (total / parts as u64, total % parts as u64);
    let mut start = range.start;
    Ok((0..parts as u64)
        .map(|i| {
            let size = base + u64::from(i < extra);
            let piece = start..start + size;
            start += size;
            SearchConfig {
                a_range: Some(piece),
                ..config.clone()
            }
        })
        .collect())
}

/// Sums counts and concatenates emissions; elapsed is the longest shard.
pub fn merge_reports(reports: &[SearchReport]) -> Result<SearchReport, SearchError> {
    let (first, rest) = reports
        .split_first()
        .ok_or_else(|| SearchError::InvalidConfig("no reports to merge".into()))?;
    let mut merged = first.clone();
    for r in rest {
        if r.params != merged.params
            || r.field != merged.field
            || r.mode != merged.mode
            || r.require_general_position != merged.require_general_position
        {
            return Err(SearchError::MixedConfigs);
        }
        merged.counts.absorb(&r.counts);
        merged.elapsed = merged.elapsed.max(r.elapsed);
        merged.emitted.extend(r.emitted.iter().cloned());
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, k: usize, q: usize) -> SearchConfig {
        SearchConfig::exhaustive(
            CodeParameters::new(n, k).unwrap(),
            Field::with_order(q).unwrap(),
        )
    }

    #[test]
    fn gf3_four_two_statistics() {
        let report = run_search(&config(4, 2, 3)).unwrap();
        let c = &report.counts;
        assert_eq!(c.a_candidates, 130);
        assert!(c.a_independent > 0);
        assert_eq!(c.y_candidates, 4 * c.a_independent);
        assert_eq!(
            report.recovery_fraction(),
            Some(Rational64::from_integer(1))
        );
        assert!(c.codes_found <= c.y_candidates);
        assert!(c.min_helper_nullity.unwrap() >= 1);
        assert_eq!(report.emitted.len(), DEFAULT_LIMIT);
        for seed in &report.emitted {
            assert!(verify(&seed.expand(), false).passed());
        }
    }

    #[test]
    fn shard_sizes() {
        let cfg = config(5, 3, 3);
        let parts = shard(&cfg, 4).unwrap();
        let sizes: Vec<u64> = parts
            .iter()
            .map(|p| p.a_range.as_ref().map(|r| r.end - r.start).unwrap())
            .collect();
        assert_eq!(sizes, vec![2753, 2753, 2753, 2752]);
        assert_eq!(parts[0].a_range.as_ref().unwrap().start, 0);
        assert_eq!(parts[3].a_range.as_ref().unwrap().end, 11011);
        assert_eq!(shard(&cfg, 1).unwrap(), vec![cfg.clone()]);
        assert!(shard(&cfg, 0).is_err());
    }

    #[test]
    fn sharded_merge_matches_full_run() {
        let cfg = SearchConfig {
            limit: 0,
            ..config(4, 2, 3)
        };
        let full = run_search(&cfg).unwrap();
        let parts: Vec<SearchReport> = shard(&cfg, 3)
            .unwrap()
            .iter()
            .map(|c| run_search(c).unwrap())
            .collect();
        let merged = merge_reports(&parts).unwrap();
        assert_eq!(merged.counts, full.counts);
        assert_eq!(merged.emitted, full.emitted);
        let single = merge_reports(std::slice::from_ref(&full)).unwrap();
        assert_eq!(single.counts, full.counts);

        let other = run_search(&config(4, 2, 5)).unwrap();
        assert_eq!(
            merge_reports(&[full, other]).unwrap_err(),
            SearchError::MixedConfigs
        );
    }

    #[test]
    fn random_mode_is_deterministic() {
        let params = CodeParameters::new(4, 2).unwrap();
        let cfg = SearchConfig::random(params, Field::with_order(7).unwrap(), 42, 20);
        let a = run_search(&cfg).unwrap();
        let b = run_search(&cfg).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.emitted, b.emitted);
        assert_eq!(a.counts.a_candidates, 20);
        assert_eq!(a.counts.y_candidates, 32 * a.counts.a_independent);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = config(4, 2, 3);
        cfg.a_range = Some(0..131);
        assert!(matches!(
            run_search(&cfg),
            Err(SearchError::InvalidConfig(_))
        ));
        let bad_rotation = config(4, 3, 3);
        assert!(matches!(
            run_search(&bad_rotation),
            Err(SearchError::Model(_))
        ));
        let random = SearchConfig::random(
            CodeParameters::new(4, 2).unwrap(),
            Field::with_order(3).unwrap(),
            1,
            1,
        );
        assert!(shard(&random, 2).is_err());
    }
}
