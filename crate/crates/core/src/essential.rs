//! Laurent differential essentiality and the rank-essential subsystem.
//!
//! Row `i` of the generic support matrix `M_P` is `Σ_{k≥1} u_{ik} β_{ik}`,
//! where `β_{ik}` is the symbolic support vector of `M_{ik}/M_{i0}`. The
//! system is essential iff `rank M_P = n`. Evaluating `M_P` at integer
//! points gives lower bounds on the rank, and the rank of `M_P` equals the
//! maximum rank over one-monomial-per-row selections, which [`rdm`] decides
//! exactly.

use itertools::Itertools;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::diffpoly::{Monomial, Rational};
use crate::linalg::rank_integer;
use crate::support::{eval_upoly, rdm, SupportError, SupportMatrix};
use crate::system::DiffSystem;

pub const DEFAULT_SELECTION_BUDGET: u64 = 10_000;
const SAMPLE_BOUND: i64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EssentialError {
    #[error("inconclusive: {tried} monomial selections tried without a decision (budget {budget}); use randomized mode or raise the budget")]
    Inconclusive { tried: u64, budget: u64 },
    #[error("no rank-essential set: system not essential")]
    NotEssential,
    #[error(transparent)]
    Support(#[from] SupportError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Randomized { seeds: usize },
    Certified { budget: u64 },
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Randomized { seeds: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    Certified,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialReport {
    pub essential: bool,
    /// Selected `k_i ≥ 1` per polynomial whose quotients have rank `n`.
    pub witness: Option<Vec<usize>>,
    pub rank: usize,
    pub mode: Certainty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankEssentialSet {
    pub subset: Vec<usize>,
    /// Whether the rank deficiency of the subset was certified by exhausting its selections.
    pub certified: bool,
}

/// Support matrices of the quotients `M_{ik}/M_{i0}`, one per polynomial.
fn quotient_matrices(sys: &DiffSystem) -> Result<Vec<SupportMatrix>, SupportError> {
    (0..sys.num_polys()).map(|i| SupportMatrix::from_monomials(&sys.quotients(i), sys.n())).collect()
}

/// Rank of the generic support matrix restricted to `rows`, at one random point.
fn evaluated_rank(quot: &[SupportMatrix], rows: &[usize], n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Rational> = (0..n).map(|_| Rational::from_integer(BigInt::from(rng.gen_range(-SAMPLE_BOUND..=SAMPLE_BOUND)))).collect();
    let mut mat = Vec::with_capacity(rows.len());
    for &i in rows {
        let q = &quot[i];
        let mut row = vec![Rational::from_integer(BigInt::from(0)); n];
        for k in 0..q.nrows() {
            let u = Rational::from_integer(BigInt::from(rng.gen_range(-SAMPLE_BOUND..=SAMPLE_BOUND)));
            for (c, x) in xs.iter().enumerate() {
                row[c] += &u * eval_upoly(q.entry(k, c), x);
            }
        }
        // Entries are integers: x and u are integers and exponents are integers.
        mat.push(row.into_iter().map(|r| r.to_integer()).collect());
    }
    rank_integer(mat)
}

/// Ranks of the generic support matrix of `rows` at `seeds` random points.
pub fn randomized_ranks(sys: &DiffSystem, rows: &[usize], seeds: usize) -> Result<Vec<usize>, EssentialError> {
    let quot = quotient_matrices(sys)?;
    Ok((0..seeds as u64).into_par_iter().map(|s| evaluated_rank(&quot, rows, sys.n(), 0x5eed_0000 + s)).collect())
}

/// Generic rank of `M_{P_T}`, the maximum over random evaluations.
pub fn subset_rank(sys: &DiffSystem, rows: &[usize], seeds: usize) -> Result<usize, EssentialError> {
    Ok(randomized_ranks(sys, rows, seeds.max(1))?.into_iter().max().unwrap_or(0))
}

struct SelectionScan {
    best_rank: usize,
    best: Option<Vec<usize>>,
    tried: u64,
    exhausted: bool,
}

/// Scans selections lexicographically until one reaches `target` rank or the budget runs out.
fn scan_selections(sys: &DiffSystem, rows: &[usize], target: usize, budget: u64) -> Result<SelectionScan, SupportError> {
    let counts: Vec<usize> = rows.iter().map(|&i| sys.support(i).len() - 1).collect();
    let quot: Vec<Vec<Monomial>> = rows.iter().map(|&i| sys.quotients(i)).collect();
    let mut scan = SelectionScan { best_rank: 0, best: None, tried: 0, exhausted: true };
    for sel in counts.iter().map(|&c| 0..c).multi_cartesian_product() {
        if scan.tried >= budget {
            scan.exhausted = false;
            break;
        }
        scan.tried += 1;
        let mons: Vec<Monomial> = sel.iter().enumerate().map(|(r, &k)| quot[r][k].clone()).collect();
        let rank = rdm(&SupportMatrix::from_monomials(&mons, sys.n())?)?.rank();
        if rank > scan.best_rank || scan.best.is_none() {
            scan.best_rank = rank.max(scan.best_rank);
            scan.best = Some(sel.iter().map(|k| k + 1).collect());
        }
        if rank >= target {
            break;
        }
    }
    if rows.is_empty() {
        scan.best = Some(Vec::new());
    }
    Ok(scan)
}

pub fn is_essential(sys: &DiffSystem, mode: Mode) -> Result<EssentialReport, EssentialError> {
    let n = sys.n();
    let all: Vec<usize> = (0..sys.num_polys()).collect();
    match mode {
        Mode::Randomized { seeds } => {
            let ranks = randomized_ranks(sys, &all, seeds.max(3))?;
            let rank = *ranks.iter().max().unwrap();
            if ranks.iter().all(|r| *r == rank) {
                Ok(EssentialReport { essential: rank == n, witness: None, rank, mode: Certainty::Randomized })
            } else {
                is_essential(sys, Mode::Certified { budget: DEFAULT_SELECTION_BUDGET })
            }
        }
        Mode::Certified { budget } => {
            // An evaluation of rank n already proves essentiality; the scan then
            // only looks for a witness.
            let lower = subset_rank(sys, &all, 3)?;
            let scan = scan_selections(sys, &all, n, budget)?;
            if scan.best_rank == n {
                return Ok(EssentialReport { essential: true, witness: scan.best, rank: n, mode: Certainty::Certified });
            }
            if scan.exhausted {
                return Ok(EssentialReport { essential: false, witness: None, rank: scan.best_rank, mode: Certainty::Certified });
            }
            if lower == n {
                return Ok(EssentialReport { essential: true, witness: None, rank: n, mode: Certainty::Certified });
            }
            Err(EssentialError::Inconclusive { tried: scan.tried, budget })
        }
    }
}

/// Whether `card(T) − rank(M_{P_T}) = 1`, judged by random evaluation.
fn deficient_by_one(sys: &DiffSystem, t: &[usize]) -> Result<bool, EssentialError> {
    Ok(t.len() == subset_rank(sys, t, 3)? + 1)
}

/// The unique rank-essential subset, searched by ascending cardinality.
pub fn rank_essential_subset(sys: &DiffSystem) -> Result<RankEssentialSet, EssentialError> {
    let report = is_essential(sys, Mode::default())?;
    if !report.essential {
        return Err(EssentialError::NotEssential);
    }
    let np = sys.num_polys();
    for size in 1..=np {
        for t in (0..np).combinations(size) {
            if deficient_by_one(sys, &t)? {
                // Upper bound on the rank: no selection of T reaches card(T).
                let scan = scan_selections(sys, &t, t.len(), DEFAULT_SELECTION_BUDGET)?;
                if scan.best_rank >= t.len() {
                    continue;
                }
                return Ok(RankEssentialSet { subset: t, certified: scan.exhausted });
            }
        }
    }
    Err(EssentialError::NotEssential)
}

/// Every subset satisfying the rank-essential definition, by exhaustive scan.
pub fn all_rank_essential_subsets(sys: &DiffSystem) -> Result<Vec<Vec<usize>>, EssentialError> {
    let np = sys.num_polys();
    let mut out = Vec::new();
    for size in 1..=np {
        for t in (0..np).combinations(size) {
            if !deficient_by_one(sys, &t)? {
                continue;
            }
            let mut minimal = true;
            for sub_size in 1..size {
                for j in t.iter().copied().combinations(sub_size) {
                    if subset_rank(sys, &j, 3)? != j.len() {
                        minimal = false;
                    }
                }
            }
            if minimal {
                out.push(t);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn determinant_system() -> DiffSystem {
        DiffSystem::from_strs(2, &["y1'', y1''', y2'''"; 3]).unwrap()
    }

    fn proper_subset_system(o: u32) -> DiffSystem {
        let p3 = format!("y1^({o}), y2^({o}), y3^({o})");
        DiffSystem::from_strs(3, &["y1*y2, y3", "y1*y2, y3*y3'", "y1*y2, y3'", &p3]).unwrap()
    }

    #[test]
    fn determinant_example_is_essential() {
        let r = is_essential(&determinant_system(), Mode::default()).unwrap();
        assert!(r.essential);
        assert_eq!(r.rank, 2);
        let r = is_essential(&determinant_system(), Mode::Certified { budget: 100 }).unwrap();
        assert!(r.essential);
        assert_eq!(r.mode, Certainty::Certified);
        let w = r.witness.unwrap();
        let sys = determinant_system();
        let mons: Vec<Monomial> = w.iter().enumerate().map(|(i, &k)| sys.quotients(i)[k - 1].clone()).collect();
        assert_eq!(rdm(&SupportMatrix::from_monomials(&mons, 2).unwrap()).unwrap().rank(), 2);
    }

    #[test]
    fn repeated_linear_supports_are_not_essential() {
        let sys = DiffSystem::from_strs(2, &["1, y1"; 3]).unwrap();
        for mode in [Mode::default(), Mode::Certified { budget: 10 }] {
            let r = is_essential(&sys, mode).unwrap();
            assert!(!r.essential);
            assert_eq!(r.rank, 1);
        }
        assert_eq!(rank_essential_subset(&sys), Err(EssentialError::NotEssential));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let sys = DiffSystem::from_strs(2, &["1, y1, y1', y1''"; 3]).unwrap();
        assert!(matches!(is_essential(&sys, Mode::Certified { budget: 5 }), Err(EssentialError::Inconclusive { tried: 5, budget: 5 })));
    }

    #[test]
    fn high_order_example() {
        let sys = proper_subset_system(6);
        assert!(is_essential(&sys, Mode::default()).unwrap().essential);
        assert!(is_essential(&sys, Mode::Certified { budget: 100 }).unwrap().essential);
        assert_eq!(rank_essential_subset(&sys).unwrap().subset, vec![0, 1, 2]);
        assert_eq!(all_rank_essential_subsets(&sys).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn coefficient_free_block() {
        // P2 is written with P1's coefficient names in the source; the system
        // here uses its own coefficients u20, u21.
        let sys = DiffSystem::from_strs(2, &["1, y1*y1'", "1, y1", "1, y2'"]).unwrap();
        let t = rank_essential_subset(&sys).unwrap();
        assert_eq!(t.subset, vec![0, 1]);
        assert!(t.certified);
    }

    #[test]
    fn fully_rank_essential_system() {
        // Dropping any polynomial leaves two independent ones.
        let sys = DiffSystem::from_strs(2, &["1, y1, y2", "1, y1', y2", "1, y1*y2'"]).unwrap();
        for t in (0..3).combinations(2) {
            assert_eq!(subset_rank(&sys, &t, 3).unwrap(), 2);
        }
        assert_eq!(rank_essential_subset(&sys).unwrap().subset, vec![0, 1, 2]);
    }
}
