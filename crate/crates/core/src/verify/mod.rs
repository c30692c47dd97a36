//! Independent checks on computed resultants: vanishing at a truncated
//! generic zero, differential homogeneity, and solution recovery.

pub mod series;
pub mod span;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::raw_orders;
use crate::diffpoly::{DiffIndex, DiffPoly, Monomial, Rational};
use crate::system::DiffSystem;

pub use series::{series_eval, Series, SeriesPoint};
pub use span::{lattice_solve, recover_solution, span_check, specialized_residuals, Recovery, Refusal, SpanResult};

pub const DEFAULT_TRUNCATION: usize = 12;
pub const DEFAULT_TRIALS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("series value of {var} is not a unit and cannot be inverted")]
    NonUnit { var: String },
    #[error("no series value for {var}")]
    MissingValue { var: String },
    #[error("truncation K = {k} is too small; at least {required} is needed")]
    TruncationTooSmall { k: usize, required: usize },
    #[error("the zero polynomial cannot be checked")]
    ZeroPolynomial,
}

/// `max_i h_i + max_i s_i + 2`: coefficients lost to differentiation plus slack.
pub fn margin(sr: &DiffPoly, sys: &DiffSystem) -> usize {
    let h = (0..sys.num_polys()).filter_map(|i| sr.order_in_block(i as u32)).max().unwrap_or(0);
    let s = raw_orders(sys).into_iter().max().unwrap_or(0);
    (h + s + 2) as usize
}

fn small(rng: &mut impl Rng, nonzero: bool) -> Rational {
    loop {
        let x: i64 = rng.gen_range(-9..=9);
        if x != 0 || !nonzero {
            return Rational::from_integer(x.into());
        }
    }
}

/// Random series: constant term nonzero when `unit`, other coefficients in `[−9, 9]`.
pub fn random_series(rng: &mut impl Rng, k: usize, unit: bool) -> Series {
    Series::new((0..k).map(|i| small(rng, unit && i == 0)).collect())
}

/// A random point for `y` and the `u_{ik}` with `k ≥ 1`, completed by `u_{i0} = ζ_i`.
pub fn generic_zero(sys: &DiffSystem, k: usize, rng: &mut impl Rng) -> Result<SeriesPoint, VerifyError> {
    let mut pt = SeriesPoint::new();
    for j in 1..=sys.n() {
        pt.set(DiffIndex::Y { j: j as u32 }, random_series(rng, k, true));
    }
    for i in 0..sys.num_polys() {
        for kk in 1..sys.support(i).len() {
            pt.set(DiffIndex::U { i: i as u32, k: kk as u32 }, random_series(rng, k, false));
        }
    }
    for i in 0..sys.num_polys() {
        let sup = sys.support(i);
        let inv = sup[0].inv();
        let z = DiffPoly::from_terms(
            sup.iter().enumerate().skip(1).map(|(kk, m)| (-Rational::from_integer(1.into()), Monomial::var(DiffSystem::coeff_var(i, kk)).mul(m).mul(&inv))),
        );
        let zs = series_eval(&z, &pt)?;
        pt.set(DiffIndex::U { i: i as u32, k: 0 }, zs);
    }
    Ok(pt)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub seed: u64,
    /// First nonzero coefficient of `sr(ζ)` below the checked precision.
    pub first_nonzero: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipReport {
    pub passed: bool,
    /// Vanishing is checked mod `t^precision`, `precision = K − margin`.
    pub precision: usize,
    pub trials: Vec<Trial>,
}

/// Whether `sr` vanishes mod `t^{K − margin}` at random truncated generic zeros.
pub fn membership_check(sr: &DiffPoly, sys: &DiffSystem, k: usize, trials: usize, seed: u64) -> Result<MembershipReport, VerifyError> {
    if sr.is_zero() {
        return Err(VerifyError::ZeroPolynomial);
    }
    let m = margin(sr, sys);
    if k <= m {
        return Err(VerifyError::TruncationTooSmall { k, required: m + 1 });
    }
    let precision = k - m;
    let trials: Vec<Trial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_add(t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let pt = generic_zero(sys, k, &mut rng)?;
            let v = series_eval(sr, &pt)?;
            debug_assert!(v.precision() >= precision);
            Ok(Trial { seed: s, first_nonzero: v.truncate(precision).valuation() })
        })
        .collect::<Result<_, VerifyError>>()?;
    Ok(MembershipReport { passed: trials.iter().all(|t| t.first_nonzero.is_none()), precision, trials })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneityReport {
    pub block: usize,
    /// `m_i` with `E_0 sr = m_i · sr`, when it exists.
    pub degree: Option<i64>,
    pub passed: bool,
}

/// Differential homogeneity in block `i` via the Euler operators `E_r`, `0 ≤ r ≤ ord(sr, u_i)`.
pub fn homogeneity_check(sr: &DiffPoly, i: usize) -> HomogeneityReport {
    let e0 = sr.euler_apply(i as u32, 0);
    let degree = sr.leading().and_then(|(m, c)| {
        let ratio = e0.coeff(m) / c;
        let d = ratio.is_integer().then(|| ratio.to_integer())?;
        let d: i64 = d.try_into().ok()?;
        (d >= 0 && e0 == sr.scale(&Rational::from_integer(d.into()))).then_some(d)
    });
    let ord = sr.order_in_block(i as u32).unwrap_or(0);
    let higher = (1..=ord).all(|r| sr.euler_apply(i as u32, r).is_zero());
    HomogeneityReport { block: i, degree, passed: degree.is_some() && higher }
}
