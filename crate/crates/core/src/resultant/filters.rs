//! Randomized modular tests that can only rule candidates out.
//!
//! Both filters evaluate at random points modulo a large prime. A full rank
//! found at a point is a full rank of the generic matrix, so a skip is always
//! sound; a deficient rank at a point says nothing and the exact solver runs.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diffpoly::{DerivVar, DiffIndex, DiffPoly, Monomial};
use crate::linalg::rank_mod;
use crate::modp::Fp;

use super::grading::Prolongation;

/// Largest prime below 2^61.
pub const FILTER_PRIME: u64 = 2_305_843_009_213_693_951;

/// Values for the variables of a prolongation, all nonzero.
#[derive(Debug, Clone)]
pub struct ModPoint {
    pub f: Fp,
    pub values: HashMap<DerivVar, u64>,
}

impl ModPoint {
    pub fn random(vars: impl IntoIterator<Item = DerivVar>, rng: &mut impl Rng) -> Self {
        let f = Fp::new(FILTER_PRIME);
        let values = vars.into_iter().map(|v| (v, rng.gen_range(1..f.p))).collect();
        ModPoint { f, values }
    }

    /// Value of a variable; missing variables count as zero.
    pub fn value(&self, v: &DerivVar) -> u64 {
        self.values.get(v).copied().unwrap_or(0)
    }

    /// `None` when a negative power of a zero value or a bad denominator shows up.
    pub fn eval_monomial(&self, m: &Monomial) -> Option<u64> {
        let f = self.f;
        let mut acc = 1u64;
        for (v, e) in m.exps() {
            let x = self.value(v);
            let x = if *e < 0 {
                if x == 0 {
                    return None;
                }
                f.inv(x)
            } else {
                x
            };
            acc = f.mul(acc, f.pow(x, e.unsigned_abs()));
        }
        Some(acc)
    }

    pub fn eval(&self, p: &DiffPoly) -> Option<u64> {
        let f = self.f;
        let mut acc = 0u64;
        for (m, c) in p.terms() {
            let t = f.mul(f.from_rational(c)?, self.eval_monomial(m)?);
            acc = f.add(acc, t);
        }
        Some(acc)
    }
}

/// Whether `{ζ_i^{(t)}}` is algebraically independent over the `u_{ik}` (`k ≥ 1`),
/// judged by the Jacobian with respect to `Y` at one random point.
///
/// `true` means no polynomial relation among the `u_{i0}^{(t)}` exists at these orders.
pub fn jacobian_full_rank(pr: &Prolongation, seed: u64) -> bool {
    let zetas: Vec<&DiffPoly> = pr.zeta.iter().flatten().collect();
    if zetas.len() > pr.yvars.len() {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pt = ModPoint::random(pr.yvars.iter().chain(&pr.uvars).copied(), &mut rng);
    let mut rows = Vec::with_capacity(zetas.len());
    for z in zetas {
        let mut row = Vec::new();
        for (c, y) in pr.yvars.iter().enumerate() {
            let d = z.partial(y);
            if d.is_zero() {
                continue;
            }
            match pt.eval(&d) {
                Some(0) => {}
                Some(x) => row.push((c, x)),
                None => return false,
            }
        }
        rows.push(row);
    }
    rank_mod(&rows, pr.yvars.len(), pt.f) == rows.len()
}

/// The point with `u_{i0}^{(t)}` replaced by the value of `ζ_i^{(t)}`.
pub fn generic_zero_point(pr: &Prolongation, rng: &mut impl Rng) -> Option<ModPoint> {
    let free = pr.yvars.iter().chain(pr.uvars.iter().filter(|v| !is_u0(v))).copied();
    let mut pt = ModPoint::random(free, rng);
    for (i, zs) in pr.zeta.iter().enumerate() {
        for (t, z) in zs.iter().enumerate() {
            let x = pt.eval(z)?;
            pt.values.insert(DerivVar::u(i as u32, 0, t as u32), x);
        }
    }
    Some(pt)
}

pub fn is_u0(v: &DerivVar) -> bool {
    matches!(v.base, DiffIndex::U { k: 0, .. })
}

/// `count` generic-zero points; points hitting a zero denominator are dropped.
pub fn generic_zero_points(pr: &Prolongation, count: usize, seed: u64) -> Vec<ModPoint> {
    (0..count)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            generic_zero_point(pr, &mut rng)
        })
        .collect()
}

/// Whether the monomials admit no combination vanishing at the generic zero,
/// judged at the first `len + extra` of the given points.
pub fn component_has_trivial_kernel(points: &[ModPoint], monomials: &[Monomial], extra: usize) -> bool {
    let npts = (monomials.len() + extra).min(points.len());
    let Some(f) = points.first().map(|p| p.f) else { return false };
    let mut rows = Vec::with_capacity(npts);
    for pt in &points[..npts] {
        let mut row = Vec::new();
        for (c, m) in monomials.iter().enumerate() {
            match pt.eval_monomial(m) {
                Some(0) => {}
                Some(x) => row.push((c, x)),
                None => return false,
            }
        }
        rows.push(row);
    }
    rank_mod(&rows, monomials.len(), f) == monomials.len()
}
