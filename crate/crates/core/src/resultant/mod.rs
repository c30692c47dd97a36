//! Sparse differential resultants by graded linear algebra.
//!
//! The search runs over order vectors `h` by increasing `Σ h_i` and over
//! degrees `d` upward. For each `(h, d)` the candidate monomials split into
//! grade components; a component is solved exactly only if the modular
//! filters leave it open. The default method looks for polynomials vanishing
//! at the generic zero `u_{i0} = ζ_i` and derives the cofactors afterwards;
//! the joint method solves for resultant and cofactors in one system.

pub mod certificate;
pub mod filters;
pub mod grading;
pub mod system;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{cofactor_degree_bound, degree_bound, order_bounds_with_subset, raw_orders};
use crate::diffpoly::{DiffPoly, Monomial};
use crate::essential::{is_essential, rank_essential_subset, EssentialError, Mode};
use crate::linalg::Backend;
use crate::system::DiffSystem;

pub use certificate::{verify_certificate, CertificateError, ResultantCertificate};
use certificate::{multiplier, realized_orders, telescoping_cofactors};
use filters::{component_has_trivial_kernel, generic_zero_points, jacobian_full_rank, ModPoint};
use grading::{ansatz_components, ansatz_size, Context, Grade, Prolongation};
use system::{build_linear_system, cofactor_candidates, solve_linear_system, substitution_kernel};

pub const DEFAULT_BUDGET: usize = 150_000;
/// Evaluation points beyond the number of unknowns in the prefilter.
const PREFILTER_EXTRA: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Kernel at the generic zero, cofactors by telescoping.
    #[default]
    Substitution,
    /// Resultant and cofactors as unknowns of one system.
    Joint,
}

#[derive(Debug, Clone)]
pub struct ResultantOptions {
    /// Cap on `Σ h_i`.
    pub max_order: Option<u32>,
    pub max_degree: Option<u64>,
    /// First cofactor degree tried by the joint method.
    pub cofactor_start: i64,
    /// Largest number of unknowns in one system.
    pub budget: usize,
    pub backend: Backend,
    pub method: Method,
    pub seed: u64,
    pub jacobian_filter: bool,
    pub modular_prefilter: bool,
}

impl Default for ResultantOptions {
    fn default() -> Self {
        ResultantOptions {
            max_order: None,
            max_degree: None,
            cofactor_start: 0,
            budget: DEFAULT_BUDGET,
            backend: Backend::Modular,
            method: Method::Substitution,
            seed: 0x5d_5e5d,
            jacobian_filter: true,
            modular_prefilter: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResultantError {
    #[error("system is not Laurent differentially essential")]
    NotEssential,
    #[error(transparent)]
    Essential(#[from] EssentialError),
    #[error("linear system with {needed} unknowns exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: usize },
    #[error("no resultant found within order {max_order} and degree {max_degree}")]
    NotFound { max_order: u32, max_degree: u64 },
    #[error("certificate rejected: {0}")]
    Certificate(#[from] CertificateError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub orders_tried: usize,
    pub jacobian_skips: usize,
    pub degrees_tried: usize,
    pub components: usize,
    pub prefiltered: usize,
    pub exact_solves: usize,
    pub max_unknowns: usize,
}

#[derive(Debug, Clone)]
pub struct ResultantOutcome {
    pub certificate: ResultantCertificate,
    pub stats: SearchStats,
    pub warnings: Vec<String>,
}

/// Order vectors over `subset` with `h_i ≤ caps_i` and `Σ h_i = total`.
fn order_vectors(np: usize, subset: &[usize], caps: &[u32], total: u32) -> Vec<Vec<Option<u32>>> {
    fn rec(pos: usize, left: u32, subset: &[usize], caps: &[u32], cur: &mut Vec<Option<u32>>, out: &mut Vec<Vec<Option<u32>>>) {
        if pos == subset.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in 0..=left.min(caps[pos]) {
            cur[subset[pos]] = Some(x);
            rec(pos + 1, left - x, subset, caps, cur, out);
        }
        cur[subset[pos]] = None;
    }
    let mut out = Vec::new();
    rec(0, total, subset, caps, &mut vec![None; np], &mut out);
    out
}

fn fmt_orders(h: &[Option<u32>]) -> String {
    let parts: Vec<String> = h.iter().map(|x| x.map_or("-inf".to_string(), |v| v.to_string())).collect();
    format!("({})", parts.join(","))
}

struct Searcher<'a> {
    sys: &'a DiffSystem,
    ctx: Context,
    opts: &'a ResultantOptions,
    stats: SearchStats,
    warnings: Vec<String>,
    /// Generic-zero points for the current order vector.
    points: Vec<ModPoint>,
}

/// A solution found in one component before certification.
struct Found {
    sr: DiffPoly,
    joint_cofactors: Option<std::collections::BTreeMap<(usize, u32), DiffPoly>>,
}

impl<'a> Searcher<'a> {
    fn new(sys: &'a DiffSystem, subset: &[usize], opts: &'a ResultantOptions) -> Self {
        Searcher { sys, ctx: Context::new(sys, subset), opts, stats: SearchStats::default(), warnings: Vec::new(), points: Vec::new() }
    }

    fn check_budget(&mut self, needed: u128) -> Result<(), ResultantError> {
        if needed > self.opts.budget as u128 {
            return Err(ResultantError::BudgetExceeded { needed, budget: self.opts.budget });
        }
        self.stats.max_unknowns = self.stats.max_unknowns.max(needed as usize);
        Ok(())
    }

    /// Components of degree `d` that survive the modular prefilter, in grade order.
    fn open_components(&mut self, pr: &Prolongation, h: &[Option<u32>], d: u64) -> Result<Vec<(Grade, Vec<Monomial>)>, ResultantError> {
        let block_vars: Vec<usize> =
            self.ctx.subset.iter().filter_map(|&i| h[i].map(|hi| self.ctx.norms[i].monomials.len() * (hi as usize + 1))).collect();
        self.check_budget(ansatz_size(&block_vars, d))?;
        let comps = ansatz_components(&self.ctx, h, d);
        self.stats.components += comps.len();
        if !self.opts.modular_prefilter {
            return Ok(comps);
        }
        let need = comps.iter().map(|c| c.1.len()).max().unwrap_or(0) + PREFILTER_EXTRA;
        if self.points.len() < need {
            let seed = self.opts.seed ^ (self.points.len() as u64).wrapping_mul(0x9e37_79b9);
            let more = generic_zero_points(pr, need - self.points.len(), seed);
            self.points.extend(more);
        }
        let points = &self.points;
        let keep: Vec<bool> = comps.par_iter().map(|(_, ms)| !component_has_trivial_kernel(points, ms, PREFILTER_EXTRA)).collect();
        self.stats.prefiltered += keep.iter().filter(|k| !**k).count();
        Ok(comps.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect())
    }

    fn solve_component(&mut self, pr: &Prolongation, h: &[Option<u32>], d: u64, grade: &Grade, ms: &[Monomial]) -> Result<Option<(Found, usize)>, ResultantError> {
        self.stats.exact_solves += 1;
        match self.opts.method {
            Method::Substitution => {
                self.check_budget(ms.len() as u128)?;
                let (kernel, _) = substitution_kernel(pr, ms, self.opts.backend);
                let dim = kernel.len();
                Ok(kernel.into_iter().next().map(|sr| (Found { sr: sr.primitive().0, joint_cofactors: None }, dim)))
            }
            Method::Joint => {
                let mult = multiplier(&self.ctx, h, d);
                let target = grade.add(&self.ctx.grade(&mult));
                let caps = cofactor_degree_bound(self.sys, h, d);
                let cands = cofactor_candidates(&self.ctx, h, &target, &caps);
                let mut degs: Vec<i64> = cands.iter().flat_map(|(_, _, ms)| ms.iter().map(|m| m.degree())).filter(|x| *x >= self.opts.cofactor_start).collect();
                degs.sort_unstable();
                degs.dedup();
                if degs.is_empty() {
                    degs.push(self.opts.cofactor_start);
                }
                for cofdeg in degs {
                    let ncof: usize = cands.iter().map(|(_, _, ms)| ms.iter().filter(|m| m.degree() <= cofdeg).count()).sum();
                    self.check_budget((ncof + ms.len()) as u128)?;
                    let ls = build_linear_system(pr, &cands, cofdeg, &mult, ms);
                    if let Some(sol) = solve_linear_system(&ls, self.opts.backend) {
                        let dim = sol.projection_dim;
                        return Ok(Some((Found { sr: sol.sr, joint_cofactors: Some(sol.cofactors) }, dim)));
                    }
                }
                Ok(None)
            }
        }
    }

    /// Searches one `(h, d)`; the first component with a solution wins.
    fn try_degree(&mut self, h: &[Option<u32>], d: u64, pr: &Prolongation) -> Result<Option<Found>, ResultantError> {
        self.stats.degrees_tried += 1;
        let comps = self.open_components(pr, h, d)?;
        let mut winner: Option<Found> = None;
        let mut extra = 0usize;
        for (grade, ms) in &comps {
            if winner.is_some() && self.opts.method == Method::Joint {
                break;
            }
            match self.solve_component(pr, h, d, grade, ms)? {
                Some((found, dim)) => {
                    if winner.is_none() {
                        extra += dim - 1;
                        winner = Some(found);
                    } else {
                        extra += dim;
                    }
                }
                None => {}
            }
        }
        if winner.is_some() && extra > 0 {
            self.warnings.push(format!("solution space at orders {} and degree {d} has dimension {}; kept the lowest component", fmt_orders(h), extra + 1));
        }
        Ok(winner)
    }

    fn certify(&mut self, found: Found, searched: &[Option<u32>]) -> Result<ResultantCertificate, ResultantError> {
        let np = self.ctx.num_polys();
        let sr = found.sr;
        let h = realized_orders(&sr, np);
        if h != searched {
            self.warnings.push(format!("resultant has orders {} below the searched orders {}", fmt_orders(&h), fmt_orders(searched)));
        }
        let d = sr.total_degree().and_then(|x| x.to_u64()).unwrap_or(0);
        let subset: Vec<usize> = self.ctx.subset.iter().copied().filter(|&i| h[i].is_some()).collect();
        if subset != self.ctx.subset {
            self.warnings.push(format!("resultant is free of the coefficients of some polynomials in {:?}", self.ctx.subset));
        }
        let (multiplier, cofactors) = match found.joint_cofactors {
            Some(c) if h == searched => (multiplier(&self.ctx, searched, d), c),
            _ => {
                let pr = Prolongation::new(&self.ctx, &h);
                let mult = multiplier(&self.ctx, &h, d);
                let c = telescoping_cofactors(&pr, &sr, &mult);
                (mult, c)
            }
        };
        let cert = ResultantCertificate { sr, h, d, subset: self.ctx.subset.clone(), multiplier, cofactors };
        verify_certificate(self.sys, &cert)?;
        Ok(cert)
    }
}

fn check_essential(sys: &DiffSystem) -> Result<Vec<usize>, ResultantError> {
    if !is_essential(sys, Mode::default())?.essential {
        return Err(ResultantError::NotEssential);
    }
    Ok(rank_essential_subset(sys)?.subset)
}

/// The sparse differential resultant with a verified membership certificate.
pub fn sdresultant(sys: &DiffSystem, opts: &ResultantOptions) -> Result<ResultantOutcome, ResultantError> {
    let subset = check_essential(sys)?;
    let report = order_bounds_with_subset(sys, &subset);
    let caps: Vec<u32> = subset.iter().map(|&i| report.bound[i].unwrap_or(0).max(0) as u32).collect();
    let total_cap: u32 = caps.iter().sum::<u32>().min(opts.max_order.unwrap_or(u32::MAX));
    let mut s = Searcher::new(sys, &subset, opts);
    let mut max_degree_seen = 0;
    for o in 0..=total_cap {
        for h in order_vectors(sys.num_polys(), &subset, &caps, o) {
            s.stats.orders_tried += 1;
            let pr = Prolongation::new(&s.ctx, &h);
            s.points.clear();
            if opts.jacobian_filter && jacobian_full_rank(&pr, opts.seed ^ o as u64) {
                s.stats.jacobian_skips += 1;
                continue;
            }
            let bound = degree_bound(sys, &h).to_u64().unwrap_or(u64::MAX);
            let dmax = bound.min(opts.max_degree.unwrap_or(u64::MAX));
            max_degree_seen = max_degree_seen.max(dmax);
            for d in subset.len() as u64..=dmax {
                if let Some(found) = s.try_degree(&h, d, &pr)? {
                    let certificate = s.certify(found, &h)?;
                    return Ok(ResultantOutcome { certificate, stats: s.stats, warnings: s.warnings });
                }
            }
            if opts.jacobian_filter {
                s.warnings.push(format!("orders {} admit a relation but none was found up to degree {dmax}", fmt_orders(&h)));
            }
        }
    }
    Err(ResultantError::NotFound { max_order: total_cap, max_degree: max_degree_seen })
}

/// The resultant searched at the fixed orders `h_i = s − s_i`, `s = Σ s_i`,
/// where `s_i` is the order of `P_i` as written.
pub fn dresultant(sys: &DiffSystem, opts: &ResultantOptions) -> Result<ResultantOutcome, ResultantError> {
    let subset = check_essential(sys)?;
    let s_i = raw_orders(sys);
    let s: u32 = s_i.iter().sum();
    let h: Vec<Option<u32>> = (0..sys.num_polys()).map(|i| subset.contains(&i).then(|| s - s_i[i])).collect();
    let mut srch = Searcher::new(sys, &subset, opts);
    srch.stats.orders_tried = 1;
    let pr = Prolongation::new(&srch.ctx, &h);
    let bound = degree_bound(sys, &h).to_u64().unwrap_or(u64::MAX);
    let dmax = bound.min(opts.max_degree.unwrap_or(u64::MAX));
    for d in subset.len() as u64..=dmax {
        if let Some(found) = srch.try_degree(&h, d, &pr)? {
            let certificate = srch.certify(found, &h)?;
            return Ok(ResultantOutcome { certificate, stats: srch.stats, warnings: srch.warnings });
        }
    }
    Err(ResultantError::NotFound { max_order: s, max_degree: dmax })
}
