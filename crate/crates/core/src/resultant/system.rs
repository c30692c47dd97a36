//! Exact linear systems for one graded component.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::diffpoly::{DerivVar, DiffIndex, DiffPoly, Monomial, Rational};
use crate::linalg::{rref, Backend, SparseSystem};

use super::filters::is_u0;
use super::grading::{graded_monomials, Context, Grade, Prolongation};

/// Splits `m` into its `u_{i0}^{(t)}` factors and the rest.
pub fn split_u0(m: &Monomial) -> (Monomial, Monomial) {
    let (a, b): (Vec<_>, Vec<_>) = m.exps().iter().copied().partition(|(v, _)| is_u0(v));
    (Monomial::from_pairs(a), Monomial::from_pairs(b))
}

pub fn zeta_of<'a>(pr: &'a Prolongation, v: &DerivVar) -> &'a DiffPoly {
    match v.base {
        DiffIndex::U { i, k: 0 } => &pr.zeta[i as usize][v.order as usize],
        _ => panic!("not a u_i0 variable: {v}"),
    }
}

/// Substitutes `u_{i0}^{(t)} → ζ_i^{(t)}`, caching products of the `u_{i0}` parts.
pub struct Substituter<'a> {
    pr: &'a Prolongation,
    cache: HashMap<Monomial, DiffPoly>,
}

impl<'a> Substituter<'a> {
    pub fn new(pr: &'a Prolongation) -> Self {
        Substituter { pr, cache: HashMap::new() }
    }

    fn u0_product(&mut self, m: &Monomial) -> DiffPoly {
        if let Some(p) = self.cache.get(m) {
            return p.clone();
        }
        let out = match m.exps().first() {
            None => DiffPoly::one(),
            Some((v, _)) => {
                let v = *v;
                let rest = m.div(&Monomial::var(v));
                let r = self.u0_product(&rest);
                &r * zeta_of(self.pr, &v)
            }
        };
        self.cache.insert(m.clone(), out.clone());
        out
    }

    pub fn substitute(&mut self, m: &Monomial) -> DiffPoly {
        let (u0, rest) = split_u0(m);
        self.u0_product(&u0).mul_monomial(&rest)
    }

    pub fn substitute_poly(&mut self, p: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in p.terms() {
            out = &out + &self.substitute(m).scale(c);
        }
        out
    }
}

/// Collects sparse columns into a row-major integer system.
fn assemble(columns: &[DiffPoly]) -> SparseSystem {
    let mut rows: BTreeMap<&Monomial, Vec<(usize, Rational)>> = BTreeMap::new();
    for (c, p) in columns.iter().enumerate() {
        for (m, x) in p.terms() {
            rows.entry(m).or_default().push((c, x.clone()));
        }
    }
    let mut sys = SparseSystem::new(columns.len());
    for (_, row) in rows {
        sys.push_rational_row(row);
    }
    sys
}

fn combine(ms: &[Monomial], v: &[(usize, Rational)]) -> DiffPoly {
    DiffPoly::from_terms(v.iter().filter(|(_, x)| !x.is_zero()).map(|(c, x)| (x.clone(), ms[*c].clone())))
}

/// Nullspace basis of `c ↦ Σ c_r m_r(ζ)`, as polynomials.
pub fn substitution_kernel(pr: &Prolongation, ms: &[Monomial], backend: Backend) -> (Vec<DiffPoly>, usize) {
    let mut sub = Substituter::new(pr);
    let cols: Vec<DiffPoly> = ms.iter().map(|m| sub.substitute(m)).collect();
    let sys = assemble(&cols);
    let nrows = sys.rows.len();
    let r = rref(&sys, backend);
    let out = r.free_columns().into_iter().map(|f| combine(ms, &r.basis_vector(f))).collect();
    (out, nrows)
}

/// Result of the joint system for one component.
#[derive(Debug, Clone)]
pub struct JointSolution {
    pub sr: DiffPoly,
    pub cofactors: BTreeMap<(usize, u32), DiffPoly>,
    /// Dimension of the projection of the nullspace onto the resultant coefficients.
    pub projection_dim: usize,
}

/// The linear system `mult·Σ c_r m_r = Σ_{i,s,µ} a_{i,s,µ} µ (P_i^N)^{(s)}`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub system: SparseSystem,
    /// `(i, s, µ)` for each cofactor column; the resultant columns follow.
    pub cofactor_columns: Vec<(usize, u32, Monomial)>,
    pub ansatz: Vec<Monomial>,
}

impl LinearSystem {
    pub fn c0(&self) -> usize {
        self.cofactor_columns.len()
    }

    pub fn unknowns(&self) -> usize {
        self.system.ncols
    }
}

/// Cofactor candidates per `(i, s)`, all within the degree caps.
pub fn cofactor_candidates(
    ctx: &Context,
    h: &[Option<u32>],
    target: &Grade,
    caps: &[i64],
) -> Vec<(usize, u32, Vec<Monomial>)> {
    let mut out = Vec::new();
    for &i in &ctx.subset {
        let Some(hi) = h[i] else { continue };
        for s in 0..=hi {
            let g = target.sub(&ctx.poly_grade(i, s));
            out.push((i, s, graded_monomials(ctx, h, &g, caps[i])));
        }
    }
    out
}

pub fn build_linear_system(
    pr: &Prolongation,
    candidates: &[(usize, u32, Vec<Monomial>)],
    cofdeg: i64,
    mult: &Monomial,
    ansatz: &[Monomial],
) -> LinearSystem {
    let mut cols: Vec<DiffPoly> = Vec::new();
    let mut labels = Vec::new();
    for (i, s, mus) in candidates {
        let p = &pr.polys[*i][*s as usize];
        for mu in mus.iter().filter(|m| m.degree() <= cofdeg) {
            cols.push(-&p.mul_monomial(mu));
            labels.push((*i, *s, mu.clone()));
        }
    }
    for m in ansatz {
        cols.push(DiffPoly::monomial(m.mul(mult)));
    }
    LinearSystem { system: assemble(&cols), cofactor_columns: labels, ansatz: ansatz.to_vec() }
}

/// Solves a joint system; `None` when no nonzero resultant part exists.
pub fn solve_linear_system(ls: &LinearSystem, backend: Backend) -> Option<JointSolution> {
    let r = rref(&ls.system, backend);
    let c0 = ls.c0();
    let free: Vec<usize> = r.free_columns().into_iter().filter(|c| *c >= c0).collect();
    let first = *free.first()?;
    let v = r.basis_vector(first);
    let sr_raw = DiffPoly::from_terms(v.iter().filter(|(c, _)| *c >= c0).map(|(c, x)| (x.clone(), ls.ansatz[c - c0].clone())));
    let (sr, factor) = sr_raw.primitive();
    let mut cofactors: BTreeMap<(usize, u32), DiffPoly> = BTreeMap::new();
    for (c, x) in v.iter().filter(|(c, _)| *c < c0) {
        let (i, s, mu) = &ls.cofactor_columns[*c];
        cofactors.entry((*i, *s)).or_default().add_term(x * &factor, mu.clone());
    }
    cofactors.retain(|_, p| !p.is_zero());
    Some(JointSolution { sr, cofactors, projection_dim: free.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::parse_poly;
    use crate::system::DiffSystem;

    #[test]
    fn substitution_finds_determinant() {
        let sys = DiffSystem::from_strs(2, &["y1'', y1''', y2'''"; 3]).unwrap();
        let ctx = Context::new(&sys, &[0, 1, 2]);
        let h = vec![Some(0); 3];
        let pr = Prolongation::new(&ctx, &h);
        let comps = super::super::grading::ansatz_components(&ctx, &h, 3);
        let mut found = Vec::new();
        for (_, ms) in &comps {
            found.extend(substitution_kernel(&pr, ms, Backend::Modular).0);
        }
        assert_eq!(found.len(), 1);
        let det = parse_poly(
            "u0_0*u1_1*u2_2 - u0_0*u1_2*u2_1 - u0_1*u1_0*u2_2 + u0_1*u1_2*u2_0 + u0_2*u1_0*u2_1 - u0_2*u1_1*u2_0",
        )
        .unwrap();
        let (a, _) = found[0].primitive();
        let (b, _) = det.primitive();
        assert_eq!(a, b);
    }

    #[test]
    fn joint_system_small() {
        // n = 1, P_i = u_i0 + u_i1 y1: the resultant is u00 u11 − u01 u10.
        let sys = DiffSystem::from_strs(1, &["1, y1"; 2]).unwrap();
        let ctx = Context::new(&sys, &[0, 1]);
        let h = vec![Some(0); 2];
        let pr = Prolongation::new(&ctx, &h);
        let sr = parse_poly("u0_0*u1_1 - u0_1*u1_0").unwrap();
        let g = ctx.grade(sr.leading().unwrap().0);
        let comps = super::super::grading::ansatz_components(&ctx, &h, 2);
        let ms = &comps.iter().find(|(cg, _)| *cg == g).unwrap().1;
        let mult = Monomial::one();
        let cands = cofactor_candidates(&ctx, &h, &g, &[2, 2]);
        let ls = build_linear_system(&pr, &cands, 0, &mult, ms);
        assert!(solve_linear_system(&ls, Backend::Modular).is_none());
        let ls = build_linear_system(&pr, &cands, 1, &mult, ms);
        let sol = solve_linear_system(&ls, Backend::FractionFree).unwrap();
        assert_eq!(sol.projection_dim, 1);
        assert_eq!(sol.sr.primitive().0, sr.primitive().0);
        let mut rhs = DiffPoly::zero();
        for ((i, s), hcof) in &sol.cofactors {
            rhs = &rhs + &(hcof * &pr.polys[*i][*s as usize]);
        }
        assert_eq!(rhs, sol.sr);
    }
}
