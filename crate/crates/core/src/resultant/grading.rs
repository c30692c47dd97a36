//! Multigrading of the prolonged system and enumeration of graded monomials.
//!
//! Three gradings make every `(P_i^N)^{(t)}` homogeneous:
//! * block degree: `u_{ik}^{(l)}` has weight `1` in block `i`;
//! * one weight per `y_j`: `y_j^{(l)}` has weight `1`, `u_{ik}^{(l)}` has weight `−deg_{y_j} N_{ik}`;
//! * order weight: `y_j^{(l)}` has weight `l`, `u_{ik}^{(l)}` has weight `l − ow(N_{ik})`.
//!
//! `(P_i^N)^{(t)}` then has grade `(e_i, 0, t)`, so the resultant and every
//! cofactor may be taken homogeneous, which splits the linear systems into
//! small independent pieces.

use itertools::Itertools;

use crate::diffpoly::{DerivVar, DiffIndex, DiffPoly, Monomial, Rational};
use crate::system::{DiffSystem, NormData};

/// Order weight first so components sort by it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grade {
    pub ow: i64,
    pub blocks: Vec<i64>,
    pub w: Vec<i64>,
}

impl Grade {
    pub fn zero(np: usize, n: usize) -> Self {
        Grade { ow: 0, blocks: vec![0; np], w: vec![0; n] }
    }

    pub fn add(&self, o: &Grade) -> Grade {
        Grade {
            ow: self.ow + o.ow,
            blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a + b).collect(),
            w: self.w.iter().zip(&o.w).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Grade) -> Grade {
        Grade {
            ow: self.ow - o.ow,
            blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a - b).collect(),
            w: self.w.iter().zip(&o.w).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Per-system data shared by the search: norm forms and grading weights.
#[derive(Debug, Clone)]
pub struct Context {
    pub n: usize,
    pub subset: Vec<usize>,
    pub norms: Vec<NormData>,
    /// `e_{ij}` for every polynomial.
    pub orders: Vec<Vec<Option<u32>>>,
    /// `deg_{y_j}(N_{ik})`, indexed `[i][k][j-1]`.
    n_deg: Vec<Vec<Vec<i64>>>,
    n_ow: Vec<Vec<i64>>,
}

impl Context {
    pub fn new(sys: &DiffSystem, subset: &[usize]) -> Self {
        let n = sys.n();
        let norms: Vec<NormData> = (0..sys.num_polys()).map(|i| sys.norm(i)).collect();
        let orders = (0..sys.num_polys()).map(|i| (1..=n).map(|j| sys.order_in_y(i, j)).collect()).collect();
        let n_deg = norms.iter().map(|nd| nd.monomials.iter().map(|m| (1..=n as u32).map(|j| m.y_degree(j)).collect()).collect()).collect();
        let n_ow = norms.iter().map(|nd| nd.monomials.iter().map(|m| m.order_weight()).collect()).collect();
        Context { n, subset: subset.to_vec(), norms, orders, n_deg, n_ow }
    }

    pub fn num_polys(&self) -> usize {
        self.norms.len()
    }

    pub fn in_subset(&self, i: usize) -> bool {
        self.subset.contains(&i)
    }

    /// `N_{i0}`, the multiplier base of block `i`.
    pub fn n0(&self, i: usize) -> &Monomial {
        &self.norms[i].monomials[0]
    }

    /// Adds `e` times the grade of `v` to `g`.
    pub fn add_var_grade(&self, v: &DerivVar, e: i64, g: &mut Grade) {
        match v.base {
            DiffIndex::Y { j } => {
                g.w[j as usize - 1] += e;
                g.ow += e * v.order as i64;
            }
            DiffIndex::U { i, k } => {
                let (i, k) = (i as usize, k as usize);
                g.blocks[i] += e;
                for (j, dj) in self.n_deg[i][k].iter().enumerate() {
                    g.w[j] -= e * dj;
                }
                g.ow += e * (v.order as i64 - self.n_ow[i][k]);
            }
        }
    }

    pub fn grade(&self, m: &Monomial) -> Grade {
        let mut g = Grade::zero(self.num_polys(), self.n);
        for (v, e) in m.exps() {
            self.add_var_grade(v, *e, &mut g);
        }
        g
    }

    /// Grade of `(P_i^N)^{(t)}`.
    pub fn poly_grade(&self, i: usize, t: u32) -> Grade {
        let mut g = Grade::zero(self.num_polys(), self.n);
        g.blocks[i] = 1;
        g.ow = t as i64;
        g
    }

    /// Coefficient variables `u_{ik}^{(l)}` with `l ≤ h_i`.
    pub fn u_vars(&self, i: usize, h_i: u32) -> Vec<DerivVar> {
        let mut out = Vec::new();
        for k in 0..self.norms[i].monomials.len() {
            for l in 0..=h_i {
                out.push(DerivVar::u(i as u32, k as u32, l));
            }
        }
        out.sort();
        out
    }

    /// Highest order of `y_j` in the prolongation `{(P_i^N)^{(t)} : t ≤ h_i}`.
    pub fn y_limits(&self, h: &[Option<u32>]) -> Vec<Option<u32>> {
        (0..self.n)
            .map(|j| {
                self.subset.iter().filter_map(|&i| match (self.orders[i][j], h[i]) {
                    (Some(e), Some(hi)) => Some(e + hi),
                    _ => None,
                })
                .max()
            })
            .collect()
    }

    pub fn y_vars(&self, h: &[Option<u32>]) -> Vec<DerivVar> {
        let lim = self.y_limits(h);
        let mut out = Vec::new();
        for (j, l) in lim.iter().enumerate() {
            if let Some(l) = l {
                for o in 0..=*l {
                    out.push(DerivVar::y(j as u32 + 1, o));
                }
            }
        }
        out
    }
}

/// Derivatives of the norm forms, of `ζ_i = −Σ_{k≥1} u_{ik} N_{ik}/N_{i0}` and of `1/N_{i0}`.
#[derive(Debug, Clone)]
pub struct Prolongation {
    pub h: Vec<Option<u32>>,
    /// `(P_i^N)^{(t)}` for `t ≤ h_i`, empty outside the subset.
    pub polys: Vec<Vec<DiffPoly>>,
    pub zeta: Vec<Vec<DiffPoly>>,
    pub inv_n0: Vec<Vec<DiffPoly>>,
    pub yvars: Vec<DerivVar>,
    pub uvars: Vec<DerivVar>,
}

impl Prolongation {
    pub fn new(ctx: &Context, h: &[Option<u32>]) -> Self {
        let np = ctx.num_polys();
        let mut polys = vec![Vec::new(); np];
        let mut zeta = vec![Vec::new(); np];
        let mut inv_n0 = vec![Vec::new(); np];
        let mut uvars = Vec::new();
        for &i in &ctx.subset {
            let Some(hi) = h[i] else { continue };
            let nd = &ctx.norms[i];
            let n0_inv = nd.monomials[0].inv();
            let mut z = DiffPoly::zero();
            for (k, m) in nd.monomials.iter().enumerate().skip(1) {
                let t = Monomial::var(DiffSystem::coeff_var(i, k)).mul(m).mul(&n0_inv);
                z.add_term(-Rational::from_integer(1.into()), t);
            }
            let mut p = nd.poly.clone();
            let mut q = DiffPoly::monomial(n0_inv);
            for _ in 0..=hi {
                let (np_, nz, nq) = (p.differentiate(), z.differentiate(), q.differentiate());
                polys[i].push(std::mem::replace(&mut p, np_));
                zeta[i].push(std::mem::replace(&mut z, nz));
                inv_n0[i].push(std::mem::replace(&mut q, nq));
            }
            uvars.extend(ctx.u_vars(i, hi));
        }
        Prolongation { h: h.to_vec(), polys, zeta, inv_n0, yvars: ctx.y_vars(h), uvars }
    }

    pub fn count(&self) -> usize {
        self.polys.iter().map(|p| p.len()).sum()
    }
}

/// Number of monomials of degree `d` with every subset block of degree ≥ 1.
pub fn ansatz_size(block_vars: &[usize], d: u64) -> u128 {
    let mut total = 0u128;
    for comp in compositions(d as usize, block_vars.len()) {
        let mut prod = 1u128;
        for (nv, a) in block_vars.iter().zip(&comp) {
            prod = prod.saturating_mul(multichoose(*nv, *a));
        }
        total = total.saturating_add(prod);
    }
    total
}

fn multichoose(n: usize, k: usize) -> u128 {
    if n == 0 {
        return u128::from(k == 0);
    }
    // C(n + k − 1, k)
    let mut acc = 1u128;
    for t in 0..k {
        acc = acc.saturating_mul((n + t) as u128) / (t as u128 + 1);
    }
    acc
}

/// Compositions of `d` into `parts` positive parts.
fn compositions(d: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    if d < parts {
        return vec![];
    }
    (0..d - parts + 1)
        .map(|x| x + 1)
        .flat_map(|first| {
            compositions(d - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn multisets(vars: &[DerivVar], k: usize) -> Vec<Monomial> {
    vars.iter().copied().combinations_with_replacement(k).map(|vs| Monomial::from_pairs(vs.into_iter().map(|v| (v, 1)))).collect()
}

/// Degree-`d` coefficient monomials, every subset block present, grouped by grade
/// in increasing grade order; monomials within a component in decreasing term order.
pub fn ansatz_components(ctx: &Context, h: &[Option<u32>], d: u64) -> Vec<(Grade, Vec<Monomial>)> {
    let blocks: Vec<usize> = ctx.subset.iter().copied().filter(|&i| h[i].is_some()).collect();
    let vars: Vec<Vec<DerivVar>> = blocks.iter().map(|&i| ctx.u_vars(i, h[i].unwrap())).collect();
    let mut groups: std::collections::BTreeMap<Grade, Vec<Monomial>> = Default::default();
    for comp in compositions(d as usize, blocks.len()) {
        let parts: Vec<Vec<Monomial>> = vars.iter().zip(&comp).map(|(v, a)| multisets(v, *a)).collect();
        for choice in parts.iter().map(|p| p.iter()).multi_cartesian_product() {
            let m = choice.into_iter().fold(Monomial::one(), |acc, x| acc.mul(x));
            groups.entry(ctx.grade(&m)).or_default().push(m);
        }
    }
    groups
        .into_iter()
        .map(|(g, mut ms)| {
            ms.sort_by(|a, b| b.cmp(a));
            (g, ms)
        })
        .collect()
}

/// Multisets of orders in `0..=limit` of size `c` summing to `s`, nondecreasing.
fn order_multisets(c: usize, s: i64, limit: u32, min: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if c == 0 {
        if s == 0 {
            out.push(acc.clone());
        }
        return;
    }
    for o in min..=limit {
        let o64 = o as i64;
        // the remaining c−1 entries are each ≥ o
        if o64 * c as i64 > s {
            break;
        }
        if (limit as i64) * (c as i64 - 1) + o64 < s {
            continue;
        }
        acc.push(o);
        order_multisets(c - 1, s - o64, limit, o, acc, out);
        acc.pop();
    }
}

/// Monomials in the prolongation variables of the given grade and total degree `≤ max_deg`.
pub fn graded_monomials(ctx: &Context, h: &[Option<u32>], target: &Grade, max_deg: i64) -> Vec<Monomial> {
    let np = ctx.num_polys();
    let mut u_parts: Vec<Vec<Monomial>> = Vec::new();
    for i in 0..np {
        let b = target.blocks[i];
        if b < 0 {
            return Vec::new();
        }
        if b == 0 {
            continue;
        }
        match (ctx.in_subset(i), h[i]) {
            (true, Some(hi)) => u_parts.push(multisets(&ctx.u_vars(i, hi), b as usize)),
            _ => return Vec::new(),
        }
    }
    let limits = ctx.y_limits(h);
    let mut out = Vec::new();
    let combos: Box<dyn Iterator<Item = Vec<&Monomial>>> =
        if u_parts.is_empty() { Box::new(std::iter::once(Vec::new())) } else { Box::new(u_parts.iter().map(|p| p.iter()).multi_cartesian_product()) };
    for choice in combos {
        let u = choice.into_iter().fold(Monomial::one(), |acc, x| acc.mul(x));
        let rest = target.sub(&ctx.grade(&u));
        if rest.w.iter().any(|x| *x < 0) || rest.ow < 0 {
            continue;
        }
        let ydeg: i64 = rest.w.iter().sum();
        if u.degree() + ydeg > max_deg {
            continue;
        }
        let mut feasible = true;
        for (j, c) in rest.w.iter().enumerate() {
            if *c > 0 && limits[j].is_none() {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let mut ys: Vec<Monomial> = vec![Monomial::one()];
        // distribute the order weight across the variables
        fn rec(j: usize, rest: &Grade, limits: &[Option<u32>], ow_left: i64, cur: Monomial, out: &mut Vec<Monomial>) {
            if j == rest.w.len() {
                if ow_left == 0 {
                    out.push(cur);
                }
                return;
            }
            let c = rest.w[j] as usize;
            if c == 0 {
                rec(j + 1, rest, limits, ow_left, cur, out);
                return;
            }
            let lim = limits[j].unwrap();
            let max_here = (lim as i64 * c as i64).min(ow_left);
            for s in 0..=max_here {
                let mut sets = Vec::new();
                order_multisets(c, s, lim, 0, &mut Vec::new(), &mut sets);
                for set in sets {
                    let m = Monomial::from_pairs(set.into_iter().map(|o| (DerivVar::y(j as u32 + 1, o), 1)));
                    rec(j + 1, rest, limits, ow_left - s, cur.mul(&m), out);
                }
            }
        }
        ys.clear();
        rec(0, &rest, &limits, rest.ow, Monomial::one(), &mut ys);
        out.extend(ys.into_iter().map(|y| y.mul(&u)));
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::parse_poly;

    fn lattice_system() -> DiffSystem {
        DiffSystem::from_strs(2, &["1, y1*y2", "1, y1*y2'", "1, y1'*y2'"]).unwrap()
    }

    #[test]
    fn prolongation_is_homogeneous() {
        let sys = lattice_system();
        let ctx = Context::new(&sys, &[0, 1, 2]);
        let h = vec![Some(2), Some(1), Some(0)];
        let pr = Prolongation::new(&ctx, &h);
        assert_eq!(pr.count(), 3 + 2 + 1);
        for &i in &ctx.subset {
            for (t, p) in pr.polys[i].iter().enumerate() {
                for (m, _) in p.terms() {
                    assert_eq!(ctx.grade(m), ctx.poly_grade(i, t as u32));
                }
            }
        }
    }

    #[test]
    fn lattice_resultant_is_homogeneous() {
        let sys = lattice_system();
        let ctx = Context::new(&sys, &[0, 1, 2]);
        let sr = parse_poly("u1_0*u0_1*u2_1*u1_1*u0_0' - u1_0*u0_0*u1_1*u2_1*u0_1' - u0_1^2*u2_1*u1_0^2 - u0_1*u0_0*u1_1^2*u2_0").unwrap();
        let grades: Vec<Grade> = sr.terms().map(|(m, _)| ctx.grade(m)).collect();
        assert!(grades.iter().all(|g| *g == grades[0]));
        let comps = ansatz_components(&ctx, &[Some(1), Some(0), Some(0)], 5);
        let (_, ms) = comps.iter().find(|(g, _)| *g == grades[0]).unwrap();
        for (m, _) in sr.terms() {
            assert!(ms.contains(m));
        }
        let total: usize = comps.iter().map(|(_, m)| m.len()).sum();
        assert_eq!(total as u128, ansatz_size(&[4, 2, 2], 5));
    }

    #[test]
    fn graded_monomials_have_the_target_grade() {
        let sys = DiffSystem::from_strs(1, &["y1, y1', y1^2", "y1, y1', y1^2"]).unwrap();
        let ctx = Context::new(&sys, &[0, 1]);
        let h = vec![Some(1), Some(1)];
        let target = ctx.grade(&crate::diffpoly::parse_monomial("u0_0*u0_1*u1_2*y1^3*y1'^2*y1''").unwrap());
        let ms = graded_monomials(&ctx, &h, &target, 20);
        assert!(!ms.is_empty());
        for m in &ms {
            assert_eq!(ctx.grade(m), target);
        }
        assert!(ms.contains(&crate::diffpoly::parse_monomial("u0_0*u0_1*u1_2*y1^3*y1'^2*y1''").unwrap()));
    }
}
