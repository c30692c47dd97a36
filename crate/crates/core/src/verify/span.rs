//! Integer lattice membership of the coordinate vectors and solution recovery.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::diffpoly::{DerivVar, DiffIndex, DiffPoly, Monomial, Rational};
use crate::system::DiffSystem;

use super::series::{series_eval, Series, SeriesPoint};
use super::{margin, VerifyError};

/// A diagonalization `U A V = D` by unimodular `U`, `V`.
#[derive(Debug, Clone)]
pub struct Diagonalization {
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub diag: Vec<BigInt>,
}

/// Smith normal form of an `m × k` integer matrix, with transforms.
pub fn smith(a: &[Vec<i64>]) -> Diagonalization {
    let m = a.len();
    let k = a.first().map_or(0, |r| r.len());
    let mut d: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|x| BigInt::from(*x)).collect()).collect();
    let mut u: Vec<Vec<BigInt>> = (0..m).map(|i| (0..m).map(|j| BigInt::from((i == j) as i64)).collect()).collect();
    let mut v: Vec<Vec<BigInt>> = (0..k).map(|i| (0..k).map(|j| BigInt::from((i == j) as i64)).collect()).collect();
    let mut diag = Vec::new();
    for t in 0..m.min(k) {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for r in t..m {
                for c in t..k {
                    if !d[r][c].is_zero() && best.is_none_or(|(br, bc)| d[r][c].abs() < d[br][bc].abs()) {
                        best = Some((r, c));
                    }
                }
            }
            let Some((br, bc)) = best else { return Diagonalization { u, v, diag } };
            d.swap(t, br);
            u.swap(t, br);
            for row in d.iter_mut() {
                row.swap(t, bc);
            }
            for row in v.iter_mut() {
                row.swap(t, bc);
            }
            let p = d[t][t].clone();
            let mut clean = true;
            for r in t + 1..m {
                let q = d[r][t].div_floor(&p);
                if !q.is_zero() {
                    for c in 0..k {
                        let x = &d[t][c] * &q;
                        d[r][c] -= x;
                    }
                    for c in 0..m {
                        let x = &u[t][c] * &q;
                        u[r][c] -= x;
                    }
                }
                clean &= d[r][t].is_zero();
            }
            for c in t + 1..k {
                let q = d[t][c].div_floor(&p);
                if !q.is_zero() {
                    for r in 0..m {
                        let x = &d[r][t] * &q;
                        d[r][c] -= x;
                    }
                    for r in 0..k {
                        let x = &v[r][t] * &q;
                        v[r][c] -= x;
                    }
                }
                clean &= d[t][c].is_zero();
            }
            if clean {
                break;
            }
        }
        diag.push(d[t][t].clone());
    }
    Diagonalization { u, v, diag }
}

/// An integer `x` with `A x = b`, if one exists.
pub fn lattice_solve(a: &[Vec<i64>], b: &[i64]) -> Option<Vec<BigInt>> {
    let k = a.first().map_or(0, |r| r.len());
    let sd = smith(a);
    let c: Vec<BigInt> = sd.u.iter().map(|row| row.iter().zip(b).map(|(x, y)| x * BigInt::from(*y)).sum()).collect();
    let mut s = vec![BigInt::zero(); k];
    for (i, ci) in c.iter().enumerate() {
        match sd.diag.get(i) {
            Some(di) => {
                let (q, r) = ci.div_rem(di);
                if !r.is_zero() {
                    return None;
                }
                s[i] = q;
            }
            None if !ci.is_zero() => return None,
            None => {}
        }
    }
    Some(sd.v.iter().map(|row| row.iter().zip(&s).map(|(x, y)| x * y).sum()).collect())
}

/// Whether `e_j` lies in the integer span of the exponent differences, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanResult {
    pub j: usize,
    pub in_span: bool,
    /// `t_{jik}` keyed by `(i, k)` with `k ≥ 1`, nonzero entries only.
    pub witness: Option<Vec<((usize, usize), BigInt)>>,
}

/// Columns `α_{ik} − α_{i0}` over the coordinates `y_j^{(l)}`, `l ≤ max order`.
pub fn exponent_differences(sys: &DiffSystem) -> (Vec<Vec<i64>>, Vec<(usize, usize)>, u32) {
    let n = sys.n();
    let o = sys.supports().iter().flatten().filter_map(|m| m.max_order_where(|v| v.is_y())).max().unwrap_or(0);
    let rows = n * (o as usize + 1);
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for i in 0..sys.num_polys() {
        for (k, q) in sys.quotients(i).iter().enumerate() {
            let mut col = vec![0i64; rows];
            for (v, e) in q.exps() {
                if let DiffIndex::Y { j } = v.base {
                    col[(j as usize - 1) * (o as usize + 1) + v.order as usize] = *e;
                }
            }
            cols.push(col);
            labels.push((i, k + 1));
        }
    }
    let a = (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    (a, labels, o)
}

pub fn span_check(sys: &DiffSystem) -> Vec<SpanResult> {
    let (a, labels, o) = exponent_differences(sys);
    (1..=sys.n())
        .map(|j| {
            let mut b = vec![0i64; a.len()];
            b[(j - 1) * (o as usize + 1)] = 1;
            match lattice_solve(&a, &b) {
                Some(x) => {
                    let w = labels.iter().copied().zip(x).filter(|(_, t)| !t.is_zero()).collect();
                    SpanResult { j, in_span: true, witness: Some(w) }
                }
                None => SpanResult { j, in_span: false, witness: None },
            }
        })
        .collect()
}

/// Why a recovery was refused.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Refusal {
    #[error("e_{j} is not in the integer span of the exponent differences")]
    SpanCondition { j: usize },
    #[error("the resultant does not involve the coefficients of P_{i}")]
    BlockAbsent { i: usize },
    #[error("the resultant does not vanish at the given coefficients (first nonzero coefficient t^{valuation})")]
    NotOnResultant { valuation: usize },
    #[error("the partial derivative of the resultant in u_{i}{k} of top order vanishes")]
    VanishingPartial { i: usize, k: usize },
    #[error("the partial derivative of the resultant in u_{i}{k} of top order is not a unit series")]
    NonUnitPartial { i: usize, k: usize },
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone)]
pub struct Recovery {
    /// Recovered `ȳ_j`.
    pub y: Vec<Series>,
    /// `M_{0k}(ξ)/M_{00}(ξ)` for `k ≥ 1`.
    pub ratios: Vec<Series>,
    /// Precision to which the results are exact.
    pub precision: usize,
}

/// Recovers the unique non-polynomial solution of a specialization
/// from the partial derivatives of the resultant. `coeffs` holds a series for every `u_{ik}`.
pub fn recover_solution(sr: &DiffPoly, sys: &DiffSystem, coeffs: &SeriesPoint) -> Result<Recovery, Refusal> {
    let spans = span_check(sys);
    if let Some(bad) = spans.iter().find(|s| !s.in_span) {
        return Err(Refusal::SpanCondition { j: bad.j });
    }
    let np = sys.num_polys();
    let h: Vec<u32> = (0..np).map(|i| sr.order_in_block(i as u32).ok_or(Refusal::BlockAbsent { i })).collect::<Result<_, _>>()?;
    let k_in = coeffs.values.values().map(|s| s.precision()).min().unwrap_or(0);
    let valid = k_in.saturating_sub(margin(sr, sys));
    let at = series_eval(sr, coeffs)?;
    if let Some(val) = at.truncate(valid).valuation() {
        return Err(Refusal::NotOnResultant { valuation: val });
    }
    let mut partials: Vec<Vec<Series>> = Vec::with_capacity(np);
    for (i, hi) in h.iter().enumerate() {
        let mut row = Vec::new();
        for k in 0..sys.support(i).len() {
            let d = sr.partial(&DerivVar::u(i as u32, k as u32, *hi));
            let s = series_eval(&d, coeffs)?;
            if s.truncate(valid).valuation().is_none() {
                return Err(Refusal::VanishingPartial { i, k });
            }
            row.push(s);
        }
        partials.push(row);
    }
    let ratio = |i: usize, k: usize| -> Result<Series, Refusal> {
        let den = partials[i][0].recip().ok_or(Refusal::NonUnitPartial { i, k: 0 })?;
        Ok(partials[i][k].mul(&den))
    };
    let mut y = Vec::new();
    for s in &spans {
        let mut acc: Option<Series> = None;
        for ((i, k), t) in s.witness.as_ref().unwrap() {
            let r = ratio(*i, *k)?;
            let t = t.to_i64().expect("small witness");
            let p = r.pow(t).ok_or(Refusal::NonUnitPartial { i: *i, k: *k })?;
            acc = Some(match acc {
                None => p,
                Some(a) => a.mul(&p),
            });
        }
        y.push(acc.unwrap_or_else(|| Series::constant(Rational::one(), valid)));
    }
    let ratios = (1..sys.support(0).len()).map(|k| ratio(0, k)).collect::<Result<Vec<_>, _>>()?;
    let precision = y.iter().chain(&ratios).map(|s| s.precision()).min().unwrap_or(valid).min(valid);
    Ok(Recovery { y, ratios, precision })
}

/// `P̄_i(ȳ)` for every polynomial of the specialized system.
pub fn specialized_residuals(sys: &DiffSystem, coeffs: &SeriesPoint, y: &[Series]) -> Result<Vec<Series>, VerifyError> {
    let mut pt = coeffs.clone();
    for (j, s) in y.iter().enumerate() {
        pt.set(DiffIndex::Y { j: j as u32 + 1 }, s.clone());
    }
    (0..sys.num_polys()).map(|i| series_eval(&sys.generic_poly(i), &pt)).collect()
}

/// Coefficients on the resultant: `u_{i0} = −Σ_k u_{ik} M_{ik}(ȳ)/M_{i0}(ȳ)`.
pub fn coefficients_with_root(sys: &DiffSystem, free: &SeriesPoint, y: &[Series]) -> Result<SeriesPoint, VerifyError> {
    let mut pt = free.clone();
    for (j, s) in y.iter().enumerate() {
        pt.set(DiffIndex::Y { j: j as u32 + 1 }, s.clone());
    }
    let mut out = free.clone();
    for i in 0..sys.num_polys() {
        let sup = sys.support(i);
        let inv = sup[0].inv();
        let z = DiffPoly::from_terms(sup.iter().enumerate().skip(1).map(|(k, m)| {
            (-Rational::one(), Monomial::var(DiffSystem::coeff_var(i, k)).mul(m).mul(&inv))
        }));
        out.set(DiffIndex::U { i: i as u32, k: 0 }, series_eval(&z, &pt)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(a: &[Vec<i64>], x: &[BigInt], b: &[i64]) -> bool {
        a.iter().zip(b).all(|(row, bi)| row.iter().zip(x).map(|(p, q)| BigInt::from(*p) * q).sum::<BigInt>() == BigInt::from(*bi))
    }

    fn brute(a: &[Vec<i64>], b: &[i64], bound: i64) -> bool {
        let k = a[0].len();
        let mut x = vec![-bound; k];
        loop {
            let xb: Vec<BigInt> = x.iter().map(|v| BigInt::from(*v)).collect();
            if check(a, &xb, b) {
                return true;
            }
            let mut p = 0;
            loop {
                if p == k {
                    return false;
                }
                x[p] += 1;
                if x[p] <= bound {
                    break;
                }
                x[p] = -bound;
                p += 1;
            }
        }
    }

    #[test]
    fn lattice_example_fails_span() {
        let sys = DiffSystem::from_strs(2, &["1, y1*y2", "1, y1*y2'", "1, y1'*y2'"]).unwrap();
        let r = span_check(&sys);
        assert!(!r[0].in_span);
    }

    #[test]
    fn unit_supports_pass_span() {
        let sys = DiffSystem::from_strs(2, &["1, y1, y2", "1, y1', y2", "1, y1, y2'"]).unwrap();
        for r in span_check(&sys) {
            assert!(r.in_span);
        }
    }

    #[test]
    fn agrees_with_bounded_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..300 {
            let rows = rng.gen_range(1..=3);
            let cols = rng.gen_range(1..=4);
            let a: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-2..=2)).collect()).collect();
            let mut b = vec![0; rows];
            b[rng.gen_range(0..rows)] = 1;
            let snf = lattice_solve(&a, &b);
            if let Some(x) = &snf {
                assert!(check(&a, x, &b), "{a:?} {x:?}");
            }
            if brute(&a, &b, 3) {
                assert!(snf.is_some(), "{a:?}");
            }
        }
    }

    #[test]
    fn recovery_on_linear_pair() {
        let sys = DiffSystem::from_strs(1, &["1, y1"; 2]).unwrap();
        let sr = crate::diffpoly::parse_poly("u0_0*u1_1 - u0_1*u1_0").unwrap();
        let y = Series::from_ints(&[2, -1, 3, 0, 5, 1, 1, 2]);
        let mut free = SeriesPoint::new();
        free.set(DiffIndex::U { i: 0, k: 1 }, Series::from_ints(&[1, 2, 0, 1, 1, 0, 3, 1]));
        free.set(DiffIndex::U { i: 1, k: 1 }, Series::from_ints(&[-3, 1, 1, 0, 2, 2, 0, 1]));
        let v = coefficients_with_root(&sys, &free, std::slice::from_ref(&y)).unwrap();
        let rec = recover_solution(&sr, &sys, &v).unwrap();
        assert_eq!(rec.y[0].truncate(rec.precision), y.truncate(rec.precision));
        for r in specialized_residuals(&sys, &v, &rec.y).unwrap() {
            assert!(r.valuation().is_none());
        }
        let mut bad = v.clone();
        bad.set(DiffIndex::U { i: 1, k: 1 }, Series::from_ints(&[0; 8]));
        assert!(matches!(recover_solution(&sr, &sys, &bad), Err(Refusal::NotOnResultant { .. }) | Err(Refusal::VanishingPartial { .. })));
    }

    #[test]
    fn recovery_refuses_span_failure() {
        let sys = DiffSystem::from_strs(2, &["1, y1*y2", "1, y1*y2'", "1, y1'*y2'"]).unwrap();
        let sr = crate::diffpoly::parse_poly("u0_0").unwrap();
        assert_eq!(recover_solution(&sr, &sys, &SeriesPoint::new()).unwrap_err(), Refusal::SpanCondition { j: 1 });
    }

    #[test]
    fn vanishing_partial_is_refused() {
        let sys = DiffSystem::from_strs(1, &["1, y1"; 2]).unwrap();
        let sr = crate::diffpoly::parse_poly("u0_0*u1_1 - u0_1*u1_0").unwrap();
        let mut v = SeriesPoint::new();
        // u11 = 0 makes ∂SR/∂u00 vanish; u10 = 0 keeps SR(v) = 0.
        v.set(DiffIndex::U { i: 0, k: 0 }, Series::from_ints(&[1, 1, 0, 0, 0, 0, 0, 0]));
        v.set(DiffIndex::U { i: 0, k: 1 }, Series::from_ints(&[1, 0, 2, 0, 0, 0, 0, 0]));
        v.set(DiffIndex::U { i: 1, k: 0 }, Series::from_ints(&[0; 8]));
        v.set(DiffIndex::U { i: 1, k: 1 }, Series::from_ints(&[0; 8]));
        assert_eq!(recover_solution(&sr, &sys, &v).unwrap_err(), Refusal::VanishingPartial { i: 0, k: 0 });
    }
}
