//! Order matrices, Jacobi numbers, and order/degree bounds for the resultant.
//!
//! Orders live in `Z ∪ {−∞}`, represented as `Option<i64>` with `None = −∞`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use thiserror::Error;

use crate::essential::{is_essential, rank_essential_subset, EssentialError, Mode};
use crate::system::DiffSystem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("order bounds need an essential system")]
    NotEssential,
    #[error(transparent)]
    Essential(#[from] EssentialError),
}

pub type ExtOrder = Option<i64>;

/// The `(n+1) × n` matrix `e_{ij} = ord(P_i^N, y_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderMatrix {
    pub entries: Vec<Vec<ExtOrder>>,
}

impl OrderMatrix {
    pub fn from_system(sys: &DiffSystem) -> Self {
        let entries = (0..sys.num_polys())
            .map(|i| (1..=sys.n()).map(|j| sys.order_in_y(i, j).map(i64::from)).collect())
            .collect();
        OrderMatrix { entries }
    }

    /// Rows `rows` of the matrix, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> OrderMatrix {
        OrderMatrix { entries: rows.iter().map(|&i| self.entries[i].clone()).collect() }
    }

    pub fn without_row(&self, i: usize) -> Vec<Vec<ExtOrder>> {
        self.entries.iter().enumerate().filter(|(r, _)| *r != i).map(|(_, row)| row.clone()).collect()
    }
}

/// Maximal sum over partial permutations of size `min(m, n)` avoiding `−∞` entries.
pub fn jacobi_number(a: &[Vec<ExtOrder>]) -> ExtOrder {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 {
        return Some(0);
    }
    // kuhn_munkres wants rows ≤ columns.
    let t: Vec<Vec<ExtOrder>> = if m <= n { a.to_vec() } else { (0..n).map(|c| (0..m).map(|r| a[r][c]).collect()).collect() };
    let r = t.len();
    let w = t.iter().flatten().flatten().map(|x| x.abs()).max().unwrap_or(0) + 1;
    let big = (2 * r as i64 + 1) * w;
    let weights = Matrix::from_rows(t.iter().map(|row| row.iter().map(|e| e.unwrap_or(-big)).collect::<Vec<i64>>())).expect("rectangular");
    let (_, assign) = kuhn_munkres(&weights);
    let mut total = 0i64;
    for (row, &col) in assign.iter().enumerate() {
        total += t[row][col]?;
    }
    Some(total)
}

/// `J_i`, the Jacobi number of the matrix with row `i` deleted, for each `i`.
pub fn deleted_row_jacobi(a: &OrderMatrix) -> Vec<ExtOrder> {
    (0..a.entries.len()).map(|i| jacobi_number(&a.without_row(i))).collect()
}

/// Effective orders `e_i = max_j e_{ij}`, with `0` for rows without finite entries.
fn row_orders(a: &OrderMatrix) -> Vec<i64> {
    a.entries.iter().map(|row| row.iter().flatten().copied().max().unwrap_or(0)).collect()
}

/// The bounds `e − e_i` with `e = Σ e_i`.
pub fn total_order_bounds(a: &OrderMatrix) -> Vec<ExtOrder> {
    let e_i = row_orders(a);
    let e: i64 = e_i.iter().sum();
    e_i.iter().map(|x| Some(e - x)).collect()
}

/// The bounds `L_i = e − e_i − Σ_j (o̲_j + ē_j)`.
pub fn l_bounds(a: &OrderMatrix, least_orders: &[i64]) -> Vec<ExtOrder> {
    let e_i = row_orders(a);
    let n = a.entries.first().map_or(0, |r| r.len());
    let mut gamma: i64 = least_orders.iter().sum();
    for j in 0..n {
        gamma += a.entries.iter().zip(&e_i).filter_map(|(row, ei)| row[j].map(|x| ei - x)).min().unwrap_or(0);
    }
    total_order_bounds(a).into_iter().map(|b| b.map(|x| x - gamma)).collect()
}

/// `o̲_j`, the least order at which `y_j` occurs in some `P_i^N` (0 if absent).
pub fn least_orders(sys: &DiffSystem) -> Vec<i64> {
    (1..=sys.n())
        .map(|j| (0..sys.num_polys()).filter_map(|i| sys.least_order_in_y(i, j)).min().map_or(0, i64::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub order_matrix: OrderMatrix,
    pub jacobi: Vec<ExtOrder>,
    /// `γ = Σ_j o̲_j`.
    pub gamma: i64,
    pub modified: Vec<ExtOrder>,
    pub alt_l: Vec<ExtOrder>,
    pub alt_e: Vec<ExtOrder>,
    pub rank_essential: Vec<usize>,
    /// `Jac(A_{T,î})` for `i ∈ T` when `T` is a proper subset.
    pub refined: Option<Vec<ExtOrder>>,
    /// Final bound on `ord(SR, u_i)`.
    pub bound: Vec<ExtOrder>,
}

pub fn order_bounds(sys: &DiffSystem) -> Result<BoundReport, BoundsError> {
    if !is_essential(sys, Mode::default())?.essential {
        return Err(BoundsError::NotEssential);
    }
    let t = rank_essential_subset(sys)?.subset;
    Ok(order_bounds_with_subset(sys, &t))
}

/// Bounds for a system whose rank-essential subset `t` is already known.
pub fn order_bounds_with_subset(sys: &DiffSystem, t: &[usize]) -> BoundReport {
    let a = OrderMatrix::from_system(sys);
    let jacobi = deleted_row_jacobi(&a);
    let lo = least_orders(sys);
    let gamma: i64 = lo.iter().sum();
    let modified: Vec<ExtOrder> = jacobi.iter().map(|j| j.map(|x| x - gamma)).collect();
    let np = sys.num_polys();
    let refined = (t.len() < np).then(|| {
        let at = a.select_rows(t);
        let mut out = vec![None; np];
        for (pos, &i) in t.iter().enumerate() {
            out[i] = jacobi_number(&at.without_row(pos));
        }
        out
    });
    let bound = (0..np)
        .map(|i| {
            if !t.contains(&i) {
                return None;
            }
            match &refined {
                Some(r) => match (modified[i], r[i]) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    _ => None,
                },
                None => modified[i],
            }
        })
        .collect();
    BoundReport {
        alt_l: l_bounds(&a, &lo),
        alt_e: total_order_bounds(&a),
        order_matrix: a,
        jacobi,
        gamma,
        modified,
        rank_essential: t.to_vec(),
        refined,
        bound,
    }
}

/// `Π (m_i + 1)^{h_i + 1}` over the polynomials with `h_i ≠ −∞`.
pub fn degree_bound(sys: &DiffSystem, h: &[Option<u32>]) -> BigUint {
    let m: Vec<i64> = (0..sys.num_polys()).map(|i| sys.y_degree(i)).collect();
    degree_bound_raw(&m, h)
}

pub fn degree_bound_raw(m: &[i64], h: &[Option<u32>]) -> BigUint {
    m.iter().zip(h).fold(BigUint::one(), |acc, (mi, hi)| match hi {
        Some(hi) => acc * BigUint::from((mi + 1) as u64).pow(hi + 1),
        None => acc,
    })
}

/// Cofactor degree bound `[m + 1 + Σ_i (h_i+1) deg N_{i0}]·d − m_i − 1`, per polynomial.
pub fn cofactor_degree_bound(sys: &DiffSystem, h: &[Option<u32>], d: u64) -> Vec<i64> {
    let m: Vec<i64> = (0..sys.num_polys()).map(|i| sys.y_degree(i)).collect();
    let n0: Vec<i64> = (0..sys.num_polys()).map(|i| sys.norm(i).monomials[0].degree()).collect();
    cofactor_degree_bound_raw(&m, &n0, h, d)
}

pub fn cofactor_degree_bound_raw(m: &[i64], n0_degrees: &[i64], h: &[Option<u32>], d: u64) -> Vec<i64> {
    let active = || h.iter().enumerate().filter_map(|(i, hi)| hi.map(|x| (i, x as i64)));
    let mmax = active().map(|(i, _)| m[i]).max().unwrap_or(0);
    let shift: i64 = active().map(|(i, hi)| (hi + 1) * n0_degrees[i]).sum();
    let base = (mmax + 1 + shift).saturating_mul(d as i64);
    m.iter().map(|mi| base - mi - 1).collect()
}

/// Order `s_i` of each polynomial as written (not its norm form).
pub fn raw_orders(sys: &DiffSystem) -> Vec<u32> {
    sys.supports().iter().map(|sup| sup.iter().filter_map(|m| m.max_order_where(|v| v.is_y())).max().unwrap_or(0)).collect()
}

/// Per-block degree bound `(s − s_i + 1)/m_i · Π_j m_j^{s − s_j + 1}`, `None` when `m_i = 0`.
pub fn bezout_block(sys: &DiffSystem) -> Vec<Option<BigUint>> {
    let s_i = raw_orders(sys);
    let m: Vec<i64> = (0..sys.num_polys()).map(|i| sys.y_degree(i)).collect();
    bezout_block_raw(&s_i, &m)
}

pub fn bezout_block_raw(s_i: &[u32], m: &[i64]) -> Vec<Option<BigUint>> {
    let s: u32 = s_i.iter().sum();
    let prod = s_i.iter().zip(m).fold(BigUint::one(), |acc, (sj, mj)| acc * BigUint::from(*mj as u64).pow(s - sj + 1));
    s_i.iter()
        .zip(m)
        .map(|(si, mi)| {
            if *mi <= 0 {
                return None;
            }
            let num = &prod * BigUint::from(s - si + 1);
            let den = BigUint::from(*mi as u64);
            debug_assert!((&num % &den).is_zero());
            Some(num / den)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    pub(crate) fn brute_jacobi(a: &[Vec<ExtOrder>]) -> ExtOrder {
        let m = a.len();
        let n = a.first().map_or(0, |r| r.len());
        let k = m.min(n);
        let mut best: ExtOrder = None;
        for rows in (0..m).combinations(k) {
            for cols in (0..n).permutations(k) {
                let s: ExtOrder = rows.iter().zip(&cols).try_fold(0i64, |acc, (r, c)| a[*r][*c].map(|x| acc + x));
                if s > best {
                    best = s;
                }
            }
        }
        if k == 0 {
            Some(0)
        } else {
            best
        }
    }

    fn mat(rows: &[&[i64]]) -> OrderMatrix {
        OrderMatrix { entries: rows.iter().map(|r| r.iter().map(|&x| if x == i64::MIN { None } else { Some(x) }).collect()).collect() }
    }

    const NI: i64 = i64::MIN;

    #[test]
    fn four_by_three_example() {
        let a = mat(&[&[5, NI, 0], &[5, 0, NI], &[0, 3, 5], &[5, 2, NI]]);
        assert_eq!(deleted_row_jacobi(&a), vec![Some(12), Some(12), Some(7), Some(10)]);
        assert_eq!(l_bounds(&a, &[0, 0, 0]), vec![Some(13); 4]);
        assert_eq!(total_order_bounds(&a), vec![Some(15); 4]);
    }

    #[test]
    fn trivial_matrices() {
        assert_eq!(jacobi_number(&mat(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]]).entries), Some(0));
        assert_eq!(jacobi_number(&mat(&[&[NI, 1], &[NI, 2]]).entries), None);
        assert_eq!(jacobi_number(&[]), Some(0));
    }

    #[test]
    fn unit_coefficient_example_bounds() {
        // P0, P1 in y1, y2 only; P2 and P3 add nothing to the resultant.
        let sys = DiffSystem::from_strs(3, &["1, y1*y1'*y2*y2''", "1, y1*y1'*y2*y2''", "1, y1, y2", "1, y1', y3"]).unwrap();
        let rep = order_bounds(&sys).unwrap();
        let a = &rep.order_matrix;
        assert_eq!(a.entries, mat(&[&[1, 2, NI], &[1, 2, NI], &[0, 0, NI], &[1, NI, 0]]).entries);
        // Polynomials are indexed from 0, so these are J_2 = 3 and J_3 = -inf.
        assert_eq!(rep.jacobi, vec![Some(2), Some(2), Some(3), None]);
        assert_eq!(rep.rank_essential, vec![0, 1]);
        assert_eq!(rep.bound[2], None);
        assert_eq!(rep.bound[3], None);
    }

    #[test]
    fn refined_bounds_for_high_order_block() {
        let o = 7;
        let p3 = format!("y1^({o}), y2^({o}), y3^({o})");
        let sys = DiffSystem::from_strs(3, &["y1*y2, y3", "y1*y2, y3*y3'", "y1*y2, y3'", &p3]).unwrap();
        let rep = order_bounds(&sys).unwrap();
        let o = o as i64;
        assert_eq!(rep.jacobi, vec![Some(o + 1), Some(o + 1), Some(o + 1), Some(1)]);
        assert_eq!(rep.refined.as_ref().unwrap()[..3], [Some(1), Some(1), Some(1)]);
        assert_eq!(rep.bound, vec![Some(1), Some(1), Some(1), None]);
    }

    #[test]
    fn lattice_example_bounds() {
        let sys = DiffSystem::from_strs(2, &["1, y1*y2", "1, y1*y2'", "1, y1'*y2'"]).unwrap();
        let rep = order_bounds(&sys).unwrap();
        assert_eq!(rep.jacobi, vec![Some(2), Some(1), Some(1)]);
        assert_eq!(rep.bound, vec![Some(2), Some(1), Some(1)]);
        assert_eq!(degree_bound(&sys, &[Some(1), Some(0), Some(0)]), BigUint::from(81u32));
        for i in 0..3 {
            let (j, l, e) = (rep.modified[i].unwrap(), rep.alt_l[i].unwrap(), rep.alt_e[i].unwrap());
            assert!(j <= l && l <= e);
        }
    }

    #[test]
    fn degree_bounds() {
        assert_eq!(degree_bound_raw(&[0, 0], &[Some(3), Some(1)]), BigUint::from(1u32));
        assert_eq!(degree_bound_raw(&[1, 1], &[Some(0), Some(0)]), BigUint::from(4u32));
        assert_eq!(cofactor_degree_bound_raw(&[2, 2, 2], &[0, 0, 0], &[Some(0); 3], 4), vec![9, 9, 9]);
        assert_eq!(cofactor_degree_bound_raw(&[1, 1], &[0, 0], &[Some(0); 2], 1), vec![0, 0]);
        assert_eq!(cofactor_degree_bound_raw(&[1, 1], &[1, 1], &[Some(0); 2], 2), vec![6, 6]);
        // Two generic order-one degree-two polynomials in one variable.
        assert_eq!(bezout_block_raw(&[1, 1], &[2, 2]), vec![Some(BigUint::from(16u32)); 2]);
        assert_eq!(bezout_block_raw(&[0, 0], &[0, 1]), vec![None, Some(BigUint::from(0u32))]);
    }

    #[test]
    fn random_matrices_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let m = rng.gen_range(1..=6);
            let n = rng.gen_range(1..=6);
            let a: Vec<Vec<ExtOrder>> =
                (0..m).map(|_| (0..n).map(|_| if rng.gen_bool(0.25) { None } else { Some(rng.gen_range(-3..=9)) }).collect()).collect();
            assert_eq!(jacobi_number(&a), brute_jacobi(&a), "{a:?}");
        }
    }
}
