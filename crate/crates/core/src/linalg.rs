//! Exact ranks and sparse nullspaces over the rationals.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::diffpoly::Rational;
use crate::modp::{crt, primes, rational_reconstruct, Fp};

/// Rank of an integer matrix by fraction-free elimination.
pub fn rank_integer(mut rows: Vec<Vec<BigInt>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).filter(|&r| !rows[r][c].is_zero()).min_by_key(|&r| rows[r][c].abs()) else {
            continue;
        };
        rows.swap(rank, p);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for row in tail.iter_mut() {
            if row[c].is_zero() {
                continue;
            }
            let g = pivot[c].gcd(&row[c]);
            let a = &pivot[c] / &g;
            let b = &row[c] / &g;
            let mut content = BigInt::zero();
            for (x, y) in row.iter_mut().zip(pivot.iter()).skip(c) {
                *x = &a * &*x - &b * y;
                content = content.gcd(x);
            }
            if !content.is_zero() && !content.is_one() {
                row.iter_mut().skip(c).for_each(|x| *x /= &content);
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of a rational matrix.
pub fn rank_rational(rows: &[Vec<Rational>]) -> usize {
    rank_integer(rows.iter().map(|r| clear_denominators(r)).collect())
}

/// Scales a rational vector to a primitive integer vector.
pub fn clear_denominators(row: &[Rational]) -> Vec<BigInt> {
    let den = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&den / x.denom())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("row {row} has an entry in column {col} but the system has {ncols} columns")]
    BadColumn { row: usize, col: usize, ncols: usize },
}

/// A sparse homogeneous system `A x = 0` with integer entries.
#[derive(Debug, Clone, Default)]
pub struct SparseSystem {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, BigInt)>>,
}

impl SparseSystem {
    pub fn new(ncols: usize) -> Self {
        SparseSystem { ncols, rows: Vec::new() }
    }

    /// Adds a rational row, cleared to a primitive integer row.
    pub fn push_rational_row(&mut self, row: Vec<(usize, Rational)>) {
        let den = row.iter().fold(BigInt::one(), |acc, (_, x)| acc.lcm(x.denom()));
        let mut ints: Vec<(usize, BigInt)> =
            row.into_iter().filter(|(_, x)| !x.is_zero()).map(|(c, x)| (c, x.numer() * (&den / x.denom()))).collect();
        ints.sort_by_key(|(c, _)| *c);
        if !ints.is_empty() {
            self.rows.push(ints);
        }
    }

    pub fn validate(&self) -> Result<(), LinalgError> {
        for (r, row) in self.rows.iter().enumerate() {
            for (c, _) in row {
                if *c >= self.ncols {
                    return Err(LinalgError::BadColumn { row: r, col: *c, ncols: self.ncols });
                }
            }
        }
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }
}

/// Which elimination backend to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Modular elimination with rational reconstruction, verified exactly,
    /// falling back to fraction-free elimination.
    #[default]
    Modular,
    FractionFree,
}

/// Reduced row echelon form with rational entries.
#[derive(Debug, Clone)]
pub struct Rref {
    pub ncols: usize,
    /// Pivot column of each row, increasing.
    pub pivots: Vec<usize>,
    /// Rows with a leading 1 at the pivot; sparse, sorted by column.
    pub rows: Vec<Vec<(usize, Rational)>>,
    /// Whether the modular route produced this form.
    pub modular: bool,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.ncols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.ncols).filter(|c| !is_pivot[*c]).collect()
    }

    /// The nullspace vector attached to a free column.
    pub fn basis_vector(&self, f: usize) -> Vec<(usize, Rational)> {
        let mut v = vec![(f, Rational::one())];
        for (r, row) in self.rows.iter().enumerate() {
            if let Ok(pos) = row.binary_search_by_key(&f, |(c, _)| *c) {
                v.push((self.pivots[r], -row[pos].1.clone()));
            }
        }
        v.sort_by_key(|(c, _)| *c);
        v
    }
}

/// Exact reduced row echelon form.
pub fn rref(sys: &SparseSystem, backend: Backend) -> Rref {
    if backend == Backend::Modular {
        if let Some(r) = rref_modular(sys, 40) {
            return r;
        }
    }
    rref_fraction_free(sys)
}

/// A basis of the nullspace, one vector per free column.
pub fn nullspace(sys: &SparseSystem, backend: Backend) -> Vec<Vec<(usize, Rational)>> {
    let r = rref(sys, backend);
    r.free_columns().into_iter().map(|f| r.basis_vector(f)).collect()
}

/// Rank of a sparse matrix modulo the prime of `f`.
pub fn rank_mod(rows: &[Vec<(usize, u64)>], ncols: usize, f: Fp) -> usize {
    rref_mod(rows, ncols, f).0.len()
}

/// Echelon form mod p: pivot columns and normalised reduced rows.
fn rref_mod(rows: &[Vec<(usize, u64)>], ncols: usize, f: Fp) -> (Vec<usize>, Vec<Vec<(usize, u64)>>) {
    let mut pivot_row: Vec<Option<usize>> = vec![None; ncols];
    let mut prows: Vec<Vec<(usize, u64)>> = Vec::new();
    let mut pcols: Vec<usize> = Vec::new();
    let mut w = vec![0u64; ncols];
    for row in rows {
        let mut lo = ncols;
        for &(c, x) in row {
            w[c] = x;
            lo = lo.min(c);
        }
        let mut c = lo;
        while c < ncols {
            if w[c] == 0 {
                c += 1;
                continue;
            }
            match pivot_row[c] {
                Some(pr) => {
                    let factor = w[c];
                    for &(cc, x) in &prows[pr] {
                        w[cc] = f.sub(w[cc], f.mul(factor, x));
                    }
                    c += 1;
                }
                None => {
                    let inv = f.inv(w[c]);
                    let mut new_row = Vec::new();
                    for (cc, slot) in w.iter_mut().enumerate().skip(c) {
                        if *slot != 0 {
                            new_row.push((cc, f.mul(*slot, inv)));
                            *slot = 0;
                        }
                    }
                    pivot_row[c] = Some(prows.len());
                    prows.push(new_row);
                    pcols.push(c);
                    break;
                }
            }
        }
        // clear leftovers of rows that reduced to zero
        for slot in w.iter_mut() {
            *slot = 0;
        }
    }
    // Back substitution, last pivot first.
    let mut order: Vec<usize> = (0..prows.len()).collect();
    order.sort_by_key(|&r| std::cmp::Reverse(pcols[r]));
    for &r in &order {
        let c0 = pcols[r];
        for &(cc, x) in &prows[r] {
            w[cc] = x;
        }
        for c in c0 + 1..ncols {
            if w[c] != 0 {
                if let Some(pr) = pivot_row[c] {
                    let factor = w[c];
                    for &(cc, x) in &prows[pr] {
                        w[cc] = f.sub(w[cc], f.mul(factor, x));
                    }
                }
            }
        }
        let mut new_row = Vec::new();
        for (cc, slot) in w.iter_mut().enumerate().skip(c0) {
            if *slot != 0 {
                new_row.push((cc, *slot));
                *slot = 0;
            }
        }
        prows[r] = new_row;
    }
    let mut idx: Vec<usize> = (0..prows.len()).collect();
    idx.sort_by_key(|&r| pcols[r]);
    let pivots = idx.iter().map(|&r| pcols[r]).collect();
    let rows = idx.into_iter().map(|r| std::mem::take(&mut prows[r])).collect();
    (pivots, rows)
}

fn rref_modular(sys: &SparseSystem, max_primes: usize) -> Option<Rref> {
    let ps = primes(max_primes);
    let mut pivots: Option<Vec<usize>> = None;
    let mut modulus = BigInt::one();
    let mut acc: HashMap<(usize, usize), BigInt> = HashMap::new();
    let mut used = 0usize;
    for chunk in ps.chunks(4) {
        let results: Vec<(u64, (Vec<usize>, Vec<Vec<(usize, u64)>>))> = chunk
            .par_iter()
            .map(|&p| {
                let f = Fp::new(p);
                let rows: Vec<Vec<(usize, u64)>> =
                    sys.rows.iter().map(|r| r.iter().map(|(c, x)| (*c, f.from_bigint(x))).filter(|(_, x)| *x != 0).collect()).collect();
                (p, rref_mod(&rows, sys.ncols, f))
            })
            .collect();
        for (p, (pv, rows)) in results {
            match &pivots {
                None => pivots = Some(pv),
                Some(cur) if *cur == pv => {}
                Some(cur) => {
                    // Larger rank wins; a lexicographically earlier pivot set wins on ties.
                    if pv.len() > cur.len() || (pv.len() == cur.len() && pv < *cur) {
                        pivots = Some(pv);
                        acc.clear();
                        modulus = BigInt::one();
                        used = 0;
                    } else {
                        continue;
                    }
                }
            }
            let pm = BigInt::from(p);
            let mut seen: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
            for (r, row) in rows.iter().enumerate() {
                for &(c, x) in row {
                    let e = acc.entry((r, c)).or_insert_with(BigInt::zero);
                    *e = crt(e, &modulus, x, p);
                    seen.insert((r, c));
                }
            }
            for (key, e) in acc.iter_mut() {
                if !seen.contains(key) {
                    *e = crt(e, &modulus, 0, p);
                }
            }
            modulus *= pm;
            used += 1;
        }
        if used < 2 {
            continue;
        }
        let pv = pivots.clone().expect("at least one prime processed");
        let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); pv.len()];
        let mut ok = true;
        for ((r, c), e) in &acc {
            match rational_reconstruct(e, &modulus) {
                Some(x) => {
                    if !x.is_zero() {
                        rows[*r].push((*c, x));
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|(c, _)| *c);
        }
        let cand = Rref { ncols: sys.ncols, pivots: pv, rows, modular: true };
        if verify_rref(sys, &cand) {
            return Some(cand);
        }
    }
    None
}

/// Checks `A = A[:, pivots] * R` exactly; with pivot columns independent
/// modulo a prime this certifies the nullspace.
fn verify_rref(sys: &SparseSystem, r: &Rref) -> bool {
    let mut pos_of_pivot = vec![usize::MAX; sys.ncols];
    for (i, &p) in r.pivots.iter().enumerate() {
        if r.rows[i].first().map(|(c, x)| *c != p || !x.is_one()).unwrap_or(true) {
            return false;
        }
        pos_of_pivot[p] = i;
    }
    sys.rows.par_iter().all(|row| {
        let mut acc: HashMap<usize, Rational> = HashMap::new();
        for (c, x) in row {
            let i = pos_of_pivot[*c];
            if i == usize::MAX {
                continue;
            }
            let xr = Rational::from_integer(x.clone());
            for (cc, y) in &r.rows[i] {
                *acc.entry(*cc).or_insert_with(Rational::zero) += &xr * y;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        if acc.len() != row.len() {
            return false;
        }
        row.iter().all(|(c, x)| acc.get(c).map(|v| *v == Rational::from_integer(x.clone())).unwrap_or(false))
    })
}

/// Fraction-free sparse elimination followed by back substitution.
pub fn rref_fraction_free(sys: &SparseSystem) -> Rref {
    let ncols = sys.ncols;
    let mut pivot_row: Vec<Option<usize>> = vec![None; ncols];
    let mut prows: Vec<Vec<(usize, BigInt)>> = Vec::new();
    let mut pcols: Vec<usize> = Vec::new();
    let mut w: Vec<BigInt> = vec![BigInt::zero(); ncols];

    fn reduce_with(w: &mut [BigInt], c: usize, prow: &[(usize, BigInt)]) {
        let lead = &prow[0].1;
        let g = lead.gcd(&w[c]);
        let a = lead / &g;
        let b = &w[c] / &g;
        if !a.is_one() {
            for x in w.iter_mut() {
                if !x.is_zero() {
                    *x *= &a;
                }
            }
        }
        for (cc, y) in prow {
            w[*cc] -= &b * y;
        }
    }

    fn take_primitive(w: &mut [BigInt], from: usize) -> Vec<(usize, BigInt)> {
        let mut row = Vec::new();
        let mut content = BigInt::zero();
        for (cc, slot) in w.iter_mut().enumerate().skip(from) {
            if !slot.is_zero() {
                content = content.gcd(slot);
                row.push((cc, std::mem::take(slot)));
            }
        }
        if row.first().map(|(_, x)| x.is_negative()).unwrap_or(false) {
            content = -content;
        }
        if !content.is_one() && !content.is_zero() {
            for (_, x) in row.iter_mut() {
                *x /= &content;
            }
        }
        row
    }

    for row in &sys.rows {
        let mut lo = ncols;
        for (c, x) in row {
            w[*c] = x.clone();
            lo = lo.min(*c);
        }
        let mut c = lo;
        let mut placed = false;
        while c < ncols {
            if w[c].is_zero() {
                c += 1;
                continue;
            }
            match pivot_row[c] {
                Some(pr) => {
                    reduce_with(&mut w, c, &prows[pr]);
                    c += 1;
                }
                None => {
                    pivot_row[c] = Some(prows.len());
                    prows.push(take_primitive(&mut w, c));
                    pcols.push(c);
                    placed = true;
                    break;
                }
            }
        }
        if !placed {
            w.iter_mut().for_each(|x| *x = BigInt::zero());
        }
    }
    let mut order: Vec<usize> = (0..prows.len()).collect();
    order.sort_by_key(|&r| std::cmp::Reverse(pcols[r]));
    for &r in &order {
        let c0 = pcols[r];
        for (cc, x) in &prows[r] {
            w[*cc] = x.clone();
        }
        for c in c0 + 1..ncols {
            if !w[c].is_zero() {
                if let Some(pr) = pivot_row[c] {
                    reduce_with(&mut w, c, &prows[pr]);
                }
            }
        }
        prows[r] = take_primitive(&mut w, c0);
    }
    let mut idx: Vec<usize> = (0..prows.len()).collect();
    idx.sort_by_key(|&r| pcols[r]);
    let pivots: Vec<usize> = idx.iter().map(|&r| pcols[r]).collect();
    let rows = idx
        .into_iter()
        .map(|r| {
            let lead = prows[r][0].1.clone();
            prows[r].iter().map(|(c, x)| (*c, Rational::new(x.clone(), lead.clone()))).collect()
        })
        .collect();
    Rref { ncols, pivots, rows, modular: false }
}
