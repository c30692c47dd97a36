//! Symbolic support matrices and their reduction to T-shape.
//!
//! Row `i` of the support matrix of monomials `B_1..B_m` holds, in column
//! `j`, the univariate polynomial `Σ_k (exponent of y_j^{(k)} in B_i) x_j^k`.
//! The rank of this matrix over `Q(x)` is the differential transcendence
//! degree of the monomials. [`rdm`] brings the matrix to T-shape using only
//! rational row combinations and row/column swaps, from which the rank is
//! read off the index.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diffpoly::{Monomial, Rational};
use crate::linalg::rank_rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupportError {
    #[error("monomial {index} contains the coefficient variable {var}")]
    CoefficientVariable { index: usize, var: String },
    #[error("monomial {index} uses y{j} but only {n} variables are declared")]
    VariableOutOfRange { index: usize, j: u32, n: usize },
    #[error("internal error in the reduction: {0}")]
    Internal(String),
}

/// Univariate polynomial `Σ c_k x^k`, low degree first, trailing zeros trimmed.
pub type UPoly = Vec<Rational>;

pub fn udeg(p: &UPoly) -> Option<usize> {
    p.len().checked_sub(1)
}

fn trim(p: &mut UPoly) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn axpy(dst: &mut UPoly, q: &Rational, src: &UPoly) {
    if dst.len() < src.len() {
        dst.resize(src.len(), Rational::zero());
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += q * s;
    }
    trim(dst);
}

/// Row label: the formal product `Π y_j^{(k)}` with rational exponents.
pub type RowLabel = BTreeMap<(u32, u32), Rational>;

/// An elementary operation on a support matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElemOp {
    SwapRows(usize, usize),
    /// `row[dst] += q * row[src]`.
    AddRow { src: usize, dst: usize, q: Rational },
    SwapCols(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMatrix {
    labels: Vec<RowLabel>,
    cols: Vec<u32>,
    entries: Vec<Vec<UPoly>>,
}

impl SupportMatrix {
    /// The symbolic support matrix of Y-only monomials in `y_1..y_n`.
    pub fn from_monomials(monomials: &[Monomial], n: usize) -> Result<Self, SupportError> {
        let mut labels = Vec::with_capacity(monomials.len());
        for (index, m) in monomials.iter().enumerate() {
            let mut label = RowLabel::new();
            for (v, e) in m.exps() {
                let Some(j) = v.y_index() else {
                    return Err(SupportError::CoefficientVariable { index, var: v.to_string() });
                };
                if j == 0 || j as usize > n {
                    return Err(SupportError::VariableOutOfRange { index, j, n });
                }
                label.insert((j, v.order), Rational::from_integer(BigInt::from(*e)));
            }
            labels.push(label);
        }
        Ok(Self::from_labels(labels, (1..=n as u32).collect()))
    }

    /// Builds a matrix from integer coefficient lists; column `c` is `x_{c+1}`.
    pub fn from_int_entries(entries: &[Vec<Vec<i64>>]) -> Self {
        let n = entries.first().map_or(0, |r| r.len());
        let labels = entries
            .iter()
            .map(|row| {
                let mut l = RowLabel::new();
                for (c, e) in row.iter().enumerate() {
                    for (k, x) in e.iter().enumerate() {
                        if *x != 0 {
                            l.insert((c as u32 + 1, k as u32), Rational::from_integer(BigInt::from(*x)));
                        }
                    }
                }
                l
            })
            .collect();
        Self::from_labels(labels, (1..=n as u32).collect())
    }

    fn from_labels(labels: Vec<RowLabel>, cols: Vec<u32>) -> Self {
        let entries = labels.iter().map(|l| cols.iter().map(|&j| entry_from_label(l, j)).collect()).collect();
        SupportMatrix { labels, cols, entries }
    }

    pub fn nrows(&self) -> usize {
        self.entries.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn entry(&self, r: usize, c: usize) -> &UPoly {
        &self.entries[r][c]
    }

    pub fn entries(&self) -> &[Vec<UPoly>] {
        &self.entries
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    /// Variable index `j` carried by each column.
    pub fn column_vars(&self) -> &[u32] {
        &self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|r| r.iter().all(|e| e.is_empty()))
    }

    pub fn apply(&mut self, op: &ElemOp) {
        match op {
            ElemOp::SwapRows(a, b) => {
                self.entries.swap(*a, *b);
                self.labels.swap(*a, *b);
            }
            ElemOp::AddRow { src, dst, q } => {
                let src_row = self.entries[*src].clone();
                for (d, s) in self.entries[*dst].iter_mut().zip(&src_row) {
                    axpy(d, q, s);
                }
                let src_label = self.labels[*src].clone();
                let dst_label = &mut self.labels[*dst];
                for (key, x) in src_label {
                    let slot = dst_label.entry(key).or_insert_with(Rational::zero);
                    *slot += q * x;
                    if slot.is_zero() {
                        dst_label.remove(&key);
                    }
                }
            }
            ElemOp::SwapCols(a, b) => {
                self.cols.swap(*a, *b);
                for row in self.entries.iter_mut() {
                    row.swap(*a, *b);
                }
            }
        }
    }

    /// Entries recomputed from the row labels and the column permutation.
    pub fn regenerate(&self) -> Vec<Vec<UPoly>> {
        self.labels.iter().map(|l| self.cols.iter().map(|&j| entry_from_label(l, j)).collect()).collect()
    }

    /// Rank after substituting random integers for every `x_j`.
    pub fn rank_by_evaluation(&self, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs: BTreeMap<u32, Rational> = BTreeMap::new();
        for &j in &self.cols {
            xs.insert(j, Rational::from_integer(BigInt::from(rng.gen_range(-(1i64 << 16)..=(1i64 << 16)))));
        }
        let rows: Vec<Vec<Rational>> = self
            .entries
            .iter()
            .map(|row| row.iter().zip(&self.cols).map(|(e, j)| eval_upoly(e, &xs[j])).collect())
            .collect();
        rank_rational(&rows)
    }

    fn sub_view(&self, v: View) -> SupportMatrix {
        let labels = self.labels[v.r0..v.r0 + v.rows].to_vec();
        let cols = self.cols[v.c0..v.c0 + v.cols].to_vec();
        let entries = self.entries[v.r0..v.r0 + v.rows].iter().map(|r| r[v.c0..v.c0 + v.cols].to_vec()).collect();
        SupportMatrix { labels, cols, entries }
    }
}

fn entry_from_label(label: &RowLabel, j: u32) -> UPoly {
    let mut p: UPoly = Vec::new();
    for ((jj, k), x) in label.range((j, 0)..=(j, u32::MAX)) {
        debug_assert_eq!(*jj, j);
        let k = *k as usize;
        if p.len() <= k {
            p.resize(k + 1, Rational::zero());
        }
        p[k] += x;
    }
    trim(&mut p);
    p
}

pub fn eval_upoly(p: &UPoly, x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// For each `i ≤ min(m,n)`, `d_ii ≠ 0` and `deg d_ii > deg d_{ki}` for `k > i`.
pub fn is_reduced(m: &SupportMatrix) -> bool {
    reduced_prefix(m, View::full(m), m.nrows().min(m.ncols()))
}

/// Whether the first `ncols` columns of the view are reduced.
fn reduced_prefix(m: &SupportMatrix, v: View, ncols: usize) -> bool {
    for c in 0..ncols {
        if c >= v.rows {
            return false;
        }
        let Some(dc) = udeg(m.entry(v.r0 + c, v.c0 + c)) else {
            return false;
        };
        for r in c + 1..v.rows {
            if let Some(d) = udeg(m.entry(v.r0 + r, v.c0 + c)) {
                if d >= dc {
                    return false;
                }
            }
        }
    }
    true
}

fn is_tshape_view(m: &SupportMatrix, v: View, i: usize, j: usize) -> bool {
    for r in i..v.rows {
        for c in 0..v.cols {
            if (c < i || c >= i + j) && !m.entry(v.r0 + r, v.c0 + c).is_empty() {
                return false;
            }
        }
    }
    reduced_prefix(m, v, i + j)
}

/// The T-shape predicate for a given index.
pub fn is_tshape(m: &SupportMatrix, i: usize, j: usize) -> bool {
    i + j <= m.nrows().min(m.ncols()) && is_tshape_view(m, View::full(m), i, j)
}

/// Finds an index `(i, j)` for which the matrix is in T-shape, preferring larger `i`.
pub fn tshape_index(m: &SupportMatrix) -> Option<(usize, usize)> {
    tshape_index_view(m, View::full(m))
}

fn tshape_index_view(m: &SupportMatrix, v: View) -> Option<(usize, usize)> {
    let mn = v.rows.min(v.cols);
    for i in (0..=mn).rev() {
        for j in 0..=mn - i {
            if is_tshape_view(m, v, i, j) {
                return Some((i, j));
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct TShapeResult {
    pub matrix: SupportMatrix,
    pub index: (usize, usize),
    pub trace: Vec<ElemOp>,
}

impl TShapeResult {
    pub fn rank(&self) -> usize {
        self.index.0 + self.index.1
    }
}

#[derive(Debug, Clone, Copy)]
struct View {
    r0: usize,
    rows: usize,
    c0: usize,
    cols: usize,
}

impl View {
    fn full(m: &SupportMatrix) -> Self {
        View { r0: 0, rows: m.nrows(), c0: 0, cols: m.ncols() }
    }
}

struct Reducer {
    m: SupportMatrix,
    trace: Vec<ElemOp>,
}

impl Reducer {
    fn op(&mut self, op: ElemOp) {
        let trivial = matches!(op, ElemOp::SwapRows(a, b) | ElemOp::SwapCols(a, b) if a == b);
        if !trivial {
            self.m.apply(&op);
            self.trace.push(op);
        }
    }

    fn deg(&self, v: View, r: usize, c: usize) -> Option<usize> {
        udeg(self.m.entry(v.r0 + r, v.c0 + c))
    }

    /// Exchanges the adjacent column blocks `[a, b)` and `[b, c)` of the view.
    fn block_swap_cols(&mut self, v: View, a: usize, b: usize, c: usize) {
        if a >= b || b >= c {
            return;
        }
        self.reverse_cols(v, a, b);
        self.reverse_cols(v, b, c);
        self.reverse_cols(v, a, c);
    }

    fn reverse_cols(&mut self, v: View, mut a: usize, mut b: usize) {
        while a + 1 < b {
            self.op(ElemOp::SwapCols(v.c0 + a, v.c0 + b - 1));
            a += 1;
            b -= 1;
        }
    }

    fn run(&mut self, v: View) -> Result<(usize, usize), SupportError> {
        let (m, n) = (v.rows, v.cols);
        if m == 0 || n == 0 {
            return Ok((0, 0));
        }
        let p = m.max(n);
        // Step 1: pivot columns one by one.
        let mut s = 0;
        let (mut zi, mut zj);
        loop {
            if s >= m.min(n) {
                zi = m - s;
                zj = n - s;
                break;
            }
            // First column with a nonzero entry below row s; within it the
            // first row of maximal degree.
            let mut found = None;
            'cols: for l in s..n {
                let mut best: Option<(usize, usize)> = None;
                for r in s..m {
                    if let Some(d) = self.deg(v, r, l) {
                        if best.map(|(bd, _)| d > bd).unwrap_or(true) {
                            best = Some((d, r));
                        }
                    }
                }
                if let Some((_, r)) = best {
                    found = Some((l, r));
                    break 'cols;
                }
            }
            let Some((l, r)) = found else {
                zi = m - s;
                zj = n - s;
                break;
            };
            self.op(ElemOp::SwapRows(v.r0 + r, v.r0 + s));
            self.op(ElemOp::SwapCols(v.c0 + l, v.c0 + s));
            let ds = self.deg(v, s, s).expect("pivot is nonzero");
            for r in s + 1..m {
                if self.deg(v, r, s) == Some(ds) {
                    let lead_s = self.m.entry(v.r0 + s, v.c0 + s)[ds].clone();
                    let lead_r = self.m.entry(v.r0 + r, v.c0 + s)[ds].clone();
                    self.op(ElemOp::AddRow { src: v.r0 + s, dst: v.r0 + r, q: -(lead_r / lead_s) });
                }
            }
            s += 1;
        }
        // Step 2: grow the lower-right zero block until the matrix is in T-shape.
        let mut last_rank: Option<usize> = None;
        loop {
            let r = zi + zj;
            if let Some(prev) = last_rank {
                if r <= prev {
                    return Err(SupportError::Internal(format!("zero block 0-rank did not increase ({prev} -> {r})")));
                }
            }
            last_rank = Some(r);
            if let Some(idx) = tshape_index_view(&self.m, v) {
                return Ok(idx);
            }
            if zj == n {
                if zi == 0 {
                    return Err(SupportError::Internal("empty zero block spanning all columns".into()));
                }
                // The last zi rows vanish: reduce the rest, the zero rows stay below.
                return self.run(View { rows: m - zi, ..v });
            }
            if r > p {
                return self.step3(v, zi, zj);
            }
            // M_C is the lower-right (m+r-p) x (n+r-p) block, M_C1 its lower-left
            // zi-row part and M_C2 its upper-right zj-column part.
            let mc_r0 = p - r;
            let mc_c0 = p - r;
            let c1 = View {
                r0: v.r0 + m - zi,
                rows: zi,
                c0: v.c0 + mc_c0,
                cols: (n + zi).checked_sub(p).ok_or_else(|| SupportError::Internal("negative block size".into()))?,
            };
            let c2 = View { r0: v.r0 + mc_r0, rows: (m + zj).checked_sub(p).ok_or_else(|| SupportError::Internal("negative block size".into()))?, c0: v.c0 + n - zj, cols: zj };
            let (a1, b1) = self.run(c1)?;
            let (a2, b2) = self.run(c2)?;
            let full1 = a1 + b1 == c1.rows.min(c1.cols);
            let full2 = a2 + b2 == c2.rows.min(c2.cols);
            if full1 && full2 {
                // Bring the columns of M_C2 in front of those of M_C1.
                let start = p - r;
                let mid = n - zj;
                let end = (n + m).saturating_sub(p).max(mid);
                self.block_swap_cols(v, start, mid, end);
                return tshape_index_view(&self.m, v)
                    .ok_or_else(|| SupportError::Internal("column exchange did not produce a T-shape".into()));
            }
            if !full1 {
                let k = c1.rows - a1;
                let l = c1.cols - b1;
                if k + l > zi {
                    let off = c1.c0 - v.c0;
                    self.block_swap_cols(v, off, off + a1, off + a1 + b1);
                    zi = k;
                    zj += l;
                    continue;
                }
            }
            let k = c2.rows - a2;
            let l = c2.cols - b2;
            let off = c2.c0 - v.c0;
            self.block_swap_cols(v, off, off + a2, off + a2 + b2);
            zi += k;
            zj = l;
        }
    }

    /// Zero block of 0-rank at least `max(m,n)+1`.
    fn step3(&mut self, v: View, zi: usize, zj: usize) -> Result<(usize, usize), SupportError> {
        let (m, n) = (v.rows, v.cols);
        let c3 = View { r0: v.r0 + m - zi, rows: zi, c0: v.c0, cols: n - zj };
        let (k, l) = self.run(c3)?;
        if l == 0 {
            if k >= zi {
                return Err(SupportError::Internal("lower-left block of full row rank in step 3".into()));
            }
            return self.run(View { rows: m - (zi - k), ..v });
        }
        let (mut zi, mut zj) = (zi, zj);
        if k + l < c3.rows.min(c3.cols) {
            self.block_swap_cols(v, 0, k, k + l);
            zi -= k;
            zj = n - l;
        }
        let c4 = View { r0: v.r0, rows: m - zi, c0: v.c0 + n - zj, cols: zj };
        let (a, b) = self.run(c4)?;
        let s = a + b;
        let c5 = View { r0: v.r0 + s, rows: m - s, c0: v.c0, cols: n - zj };
        self.run(c5)?;
        self.block_swap_cols(v, 0, n - zj, n - zj + s);
        tshape_index_view(&self.m, v).ok_or_else(|| SupportError::Internal("step 3 did not produce a T-shape".into()))
    }
}

/// Reduces a support matrix to T-shape by rational row operations and swaps.
pub fn rdm(m: &SupportMatrix) -> Result<TShapeResult, SupportError> {
    let mut red = Reducer { m: m.clone(), trace: Vec::new() };
    let v = View::full(m);
    red.run(v)?;
    // The recursion reports indices of sub-blocks; the final index is read
    // off the whole matrix.
    let index = tshape_index(&red.m).ok_or_else(|| SupportError::Internal("result is not in T-shape".into()))?;
    Ok(TShapeResult { matrix: red.m, index, trace: red.trace })
}

/// Replays a trace of elementary operations.
pub fn replay(m: &SupportMatrix, trace: &[ElemOp]) -> SupportMatrix {
    let mut out = m.clone();
    for op in trace {
        out.apply(op);
    }
    out
}

/// Differential transcendence degree of a set of Y-only monomials.
pub fn dtrdeg_monomials(monomials: &[Monomial], n: usize) -> Result<usize, SupportError> {
    Ok(rdm(&SupportMatrix::from_monomials(monomials, n)?)?.rank())
}

/// Restriction of the matrix to a rectangular block, for inspection.
pub fn submatrix(m: &SupportMatrix, r0: usize, rows: usize, c0: usize, cols: usize) -> SupportMatrix {
    m.sub_view(View { r0, rows, c0, cols })
}

/// Converts an entry with integer coefficients to `i64`s, for display.
pub fn upoly_to_ints(p: &UPoly) -> Option<Vec<i64>> {
    use num_traits::ToPrimitive;
    p.iter().map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None }).collect()
}

/// Renders an entry as a polynomial in `x_j`.
pub fn upoly_to_string(p: &UPoly, j: u32) -> String {
    if p.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (k, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => format!("x{j}"),
            _ => format!("x{j}^{k}"),
        };
        let s = if mono.is_empty() {
            c.to_string()
        } else if c.is_one() {
            mono
        } else if *c == -Rational::one() {
            format!("-{mono}")
        } else {
            format!("{c}*{mono}")
        };
        parts.push(s);
    }
    parts.join(" + ").replace("+ -", "- ")
}
