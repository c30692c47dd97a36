//! Systems of generic Laurent differential polynomials `P_i = Σ_k u_{ik} M_{ik}`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::diffpoly::{parse_monomial, DerivVar, DiffIndex, DiffPoly, DiffPolyError, Monomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("expected {expected} polynomials for {n} variables, got {got}")]
    WrongCount { n: usize, expected: usize, got: usize },
    #[error("P{i} needs at least two monomials")]
    TooFewTerms { i: usize },
    #[error("P{i} repeats the monomial {monomial} (positions {first} and {second})")]
    Duplicate { i: usize, first: usize, second: usize, monomial: String },
    #[error("P{i} monomial {k} uses a variable outside y1..y{n}")]
    BadVariable { i: usize, k: usize, n: usize },
    #[error("coefficient u{i}_{k} does not belong to the system")]
    UnknownCoefficient { i: usize, k: usize },
    #[error(transparent)]
    Parse(#[from] DiffPolyError),
}

/// Norm-form data for one polynomial.
#[derive(Debug, Clone)]
pub struct NormData {
    /// `P_i^N = shift * P_i`.
    pub poly: DiffPoly,
    pub shift: Monomial,
    /// `N_{ik} = shift * M_{ik}`.
    pub monomials: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffSystem {
    n: usize,
    supports: Vec<Vec<Monomial>>,
    values: BTreeMap<(usize, usize), Vec<Rational>>,
}

impl DiffSystem {
    pub fn new(n: usize, supports: Vec<Vec<Monomial>>) -> Result<Self, SystemError> {
        if supports.len() != n + 1 {
            return Err(SystemError::WrongCount { n, expected: n + 1, got: supports.len() });
        }
        for (i, sup) in supports.iter().enumerate() {
            if sup.len() < 2 {
                return Err(SystemError::TooFewTerms { i });
            }
            for (k, m) in sup.iter().enumerate() {
                let ok = m.exps().iter().all(|(v, _)| matches!(v.base, DiffIndex::Y { j } if j >= 1 && (j as usize) <= n));
                if !ok {
                    return Err(SystemError::BadVariable { i, k, n });
                }
                if let Some(first) = sup[..k].iter().position(|x| x == m) {
                    return Err(SystemError::Duplicate { i, first, second: k, monomial: m.to_string() });
                }
            }
        }
        Ok(DiffSystem { n, supports, values: BTreeMap::new() })
    }

    /// Builds a system from comma-separated monomial lists, one per polynomial.
    pub fn from_strs(n: usize, supports: &[&str]) -> Result<Self, SystemError> {
        let mut out = Vec::new();
        for s in supports {
            let mons = s.split(',').map(|t| parse_monomial(t.trim())).collect::<Result<Vec<_>, _>>()?;
            out.push(mons);
        }
        Self::new(n, out)
    }

    /// Attaches a concrete value (a series given by its coefficients) to `u_{ik}`.
    pub fn set_value(&mut self, i: usize, k: usize, coeffs: Vec<Rational>) -> Result<(), SystemError> {
        if i >= self.supports.len() || k >= self.supports[i].len() {
            return Err(SystemError::UnknownCoefficient { i, k });
        }
        self.values.insert((i, k), coeffs);
        Ok(())
    }

    pub fn values(&self) -> &BTreeMap<(usize, usize), Vec<Rational>> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_polys(&self) -> usize {
        self.supports.len()
    }

    pub fn supports(&self) -> &[Vec<Monomial>] {
        &self.supports
    }

    pub fn support(&self, i: usize) -> &[Monomial] {
        &self.supports[i]
    }

    pub fn coeff_var(i: usize, k: usize) -> DerivVar {
        DerivVar::u(i as u32, k as u32, 0)
    }

    pub fn generic_poly(&self, i: usize) -> DiffPoly {
        DiffPoly::from_terms(
            self.supports[i]
                .iter()
                .enumerate()
                .map(|(k, m)| (Rational::from_integer(1.into()), Monomial::var(Self::coeff_var(i, k)).mul(m))),
        )
    }

    pub fn norm(&self, i: usize) -> NormData {
        let (_, shift) = DiffPoly::from_terms(self.supports[i].iter().map(|m| (Rational::from_integer(1.into()), m.clone())))
            .norm_form()
            .expect("supports are nonempty");
        let monomials: Vec<Monomial> = self.supports[i].iter().map(|m| m.mul(&shift)).collect();
        let poly = self.generic_poly(i).mul_monomial(&shift);
        NormData { poly, shift, monomials }
    }

    /// Effective order `Eord(P_i)`, the order of the norm form in `Y`.
    pub fn effective_order(&self, i: usize) -> Option<u32> {
        self.norm(i).monomials.iter().filter_map(|m| m.max_order_where(|v| v.is_y())).max()
    }

    /// `m_i`, the total degree of the norm form in `Y`.
    pub fn y_degree(&self, i: usize) -> i64 {
        self.norm(i).monomials.iter().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// `ord(P_i^N, y_j)`, `None` for −∞.
    pub fn order_in_y(&self, i: usize, j: usize) -> Option<u32> {
        self.norm(i).monomials.iter().filter_map(|m| m.max_order_where(|v| v.y_index() == Some(j as u32))).max()
    }

    /// Least order at which `y_j` occurs in `P_i^N`.
    pub fn least_order_in_y(&self, i: usize, j: usize) -> Option<u32> {
        self.norm(i)
            .monomials
            .iter()
            .flat_map(|m| m.exps().iter().filter(|(v, _)| v.y_index() == Some(j as u32)).map(|(v, _)| v.order).collect::<Vec<_>>())
            .min()
    }

    /// The quotient monomials `M_{ik}/M_{i0}` for `k ≥ 1`.
    pub fn quotients(&self, i: usize) -> Vec<Monomial> {
        let base = &self.supports[i][0];
        self.supports[i][1..].iter().map(|m| m.div(base)).collect()
    }
}
