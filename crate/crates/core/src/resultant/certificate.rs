//! Membership certificates `Π N_{i0}^{(h_i+1)d} · SR = Σ H_{ij} (P_i^N)^{(j)}`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::diffpoly::{binomial, DiffIndex, DiffPoly, Monomial, Rational};
use crate::system::DiffSystem;

use super::grading::{Context, Prolongation};
use super::system::{split_u0, zeta_of};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("resultant involves the variables y")]
    InvolvesY,
    #[error("cofactor H_{{{i},{j}}} has a negative exponent in y")]
    NegativeExponent { i: usize, j: u32 },
    #[error("cofactor H_{{{i},{j}}} refers to an order beyond the certificate orders")]
    OrderOutOfRange { i: usize, j: u32 },
    #[error("identity fails: {terms} residual terms")]
    IdentityFails { terms: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultantCertificate {
    pub sr: DiffPoly,
    /// `ord(SR, u_i)`, `None` for blocks that do not occur.
    pub h: Vec<Option<u32>>,
    pub d: u64,
    pub subset: Vec<usize>,
    pub multiplier: Monomial,
    /// `H_{ij}` keyed by `(i, j)`.
    pub cofactors: BTreeMap<(usize, u32), DiffPoly>,
}

/// `Π_{i∈T} N_{i0}^{(h_i+1)d}`.
pub fn multiplier(ctx: &Context, h: &[Option<u32>], d: u64) -> Monomial {
    let mut m = Monomial::one();
    for &i in &ctx.subset {
        if let Some(hi) = h[i] {
            m = m.mul(&ctx.n0(i).pow((hi as i64 + 1) * d as i64));
        }
    }
    m
}

/// Order of `p` in block `i` per block.
pub fn realized_orders(p: &DiffPoly, np: usize) -> Vec<Option<u32>> {
    (0..np).map(|i| p.order_in_block(i as u32)).collect()
}

/// Cofactors from the telescoping sum
/// `v_1⋯v_D − ζ_{v_1}⋯ζ_{v_D} = Σ_q v_1⋯v_{q−1} (v_q − ζ_{v_q}) ζ_{v_{q+1}}⋯ζ_{v_D}`
/// together with `(u_{i0} − ζ_i)^{(t)} = Σ_s C(t,s) (P_i^N)^{(s)} (1/N_{i0})^{(t−s)}`.
///
/// Requires `sr` to vanish at the generic zero of `pr`.
pub fn telescoping_cofactors(pr: &Prolongation, sr: &DiffPoly, mult: &Monomial) -> BTreeMap<(usize, u32), DiffPoly> {
    let mut out: BTreeMap<(usize, u32), DiffPoly> = BTreeMap::new();
    for (m, c) in sr.terms() {
        let (u0, rest) = split_u0(m);
        let factors: Vec<_> = u0.exps().iter().flat_map(|(v, e)| std::iter::repeat(*v).take(*e as usize)).collect();
        let dd = factors.len();
        // suffix[q] = Π_{r ≥ q} ζ_{v_r}
        let mut suffix = vec![DiffPoly::one(); dd + 1];
        for q in (0..dd).rev() {
            suffix[q] = &suffix[q + 1] * zeta_of(pr, &factors[q]);
        }
        let mut left = rest.mul(mult);
        for q in 0..dd {
            let v = factors[q];
            let DiffIndex::U { i, .. } = v.base else { unreachable!() };
            let (i, t) = (i as usize, v.order);
            let base = suffix[q + 1].mul_monomial(&left).scale(c);
            for s in 0..=t {
                let coef = Rational::from_integer(binomial(t, s));
                let term = (&base * &pr.inv_n0[i][(t - s) as usize]).scale(&coef);
                let e = out.entry((i, s)).or_default();
                *e = &*e + &term;
            }
            left = left.mul(&Monomial::var(v));
        }
    }
    out.retain(|_, p| !p.is_zero());
    out
}

/// Checks polynomiality of the cofactors and the identity by full expansion.
pub fn verify_certificate(sys: &DiffSystem, cert: &ResultantCertificate) -> Result<(), CertificateError> {
    if cert.sr.has_y() {
        return Err(CertificateError::InvolvesY);
    }
    let mut rhs = DiffPoly::zero();
    let mut norms = BTreeMap::new();
    for (&(i, j), hc) in &cert.cofactors {
        if i >= sys.num_polys() {
            return Err(CertificateError::OrderOutOfRange { i, j });
        }
        if hc.terms().any(|(m, _)| !m.is_polynomial()) {
            return Err(CertificateError::NegativeExponent { i, j });
        }
        let p = norms.entry(i).or_insert_with(|| sys.norm(i).poly);
        rhs = &rhs + &(hc * &p.nth_derivative(j));
    }
    let lhs = cert.sr.mul_monomial(&cert.multiplier);
    let residual = &lhs - &rhs;
    if residual.is_zero() {
        Ok(())
    } else {
        Err(CertificateError::IdentityFails { terms: residual.len() })
    }
}
