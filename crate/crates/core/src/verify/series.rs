//! Truncated power series over the rationals with honest precision tracking.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::diffpoly::{DerivVar, DiffIndex, DiffPoly, Rational};

use super::VerifyError;

/// `Σ c_k t^k mod t^K`; `K` is the number of stored coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Rational>,
}

impl Series {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        Series { coeffs }
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        Series { coeffs: cs.iter().map(|c| Rational::from_integer((*c).into())).collect() }
    }

    pub fn constant(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k];
        if k > 0 {
            coeffs[0] = c;
        }
        Series { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Number of known coefficients.
    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn truncate(&self, k: usize) -> Series {
        Series { coeffs: self.coeffs[..k.min(self.coeffs.len())].to_vec() }
    }

    /// Index of the first nonzero known coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs.first().is_some_and(|c| !c.is_zero())
    }

    pub fn add(&self, o: &Series) -> Series {
        let k = self.precision().min(o.precision());
        Series { coeffs: (0..k).map(|i| &self.coeffs[i] + &o.coeffs[i]).collect() }
    }

    pub fn sub(&self, o: &Series) -> Series {
        let k = self.precision().min(o.precision());
        Series { coeffs: (0..k).map(|i| &self.coeffs[i] - &o.coeffs[i]).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Series {
        Series { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn mul(&self, o: &Series) -> Series {
        let k = self.precision().min(o.precision());
        let mut coeffs = vec![Rational::zero(); k];
        for (i, a) in self.coeffs.iter().take(k).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(k - i).enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Series { coeffs }
    }

    /// `d/dt`; one coefficient of precision is lost.
    pub fn derivative(&self) -> Series {
        Series { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer((i as i64).into())).collect() }
    }

    pub fn nth_derivative(&self, n: u32) -> Series {
        (0..n).fold(self.clone(), |s, _| s.derivative())
    }

    /// Reciprocal of a unit.
    pub fn recip(&self) -> Option<Series> {
        let c0 = self.coeffs.first()?;
        if c0.is_zero() {
            return None;
        }
        let inv0 = c0.recip();
        let k = self.precision();
        let mut out = vec![Rational::zero(); k];
        out[0] = inv0.clone();
        for n in 1..k {
            let mut acc = Rational::zero();
            for i in 1..=n {
                acc += &self.coeffs[i] * &out[n - i];
            }
            out[n] = -acc * &inv0;
        }
        Some(Series { coeffs: out })
    }

    /// Integer power; negative exponents need a unit.
    pub fn pow(&self, e: i64) -> Option<Series> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Series::constant(Rational::one(), self.precision());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Some(acc)
    }
}

/// Values of base indeterminates; derivatives come from `d/dt`.
#[derive(Debug, Clone, Default)]
pub struct SeriesPoint {
    pub values: HashMap<DiffIndex, Series>,
}

impl SeriesPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, base: DiffIndex, s: Series) {
        self.values.insert(base, s);
    }

    pub fn var(&self, v: &DerivVar) -> Result<Series, VerifyError> {
        let s = self.values.get(&v.base).ok_or(VerifyError::MissingValue { var: v.to_string() })?;
        Ok(s.nth_derivative(v.order))
    }
}

/// Exact evaluation of a Laurent polynomial at a series point.
pub fn series_eval(p: &DiffPoly, pt: &SeriesPoint) -> Result<Series, VerifyError> {
    let mut cache: HashMap<(DerivVar, i64), Series> = HashMap::new();
    let mut acc: Option<Series> = None;
    for (m, c) in p.terms() {
        let mut term: Option<Series> = None;
        for (v, e) in m.exps() {
            let key = (*v, *e);
            if !cache.contains_key(&key) {
                let base = pt.var(v)?;
                let pw = base.pow(*e).ok_or(VerifyError::NonUnit { var: v.to_string() })?;
                cache.insert(key, pw);
            }
            let f = &cache[&key];
            term = Some(match term {
                None => f.clone(),
                Some(t) => t.mul(f),
            });
        }
        let term = match term {
            Some(t) => t.scale(c),
            None => {
                // a constant term: its precision is set by the rest of the sum
                let k = pt.values.values().map(|s| s.precision()).max().unwrap_or(0);
                Series::constant(c.clone(), k)
            }
        };
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.unwrap_or_else(|| Series::constant(Rational::zero(), pt.values.values().map(|s| s.precision()).max().unwrap_or(0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::parse_poly;

    fn at_y1(s: Series) -> SeriesPoint {
        let mut pt = SeriesPoint::new();
        pt.set(DiffIndex::Y { j: 1 }, s);
        pt
    }

    #[test]
    fn evaluation_examples() {
        let pt = at_y1(Series::from_ints(&[1, 1, 0, 0]));
        assert_eq!(series_eval(&parse_poly("y1").unwrap(), &pt).unwrap(), Series::from_ints(&[1, 1, 0, 0]));
        let d = parse_poly("y1^2").unwrap().differentiate();
        assert_eq!(series_eval(&d, &pt).unwrap(), Series::from_ints(&[2, 2, 0]));
        let pt = at_y1(Series::from_ints(&[1, 1, 0]));
        assert_eq!(series_eval(&parse_poly("y1^-1").unwrap(), &pt).unwrap(), Series::from_ints(&[1, -1, 1]));
    }

    #[test]
    fn non_unit_is_reported() {
        let pt = at_y1(Series::from_ints(&[0, 1, 0]));
        assert_eq!(series_eval(&parse_poly("y1^-1").unwrap(), &pt), Err(VerifyError::NonUnit { var: "y1".into() }));
    }

    #[test]
    fn reciprocal_inverts() {
        let s = Series::from_ints(&[3, -1, 4, 1, -5, 9]);
        let r = s.recip().unwrap();
        assert_eq!(s.mul(&r), Series::from_ints(&[1, 0, 0, 0, 0, 0]));
    }
}
