//! Polynomials in the KdV times `t_0, t_1, ...` with `nu`-polynomial
//! coefficients, graded by the level `W = sum (2i+1) * (exponent of t_i)`.
//!
//! The grading mirrors the dimensional constraint of the correlators: a
//! monomial `t_{l_1} ... t_{l_n}` sits at level `sum (2 l_i + 1)`.
//! Multiplication adds levels and `d/dt_l` lowers the level by exactly
//! `2l + 1`; both facts are property-tested.

use crate::nupoly::NuPoly;
use crate::rational::Rat;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector over the times, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimeMono(Vec<u16>);

impl TimeMono {
    pub fn unit() -> Self {
        TimeMono(Vec::new())
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        let mut v = exps.to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        TimeMono(v)
    }

    /// The monomial `t_ell`.
    pub fn time(ell: usize) -> Self {
        let mut v = vec![0; ell + 1];
        v[ell] = 1;
        TimeMono(v)
    }

    /// Monomial from the sorted index multiset of an insertion `t_{l_1}...t_{l_n}`.
    pub fn from_indices(ells: &[u32]) -> Self {
        let mut v: Vec<u16> = Vec::new();
        for &l in ells {
            let l = l as usize;
            if v.len() <= l {
                v.resize(l + 1, 0);
            }
            v[l] += 1;
        }
        TimeMono(v)
    }

    pub fn exponent(&self, ell: usize) -> u16 {
        self.0.get(ell).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// Level `W = sum (2i+1) e_i`.
    pub fn level(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &e)| (2 * i as u64 + 1) * e as u64)
            .sum()
    }

    /// Largest time index with a nonzero exponent.
    pub fn max_index(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let len = self.0.len().max(rhs.0.len());
        let mut v = vec![0u16; len];
        for (i, item) in v.iter_mut().enumerate() {
            *item = self.exponent(i) + rhs.exponent(i);
        }
        TimeMono(v)
    }

    /// Multiply by `t_ell`.
    pub fn bump(&self, ell: usize) -> Self {
        let mut v = self.0.clone();
        if v.len() <= ell {
            v.resize(ell + 1, 0);
        }
        v[ell] += 1;
        TimeMono(v)
    }

    /// Divide by `t_ell` if possible.
    pub fn unbump(&self, ell: usize) -> Option<Self> {
        if self.exponent(ell) == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[ell] -= 1;
        while v.last() == Some(&0) {
            v.pop();
        }
        Some(TimeMono(v))
    }

    /// Total number of insertions `sum e_i`.
    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }
}

impl fmt::Debug for TimeMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "t{}", i)?;
            } else {
                write!(f, "t{}^{}", i, e)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimePolyError {
    /// `exp` requires a zero constant term, `log` a unit constant term.
    BadConstantTerm(&'static str),
}

impl fmt::Display for TimePolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePolyError::BadConstantTerm(what) => {
                write!(f, "constant-term precondition violated for {}", what)
            }
        }
    }
}

impl std::error::Error for TimePolyError {}

/// Sparse polynomial in the times with `NuPoly` coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct TimePoly {
    coeffs: BTreeMap<TimeMono, NuPoly>,
}

impl TimePoly {
    pub fn zero() -> Self {
        TimePoly::default()
    }

    pub fn one() -> Self {
        TimePoly::constant(NuPoly::one())
    }

    pub fn constant(c: NuPoly) -> Self {
        let mut p = TimePoly::zero();
        p.add_term(TimeMono::unit(), c);
        p
    }

    /// The time `t_ell` as a polynomial.
    pub fn time(ell: usize) -> Self {
        let mut p = TimePoly::zero();
        p.add_term(TimeMono::time(ell), NuPoly::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TimeMono, &NuPoly)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, mono: &TimeMono) -> NuPoly {
        self.coeffs.get(mono).cloned().unwrap_or_else(NuPoly::zero)
    }

    pub fn constant_term(&self) -> NuPoly {
        self.coefficient(&TimeMono::unit())
    }

    pub fn add_term(&mut self, mono: TimeMono, c: NuPoly) {
        if c.is_zero() {
            return;
        }
        let cur = self.coeffs.remove(&mono);
        let sum = match cur {
            Some(p) => &p + &c,
            None => c,
        };
        if sum.is_zero() {
            self.coeffs.remove(&mono);
        } else {
            self.coeffs.insert(mono, sum);
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in rhs.coeffs.iter() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in rhs.coeffs.iter() {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        TimePoly {
            coeffs: self.coeffs.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &NuPoly) -> Self {
        if c.is_zero() {
            return TimePoly::zero();
        }
        let mut out = TimePoly::zero();
        for (m, p) in self.coeffs.iter() {
            out.add_term(m.clone(), p * c);
        }
        out
    }

    pub fn scale_rat(&self, c: &Rat) -> Self {
        self.scale(&NuPoly::constant(c.clone()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.mul_truncated(rhs, u64::MAX)
    }

    /// Product dropping monomials above `max_level`.
    pub fn mul_truncated(&self, rhs: &Self, max_level: u64) -> Self {
        let mut out = TimePoly::zero();
        for (ma, ca) in self.coeffs.iter() {
            let la = ma.level();
            if la > max_level {
                continue;
            }
            for (mb, cb) in rhs.coeffs.iter() {
                if la + mb.level() > max_level {
                    continue;
                }
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// `d/dt_ell`; lowers the level of every monomial by exactly `2 ell + 1`.
    pub fn deriv(&self, ell: usize) -> Self {
        let mut out = TimePoly::zero();
        for (m, c) in self.coeffs.iter() {
            let e = m.exponent(ell);
            if e > 0 {
                let lowered = m.unbump(ell).expect("nonzero exponent");
                out.add_term(lowered, c.scale(&Rat::from_integer(e.into())));
            }
        }
        out
    }

    /// Multiply by `t_ell`.
    pub fn mul_time(&self, ell: usize) -> Self {
        let mut out = TimePoly::zero();
        for (m, c) in self.coeffs.iter() {
            out.add_term(m.bump(ell), c.clone());
        }
        out
    }

    /// Drop monomials above the level bound.
    pub fn truncate_level(&self, max_level: u64) -> Self {
        TimePoly {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| m.level() <= max_level)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Set `t_ell = 0` for every `ell > max_index`.
    pub fn zero_times_above(&self, max_index: usize) -> Self {
        TimePoly {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| m.max_index().is_none_or(|i| i <= max_index))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Keep only monomials that are pure powers of `t_ell`.
    pub fn restrict_to_time(&self, ell: usize) -> Self {
        TimePoly {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| {
                    m.exponents()
                        .iter()
                        .enumerate()
                        .all(|(i, &e)| e == 0 || i == ell)
                })
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn max_level(&self) -> u64 {
        self.coeffs.keys().map(|m| m.level()).max().unwrap_or(0)
    }

    /// Smallest level with a nonzero monomial.
    pub fn min_level(&self) -> Option<u64> {
        self.coeffs.keys().map(|m| m.level()).min()
    }

    /// Graded exponential `sum P^k / k!` truncated at `max_level`; the input
    /// must have zero constant term so the sum is finite per level.
    pub fn exp_truncated(&self, max_level: u64) -> Result<Self, TimePolyError> {
        if !self.constant_term().is_zero() {
            return Err(TimePolyError::BadConstantTerm("exp"));
        }
        let mut out = TimePoly::one();
        let mut power = TimePoly::one();
        let mut kfact = Rat::from_integer(1.into());
        let p = self.truncate_level(max_level);
        for k in 1..=max_level {
            power = power.mul_truncated(&p, max_level);
            if power.is_zero() {
                break;
            }
            kfact *= Rat::from_integer(k.into());
            out = out.add(&power.scale_rat(&(Rat::from_integer(1.into()) / kfact.clone())));
        }
        Ok(out)
    }

    /// Graded logarithm `sum (-1)^{k+1} (P-1)^k / k` truncated at `max_level`;
    /// the input must have unit constant term.
    pub fn log_truncated(&self, max_level: u64) -> Result<Self, TimePolyError> {
        if self.constant_term() != NuPoly::one() {
            return Err(TimePolyError::BadConstantTerm("log"));
        }
        let q = self.sub(&TimePoly::one()).truncate_level(max_level);
        let mut out = TimePoly::zero();
        let mut power = TimePoly::one();
        for k in 1..=max_level {
            power = power.mul_truncated(&q, max_level);
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1i64 } else { -1 };
            out = out.add(&power.scale_rat(&Rat::new(sign.into(), (k as i64).into())));
        }
        Ok(out)
    }

    /// Substitute a rational value for `nu` in every coefficient.
    pub fn specialize_nu(&self, nu: &Rat) -> Self {
        let mut out = TimePoly::zero();
        for (m, c) in self.coeffs.iter() {
            out.add_term(m.clone(), NuPoly::constant(c.eval(nu)));
        }
        out
    }
}

impl fmt::Debug for TimePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.coeffs.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}) {:?}", c, m)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    #[test]
    fn levels() {
        assert_eq!(TimeMono::unit().level(), 0);
        assert_eq!(TimeMono::time(0).level(), 1);
        assert_eq!(TimeMono::time(2).level(), 5);
        assert_eq!(TimeMono::from_indices(&[0, 0, 1]).level(), 5);
    }

    #[test]
    fn derivative_lowers_level() {
        let p = TimePoly::time(1).mul(&TimePoly::time(1)); // t1^2, level 6
        let d = p.deriv(1); // 2 t1, level 3
        assert_eq!(
            d.coefficient(&TimeMono::time(1)),
            NuPoly::constant(rat_int(2))
        );
        assert_eq!(d.max_level(), 3);
        assert!(p.deriv(0).is_zero());
    }

    #[test]
    fn exp_of_scalar_multiple() {
        // exp(c t0) through level 2 = 1 + c t0 + c^2/2 t0^2
        let c = NuPoly::from_coeffs([(0, rat(1, 16)), (2, rat(-1, 4))]);
        let p = TimePoly::time(0).scale(&c);
        let e = p.exp_truncated(2).unwrap();
        assert_eq!(e.constant_term(), NuPoly::one());
        assert_eq!(e.coefficient(&TimeMono::time(0)), c);
        assert_eq!(
            e.coefficient(&TimeMono::from_indices(&[0, 0])),
            (&c * &c).scale(&rat(1, 2))
        );
    }

    #[test]
    fn log_exp_round_trip() {
        let p = TimePoly::time(0)
            .scale(&NuPoly::from_coeffs([(0, rat(1, 16))]))
            .add(
                &TimePoly::time(1).scale(&NuPoly::from_coeffs([(0, rat(9, 1024)), (2, rat(1, 3))])),
            );
        let level = 7;
        let e = p.exp_truncated(level).unwrap();
        let l = e.log_truncated(level).unwrap();
        assert_eq!(l, p.truncate_level(level));
        assert!(TimePoly::one().log_truncated(3).unwrap().is_zero());
        assert!(TimePoly::time(0).log_truncated(3).is_err());
        assert!(TimePoly::one().exp_truncated(3).is_err());
    }

    #[test]
    fn restriction_helpers() {
        let p = TimePoly::time(0)
            .mul(&TimePoly::time(1))
            .add(&TimePoly::time(0).mul(&TimePoly::time(0)));
        let only_t0 = p.restrict_to_time(0);
        assert_eq!(only_t0.len(), 1);
        let no_t1 = p.zero_times_above(0);
        assert_eq!(no_t1, only_t0);
    }
}
