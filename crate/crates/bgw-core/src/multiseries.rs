//! Truncated multivariate Laurent series with per-variable exponent windows,
//! and the region expansion of the rational factors `1/(z_a - z_b)`.
//!
//! The expansion region is fixed once and for all to `|z_1| > |z_2| > ... > |z_n|`:
//! in every factor `1/(z_a - z_b)` the variable with the smaller index carries
//! the negative exponents. Window boxes follow the same conservative rules as
//! the univariate case, applied per variable; note that the upper bound of a
//! [`geometric_denominator`] in its large-modulus slot is a truncation order,
//! not a structural top, so consumers that multiply such factors must justify
//! their truncation orders independently (the correlator engine does).

use crate::laurent::{LaurentSeries, EXACT_LO};
use crate::nupoly::NuPoly;
use crate::rational::Rat;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MultiSeriesError {
    ArityMismatch { left: usize, right: usize },
    EqualIndices(usize),
    OutsideBox { exponents: Vec<i64> },
}

impl fmt::Display for MultiSeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiSeriesError::ArityMismatch { left, right } => {
                write!(f, "arity mismatch: {} vs {}", left, right)
            }
            MultiSeriesError::EqualIndices(i) => {
                write!(
                    f,
                    "geometric denominator needs distinct variables, got z{0} - z{0}",
                    i
                )
            }
            MultiSeriesError::OutsideBox { exponents } => {
                write!(
                    f,
                    "coefficient at {:?} is outside the trusted box",
                    exponents
                )
            }
        }
    }
}

impl std::error::Error for MultiSeriesError {}

/// Sparse series in `z_0 ... z_{n-1}` with an exponent window per variable.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiSeries {
    arity: usize,
    coeffs: BTreeMap<Vec<i64>, NuPoly>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

fn clamp_lo(v: i64) -> i64 {
    if v <= EXACT_LO / 2 {
        EXACT_LO
    } else {
        v
    }
}

impl MultiSeries {
    pub fn zero(arity: usize) -> Self {
        MultiSeries {
            arity,
            coeffs: BTreeMap::new(),
            lo: vec![EXACT_LO; arity],
            hi: vec![0; arity],
        }
    }

    pub fn constant(arity: usize, c: NuPoly) -> Self {
        let mut s = MultiSeries::zero(arity);
        if !c.is_zero() {
            s.coeffs.insert(vec![0; arity], c);
        }
        s
    }

    /// Embed a univariate series as variable `pos` of an `arity`-variate one.
    pub fn from_laurent(ls: &LaurentSeries, arity: usize, pos: usize) -> Self {
        assert!(pos < arity);
        let (llo, lhi) = ls.window();
        let mut s = MultiSeries::zero(arity);
        s.lo[pos] = llo;
        s.hi[pos] = lhi;
        for (&e, c) in ls.terms() {
            let mut key = vec![0; arity];
            key[pos] = e;
            s.coeffs.insert(key, c.clone());
        }
        s
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn window(&self) -> (&[i64], &[i64]) {
        (&self.lo, &self.hi)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &NuPoly)> {
        self.coeffs.iter()
    }

    /// Stored coefficient (zero default), with no window check. Engine callers
    /// must establish trust through their own truncation-margin arguments.
    pub fn raw_coeff(&self, exps: &[i64]) -> NuPoly {
        self.coeffs.get(exps).cloned().unwrap_or_else(NuPoly::zero)
    }

    /// Coefficient with a window check: any exponent below its variable's
    /// trusted bound is an error, exponents above the top are exactly zero.
    pub fn coeff(&self, exps: &[i64]) -> Result<NuPoly, MultiSeriesError> {
        assert_eq!(exps.len(), self.arity);
        for v in 0..self.arity {
            if exps[v] < self.lo[v] {
                return Err(MultiSeriesError::OutsideBox {
                    exponents: exps.to_vec(),
                });
            }
        }
        Ok(self.raw_coeff(exps))
    }

    fn add_coeff(&mut self, key: Vec<i64>, c: NuPoly) {
        if c.is_zero() {
            return;
        }
        let cur = self.coeffs.remove(&key);
        let sum = match cur {
            Some(p) => &p + &c,
            None => c,
        };
        if sum.is_zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, sum);
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, MultiSeriesError> {
        if self.arity != rhs.arity {
            return Err(MultiSeriesError::ArityMismatch {
                left: self.arity,
                right: rhs.arity,
            });
        }
        let lo: Vec<i64> = (0..self.arity)
            .map(|v| clamp_lo(self.lo[v].max(rhs.lo[v])))
            .collect();
        let hi: Vec<i64> = (0..self.arity).map(|v| self.hi[v].max(rhs.hi[v])).collect();
        let mut out = MultiSeries {
            arity: self.arity,
            coeffs: BTreeMap::new(),
            lo,
            hi,
        };
        for (key, c) in self.coeffs.iter().chain(rhs.coeffs.iter()) {
            if (0..self.arity).all(|v| key[v] >= out.lo[v]) {
                out.add_coeff(key.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Merge coefficients with no window-based dropping; the result window is
    /// the hull of the inputs. This is the right addition for engines that
    /// track truncation soundness themselves (the conservative window rule is
    /// meaningless once truncated geometric factors enter the picture).
    pub fn hull_add(&self, rhs: &Self) -> Result<Self, MultiSeriesError> {
        if self.arity != rhs.arity {
            return Err(MultiSeriesError::ArityMismatch {
                left: self.arity,
                right: rhs.arity,
            });
        }
        let lo: Vec<i64> = (0..self.arity).map(|v| self.lo[v].min(rhs.lo[v])).collect();
        let hi: Vec<i64> = (0..self.arity).map(|v| self.hi[v].max(rhs.hi[v])).collect();
        let mut out = MultiSeries {
            arity: self.arity,
            coeffs: self.coeffs.clone(),
            lo,
            hi,
        };
        for (key, c) in rhs.coeffs.iter() {
            out.add_coeff(key.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        MultiSeries {
            arity: self.arity,
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        }
    }

    pub fn scale(&self, c: &NuPoly) -> Self {
        if c.is_zero() {
            let mut z = MultiSeries::zero(self.arity);
            z.lo = self.lo.clone();
            z.hi = self.hi.clone();
            return z;
        }
        MultiSeries {
            arity: self.arity,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, p)| (k.clone(), p * c))
                .collect(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        }
    }

    pub fn scale_rat(&self, c: &Rat) -> Self {
        self.scale(&NuPoly::constant(c.clone()))
    }

    /// Product with the per-variable conservative window rule.
    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, MultiSeriesError> {
        self.mul_filtered(rhs, |_| true)
    }

    /// Product keeping only monomials accepted by `keep`; windows follow the
    /// conservative rule regardless of the filter.
    pub fn mul_filtered(
        &self,
        rhs: &Self,
        keep: impl Fn(&[i64]) -> bool,
    ) -> Result<Self, MultiSeriesError> {
        if self.arity != rhs.arity {
            return Err(MultiSeriesError::ArityMismatch {
                left: self.arity,
                right: rhs.arity,
            });
        }
        let n = self.arity;
        let lo: Vec<i64> = (0..n)
            .map(|v| {
                clamp_lo(
                    (self.lo[v].saturating_add(rhs.hi[v]))
                        .max(rhs.lo[v].saturating_add(self.hi[v])),
                )
            })
            .collect();
        let hi: Vec<i64> = (0..n).map(|v| self.hi[v] + rhs.hi[v]).collect();
        let mut out = MultiSeries {
            arity: n,
            coeffs: BTreeMap::new(),
            lo,
            hi,
        };
        let mut key = vec![0i64; n];
        for (ka, ca) in self.coeffs.iter() {
            for (kb, cb) in rhs.coeffs.iter() {
                for v in 0..n {
                    key[v] = ka[v] + kb[v];
                }
                if keep(&key) {
                    out.add_coeff(key.clone(), ca * cb);
                }
            }
        }
        Ok(out)
    }

    /// Drop stored monomials failing the predicate (windows untouched).
    pub fn retain(&mut self, keep: impl Fn(&[i64]) -> bool) {
        self.coeffs.retain(|k, _| keep(k));
    }

    /// Substitute a rational for `nu` in every coefficient.
    pub fn specialize_nu(&self, nu: &Rat) -> Self {
        let mut out = MultiSeries {
            arity: self.arity,
            coeffs: BTreeMap::new(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        };
        for (k, c) in self.coeffs.iter() {
            out.add_coeff(k.clone(), NuPoly::constant(c.eval(nu)));
        }
        out
    }
}

impl fmt::Debug for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "MultiSeries(arity {}, {} terms)",
            self.arity,
            self.coeffs.len()
        )?;
        for (k, c) in self.coeffs.iter() {
            writeln!(f, "  {:?}: {}", k, c)?;
        }
        Ok(())
    }
}

/// Region expansion of `1/(z_a - z_b)` in `|z_1| > ... > |z_n|`, truncated at
/// `order`: when `a < b` this is `sum_{k=0..order} z_b^k z_a^{-k-1}`, and the
/// negated mirror otherwise. Every emitted monomial has total degree -1.
pub fn geometric_denominator(
    arity: usize,
    a_pos: usize,
    b_pos: usize,
    order: i64,
) -> Result<MultiSeries, MultiSeriesError> {
    if a_pos == b_pos {
        return Err(MultiSeriesError::EqualIndices(a_pos));
    }
    assert!(a_pos < arity && b_pos < arity);
    let (neg_var, pos_var, sign) = if a_pos < b_pos {
        (a_pos, b_pos, NuPoly::one())
    } else {
        (b_pos, a_pos, -&NuPoly::one())
    };
    let mut s = MultiSeries::zero(arity);
    s.lo[neg_var] = -order - 1;
    s.hi[neg_var] = -1;
    s.lo[pos_var] = 0;
    s.hi[pos_var] = order; // truncation order, not a structural top
    for k in 0..=order {
        let mut key = vec![0i64; arity];
        key[neg_var] = -k - 1;
        key[pos_var] = k;
        s.coeffs.insert(key, sign.clone());
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn c(n: i64) -> NuPoly {
        NuPoly::constant(rat_int(n))
    }

    #[test]
    fn geometric_series_region() {
        // 1/(z1 - z2) at order 2: z1^-1 + z2 z1^-2 + z2^2 z1^-3
        let g = geometric_denominator(2, 0, 1, 2).unwrap();
        assert_eq!(g.raw_coeff(&[-1, 0]), NuPoly::one());
        assert_eq!(g.raw_coeff(&[-2, 1]), NuPoly::one());
        assert_eq!(g.raw_coeff(&[-3, 2]), NuPoly::one());
        assert_eq!(g.len(), 3);
        // every monomial has total degree -1
        for (k, _) in g.terms() {
            assert_eq!(k.iter().sum::<i64>(), -1);
        }
        // 1/(z2 - z1) in the same region is the negated mirror
        let h = geometric_denominator(2, 1, 0, 2).unwrap();
        assert_eq!(h.raw_coeff(&[-1, 0]), -&NuPoly::one());
        assert_eq!(h.raw_coeff(&[-2, 1]), -&NuPoly::one());
        assert!(geometric_denominator(2, 1, 1, 2).is_err());
    }

    #[test]
    fn derivative_of_geometric_series() {
        // (z1+z2)/(z1-z2)^2 expands to sum (2k+1) z2^k z1^{-k-1}: verify the
        // first orders by squaring the geometric series and multiplying.
        let order = 6;
        let g = geometric_denominator(2, 0, 1, order).unwrap();
        let g2 = g.checked_mul(&g).unwrap();
        let zsum = {
            let mut s = MultiSeries::zero(2);
            s.hi = vec![1, 1];
            s.coeffs.insert(vec![1, 0], NuPoly::one());
            s.coeffs.insert(vec![0, 1], NuPoly::one());
            s
        };
        let p = zsum.checked_mul(&g2).unwrap();
        for k in 0..=3i64 {
            assert_eq!(p.raw_coeff(&[-k - 1, k]), c(2 * k + 1), "k = {}", k);
        }
    }

    #[test]
    fn outer_product_of_disjoint_variables() {
        let a = LaurentSeries::exact_from_terms(0, [(1, c(2)), (0, c(1))]);
        let b = LaurentSeries::exact_from_terms(1, [(-1, c(3))]);
        let ma = MultiSeries::from_laurent(&a, 2, 0);
        let mb = MultiSeries::from_laurent(&b, 2, 1);
        let p = ma.checked_mul(&mb).unwrap();
        assert_eq!(p.raw_coeff(&[1, -1]), c(6));
        assert_eq!(p.raw_coeff(&[0, -1]), c(3));
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let a = MultiSeries::zero(2);
        let b = MultiSeries::zero(3);
        assert!(a.checked_add(&b).is_err());
    }
}
