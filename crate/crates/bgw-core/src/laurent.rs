//! Truncated Laurent series in one variable with explicit trusted windows.
//!
//! Every series carries a window `[lo, hi]`: coefficients above `hi` are
//! exactly zero (structural top), coefficients below `lo` are unknown
//! (truncated). Reads outside the window are hard errors, never silent zeros.
//! Products shrink windows conservatively: the coefficient of `z^e` in `a*b`
//! is fully determined only when every contributing pair lies inside the
//! inputs' trusted ranges, which gives
//! `lo_out = max(a.lo + b.hi, b.lo + a.hi)`, `hi_out = a.hi + b.hi`.
//!
//! Exact Laurent polynomials are represented with `lo` at a large negative
//! sentinel, so the same window rules apply uniformly.

use crate::nupoly::NuPoly;
use crate::rational::Rat;
use std::collections::BTreeMap;
use std::fmt;

/// Sentinel lower bound for exact series (nothing truncated).
pub const EXACT_LO: i64 = i64::MIN >> 20;

const EXACT_THRESHOLD: i64 = EXACT_LO / 2;

fn clamp_lo(lo: i64) -> i64 {
    if lo <= EXACT_THRESHOLD {
        EXACT_LO
    } else {
        lo
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesError {
    /// Two series in different variables were combined.
    VariableMismatch { left: u32, right: u32 },
    /// A coefficient below the trusted window was requested.
    OutsideWindow { var: u32, exponent: i64, lo: i64 },
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::VariableMismatch { left, right } => {
                write!(f, "variable tags differ: z{} vs z{}", left, right)
            }
            SeriesError::OutsideWindow { var, exponent, lo } => write!(
                f,
                "coefficient of z{}^{} is below the trusted window (lo = {})",
                var, exponent, lo
            ),
        }
    }
}

impl std::error::Error for SeriesError {}

/// Laurent series in a tagged variable, trusted on `[lo, hi]`.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    var: u32,
    coeffs: BTreeMap<i64, NuPoly>,
    lo: i64,
    hi: i64,
}

impl LaurentSeries {
    /// The zero series, exact everywhere.
    pub fn zero(var: u32) -> Self {
        LaurentSeries {
            var,
            coeffs: BTreeMap::new(),
            lo: EXACT_LO,
            hi: 0,
        }
    }

    /// Exact single monomial `c * z^exp`.
    pub fn monomial(var: u32, exp: i64, c: NuPoly) -> Self {
        let mut s = LaurentSeries::zero(var);
        s.hi = exp;
        s.set_coeff(exp, c);
        s
    }

    /// Exact constant.
    pub fn constant(var: u32, c: NuPoly) -> Self {
        LaurentSeries::monomial(var, 0, c)
    }

    /// Exact Laurent polynomial from explicit terms.
    pub fn exact_from_terms(var: u32, terms: impl IntoIterator<Item = (i64, NuPoly)>) -> Self {
        let mut s = LaurentSeries::zero(var);
        let mut hi = 0;
        for (e, c) in terms {
            hi = hi.max(e);
            s.add_coeff(e, c);
        }
        s.hi = s.coeffs.keys().next_back().copied().unwrap_or(0).max(hi);
        s
    }

    /// Truncated series: trusted exactly on `[lo, hi]`; stored exponents must
    /// lie inside the window.
    pub fn truncated(
        var: u32,
        terms: impl IntoIterator<Item = (i64, NuPoly)>,
        lo: i64,
        hi: i64,
    ) -> Self {
        let mut s = LaurentSeries {
            var,
            coeffs: BTreeMap::new(),
            lo: clamp_lo(lo),
            hi,
        };
        for (e, c) in terms {
            assert!(
                e >= s.lo && e <= s.hi,
                "exponent {} outside window [{}, {}]",
                e,
                lo,
                hi
            );
            s.add_coeff(e, c);
        }
        s
    }

    pub fn var(&self) -> u32 {
        self.var
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == EXACT_LO
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &NuPoly)> {
        self.coeffs.iter()
    }

    fn set_coeff(&mut self, e: i64, c: NuPoly) {
        if c.is_zero() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, c);
        }
    }

    fn add_coeff(&mut self, e: i64, c: NuPoly) {
        if c.is_zero() {
            return;
        }
        let cur = self.coeffs.remove(&e);
        let sum = match cur {
            Some(p) => &p + &c,
            None => c,
        };
        self.set_coeff(e, sum);
    }

    /// Coefficient of `z^e`. Exponents above `hi` are exactly zero; below `lo`
    /// the value is unknown and an error is returned.
    pub fn coeff(&self, e: i64) -> Result<NuPoly, SeriesError> {
        if e < self.lo {
            return Err(SeriesError::OutsideWindow {
                var: self.var,
                exponent: e,
                lo: self.lo,
            });
        }
        Ok(self.coeffs.get(&e).cloned().unwrap_or_else(NuPoly::zero))
    }

    /// True if every trusted coefficient vanishes.
    pub fn is_zero_on_window(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest-exponent nonzero term, for diagnostics.
    pub fn leading_term(&self) -> Option<(i64, &NuPoly)> {
        self.coeffs.iter().next_back().map(|(e, c)| (*e, c))
    }

    fn check_var(&self, rhs: &Self) -> Result<(), SeriesError> {
        if self.var != rhs.var {
            return Err(SeriesError::VariableMismatch {
                left: self.var,
                right: rhs.var,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, SeriesError> {
        self.check_var(rhs)?;
        let lo = clamp_lo(self.lo.max(rhs.lo));
        let hi = self.hi.max(rhs.hi);
        let mut out = LaurentSeries {
            var: self.var,
            coeffs: BTreeMap::new(),
            lo,
            hi,
        };
        for (&e, c) in self.coeffs.iter().chain(rhs.coeffs.iter()) {
            if e >= lo {
                out.add_coeff(e, c.clone());
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, SeriesError> {
        self.checked_add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            var: self.var,
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c)).collect(),
            lo: self.lo,
            hi: self.hi,
        }
    }

    /// Cauchy product restricted to the conservatively intersected window.
    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, SeriesError> {
        self.check_var(rhs)?;
        let lo = clamp_lo((self.lo.saturating_add(rhs.hi)).max(rhs.lo.saturating_add(self.hi)));
        let hi = self.hi + rhs.hi;
        let mut out = LaurentSeries {
            var: self.var,
            coeffs: BTreeMap::new(),
            lo,
            hi,
        };
        for (&ea, ca) in self.coeffs.iter() {
            for (&eb, cb) in rhs.coeffs.iter() {
                let e = ea + eb;
                if e >= lo {
                    out.add_coeff(e, ca * cb);
                }
            }
        }
        Ok(out)
    }

    /// Term-wise `d/dz`; the window top shifts down by one.
    pub fn derivative(&self) -> Self {
        let mut out = LaurentSeries {
            var: self.var,
            coeffs: BTreeMap::new(),
            lo: clamp_lo(if self.is_exact() {
                EXACT_LO
            } else {
                self.lo - 1
            }),
            hi: self.hi - 1,
        };
        for (&e, c) in self.coeffs.iter() {
            out.add_coeff(e - 1, c.scale(&Rat::from_integer(e.into())));
        }
        out
    }

    pub fn scale_nupoly(&self, c: &NuPoly) -> Self {
        if c.is_zero() {
            let mut z = LaurentSeries::zero(self.var);
            z.lo = self.lo;
            z.hi = self.hi;
            return z;
        }
        LaurentSeries {
            var: self.var,
            coeffs: self.coeffs.iter().map(|(&e, p)| (e, p * c)).collect(),
            lo: self.lo,
            hi: self.hi,
        }
    }

    pub fn scale_rat(&self, c: &Rat) -> Self {
        self.scale_nupoly(&NuPoly::constant(c.clone()))
    }

    /// Substitute a rational value for `nu` in every coefficient.
    pub fn specialize_nu(&self, nu: &Rat) -> Self {
        let mut out = LaurentSeries {
            var: self.var,
            coeffs: BTreeMap::new(),
            lo: self.lo,
            hi: self.hi,
        };
        for (&e, c) in self.coeffs.iter() {
            out.add_coeff(e, NuPoly::constant(c.eval(nu)));
        }
        out
    }

    /// Apply `nu -> -nu` to every coefficient.
    pub fn subst_neg_nu(&self) -> Self {
        LaurentSeries {
            var: self.var,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, c)| (e, c.subst_neg_nu()))
                .collect(),
            lo: self.lo,
            hi: self.hi,
        }
    }

    /// Narrow the trusted window; stored terms outside are dropped.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        let lo = clamp_lo(lo.max(self.lo));
        let hi = hi.min(self.hi);
        LaurentSeries {
            var: self.var,
            coeffs: self
                .coeffs
                .range(lo..=hi)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
            lo,
            hi,
        }
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}: [", self.var)?;
        let mut first = true;
        for (&e, c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}) z^{}", c, e)?;
        }
        if first {
            write!(f, "0")?;
        }
        if self.is_exact() {
            write!(f, "] (exact)")
        } else {
            write!(f, "] window [{}, {}]", self.lo, self.hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_int, Rat};

    fn c(n: i64) -> NuPoly {
        NuPoly::constant(rat_int(n))
    }

    #[test]
    fn exact_polynomial_product() {
        // (z + 1)(z - 1) = z^2 - 1, exact
        let a = LaurentSeries::exact_from_terms(0, [(1, c(1)), (0, c(1))]);
        let b = LaurentSeries::exact_from_terms(0, [(1, c(1)), (0, c(-1))]);
        let p = a.checked_mul(&b).unwrap();
        assert!(p.is_exact());
        assert_eq!(p.coeff(2).unwrap(), NuPoly::one());
        assert_eq!(p.coeff(1).unwrap(), NuPoly::zero());
        assert_eq!(p.coeff(0).unwrap(), c(-1));
        assert_eq!(p.coeff(-5).unwrap(), NuPoly::zero());
    }

    #[test]
    fn window_of_truncated_product() {
        // two series trusted on [-3, 1]: the product is trusted on [-2, 2]
        let a = LaurentSeries::truncated(0, [(1, c(1)), (-3, c(2))], -3, 1);
        let b = LaurentSeries::truncated(0, [(1, c(1)), (-3, c(5))], -3, 1);
        let p = a.checked_mul(&b).unwrap();
        assert_eq!(p.window(), (-2, 2));
        assert!(p.coeff(-3).is_err());
    }

    #[test]
    fn zero_series_product() {
        let a = LaurentSeries::truncated(0, [(0, c(3))], -4, 0);
        let z = LaurentSeries::zero(0);
        let p = a.checked_mul(&z).unwrap();
        assert!(p.is_zero_on_window());
    }

    #[test]
    fn variable_mismatch_rejected() {
        let a = LaurentSeries::zero(0);
        let b = LaurentSeries::zero(1);
        assert!(matches!(
            a.checked_mul(&b),
            Err(SeriesError::VariableMismatch { .. })
        ));
    }

    #[test]
    fn derivative_shifts_window() {
        let a = LaurentSeries::exact_from_terms(0, [(2, c(1))]);
        let d = a.derivative();
        assert_eq!(d.coeff(1).unwrap(), c(2));
        // d/dz (c z^-1) = -c z^-2
        let b = LaurentSeries::exact_from_terms(0, [(-1, c(7))]);
        assert_eq!(b.derivative().coeff(-2).unwrap(), c(-7));
        // constants differentiate to zero
        let k = LaurentSeries::constant(0, c(5));
        assert!(k.derivative().is_zero_on_window());
        // truncated window shifts down at the top
        let t = LaurentSeries::truncated(0, [(0, c(1))], -3, 1);
        assert_eq!(t.derivative().window(), (-4, 0));
    }

    #[test]
    fn window_soundness_against_higher_order() {
        // Compare a product of truncations against the product of wider
        // truncations of the same underlying series: all coefficients inside
        // the declared window must agree.
        let full = |n: i64| -> LaurentSeries {
            // sum_{k=-n..1} (k^2+1) z^k as a stand-in for an asymptotic series
            LaurentSeries::truncated(
                0,
                (-n..=1).map(|k| (k, NuPoly::constant(Rat::from_integer((k * k + 1).into())))),
                -n,
                1,
            )
        };
        let narrow = full(3).checked_mul(&full(3)).unwrap();
        let wide = full(9).checked_mul(&full(9)).unwrap();
        let (lo, hi) = narrow.window();
        assert_eq!((lo, hi), (-2, 2));
        for e in lo..=hi {
            assert_eq!(
                narrow.coeff(e).unwrap(),
                wide.coeff(e).unwrap(),
                "exponent {}",
                e
            );
        }
    }
}
