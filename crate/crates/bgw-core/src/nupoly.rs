//! Polynomials in the deformation parameter `nu` over exact rationals.
//!
//! These are the coefficients of every series in the engine. The module also
//! provides the Pochhammer (rising factorial) builders `(offset ± nu)_k`,
//! including the `k = -1` convention `(a)_{-1} = 1/(a-1)`, which is only
//! available through [`pochhammer_ratio`] since it leaves the polynomial ring.

use crate::rational::{format_rat, Rat};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Sign of the `nu` term inside a Pochhammer symbol `(offset + sign * nu)_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuSign {
    Plus,
    Minus,
}

impl NuSign {
    fn to_rat(self) -> Rat {
        match self {
            NuSign::Plus => Rat::one(),
            NuSign::Minus => -Rat::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NuPolyError {
    /// Pochhammer index below -1.
    PochhammerIndex(i64),
    /// `(a)_{-1}` requested through the polynomial-only interface; the value
    /// `1/(a-1)` is not a polynomial in `nu`.
    PochhammerNotPolynomial,
    /// Division with a nonzero remainder, or by zero.
    InexactDivision,
}

impl fmt::Display for NuPolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NuPolyError::PochhammerIndex(k) => write!(f, "pochhammer index {} < -1", k),
            NuPolyError::PochhammerNotPolynomial => {
                write!(
                    f,
                    "(a)_(-1) is not a polynomial in nu; use pochhammer_ratio"
                )
            }
            NuPolyError::InexactDivision => write!(f, "inexact polynomial division"),
        }
    }
}

impl std::error::Error for NuPolyError {}

/// Sparse polynomial in `nu` with rational coefficients; no zero terms stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct NuPoly {
    coeffs: BTreeMap<u32, Rat>,
}

impl NuPoly {
    pub fn zero() -> Self {
        NuPoly::default()
    }

    pub fn one() -> Self {
        NuPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(0, c);
        }
        NuPoly { coeffs }
    }

    /// The variable `nu` itself.
    pub fn nu() -> Self {
        NuPoly::monomial(1, Rat::one())
    }

    pub fn monomial(degree: u32, c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(degree, c);
        }
        NuPoly { coeffs }
    }

    pub fn from_coeffs(pairs: impl IntoIterator<Item = (u32, Rat)>) -> Self {
        let mut p = NuPoly::zero();
        for (d, c) in pairs {
            p.add_term(d, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, degree: u32) -> Rat {
        self.coeffs.get(&degree).cloned().unwrap_or_else(Rat::zero)
    }

    /// Constant term; equals the full value when the polynomial is constant.
    pub fn constant_term(&self) -> Rat {
        self.coeff(0)
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.degree() {
            None => Some(Rat::zero()),
            Some(0) => Some(self.constant_term()),
            Some(_) => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u32, &Rat)> {
        self.coeffs.iter()
    }

    fn add_term(&mut self, degree: u32, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(degree) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return NuPoly::zero();
        }
        NuPoly {
            coeffs: self.coeffs.iter().map(|(d, a)| (*d, a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = NuPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at a rational value of `nu`.
    pub fn eval(&self, nu: &Rat) -> Rat {
        // Horner over the sparse support.
        let mut acc = Rat::zero();
        let mut prev_deg: Option<u32> = None;
        for (&d, c) in self.coeffs.iter().rev() {
            if let Some(p) = prev_deg {
                for _ in 0..(p - d) {
                    acc *= nu;
                }
            }
            acc += c.clone();
            prev_deg = Some(d);
        }
        if let Some(d) = prev_deg {
            for _ in 0..d {
                acc *= nu;
            }
        }
        acc
    }

    /// The image under `nu -> -nu` (sign flip of odd-degree terms).
    pub fn subst_neg_nu(&self) -> Self {
        NuPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&d, c)| (d, if d % 2 == 1 { -c.clone() } else { c.clone() }))
                .collect(),
        }
    }

    /// True if invariant under `nu -> -nu`, i.e. only even powers occur.
    pub fn is_even(&self) -> bool {
        self.coeffs.keys().all(|d| d % 2 == 0)
    }

    /// Exact division; returns an error if the remainder is nonzero.
    pub fn exact_div(&self, divisor: &NuPoly) -> Result<NuPoly, NuPolyError> {
        if divisor.is_zero() {
            return Err(NuPolyError::InexactDivision);
        }
        let dd = divisor.degree().unwrap();
        let dl = divisor.coeff(dd);
        let mut rem = self.clone();
        let mut quot = NuPoly::zero();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                return Err(NuPolyError::InexactDivision);
            }
            let q = rem.coeff(rd) / dl.clone();
            let shift = rd - dd;
            quot.add_term(shift, q.clone());
            let piece = divisor.scale(&q);
            for (d, c) in piece.coeffs {
                rem.add_term(d + shift, -c);
            }
        }
        Ok(quot)
    }
}

impl Add for &NuPoly {
    type Output = NuPoly;
    fn add(self, rhs: &NuPoly) -> NuPoly {
        let mut out = self.clone();
        for (&d, c) in rhs.coeffs.iter() {
            out.add_term(d, c.clone());
        }
        out
    }
}

impl Sub for &NuPoly {
    type Output = NuPoly;
    fn sub(self, rhs: &NuPoly) -> NuPoly {
        let mut out = self.clone();
        for (&d, c) in rhs.coeffs.iter() {
            out.add_term(d, -c.clone());
        }
        out
    }
}

impl Neg for &NuPoly {
    type Output = NuPoly;
    fn neg(self) -> NuPoly {
        NuPoly {
            coeffs: self.coeffs.iter().map(|(&d, c)| (d, -c.clone())).collect(),
        }
    }
}

impl Mul for &NuPoly {
    type Output = NuPoly;
    fn mul(self, rhs: &NuPoly) -> NuPoly {
        let mut out = NuPoly::zero();
        for (&da, ca) in self.coeffs.iter() {
            for (&db, cb) in rhs.coeffs.iter() {
                out.add_term(da + db, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for NuPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&d, c) in self.coeffs.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match d {
                0 => write!(f, "{}", format_rat(c))?,
                1 => write!(f, "({})*nu", format_rat(c))?,
                _ => write!(f, "({})*nu^{}", format_rat(c), d)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for NuPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Rising factorial `(offset + sign*nu)_k` for `k >= 0`, as an exact polynomial.
///
/// `k = -1` is rejected here because `(a)_{-1} = 1/(a-1)` leaves the ring;
/// use [`pochhammer_ratio`] where that convention is needed.
pub fn pochhammer(offset: &Rat, sign: NuSign, k: i64) -> Result<NuPoly, NuPolyError> {
    if k < -1 {
        return Err(NuPolyError::PochhammerIndex(k));
    }
    if k == -1 {
        return Err(NuPolyError::PochhammerNotPolynomial);
    }
    let lin = NuPoly::from_coeffs([(0, offset.clone()), (1, sign.to_rat())]);
    let mut acc = NuPoly::one();
    for j in 0..k {
        let shifted = &lin + &NuPoly::constant(Rat::from_integer(j.into()));
        acc = &acc * &shifted;
    }
    Ok(acc)
}

/// Rising factorial `(offset + sign*nu)_k` as an exact fraction of polynomials.
///
/// For `k >= 0` the denominator is 1; for `k = -1` it is `offset - 1 + sign*nu`
/// per the convention `(a)_{-1} = 1/(a-1)`. Callers must cancel the denominator
/// exactly before using the value as a series coefficient.
pub fn pochhammer_ratio(
    offset: &Rat,
    sign: NuSign,
    k: i64,
) -> Result<(NuPoly, NuPoly), NuPolyError> {
    if k < -1 {
        return Err(NuPolyError::PochhammerIndex(k));
    }
    if k == -1 {
        let den = NuPoly::from_coeffs([(0, offset - Rat::one()), (1, sign.to_rat())]);
        return Ok((NuPoly::one(), den));
    }
    Ok((pochhammer(offset, sign, k)?, NuPoly::one()))
}
