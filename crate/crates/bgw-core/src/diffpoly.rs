//! Differential polynomials in one dependent symbol `u` and its derivative
//! tower `u^(0), u^(1), ...` over a small composable coefficient ring.
//!
//! Coefficients ([`Param`]) are sparse Laurent monomials in four symbol slots:
//! the independent variable `w` (called `x` or `y` by callers), a scalar
//! parameter `p` (a KdV time or a Painleve constant), the spectral variable
//! `z` (integer exponents), and an auxiliary unit `s` (integer exponents, used
//! to adjoin formal cube roots). The total derivative acts on `w` explicitly
//! and shifts the derivative tower; it satisfies the Leibniz rule by
//! construction and by property test.

use crate::rational::{format_rat, Rat};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Exponents of `(w, p, z, s)`; `w` and `p` never go negative.
pub type ParamExp = [i32; 4];

/// Sparse coefficient ring element.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Param {
    terms: BTreeMap<ParamExp, Rat>,
}

impl Param {
    pub fn zero() -> Self {
        Param::default()
    }

    pub fn one() -> Self {
        Param::from_rat(Rat::one())
    }

    pub fn from_rat(c: Rat) -> Self {
        let mut p = Param::zero();
        p.add_term([0; 4], c);
        p
    }

    pub fn from_i64(n: i64) -> Self {
        Param::from_rat(Rat::from_integer(n.into()))
    }

    pub fn monomial(exp: ParamExp, c: Rat) -> Self {
        let mut p = Param::zero();
        p.add_term(exp, c);
        p
    }

    /// The independent variable `w`.
    pub fn w() -> Self {
        Param::monomial([1, 0, 0, 0], Rat::one())
    }

    /// The scalar parameter `p`.
    pub fn par() -> Self {
        Param::monomial([0, 1, 0, 0], Rat::one())
    }

    /// `z^e`, any integer exponent.
    pub fn z_pow(e: i32) -> Self {
        Param::monomial([0, 0, e, 0], Rat::one())
    }

    /// `s^e`, any integer exponent.
    pub fn s_pow(e: i32) -> Self {
        Param::monomial([0, 0, 0, e], Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ParamExp, &Rat)> {
        self.terms.iter()
    }

    fn add_term(&mut self, exp: ParamExp, c: Rat) {
        if c.is_zero() {
            return;
        }
        let cur = self.terms.remove(&exp);
        let sum = match cur {
            Some(a) => a + c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, sum);
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in rhs.terms.iter() {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        Param {
            terms: self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Param::zero();
        for (&ea, ca) in self.terms.iter() {
            for (&eb, cb) in rhs.terms.iter() {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Param::zero();
        }
        Param {
            terms: self.terms.iter().map(|(&e, a)| (e, a * c)).collect(),
        }
    }

    /// `d/dw` (power rule on the first slot).
    pub fn d_dw(&self) -> Self {
        let mut out = Param::zero();
        for (&e, c) in self.terms.iter() {
            if e[0] != 0 {
                let mut f = e;
                f[0] -= 1;
                out.add_term(f, c * Rat::from_integer(e[0].into()));
            }
        }
        out
    }

    /// `d/dz` (power rule on the `z` slot, Laurent exponents allowed).
    pub fn d_dz(&self) -> Self {
        let mut out = Param::zero();
        for (&e, c) in self.terms.iter() {
            if e[2] != 0 {
                let mut f = e;
                f[2] -= 1;
                out.add_term(f, c * Rat::from_integer(e[2].into()));
            }
        }
        out
    }

    /// Substitute each slot by an arbitrary ring element.
    pub fn substitute(&self, images: &dyn Fn(usize, i32) -> Param) -> Param {
        let mut out = Param::zero();
        for (&e, c) in self.terms.iter() {
            let mut term = Param::from_rat(c.clone());
            for (slot, &exp) in e.iter().enumerate() {
                if exp != 0 {
                    term = term.mul(&images(slot, exp));
                }
            }
            out = out.add(&term);
        }
        out
    }

    pub fn depends_on_slot(&self, slot: usize) -> bool {
        self.terms.keys().any(|e| e[slot] != 0)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["w", "p", "z", "s"];
        let mut first = true;
        for (&e, c) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", format_rat(c))?;
            for (slot, &exp) in e.iter().enumerate() {
                if exp == 1 {
                    write!(f, "*{}", names[slot])?;
                } else if exp != 0 {
                    write!(f, "*{}^{}", names[slot], exp)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiffPolyError {
    /// Integration hit a remainder that is not a total derivative.
    NotATotalDerivative(String),
    /// A coefficient slot was present where the evaluation target forbids it.
    UnsupportedSlot(&'static str),
}

impl fmt::Display for DiffPolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffPolyError::NotATotalDerivative(s) => {
                write!(f, "expression is not a total derivative: {}", s)
            }
            DiffPolyError::UnsupportedSlot(s) => write!(f, "unsupported coefficient symbol {}", s),
        }
    }
}

impl std::error::Error for DiffPolyError {}

/// Monomial in the derivative tower: `pows[k]` is the power of `u^(k)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct DMono(Vec<u32>);

impl DMono {
    pub fn unit() -> Self {
        DMono(Vec::new())
    }

    pub fn u_deriv(k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = 1;
        DMono(v)
    }

    pub fn pow_of(&self, k: usize) -> u32 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    fn trimmed(mut v: Vec<u32>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        DMono(v)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let len = self.0.len().max(rhs.0.len());
        let mut v = vec![0; len];
        for (i, item) in v.iter_mut().enumerate() {
            *item = self.pow_of(i) + rhs.pow_of(i);
        }
        DMono::trimmed(v)
    }

    pub fn with_power(&self, k: usize, pow: u32) -> Self {
        let mut v = self.0.clone();
        if v.len() <= k {
            v.resize(k + 1, 0);
        }
        v[k] = pow;
        DMono::trimmed(v)
    }
}

impl fmt::Debug for DMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (k, &p) in self.0.iter().enumerate() {
            if p == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if p == 1 {
                write!(f, "u{}", k)?;
            } else {
                write!(f, "u{}^{}", k, p)?;
            }
        }
        Ok(())
    }
}

/// Differential polynomial with [`Param`] coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct DiffPoly {
    terms: BTreeMap<DMono, Param>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        DiffPoly::constant(Param::one())
    }

    pub fn constant(c: Param) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(DMono::unit(), c);
        p
    }

    pub fn from_rat(c: Rat) -> Self {
        DiffPoly::constant(Param::from_rat(c))
    }

    /// The derivative `u^(k)` itself (`k = 0` is `u`).
    pub fn u(k: usize) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(DMono::u_deriv(k), Param::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DMono, &Param)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, mono: DMono, c: Param) {
        if c.is_zero() {
            return;
        }
        let cur = self.terms.remove(&mono);
        let sum = match cur {
            Some(a) => a.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&mono);
        } else {
            self.terms.insert(mono, sum);
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in rhs.terms.iter() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = DiffPoly::zero();
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in rhs.terms.iter() {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scale_param(&self, c: &Param) -> Self {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        let mut out = DiffPoly::zero();
        for (m, p) in self.terms.iter() {
            out.add_term(m.clone(), p.mul(c));
        }
        out
    }

    pub fn scale_rat(&self, c: &Rat) -> Self {
        self.scale_param(&Param::from_rat(c.clone()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = DiffPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Highest derivative index appearing anywhere.
    pub fn top_derivative(&self) -> Option<usize> {
        self.terms.keys().filter_map(|m| m.top()).max()
    }

    /// `d/d u^(k)`.
    pub fn partial_u(&self, k: usize) -> Self {
        let mut out = DiffPoly::zero();
        for (m, c) in self.terms.iter() {
            let p = m.pow_of(k);
            if p > 0 {
                let lowered = m.with_power(k, p - 1);
                out.add_term(lowered, c.scale(&Rat::from_integer(p.into())));
            }
        }
        out
    }

    /// Total derivative `D = d/dw (explicit) + sum_k u^(k+1) d/d u^(k)`.
    pub fn total_derivative(&self) -> Self {
        let mut out = DiffPoly::zero();
        for (m, c) in self.terms.iter() {
            out.add_term(m.clone(), c.d_dw());
            if let Some(top) = m.top() {
                for k in 0..=top {
                    let p = m.pow_of(k);
                    if p > 0 {
                        let lowered = m.with_power(k, p - 1).mul(&DMono::u_deriv(k + 1));
                        out.add_term(lowered, c.scale(&Rat::from_integer(p.into())));
                    }
                }
            }
        }
        out
    }

    /// Value at `u = 0`: the coefficient of the unit monomial.
    pub fn at_u_zero(&self) -> Param {
        self.terms
            .get(&DMono::unit())
            .cloned()
            .unwrap_or_else(Param::zero)
    }

    /// Substitute `u^(k) -> images[k]`; every derivative appearing must be
    /// covered.
    pub fn substitute_u(&self, images: &[DiffPoly]) -> Self {
        let mut out = DiffPoly::zero();
        for (m, c) in self.terms.iter() {
            let mut term = DiffPoly::constant(c.clone());
            if let Some(top) = m.top() {
                for k in 0..=top {
                    let p = m.pow_of(k);
                    if p > 0 {
                        term = term.mul(&images[k].pow(p));
                    }
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Substitute only `u^(k)` by `image`, leaving other derivatives alone.
    pub fn substitute_single(&self, k: usize, image: &DiffPoly) -> Self {
        let mut out = DiffPoly::zero();
        for (m, c) in self.terms.iter() {
            let p = m.pow_of(k);
            if p == 0 {
                out.add_term(m.clone(), c.clone());
            } else {
                let rest = m.with_power(k, 0);
                let mut term = DiffPoly::zero();
                term.add_term(rest, c.clone());
                out = out.add(&term.mul(&image.pow(p)));
            }
        }
        out
    }

    /// Apply a map to every coefficient (e.g. a change of variables in `w`).
    pub fn map_coeffs(&self, f: &dyn Fn(&Param) -> Param) -> Self {
        let mut out = DiffPoly::zero();
        for (m, c) in self.terms.iter() {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Rewrite every derivative `u^(k)` with `k >= k0` through the relation
    /// `u^(k0) = rhs` and its total derivatives, until only derivatives below
    /// `k0` remain.
    pub fn reduce_modulo(&self, k0: usize, rhs: &DiffPoly) -> Self {
        assert!(rhs.top_derivative().is_none_or(|t| t < k0));
        let mut cur = self.clone();
        while let Some(top) = cur.top_derivative() {
            if top < k0 {
                break;
            }
            let mut image = rhs.clone();
            for _ in k0..top {
                image = image.total_derivative();
                // the derivative of the relation may reintroduce u^(k0..top);
                // reduce the image itself first
                image = image.reduce_modulo(k0, rhs);
            }
            cur = cur.substitute_single(top, &image);
        }
        cur
    }

    /// Exact antiderivative in the differential ring: returns `P` with
    /// `D P = self`. Coefficients must be free of the explicit variable `w`
    /// (true for the Lenard recursion); a non-integrable remainder is an error.
    pub fn integrate_total(&self) -> Result<DiffPoly, DiffPolyError> {
        for c in self.terms.values() {
            if c.depends_on_slot(0) {
                return Err(DiffPolyError::UnsupportedSlot("w"));
            }
        }
        let mut rem = self.clone();
        let mut acc = DiffPoly::zero();
        while !rem.is_zero() {
            let top = match rem.top_derivative() {
                Some(t) if t >= 1 => t,
                _ => {
                    return Err(DiffPolyError::NotATotalDerivative(format!("{:?}", rem)));
                }
            };
            // a total derivative is linear in its top derivative
            if rem.terms.keys().any(|m| m.pow_of(top) >= 2) {
                return Err(DiffPolyError::NotATotalDerivative(format!("{:?}", rem)));
            }
            let a = rem.partial_u(top);
            // integrate a with respect to u^(top-1)
            let mut b = DiffPoly::zero();
            for (m, c) in a.terms.iter() {
                let d = m.pow_of(top - 1);
                let raised = m.with_power(top - 1, d + 1);
                b.add_term(raised, c.scale(&Rat::new(1.into(), (d as i64 + 1).into())));
            }
            acc = acc.add(&b);
            rem = rem.sub(&b.total_derivative());
        }
        Ok(acc)
    }
}

impl fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter() {
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
    use crate::rational::rat;

    #[test]
    fn total_derivative_shifts_tower() {
        // D(u) = u_x, D(u^2) = 2 u u_x
        let u = DiffPoly::u(0);
        assert_eq!(u.total_derivative(), DiffPoly::u(1));
        let u2 = u.mul(&u);
        let expected = DiffPoly::u(0).mul(&DiffPoly::u(1)).scale_rat(&rat(2, 1));
        assert_eq!(u2.total_derivative(), expected);
    }

    #[test]
    fn total_derivative_sees_explicit_variable() {
        // D(w * u) = u + w u_x
        let p = DiffPoly::u(0).scale_param(&Param::w());
        let got = p.total_derivative();
        let expected = DiffPoly::u(0).add(&DiffPoly::u(1).scale_param(&Param::w()));
        assert_eq!(got, expected);
    }

    #[test]
    fn leibniz_rule_spot_check() {
        let p = DiffPoly::u(0).mul(&DiffPoly::u(1)).add(&DiffPoly::u(2));
        let q = DiffPoly::u(0)
            .scale_param(&Param::w())
            .add(&DiffPoly::one());
        let lhs = p.mul(&q).total_derivative();
        let rhs = p
            .total_derivative()
            .mul(&q)
            .add(&p.mul(&q.total_derivative()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn integrate_total_round_trip() {
        // P = 1/4 u_xx + 3/2 u^2: integrate D(P) back to P
        let p = DiffPoly::u(2)
            .scale_rat(&rat(1, 4))
            .add(&DiffPoly::u(0).pow(2).scale_rat(&rat(3, 2)));
        let dp = p.total_derivative();
        assert_eq!(dp.integrate_total().unwrap(), p);
        // u u_x integrates to u^2/2
        let uux = DiffPoly::u(0).mul(&DiffPoly::u(1));
        assert_eq!(
            uux.integrate_total().unwrap(),
            DiffPoly::u(0).pow(2).scale_rat(&rat(1, 2))
        );
        // a bare u is not a total derivative
        assert!(DiffPoly::u(0).integrate_total().is_err());
    }

    #[test]
    fn reduce_modulo_relation() {
        // reduce u_xx modulo u_xx = u^3: D gives u_xxx -> 3u^2 u_x
        let rhs = DiffPoly::u(0).pow(3);
        let reduced = DiffPoly::u(3).reduce_modulo(2, &rhs);
        let expected = DiffPoly::u(0)
            .pow(2)
            .mul(&DiffPoly::u(1))
            .scale_rat(&rat(3, 1));
        assert_eq!(reduced, expected);
    }

    #[test]
    fn param_derivatives() {
        let p = Param::w().mul(&Param::w()).mul(&Param::z_pow(-1));
        let d = p.d_dw();
        assert_eq!(d, Param::monomial([1, 0, -1, 0], rat(2, 1)));
        let dz = p.d_dz();
        assert_eq!(dz, Param::monomial([2, 0, -2, 0], rat(-1, 1)));
    }
}
