//! KdV hierarchy machinery on top of the tau expansion: Lenard-Magri
//! polynomials, flow residuals, the Painleve XXXIV hierarchy residuals, and
//! the restriction of tau to the `t_0` axis.
//!
//! Throughout, `x` is identified with `t_0` and `u = d^2/dx^2 log tau`; the
//! KdV flows are `du/dt_l = d/dx L_{l+1}[u]` with the Lenard-Magri
//! normalization `L_0 = 1`, `d/dx L_{l+1} = (1/4 d^3/dx^3 + 2u d/dx + u_x) L_l`,
//! `L_{l+1}[0] = 0`.

use crate::diffpoly::{DiffPoly, DiffPolyError, Param};
use crate::nupoly::NuPoly;
use crate::rational::{rat, Rat};
use crate::timepoly::TimePoly;
use crate::virasoro::{central_term, solve_tau, TauExpansion, VirasoroError};
use num::One;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KdvError {
    Integration(DiffPolyError),
    Solver(VirasoroError),
    /// tau level too small for the requested residual level.
    InsufficientLevel {
        needed: u64,
        got: u64,
    },
    /// Mismatch in the bare tau comparison, with the first differing power.
    BareTauMismatch {
        power: u64,
        got: String,
        expected: String,
    },
}

impl fmt::Display for KdvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KdvError::Integration(e) => write!(f, "lenard integration: {}", e),
            KdvError::Solver(e) => write!(f, "tau solver: {}", e),
            KdvError::InsufficientLevel { needed, got } => {
                write!(f, "tau level {} insufficient, need {}", got, needed)
            }
            KdvError::BareTauMismatch {
                power,
                got,
                expected,
            } => {
                write!(
                    f,
                    "bare tau differs at t0^{}: {} vs {}",
                    power, got, expected
                )
            }
        }
    }
}

impl std::error::Error for KdvError {}

/// Lenard-Magri differential polynomial with its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LenardPolynomial {
    pub index: usize,
    pub body: DiffPoly,
}

/// Compute `L_0 ... L_ell` by the recursion, integrating exactly at each step
/// and fixing the constant by `L_{l+1}[u=0] = 0`.
pub fn lenard_magri(ell: usize) -> Result<Vec<LenardPolynomial>, KdvError> {
    let mut out = vec![LenardPolynomial {
        index: 0,
        body: DiffPoly::one(),
    }];
    for l in 0..ell {
        let prev = &out[l].body;
        let rhs = prev
            .total_derivative()
            .total_derivative()
            .total_derivative()
            .scale_rat(&rat(1, 4))
            .add(
                &DiffPoly::u(0)
                    .mul(&prev.total_derivative())
                    .scale_rat(&rat(2, 1)),
            )
            .add(&DiffPoly::u(1).mul(prev));
        let body = rhs.integrate_total().map_err(KdvError::Integration)?;
        debug_assert!(body.at_u_zero().is_zero());
        out.push(LenardPolynomial { index: l + 1, body });
    }
    Ok(out)
}

/// Interpret a coefficient as a time polynomial: `w -> t_0`, `p -> t_1`.
fn param_to_timepoly(c: &Param) -> Result<TimePoly, DiffPolyError> {
    let mut acc = TimePoly::zero();
    for (&exp, r) in c.terms() {
        if exp[2] != 0 || exp[3] != 0 {
            return Err(DiffPolyError::UnsupportedSlot("z or s"));
        }
        let mut factor = TimePoly::constant(NuPoly::constant(r.clone()));
        for _ in 0..exp[0] {
            factor = factor.mul_time(0);
        }
        for _ in 0..exp[1] {
            factor = factor.mul_time(1);
        }
        acc = acc.add(&factor);
    }
    Ok(acc)
}

/// Evaluate a `w`/`p`-coefficient differential polynomial on a time series:
/// `w -> t_0`, `p -> t_1`, `u^(k) -> d^k u / dt_0^k`, truncating at `level`.
pub fn eval_on_series(dp: &DiffPoly, u: &TimePoly, level: u64) -> Result<TimePoly, DiffPolyError> {
    let top = dp.top_derivative().unwrap_or(0);
    let mut tower = vec![u.clone()];
    for _ in 0..top {
        tower.push(tower.last().unwrap().deriv(0));
    }
    let mut out = TimePoly::zero();
    for (mono, coeff) in dp.terms() {
        let mut term = param_to_timepoly(coeff)?;
        if let Some(t) = mono.top() {
            for k in 0..=t {
                for _ in 0..mono.pow_of(k) {
                    term = term.mul_truncated(&tower[k], level);
                }
            }
        }
        out = out.add(&term);
    }
    Ok(out.truncate_level(level))
}

/// `u = d^2/dt_0^2 log tau`.
pub fn u_from_tau(tau: &TauExpansion) -> TimePoly {
    tau.log().deriv(0).deriv(0)
}

/// Residual of the KdV flow `du/dt_ell - d/dx L_{ell+1}[u]`, trusted through
/// `level`; requires a tau solved to `level + 2 ell + 5`.
pub fn kdv_residual(ell: usize, level: u64) -> Result<TimePoly, KdvError> {
    let needed = level + 2 * ell as u64 + 5;
    let tau = solve_tau(needed).map_err(KdvError::Solver)?;
    kdv_residual_with_tau(ell, level, &tau)
}

/// Same as [`kdv_residual`] with a caller-provided tau expansion.
pub fn kdv_residual_with_tau(
    ell: usize,
    level: u64,
    tau: &TauExpansion,
) -> Result<TimePoly, KdvError> {
    let needed = level + 2 * ell as u64 + 5;
    if tau.level < needed {
        return Err(KdvError::InsufficientLevel {
            needed,
            got: tau.level,
        });
    }
    let u = u_from_tau(tau);
    let lenard = lenard_magri(ell + 1)?;
    let flow = lenard[ell + 1].body.total_derivative();
    let rhs = eval_on_series(&flow, &u, level).map_err(KdvError::Integration)?;
    let lhs = u.deriv(ell).truncate_level(level);
    Ok(lhs.sub(&rhs))
}

/// Left-hand side of the K-th Painleve XXXIV hierarchy member,
/// `2u + (x-2) u_x + sum_{l=1}^K (2l+1) t_l d/dx L_{l+1}[u]`, evaluated on the
/// tau-derived series with times above `K` set to zero. Trusted through
/// `level`; requires tau level `>= level + 2K + 5`.
pub fn painleve_residual_series(k: usize, level: u64) -> Result<TimePoly, KdvError> {
    let needed = level + 2 * k as u64 + 5;
    let tau = solve_tau(needed).map_err(KdvError::Solver)?;
    let u = u_from_tau(&tau).zero_times_above(k);
    let lenard = lenard_magri(k + 1)?;
    let mut res = u.scale_rat(&rat(2, 1));
    let ux = u.deriv(0);
    res = res.add(&ux.mul_time(0));
    res = res.add(&ux.scale_rat(&rat(-2, 1)));
    for l in 1..=k {
        let flow = lenard[l + 1].body.total_derivative();
        let evaluated = eval_on_series(&flow, &u, level + 3).map_err(KdvError::Integration)?;
        let weighted = evaluated.mul_time(l).scale_rat(&rat(2 * l as i64 + 1, 1));
        res = res.add(&weighted);
    }
    Ok(res.truncate_level(level))
}

/// Univariate polynomial in `x` with `NuPoly` coefficients, dense.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct XPoly(Vec<NuPoly>);

impl XPoly {
    pub fn zero() -> Self {
        XPoly(Vec::new())
    }

    pub fn constant(c: NuPoly) -> Self {
        let mut p = XPoly(vec![c]);
        p.trim();
        p
    }

    pub fn x() -> Self {
        XPoly(vec![NuPoly::zero(), NuPoly::one()])
    }

    /// `2 - x`.
    pub fn two_minus_x() -> Self {
        XPoly(vec![
            NuPoly::constant(Rat::from_integer(2.into())),
            -&NuPoly::one(),
        ])
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut v = vec![NuPoly::zero(); self.0.len().max(rhs.0.len())];
        for (i, item) in v.iter_mut().enumerate() {
            let a = self.0.get(i).cloned().unwrap_or_else(NuPoly::zero);
            let b = rhs.0.get(i).cloned().unwrap_or_else(NuPoly::zero);
            *item = &a + &b;
        }
        let mut p = XPoly(v);
        p.trim();
        p
    }

    pub fn neg(&self) -> Self {
        XPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return XPoly::zero();
        }
        let mut v = vec![NuPoly::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        let mut p = XPoly(v);
        p.trim();
        p
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return XPoly::zero();
        }
        let mut v = Vec::with_capacity(self.0.len() - 1);
        for (i, c) in self.0.iter().enumerate().skip(1) {
            v.push(c.scale(&Rat::from_integer((i as i64).into())));
        }
        let mut p = XPoly(v);
        p.trim();
        p
    }
}

/// Rational function in `x` as an unnormalized fraction; zero tests reduce to
/// the numerator, so no gcd machinery is needed.
#[derive(Clone, Debug)]
pub struct RatX {
    pub num: XPoly,
    pub den: XPoly,
}

impl RatX {
    pub fn from_poly(p: XPoly) -> Self {
        RatX {
            num: p,
            den: XPoly::constant(NuPoly::one()),
        }
    }

    pub fn new(num: XPoly, den: XPoly) -> Self {
        assert!(!den.is_zero());
        RatX { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        RatX {
            num: self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            den: self.den.mul(&rhs.den),
        }
    }

    pub fn neg(&self) -> Self {
        RatX {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        RatX {
            num: self.num.mul(&rhs.num),
            den: self.den.mul(&rhs.den),
        }
    }

    /// `(p/q)' = (p'q - p q') / q^2`.
    pub fn derivative(&self) -> Self {
        RatX {
            num: self
                .num
                .derivative()
                .mul(&self.den)
                .add(&self.num.mul(&self.den.derivative()).neg()),
            den: self.den.mul(&self.den),
        }
    }
}

/// Evaluate a differential polynomial on an exact rational function of `x`
/// (`w -> x`, `u^(k) -> u^(k)(x)`); only `w`-dependent coefficients allowed.
pub fn eval_on_ratx(dp: &DiffPoly, u: &RatX) -> Result<RatX, DiffPolyError> {
    let top = dp.top_derivative().unwrap_or(0);
    let mut tower = vec![u.clone()];
    for _ in 0..top {
        tower.push(tower.last().unwrap().derivative());
    }
    let mut out = RatX::from_poly(XPoly::zero());
    for (mono, coeff) in dp.terms() {
        let mut cpoly = XPoly::zero();
        for (&exp, c) in coeff.terms() {
            if exp[1] != 0 || exp[2] != 0 || exp[3] != 0 {
                return Err(DiffPolyError::UnsupportedSlot("p, z or s"));
            }
            let mut factor = XPoly::constant(NuPoly::constant(c.clone()));
            for _ in 0..exp[0] {
                factor = factor.mul(&XPoly::x());
            }
            cpoly = cpoly.add(&factor);
        }
        let mut term = RatX::from_poly(cpoly);
        if let Some(t) = mono.top() {
            for k in 0..=t {
                for _ in 0..mono.pow_of(k) {
                    term = term.mul(&tower[k]);
                }
            }
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// The K = 0 member `2u + (x-2) u_x` as a differential polynomial.
pub fn painleve_k0_equation() -> DiffPoly {
    let x_minus_2 = Param::w().add(&Param::from_i64(-2));
    DiffPoly::u(0)
        .scale_rat(&rat(2, 1))
        .add(&DiffPoly::u(1).scale_param(&x_minus_2))
}

/// The K = 1 member `3/4 p u_xxx + 9 p u u_x + (x-2) u_x + 2u` with the
/// parameter slot holding `t_1`.
pub fn painleve_k1_equation() -> DiffPoly {
    let p = Param::par();
    painleve_k0_equation()
        .add(&DiffPoly::u(3).scale_param(&p.scale(&rat(3, 4))))
        .add(
            &DiffPoly::u(0)
                .mul(&DiffPoly::u(1))
                .scale_param(&p.scale(&rat(9, 1))),
        )
}

/// The exact initial datum `u(x, 0, ...) = (1-4nu^2)/(8 (2-x)^2)`.
pub fn bare_initial_datum() -> RatX {
    let num = XPoly::constant(central_term().scale(&rat(2, 1))); // (1-4nu^2)/8
    let den = XPoly::two_minus_x().mul(&XPoly::two_minus_x());
    RatX::new(num, den)
}

/// Check that the `t_0`-restriction of `log tau` matches the expansion of
/// `-(1-4nu^2)/8 log(1 - x/2)` term by term, and that the second derivative
/// reproduces the expansion of `(1-4nu^2)/(8 (2-x)^2)` order by order.
pub fn bare_tau_check(level: u64) -> Result<(), KdvError> {
    let tau = solve_tau(level).map_err(KdvError::Solver)?;
    let log = tau.log().restrict_to_time(0);
    let c = central_term().scale(&rat(2, 1)); // (1-4nu^2)/8
    for k in 1..=level {
        let mono = crate::timepoly::TimeMono::from_exponents(&[k as u16]);
        let got = log.coefficient(&mono);
        // -c log(1 - x/2) = c sum_k x^k / (k 2^k)
        let expected = c.scale(&Rat::new(
            num::BigInt::one(),
            num::BigInt::from(k) * num::BigInt::from(2).pow(k as u32),
        ));
        if got != expected {
            return Err(KdvError::BareTauMismatch {
                power: k,
                got: format!("{}", got),
                expected: format!("{}", expected),
            });
        }
    }
    // second derivative against the expansion of (1-4nu^2)/(8(2-x)^2), whose
    // x^k coefficient is (1-4nu^2)/8 * (k+1)/2^{k+2}
    let u = log.deriv(0).deriv(0);
    for k in 0..=level.saturating_sub(2) {
        let mono = crate::timepoly::TimeMono::from_exponents(&[k as u16]);
        let got = u.coefficient(&mono);
        let expected = c.scale(&Rat::new(
            (k as i64 + 1).into(),
            num::BigInt::from(2).pow(k as u32 + 2),
        ));
        if got != expected {
            return Err(KdvError::BareTauMismatch {
                power: k,
                got: format!("{}", got),
                expected: format!("{}", expected),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lenard_low_orders() {
        let ls = lenard_magri(3).unwrap();
        assert_eq!(ls[0].body, DiffPoly::one());
        assert_eq!(ls[1].body, DiffPoly::u(0));
        let l2 = DiffPoly::u(2)
            .scale_rat(&rat(1, 4))
            .add(&DiffPoly::u(0).pow(2).scale_rat(&rat(3, 2)));
        assert_eq!(ls[2].body, l2);
        // L_3 = u_xxxx/16 + 5/4 u u_xx + 5/8 u_x^2 + 5/2 u^3
        let l3 = DiffPoly::u(4)
            .scale_rat(&rat(1, 16))
            .add(&DiffPoly::u(0).mul(&DiffPoly::u(2)).scale_rat(&rat(5, 4)))
            .add(&DiffPoly::u(1).pow(2).scale_rat(&rat(5, 8)))
            .add(&DiffPoly::u(0).pow(3).scale_rat(&rat(5, 2)));
        assert_eq!(ls[3].body, l3);
        // normalization L_l[0] = 0 for l >= 1
        for l in ls.iter().skip(1) {
            assert!(l.body.at_u_zero().is_zero());
        }
    }

    #[test]
    fn lenard_integrability_through_six() {
        // the recursion integrates exactly at every step up to index 6
        let ls = lenard_magri(6).unwrap();
        assert_eq!(ls.len(), 7);
    }

    #[test]
    fn kdv_flow_one() {
        let res = kdv_residual(1, 4).unwrap();
        assert!(res.is_zero(), "{:?}", res);
    }

    #[test]
    fn kdv_negative_control() {
        // dropping the u^2 term of L_2 breaks the flow at the first level
        let tau = solve_tau(8).unwrap();
        let u = u_from_tau(&tau);
        let broken = DiffPoly::u(2).scale_rat(&rat(1, 4)); // missing 3/2 u^2
        let rhs = eval_on_series(&broken.total_derivative(), &u, 1).unwrap();
        let res = u.deriv(1).truncate_level(1).sub(&rhs);
        assert!(!res.is_zero());
    }

    #[test]
    fn painleve_k0_exact() {
        let eq = painleve_k0_equation();
        let u = bare_initial_datum();
        let res = eval_on_ratx(&eq, &u).unwrap();
        assert!(res.is_zero(), "{:?}", res.num);
        // negative control: u = 1/(2-x) leaves 2u + (x-2)u_x = u
        let bad = RatX::new(XPoly::constant(NuPoly::one()), XPoly::two_minus_x());
        let res_bad = eval_on_ratx(&eq, &bad).unwrap();
        assert!(!res_bad.is_zero());
    }

    #[test]
    fn painleve_series_k0() {
        let res = painleve_residual_series(0, 4).unwrap();
        assert!(res.is_zero(), "{:?}", res);
    }

    #[test]
    fn bare_tau() {
        bare_tau_check(6).unwrap();
        // at nu = 1/2 the t0-restriction of log tau vanishes identically
        let tau = solve_tau(6).unwrap();
        let log_half = tau.log().restrict_to_time(0).specialize_nu(&rat(1, 2));
        assert!(log_half.is_zero());
    }
}
