//! The 2x2 matrix series `U(z; nu)` at the heart of the correlator formulae,
//! together with its defining identities: the first-order ODE it satisfies,
//! the algebraic relation `U^2 = z * Id`, and the conjugation covariance under
//! `nu -> -nu`.
//!
//! Coefficients: with `f_k = (2k-1)!! / (k! 8^k)` and `(a)_l` the rising
//! factorial,
//!   entry (1,1) of `z^-k`  :  f_k * (1/2)(1/2-nu)_{k+1}(1/2+nu)_k
//!   entry (1,2) of `z^-k`  :  f_k * (1/2-nu)_k (1/2+nu)_k
//!   entry (2,1) of `z^{1-k}`: -f_k * (1/2-nu)_{k+1}(1/2+nu)_{k-1}
//!   entry (2,2) = -entry (1,1).
//! The `k = 0` term of entry (2,1) uses `(1/2+nu)_{-1} = 1/(nu-1/2)`; the
//! product is assembled as an exact fraction and cancelled before it is ever
//! stored, so no rational-function coefficient escapes into the series.

use crate::laurent::{LaurentSeries, SeriesError};
use crate::nupoly::{pochhammer, pochhammer_ratio, NuPoly, NuSign};
use crate::rational::{double_factorial, factorial, one_half, Rat};
use num::BigInt;

/// 2x2 matrix of Laurent series in one shared variable; coefficients of
/// `z^{1-k}` are trusted for `k = 0..=order`.
#[derive(Debug, Clone)]
pub struct MatrixSeries {
    entries: [[LaurentSeries; 2]; 2],
    order: i64,
    var: u32,
}

impl MatrixSeries {
    pub fn new(entries: [[LaurentSeries; 2]; 2], order: i64) -> Self {
        let var = entries[0][0].var();
        assert!(entries.iter().flatten().all(|e| e.var() == var));
        MatrixSeries {
            entries,
            order,
            var,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentSeries {
        &self.entries[i][j]
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn var(&self) -> u32 {
        self.var
    }

    pub fn trace(&self) -> LaurentSeries {
        self.entries[0][0]
            .checked_add(&self.entries[1][1])
            .expect("shared variable")
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, SeriesError> {
        let mut out = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] = self.entries[i][j].checked_add(&rhs.entries[i][j])?;
            }
        }
        out.order = self.order.min(rhs.order);
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, SeriesError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for row in out.entries.iter_mut() {
            for e in row.iter_mut() {
                *e = e.neg();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, SeriesError> {
        let mut out = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                let a = self.entries[i][0].checked_mul(&rhs.entries[0][j])?;
                let b = self.entries[i][1].checked_mul(&rhs.entries[1][j])?;
                out.entries[i][j] = a.checked_add(&b)?;
            }
        }
        out.order = self.order.min(rhs.order);
        Ok(out)
    }

    /// Left/right multiply by constant `NuPoly` matrices: `L * self * R`.
    pub fn conjugate_by(&self, left: &[[NuPoly; 2]; 2], right: &[[NuPoly; 2]; 2]) -> Self {
        let mut mid = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                let a = self.entries[0][j].scale_nupoly(&left[i][0]);
                let b = self.entries[1][j].scale_nupoly(&left[i][1]);
                mid.entries[i][j] = a.checked_add(&b).expect("shared variable");
            }
        }
        let mut out = mid.clone();
        for i in 0..2 {
            for j in 0..2 {
                let a = mid.entries[i][0].scale_nupoly(&right[0][j]);
                let b = mid.entries[i][1].scale_nupoly(&right[1][j]);
                out.entries[i][j] = a.checked_add(&b).expect("shared variable");
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        for row in out.entries.iter_mut() {
            for e in row.iter_mut() {
                *e = e.derivative();
            }
        }
        out
    }

    pub fn scale(&self, s: &LaurentSeries) -> Result<Self, SeriesError> {
        let mut out = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] = self.entries[i][j].checked_mul(s)?;
            }
        }
        Ok(out)
    }

    pub fn specialize_nu(&self, nu: &Rat) -> Self {
        let mut out = self.clone();
        for row in out.entries.iter_mut() {
            for e in row.iter_mut() {
                *e = e.specialize_nu(nu);
            }
        }
        out
    }

    pub fn subst_neg_nu(&self) -> Self {
        let mut out = self.clone();
        for row in out.entries.iter_mut() {
            for e in row.iter_mut() {
                *e = e.subst_neg_nu();
            }
        }
        out
    }

    pub fn is_zero_on_windows(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero_on_window())
    }

    /// Restrict every entry to `[lo, hi]`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        let mut out = self.clone();
        for row in out.entries.iter_mut() {
            for e in row.iter_mut() {
                *e = e.restrict(lo, hi);
            }
        }
        out
    }
}

/// The series prefactor `(2k-1)!! / (k! 8^k)`.
fn series_factor(k: i64) -> Rat {
    let dfac = double_factorial(2 * k - 1).expect("odd argument");
    Rat::new(dfac, factorial(k as u64) * BigInt::from(8).pow(k as u32))
}

/// Build `U(z; nu)` with symbolic `nu`, trusted for `z^{1-k}`, `k = 0..=order`
/// (the diagonal and (1,2) entries carry their terms at `z^-k` and are
/// trusted one order deeper, on `[-order, 0]`).
pub fn build_u_matrix(var: u32, order: i64) -> MatrixSeries {
    assert!(order >= 0);
    let half = one_half();
    let mut e11 = Vec::new();
    let mut e12 = Vec::new();
    let mut e21 = Vec::new();
    for k in 0..=order {
        let f = series_factor(k);
        let minus_k = pochhammer(&half, NuSign::Minus, k).unwrap();
        let minus_k1 = pochhammer(&half, NuSign::Minus, k + 1).unwrap();
        let plus_k = pochhammer(&half, NuSign::Plus, k).unwrap();

        let c11 = (&minus_k1 * &plus_k).scale(&(f.clone() * one_half()));
        e11.push((-k, c11));

        let c12 = (&minus_k * &plus_k).scale(&f);
        e12.push((-k, c12));

        // (1/2-nu)_{k+1} (1/2+nu)_{k-1}: for k = 0 the second factor is the
        // fraction 1/(nu - 1/2) and the product collapses to the constant -1.
        let (plus_num, plus_den) = pochhammer_ratio(&half, NuSign::Plus, k - 1).unwrap();
        let prod = (&minus_k1 * &plus_num)
            .exact_div(&plus_den)
            .expect("denominator cancels inside the (2,1) product");
        e21.push((1 - k, prod.scale(&(-f))));
    }
    let e11 = LaurentSeries::truncated(var, e11, -order, 0);
    let e12 = LaurentSeries::truncated(var, e12, -order, 0);
    let e21 = LaurentSeries::truncated(var, e21, 1 - order, 1);
    let e22 = e11.neg();
    MatrixSeries::new([[e11, e12], [e21, e22]], order)
}

/// The coefficient matrix `A(z) = [[-nu/2z, 1/z], [1, nu/2z]]` of the bare ODE,
/// as an exact matrix of Laurent polynomials. `nu` is the polynomial standing
/// for the parameter (the variable itself, or a constant after specializing).
pub fn bare_ode_matrix(var: u32, nu: &NuPoly) -> MatrixSeries {
    let a11 = LaurentSeries::monomial(var, -1, nu.scale(&(-one_half())));
    let a12 = LaurentSeries::monomial(var, -1, NuPoly::one());
    let a21 = LaurentSeries::constant(var, NuPoly::one());
    let a22 = LaurentSeries::monomial(var, -1, nu.scale(&one_half()));
    MatrixSeries::new([[a11, a12], [a21, a22]], 0)
}

/// Residual of the ODE `U' = U/(2z) + [A, U]` with symbolic `nu`; vanishes on
/// its trusted window for a correctly built `U`.
pub fn verify_u_ode(u: &MatrixSeries) -> MatrixSeries {
    verify_u_ode_with(u, &NuPoly::nu())
}

/// Same as [`verify_u_ode`] with `nu` in the ODE matrix matching a
/// specialization applied to `U` beforehand.
pub fn verify_u_ode_with(u: &MatrixSeries, nu: &NuPoly) -> MatrixSeries {
    let var = u.var();
    let a = bare_ode_matrix(var, nu);
    let du = u.derivative();
    let half_over_z = LaurentSeries::monomial(var, -1, NuPoly::constant(one_half()));
    let u_over_2z = u.scale(&half_over_z).expect("same variable");
    let au = a.matmul(u).expect("same variable");
    let ua = u.matmul(&a).expect("same variable");
    let commutator = au.sub(&ua).expect("same variable");
    du.sub(&u_over_2z)
        .expect("same variable")
        .sub(&commutator)
        .expect("same variable")
}

/// Residual of `U * U - z * Id`; vanishes on the trusted window.
pub fn verify_u_square(u: &MatrixSeries) -> MatrixSeries {
    let var = u.var();
    let uu = u.matmul(u).expect("same variable");
    let z = LaurentSeries::monomial(var, 1, NuPoly::one());
    let zero = LaurentSeries::zero(var);
    let z_id = MatrixSeries::new([[z.clone(), zero.clone()], [zero, z]], u.order());
    uu.sub(&z_id).expect("same variable")
}

/// Residual of `det U + z` (equivalent to the square identity for a
/// trace-free matrix); vanishes on the trusted window.
pub fn verify_u_determinant(u: &MatrixSeries) -> LaurentSeries {
    let det = u
        .entry(0, 0)
        .checked_mul(u.entry(1, 1))
        .expect("same variable")
        .checked_sub(
            &u.entry(0, 1)
                .checked_mul(u.entry(1, 0))
                .expect("same variable"),
        )
        .expect("same variable");
    det.checked_add(&LaurentSeries::monomial(u.var(), 1, NuPoly::one()))
        .expect("same variable")
}

/// Checks `U(z;-nu) = [[1,0],[-nu,1]] U(z;nu) [[1,0],[nu,1]]` coefficient-wise.
pub fn verify_nu_conjugation(u: &MatrixSeries) -> bool {
    let nu = NuPoly::nu();
    let left = [[NuPoly::one(), NuPoly::zero()], [-&nu, NuPoly::one()]];
    let right = [[NuPoly::one(), NuPoly::zero()], [nu.clone(), NuPoly::one()]];
    let conjugated = u.conjugate_by(&left, &right);
    let flipped = u.subst_neg_nu();
    flipped
        .sub(&conjugated)
        .expect("same variable")
        .is_zero_on_windows()
}

/// At `nu = m + 1/2` every coefficient with `k > m` must vanish, i.e. the
/// specialized matrix is an exact Laurent polynomial.
pub fn truncates_at_half_integer(u: &MatrixSeries, m: i64) -> bool {
    truncates_at(u, &(one_half() + Rat::from_integer(m.into())), m, m)
}

/// At `nu = -(m + 1/2)` the series is again a Laurent polynomial; entry (2,1)
/// carries `(1/2+nu)_{k-1}` and truncates one order later than the rest.
pub fn truncates_at_negative_half_integer(u: &MatrixSeries, m: i64) -> bool {
    truncates_at(u, &(-one_half() - Rat::from_integer(m.into())), m, m + 1)
}

fn truncates_at(u: &MatrixSeries, nu: &Rat, k_bound: i64, k_bound_21: i64) -> bool {
    let spec = u.specialize_nu(nu);
    for i in 0..2 {
        for j in 0..2 {
            // the k-th term sits at z^{1-k} in entry (2,1) and z^-k elsewhere
            let (top, bound) = if (i, j) == (1, 0) {
                (1, k_bound_21)
            } else {
                (0, k_bound)
            };
            for (&e, c) in spec.entry(i, j).terms() {
                let k = top - e;
                if k > bound && !c.is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// `S_1(z) = 2 - tr(A(z) U(z))`: the generating series of one-point values.
pub fn one_point_series(u: &MatrixSeries) -> LaurentSeries {
    let a = bare_ode_matrix(u.var(), &NuPoly::nu());
    let au = a.matmul(u).expect("same variable");
    let two = LaurentSeries::constant(u.var(), NuPoly::constant(Rat::from_integer(2.into())));
    two.checked_sub(&au.trace()).expect("same variable")
}

/// `f_k (1/2-nu)_k (1/2+nu)_k`: the entry-(1,2) coefficient, exposed for tests.
pub fn u12_coefficient(k: i64) -> NuPoly {
    let half = one_half();
    let f = series_factor(k);
    (&pochhammer(&half, NuSign::Minus, k).unwrap() * &pochhammer(&half, NuSign::Plus, k).unwrap())
        .scale(&f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    #[test]
    fn leading_block() {
        // U = [[(1/2-nu)/2, 1], [z, -(1/2-nu)/2]] + lower order
        let u = build_u_matrix(0, 3);
        let half_minus_nu_over_2 = NuPoly::from_coeffs([(0, rat(1, 4)), (1, rat(-1, 2))]);
        assert_eq!(u.entry(0, 0).coeff(0).unwrap(), half_minus_nu_over_2);
        assert_eq!(u.entry(0, 1).coeff(0).unwrap(), NuPoly::one());
        assert_eq!(u.entry(1, 0).coeff(1).unwrap(), NuPoly::one());
        assert_eq!(u.entry(1, 1).coeff(0).unwrap(), -&half_minus_nu_over_2);
        // trace-free at every stored order
        assert!(u.trace().is_zero_on_window());
    }

    #[test]
    fn u12_first_subleading() {
        // coefficient of z^-1 in entry (1,2) is (1 - 4 nu^2)/32
        let u = build_u_matrix(0, 2);
        let expected = NuPoly::from_coeffs([(0, rat(1, 32)), (2, rat(-1, 8))]);
        assert_eq!(u.entry(0, 1).coeff(-1).unwrap(), expected);
        assert_eq!(u12_coefficient(1), expected);
    }

    #[test]
    fn ode_residual_vanishes() {
        let u = build_u_matrix(0, 12);
        let res = verify_u_ode(&u);
        assert!(res.is_zero_on_windows(), "{:?}", res);
        // specializing nu first commutes with the identity
        let zero = Rat::from_integer(0.into());
        let res0 = verify_u_ode_with(&u.specialize_nu(&zero), &NuPoly::constant(zero));
        assert!(res0.is_zero_on_windows());
    }

    #[test]
    fn ode_residual_detects_perturbation() {
        let u = build_u_matrix(0, 8);
        let bump = LaurentSeries::monomial(0, -3, NuPoly::one());
        let perturbed = MatrixSeries::new(
            [
                [
                    u.entry(0, 0).checked_add(&bump).unwrap().restrict(1 - 8, 1),
                    u.entry(0, 1).clone(),
                ],
                [u.entry(1, 0).clone(), u.entry(1, 1).clone()],
            ],
            u.order(),
        );
        assert!(!verify_u_ode(&perturbed).is_zero_on_windows());
    }

    #[test]
    fn square_is_z_identity() {
        let u = build_u_matrix(0, 10);
        let res = verify_u_square(&u);
        assert!(res.is_zero_on_windows(), "{:?}", res);
        // tr(U^2) = 2z on the trusted window
        let uu = u.matmul(&u).unwrap();
        let tr = uu.trace();
        assert_eq!(tr.coeff(1).unwrap(), NuPoly::constant(rat_int(2)));
        let (lo, _) = tr.window();
        for e in lo..=0 {
            assert!(tr.coeff(e).unwrap().is_zero(), "z^{}", e);
        }
    }

    #[test]
    fn determinant_is_minus_z() {
        let u = build_u_matrix(0, 9);
        assert!(verify_u_determinant(&u).is_zero_on_window());
    }

    #[test]
    fn square_exact_at_half_integer() {
        // at nu = 1/2 truncation N = 1 gives an exact Laurent polynomial with
        // U^2 = z * Id at all orders
        let u = build_u_matrix(0, 1).specialize_nu(&rat(1, 2));
        let uu = u.matmul(&u).unwrap();
        let z_id = {
            let z = LaurentSeries::monomial(0, 1, NuPoly::one());
            let zero = LaurentSeries::zero(0);
            MatrixSeries::new([[z.clone(), zero.clone()], [zero, z]], 1)
        };
        let res = uu.sub(&z_id).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let (lo, hi) = res.entry(i, j).window();
                for e in lo.max(-6)..=hi {
                    assert!(res.entry(i, j).coeff(e).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn nu_conjugation_identity() {
        let u = build_u_matrix(0, 10);
        assert!(verify_nu_conjugation(&u));
        // identity matrix series is not a valid U: negative control
        let one = LaurentSeries::constant(0, NuPoly::one());
        let zero = LaurentSeries::zero(0);
        let id = MatrixSeries::new(
            [
                [
                    one.checked_add(&LaurentSeries::monomial(0, -1, NuPoly::nu()))
                        .unwrap(),
                    zero.clone(),
                ],
                [zero.clone(), one],
            ],
            0,
        );
        assert!(!verify_nu_conjugation(&id));
        // nu-even scalar series: both sides equal trivially since the
        // conjugating matrices multiply to the identity
        let even = LaurentSeries::constant(0, NuPoly::from_coeffs([(2, rat_int(1))]));
        let diag = MatrixSeries::new([[even.clone(), zero.clone()], [zero.clone(), even]], 0);
        assert!(verify_nu_conjugation(&diag));
    }

    #[test]
    fn half_integer_truncation() {
        let u = build_u_matrix(0, 9);
        for m in 0..3 {
            assert!(truncates_at_half_integer(&u, m), "nu = {} + 1/2", m);
            assert!(
                truncates_at_negative_half_integer(&u, m),
                "nu = -({} + 1/2)",
                m
            );
        }
        // at nu = 1/2 entry (1,2) is exactly 1
        let spec = u.specialize_nu(&rat(1, 2));
        assert_eq!(spec.entry(0, 1).coeff(0).unwrap(), NuPoly::one());
        for e in (1 - 9)..0 {
            assert!(spec.entry(0, 1).coeff(e).unwrap().is_zero());
        }
    }
}
