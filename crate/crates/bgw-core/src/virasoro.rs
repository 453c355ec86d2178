//! Virasoro constraints for the gBGW tau function.
//!
//! The operators
//! `L_m = sum_l (2l+1)/2 (t_l - 2 delta_{l,0}) d/dt_{l+m}
//!        + 1/4 sum_{l=0}^{m-1} d^2/dt_l dt_{m-1-l} + (1-4nu^2)/16 delta_{m,0}`
//! for `m >= 0` satisfy `[L_m, L_n] = (m-n) L_{m+n}` and annihilate tau.
//!
//! Solving `L_m tau = 0` coefficient-by-coefficient determines tau completely:
//! the dilaton-shifted term `-d/dt_m` is the only one raising the level by
//! `2m+1` while all others raise it by `2m`, so each coefficient at level `W`
//! is expressed through coefficients of level `< W`. Overdetermined
//! coefficients (reachable from several `m`) are computed from the smallest
//! `m` and verified against all others; any disagreement is a hard error.

use crate::correlators::CorrelatorKey;
use crate::nupoly::NuPoly;
use crate::rational::{rat, Rat};
use crate::timepoly::{TimeMono, TimePoly};
use num::{BigInt, One};
use std::fmt;

/// `(1 - 4 nu^2)/16`, the central term of `L_0`.
pub fn central_term() -> NuPoly {
    NuPoly::from_coeffs([(0, rat(1, 16)), (2, rat(-1, 4))])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VirasoroError {
    /// Two constraints disagreed on one coefficient: a correctness alarm.
    InconsistentConstraints {
        monomial: String,
        from_m: usize,
        against_m: usize,
    },
    LevelTooSmall(u64),
}

impl fmt::Display for VirasoroError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VirasoroError::InconsistentConstraints {
                monomial,
                from_m,
                against_m,
            } => write!(
                f,
                "constraints L_{} and L_{} disagree on the coefficient of {}",
                from_m, against_m, monomial
            ),
            VirasoroError::LevelTooSmall(l) => write!(f, "tau level {} too small", l),
        }
    }
}

impl std::error::Error for VirasoroError {}

/// Apply `L_m` exactly to a polynomial in the times.
pub fn apply_virasoro(m: usize, p: &TimePoly) -> TimePoly {
    let mut out = TimePoly::zero();
    // the infinite sum over l truncates: t_l d/dt_{l+m} needs p to depend on t_{l+m}
    if let Some(top) = p.terms().filter_map(|(mono, _)| mono.max_index()).max() {
        for ell in 0..=top.saturating_sub(m) {
            if ell + m > top {
                break;
            }
            let d = p.deriv(ell + m);
            if d.is_zero() {
                continue;
            }
            out = out.add(&d.mul_time(ell).scale_rat(&rat(2 * ell as i64 + 1, 2)));
        }
    }
    // the -2 delta_{l,0} dilaton shift contributes -d/dt_m
    out = out.sub(&p.deriv(m));
    for ell in 0..m {
        let dd = p.deriv(ell).deriv(m - 1 - ell);
        out = out.add(&dd.scale_rat(&rat(1, 4)));
    }
    if m == 0 {
        out = out.add(&p.scale(&central_term()));
    }
    out
}

/// All monomials in allowed times with level `<= max_level`.
pub fn monomials_up_to_level(max_level: u64) -> Vec<TimeMono> {
    let mut out = vec![TimeMono::unit()];
    let k_max = if max_level == 0 {
        0
    } else {
        ((max_level - 1) / 2) as usize
    };
    for ell in (0..=k_max).rev() {
        let step = 2 * ell as u64 + 1;
        let mut next = Vec::new();
        for mono in &out {
            let mut m = mono.clone();
            next.push(m.clone());
            while m.level() + step <= max_level {
                m = m.bump(ell);
                next.push(m.clone());
            }
        }
        out = next;
    }
    out.sort();
    out.dedup();
    out
}

/// Check `[L_m, L_n] P = (m-n) L_{m+n} P` on every monomial of level `<= level`.
pub fn check_commutator(m: usize, n: usize, level: u64) -> bool {
    for mono in monomials_up_to_level(level) {
        let mut p = TimePoly::zero();
        p.add_term(mono, NuPoly::one());
        let lhs = apply_virasoro(m, &apply_virasoro(n, &p))
            .sub(&apply_virasoro(n, &apply_virasoro(m, &p)));
        let factor = m as i64 - n as i64;
        let rhs = apply_virasoro(m + n, &p).scale_rat(&Rat::from_integer(factor.into()));
        if lhs != rhs {
            return false;
        }
    }
    true
}

/// Tau expansion solved to a level bound: every coefficient of level
/// `<= level` is present and exact.
#[derive(Debug, Clone)]
pub struct TauExpansion {
    pub poly: TimePoly,
    pub level: u64,
}

impl TauExpansion {
    /// `log tau`, trusted to the same level.
    pub fn log(&self) -> TimePoly {
        self.poly
            .log_truncated(self.level)
            .expect("tau has unit constant term")
    }
}

/// `[d/dt_a tau]_mu` in terms of stored coefficients: `(mu_a + 1) c_{mu + e_a}`.
fn deriv_coeff(tau: &TimePoly, mu: &TimeMono, a: usize) -> NuPoly {
    let bumped = mu.bump(a);
    let mult = Rat::from_integer((mu.exponent(a) as i64 + 1).into());
    tau.coefficient(&bumped).scale(&mult)
}

/// Right-hand side of the recursion `(mu_m + 1) c_{mu + e_m} = [RHS_m]_mu`,
/// which only touches coefficients of level `< level(mu + e_m)`.
fn recursion_rhs(tau: &TimePoly, mu: &TimeMono, m: usize, k_max: usize) -> NuPoly {
    let mut acc = NuPoly::zero();
    // sum_l (2l+1)/2 [t_l d_{l+m} tau]_mu
    for ell in 0..=k_max {
        if ell + m > k_max {
            break;
        }
        if let Some(lowered) = mu.unbump(ell) {
            let w = rat(2 * ell as i64 + 1, 2);
            acc = &acc + &deriv_coeff(tau, &lowered, ell + m).scale(&w);
        }
    }
    // 1/4 sum_{l=0}^{m-1} [d_l d_{m-1-l} tau]_mu
    for ell in 0..m {
        let first = mu.bump(ell);
        let mult1 = Rat::from_integer((mu.exponent(ell) as i64 + 1).into());
        let second = m - 1 - ell;
        let mult2 = Rat::from_integer((first.exponent(second) as i64 + 1).into());
        let c = tau.coefficient(&first.bump(second));
        acc = &acc + &c.scale(&(mult1 * mult2 * rat(1, 4)));
    }
    if m == 0 {
        acc = &acc + &(&tau.coefficient(mu) * &central_term());
    }
    acc
}

/// Solve the Virasoro constraints for tau through the given level.
///
/// Every coefficient is computed from the smallest applicable constraint and
/// cross-checked against all others that reach it.
pub fn solve_tau(level: u64) -> Result<TauExpansion, VirasoroError> {
    if level < 1 {
        return Err(VirasoroError::LevelTooSmall(level));
    }
    let k_max = ((level - 1) / 2) as usize;
    let mut tau = TimePoly::one();
    let mut monos = monomials_up_to_level(level);
    monos.sort_by_key(|m| (m.level(), m.clone()));
    for kappa in monos {
        if kappa.is_unit() {
            continue;
        }
        let ms: Vec<usize> = (0..=k_max).filter(|&m| kappa.exponent(m) > 0).collect();
        let m0 = ms[0];
        let mu = kappa.unbump(m0).expect("nonzero exponent");
        let denom = Rat::from_integer((kappa.exponent(m0) as i64).into());
        let value = recursion_rhs(&tau, &mu, m0, k_max).scale(&(Rat::one() / denom));
        tau.add_term(kappa.clone(), value.clone());
        // overdetermination: every other constraint must agree
        for &m in &ms[1..] {
            let mu2 = kappa.unbump(m).expect("nonzero exponent");
            let denom2 = Rat::from_integer((kappa.exponent(m) as i64).into());
            let value2 = recursion_rhs(&tau, &mu2, m, k_max).scale(&(Rat::one() / denom2));
            if value2 != value {
                return Err(VirasoroError::InconsistentConstraints {
                    monomial: format!("{:?}", kappa),
                    from_m: m0,
                    against_m: m,
                });
            }
        }
    }
    Ok(TauExpansion { poly: tau, level })
}

/// Assert `L_m tau = 0` through the trusted residual level.
///
/// A tau solved to level `L` determines the residual exactly only up to level
/// `L - 2m - 1`: the dilaton term `-d/dt_m` pulls coefficients from level
/// `V + 2m + 1`, which must stay `<= L`.
pub fn annihilation_check(m: usize, tau: &TauExpansion) -> bool {
    let residual = apply_virasoro(m, &tau.poly);
    let trusted = tau.level.saturating_sub(2 * m as u64 + 1);
    residual.truncate_level(trusted).is_zero()
}

/// Direction of [`log_exp_convert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvertDirection {
    Log,
    Exp,
}

/// Graded logarithm/exponential at a level bound, bridging tau and the
/// connected (log tau) coefficients.
pub fn log_exp_convert(
    p: &TimePoly,
    direction: ConvertDirection,
    level: u64,
) -> Result<TimePoly, crate::timepoly::TimePolyError> {
    match direction {
        ConvertDirection::Log => p.log_truncated(level),
        ConvertDirection::Exp => p.exp_truncated(level),
    }
}

/// Connected correlator from the solved tau: the mixed derivative of
/// `log tau` at `t = 0`, i.e. the monomial coefficient times the product of
/// exponent factorials.
pub fn oracle_connected(key: &CorrelatorKey, log_tau: &TimePoly) -> NuPoly {
    let mono = TimeMono::from_indices(key.ells());
    let mut mult = BigInt::one();
    for &e in mono.exponents() {
        for j in 2..=e as u64 {
            mult *= BigInt::from(j);
        }
    }
    log_tau.coefficient(&mono).scale(&Rat::from_integer(mult))
}

/// Level `sum (2 l_i + 1)` of a correlator key.
pub fn key_level(key: &CorrelatorKey) -> u64 {
    key.ells().iter().map(|&l| 2 * l as u64 + 1).sum()
}

/// The tau_0-insertion multiplier `(n + 2 sum l_i)_k`, shared by both
/// normalization conventions.
pub fn tau0_multiplier(key: &CorrelatorKey, k: u32) -> BigInt {
    let base = key.ells().len() as i64 + 2 * key.ells().iter().map(|&l| l as i64).sum::<i64>();
    crate::rational::rising_factorial_int(base, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one_half, rat_int};

    fn nu2(c0: Rat, c2: Rat) -> NuPoly {
        NuPoly::from_coeffs([(0, c0), (2, c2)])
    }

    /// (1-4nu^2)(9-4nu^2)/d as a NuPoly
    fn poly_1_9(d: i64) -> NuPoly {
        let a = nu2(rat_int(1), rat_int(-4));
        let b = nu2(rat_int(9), rat_int(-4));
        (&a * &b).scale(&rat(1, d))
    }

    #[test]
    fn l0_on_constant() {
        let one = TimePoly::one();
        let r = apply_virasoro(0, &one);
        assert_eq!(r, TimePoly::constant(central_term()));
    }

    #[test]
    fn l0_annihilates_displayed_expansion_at_low_level() {
        // tau = 1 + (1-4nu^2)/16 t0 + ... ; L0 tau vanishes at level 0
        let mut tau = TimePoly::one();
        tau.add_term(TimeMono::time(0), central_term());
        let r = apply_virasoro(0, &tau);
        assert!(r.constant_term().is_zero());
    }

    #[test]
    fn virasoro_on_monomial_by_hand() {
        // L_1(t0^2) = 1/2 t0 * d_1(t0^2) - d_1(t0^2) + 1/4 d_0 d_0 (t0^2) = 1/2
        let t0sq = TimePoly::time(0).mul(&TimePoly::time(0));
        let r = apply_virasoro(1, &t0sq);
        assert_eq!(r, TimePoly::constant(NuPoly::constant(one_half())));
    }

    #[test]
    fn commutators_hold() {
        assert!(check_commutator(2, 1, 9));
        assert!(check_commutator(1, 1, 7));
        assert!(check_commutator(3, 0, 9));
    }

    #[test]
    fn monomial_census() {
        // exponent vectors (a_0..a_4) with a_0 + 3a_1 + 5a_2 + 7a_3 + 9a_4 <= 9
        assert_eq!(monomials_up_to_level(9).len(), 33);
        assert_eq!(monomials_up_to_level(0).len(), 1);
        assert_eq!(monomials_up_to_level(2).len(), 3); // 1, t0, t0^2
    }

    #[test]
    fn solved_tau_matches_displayed_coefficients() {
        let tau = solve_tau(9).unwrap();
        let p = &tau.poly;
        assert_eq!(p.coefficient(&TimeMono::time(0)), central_term());
        assert_eq!(p.coefficient(&TimeMono::time(1)), poly_1_9(1024));
        assert_eq!(
            p.coefficient(&TimeMono::from_indices(&[0, 0])),
            poly_1_9(512)
        );
        let c25 = &poly_1_9(1) * &nu2(rat_int(25), rat_int(-4));
        assert_eq!(p.coefficient(&TimeMono::time(2)), c25.scale(&rat(1, 32768)));
        assert_eq!(
            p.coefficient(&TimeMono::from_indices(&[0, 1])),
            c25.scale(&rat(1, 16384))
        );
        let c17 = &poly_1_9(1) * &nu2(rat_int(17), rat_int(-4));
        assert_eq!(
            p.coefficient(&TimeMono::from_indices(&[0, 0, 0])),
            c17.scale(&rat(1, 24576))
        );
    }

    #[test]
    fn log_tau_at_nu_zero_matches_connected_expansion() {
        let tau = solve_tau(7).unwrap();
        let log = tau.log().specialize_nu(&Rat::from_integer(0.into()));
        let expect = [
            (TimeMono::time(0), rat(1, 16)),
            (TimeMono::time(1), rat(9, 1024)),
            (TimeMono::from_indices(&[0, 0]), rat(1, 64)),
            (TimeMono::time(2), rat(225, 32768)),
            (TimeMono::from_indices(&[0, 1]), rat(27, 2048)),
            (TimeMono::from_indices(&[0, 0, 0]), rat(1, 192)),
        ];
        for (mono, val) in expect {
            assert_eq!(
                log.coefficient(&mono),
                NuPoly::constant(val),
                "monomial {:?}",
                mono
            );
        }
    }

    #[test]
    fn annihilation_checks() {
        let tau = solve_tau(9).unwrap();
        for m in 0..=3 {
            assert!(annihilation_check(m, &tau), "L_{}", m);
        }
        // negative control: perturb one coefficient
        let mut bad = tau.poly.clone();
        bad.add_term(TimeMono::time(1), NuPoly::one());
        let perturbed = TauExpansion {
            poly: bad,
            level: 9,
        };
        assert!(!annihilation_check(0, &perturbed));
    }

    #[test]
    fn log_exp_convert_round_trip() {
        let tau = solve_tau(7).unwrap();
        let log = log_exp_convert(&tau.poly, ConvertDirection::Log, 7).unwrap();
        assert_eq!(log, tau.log());
        let back = log_exp_convert(&log, ConvertDirection::Exp, 7).unwrap();
        assert_eq!(back, tau.poly);
        // single-variable coefficients of log tau are the one-point values
        for ell in 0..=3u32 {
            let key = CorrelatorKey::new(vec![ell]).unwrap();
            assert_eq!(
                oracle_connected(&key, &log),
                crate::correlators::one_point(ell),
                "l = {}",
                ell
            );
        }
    }

    #[test]
    fn solver_is_schedule_independent() {
        // computing each coefficient from the LARGEST applicable m instead
        // must give the same expansion (the solver itself cross-checks all
        // schedules, so agreement of the assembled polynomial suffices)
        let level = 9;
        let reference = solve_tau(level).unwrap().poly;
        let k_max = ((level - 1) / 2) as usize;
        let mut tau = TimePoly::one();
        let mut monos = monomials_up_to_level(level);
        monos.sort_by_key(|m| (m.level(), std::cmp::Reverse(m.clone())));
        for kappa in monos {
            if kappa.is_unit() {
                continue;
            }
            let m = (0..=k_max).rev().find(|&m| kappa.exponent(m) > 0).unwrap();
            let mu = kappa.unbump(m).unwrap();
            let denom = Rat::from_integer((kappa.exponent(m) as i64).into());
            let value = recursion_rhs(&tau, &mu, m, k_max).scale(&(Rat::one() / denom));
            tau.add_term(kappa, value);
        }
        assert_eq!(tau, reference);
    }

    #[test]
    fn coefficients_even_and_divisible() {
        let tau = solve_tau(9).unwrap();
        let vanishing = nu2(rat_int(1), rat_int(-4)); // 1 - 4 nu^2
        for (mono, c) in tau.poly.terms() {
            assert!(c.is_even(), "coefficient of {:?} not even in nu", mono);
            if !mono.is_unit() {
                assert!(
                    c.exact_div(&vanishing).is_ok(),
                    "coefficient of {:?} not divisible by (1-4nu^2)",
                    mono
                );
            }
        }
    }

    #[test]
    fn tau0_insertion_relation_on_solved_coefficients() {
        // connected correlators with a tau_0 insertion obey
        // C(0 u key) = (n + 2 sum l)/2 * C(key)
        let tau = solve_tau(9).unwrap();
        let log = tau.log();
        for key in [
            CorrelatorKey::new(vec![1]).unwrap(),
            CorrelatorKey::new(vec![1, 1]).unwrap(),
            CorrelatorKey::new(vec![0, 2]).unwrap(),
            CorrelatorKey::new(vec![2]).unwrap(),
        ] {
            let mut with_zero = key.ells().to_vec();
            with_zero.push(0);
            let inserted = CorrelatorKey::new(with_zero).unwrap();
            if key_level(&inserted) > 9 {
                continue;
            }
            let base = oracle_connected(&key, &log);
            let got = oracle_connected(&inserted, &log);
            let mult = Rat::new(tau0_multiplier(&key, 1), 2.into());
            assert_eq!(got, base.scale(&mult), "key {:?}", key);
        }
    }
}
