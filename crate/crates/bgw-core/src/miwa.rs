//! Consistency check between the determinantal form of the tau function and
//! the Virasoro-solved expansion, through the Miwa change of variables
//! `t_l = sum_j lambda_j^{-2l-1} / (2l+1)`.
//!
//! Working in `x_j = 1/lambda_j`, column `k` of the determinant carries the
//! normalized Bessel asymptotics
//!   `psi_k(x) = x^{1-k} sum_j (1/2-a)_j (1/2+a)_j / (j! 4^j) x^j`,
//! with `a = k - nu - 1`. Then `det[psi_k(x_j)] / Vandermonde(lambda)` is a
//! symmetric series in the `x_j` whose coefficients must reproduce the
//! Miwa-substituted tau expansion degree by degree, with no even power sums
//! appearing.

use crate::multiseries::MultiSeries;
use crate::nupoly::{pochhammer, NuPoly, NuSign};
use crate::rational::{factorial, rat, Rat};
use crate::timepoly::TimePoly;
use crate::virasoro::{solve_tau, VirasoroError};
use num::{BigInt, One};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MiwaError {
    UnsupportedArity(usize),
    Solver(VirasoroError),
    /// Determinant side and tau side disagree at a monomial.
    Mismatch {
        exponents: Vec<i64>,
        determinant: String,
        tau: String,
    },
    /// The degree-2 component contains an even power sum `p_2`.
    EvenPowerSum {
        degree: u64,
        coefficient: String,
    },
    /// The determinant side is not symmetric (engine bug).
    Asymmetry {
        exponents: Vec<i64>,
    },
}

impl fmt::Display for MiwaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MiwaError::UnsupportedArity(n) => {
                write!(f, "miwa check supports n = 2 or 3, got {}", n)
            }
            MiwaError::Solver(e) => write!(f, "tau solver: {}", e),
            MiwaError::Mismatch {
                exponents,
                determinant,
                tau,
            } => write!(
                f,
                "determinant and tau sides differ at x^{:?}: {} vs {}",
                exponents, determinant, tau
            ),
            MiwaError::EvenPowerSum {
                degree,
                coefficient,
            } => {
                write!(
                    f,
                    "even power sum detected at degree {}: p_2 coefficient {}",
                    degree, coefficient
                )
            }
            MiwaError::Asymmetry { exponents } => {
                write!(f, "determinant side not symmetric at x^{:?}", exponents)
            }
        }
    }
}

impl std::error::Error for MiwaError {}

/// Column series `psi_k` (1-based `k`) in `x = 1/lambda`, truncated after
/// `x^{1-k} * x^max_j`.
fn column_series(k: i64, max_j: i64) -> Vec<(i64, NuPoly)> {
    // a = k - nu - 1: (1/2 - a) = (3/2 - k) + nu, (1/2 + a) = (k - 1/2) - nu
    let off_minus = rat(3, 2) - Rat::from_integer(k.into());
    let off_plus = Rat::from_integer(k.into()) - rat(1, 2);
    let mut terms = Vec::new();
    for j in 0..=max_j {
        let pm = pochhammer(&off_minus, NuSign::Plus, j).unwrap();
        let pp = pochhammer(&off_plus, NuSign::Minus, j).unwrap();
        let scale = Rat::new(
            BigInt::one(),
            factorial(j as u64) * BigInt::from(4).pow(j as u32),
        );
        terms.push((1 - k + j, (&pm * &pp).scale(&scale)));
    }
    terms
}

/// `-sum_{m=0..order} x_i^m x_j^{-m-1}`: expansion of `1/(x_i - x_j)` in the
/// region `|x_i| < |x_j|` (i.e. `i < j` under `|lambda_1| > ... > |lambda_n|`).
fn geom_x(arity: usize, i: usize, j: usize, order: i64) -> MultiSeries {
    assert!(i < j);
    let mut sum = MultiSeries::zero(arity);
    for m in 0..=order {
        let lhs = crate::laurent::LaurentSeries::exact_from_terms(
            0,
            [(m, NuPoly::constant(-Rat::one()))],
        );
        let a = MultiSeries::from_laurent(&lhs, arity, i);
        let b = MultiSeries::from_laurent(
            &crate::laurent::LaurentSeries::exact_from_terms(1, [(-m - 1, NuPoly::one())]),
            arity,
            j,
        );
        sum = sum
            .hull_add(&a.checked_mul(&b).expect("arity"))
            .expect("arity");
    }
    sum
}

fn exact_monomial(arity: usize, pos: usize, exp: i64) -> MultiSeries {
    MultiSeries::from_laurent(
        &crate::laurent::LaurentSeries::exact_from_terms(0, [(exp, NuPoly::one())]),
        arity,
        pos,
    )
}

/// Per-variable and total ranges the remaining factors can still contribute;
/// monomials that cannot reach the box `[0, level]^n`, total `<= level`, are
/// dropped as the product is assembled.
struct Suffix {
    lo: Vec<i64>,
    hi: Vec<i64>,
    tlo: i64,
    thi: i64,
}

impl Suffix {
    fn keep(&self, level: i64, e: &[i64]) -> bool {
        let mut tot = 0;
        for v in 0..e.len() {
            if e[v] + self.lo[v] > level || e[v] + self.hi[v] < 0 {
                return false;
            }
            tot += e[v];
        }
        tot + self.tlo <= level && tot + self.thi >= 0
    }
}

/// Determinant-side tau series in `x_1 ... x_n`, trusted for total degree
/// `<= level`. For every contributing decomposition the column depths sum to
/// the final total degree, so `max_j = level + 2n + 4` columns suffice; the
/// Vandermonde expansions are truncated by the telescoping bound below.
pub fn determinant_tau_series(n: usize, level: u64) -> Result<MultiSeries, MiwaError> {
    if !(2..=3).contains(&n) {
        return Err(MiwaError::UnsupportedArity(n));
    }
    let level_i = level as i64;
    let max_j = level_i + 2 * n as i64 + 4;
    // expansion orders of 1/(x_i - x_j): the most negative slot is always the
    // largest variable, and each earlier pair can push one column deeper
    let mut mirror = vec![0i64; n];
    let mut max_after = 0i64;
    for v in (0..n).rev() {
        mirror[v] = max_j + 2 * max_after;
        max_after = max_after.max(mirror[v]);
    }

    // columns with the 1/Vandermonde monomial prefactor x_v^{n-1} folded in,
    // so every stored exponent is nonnegative
    let columns: Vec<Vec<(i64, NuPoly)>> = (1..=n as i64)
        .map(|k| {
            column_series(k, max_j)
                .into_iter()
                .map(|(e, c)| (e + n as i64 - 1, c))
                .collect()
        })
        .collect();
    let embed = |col: usize, var: usize| -> MultiSeries {
        MultiSeries::from_laurent(
            &crate::laurent::LaurentSeries::exact_from_terms(0, columns[col].clone()),
            n,
            var,
        )
    };

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();

    // suffix bounds over the factor list [columns at var 1.., geom pairs..]
    let col_bounds = |var: usize| -> Suffix {
        let mut s = Suffix {
            lo: vec![0; n],
            hi: vec![0; n],
            tlo: 0,
            thi: 0,
        };
        s.lo[var] = 0;
        s.hi[var] = max_j + n as i64 - 1;
        s.tlo = 0;
        s.thi = max_j + n as i64 - 1;
        s
    };
    let geom_bounds = |i: usize, j: usize| -> Suffix {
        let mut s = Suffix {
            lo: vec![0; n],
            hi: vec![0; n],
            tlo: -1,
            thi: -1,
        };
        s.lo[i] = 0;
        s.hi[i] = mirror[j];
        s.lo[j] = -mirror[j] - 1;
        s.hi[j] = -1;
        s
    };
    let add = |a: &Suffix, b: &Suffix| -> Suffix {
        Suffix {
            lo: a.lo.iter().zip(&b.lo).map(|(x, y)| x + y).collect(),
            hi: a.hi.iter().zip(&b.hi).map(|(x, y)| x + y).collect(),
            tlo: a.tlo + b.tlo,
            thi: a.thi + b.thi,
        }
    };
    let mut factor_bounds: Vec<Suffix> = (1..n).map(col_bounds).collect();
    for &(i, j) in &pairs {
        factor_bounds.push(geom_bounds(i, j));
    }
    let mut suffix: Vec<Suffix> = Vec::with_capacity(factor_bounds.len() + 1);
    suffix.push(Suffix {
        lo: vec![0; n],
        hi: vec![0; n],
        tlo: 0,
        thi: 0,
    });
    for b in factor_bounds.iter().rev() {
        let merged = add(suffix.last().unwrap(), b);
        suffix.push(merged);
    }
    suffix.reverse();

    // det[psi_k(x_j)] as a signed sum of outer products
    let perms = crate::correlators::permutations(n, false);
    let mut det = MultiSeries::zero(n);
    for perm in perms.iter() {
        let mut inversions = 0;
        for a in 0..n {
            for b in a + 1..n {
                if perm[a] > perm[b] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 1 {
            -Rat::one()
        } else {
            Rat::one()
        };
        let mut term = embed(perm[0], 0).scale_rat(&sign);
        for var in 1..n {
            let s = &suffix[var];
            term = term
                .mul_filtered(&embed(perm[var], var), |e| s.keep(level_i, e))
                .expect("arity");
        }
        det = det.hull_add(&term).expect("arity");
    }

    let mut tau = det;
    for (count, &(i, j)) in pairs.iter().enumerate() {
        let g = geom_x(n, i, j, mirror[j]);
        let s = &suffix[n + count];
        tau = tau.mul_filtered(&g, |e| s.keep(level_i, e)).expect("arity");
    }
    tau.retain(|e| e.iter().all(|&x| x >= 0) && e.iter().sum::<i64>() <= level_i);
    Ok(tau)
}

/// Miwa-substituted tau expansion: `t_l -> p_{2l+1}(x)/(2l+1)`, truncated to
/// total degree `<= level`.
pub fn miwa_substituted_tau(tau: &TimePoly, n: usize, level: u64) -> MultiSeries {
    let level_i = level as i64;
    let cap = |e: &[i64]| e.iter().sum::<i64>() <= level_i;
    let power_sum = |m: i64| -> MultiSeries {
        let mut p = MultiSeries::zero(n);
        for v in 0..n {
            p = p.hull_add(&exact_monomial(n, v, m)).expect("arity");
        }
        p
    };
    let mut out = MultiSeries::zero(n);
    for (mono, c) in tau.terms() {
        if mono.level() > level {
            continue;
        }
        let mut term = MultiSeries::constant(n, c.clone());
        for (ell, &e) in mono.exponents().iter().enumerate() {
            let m = 2 * ell as i64 + 1;
            let p = power_sum(m).scale_rat(&Rat::new(BigInt::one(), m.into()));
            for _ in 0..e {
                term = term.mul_filtered(&p, cap).expect("arity");
            }
        }
        out = out.hull_add(&term).expect("arity");
    }
    out
}

/// Run the full consistency check for `n` Miwa variables up to the level.
pub fn miwa_consistency_check(n: usize, level: u64) -> Result<(), MiwaError> {
    let det_side = determinant_tau_series(n, level)?;
    let tau = solve_tau(level.max(1)).map_err(MiwaError::Solver)?;
    let tau_side = miwa_substituted_tau(&tau.poly, n, level);

    // symmetry of the determinant side
    for (exps, c) in det_side.terms() {
        let mut sorted = exps.clone();
        sorted.sort_unstable();
        if det_side.raw_coeff(&sorted) != *c {
            return Err(MiwaError::Asymmetry {
                exponents: exps.clone(),
            });
        }
    }

    // coefficient-by-coefficient agreement on all monomials of degree <= level
    let mut keys: Vec<Vec<i64>> = det_side
        .terms()
        .map(|(e, _)| e.clone())
        .chain(tau_side.terms().map(|(e, _)| e.clone()))
        .collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let a = det_side.raw_coeff(&key);
        let b = tau_side.raw_coeff(&key);
        if a != b {
            return Err(MiwaError::Mismatch {
                exponents: key,
                determinant: format!("{}", a),
                tau: format!("{}", b),
            });
        }
    }

    // the degree-2 component must be a multiple of p_1^2 = m_2 + 2 m_11:
    // any p_2 admixture would break the 1:2 ratio
    if level >= 2 && n >= 2 {
        let mut e_sq = vec![0i64; n];
        e_sq[0] = 2;
        let mut e_mixed = vec![0i64; n];
        e_mixed[0] = 1;
        e_mixed[1] = 1;
        let a = det_side.raw_coeff(&e_sq);
        let b = det_side.raw_coeff(&e_mixed);
        let p2_component = &b.scale(&rat(1, 2)) - &a;
        if !p2_component.is_zero() {
            return Err(MiwaError::EvenPowerSum {
                degree: 2,
                coefficient: format!("{}", -&p2_component),
            });
        }
    }
    Ok(())
}
