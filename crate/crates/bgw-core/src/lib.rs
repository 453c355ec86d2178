//! Exact computation engine for the generalized Brezin-Gross-Witten (gBGW)
//! tau function of the KdV hierarchy.
//!
//! Everything is computed in exact arithmetic: arbitrary-precision rationals,
//! polynomials in the deformation parameter `nu`, truncated (multi-)Laurent
//! series with explicit trusted windows, and graded polynomials in the KdV
//! times. On top of that algebra sit four computational subsystems:
//!
//! - [`umatrix`]: the 2x2 matrix series `U(z; nu)` and its defining identities;
//! - [`correlators`]: connected correlators via the one-point closed form and
//!   the n-point permutation-sum engine, normalized to intersection numbers
//!   (`nu = 0`) or to `nu`-polynomial correlators, with Tricomi and
//!   Miwa-determinant consistency checks;
//! - [`virasoro`]: the Virasoro operators `L_m`, their commutation relations,
//!   and the recursive solver that turns `L_m tau = 0` into an independent
//!   oracle for the tau coefficients;
//! - [`kdv`] / [`lax`]: differential-polynomial machinery for the
//!   Lenard-Magri recursion, KdV flow residuals, the Painleve XXXIV
//!   hierarchy, the Miura transformation, and the symbolic Lax-pair
//!   zero-curvature identities.

// index-based loops over 2x2 matrices and derivative towers read better here
#![allow(clippy::needless_range_loop)]
#![allow(clippy::result_large_err)]

pub mod correlators;
pub mod diffpoly;
pub mod kdv;
pub mod laurent;
pub mod lax;
pub mod miwa;
pub mod multiseries;
pub mod nupoly;
pub mod rational;
pub mod timepoly;
pub mod umatrix;
pub mod virasoro;

pub use nupoly::{NuPoly, NuSign};
pub use rational::Rat;
