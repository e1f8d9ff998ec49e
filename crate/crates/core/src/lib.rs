//! Higher-order analogues of the Tracy–Widom distribution.
//!
//! The crate computes `ln det(I - K_s^{(k)})` and its `s`-derivative through
//! three independent routes and the tools each route needs:
//!
//! * [`diffpoly`]: exact Lenard recursion and the Painlevé II hierarchy;
//! * [`specfun`]: Airy functions, Gauss–Legendre rules, `zeta'(-1)`, exact
//!   Gamma ratios;
//! * [`painleve`]: Chebyshev collocation for the distinguished pole-free
//!   hierarchy solution and the Hastings–McLeod solution;
//! * [`auxlin`]: the linear problem `u'' = (q_x + q^2) u` and `Q = int u^2`;
//! * [`maps`]: exact large-gap coefficients and parameter maps;
//! * [`fredholm`]: Nyström evaluation of the Airy-kernel determinant;
//! * [`pipeline`]: the route drivers used by the command-line tool.

pub mod auxlin;
pub mod cheb;
pub mod diffpoly;
pub mod fredholm;
pub mod jet;
pub mod maps;
pub mod painleve;
pub mod pipeline;
pub mod specfun;

pub use diffpoly::{lenard, pii_equation, CoeffPoly, DiffPoly, Symbol};
pub use fredholm::{airy_kernel, nystrom_lndet, NystromConfig};
pub use maps::AsymptoticSeries;
pub use painleve::{CollocSolution, PiiProblem, PiiSolution};
pub use pipeline::{painleve_sweep, Sweep, SweepConfig};
pub use specfun::QuadratureRule;
