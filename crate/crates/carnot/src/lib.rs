//! Exact calculus on Carnot groups.
//!
//! A Carnot group is a simply connected nilpotent Lie group whose Lie algebra
//! splits into layers generated by the first one. In exponential coordinates
//! the whole structure is polynomial, which makes it possible to compute with
//! it exactly:
//!
//! * [`algebra`] builds stratified Lie algebras (structure constants over the
//!   rationals) and validates the stratification axioms.
//! * [`group`] realizes the group law through the Baker-Campbell-Hausdorff
//!   series, which terminates by nilpotency, together with dilations and the
//!   homogeneous gauge.
//! * [`poly`] is a small exact polynomial engine graded by weighted degree.
//! * [`diffop`] derives the left-invariant vector fields from the group law
//!   and assembles horizontal second-order operators such as the
//!   sub-Laplacian.
//! * [`taylor`] computes stratified Taylor polynomials from horizontal
//!   derivative data.
//! * [`approx`] solves for the boundary approximating polynomial of a
//!   horizontal operator near a non-characteristic boundary point, and for
//!   the harmonic companions that span the solution's ambiguity.
//! * [`verify`] is the floating-point harness: finite differences, decay-rate
//!   regressions, barrier scans, Monte Carlo Dirichlet solves, and boundary
//!   geometry probes.
//! * [`suite`] bundles the acceptance battery used by the CLI and the
//!   integration tests.
//!
//! Exact data lives in `num_rational::BigRational`; floating point appears
//! only in the verification harness and in gauge roots.

pub mod algebra;
pub mod approx;
pub mod diffop;
pub mod group;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod suite;
pub mod taylor;
pub mod verify;

pub use algebra::{AlgebraElement, Stratification};
