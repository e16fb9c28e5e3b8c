//! Simulation and certification toolkit for semilinear difference equations
//! `x(n+1) = e(phi) x(n) + f(x(n)) + y(n)` on the complex plane, in the
//! critical case where the linear part is a pure irrational rotation.
//!
//! The crate is organized around the pipeline:
//!
//! * [`circle`] — conventions for the circle `T = R/Z`: reduction, arc metric,
//!   argument extraction in turns, rotation.
//! * [`kernels`] — the three complex-plane perturbation estimates (argument
//!   identity, rotation-error bound, radial increment decomposition) as
//!   checkable kernels.
//! * [`ergodic`] — orbit analytics for irrational rotations: gap spectra,
//!   covering measure/number, Birkhoff averages, occupation fractions,
//!   star discrepancy.
//! * [`systems`] — the registry of concrete `f`/`y` families, including the
//!   three unbounded counterexample constructions with exact state tracking.
//! * [`dynamics`] — the stepper, trajectory recording, and drift diagnostics.
//! * [`conditions`] — numerical certification of the boundedness hypotheses
//!   (drift profile, uniform-convergence gaps, windowed forcing norms).
//! * [`envelope`] — the explicit bound calculators: the quantitative
//!   `(N_d, H, L)` envelope and the power-law `beta` scan.
//! * [`verify`] — seeded property suites for the kernels, shared between
//!   tests and the CLI.
//!
//! Angles are measured in turns (fractions of a full circle) throughout;
//! radians never cross a module boundary.

pub mod circle;
pub mod conditions;
pub mod dynamics;
pub mod envelope;
pub mod ergodic;
pub mod kernels;
pub mod systems;
pub mod verify;

pub use circle::{cis_turns, CirclePoint, RotationNumber};
pub use dynamics::{simulate, Trajectory};
pub use systems::SystemSpec;
