//! Exact-arithmetic tools for checking canonical singularities of n-fold
//! Kuga varieties, together with verification harnesses for the symplectic
//! group identities, Siegel upper half space formulas and boundary-integral
//! asymptotics that the singularity criterion sits on top of.
//!
//! The computational core is exact: eigenvalue angles are reduced fractions
//! in `[0, 1)`, Reid-Tai sums are exact rationals, symplectic matrices have
//! arbitrary-precision rational entries, and cone/lattice tests use integer
//! elimination. Floating point appears only in the numeric harnesses
//! ([`siegel`] and [`asymptotics`]), where every identity is checked against
//! a documented tolerance.

pub mod angle;
pub mod asymptotics;
pub mod cli;
pub mod cone;
pub mod cusp_tables;
pub mod cyclic_rep;
pub mod quadrature;
pub mod ratmat;
pub mod reid_tai;
pub mod siegel;
pub mod symplectic;

pub use angle::Angle;
pub use cyclic_rep::{CyclotomicComponent, HodgeSplitting, RationalRep};
pub use reid_tai::{ClassifiedCase, ScanReport, TangentSpectrum};
