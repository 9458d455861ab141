//! Finite-scale constructions on homogeneous structures.

pub mod chains;
pub mod embed;
pub mod indep;
pub mod metric;
pub mod report;
pub mod monoid;
pub mod oligo;
pub mod rational;
pub mod rng;
pub mod suite;
pub mod urysohn;
pub mod zariski;
