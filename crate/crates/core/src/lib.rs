//! Exact-arithmetic toolkit for finite cubespaces.
//!
//! A *cubespace* is a finite set of points together with, for every dimension
//! `n`, a distinguished set of *cubes*: maps from the discrete hypercube
//! `{0,1}^n` into the point set, closed under face restriction and the
//! symmetries of the hypercube.  The crate provides
//!
//! * combinatorics of discrete-cube configurations ([`cube`]),
//! * finite filtered groups and an exact value group built from reduced
//!   rationals ([`groups`], [`values`]),
//! * Host–Kra cube groups with a peeling membership test ([`host_kra`]),
//! * cubespace axiom checkers, canonical factors and structure groups
//!   ([`space`]),
//! * translation enumeration, the translation filtration, and lifting of
//!   factor translations ([`translations`]),
//! * cocycles, discrepancy, and two independent coboundary solvers
//!   ([`cocycle`]).
//!
//! Everything is computed in exact arithmetic: torus coordinates are reduced
//! rationals, so every comparison made by a checker is a decision, never an
//! approximation.

pub mod cocycle;
pub mod cube;
pub mod error;
pub mod fixtures;
pub mod groups;
pub mod host_kra;
pub mod linear;
pub mod rng;
pub mod space;
pub mod translations;
pub mod values;

pub use error::{Error, Result};
