//! Associative processor (AP) simulation and analysis toolkit.
//!
//! - [`array`]: the associative array with KEY/MASK/TAG registers and an
//!   event ledger.
//! - [`kernels`]: bit-serial, word-parallel arithmetic built from
//!   compare/write passes.
//! - [`models`]: closed-form area, speedup and power models for an AP and a
//!   reference SIMD processor.
//! - [`thermal`]: floorplans, power maps and a steady-state finite-volume
//!   solver for multi-layer die stacks.
//! - [`workloads`]: matrix multiply, FFT and Black-Scholes on the simulator.

pub mod array;
pub mod bits;
pub mod kernels;
pub mod models;
pub mod thermal;
pub mod workloads;

pub use array::{ApArray, ApError, EventLedger};
pub use bits::Bits;
pub use kernels::FieldSpec;
