//! Matrix multiply, FFT and Black-Scholes on the associative array, with
//! scalar oracles and the ledger-to-power conversion.
//!
//! Each run builds its own array with one data element per row, loads the
//! inputs with single-row writes and resets the ledger, so the returned
//! ledger covers the computation only.

mod black_scholes;
mod dmm;
mod fft;
mod power;
pub(crate) mod program;

pub use black_scholes::{
    bs_error_bound, bs_fraction_bits, bs_oracle, random_options, run_black_scholes, BsRun, Market, OptionPair,
};
pub use dmm::{dmm_oracle, run_dmm, DmmRun};
pub use fft::{fft_error_bound, fft_max_error, fft_oracle, random_fft_input, run_fft, Complex, FftRun};
pub use power::{trace_to_power, TracePower};
pub use program::{to_code, to_signed};

use thiserror::Error;

use crate::array::ApError;
use crate::kernels::KernelError;

/// Largest array a functional run may build.
pub const MAX_ROWS: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("{needed} PUs needed, at most {available} available")]
    Capacity { needed: usize, available: usize },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl From<ApError> for WorkloadError {
    fn from(e: ApError) -> Self {
        WorkloadError::Kernel(e.into())
    }
}

fn check_capacity(needed: usize) -> Result<(), WorkloadError> {
    if needed > MAX_ROWS {
        return Err(WorkloadError::Capacity { needed, available: MAX_ROWS });
    }
    Ok(())
}
