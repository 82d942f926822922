//! Floorplans, power maps and a steady-state thermal solver for stacked
//! dies.
//!
//! A [`Floorplan`] is rasterized into a [`PowerMap`] per powered layer of a
//! [`LayerStack`], and [`solve_steady`] returns a [`ThermalGrid`] of cell
//! temperatures. Lengths are in µm, powers in W, temperatures in °C.

mod floorplan;
mod grid;
mod raster;
mod solver;
mod stack;

pub use floorplan::{
    build_ap_floorplan, build_simd_floorplan, ApRegionPowers, Block, Floorplan, SimdRegionPowers, AP_BLOCK_ROWS,
    AP_DIE_UM, AP_KEY_MASK_FLIP_FLOPS, AP_TAG_FLIP_FLOPS, REGISTER_ACTIVITY, SIMD_DIE_UM, SIMD_PUS_PER_TILE,
    SIMD_TILES,
};
pub use grid::{CellIndex, GridStats, ThermalGrid, DRAM_LIMIT_C};
pub use raster::{rasterize_power, PowerMap, MIN_RESOLUTION};
pub use solver::{solve_steady, solve_steady_with, SolverOptions, ThermalSolution, RING_CELLS};
pub use stack::{Boundary, BoundarySide, Layer, LayerStack, SILICON_K, SPREADER_K, TIM_K};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ParamSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermalError {
    #[error("invalid die {width} × {height} µm")]
    InvalidDie { width: f64, height: f64 },
    #[error("block {0} has a non-positive size, negative power or non-finite field")]
    InvalidBlock(String),
    #[error("block {0} extends beyond the die")]
    BlockOutsideDie(String),
    #[error("blocks {0} and {1} overlap")]
    Overlap(String, String),
    #[error("block powers add up to {actual} W, declared {declared} W")]
    PowerMismatch { declared: f64, actual: f64 },
    #[error("region power {0} must be finite and non-negative")]
    NegativePower(f64),
    #[error("resolution {resolution} below the minimum {min}")]
    Resolution { resolution: usize, min: usize },
    #[error("stack has no layers")]
    NoLayers,
    #[error("stack has no powered layer")]
    NoPoweredLayer,
    #[error("layer {0} needs positive thickness, conductivity and side")]
    InvalidLayer(String),
    #[error("layer {0} is narrower than the die")]
    LayerSmallerThanDie(String),
    #[error("boundary needs a positive convective resistance and finite ambient")]
    InvalidBoundary,
    #[error("{actual} power maps given for {expected} powered layers")]
    PowerMapCount { expected: usize, actual: usize },
    #[error("power maps disagree on die size or resolution")]
    ResolutionMismatch,
    #[error("solver stopped after {iterations} iterations at relative residual {residual}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("layer {layer} out of range ({n_layers} layers)")]
    LayerIndex { layer: usize, n_layers: usize },
    #[error("row {row} out of range (resolution {resolution})")]
    RowIndex { row: usize, resolution: usize },
    #[error("model: {0}")]
    Model(String),
    #[error("JSON: {0}")]
    Json(String),
    #[error("I/O: {0}")]
    Io(String),
}

/// The two reference chips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chip {
    Ap,
    Simd,
}

/// Floorplan of a reference chip with model powers. The SIMD chip runs
/// the same-performance matrix-multiply calibration.
pub fn reference_floorplan(chip: Chip, params: &ParamSet) -> Result<Floorplan, ThermalError> {
    match chip {
        Chip::Ap => build_ap_floorplan(params, &ApRegionPowers::from_model(params)),
        Chip::Simd => build_simd_floorplan(params, &SimdRegionPowers::from_model(params, "DMM")?),
    }
}

/// Rasterizes `floorplan` once and feeds the same map, scaled by
/// `power_scale`, to every powered layer of `stack`.
pub fn simulate(
    floorplan: &Floorplan,
    stack: &LayerStack,
    resolution: usize,
    power_scale: f64,
) -> Result<ThermalSolution, ThermalError> {
    stack.validate()?;
    let map = rasterize_power(floorplan, resolution)?.scaled(power_scale);
    let maps = vec![map; stack.powered_layers().count()];
    solve_steady(stack, &maps)
}
