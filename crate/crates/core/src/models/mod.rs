//! Closed-form area→performance and area→power models for the reference
//! SIMD processor and the associative processor.
//!
//! SIMD: `n = floor((A - A_C) / (A_PU0 m² + A_RF0 k m))` PUs and speedup
//! `1 / (1/n + I_s)`. AP: `n = floor(A / (A_AP0 k m))` PUs and speedup
//! `s_APU n`. Areas enter in mm² and are converted to SRAM-cell units
//! through [`UnitSystem`]; PU counts are floored and every derived quantity
//! uses the floored count.

mod params;
mod sweep;

pub use params::{ApParams, ParamSet, SimdParams, UnitSystem, WorkloadModel, DMM_PU_SPEEDUP, DMM_SYNC_INTENSITY};
pub use sweep::{break_even_area, sweep, write_sweep_csv, Arch, SweepPoint};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("area {area_mm2} mm² leaves no room for PUs beside {cache_mm2} mm² of cache")]
    NoRoomForPus { area_mm2: f64, cache_mm2: f64 },
    #[error("no break-even in range [{lo}, {hi}] mm²")]
    NoBreakEven { lo: f64, hi: f64 },
    #[error("invalid sweep range [{lo}, {hi}] with {steps} steps")]
    InvalidRange { lo: f64, hi: f64, steps: usize },
    #[error("invalid parameter {name} = {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("cache area {a_c} cells is below the data set ({required} cells)")]
    CacheTooSmall { a_c: f64, required: f64 },
    #[error("unknown workload {0:?}")]
    UnknownWorkload(String),
    #[error("parameter JSON: {0}")]
    Json(String),
}

// Absorbs representation error so that e.g. 512 cells worth of mm² counts
// as exactly one PU.
fn count_floor(x: f64) -> u64 {
    if x <= 0.0 {
        0
    } else {
        (x * (1.0 + 1e-12)).floor() as u64
    }
}

pub fn simd_pu_count(area_mm2: f64, simd: &SimdParams, units: &UnitSystem) -> Result<u64, ModelError> {
    let cells = units.mm2_to_cells(area_mm2);
    if cells <= simd.a_c {
        return Err(ModelError::NoRoomForPus { area_mm2, cache_mm2: units.cells_to_mm2(simd.a_c) });
    }
    Ok(count_floor((cells - simd.a_c) / simd.pu_area_cells()))
}

/// `1 / (1/n + I_s)` for a given PU count; zero PUs give zero speedup.
pub fn simd_speedup_for(n: u64, simd: &SimdParams) -> f64 {
    if n == 0 {
        0.0
    } else {
        1.0 / (1.0 / n as f64 + simd.i_s)
    }
}

pub fn simd_speedup(area_mm2: f64, simd: &SimdParams, units: &UnitSystem) -> Result<f64, ModelError> {
    Ok(simd_speedup_for(simd_pu_count(area_mm2, simd, units)?, simd))
}

pub fn ap_pu_count(area_mm2: f64, ap: &ApParams, units: &UnitSystem) -> u64 {
    count_floor(units.mm2_to_cells(area_mm2) / ap.pu_area_cells())
}

pub fn ap_speedup_for(n: u64, ap: &ApParams) -> f64 {
    ap.s_apu * n as f64
}

pub fn ap_speedup(area_mm2: f64, ap: &ApParams, units: &UnitSystem) -> f64 {
    ap_speedup_for(ap_pu_count(area_mm2, ap, units), ap)
}

/// Power split into its dynamic and leakage parts, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub dynamic_w: f64,
    pub leakage_w: f64,
}

impl PowerBreakdown {
    pub fn total_w(&self) -> f64 {
        self.dynamic_w + self.leakage_w
    }
}

/// SIMD power components for a PU count, split by consumer.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimdPowerComponents {
    /// PU datapaths: dynamic plus leakage.
    pub pu_w: f64,
    /// Register files: dynamic plus leakage.
    pub rf_w: f64,
    /// Cache-to-PU synchronization (dissipated in the caches).
    pub sync_w: f64,
}

impl SimdPowerComponents {
    pub fn total_w(&self) -> f64 {
        self.pu_w + self.rf_w + self.sync_w
    }
}

/// Dynamic power averaged over the execution span,
/// `(P_PU0 m² + P_RF0 k m + I_s P_S0 m) / (1/n + I_s)`, plus leakage
/// `γ n (A_PU0 m² + A_RF0 k m)` on the PU logic area.
pub fn simd_power_components(n: u64, simd: &SimdParams, units: &UnitSystem) -> SimdPowerComponents {
    let (k, m) = (simd.k as f64, simd.m as f64);
    let speedup = simd_speedup_for(n, simd);
    let n = n as f64;
    let leak = |cells: f64| simd.gamma * units.cells_to_mm2(cells) * n;
    SimdPowerComponents {
        pu_w: units.norm_to_watts(simd.p_pu0 * m * m * speedup) + leak(simd.a_pu0 * m * m),
        rf_w: units.norm_to_watts(simd.p_rf0 * k * m * speedup) + leak(simd.a_rf0 * k * m),
        sync_w: units.norm_to_watts(simd.i_s * simd.p_s0 * m * speedup),
    }
}

pub fn simd_power_for(n: u64, simd: &SimdParams, units: &UnitSystem) -> PowerBreakdown {
    let (k, m) = (simd.k as f64, simd.m as f64);
    let dyn_norm = (simd.p_pu0 * m * m + simd.p_rf0 * k * m + simd.i_s * simd.p_s0 * m) * simd_speedup_for(n, simd);
    PowerBreakdown {
        dynamic_w: units.norm_to_watts(dyn_norm),
        leakage_w: simd.gamma * n as f64 * units.cells_to_mm2(simd.pu_area_cells()),
    }
}

pub fn simd_power(area_mm2: f64, simd: &SimdParams, units: &UnitSystem) -> Result<PowerBreakdown, ModelError> {
    Ok(simd_power_for(simd_pu_count(area_mm2, simd, units)?, simd, units))
}

/// Dynamic power of one associative PU in SRAM-write units:
/// `1/8 + 7/8 p_mw + 3/16 p_m + 21/16 p_mm`.
///
/// Each add pass compares 3 bits and writes 2; a row matches (and is
/// written) with probability 1/8, and compare and write each take half the
/// time.
pub fn ap_dynamic_norm_per_pu(ap: &ApParams) -> f64 {
    1.0 / 8.0 + 7.0 / 8.0 * ap.p_mw + 3.0 / 16.0 * ap.p_m + 21.0 / 16.0 * ap.p_mm
}

/// Leakage of one associative PU in watts, `γ A_AP0 k m` with the area
/// converted to mm².
pub fn ap_leakage_w_per_pu(ap: &ApParams, units: &UnitSystem) -> f64 {
    ap.gamma * units.cells_to_mm2(ap.pu_area_cells())
}

pub fn ap_power_for(n: u64, ap: &ApParams, units: &UnitSystem) -> PowerBreakdown {
    let n = n as f64;
    PowerBreakdown {
        dynamic_w: n * units.norm_to_watts(ap_dynamic_norm_per_pu(ap)),
        leakage_w: n * ap_leakage_w_per_pu(ap, units),
    }
}

pub fn ap_power(area_mm2: f64, ap: &ApParams, units: &UnitSystem) -> PowerBreakdown {
    ap_power_for(ap_pu_count(area_mm2, ap, units), ap, units)
}
