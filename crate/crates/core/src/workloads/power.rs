use serde::{Deserialize, Serialize};

use crate::array::EventLedger;
use crate::models::{ap_leakage_w_per_pu, ApParams, UnitSystem};

/// Average power of an AP running a recorded trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePower {
    /// Average dynamic energy per PU per cycle, in SRAM-write units.
    pub dynamic_norm_per_pu: f64,
    pub dynamic_w: f64,
    pub leakage_w: f64,
    pub total_w: f64,
    /// Total power over the array area, W/mm².
    pub density_w_mm2: f64,
}

/// Converts a ledger into the average power of `n_pus` PUs executing it.
///
/// Each written cell costs one SRAM write, each miswritten cell `p_mw`,
/// each matching compared cell `p_m` and each mismatching one `p_mm`. The
/// sum is averaged over the ledger's cycles and rows, so the trace may come
/// from a smaller array than the one being modeled. An empty ledger leaves
/// leakage only.
pub fn trace_to_power(ledger: &EventLedger, rows: usize, n_pus: u64, ap: &ApParams, units: &UnitSystem) -> TracePower {
    let energy = ledger.write_bits as f64
        + ap.p_mw * ledger.miswrite_bits as f64
        + ap.p_m * ledger.match_bits as f64
        + ap.p_mm * ledger.mismatch_bits as f64;
    let per_pu = if ledger.cycles == 0 || rows == 0 { 0.0 } else { energy / (ledger.cycles as f64 * rows as f64) };
    let n = n_pus as f64;
    let dynamic_w = n * units.norm_to_watts(per_pu);
    let leakage_w = n * ap_leakage_w_per_pu(ap, units);
    let total_w = dynamic_w + leakage_w;
    let area = n * units.cells_to_mm2(ap.pu_area_cells());
    TracePower {
        dynamic_norm_per_pu: per_pu,
        dynamic_w,
        leakage_w,
        total_w,
        density_w_mm2: if area > 0.0 { total_w / area } else { 0.0 },
    }
}
