//! Model parameter sets and their JSON form.
//!
//! Field names follow the area/power parameter tables (`A_PU0`, `P_S0`,
//! `p_mm`, ...). Areas are in SRAM-cell units and powers in SRAM-write
//! units unless the name says otherwise.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// The only two constants that bridge normalized and physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Area of one SRAM bit cell.
    #[serde(rename = "A_SRAM_cell_um2")]
    pub sram_cell_area_um2: f64,
    /// Power of one SRAM bit cell during a write.
    #[serde(rename = "P_SRAM_cell_uW")]
    pub sram_write_power_uw: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem { sram_cell_area_um2: 0.1, sram_write_power_uw: 0.5 }
    }
}

impl UnitSystem {
    pub fn cells_to_mm2(&self, cells: f64) -> f64 {
        cells * self.sram_cell_area_um2 * 1e-6
    }

    pub fn mm2_to_cells(&self, mm2: f64) -> f64 {
        mm2 / (self.sram_cell_area_um2 * 1e-6)
    }

    pub fn norm_to_watts(&self, p: f64) -> f64 {
        p * self.sram_write_power_uw * 1e-6
    }

    pub fn watts_to_norm(&self, w: f64) -> f64 {
        w / (self.sram_write_power_uw * 1e-6)
    }
}

/// Reference SIMD processor parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimdParams {
    /// PU area per bit (per `m^2`).
    #[serde(rename = "A_PU0")]
    pub a_pu0: f64,
    /// Register-file flip-flop area.
    #[serde(rename = "A_RF0")]
    pub a_rf0: f64,
    #[serde(rename = "P_PU0")]
    pub p_pu0: f64,
    #[serde(rename = "P_RF0")]
    pub p_rf0: f64,
    /// Synchronization power per data bit.
    #[serde(rename = "P_S0")]
    pub p_s0: f64,
    pub k: u32,
    pub m: u32,
    /// L1 + L2 cache area in SRAM cells.
    #[serde(rename = "A_C")]
    pub a_c: f64,
    /// Synchronization intensity `T_S / T_1`; set per workload.
    #[serde(rename = "I_s")]
    pub i_s: f64,
    /// Leakage per mm² of logic, W/mm².
    #[serde(rename = "gamma_W_per_mm2")]
    pub gamma: f64,
}

impl Default for SimdParams {
    fn default() -> Self {
        SimdParams {
            a_pu0: 20.0,
            a_rf0: 3.0,
            p_pu0: 40.0,
            p_rf0: 5.0,
            p_s0: 200.0,
            k: 8,
            m: 32,
            a_c: 3.668e7,
            i_s: 0.0,
            gamma: 5e-2,
        }
    }
}

impl SimdParams {
    /// `A_PU + A_RF` for one PU, in cells.
    pub fn pu_area_cells(&self) -> f64 {
        let (k, m) = (self.k as f64, self.m as f64);
        self.a_pu0 * m * m + self.a_rf0 * k * m
    }

    pub fn with_sync_intensity(mut self, i_s: f64) -> Self {
        self.i_s = i_s;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("A_PU0", self.a_pu0),
            ("A_RF0", self.a_rf0),
            ("P_PU0", self.p_pu0),
            ("P_RF0", self.p_rf0),
            ("P_S0", self.p_s0),
            ("A_C", self.a_c),
            ("gamma", self.gamma),
            ("k", self.k as f64),
            ("m", self.m as f64),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParam { name, value: v });
            }
        }
        if !(self.i_s.is_finite() && self.i_s >= 0.0) {
            return Err(ModelError::InvalidParam { name: "I_s", value: self.i_s });
        }
        Ok(())
    }
}

/// Associative processor parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApParams {
    /// AP bit-cell area in SRAM cells.
    #[serde(rename = "A_AP0")]
    pub a_ap0: f64,
    pub k: u32,
    pub m: u32,
    /// Speedup of one associative PU relative to one SIMD PU.
    #[serde(rename = "s_APU")]
    pub s_apu: f64,
    pub p_mw: f64,
    pub p_m: f64,
    pub p_mm: f64,
    #[serde(rename = "gamma_W_per_mm2")]
    pub gamma: f64,
}

impl Default for ApParams {
    fn default() -> Self {
        ApParams { a_ap0: 2.0, k: 8, m: 32, s_apu: 1.0 / 4400.0, p_mw: 0.1, p_m: 0.1, p_mm: 0.75, gamma: 5e-2 }
    }
}

impl ApParams {
    /// `A_AP0 k m`, the area of one associative PU in cells.
    pub fn pu_area_cells(&self) -> f64 {
        self.a_ap0 * self.k as f64 * self.m as f64
    }

    pub fn with_pu_speedup(mut self, s_apu: f64) -> Self {
        self.s_apu = s_apu;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("A_AP0", self.a_ap0), ("gamma", self.gamma), ("k", self.k as f64), ("m", self.m as f64)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParam { name, value: v });
            }
        }
        for (name, v) in [("p_mw", self.p_mw), ("p_m", self.p_m), ("p_mm", self.p_mm)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidParam { name, value: v });
            }
        }
        if !(self.s_apu > 0.0 && self.s_apu <= 1.0) {
            return Err(ModelError::InvalidParam { name: "s_APU", value: self.s_apu });
        }
        Ok(())
    }
}

/// Per-workload calibration: SIMD synchronization intensity and the
/// effective associative-PU speedup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadModel {
    pub name: String,
    #[serde(rename = "I_s")]
    pub i_s: f64,
    #[serde(rename = "s_APU")]
    pub s_apu: f64,
}

/// A complete parameter document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub units: UnitSystem,
    /// Data-set size in words; the SIMD caches hold at least `N * m` cells.
    #[serde(rename = "N")]
    pub dataset_words: u64,
    pub simd: SimdParams,
    pub ap: ApParams,
    pub workloads: Vec<WorkloadModel>,
}

/// Synchronization intensity that puts the reference SIMD processor at
/// speedup 350 with 768 PUs, the same-performance DMM point.
pub const DMM_SYNC_INTENSITY: f64 = 1.0 / 350.0 - 1.0 / 768.0;
/// Effective PU speedup that puts a 53 mm² AP (1,035,156 PUs) at speedup 350.
pub const DMM_PU_SPEEDUP: f64 = 350.0 / 1_035_156.0;

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            units: UnitSystem::default(),
            dataset_words: 1 << 20,
            simd: SimdParams::default(),
            ap: ApParams::default(),
            workloads: vec![
                WorkloadModel { name: "DMM".into(), i_s: DMM_SYNC_INTENSITY, s_apu: DMM_PU_SPEEDUP },
                WorkloadModel { name: "FFT".into(), i_s: 1.0 / 128.0, s_apu: 1.0 / 4400.0 },
                WorkloadModel { name: "BS".into(), i_s: 1.0 / 512.0, s_apu: 1.0 / 4400.0 },
            ],
        }
    }
}

impl ParamSet {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let p: ParamSet = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter set serializes")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.simd.validate()?;
        self.ap.validate()?;
        for (name, v) in
            [("A_SRAM_cell_um2", self.units.sram_cell_area_um2), ("P_SRAM_cell_uW", self.units.sram_write_power_uw)]
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParam { name, value: v });
            }
        }
        let floor = self.dataset_words as f64 * self.simd.m as f64;
        if self.simd.a_c < floor {
            return Err(ModelError::CacheTooSmall { a_c: self.simd.a_c, required: floor });
        }
        for w in &self.workloads {
            self.simd.with_sync_intensity(w.i_s).validate()?;
            self.ap.with_pu_speedup(w.s_apu).validate()?;
        }
        Ok(())
    }

    pub fn workload(&self, name: &str) -> Result<&WorkloadModel, ModelError> {
        self.workloads
            .iter()
            .find(|w| w.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| ModelError::UnknownWorkload(name.to_string()))
    }

    /// SIMD and AP parameters with one workload's calibration applied.
    pub fn for_workload(&self, name: &str) -> Result<(SimdParams, ApParams), ModelError> {
        let w = self.workload(name)?;
        Ok((self.simd.with_sync_intensity(w.i_s), self.ap.with_pu_speedup(w.s_apu)))
    }
}
