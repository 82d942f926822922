use serde::{Deserialize, Serialize};

use super::ThermalError;
use crate::models::{ap_power_for, simd_power_components, ParamSet};

/// A rectangle of the die with uniform power. Coordinates are in µm with
/// the origin at the die's top-left corner and `y` growing downward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    /// Watts.
    pub power: f64,
}

impl Block {
    pub fn new(name: impl Into<String>, x: f64, y: f64, w: f64, h: f64, power: f64) -> Self {
        Block { name: name.into(), x, y, w, h, power }
    }

    pub fn area_um2(&self) -> f64 {
        self.w * self.h
    }

    fn overlap_um2(&self, o: &Block) -> f64 {
        let ox = (self.x + self.w).min(o.x + o.w) - self.x.max(o.x);
        let oy = (self.y + self.h).min(o.y + o.h) - self.y.max(o.y);
        if ox > 0.0 && oy > 0.0 {
            ox * oy
        } else {
            0.0
        }
    }

    /// The same block reflected about the die's vertical center line.
    pub fn mirrored_x(&self, die_width: f64) -> Block {
        Block { x: die_width - self.x - self.w, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Floorplan {
    pub die_width_um: f64,
    pub die_height_um: f64,
    /// Total die power the blocks must add up to, in watts.
    pub declared_power_w: f64,
    pub blocks: Vec<Block>,
}

// Geometric slack for block edges computed in floating point, in µm.
const EDGE_EPS_UM: f64 = 1e-6;

impl Floorplan {
    /// Builds a floorplan declaring the sum of its block powers.
    pub fn new(die_width_um: f64, die_height_um: f64, blocks: Vec<Block>) -> Result<Self, ThermalError> {
        let declared_power_w = blocks.iter().map(|b| b.power).sum();
        let fp = Floorplan { die_width_um, die_height_um, declared_power_w, blocks };
        fp.validate()?;
        Ok(fp)
    }

    pub fn from_json(text: &str) -> Result<Self, ThermalError> {
        let fp: Floorplan = serde_json::from_str(text).map_err(|e| ThermalError::Json(e.to_string()))?;
        fp.validate()?;
        Ok(fp)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("floorplan serializes")
    }

    pub fn total_power_w(&self) -> f64 {
        self.blocks.iter().map(|b| b.power).sum()
    }

    pub fn die_area_um2(&self) -> f64 {
        self.die_width_um * self.die_height_um
    }

    /// Checks containment, pairwise overlap and the power budget.
    pub fn validate(&self) -> Result<(), ThermalError> {
        if !(self.die_width_um > 0.0 && self.die_height_um > 0.0) {
            return Err(ThermalError::InvalidDie { width: self.die_width_um, height: self.die_height_um });
        }
        for b in &self.blocks {
            let finite = [b.x, b.y, b.w, b.h, b.power].iter().all(|v| v.is_finite());
            if !finite || b.w <= 0.0 || b.h <= 0.0 || b.power < 0.0 {
                return Err(ThermalError::InvalidBlock(b.name.clone()));
            }
            if b.x < -EDGE_EPS_UM
                || b.y < -EDGE_EPS_UM
                || b.x + b.w > self.die_width_um + EDGE_EPS_UM
                || b.y + b.h > self.die_height_um + EDGE_EPS_UM
            {
                return Err(ThermalError::BlockOutsideDie(b.name.clone()));
            }
        }
        // sweep over x so only blocks sharing an x interval are compared
        let mut order: Vec<usize> = (0..self.blocks.len()).collect();
        order.sort_by(|&i, &j| self.blocks[i].x.total_cmp(&self.blocks[j].x));
        for (k, &i) in order.iter().enumerate() {
            let a = &self.blocks[i];
            for &j in &order[k + 1..] {
                let b = &self.blocks[j];
                if b.x >= a.x + a.w - EDGE_EPS_UM {
                    break;
                }
                if a.overlap_um2(b) > EDGE_EPS_UM * (a.w + a.h + b.w + b.h) {
                    return Err(ThermalError::Overlap(a.name.clone(), b.name.clone()));
                }
            }
        }
        let actual = self.total_power_w();
        if (actual - self.declared_power_w).abs() > 1e-9 * self.declared_power_w.abs().max(actual.abs()) {
            return Err(ThermalError::PowerMismatch { declared: self.declared_power_w, actual });
        }
        Ok(())
    }

    pub fn mirrored_x(&self) -> Floorplan {
        Floorplan { blocks: self.blocks.iter().map(|b| b.mirrored_x(self.die_width_um)).collect(), ..self.clone() }
    }

    /// Blocks whose name ends with `/suffix` (or equals it).
    pub fn blocks_named<'a>(&'a self, suffix: &'a str) -> impl Iterator<Item = &'a Block> + 'a {
        self.blocks.iter().filter(move |b| b.name == suffix || b.name.ends_with(&format!("/{suffix}")))
    }
}

pub const AP_DIE_UM: f64 = 7300.0;
pub const AP_BANKS_PER_SIDE: usize = 8;
pub const AP_BLOCKS_PER_BANK_SIDE: usize = 8;
/// Rows (PUs) per block; one row is `k m` bits wide.
pub const AP_BLOCK_ROWS: usize = 256;
/// Flip-flops of the TAG register per block, one per row.
pub const AP_TAG_FLIP_FLOPS: usize = 256;
/// Flip-flops of the KEY and MASK registers per block.
pub const AP_KEY_MASK_FLIP_FLOPS: usize = 512;
/// Fraction of register flip-flops switching per cycle.
pub const REGISTER_ACTIVITY: f64 = 0.02;

/// Whole-chip power of each associative region type, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ApRegionPowers {
    pub array_w: f64,
    pub tag_w: f64,
    pub key_mask_w: f64,
}

impl ApRegionPowers {
    /// Array regions carry the model power of all PUs. Registers add the
    /// power of their switching flip-flops, each at the register-file
    /// flip-flop power `P_RF0`.
    pub fn from_model(params: &ParamSet) -> Self {
        let blocks = (ap_blocks_per_side() * ap_blocks_per_side()) as f64;
        let n_pus = blocks as u64 * AP_BLOCK_ROWS as u64;
        let ff_w = REGISTER_ACTIVITY * params.units.norm_to_watts(params.simd.p_rf0) * blocks;
        ApRegionPowers {
            array_w: ap_power_for(n_pus, &params.ap, &params.units).total_w(),
            tag_w: ff_w * AP_TAG_FLIP_FLOPS as f64,
            key_mask_w: ff_w * AP_KEY_MASK_FLIP_FLOPS as f64,
        }
    }

    pub fn total_w(&self) -> f64 {
        self.array_w + self.tag_w + self.key_mask_w
    }
}

fn ap_blocks_per_side() -> usize {
    AP_BANKS_PER_SIDE * AP_BLOCKS_PER_BANK_SIDE
}

fn check_powers(values: &[f64]) -> Result<(), ThermalError> {
    match values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        Some(&v) => Err(ThermalError::NegativePower(v)),
        None => Ok(()),
    }
}

/// 7.3 mm square die of 8×8 banks, each of 8×8 blocks. A block holds a
/// 256-row array with the TAG register as a strip on its right and the KEY
/// and MASK registers as a strip across its top. Strip sizes follow from
/// the flip-flop area `A_RF0`.
pub fn build_ap_floorplan(params: &ParamSet, powers: &ApRegionPowers) -> Result<Floorplan, ThermalError> {
    check_powers(&[powers.array_w, powers.tag_w, powers.key_mask_w])?;
    let side = ap_blocks_per_side();
    let n_blocks = (side * side) as f64;
    let pitch = AP_DIE_UM / side as f64;
    let ff_um2 = params.simd.a_rf0 * params.units.sram_cell_area_um2;
    let key_h = AP_KEY_MASK_FLIP_FLOPS as f64 * ff_um2 / pitch;
    let tag_w = AP_TAG_FLIP_FLOPS as f64 * ff_um2 / (pitch - key_h);
    let mut blocks = Vec::with_capacity(side * side * 3);
    for r in 0..side {
        for c in 0..side {
            let (x, y) = (c as f64 * pitch, r as f64 * pitch);
            let name = format!(
                "bank{}_{}/block{}_{}",
                r / AP_BLOCKS_PER_BANK_SIDE,
                c / AP_BLOCKS_PER_BANK_SIDE,
                r % AP_BLOCKS_PER_BANK_SIDE,
                c % AP_BLOCKS_PER_BANK_SIDE
            );
            blocks.push(Block::new(format!("{name}/key_mask"), x, y, pitch, key_h, powers.key_mask_w / n_blocks));
            blocks.push(Block::new(
                format!("{name}/array"),
                x,
                y + key_h,
                pitch - tag_w,
                pitch - key_h,
                powers.array_w / n_blocks,
            ));
            blocks.push(Block::new(
                format!("{name}/tag"),
                x + pitch - tag_w,
                y + key_h,
                tag_w,
                pitch - key_h,
                powers.tag_w / n_blocks,
            ));
        }
    }
    Floorplan::new(AP_DIE_UM, AP_DIE_UM, blocks)
}

pub const SIMD_DIE_UM: f64 = 2300.0;
pub const SIMD_TILES: usize = 12;
pub const SIMD_PUS_PER_TILE: usize = 64;

/// Whole-chip power of each SIMD region type, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimdRegionPowers {
    pub pu_w: f64,
    pub rf_w: f64,
    pub l1_w: f64,
    pub l2_w: f64,
}

impl SimdRegionPowers {
    /// Model power of 768 PUs under the given workload calibration; the
    /// synchronization power is dissipated in the caches, split between L1
    /// and L2 by area.
    pub fn from_model(params: &ParamSet, workload: &str) -> Result<Self, ThermalError> {
        let (simd, _) = params.for_workload(workload).map_err(|e| ThermalError::Model(e.to_string()))?;
        let c = simd_power_components((SIMD_TILES * SIMD_PUS_PER_TILE) as u64, &simd, &params.units);
        let g = simd_geometry(params);
        let l1_area = SIMD_TILES as f64 * g.slot * g.l1_depth;
        let l2_area = (2.0 * g.slot) * (2.0 * g.slot);
        let l1_share = l1_area / (l1_area + l2_area);
        Ok(SimdRegionPowers {
            pu_w: c.pu_w,
            rf_w: c.rf_w,
            l1_w: c.sync_w * l1_share,
            l2_w: c.sync_w * (1.0 - l1_share),
        })
    }

    pub fn total_w(&self) -> f64 {
        self.pu_w + self.rf_w + self.l1_w + self.l2_w
    }
}

struct SimdGeometry {
    slot: f64,
    pu_depth: f64,
    rf_depth: f64,
    l1_depth: f64,
}

fn simd_geometry(params: &ParamSet) -> SimdGeometry {
    let slot = SIMD_DIE_UM / 4.0;
    let (k, m) = (params.simd.k as f64, params.simd.m as f64);
    let cell = params.units.sram_cell_area_um2;
    let pus = SIMD_PUS_PER_TILE as f64;
    let pu_depth = pus * params.simd.a_pu0 * m * m * cell / slot;
    let rf_depth = pus * params.simd.a_rf0 * k * m * cell / slot;
    SimdGeometry { slot, pu_depth, rf_depth, l1_depth: slot - pu_depth - rf_depth }
}

#[derive(Clone, Copy)]
enum Facing {
    North,
    South,
    West,
    East,
}

/// 2.3 mm square die on a 4×4 grid of slots: the central 2×2 is the shared
/// L2, the twelve ring slots are processor tiles. Each tile stacks its
/// 64-PU array (outermost), register files and L1 (innermost).
pub fn build_simd_floorplan(params: &ParamSet, powers: &SimdRegionPowers) -> Result<Floorplan, ThermalError> {
    check_powers(&[powers.pu_w, powers.rf_w, powers.l1_w, powers.l2_w])?;
    let g = simd_geometry(params);
    if g.l1_depth <= 0.0 {
        return Err(ThermalError::InvalidBlock("tile/l1".into()));
    }
    let tiles = SIMD_TILES as f64;
    let mut slots = Vec::new();
    for c in 0..4 {
        slots.push((0, c, Facing::North));
    }
    for r in 1..3 {
        slots.push((r, 0, Facing::West));
        slots.push((r, 3, Facing::East));
    }
    for c in 0..4 {
        slots.push((3, c, Facing::South));
    }
    let s = g.slot;
    let mut blocks = Vec::new();
    for (i, &(r, c, facing)) in slots.iter().enumerate() {
        let (x0, y0) = (c as f64 * s, r as f64 * s);
        let parts = [("pu", g.pu_depth, powers.pu_w), ("rf", g.rf_depth, powers.rf_w), ("l1", g.l1_depth, powers.l1_w)];
        let mut depth = 0.0;
        for (part, d, p) in parts {
            let (x, y, w, h) = match facing {
                Facing::North => (x0, y0 + depth, s, d),
                Facing::South => (x0, y0 + s - depth - d, s, d),
                Facing::West => (x0 + depth, y0, d, s),
                Facing::East => (x0 + s - depth - d, y0, d, s),
            };
            blocks.push(Block::new(format!("tile{i}/{part}"), x, y, w, h, p / tiles));
            depth += d;
        }
    }
    blocks.push(Block::new("l2", s, s, 2.0 * s, 2.0 * s, powers.l2_w));
    Floorplan::new(SIMD_DIE_UM, SIMD_DIE_UM, blocks)
}
