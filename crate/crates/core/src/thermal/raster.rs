use serde::{Deserialize, Serialize};

use super::{Floorplan, ThermalError};

pub const MIN_RESOLUTION: usize = 16;

/// Watts per cell on a `resolution × resolution` grid over the die, row
/// major with row 0 at the top edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMap {
    pub die_width_um: f64,
    pub die_height_um: f64,
    pub resolution: usize,
    pub watts: Vec<f64>,
}

impl PowerMap {
    pub fn zeros(die_width_um: f64, die_height_um: f64, resolution: usize) -> Self {
        PowerMap { die_width_um, die_height_um, resolution, watts: vec![0.0; resolution * resolution] }
    }

    pub fn uniform(die_width_um: f64, die_height_um: f64, resolution: usize, total_w: f64) -> Self {
        let per = total_w / (resolution * resolution) as f64;
        PowerMap { die_width_um, die_height_um, resolution, watts: vec![per; resolution * resolution] }
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.watts[row * self.resolution + col]
    }

    pub fn total_w(&self) -> f64 {
        self.watts.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PowerMap { watts: self.watts.iter().map(|w| w * factor).collect(), ..self.clone() }
    }
}

/// Spreads each block's power uniformly over its area and bins it into
/// grid cells by overlap area.
pub fn rasterize_power(floorplan: &Floorplan, resolution: usize) -> Result<PowerMap, ThermalError> {
    if resolution < MIN_RESOLUTION {
        return Err(ThermalError::Resolution { resolution, min: MIN_RESOLUTION });
    }
    let (dw, dh) = (floorplan.die_width_um, floorplan.die_height_um);
    let mut map = PowerMap::zeros(dw, dh, resolution);
    let cw = dw / resolution as f64;
    let ch = dh / resolution as f64;
    let cell_range = |lo: f64, hi: f64, size: f64| {
        let a = ((lo / size).floor().max(0.0) as usize).min(resolution - 1);
        let b = ((hi / size).ceil().max(1.0) as usize).min(resolution);
        a..b
    };
    for blk in &floorplan.blocks {
        if blk.power == 0.0 {
            continue;
        }
        let density = blk.power / blk.area_um2();
        // clip to the die so edge round-off cannot leak power
        let (x0, x1) = (blk.x.max(0.0), (blk.x + blk.w).min(dw));
        let (y0, y1) = (blk.y.max(0.0), (blk.y + blk.h).min(dh));
        let mut deposited = 0.0;
        let mut touched = Vec::new();
        for r in cell_range(y0, y1, ch) {
            let oy = (y1.min((r + 1) as f64 * ch) - y0.max(r as f64 * ch)).max(0.0);
            if oy == 0.0 {
                continue;
            }
            for c in cell_range(x0, x1, cw) {
                let ox = (x1.min((c + 1) as f64 * cw) - x0.max(c as f64 * cw)).max(0.0);
                let p = density * ox * oy;
                if p > 0.0 {
                    touched.push((r * resolution + c, p));
                    deposited += p;
                }
            }
        }
        // renormalize so each block deposits exactly its power
        if deposited > 0.0 {
            let fix = blk.power / deposited;
            for (i, p) in touched {
                map.watts[i] += p * fix;
            }
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::Block;
    use proptest::prelude::*;

    #[test]
    fn whole_die_block_is_uniform() {
        let fp = Floorplan::new(1000.0, 1000.0, vec![Block::new("all", 0.0, 0.0, 1000.0, 1000.0, 2.56)]).unwrap();
        let map = rasterize_power(&fp, 16).unwrap();
        assert!(map.watts.iter().all(|&w| (w - 0.01).abs() < 1e-15));
    }

    #[test]
    fn half_covered_cell_gets_half_density() {
        // 16 cells of 10 µm; block covers cell 0 fully and half of cell 1
        let fp = Floorplan::new(160.0, 160.0, vec![Block::new("b", 0.0, 0.0, 15.0, 10.0, 1.5)]).unwrap();
        let map = rasterize_power(&fp, 16).unwrap();
        assert!((map.at(0, 0) - 1.0).abs() < 1e-12);
        assert!((map.at(0, 1) - 0.5).abs() < 1e-12);
        assert_eq!(map.at(1, 0), 0.0);
    }

    #[test]
    fn resolution_floor() {
        let fp = Floorplan::new(10.0, 10.0, vec![]).unwrap();
        assert!(matches!(rasterize_power(&fp, 15), Err(ThermalError::Resolution { .. })));
    }

    fn random_floorplan(cuts: &[(f64, f64)], powers: &[f64]) -> Floorplan {
        // vertical slabs split at random x, each split once in y
        let die = 1000.0;
        let mut xs: Vec<f64> = cuts.iter().map(|c| c.0 * die).collect();
        xs.push(0.0);
        xs.push(die);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut blocks = Vec::new();
        for (i, w) in xs.windows(2).enumerate() {
            if w[1] - w[0] < 1e-6 {
                continue;
            }
            let ycut = cuts.get(i).map_or(0.5, |c| c.1) * die;
            let p = powers[i % powers.len()];
            blocks.push(Block::new(format!("s{i}a"), w[0], 0.0, w[1] - w[0], ycut, p));
            blocks.push(Block::new(format!("s{i}b"), w[0], ycut, w[1] - w[0], die - ycut, p * 0.5));
        }
        Floorplan::new(die, die, blocks).unwrap()
    }

    proptest! {
        #[test]
        fn conserves_power(
            cuts in proptest::collection::vec((0.01f64..0.99, 0.01f64..0.99), 1..12),
            powers in proptest::collection::vec(0.0f64..5.0, 1..6),
            res in 16usize..80,
        ) {
            let fp = random_floorplan(&cuts, &powers);
            let map = rasterize_power(&fp, res).unwrap();
            let total = fp.total_power_w();
            prop_assert!((map.total_w() - total).abs() <= 1e-6 * total.max(1e-12));
            prop_assert!(map.watts.iter().all(|&w| w >= 0.0));
        }
    }
}
