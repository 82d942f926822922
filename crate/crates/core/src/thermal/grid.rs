use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::ThermalError;

/// Lower end of the temperature range above which stacked DRAM is at risk.
pub const DRAM_LIMIT_C: f64 = 85.0;

/// Cell temperatures (°C) of every layer over the die, row major with row
/// 0 at the top edge. Layers are listed top to bottom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalGrid {
    pub resolution: usize,
    pub die_width_um: f64,
    pub die_height_um: f64,
    pub ambient_c: f64,
    pub layer_names: Vec<String>,
    pub temps: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellIndex {
    pub layer: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridStats {
    pub peak_c: f64,
    pub min_c: f64,
    pub span_c: f64,
    pub argmax: CellIndex,
    pub argmin: CellIndex,
    pub exceeds_dram_limit: bool,
}

impl ThermalGrid {
    pub fn n_layers(&self) -> usize {
        self.temps.len()
    }

    pub fn layer(&self, layer: usize) -> Result<&[f64], ThermalError> {
        self.temps.get(layer).map(Vec::as_slice).ok_or(ThermalError::LayerIndex { layer, n_layers: self.n_layers() })
    }

    pub fn at(&self, layer: usize, row: usize, col: usize) -> f64 {
        self.temps[layer][row * self.resolution + col]
    }

    pub fn layer_mean(&self, layer: usize) -> Result<f64, ThermalError> {
        let t = self.layer(layer)?;
        Ok(t.iter().sum::<f64>() / t.len() as f64)
    }

    fn stats_over(&self, layers: impl Iterator<Item = usize>) -> GridStats {
        let mut best = (f64::NEG_INFINITY, CellIndex { layer: 0, row: 0, col: 0 });
        let mut worst = (f64::INFINITY, best.1);
        for layer in layers {
            for (i, &t) in self.temps[layer].iter().enumerate() {
                let idx = CellIndex { layer, row: i / self.resolution, col: i % self.resolution };
                if t > best.0 {
                    best = (t, idx);
                }
                if t < worst.0 {
                    worst = (t, idx);
                }
            }
        }
        GridStats {
            peak_c: best.0,
            min_c: worst.0,
            span_c: best.0 - worst.0,
            argmax: best.1,
            argmin: worst.1,
            exceeds_dram_limit: best.0 > DRAM_LIMIT_C,
        }
    }

    /// Peak, minimum and span over all layers; ties go to the first cell
    /// in layer-then-row-major order.
    pub fn stats(&self) -> GridStats {
        self.stats_over(0..self.n_layers())
    }

    pub fn layer_stats(&self, layer: usize) -> Result<GridStats, ThermalError> {
        self.layer(layer)?;
        Ok(self.stats_over(layer..layer + 1))
    }

    /// Temperatures along one row of one layer.
    pub fn t_cut(&self, layer: usize, row: usize) -> Result<Vec<f64>, ThermalError> {
        let t = self.layer(layer)?;
        if row >= self.resolution {
            return Err(ThermalError::RowIndex { row, resolution: self.resolution });
        }
        Ok(t[row * self.resolution..(row + 1) * self.resolution].to_vec())
    }

    pub fn write_layer_csv<W: Write>(&self, layer: usize, mut out: W) -> Result<(), ThermalError> {
        let t = self.layer(layer)?;
        for row in t.chunks(self.resolution) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// 8-bit binary PGM mapping `[min, max]` of the layer linearly onto
    /// `0..=255`; the range is recorded in a header comment.
    pub fn write_layer_pgm<W: Write>(&self, layer: usize, mut out: W) -> Result<(), ThermalError> {
        let t = self.layer(layer)?;
        let s = self.stats_over(layer..layer + 1);
        let n = self.resolution;
        write!(out, "P5\n# min={:.6} max={:.6}\n{n} {n}\n255\n", s.min_c, s.peak_c)?;
        let bytes: Vec<u8> = t
            .iter()
            .map(|&v| if s.span_c > 0.0 { ((v - s.min_c) / s.span_c * 255.0).round() as u8 } else { 0 })
            .collect();
        out.write_all(&bytes)?;
        Ok(())
    }

    /// One line per column: its x position (µm, cell center) and the
    /// temperature of every layer along `row`.
    pub fn write_t_cut_csv<W: Write>(&self, row: usize, mut out: W) -> Result<(), ThermalError> {
        let cuts: Vec<Vec<f64>> = (0..self.n_layers()).map(|l| self.t_cut(l, row)).collect::<Result<_, _>>()?;
        writeln!(out, "x_um,{}", self.layer_names.join(","))?;
        let cw = self.die_width_um / self.resolution as f64;
        for c in 0..self.resolution {
            let vals: Vec<String> = cuts.iter().map(|cut| format!("{:.6}", cut[c])).collect();
            writeln!(out, "{:.3},{}", (c as f64 + 0.5) * cw, vals.join(","))?;
        }
        Ok(())
    }
}

impl From<io::Error> for ThermalError {
    fn from(e: io::Error) -> Self {
        ThermalError::Io(e.to_string())
    }
}
