use serde::{Deserialize, Serialize};

use super::ThermalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub thickness_um: f64,
    /// W/(m·K).
    pub conductivity: f64,
    /// Side of a square footprint centered on the die, in mm. Layers
    /// without one cover the die exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_mm: Option<f64>,
    /// Whether a power map is injected into this layer.
    #[serde(default)]
    pub powered: bool,
}

impl Layer {
    pub fn new(name: impl Into<String>, thickness_um: f64, conductivity: f64) -> Self {
        Layer { name: name.into(), thickness_um, conductivity, side_mm: None, powered: false }
    }

    pub fn powered(mut self) -> Self {
        self.powered = true;
        self
    }

    pub fn with_side_mm(mut self, side: f64) -> Self {
        self.side_mm = Some(side);
        self
    }
}

/// The one side of the stack that is coupled to ambient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub side: BoundarySide,
    /// Total convective resistance to ambient, K/W.
    pub r_conv_k_per_w: f64,
    pub ambient_c: f64,
}

/// Layers listed top to bottom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub boundary: Boundary,
}

pub const SILICON_K: f64 = 120.0;
pub const TIM_K: f64 = 4.0;
pub const SPREADER_K: f64 = 400.0;

impl Default for LayerStack {
    /// Four powered 100 µm silicon layers over a 20 µm TIM and a 30 mm
    /// copper spreader, cooled from below through 0.8 K/W to 45 °C.
    fn default() -> Self {
        let mut layers: Vec<Layer> =
            (1..=4).map(|i| Layer::new(format!("si{i}"), 100.0, SILICON_K).powered()).collect();
        layers.push(Layer::new("tim", 20.0, TIM_K));
        layers.push(Layer::new("spreader", 1000.0, SPREADER_K).with_side_mm(30.0));
        LayerStack { layers, boundary: Boundary { side: BoundarySide::Bottom, r_conv_k_per_w: 0.8, ambient_c: 45.0 } }
    }
}

impl LayerStack {
    pub fn from_json(text: &str) -> Result<Self, ThermalError> {
        let s: LayerStack = serde_json::from_str(text).map_err(|e| ThermalError::Json(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stack serializes")
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        if self.layers.is_empty() {
            return Err(ThermalError::NoLayers);
        }
        for l in &self.layers {
            let side_ok = l.side_mm.is_none_or(|s| s.is_finite() && s > 0.0);
            if !(l.thickness_um.is_finite()
                && l.thickness_um > 0.0
                && l.conductivity.is_finite()
                && l.conductivity > 0.0)
                || !side_ok
            {
                return Err(ThermalError::InvalidLayer(l.name.clone()));
            }
        }
        if !self.layers.iter().any(|l| l.powered) {
            return Err(ThermalError::NoPoweredLayer);
        }
        let b = &self.boundary;
        if !(b.r_conv_k_per_w.is_finite() && b.r_conv_k_per_w > 0.0 && b.ambient_c.is_finite()) {
            return Err(ThermalError::InvalidBoundary);
        }
        Ok(())
    }

    pub fn powered_layers(&self) -> impl Iterator<Item = usize> + '_ {
        self.layers.iter().enumerate().filter(|(_, l)| l.powered).map(|(i, _)| i)
    }

    /// Index of the layer coupled to ambient.
    pub fn sink_layer(&self) -> usize {
        match self.boundary.side {
            BoundarySide::Top => 0,
            BoundarySide::Bottom => self.layers.len() - 1,
        }
    }

    /// The same stack with every layer restricted to the die footprint.
    pub fn die_only(&self) -> LayerStack {
        let mut s = self.clone();
        for l in &mut s.layers {
            l.side_mm = None;
        }
        s
    }

    /// One-dimensional resistance from the middle of `layer` to ambient
    /// for a die of `area_m2`, counting half of `layer` itself.
    pub fn series_resistance_k_per_w(&self, layer: usize, area_m2: f64) -> f64 {
        let r = |l: &Layer| l.thickness_um * 1e-6 / (l.conductivity * area_m2);
        let sink = self.sink_layer();
        let (lo, hi) = if layer <= sink { (layer, sink) } else { (sink, layer) };
        let full: f64 = (lo..=hi).map(|i| r(&self.layers[i])).sum();
        full - 0.5 * r(&self.layers[layer]) + self.boundary.r_conv_k_per_w
    }
}
