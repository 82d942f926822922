use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use ap3d_core::thermal::{reference_floorplan, simulate, Chip, Floorplan, GridStats, ThermalError};
use clap::Args;
use serde::Serialize;

use crate::config::Inputs;

#[derive(Debug, Args)]
pub struct ThermalArgs {
    /// `ap`, `simd`, or the path of a floorplan JSON file.
    pub floorplan: String,
    /// Grid cells per die side.
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Factor applied to every block power.
    #[arg(long, default_value_t = 1.0)]
    pub power_scale: f64,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(value_parser = parse_chip)]
    pub chip: Chip,
}

fn parse_chip(s: &str) -> Result<Chip, String> {
    match s {
        "ap" => Ok(Chip::Ap),
        "simd" => Ok(Chip::Simd),
        _ => Err(format!("unknown chip `{s}`, expected ap or simd")),
    }
}

#[derive(Debug, Serialize)]
struct LayerReport {
    index: usize,
    name: String,
    mean_c: f64,
    stats: GridStats,
}

#[derive(Debug, Serialize)]
struct ThermalReport {
    floorplan: String,
    resolution: usize,
    power_scale: f64,
    total_power_w: f64,
    injected_w: f64,
    boundary_flux_w: f64,
    iterations: usize,
    residual: f64,
    stats: GridStats,
    layers: Vec<LayerReport>,
}

fn create(inputs: &Inputs, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = inputs.out_file(name)?;
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(file)))
}

fn load_floorplan(inputs: &Inputs, source: &str) -> Result<(String, Floorplan)> {
    if let Ok(chip) = parse_chip(source) {
        return Ok((source.to_string(), reference_floorplan(chip, &inputs.param_set()?)?));
    }
    let path = PathBuf::from(source);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading floorplan {source}"))?;
    let label = path.file_stem().map_or("floorplan".into(), |s| s.to_string_lossy().into_owned());
    Ok((label, Floorplan::from_json(&text)?))
}

pub fn run(inputs: &Inputs, args: &ThermalArgs) -> Result<bool> {
    if !(args.power_scale.is_finite() && args.power_scale >= 0.0) {
        bail!("power scale {} must be finite and non-negative", args.power_scale);
    }
    let (label, fp) = load_floorplan(inputs, &args.floorplan)?;
    let stack = inputs.layer_stack()?;
    let sol = match simulate(&fp, &stack, args.resolution, args.power_scale) {
        Err(ThermalError::NotConverged { iterations, residual }) => {
            bail!("solver stopped after {iterations} iterations at relative residual {residual:e}")
        }
        r => r?,
    };
    let grid = &sol.grid;

    let mut layers = Vec::with_capacity(grid.n_layers());
    for (i, name) in grid.layer_names.iter().enumerate() {
        let (_, mut csv) = create(inputs, &format!("{label}_layer{i}_{name}.csv"))?;
        grid.write_layer_csv(i, &mut csv)?;
        csv.flush()?;
        let (_, mut pgm) = create(inputs, &format!("{label}_layer{i}_{name}.pgm"))?;
        grid.write_layer_pgm(i, &mut pgm)?;
        pgm.flush()?;
        let stats = grid.layer_stats(i)?;
        println!("layer {i} {name}: peak {:.2} °C, span {:.2} °C", stats.peak_c, stats.span_c);
        layers.push(LayerReport { index: i, name: name.clone(), mean_c: grid.layer_mean(i)?, stats });
    }
    let (tcut_path, mut tcut) = create(inputs, &format!("{label}_tcut.csv"))?;
    grid.write_t_cut_csv(grid.resolution / 2, &mut tcut)?;
    tcut.flush()?;

    let report = ThermalReport {
        floorplan: label.clone(),
        resolution: grid.resolution,
        power_scale: args.power_scale,
        total_power_w: fp.total_power_w(),
        injected_w: sol.injected_w,
        boundary_flux_w: sol.boundary_flux_w,
        iterations: sol.iterations,
        residual: sol.residual,
        stats: grid.stats(),
        layers,
    };
    let stats_path = inputs.write_json(&format!("{label}_stats.json"), &report)?;
    let s = &report.stats;
    println!(
        "peak {:.2} °C at layer {} ({}, {}), {} iterations{}",
        s.peak_c,
        s.argmax.layer,
        s.argmax.row,
        s.argmax.col,
        sol.iterations,
        if s.exceeds_dram_limit { ", above the DRAM limit" } else { "" }
    );
    println!("wrote {} and {}", stats_path.display(), tcut_path.display());

    // heat in must leave through the sink
    let balance = (sol.boundary_flux_w - sol.injected_w).abs();
    Ok(balance == 0.0 || balance <= 1e-3 * sol.injected_w)
}

pub fn dump(inputs: &Inputs, args: &DumpArgs) -> Result<bool> {
    let fp = reference_floorplan(args.chip, &inputs.param_set()?)?;
    let name = match args.chip {
        Chip::Ap => "ap",
        Chip::Simd => "simd",
    };
    let path = inputs.write(&format!("floorplan_{name}.json"), fp.to_json() + "\n")?;
    println!("{} blocks, {:.3} W, wrote {}", fp.blocks.len(), fp.total_power_w(), path.display());
    Ok(true)
}
