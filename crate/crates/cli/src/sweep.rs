use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::{bail, Context, Result};
use ap3d_core::models::{
    ap_power_for, ap_pu_count, ap_speedup_for, break_even_area, simd_power, simd_speedup, sweep, write_sweep_csv,
    ApParams, Arch, ModelError, SimdParams, UnitSystem,
};
use clap::Args;

use crate::config::Inputs;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Workload calibration to apply (DMM, FFT, BS).
    #[arg(long, default_value = "DMM")]
    pub workload: String,
    #[arg(long, default_value_t = 1.0)]
    pub area_min: f64,
    #[arg(long, default_value_t = 200.0)]
    pub area_max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// SIMD chip area whose speedup the AP is sized to match, mm².
    #[arg(long, default_value_t = 5.3)]
    pub reference_simd_area: f64,
}

/// One annotated AP/SIMD pair.
struct Marked {
    kind: &'static str,
    ap_area: f64,
    simd_area: f64,
    ap_speedup: f64,
    simd_speedup: f64,
    ap_power: f64,
    simd_power: f64,
}

impl Marked {
    fn new(
        kind: &'static str,
        ap_area: f64,
        simd_area: f64,
        simd: &SimdParams,
        ap: &ApParams,
        u: &UnitSystem,
    ) -> Result<Self, ModelError> {
        let n = ap_pu_count(ap_area, ap, u);
        Ok(Marked {
            kind,
            ap_area,
            simd_area,
            ap_speedup: ap_speedup_for(n, ap),
            simd_speedup: simd_speedup(simd_area, simd, u)?,
            ap_power: ap_power_for(n, ap, u).total_w(),
            simd_power: simd_power(simd_area, simd, u)?.total_w(),
        })
    }

    fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let power_ratio = self.simd_power / self.ap_power;
        let density_ratio = power_ratio * self.ap_area / self.simd_area;
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.kind,
            self.ap_area,
            self.simd_area,
            self.ap_speedup,
            self.simd_speedup,
            self.ap_power,
            self.simd_power,
            power_ratio,
            density_ratio
        )
    }
}

/// Smallest AP whose speedup reaches that of the reference SIMD chip.
fn same_performance(ref_area: f64, simd: &SimdParams, ap: &ApParams, u: &UnitSystem) -> Result<Marked, ModelError> {
    let target = simd_speedup(ref_area, simd, u)?;
    let n = (target / ap.s_apu * (1.0 - 1e-12)).ceil();
    let area = u.cells_to_mm2(n * ap.pu_area_cells());
    Marked::new("same_performance", area, ref_area, simd, ap, u)
}

pub fn run(inputs: &Inputs, args: &SweepArgs) -> Result<bool> {
    let (lo, hi) = (args.area_min, args.area_max);
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) || args.steps == 0 {
        bail!("empty area range [{lo}, {hi}] with {} steps", args.steps);
    }
    let params = inputs.param_set()?;
    let (simd, ap) = params.for_workload(&args.workload)?;
    let u = params.units;
    let tag = args.workload.to_ascii_lowercase();

    for (arch, name) in [(Arch::Ap, "ap"), (Arch::Simd, "simd")] {
        let points = sweep(arch, &simd, &ap, &u, lo, hi, args.steps)?;
        let path = inputs.out_file(&format!("{name}_{tag}.csv"))?;
        let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        write_sweep_csv(&mut out, &points)?;
        out.flush()?;
        println!("wrote {}", path.display());
    }

    let mut marks = Vec::new();
    match break_even_area(&simd, &ap, &u, lo, hi) {
        Ok(a) => marks.push(Marked::new("break_even", a, a, &simd, &ap, &u)?),
        Err(ModelError::NoBreakEven { .. }) => println!("no break-even area in [{lo}, {hi}] mm²"),
        Err(e) => return Err(e.into()),
    }
    match same_performance(args.reference_simd_area, &simd, &ap, &u) {
        Ok(m) => marks.push(m),
        Err(ModelError::NoRoomForPus { .. }) => println!("reference SIMD area leaves no room for PUs"),
        Err(e) => return Err(e.into()),
    }

    let path = inputs.out_file(&format!("points_{tag}.csv"))?;
    let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(
        out,
        "kind,ap_area_mm2,simd_area_mm2,ap_speedup,simd_speedup,ap_power_w,simd_power_w,power_ratio,density_ratio"
    )?;
    for m in &marks {
        m.write(&mut out)?;
        println!(
            "{}: AP {:.2} mm² ({:.2} W, speedup {:.1}) vs SIMD {:.2} mm² ({:.2} W, speedup {:.1})",
            m.kind, m.ap_area, m.ap_power, m.ap_speedup, m.simd_area, m.simd_power, m.simd_speedup
        );
    }
    out.flush()?;
    println!("wrote {}", path.display());
    Ok(true)
}
