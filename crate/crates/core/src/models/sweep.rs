use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{ap_power_for, ap_pu_count, ap_speedup_for, simd_power_for, simd_pu_count, simd_speedup_for};
use super::{ApParams, ModelError, SimdParams, UnitSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arch {
    Ap,
    Simd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub area_mm2: f64,
    pub speedup: f64,
    pub power_w: f64,
    pub power_density_w_mm2: f64,
}

const SCAN_STEPS: usize = 4096;

fn simd_speedup_or_zero(area_mm2: f64, simd: &SimdParams, units: &UnitSystem) -> f64 {
    simd_pu_count(area_mm2, simd, units).map_or(0.0, |n| simd_speedup_for(n, simd))
}

fn advantage(area_mm2: f64, simd: &SimdParams, ap: &ApParams, units: &UnitSystem) -> f64 {
    ap_speedup_for(ap_pu_count(area_mm2, ap, units), ap) - simd_speedup_or_zero(area_mm2, simd, units)
}

fn check_range(lo: f64, hi: f64, steps: usize) -> Result<(), ModelError> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) || steps == 0 {
        return Err(ModelError::InvalidRange { lo, hi, steps });
    }
    Ok(())
}

/// Area in `[lo, hi]` mm² beyond which the AP outperforms the SIMD
/// processor, to 10⁻⁶ relative or better.
///
/// Below the cache area the SIMD processor has no PUs, so the AP trivially
/// leads there and loses the lead once the first SIMD PUs fit. The range is
/// scanned for the last point where the AP takes the lead for good, and
/// that bracket is bisected.
pub fn break_even_area(
    simd: &SimdParams,
    ap: &ApParams,
    units: &UnitSystem,
    lo: f64,
    hi: f64,
) -> Result<f64, ModelError> {
    check_range(lo, hi, 2)?;
    if lo == hi {
        return Err(ModelError::NoBreakEven { lo, hi });
    }
    let at = |i: usize| lo + (hi - lo) * i as f64 / SCAN_STEPS as f64;
    let mut bracket = None;
    let mut prev = advantage(lo, simd, ap, units);
    for i in 1..=SCAN_STEPS {
        let d = advantage(at(i), simd, ap, units);
        if prev <= 0.0 && d > 0.0 {
            bracket = Some((at(i - 1), at(i)));
        }
        prev = d;
    }
    let (mut a, mut b) = bracket.ok_or(ModelError::NoBreakEven { lo, hi })?;
    while b - a > 1e-10 * b {
        let mid = 0.5 * (a + b);
        if advantage(mid, simd, ap, units) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// `steps` evenly spaced points over `[lo, hi]` mm²; a single step samples
/// `lo` only. SIMD areas with no room for PUs report zero speedup and power.
pub fn sweep(
    arch: Arch,
    simd: &SimdParams,
    ap: &ApParams,
    units: &UnitSystem,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<Vec<SweepPoint>, ModelError> {
    check_range(lo, hi, steps)?;
    let points = (0..steps)
        .map(|i| {
            let area = if steps == 1 { lo } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 };
            let (speedup, power) = match arch {
                Arch::Ap => {
                    let n = ap_pu_count(area, ap, units);
                    (ap_speedup_for(n, ap), ap_power_for(n, ap, units).total_w())
                }
                Arch::Simd => match simd_pu_count(area, simd, units) {
                    Ok(n) => (simd_speedup_for(n, simd), simd_power_for(n, simd, units).total_w()),
                    Err(_) => (0.0, 0.0),
                },
            };
            SweepPoint { area_mm2: area, speedup, power_w: power, power_density_w_mm2: power / area }
        })
        .collect();
    Ok(points)
}

pub fn write_sweep_csv<W: Write>(mut out: W, points: &[SweepPoint]) -> io::Result<()> {
    writeln!(out, "area_mm2,speedup,power_w,power_density_w_mm2")?;
    for p in points {
        writeln!(out, "{},{},{},{}", p.area_mm2, p.speedup, p.power_w, p.power_density_w_mm2)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{ap_power, ap_speedup, simd_power, simd_speedup, ParamSet};
    use super::*;

    #[test]
    fn no_break_even_without_sync() {
        let s = SimdParams::default();
        let a = ApParams::default();
        let r = break_even_area(&s, &a, &UnitSystem::default(), 4.0, 2000.0);
        assert!(matches!(r, Err(ModelError::NoBreakEven { .. })));
    }

    #[test]
    fn closed_form_crossover() {
        let u = UnitSystem::default();
        let s = SimdParams { a_pu0: 1e-9, a_rf0: 1e-9, a_c: 1.0, i_s: 1e-3, ..SimdParams::default() };
        let a = ApParams::default().with_pu_speedup(1e-4);
        let expect = u.cells_to_mm2(512.0 / (1e-4 * 1e-3));
        let got = break_even_area(&s, &a, &u, 1.0, 2000.0).unwrap();
        assert!(((got - expect) / expect).abs() < 1e-6, "{got} vs {expect}");
    }

    #[test]
    fn fft_break_even_with_simd_hotter() {
        let p = ParamSet::default();
        let (s, a) = p.for_workload("FFT").unwrap();
        let area = break_even_area(&s, &a, &p.units, 4.0, 200.0).unwrap();
        assert!(area > 4.0 && area < 200.0);
        assert!(ap_speedup(area * 1.001, &a, &p.units) > simd_speedup(area * 1.001, &s, &p.units).unwrap());
        let ps = simd_power(area, &s, &p.units).unwrap().total_w();
        let pa = ap_power(area, &a, &p.units).total_w();
        assert!(ps > pa);
    }

    #[test]
    fn single_point_equals_direct_call() {
        let p = ParamSet::default();
        let (s, a) = p.for_workload("DMM").unwrap();
        let pt = sweep(Arch::Ap, &s, &a, &p.units, 53.0, 53.0, 1).unwrap();
        assert_eq!(pt.len(), 1);
        assert_eq!(pt[0].speedup, ap_speedup(53.0, &a, &p.units));
        assert_eq!(pt[0].power_w, ap_power(53.0, &a, &p.units).total_w());
        let pt = sweep(Arch::Simd, &s, &a, &p.units, 5.3, 9.0, 1).unwrap();
        assert_eq!(pt[0].power_w, simd_power(5.3, &s, &p.units).unwrap().total_w());
    }

    #[test]
    fn ap_speedup_monotone() {
        let p = ParamSet::default();
        let pts = sweep(Arch::Ap, &p.simd, &p.ap, &p.units, 1.0, 100.0, 100).unwrap();
        assert!(pts.windows(2).all(|w| w[1].speedup >= w[0].speedup));
    }

    #[test]
    fn bad_ranges() {
        let p = ParamSet::default();
        for (lo, hi, n) in [(0.0, 1.0, 3), (2.0, 1.0, 3), (1.0, 2.0, 0), (f64::NAN, 1.0, 2)] {
            assert!(matches!(
                sweep(Arch::Ap, &p.simd, &p.ap, &p.units, lo, hi, n),
                Err(ModelError::InvalidRange { .. })
            ));
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let p = ParamSet::default();
        let pts = sweep(Arch::Simd, &p.simd, &p.ap, &p.units, 1.0, 10.0, 4).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "area_mm2,speedup,power_w,power_density_w_mm2");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("1,0,0,"));
    }
}
