use anyhow::{bail, Result};
use ap3d_core::array::{ApArray, EventLedger};
use ap3d_core::bits::Bits;
use ap3d_core::kernels::{
    compare_gt_cycles, lut_apply, multiply_cycles, shift_rows, vector_add, vector_compare_gt, vector_multiply,
    vector_subtract, FieldSpec,
};
use ap3d_core::models::ApParams;
use clap::{Args, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::config::Inputs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelName {
    Add,
    Sub,
    Multiply,
    Compare,
    Lut,
    Shift,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(value_enum)]
    pub name: KernelName,
    /// Operand width in bits.
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value_t = 1024)]
    pub rows: usize,
    /// Row distance for `shift`.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub distance: isize,
}

#[derive(Debug, Serialize)]
struct KernelReport {
    kernel: KernelName,
    m: usize,
    rows: usize,
    seed: u64,
    cycles: u64,
    expected_cycles: u64,
    /// Ledger energy in SRAM-write units.
    energy_norm: f64,
    mismatched_rows: usize,
    pass: bool,
    ledger: EventLedger,
}

fn mask(m: usize) -> u128 {
    if m >= 128 {
        u128::MAX
    } else {
        (1u128 << m) - 1
    }
}

fn max_width(name: KernelName) -> usize {
    match name {
        KernelName::Multiply => 64,
        KernelName::Lut => 16,
        _ => 127,
    }
}

/// Writes every row's values and clears the ledger.
fn load(array: &mut ApArray, rows: &[Vec<(FieldSpec, u128)>]) -> Result<()> {
    let w = array.width();
    for (r, fields) in rows.iter().enumerate() {
        let mut data = Bits::zeros(w);
        let mut m = Bits::zeros(w);
        for (f, v) in fields {
            for i in 0..f.width {
                data.set(f.col(i), (v >> i) & 1 == 1);
                m.set(f.col(i), true);
            }
        }
        array.write_row(r, &data, &m)?;
    }
    array.reset_ledger();
    Ok(())
}

fn energy(l: &EventLedger, ap: &ApParams) -> f64 {
    l.write_bits as f64
        + ap.p_mw * l.miswrite_bits as f64
        + ap.p_m * l.match_bits as f64
        + ap.p_mm * l.mismatch_bits as f64
}

pub fn run(inputs: &Inputs, args: &KernelArgs) -> Result<bool> {
    let (m, n) = (args.m, args.rows);
    if m == 0 || m > max_width(args.name) {
        bail!("width {m} outside 1..={} for {:?}", max_width(args.name), args.name);
    }
    if n == 0 {
        bail!("need at least one row");
    }
    let params = inputs.param_set()?;
    let mut rng = inputs.rng();
    let lim = mask(m);
    let a: Vec<u128> = (0..n).map(|_| rng.gen::<u128>() & lim).collect();
    let b: Vec<u128> = (0..n).map(|_| rng.gen::<u128>() & lim).collect();
    let fa = FieldSpec::new(0, m);
    let fb = FieldSpec::new(m, m);

    let (array, expected_cycles, mismatched) = match args.name {
        KernelName::Add | KernelName::Sub => {
            let carry = 2 * m;
            let mut arr = ApArray::new(n, 2 * m + 1)?;
            load(&mut arr, &a.iter().zip(&b).map(|(&x, &y)| vec![(fa, x), (fb, y)]).collect::<Vec<_>>())?;
            let add = args.name == KernelName::Add;
            if add {
                vector_add(&mut arr, fa, fb, carry)?;
            } else {
                vector_subtract(&mut arr, fa, fb, carry)?;
            }
            let bad = (0..n)
                .filter(|&r| {
                    let (x, y) = (a[r], b[r]);
                    let (want, flag) = if add {
                        let s = x + y;
                        (s & lim, s >> m == 1)
                    } else {
                        (y.wrapping_sub(x) & lim, x > y)
                    };
                    arr.peek_value(r, fb.offset, m) != want || arr.peek(r, carry) != flag
                })
                .count();
            (arr, 8 * m as u64, bad)
        }
        KernelName::Multiply => {
            let fp = FieldSpec::new(2 * m, 2 * m);
            let carry = 4 * m;
            let mut arr = ApArray::new(n, 4 * m + 1)?;
            load(&mut arr, &a.iter().zip(&b).map(|(&x, &y)| vec![(fa, x), (fb, y)]).collect::<Vec<_>>())?;
            vector_multiply(&mut arr, fa, fb, fp, carry)?;
            let bad = (0..n).filter(|&r| arr.peek_value(r, fp.offset, 2 * m) != a[r] * b[r]).count();
            (arr, multiply_cycles(m), bad)
        }
        KernelName::Compare => {
            let scratch = FieldSpec::new(2 * m, 2);
            let mut arr = ApArray::new(n, 2 * m + 2)?;
            load(&mut arr, &a.iter().zip(&b).map(|(&x, &y)| vec![(fa, x), (fb, y)]).collect::<Vec<_>>())?;
            let tag = vector_compare_gt(&mut arr, fa, fb, scratch)?;
            let bad = (0..n).filter(|&r| tag.get(r) != (a[r] > b[r])).count();
            (arr, compare_gt_cycles(m), bad)
        }
        KernelName::Lut => {
            let table: Vec<u128> = (0..1usize << m).map(|_| rng.gen::<u128>() & lim).collect();
            let mut arr = ApArray::new(n, 2 * m)?;
            load(&mut arr, &a.iter().map(|&x| vec![(fa, x)]).collect::<Vec<_>>())?;
            lut_apply(&mut arr, fa, fb, &table)?;
            let bad = (0..n).filter(|&r| arr.peek_value(r, fb.offset, m) != table[a[r] as usize]).count();
            (arr, 1u64 << (m + 1), bad)
        }
        KernelName::Shift => {
            let d = args.distance;
            let mut arr = ApArray::new(n, m)?;
            load(&mut arr, &a.iter().map(|&x| vec![(fa, x)]).collect::<Vec<_>>())?;
            shift_rows(&mut arr, fa, d)?;
            let bad = (0..n)
                .filter(|&r| {
                    let src = r as isize - d;
                    let want = if (0..n as isize).contains(&src) { a[src as usize] } else { 0 };
                    arr.peek_value(r, 0, m) != want
                })
                .count();
            let expected = if d == 0 { 0 } else { (2 * n as u64).saturating_sub(d.unsigned_abs() as u64) };
            (arr, expected, bad)
        }
    };

    let ledger = *array.ledger();
    let pass = mismatched == 0 && ledger.cycles == expected_cycles;
    let report = KernelReport {
        kernel: args.name,
        m,
        rows: n,
        seed: inputs.seed,
        cycles: ledger.cycles,
        expected_cycles,
        energy_norm: energy(&ledger, &params.ap),
        mismatched_rows: mismatched,
        pass,
        ledger,
    };
    let name = serde_json::to_value(args.name)?.as_str().unwrap_or("kernel").to_string();
    let path = inputs.write_json(&format!("kernel_{name}.json"), &report)?;
    println!(
        "{name} m={m} rows={n}: cycles={} (expected {expected_cycles}) energy={:.3} mismatched_rows={mismatched} -> {}",
        ledger.cycles,
        report.energy_norm,
        if pass { "PASS" } else { "FAIL" }
    );
    println!("wrote {}", path.display());
    Ok(pass)
}
