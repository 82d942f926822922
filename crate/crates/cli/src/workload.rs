use std::fmt::Write as _;

use anyhow::{bail, Result};
use ap3d_core::array::EventLedger;
use ap3d_core::workloads::{
    bs_error_bound, bs_oracle, dmm_oracle, fft_error_bound, fft_max_error, fft_oracle, random_fft_input,
    random_options, run_black_scholes, run_dmm, run_fft, trace_to_power, Market, TracePower,
};
use clap::{Args, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::config::Inputs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WorkloadName {
    Dmm,
    Fft,
    Bs,
}

impl WorkloadName {
    fn tag(self) -> &'static str {
        match self {
            WorkloadName::Dmm => "dmm",
            WorkloadName::Fft => "fft",
            WorkloadName::Bs => "bs",
        }
    }

    /// Name of the model calibration used for the power estimate.
    fn model(self) -> &'static str {
        match self {
            WorkloadName::Dmm => "DMM",
            WorkloadName::Fft => "FFT",
            WorkloadName::Bs => "BS",
        }
    }
}

#[derive(Debug, Args)]
pub struct WorkloadArgs {
    #[arg(value_enum)]
    pub name: WorkloadName,
    /// Problem size: matrix side for dmm, points for fft, options for bs.
    #[arg(long)]
    pub n: Option<usize>,
    /// Word width in bits.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.2)]
    pub volatility: f64,
    #[arg(long, default_value_t = 1.0)]
    pub maturity: f64,
}

#[derive(Debug, Serialize)]
struct WorkloadReport {
    workload: &'static str,
    n: usize,
    m: usize,
    seed: u64,
    rows: usize,
    /// Largest absolute deviation from the oracle.
    max_error: f64,
    /// Largest allowed deviation.
    error_bound: f64,
    pass: bool,
    shift_fraction: f64,
    /// Power of the trace scaled to the full parameter-set array.
    power_pus: u64,
    power: TracePower,
}

struct Outcome {
    n: usize,
    m: usize,
    rows: usize,
    max_error: f64,
    error_bound: f64,
    ledger: EventLedger,
    input_csv: String,
    output_csv: String,
}

fn dmm(rng: &mut impl Rng, n: usize, m: usize) -> Result<Outcome> {
    let hi = 1u128 << m;
    let a: Vec<u128> = (0..n * n).map(|_| rng.gen_range(0..hi)).collect();
    let b: Vec<u128> = (0..n * n).map(|_| rng.gen_range(0..hi)).collect();
    let run = run_dmm(&a, &b, n, m)?;
    let want = dmm_oracle(&a, &b, n);
    let mut input_csv = String::from("matrix,row,col,value\n");
    for (name, mat) in [("a", &a), ("b", &b)] {
        for (k, v) in mat.iter().enumerate() {
            writeln!(input_csv, "{name},{},{},{v}", k / n, k % n)?;
        }
    }
    let mut output_csv = String::from("row,col,value,oracle\n");
    let mut max_error = 0.0f64;
    for (k, (got, w)) in run.product.iter().zip(&want).enumerate() {
        writeln!(output_csv, "{},{},{got},{w}", k / n, k % n)?;
        max_error = max_error.max(got.abs_diff(*w) as f64);
    }
    Ok(Outcome { n, m, rows: n * n, max_error, error_bound: 0.0, ledger: run.ledger, input_csv, output_csv })
}

fn fft(rng: &mut impl Rng, n: usize, m: usize) -> Result<Outcome> {
    if m < 2 {
        bail!("word width {m} too small");
    }
    let x = random_fft_input(rng, n, m);
    let run = run_fft(&x, m)?;
    let want = fft_oracle(&x, m);
    let scale = 2f64.powi(-(m as i32 - 1));
    let mut input_csv = String::from("index,re_code,im_code\n");
    for (k, (re, im)) in x.iter().enumerate() {
        writeln!(input_csv, "{k},{re},{im}")?;
    }
    let mut output_csv = String::from("bin,re_code,im_code,re,im,oracle_re,oracle_im\n");
    for (k, (&(re, im), &(wr, wi))) in run.output.iter().zip(&want).enumerate() {
        let (fr, fi) = (re as f64 * scale, im as f64 * scale);
        writeln!(output_csv, "{k},{re},{im},{fr:.12e},{fi:.12e},{wr:.12e},{wi:.12e}")?;
    }
    let max_error = fft_max_error(&run.output, &want, m);
    Ok(Outcome {
        n,
        m,
        rows: n,
        max_error,
        error_bound: fft_error_bound(n, m),
        ledger: run.ledger,
        input_csv,
        output_csv,
    })
}

fn bs(rng: &mut impl Rng, n: usize, m: usize, market: &Market) -> Result<Outcome> {
    if !(2..=10).contains(&m) {
        bail!("word width {m} outside 2..=10");
    }
    let opts = random_options(rng, n, m);
    let run = run_black_scholes(&opts, market, m)?;
    let mut input_csv = String::from("index,spot,strike\n");
    let mut output_csv = String::from("index,price,oracle,error,bound\n");
    // the check is per option, so report the worst error-to-bound ratio
    let (mut max_error, mut error_bound, mut worst) = (0.0f64, 0.0f64, -1.0f64);
    for (k, (o, &price)) in opts.iter().zip(&run.prices).enumerate() {
        let want = bs_oracle(*o, market);
        let bound = bs_error_bound(*o, market, m);
        let err = (price - want).abs();
        writeln!(input_csv, "{k},{},{}", o.spot, o.strike)?;
        writeln!(output_csv, "{k},{price:.12e},{want:.12e},{err:.6e},{bound:.6e}")?;
        let ratio = if bound > 0.0 {
            err / bound
        } else if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > worst {
            (worst, max_error, error_bound) = (ratio, err, bound);
        }
    }
    Ok(Outcome { n, m, rows: n, max_error, error_bound, ledger: run.ledger, input_csv, output_csv })
}

pub fn run(inputs: &Inputs, args: &WorkloadArgs) -> Result<bool> {
    let params = inputs.param_set()?;
    let mut rng = inputs.rng();
    let out = match args.name {
        WorkloadName::Dmm => dmm(&mut rng, args.n.unwrap_or(8), args.m.unwrap_or(8))?,
        WorkloadName::Fft => fft(&mut rng, args.n.unwrap_or(64), args.m.unwrap_or(16))?,
        WorkloadName::Bs => {
            let market = Market { rate: args.rate, volatility: args.volatility, maturity: args.maturity };
            bs(&mut rng, args.n.unwrap_or(256), args.m.unwrap_or(8), &market)?
        }
    };
    let (_, ap) = params.for_workload(args.name.model())?;
    let power = trace_to_power(&out.ledger, out.rows, params.dataset_words, &ap, &params.units);
    let pass = out.max_error <= out.error_bound;
    let tag = args.name.tag();
    let report = WorkloadReport {
        workload: tag,
        n: out.n,
        m: out.m,
        seed: inputs.seed,
        rows: out.rows,
        max_error: out.max_error,
        error_bound: out.error_bound,
        pass,
        shift_fraction: out.ledger.shift_fraction(),
        power_pus: params.dataset_words,
        power,
    };
    inputs.write(&format!("{tag}_input.csv"), &out.input_csv)?;
    inputs.write(&format!("{tag}_output.csv"), &out.output_csv)?;
    inputs.write_json(&format!("{tag}_ledger.json"), &out.ledger)?;
    let path = inputs.write_json(&format!("{tag}_report.json"), &report)?;
    println!(
        "{tag} n={} m={}: cycles={} shift_ops={} max_error={:.3e} bound={:.3e} power={:.3} W -> {}",
        out.n,
        out.m,
        out.ledger.cycles,
        out.ledger.shift_ops,
        out.max_error,
        out.error_bound,
        power.total_w,
        if pass { "PASS" } else { "FAIL" }
    );
    println!("wrote {}", path.display());
    Ok(pass)
}
