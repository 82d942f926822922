use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::program::{load_rows, to_signed, zero_extend, Layout};
use super::{check_capacity, WorkloadError};
use crate::array::{ApArray, EventLedger};
use crate::kernels::{clear, lut_apply, vector_multiply, vector_subtract, FieldSpec};

/// Market parameters shared by every option of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Market {
    /// Continuously compounded risk-free rate.
    pub rate: f64,
    pub volatility: f64,
    /// Years to expiry.
    pub maturity: f64,
}

impl Default for Market {
    fn default() -> Self {
        Market { rate: 0.05, volatility: 0.2, maturity: 1.0 }
    }
}

impl Market {
    fn validate(&self) -> Result<(), WorkloadError> {
        let ok = self.rate.is_finite()
            && self.rate >= 0.0
            && self.volatility.is_finite()
            && self.volatility >= 0.0
            && self.maturity.is_finite()
            && self.maturity > 0.0
            && (self.volatility > 0.0 || self.rate == 0.0);
        if ok {
            Ok(())
        } else {
            Err(WorkloadError::Input(format!("unsupported market {self:?}")))
        }
    }
}

/// European call, strike `K` on spot `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionPair {
    pub spot: u32,
    pub strike: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsRun {
    pub m: usize,
    pub prices: Vec<f64>,
    pub ledger: EventLedger,
}

/// Fraction bits of the log and probability tables for `m`-bit prices.
pub fn bs_fraction_bits(m: usize) -> usize {
    m + 4
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Closed-form call price.
pub fn bs_oracle(o: OptionPair, mk: &Market) -> f64 {
    let (s, k) = (o.spot as f64, o.strike as f64);
    let disc = (-mk.rate * mk.maturity).exp();
    if mk.volatility == 0.0 {
        return (s - k * disc).max(0.0);
    }
    let sd = mk.volatility * mk.maturity.sqrt();
    let d1 = ((s / k).ln() + (mk.rate + 0.5 * mk.volatility * mk.volatility) * mk.maturity) / sd;
    s * norm_cdf(d1) - k * disc * norm_cdf(d1 - sd)
}

/// Absolute error bound of [`run_black_scholes`] for one option.
///
/// Each probability table entry is rounded to `2^-(p+1)`, and the rounded
/// logarithms leave `ln(S/K)` off by at most `2^-f`, which moves either CDF
/// by at most `2^-f / (σ √(2π T))`. Both terms are weighted by `S` or `K`;
/// the final products are exact. With zero volatility the tables are exact
/// step functions and only the rounding term remains (it is zero in
/// practice).
pub fn bs_error_bound(o: OptionPair, mk: &Market, m: usize) -> f64 {
    let f = bs_fraction_bits(m) as i32;
    let slope = if mk.volatility > 0.0 {
        1.0 / (mk.volatility * (2.0 * std::f64::consts::PI * mk.maturity).sqrt())
    } else {
        0.0
    };
    (o.spot + o.strike) as f64 * (2f64.powi(-(f + 1)) + slope * 2f64.powi(-f))
}

pub fn random_options<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<OptionPair> {
    let hi = (1u32 << m) - 1;
    (0..n).map(|_| OptionPair { spot: rng.gen_range(1..=hi), strike: rng.gen_range(1..=hi) }).collect()
}

/// Prices `N` European calls, one per PU, with no inter-PU communication.
///
/// Spot and strike are `m`-bit integers. Lookup tables over them give
/// `ln S` and `ln K` with `f = m + 4` fraction bits; their signed
/// difference `x = ln(S/K)` indexes two tables baked from the shared
/// market, `N(d1)` and `e^(-rT) N(d2)`, with `p = f` fraction bits and 1.0
/// represented exactly. The price is `(S N(d1) - K e^(-rT) N(d2)) / 2^p`,
/// formed by two multiplies and one subtraction.
pub fn run_black_scholes(options: &[OptionPair], market: &Market, m: usize) -> Result<BsRun, WorkloadError> {
    market.validate()?;
    if !(2..=10).contains(&m) {
        return Err(WorkloadError::Input(format!("word width {m} outside 2..=10")));
    }
    if options.is_empty() {
        return Err(WorkloadError::Input("no options".into()));
    }
    let hi = (1u32 << m) - 1;
    if let Some(o) = options.iter().find(|o| o.spot == 0 || o.strike == 0 || o.spot > hi || o.strike > hi) {
        return Err(WorkloadError::Input(format!("option {o:?} outside 1..={hi}")));
    }
    check_capacity(options.len())?;

    let f = bs_fraction_bits(m);
    let p = f;
    let scale_f = (1u64 << f) as f64;
    let ln_max_code = ((hi as f64).ln() * scale_f).round() as u64;
    let lw = (u64::BITS - ln_max_code.leading_zeros()) as usize + 1; // signed log difference
    let pw = p + 1;

    let mut lay = Layout::default();
    let fs = lay.field(m);
    let fk = lay.field(m);
    let ls = lay.field(lw);
    let lk = lay.field(lw);
    let n1 = lay.field(pw);
    let d2 = lay.field(pw);
    let ext = lay.field(pw);
    let prod = lay.field(2 * pw);
    let prod2 = lay.field(2 * pw);
    let carry = lay.col();
    let mut arr = ApArray::new(options.len(), lay.width())?;
    let rows: Vec<_> = options.iter().map(|o| vec![(fs, o.spot as u128), (fk, o.strike as u128)]).collect();
    load_rows(&mut arr, &rows)?;

    let ln_table: Vec<u128> =
        (0..=hi as u64).map(|v| if v == 0 { 0 } else { ((v as f64).ln() * scale_f).round() as u128 }).collect();
    lut_apply(&mut arr, fs, ls.slice(0, lw - 1), &ln_table)?;
    lut_apply(&mut arr, fk, lk.slice(0, lw - 1), &ln_table)?;
    // ls := ln S - ln K
    vector_subtract(&mut arr, lk, ls, carry)?;
    clear(&mut arr, &[FieldSpec::bit(carry)])?;

    let one = (1u64 << p) as f64;
    let disc = (-market.rate * market.maturity).exp();
    let sd = market.volatility * market.maturity.sqrt();
    let drift = (market.rate + 0.5 * market.volatility * market.volatility) * market.maturity;
    let (mut t1, mut t2) = (Vec::with_capacity(1 << lw), Vec::with_capacity(1 << lw));
    for code in 0..1u128 << lw {
        let x = to_signed(code, lw) as f64 / scale_f;
        let (a, b) = if sd == 0.0 {
            let step = if x >= 0.0 { 1.0 } else { 0.0 };
            (step, step)
        } else {
            let d1 = (x + drift) / sd;
            (norm_cdf(d1), disc * norm_cdf(d1 - sd))
        };
        t1.push((a * one).round() as u128);
        t2.push((b * one).round() as u128);
    }
    lut_apply(&mut arr, ls, n1, &t1)?;
    lut_apply(&mut arr, ls, d2, &t2)?;

    zero_extend(&mut arr, fs, ext)?;
    vector_multiply(&mut arr, ext, n1, prod, carry)?;
    zero_extend(&mut arr, fk, ext)?;
    vector_multiply(&mut arr, ext, d2, prod2, carry)?;
    vector_subtract(&mut arr, prod2, prod, carry)?;
    clear(&mut arr, &[FieldSpec::bit(carry)])?;

    let prices = (0..options.len())
        .map(|r| to_signed(arr.peek_value(r, prod.offset, prod.width), prod.width) as f64 / one)
        .collect();
    Ok(BsRun { m, prices, ledger: *arr.ledger() })
}
