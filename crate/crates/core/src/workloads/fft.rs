use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::program::{copy, load_rows, select_copy, sign_extend, to_code, to_signed, Layout};
use super::{check_capacity, WorkloadError};
use crate::array::{ApArray, EventLedger};
use crate::kernels::{
    broadcast, clear, lut_apply, shift_rows, vector_add, vector_multiply, vector_subtract, FieldSpec,
};

/// Complex sample as a pair of two's-complement codes.
pub type Complex = (i64, i64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FftRun {
    pub m: usize,
    /// Spectrum divided by `N`, in the same fixed-point format as the input.
    pub output: Vec<Complex>,
    pub ledger: EventLedger,
}

/// Worst-case absolute error per component of [`run_fft`] against the
/// exact scaled transform: `3 log2(N) 2^-(m-1)`.
pub fn fft_error_bound(n: usize, m: usize) -> f64 {
    3.0 * n.trailing_zeros() as f64 * 2f64.powi(-(m as i32 - 1))
}

/// Direct `O(N²)` DFT of the input (decoded from Q1.(m-1)), divided by `N`.
pub fn fft_oracle(input: &[Complex], m: usize) -> Vec<(f64, f64)> {
    let n = input.len();
    let scale = 2f64.powi(-(m as i32 - 1));
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &(xr, xi)) in input.iter().enumerate() {
                let ang = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                let (s, c) = ang.sin_cos();
                re += xr as f64 * c - xi as f64 * s;
                im += xr as f64 * s + xi as f64 * c;
            }
            (re * scale / n as f64, im * scale / n as f64)
        })
        .collect()
}

/// Largest absolute per-component difference between a run's output and
/// the oracle, in real units.
pub fn fft_max_error(output: &[Complex], oracle: &[(f64, f64)], m: usize) -> f64 {
    let scale = 2f64.powi(-(m as i32 - 1));
    output
        .iter()
        .zip(oracle)
        .map(|(&(r, i), &(or, oi))| (r as f64 * scale - or).abs().max((i as f64 * scale - oi).abs()))
        .fold(0.0, f64::max)
}

/// Random samples with modulus below 0.5, as Q1.(m-1) codes.
pub fn random_fft_input<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<Complex> {
    let lim = (1i64 << (m - 1)) as f64 * 0.35;
    (0..n).map(|_| (rng.gen_range(-lim..=lim) as i64, rng.gen_range(-lim..=lim) as i64)).collect()
}

fn bit_reverse(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

struct Fields {
    idx: FieldSpec,
    x: [FieldSpec; 2],
    v: [FieldSpec; 2],
    base: [FieldSpec; 2],
    w: [FieldSpec; 2],
    ea: FieldSpec,
    eb: FieldSpec,
    prod: FieldSpec,
    z: [FieldSpec; 2],
    s: FieldSpec,
    d: FieldSpec,
    zx: FieldSpec,
    carry: usize,
}

/// `N`-point radix-2 decimation-in-time FFT, one sample per PU.
///
/// Samples are Q1.(m-1) complex values with modulus at most 0.5, loaded in
/// bit-reversed order; PU `r` ends with `X[r] / N`. At each stage of
/// half-span `h`, the PU's bit `log2 h` of its index says whether it holds
/// the top (0) or bottom (1) of its butterfly. Every PU fetches its partner
/// with row shifts by `±h`, forms `z = w V` where `V` is the bottom sample
/// and `w` comes from a twiddle LUT (Q2.(m-2)) over the low index bits, and
/// keeps `(top + z) / 2` or `(top - z) / 2`. The halving at each stage
/// keeps every intermediate within the format.
pub fn run_fft(input: &[Complex], m: usize) -> Result<FftRun, WorkloadError> {
    let n = input.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(WorkloadError::Input(format!("FFT size {n} must be a power of two ≥ 2")));
    }
    if !(6..=24).contains(&m) {
        return Err(WorkloadError::Input(format!("word width {m} outside 6..=24")));
    }
    let half = 1i64 << (m - 2);
    if let Some(&(r, i)) = input.iter().find(|&&(r, i)| (r as i128).pow(2) + (i as i128).pow(2) > (half as i128).pow(2))
    {
        return Err(WorkloadError::Input(format!("sample ({r}, {i}) has modulus above 0.5")));
    }
    check_capacity(n)?;
    let stages = n.trailing_zeros();

    let mut lay = Layout::default();
    let f = Fields {
        idx: lay.field(stages as usize),
        x: [lay.field(m), lay.field(m)],
        v: [lay.field(m), lay.field(m)],
        base: [lay.field(m), lay.field(m)],
        w: [lay.field(m), lay.field(m)],
        ea: lay.field(2 * m),
        eb: lay.field(2 * m),
        prod: lay.field(4 * m),
        z: [lay.field(2 * m), lay.field(2 * m)],
        s: lay.field(m + 2),
        d: lay.field(m + 2),
        zx: lay.field(m + 2),
        carry: lay.col(),
    };
    let mut arr = ApArray::new(n, lay.width())?;
    let rows: Vec<_> = (0..n)
        .map(|r| {
            let (xr, xi) = input[bit_reverse(r, stages)];
            vec![(f.idx, r as u128), (f.x[0], to_code(xr as i128, m)), (f.x[1], to_code(xi as i128, m))]
        })
        .collect();
    load_rows(&mut arr, &rows)?;

    for s in 0..stages as usize {
        stage(&mut arr, &f, s, m)?;
    }

    let output = (0..n)
        .map(|r| {
            let re = to_signed(arr.peek_value(r, f.x[0].offset, m), m) as i64;
            let im = to_signed(arr.peek_value(r, f.x[1].offset, m), m) as i64;
            (re, im)
        })
        .collect();
    Ok(FftRun { m, output, ledger: *arr.ledger() })
}

fn stage(arr: &mut ApArray, f: &Fields, s: usize, m: usize) -> Result<(), WorkloadError> {
    let h = 1usize << s;
    let flag = f.idx.col(s);
    for c in 0..2 {
        // V: own sample on bottom PUs, partner's on top PUs
        copy(arr, f.x[c], f.v[c])?;
        shift_rows(arr, f.v[c], -(h as isize))?;
        select_copy(arr, f.x[c], f.v[c], flag, true)?;
        // top of the butterfly
        copy(arr, f.x[c], f.base[c])?;
        shift_rows(arr, f.base[c], h as isize)?;
        select_copy(arr, f.x[c], f.base[c], flag, false)?;
    }

    let one = 1i128 << (m - 2);
    if s == 0 {
        broadcast(arr, f.w[0], to_code(one, m))?;
        broadcast(arr, f.w[1], 0)?;
    } else {
        let angle = |k: usize| -PI * k as f64 / h as f64;
        let table = |g: fn(f64) -> f64| -> Vec<u128> {
            (0..h).map(|k| to_code((g(angle(k)) * one as f64).round() as i128, m)).collect()
        };
        lut_apply(arr, f.idx.slice(0, s), f.w[0], &table(f64::cos))?;
        lut_apply(arr, f.idx.slice(0, s), f.w[1], &table(f64::sin))?;
    }

    // z = w V: zr = vr wr - vi wi, zi = vr wi + vi wr
    let low = f.prod.slice(0, 2 * m);
    signed_multiply(arr, f, f.v[0], f.w[0])?;
    copy(arr, low, f.z[0])?;
    signed_multiply(arr, f, f.v[1], f.w[1])?;
    vector_subtract(arr, low, f.z[0], f.carry)?;
    clear(arr, &[FieldSpec::bit(f.carry)])?;
    signed_multiply(arr, f, f.v[0], f.w[1])?;
    copy(arr, low, f.z[1])?;
    signed_multiply(arr, f, f.v[1], f.w[0])?;
    vector_add(arr, low, f.z[1], f.carry)?;
    clear(arr, &[FieldSpec::bit(f.carry)])?;

    for c in 0..2 {
        // back to the sample scale: drop m-2 fraction bits, keep a guard bit
        sign_extend(arr, f.z[c].slice(m - 2, m + 1), f.zx)?;
        sign_extend(arr, f.base[c], f.s)?;
        sign_extend(arr, f.base[c], f.d)?;
        vector_add(arr, f.zx, f.s, f.carry)?;
        clear(arr, &[FieldSpec::bit(f.carry)])?;
        vector_subtract(arr, f.zx, f.d, f.carry)?;
        clear(arr, &[FieldSpec::bit(f.carry)])?;
        select_copy(arr, f.d.slice(1, m), f.x[c], flag, true)?;
        select_copy(arr, f.s.slice(1, m), f.x[c], flag, false)?;
    }
    Ok(())
}

/// `prod := a b` for signed `m`-bit fields, exact in the low `2m` bits.
fn signed_multiply(arr: &mut ApArray, f: &Fields, a: FieldSpec, b: FieldSpec) -> Result<(), WorkloadError> {
    sign_extend(arr, a, f.ea)?;
    sign_extend(arr, b, f.eb)?;
    clear(arr, &[f.prod, FieldSpec::bit(f.carry)])?;
    vector_multiply(arr, f.ea, f.eb, f.prod, f.carry)?;
    Ok(())
}
