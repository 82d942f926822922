use serde::{Deserialize, Serialize};

use super::program::{copy, load_rows, select_copy, Layout};
use super::{check_capacity, WorkloadError};
use crate::array::{ApArray, EventLedger};
use crate::kernels::{clear, shift_rows, vector_add, vector_multiply, FieldSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmmRun {
    pub n: usize,
    pub m: usize,
    /// Row-major `n × n` product.
    pub product: Vec<u128>,
    pub ledger: EventLedger,
}

/// Square matrix product by row-major multiplication, as the oracle.
pub fn dmm_oracle(a: &[u128], b: &[u128], n: usize) -> Vec<u128> {
    let mut c = vec![0u128; n * n];
    for i in 0..n {
        for j in 0..n {
            c[i * n + j] = (0..n).map(|k| a[i * n + k] * b[k * n + j]).sum();
        }
    }
    c
}

fn log2_ceil(n: usize) -> usize {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
}

/// `C = A B` for `n × n` matrices of unsigned `m`-bit integers, one matrix
/// position `(i, j)` per PU (row `i n + j`).
///
/// Cannon's algorithm: A is loaded skewed left by `i` and B skewed up by
/// `j`, so PU `(i, j)` starts with `A[i][i+j]` and `B[i+j][j]`. Each of the
/// `n` steps multiplies, accumulates into C, then rotates A left by one
/// column and B up by one row. A rotation is two shifted copies (one for
/// the wrap-around PUs) merged by a per-PU flag, so all communication goes
/// through row shifts.
pub fn run_dmm(a: &[u128], b: &[u128], n: usize, m: usize) -> Result<DmmRun, WorkloadError> {
    if n == 0 || a.len() != n * n || b.len() != n * n {
        return Err(WorkloadError::Input(format!("need two {n}×{n} matrices")));
    }
    if !(1..=32).contains(&m) {
        return Err(WorkloadError::Input(format!("word width {m} outside 1..=32")));
    }
    if let Some(v) = a.iter().chain(b).find(|&&v| v >> m != 0) {
        return Err(WorkloadError::Input(format!("entry {v} does not fit in {m} bits")));
    }
    check_capacity(n * n)?;

    let mut lay = Layout::default();
    let fa = lay.field(m);
    let fb = lay.field(m);
    let cw = 2 * m + log2_ceil(n);
    let fc = lay.field(cw);
    // product in the low 2m bits of a C-wide field, upper bits stay zero
    let fp_wide = lay.field(cw);
    let fp = fp_wide.slice(0, 2 * m);
    let t1 = lay.field(m);
    let t2 = lay.field(m);
    let carry = lay.col();
    let last_col = lay.col();
    let last_row = lay.col();
    let mut arr = ApArray::new(n * n, lay.width())?;

    let rows: Vec<_> = (0..n * n)
        .map(|r| {
            let (i, j) = (r / n, r % n);
            let k = (i + j) % n;
            vec![
                (fa, a[i * n + k]),
                (fb, b[k * n + j]),
                (FieldSpec::bit(last_col), (j == n - 1) as u128),
                (FieldSpec::bit(last_row), (i == n - 1) as u128),
            ]
        })
        .collect();
    load_rows(&mut arr, &rows)?;

    for step in 0..n {
        clear(&mut arr, &[fp_wide, FieldSpec::bit(carry)])?;
        vector_multiply(&mut arr, fa, fb, fp, carry)?;
        vector_add(&mut arr, fp_wide, fc, carry)?;
        if step + 1 < n {
            rotate(&mut arr, fa, t1, t2, 1, n - 1, last_col)?;
            rotate(&mut arr, fb, t1, t2, n, n * (n - 1), last_row)?;
        }
    }

    let product = (0..n * n).map(|r| arr.peek_value(r, fc.offset, fc.width)).collect();
    Ok(DmmRun { n, m, product, ledger: *arr.ledger() })
}

/// Cyclic rotation: PU `r` receives `f` from `r + near`, except flagged PUs
/// which receive it from `r - far`.
fn rotate(
    arr: &mut ApArray,
    f: FieldSpec,
    t1: FieldSpec,
    t2: FieldSpec,
    near: usize,
    far: usize,
    wrap: usize,
) -> Result<(), WorkloadError> {
    copy(arr, f, t1)?;
    shift_rows(arr, t1, -(near as isize))?;
    copy(arr, f, t2)?;
    shift_rows(arr, t2, far as isize)?;
    copy(arr, t1, f)?;
    select_copy(arr, t2, f, wrap, true)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_square() {
        let a = [1, 2, 3, 4];
        let run = run_dmm(&a, &a, 2, 4).unwrap();
        assert_eq!(run.product, vec![7, 10, 15, 22]);
    }

    #[test]
    fn identity_times_a() {
        let n = 4;
        let id: Vec<u128> = (0..n * n).map(|r| (r / n == r % n) as u128).collect();
        let a: Vec<u128> = (0..(n * n) as u128).map(|v| (v * 7) % 13).collect();
        assert_eq!(run_dmm(&id, &a, n, 4).unwrap().product, a);
    }

    #[test]
    fn random_8x8_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Vec<u128> = (0..64).map(|_| rng.gen_range(0..256)).collect();
        let b: Vec<u128> = (0..64).map(|_| rng.gen_range(0..256)).collect();
        let run = run_dmm(&a, &b, 8, 8).unwrap();
        assert_eq!(run.product, dmm_oracle(&a, &b, 8));
        assert!(run.ledger.cycles > 0);
        assert!(run.ledger.shift_ops > 0);
    }

    #[test]
    fn single_element() {
        assert_eq!(run_dmm(&[3], &[5], 1, 3).unwrap().product, vec![15]);
    }

    #[test]
    fn bad_inputs() {
        assert!(run_dmm(&[1, 2, 3], &[1, 2, 3, 4], 2, 4).is_err());
        assert!(run_dmm(&[16, 0, 0, 0], &[1, 2, 3, 4], 2, 4).is_err());
        let big = vec![0u128; 128 * 128];
        assert!(matches!(run_dmm(&big, &big, 128, 4), Err(WorkloadError::Capacity { .. })));
    }
}
