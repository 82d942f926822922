use crate::array::ApArray;
use crate::bits::Bits;

use super::{check_field, FieldSpec, KernelError, Pattern};

/// Moves `field` of every row `i` to row `i + distance`; rows left without
/// a source are zeroed. Other columns are untouched.
///
/// Inter-PU communication done serially with single-row reads and writes:
/// `n - |d|` read/write pairs plus `|d|` zeroing writes, so `2n - |d|`
/// cycles. A zero distance is a no-op and is not recorded. The cycles are
/// attributed to `shift_ops`/`shift_cycles` in the ledger.
pub fn shift_rows(array: &mut ApArray, field: FieldSpec, distance: isize) -> Result<(), KernelError> {
    check_field(array, &field)?;
    let n = array.n_rows();
    if distance.unsigned_abs() >= n {
        return Err(KernelError::DistanceOutOfRange { distance, n_rows: n });
    }
    if distance == 0 {
        return Ok(());
    }
    let before = *array.ledger();
    let mask = Pattern::new(array.width()).value(field, 0).mask;
    let d = distance.unsigned_abs();
    let zeros = Bits::zeros(array.width());
    if distance > 0 {
        // top-down so a source is read before it is overwritten
        for dst in (d..n).rev() {
            let v = array.read_row(dst - d, &mask)?;
            array.write_row(dst, &v, &mask)?;
        }
        for dst in 0..d {
            array.write_row(dst, &zeros, &mask)?;
        }
    } else {
        for dst in 0..n - d {
            let v = array.read_row(dst + d, &mask)?;
            array.write_row(dst, &v, &mask)?;
        }
        for dst in n - d..n {
            array.write_row(dst, &zeros, &mask)?;
        }
    }
    array.record_shift(&before);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column_values(arr: &ApArray, f: FieldSpec) -> Vec<u128> {
        (0..arr.n_rows()).map(|r| arr.peek_value(r, f.offset, f.width)).collect()
    }

    fn loaded(vals: &[u128], f: FieldSpec, width: usize) -> ApArray {
        let mut arr = ApArray::new(vals.len(), width).unwrap();
        for (r, &v) in vals.iter().enumerate() {
            let p = Pattern::new(width).value(f, v).bit(width - 1, true);
            arr.write_row(r, &p.key, &p.mask).unwrap();
        }
        arr.reset_ledger();
        arr
    }

    #[test]
    fn shift_down_by_one() {
        let f = FieldSpec::new(0, 4);
        let mut arr = loaded(&[1, 2, 3], f, 5);
        shift_rows(&mut arr, f, 1).unwrap();
        assert_eq!(column_values(&arr, f), vec![0, 1, 2]);
        // untouched column
        assert!((0..3).all(|r| arr.peek(r, 4)));
        let l = arr.ledger();
        assert_eq!((l.cycles, l.shift_ops, l.shift_cycles), (5, 1, 5));
    }

    #[test]
    fn zero_distance_is_noop() {
        let f = FieldSpec::new(0, 4);
        let mut arr = loaded(&[4, 5, 6], f, 5);
        shift_rows(&mut arr, f, 0).unwrap();
        assert_eq!(column_values(&arr, f), vec![4, 5, 6]);
        assert_eq!(arr.ledger().cycles, 0);
    }

    #[test]
    fn distance_must_be_smaller_than_rows() {
        let f = FieldSpec::new(0, 4);
        let mut arr = loaded(&[1, 2, 3], f, 5);
        assert_eq!(shift_rows(&mut arr, f, -3), Err(KernelError::DistanceOutOfRange { distance: -3, n_rows: 3 }));
    }

    proptest! {
        #[test]
        fn shift_back_restores_interior(vals in proptest::collection::vec(0u128..256, 2..40), k in 1usize..40) {
            let n = vals.len();
            let k = k % n;
            let f = FieldSpec::new(0, 8);
            let mut arr = loaded(&vals, f, 9);
            shift_rows(&mut arr, f, k as isize).unwrap();
            shift_rows(&mut arr, f, -(k as isize)).unwrap();
            let got = column_values(&arr, f);
            prop_assert_eq!(&got[..n - k], &vals[..n - k]);
            prop_assert!(got[n - k..].iter().all(|&v| v == 0));
            prop_assert_eq!(arr.ledger().cycles, if k == 0 { 0 } else { 2 * (2 * n - k) as u64 });
        }
    }
}
