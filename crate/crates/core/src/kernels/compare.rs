use crate::array::ApArray;
use crate::bits::Bits;

use super::{check_disjoint, check_field, check_same_width, clear, pass, FieldSpec, KernelError, Pattern};

/// Cycles taken by [`vector_compare_gt`] for `m`-bit operands. Never more
/// than `6m` for `m >= 2`.
pub const fn compare_gt_cycles(m: usize) -> u64 {
    4 * m as u64 + 3
}

/// Tags the rows where `a > b` (unsigned). `a` and `b` are left unchanged.
///
/// `scratch` is a 2-column field: bit 0 records "decided", bit 1 records
/// "greater". Both are cleared first (2 cycles), then bits are scanned MSB
/// first with two passes per bit on undecided rows:
/// `(a_i, b_i) = (1, 0)` decides greater, `(0, 1)` decides not greater.
/// A final compare on the greater bit produces the tag. Total `4m + 3`.
pub fn vector_compare_gt(
    array: &mut ApArray,
    a: FieldSpec,
    b: FieldSpec,
    scratch: FieldSpec,
) -> Result<Bits, KernelError> {
    check_field(array, &a)?;
    check_field(array, &b)?;
    check_field(array, &scratch)?;
    check_same_width(&a, &b)?;
    if scratch.width != 2 {
        return Err(KernelError::WidthMismatch { left: 2, right: scratch.width });
    }
    check_disjoint(&[a, b, scratch])?;

    let (decided, greater) = (scratch.col(0), scratch.col(1));
    let w = array.width();
    clear(array, &[scratch])?;
    for i in (0..a.width).rev() {
        let cond = Pattern::new(w).bit(decided, false).bit(a.col(i), true).bit(b.col(i), false);
        pass(array, &cond, &Pattern::new(w).bit(decided, true).bit(greater, true))?;
        let cond = Pattern::new(w).bit(decided, false).bit(a.col(i), false).bit(b.col(i), true);
        pass(array, &cond, &Pattern::new(w).bit(decided, true))?;
    }
    let cond = Pattern::new(w).bit(greater, true);
    Ok(array.compare(&cond.key, &cond.mask)?)
}
