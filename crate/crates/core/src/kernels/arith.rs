use crate::array::ApArray;

use super::pass_table::BitColumns;
use super::{
    check_disjoint, check_field, check_same_width, check_zero, pass, FieldSpec, KernelError, PassTable, Pattern,
};

fn check_binary(array: &ApArray, a: &FieldSpec, b: &FieldSpec, carry: usize) -> Result<(), KernelError> {
    check_field(array, a)?;
    check_field(array, b)?;
    let c = FieldSpec::bit(carry);
    check_field(array, &c)?;
    check_same_width(a, b)?;
    check_disjoint(&[*a, *b, c])?;
    check_zero(array, &c, "carry column")
}

fn ripple(array: &mut ApArray, table: &PassTable, a: FieldSpec, b: FieldSpec, carry: usize) -> Result<(), KernelError> {
    check_binary(array, &a, &b, carry)?;
    for i in 0..a.width {
        table.apply(array, BitColumns { c: carry, b: b.col(i), a: a.col(i) })?;
    }
    Ok(())
}

/// `b := (a + b) mod 2^m` in every row, carry-out left in `carry`.
///
/// `carry` must already be zero (see [`super::clear`]). Costs exactly `8m`
/// cycles: four passes per bit.
pub fn vector_add(array: &mut ApArray, a: FieldSpec, b: FieldSpec, carry: usize) -> Result<(), KernelError> {
    ripple(array, &PassTable::full_adder(), a, b, carry)
}

/// `b := (b - a) mod 2^m` in every row, borrow-out left in `borrow`.
///
/// Same preconditions and cost as [`vector_add`].
pub fn vector_subtract(array: &mut ApArray, a: FieldSpec, b: FieldSpec, borrow: usize) -> Result<(), KernelError> {
    ripple(array, &PassTable::full_subtractor(), a, b, borrow)
}

/// Cycles taken by [`vector_multiply`] for `m`-bit operands.
pub const fn multiply_cycles(m: usize) -> u64 {
    let m = m as u64;
    8 * m * m + 2 * m
}

/// `p := a * b` in every row; `p` is `2m` bits wide and must start at zero,
/// as must `carry`.
///
/// Long multiplication over the multiplier bits of `a`, least significant
/// first. For multiplier bit `j` the multiplicand `b` is added into
/// `p[j .. j+m)` in the rows where `a_j = 1` (the full-adder passes compare
/// `a_j` as a fourth column), then one more pass moves the carry into
/// `p[j+m]`, which is still zero at that point, and clears it. The shift by
/// `j` is only a choice of columns. Total: `m * (8m + 2)` cycles, see
/// [`multiply_cycles`]. Carry is zero again on return.
pub fn vector_multiply(
    array: &mut ApArray,
    a: FieldSpec,
    b: FieldSpec,
    p: FieldSpec,
    carry: usize,
) -> Result<(), KernelError> {
    check_binary(array, &a, &b, carry)?;
    check_field(array, &p)?;
    if p.width != 2 * a.width {
        return Err(KernelError::WidthMismatch { left: 2 * a.width, right: p.width });
    }
    check_disjoint(&[a, b, p, FieldSpec::bit(carry)])?;
    check_zero(array, &p, "product field")?;

    let m = a.width;
    let adder = PassTable::full_adder();
    let w = array.width();
    for j in 0..m {
        for i in 0..m {
            adder.apply_when(array, BitColumns { c: carry, b: p.col(j + i), a: b.col(i) }, Some((a.col(j), true)))?;
        }
        let cond = Pattern::new(w).bit(carry, true);
        let out = Pattern::new(w).bit(p.col(j + m), true).bit(carry, false);
        pass(array, &cond, &out)?;
    }
    Ok(())
}
