//! Field moves shared by the workloads, built from compare/write passes.

use crate::array::ApArray;
use crate::kernels::{check_disjoint, check_field, check_same_width, clear, pass, FieldSpec, KernelError, Pattern};

/// Hands out consecutive, non-overlapping fields of a row.
#[derive(Debug, Default)]
pub(crate) struct Layout {
    next: usize,
}

impl Layout {
    pub fn field(&mut self, width: usize) -> FieldSpec {
        let f = FieldSpec::new(self.next, width);
        self.next += width;
        f
    }

    pub fn col(&mut self) -> usize {
        self.field(1).offset
    }

    pub fn width(&self) -> usize {
        self.next
    }
}

/// `dst := src` (same width). `2 + 2m` cycles.
pub(crate) fn copy(array: &mut ApArray, src: FieldSpec, dst: FieldSpec) -> Result<(), KernelError> {
    check_same_width(&src, &dst)?;
    extend(array, src, dst, false)
}

/// `dst := src` zero-extended to the wider `dst`. `2 + 2m` cycles.
pub(crate) fn zero_extend(array: &mut ApArray, src: FieldSpec, dst: FieldSpec) -> Result<(), KernelError> {
    extend(array, src, dst, false)
}

/// `dst := src` sign-extended to the wider `dst`. `4 + 2m` cycles.
pub(crate) fn sign_extend(array: &mut ApArray, src: FieldSpec, dst: FieldSpec) -> Result<(), KernelError> {
    extend(array, src, dst, true)
}

fn extend(array: &mut ApArray, src: FieldSpec, dst: FieldSpec, signed: bool) -> Result<(), KernelError> {
    check_field(array, &src)?;
    check_field(array, &dst)?;
    check_disjoint(&[src, dst])?;
    if dst.width < src.width {
        return Err(KernelError::WidthMismatch { left: src.width, right: dst.width });
    }
    let w = array.width();
    clear(array, &[dst])?;
    for i in 0..src.width {
        pass(array, &Pattern::new(w).bit(src.col(i), true), &Pattern::new(w).bit(dst.col(i), true))?;
    }
    if signed && dst.width > src.width {
        let mut out = Pattern::new(w);
        for i in src.width..dst.width {
            out = out.bit(dst.col(i), true);
        }
        pass(array, &Pattern::new(w).bit(src.col(src.width - 1), true), &out)?;
    }
    Ok(())
}

/// `dst := src` in the rows where column `flag` holds `when`. `4m` cycles.
pub(crate) fn select_copy(
    array: &mut ApArray,
    src: FieldSpec,
    dst: FieldSpec,
    flag: usize,
    when: bool,
) -> Result<(), KernelError> {
    check_field(array, &src)?;
    check_field(array, &dst)?;
    check_same_width(&src, &dst)?;
    check_disjoint(&[src, dst, FieldSpec::bit(flag)])?;
    let w = array.width();
    for i in 0..src.width {
        for v in [true, false] {
            let cond = Pattern::new(w).bit(flag, when).bit(src.col(i), v);
            pass(array, &cond, &Pattern::new(w).bit(dst.col(i), v))?;
        }
    }
    Ok(())
}

/// Writes each row's field values with single-row writes, then zeroes the
/// ledger so that runs account for computation only.
pub(crate) fn load_rows(array: &mut ApArray, rows: &[Vec<(FieldSpec, u128)>]) -> Result<(), KernelError> {
    let w = array.width();
    for (r, fields) in rows.iter().enumerate() {
        let mut p = Pattern::new(w);
        for &(f, v) in fields {
            check_field(array, &f)?;
            p = p.value(f, v);
        }
        array.write_row(r, &p.key, &p.mask)?;
    }
    array.reset_ledger();
    Ok(())
}

/// Two's-complement reading of a `width`-bit code.
pub fn to_signed(code: u128, width: usize) -> i128 {
    if width >= 128 {
        return code as i128;
    }
    let code = code & ((1u128 << width) - 1);
    if width > 0 && code >> (width - 1) == 1 {
        code as i128 - (1i128 << width)
    } else {
        code as i128
    }
}

/// `width`-bit two's-complement code of `v`.
pub fn to_code(v: i128, width: usize) -> u128 {
    (v as u128) & ((1u128 << width) - 1)
}
