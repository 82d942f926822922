use crate::array::ApArray;

use super::{check_disjoint, check_field, pass, FieldSpec, KernelError, Pattern};

const MAX_LUT_BITS: usize = 24;

/// `y := table[x]` in every row.
///
/// One pass per argument value: compare `x` against `v`, write `table[v]`
/// over all of `y` in the tagged rows. Exactly `2^(m+1)` cycles for an
/// `m`-bit `x`.
pub fn lut_apply(array: &mut ApArray, x: FieldSpec, y: FieldSpec, table: &[u128]) -> Result<(), KernelError> {
    check_field(array, &x)?;
    check_field(array, &y)?;
    check_disjoint(&[x, y])?;
    if x.width > MAX_LUT_BITS {
        return Err(KernelError::LutTooWide { width: x.width });
    }
    let expected = 1usize << x.width;
    if table.len() != expected {
        return Err(KernelError::TableSize { expected, actual: table.len() });
    }
    if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| y.width < 128 && v >> y.width != 0) {
        return Err(KernelError::ValueTooWide { index, value, width: y.width });
    }

    let w = array.width();
    for (v, &fv) in table.iter().enumerate() {
        let cond = Pattern::new(w).value(x, v as u128);
        let out = Pattern::new(w).value(y, fv);
        pass(array, &cond, &out)?;
    }
    Ok(())
}
