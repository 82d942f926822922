//! Word-parallel, bit-serial arithmetic built from compare/write passes.
//!
//! Every kernel operates on [`FieldSpec`]s (contiguous bit-columns, LSB at
//! `offset`) of one [`ApArray`] and runs on all rows at once. Cycle costs:
//!
//! | kernel | cycles |
//! |---|---|
//! | [`clear`] | 2 |
//! | [`vector_add`], [`vector_subtract`] | `8m` |
//! | [`vector_multiply`] | `8m^2 + 2m` ([`multiply_cycles`]) |
//! | [`vector_compare_gt`] | `4m + 3` ([`compare_gt_cycles`]) |
//! | [`lut_apply`] | `2^(m+1)` |
//! | [`shift_rows`] | `2n - abs(d)` for `d != 0` |

mod arith;
mod compare;
mod lut;
mod pass_table;
mod shift;

pub use arith::{multiply_cycles, vector_add, vector_multiply, vector_subtract};
pub use compare::{compare_gt_cycles, vector_compare_gt};
pub use lut::lut_apply;
pub use pass_table::{BitColumns, Pass, PassTable, FULL_ADDER, FULL_SUBTRACTOR};
pub use shift::shift_rows;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::array::{ApArray, ApError};
use crate::bits::Bits;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Array(#[from] ApError),
    #[error("field at offset {offset} with width {width} exceeds array width {array_width}")]
    FieldOutOfBounds { offset: usize, width: usize, array_width: usize },
    #[error("field has zero width")]
    EmptyField,
    #[error("field widths differ: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("fields {0:?} and {1:?} overlap")]
    Overlap(FieldSpec, FieldSpec),
    #[error("{what} must be zero before the kernel runs")]
    NotCleared { what: &'static str },
    #[error("lookup table has {actual} entries, expected {expected}")]
    TableSize { expected: usize, actual: usize },
    #[error("table entry {index} = {value} does not fit in {width} bits")]
    ValueTooWide { index: usize, value: u128, width: usize },
    #[error("lookup field of {width} bits is too wide")]
    LutTooWide { width: usize },
    #[error("shift distance {distance} out of range for {n_rows} rows")]
    DistanceOutOfRange { distance: isize, n_rows: usize },
}

/// A contiguous run of bit-columns interpreted as an unsigned integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub offset: usize,
    pub width: usize,
}

impl FieldSpec {
    pub const fn new(offset: usize, width: usize) -> Self {
        FieldSpec { offset, width }
    }

    /// A one-column field.
    pub const fn bit(col: usize) -> Self {
        FieldSpec { offset: col, width: 1 }
    }

    /// Column of bit `i` of the field.
    pub fn col(&self, i: usize) -> usize {
        debug_assert!(i < self.width);
        self.offset + i
    }

    pub fn end(&self) -> usize {
        self.offset + self.width
    }

    /// Sub-field `[lo, lo + width)` relative to this field. Shifting a value
    /// is just reading a different sub-field; it costs no cycles.
    pub fn slice(&self, lo: usize, width: usize) -> FieldSpec {
        assert!(lo + width <= self.width, "slice [{lo}, {}) outside field of width {}", lo + width, self.width);
        FieldSpec { offset: self.offset + lo, width }
    }

    pub fn overlaps(&self, other: &FieldSpec) -> bool {
        self.offset < other.end() && other.offset < self.end()
    }

    pub fn cols(&self) -> std::ops::Range<usize> {
        self.offset..self.end()
    }
}

pub(crate) fn check_field(array: &ApArray, f: &FieldSpec) -> Result<(), KernelError> {
    if f.width == 0 {
        return Err(KernelError::EmptyField);
    }
    if f.end() > array.width() {
        return Err(KernelError::FieldOutOfBounds { offset: f.offset, width: f.width, array_width: array.width() });
    }
    Ok(())
}

pub(crate) fn check_disjoint(fields: &[FieldSpec]) -> Result<(), KernelError> {
    for (i, a) in fields.iter().enumerate() {
        for b in &fields[i + 1..] {
            if a.overlaps(b) {
                return Err(KernelError::Overlap(*a, *b));
            }
        }
    }
    Ok(())
}

pub(crate) fn check_same_width(a: &FieldSpec, b: &FieldSpec) -> Result<(), KernelError> {
    if a.width != b.width {
        return Err(KernelError::WidthMismatch { left: a.width, right: b.width });
    }
    Ok(())
}

pub(crate) fn check_zero(array: &ApArray, f: &FieldSpec, what: &'static str) -> Result<(), KernelError> {
    if f.cols().any(|j| array.peek_column(j).any()) {
        return Err(KernelError::NotCleared { what });
    }
    Ok(())
}

/// KEY/MASK pair under construction.
#[derive(Debug, Clone)]
pub(crate) struct Pattern {
    pub key: Bits,
    pub mask: Bits,
}

impl Pattern {
    pub fn new(width: usize) -> Self {
        Pattern { key: Bits::zeros(width), mask: Bits::zeros(width) }
    }

    pub fn bit(mut self, col: usize, v: bool) -> Self {
        self.mask.set(col, true);
        self.key.set(col, v);
        self
    }

    pub fn value(mut self, f: FieldSpec, v: u128) -> Self {
        for i in 0..f.width {
            self = self.bit(f.col(i), i < 128 && (v >> i) & 1 == 1);
        }
        self
    }
}

/// One pass: compare against `cond`, then write `out` into the tagged rows.
/// Returns the number of tagged rows.
pub(crate) fn pass(array: &mut ApArray, cond: &Pattern, out: &Pattern) -> Result<usize, KernelError> {
    let tag = array.compare(&cond.key, &cond.mask)?;
    array.parallel_write(&out.key, &out.mask, &tag)?;
    Ok(tag.count_ones())
}

/// Zeroes the given fields in every row: one vacuous compare (empty mask,
/// all rows tagged) followed by one write. Always 2 cycles.
pub fn clear(array: &mut ApArray, fields: &[FieldSpec]) -> Result<(), KernelError> {
    let mut out = Pattern::new(array.width());
    for f in fields {
        check_field(array, f)?;
        out = out.value(*f, 0);
    }
    pass(array, &Pattern::new(array.width()), &out)?;
    Ok(())
}

/// Writes `value` into `field` of every row (vacuous compare + write, 2 cycles).
pub fn broadcast(array: &mut ApArray, field: FieldSpec, value: u128) -> Result<(), KernelError> {
    check_field(array, &field)?;
    let out = Pattern::new(array.width()).value(field, value);
    pass(array, &Pattern::new(array.width()), &out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_geometry() {
        let f = FieldSpec::new(4, 8);
        assert_eq!(f.col(0), 4);
        assert_eq!(f.end(), 12);
        assert_eq!(f.slice(2, 3), FieldSpec::new(6, 3));
        assert!(f.overlaps(&FieldSpec::new(11, 2)));
        assert!(!f.overlaps(&FieldSpec::new(12, 2)));
        assert!(!f.overlaps(&FieldSpec::new(0, 4)));
    }

    #[test]
    fn clear_costs_two_cycles() {
        let mut a = ApArray::from_text("1111\n1010\n").unwrap();
        clear(&mut a, &[FieldSpec::new(1, 2)]).unwrap();
        assert_eq!(a.to_text(), "1001\n1000\n");
        assert_eq!(a.ledger().cycles, 2);
    }

    #[test]
    fn broadcast_writes_every_row() {
        let mut a = ApArray::new(3, 6).unwrap();
        broadcast(&mut a, FieldSpec::new(2, 4), 0b1011).unwrap();
        for r in 0..3 {
            assert_eq!(a.peek_value(r, 2, 4), 0b1011);
        }
    }

    #[test]
    fn field_checks() {
        let a = ApArray::new(2, 8).unwrap();
        assert!(matches!(check_field(&a, &FieldSpec::new(6, 3)), Err(KernelError::FieldOutOfBounds { .. })));
        assert_eq!(check_field(&a, &FieldSpec::new(0, 0)), Err(KernelError::EmptyField));
        assert!(check_disjoint(&[FieldSpec::new(0, 4), FieldSpec::new(3, 2)]).is_err());
    }
}
