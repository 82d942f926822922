use crate::array::ApArray;

use super::{pass, KernelError, Pattern};

/// One truth-table entry applied as a compare/write pair.
///
/// Inputs are `(c, b, a)`: carry/borrow, the overwritten operand bit and
/// the other operand bit. Outputs are the new `(c, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pass {
    pub input: [bool; 3],
    pub output: [bool; 2],
}

impl Pass {
    const fn new(c: u8, b: u8, a: u8, c_out: u8, b_out: u8) -> Self {
        Pass { input: [c == 1, b == 1, a == 1], output: [c_out == 1, b_out == 1] }
    }
}

/// Ordered passes implementing a one-bit operation in place.
///
/// Entries whose output equals their input are left out. The order matters:
/// a pass may rewrite a row into a state matched by an earlier pass, never
/// by a later one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassTable {
    pub passes: Vec<Pass>,
}

/// Full adder, `b := a + b + c`, four passes.
pub const FULL_ADDER: [Pass; 4] =
    [Pass::new(0, 1, 1, 1, 0), Pass::new(0, 0, 1, 0, 1), Pass::new(1, 0, 0, 0, 1), Pass::new(1, 1, 0, 1, 0)];

/// Full subtractor, `b := b - a - c` with borrow in `c`, four passes.
///
/// `011 -> 001` must follow the `001` pass and `100 -> 110` must follow
/// the `110` pass.
pub const FULL_SUBTRACTOR: [Pass; 4] =
    [Pass::new(0, 0, 1, 1, 1), Pass::new(0, 1, 1, 0, 0), Pass::new(1, 1, 0, 0, 0), Pass::new(1, 0, 0, 1, 1)];

/// Columns a [`PassTable`] acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitColumns {
    pub c: usize,
    pub b: usize,
    pub a: usize,
}

impl PassTable {
    pub fn full_adder() -> Self {
        PassTable { passes: FULL_ADDER.to_vec() }
    }

    pub fn full_subtractor() -> Self {
        PassTable { passes: FULL_SUBTRACTOR.to_vec() }
    }

    /// The same passes in a different order; `order[k]` is the index of the
    /// pass to run k-th.
    pub fn reordered(&self, order: &[usize]) -> Self {
        PassTable { passes: order.iter().map(|&i| self.passes[i]).collect() }
    }

    /// Scalar semantics: runs the passes in order on one `(c, b, a)` state.
    pub fn evaluate(&self, state: [bool; 3]) -> [bool; 2] {
        let mut s = state;
        for p in &self.passes {
            if s == p.input {
                s[0] = p.output[0];
                s[1] = p.output[1];
            }
        }
        [s[0], s[1]]
    }

    /// Runs every pass on the array. Returns the tagged-row count per pass.
    pub fn apply(&self, array: &mut ApArray, cols: BitColumns) -> Result<Vec<usize>, KernelError> {
        self.apply_when(array, cols, None)
    }

    /// As [`PassTable::apply`], restricted to rows where column `guard.0`
    /// holds `guard.1`.
    pub(crate) fn apply_when(
        &self,
        array: &mut ApArray,
        cols: BitColumns,
        guard: Option<(usize, bool)>,
    ) -> Result<Vec<usize>, KernelError> {
        let w = array.width();
        let mut tagged = Vec::with_capacity(self.passes.len());
        for p in &self.passes {
            let mut cond = Pattern::new(w).bit(cols.c, p.input[0]).bit(cols.b, p.input[1]).bit(cols.a, p.input[2]);
            if let Some((col, v)) = guard {
                cond = cond.bit(col, v);
            }
            let out = Pattern::new(w).bit(cols.c, p.output[0]).bit(cols.b, p.output[1]);
            tagged.push(pass(array, &cond, &out)?);
        }
        Ok(tagged)
    }
}
