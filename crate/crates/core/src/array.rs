//! Behavioral model of the associative processing array.
//!
//! The array is `n_rows` word-rows (one PU each) by `width` bit-columns,
//! with KEY and MASK registers of `width` bits and a TAG register of
//! `n_rows` bits. Storage is column-major so a compare or a parallel write
//! touches only the unmasked columns, the way the hardware does.
//!
//! Every modeled operation costs one cycle and updates the [`EventLedger`].
//! The ledger counts raw events only; energy weights are applied by
//! [`crate::workloads::trace_to_power`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{Bits, ParseBitsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApError {
    #[error("{what} has {actual} bits, expected {expected}")]
    WidthMismatch { what: &'static str, expected: usize, actual: usize },
    #[error("row {row} out of range for an array of {n_rows} rows")]
    RowOutOfRange { row: usize, n_rows: usize },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseBitsError },
    #[error("line {line} has {actual} columns, expected {expected}")]
    RaggedRows { line: usize, expected: usize, actual: usize },
    #[error("array must have at least one row and one column")]
    Empty,
}

/// Raw event counts accumulated by array operations.
///
/// `compare_bits = match_bits + mismatch_bits`, and for every write (parallel
/// or single-row) `write_bits + miswrite_bits` grows by `popcount(mask) * n_rows`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLedger {
    pub cycles: u64,
    pub compares: u64,
    pub parallel_writes: u64,
    pub row_reads: u64,
    pub row_writes: u64,
    /// Rows tagged by compares.
    pub matches: u64,
    /// Rows not tagged by compares.
    pub mismatches: u64,
    /// Unmasked cells evaluated by compares (`n_rows * popcount(mask)` each).
    pub compare_bits: u64,
    pub match_bits: u64,
    pub mismatch_bits: u64,
    /// Cells driven on selected rows.
    pub write_bits: u64,
    /// Cells whose bit lines were driven without the word line asserted.
    pub miswrite_bits: u64,
    /// Row-shift (inter-PU communication) operations.
    pub shift_ops: u64,
    /// Cycles spent inside row-shift operations.
    pub shift_cycles: u64,
}

impl EventLedger {
    /// Fraction of cycles spent on inter-PU communication.
    pub fn shift_fraction(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.shift_cycles as f64 / self.cycles as f64
        }
    }

    /// Counter-wise difference `self - earlier`.
    pub fn since(&self, earlier: &EventLedger) -> EventLedger {
        EventLedger {
            cycles: self.cycles - earlier.cycles,
            compares: self.compares - earlier.compares,
            parallel_writes: self.parallel_writes - earlier.parallel_writes,
            row_reads: self.row_reads - earlier.row_reads,
            row_writes: self.row_writes - earlier.row_writes,
            matches: self.matches - earlier.matches,
            mismatches: self.mismatches - earlier.mismatches,
            compare_bits: self.compare_bits - earlier.compare_bits,
            match_bits: self.match_bits - earlier.match_bits,
            mismatch_bits: self.mismatch_bits - earlier.mismatch_bits,
            write_bits: self.write_bits - earlier.write_bits,
            miswrite_bits: self.miswrite_bits - earlier.miswrite_bits,
            shift_ops: self.shift_ops - earlier.shift_ops,
            shift_cycles: self.shift_cycles - earlier.shift_cycles,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Compare,
    Write,
    ReadRow,
    WriteRow,
}

/// One line of the optional operation trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seq: u64,
    pub op: OpKind,
    /// Rows selected: tagged rows for compare/write, 1 for single-row ops.
    pub tagged: usize,
    pub active_columns: usize,
    pub mask: String,
}

#[derive(Debug, Clone)]
pub struct ApArray {
    n_rows: usize,
    width: usize,
    columns: Vec<Bits>,
    key: Bits,
    mask: Bits,
    tag: Bits,
    ledger: EventLedger,
    trace: Option<Vec<TraceRecord>>,
}

impl ApArray {
    pub fn new(n_rows: usize, width: usize) -> Result<Self, ApError> {
        if n_rows == 0 || width == 0 {
            return Err(ApError::Empty);
        }
        Ok(ApArray {
            n_rows,
            width,
            columns: vec![Bits::zeros(n_rows); width],
            key: Bits::zeros(width),
            mask: Bits::zeros(width),
            tag: Bits::zeros(n_rows),
            ledger: EventLedger::default(),
            trace: None,
        })
    }

    /// Builds an array from rows of `'0'`/`'1'` characters, one row per line,
    /// MSB leftmost. Blank lines are skipped. The ledger starts at zero.
    pub fn from_text(text: &str) -> Result<Self, ApError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bits: Bits = line.parse().map_err(|source| ApError::Parse { line: i + 1, source })?;
            if let Some(first) = rows.first() {
                let first: &Bits = first;
                if bits.len() != first.len() {
                    return Err(ApError::RaggedRows { line: i + 1, expected: first.len(), actual: bits.len() });
                }
            }
            rows.push(bits);
        }
        let width = rows.first().map_or(0, Bits::len);
        let mut array = ApArray::new(rows.len(), width)?;
        for (r, bits) in rows.iter().enumerate() {
            for j in bits.iter_ones() {
                array.columns[j].set(r, true);
            }
        }
        Ok(array)
    }

    /// Dumps the cells in the same format [`ApArray::from_text`] reads.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.n_rows * (self.width + 1));
        for r in 0..self.n_rows {
            out.push_str(&self.peek_row(r).to_string());
            out.push('\n');
        }
        out
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn key(&self) -> &Bits {
        &self.key
    }

    pub fn mask(&self) -> &Bits {
        &self.mask
    }

    pub fn tag(&self) -> &Bits {
        &self.tag
    }

    pub fn ledger(&self) -> &EventLedger {
        &self.ledger
    }

    /// Tags every row whose unmasked cells equal the key.
    ///
    /// An all-zero mask ignores every column and tags all rows.
    pub fn compare(&mut self, key: &Bits, mask: &Bits) -> Result<Bits, ApError> {
        self.check_width("key", key)?;
        self.check_width("mask", mask)?;
        let mut acc = Bits::ones(self.n_rows).words().to_vec();
        for j in mask.iter_ones() {
            let col = self.columns[j].words();
            if key.get(j) {
                acc.iter_mut().zip(col).for_each(|(a, c)| *a &= c);
            } else {
                acc.iter_mut().zip(col).for_each(|(a, c)| *a &= !c);
            }
        }
        let tag = Bits::from_words(self.n_rows, acc);

        let active = mask.count_ones() as u64;
        let matched = tag.count_ones() as u64;
        let missed = self.n_rows as u64 - matched;
        let l = &mut self.ledger;
        l.cycles += 1;
        l.compares += 1;
        l.matches += matched;
        l.mismatches += missed;
        l.compare_bits += active * self.n_rows as u64;
        l.match_bits += active * matched;
        l.mismatch_bits += active * missed;

        self.key = key.clone();
        self.mask = mask.clone();
        self.tag = tag.clone();
        self.log(OpKind::Compare, matched as usize, mask);
        Ok(tag)
    }

    /// Writes the unmasked key bits into every tagged row.
    pub fn parallel_write(&mut self, key: &Bits, mask: &Bits, tag: &Bits) -> Result<(), ApError> {
        self.check_width("key", key)?;
        self.check_width("mask", mask)?;
        if tag.len() != self.n_rows {
            return Err(ApError::WidthMismatch { what: "tag", expected: self.n_rows, actual: tag.len() });
        }
        let sel = tag.words();
        for j in mask.iter_ones() {
            let col = self.columns[j].words().to_vec();
            let next = if key.get(j) {
                col.iter().zip(sel).map(|(c, t)| c | t).collect()
            } else {
                col.iter().zip(sel).map(|(c, t)| c & !t).collect()
            };
            self.columns[j] = Bits::from_words(self.n_rows, next);
        }

        let active = mask.count_ones() as u64;
        let selected = tag.count_ones() as u64;
        let l = &mut self.ledger;
        l.cycles += 1;
        l.parallel_writes += 1;
        l.write_bits += active * selected;
        l.miswrite_bits += active * (self.n_rows as u64 - selected);

        self.key = key.clone();
        self.mask = mask.clone();
        self.tag = tag.clone();
        self.log(OpKind::Write, selected as usize, mask);
        Ok(())
    }

    /// Writes the unmasked bits of `data` into one row.
    ///
    /// The other rows see their bit lines driven, so they are counted as
    /// miswrites exactly as in a parallel write with a single tagged row.
    pub fn write_row(&mut self, row: usize, data: &Bits, mask: &Bits) -> Result<(), ApError> {
        self.check_row(row)?;
        self.check_width("data", data)?;
        self.check_width("mask", mask)?;
        for j in mask.iter_ones() {
            self.columns[j].set(row, data.get(j));
        }
        let active = mask.count_ones() as u64;
        let l = &mut self.ledger;
        l.cycles += 1;
        l.row_writes += 1;
        l.write_bits += active;
        l.miswrite_bits += active * (self.n_rows as u64 - 1);
        self.log(OpKind::WriteRow, 1, mask);
        Ok(())
    }

    /// Reads one row; masked-out positions read as 0.
    pub fn read_row(&mut self, row: usize, mask: &Bits) -> Result<Bits, ApError> {
        self.check_row(row)?;
        self.check_width("mask", mask)?;
        let out = Bits::from_indices(self.width, mask.iter_ones().filter(|&j| self.columns[j].get(row)));
        let l = &mut self.ledger;
        l.cycles += 1;
        l.row_reads += 1;
        self.log(OpKind::ReadRow, 1, mask);
        Ok(out)
    }

    /// Zeroes the ledger and returns its previous contents.
    pub fn reset_ledger(&mut self) -> EventLedger {
        std::mem::take(&mut self.ledger)
    }

    /// Attributes the cycles spent since `before` to one row-shift operation.
    pub(crate) fn record_shift(&mut self, before: &EventLedger) {
        let spent = self.ledger.cycles - before.cycles;
        self.ledger.shift_ops += 1;
        self.ledger.shift_cycles += spent;
    }

    /// Starts recording a [`TraceRecord`] per operation.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    // Inspection helpers below read cell state directly. They model no
    // hardware operation and cost no cycles; tests and host-side readout
    // use them.

    pub fn peek(&self, row: usize, col: usize) -> bool {
        self.columns[col].get(row)
    }

    pub fn peek_row(&self, row: usize) -> Bits {
        Bits::from_indices(self.width, (0..self.width).filter(|&j| self.columns[j].get(row)))
    }

    pub fn peek_column(&self, col: usize) -> &Bits {
        &self.columns[col]
    }

    /// Unsigned value of columns `[offset, offset + width)` in `row`.
    pub fn peek_value(&self, row: usize, offset: usize, width: usize) -> u128 {
        assert!(width <= 128);
        (0..width).fold(0u128, |acc, i| acc | ((self.columns[offset + i].get(row) as u128) << i))
    }

    fn check_width(&self, what: &'static str, b: &Bits) -> Result<(), ApError> {
        if b.len() != self.width {
            return Err(ApError::WidthMismatch { what, expected: self.width, actual: b.len() });
        }
        Ok(())
    }

    fn check_row(&self, row: usize) -> Result<(), ApError> {
        if row >= self.n_rows {
            return Err(ApError::RowOutOfRange { row, n_rows: self.n_rows });
        }
        Ok(())
    }

    fn log(&mut self, op: OpKind, tagged: usize, mask: &Bits) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRecord {
                seq: trace.len() as u64,
                op,
                tagged,
                active_columns: mask.count_ones(),
                mask: mask.to_string(),
            });
        }
    }
}
