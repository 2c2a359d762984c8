// SPDX-License-Identifier: Apache-2.0

//! Truth tables, their text and JSON forms, and canonical SOP extraction.
//!
//! Input names map left-to-right onto the most- to least-significant bits
//! of a row index, so row `0 1 1` over `A B C` is row 3.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;

/// Inputs are limited so exact minimization stays tractable.
pub const MAX_INPUTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("expected {expected} rows, found {found}")]
    MissingRow { expected: usize, found: usize },
    #[error("input pattern {pattern} appears more than once")]
    DuplicateRow { pattern: String },
    #[error("line {line}: bad symbol {symbol:?}, expected 0, 1 or X")]
    BadSymbol { line: usize, symbol: String },
    #[error("bad name {0:?}")]
    BadName(String),
    #[error("name {0:?} is declared twice")]
    DuplicateName(String),
    #[error("{0} inputs requested, at most {MAX_INPUTS} are supported")]
    TooManyInputs(usize),
    #[error("a table needs at least one input and one output")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("output index {index} out of range ({count} outputs)")]
    OutputIndex { index: usize, count: usize },
    #[error("no output column named {0:?}")]
    UnknownOutput(String),
}

impl TableError {
    /// Stable machine-readable name of the error variant.
    pub fn code(&self) -> &'static str {
        match self {
            TableError::MissingRow { .. } => "MissingRow",
            TableError::DuplicateRow { .. } => "DuplicateRow",
            TableError::BadSymbol { .. } => "BadSymbol",
            TableError::BadName(_) => "BadName",
            TableError::DuplicateName(_) => "DuplicateName",
            TableError::TooManyInputs(_) => "TooManyInputs",
            TableError::Empty => "EmptyTable",
            TableError::Syntax { .. } => "SyntaxError",
            TableError::OutputIndex { .. } => "OutputIndex",
            TableError::UnknownOutput(_) => "UnknownOutput",
        }
    }
}

/// One output cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputBit {
    Zero,
    One,
    DontCare,
}

impl OutputBit {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(OutputBit::Zero),
            '1' => Some(OutputBit::One),
            'X' | 'x' => Some(OutputBit::DontCare),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            OutputBit::Zero => '0',
            OutputBit::One => '1',
            OutputBit::DontCare => 'X',
        }
    }

    /// The bit value, or `None` for a don't-care.
    pub fn value(self) -> Option<bool> {
        match self {
            OutputBit::Zero => Some(false),
            OutputBit::One => Some(true),
            OutputBit::DontCare => None,
        }
    }
}

impl From<bool> for OutputBit {
    fn from(b: bool) -> Self {
        if b {
            OutputBit::One
        } else {
            OutputBit::Zero
        }
    }
}

/// Returns true if `name` matches `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A fully specified truth table in canonical row order.
///
/// `rows[i]` holds the output cells for input pattern `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    input_names: Vec<String>,
    output_names: Vec<String>,
    rows: Vec<Vec<OutputBit>>,
}

impl TruthTable {
    /// Builds a table from rows given in any order as `(input pattern, outputs)`.
    pub fn new(
        input_names: Vec<String>,
        output_names: Vec<String>,
        rows: Vec<(u32, Vec<OutputBit>)>,
    ) -> Result<Self, TableError> {
        if input_names.is_empty() || output_names.is_empty() {
            return Err(TableError::Empty);
        }
        if input_names.len() > MAX_INPUTS {
            return Err(TableError::TooManyInputs(input_names.len()));
        }
        let mut seen = HashSet::new();
        for name in input_names.iter().chain(&output_names) {
            if !is_identifier(name) {
                return Err(TableError::BadName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(TableError::DuplicateName(name.clone()));
            }
        }

        let n = input_names.len();
        let expected = 1usize << n;
        let mut slots: Vec<Option<Vec<OutputBit>>> = vec![None; expected];
        for (pattern, outputs) in rows.iter() {
            let idx = *pattern as usize;
            if idx >= expected {
                return Err(TableError::Syntax {
                    line: 0,
                    message: format!("input pattern {pattern} does not fit {n} inputs"),
                });
            }
            if outputs.len() != output_names.len() {
                return Err(TableError::Syntax {
                    line: 0,
                    message: format!(
                        "row {} has {} outputs, expected {}",
                        format_bits(*pattern, n),
                        outputs.len(),
                        output_names.len()
                    ),
                });
            }
            if slots[idx].is_some() {
                return Err(TableError::DuplicateRow {
                    pattern: format_bits(*pattern, n),
                });
            }
            slots[idx] = Some(outputs.clone());
        }
        if rows.len() != expected {
            return Err(TableError::MissingRow {
                expected,
                found: rows.len(),
            });
        }

        Ok(TruthTable {
            input_names,
            output_names,
            rows: slots.into_iter().map(|r| r.unwrap()).collect(),
        })
    }

    /// Builds a single-output table from a function over row indices.
    pub fn from_fn(
        input_names: &[&str],
        output_name: &str,
        f: impl Fn(u32) -> OutputBit,
    ) -> Result<Self, TableError> {
        let n = input_names.len();
        if n > MAX_INPUTS {
            return Err(TableError::TooManyInputs(n));
        }
        let rows = (0..1u32 << n).map(|i| (i, vec![f(i)])).collect();
        TruthTable::new(
            input_names.iter().map(|s| s.to_string()).collect(),
            vec![output_name.to_string()],
            rows,
        )
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    pub fn input_count(&self) -> usize {
        self.input_names.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Output cell of `row` in column `output`.
    pub fn output(&self, row: u32, output: usize) -> OutputBit {
        self.rows[row as usize][output]
    }

    /// Input bits of `row`, most significant (first input) first.
    pub fn input_bits(&self, row: u32) -> Vec<bool> {
        let n = self.input_count();
        (0..n).map(|i| row >> (n - 1 - i) & 1 == 1).collect()
    }

    pub fn output_index(&self, name: &str) -> Result<usize, TableError> {
        self.output_names
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| TableError::UnknownOutput(name.to_string()))
    }

    /// Serializes to the canonical text form; `parse_truth_table` inverts it.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} | {}\n",
            self.input_names.join(" "),
            self.output_names.join(" ")
        );
        for (i, outputs) in self.rows.iter().enumerate() {
            let ins: Vec<String> = self
                .input_bits(i as u32)
                .iter()
                .map(|&b| if b { "1" } else { "0" }.to_string())
                .collect();
            let outs: Vec<String> = outputs.iter().map(|b| b.as_char().to_string()).collect();
            out.push_str(&format!("{} | {}\n", ins.join(" "), outs.join(" ")));
        }
        out
    }

    pub fn to_doc(&self) -> TableDoc {
        TableDoc {
            inputs: self.input_names.clone(),
            outputs: self.output_names.clone(),
            rows: self
                .rows
                .iter()
                .enumerate()
                .map(|(i, outs)| RowDoc {
                    input: format_bits(i as u32, self.input_count()),
                    output: outs.iter().map(|b| b.as_char()).collect(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn format_bits(value: u32, width: usize) -> String {
    (0..width)
        .map(|i| if value >> (width - 1 - i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Structured (JSON) form of a truth table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDoc {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub rows: Vec<RowDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDoc {
    #[serde(rename = "in")]
    pub input: String,
    #[serde(rename = "out")]
    pub output: String,
}

impl TableDoc {
    pub fn into_table(self) -> Result<TruthTable, TableError> {
        if self.inputs.len() > MAX_INPUTS {
            return Err(TableError::TooManyInputs(self.inputs.len()));
        }
        let n = self.inputs.len();
        let mut rows = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            let line = i + 1;
            let pattern = parse_pattern(row.input.chars(), n, line)?;
            let outputs = row
                .output
                .chars()
                .map(|c| {
                    OutputBit::from_char(c).ok_or_else(|| TableError::BadSymbol {
                        line,
                        symbol: c.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((pattern, outputs));
        }
        TruthTable::new(self.inputs, self.outputs, rows)
    }
}

fn parse_pattern(
    chars: impl Iterator<Item = char>,
    width: usize,
    line: usize,
) -> Result<u32, TableError> {
    let mut value = 0u32;
    let mut count = 0;
    for c in chars {
        let bit = match c {
            '0' => 0,
            '1' => 1,
            _ => {
                return Err(TableError::BadSymbol {
                    line,
                    symbol: c.to_string(),
                })
            }
        };
        value = value << 1 | bit;
        count += 1;
    }
    if count != width {
        return Err(TableError::Syntax {
            line,
            message: format!("expected {width} input bits, found {count}"),
        });
    }
    Ok(value)
}

/// Parses the text form (`A B C | Q` header, `0 0 1 | 1` rows) or, if the
/// document starts with `{`, the JSON form.
pub fn parse_truth_table(text: &str) -> Result<TruthTable, TableError> {
    if text.trim_start().starts_with('{') {
        let doc: TableDoc = serde_json::from_str(text).map_err(|e| TableError::Syntax {
            line: e.line(),
            message: e.to_string(),
        })?;
        return doc.into_table();
    }

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(TableError::Empty)?;
    let (ins, outs) = split_bar(header, hline)?;
    let input_names: Vec<String> = ins.split_whitespace().map(str::to_string).collect();
    let output_names: Vec<String> = outs.split_whitespace().map(str::to_string).collect();
    if input_names.len() > MAX_INPUTS {
        return Err(TableError::TooManyInputs(input_names.len()));
    }
    if input_names.is_empty() || output_names.is_empty() {
        return Err(TableError::Empty);
    }

    let n = input_names.len();
    let mut rows = Vec::new();
    for (line, l) in lines {
        let (ins, outs) = split_bar(l, line)?;
        let pattern = parse_pattern(ins.split_whitespace().flat_map(str::chars), n, line)?;
        let outputs = outs
            .split_whitespace()
            .flat_map(str::chars)
            .map(|c| {
                OutputBit::from_char(c).ok_or_else(|| TableError::BadSymbol {
                    line,
                    symbol: c.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if outputs.len() != output_names.len() {
            return Err(TableError::Syntax {
                line,
                message: format!(
                    "expected {} output cells, found {}",
                    output_names.len(),
                    outputs.len()
                ),
            });
        }
        rows.push((pattern, outputs));
    }
    TruthTable::new(input_names, output_names, rows)
}

fn split_bar(line: &str, number: usize) -> Result<(&str, &str), TableError> {
    let mut parts = line.splitn(3, '|');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(TableError::Syntax {
            line: number,
            message: "expected exactly one '|' separator".to_string(),
        }),
    }
}

/// On-set and don't-care set of one output column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Minterms {
    pub n: usize,
    pub on_set: BTreeSet<u32>,
    pub dc_set: BTreeSet<u32>,
}

impl Minterms {
    pub fn new(
        n: usize,
        on_set: impl IntoIterator<Item = u32>,
        dc_set: impl IntoIterator<Item = u32>,
    ) -> Self {
        let on_set: BTreeSet<u32> = on_set.into_iter().collect();
        let dc_set: BTreeSet<u32> = dc_set.into_iter().collect();
        assert!(n <= MAX_INPUTS, "at most {MAX_INPUTS} inputs");
        assert!(on_set.is_disjoint(&dc_set), "on-set and dc-set overlap");
        assert!(
            on_set.iter().chain(&dc_set).all(|&m| m < 1 << n),
            "minterm out of range"
        );
        Minterms { n, on_set, dc_set }
    }

    /// Rows whose output is 0.
    pub fn off_set(&self) -> BTreeSet<u32> {
        (0..1u32 << self.n)
            .filter(|m| !self.on_set.contains(m) && !self.dc_set.contains(m))
            .collect()
    }

    pub fn is_care(&self, row: u32) -> bool {
        !self.dc_set.contains(&row)
    }
}

pub fn to_minterms(table: &TruthTable, output_index: usize) -> Result<Minterms, TableError> {
    let count = table.output_names().len();
    if output_index >= count {
        return Err(TableError::OutputIndex {
            index: output_index,
            count,
        });
    }
    let mut on_set = BTreeSet::new();
    let mut dc_set = BTreeSet::new();
    for row in 0..table.row_count() as u32 {
        match table.output(row, output_index) {
            OutputBit::One => {
                on_set.insert(row);
            }
            OutputBit::DontCare => {
                dc_set.insert(row);
            }
            OutputBit::Zero => {}
        }
    }
    Ok(Minterms {
        n: table.input_count(),
        on_set,
        dc_set,
    })
}

/// The product of all inputs matching row `row`, negated where the bit is 0.
pub fn minterm_product(row: u32, input_names: &[String]) -> Expr {
    let n = input_names.len();
    let literals = input_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let var = Expr::var(name);
            if row >> (n - 1 - i) & 1 == 1 {
                var
            } else {
                Expr::not(var)
            }
        })
        .collect();
    Expr::and(literals)
}

/// Canonical sum of products: one full-width product per on-set row, in
/// ascending row order.
pub fn extract_sop(m: &Minterms, input_names: &[String]) -> Expr {
    assert_eq!(m.n, input_names.len(), "input name count must match width");
    Expr::or(
        m.on_set
            .iter()
            .map(|&row| minterm_product(row, input_names))
            .collect(),
    )
}
