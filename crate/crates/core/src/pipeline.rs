// SPDX-License-Identifier: Apache-2.0

//! The full compile: table to verified, drawn circuit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::{lookup_family, FamilyError, GateType, LogicFamily};
use crate::layout::{paginate, place_named, render_svg, LayoutError, Schematic};
use crate::minimize::minimize;
use crate::netlist::{map_to_nand, report, synthesize_with_inputs, CircuitReport, Netlist, NetlistError};
use crate::sim::{verify, SimError, Verification};
use crate::truthtable::{extract_sop, to_minterms, TableDoc, TableError, TruthTable};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CompileOptions {
    /// `(cols, rows)` page limit; `None` draws everything on one page.
    pub window: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileResult {
    pub family: String,
    pub output_name: String,
    pub unoptimized_expression: String,
    pub optimized_expression: String,
    pub netlist: Netlist,
    pub schematic: Schematic,
    pub svg_pages: Vec<String>,
    pub report: CircuitReport,
    pub verified: bool,
}

impl CompileResult {
    /// Canonical serialized form, shared by the CLI and the service.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("result serializes");
        text.push('\n');
        text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("bad request: {0}")]
    Request(String),
    #[error("simulation failed: {0}")]
    Simulation(#[from] SimError),
    #[error("compiled circuit disagrees with the table at row {row} ({bits}): expected {expected}, got {got}")]
    InternalVerificationFailure {
        row: u32,
        bits: String,
        expected: bool,
        got: bool,
    },
}

impl CompileError {
    /// Stable machine-readable error name.
    pub fn code(&self) -> &'static str {
        match self {
            CompileError::Table(e) => e.code(),
            CompileError::Family(FamilyError::UnknownFamily(_)) => "UnknownFamily",
            CompileError::Family(FamilyError::InvalidGate { .. }) => "InvalidFamily",
            CompileError::Family(FamilyError::Json(_)) => "InvalidFamily",
            CompileError::Netlist(NetlistError::UnsupportedGate { .. }) => "UnsupportedGate",
            CompileError::Netlist(_) => "InvalidNetlist",
            CompileError::Layout(LayoutError::WindowTooSmall { .. }) => "WindowTooSmall",
            CompileError::Layout(LayoutError::Malformed(_)) => "MalformedSchematic",
            CompileError::Request(_) => "BadRequest",
            CompileError::Simulation(_) => "SimulationError",
            CompileError::InternalVerificationFailure { .. } => "InternalVerificationFailure",
        }
    }

    /// HTTP status for the service: 404 for an unknown family, 500 for
    /// compiler faults, 400 for everything the caller can fix.
    pub fn http_status(&self) -> u16 {
        match self {
            CompileError::Family(FamilyError::UnknownFamily(_)) => 404,
            CompileError::InternalVerificationFailure { .. } | CompileError::Simulation(_) => 500,
            _ => 400,
        }
    }

    /// True for faults in the compiler itself rather than in its input.
    pub fn is_internal(&self) -> bool {
        self.http_status() == 500
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.code(), "message": self.to_string() }).to_string()
    }
}

/// Page limit in a request body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDoc {
    pub cols: u32,
    pub rows: u32,
}

fn default_family() -> String {
    "sbv".to_string()
}

/// Structured table plus compile settings, as posted to the service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileRequest {
    #[serde(flatten)]
    pub table: TableDoc,
    #[serde(default = "default_family")]
    pub family: String,
    /// Output column name; the first column when absent.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub window: Option<WindowDoc>,
}

impl CompileRequest {
    pub fn from_json(text: &str) -> Result<Self, CompileError> {
        serde_json::from_str(text).map_err(|e| CompileError::Request(e.to_string()))
    }

    pub fn compile(self) -> Result<CompileResult, CompileError> {
        let table = self.table.into_table()?;
        let index = match &self.output {
            Some(name) => table.output_index(name)?,
            None => 0,
        };
        let options = CompileOptions {
            window: self.window.map(|w| (w.cols, w.rows)),
        };
        compile_pipeline(&table, index, &self.family, options)
    }
}

fn has_basic_gates(f: &LogicFamily) -> bool {
    [GateType::Not, GateType::And2, GateType::Or2]
        .iter()
        .all(|&g| f.supports(g))
}

/// Lowers `e` to gates of `family`. Families without NOT/AND2/OR2 but with
/// NAND2 go through the `sbv` basis and are then rewritten to NAND.
fn lower(e: &crate::Expr, family: &LogicFamily, inputs: &[String]) -> Result<Netlist, CompileError> {
    if has_basic_gates(family) || !family.supports(GateType::Nand2) {
        return Ok(synthesize_with_inputs(e, family, inputs)?);
    }
    let basis = lookup_family("sbv")?;
    Ok(map_to_nand(&synthesize_with_inputs(e, basis, inputs)?, family)?)
}

/// Compiles output column `output_index` of `t` for the family `family_id`.
///
/// Runs extraction, minimization, synthesis of both the canonical and the
/// minimized form, placement, optional pagination, rendering, reporting
/// and exhaustive verification. A verification mismatch is returned as
/// [`CompileError::InternalVerificationFailure`].
pub fn compile_pipeline(
    t: &TruthTable,
    output_index: usize,
    family_id: &str,
    options: CompileOptions,
) -> Result<CompileResult, CompileError> {
    let family = lookup_family(family_id)?;
    let minterms = to_minterms(t, output_index)?;
    let names = t.input_names();
    let output_name = t.output_names()[output_index].clone();

    let sop = extract_sop(&minterms, names);
    let optimized = minimize(&minterms, names);
    let unoptimized_netlist = lower(&sop, family, names)?;
    let netlist = lower(&optimized, family, names)?;

    let mut schematic = place_named(&netlist, &output_name);
    if let Some((cols, rows)) = options.window {
        schematic = paginate(&schematic, cols, rows)?;
    }
    let svg_pages = render_svg(&schematic, family);
    let report = report(&netlist, &unoptimized_netlist, family)?;

    if let Verification::Fail {
        row,
        bits,
        expected,
        got,
    } = verify(&netlist, t, output_index)?
    {
        return Err(CompileError::InternalVerificationFailure {
            row,
            bits,
            expected,
            got,
        });
    }

    Ok(CompileResult {
        family: family.id.clone(),
        output_name,
        unoptimized_expression: sop.to_string(),
        optimized_expression: optimized.to_string(),
        netlist,
        schematic,
        svg_pages,
        report,
        verified: true,
    })
}
