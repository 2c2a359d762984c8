// SPDX-License-Identifier: Apache-2.0

//! Compiles truth tables into soft logic circuits.
//!
//! The pipeline runs in stages, each with its own intermediate form:
//!
//! 1. [`truthtable`] parses a table and extracts its canonical sum of products.
//! 2. [`minimize`] reduces it to a minimal two-level [`Expr`].
//! 3. [`netlist`] lowers the expression to 1- and 2-input gates of a
//!    [`LogicFamily`] and reports gate counts and propagation delay.
//! 4. [`layout`] places gates on a grid, paginates, and renders SVG.
//! 5. [`sim`] checks the netlist against the table, functionally and with
//!    gate delays.
//!
//! [`pipeline::compile_pipeline`] runs all of them in order.

pub mod expr;
pub mod family;
pub mod layout;
pub mod minimize;
pub mod netlist;
pub mod pipeline;
pub mod sim;
pub mod truthtable;

pub use expr::{Assignment, Expr};
pub use family::{family_registry, lookup_family, GateType, LogicFamily};
pub use layout::Schematic;
pub use minimize::{minimize, Implicant};
pub use netlist::{CircuitReport, Net, Netlist};
pub use pipeline::{compile_pipeline, CompileOptions, CompileResult};
pub use truthtable::{Minterms, OutputBit, TruthTable};
