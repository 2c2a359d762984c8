// SPDX-License-Identifier: Apache-2.0

//! Soft logic families: which gates a technology offers, what each costs,
//! how long it takes to switch, and how it is drawn.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateType {
    #[serde(rename = "NOT")]
    Not,
    #[serde(rename = "AND2")]
    And2,
    #[serde(rename = "OR2")]
    Or2,
    #[serde(rename = "NAND2")]
    Nand2,
}

impl GateType {
    pub const ALL: [GateType; 4] = [GateType::Not, GateType::And2, GateType::Or2, GateType::Nand2];

    pub fn arity(self) -> usize {
        match self {
            GateType::Not => 1,
            GateType::And2 | GateType::Or2 | GateType::Nand2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateType::Not => "NOT",
            GateType::And2 => "AND2",
            GateType::Or2 => "OR2",
            GateType::Nand2 => "NAND2",
        }
    }

    pub fn apply(self, inputs: &[bool]) -> bool {
        match self {
            GateType::Not => !inputs[0],
            GateType::And2 => inputs[0] && inputs[1],
            GateType::Or2 => inputs[0] || inputs[1],
            GateType::Nand2 => !(inputs[0] && inputs[1]),
        }
    }
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Abstract delay units.
pub type Delay = u64;

/// One port arrow on a gate glyph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortLabel {
    pub name: String,
    /// Assembly hint drawn beside the arrow, e.g. `T` or `B`.
    pub annotation: String,
}

/// Drawing metadata for one gate type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Glyph {
    pub label: String,
    pub fill: String,
    pub stroke: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSpec {
    pub device_cost: u32,
    pub delay: Delay,
    /// Input ports in order, then the output port.
    pub ports: Vec<PortLabel>,
    pub glyph: Glyph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicFamily {
    pub id: String,
    pub display_name: String,
    pub gates: BTreeMap<GateType, GateSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("unknown logic family {0:?}")]
    UnknownFamily(String),
    #[error("family {family}: gate {gate} is invalid: {reason}")]
    InvalidGate {
        family: String,
        gate: GateType,
        reason: String,
    },
    #[error("family definition is not valid JSON: {0}")]
    Json(String),
}

impl LogicFamily {
    pub fn supports(&self, gate: GateType) -> bool {
        self.gates.contains_key(&gate)
    }

    pub fn gate_types(&self) -> impl Iterator<Item = GateType> + '_ {
        self.gates.keys().copied()
    }

    pub fn spec(&self, gate: GateType) -> Option<&GateSpec> {
        self.gates.get(&gate)
    }

    pub fn device_cost(&self, gate: GateType) -> Option<u32> {
        self.spec(gate).map(|s| s.device_cost)
    }

    pub fn delay(&self, gate: GateType) -> Option<Delay> {
        self.spec(gate).map(|s| s.delay)
    }

    /// Returns a copy with every gate's delay replaced by `delay(gate)`.
    pub fn with_delays(mut self, delay: impl Fn(GateType) -> Delay) -> Self {
        for (gate, spec) in self.gates.iter_mut() {
            spec.delay = delay(*gate);
        }
        self
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        for (&gate, spec) in &self.gates {
            let fail = |reason: String| FamilyError::InvalidGate {
                family: self.id.clone(),
                gate,
                reason,
            };
            if spec.device_cost < 1 {
                return Err(fail("device cost must be at least 1".into()));
            }
            if spec.delay == 0 {
                return Err(fail("delay must be positive".into()));
            }
            if spec.ports.len() != gate.arity() + 1 {
                return Err(fail(format!(
                    "expected {} port labels, found {}",
                    gate.arity() + 1,
                    spec.ports.len()
                )));
            }
        }
        Ok(())
    }

    /// Parses and validates a family definition, e.g. one carrying measured
    /// delays.
    pub fn from_json(text: &str) -> Result<Self, FamilyError> {
        let family: LogicFamily =
            serde_json::from_str(text).map_err(|e| FamilyError::Json(e.to_string()))?;
        family.validate()?;
        Ok(family)
    }
}

fn port(name: &str, annotation: &str) -> PortLabel {
    PortLabel {
        name: name.to_string(),
        annotation: annotation.to_string(),
    }
}

fn two_input(label: &str, fill: &str) -> GateSpec {
    GateSpec {
        device_cost: 1,
        delay: 1,
        ports: vec![port("in0", "T"), port("in1", "B"), port("out", "")],
        glyph: Glyph {
            label: label.to_string(),
            fill: fill.to_string(),
            stroke: "#b22222".to_string(),
        },
    }
}

fn soft_bistable_valve() -> LogicFamily {
    let not = GateSpec {
        device_cost: 1,
        delay: 1,
        ports: vec![port("in0", "T"), port("out", "")],
        glyph: Glyph {
            label: "NOT".to_string(),
            fill: "#fde2e2".to_string(),
            stroke: "#b22222".to_string(),
        },
    };
    LogicFamily {
        id: "sbv".to_string(),
        display_name: "Soft bistable valve".to_string(),
        gates: BTreeMap::from([
            (GateType::Not, not),
            (GateType::And2, two_input("AND", "#e2ecfd")),
            (GateType::Or2, two_input("OR", "#e4f7e2")),
        ]),
    }
}

fn nand_demo() -> LogicFamily {
    LogicFamily {
        id: "nand-demo".to_string(),
        display_name: "NAND demonstration device".to_string(),
        gates: BTreeMap::from([(GateType::Nand2, two_input("NAND", "#f3e8fb"))]),
    }
}

static REGISTRY: LazyLock<Vec<LogicFamily>> =
    LazyLock::new(|| vec![soft_bistable_valve(), nand_demo()]);

/// Built-in families, `sbv` first.
pub fn family_registry() -> &'static [LogicFamily] {
    &REGISTRY
}

pub fn lookup_family(id: &str) -> Result<&'static LogicFamily, FamilyError> {
    REGISTRY
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| FamilyError::UnknownFamily(id.to_string()))
}
