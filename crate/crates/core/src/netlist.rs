// SPDX-License-Identifier: Apache-2.0

//! Gate-level netlists of 1- and 2-input gates.
//!
//! Synthesis maps an [`Expr`] onto a tree of gates: every `Not` becomes its
//! own NOT gate and n-ary `And`/`Or` nodes become balanced binary trees.
//! Literals are never shared, so each gate output feeds exactly one gate.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::expr::Expr;
use crate::family::{Delay, GateType, LogicFamily};

/// A wire. Inputs and gate outputs are numbered; the two rails are
/// constant pressure sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Net {
    Id(u32),
    /// Always high.
    Supply,
    /// Always low.
    Atmosphere,
}

impl Net {
    pub fn is_rail(self) -> bool {
        !matches!(self, Net::Id(_))
    }

    pub fn rail(level: bool) -> Net {
        if level {
            Net::Supply
        } else {
            Net::Atmosphere
        }
    }
}

impl fmt::Display for Net {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Net::Id(i) => write!(f, "n{i}"),
            Net::Supply => f.write_str("SUPPLY"),
            Net::Atmosphere => f.write_str("ATMOSPHERE"),
        }
    }
}

impl FromStr for Net {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SUPPLY" => Ok(Net::Supply),
            "ATMOSPHERE" => Ok(Net::Atmosphere),
            _ => s
                .strip_prefix('n')
                .and_then(|d| d.parse().ok())
                .map(Net::Id)
                .ok_or_else(|| format!("bad net id {s:?}")),
        }
    }
}

impl Serialize for Net {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Net {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GateId(pub u32);

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

impl Serialize for GateId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GateId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.strip_prefix('g')
            .and_then(|n| n.parse().ok())
            .map(GateId)
            .ok_or_else(|| serde::de::Error::custom(format!("bad gate id {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetInput {
    pub name: String,
    pub net: Net,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    #[serde(rename = "type")]
    pub kind: GateType,
    #[serde(rename = "in")]
    pub inputs: Vec<Net>,
    #[serde(rename = "out")]
    pub output: Net,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    pub family: String,
    pub inputs: Vec<NetInput>,
    pub output: Net,
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("family {family} has no {gate} gate")]
    UnsupportedGate { family: String, gate: GateType },
    #[error("expression uses {0:?}, which is not a declared input")]
    UnknownVariable(String),
    #[error("netlist targets family {found}, expected {expected}")]
    FamilyMismatch { expected: String, found: String },
    #[error("invalid netlist: {0}")]
    Invalid(String),
    #[error("netlist is not valid JSON: {0}")]
    Json(String),
}

impl Netlist {
    pub fn input_net(&self, name: &str) -> Option<Net> {
        self.inputs.iter().find(|i| i.name == name).map(|i| i.net)
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|i| i.name.clone()).collect()
    }

    pub fn gate(&self, id: GateId) -> Option<&Gate> {
        self.gates.iter().find(|g| g.id == id)
    }

    /// The gate driving `net`, if any.
    pub fn driver(&self, net: Net) -> Option<&Gate> {
        self.gates.iter().find(|g| g.output == net)
    }

    /// Gate indices in dependency order.
    pub fn topo_order(&self) -> Result<Vec<usize>, NetlistError> {
        let driver: HashMap<Net, usize> = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| (g.output, i))
            .collect();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.gates.len()];
        let mut order = Vec::with_capacity(self.gates.len());
        for root in 0..self.gates.len() {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some((g, pin)) = stack.pop() {
                if let Some(&net) = self.gates[g].inputs.get(pin) {
                    stack.push((g, pin + 1));
                    if let Some(&d) = driver.get(&net) {
                        match state[d] {
                            0 => {
                                state[d] = 1;
                                stack.push((d, 0));
                            }
                            1 => {
                                return Err(NetlistError::Invalid(format!(
                                    "cycle through gate {}",
                                    self.gates[d].id
                                )))
                            }
                            _ => {}
                        }
                    }
                } else {
                    state[g] = 2;
                    order.push(g);
                }
            }
        }
        Ok(order)
    }

    /// Checks structure, and gate types against `family` when given.
    pub fn validate(&self, family: Option<&LogicFamily>) -> Result<(), NetlistError> {
        let invalid = |m: String| Err(NetlistError::Invalid(m));
        if let Some(f) = family {
            if f.id != self.family {
                return Err(NetlistError::FamilyMismatch {
                    expected: f.id.clone(),
                    found: self.family.clone(),
                });
            }
        }

        let mut driven: HashSet<Net> = HashSet::new();
        let mut names = HashSet::new();
        for input in &self.inputs {
            if input.net.is_rail() {
                return invalid(format!("input {} is bound to a rail", input.name));
            }
            if !names.insert(&input.name) {
                return invalid(format!("input {} declared twice", input.name));
            }
            if !driven.insert(input.net) {
                return invalid(format!("net {} driven twice", input.net));
            }
        }
        let mut ids = HashSet::new();
        for g in &self.gates {
            if !ids.insert(g.id) {
                return invalid(format!("gate id {} used twice", g.id));
            }
            if g.inputs.len() != g.kind.arity() {
                return invalid(format!(
                    "gate {} ({}) has {} inputs",
                    g.id,
                    g.kind,
                    g.inputs.len()
                ));
            }
            if g.output.is_rail() {
                return invalid(format!("gate {} drives a rail", g.id));
            }
            if !driven.insert(g.output) {
                return invalid(format!("net {} driven twice", g.output));
            }
            if let Some(f) = family {
                if !f.supports(g.kind) {
                    return Err(NetlistError::UnsupportedGate {
                        family: f.id.clone(),
                        gate: g.kind,
                    });
                }
            }
        }

        let gate_outputs: HashSet<Net> = self.gates.iter().map(|g| g.output).collect();
        let mut readers: HashMap<Net, usize> = HashMap::new();
        for g in &self.gates {
            let distinct: HashSet<Net> = g.inputs.iter().copied().collect();
            for net in distinct {
                if !net.is_rail() && !driven.contains(&net) {
                    return invalid(format!("gate {} reads undriven net {net}", g.id));
                }
                *readers.entry(net).or_default() += 1;
            }
        }
        if !self.output.is_rail() && !driven.contains(&self.output) {
            return invalid(format!("output net {} is undriven", self.output));
        }
        for &net in &gate_outputs {
            let expected = usize::from(net != self.output);
            let found = readers.get(&net).copied().unwrap_or(0);
            if found != expected {
                return invalid(format!(
                    "gate output {net} has {found} readers, expected {expected}"
                ));
            }
        }
        self.topo_order().map(|_| ())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetlistError> {
        let n: Netlist =
            serde_json::from_str(text).map_err(|e| NetlistError::Json(e.to_string()))?;
        n.validate(None)?;
        Ok(n)
    }
}

struct Builder<'a> {
    family: &'a LogicFamily,
    inputs: HashMap<&'a str, Net>,
    next_net: u32,
    gates: Vec<Gate>,
}

impl Builder<'_> {
    fn emit(&mut self, kind: GateType, inputs: Vec<Net>) -> Result<Net, NetlistError> {
        if !self.family.supports(kind) {
            return Err(NetlistError::UnsupportedGate {
                family: self.family.id.clone(),
                gate: kind,
            });
        }
        let output = Net::Id(self.next_net);
        self.next_net += 1;
        self.gates.push(Gate {
            id: GateId(self.gates.len() as u32),
            kind,
            inputs,
            output,
        });
        Ok(output)
    }

    fn build(&mut self, e: &Expr) -> Result<Net, NetlistError> {
        match e {
            Expr::Const(b) => Ok(Net::rail(*b)),
            Expr::Var(name) => self
                .inputs
                .get(name.as_str())
                .copied()
                .ok_or_else(|| NetlistError::UnknownVariable(name.clone())),
            Expr::Not(child) => {
                let a = self.build(child)?;
                self.emit(GateType::Not, vec![a])
            }
            Expr::And(children) => self.balanced(children, GateType::And2),
            Expr::Or(children) => self.balanced(children, GateType::Or2),
        }
    }

    /// Binary tree over `children`, left half at least as large as the right.
    fn balanced(&mut self, children: &[Expr], kind: GateType) -> Result<Net, NetlistError> {
        match children {
            [] => Ok(Net::rail(kind == GateType::And2)),
            [only] => self.build(only),
            _ => {
                let mid = children.len().div_ceil(2);
                let left = self.balanced(&children[..mid], kind)?;
                let right = self.balanced(&children[mid..], kind)?;
                self.emit(kind, vec![left, right])
            }
        }
    }
}

/// Synthesizes `e` with its variables, in order of first occurrence, as
/// the netlist inputs.
pub fn synthesize(e: &Expr, family: &LogicFamily) -> Result<Netlist, NetlistError> {
    synthesize_with_inputs(e, family, &e.variables())
}

/// Synthesizes `e` over the declared `inputs`; inputs that `e` does not use
/// stay unconnected.
pub fn synthesize_with_inputs(
    e: &Expr,
    family: &LogicFamily,
    inputs: &[String],
) -> Result<Netlist, NetlistError> {
    let mut b = Builder {
        family,
        inputs: inputs
            .iter()
            .enumerate()
            .map(|(i, name)| (name.as_str(), Net::Id(i as u32)))
            .collect(),
        next_net: inputs.len() as u32,
        gates: Vec::new(),
    };
    let output = b.build(e)?;
    Ok(Netlist {
        family: family.id.clone(),
        inputs: inputs
            .iter()
            .enumerate()
            .map(|(i, name)| NetInput {
                name: name.clone(),
                net: Net::Id(i as u32),
            })
            .collect(),
        output,
        gates: b.gates,
    })
}

/// Number of instances of each gate type.
pub fn gate_counts(n: &Netlist) -> BTreeMap<GateType, usize> {
    let mut counts = BTreeMap::new();
    for g in &n.gates {
        *counts.entry(g.kind).or_insert(0) += 1;
    }
    counts
}

/// Devices needed for `counts` in `family`. Gate types the family lacks
/// count as one device each.
pub fn total_devices(counts: &BTreeMap<GateType, usize>, family: &LogicFamily) -> u64 {
    counts
        .iter()
        .map(|(g, &c)| c as u64 * u64::from(family.device_cost(*g).unwrap_or(1)))
        .sum()
}

/// Longest path from any input to the output, each gate weighted by `weight`.
pub fn longest_path(n: &Netlist, weight: impl Fn(GateType) -> Delay) -> Result<Delay, NetlistError> {
    let mut arrival: HashMap<Net, Delay> = HashMap::new();
    for i in n.topo_order()? {
        let g = &n.gates[i];
        let start = g
            .inputs
            .iter()
            .map(|net| arrival.get(net).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        arrival.insert(g.output, start + weight(g.kind));
    }
    Ok(arrival.get(&n.output).copied().unwrap_or(0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitReport {
    pub counts: BTreeMap<GateType, usize>,
    pub total_devices: u64,
    /// Gates on the longest input-to-output path.
    pub depth_gates: u64,
    pub max_propagation_delay: Delay,
    pub unoptimized_counts: BTreeMap<GateType, usize>,
    pub unoptimized_total_devices: u64,
    pub devices_removed_by_optimization: i64,
}

/// Compares an optimized netlist with its unoptimized counterpart.
pub fn report(
    optimized: &Netlist,
    unoptimized: &Netlist,
    family: &LogicFamily,
) -> Result<CircuitReport, NetlistError> {
    for n in [optimized, unoptimized] {
        if n.family != family.id {
            return Err(NetlistError::FamilyMismatch {
                expected: family.id.clone(),
                found: n.family.clone(),
            });
        }
    }
    let counts = gate_counts(optimized);
    let unoptimized_counts = gate_counts(unoptimized);
    let total = total_devices(&counts, family);
    let unoptimized_total = total_devices(&unoptimized_counts, family);
    Ok(CircuitReport {
        depth_gates: longest_path(optimized, |_| 1)?,
        max_propagation_delay: longest_path(optimized, |g| family.delay(g).unwrap_or(1))?,
        counts,
        total_devices: total,
        unoptimized_counts,
        unoptimized_total_devices: unoptimized_total,
        devices_removed_by_optimization: unoptimized_total as i64 - total as i64,
    })
}

/// Rewrites a NOT/AND2/OR2 netlist using only NAND2 gates:
/// `NOT a = NAND(a, a)`, `AND(a, b) = NAND(t, t)` with `t = NAND(a, b)`, and
/// `OR(a, b) = NAND(NAND(a, a), NAND(b, b))`.
pub fn map_to_nand(n: &Netlist, nand_family: &LogicFamily) -> Result<Netlist, NetlistError> {
    if !nand_family.supports(GateType::Nand2) {
        return Err(NetlistError::UnsupportedGate {
            family: nand_family.id.clone(),
            gate: GateType::Nand2,
        });
    }
    let mut b = Builder {
        family: nand_family,
        inputs: HashMap::new(),
        next_net: n
            .inputs
            .iter()
            .filter_map(|i| match i.net {
                Net::Id(id) => Some(id + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0),
        gates: Vec::new(),
    };
    let mut renamed: HashMap<Net, Net> = HashMap::new();
    let map = |renamed: &HashMap<Net, Net>, net: Net| renamed.get(&net).copied().unwrap_or(net);
    for i in n.topo_order()? {
        let g = &n.gates[i];
        let ins: Vec<Net> = g.inputs.iter().map(|&net| map(&renamed, net)).collect();
        let out = match g.kind {
            GateType::Not => b.emit(GateType::Nand2, vec![ins[0], ins[0]])?,
            GateType::Nand2 => b.emit(GateType::Nand2, ins)?,
            GateType::And2 => {
                let t = b.emit(GateType::Nand2, ins)?;
                b.emit(GateType::Nand2, vec![t, t])?
            }
            GateType::Or2 => {
                let na = b.emit(GateType::Nand2, vec![ins[0], ins[0]])?;
                let nb = b.emit(GateType::Nand2, vec![ins[1], ins[1]])?;
                b.emit(GateType::Nand2, vec![na, nb])?
            }
        };
        renamed.insert(g.output, out);
    }
    Ok(Netlist {
        family: nand_family.id.clone(),
        inputs: n.inputs.clone(),
        output: map(&renamed, n.output),
        gates: b.gates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::family::lookup_family;

    fn sbv() -> &'static LogicFamily {
        lookup_family("sbv").unwrap()
    }

    fn synth(text: &str) -> Netlist {
        let n = synthesize(&parse_expression(text).unwrap(), sbv()).unwrap();
        n.validate(Some(sbv())).unwrap();
        n
    }

    fn counts(n: &Netlist) -> Vec<(GateType, usize)> {
        gate_counts(n).into_iter().collect()
    }

    #[test]
    fn single_inverter() {
        let n = synth("~A");
        assert_eq!(counts(&n), [(GateType::Not, 1)]);
        assert_eq!(n.gates[0].inputs, [Net::Id(0)]);
        assert_eq!(n.output, Net::Id(1));
    }

    #[test]
    fn optimized_complex_mapping() {
        let n = synth("(A & C) | (~B & C)");
        assert_eq!(
            counts(&n),
            [(GateType::Not, 1), (GateType::And2, 2), (GateType::Or2, 1)]
        );
        assert_eq!(total_devices(&gate_counts(&n), sbv()), 4);
        // Post-order: AND(A,C), NOT(B), AND(~B,C), OR.
        let kinds: Vec<GateType> = n.gates.iter().map(|g| g.kind).collect();
        assert_eq!(
            kinds,
            [GateType::And2, GateType::Not, GateType::And2, GateType::Or2]
        );
    }

    #[test]
    fn unoptimized_complex_mapping() {
        let n = synth("(~A & ~B & C) | (A & ~B & C) | (A & B & C)");
        assert_eq!(
            counts(&n),
            [(GateType::Not, 3), (GateType::And2, 6), (GateType::Or2, 2)]
        );
        assert_eq!(total_devices(&gate_counts(&n), sbv()), 11);
    }

    #[test]
    fn bare_wire_and_constants() {
        let n = synth("A");
        assert!(n.gates.is_empty());
        assert_eq!(n.output, n.input_net("A").unwrap());
        assert_eq!(total_devices(&gate_counts(&n), sbv()), 0);

        let one = synthesize(&Expr::Const(true), sbv()).unwrap();
        assert_eq!(one.output, Net::Supply);
        let zero = synthesize(&Expr::Const(false), sbv()).unwrap();
        assert_eq!(zero.output, Net::Atmosphere);
        assert!(zero.inputs.is_empty());
    }

    #[test]
    fn unsupported_gate() {
        let nand = lookup_family("nand-demo").unwrap();
        let err = synthesize(&parse_expression("~A").unwrap(), nand).unwrap_err();
        assert_eq!(
            err,
            NetlistError::UnsupportedGate {
                family: "nand-demo".into(),
                gate: GateType::Not
            }
        );
    }

    #[test]
    fn unknown_variable() {
        let e = parse_expression("A & Z").unwrap();
        let err = synthesize_with_inputs(&e, sbv(), &["A".to_string()]).unwrap_err();
        assert_eq!(err, NetlistError::UnknownVariable("Z".into()));
    }

    #[test]
    fn balanced_depth() {
        for k in 2..=9usize {
            let terms: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
            let n = synth(&terms.join(" & "));
            assert_eq!(n.gates.len(), k - 1);
            let depth = longest_path(&n, |_| 1).unwrap();
            assert_eq!(depth, (k as f64).log2().ceil() as u64, "k = {k}");
        }
    }

    #[test]
    fn reports() {
        let opt = synth("(A & C) | (~B & C)");
        let unopt = synth("(~A & ~B & C) | (A & ~B & C) | (A & B & C)");
        let r = report(&opt, &unopt, sbv()).unwrap();
        assert_eq!(r.total_devices, 4);
        assert_eq!(r.unoptimized_total_devices, 11);
        assert_eq!(r.devices_removed_by_optimization, 7);
        assert_eq!(r.depth_gates, 3);
        assert_eq!(r.max_propagation_delay, 3);
        assert_eq!(longest_path(&unopt, |_| 1).unwrap(), 5);

        let inv = synth("~A");
        let slow = sbv().clone().with_delays(|g| if g == GateType::Not { 7 } else { 1 });
        let r = report(&inv, &inv, &slow).unwrap();
        assert_eq!(r.depth_gates, 1);
        assert_eq!(r.max_propagation_delay, 7);
    }

    #[test]
    fn family_mismatch() {
        let n = synth("~A");
        let nand = lookup_family("nand-demo").unwrap();
        assert!(matches!(
            report(&n, &n, nand),
            Err(NetlistError::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn nand_mapping() {
        let nand = lookup_family("nand-demo").unwrap();
        let inv = map_to_nand(&synth("~A"), nand).unwrap();
        assert_eq!(inv.gates.len(), 1);
        assert_eq!(inv.gates[0].inputs, [Net::Id(0), Net::Id(0)]);
        inv.validate(Some(nand)).unwrap();

        let wire = map_to_nand(&synth("A"), nand).unwrap();
        assert!(wire.gates.is_empty());
        assert_eq!(wire.output, Net::Id(0));

        let opt = synth("(A & C) | (~B & C)");
        let mapped = map_to_nand(&opt, nand).unwrap();
        mapped.validate(Some(nand)).unwrap();
        // NOT -> 1, AND -> 2 each, OR -> 3.
        assert_eq!(mapped.gates.len(), 1 + 2 + 2 + 3);
    }

    #[test]
    fn validation_rejects_fan_out_and_cycles() {
        let mut n = synth("(A & C) | (~B & C)");
        let and_out = n.gates[0].output;
        n.gates[3].inputs[1] = and_out;
        assert!(matches!(n.validate(None), Err(NetlistError::Invalid(_))));

        let cyclic = Netlist {
            family: "sbv".into(),
            inputs: vec![],
            output: Net::Id(0),
            gates: vec![
                Gate {
                    id: GateId(0),
                    kind: GateType::Not,
                    inputs: vec![Net::Id(1)],
                    output: Net::Id(0),
                },
                Gate {
                    id: GateId(1),
                    kind: GateType::Not,
                    inputs: vec![Net::Id(0)],
                    output: Net::Id(1),
                },
            ],
        };
        assert!(cyclic.validate(None).is_err());
    }

    #[test]
    fn serialized_form() {
        let n = synth("(A & C) | (~B & C)");
        let v: serde_json::Value = serde_json::from_str(&n.to_json()).unwrap();
        assert_eq!(v["family"], "sbv");
        assert_eq!(v["inputs"][0], serde_json::json!({"name": "A", "net": "n0"}));
        assert_eq!(v["output"], "n6");
        // Inputs in first-use order: A=n0, C=n1, B=n2.
        assert_eq!(
            v["gates"][1],
            serde_json::json!({"id": "g1", "type": "NOT", "in": ["n2"], "out": "n4"})
        );
        assert_eq!(Netlist::from_json(&n.to_json()).unwrap(), n);
    }
}
