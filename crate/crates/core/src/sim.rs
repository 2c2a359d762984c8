// SPDX-License-Identifier: Apache-2.0

//! Netlist simulation: functional evaluation, exhaustive verification
//! against a truth table, inertial-delay event simulation, and the glove
//! input model.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Assignment;
use crate::family::{Delay, LogicFamily};
use crate::netlist::{Net, Netlist, NetlistError};
use crate::truthtable::{format_bits, TableError, TruthTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("input {0:?} is not bound")]
    UnboundInput(String),
    #[error("netlist input {0:?} is not a table input")]
    InputMismatch(String),
    #[error("finger {0:?} is not part of this glove")]
    UnknownFinger(String),
    #[error("{fingers} fingers cannot drive {inputs} inputs")]
    TooManyInputs { fingers: usize, inputs: usize },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Levels of every net under `inputs`.
pub fn net_levels(n: &Netlist, inputs: &Assignment) -> Result<HashMap<Net, bool>, SimError> {
    let mut levels = HashMap::from([(Net::Supply, true), (Net::Atmosphere, false)]);
    for input in &n.inputs {
        let level = *inputs
            .get(&input.name)
            .ok_or_else(|| SimError::UnboundInput(input.name.clone()))?;
        levels.insert(input.net, level);
    }
    for i in n.topo_order()? {
        let g = &n.gates[i];
        let ins: Vec<bool> = g.inputs.iter().map(|net| levels[net]).collect();
        levels.insert(g.output, g.kind.apply(&ins));
    }
    Ok(levels)
}

/// Output level of `n` under `inputs`. Every netlist input must be bound.
pub fn evaluate_netlist(n: &Netlist, inputs: &Assignment) -> Result<bool, SimError> {
    Ok(net_levels(n, inputs)?[&n.output])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verification {
    Pass,
    Fail {
        row: u32,
        bits: String,
        expected: bool,
        got: bool,
    },
}

impl Verification {
    pub fn passed(&self) -> bool {
        matches!(self, Verification::Pass)
    }
}

/// Checks `n` against column `output_index` of `t` on every care row and
/// reports the smallest failing row.
pub fn verify(n: &Netlist, t: &TruthTable, output_index: usize) -> Result<Verification, SimError> {
    if output_index >= t.output_names().len() {
        return Err(TableError::OutputIndex {
            index: output_index,
            count: t.output_names().len(),
        }
        .into());
    }
    for input in &n.inputs {
        if !t.input_names().contains(&input.name) {
            return Err(SimError::InputMismatch(input.name.clone()));
        }
    }
    for row in 0..t.row_count() as u32 {
        let Some(expected) = t.output(row, output_index).value() else {
            continue;
        };
        let assignment: Assignment = t
            .input_names()
            .iter()
            .cloned()
            .zip(t.input_bits(row))
            .collect();
        let got = evaluate_netlist(n, &assignment)?;
        if got != expected {
            return Ok(Verification::Fail {
                row,
                bits: format_bits(row, t.input_count()),
                expected,
                got,
            });
        }
    }
    Ok(Verification::Pass)
}

/// Finger names in glove channel order.
pub const GLOVE_FINGERS: [&str; 4] = ["pinky", "ring", "middle", "index"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finger {
    pub name: String,
    /// Circuit input this finger drives.
    pub input: String,
    pub bent: bool,
}

/// Bend state of the pneumatic glove. A straight finger passes supply
/// pressure (high); a bent finger is vented through its pull-down (low).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GloveState {
    pub fingers: Vec<Finger>,
}

impl GloveState {
    /// Maps [`GLOVE_FINGERS`] onto `inputs` in order, all fingers straight.
    pub fn new(inputs: &[String]) -> Result<Self, SimError> {
        if inputs.len() > GLOVE_FINGERS.len() {
            return Err(SimError::TooManyInputs {
                fingers: GLOVE_FINGERS.len(),
                inputs: inputs.len(),
            });
        }
        Ok(GloveState {
            fingers: GLOVE_FINGERS
                .iter()
                .zip(inputs)
                .map(|(name, input)| Finger {
                    name: name.to_string(),
                    input: input.clone(),
                    bent: false,
                })
                .collect(),
        })
    }

    pub fn set_bent(&mut self, finger: &str, bent: bool) -> Result<(), SimError> {
        let f = self
            .fingers
            .iter_mut()
            .find(|f| f.name == finger)
            .ok_or_else(|| SimError::UnknownFinger(finger.to_string()))?;
        f.bent = bent;
        Ok(())
    }

    /// Sets every finger from `mask`, first finger in the most significant bit.
    pub fn with_bent_mask(mut self, mask: u32) -> Self {
        let k = self.fingers.len();
        for (i, f) in self.fingers.iter_mut().enumerate() {
            f.bent = mask >> (k - 1 - i) & 1 == 1;
        }
        self
    }
}

/// Input levels produced by the glove: bent is 0, straight is 1.
pub fn glove_levels(g: &GloveState) -> Assignment {
    g.fingers
        .iter()
        .map(|f| (f.input.clone(), !f.bent))
        .collect()
}

mod level_bit {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("level {other} is not 0 or 1"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: Delay,
    pub net: Net,
    #[serde(with = "level_bit")]
    pub level: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedTrace {
    pub events: Vec<TraceEvent>,
    pub settle_time: Delay,
}

impl TimedTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,net,level\n");
        for e in &self.events {
            out.push_str(&format!("{},{},{}\n", e.t, e.net, u8::from(e.level)));
        }
        out
    }

    /// Events on `net`.
    pub fn events_on(&self, net: Net) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.net == net)
    }
}

/// Discrete-event simulation of an input step at `step_time`.
///
/// The circuit is settled under `initial`. A gate re-evaluates
/// `delay(type)` units after one of its inputs changes. Delays are
/// inertial: a scheduled transition is dropped if the gate's inputs return
/// it to its current level before the transition fires.
pub fn timed_simulate(
    n: &Netlist,
    family: &LogicFamily,
    initial: &Assignment,
    step: &Assignment,
    step_time: Delay,
) -> Result<TimedTrace, SimError> {
    let mut levels = net_levels(n, initial)?;
    for input in &n.inputs {
        if !step.contains_key(&input.name) {
            return Err(SimError::UnboundInput(input.name.clone()));
        }
    }

    let mut readers: HashMap<Net, Vec<usize>> = HashMap::new();
    for (i, g) in n.gates.iter().enumerate() {
        for &net in &g.inputs {
            let r = readers.entry(net).or_default();
            if r.last() != Some(&i) {
                r.push(i);
            }
        }
    }

    let mut events = Vec::new();
    let mut changed = Vec::new();
    for input in &n.inputs {
        let level = step[&input.name];
        if levels[&input.net] != level {
            levels.insert(input.net, level);
            events.push(TraceEvent {
                t: step_time,
                net: input.net,
                level,
            });
            changed.push(input.net);
        }
    }

    // pending[g] = (fire time, sequence number) of g's scheduled transition
    let mut pending: Vec<Option<(Delay, u64)>> = vec![None; n.gates.len()];
    let mut queue: BinaryHeap<Reverse<(Delay, u64, usize)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut now = step_time;

    loop {
        let affected: BTreeSet<usize> = changed
            .iter()
            .flat_map(|net| readers.get(net).into_iter().flatten().copied())
            .collect();
        for g in affected {
            let gate = &n.gates[g];
            let ins: Vec<bool> = gate.inputs.iter().map(|net| levels[net]).collect();
            let value = gate.kind.apply(&ins);
            if value == levels[&gate.output] {
                pending[g] = None;
            } else if pending[g].is_none() {
                let delay = family.delay(gate.kind).unwrap_or(1);
                seq += 1;
                pending[g] = Some((now + delay, seq));
                queue.push(Reverse((now + delay, seq, g)));
            }
        }
        changed.clear();

        let Some(&Reverse((t, _, _))) = queue.peek() else {
            break;
        };
        now = t;
        while let Some(&Reverse((t, s, g))) = queue.peek() {
            if t != now {
                break;
            }
            queue.pop();
            if pending[g] != Some((t, s)) {
                continue;
            }
            pending[g] = None;
            let out = n.gates[g].output;
            let level = !levels[&out];
            levels.insert(out, level);
            events.push(TraceEvent { t, net: out, level });
            changed.push(out);
        }
    }

    let settle_time = events.last().map_or(step_time, |e| e.t.max(step_time));
    Ok(TimedTrace {
        events,
        settle_time,
    })
}

/// Levels after applying every event of `trace` to the settled `initial`
/// state.
pub fn final_levels(
    n: &Netlist,
    initial: &Assignment,
    trace: &TimedTrace,
) -> Result<BTreeMap<Net, bool>, SimError> {
    let mut levels: BTreeMap<Net, bool> = net_levels(n, initial)?.into_iter().collect();
    for e in &trace.events {
        levels.insert(e.net, e.level);
    }
    Ok(levels)
}
