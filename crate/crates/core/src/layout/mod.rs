// SPDX-License-Identifier: Apache-2.0

//! Grid placement of netlists into wiring schematics.
//!
//! Inputs sit in column 0, one cell per literal occurrence, and each gate is
//! placed one column right of its rightmost driver. Rows follow the
//! post-order leaf sequence; a gate takes the midpoint row of its drivers
//! and moves down past any occupied cell.

mod paginate;
mod svg;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::GateType;
use crate::netlist::{GateId, Net, Netlist};

pub use paginate::paginate;
pub use svg::{render_svg, CELL_H, CELL_W, MARGIN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("a {cols}x{rows} window cannot hold a single gate with its inputs")]
    WindowTooSmall { cols: u32, rows: u32 },
    #[error("malformed schematic: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellKind {
    Input { name: String },
    Rail { net: Net },
    Gate { gate: GateId, gate_type: GateType },
    /// The circuit output.
    Output { name: String },
    /// Stands in for a sub-block drawn on another page.
    SubBlockRef { block: u32 },
    /// Exit of a sub-block page.
    SubBlockDef { block: u32 },
}

impl CellKind {
    /// Cells that end a page rather than occupy its logic area.
    pub fn is_terminal(&self) -> bool {
        matches!(self, CellKind::Output { .. } | CellKind::SubBlockDef { .. })
    }

    pub fn is_marker(&self) -> bool {
        matches!(
            self,
            CellKind::SubBlockRef { .. } | CellKind::SubBlockDef { .. }
        )
    }

    /// Number of input ports.
    pub fn input_ports(&self) -> usize {
        match self {
            CellKind::Gate { gate_type, .. } => gate_type.arity(),
            CellKind::Output { .. } | CellKind::SubBlockDef { .. } => 1,
            _ => 0,
        }
    }

    pub fn has_output_port(&self) -> bool {
        !self.is_terminal()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(rename = "ref")]
    pub reference: String,
    #[serde(flatten)]
    pub kind: CellKind,
    pub col: u32,
    pub row: u32,
}

/// `(cell ref, port name)`; ports are `in0`, `in1` and `out`.
pub type PortRef = (String, String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub from: PortRef,
    pub to: PortRef,
    /// Orthogonal polyline in drawing units.
    pub points: Vec<[i64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerRole {
    Reference,
    Definition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRef {
    pub block: u32,
    pub role: MarkerRole,
    pub cell: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    /// 0 for the base page, otherwise the sub-block number.
    pub number: u32,
    pub cells: Vec<Cell>,
    pub wires: Vec<Wire>,
    pub page_refs: Vec<PageRef>,
}

impl Page {
    pub fn cell(&self, reference: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.reference == reference)
    }

    /// Columns and rows used by non-terminal cells.
    pub fn extent(&self) -> (u32, u32) {
        self.cells
            .iter()
            .filter(|c| !c.kind.is_terminal())
            .fold((0, 0), |(w, h), c| (w.max(c.col + 1), h.max(c.row + 1)))
    }

    /// Columns and rows used by all cells.
    pub fn bounds(&self) -> (u32, u32) {
        self.cells
            .iter()
            .fold((0, 0), |(w, h), c| (w.max(c.col + 1), h.max(c.row + 1)))
    }

    pub fn gate_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells
            .iter()
            .filter(|c| matches!(c.kind, CellKind::Gate { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schematic {
    pub output_name: String,
    pub pages: Vec<Page>,
}

impl Schematic {
    pub fn with_output_name(mut self, name: &str) -> Self {
        let old = std::mem::replace(&mut self.output_name, name.to_string());
        let (old_ref, new_ref) = (output_ref(&old), output_ref(name));
        for page in &mut self.pages {
            for cell in &mut page.cells {
                if let CellKind::Output { name: n } = &mut cell.kind {
                    *n = name.to_string();
                    cell.reference = new_ref.clone();
                }
            }
            for wire in &mut page.wires {
                if wire.to.0 == old_ref {
                    wire.to.0 = new_ref.clone();
                }
            }
        }
        self
    }

    pub fn gate_count(&self) -> usize {
        self.pages.iter().map(|p| p.gate_cells().count()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schematic serializes")
    }
}

fn output_ref(name: &str) -> String {
    format!("out:{name}")
}

/// Layout-independent view of the circuit tree.
#[derive(Debug, Clone)]
pub(crate) struct Tree {
    pub nodes: Vec<Node>,
    pub root: usize,
    pub output_name: String,
}

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub reference: String,
    pub kind: CellKind,
    /// Drivers in pin order; a driver feeding two pins appears once.
    pub children: Vec<Child>,
}

#[derive(Debug, Clone)]
pub(crate) struct Child {
    pub node: usize,
    pub pins: Vec<usize>,
}

impl Tree {
    pub fn from_netlist(n: &Netlist, output_name: &str) -> Tree {
        let mut t = Tree {
            nodes: Vec::new(),
            root: 0,
            output_name: output_name.to_string(),
        };
        let names: HashMap<Net, &str> = n.inputs.iter().map(|i| (i.net, i.name.as_str())).collect();
        let drivers: HashMap<Net, usize> =
            n.gates.iter().enumerate().map(|(i, g)| (g.output, i)).collect();
        let mut occurrences: HashMap<String, usize> = HashMap::new();
        t.root = t.add_net(n, n.output, &names, &drivers, &mut occurrences);
        t
    }

    fn add_net(
        &mut self,
        n: &Netlist,
        net: Net,
        names: &HashMap<Net, &str>,
        drivers: &HashMap<Net, usize>,
        occurrences: &mut HashMap<String, usize>,
    ) -> usize {
        let (reference, kind, children) = if let Some(&g) = drivers.get(&net) {
            let gate = &n.gates[g];
            let mut children: Vec<Child> = Vec::new();
            let mut seen: Vec<(Net, usize)> = Vec::new();
            for (pin, &input) in gate.inputs.iter().enumerate() {
                if let Some(&(_, c)) = seen.iter().find(|(s, _)| *s == input) {
                    children[c].pins.push(pin);
                    continue;
                }
                let node = self.add_net(n, input, names, drivers, occurrences);
                seen.push((input, children.len()));
                children.push(Child {
                    node,
                    pins: vec![pin],
                });
            }
            let kind = CellKind::Gate {
                gate: gate.id,
                gate_type: gate.kind,
            };
            (gate.id.to_string(), kind, children)
        } else {
            let (key, kind) = match names.get(&net) {
                Some(name) => (
                    format!("in:{name}"),
                    CellKind::Input {
                        name: name.to_string(),
                    },
                ),
                None => (format!("rail:{net}"), CellKind::Rail { net }),
            };
            let k = occurrences.entry(key.clone()).or_insert(0);
            let reference = format!("{key}:{k}");
            *k += 1;
            (reference, kind, Vec::new())
        };
        self.nodes.push(Node {
            reference,
            kind,
            children,
        });
        self.nodes.len() - 1
    }

    /// Rebuilds the tree from a placed schematic, following sub-block
    /// references across pages.
    pub fn from_schematic(s: &Schematic) -> Result<Tree, LayoutError> {
        let malformed = |m: String| LayoutError::Malformed(m);
        let base = s
            .pages
            .iter()
            .find(|p| p.number == 0)
            .ok_or_else(|| malformed("no base page".into()))?;
        let out = base
            .cells
            .iter()
            .find(|c| matches!(c.kind, CellKind::Output { .. }))
            .ok_or_else(|| malformed("base page has no output cell".into()))?;
        let mut t = Tree {
            nodes: Vec::new(),
            root: 0,
            output_name: s.output_name.clone(),
        };
        let root_ref = driver_of(base, &out.reference)?;
        t.root = t.add_cell(s, base, &root_ref, 0)?;
        Ok(t)
    }

    fn add_cell(
        &mut self,
        s: &Schematic,
        page: &Page,
        reference: &str,
        depth: usize,
    ) -> Result<usize, LayoutError> {
        if depth > 4096 {
            return Err(LayoutError::Malformed("sub-block references form a cycle".into()));
        }
        let cell = page
            .cell(reference)
            .ok_or_else(|| LayoutError::Malformed(format!("missing cell {reference}")))?;
        if let CellKind::SubBlockRef { block } = cell.kind {
            let sub = s
                .pages
                .iter()
                .find(|p| p.number == block)
                .ok_or_else(|| LayoutError::Malformed(format!("missing page {block}")))?;
            let root = driver_of(sub, &format!("def:{block}"))?;
            return self.add_cell(s, sub, &root, depth + 1);
        }

        let mut children: Vec<Child> = Vec::new();
        let mut incoming: Vec<(usize, &str)> = page
            .wires
            .iter()
            .filter(|w| w.to.0 == reference)
            .map(|w| {
                let pin = w.to.1.strip_prefix("in").and_then(|p| p.parse().ok());
                pin.map(|p| (p, w.from.0.as_str()))
                    .ok_or_else(|| LayoutError::Malformed(format!("bad port {}", w.to.1)))
            })
            .collect::<Result<_, _>>()?;
        incoming.sort();
        let mut seen: Vec<(&str, usize)> = Vec::new();
        for (pin, from) in incoming {
            if let Some(&(_, c)) = seen.iter().find(|(f, _)| *f == from) {
                children[c].pins.push(pin);
                continue;
            }
            let node = self.add_cell(s, page, from, depth + 1)?;
            seen.push((from, children.len()));
            children.push(Child {
                node,
                pins: vec![pin],
            });
        }
        self.nodes.push(Node {
            reference: cell.reference.clone(),
            kind: cell.kind.clone(),
            children,
        });
        Ok(self.nodes.len() - 1)
    }

    /// Nodes of the subtree at `root`, not descending into `cut` nodes.
    pub fn subtree_size(&self, root: usize, cut: &BTreeSet<usize>) -> usize {
        1 + self.nodes[root]
            .children
            .iter()
            .filter(|c| !cut.contains(&c.node))
            .map(|c| self.subtree_size(c.node, cut))
            .sum::<usize>()
            + self.nodes[root]
                .children
                .iter()
                .filter(|c| cut.contains(&c.node))
                .count()
    }
}

fn driver_of(page: &Page, reference: &str) -> Result<String, LayoutError> {
    page.wires
        .iter()
        .find(|w| w.to.0 == reference)
        .map(|w| w.from.0.clone())
        .ok_or_else(|| LayoutError::Malformed(format!("nothing drives {reference}")))
}

/// How a placed subtree leaves its page.
#[derive(Debug, Clone)]
pub(crate) enum Terminal {
    Output(String),
    Block(u32),
}

/// Places the subtree at `root` on one page. Children in `cut` are drawn
/// as sub-block references using the given block numbers.
pub(crate) fn place_subtree(
    tree: &Tree,
    root: usize,
    cut: &HashMap<usize, u32>,
    terminal: &Terminal,
    number: u32,
) -> Page {
    let mut placer = Placer {
        tree,
        cut,
        occupied: BTreeSet::new(),
        next_row: 0,
        cells: Vec::new(),
        wires: Vec::new(),
        page_refs: Vec::new(),
    };
    let (root_ref, root_col, root_row) = placer.place(root);

    let term_col = placer.cells.iter().map(|c| c.col).max().unwrap_or(0).max(root_col) + 1;
    let (term_ref, term_kind) = match terminal {
        Terminal::Output(name) => (output_ref(name), CellKind::Output { name: name.clone() }),
        Terminal::Block(b) => (format!("def:{b}"), CellKind::SubBlockDef { block: *b }),
    };
    if let Terminal::Block(b) = terminal {
        placer.page_refs.push(PageRef {
            block: *b,
            role: MarkerRole::Definition,
            cell: term_ref.clone(),
        });
    }
    placer.cells.push(Cell {
        reference: term_ref.clone(),
        kind: term_kind,
        col: term_col,
        row: root_row,
    });
    placer.wires.push(Wire {
        from: (root_ref, "out".into()),
        to: (term_ref, "in0".into()),
        points: Vec::new(),
    });

    let mut page = Page {
        number,
        cells: placer.cells,
        wires: placer.wires,
        page_refs: placer.page_refs,
    };
    svg::route_wires(&mut page);
    page
}

struct Placer<'a> {
    tree: &'a Tree,
    cut: &'a HashMap<usize, u32>,
    occupied: BTreeSet<(u32, u32)>,
    next_row: u32,
    cells: Vec<Cell>,
    wires: Vec<Wire>,
    page_refs: Vec<PageRef>,
}

impl Placer<'_> {
    fn leaf(&mut self, reference: String, kind: CellKind) -> (String, u32, u32) {
        let row = self.next_row;
        self.next_row += 1;
        self.occupied.insert((0, row));
        self.cells.push(Cell {
            reference: reference.clone(),
            kind,
            col: 0,
            row,
        });
        (reference, 0, row)
    }

    fn place(&mut self, node: usize) -> (String, u32, u32) {
        if let Some(&block) = self.cut.get(&node) {
            let reference = format!("sub:{block}");
            self.page_refs.push(PageRef {
                block,
                role: MarkerRole::Reference,
                cell: reference.clone(),
            });
            return self.leaf(reference, CellKind::SubBlockRef { block });
        }
        let n = &self.tree.nodes[node];
        if n.children.is_empty() {
            return self.leaf(n.reference.clone(), n.kind.clone());
        }

        let placed: Vec<(String, u32, u32, &Vec<usize>)> = n
            .children
            .iter()
            .map(|c| {
                let (r, col, row) = self.place(c.node);
                (r, col, row, &c.pins)
            })
            .collect();
        let col = 1 + placed.iter().map(|p| p.1).max().unwrap();
        let lo = placed.iter().map(|p| p.2).min().unwrap();
        let hi = placed.iter().map(|p| p.2).max().unwrap();
        let mut row = (lo + hi) / 2;
        while self.occupied.contains(&(col, row)) {
            row += 1;
        }
        self.occupied.insert((col, row));
        self.cells.push(Cell {
            reference: n.reference.clone(),
            kind: n.kind.clone(),
            col,
            row,
        });
        for (from, _, _, pins) in placed {
            for &pin in pins {
                self.wires.push(Wire {
                    from: (from.clone(), "out".into()),
                    to: (n.reference.clone(), format!("in{pin}")),
                    points: Vec::new(),
                });
            }
        }
        (n.reference.clone(), col, row)
    }
}

/// Places `n` on a single page with an output cell named `Q`.
pub fn place(n: &Netlist) -> Schematic {
    place_named(n, "Q")
}

/// Places `n` on a single page whose output cell carries `output_name`.
pub fn place_named(n: &Netlist, output_name: &str) -> Schematic {
    let tree = Tree::from_netlist(n, output_name);
    let page = place_subtree(
        &tree,
        tree.root,
        &HashMap::new(),
        &Terminal::Output(output_name.to_string()),
        0,
    );
    Schematic {
        output_name: output_name.to_string(),
        pages: vec![page],
    }
}
