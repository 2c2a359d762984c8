// SPDX-License-Identifier: Apache-2.0

//! Splits a schematic that overflows its window into numbered sub-block
//! pages.
//!
//! Operands of the root's OR cluster (or whatever gate type the root has)
//! that cannot fit on their own go to sub-block pages first. If the page
//! still overflows, the largest remaining gate child of the root is moved
//! out, and so on. Each sub-block page is split the same way.

use std::collections::{BTreeSet, HashMap};

use super::{place_subtree, CellKind, LayoutError, Page, Schematic, Terminal, Tree};

#[derive(Debug, Clone, Copy)]
struct Window {
    cols: u32,
    rows: u32,
}

impl Window {
    fn fits(&self, page: &Page) -> bool {
        let (cols, rows) = page.extent();
        cols <= self.cols && rows <= self.rows
    }
}

/// Paginates `s` so that the logic area of every page (all cells except
/// the page's output or sub-block exit) fits `max_cols` x `max_rows`.
pub fn paginate(s: &Schematic, max_cols: u32, max_rows: u32) -> Result<Schematic, LayoutError> {
    if max_cols < 2 || max_rows < 2 {
        return Err(LayoutError::WindowTooSmall {
            cols: max_cols,
            rows: max_rows,
        });
    }
    let window = Window {
        cols: max_cols,
        rows: max_rows,
    };
    let tree = Tree::from_schematic(s)?;
    let mut splitter = Splitter {
        tree: &tree,
        window,
        pages: Vec::new(),
        next_block: 1,
    };
    splitter.split(tree.root, Terminal::Output(tree.output_name.clone()), 0)?;
    let mut pages = splitter.pages;
    pages.sort_by_key(|p| p.number);
    Ok(Schematic {
        output_name: s.output_name.clone(),
        pages,
    })
}

struct Splitter<'a> {
    tree: &'a Tree,
    window: Window,
    pages: Vec<Page>,
    next_block: u32,
}

impl Splitter<'_> {
    fn trial(&self, root: usize, cut: &BTreeSet<usize>) -> Page {
        let placeholders: HashMap<usize, u32> = cut.iter().map(|&n| (n, 0)).collect();
        place_subtree(self.tree, root, &placeholders, &Terminal::Block(0), 0)
    }

    fn is_gate(&self, node: usize) -> bool {
        matches!(self.tree.nodes[node].kind, CellKind::Gate { .. })
    }

    /// Children of the same-type gate cluster rooted at `root`.
    fn cluster_operands(&self, root: usize, out: &mut Vec<usize>) {
        let CellKind::Gate { gate_type, .. } = self.tree.nodes[root].kind else {
            return;
        };
        for c in &self.tree.nodes[root].children {
            match self.tree.nodes[c.node].kind {
                CellKind::Gate { gate_type: t, .. } if t == gate_type => {
                    self.cluster_operands(c.node, out)
                }
                _ => out.push(c.node),
            }
        }
    }

    /// Cut nodes in the order their markers are placed.
    fn cut_order(&self, node: usize, cut: &BTreeSet<usize>, out: &mut Vec<usize>) {
        if cut.contains(&node) {
            out.push(node);
            return;
        }
        for c in &self.tree.nodes[node].children {
            self.cut_order(c.node, cut, out);
        }
    }

    fn split(&mut self, root: usize, terminal: Terminal, number: u32) -> Result<(), LayoutError> {
        let mut cut = BTreeSet::new();
        if !self.window.fits(&self.trial(root, &cut)) {
            let mut operands = Vec::new();
            self.cluster_operands(root, &mut operands);
            for op in operands {
                if self.is_gate(op) && !self.window.fits(&self.trial(op, &BTreeSet::new())) {
                    cut.insert(op);
                }
            }
            while !self.window.fits(&self.trial(root, &cut)) {
                let largest = self.tree.nodes[root]
                    .children
                    .iter()
                    .map(|c| c.node)
                    .filter(|&n| self.is_gate(n) && !cut.contains(&n))
                    .map(|n| (self.tree.subtree_size(n, &cut), n))
                    // first child wins ties
                    .reduce(|best, x| if x.0 > best.0 { x } else { best });
                match largest {
                    Some((_, n)) => {
                        cut.insert(n);
                    }
                    None => {
                        return Err(LayoutError::WindowTooSmall {
                            cols: self.window.cols,
                            rows: self.window.rows,
                        })
                    }
                }
            }
        }

        let mut order = Vec::new();
        self.cut_order(root, &cut, &mut order);
        let numbered: HashMap<usize, u32> = order
            .iter()
            .map(|&n| {
                let b = self.next_block;
                self.next_block += 1;
                (n, b)
            })
            .collect();
        self.pages
            .push(place_subtree(self.tree, root, &numbered, &terminal, number));
        for n in order {
            let block = numbered[&n];
            self.split(n, Terminal::Block(block), block)?;
        }
        Ok(())
    }
}
