// SPDX-License-Identifier: Apache-2.0

//! Wire routing and SVG rendering of schematic pages.
//!
//! All coordinates are integers, so output is byte-identical across runs
//! and platforms.

use std::fmt::Write;

use crate::family::LogicFamily;

use super::{Cell, CellKind, Page, Schematic};

/// Width of one grid cell in drawing units.
pub const CELL_W: i64 = 120;
/// Height of one grid cell in drawing units.
pub const CELL_H: i64 = 80;
/// Blank border around the grid.
pub const MARGIN: i64 = 20;

const BODY_X: i64 = 30;
const BODY_Y: i64 = 15;
const BODY_W: i64 = 60;
const BODY_H: i64 = 50;
const PORT_IN_X: i64 = 20;
const PORT_OUT_X: i64 = 100;
const MID_Y: i64 = 40;
const PIN_OFFSET: i64 = 12;
const JOG: i64 = 10;

fn origin(cell: &Cell) -> (i64, i64) {
    (
        MARGIN + i64::from(cell.col) * CELL_W,
        MARGIN + i64::from(cell.row) * CELL_H,
    )
}

fn output_port(cell: &Cell) -> [i64; 2] {
    let (x, y) = origin(cell);
    [x + PORT_OUT_X, y + MID_Y]
}

fn input_port(cell: &Cell, pin: usize) -> [i64; 2] {
    let (x, y) = origin(cell);
    let dy = match (cell.kind.input_ports(), pin) {
        (2, 0) => -PIN_OFFSET,
        (2, _) => PIN_OFFSET,
        _ => 0,
    };
    [x + PORT_IN_X, y + MID_Y + dy]
}

fn pin_index(port: &str) -> usize {
    port.strip_prefix("in")
        .and_then(|p| p.parse().ok())
        .unwrap_or(0)
}

/// Fills in each wire's polyline: a straight run when the ports share a
/// row, otherwise out, down or up just before the destination, and in.
pub(crate) fn route_wires(page: &mut Page) {
    let Page { cells, wires, .. } = page;
    for wire in wires.iter_mut() {
        let (Some(from), Some(to)) = (
            cells.iter().find(|c| c.reference == wire.from.0),
            cells.iter().find(|c| c.reference == wire.to.0),
        ) else {
            continue;
        };
        let a = output_port(from);
        let b = input_port(to, pin_index(&wire.to.1));
        wire.points = if a[1] == b[1] {
            vec![a, b]
        } else {
            let x = b[0] - JOG;
            vec![a, [x, a[1]], [x, b[1]], b]
        };
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn arrow(svg: &mut String, tip_x: i64, y: i64) {
    let _ = writeln!(
        svg,
        r##"    <polygon class="port" points="{},{} {},{} {},{}" fill="#333333"/>"##,
        tip_x - 8,
        y - 5,
        tip_x,
        y,
        tip_x - 8,
        y + 5
    );
}

fn terminal_box(svg: &mut String, class: &str, cell: &Cell, label: &str, fill: &str) {
    let (x, y) = origin(cell);
    let _ = writeln!(
        svg,
        r#"  <g class="{class}" data-ref="{}">"#,
        escape(&cell.reference)
    );
    let _ = writeln!(
        svg,
        r##"    <rect x="{}" y="{}" width="{BODY_W}" height="{}" rx="6" fill="{fill}" stroke="#555555"/>"##,
        x + BODY_X,
        y + BODY_Y + 10,
        BODY_H - 20
    );
    let _ = writeln!(
        svg,
        r#"    <text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        x + BODY_X + BODY_W / 2,
        y + MID_Y + 4,
        escape(label)
    );
    if cell.kind.has_output_port() {
        let _ = writeln!(
            svg,
            r##"    <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333333" stroke-width="2"/>"##,
            x + BODY_X + BODY_W,
            y + MID_Y,
            x + PORT_OUT_X,
            y + MID_Y
        );
    } else {
        let _ = writeln!(
            svg,
            r##"    <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333333" stroke-width="2"/>"##,
            x + PORT_IN_X,
            y + MID_Y,
            x + BODY_X,
            y + MID_Y
        );
        arrow(svg, x + BODY_X, y + MID_Y);
    }
    svg.push_str("  </g>\n");
}

fn gate(svg: &mut String, cell: &Cell, family: &LogicFamily) {
    let CellKind::Gate { gate, gate_type } = cell.kind else {
        return;
    };
    let spec = family.spec(gate_type);
    let (label, fill, stroke) = match spec {
        Some(s) => (s.glyph.label.as_str(), s.glyph.fill.as_str(), s.glyph.stroke.as_str()),
        None => (gate_type.name(), "#ffffff", "#000000"),
    };
    let (x, y) = origin(cell);
    let _ = writeln!(
        svg,
        r#"  <g class="gate" data-ref="{}" data-type="{}">"#,
        escape(&cell.reference),
        gate_type.name()
    );
    let _ = writeln!(
        svg,
        r#"    <rect x="{}" y="{}" width="{BODY_W}" height="{BODY_H}" rx="4" fill="{}" stroke="{}" stroke-width="2"/>"#,
        x + BODY_X,
        y + BODY_Y,
        escape(fill),
        escape(stroke)
    );
    let _ = writeln!(
        svg,
        r#"    <text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        x + BODY_X + BODY_W / 2,
        y + MID_Y + 4,
        escape(label)
    );
    let _ = writeln!(
        svg,
        r##"    <text class="gate-id" x="{}" y="{}" text-anchor="middle" font-size="9" fill="#666666">{gate}</text>"##,
        x + BODY_X + BODY_W / 2,
        y + BODY_Y + BODY_H - 4
    );
    for pin in 0..gate_type.arity() {
        let [px, py] = input_port(cell, pin);
        let _ = writeln!(
            svg,
            r##"    <line x1="{px}" y1="{py}" x2="{}" y2="{py}" stroke="#333333" stroke-width="2"/>"##,
            x + BODY_X
        );
        arrow(svg, x + BODY_X, py);
        let annotation = spec
            .and_then(|s| s.ports.get(pin))
            .map(|p| p.annotation.as_str())
            .unwrap_or("");
        if !annotation.is_empty() {
            let _ = writeln!(
                svg,
                r#"    <text class="port-label" x="{}" y="{}" font-size="9">{}</text>"#,
                px,
                py - 4,
                escape(annotation)
            );
        }
    }
    let [ox, oy] = output_port(cell);
    let _ = writeln!(
        svg,
        r##"    <line x1="{}" y1="{oy}" x2="{ox}" y2="{oy}" stroke="#333333" stroke-width="2"/>"##,
        x + BODY_X + BODY_W
    );
    arrow(svg, ox, oy);
    svg.push_str("  </g>\n");
}

fn render_page(s: &Schematic, page: &Page, family: &LogicFamily) -> String {
    let (cols, rows) = page.bounds();
    let width = 2 * MARGIN + i64::from(cols.max(1)) * CELL_W;
    let height = 2 * MARGIN + i64::from(rows.max(1)) * CELL_H;
    let title = if page.number == 0 {
        format!("{}: base page", s.output_name)
    } else {
        format!("{}: sub-block {}", s.output_name, page.number)
    };

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12" data-page="{}">"#,
        page.number
    );
    let _ = writeln!(svg, "  <title>{}</title>", escape(&title));
    let _ = writeln!(
        svg,
        r##"  <rect class="background" x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##
    );

    svg.push_str("  <g class=\"wires\" fill=\"none\" stroke=\"#333333\" stroke-width=\"2\">\n");
    for wire in &page.wires {
        let points: Vec<String> = wire.points.iter().map(|[x, y]| format!("{x},{y}")).collect();
        let _ = writeln!(
            svg,
            r#"    <polyline class="wire" data-from="{}.{}" data-to="{}.{}" points="{}"/>"#,
            escape(&wire.from.0),
            escape(&wire.from.1),
            escape(&wire.to.0),
            escape(&wire.to.1),
            points.join(" ")
        );
    }
    svg.push_str("  </g>\n");

    for cell in &page.cells {
        match &cell.kind {
            CellKind::Gate { .. } => gate(&mut svg, cell, family),
            CellKind::Input { name } => terminal_box(&mut svg, "input", cell, name, "#f5f5f5"),
            CellKind::Rail { net } => terminal_box(&mut svg, "rail", cell, &net.to_string(), "#eeeeee"),
            CellKind::Output { name } => terminal_box(&mut svg, "output", cell, name, "#fff7d6"),
            CellKind::SubBlockRef { block } => {
                terminal_box(&mut svg, "subblock-ref", cell, &format!("[{block}]"), "#e8f4f8")
            }
            CellKind::SubBlockDef { block } => {
                terminal_box(&mut svg, "subblock-def", cell, &format!("to [{block}]"), "#e8f4f8")
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Renders every page of `s` as a standalone SVG document, in page order.
pub fn render_svg(s: &Schematic, family: &LogicFamily) -> Vec<String> {
    s.pages.iter().map(|p| render_page(s, p, family)).collect()
}
