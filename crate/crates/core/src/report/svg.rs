//! Static SVG figures drawn from CSV rows.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::analysis::export::{CorrelationRow, CurveRow};
use crate::analysis::DeltaRow;
use crate::game::Condition;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 220.0;
const MARGIN: f64 = 36.0;
const COLUMNS: usize = 3;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// One panel per cell; one line per (condition, player) with its CI band. Name lines are
/// solid, NoName lines dashed.
pub fn render_curves(rows: &[CurveRow]) -> String {
    let mut panels: BTreeMap<&str, BTreeMap<(Condition, &str), Vec<&CurveRow>>> = BTreeMap::new();
    for row in rows {
        panels
            .entry(&row.cell)
            .or_default()
            .entry((row.condition, &row.player))
            .or_default()
            .push(row);
    }
    let max_round = rows.iter().map(|r| r.round).max().unwrap_or(1).max(2) as f64;
    let y_max = rows
        .iter()
        .map(|r| r.mean + r.ci_half)
        .fold(10.0f64, f64::max)
        .ceil();

    let count = panels.len().max(1);
    let width = PANEL_W * count.min(COLUMNS) as f64;
    let height = PANEL_H * count.div_ceil(COLUMNS) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    );
    for (i, (cell, lines)) in panels.iter().enumerate() {
        let ox = PANEL_W * (i % COLUMNS) as f64;
        let oy = PANEL_H * (i / COLUMNS) as f64;
        let (pw, ph) = (PANEL_W - 2.0 * MARGIN, PANEL_H - 2.0 * MARGIN);
        let x = |round: f64| ox + MARGIN + (round - 1.0) / (max_round - 1.0) * pw;
        let y = |v: f64| oy + MARGIN + ph - v.clamp(0.0, y_max) / y_max * ph;

        let _ = writeln!(svg, r#"<g class="panel" data-cell="{}">"#, escape(cell));
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-weight="bold">{}</text>"#,
            ox + MARGIN,
            oy + MARGIN - 12.0,
            escape(cell)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#999"/>"##,
            ox + MARGIN,
            oy + MARGIN
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y_max}</text><text x="{:.1}" y="{:.1}" text-anchor="end">0</text>"#,
            ox + MARGIN - 4.0,
            y(y_max) + 3.0,
            ox + MARGIN - 4.0,
            y(0.0) + 3.0
        );
        for (j, ((condition, player), points)) in lines.iter().enumerate() {
            let color = PALETTE[j % PALETTE.len()];
            let upper: Vec<String> = points
                .iter()
                .map(|r| format!("{:.2},{:.2}", x(r.round as f64), y(r.mean + r.ci_half)))
                .collect();
            let lower: Vec<String> = points
                .iter()
                .rev()
                .map(|r| format!("{:.2},{:.2}", x(r.round as f64), y(r.mean - r.ci_half)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
            let line: Vec<String> = points
                .iter()
                .map(|r| format!("{:.2},{:.2}", x(r.round as f64), y(r.mean)))
                .collect();
            let dash = match condition {
                Condition::Name => "",
                Condition::NoName => r#" stroke-dasharray="4 3""#,
            };
            let _ = writeln!(
                svg,
                r#"<polyline class="mean" points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                line.join(" ")
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" fill="{color}">{} ({condition})</text>"#,
                ox + MARGIN + 4.0,
                oy + MARGIN + 12.0 + 11.0 * j as f64,
                escape(player)
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    svg
}

fn pairing_order(p: &str) -> (usize, String) {
    let rank: usize = p
        .chars()
        .map(|c| match c {
            'C' => 0,
            'N' => 1,
            _ => 2,
        })
        .fold(0, |acc, d| acc * 3 + d);
    (rank, p.to_string())
}

/// Rows are `Study N, player`, columns are pairings; significant deltas are bold.
pub fn render_delta_grid(rows: &[DeltaRow]) -> String {
    let mut columns: Vec<String> = rows.iter().map(|r| r.pairing.clone()).collect();
    columns.sort_by_key(|p| pairing_order(p));
    columns.dedup();
    let mut row_labels: Vec<String> = Vec::new();
    for r in rows {
        let label = format!("{}, {}", r.study, r.player);
        if !row_labels.contains(&label) {
            row_labels.push(label);
        }
    }
    let (label_w, cell_w, cell_h) = (200.0, 70.0, 22.0);
    let width = label_w + cell_w * columns.len() as f64;
    let height = cell_h * (row_labels.len() + 1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    for (c, col) in columns.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-weight="bold">{}</text>"#,
            label_w + cell_w * (c as f64 + 0.5),
            cell_h * 0.7,
            escape(col)
        );
    }
    for (i, label) in row_labels.iter().enumerate() {
        let y = cell_h * (i as f64 + 1.7);
        let _ = writeln!(svg, r#"<text x="4" y="{y:.1}">{}</text>"#, escape(label));
        for (c, col) in columns.iter().enumerate() {
            let Some(row) = rows
                .iter()
                .find(|r| &r.pairing == col && &format!("{}, {}", r.study, r.player) == label)
            else {
                continue;
            };
            let weight = if row.significant { r#" font-weight="bold""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<text class="delta" x="{:.1}" y="{y:.1}" text-anchor="middle"{weight} data-key="{}">{:.3}</text>"#,
                label_w + cell_w * (c as f64 + 0.5),
                escape(&row.key),
                row.delta_mean
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn rho_color(rho: f64) -> String {
    // blue for positive, red for negative, white at zero
    let t = rho.clamp(-1.0, 1.0).abs();
    let fade = (255.0 * (1.0 - t)).round() as u8;
    if rho >= 0.0 {
        format!("#{fade:02x}{fade:02x}ff")
    } else {
        format!("#ff{fade:02x}{fade:02x}")
    }
}

/// Rows are cells, columns are seats. Undefined coefficients are drawn grey and marked
/// `n/v` instead of being shown as zero.
pub fn render_correlation_grid(rows: &[CorrelationRow]) -> String {
    let mut cells: Vec<&str> = Vec::new();
    for r in rows {
        if !cells.contains(&r.cell.as_str()) {
            cells.push(&r.cell);
        }
    }
    let seats = rows.iter().map(|r| r.seat + 1).max().unwrap_or(1);
    let (label_w, cell_w, cell_h) = (180.0, 90.0, 24.0);
    let width = label_w + cell_w * seats as f64;
    let height = cell_h * (cells.len() + 1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    for s in 0..seats {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-weight="bold">seat {}</text>"#,
            label_w + cell_w * (s as f64 + 0.5),
            cell_h * 0.7,
            s + 1
        );
    }
    for (i, cell) in cells.iter().enumerate() {
        let top = cell_h * (i as f64 + 1.0);
        let _ = writeln!(svg, r#"<text x="4" y="{:.1}">{}</text>"#, top + cell_h * 0.7, escape(cell));
        for row in rows.iter().filter(|r| r.cell == *cell) {
            let left = label_w + cell_w * row.seat as f64;
            let (fill, text, class) = match row.rho {
                Some(rho) if !row.no_variance => (rho_color(rho), format!("{rho:.2}"), "rho"),
                _ => ("#cccccc".to_string(), "n/v".to_string(), "no-variance"),
            };
            let _ = writeln!(
                svg,
                r##"<rect class="{class}" x="{left:.1}" y="{top:.1}" width="{cell_w}" height="{cell_h}" fill="{fill}" stroke="#fff"/><text x="{:.1}" y="{:.1}" text-anchor="middle">{text}</text>"##,
                left + cell_w / 2.0,
                top + cell_h * 0.7
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::SpearmanMode;
    use crate::game::StudyStyle;

    fn delta(pairing: &str, value: f64, significant: bool) -> DeltaRow {
        DeltaRow {
            study: StudyStyle::Study1,
            player: "GPT-4o".into(),
            seat: 0,
            pairing: pairing.into(),
            key: format!("Study 1, GPT-4o, {pairing}"),
            delta_mean: value,
            name_mean: 0.0,
            noname_mean: 0.0,
            t: 0.0,
            df: 0.0,
            p_value: if significant { 0.01 } else { 0.5 },
            significant,
            n_name: 100,
            n_noname: 100,
        }
    }

    #[test]
    fn significant_delta_is_bold() {
        let svg = render_delta_grid(&[delta("CC", -2.253, true), delta("CS", 0.4, false)]);
        assert!(svg.contains(
            r#"font-weight="bold" data-key="Study 1, GPT-4o, CC">-2.253</text>"#
        ));
        assert!(svg.contains(r#"text-anchor="middle" data-key="Study 1, GPT-4o, CS">0.400</text>"#));
    }

    #[test]
    fn zero_variance_curve_has_flat_band() {
        let rows: Vec<CurveRow> = (1..=3)
            .map(|round| CurveRow {
                cell: "study2-NN".into(),
                condition: Condition::Name,
                player: "p1:x".into(),
                round,
                mean: 5.0,
                ci_half: 0.0,
                n: 10,
            })
            .collect();
        let svg = render_curves(&rows);
        let band = svg.lines().find(|l| l.contains(r#"class="band""#)).unwrap();
        let ys: std::collections::BTreeSet<&str> = band
            .split('"')
            .nth(3)
            .unwrap()
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(ys.len(), 1, "{band}");
    }

    #[test]
    fn no_variance_is_marked() {
        let svg = render_correlation_grid(&[CorrelationRow {
            cell: "study1-CC-name".into(),
            seat: 0,
            player: "x".into(),
            mode: SpearmanMode::Raw,
            rho: None,
            no_variance: true,
            n: 20,
        }]);
        assert!(svg.contains(r#"class="no-variance""#));
        assert!(svg.contains(">n/v<"));
    }
}
