//! Static SVG charts for sweep summaries.
//!
//! Per (n, m, s) slice of the summary, four standalone files are written:
//! F1 vs SNR, the FDR-power plane with SNR labels, relative error vs SNR,
//! and measurement error vs SNR. Everything is hand-emitted SVG 1.1 with
//! no external assets.

use std::path::{Path, PathBuf};

use super::{SummaryRow, MeanSe};
use crate::error::Result;
use crate::metrics::Method;
use crate::model::SnrDb;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 46.0;
const MARGIN_B: f64 = 58.0;

fn method_color(method: Method) -> &'static str {
    match method {
        Method::KnockoffCs => "#c0392b",
        Method::Lasso => "#2471a3",
        Method::Omp => "#1e8449",
    }
}

/// Padded axis range containing every value; degenerate spans are widened.
fn axis_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 100.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_lo + t * (frame.x_hi - frame.x_lo);
        let yv = frame.y_lo + t * (frame.y_hi - frame.y_lo);
        let xp = frame.x(xv);
        let yp = frame.y(yv);
        out.push_str(&format!(
            "<line x1=\"{xp}\" y1=\"{y0}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{xp}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            y0 + 5.0,
            y0 + 20.0,
            fmt_tick(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{x0}\" y2=\"{yp}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            yp + 4.0,
            fmt_tick(yv)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        xml_escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        xml_escape(y_label)
    ));
    out
}

fn legend(methods: &[Method]) -> String {
    let mut out = String::new();
    let mut x = MARGIN_L + 10.0;
    let y = MARGIN_T - 8.0;
    for &m in methods {
        let color = method_color(m);
        out.push_str(&format!(
            "<rect x=\"{x}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            y - 10.0,
            x + 16.0,
            y,
            m.name()
        ));
        x += 110.0;
    }
    out
}

/// Line chart of one metric against SNR (dB), one polyline per method.
/// Returns `None` when no finite-SNR points exist.
fn metric_vs_snr_chart(
    rows: &[&SummaryRow],
    title: &str,
    y_label: &str,
    pick: fn(&SummaryRow) -> MeanSe,
) -> Option<String> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in rows {
        if let SnrDb::Db(db) = r.cell.snr_db {
            let v = pick(r).mean;
            if v.is_finite() {
                xs.push(db);
                ys.push(v);
            }
        }
    }
    if xs.is_empty() {
        return None;
    }
    let (x_lo, x_hi) = axis_range(&xs);
    let (y_lo, y_hi) = axis_range(&ys);
    let frame = Frame { x_lo, x_hi, y_lo, y_hi };
    let mut out = svg_open(title);
    out.push_str(&axes(&frame, "SNR (dB)", y_label));
    out.push_str(&legend(&Method::ALL));
    for &method in Method::ALL.iter() {
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| match r.cell.snr_db {
                SnrDb::Db(db) => {
                    let v = pick(r).mean;
                    v.is_finite().then_some((db, v))
                }
                SnrDb::Noiseless => None,
            })
            .collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = method_color(method);
        let path: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", frame.x(*x), frame.y(*y)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            path.join(" ")
        ));
        for (x, y) in &pts {
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{color}\"/>\n",
                frame.x(*x),
                frame.y(*y)
            ));
        }
    }
    out.push_str("</svg>\n");
    Some(out)
}

/// FDR-power plane: one point per (method, SNR), labeled with the SNR.
fn fdr_power_chart(rows: &[&SummaryRow], title: &str) -> Option<String> {
    let pts: Vec<(&SummaryRow, f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            let (f, p) = (r.fdp.mean, r.power.mean);
            (f.is_finite() && p.is_finite()).then_some((*r, f, p))
        })
        .collect();
    if pts.is_empty() {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|(_, f, _)| *f).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, _, p)| *p).collect();
    let (x_lo, x_hi) = axis_range(&xs);
    let (y_lo, y_hi) = axis_range(&ys);
    let frame = Frame { x_lo, x_hi, y_lo, y_hi };
    let mut out = svg_open(title);
    out.push_str(&axes(&frame, "FDR", "power"));
    out.push_str(&legend(&Method::ALL));
    for (row, f, p) in &pts {
        let color = method_color(row.method);
        let (cx, cy) = (frame.x(*f), frame.y(*p));
        out.push_str(&format!(
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"4.5\" fill=\"{color}\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"{color}\">{}</text>\n",
            cx + 6.0,
            cy - 5.0,
            row.cell.snr_db
        ));
    }
    out.push_str("</svg>\n");
    Some(out)
}

/// Emit the per-(n, m, s) chart files; returns the written paths.
/// An empty summary writes nothing.
pub fn emit_plots(summary: &[SummaryRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut groups: Vec<(usize, usize, usize)> = summary
        .iter()
        .map(|r| (r.cell.n, r.cell.m, r.cell.s))
        .collect();
    groups.sort_unstable();
    groups.dedup();

    let mut written = Vec::new();
    for (n, m, s) in groups {
        let rows: Vec<&SummaryRow> = summary
            .iter()
            .filter(|r| (r.cell.n, r.cell.m, r.cell.s) == (n, m, s))
            .collect();
        let slug = format!("n{n}_m{m}_s{s}");
        let charts: [(String, Option<String>); 4] = [
            (
                format!("f1_vs_snr_{slug}.svg"),
                metric_vs_snr_chart(
                    &rows,
                    &format!("F1 score vs SNR (n={n}, m={m}, s={s})"),
                    "F1 score",
                    |r| r.f1,
                ),
            ),
            (
                format!("fdr_power_{slug}.svg"),
                fdr_power_chart(&rows, &format!("FDR-power trade-off (n={n}, m={m}, s={s})")),
            ),
            (
                format!("relative_error_{slug}.svg"),
                metric_vs_snr_chart(
                    &rows,
                    &format!("Relative error vs SNR (n={n}, m={m}, s={s})"),
                    "relative error",
                    |r| r.relative_error,
                ),
            ),
            (
                format!("measurement_error_{slug}.svg"),
                metric_vs_snr_chart(
                    &rows,
                    &format!("Measurement error vs SNR (n={n}, m={m}, s={s})"),
                    "measurement error",
                    |r| r.measurement_error,
                ),
            ),
        ];
        for (name, chart) in charts {
            if let Some(svg) = chart {
                let path = out_dir.join(name);
                std::fs::write(&path, svg)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::StatisticKind;
    use crate::harness::{run_sweep, SweepConfig};

    /// Minimal well-formedness check: tags balance, attributes quoted.
    fn assert_well_formed_xml(text: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = text;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').expect("unclosed tag") + start;
            let tag = &rest[start + 1..end];
            rest = &rest[end + 1..];
            if tag.starts_with('?') || tag.starts_with('!') {
                continue;
            }
            if let Some(name) = tag.strip_prefix('/') {
                let open = stack.pop().unwrap_or_else(|| panic!("orphan </{name}>"));
                assert_eq!(open, name, "mismatched tag");
            } else if !tag.ends_with('/') {
                let name: String = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
            // attribute quotes must balance inside the tag
            assert!(tag.matches('"').count() % 2 == 0, "unbalanced quotes in <{tag}>");
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    fn one_cell_summary() -> Vec<SummaryRow> {
        let config = SweepConfig {
            n_list: vec![20],
            m_list: vec![12],
            s_list: vec![2],
            snr_db_list: vec![crate::model::SnrDb::Db(20.0)],
            trials: 2,
            statistic: StatisticKind::Marginal,
            ..SweepConfig::default()
        };
        run_sweep(&config, None).unwrap().summary
    }

    #[test]
    fn one_cell_table_produces_four_well_formed_files() {
        let summary = one_cell_summary();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plots(&summary, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        for f in &files {
            let text = std::fs::read_to_string(f).unwrap();
            assert_well_formed_xml(&text);
            assert!(text.starts_with("<?xml"));
        }
    }

    #[test]
    fn empty_summary_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plots(&[], dir.path()).unwrap();
        assert!(files.is_empty());
    }

    #[test]
    fn axis_range_contains_all_values() {
        let vals = [0.1, 0.9, 0.4];
        let (lo, hi) = axis_range(&vals);
        for v in vals {
            assert!(lo <= v && v <= hi);
        }
        // degenerate span still has positive width
        let (lo, hi) = axis_range(&[2.0, 2.0]);
        assert!(hi > lo);
        assert!(lo <= 2.0 && 2.0 <= hi);
    }

    #[test]
    fn chart_coordinates_stay_inside_viewbox() {
        let summary = one_cell_summary();
        let rows: Vec<&SummaryRow> = summary.iter().collect();
        let svg = fdr_power_chart(&rows, "t").unwrap();
        for part in svg.split("cx=\"").skip(1) {
            let v: f64 = part.split('"').next().unwrap().parse().unwrap();
            assert!(v >= 0.0 && v <= WIDTH);
        }
        for part in svg.split("cy=\"").skip(1) {
            let v: f64 = part.split('"').next().unwrap().parse().unwrap();
            assert!(v >= 0.0 && v <= HEIGHT);
        }
    }
}
