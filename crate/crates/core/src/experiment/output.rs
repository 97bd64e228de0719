//! Result files: replicates.csv, summary.csv, timings.csv, config.json and
//! boxplot.svg.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::format_f64;

use super::config::ExperimentConfig;
use super::runner::{ExperimentOutput, ReplicateResult, Timing};
use super::summary::{summarize, SummaryRow};

/// Paths of the files written by [`emit_outputs`].
#[derive(Clone, Debug, Default)]
pub struct OutputFiles {
    pub replicates: PathBuf,
    pub summary: PathBuf,
    pub timings: PathBuf,
    pub config: PathBuf,
    /// Absent when there were no rows to plot.
    pub boxplot: Option<PathBuf>,
}

#[derive(Serialize)]
struct Provenance<'a> {
    software: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a ExperimentConfig,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn replicates_csv(rows: &[ReplicateResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["replicate", "tag", "n", "method", "criterion", "label", "metric", "value", "baseline"])?;
    for r in rows {
        w.write_record([
            r.replicate.to_string(),
            r.tag.clone(),
            r.n.to_string(),
            opt(r.method),
            opt(r.criterion),
            r.label.clone(),
            r.metric.name().to_string(),
            format_f64(r.value),
            r.baseline.map_or_else(String::new, format_f64),
        ])?;
    }
    w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tag", "n", "label", "metric", "count", "median", "q25", "q75", "min", "max"])?;
    for s in rows {
        w.write_record([
            s.tag.clone(),
            s.n.to_string(),
            s.label.clone(),
            s.metric.name().to_string(),
            s.count.to_string(),
            format_f64(s.median),
            format_f64(s.q25),
            format_f64(s.q75),
            format_f64(s.min),
            format_f64(s.max),
        ])?;
    }
    w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

fn timings_csv(rows: &[Timing]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["replicate", "n", "label", "seconds"])?;
    for t in rows {
        w.write_record([t.replicate.to_string(), t.n.to_string(), t.label.clone(), format!("{:.6}", t.seconds)])?;
    }
    w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

type Panel<'a> = (&'a (String, usize), Vec<&'a SummaryRow>, Option<&'a SummaryRow>);

/// One panel per training size with a box per method/criterion label;
/// the dashed line marks the full-feature median.
pub fn boxplot_svg(summary: &[SummaryRow], baseline_labels: &[String]) -> String {
    let mut sizes: Vec<(String, usize)> = Vec::new();
    for s in summary {
        let key = (s.tag.clone(), s.n);
        if !sizes.contains(&key) {
            sizes.push(key);
        }
    }
    let box_w = 28.0;
    let gap = 14.0;
    let plot_h = 240.0;
    let top = 40.0;
    let left = 50.0;
    let panels: Vec<Panel> = sizes
        .iter()
        .map(|k| {
            let cells = summary
                .iter()
                .filter(|s| (&s.tag, s.n) == (&k.0, k.1) && !baseline_labels.contains(&s.label))
                .collect();
            let base = summary.iter().find(|s| (&s.tag, s.n) == (&k.0, k.1) && baseline_labels.contains(&s.label));
            (k, cells, base)
        })
        .collect();
    let panel_w = |n: usize| n.max(1) as f64 * (box_w + gap) + gap;
    let width = left + panels.iter().map(|p| panel_w(p.1.len()) + 20.0).sum::<f64>() + 10.0;
    let height = top + plot_h + 90.0;
    let y = |v: f64| top + plot_h * (1.0 - v.clamp(0.0, 1.0));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for t in 0..=4 {
        let v = t as f64 * 0.25;
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            width - 10.0,
            y(v),
            y(v),
            left - 6.0,
            y(v) + 4.0
        );
    }
    let mut x0 = left;
    for ((tag, n), cells, base) in &panels {
        let pw = panel_w(cells.len());
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-weight="bold">{} n={n}</text>"#,
            x0 + pw / 2.0,
            top - 14.0,
            escape(tag)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{x0:.1}" y="{top}" width="{pw:.1}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for (i, s) in cells.iter().enumerate() {
            let cx = x0 + gap + i as f64 * (box_w + gap) + box_w / 2.0;
            let bx = cx - box_w / 2.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{cx:.1}" x2="{cx:.1}" y1="{:.1}" y2="{:.1}" stroke="black"/>"#,
                y(s.max),
                y(s.min)
            );
            let _ = writeln!(
                svg,
                r##"<rect class="box" x="{bx:.1}" y="{:.1}" width="{box_w}" height="{:.1}" fill="#9ecae1" stroke="black"/>"##,
                y(s.q75),
                (y(s.q25) - y(s.q75)).max(0.5)
            );
            let _ = writeln!(
                svg,
                r#"<line x1="{bx:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#,
                bx + box_w,
                y(s.median),
                y(s.median)
            );
            let ty = top + plot_h + 8.0;
            let _ = writeln!(
                svg,
                r#"<text x="{cx:.1}" y="{ty:.1}" transform="rotate(60 {cx:.1} {ty:.1})">{}</text>"#,
                escape(&s.label)
            );
        }
        if let Some(b) = base {
            let _ = writeln!(
                svg,
                r#"<line class="baseline" x1="{x0:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="red" stroke-dasharray="4 3"/>"#,
                x0 + pw,
                y(b.median),
                y(b.median)
            );
        }
        x0 += pw + 20.0;
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes every result file into `dir`, creating it if needed.
pub fn emit_outputs(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: impl AsRef<Path>) -> Result<OutputFiles> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = OutputFiles {
        replicates: dir.join("replicates.csv"),
        summary: dir.join("summary.csv"),
        timings: dir.join("timings.csv"),
        config: dir.join("config.json"),
        boxplot: (!out.rows.is_empty()).then(|| dir.join("boxplot.svg")),
    };
    write_file(&files.replicates, &replicates_csv(&out.rows)?)?;
    write_file(&files.timings, &timings_csv(&out.timings)?)?;
    let summary = if out.rows.is_empty() { Vec::new() } else { summarize(&out.rows)? };
    write_file(&files.summary, &summary_csv(&summary)?)?;
    let provenance = Provenance {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg,
    };
    write_file(&files.config, serde_json::to_string_pretty(&provenance)?.as_bytes())?;
    if let Some(path) = &files.boxplot {
        let baseline: Vec<String> = out.rows.iter().filter(|r| r.method.is_none()).map(|r| r.label.clone()).collect();
        write_file(path, boxplot_svg(&summary, &baseline).as_bytes())?;
    }
    Ok(files)
}
