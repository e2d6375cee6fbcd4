//! Report tables and hand-written SVG figures.
//!
//! Numbers are printed with fixed precision so identical record sets give
//! byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::ValueEnum;

use qaoa_core::harness::{aggregate, GroupKey, GroupSummary, RunRecord, Stats};
use qaoa_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    /// Quartile table per group, drawn as box glyphs.
    #[value(name = "boxplot_table", alias = "BOXPLOT_TABLE")]
    BoxplotTable,
    /// Mean final expectation against depth.
    #[value(name = "depth_curve", alias = "DEPTH_CURVE")]
    DepthCurve,
    /// Mean success probability against depth, one series per backend.
    #[value(name = "success_curve", alias = "SUCCESS_CURVE")]
    SuccessCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Svg,
    Both,
}

#[derive(Debug, Clone)]
pub struct ReportSpec {
    pub kind: ReportKind,
    /// Box groups for the table; extra series keys for the curves (the
    /// backend always separates series).
    pub group_by: Vec<GroupKey>,
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportOutput {
    pub csv: Option<String>,
    pub svg: Option<String>,
}

/// One curve: label and `(depth, mean, standard error)` points.
type Series = (String, Vec<(usize, f64, f64)>);

pub fn render_report(records: &[RunRecord], spec: &ReportSpec) -> Result<ReportOutput, Error> {
    if records.is_empty() {
        return Err(Error::Contract("the records file holds no rows".into()));
    }
    let want_csv = spec.format != ReportFormat::Svg;
    let want_svg = spec.format != ReportFormat::Csv;
    match spec.kind {
        ReportKind::BoxplotTable => {
            let keys = if spec.group_by.is_empty() {
                vec![GroupKey::Optimizer, GroupKey::Depth, GroupKey::Backend]
            } else {
                spec.group_by.clone()
            };
            let groups = aggregate(records, &keys)?;
            Ok(ReportOutput {
                csv: want_csv.then(|| boxplot_csv(&groups, &keys)),
                svg: want_svg.then(|| boxplot_svg(&groups, &keys)),
            })
        }
        ReportKind::DepthCurve | ReportKind::SuccessCurve => {
            let success = spec.kind == ReportKind::SuccessCurve;
            if success && records.iter().any(|r| r.success_prob.is_none()) {
                return Err(Error::Contract(
                    "column `success_prob` is empty; run a success_probability experiment".into(),
                ));
            }
            let series = curves(records, &spec.group_by, success)?;
            let (title, y_label) = if success {
                ("Success probability vs depth", "success probability")
            } else {
                ("Mean final expectation vs depth", "final expectation")
            };
            let value_col = if success { "mean_success_prob" } else { "mean_expectation" };
            Ok(ReportOutput {
                csv: want_csv.then(|| curve_csv(&series, value_col)),
                svg: want_svg.then(|| curve_svg(&series, title, y_label)),
            })
        }
    }
}

fn curves(records: &[RunRecord], extra: &[GroupKey], success: bool) -> Result<Vec<Series>, Error> {
    let mut keys: Vec<GroupKey> = vec![GroupKey::Backend];
    keys.extend(extra.iter().copied().filter(|k| *k != GroupKey::Backend && *k != GroupKey::Depth));
    let mut all = keys.clone();
    all.push(GroupKey::Depth);
    let mut series: BTreeMap<String, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for g in aggregate(records, &all)? {
        let label: Vec<String> = keys.iter().map(|k| g.group.get(*k)).collect();
        let stats: Stats = if success {
            g.success.expect("checked above")
        } else {
            g.expectation
        };
        series.entry(label.join("/")).or_default().push((
            g.group.depth.expect("grouped by depth"),
            stats.mean,
            stats.standard_error(),
        ));
    }
    Ok(series.into_iter().collect())
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

fn boxplot_csv(groups: &[GroupSummary], keys: &[GroupKey]) -> String {
    let mut out = String::new();
    let mut header: Vec<&str> = keys.iter().map(|k| k.column()).collect();
    header.extend(["count", "mean", "std", "min", "q1", "median", "q3", "max"]);
    out.push_str(&header.join(","));
    out.push('\n');
    for g in groups {
        let s = &g.expectation;
        let mut row: Vec<String> = keys.iter().map(|k| g.group.get(*k)).collect();
        row.push(s.count.to_string());
        row.extend([s.mean, s.std, s.min, s.q1, s.median, s.q3, s.max].map(fmt));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn curve_csv(series: &[Series], value_col: &str) -> String {
    let mut out = format!("series,depth,{value_col},stderr\n");
    for (label, points) in series {
        for (d, m, se) in points {
            let _ = writeln!(out, "{label},{d},{},{}", fmt(*m), fmt(*se));
        }
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Maps data values onto a vertical pixel range.
struct Scale {
    lo: f64,
    hi: f64,
    top: f64,
    bottom: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, top: f64, bottom: f64) -> Self {
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        Self {
            lo: lo - pad,
            hi: hi + pad,
            top,
            bottom,
        }
    }

    fn y(&self, v: f64) -> f64 {
        self.bottom - (v - self.lo) / (self.hi - self.lo) * (self.bottom - self.top)
    }
}

fn svg_open(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        width / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, scale: &Scale, x: f64, label: &str) {
    let _ = writeln!(
        out,
        "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        scale.top, scale.bottom
    );
    for i in 0..=4 {
        let v = scale.lo + (scale.hi - scale.lo) * i as f64 / 4.0;
        let y = scale.y(v);
        let _ = writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{x:.1}\" y2=\"{y:.1}\" stroke=\"black\"/>",
            x - 4.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{v:.3}</text>",
            x - 6.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 14 {:.1})\">{}</text>",
        (scale.top + scale.bottom) / 2.0,
        (scale.top + scale.bottom) / 2.0,
        escape(label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn boxplot_svg(groups: &[GroupSummary], keys: &[GroupKey]) -> String {
    let slot = 48.0;
    let left = 70.0;
    let width = left + slot * groups.len() as f64 + 20.0;
    let height = 420.0;
    let lo = groups.iter().map(|g| g.expectation.min).fold(f64::INFINITY, f64::min);
    let hi = groups.iter().map(|g| g.expectation.max).fold(f64::NEG_INFINITY, f64::max);
    let scale = Scale::new(lo, hi, 40.0, 320.0);
    let mut out = String::new();
    svg_open(&mut out, width, height, "Final expectation by group");
    y_axis(&mut out, &scale, left - 10.0, "final expectation");
    for (i, g) in groups.iter().enumerate() {
        let s = &g.expectation;
        let cx = left + slot * (i as f64 + 0.5);
        let half = slot * 0.3;
        let _ = writeln!(
            out,
            "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
            scale.y(s.max),
            scale.y(s.min)
        );
        for v in [s.min, s.max] {
            let _ = writeln!(
                out,
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"black\"/>",
                cx - half / 2.0,
                cx + half / 2.0,
                y = scale.y(v)
            );
        }
        let top = scale.y(s.q3);
        let _ = writeln!(
            out,
            "<rect x=\"{:.1}\" y=\"{top:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{}\" fill-opacity=\"0.5\" stroke=\"black\"/>",
            cx - half,
            2.0 * half,
            (scale.y(s.q1) - top).max(0.5),
            PALETTE[i % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"black\" stroke-width=\"2\"/>",
            cx - half,
            cx + half,
            y = scale.y(s.median)
        );
        let label: Vec<String> = keys.iter().map(|k| g.group.get(*k)).collect();
        let _ = writeln!(
            out,
            "<text x=\"{cx:.1}\" y=\"332\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" transform=\"rotate(-60 {cx:.1} 332)\">{}</text>",
            escape(&label.join(" "))
        );
    }
    out.push_str("</svg>\n");
    out
}

fn curve_svg(series: &[Series], title: &str, y_label: &str) -> String {
    let left = 70.0;
    let right = 160.0;
    let plot_w = 420.0;
    let width = left + plot_w + right;
    let height = 360.0;
    let points = series.iter().flat_map(|(_, p)| p.iter());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut d_lo, mut d_hi) = (usize::MAX, 0usize);
    for &(d, m, se) in points {
        lo = lo.min(m - se);
        hi = hi.max(m + se);
        d_lo = d_lo.min(d);
        d_hi = d_hi.max(d);
    }
    let scale = Scale::new(lo, hi, 40.0, 300.0);
    let x = |d: usize| {
        if d_hi == d_lo {
            left + plot_w / 2.0
        } else {
            left + 10.0 + (d - d_lo) as f64 / (d_hi - d_lo) as f64 * (plot_w - 20.0)
        }
    };
    let mut out = String::new();
    svg_open(&mut out, width, height, title);
    y_axis(&mut out, &scale, left, y_label);
    let _ = writeln!(
        out,
        "<line x1=\"{left:.1}\" y1=\"300.0\" x2=\"{:.1}\" y2=\"300.0\" stroke=\"black\"/>",
        left + plot_w
    );
    for d in d_lo..=d_hi {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"316\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{d}</text>",
            x(d)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"336\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">depth p</text>",
        left + plot_w / 2.0
    );
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for w in pts.windows(2) {
            let _ = writeln!(
                out,
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>",
                x(w[0].0),
                scale.y(w[0].1),
                x(w[1].0),
                scale.y(w[1].1)
            );
        }
        for &(d, m, se) in pts {
            let _ = writeln!(
                out,
                "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" stroke=\"{color}\"/>",
                scale.y(m + se),
                scale.y(m - se),
                cx = x(d)
            );
            let _ = writeln!(
                out,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"6\" height=\"6\" fill=\"{color}\"/>",
                x(d) - 3.0,
                scale.y(m) - 3.0
            );
        }
        let ly = 50.0 + 18.0 * i as f64;
        let lx = left + plot_w + 15.0;
        let _ = writeln!(out, "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>", ly - 10.0);
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            lx + 18.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qaoa_core::gradient::Backend;
    use qaoa_core::optimizers::Method;

    fn rec(depth: usize, backend: Backend, value: f64, success: Option<f64>) -> RunRecord {
        RunRecord {
            graph_id: "g".into(),
            depth,
            optimizer: Method::Spsa,
            backend,
            trial: 0,
            seed: 0,
            final_expectation: value,
            success_prob: success,
            evals_used: 10,
            params: Vec::new(),
            exact_expectation: None,
            wall_ms: 0,
        }
    }

    fn spec(kind: ReportKind, format: ReportFormat) -> ReportSpec {
        ReportSpec {
            kind,
            group_by: Vec::new(),
            format,
        }
    }

    #[test]
    fn one_group_box_row() {
        let rs: Vec<RunRecord> = (1..=5).map(|v| rec(1, Backend::Statevector, v as f64, None)).collect();
        let out = render_report(&rs, &spec(ReportKind::BoxplotTable, ReportFormat::Both)).unwrap();
        let csv = out.csv.unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "optimizer,depth,backend,count,mean,std,min,q1,median,q3,max");
        assert_eq!(
            lines[1],
            "spsa,1,statevector,5,3.000000,1.581139,1.000000,2.000000,3.000000,4.000000,5.000000"
        );
        assert_eq!(lines.len(), 2);
        let svg = out.svg.unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<rect").count(), 2);
    }

    #[test]
    fn success_curve_has_series_per_backend() {
        let mut rs = Vec::new();
        for d in 1..=3 {
            rs.push(rec(d, Backend::Noisy, 1.0, Some(0.1 * d as f64)));
            rs.push(rec(d, Backend::Statevector, 1.0, Some(0.2 * d as f64)));
        }
        let out = render_report(&rs, &spec(ReportKind::SuccessCurve, ReportFormat::Csv)).unwrap();
        assert!(out.svg.is_none());
        let csv = out.csv.unwrap();
        assert!(csv.starts_with("series,depth,mean_success_prob,stderr\n"));
        assert!(csv.contains("noisy,2,0.200000,0.000000"));
        assert!(csv.contains("statevector,3,0.600000,0.000000"));
        rs[0].success_prob = None;
        let err = render_report(&rs, &spec(ReportKind::SuccessCurve, ReportFormat::Csv)).unwrap_err();
        assert!(err.to_string().contains("success_prob"));
    }

    #[test]
    fn svg_is_byte_stable() {
        let rs: Vec<RunRecord> = (1..=4).map(|d| rec(d, Backend::Noisy, 5.0 - d as f64, None)).collect();
        let s = spec(ReportKind::DepthCurve, ReportFormat::Svg);
        let a = render_report(&rs, &s).unwrap().svg.unwrap();
        let b = render_report(&rs, &s).unwrap().svg.unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("<path") && !a.contains("<polyline"));
    }
}
