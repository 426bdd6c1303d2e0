//! Plot data as CSV, with optional static SVG charts.
//!
//! Output is a pure function of the inputs: numbers are printed with fixed
//! precision and series keep their input order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::SamplerChoice;
use super::output::write_csv;
use super::univariate::{UnivariateSummary, VisitRecord};
use crate::distributions::TentParams;
use crate::error::{Error, Result};
use crate::metrics::Pmf;

/// `(λ, k_eff, t)` of the three reference tents.
pub const REFERENCE_TENTS: [(i64, u64, f64); 3] = [(0, 1, 0.01), (0, 2, 0.025), (0, 7, 0.05)];
/// Support shown for the reference tents.
pub const TENT_RANGE: (i64, i64) = (-15, 15);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TentPoint {
    pub series: String,
    pub lambda: i64,
    pub k_eff: u64,
    pub t: f64,
    pub y: i64,
    pub pmf: f64,
}

pub const TENT_HEADER: [&str; 6] = ["series", "lambda", "k_eff", "t", "y", "pmf"];

pub fn tent_label(lambda: i64, k_eff: u64, t: f64) -> String {
    format!("P_{t}({lambda},{k_eff})")
}

/// Pmf of each tent over `lo..=hi`, series after series.
pub fn tent_points(tents: &[(i64, u64, f64)], lo: i64, hi: i64) -> Result<Vec<TentPoint>> {
    if lo > hi {
        return Err(Error::Config(format!("empty plot range {lo}..={hi}")));
    }
    let mut out = Vec::with_capacity(tents.len() * (hi - lo + 1) as usize);
    for &(lambda, k_eff, t) in tents {
        let tent = TentParams::new(lambda, k_eff, t)?;
        let series = tent_label(lambda, k_eff, t);
        out.extend((lo..=hi).map(|y| TentPoint {
            series: series.clone(),
            lambda,
            k_eff,
            t,
            y,
            pmf: tent.pmf(y),
        }));
    }
    Ok(out)
}

/// Mean distance of one sampler at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub sampler: SamplerChoice,
    pub metric: String,
    pub iteration: u64,
    pub value: f64,
}

pub const TRACE_HEADER: [&str; 4] = ["sampler", "metric", "iteration", "value"];

/// Long-format mean TV and Hellinger traces from a univariate summary.
pub fn trace_points(summary: &[UnivariateSummary]) -> Vec<TracePoint> {
    let mut out = Vec::new();
    for metric in ["tv", "hellinger"] {
        for s in summary {
            let value = if metric == "tv" {
                s.tv_mean
            } else {
                s.hellinger_mean
            };
            out.push(TracePoint {
                sampler: s.sampler,
                metric: metric.into(),
                iteration: s.iteration,
                value,
            });
        }
    }
    out
}

/// Estimated and true probability of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfPoint {
    pub series: String,
    pub state: i64,
    pub prob: f64,
}

pub const PMF_HEADER: [&str; 3] = ["series", "state", "prob"];

/// Visit frequencies of the given chains next to `truth` over `lo..=hi`.
pub fn pmf_points(records: &[VisitRecord], truth: &Pmf, lo: i64, hi: i64) -> Vec<PmfPoint> {
    let mut out: Vec<PmfPoint> = (lo..=hi)
        .map(|x| PmfPoint {
            series: "target".into(),
            state: x,
            prob: truth.prob(x),
        })
        .collect();
    for r in records {
        let total: u64 = r.counts.iter().map(|&(_, c)| c).sum();
        let series = format!("{}-{}", r.sampler, r.chain);
        for x in lo..=hi {
            let c = r
                .counts
                .iter()
                .find(|&&(s, _)| s == x)
                .map_or(0, |&(_, c)| c);
            out.push(PmfPoint {
                series: series.clone(),
                state: x,
                prob: c as f64 / total.max(1) as f64,
            });
        }
    }
    out
}

/// A minimal static line chart.
#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;

impl LineChart {
    pub fn to_svg(&self) -> String {
        let tx = |x: f64| {
            if self.log_x {
                x.max(f64::MIN_POSITIVE).log10()
            } else {
                x
            }
        };
        let pts = || self.series.iter().flat_map(|(_, p)| p.iter());
        let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for &(x, y) in pts() {
            x0 = x0.min(tx(x));
            x1 = x1.max(tx(x));
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= 0.0 {
            y1 = 1.0;
        }
        let sx = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let sy = |y: f64| H - MARGIN - y / y1 * (H - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            esc(&self.title)
        );
        let (l, r, b, t) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
        let _ = writeln!(
            s,
            r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), f * y1);
            let xs = if self.log_x {
                format!("1e{xv:.1}")
            } else {
                format!("{xv:.1}")
            };
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{xs}</text>"#,
                l + f * (r - l),
                b + 16.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
                l - 4.0,
                sy(yv) + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(&self.y_label)
        );
        for (i, (name, points)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
            let ly = t + 14.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="10" height="3" fill="{color}"/>"#,
                r - 150.0,
                ly - 4.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{ly}">{}</text>"#,
                r - 134.0,
                esc(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn write_svg(path: &Path, chart: &LineChart) -> Result<()> {
    std::fs::write(path, chart.to_svg())?;
    Ok(())
}

/// Groups long-format rows into chart series, preserving first appearance.
fn group<T>(
    rows: &[T],
    key: impl Fn(&T) -> String,
    xy: impl Fn(&T) -> (f64, f64),
) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in rows {
        let k = key(row);
        match out.iter_mut().find(|(name, _)| *name == k) {
            Some((_, pts)) => pts.push(xy(row)),
            None => out.push((k, vec![xy(row)])),
        }
    }
    out
}

/// Writes `tent_pmf.csv` and optionally `tent_pmf.svg`.
pub fn write_tent_plot(
    dir: &Path,
    tents: &[(i64, u64, f64)],
    range: (i64, i64),
    svg: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let points = tent_points(tents, range.0, range.1)?;
    let csv = dir.join("tent_pmf.csv");
    write_csv(&csv, &TENT_HEADER, &points)?;
    let mut files = vec![csv];
    if svg {
        let chart = LineChart {
            title: "Tent pmfs".into(),
            x_label: "y".into(),
            y_label: "probability".into(),
            log_x: false,
            series: group(&points, |p| p.series.clone(), |p| (p.y as f64, p.pmf)),
        };
        let path = dir.join("tent_pmf.svg");
        write_svg(&path, &chart)?;
        files.push(path);
    }
    Ok(files)
}

/// Writes `distance_trace.csv` and optionally one SVG per metric.
pub fn write_trace_plot(
    dir: &Path,
    summary: &[UnivariateSummary],
    svg: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let points = trace_points(summary);
    let csv = dir.join("distance_trace.csv");
    write_csv(&csv, &TRACE_HEADER, &points)?;
    let mut files = vec![csv];
    if svg {
        for metric in ["tv", "hellinger"] {
            let rows: Vec<&TracePoint> = points.iter().filter(|p| p.metric == metric).collect();
            let chart = LineChart {
                title: format!("Mean {metric} distance to the target"),
                x_label: "iteration".into(),
                y_label: metric.into(),
                log_x: true,
                series: group(
                    &rows,
                    |p| p.sampler.to_string(),
                    |p| (p.iteration as f64, p.value),
                ),
            };
            let path = dir.join(format!("distance_{metric}.svg"));
            write_svg(&path, &chart)?;
            files.push(path);
        }
    }
    Ok(files)
}

/// Writes `pmf.csv` and optionally `pmf.svg`.
pub fn write_pmf_plot(
    dir: &Path,
    records: &[VisitRecord],
    truth: &Pmf,
    range: (i64, i64),
    svg: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let points = pmf_points(records, truth, range.0, range.1);
    let csv = dir.join("pmf.csv");
    write_csv(&csv, &PMF_HEADER, &points)?;
    let mut files = vec![csv];
    if svg {
        let chart = LineChart {
            title: "Visit frequencies".into(),
            x_label: "state".into(),
            y_label: "probability".into(),
            log_x: false,
            series: group(&points, |p| p.series.clone(), |p| (p.state as f64, p.prob)),
        };
        let path = dir.join("pmf.svg");
        write_svg(&path, &chart)?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::output::derived_header;

    #[test]
    fn reference_tents_cover_range() {
        let pts = tent_points(&REFERENCE_TENTS, -15, 15).unwrap();
        assert_eq!(pts.len(), 3 * 31);
        assert_eq!(derived_header(&pts[0]), TENT_HEADER);
        for chunk in pts.chunks(31) {
            let mass: f64 = chunk.iter().map(|p| p.pmf).sum();
            assert!(mass > 0.99 && mass <= 1.0 + 1e-12);
            assert_eq!(chunk[15].y, 0);
            assert!(chunk.iter().all(|p| p.pmf <= chunk[15].pmf));
        }
    }

    #[test]
    fn empty_trace_is_header_only_and_output_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_trace_plot(dir.path(), &[], true).unwrap();
        assert_eq!(
            std::fs::read_to_string(&files[0]).unwrap(),
            "sampler,metric,iteration,value\n"
        );
        assert!(std::fs::read_to_string(&files[1])
            .unwrap()
            .starts_with("<svg"));

        let a = write_tent_plot(&dir.path().join("a"), &REFERENCE_TENTS, TENT_RANGE, true).unwrap();
        let b = write_tent_plot(&dir.path().join("b"), &REFERENCE_TENTS, TENT_RANGE, true).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("f");
        std::fs::write(&file, "x").unwrap();
        let err =
            write_tent_plot(&file.join("sub"), &REFERENCE_TENTS, TENT_RANGE, false).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn pmf_points_normalize_counts() {
        let truth = Pmf::from_pairs(vec![(0, 0.5), (1, 0.5)]);
        let rec = VisitRecord {
            sampler: SamplerChoice::Tc,
            chain: 0,
            counts: vec![(0, 3), (1, 1)],
        };
        let pts = pmf_points(&[rec], &truth, 0, 1);
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[2].series.as_str(), pts[2].prob), ("tc-0", 0.75));
    }
}
