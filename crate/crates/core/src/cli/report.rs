//! Report rows, CSV/JSON emission and the margin histogram.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::bounds::BoundSummary;
use crate::error::{CommlabError, Result};
use crate::info::InfoProfile;
use crate::verify::{check_ic, check_main_inequality, BatchRow, RhoMode};

/// Column order of every report.
pub const HEADER: [&str; 19] = [
    "instance_id",
    "seed",
    "sizes",
    "rho_global",
    "rho_box_max",
    "H_T",
    "I_XY",
    "I_XY_given_T",
    "margin_main",
    "ic",
    "margin_ic",
    "cover_exact",
    "cover_greedy",
    "fooling_best",
    "rank_rational",
    "rank_gf2",
    "color_count",
    "status",
    "runtime_ms",
];

/// One output line. Absent analyses stay `None` and print as empty fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance_id: String,
    pub seed: Option<u64>,
    pub sizes: String,
    pub rho_global: Option<u32>,
    pub rho_box_max: Option<u32>,
    #[serde(rename = "H_T")]
    pub h_t: Option<f64>,
    #[serde(rename = "I_XY")]
    pub i_xy: Option<f64>,
    #[serde(rename = "I_XY_given_T")]
    pub i_xy_given_t: Option<f64>,
    pub margin_main: Option<f64>,
    pub ic: Option<f64>,
    pub margin_ic: Option<f64>,
    pub cover_exact: Option<usize>,
    pub cover_greedy: Option<usize>,
    pub fooling_best: Option<usize>,
    pub rank_rational: Option<usize>,
    pub rank_gf2: Option<usize>,
    pub color_count: Option<usize>,
    pub status: String,
    pub runtime_ms: f64,
    /// Additional named values; JSON output only.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

pub fn sizes_label(sizes: &[usize]) -> String {
    sizes
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, ToString::to_string)
}

impl ReportRow {
    pub fn fields(&self) -> [String; 19] {
        [
            self.instance_id.clone(),
            opt(&self.seed),
            self.sizes.clone(),
            opt(&self.rho_global),
            opt(&self.rho_box_max),
            opt(&self.h_t),
            opt(&self.i_xy),
            opt(&self.i_xy_given_t),
            opt(&self.margin_main),
            opt(&self.ic),
            opt(&self.margin_ic),
            opt(&self.cover_exact),
            opt(&self.cover_greedy),
            opt(&self.fooling_best),
            opt(&self.rank_rational),
            opt(&self.rank_gf2),
            opt(&self.color_count),
            self.status.clone(),
            format!("{:.3}", self.runtime_ms),
        ]
    }

    /// Fills the information columns from a profile.
    pub fn with_profile(mut self, profile: &InfoProfile, rho_mode: RhoMode) -> Self {
        self.rho_global = Some(profile.rho_global);
        self.rho_box_max = Some(profile.rho_box_max);
        self.h_t = Some(profile.h_t);
        self.i_xy = profile.i_xy;
        self.i_xy_given_t = profile.i_xy_given_t;
        self.ic = profile.ic;
        if profile.arity == 2 {
            self.margin_main = check_main_inequality(profile, rho_mode)
                .ok()
                .map(|r| r.margin);
            self.margin_ic = check_ic(profile, rho_mode).ok().map(|(_, b)| b.margin);
        }
        self
    }

    pub fn with_bounds(mut self, s: &BoundSummary) -> Self {
        self.cover_exact = s.cover_exact();
        self.cover_greedy = s.cover_greedy;
        self.fooling_best = Some(s.fooling_best());
        self.rank_rational = Some(s.rank_rational_total());
        self.rank_gf2 = Some(s.rank_gf2_total());
        self.color_count = Some(s.color_count);
        self
    }

    pub fn from_batch(row: &BatchRow, generator: &str, rho_mode: RhoMode, tol: f64) -> Self {
        let sizes = row
            .case
            .as_ref()
            .map(|c| sizes_label(c.dist.shape().sizes()))
            .unwrap_or_default();
        let mut out = ReportRow {
            instance_id: format!("{}-{}-{}", row.suite.as_str(), generator, row.seed),
            seed: Some(row.seed),
            sizes,
            status: row.status.as_str().to_string(),
            runtime_ms: row.runtime_ms,
            ..Default::default()
        };
        if let Some(p) = &row.profile {
            out = out.with_profile(p, rho_mode);
        }
        for r in &row.reports {
            out.extra
                .insert(format!("margin_{}", r.inequality.id()), r.margin + 0.0);
        }
        if let Some(e) = &row.error {
            out.status = format!("error: {}", e.replace(['\n', ','], " "));
        } else {
            let bad: Vec<&str> = row
                .violations(tol)
                .iter()
                .map(|r| r.inequality.id())
                .collect();
            if !bad.is_empty() {
                out.status = format!("violation:{}", bad.join("+"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CommlabError::invalid(format!("writing report: {e}"));
    w.write_record(HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CommlabError::invalid(format!("writing report: {e}")))
}

pub fn write_json<W: Write>(rows: &[ReportRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)
        .map_err(|e| CommlabError::invalid(format!("writing report: {e}")))?;
    writeln!(out).map_err(|e| CommlabError::invalid(format!("writing report: {e}")))
}

pub fn render(rows: &[ReportRow], format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(rows, &mut buf)?,
        Format::Json => write_json(rows, &mut buf)?,
    }
    Ok(buf)
}

const HIST_BINS: usize = 10;

/// Counts per bin over `[min, max]`; a single bin when all values agree.
pub fn histogram(values: &[f64]) -> Vec<(f64, f64, usize)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let Some(lo) = finite.iter().copied().reduce(f64::min) else {
        return Vec::new();
    };
    let hi = finite.iter().copied().fold(lo, f64::max);
    if hi - lo < 1e-12 {
        return vec![(lo, hi, finite.len())];
    }
    let width = (hi - lo) / HIST_BINS as f64;
    let mut counts = vec![0usize; HIST_BINS];
    for v in finite {
        let k = (((v - lo) / width) as usize).min(HIST_BINS - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c))
        .collect()
}

/// Static bar chart of `values`; one `rect` per bin carrying its range and
/// count as attributes.
pub fn histogram_svg(values: &[f64], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 320.0;
    const PAD: f64 = 40.0;
    let bins = histogram(values);
    let max = bins.iter().map(|b| b.2).max().unwrap_or(0).max(1) as f64;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(s, r#"<title>{}</title>"#, escape(title)).unwrap();
    writeln!(
        s,
        r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#
    )
    .unwrap();
    let bw = if bins.is_empty() {
        0.0
    } else {
        (W - 2.0 * PAD) / bins.len() as f64
    };
    for (k, (lo, hi, count)) in bins.iter().enumerate() {
        let h = (H - 2.0 * PAD) * *count as f64 / max;
        writeln!(
            s,
            r#"<rect class="bin" data-lo="{lo}" data-hi="{hi}" data-count="{count}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="steelblue" stroke="black"/>"#,
            PAD + k as f64 * bw,
            H - PAD - h,
            bw,
            h
        )
        .unwrap();
    }
    if let (Some(first), Some(last)) = (bins.first(), bins.last()) {
        writeln!(
            s,
            r#"<text x="{PAD}" y="{}" font-size="12">{:.4}</text>"#,
            H - PAD / 3.0,
            first.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{:.4}</text>"#,
            W - PAD,
            H - PAD / 3.0,
            last.1
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        PAD / 2.0,
        escape(title)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Vec<ReportRow> {
        (0..n)
            .map(|i| ReportRow {
                instance_id: format!("r{i}"),
                seed: Some(i as u64),
                sizes: "2x2".into(),
                margin_main: Some(i as f64),
                status: "ok".into(),
                ..Default::default()
            })
            .collect()
    }

    #[test]
    fn csv_has_header_and_rows() {
        let text = String::from_utf8(render(&rows(3), Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], HEADER.join(","));
        // missing values are empty, never zero
        assert!(
            lines[1].starts_with("r0,0,2x2,,,,,,0,,,,,,,,,ok,"),
            "{}",
            lines[1]
        );
    }

    #[test]
    fn json_is_an_array() {
        let text = render(&rows(3), Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&text).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 3);
        assert!(v[0]["cover_exact"].is_null());
        assert_eq!(v[1]["margin_main"], 1.0);
    }

    #[test]
    fn histogram_of_known_values() {
        let svg = histogram_svg(&[0.0, 1.0, 0.0], "margins");
        let nonzero = svg
            .lines()
            .filter(|l| l.contains(r#"class="bin""#) && !l.contains(r#"data-count="0""#))
            .count();
        assert_eq!(nonzero, 2);
        assert!(svg.contains(r#"data-count="2""#));
        assert_eq!(histogram(&[0.5, 0.5]), vec![(0.5, 0.5, 2)]);
        assert!(histogram(&[]).is_empty());
    }
}
