//! Deterministic SVG 1.1 chart rendering: grouped ranking bars per
//! checkpoint, a radar of group rankings, and proportional win-fraction
//! segments. Every chart is a self-contained document — fixed canvas,
//! embedded styling, no external fonts, no timestamps — so identical inputs
//! produce identical bytes, suitable for archival and golden-file pinning.

use crate::error::{Error, Result};
use crate::workflow::ComparisonReport;

/// The chart families this module can draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    RankingBars,
    Radar,
    WinFraction,
}

/// Everything a renderer needs, already validated: series (one per
/// algorithm), groups (checkpoints, axes, or the single filtered group), and
/// a `data[series][group]` matrix on a fixed pixel canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub series: Vec<String>,
    pub groups: Vec<String>,
    pub data: Vec<Vec<f64>>,
    pub width: u32,
    pub height: u32,
}

impl ChartSpec {
    pub fn validate(&self) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::InvalidInput("chart needs at least one series".into()));
        }
        if self.groups.is_empty() {
            return Err(Error::InvalidInput("chart needs at least one group".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidInput("chart canvas must have positive size".into()));
        }
        if self.data.len() != self.series.len() {
            return Err(Error::InvalidInput(format!(
                "chart has {} series but {} data rows",
                self.series.len(),
                self.data.len()
            )));
        }
        for (name, row) in self.series.iter().zip(&self.data) {
            if row.len() != self.groups.len() {
                return Err(Error::InvalidInput(format!(
                    "series '{name}' has {} values for {} groups",
                    row.len(),
                    self.groups.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "series '{name}' contains the non-finite value {bad}"
                )));
            }
        }
        Ok(())
    }
}

/// Fixed qualitative palette (cycled when there are more series).
const PALETTE: [&str; 8] =
    ["#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb", "#222255"];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Escapes text nodes and attribute values.
fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Two-decimal fixed formatting keeps coordinates deterministic.
fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn open_svg(out: &mut String, width: u32, height: u32, title: &str) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    out.push_str(
        "<style>text{font-family:monospace;font-size:12px;fill:#222222}\
         .title{font-size:15px}.axis{stroke:#222222;stroke-width:1}\
         .grid{stroke:#dddddd;stroke-width:1;fill:none}</style>\n",
    );
    out.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));
    out.push_str(&format!(
        "<text class=\"title\" x=\"{}\" y=\"24\" text-anchor=\"middle\">{}</text>\n",
        width / 2,
        esc(title)
    ));
}

fn legend(out: &mut String, series: &[String], x: f64, y: f64) {
    for (i, name) in series.iter().enumerate() {
        let row_y = y + i as f64 * 18.0;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
            px(x),
            px(row_y - 10.0),
            color(i)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            px(x + 18.0),
            px(row_y),
            esc(name)
        ));
    }
}

/// Grouped bar chart of average ranks: one group of bars per checkpoint, one
/// bar per algorithm, bar height proportional to the average rank (lower is
/// better). All reports must rank the same algorithms in the same order.
pub fn ranking_bars(reports: &[ComparisonReport]) -> Result<Vec<u8>> {
    if reports.is_empty() {
        return Err(Error::InvalidInput("ranking_bars needs at least one report".into()));
    }
    let series: Vec<String> =
        reports[0].average_ranks.iter().map(|e| e.algorithm.clone()).collect();
    for report in reports {
        let names: Vec<&str> =
            report.average_ranks.iter().map(|e| e.algorithm.as_str()).collect();
        if names != series.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::InvalidInput(format!(
                "reports disagree on the algorithm set: [{}] vs [{}]",
                series.join(", "),
                names.join(", ")
            )));
        }
    }
    let groups: Vec<String> = reports
        .iter()
        .map(|r| r.checkpoint.map_or_else(|| "final".to_string(), |c| c.to_string()))
        .collect();
    // data[algorithm][checkpoint]
    let data: Vec<Vec<f64>> = (0..series.len())
        .map(|a| reports.iter().map(|r| r.average_ranks[a].rank).collect())
        .collect();
    let spec = ChartSpec {
        kind: ChartKind::RankingBars,
        title: "Average rank by checkpoint (lower is better)".into(),
        series,
        groups,
        data,
        width: 800,
        height: 480,
    };
    spec.validate()?;
    Ok(render_ranking_bars(&spec).into_bytes())
}

fn render_ranking_bars(spec: &ChartSpec) -> String {
    let (x0, y0, x1, y1) = (60.0, 48.0, 620.0, 420.0_f64);
    let k = spec.series.len();
    let scale = k.max(1) as f64; // ranks live in [1, k]
    let mut out = String::new();
    open_svg(&mut out, spec.width, spec.height, &spec.title);

    // Horizontal gridlines and y tick labels at every whole rank.
    for tick in 0..=(scale as usize) {
        let y = y1 - (tick as f64 / scale) * (y1 - y0);
        out.push_str(&format!(
            "<line class=\"grid\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            px(x0),
            px(y),
            px(x1),
            px(y)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{tick}</text>\n",
            px(x0 - 8.0),
            px(y + 4.0)
        ));
    }

    let group_w = (x1 - x0) / spec.groups.len() as f64;
    let bar_w = group_w * 0.8 / k as f64;
    for (g, label) in spec.groups.iter().enumerate() {
        let gx = x0 + g as f64 * group_w;
        for (i, row) in spec.data.iter().enumerate() {
            let value = row[g];
            let h = (value / scale) * (y1 - y0);
            let x = gx + group_w * 0.1 + i as f64 * bar_w;
            out.push_str(&format!(
                "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                px(x),
                px(y1 - h),
                px(bar_w),
                px(h),
                color(i)
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            px(gx + group_w / 2.0),
            px(y1 + 20.0),
            esc(label)
        ));
    }
    out.push_str(&format!(
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        px(x0),
        px(y0),
        px(x0),
        px(y1)
    ));
    out.push_str(&format!(
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        px(x0),
        px(y1),
        px(x1),
        px(y1)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">evaluations checkpoint</text>\n",
        px((x0 + x1) / 2.0),
        px(y1 + 42.0)
    ));
    legend(&mut out, &spec.series, x1 + 16.0, y0 + 14.0);
    out.push_str("</svg>\n");
    out
}

/// Radar of per-group average ranks: one closed polygon per algorithm, one
/// axis per group in input order. Radius is the *inverted* rank — a larger
/// radius is better — and the legend states the convention. Ranks must lie
/// in `[1, k]` for `k` algorithms.
pub fn radar(algorithms: &[String], groups: &[String], ranks: &[Vec<f64>]) -> Result<Vec<u8>> {
    if groups.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "a radar chart needs at least 3 axes, got {} groups; use ranking_bars instead",
            groups.len()
        )));
    }
    let spec = ChartSpec {
        kind: ChartKind::Radar,
        title: "Average rank by function group (larger radius = better)".into(),
        series: algorithms.to_vec(),
        groups: groups.to_vec(),
        data: ranks.to_vec(),
        width: 680,
        height: 560,
    };
    spec.validate()?;
    let k = spec.series.len() as f64;
    for (name, row) in spec.series.iter().zip(&spec.data) {
        if let Some(bad) = row.iter().find(|r| **r < 1.0 || **r > k) {
            return Err(Error::InvalidInput(format!(
                "series '{name}' has rank {bad} outside [1, {k}]"
            )));
        }
    }
    Ok(render_radar(&spec).into_bytes())
}

fn render_radar(spec: &ChartSpec) -> String {
    let (cx, cy, radius) = (270.0, 300.0_f64, 200.0_f64);
    let k = spec.series.len() as f64;
    let n = spec.groups.len();
    let angle = |i: usize| -> f64 {
        -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / n as f64
    };
    // Inverted rank: best (1) on the rim, worst (k) at radius/k — never at
    // the exact center, so every polygon stays visible.
    let to_r = |rank: f64| -> f64 { radius * (k + 1.0 - rank) / k };

    let mut out = String::new();
    open_svg(&mut out, spec.width, spec.height, &spec.title);

    // Concentric grid rings at whole ranks, worst innermost.
    let mut tick = 1.0;
    while tick <= k + 1e-9 {
        let r = to_r(tick);
        let points: Vec<String> = (0..n)
            .map(|i| format!("{},{}", px(cx + r * angle(i).cos()), px(cy + r * angle(i).sin())))
            .collect();
        out.push_str(&format!("<polygon class=\"grid\" points=\"{}\"/>\n", points.join(" ")));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"start\">rank {tick}</text>\n",
            px(cx + 4.0),
            px(cy - r - 3.0)
        ));
        tick += 1.0;
    }
    // Spokes and axis labels.
    for (i, group) in spec.groups.iter().enumerate() {
        let (dx, dy) = (angle(i).cos(), angle(i).sin());
        out.push_str(&format!(
            "<line class=\"grid\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            px(cx),
            px(cy),
            px(cx + radius * dx),
            px(cy + radius * dy)
        ));
        let anchor = if dx.abs() < 0.3 {
            "middle"
        } else if dx > 0.0 {
            "start"
        } else {
            "end"
        };
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\">{}</text>\n",
            px(cx + (radius + 14.0) * dx),
            px(cy + (radius + 14.0) * dy + 4.0),
            esc(group)
        ));
    }
    // One closed polygon per algorithm.
    for (i, row) in spec.data.iter().enumerate() {
        let points: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(axis, rank)| {
                let r = to_r(*rank);
                format!("{},{}", px(cx + r * angle(axis).cos()), px(cy + r * angle(axis).sin()))
            })
            .collect();
        out.push_str(&format!(
            "<polygon class=\"series\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.10\" \
             stroke=\"{}\" stroke-width=\"2\"/>\n",
            points.join(" "),
            color(i),
            color(i)
        ));
    }
    legend(&mut out, &spec.series, 540.0, 60.0);
    out.push_str("</svg>\n");
    out
}

/// Proportional segments of per-algorithm win shares within one (possibly
/// tag-filtered) group of functions. `counts` come straight from the win
/// tally; the optional `group` label names the filter in the title.
pub fn win_fraction(algorithms: &[String], counts: &[u64], group: Option<&str>) -> Result<Vec<u8>> {
    if algorithms.len() != counts.len() {
        return Err(Error::InvalidInput(format!(
            "{} algorithms but {} win counts",
            algorithms.len(),
            counts.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput(
            "no wins to draw: the filtered group is empty".into(),
        ));
    }
    let title = match group {
        Some(g) => format!("Share of functions won ({g})"),
        None => "Share of functions won (all functions)".to_string(),
    };
    let spec = ChartSpec {
        kind: ChartKind::WinFraction,
        title,
        series: algorithms.to_vec(),
        groups: vec![group.unwrap_or("all").to_string()],
        data: counts.iter().map(|c| vec![*c as f64]).collect(),
        width: 800,
        height: 160 + 18 * algorithms.len() as u32,
    };
    spec.validate()?;
    Ok(render_win_fraction(&spec, counts, total).into_bytes())
}

fn render_win_fraction(spec: &ChartSpec, counts: &[u64], total: u64) -> String {
    let (x0, x1, y0, y1) = (40.0, 760.0, 60.0, 110.0_f64);
    let mut out = String::new();
    open_svg(&mut out, spec.width, spec.height, &spec.title);
    // One segment per algorithm, zero-width for zero wins, so the chart
    // structure mirrors the input.
    let mut x = x0;
    for (i, count) in counts.iter().enumerate() {
        let w = (x1 - x0) * (*count as f64) / total as f64;
        out.push_str(&format!(
            "<rect class=\"segment\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
            px(x),
            px(y0),
            px(w),
            px(y1 - y0),
            color(i)
        ));
        x += w;
    }
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#222222\" stroke-width=\"1\"/>\n",
        px(x0),
        px(y0),
        px(x1 - x0),
        px(y1 - y0)
    ));
    for (i, (name, count)) in spec.series.iter().zip(counts).enumerate() {
        let y = y1 + 28.0 + i as f64 * 18.0;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
            px(x0),
            px(y - 10.0),
            color(i)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{} {count}/{total} ({:.1}%)</text>\n",
            px(x0 + 18.0),
            px(y),
            esc(name),
            100.0 * *count as f64 / total as f64
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{TestMethod, TestResult};
    use crate::workflow::{ComparisonConfig, Provenance, RankEntry};

    fn report(checkpoint: Option<usize>, ranks: &[(&str, f64)]) -> ComparisonReport {
        ComparisonReport {
            checkpoint,
            average_ranks: ranks
                .iter()
                .map(|(a, r)| RankEntry { algorithm: a.to_string(), rank: *r })
                .collect(),
            friedman: TestResult::new(TestMethod::Friedman, 10.0, 0.01, ranks.len(), ""),
            control: ranks[0].0.to_string(),
            pairwise: Vec::new(),
            provenance: Provenance {
                config: ComparisonConfig::default(),
                input_digest: "test-digest".into(),
                functions: vec!["f1".into(), "f2".into()],
                runs: 1,
                notes: Vec::new(),
            },
        }
    }

    /// Minimal well-formedness scan: one root element, balanced tags, quoted
    /// attributes. Not a full parser, but it catches structural breakage.
    fn assert_well_formed(svg: &str) {
        assert!(svg.starts_with("<?xml"), "XML declaration first");
        let mut stack: Vec<String> = Vec::new();
        let mut roots = 0;
        for (start, _) in svg.match_indices('<') {
            let rest = &svg[start..];
            if rest.starts_with("<?") {
                continue;
            }
            let end = rest.find('>').expect("every tag closes");
            let tag = &rest[1..end];
            if let Some(name) = tag.strip_prefix('/') {
                let open = stack.pop().unwrap_or_else(|| panic!("stray closer </{name}>"));
                assert_eq!(open, name, "tag mismatch");
                if stack.is_empty() {
                    roots += 1;
                }
            } else {
                let name: String =
                    tag.chars().take_while(|c| c.is_ascii_alphanumeric()).collect();
                assert!(!name.is_empty(), "unnamed tag in {tag}");
                // Attribute values must all be quoted: equals always
                // followed by a quote.
                let body = tag.trim_end_matches('/');
                for (eq, _) in body.match_indices('=') {
                    assert!(
                        body[eq + 1..].starts_with('"'),
                        "unquoted attribute in <{tag}>"
                    );
                }
                if !tag.ends_with('/') {
                    stack.push(name);
                } else if stack.is_empty() {
                    roots += 1;
                }
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
        assert_eq!(roots, 1, "exactly one root element");
    }

    fn count(haystack: &str, needle: &str) -> usize {
        haystack.match_indices(needle).count()
    }

    #[test]
    fn ranking_bars_draws_one_bar_per_algorithm_per_checkpoint() {
        let single = ranking_bars(&[report(Some(100), &[("solo", 1.0)])]).unwrap();
        let svg = String::from_utf8(single).unwrap();
        assert_well_formed(&svg);
        assert_eq!(count(&svg, "class=\"bar\""), 1, "one algorithm, one checkpoint, one bar");

        let ranks: [&[(&str, f64)]; 3] = [
            &[("a", 1.4), ("b", 2.3), ("c", 2.9), ("d", 3.4)],
            &[("a", 1.6), ("b", 2.1), ("c", 3.1), ("d", 3.2)],
            &[("a", 1.5), ("b", 2.4), ("c", 3.0), ("d", 3.1)],
        ];
        let reports: Vec<ComparisonReport> = ranks
            .iter()
            .enumerate()
            .map(|(i, r)| report(Some((i + 1) * 1000), r))
            .collect();
        let svg = String::from_utf8(ranking_bars(&reports).unwrap()).unwrap();
        assert_well_formed(&svg);
        assert_eq!(count(&svg, "class=\"bar\""), 12, "3 checkpoints x 4 algorithms");
        for label in ["1000", "2000", "3000"] {
            assert!(svg.contains(&format!(">{label}</text>")), "group label {label}");
        }
    }

    #[test]
    fn ranking_bars_rejects_mismatched_algorithm_sets() {
        let reports = vec![
            report(Some(10), &[("a", 1.0), ("b", 2.0)]),
            report(Some(20), &[("a", 1.0), ("c", 2.0)]),
        ];
        let err = ranking_bars(&reports).unwrap_err();
        assert!(err.to_string().contains("disagree"), "{err}");
        assert!(matches!(ranking_bars(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn bar_heights_are_proportional_to_ranks() {
        let svg = String::from_utf8(
            ranking_bars(&[report(None, &[("a", 1.0), ("b", 2.0)])]).unwrap(),
        )
        .unwrap();
        let heights: Vec<f64> = svg
            .lines()
            .filter(|l| l.contains("class=\"bar\""))
            .map(|l| {
                let tail = l.split("height=\"").nth(1).unwrap();
                tail.split('"').next().unwrap().parse().unwrap()
            })
            .collect();
        assert_eq!(heights.len(), 2);
        assert!(
            (heights[1] / heights[0] - 2.0).abs() < 0.01,
            "rank 2 bar is twice the rank 1 bar: {heights:?}"
        );
    }

    #[test]
    fn radar_needs_three_axes() {
        let algorithms = vec!["a".to_string(), "b".to_string()];
        let groups = vec!["g1".to_string(), "g2".to_string()];
        let err = radar(&algorithms, &groups, &[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err();
        assert!(err.to_string().contains("ranking_bars"), "suggests the alternative: {err}");
    }

    #[test]
    fn constant_rank_draws_a_regular_polygon() {
        let algorithms = vec!["steady".to_string(), "other".to_string()];
        let groups: Vec<String> = (0..4).map(|i| format!("group{i}")).collect();
        let data = vec![vec![1.5, 1.5, 1.5, 1.5], vec![1.2, 1.9, 1.4, 1.7]];
        let svg = String::from_utf8(radar(&algorithms, &groups, &data).unwrap()).unwrap();
        assert_well_formed(&svg);

        let polygons: Vec<&str> =
            svg.lines().filter(|l| l.contains("class=\"series\"")).collect();
        assert_eq!(polygons.len(), 2, "one closed polygon per algorithm");
        let points_attr =
            polygons[0].split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        let vertices: Vec<(f64, f64)> = points_attr
            .split(' ')
            .map(|pair| {
                let (x, y) = pair.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect();
        assert_eq!(vertices.len(), 4, "one vertex per axis");
        let (cx, cy) = (270.0, 300.0);
        let distances: Vec<f64> = vertices
            .iter()
            .map(|(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt())
            .collect();
        let spread = distances.iter().cloned().fold(f64::MIN, f64::max)
            - distances.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.05, "equidistant vertices, spread {spread}: {distances:?}");
    }

    #[test]
    fn radar_rejects_out_of_range_ranks() {
        let algorithms = vec!["a".to_string(), "b".to_string()];
        let groups: Vec<String> = (0..3).map(|i| format!("g{i}")).collect();
        let err =
            radar(&algorithms, &groups, &[vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0]]).unwrap_err();
        assert!(err.to_string().contains("outside"), "{err}");
    }

    #[test]
    fn win_fraction_segments_are_proportional() {
        let algorithms: Vec<String> =
            ["better", "equal", "worse", "unknown"].iter().map(|s| s.to_string()).collect();
        let svg =
            String::from_utf8(win_fraction(&algorithms, &[12, 1, 0, 2], None).unwrap()).unwrap();
        assert_well_formed(&svg);
        let widths: Vec<f64> = svg
            .lines()
            .filter(|l| l.contains("class=\"segment\""))
            .map(|l| {
                let tail = l.split("width=\"").nth(1).unwrap();
                tail.split('"').next().unwrap().parse().unwrap()
            })
            .collect();
        assert_eq!(widths.len(), 4, "one segment per algorithm, even for zero wins");
        let span = 720.0;
        for (width, count) in widths.iter().zip([12u64, 1, 0, 2]) {
            let expected = span * count as f64 / 15.0;
            assert!((width - expected).abs() < 0.05, "width {width} for {count}/15 wins");
        }
        assert!(svg.contains("12/15"), "legend carries the tallies");
    }

    #[test]
    fn a_clean_sweep_fills_the_whole_bar() {
        let algorithms = vec!["sweep".to_string(), "rest".to_string()];
        let svg = String::from_utf8(win_fraction(&algorithms, &[7, 0], None).unwrap()).unwrap();
        let first = svg.lines().find(|l| l.contains("class=\"segment\"")).unwrap();
        let width: f64 = first
            .split("width=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!((width - 720.0).abs() < 0.05, "full-width segment, got {width}");
    }

    #[test]
    fn win_fraction_rejects_an_empty_group() {
        let algorithms = vec!["a".to_string(), "b".to_string()];
        let err = win_fraction(&algorithms, &[0, 0], Some("multimodal")).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(err.to_string().contains("empty"), "{err}");
    }

    #[test]
    fn filtered_wins_recompute_against_the_win_count_oracle() {
        use crate::stats::{count_wins, Direction};
        use crate::workflow::{ResultsMatrix, SummaryStatistic};
        // Three functions, two tagged "multimodal"; the filter selects them
        // and the wins are recomputed on the submatrix.
        let algorithms = vec!["a".to_string(), "b".to_string()];
        let functions = vec!["f1".to_string(), "f2".to_string(), "f3".to_string()];
        let tags = [true, true, false]; // multimodal?
        let values = [
            [1.0, 2.0], // f1: a wins
            [3.0, 1.0], // f2: b wins
            [0.5, 0.9], // f3: a wins, but filtered out
        ];
        let keep: Vec<usize> = (0..3).filter(|&i| tags[i]).collect();
        let filtered_functions: Vec<String> =
            keep.iter().map(|&i| functions[i].clone()).collect();
        let filtered_values: Vec<Vec<f64>> =
            keep.iter().map(|&i| values[i].to_vec()).collect();
        let matrix = ResultsMatrix::from_single_values(
            algorithms.clone(),
            filtered_functions,
            &filtered_values,
        )
        .unwrap();
        let wins = matrix.wins(SummaryStatistic::Median, Direction::LowerIsBetter).unwrap();
        let oracle = count_wins(&filtered_values, Direction::LowerIsBetter).unwrap();
        assert_eq!(wins, oracle, "matrix wins match the direct tally");
        assert_eq!(wins, vec![1, 1]);
        let svg = String::from_utf8(
            win_fraction(&algorithms, &wins, Some("multimodal")).unwrap(),
        )
        .unwrap();
        assert!(svg.contains("multimodal"), "the filter is named in the chart");
        assert_eq!(count(&svg, "class=\"segment\""), 2);
    }

    #[test]
    fn charts_escape_markup_in_names() {
        let algorithms = vec!["a<&>\"x".to_string()];
        let svg =
            String::from_utf8(win_fraction(&algorithms, &[3], None).unwrap()).unwrap();
        assert_well_formed(&svg);
        assert!(svg.contains("a&lt;&amp;&gt;&quot;x"), "markup escaped");
    }

    #[test]
    fn renderers_are_deterministic() {
        let reports =
            vec![report(Some(5), &[("a", 1.2), ("b", 1.8)]), report(None, &[("a", 1.1), ("b", 1.9)])];
        assert_eq!(ranking_bars(&reports).unwrap(), ranking_bars(&reports).unwrap());
        let algorithms = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let groups: Vec<String> = (0..4).map(|i| format!("g{i}")).collect();
        let data =
            vec![vec![1.0, 2.0, 3.0, 1.5], vec![2.0, 1.0, 1.5, 3.0], vec![3.0, 3.0, 2.0, 2.0]];
        assert_eq!(
            radar(&algorithms, &groups, &data).unwrap(),
            radar(&algorithms, &groups, &data).unwrap()
        );
        assert_eq!(
            win_fraction(&algorithms, &[3, 1, 0], Some("shifted")).unwrap(),
            win_fraction(&algorithms, &[3, 1, 0], Some("shifted")).unwrap()
        );
    }
}
