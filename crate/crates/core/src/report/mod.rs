//! Report emission: CommonMark Markdown plus a JSON mirror of the comparison
//! results, and deterministic SVG charts (see [`svg`]).
//!
//! Every emitter is a pure function of its input — no timestamps, no
//! host-dependent paths, no randomness — so rendering the same comparison
//! twice produces byte-identical artifacts. Golden-file tests pin the exact
//! bytes; regenerate them with
//! `cargo test -p fairbench-core --lib report::golden -- --ignored`
//! after any deliberate format change.

pub mod svg;

pub use svg::{radar, ranking_bars, win_fraction, ChartKind, ChartSpec};

use crate::error::{Error, Result};
use crate::util::format_sci;
use crate::workflow::ComparisonReport;

/// A chart file referenced from the Markdown document. The caller renders
/// and writes the SVG; the report only links to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartRef {
    /// Path as it should appear in the Markdown image link, usually a file
    /// name relative to the report.
    pub file: String,
    pub caption: String,
}

/// The two textual artifacts of a comparison: a human-readable Markdown
/// document and a machine-readable JSON mirror with a stable schema.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub markdown: String,
    /// One object for a single report, an array for several; key order is
    /// `checkpoint`, `average_ranks`, `friedman`, `control`, `pairwise`,
    /// `provenance`.
    pub json: String,
}

/// Renders one Markdown section per comparison report plus an optional chart
/// gallery, and the JSON mirror of the same reports.
pub fn render_report(reports: &[ComparisonReport], charts: &[ChartRef]) -> Result<RenderedReport> {
    if reports.is_empty() {
        return Err(Error::InvalidInput("cannot render an empty report list".into()));
    }
    if let Some(bad) = charts.iter().find(|c| c.file.is_empty()) {
        return Err(Error::InvalidInput(format!(
            "chart reference '{}' has an empty file name",
            bad.caption
        )));
    }
    let mut md = String::from("# Optimizer comparison\n");
    for report in reports {
        section(&mut md, report);
    }
    if !charts.is_empty() {
        md.push_str("\n## Charts\n\n");
        for chart in charts {
            md.push_str(&format!("![{}]({})\n", escape_md(&chart.caption), chart.file));
        }
    }
    let mut json = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        serde_json::to_string_pretty(reports)?
    };
    json.push('\n');
    Ok(RenderedReport { markdown: md, json })
}

/// Escapes table/emphasis metacharacters in user-supplied names.
fn escape_md(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '|' | '\\' | '*' | '_' | '[' | ']' | '`') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn section(md: &mut String, report: &ComparisonReport) {
    match report.checkpoint {
        Some(c) => md.push_str(&format!("\n## Checkpoint: {c} evaluations\n")),
        None => md.push_str("\n## Final results\n"),
    }

    md.push_str("\n### Average ranks\n\n| algorithm | average rank |\n|---|---:|\n");
    for entry in &report.average_ranks {
        md.push_str(&format!("| {} | {:.3} |\n", escape_md(&entry.algorithm), entry.rank));
    }

    let omnibus = &report.friedman;
    md.push_str(&format!(
        "\nOmnibus: {} test over {} functions; statistic = {}, p = {}.\n",
        omnibus.method,
        omnibus.n,
        format_sci(omnibus.statistic),
        format_sci(omnibus.p_value)
    ));

    let alpha = report.alpha();
    if !report.significant() {
        md.push_str(&format!(
            "\nNo significant differences at α = {alpha} (omnibus p = {}); pairwise \
             comparisons were not run.\n",
            format_sci(omnibus.p_value)
        ));
    } else {
        md.push_str(&format!(
            "\n### Pairwise tests vs {} (control)\n\nCorrection: {}; significance level α = \
             {alpha}.\n\n| opponent | raw p | corrected p | significant |\n|---|---:|---:|:-:|\n",
            escape_md(&report.control),
            report.provenance.config.correction
        ));
        for decision in &report.pairwise {
            md.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                escape_md(&decision.opponent),
                format_sci(decision.raw_p),
                format_sci(decision.adjusted_p),
                if decision.significant { "✓" } else { "" }
            ));
        }
        md.push_str("\nTests used:\n\n");
        for decision in &report.pairwise {
            md.push_str(&format!(
                "- {}: {}{}\n",
                escape_md(&decision.opponent),
                decision.test_used,
                if decision.audit.is_empty() {
                    String::new()
                } else {
                    format!(" — {}", decision.audit.join("; "))
                }
            ));
        }
    }

    let provenance = &report.provenance;
    md.push_str(&format!(
        "\n### Provenance\n\n- input digest: `{}`\n- functions ({}): {}\n- runs per cell: {}\n",
        provenance.input_digest,
        provenance.functions.len(),
        provenance.functions.iter().map(|f| escape_md(f)).collect::<Vec<_>>().join(", "),
        provenance.runs
    ));
    // The exact configuration, machine-readable, so a report can be
    // reproduced from its own provenance block.
    if let Ok(config) = serde_json::to_string(&provenance.config) {
        md.push_str(&format!("- configuration: `{config}`\n"));
    }
    if provenance.notes.is_empty() {
        md.push_str("- notes: none\n");
    } else {
        md.push_str("- notes:\n");
        for note in &provenance.notes {
            md.push_str(&format!("  - {}\n", escape_md(note)));
        }
    }
}



#[cfg(test)]
mod golden {
    use super::fixtures::{published_case_study, three_checkpoints};
    use super::*;

    const MARKDOWN: &str = include_str!("golden/case_study.md");
    const JSON: &str = include_str!("golden/case_study.json");
    const BARS_SVG: &str = include_str!("golden/ranking_bars.svg");

    fn render_case_study() -> RenderedReport {
        let charts =
            vec![ChartRef { file: "ranking.svg".into(), caption: "Average ranks".into() }];
        render_report(&[published_case_study()], &charts).unwrap()
    }

    fn render_bars() -> String {
        String::from_utf8(ranking_bars(&three_checkpoints()).unwrap()).unwrap()
    }

    fn assert_pinned(name: &str, actual: &str, golden: &str) {
        if actual != golden {
            let path = std::env::temp_dir().join(name);
            std::fs::write(&path, actual).unwrap();
            panic!(
                "{name} drifted from its golden file; actual bytes written to {}.\n\
                 If the change is deliberate, regenerate with\n\
                 cargo test -p fairbench-core --lib report::golden -- --ignored",
                path.display()
            );
        }
    }

    #[test]
    fn golden_markdown_is_pinned() {
        assert_pinned("case_study.md", &render_case_study().markdown, MARKDOWN);
    }

    #[test]
    fn golden_json_is_pinned() {
        assert_pinned("case_study.json", &render_case_study().json, JSON);
    }

    #[test]
    fn golden_svg_is_pinned() {
        assert_pinned("ranking_bars.svg", &render_bars(), BARS_SVG);
    }

    /// Rewrites the golden files in the source tree. Run explicitly after a
    /// deliberate format change; never runs as part of the normal suite.
    #[test]
    #[ignore = "regenerates golden files in place"]
    fn regenerate_golden_files() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("src/report/golden");
        let rendered = render_case_study();
        std::fs::write(dir.join("case_study.md"), &rendered.markdown).unwrap();
        std::fs::write(dir.join("case_study.json"), &rendered.json).unwrap();
        std::fs::write(dir.join("ranking_bars.svg"), render_bars()).unwrap();
    }
}
