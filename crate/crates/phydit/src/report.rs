//! Plain-text rendering of match reports for the command line.

use crate::matcher::{MatchMatrix, MatchOutcome, MatchReport};

fn verdict(v: bool) -> &'static str {
    if v {
        "yes"
    } else {
        "no"
    }
}

/// Renders one report as a small two-column table, followed by bindings
/// (when the pair matches) or the failure reasons (when it does not).
pub fn render_report(report: &MatchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} x {}\n",
        report.td_id, report.cpd_id
    ));
    let rows = [
        ("system compatible", report.system_compatible),
        ("process compatible", report.process_compatible),
        ("input compatible", report.input_compatible),
        ("output compatible", report.output_compatible),
        ("action coverage", report.action_coverage),
        ("spec compatible", report.spec_compatible),
        ("overall", report.overall),
    ];
    for (name, value) in rows {
        out.push_str(&format!("  {name:<20} {}\n", verdict(value)));
    }
    if report.overall {
        for (input, property) in &report.bindings.inputs {
            out.push_str(&format!("  input     {input} -> {property}\n"));
        }
        for (output, action) in &report.bindings.outputs {
            out.push_str(&format!("  output    {output} -> {action}\n"));
        }
        for (parameter, spec) in &report.bindings.parameters {
            out.push_str(&format!("  parameter {parameter} -> {spec}\n"));
        }
    } else {
        for failure in &report.failure_reasons {
            out.push_str(&format!("  [{}] {}\n", failure.rule, failure.message));
        }
    }
    out
}

/// Renders per-thing summary lines for a whole match run.
pub fn render_summaries(matrix: &MatchMatrix) -> String {
    let mut out = String::new();
    let width = matrix
        .summaries
        .iter()
        .map(|s| s.td_id.len())
        .max()
        .unwrap_or(0);
    for summary in &matrix.summaries {
        let outcome = match summary.outcome {
            MatchOutcome::Unique => "unique",
            MatchOutcome::Multiple => "multiple",
            MatchOutcome::None => "no match",
        };
        if summary.matched.is_empty() {
            out.push_str(&format!("{:<width$}  {outcome}\n", summary.td_id));
        } else {
            out.push_str(&format!(
                "{:<width$}  {outcome}: {}\n",
                summary.td_id,
                summary.matched.join(", ")
            ));
        }
    }
    let unique = matrix
        .summaries
        .iter()
        .filter(|s| s.outcome == MatchOutcome::Unique)
        .count();
    let multiple = matrix
        .summaries
        .iter()
        .filter(|s| s.outcome == MatchOutcome::Multiple)
        .count();
    let none = matrix
        .summaries
        .iter()
        .filter(|s| s.outcome == MatchOutcome::None)
        .count();
    out.push_str(&format!(
        "total: {unique} unique, {multiple} multiple, {none} without match\n"
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{Bindings, TdSummary};

    fn report(overall: bool) -> MatchReport {
        MatchReport {
            td_id: "urn:t".into(),
            cpd_id: "urn:c".into(),
            asd_id: None,
            system_compatible: overall,
            process_compatible: true,
            input_compatible: true,
            output_compatible: true,
            action_coverage: true,
            spec_compatible: true,
            overall,
            bindings: Bindings::default(),
            failure_reasons: Vec::new(),
        }
    }

    #[test]
    fn report_rendering_shows_verdicts() {
        let text = render_report(&report(true));
        assert!(text.contains("overall"));
        assert!(text.contains("yes"));
    }

    #[test]
    fn summary_rendering_counts_outcomes() {
        let matrix = MatchMatrix {
            reports: vec![report(true)],
            summaries: vec![TdSummary {
                td_id: "urn:t".into(),
                outcome: MatchOutcome::Unique,
                matched: vec!["urn:c".into()],
            }],
        };
        let text = render_summaries(&matrix);
        assert!(text.contains("unique: urn:c"));
        assert!(text.contains("total: 1 unique, 0 multiple, 0 without match"));
    }
}
