//! Plain-text analysis reports: regime, equilibrium, eigenstructure,
//! invariant lines, and a per-state assessment with a recommendation on the
//! scale of counter-measures.

use std::fmt::Write;

use crate::analysis::{ClassKind, PhaseAnalysis, RegimeKind, VictoryReport, VictoryVerdict,
                      critical_desertion, DEFAULT_CLASS_TOL};
use crate::io::csv::fmt_sig;
use crate::model::OrgState;

/// One state to assess in the report, with an optional decline-test result.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub label: String,
    pub state: OrgState,
    /// Result of the observable-decline test, when the caller ran one.
    pub verdict: Option<VictoryReport>,
}

impl ReportEntry {
    pub fn new(label: impl Into<String>, state: OrgState) -> Self {
        ReportEntry {
            label: label.into(),
            state,
            verdict: None,
        }
    }

    pub fn with_verdict(mut self, verdict: VictoryReport) -> Self {
        self.verdict = Some(verdict);
        self
    }
}

fn field(out: &mut String, label: &str, value: impl AsRef<str>) {
    let _ = writeln!(out, "  {:<26} {}", label, value.as_ref());
}

fn line_equation(slope: f64, intercept: f64) -> String {
    format!(
        "F = {} * L {} {}",
        fmt_sig(slope),
        if intercept < 0.0 { "-" } else { "+" },
        fmt_sig(intercept.abs())
    )
}

/// Renders a plain-text report for the analysis and the given states.
///
/// For a saddle regime each state is classified against the invariant lines
/// and the report closes with a recommendation: below the sink line the
/// current scale of counter-measures is enough and should be sustained;
/// above it, only an increase can force eventual collapse. In the collapse
/// regime the per-state machinery is skipped: every initial condition
/// already leads to collapse.
pub fn write_report(analysis: &PhaseAnalysis, entries: &[ReportEntry]) -> String {
    let p = &analysis.params;
    let mut out = String::with_capacity(4096);

    out.push_str("organization dynamics report\n");
    out.push_str("============================\n\n");

    out.push_str("parameters\n");
    field(&mut out, "p (promotion)", fmt_sig(p.promotion));
    field(&mut out, "r (recruitment)", fmt_sig(p.recruitment));
    field(&mut out, "m (leader weight)", fmt_sig(p.leader_weight));
    field(&mut out, "b (leader removal)", fmt_sig(p.leader_removal));
    field(&mut out, "k (soldier removal)", fmt_sig(p.soldier_removal));
    field(&mut out, "d_L (leader desertion)", fmt_sig(p.leader_desertion));
    field(&mut out, "d_F (soldier desertion)", fmt_sig(p.soldier_desertion));
    for warning in p.warnings() {
        let _ = writeln!(out, "  warning: {warning}");
    }
    out.push('\n');

    out.push_str("regime\n");
    field(&mut out, "classification", analysis.regime.to_string());
    field(
        &mut out,
        "stability denominator",
        fmt_sig(analysis.fixed_point.denominator),
    );
    field(
        &mut out,
        "critical uniform desertion",
        fmt_sig(critical_desertion(p.promotion, p.recruitment, p.leader_weight)),
    );
    out.push('\n');

    out.push_str("equilibrium\n");
    field(&mut out, "L*", fmt_sig(analysis.fixed_point.leaders));
    field(&mut out, "F*", fmt_sig(analysis.fixed_point.foot_soldiers));
    field(
        &mut out,
        "S* (strength)",
        fmt_sig(p.leader_weight * analysis.fixed_point.leaders + analysis.fixed_point.foot_soldiers),
    );
    out.push('\n');

    out.push_str("eigenvalues\n");
    field(&mut out, "lambda1 (growing mode)", fmt_sig(analysis.eigen.lambda1));
    field(&mut out, "lambda2 (decaying mode)", fmt_sig(analysis.eigen.lambda2));
    out.push('\n');

    if analysis.regime == RegimeKind::SinkCollapse {
        out.push_str(
            "the equilibrium is attracting but lies outside the population quadrant:\n\
             the organization collapses from every initial condition. no invariant\n\
             lines divide the plane and no state-by-state assessment is needed;\n\
             sustaining the current counter-measures guarantees eventual collapse.\n",
        );
        if !entries.is_empty() {
            out.push('\n');
            out.push_str("states\n");
            for entry in entries {
                let _ = writeln!(
                    out,
                    "  {}: L = {}, F = {} -> collapses",
                    entry.label,
                    fmt_sig(entry.state.leaders),
                    fmt_sig(entry.state.foot_soldiers),
                );
            }
        }
        return out;
    }

    out.push_str("invariant lines\n");
    if let Some(sink) = &analysis.sink_line {
        field(&mut out, "sink line", line_equation(sink.slope, sink.f_intercept));
    }
    if let Some(trend) = &analysis.trend_line {
        field(&mut out, "trend line", line_equation(trend.slope, trend.f_intercept));
    }
    out.push_str(
        "  states below the sink line decay to collapse; states above it grow\n\
         without bound along the trend line.\n",
    );

    for entry in entries {
        out.push('\n');
        let class = analysis.classify(&entry.state, DEFAULT_CLASS_TOL);
        let strength = p.leader_weight * entry.state.leaders + entry.state.foot_soldiers;
        let _ = writeln!(
            out,
            "state {}: L = {}, F = {}, S = {}",
            entry.label,
            fmt_sig(entry.state.leaders),
            fmt_sig(entry.state.foot_soldiers),
            fmt_sig(strength),
        );
        let description = match class.kind {
            ClassKind::Defeated => "defeated (below the sink line)",
            ClassKind::PType => "p-type growth (soldier-rich, above the sink line)",
            ClassKind::RType => "r-type growth (leader-rich, above the sink line)",
            ClassKind::OnSinkLine => "on the sink line (knife edge)",
            ClassKind::OnTrendLine => "on the trend line (pure growing mode)",
        };
        field(&mut out, "classification", description);
        field(
            &mut out,
            "mode coordinates",
            format!("d1 = {}, d2 = {}", fmt_sig(class.coords.d1), fmt_sig(class.coords.d2)),
        );
        if let Some(v) = &entry.verdict {
            field(
                &mut out,
                "observed rates",
                format!(
                    "dS/dt = {}, dF/dt = {}",
                    fmt_sig(v.strength_rate),
                    fmt_sig(v.soldier_rate)
                ),
            );
            let verdict_text = match v.verdict {
                VictoryVerdict::CollapseGuaranteed => {
                    "both observables are declining; collapse is certain under \
                     unchanged counter-measures"
                        .to_string()
                }
                VictoryVerdict::NotSufficient => {
                    format!(
                        "observed rates do not certify defeat ({})",
                        v.failing_conditions().join("; ")
                    )
                }
            };
            field(&mut out, "decline test", verdict_text);
            if !v.guarantee_applies {
                out.push_str(
                    "  note: the decline test is advisory for these parameters: the sink\n\
                     line is steeper than the iso-strength lines, so simultaneous declines\n\
                     can occur above it.\n",
                );
            }
        }
        let recommendation = match class.kind {
            ClassKind::Defeated => {
                "sustain the current scale of counter-measures; the decline\n    \
                 continues to collapse without any escalation"
            }
            ClassKind::PType | ClassKind::RType | ClassKind::OnTrendLine => {
                "an increase in counter-measures is necessary; at the current\n    \
                 scale the organization grows without bound"
            }
            ClassKind::OnSinkLine => {
                "the state balances exactly on the sink line; an increase in\n    \
                 counter-measures is the only safe choice"
            }
        };
        field(&mut out, "recommendation", recommendation);
    }

    out
}
