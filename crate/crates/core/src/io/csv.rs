//! CSV emission and parsing for trajectories and parameter sweeps.
//!
//! Numbers are written in plain decimal with 12 significant digits — enough
//! that values survive an emit → parse round trip to better than `1e-11`
//! relative error, and small enough to keep files diffable.

use std::fmt::Write;

use crate::analysis::{Line, RegimeKind};
use crate::error::{Error, Result};
use crate::simulate::{Trajectory, TrajectorySample};

/// Significant digits for all CSV numeric output.
const SIG_DIGITS: i32 = 12;

/// Plain-decimal rendering with [`SIG_DIGITS`] significant digits.
pub(crate) fn fmt_sig(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Renders a trajectory as `t,L,F,S` rows followed by a final
/// `# outcome=<kind>` comment line.
pub fn write_trajectory_csv(trajectory: &Trajectory) -> Result<String> {
    if trajectory.samples.is_empty() {
        return Err(Error::Domain(
            "cannot write a trajectory with no samples".into(),
        ));
    }
    let mut out = String::from("t,L,F,S\n");
    for s in &trajectory.samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(s.time),
            fmt_sig(s.leaders),
            fmt_sig(s.foot_soldiers),
            fmt_sig(s.strength)
        );
    }
    let _ = writeln!(out, "# outcome={}", trajectory.outcome.tag());
    Ok(out)
}

/// Parses text produced by [`write_trajectory_csv`]: returns the samples
/// and the outcome tag from the trailing comment, if present.
pub fn parse_trajectory_csv(text: &str) -> Result<(Vec<TrajectorySample>, Option<String>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty CSV".into(),
        })?;
    if header != "t,L,F,S" {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `t,L,F,S`, found `{header}`"),
        });
    }
    let mut samples = Vec::new();
    let mut outcome = None;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(tag) = rest.trim().strip_prefix("outcome=") {
                outcome = Some(tag.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 4 columns, found {}", fields.len()),
            });
        }
        let mut parsed = [0.0_f64; 4];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            *slot = field.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid number `{field}`"),
            })?;
        }
        samples.push(TrajectorySample {
            time: parsed[0],
            leaders: parsed[1],
            foot_soldiers: parsed[2],
            strength: parsed[3],
        });
    }
    Ok((samples, outcome))
}

/// One row of a parameter sweep: the swept value and, inside the saddle
/// regime, the sink line it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Absent when the regime at this value is not a saddle.
    pub line: Option<Line>,
    pub regime: RegimeKind,
}

/// Renders sweep rows as `value,intercept,slope,regime`, with empty
/// intercept and slope columns outside the saddle regime.
pub fn write_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,intercept,slope,regime\n");
    for row in rows {
        match row.line {
            Some(line) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_sig(row.value),
                    fmt_sig(line.f_intercept),
                    fmt_sig(line.slope),
                    row.regime
                );
            }
            None => {
                let _ = writeln!(out, "{},,,{}", fmt_sig(row.value), row.regime);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{fixed_point, sink_line};
    use crate::model::{OrgParams, OrgState};
    use crate::simulate::{simulate, Method, Outcome, SimOptions};

    fn representative() -> OrgParams {
        OrgParams::uniform(0.1, 0.25, 10.0, 2.0, 5.0, 0.3).unwrap()
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(2.553191489361702), "2.55319148936");
        assert_eq!(fmt_sig(27.659574468085104), "27.6595744681");
        assert_eq!(fmt_sig(-0.5), "-0.500000000000");
        assert_eq!(fmt_sig(1234567890123456.0), "1234567890123456");
        assert_eq!(fmt_sig(0.01), "0.0100000000000");
    }

    #[test]
    fn single_sample_trajectory_renders_three_lines() {
        let traj = Trajectory {
            samples: vec![TrajectorySample {
                time: 0.0,
                leaders: 9.0,
                foot_soldiers: 9.0,
                strength: 99.0,
            }],
            outcome: Outcome::GrowingAtHorizon,
            method: Method::ClosedForm,
        };
        let text = write_trajectory_csv(&traj).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "t,L,F,S");
        assert_eq!(lines[1], "0,9.00000000000,9.00000000000,99.0000000000");
        assert_eq!(lines[2], "# outcome=growing-at-horizon");
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        let traj = Trajectory {
            samples: vec![],
            outcome: Outcome::GrowingAtHorizon,
            method: Method::ClosedForm,
        };
        assert!(write_trajectory_csv(&traj).is_err());
    }

    #[test]
    fn emit_parse_round_trip_is_faithful() {
        let params = representative();
        let start = OrgState::new(9.0, 9.0, 0.0).unwrap();
        let opts = SimOptions {
            t_max: 30.0,
            ..Default::default()
        };
        let traj = simulate(&params, &start, &opts).unwrap();
        let text = write_trajectory_csv(&traj).unwrap();
        let (samples, outcome) = parse_trajectory_csv(&text).unwrap();
        assert_eq!(samples.len(), traj.samples.len());
        assert_eq!(outcome.as_deref(), Some("growing-at-horizon"));
        for (parsed, original) in samples.iter().zip(&traj.samples) {
            for (a, b) in [
                (parsed.time, original.time),
                (parsed.leaders, original.leaders),
                (parsed.foot_soldiers, original.foot_soldiers),
                (parsed.strength, original.strength),
            ] {
                let scale = b.abs().max(1e-300);
                assert!(
                    (a - b).abs() / scale < 1e-11,
                    "{a} vs {b} drifted more than 1e-11"
                );
            }
        }
    }

    #[test]
    fn strength_column_recomputes_from_populations() {
        let params = representative();
        let start = OrgState::new(3.0, 20.0, 0.0).unwrap();
        let opts = SimOptions {
            t_max: 10.0,
            ..Default::default()
        };
        let traj = simulate(&params, &start, &opts).unwrap();
        let (samples, _) = parse_trajectory_csv(&write_trajectory_csv(&traj).unwrap()).unwrap();
        for s in samples {
            let recomputed = params.leader_weight * s.leaders + s.foot_soldiers;
            assert!(
                (recomputed - s.strength).abs() <= 1e-9 * s.strength.abs().max(1.0),
                "S column disagrees with m*L + F"
            );
        }
    }

    #[test]
    fn fixed_point_trajectory_has_constant_rows() {
        let params = representative();
        let fp = fixed_point(&params).unwrap();
        let start = OrgState::new(fp.leaders, fp.foot_soldiers, 0.0).unwrap();
        let opts = SimOptions {
            t_max: 5.0,
            ..Default::default()
        };
        let traj = simulate(&params, &start, &opts).unwrap();
        assert_eq!(traj.outcome, Outcome::FixedPointReached);
        let text = write_trajectory_csv(&traj).unwrap();
        let rows: Vec<&str> = text
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with('#'))
            .collect();
        assert!(rows.len() > 2);
        let tail = |row: &str| row.split_once(',').unwrap().1.to_string();
        let first = tail(rows[0]);
        for row in &rows {
            assert_eq!(tail(row), first, "population columns must stay constant");
        }
    }

    #[test]
    fn collapsing_trajectory_tags_its_outcome() {
        let params = representative();
        let start = OrgState::new(1.0, 5.0, 0.0).unwrap();
        let traj = simulate(&params, &start, &SimOptions::default()).unwrap();
        let text = write_trajectory_csv(&traj).unwrap();
        assert!(text.trim_end().ends_with("# outcome=collapsed"));
    }

    #[test]
    fn parser_rejects_malformed_input() {
        assert!(parse_trajectory_csv("").is_err());
        assert!(parse_trajectory_csv("a,b,c\n").is_err());
        assert!(matches!(
            parse_trajectory_csv("t,L,F,S\n1,2,3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_trajectory_csv("t,L,F,S\n1,2,3,oops\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn sweep_rows_blank_out_of_saddle_lines() {
        let params = representative();
        let line = sink_line(&params).unwrap();
        let rows = [
            SweepRow {
                value: 0.3,
                line: Some(line),
                regime: RegimeKind::Saddle,
            },
            SweepRow {
                value: 3.0,
                line: None,
                regime: RegimeKind::SinkCollapse,
            },
        ];
        let text = write_sweep_csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "value,intercept,slope,regime");
        assert!(lines[1].starts_with("0.300000000000,37.6269328477,"));
        assert!(lines[1].ends_with(",Saddle"));
        assert_eq!(lines[2], "3.00000000000,,,SinkCollapse");
    }
}
