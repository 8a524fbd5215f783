//! One pass through the public API end to end: parse a scenario, analyze
//! it, simulate its states, and render every output format, checking that
//! the pieces agree with each other.

use orgdyn_core::io::{
    parse_scenario, render_portrait, write_report, write_sweep_csv, write_trajectory_csv,
    PortraitSpec, ReportEntry, SweepRow,
};
use orgdyn_core::{
    sample_orbits, simulate, sink_line, Bounds, Outcome, ParamName, PhaseAnalysis, RegimeKind,
};

const SCENARIO: &str = "\
# Cell with a strong leadership core under moderate pressure.
[params]
p = 0.1
r = 0.25
m = 10
b = 2
k = 5
d = 0.3

[state.cell]
L = 9
F = 9

[state.remnant]
L = 1
F = 5

[simulate]
t_max = 40
dt = 0.01
sample_every = 20
method = rk4

[cost]
c1 = 1
c2 = 1
sigma = 2
budget = 100
";

#[test]
fn scenario_to_every_output_format() {
    let scenario = parse_scenario(SCENARIO).unwrap();
    assert_eq!(scenario.states.len(), 2);
    assert!(scenario.cost.is_some());
    assert_eq!(scenario.options.sample_every, 20);

    let analysis = PhaseAnalysis::new(&scenario.params).unwrap();
    assert_eq!(analysis.regime, RegimeKind::Saddle);

    // Simulate each state with the file's own settings; the CSV must agree
    // with itself (S = m*L + F) after the 12-significant-digit rounding.
    let mut entries = Vec::new();
    for named in &scenario.states {
        let run = simulate(&scenario.params, &named.state, &scenario.options).unwrap();
        let csv = write_trajectory_csv(&run).unwrap();
        let mut rows = 0;
        for line in csv.lines().skip(1).filter(|l| !l.starts_with('#')) {
            let cells: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            let strength = scenario.params.leader_weight * cells[1] + cells[2];
            assert!(
                (strength - cells[3]).abs() <= 1e-9 * cells[3].abs().max(1.0),
                "inconsistent row: {line}"
            );
            rows += 1;
        }
        assert!(rows > 1);
        assert!(csv.ends_with(&format!("# outcome={}\n", run.outcome.tag())));
        entries.push(
            ReportEntry::new(&named.label, named.state)
                .with_verdict(analysis.victory_check(&named.state).unwrap()),
        );
    }

    // The report names both states and reaches opposite recommendations.
    let report = write_report(&analysis, &entries);
    assert!(report.contains("state cell:"));
    assert!(report.contains("state remnant:"));
    assert!(report.contains("an increase in counter-measures is necessary"));
    assert!(report.contains("sustain the current scale"));
    assert_eq!(report, write_report(&analysis, &entries));

    // The portrait shows one orbit per state with both fates present.
    let starts: Vec<_> = scenario.states.iter().map(|n| n.state).collect();
    let orbits = sample_orbits(&scenario.params, &starts, &scenario.options).unwrap();
    assert!(orbits.iter().any(|o| o.trajectory.outcome == Outcome::GrowingAtHorizon));
    assert!(orbits.iter().any(|o| matches!(o.trajectory.outcome, Outcome::Collapsed { .. })));
    let spec = PortraitSpec::new(Bounds::new(0.0, 12.0, 0.0, 60.0).unwrap());
    let svg = render_portrait(&analysis, &orbits, &spec).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<path").count(), 2);
    assert_eq!(svg, render_portrait(&analysis, &orbits, &spec).unwrap());

    // A removal-rate sweep built from the same parameters round-trips into
    // the sweep CSV with the saddle marked on every row.
    let rows: Vec<SweepRow> = (0..5)
        .map(|i| {
            let value = f64::from(i);
            let params = scenario.params.with(ParamName::LeaderRemoval, value).unwrap();
            SweepRow {
                value,
                line: sink_line(&params).ok(),
                regime: orgdyn_core::regime(&params),
            }
        })
        .collect();
    let sweep = write_sweep_csv(&rows);
    assert_eq!(sweep.lines().count(), 6);
    assert!(sweep.lines().skip(1).all(|l| l.ends_with("Saddle")));
}
