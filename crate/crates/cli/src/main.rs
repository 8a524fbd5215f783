//! `orgdyn` — scenario files in, reports/CSV/SVG out.
//!
//! Subcommands: `analyze` (plain-text phase report), `simulate` (one CSV
//! per state), `portrait` (SVG phase portrait), `sweep` (sink line vs one
//! parameter, CSV), `policy` (removal-strategy comparison), and `theorem`
//! (decline-test verdict per state, scriptable exit code).
//!
//! Exit codes: 0 success; 1 file or scenario parse error; 2 invariant
//! violation (bad parameter, option, or command usage); 3 degenerate or
//! out-of-regime analysis; 10 from `theorem` when some state is not
//! certifiably defeated. Diagnostics go to stderr; stdout carries only
//! payload. Identical invocations produce byte-identical outputs.

use std::fmt::Write as _;
use std::io::{IsTerminal, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orgdyn_core::io::{
    parse_scenario, render_portrait, write_report, write_sweep_csv, write_trajectory_csv,
    PortraitSpec, ReportEntry, Scenario, SweepRow,
};
use orgdyn_core::{
    bk_equivalence, compare_strategies, preferred_target, regime, sample_orbits, sink_line,
    Bounds, ClassKind, Error, FeasibilityOutcome, Method, OrgParams, OrgState, ParamName,
    PhaseAnalysis, RegimeKind, Result, VictoryVerdict,
};

#[derive(Parser)]
#[command(
    name = "orgdyn",
    version,
    about = "Two-population organization dynamics: phase analysis, simulation, portraits, and counter-measure policy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Arguments shared by every subcommand.
#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file to load.
    scenario: PathBuf,
    /// Parameter override `KEY=VALUE`, applied after the file is parsed and
    /// re-validated (keys: p, r, m, b, k, d, d_L, d_F). Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Phase-analysis report: regime, equilibrium, invariant lines, and
    /// per-state advice.
    Analyze {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Write the report to this file instead of standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Integrate every scenario state; writes `<label>.csv` per state.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Horizon override.
        #[arg(long)]
        t_max: Option<f64>,
        /// Step-size override.
        #[arg(long)]
        dt: Option<f64>,
        /// Integration method override: `closed` or `rk4`.
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        /// Sampling-stride override (record every n-th step).
        #[arg(long)]
        sample_every: Option<usize>,
        /// Directory for the per-state CSV files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// SVG phase portrait with the scenario states as orbits.
    Portrait {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Plot window `LMAXxFMAX` measured from the origin (e.g. `8x60`).
        /// Defaults to twice the equilibrium, widened to fit all states.
        #[arg(long)]
        bounds: Option<String>,
        /// Direction-field resolution `COLSxROWS`.
        #[arg(long, default_value = "20x20")]
        grid: String,
        /// Write the SVG to this file instead of standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter; writes the sink line per value as CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Parameter to sweep: p, r, m, b, k, d_L or d_F.
        #[arg(long)]
        param: String,
        /// First swept value.
        #[arg(long)]
        from: f64,
        /// Last swept value; must exceed `from`.
        #[arg(long)]
        to: f64,
        /// Number of evenly spaced values, at least 2.
        #[arg(long)]
        steps: usize,
        /// Write the CSV to this file instead of standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare removal strategies under the scenario's [cost] section.
    Policy {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Write the report to this file instead of standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Per-state decline-test verdicts; exit 0 only when every state is
    /// certifiably defeated, 10 otherwise.
    Theorem {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse()
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Parse { .. } => 1,
        Error::InvalidParam { .. } | Error::Domain(_) => 2,
        Error::Degenerate(_) | Error::NotSaddle(_) => 3,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { scenario, out } => analyze(&load(&scenario)?, out.as_deref()),
        Command::Simulate {
            scenario,
            t_max,
            dt,
            method,
            sample_every,
            out_dir,
        } => {
            let mut sc = load(&scenario)?;
            if let Some(v) = t_max {
                sc.options.t_max = v;
            }
            if let Some(v) = dt {
                sc.options.dt = v;
            }
            if let Some(v) = method {
                sc.options.method = v;
            }
            if let Some(v) = sample_every {
                sc.options.sample_every = v;
            }
            simulate_states(&sc, &out_dir)
        }
        Command::Portrait {
            scenario,
            bounds,
            grid,
            out,
        } => portrait(&load(&scenario)?, bounds.as_deref(), &grid, out.as_deref()),
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
            out,
        } => sweep(&load(&scenario)?, &param, from, to, steps, out.as_deref()),
        Command::Policy { scenario, out } => policy(&load(&scenario)?, out.as_deref()),
        Command::Theorem { scenario } => theorem(&load(&scenario)?),
    }
}

fn load(args: &ScenarioArgs) -> Result<Scenario> {
    let text = std::fs::read_to_string(&args.scenario)?;
    let mut scenario = parse_scenario(&text)?;
    apply_overrides(&mut scenario.params, &args.set)?;
    Ok(scenario)
}

/// Applies `--set key=value` overrides in order, then re-validates once, so
/// an intermediate combination may be invalid as long as the result is not.
fn apply_overrides(params: &mut OrgParams, sets: &[String]) -> Result<()> {
    for spec in sets {
        let (key, value) = spec.split_once('=').ok_or_else(|| {
            Error::Domain(format!("override `{spec}` is not of the form key=value"))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Domain(format!("override `{spec}` does not have a numeric value"))
        })?;
        let name = param_by_key(key.trim()).ok_or_else(|| {
            Error::Domain(format!(
                "unknown parameter `{}` in override (expected p, r, m, b, k, d, d_L or d_F)",
                key.trim()
            ))
        })?;
        match name {
            ParamName::Promotion => params.promotion = value,
            ParamName::Recruitment => params.recruitment = value,
            ParamName::LeaderWeight => params.leader_weight = value,
            ParamName::LeaderRemoval => params.leader_removal = value,
            ParamName::SoldierRemoval => params.soldier_removal = value,
            ParamName::LeaderDesertion => params.leader_desertion = value,
            ParamName::SoldierDesertion => params.soldier_desertion = value,
            ParamName::UniformDesertion => {
                params.leader_desertion = value;
                params.soldier_desertion = value;
            }
        }
    }
    params.validate()
}

fn param_by_key(key: &str) -> Option<ParamName> {
    ParamName::ALL.into_iter().find(|name| name.key() == key)
}

/// Writes `text` to `out`, or to stdout when absent. Reports written to a
/// terminal get bold section headers unless `ORGDYN_NO_COLOR` is set; files
/// and pipes always receive plain bytes.
fn emit(text: &str, out: Option<&Path>, styled: bool) -> Result<u8> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if styled && std::io::stdout().is_terminal()
                && std::env::var_os("ORGDYN_NO_COLOR").is_none()
            {
                stdout.write_all(embolden_headers(text).as_bytes())?;
            } else {
                stdout.write_all(text.as_bytes())?;
            }
        }
    }
    Ok(0)
}

/// Bolds unindented non-empty lines — the section headers of our reports.
fn embolden_headers(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 64);
    for line in text.lines() {
        if !line.is_empty() && !line.starts_with(' ') && !line.starts_with('=') {
            let _ = writeln!(out, "\x1b[1m{line}\x1b[0m");
        } else {
            let _ = writeln!(out, "{line}");
        }
    }
    out
}

fn analyze(scenario: &Scenario, out: Option<&Path>) -> Result<u8> {
    let pa = PhaseAnalysis::new(&scenario.params)?;
    let mut entries = Vec::with_capacity(scenario.states.len());
    for named in &scenario.states {
        let mut entry = ReportEntry::new(&named.label, named.state);
        if pa.regime == RegimeKind::Saddle {
            entry = entry.with_verdict(pa.victory_check(&named.state)?);
        }
        entries.push(entry);
    }
    emit(&write_report(&pa, &entries), out, true)
}

fn simulate_states(scenario: &Scenario, out_dir: &Path) -> Result<u8> {
    if scenario.states.is_empty() {
        return Err(Error::Domain(
            "the scenario lists no states to simulate".into(),
        ));
    }
    std::fs::create_dir_all(out_dir)?;
    for named in &scenario.states {
        let trajectory = orgdyn_core::simulate(&scenario.params, &named.state, &scenario.options)?;
        let path = out_dir.join(format!("{}.csv", named.label));
        std::fs::write(&path, write_trajectory_csv(&trajectory)?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(0)
}

/// `COLSxROWS` / `LMAXxFMAX` splitter shared by `--grid` and `--bounds`.
fn split_pair<'a>(flag: &str, value: &'a str) -> Result<(&'a str, &'a str)> {
    value
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Domain(format!("--{flag} wants two values joined by `x`, e.g. `20x20`; got `{value}`")))
}

fn parse_grid(value: &str) -> Result<(usize, usize)> {
    let (cols, rows) = split_pair("grid", value)?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::Domain(format!("--grid component `{s}` is not a whole number")))
    };
    Ok((parse(cols)?, parse(rows)?))
}

fn parse_bounds(value: &str) -> Result<Bounds> {
    let (l, f) = split_pair("bounds", value)?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Domain(format!("--bounds component `{s}` is not a number")))
    };
    Bounds::new(0.0, parse(l)?, 0.0, parse(f)?)
}

/// Default plot window: the origin quadrant out to twice the equilibrium,
/// widened when a scenario state would fall outside it. Outside the saddle
/// regime the equilibrium is no guide, so the states alone set the scale.
fn default_bounds(pa: &PhaseAnalysis, scenario: &Scenario) -> Result<Bounds> {
    let (mut l_max, mut f_max) = if pa.regime == RegimeKind::Saddle {
        (2.0 * pa.fixed_point.leaders, 2.0 * pa.fixed_point.foot_soldiers)
    } else {
        (0.0, 0.0)
    };
    for named in &scenario.states {
        l_max = l_max.max(1.25 * named.state.leaders);
        f_max = f_max.max(1.25 * named.state.foot_soldiers);
    }
    Bounds::new(0.0, l_max.max(1.0), 0.0, f_max.max(1.0))
}

fn portrait(
    scenario: &Scenario,
    bounds: Option<&str>,
    grid: &str,
    out: Option<&Path>,
) -> Result<u8> {
    let pa = PhaseAnalysis::new(&scenario.params)?;
    if pa.regime != RegimeKind::Saddle {
        eprintln!(
            "warning: regime is {}; no sink or trend line exists, drawing the field and orbits only",
            pa.regime
        );
    }
    let bounds = match bounds {
        Some(text) => parse_bounds(text)?,
        None => default_bounds(&pa, scenario)?,
    };
    let starts: Vec<OrgState> = scenario.states.iter().map(|n| n.state).collect();
    let orbits = if starts.is_empty() {
        Vec::new()
    } else {
        sample_orbits(&scenario.params, &starts, &scenario.options)?
    };
    let mut spec = PortraitSpec::new(bounds);
    spec.grid = parse_grid(grid)?;
    emit(&render_portrait(&pa, &orbits, &spec)?, out, false)
}

fn sweep(
    scenario: &Scenario,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    out: Option<&Path>,
) -> Result<u8> {
    let name = param_by_key(param)
        .filter(|n| *n != ParamName::UniformDesertion)
        .ok_or_else(|| {
            Error::Domain(format!(
                "`{param}` is not sweepable (expected p, r, m, b, k, d_L or d_F)"
            ))
        })?;
    if steps < 2 {
        return Err(Error::Domain(format!(
            "a sweep needs at least 2 steps, got {steps}"
        )));
    }
    if !from.is_finite() || !to.is_finite() || from >= to {
        return Err(Error::Domain(format!(
            "sweep range is empty: from = {from} must be below to = {to}"
        )));
    }
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let value = from + (to - from) * i as f64 / (steps - 1) as f64;
        let swept = scenario.params.with(name, value)?;
        let regime = regime(&swept);
        let line = match regime {
            RegimeKind::Saddle => Some(sink_line(&swept)?),
            _ => None,
        };
        rows.push(SweepRow { value, line, regime });
    }
    emit(&write_sweep_csv(&rows), out, false)
}

fn class_text(kind: ClassKind) -> &'static str {
    match kind {
        ClassKind::Defeated => "defeated (below the sink line)",
        ClassKind::PType => "p-type growth (above the sink line)",
        ClassKind::RType => "r-type growth (above the sink line)",
        ClassKind::OnSinkLine => "on the sink line",
        ClassKind::OnTrendLine => "on the trend line",
    }
}

fn policy(scenario: &Scenario, out: Option<&Path>) -> Result<u8> {
    let cost = scenario.cost.as_ref().ok_or_else(|| {
        Error::Domain("the policy command needs a [cost] section in the scenario".into())
    })?;
    let named = match scenario.states.as_slice() {
        [single] => single,
        other => {
            return Err(Error::Domain(format!(
                "the policy command needs exactly one state, found {}",
                other.len()
            )))
        }
    };
    let params = &scenario.params;
    let eq = bk_equivalence(params)?;
    let target = preferred_target(params, cost.cost_leaders, cost.cost_soldiers)?;
    let cmp = compare_strategies(params, &named.state, cost)?;

    let mut text = String::with_capacity(2048);
    text.push_str("counter-measure policy report\n");
    text.push_str("=============================\n\n");
    let _ = writeln!(
        text,
        "state {}: L = {}, F = {}; budget {}",
        named.label, named.state.leaders, named.state.foot_soldiers, cost.budget
    );
    text.push('\n');

    text.push_str("exchange rate (sink-intercept shift)\n");
    let _ = writeln!(text, "  per unit leader removal    {}", eq.per_unit_leader_removal);
    let _ = writeln!(text, "  per unit soldier removal   {}", eq.per_unit_soldier_removal);
    let _ = writeln!(text, "  leader unit worth          {} soldier units", eq.ratio);
    let _ = writeln!(
        text,
        "  preferred target           {} at unit prices ({}, {}), margin {}",
        target.target, cost.cost_leaders, cost.cost_soldiers, target.margin
    );
    text.push('\n');

    text.push_str("max-strength allocation (tangency)\n");
    let _ = writeln!(text, "  remove leaders             {}", cmp.max_strength.leaders_removed);
    let _ = writeln!(text, "  remove soldiers            {}", cmp.max_strength.soldiers_removed);
    let _ = writeln!(text, "  strength removed           {}", cmp.max_strength.strength_removed);
    let _ = writeln!(
        text,
        "  post state                 L = {}, F = {} -> {}",
        cmp.max_strength_post.leaders,
        cmp.max_strength_post.foot_soldiers,
        class_text(cmp.max_strength_post_class.kind)
    );
    text.push('\n');

    text.push_str("sink-push allocation (budget-boundary search)\n");
    let push = cmp.sink_push.allocation();
    let _ = writeln!(
        text,
        "  feasible                   {}",
        if cmp.sink_push.is_feasible() { "yes" } else { "no" }
    );
    let _ = writeln!(text, "  remove leaders             {}", push.leaders_removed);
    let _ = writeln!(text, "  remove soldiers            {}", push.soldiers_removed);
    let _ = writeln!(
        text,
        "  post state                 L = {}, F = {} -> {}",
        cmp.sink_push.post_state().leaders,
        cmp.sink_push.post_state().foot_soldiers,
        class_text(cmp.sink_push_post_class.kind)
    );
    let _ = writeln!(text, "  post sink-coordinate d1    {}", cmp.sink_push.post_d1());
    text.push('\n');

    text.push_str("verdict\n");
    let verdict = if cmp.max_strength_post_class.coords.d1 <= 0.0 {
        "  removing the most strength already pushes the organization below\n  \
         the sink line; either allocation defeats it."
    } else if cmp.tangency_insufficient {
        "  tangency-suboptimal: removing the most strength leaves the\n  \
         organization above the sink line, but the same budget can defeat it.\n  \
         Prefer the sink-push allocation."
    } else if matches!(cmp.sink_push, FeasibilityOutcome::Infeasible { .. }) {
        "  the budget is too small to defeat the organization outright;\n  \
         the sink-push allocation shown gets closest to the sink line."
    } else {
        "  both allocations defeat the organization."
    };
    text.push_str(verdict);
    text.push('\n');

    emit(&text, out, true)
}

fn theorem(scenario: &Scenario) -> Result<u8> {
    let pa = PhaseAnalysis::new(&scenario.params)?;
    if scenario.states.is_empty() {
        eprintln!("warning: the scenario lists no states; nothing to check");
        return Ok(0);
    }
    if pa.regime == RegimeKind::SinkCollapse {
        println!("regime = SinkCollapse: every state collapses; no decline test is needed");
        for named in &scenario.states {
            println!("{}: collapse guaranteed (collapse regime)", named.label);
        }
        return Ok(0);
    }
    let mut all_defeated = true;
    for named in &scenario.states {
        let report = pa.victory_check(&named.state)?;
        let verdict = match report.verdict {
            VictoryVerdict::CollapseGuaranteed => "collapse-guaranteed",
            VictoryVerdict::NotSufficient => "not-sufficient",
        };
        println!(
            "{}: dS/dt = {}, dF/dt = {}, classification = {}, verdict = {}",
            named.label,
            report.strength_rate,
            report.soldier_rate,
            report.classification.kind,
            verdict
        );
        let defeated = report.verdict == VictoryVerdict::CollapseGuaranteed
            || report.classification.kind == ClassKind::Defeated;
        all_defeated &= defeated;
    }
    if all_defeated {
        println!("all states defeated: yes");
        Ok(0)
    } else {
        println!("all states defeated: no");
        Ok(10)
    }
}
