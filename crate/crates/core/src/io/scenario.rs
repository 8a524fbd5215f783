//! Scenario files: a flat INI-like `key = value` format describing one
//! parameter set, any number of labeled start states, and optional
//! simulation and cost settings.
//!
//! ```text
//! [params]
//! p = 0.1
//! r = 0.25
//! m = 10
//! b = 2
//! k = 5
//! d = 0.3          # shorthand for d_L = d_F = 0.3
//!
//! [state.alpha]
//! L = 9
//! F = 9
//!
//! [simulate]
//! t_max = 50
//! dt = 0.01
//! sample_every = 10
//! method = closed
//!
//! [cost]
//! c1 = 1
//! c2 = 1
//! sigma = 2
//! budget = 100
//! ```
//!
//! The parser is strict: unknown sections or keys, duplicated keys, and
//! ambiguous desertion specifications are errors carrying the offending
//! line number. Values follow the types they configure, so a scenario that
//! parses always carries validated parameters, states, and options.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{OrgParams, OrgState};
use crate::policy::CostModel;
use crate::simulate::{Method, SimOptions};

/// A labeled start state.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedState {
    /// Filename-safe label (`[A-Za-z0-9_.-]+`), unique within a scenario.
    pub label: String,
    pub state: OrgState,
}

/// Everything a scenario file describes.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: OrgParams,
    /// States in file order; may be empty for analyses that need none.
    pub states: Vec<NamedState>,
    /// Simulation settings; defaults fill any the file omits.
    pub options: SimOptions,
    pub cost: Option<CostModel>,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// One parsed `key = value` occurrence.
#[derive(Debug, Clone, Copy)]
struct Entry {
    line: usize,
    value: f64,
}

/// Key/value accumulator for one section, rejecting duplicates and
/// unexpected keys.
#[derive(Debug, Default)]
struct Section {
    header_line: usize,
    entries: HashMap<&'static str, Entry>,
    /// Raw string entries (for non-numeric keys like `method`).
    raw: HashMap<&'static str, (usize, String)>,
}

impl Section {
    fn insert(
        &mut self,
        allowed: &[&'static str],
        raw_keys: &[&'static str],
        key: &str,
        value: &str,
        line: usize,
    ) -> Result<()> {
        let canon = allowed
            .iter()
            .chain(raw_keys)
            .find(|k| **k == key)
            .copied()
            .ok_or_else(|| perr(line, format!("unknown key `{key}` in this section")))?;
        if raw_keys.contains(&canon) {
            if self.raw.insert(canon, (line, value.to_string())).is_some() {
                return Err(perr(line, format!("duplicate key `{key}`")));
            }
            return Ok(());
        }
        let value: f64 = value
            .parse()
            .map_err(|_| perr(line, format!("invalid number `{value}` for `{key}`")))?;
        if self.entries.insert(canon, Entry { line, value }).is_some() {
            return Err(perr(line, format!("duplicate key `{key}`")));
        }
        Ok(())
    }

    fn get(&self, key: &'static str) -> Option<Entry> {
        self.entries.get(key).copied()
    }

    fn require(&self, key: &'static str) -> Result<f64> {
        self.get(key)
            .map(|e| e.value)
            .ok_or_else(|| perr(self.header_line, format!("missing required key `{key}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cursor {
    None,
    Params,
    State(usize),
    Simulate,
    Cost,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Parses scenario text. See the module docs for the format.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut params: Option<Section> = None;
    let mut simulate: Option<Section> = None;
    let mut cost: Option<Section> = None;
    let mut states: Vec<(String, Section)> = Vec::new();
    let mut cursor = Cursor::None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| perr(line_no, "unterminated section header"))?
                .trim();
            cursor = match name {
                "params" => {
                    if params.is_some() {
                        return Err(perr(line_no, "duplicate [params] section"));
                    }
                    params = Some(Section {
                        header_line: line_no,
                        ..Section::default()
                    });
                    Cursor::Params
                }
                "simulate" => {
                    if simulate.is_some() {
                        return Err(perr(line_no, "duplicate [simulate] section"));
                    }
                    simulate = Some(Section {
                        header_line: line_no,
                        ..Section::default()
                    });
                    Cursor::Simulate
                }
                "cost" => {
                    if cost.is_some() {
                        return Err(perr(line_no, "duplicate [cost] section"));
                    }
                    cost = Some(Section {
                        header_line: line_no,
                        ..Section::default()
                    });
                    Cursor::Cost
                }
                other => match other.strip_prefix("state.") {
                    Some(label) => {
                        if !valid_label(label) {
                            return Err(perr(
                                line_no,
                                format!(
                                    "state label `{label}` must be non-empty and use only \
                                     letters, digits, `_`, `-`, `.`"
                                ),
                            ));
                        }
                        if states.iter().any(|(existing, _)| existing == label) {
                            return Err(perr(line_no, format!("duplicate state label `{label}`")));
                        }
                        states.push((
                            label.to_string(),
                            Section {
                                header_line: line_no,
                                ..Section::default()
                            },
                        ));
                        Cursor::State(states.len() - 1)
                    }
                    None => {
                        return Err(perr(
                            line_no,
                            format!(
                                "unknown section [{other}] (expected [params], [state.NAME], \
                                 [simulate], or [cost])"
                            ),
                        ))
                    }
                },
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(line_no, "expected `key = value` or a `[section]` header"))?;
        let (key, value) = (key.trim(), value.trim());
        match cursor {
            Cursor::None => {
                return Err(perr(line_no, "key outside any section"));
            }
            Cursor::Params => {
                let section = params.as_mut().expect("cursor implies section");
                section.insert(
                    &["p", "r", "m", "b", "k", "d", "d_L", "d_F"],
                    &[],
                    key,
                    value,
                    line_no,
                )?;
            }
            Cursor::State(i) => {
                states[i].1.insert(&["L", "F"], &[], key, value, line_no)?;
            }
            Cursor::Simulate => {
                let section = simulate.as_mut().expect("cursor implies section");
                section.insert(
                    &["t_max", "dt", "sample_every"],
                    &["method"],
                    key,
                    value,
                    line_no,
                )?;
            }
            Cursor::Cost => {
                let section = cost.as_mut().expect("cursor implies section");
                section.insert(&["c1", "c2", "sigma", "budget"], &[], key, value, line_no)?;
            }
        }
    }

    let params_section = params.ok_or_else(|| perr(1, "missing [params] section"))?;
    let (d_l, d_f) = match params_section.get("d") {
        Some(d) => {
            if let Some(conflict) = params_section
                .get("d_L")
                .or_else(|| params_section.get("d_F"))
            {
                return Err(perr(
                    conflict.line.max(d.line),
                    "`d` sets both desertion rates and conflicts with explicit `d_L`/`d_F`",
                ));
            }
            (d.value, d.value)
        }
        None => (
            params_section.require("d_L")?,
            params_section.require("d_F")?,
        ),
    };
    let params = OrgParams::new(
        params_section.require("p")?,
        params_section.require("r")?,
        params_section.require("m")?,
        params_section.require("b")?,
        params_section.require("k")?,
        d_l,
        d_f,
    )?;

    let states = states
        .into_iter()
        .map(|(label, section)| {
            let state = OrgState::new(section.require("L")?, section.require("F")?, 0.0)?;
            Ok(NamedState { label, state })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut options = SimOptions::default();
    if let Some(section) = simulate {
        if let Some(e) = section.get("t_max") {
            options.t_max = e.value;
        }
        if let Some(e) = section.get("dt") {
            options.dt = e.value;
        }
        if let Some(e) = section.get("sample_every") {
            if e.value.fract() != 0.0 || e.value < 0.0 {
                return Err(perr(e.line, "`sample_every` must be a non-negative integer"));
            }
            options.sample_every = e.value as usize;
        }
        if let Some((line, method)) = section.raw.get("method") {
            options.method = method
                .parse::<Method>()
                .map_err(|message| perr(*line, message))?;
        }
        options.validate()?;
    }

    let cost = match cost {
        Some(section) => Some(CostModel::new(
            section.require("c1")?,
            section.require("c2")?,
            section.require("sigma")?,
            section.require("budget")?,
        )?),
        None => None,
    };

    Ok(Scenario {
        params,
        states,
        options,
        cost,
    })
}

/// Canonical text for a scenario: parsing it back reproduces the scenario,
/// and serializing again reproduces the text byte for byte.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let p = &scenario.params;
    out.push_str("[params]\n");
    let _ = writeln!(out, "p = {}", p.promotion);
    let _ = writeln!(out, "r = {}", p.recruitment);
    let _ = writeln!(out, "m = {}", p.leader_weight);
    let _ = writeln!(out, "b = {}", p.leader_removal);
    let _ = writeln!(out, "k = {}", p.soldier_removal);
    if p.leader_desertion == p.soldier_desertion {
        let _ = writeln!(out, "d = {}", p.leader_desertion);
    } else {
        let _ = writeln!(out, "d_L = {}", p.leader_desertion);
        let _ = writeln!(out, "d_F = {}", p.soldier_desertion);
    }
    for named in &scenario.states {
        let _ = writeln!(out, "\n[state.{}]", named.label);
        let _ = writeln!(out, "L = {}", named.state.leaders);
        let _ = writeln!(out, "F = {}", named.state.foot_soldiers);
    }
    let o = &scenario.options;
    out.push_str("\n[simulate]\n");
    let _ = writeln!(out, "t_max = {}", o.t_max);
    let _ = writeln!(out, "dt = {}", o.dt);
    let _ = writeln!(out, "sample_every = {}", o.sample_every);
    let _ = writeln!(out, "method = {}", o.method);
    if let Some(cost) = &scenario.cost {
        out.push_str("\n[cost]\n");
        let _ = writeln!(out, "c1 = {}", cost.cost_leaders);
        let _ = writeln!(out, "c2 = {}", cost.cost_soldiers);
        let _ = writeln!(out, "sigma = {}", cost.convexity);
        let _ = writeln!(out, "budget = {}", cost.budget);
    }
    out
}
