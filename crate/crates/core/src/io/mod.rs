//! Text formats: scenario files in, CSV / SVG / plain-text reports out.
//!
//! Everything here is a pure string transform — no file handles — so the
//! formats are easy to test and the CLI owns all actual I/O. All emitted
//! text is UTF-8 with LF line endings and is byte-deterministic for
//! identical inputs.

mod csv;
mod report;
mod scenario;
mod svg;

pub use csv::{parse_trajectory_csv, write_sweep_csv, write_trajectory_csv, SweepRow};
pub use report::{write_report, ReportEntry};
pub use scenario::{parse_scenario, serialize_scenario, NamedState, Scenario};
pub use svg::{render_portrait, Palette, PortraitSpec, Stroke};
