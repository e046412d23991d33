//! Trace CSV output.

use std::fmt::Write;

use ms2gd::RunTrace;

pub const HEADER: &str = "effective_passes,objective,suboptimality,wall_seconds";

/// Significant digits after the leading one; `MS2GD_PRECISION` overrides.
pub fn precision() -> usize {
    std::env::var("MS2GD_PRECISION")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(16)
}

pub fn trace_to_csv(trace: &RunTrace) -> String {
    let p = precision();
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in &trace.rows {
        let sub = r.suboptimality.map(|s| format!("{s:.p$e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{:.p$e},{:.p$e},{sub},{:.6e}",
            r.effective_passes, r.objective, r.wall_seconds
        );
    }
    out
}

/// CSV text with the wall-clock column dropped, for replay comparisons.
pub fn strip_wall_column(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}
