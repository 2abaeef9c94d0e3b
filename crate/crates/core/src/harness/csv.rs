//! CSV rendering of an [`AggregateResult`].
//!
//! Layout: `#` metadata lines, the fixed header, one row per replication in
//! `rep_id` order, four summary rows (`rep_id` = `summary:mean`,
//! `summary:stderr`, `summary:min`, `summary:max`) and finally `# verdict`
//! lines when validation was requested. Reals use 17 significant digits.

use std::io::Write;

use super::experiment::{AggregateResult, ColumnSummary};
use crate::error::Result;
use crate::oracle::STREAM_ALGORITHM;
use crate::problems::io::fmt_real;

pub const HEADER: &str = "run_id,solver,problem_seed,rep_id,sfo_total,grad_norm_final,dist2_final,wall_ms";

pub const BUILD: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub fn write_csv<W: Write>(result: &AggregateResult, mut out: W) -> Result<()> {
    let cfg = &result.config;
    writeln!(out, "# minimax experiment")?;
    for (key, value) in cfg.echo() {
        writeln!(out, "# config,{key},{value}")?;
    }
    writeln!(out, "# stream_algorithm,{STREAM_ALGORITHM}")?;
    writeln!(out, "# build,{BUILD}")?;
    writeln!(out, "# problem,mu,{}", fmt_real(result.mu))?;
    writeln!(out, "# problem,lipschitz,{}", fmt_real(result.lipschitz))?;
    writeln!(out, "# problem,distance,{}", fmt_real(result.distance))?;
    writeln!(out, "{HEADER}")?;

    let prefix = format!("{},{},{}", cfg.run_id, cfg.solver, cfg.problem_seed);
    for row in &result.rows {
        writeln!(
            out,
            "{prefix},{},{},{},{},{}",
            row.rep_id,
            row.sfo_total,
            fmt_real(row.grad_norm_final),
            fmt_real(row.dist2_final),
            fmt_real(row.wall_ms),
        )?;
    }
    let s = &result.summary;
    let stats: [(&str, fn(&ColumnSummary) -> f64); 4] = [
        ("mean", |c| c.mean),
        ("stderr", |c| c.stderr),
        ("min", |c| c.min),
        ("max", |c| c.max),
    ];
    for (label, pick) in stats {
        writeln!(
            out,
            "{prefix},summary:{label},{},{},{},{}",
            fmt_real(pick(&s.sfo_total)),
            fmt_real(pick(&s.grad_norm_final)),
            fmt_real(pick(&s.dist2_final)),
            fmt_real(pick(&s.wall_ms)),
        )?;
    }
    for v in &result.verdicts {
        writeln!(
            out,
            "# verdict,{},{},{},{}",
            v.name,
            if v.passed { "pass" } else { "fail" },
            fmt_real(v.value),
            fmt_real(v.threshold),
        )?;
    }
    Ok(())
}

pub fn csv_string(result: &AggregateResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}
