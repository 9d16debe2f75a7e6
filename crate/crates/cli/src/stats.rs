//! Per-program zone and solver statistics with timings.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde_json::{json, Value as Json};

use little_core::action::Prepared;
use little_core::census::{census, pre_equations, CensusRow, DISPLACEMENTS};
use little_core::solver::solve;

use crate::Config;

#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub parse: Duration,
    pub eval: Duration,
    pub prepare: Duration,
    /// Mean time of one solve over the pre-equations.
    pub solve_mean: Duration,
}

#[derive(Debug, Clone)]
pub struct StatsRow {
    pub name: String,
    pub result: Result<(CensusRow, Timings), String>,
}

/// Parses, runs and prepares one program, then gathers its census.
pub fn stats_for(name: &str, source: &str, cfg: &Config) -> StatsRow {
    let run = || -> Result<(CensusRow, Timings), String> {
        let mut t = Timings::default();
        let start = Instant::now();
        let program = cfg.parse(source).map_err(|e| e.to_string())?;
        t.parse = start.elapsed();
        let start = Instant::now();
        let output = program
            .eval()
            .map_err(|e| program.locate(e.span, e.to_string()).to_string())?;
        t.eval = start.elapsed();
        let start = Instant::now();
        let prep = Prepared::from_output(program, output, cfg.heuristic, cfg.action_options())
            .map_err(|e| e.to_string())?;
        t.prepare = start.elapsed();
        let eqs = pre_equations(&prep);
        let start = Instant::now();
        let mut solves = 0u32;
        for e in &eqs {
            for d in DISPLACEMENTS {
                let _ = std::hint::black_box(solve(&prep.rho, e.loc, e.value + d, &e.trace));
                solves += 1;
            }
        }
        if solves > 0 {
            t.solve_mean = start.elapsed() / solves;
        }
        Ok((census(&prep), t))
    };
    StatsRow {
        name: name.to_string(),
        result: run(),
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn total(rows: &[StatsRow]) -> CensusRow {
    let mut t = CensusRow::default();
    for r in rows {
        if let Ok((c, _)) = &r.result {
            t += *c;
        }
    }
    t
}

fn census_cells(c: &CensusRow) -> String {
    format!(
        "{:>6} {:>6} {:>8} {:>7} {:>13} {:>7} {:>5} {:>5} {:>5} {:>6}",
        c.shapes,
        c.zones,
        c.inactive,
        c.unambiguous,
        format!("{} ({:.2})", c.ambiguous, c.mean_ambiguity()),
        c.pre_equations,
        c.in_fragment,
        c.out_of_fragment,
        c.solvable_d1,
        c.solvable_d100,
    )
}

/// Plain-text table with a totals row.
pub fn table(rows: &[StatsRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(7);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$} {:>6} {:>6} {:>8} {:>7} {:>13} {:>7} {:>5} {:>5} {:>5} {:>6} {:>9} {:>8} {:>10} {:>9}",
        "program", "shapes", "zones", "inactive", "unamb", "amb (mean)", "pre-eq", "in", "out", "d=1",
        "d=100", "parse ms", "eval ms", "prepare ms", "solve us",
    );
    for r in rows {
        match &r.result {
            Ok((c, t)) => {
                let _ = writeln!(
                    out,
                    "{:<width$} {} {:>9.2} {:>8.2} {:>10.2} {:>9.2}",
                    r.name,
                    census_cells(c),
                    ms(t.parse),
                    ms(t.eval),
                    ms(t.prepare),
                    t.solve_mean.as_secs_f64() * 1e6,
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{:<width$} error: {e}", r.name);
            }
        }
    }
    let _ = writeln!(out, "{:<width$} {}", "total", census_cells(&total(rows)));
    out
}

fn census_json(c: &CensusRow) -> Json {
    json!({
        "shapes": c.shapes,
        "zones": c.zones,
        "inactive": c.inactive,
        "unambiguous": c.unambiguous,
        "ambiguous": c.ambiguous,
        "meanAmbiguity": (c.mean_ambiguity() * 100.0).round() / 100.0,
        "preEquations": c.pre_equations,
        "inFragment": c.in_fragment,
        "outOfFragment": c.out_of_fragment,
        "solvableD1": c.solvable_d1,
        "solvableD100": c.solvable_d100,
    })
}

pub fn to_json(rows: &[StatsRow], timings: bool) -> Json {
    json!({
        "rows": rows.iter().map(|r| match &r.result {
            Ok((c, t)) => {
                let mut v = census_json(c);
                v["program"] = json!(r.name);
                if timings {
                    v["timingsMs"] = json!({
                        "parse": ms(t.parse),
                        "eval": ms(t.eval),
                        "prepare": ms(t.prepare),
                        "solveMean": ms(t.solve_mean),
                    });
                }
                v
            }
            Err(e) => json!({ "program": r.name, "error": e }),
        }).collect::<Vec<_>>(),
        "total": census_json(&total(rows)),
    })
}
