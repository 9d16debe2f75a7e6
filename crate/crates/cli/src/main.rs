use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use little_cli::protocol::Server;
use little_cli::report::{self, HardEdit};
use little_cli::stats::{stats_for, table, to_json, StatsRow};
use little_cli::{with_big_stack, CliError, Config};
use little_core::action::{apply_action, Prepared};
use little_core::assign::Heuristic;
use little_core::corpus::EXAMPLES;
use little_core::program::FreezeOptions;
use little_core::svg::to_svg_xml;
use little_core::synthesis::{
    classify_update, infer_local_updates, InferOptions, UpdateRequest, DEFAULT_CAP,
};

#[derive(Parser)]
#[command(
    name = "little",
    version,
    about = "Run little programs and update them by direct manipulation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Use this prelude instead of the bundled one.
    #[arg(long, global = true, value_name = "PATH")]
    prelude: Option<PathBuf>,
    /// How zones are assigned to locations.
    #[arg(long, global = true, value_enum, default_value_t = HeuristicArg::Fair)]
    heuristic: HeuristicArg,
    /// Freeze every program literal that is not marked with `?`.
    #[arg(long, global = true)]
    freeze_default: bool,
    /// Let synthesis change prelude literals too.
    #[arg(long, global = true)]
    unfreeze_prelude: bool,
    /// Prefer assignments whose equations can be solved.
    #[arg(long, global = true)]
    avoid_unsolvable: bool,
    /// Print machine-readable output.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Fair,
    Biased,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program, write its SVG and list its shapes and zones.
    Run {
        file: PathBuf,
        /// Where to write the SVG.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Drag a zone and write the updated program.
    Act {
        file: PathBuf,
        /// Action as JSON: {"shapeIndex", "zone", "dx", "dy", "heuristic", "choose"}.
        #[arg(long)]
        action: String,
        /// Where to write the updated program (default: stdout).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List the local updates that move output numbers to new values.
    Candidates {
        file: PathBuf,
        /// JSON list of {"shapeIndex", "attr", "target"}.
        #[arg(long)]
        hard: String,
        /// Only use locations no other changed number depends on.
        #[arg(long)]
        disjoint: bool,
        /// Most location tuples to try.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Zone and solver statistics for programs.
    Stats {
        /// Program files; patterns like `dir/*.little` are expanded.
        files: Vec<String>,
        /// Include the bundled examples.
        #[arg(long)]
        examples: bool,
        /// Leave timings out of JSON output.
        #[arg(long)]
        no_timings: bool,
    },
    /// Answer JSON requests read line by line from stdin.
    Serve,
    /// Print a bundled example program.
    Example {
        /// Example name; lists the names when omitted.
        name: Option<String>,
    },
}

fn config(c: &Common) -> Result<Config, CliError> {
    let prelude = match &c.prelude {
        Some(p) => Some(std::fs::read_to_string(p)?),
        None => None,
    };
    Ok(Config {
        prelude,
        freeze: FreezeOptions {
            freeze_prelude: !c.unfreeze_prelude,
            freeze_default: c.freeze_default,
        },
        heuristic: match c.heuristic {
            HeuristicArg::Fair => Heuristic::Fair,
            HeuristicArg::Biased => Heuristic::Biased,
            HeuristicArg::None => Heuristic::None,
        },
        avoid_unsolvable: c.avoid_unsolvable,
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn prepare(cfg: &Config, file: &Path) -> Result<Prepared, CliError> {
    let program = cfg.parse(&read(file)?)?;
    Ok(Prepared::new(program, cfg.heuristic, cfg.action_options())?)
}

/// Writes to stdout. A closed pipe (`little ... | head`) is not an error.
fn emit(text: &str) {
    let mut out = io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json(v: &serde_json::Value) {
    emit(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"));
}

fn cmd_run(cfg: &Config, json: bool, file: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let prep = prepare(cfg, file)?;
    let svg = to_svg_xml(&prep.output).map_err(|e| CliError::Program(e.to_string()))?;
    if let Some(out) = out {
        std::fs::write(out, &svg)?;
    }
    if json {
        print_json(&json!({
            "svg": if out.is_none() { Some(&svg) } else { None },
            "canvas": report::canvas(&prep.canvas),
            "zones": report::zones(&prep),
        }));
        return Ok(());
    }
    if out.is_none() {
        emit(&(svg + "\n"));
        return Ok(());
    }
    let mut text = format!("{} shapes\n", prep.canvas.shapes.len());
    for s in &prep.canvas.shapes {
        let zones: Vec<String> = prep
            .gamma
            .zones
            .iter()
            .filter(|(i, _)| *i == s.index)
            .map(|(_, c)| {
                let names: Vec<String> = c
                    .chosen
                    .iter()
                    .flatten()
                    .flatten()
                    .map(|l| prep.program.loc_name(*l))
                    .collect();
                if c.active() {
                    format!("{} [{}]", c.zone.name, names.join(" "))
                } else {
                    format!("{} inactive", c.zone.name)
                }
            })
            .collect();
        let hidden = if s.hidden { " (hidden)" } else { "" };
        text += &format!(
            "  {:>3} {}{}: {}\n",
            s.index,
            s.kind,
            hidden,
            zones.join(", ")
        );
    }
    emit(&text);
    Ok(())
}

fn cmd_act(
    cfg: &Config,
    json: bool,
    file: &Path,
    action: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let program = cfg.parse(&read(file)?)?;
    let action = report::parse_action(action, cfg.heuristic)?;
    let outcome = apply_action(&program, &action, cfg.action_options())?;
    let diag = report::diagnostics(&program, &outcome);
    match out {
        Some(out) => std::fs::write(out, outcome.program.source())?,
        None if !json => {
            let src = outcome.program.source();
            emit(src);
            if !src.ends_with('\n') {
                emit("\n");
            }
        }
        None => {}
    }
    if json {
        let mut v = diag;
        if out.is_none() {
            v["program"] = json!(outcome.program.source());
        }
        print_json(&v);
    } else {
        let mut err = io::stderr().lock();
        for (l, k) in &outcome.bindings {
            let _ = writeln!(
                err,
                "{} := {}",
                program.loc_name(*l),
                little_core::parser::format_number(*k)
            );
        }
        for a in diag["attributes"].as_array().into_iter().flatten() {
            let _ = writeln!(
                err,
                "{} -> {}: {}{}",
                a["attr"].as_str().unwrap_or(""),
                a["target"],
                a["status"].as_str().unwrap_or(""),
                a["reason"]
                    .as_str()
                    .map(|r| format!(" ({r})"))
                    .unwrap_or_default()
            );
        }
        let _ = writeln!(err, "{}", outcome.verdict.class.name());
        if let Some(e) = &outcome.error {
            let _ = writeln!(err, "error: {e}");
        }
    }
    if let Some(e) = outcome.error {
        return Err(CliError::Program(e));
    }
    if outcome.unsolvable() {
        return Err(CliError::Action(
            "no attribute of the zone could be solved".into(),
        ));
    }
    Ok(())
}

fn cmd_candidates(
    cfg: &Config,
    file: &Path,
    hard: &str,
    disjoint: bool,
    cap: usize,
) -> Result<(), CliError> {
    let edits: Vec<HardEdit> = serde_json::from_str(hard)
        .map_err(|e| CliError::Usage(format!("bad hard constraints: {e}")))?;
    if edits.is_empty() {
        return Err(CliError::Usage(
            "at least one hard constraint is needed".into(),
        ));
    }
    let prep = prepare(cfg, file)?;
    let paths = report::edit_paths(&prep.canvas, &edits)?;
    let req = UpdateRequest::from_edits(&prep.output, &paths).expect("paths lead to numbers");
    let inf = infer_local_updates(
        &prep.rho,
        &req,
        &prep.frozen,
        InferOptions { disjoint, cap },
    );
    let verdicts: Vec<_> = inf
        .candidates
        .iter()
        .map(|c| classify_update(&prep.program, &req, &c.rho))
        .collect();
    print_json(&report::candidates(&prep.program, &inf, &verdicts));
    Ok(())
}

fn expand(pattern: &str) -> Result<Vec<PathBuf>, CliError> {
    if !pattern.contains(['*', '?', '[']) {
        return Ok(vec![PathBuf::from(pattern)]);
    }
    let paths = glob::glob(pattern).map_err(|e| CliError::Usage(format!("{pattern}: {e}")))?;
    let mut out: Vec<PathBuf> = paths.filter_map(Result::ok).collect();
    out.sort();
    Ok(out)
}

fn cmd_stats(
    cfg: &Config,
    json: bool,
    files: &[String],
    examples: bool,
    no_timings: bool,
) -> Result<(), CliError> {
    let mut rows: Vec<StatsRow> = Vec::new();
    if examples {
        rows.extend(EXAMPLES.iter().map(|(n, src)| stats_for(n, src, cfg)));
    }
    for pattern in files {
        for path in expand(pattern)? {
            let name = path.display().to_string();
            rows.push(match std::fs::read_to_string(&path) {
                Ok(src) => stats_for(&name, &src, cfg),
                Err(e) => StatsRow {
                    name,
                    result: Err(e.to_string()),
                },
            });
        }
    }
    if rows.is_empty() {
        return Err(CliError::Usage("no programs given".into()));
    }
    if json {
        print_json(&to_json(&rows, !no_timings));
    } else {
        emit(&table(&rows));
    }
    Ok(())
}

fn cmd_example(name: Option<&str>) -> Result<(), CliError> {
    match name {
        None => emit(
            &EXAMPLES
                .iter()
                .map(|(n, _)| format!("{n}\n"))
                .collect::<String>(),
        ),
        Some(n) => {
            let src = little_core::corpus::example(n)
                .ok_or_else(|| CliError::Usage(format!("no example '{n}'")))?;
            emit(src);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config(&cli.common)?;
    let json = cli.common.json;
    match cli.command {
        Command::Run { file, out } => cmd_run(&cfg, json, &file, out.as_deref()),
        Command::Act { file, action, out } => cmd_act(&cfg, json, &file, &action, out.as_deref()),
        Command::Candidates {
            file,
            hard,
            disjoint,
            cap,
        } => cmd_candidates(&cfg, &file, &hard, disjoint, cap),
        Command::Stats {
            files,
            examples,
            no_timings,
        } => cmd_stats(&cfg, json, &files, examples, no_timings),
        Command::Serve => {
            let stdin = io::stdin();
            Server::new(cfg).serve(BufReader::new(stdin.lock()), io::stdout().lock())?;
            Ok(())
        }
        Command::Example { name } => cmd_example(name.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_big_stack(move || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
