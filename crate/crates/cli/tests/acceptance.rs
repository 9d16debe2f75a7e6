//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value as Json;

use little_core::action::{apply_action, Action, ActionOptions, Prepared};
use little_core::assign::Heuristic;
use little_core::census::{pre_equations, DISPLACEMENTS};
use little_core::corpus::{example, EXAMPLES};
use little_core::program::Program;
use little_core::solver::{in_fragment, is_addition_only, solve, solve_a, solve_b, FailReason};
use little_core::subst::Substitution;
use little_core::svg::{color_number, index_canvas, to_svg_xml, Axis, IndexedShape, SlotKey};
use little_core::syntax::{Loc, Op, Origin};
use little_core::synthesis::Classification;
use little_core::trace::{eval_trace, Trace};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn program(name: &str) -> Program {
    Program::parse(example(name).expect("bundled example")).expect("example parses")
}

fn little(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_little"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn example_file(dir: &tempfile::TempDir, name: &str) -> String {
    let path = dir.path().join(format!("{name}.little"));
    std::fs::write(&path, example(name).unwrap()).unwrap();
    path.display().to_string()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn candidate_values(file: &str, extra: &[&str]) -> Result<(Vec<(String, f64)>, Duration), String> {
    let hard = r#"[{"shapeIndex": 2, "attr": "x", "target": 155}]"#;
    let mut args = vec!["candidates", file, "--hard", hard];
    args.extend(extra);
    let start = Instant::now();
    let (code, out, err) = little(&args);
    let took = start.elapsed();
    ensure!(code == 0, "candidates exited {code}: {err}");
    let v: Json = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let mut vals = Vec::new();
    for c in v["candidates"].as_array().into_iter().flatten() {
        let b = c["bindings"].as_array().ok_or("bindings missing")?;
        ensure!(b.len() == 1, "expected one binding per candidate, got {c}");
        vals.push((
            c["names"][0].as_str().unwrap_or("").to_string(),
            b[0][1].as_f64().unwrap(),
        ));
    }
    vals.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok((vals, took))
}

fn four_candidates() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = example_file(&dir, "sineWaveOfBoxes");
    let (open, t1) = candidate_values(&file, &["--unfreeze-prelude"])?;
    let (frozen, t2) = candidate_values(&file, &[])?;
    let want_open = [1.5, 1.75, 52.5, 95.0];
    ensure!(
        open.len() == 4 && open.iter().zip(want_open).all(|(g, w)| close(g.1, w, 1e-9)),
        "unfrozen prelude gave {open:?}"
    );
    ensure!(
        frozen.len() == 2
            && frozen
                .iter()
                .zip([52.5, 95.0])
                .all(|(g, w)| close(g.1, w, 1e-9)),
        "frozen prelude gave {frozen:?}"
    );
    let slowest = t1.max(t2);
    ensure!(slowest < Duration::from_secs(1), "took {slowest:?}");
    let names: Vec<String> = open.iter().map(|(n, v)| format!("{n}={v}")).collect();
    Ok(format!("{}; slowest run {:.0?}", names.join(" "), slowest))
}

fn prelude_literal(p: &Program, needle: &str, skip: usize) -> Option<Loc> {
    let at = (p.prelude_source().find(needle)? + skip) as u32;
    p.literals()
        .find(|n| n.span.origin == Origin::Prelude && n.span.start == at)
        .map(|n| n.loc)
}

fn traces() -> Check {
    let p = program("sineWaveOfBoxes");
    let c = index_canvas(&p.eval().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let l = Trace::loc;
    let add = |a, b| Trace::op(Op::Add, vec![a, b]);
    let x0 = l(p.locs_named("x0")[0]);
    let sep = l(p.locs_named("sep")[0]);
    // `zeroTo n` starts its range at this 0, and `range` counts up with this 1.
    let zero = l(prelude_literal(&p, "(range 0 (- n 1))", 7).ok_or("prelude 0 not found")?);
    let one = l(prelude_literal(&p, "(range (+ 1 i) j)", 10).ok_or("prelude 1 not found")?);
    let box_x = |i: Trace| add(x0.clone(), Trace::op(Op::Mul, vec![i, sep.clone()]));
    let expected = [
        (50.0, box_x(zero.clone())),
        (80.0, box_x(add(one.clone(), zero.clone()))),
        (110.0, box_x(add(one.clone(), add(one, zero)))),
    ];
    let mut seen = Vec::new();
    for (i, (value, trace)) in expected.into_iter().enumerate() {
        let x = c.shapes[i].attr("x").ok_or("box without x")?;
        ensure!(
            x.value == value,
            "box {} x = {}, expected {value}",
            i + 1,
            x.value
        );
        ensure!(
            x.trace == trace,
            "box {} trace {} expected {}",
            i + 1,
            x.trace,
            trace
        );
        seen.push(format!("{}", x.value));
    }
    Ok(format!("x = {} with x0 + i*sep traces", seen.join(", ")))
}

fn interior_names(prep: &Prepared, shape: &IndexedShape) -> Vec<String> {
    prep.gamma
        .get(shape.index, "Interior")
        .and_then(|z| z.chosen.clone())
        .unwrap_or_default()
        .into_iter()
        .map(|l| {
            l.map(|l| prep.program.loc_name(l))
                .unwrap_or_else(|| "-".into())
        })
        .collect()
}

fn fair_rotation() -> Check {
    let prep = Prepared::new(
        program("sineWaveOfBoxes"),
        Heuristic::Fair,
        ActionOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let thetas = [["x0", "y0"], ["x0", "amp"], ["sep", "y0"], ["sep", "amp"]];
    ensure!(
        prep.canvas.shapes.len() == 12,
        "{} boxes",
        prep.canvas.shapes.len()
    );
    for (i, shape) in prep.canvas.shapes.iter().enumerate() {
        let got = interior_names(&prep, shape);
        ensure!(
            got == thetas[i % 4],
            "box {i}: chose {got:?}, expected {:?}",
            thetas[i % 4]
        );
    }
    Ok("12 boxes rotate through {x0,y0} {x0,amp} {sep,y0} {sep,amp}".into())
}

fn biased() -> Check {
    let prep = Prepared::new(
        program("sineWaveOfBoxesBiased"),
        Heuristic::Biased,
        ActionOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let mut sets = BTreeSet::new();
    for shape in &prep.canvas.shapes {
        let got = interior_names(&prep, shape);
        ensure!(
            !got.iter().any(|n| n == "a" || n == "b"),
            "box {} Interior chose {got:?}",
            shape.index
        );
        sets.insert(got.join(","));
    }
    ensure!(!sets.is_empty(), "no Interior zones");
    Ok(format!(
        "Interior sets used: {}",
        sets.into_iter().collect::<Vec<_>>().join(" | ")
    ))
}

const ENV_LOCS: u32 = 6;

fn random_trace(rng: &mut StdRng, depth: u32, addition_only: bool) -> Trace {
    if depth == 0 || rng.gen_bool(0.3) {
        return Trace::loc(Loc(rng.gen_range(2..=ENV_LOCS)));
    }
    if addition_only {
        let a = random_trace(rng, depth - 1, true);
        let b = random_trace(rng, depth - 1, true);
        return Trace::op(Op::Add, vec![a, b]);
    }
    if rng.gen_bool(0.15) {
        let op = [Op::Sin, Op::Cos, Op::Sqrt][rng.gen_range(0..3)];
        return Trace::op(op, vec![random_trace(rng, depth - 1, false)]);
    }
    let op = [Op::Add, Op::Sub, Op::Mul, Op::Div][rng.gen_range(0..4)];
    let a = random_trace(rng, depth - 1, false);
    let b = random_trace(rng, depth - 1, false);
    Trace::op(op, vec![a, b])
}

/// Replaces the `k`-th leaf (pre-order) with `l`.
fn plant(t: &Trace, l: Loc, k: &mut usize) -> Trace {
    match t.node() {
        little_core::trace::TraceNode::Loc(_) => {
            let here = *k == 0;
            *k = k.wrapping_sub(1);
            if here {
                Trace::loc(l)
            } else {
                t.clone()
            }
        }
        little_core::trace::TraceNode::Op(op, args) => {
            Trace::op(*op, args.iter().map(|a| plant(a, l, k)).collect())
        }
    }
}

fn leaves(t: &Trace) -> usize {
    match t.node() {
        little_core::trace::TraceNode::Loc(_) => 1,
        little_core::trace::TraceNode::Op(_, args) => args.iter().map(leaves).sum(),
    }
}

fn solver_oracle() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let target = Loc(1);
    let (mut equations, mut solved, mut compared) = (0, 0, 0);
    let mut attempts = 0;
    while equations < 1000 || compared < 250 {
        attempts += 1;
        ensure!(attempts < 100_000, "could not generate enough equations");
        let addition_only = rng.gen_bool(0.25);
        let shape = random_trace(&mut rng, 4, addition_only);
        let mut k = rng.gen_range(0..leaves(&shape));
        let t = plant(&shape, target, &mut k);
        if !in_fragment(target, &t) {
            continue;
        }
        let rho: Substitution = (1..=ENV_LOCS)
            .map(|i| (Loc(i), rng.gen_range(-50.0..50.0f64).round() / 2.0))
            .collect();
        let moved = rho.clone().with(
            target,
            rho.get(target).unwrap() + rng.gen_range(-20.0..20.0),
        );
        let Ok(n) = eval_trace(&moved, &t) else {
            continue;
        };
        if !n.is_finite() {
            continue;
        }
        equations += 1;
        if let Ok(v) = solve(&rho, target, n, &t) {
            solved += 1;
            let back =
                eval_trace(&rho.clone().with(target, v), &t).map_err(|e| format!("{t}: {e:?}"))?;
            ensure!(close(back, n, 1e-6), "{t} = {n}: solution {v} gives {back}");
        }
        if is_addition_only(&t) {
            let a = solve_a(&rho, target, n, &t)
                .map_err(|e| format!("{t}: A failed with {}", e.code()))?;
            let b = solve_b(&rho, target, n, &t)
                .map_err(|e| format!("{t}: B failed with {}", e.code()))?;
            ensure!(close(a, b, 1e-9), "{t} = {n}: A gives {a}, B gives {b}");
            compared += 1;
        }
    }

    let p = program("sineWaveOfBoxes");
    let c = index_canvas(&p.eval().unwrap()).unwrap();
    let first_x = c.shapes[0].attr("x").unwrap();
    let sep = p.locs_named("sep")[0];
    let err = solve(&p.rho0(), sep, first_x.value + 10.0, &first_x.trace);
    ensure!(
        matches!(&err, Err(e) if e.reason() == FailReason::DomainError),
        "x0 + 0*sep solved for sep gave {err:?}"
    );
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(10), "took {took:?}");
    Ok(format!(
        "{equations} equations, {solved} solved and verified, {compared} A/B agreements, 0*sep is a domain error, {took:.0?}"
    ))
}

fn plausible_drag() -> Check {
    let p = program("xyBox");
    let action = Action {
        shape: 0,
        zone: "Interior".into(),
        dx: 30.0,
        dy: 10.0,
        heuristic: Heuristic::Fair,
        choose: Vec::new(),
    };
    let out = apply_action(&p, &action, ActionOptions::default()).map_err(|e| e.to_string())?;
    let v = out.program.eval().map_err(|e| e.to_string())?;
    let shape = index_canvas(&v).map_err(|e| e.to_string())?.shapes[0].clone();
    let hits: Vec<String> = out
        .trigger
        .outcomes
        .iter()
        .filter(|o| {
            shape
                .slots
                .iter()
                .any(|s| s.key == o.key && s.value == o.target)
        })
        .map(|o| format!("{}={}", o.key, o.target))
        .collect();
    ensure!(!hits.is_empty(), "no attribute reached its target");
    ensure!(
        out.verdict.class == Classification::Plausible,
        "classified {}",
        out.verdict.class.name()
    );
    Ok(format!(
        "hit {}; {}",
        hits.join(" "),
        out.verdict.class.name()
    ))
}

fn census() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = example_file(&dir, "sineWaveOfBoxes");
    let (code, out, err) = little(&["stats", &file, "--json", "--no-timings"]);
    ensure!(code == 0, "stats exited {code}: {err}");
    let v: Json = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let row = &v["rows"][0];
    let want = [
        ("shapes", 12.0),
        ("zones", 108.0),
        ("inactive", 0.0),
        ("unambiguous", 36.0),
        ("ambiguous", 72.0),
        ("meanAmbiguity", 2.67),
    ];
    for (k, w) in want {
        ensure!(row[k].as_f64() == Some(w), "{k} = {}, expected {w}", row[k]);
    }
    Ok("12 shapes, 108 zones, 0 inactive, 36 unambiguous, 72 ambiguous (2.67)".into())
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn performance() -> Check {
    let src = example("sineWaveOfBoxes").unwrap();
    let mut setup = Vec::new();
    let mut prep = None;
    for _ in 0..5 {
        let start = Instant::now();
        let p = Program::parse(src).map_err(|e| e.to_string())?;
        let prepared = Prepared::new(p, Heuristic::Fair, ActionOptions::default())
            .map_err(|e| e.to_string())?;
        setup.push(start.elapsed());
        prep = Some(prepared);
    }
    let prep = prep.unwrap();
    let setup = median(setup);
    let eqs = pre_equations(&prep);
    let start = Instant::now();
    let mut solves = 0u32;
    for e in &eqs {
        for d in DISPLACEMENTS {
            let _ = std::hint::black_box(solve(&prep.rho, e.loc, e.value + d, &e.trace));
            solves += 1;
        }
    }
    let mean = start.elapsed() / solves.max(1);
    ensure!(
        setup < Duration::from_millis(250),
        "parse+eval+prepare took {setup:?}"
    );
    ensure!(mean < Duration::from_millis(1), "mean solve took {mean:?}");
    Ok(format!(
        "parse+eval+prepare {setup:.1?} (median of 5), mean solve {mean:.1?} over {solves}"
    ))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))
}

/// Numbers an exported element shows for one indexed slot.
fn exported(el: &roxmltree::Node, key: &SlotKey) -> Result<String, String> {
    let attr = |name: &str| {
        el.attribute(name)
            .ok_or(format!("<{}> lacks {name}", el.tag_name().name()))
    };
    Ok(match key {
        SlotKey::Attr(a) => attr(a)?.to_string(),
        SlotKey::Point { index, axis } => {
            let pts = attr("points")?;
            let pair = pts.split_whitespace().nth(*index).ok_or("missing point")?;
            let (x, y) = pair.split_once(',').ok_or("bad point")?;
            if *axis == Axis::X { x } else { y }.to_string()
        }
        SlotKey::Rgba { attr: a, component } => {
            let text = attr(a)?;
            let inner = text
                .strip_prefix("rgba(")
                .and_then(|t| t.strip_suffix(')'))
                .ok_or("bad rgba")?;
            inner
                .split(',')
                .nth(*component)
                .ok_or("missing component")?
                .to_string()
        }
        SlotKey::PathNum { index, .. } => attr("d")?
            .split_whitespace()
            .nth(*index)
            .ok_or("short path")?
            .to_string(),
    })
}

fn svg_hygiene() -> Check {
    let mut numbers = 0;
    for (name, src) in EXAMPLES {
        let v = Program::parse(src)
            .and_then(|p| p.eval().map_err(|e| p.locate(e.span, e.to_string())))
            .map_err(|e| format!("{name}: {e}"))?;
        let xml = to_svg_xml(&v).map_err(|e| format!("{name}: {e}"))?;
        let canvas = index_canvas(&v).map_err(|e| format!("{name}: {e}"))?;
        let doc = roxmltree::Document::parse(&xml).map_err(|e| format!("{name}: {e}"))?;
        for el in doc.descendants().filter(|n| n.is_element()) {
            for a in el.attributes() {
                ensure!(
                    !a.name().eq_ignore_ascii_case("zones")
                        && !a.name().eq_ignore_ascii_case("hidden"),
                    "{name}: exported {}",
                    a.name()
                );
            }
        }
        let shapes: Vec<_> = doc
            .descendants()
            .filter(|n| n.is_element() && !matches!(n.tag_name().name(), "svg" | "g"))
            .collect();
        ensure!(
            shapes.len() == canvas.shapes.len(),
            "{name}: {} elements, {} shapes",
            shapes.len(),
            canvas.shapes.len()
        );
        for (el, shape) in shapes.iter().zip(&canvas.shapes) {
            ensure!(
                el.tag_name().name() == shape.kind,
                "{name}: <{}> vs {}",
                el.tag_name().name(),
                shape.kind
            );
            for slot in &shape.slots {
                let text = exported(el, &slot.key).map_err(|e| format!("{name}: {e}"))?;
                let ok = if slot.key == SlotKey::Attr("fill".into()) {
                    text == color_number(slot.value)
                } else {
                    (parse_f64(&text)? - slot.value).abs() <= 5e-5 + 1e-12 * slot.value.abs()
                };
                ensure!(
                    ok,
                    "{name}: shape {} {} exported as {text}, canvas has {}",
                    shape.index,
                    slot.key,
                    slot.value
                );
                numbers += 1;
            }
        }
    }
    Ok(format!(
        "{} examples, {numbers} numbers round-trip, no editor attributes",
        EXAMPLES.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("four-candidate reproduction", four_candidates),
        ("trace reproduction", traces),
        ("fair-heuristic rotation", fair_rotation),
        ("biased-heuristic example", biased),
        ("solver oracle suite", solver_oracle),
        ("plausibility on overconstrained drags", plausible_drag),
        ("census methodology", census),
        ("desk-scale performance", performance),
        ("svg hygiene", svg_hygiene),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
