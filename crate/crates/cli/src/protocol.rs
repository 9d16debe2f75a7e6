//! One JSON message per line in, one JSON reply per line out.
//!
//! Requests: `parse {source}`, `run`, `prepare {heuristic?}`,
//! `trigger {action}`, `commit {action}` and `undo`. Every reply carries
//! `ok`, and `error` when `ok` is false.

use std::io::{BufRead, Write};

use serde::Deserialize;
use serde_json::{json, Value as Json};

use little_core::action::ActionError;
use little_core::assign::Heuristic;
use little_core::program::SourceError;
use little_core::session::Session;
use little_core::svg::to_svg_xml;

use crate::report::{self, ActionDescriptor};
use crate::{CliError, Config};

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Request {
    Parse { source: String },
    Run,
    Prepare { heuristic: Option<String> },
    Trigger { action: ActionDescriptor },
    Commit { action: ActionDescriptor },
    Undo,
}

pub struct Server {
    cfg: Config,
    session: Session,
}

fn fail(kind: &str, message: String) -> Json {
    json!({ "ok": false, "error": { "kind": kind, "message": message } })
}

fn source_fail(e: &SourceError) -> Json {
    let mut err = report::source_error(e);
    err["kind"] = json!("program");
    json!({ "ok": false, "error": err })
}

fn action_fail(e: ActionError) -> Json {
    match &e {
        ActionError::Source(s) => source_fail(s),
        ActionError::Canvas(_) => fail("program", e.to_string()),
        ActionError::Inactive { .. } => fail("inactive", e.to_string()),
        _ => fail("action", e.to_string()),
    }
}

impl Server {
    pub fn new(cfg: Config) -> Server {
        let session = Session::new(cfg.heuristic, cfg.action_options());
        Server { cfg, session }
    }

    fn source_json(&self) -> Json {
        let p = &self.session.current().expect("program loaded").program;
        json!({
            "source": p.source(),
            "literals": report::literals(p),
            "canUndo": self.session.can_undo(),
        })
    }

    fn loaded(&self) -> Result<(), Json> {
        match self.session.current() {
            Some(_) => Ok(()),
            None => Err(fail("state", "no program has been parsed".into())),
        }
    }

    fn action(&self, d: &ActionDescriptor) -> Result<little_core::action::Action, Json> {
        d.to_action(self.session.heuristic())
            .map_err(|e: CliError| fail("request", e.to_string()))
    }

    /// Handles one request.
    pub fn handle(&mut self, req: Request) -> Json {
        match self.handle_inner(req) {
            Ok(v) | Err(v) => v,
        }
    }

    fn handle_inner(&mut self, req: Request) -> Result<Json, Json> {
        match req {
            Request::Parse { source } => {
                let program = self.cfg.parse(&source).map_err(|e| source_fail(&e))?;
                self.session.load(program).map_err(action_fail)?;
                let mut out = self.source_json();
                out["ok"] = json!(true);
                Ok(out)
            }
            Request::Run => {
                self.loaded()?;
                let prep = self.session.current().expect("loaded");
                let svg = to_svg_xml(&prep.output).map_err(|e| fail("program", e.to_string()))?;
                Ok(json!({ "ok": true, "svg": svg, "canvas": report::canvas(&prep.canvas) }))
            }
            Request::Prepare { heuristic } => {
                self.loaded()?;
                if let Some(h) = heuristic {
                    let h = Heuristic::from_name(&h)
                        .ok_or_else(|| fail("request", format!("unknown heuristic '{h}'")))?;
                    self.session.set_heuristic(h).map_err(action_fail)?;
                }
                let prep = self.session.current().expect("loaded");
                Ok(json!({
                    "ok": true,
                    "heuristic": self.session.heuristic().name(),
                    "zones": report::zones(prep),
                }))
            }
            Request::Trigger { action } => {
                self.loaded()?;
                let a = self.action(&action)?;
                let preview = self.session.trigger(&a).map_err(action_fail)?;
                let prep = self.session.current().expect("loaded");
                let mut out = report::trigger(
                    &prep.program,
                    &preview.trigger,
                    &preview.highlights,
                    &prep.rho,
                );
                out["ok"] = json!(true);
                match preview.output {
                    Ok(v) => {
                        out["svg"] = json!(to_svg_xml(&v).ok());
                        out["error"] = Json::Null;
                    }
                    Err(e) => {
                        out["svg"] = Json::Null;
                        out["error"] = json!(e);
                    }
                }
                Ok(out)
            }
            Request::Commit { action } => {
                self.loaded()?;
                let a = self.action(&action)?;
                let before = self.session.current().expect("loaded").program.clone();
                let outcome = self.session.commit(&a).map_err(action_fail)?;
                let mut out = self.source_json();
                out["ok"] = json!(true);
                out["diagnostics"] = report::diagnostics(&before, &outcome);
                Ok(out)
            }
            Request::Undo => {
                self.loaded()?;
                let undone = self.session.undo().map_err(action_fail)?;
                let mut out = self.source_json();
                out["ok"] = json!(true);
                out["undone"] = json!(undone);
                Ok(out)
            }
        }
    }

    /// Handles one line of input.
    pub fn handle_line(&mut self, line: &str) -> Json {
        match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(req),
            Err(e) => fail("request", format!("bad request: {e}")),
        }
    }

    /// Serves requests until the input ends. Blank lines are ignored.
    pub fn serve(&mut self, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let reply = self.handle_line(&line);
            writeln!(output, "{reply}")?;
            output.flush()?;
        }
        Ok(())
    }
}
