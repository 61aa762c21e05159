//! Command-line front end. Exit status: 0 success, 1 catalog or store
//! error, 2 usage or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use crmcat_core::serialization::{export_turtle, import_turtle, ExportScope};
use crmcat_core::workflows::*;
use crmcat_core::{Iri, Profile};
use serde::Serialize;
use serde_json::Value;

use crate::config::{config_path, Config, Layer};
use crate::envelope::{AppError, Envelope, ErrorKind};
use crate::ops::{self, ReportKind, TosecBatch, Workflow};

#[derive(Debug, Parser)]
#[command(name = "crmcat", version, about = "Catalog early-computing artifacts as a CIDOC-CRM knowledge graph")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Key-value config file (also CRMCAT_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Event log file backing the catalog
    #[arg(long, global = true)]
    store: Option<String>,
    /// Prefix for newly minted entity IRIs
    #[arg(long, global = true)]
    base: Option<String>,
    /// Validation profile: paper or strict
    #[arg(long, global = true)]
    profile: Option<String>,
    /// IRI of the operator performing the work
    #[arg(long, global = true)]
    operator: Option<String>,
    /// Address for `serve`
    #[arg(long, global = true)]
    listen: Option<String>,
    /// Mint ids from a counter instead of the clock (tests and demos)
    #[arg(long, global = true, hide = true)]
    id_epoch: Option<String>,
    /// Print the JSON envelope instead of text
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Args)]
struct By {
    /// ISO-8601 `start/end`; defaults to today
    #[arg(long)]
    timespan: Option<String>,
    #[arg(long)]
    note: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PartArg {
    Tape,
    Inlay,
    Other,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutcomeArg {
    Confirmed,
    Mismatch,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportArg {
    Backlog,
    Unverified,
    Consistency,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    Live,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Out,
    In,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Register a new cassette set with its parts
    Accession {
        #[arg(long = "id")]
        inventory_id: String,
        #[arg(long = "part", value_enum, required = true)]
        parts: Vec<PartArg>,
        #[arg(long)]
        source_name: Option<String>,
        #[arg(long)]
        source_address: Option<String>,
        #[arg(long, default_value = "donor")]
        source_kind: String,
        #[command(flatten)]
        by: By,
    },
    /// Register a volunteer or other operator
    RegisterOperator {
        #[arg(long)]
        name: String,
        #[arg(long)]
        timespan: Option<String>,
    },
    /// Register equipment such as a tape recorder
    RegisterObject {
        #[arg(long = "type")]
        type_label: String,
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        by: By,
    },
    /// Record a tape capture
    Digitize {
        #[arg(long)]
        tape: String,
        #[arg(long)]
        recorder: String,
        #[arg(long)]
        file: String,
        #[arg(long)]
        storage: String,
        #[command(flatten)]
        by: By,
    },
    /// Record a photograph of an object
    Photo {
        #[arg(long)]
        subject: String,
        #[arg(long)]
        file: String,
        #[arg(long)]
        place: String,
        #[command(flatten)]
        by: By,
    },
    /// Transcribe titles from an inlay photograph, as `A:Title` or `B:Title`
    Decompose {
        #[arg(long)]
        photo: String,
        #[arg(long = "title", required = true)]
        titles: Vec<String>,
        #[command(flatten)]
        by: By,
    },
    /// Link an entity to an external resource
    Link {
        #[arg(long)]
        subject: String,
        #[arg(long)]
        external: String,
        #[arg(long)]
        relation: String,
        #[command(flatten)]
        by: By,
    },
    /// Record an emulator check of a binary against a title
    Verify {
        #[arg(long)]
        binary: String,
        #[arg(long)]
        title: String,
        #[arg(long, value_enum)]
        outcome: OutcomeArg,
        #[command(flatten)]
        by: By,
    },
    /// Group objects into a curated holding
    Holding {
        #[arg(long)]
        label: String,
        #[arg(long = "member", required = true)]
        members: Vec<String>,
        #[command(flatten)]
        by: By,
    },
    /// Move a part from one set to another
    Regroup {
        #[arg(long)]
        part: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[command(flatten)]
        by: By,
    },
    /// Catalog software images from TOSEC names (manifest files or directories)
    IngestTosec {
        paths: Vec<PathBuf>,
        /// A filename to ingest directly
        #[arg(long = "name")]
        names: Vec<String>,
        #[command(flatten)]
        by: By,
    },
    /// Write the catalog as Turtle
    Export {
        #[arg(long, value_enum, default_value = "live")]
        scope: ScopeArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a new store from a Turtle document
    Import {
        file: PathBuf,
        #[arg(long)]
        timespan: Option<String>,
    },
    /// Print a report
    Report {
        #[arg(value_enum)]
        kind: ReportArg,
        /// Profile to check against (consistency only)
        #[arg(long)]
        against: Option<String>,
    },
    /// Activities that touched an entity
    Audit { iri: String },
    /// An entity and its neighbors
    Show {
        iri: String,
        #[arg(long, value_enum, default_value = "both")]
        direction: DirectionArg,
        #[arg(long)]
        property: Option<String>,
    },
    /// Run the HTTP JSON service
    Serve,
}

fn today() -> String {
    let d = chrono::Utc::now().format("%Y-%m-%d");
    format!("{d}/{d}")
}

fn attribution(config: &Config, by: By) -> Result<Attribution, AppError> {
    let operator = config
        .operator
        .clone()
        .ok_or_else(|| AppError::usage("an operator IRI is required (--operator or CRMCAT_OPERATOR)").with_field("operator"))?;
    Ok(Attribution {
        operator,
        timespan: by.timespan.unwrap_or_else(today),
        note: by.note,
    })
}

fn parse_title(text: &str) -> Result<InlayTitle, AppError> {
    let bad = || AppError::usage(format!("title {text:?} must look like A:Title or B:Title")).with_field("title");
    let (side, title) = text.split_once(':').ok_or_else(bad)?;
    let side = match side.trim() {
        "A" | "a" => Side::A,
        "B" | "b" => Side::B,
        _ => return Err(bad()),
    };
    Ok(InlayTitle {
        side,
        title: title.trim().to_string(),
    })
}

/// Filenames from manifest files (one per line) and directories (walked).
fn collect_names(paths: &[PathBuf], out: &mut Vec<String>) -> Result<(), AppError> {
    fn walk(dir: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
        let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for e in entries {
            if e.file_type()?.is_dir() {
                walk(&e.path(), out)?;
            } else {
                out.push(e.file_name().to_string_lossy().into_owned());
            }
        }
        Ok(())
    }
    for path in paths {
        let io = |e: std::io::Error| AppError::new(ErrorKind::Internal, "io", format!("{}: {e}", path.display()));
        if path.is_dir() {
            walk(path, out).map_err(io)?;
        } else {
            let text = std::fs::read_to_string(path).map_err(io)?;
            out.extend(text.lines().map(str::trim_end).filter(|l| !l.is_empty()).map(str::to_string));
        }
    }
    Ok(())
}

/// What a command produced: JSON data plus its text rendering.
struct Output {
    data: Value,
    text: String,
    /// Set when the command ran but some items failed.
    partial_failure: bool,
}

impl Output {
    fn new(data: impl Serialize, text: String) -> Output {
        Output {
            data: serde_json::to_value(data).expect("output serializes"),
            text,
            partial_failure: false,
        }
    }
}

/// `key<TAB>value` lines for a flat JSON object.
fn render(value: &Value) -> String {
    let mut text = String::new();
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Array(items) => items.iter().for_each(|i| text.push_str(&format!("{k}\t{}\n", scalar(i)))),
                    Value::Null => {}
                    other => text.push_str(&format!("{k}\t{}\n", scalar(other))),
                }
            }
        }
        Value::Array(items) => items.iter().for_each(|i| text.push_str(&format!("{}\n", scalar(i)))),
        other => text.push_str(&format!("{}\n", scalar(other))),
    }
    text
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn workflow(config: &Config, w: Workflow) -> Result<Output, AppError> {
    let mut cat = ops::open(config)?;
    let done = w.run(&mut cat)?;
    let mut text = render(&done.result);
    text.push_str(&format!("activity\t{}\n", done.audit.activity_iri));
    Ok(Output::new(done, text))
}

fn execute(config: &Config, command: Command) -> Result<Output, AppError> {
    let iri = |s: String| Iri::new(s);
    match command {
        Command::Accession {
            inventory_id,
            parts,
            source_name,
            source_address,
            source_kind,
            by,
        } => {
            let parts = parts
                .into_iter()
                .map(|p| {
                    PartSpec::new(match p {
                        PartArg::Tape => PartKind::Tape,
                        PartArg::Inlay => PartKind::Inlay,
                        PartArg::Other => PartKind::Other,
                    })
                })
                .collect();
            let source = source_name.map(|name| SourceSpec {
                name,
                address: source_address,
                kind: source_kind,
            });
            let by = attribution(config, by)?;
            workflow(config, Workflow::Accession(CassetteAccessionSpec { inventory_id, parts, source, by }))
        }
        Command::RegisterOperator { name, timespan } => workflow(
            config,
            Workflow::RegisterOperator(RegisterOperatorSpec {
                name,
                operator: config.operator.clone(),
                timespan: timespan.unwrap_or_else(today),
            }),
        ),
        Command::RegisterObject { type_label, name, by } => {
            let by = attribution(config, by)?;
            workflow(config, Workflow::RegisterObject(RegisterObjectSpec { type_label, name, by }))
        }
        Command::Digitize {
            tape,
            recorder,
            file,
            storage,
            by,
        } => {
            let by = attribution(config, by)?;
            workflow(
                config,
                Workflow::Digitize(DigitizationSpec {
                    tape: iri(tape),
                    recorder: iri(recorder),
                    file_path: file,
                    storage_place: storage,
                    by,
                }),
            )
        }
        Command::Photo { subject, file, place, by } => {
            let by = attribution(config, by)?;
            workflow(
                config,
                Workflow::Photo(PhotographSpec {
                    subject: iri(subject),
                    file_path: file,
                    place,
                    by,
                }),
            )
        }
        Command::Decompose { photo, titles, by } => {
            let titles = titles.iter().map(|t| parse_title(t)).collect::<Result<_, _>>()?;
            let by = attribution(config, by)?;
            workflow(config, Workflow::Decompose(DecomposeSpec { photo: iri(photo), titles, by }))
        }
        Command::Link {
            subject,
            external,
            relation,
            by,
        } => {
            let by = attribution(config, by)?;
            workflow(
                config,
                Workflow::Link(LinkSpec {
                    subject: iri(subject),
                    external_iri: external,
                    relation,
                    by,
                }),
            )
        }
        Command::Verify {
            binary,
            title,
            outcome,
            by,
        } => {
            let by = attribution(config, by)?;
            let outcome = match outcome {
                OutcomeArg::Confirmed => Outcome::Confirmed,
                OutcomeArg::Mismatch => Outcome::Mismatch,
            };
            workflow(
                config,
                Workflow::Verify(VerificationSpec {
                    binary: iri(binary),
                    title: iri(title),
                    outcome,
                    by,
                }),
            )
        }
        Command::Holding { label, members, by } => {
            let by = attribution(config, by)?;
            let members = members.into_iter().map(iri).collect();
            workflow(config, Workflow::Holding(HoldingSpec { label, members, by }))
        }
        Command::Regroup { part, from, to, by } => {
            let by = attribution(config, by)?;
            workflow(
                config,
                Workflow::Regroup(RegroupSpec {
                    part: iri(part),
                    from: iri(from),
                    to: iri(to),
                    by,
                }),
            )
        }
        Command::IngestTosec { paths, names, by } => {
            let mut filenames = names;
            collect_names(&paths, &mut filenames)?;
            if filenames.is_empty() {
                return Err(AppError::usage("no filenames given").with_field("paths"));
            }
            let by = attribution(config, by)?;
            let mut cat = ops::open(config)?;
            let summary = ops::ingest(&mut cat, &TosecBatch { filenames, by });
            let mut text = format!("ingested\t{}\nfailed\t{}\n", summary.ok, summary.errors.len());
            for f in &summary.errors {
                text.push_str(&format!("error\t{}\t{}\t{}\n", f.code, f.filename, f.message));
            }
            let mut out = Output::new(&summary, text);
            out.partial_failure = !summary.errors.is_empty();
            Ok(out)
        }
        Command::Export { scope, output } => {
            let cat = ops::open(config)?;
            let scope = match scope {
                ScopeArg::Live => ExportScope::Live,
                ScopeArg::Full => ExportScope::Full,
            };
            let ttl = export_turtle(cat.graph(), scope);
            match output {
                Some(path) => {
                    std::fs::write(&path, &ttl).map_err(|e| {
                        AppError::new(ErrorKind::Internal, "io", format!("{}: {e}", path.display()))
                    })?;
                    Ok(Output::new(
                        serde_json::json!({ "path": path, "bytes": ttl.len() }),
                        format!("wrote\t{}\n", path.display()),
                    ))
                }
                None => Ok(Output::new(serde_json::json!({ "turtle": ttl }), ttl)),
            }
        }
        Command::Import { file, timespan } => import(config, &file, timespan.unwrap_or_else(today)),
        Command::Report { kind, against } => {
            let cat = ops::open(config)?;
            let kind = match kind {
                ReportArg::Backlog => ReportKind::Backlog,
                ReportArg::Unverified => ReportKind::Unverified,
                ReportArg::Consistency => ReportKind::Consistency,
            };
            let profile = match against {
                Some(p) => Some(
                    p.parse::<Profile>()
                        .map_err(|e| AppError::usage(e.to_string()).with_field("against"))?,
                ),
                None => None,
            };
            let report = ops::report(cat.graph(), kind, profile);
            let text = format!("# {}: {} rows\n{}", report.kind, report.rows.len(), report.to_text());
            Ok(Output::new(report, text))
        }
        Command::Audit { iri: target } => {
            let cat = ops::open(config)?;
            let trail = ops::audit(cat.graph(), &iri(target))?;
            let text = trail
                .iter()
                .map(|a| {
                    format!(
                        "{}\t{}\t{}\t{}\t{}\t+{}e +{}s -{}s\n",
                        a.commit_seq,
                        a.activity_iri,
                        a.kind_label,
                        a.operator_label,
                        a.timespan,
                        a.entities_created,
                        a.statements_asserted,
                        a.statements_retracted
                    )
                })
                .collect();
            Ok(Output::new(trail, text))
        }
        Command::Show {
            iri: target,
            direction,
            property,
        } => {
            let cat = ops::open(config)?;
            let direction = match direction {
                DirectionArg::Out => crmcat_core::Direction::Out,
                DirectionArg::In => crmcat_core::Direction::In,
                DirectionArg::Both => crmcat_core::Direction::Both,
            };
            let hood = ops::neighborhood(cat.graph(), &iri(target), direction, property.as_deref())?;
            let e = &hood.entity;
            let mut text = format!("{}\t{} {}\t{}\n", e.iri, e.class, e.class_label, e.label);
            for n in &hood.neighbors {
                let other = n
                    .other
                    .as_ref()
                    .map(|o| format!("{} ({})", o.iri, o.label))
                    .or_else(|| n.literal.clone())
                    .unwrap_or_default();
                let arrow = if n.direction == "out" { "->" } else { "<-" };
                text.push_str(&format!("  {} {} {arrow} {other}\n", n.property, n.property_label));
            }
            Ok(Output::new(hood, text))
        }
        Command::Serve => {
            let cat = ops::open(config)?;
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| AppError::new(ErrorKind::Internal, "io", e.to_string()))?;
            runtime
                .block_on(crate::service::serve(&config.listen, cat))
                .map_err(|e| AppError::new(ErrorKind::Internal, "io", e.to_string()))?;
            Ok(Output::new(Value::Null, String::new()))
        }
    }
}

fn import(config: &Config, file: &Path, timespan: String) -> Result<Output, AppError> {
    let io = |p: &Path, e: std::io::Error| AppError::new(ErrorKind::Internal, "io", format!("{}: {e}", p.display()));
    let occupied = std::fs::metadata(&config.store).map(|m| m.len() > 0).unwrap_or(false);
    if occupied {
        return Err(AppError::new(
            ErrorKind::Domain,
            "store-not-empty",
            format!("{} already holds a catalog; import builds a new store", config.store.display()),
        )
        .with_field("store"));
    }
    let text = std::fs::read_to_string(file).map_err(|e| io(file, e))?;
    let ids: Box<dyn crmcat_core::model::IdSource> = match config.id_epoch {
        Some(epoch) => Box::new(crmcat_core::model::SequentialIds::new(epoch)),
        None => Box::new(crmcat_core::model::UlidSource::default()),
    };
    let outcome = import_turtle(ops::catalog_config(config), &text, ids, &timespan)?;
    std::fs::write(&config.store, outcome.catalog.log_text()).map_err(|e| io(&config.store, e))?;
    let g = outcome.catalog.graph();
    let violations: Vec<String> = outcome.violations.iter().map(|v| format!("statement {}: {}", v.statement, v.constraint)).collect();
    let mut text = format!(
        "entities\t{}\nstatements\t{}\nactivities\t{}\nviolations\t{}\n",
        g.entity_count(),
        g.statements().len(),
        g.activities().len(),
        violations.len()
    );
    for v in &violations {
        text.push_str(&format!("violation\t{v}\n"));
    }
    let data = serde_json::json!({
        "entities": g.entity_count(),
        "statements": g.statements().len(),
        "activities": g.activities().len(),
        "import_activity": outcome.import_activity,
        "violations": violations,
    });
    Ok(Output::new(data, text))
}

fn resolve(global: &GlobalArgs, env: &dyn Fn(&str) -> Option<String>) -> Result<Config, AppError> {
    let flags = Layer {
        store: global.store.clone(),
        base: global.base.clone(),
        profile: global.profile.clone(),
        listen: global.listen.clone(),
        operator: global.operator.clone(),
        id_epoch: global.id_epoch.clone(),
    };
    let file = match config_path(global.config.as_deref(), env) {
        Some(path) => Layer::from_file(&path).map_err(|e| AppError::usage(e.to_string()).with_field("config"))?,
        None => Layer::default(),
    };
    flags
        .over(Layer::from_env(env))
        .over(file)
        .resolve()
        .map_err(|e| AppError::usage(e.to_string()))
}

/// Runs one invocation and returns its exit status.
pub fn run<I, T>(args: I, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return e.exit_code();
        }
    };
    let json = cli.global.json;
    let result = resolve(&cli.global, env).and_then(|config| execute(&config, cli.command));
    match result {
        Ok(output) => {
            if json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&Envelope::success(&output.data)).unwrap());
            } else {
                let _ = write!(out, "{}", output.text);
            }
            i32::from(output.partial_failure)
        }
        Err(e) => {
            if json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&Envelope::<()>::failure(e.body.clone())).unwrap());
            } else {
                let field = e.body.field.as_deref().map(|f| format!(" (field {f})")).unwrap_or_default();
                let _ = writeln!(err, "error: {}{field}", e);
            }
            if e.kind == ErrorKind::Usage {
                2
            } else {
                1
            }
        }
    }
}
