//! Command line front end. [`run`] returns the text to print and an exit code
//! so the commands can be tested without spawning processes.

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use reductive::control::{
    io_prove, naive_split_prove, search, GoalSelection, LoopCheck, ResourceSequent, SearchStatus, Strategy, Traversal,
};
use reductive::corpus::{enumerate, CorpusParams};
use reductive::lang::{parse_sequent, Goal};
use reductive::oracle::{check_adequacy, check_completeness, check_faithfulness, check_soundness, decide_ipl, HarnessReport};
use reductive::reduction::Schema;
use reductive::session::SessionStore;
use reductive::space::{Export, ExportFormat};
use reductive::tactical::{
    check_operator_validity, check_tactic_validity, evening_tactic, meeting_instance, meeting_tactic, milner_instance,
    milner_tactic, Consequence, MeetingEvent, MeetingGoal, Tactic, TacticalInstance,
};

use crate::api::{self, ApiError};

#[derive(Debug, Parser)]
#[command(name = "reductive", version, about = "Goal-directed proof search by reduction operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide an intuitionistic sequent with the independent decision procedure.
    Decide {
        sequent: String,
        #[arg(long)]
        json: bool,
    },
    /// Compare the search engine with the decision procedure over a corpus.
    Harness {
        check: HarnessCheck,
        /// `builtin` for the enumerated corpus, or a file with one sequent per line.
        #[arg(long, default_value = "builtin")]
        corpus: String,
        #[arg(long, default_value_t = 40)]
        depth: usize,
    },
    /// Search for a reduction of a sequent to the empty state.
    Prove {
        sequent: String,
        #[arg(long, default_value = "id")]
        strategy: Traversal,
        #[arg(long = "loop-check", default_value = "on")]
        loop_check: LoopCheck,
        #[arg(long = "goal-selection", default_value = "leftmost")]
        goal_selection: GoalSelection,
        #[arg(long, default_value_t = 64)]
        depth: usize,
        #[arg(long, default_value_t = 1_000_000)]
        nodes: usize,
        #[arg(long = "emit-tree")]
        emit_tree: Option<ExportFormat>,
        #[arg(long = "emit-trace")]
        emit_trace: bool,
    },
    /// Prove a sequent of atoms and `*` by resource splitting.
    Mprove {
        sequent: String,
        #[arg(long, value_enum, default_value_t = Method::Io)]
        method: Method,
    },
    /// Bounded validity check of a tactic or its reduction operator.
    CheckTactic(CheckTactic),
    /// Print the reduction space below a sequent.
    Space {
        sequent: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value = "json")]
        format: ExportFormat,
    },
    /// Work with stored sessions.
    Session {
        #[arg(long, default_value = ".reductive/sessions")]
        store: PathBuf,
        #[command(subcommand)]
        action: SessionAction,
    },
    /// Serve the session protocol over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: SocketAddr,
        #[arg(long, default_value = ".reductive/sessions")]
        store: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HarnessCheck {
    Soundness,
    Completeness,
    Faithfulness,
    Adequacy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Io,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Instance {
    Milner,
    Meeting,
}

#[derive(Debug, Args)]
pub struct CheckTactic {
    #[arg(long, value_enum)]
    pub instance: Instance,
    /// A built-in tactic (`meet`, `meet-evening`, or a schema name such as
    /// `ImpL`), or several joined by ` THEN `.
    #[arg(long)]
    pub tactic: String,
    #[arg(long, default_value_t = 10_000)]
    pub bound: usize,
    /// Check the underlying reduction operator instead of the tactic.
    #[arg(long)]
    pub operator: bool,
    /// Atoms in the Milner instance.
    #[arg(long, default_value_t = 2)]
    pub atoms: usize,
    /// Most connectives in a Milner goal.
    #[arg(long, default_value_t = 2)]
    pub size: usize,
}

#[derive(Debug, Subcommand)]
pub enum SessionAction {
    New { goal: String },
    Show { id: String },
    Apply { id: String, binding: String },
    Undo { id: String },
    Tactic {
        id: String,
        expr: String,
        #[arg(long, default_value_t = api::DEFAULT_TACTIC_BUDGET)]
        budget: usize,
    },
    Space {
        id: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long)]
        goal: Option<usize>,
        #[arg(long, default_value = "json")]
        format: ExportFormat,
    },
    List,
}

/// What a command prints and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

impl Output {
    fn ok(text: impl Into<String>) -> Self {
        Output { text: text.into(), code: 0 }
    }

    fn json(v: &Value) -> Self {
        Output::ok(serde_json::to_string_pretty(v).expect("json values print"))
    }
}

#[derive(Debug)]
pub enum CliError {
    Api(ApiError),
    Usage(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Api(e) => write!(f, "{e}"),
            CliError::Usage(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl<E: Into<ApiError>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Api(e.into())
    }
}

fn sequent(text: &str) -> Result<Goal, CliError> {
    Ok(parse_sequent(text)?)
}

fn load_corpus(source: &str) -> Result<Vec<Goal>, CliError> {
    if source == "builtin" {
        return Ok(enumerate(&CorpusParams::pinned()));
    }
    let text = std::fs::read_to_string(source).map_err(CliError::Io)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| parse_sequent(l).map_err(|e| CliError::Usage(format!("{source}:{}: {e}", n + 1))))
        .collect()
}

fn report_output(report: &HarnessReport) -> Output {
    let mut out = Output::json(&serde_json::to_value(report).expect("reports serialize"));
    out.code = if report.passed { 0 } else { 1 };
    out
}

fn prove(goal: &Goal, strategy: &Strategy, tree: Option<ExportFormat>, trace: bool) -> String {
    let out = search(goal, strategy);
    let mut text = format!("{}\nnodes visited: {}\ndeepest: {}\n", out.status, out.nodes_visited, out.deepest);
    if let (Some(format), Some(t)) = (tree, &out.tree) {
        text.push_str(&t.export(format));
        text.push('\n');
    }
    if trace {
        for e in &out.trace {
            let _ = writeln!(text, "{e}");
        }
    }
    if out.status == SearchStatus::Proved {
        if let Some(t) = &out.tree {
            let bindings: Vec<String> = t.bindings().iter().map(ToString::to_string).collect();
            let _ = writeln!(text, "bindings: {}", bindings.join(" "));
        }
    }
    text
}

fn named<G, E>(
    text: &str,
    lookup: impl Fn(&str) -> Option<Tactic<G, E>>,
) -> Result<Tactic<G, E>, CliError>
where
    G: 'static,
    E: 'static,
{
    let mut parts = text.split(" THEN ").map(str::trim);
    let first = parts.next().unwrap_or_default();
    let unknown = |n: &str| CliError::Usage(format!("unknown tactic `{n}`"));
    let mut tactic = lookup(first).ok_or_else(|| unknown(first))?;
    for name in parts {
        tactic = tactic.then(&lookup(name).ok_or_else(|| unknown(name))?);
    }
    Ok(tactic)
}

fn verdict<I: TacticalInstance>(inst: &I, tactic: &Tactic<I::Goal, I::Event>, args: &CheckTactic) -> Output
where
    I::Goal: 'static,
    I::Event: 'static,
{
    let v = if args.operator {
        check_operator_validity(inst, &tactic.operator(), args.bound)
    } else {
        check_tactic_validity(inst, tactic, args.bound)
    };
    let mut body = v.to_json();
    body["tactic"] = json!(tactic.name);
    body["bound"] = json!(args.bound);
    let mut out = Output::json(&body);
    out.code = if v.is_valid_within_bound() { 0 } else { 1 };
    out
}

fn check_tactic(args: &CheckTactic) -> Result<Output, CliError> {
    match args.instance {
        Instance::Meeting => {
            let t = named::<MeetingGoal, MeetingEvent>(&args.tactic, |n| match n {
                "meet" => Some(meeting_tactic()),
                "meet-evening" => Some(evening_tactic()),
                _ => None,
            })?;
            Ok(verdict(&meeting_instance(), &t, args))
        }
        Instance::Milner => {
            let t = named::<Goal, Consequence>(&args.tactic, |n| n.parse::<Schema>().ok().map(milner_tactic))?;
            Ok(verdict(&milner_instance(args.atoms, args.size), &t, args))
        }
    }
}

fn session(store: &SessionStore, action: &SessionAction) -> Result<Output, CliError> {
    let v = match action {
        SessionAction::New { goal } => api::create(store, &json!({ "goal": goal }))?,
        SessionAction::Show { id } => api::show(store, id)?,
        SessionAction::Apply { id, binding } => api::apply(store, id, &json!({ "binding": binding }))?,
        SessionAction::Undo { id } => api::backtrack(store, id)?,
        SessionAction::Tactic { id, expr, budget } => {
            api::tactic(store, id, &json!({ "expr": expr, "budget": budget }))?
        }
        SessionAction::Space { id, depth, goal, format } => {
            let depth = api::parse_depth(Some(&depth.to_string()), 2)?;
            let (node, _) = api::space(store, id, depth, *goal)?;
            return Ok(Output::ok(node.export(*format)));
        }
        SessionAction::List => json!(store.list()?),
    };
    Ok(Output::json(&v))
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Decide { sequent: text, json } => {
            let v = decide_ipl(&sequent(&text)?)?;
            if json {
                return Ok(Output::json(&serde_json::to_value(&v).expect("verdicts serialize")));
            }
            let mut out = if v.valid { "valid\n".to_string() } else { "invalid\n".to_string() };
            if let Some(cert) = v.certificate {
                out.push_str(&cert);
            }
            Ok(Output::ok(out))
        }
        Command::Harness { check, corpus, depth } => {
            let corpus = load_corpus(&corpus)?;
            let report = match check {
                HarnessCheck::Soundness => check_soundness(&corpus, depth),
                HarnessCheck::Completeness => check_completeness(&corpus, depth),
                HarnessCheck::Faithfulness => check_faithfulness(&corpus),
                HarnessCheck::Adequacy => check_adequacy(&corpus),
            };
            Ok(report_output(&report))
        }
        Command::Prove {
            sequent: text,
            strategy,
            loop_check,
            goal_selection,
            depth,
            nodes,
            emit_tree,
            emit_trace,
        } => {
            let goal = sequent(&text)?;
            goal.require_ipl()?;
            let strat = Strategy {
                goal_selection,
                node_budget: nodes,
                ..Strategy::new(strategy, loop_check, depth)
            };
            Ok(Output::ok(prove(&goal, &strat, emit_tree, emit_trace)))
        }
        Command::Mprove { sequent: text, method } => {
            let s: ResourceSequent = text.parse()?;
            let proved = match method {
                Method::Io => io_prove(&s),
                Method::Naive => naive_split_prove(&s),
            };
            Ok(Output::ok(if proved { "provable" } else { "unprovable" }))
        }
        Command::CheckTactic(args) => check_tactic(&args),
        Command::Space { sequent: text, depth, format } => {
            let goal = sequent(&text)?;
            goal.require_ipl()?;
            let (node, _) = api::bounded_space(&goal, depth);
            Ok(Output::ok(node.export(format)))
        }
        Command::Session { store, action } => {
            let store = SessionStore::open(store)?;
            session(&store, &action)
        }
        Command::Serve { addr, store } => {
            let store = SessionStore::open(store)?;
            let runtime = tokio::runtime::Runtime::new().map_err(CliError::Io)?;
            runtime.block_on(crate::server::serve(addr, store)).map_err(CliError::Io)?;
            Ok(Output::ok(""))
        }
    }
}
