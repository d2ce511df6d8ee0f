use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gremlin_algebra::output::{to_json_lines, to_table};
use gremlin_algebra::{
    compile_with, evaluate, parse_traversal, render_plan, AlgebraExpr, CompileError, CompileOptions,
    EvalError, Graph, GraphError, ParseError, PlanStyle, TraversalAst,
};
use thiserror::Error;

/// Compile and evaluate Gremlin match() traversals as graph algebra.
#[derive(Debug, Parser)]
#[command(name = "grem-algebra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a query over a graph file.
    Run(RunArgs),
    /// Print the compiled algebra plan.
    Plan(PlanArgs),
    /// Print the parsed traversal in canonical form.
    Parse(QueryArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct QuerySource {
    /// Query text.
    #[arg(long)]
    query: Option<String>,
    /// File holding the query text.
    #[arg(long = "query-file")]
    query_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[command(flatten)]
    source: QuerySource,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Graph JSON file.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[command(flatten)]
    source: QuerySource,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Compile select(..).by(key) as grouping on key.
    #[arg(long = "eq7-grouping")]
    eq7_grouping: bool,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[command(flatten)]
    source: QuerySource,
    #[arg(long, value_enum, default_value_t = Style::Ascii)]
    style: Style,
    /// Compile select(..).by(key) as grouping on key.
    #[arg(long = "eq7-grouping")]
    eq7_grouping: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Style {
    Paper,
    Ascii,
    Curried,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Jsonl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Run,
    Plan,
    Parse,
}

/// Everything one invocation needs, independent of how it was spelled.
#[derive(Debug)]
struct RunConfig {
    mode: Mode,
    graph_path: Option<PathBuf>,
    query_text: Option<String>,
    query_path: Option<PathBuf>,
    plan_style: Style,
    output_format: Format,
    eq7_grouping: bool,
}

impl From<Command> for RunConfig {
    fn from(cmd: Command) -> Self {
        let base = |mode, source: QuerySource| RunConfig {
            mode,
            graph_path: None,
            query_text: source.query,
            query_path: source.query_file,
            plan_style: Style::Ascii,
            output_format: Format::Table,
            eq7_grouping: false,
        };
        match cmd {
            Command::Run(a) => RunConfig {
                graph_path: a.graph,
                output_format: a.format,
                eq7_grouping: a.eq7_grouping,
                ..base(Mode::Run, a.source)
            },
            Command::Plan(a) => RunConfig {
                plan_style: a.style,
                eq7_grouping: a.eq7_grouping,
                ..base(Mode::Plan, a.source)
            },
            Command::Parse(a) => base(Mode::Parse, a.source),
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read query file {path}: {source}")]
    QueryFile { path: PathBuf, source: io::Error },
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("compile error at {0}")]
    Compile(#[from] CompileError),
    #[error("cannot load graph {path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error("run requires --graph <path>")]
    MissingGraph,
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Output(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::QueryFile { .. } | CliError::Parse(_) | CliError::Compile(_) => 1,
            CliError::Graph { .. } | CliError::MissingGraph => 2,
            CliError::Eval(_) | CliError::Output(_) => 3,
        }
    }
}

fn read_query(config: &RunConfig) -> Result<String, CliError> {
    match (&config.query_text, &config.query_path) {
        (Some(text), _) => Ok(text.clone()),
        (None, Some(path)) => fs::read_to_string(path).map_err(|source| CliError::QueryFile {
            path: path.clone(),
            source,
        }),
        (None, None) => unreachable!("clap requires one query source"),
    }
}

fn compile_query(config: &RunConfig, ast: &TraversalAst) -> Result<AlgebraExpr, CliError> {
    let options = CompileOptions {
        eq7_grouping: config.eq7_grouping,
    };
    Ok(compile_with(ast, &options)?)
}

fn execute(config: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    let text = read_query(config)?;
    let ast = parse_traversal(&text)?;
    match config.mode {
        Mode::Parse => writeln!(out, "{}", ast.to_canonical())?,
        Mode::Plan => {
            let plan = compile_query(config, &ast)?;
            let style = match config.plan_style {
                Style::Paper => PlanStyle::Paper,
                Style::Ascii => PlanStyle::Ascii,
                Style::Curried => PlanStyle::Curried,
            };
            let rendered = render_plan(&plan, style);
            write!(out, "{rendered}")?;
            if !rendered.ends_with('\n') {
                writeln!(out)?;
            }
        }
        Mode::Run => {
            let plan = compile_query(config, &ast)?;
            let path = config.graph_path.as_ref().ok_or(CliError::MissingGraph)?;
            let graph = fs::File::open(path)
                .map_err(GraphError::from)
                .and_then(Graph::from_reader)
                .map_err(|source| CliError::Graph {
                    path: path.clone(),
                    source,
                })?;
            let result = evaluate(&plan, &graph)?;
            let rendered = match config.output_format {
                Format::Table => to_table(&result, &graph),
                Format::Jsonl => to_json_lines(&result, &graph),
            };
            out.write_all(rendered.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = RunConfig::from(cli.command);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(&config, &mut out).and_then(|()| Ok(out.flush()?)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
