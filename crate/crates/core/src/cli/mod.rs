//! The `axiscope` command line.
//!
//! Exit codes: 0 success or clean, 1 operational error, 2 validation findings.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::axes::{extract_axes_with_report, AxisExtraction, AxisExtractionOptions, AxisRef};
use crate::graph::{ClassGraph, RankPolicy};
use crate::infer::load_rules;
use crate::ingest::{decompressing, open_input, Format, IngestOptions, IngestReport, Ingester, NTriplesPrefixes, OnMalformed};
use crate::lattice::DEFAULT_MAX_NODES;
use crate::model::{vocab, EntityId, KnowledgeBase, Labels};

mod report;

use report::{Envelope, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FINDINGS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "axiscope", version, about = "Audit multi-axial classification in a subclass hierarchy")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Statement file (JSONL or N-Triples, optionally gzipped); `-` reads stdin.
    #[arg(long = "input", short = 'i', global = true, value_name = "PATH")]
    inputs: Vec<PathBuf>,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Rank policy for both the subclass graph and axis extraction.
    /// Without it the graph is truthy and axes include deprecated statements.
    #[arg(long, global = true, value_enum)]
    ranks: Option<RanksArg>,
    #[arg(long, global = true, value_enum, default_value_t = OutputArg::Text)]
    output: OutputArg,
    #[arg(long, global = true, default_value_t = vocab::ENTITY, value_name = "QID")]
    root: EntityId,
    /// `QID<TAB>label` table used for display.
    #[arg(long, global = true, value_name = "PATH")]
    labels: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = MalformedArg::Fail)]
    on_malformed: MalformedArg,
    #[arg(long, global = true, value_name = "IRI")]
    entity_prefix: Option<String>,
    #[arg(long, global = true, value_name = "IRI")]
    property_prefix: Option<String>,
    #[arg(long, global = true, value_name = "IRI")]
    novalue_prefix: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Jsonl,
    Ntriples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RanksArg {
    Truthy,
    IncludeDeprecated,
    All,
}

impl From<RanksArg> for RankPolicy {
    fn from(r: RanksArg) -> Self {
        match r {
            RanksArg::Truthy => RankPolicy::Truthy,
            RanksArg::IncludeDeprecated => RankPolicy::IncludeDeprecated,
            RanksArg::All => RankPolicy::AllRanks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MalformedArg {
    Fail,
    Skip,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report cycles, classes outside the root and disjointness violations.
    Validate,
    /// List the classification axes.
    Axes {
        /// One JSON object per axis and line instead of a report.
        #[arg(long)]
        jsonl: bool,
    },
    /// Items carrying more than one axis.
    Multiunion,
    /// Eligible and covered classes per axis, with root connectivity.
    Coverage {
        #[arg(long, value_name = "AXIS", required_unless_present = "all", conflicts_with = "all")]
        axis: Vec<AxisRef>,
        #[arg(long)]
        all: bool,
    },
    /// How many axes each class is typed by.
    Histogram {
        #[arg(long, value_name = "AXIS,…", value_delimiter = ',', required_unless_present = "auto", conflicts_with = "auto")]
        axes: Vec<AxisRef>,
        /// Every axis whose subject is the root.
        #[arg(long)]
        auto: bool,
        /// Axes to leave out of `--auto`.
        #[arg(long, value_name = "AXIS,…", value_delimiter = ',', requires = "auto")]
        exclude: Vec<AxisRef>,
    },
    /// Mutual information between two axes.
    Mi {
        #[arg(long, value_name = "AXIS")]
        axis_a: AxisRef,
        #[arg(long, value_name = "AXIS")]
        axis_b: AxisRef,
    },
    /// Product lattice of several axes.
    Lattice {
        #[arg(long, value_name = "AXIS,…", value_delimiter = ',', required = true)]
        axes: Vec<AxisRef>,
        /// Also write the lattice as Graphviz DOT.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: u64,
    },
    /// Apply property-to-class rules.
    Infer {
        #[arg(long, value_name = "PATH")]
        rules: PathBuf,
        #[arg(long, value_name = "QID", conflicts_with = "rule_index")]
        item: Option<EntityId>,
        #[arg(long, value_name = "N")]
        rule_index: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Axes { .. } => "axes",
            Command::Multiunion => "multiunion",
            Command::Coverage { .. } => "coverage",
            Command::Histogram { .. } => "histogram",
            Command::Mi { .. } => "mi",
            Command::Lattice { .. } => "lattice",
            Command::Infer { .. } => "infer",
        }
    }
}

/// Runs the tool against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("AXISCOPE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("AXISCOPE_THREADS must be a positive integer, got `{raw}`"))?;
    // A pool that already exists keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Everything a command needs after loading the inputs.
pub(crate) struct Context {
    pub kb: KnowledgeBase,
    pub ingest: IngestReport,
    pub graph: ClassGraph,
    pub extraction: AxisExtraction,
    pub labels: Labels,
    pub root: EntityId,
}

impl Context {
    pub fn axis(&self, r: &AxisRef) -> Result<usize> {
        let axis = r.resolve(&self.extraction.axes)?;
        Ok(self
            .extraction
            .axes
            .iter()
            .position(|a| std::ptr::eq(a, axis))
            .expect("resolved axis comes from the list"))
    }
}

fn guess_format(path: &Path) -> Format {
    let name = path.to_string_lossy();
    let name = name.strip_suffix(".gz").unwrap_or(&name);
    if name.ends_with(".nt") {
        Format::NTriples
    } else {
        Format::Jsonl
    }
}

fn ingest_options(g: &GlobalArgs, format: Format) -> IngestOptions {
    let defaults = NTriplesPrefixes::default();
    IngestOptions {
        format,
        property_allowlist: None,
        on_malformed: match g.on_malformed {
            MalformedArg::Fail => OnMalformed::Fail,
            MalformedArg::Skip => OnMalformed::SkipAndCount,
        },
        prefixes: NTriplesPrefixes {
            entity: g.entity_prefix.clone().unwrap_or(defaults.entity),
            truthy_property: g.property_prefix.clone().unwrap_or(defaults.truthy_property),
            novalue: g.novalue_prefix.clone().unwrap_or(defaults.novalue),
        },
    }
}

fn load_kb(g: &GlobalArgs, err: &mut dyn Write) -> Result<(KnowledgeBase, IngestReport)> {
    if g.inputs.is_empty() {
        bail!("no input given; pass --input PATH");
    }
    let mut ing = Ingester::new(ingest_options(g, Format::Jsonl));
    for path in &g.inputs {
        ing.set_format(match g.format {
            Some(FormatArg::Jsonl) => Format::Jsonl,
            Some(FormatArg::Ntriples) => Format::NTriples,
            None => guess_format(path),
        });
        let reader = if path.as_os_str() == "-" {
            decompressing(io::stdin()).context("cannot read stdin")?
        } else {
            open_input(path).with_context(|| format!("cannot open {}", path.display()))?
        };
        let before = ing.report().malformed_lines;
        ing.read(reader).with_context(|| format!("{}", path.display()))?;
        let skipped = ing.report().malformed_lines - before;
        if skipped > 0 {
            let _ = writeln!(err, "warning: {}: skipped {skipped} malformed lines", path.display());
        }
    }
    Ok(ing.finish())
}

fn load(g: &GlobalArgs, err: &mut dyn Write) -> Result<Context> {
    let (kb, ingest) = load_kb(g, err)?;
    let (graph_policy, axis_policy) = policies(g);
    let graph = ClassGraph::build(&kb, graph_policy);
    let extraction = extract_axes_with_report(&kb, &AxisExtractionOptions::with_policy(axis_policy));
    let labels = match &g.labels {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            Labels::read_tsv(BufReader::new(f)).with_context(|| format!("{}", p.display()))?
        }
        None => Labels::new(),
    };
    Ok(Context {
        kb,
        ingest,
        graph,
        extraction,
        labels,
        root: g.root,
    })
}

/// (graph, axes) rank policies.
fn policies(g: &GlobalArgs) -> (RankPolicy, RankPolicy) {
    match g.ranks {
        Some(r) => (r.into(), r.into()),
        None => (RankPolicy::Truthy, RankPolicy::IncludeDeprecated),
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    configure_threads()?;
    let ctx = load(&cli.global, err)?;
    let report: Report = match &cli.command {
        Command::Validate => report::validate(&ctx),
        Command::Axes { jsonl: true } => {
            crate::axes::write_axes_jsonl(&ctx.extraction.axes, &mut *out)?;
            return Ok(EXIT_OK);
        }
        Command::Axes { jsonl: false } => report::axes(&ctx),
        Command::Multiunion => report::multiunion(&ctx),
        Command::Coverage { axis, all } => {
            let picked = if *all {
                (0..ctx.extraction.axes.len()).collect()
            } else {
                axis.iter().map(|r| ctx.axis(r)).collect::<Result<Vec<_>>>()?
            };
            report::coverage(&ctx, &picked)
        }
        Command::Histogram { axes, auto, exclude } => {
            let picked = if *auto {
                let excluded = exclude.iter().map(|r| ctx.axis(r)).collect::<Result<Vec<_>>>()?;
                (0..ctx.extraction.axes.len())
                    .filter(|i| ctx.extraction.axes[*i].subject == ctx.root && !excluded.contains(i))
                    .collect()
            } else {
                axes.iter().map(|r| ctx.axis(r)).collect::<Result<Vec<_>>>()?
            };
            if picked.is_empty() {
                bail!("no axes selected; the root {} carries none after exclusions", ctx.root);
            }
            report::histogram(&ctx, &picked)?
        }
        Command::Mi { axis_a, axis_b } => report::mi(&ctx, ctx.axis(axis_a)?, ctx.axis(axis_b)?),
        Command::Lattice { axes, dot, max_nodes } => {
            let picked = axes.iter().map(|r| ctx.axis(r)).collect::<Result<Vec<_>>>()?;
            report::lattice(&ctx, &picked, dot.as_deref(), *max_nodes)?
        }
        Command::Infer { rules, item, rule_index } => {
            let f = File::open(rules).with_context(|| format!("cannot open {}", rules.display()))?;
            let rules = load_rules(BufReader::new(f))?;
            if let Some(i) = rule_index {
                if *i >= rules.len() {
                    bail!("rule index {i} is out of range: {} rules loaded", rules.len());
                }
            }
            report::infer(&ctx, &rules, *item, *rule_index)
        }
    };
    let (graph_policy, axis_policy) = policies(&cli.global);
    let env = Envelope {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        graph_ranks: graph_policy,
        axis_ranks: axis_policy,
        root: ctx.root,
        ingest: &ctx.ingest,
    };
    match cli.global.output {
        OutputArg::Json => {
            serde_json::to_writer_pretty(&mut *out, &env.json(&report))?;
            writeln!(out)?;
        }
        OutputArg::Text => write!(out, "{}", env.text(&report))?,
    }
    Ok(if report.findings { EXIT_FINDINGS } else { EXIT_OK })
}
