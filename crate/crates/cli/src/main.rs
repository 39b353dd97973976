use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use viewdb::category::{compose, export_dot, parse_map, Morphism};
use viewdb::integration::{
    certain_answers, chase, check_constraints, parse_glav, parse_schema, seed, Schema, Stop,
    DEFAULT_MAX_ROUNDS,
};
use viewdb::power_view::{compare, CompareMode, ViewBound};
use viewdb::query::parse_rule;
use viewdb::relational::{parse_facts, write_facts, Instance};

#[derive(Parser)]
#[command(name = "viewdb", version, about = "Instance databases, view mappings and the chase")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chase a source database through a GLAV mapping into a canonical database.
    Chase {
        /// Target (global) schema.
        #[arg(long)]
        schema: PathBuf,
        /// `.glav` mapping file.
        #[arg(long)]
        mapping: PathBuf,
        /// Source facts.
        #[arg(long)]
        source: PathBuf,
        /// Schema the source must satisfy.
        #[arg(long)]
        source_schema: Option<PathBuf>,
        /// Where to write the canonical facts (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
    },
    /// Certain answers of a query over a canonical database.
    Answer {
        #[arg(long)]
        canonical: PathBuf,
        /// A rule, or a file holding one.
        #[arg(long)]
        query: String,
    },
    /// Compare two instances through their view closures.
    Equiv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Only views free of marked nulls.
        #[arg(long)]
        weak: bool,
        /// Test `a ⪯ b` instead of equivalence.
        #[arg(long)]
        leq: bool,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Print the flux of a morphism as facts.
    Flux {
        #[command(flatten)]
        morphism: OneMorphism,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Report whether a morphism is mono, epi or iso.
    Classify {
        #[command(flatten)]
        morphism: OneMorphism,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Compose a chain of morphisms and list what survives.
    Compose {
        #[command(flatten)]
        chain: Chain,
        /// Also write the composition as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Render morphisms as a DOT graph.
    Dot {
        #[command(flatten)]
        chain: Chain,
        /// Draw every morphism of the chain before the composite.
        #[arg(long)]
        each: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// Largest arity of a generated view.
    #[arg(long, default_value_t = 2)]
    bound: usize,
    /// Give up after this many new views.
    #[arg(long)]
    max_views: Option<usize>,
    /// Give up after this many closure rounds.
    #[arg(long)]
    max_rounds: Option<usize>,
}

impl BoundArgs {
    fn view_bound(&self) -> ViewBound {
        let mut b = ViewBound::new(self.bound);
        if let Some(n) = self.max_views {
            b = b.with_max_new_views(n);
        }
        if let Some(n) = self.max_rounds {
            b = b.with_max_rounds(n);
        }
        b
    }
}

#[derive(Args)]
struct OneMorphism {
    /// `.map` file.
    #[arg(long)]
    morphism: PathBuf,
    #[arg(long)]
    dom: PathBuf,
    #[arg(long)]
    cod: PathBuf,
}

#[derive(Args)]
struct Chain {
    /// `.map` files, innermost first.
    #[arg(long, num_args = 1.., required = true)]
    morphisms: Vec<PathBuf>,
    #[arg(long)]
    dom: PathBuf,
    /// Intermediate objects, one between each pair of morphisms.
    #[arg(long, num_args = 0..)]
    mid: Vec<PathBuf>,
    #[arg(long)]
    cod: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: viewdb::Error },
    #[error("{0}")]
    Engine(#[from] viewdb::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Inconsistent(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use viewdb::Error as E;
        match self {
            CliError::Inconsistent(_) => 1,
            CliError::Engine(
                E::ChaseFailure { .. }
                | E::KeyViolation { .. }
                | E::RoundCapExceeded { .. }
                | E::ConstraintViolated(_),
            ) => 1,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parsed<T>(path: &Path, r: viewdb::Result<T>) -> Result<T> {
    r.map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn facts(path: &Path) -> Result<Instance> {
    parsed(path, parse_facts(&read(path)?))
}

fn schema(path: &Path) -> Result<Schema> {
    parsed(path, parse_schema(&read(path)?))
}

/// Loads a `.map` file; translation tables are resolved next to it.
fn morphism(path: &Path, dom: &Instance, cod: &Instance) -> Result<Morphism> {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let src = read(path)?;
    let components = parsed(
        path,
        parse_map(&src, |name| {
            fs::read_to_string(dir.join(name)).map_err(|e| viewdb::Error::InvalidMapping(format!("{name}: {e}")))
        }),
    )?;
    Ok(Morphism::atomic(dom, cod, components)?)
}

fn chain(c: &Chain) -> Result<(Vec<Morphism>, Morphism)> {
    if c.mid.len() + 1 != c.morphisms.len() {
        return Err(CliError::Usage(format!(
            "{} morphisms need {} --mid objects, got {}",
            c.morphisms.len(),
            c.morphisms.len() - 1,
            c.mid.len()
        )));
    }
    let mut objects = vec![facts(&c.dom)?];
    for m in &c.mid {
        objects.push(facts(m)?);
    }
    objects.push(facts(&c.cod)?);

    let mut parts = Vec::new();
    for (i, path) in c.morphisms.iter().enumerate() {
        parts.push(morphism(path, &objects[i], &objects[i + 1])?);
    }
    let mut acc = parts[0].clone();
    for m in &parts[1..] {
        acc = compose(m, &acc)?;
    }
    Ok((parts, acc))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn names(set: impl IntoIterator<Item = String>) -> String {
    set.into_iter().collect::<Vec<_>>().join(", ")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Chase {
            schema: target,
            mapping,
            source,
            source_schema,
            out,
            max_rounds,
        } => {
            let source_schema = match &source_schema {
                Some(p) => schema(p)?,
                None => Schema::new(),
            };
            let target = schema(&target)?;
            let data = facts(&source)?;
            let report = check_constraints(&source_schema, &data)?;
            if let Some(bad) = report.violated().next() {
                return Err(CliError::Inconsistent(format!(
                    "source violates {}:\n{report}",
                    bad.constraint
                )));
            }
            let system = parsed(&mapping, parse_glav(&read(&mapping)?, source_schema, target))?;
            let (state, stop) = chase(seed(&data, &system)?, &system.target, max_rounds)?;
            let why = match stop {
                Stop::Fixpoint => "fixpoint",
                Stop::NullFrontier => "null frontier",
            };
            eprintln!("chase stopped after {} round(s): {why}", state.round());
            emit(&out, &write_facts(&state.target()))
        }
        Command::Answer { canonical, query } => {
            let text = if Path::new(&query).is_file() {
                read(Path::new(&query))?
            } else {
                query
            };
            let q = parse_rule(&text).map_err(|e| CliError::Usage(format!("query: {e}")))?;
            let answers = certain_answers(&q, &facts(&canonical)?)?;
            let mut out = String::new();
            if q.arity() == 0 {
                out.push_str(if answers.is_empty() { "false\n" } else { "true\n" });
            }
            for t in answers.iter().filter(|t| t.arity() > 0) {
                let vs: Vec<String> = t.values().iter().map(ToString::to_string).collect();
                out.push_str(&vs.join(", "));
                out.push('\n');
            }
            emit(&None, &out)
        }
        Command::Equiv {
            a,
            b,
            weak,
            leq,
            bound,
        } => {
            let mode = match (leq, weak) {
                (false, false) => CompareMode::Equiv,
                (false, true) => CompareMode::EquivWeak,
                (true, false) => CompareMode::Leq,
                (true, true) => CompareMode::LeqWeak,
            };
            let verdict = compare(&facts(&a)?, &facts(&b)?, bound.view_bound(), mode)?;
            emit(&None, &format!("{verdict}\n"))
        }
        Command::Flux { morphism: m, bound } => {
            let f = morphism(&m.morphism, &facts(&m.dom)?, &facts(&m.cod)?)?;
            let flux = f.flux(bound.view_bound())?;
            emit(&None, &write_facts(&flux.generator_instance()))
        }
        Command::Classify { morphism: m, bound } => {
            let f = morphism(&m.morphism, &facts(&m.dom)?, &facts(&m.cod)?)?;
            let c = f.classify(bound.view_bound())?;
            emit(
                &None,
                &format!("mono {}\nepi {}\niso {}\n", c.mono, c.epi, c.iso),
            )
        }
        Command::Compose { chain: c, dot } => {
            let (_, composite) = chain(&c)?;
            let mut out = format!(
                "sources: {}\ntargets: {}\n",
                names(composite.sources()),
                names(composite.targets())
            );
            for l in composite.links() {
                out.push_str(&format!(
                    "  {}: {{{}}} -> {{{}}}\n",
                    l.label,
                    names(l.inputs),
                    names(l.outputs)
                ));
            }
            if dot.is_some() {
                emit(&dot, &export_dot(&[composite]))?;
            }
            emit(&None, &out)
        }
        Command::Dot { chain: c, each, out } => {
            let (parts, composite) = chain(&c)?;
            let mut drawn = Vec::new();
            if each && parts.len() > 1 {
                drawn.extend(parts);
            }
            drawn.push(composite);
            emit(&out, &export_dot(&drawn))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
