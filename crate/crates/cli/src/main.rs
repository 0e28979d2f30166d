//! `tmu`: check, translate and inspect timed mu-calculus formulas.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use timed_mu::automaton::{parse_state, parse_ta, TimedAutomaton};
use timed_mu::clocks::{ClockId, ClockSet};
use timed_mu::eval::check_core;
use timed_mu::logic::{parse_formula, Logic, SurfaceFormula};
use timed_mu::oracle::{point_check, OracleFormula};
use timed_mu::translate::{Embedding, Translator};
use timed_mu::{ConcreteState, Error, RegionAutomaton, RegionSpace, Result};

#[derive(Parser)]
#[command(name = "tmu", version, about = "Timed modal mu-calculus model checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbeddingArg {
    General,
    NonZeno,
}

impl From<EmbeddingArg> for Embedding {
    fn from(e: EmbeddingArg) -> Self {
        match e {
            EmbeddingArg::General => Embedding::General,
            EmbeddingArg::NonZeno => Embedding::NonZeno,
        }
    }
}

#[derive(clap::Args)]
struct FormulaArgs {
    /// Formula text.
    formula: String,
    /// Logic of the formula: lrel, lnu, lmunu, lc, tmu or tctl.
    #[arg(long, default_value = "lrel")]
    logic: String,
    /// TCTL embedding to use.
    #[arg(long, value_enum, default_value = "general")]
    embedding: EmbeddingArg,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on the region automaton of a timed automaton.
    Check {
        /// Path to a `.ta` file.
        ta: PathBuf,
        #[command(flatten)]
        formula: FormulaArgs,
        /// Concrete state to query, e.g. `l:x=1/2,y=0`. Repeatable.
        #[arg(long = "state")]
        states: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the core formula a surface formula translates to.
    Translate {
        #[command(flatten)]
        formula: FormulaArgs,
        /// Automaton whose clock names generated clocks must avoid.
        #[arg(long)]
        ta: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List the regions of a clock set and bound.
    Regions {
        /// Comma-separated clock names.
        #[arg(long, value_delimiter = ',', required = true)]
        clocks: Vec<String>,
        #[arg(long, default_value_t = 0)]
        bound: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Emit the region automaton as Graphviz DOT.
    Graph {
        ta: PathBuf,
        /// Relativize to this formula's clocks and bound.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, default_value = "lrel")]
        logic: String,
    },
    /// Decide a fixpoint-free formula at a concrete state by direct simulation.
    Oracle {
        ta: PathBuf,
        formula: String,
        #[arg(long, default_value = "lrel")]
        logic: String,
        #[arg(long)]
        state: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn read_ta(path: &Path) -> Result<TimedAutomaton> {
    let src = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_ta(&src)
}

fn parse_logic_formula(text: &str, logic: &str) -> Result<SurfaceFormula> {
    parse_formula(text, logic.parse::<Logic>()?)
}

fn translate(
    args: &FormulaArgs,
    ta: Option<&TimedAutomaton>,
) -> Result<(SurfaceFormula, timed_mu::logic::CoreFormula)> {
    let sf = parse_logic_formula(&args.formula, &args.logic)?;
    let reserved = ta.map(|t| t.clocks().clone()).unwrap_or_default();
    let core = Translator::for_formula(&sf, &reserved).with_embedding(args.embedding.into()).translate(&sf)?;
    Ok((sf, core))
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Check { ta, formula, states, format } => {
            let ta = read_ta(&ta)?;
            let (_, core) = translate(&formula, Some(&ta))?;
            let extra: ClockSet = core.clocks();
            let points = states
                .iter()
                .map(|s| Ok((s.clone(), parse_state(&ta, s, &extra)?)))
                .collect::<Result<Vec<(String, ConcreteState)>>>()?;
            let verdict = check_core(&ta, &core, &points)?;
            Ok(match format {
                Format::Text => verdict.render_text(),
                Format::Structured => pretty(&verdict.report()),
            })
        }
        Command::Translate { formula, ta, format } => {
            let ta = ta.as_deref().map(read_ta).transpose()?;
            let (sf, core) = translate(&formula, ta.as_ref())?;
            Ok(match format {
                Format::Text => format!("{core}\n"),
                Format::Structured => pretty(&json!({
                    "logic": sf.logic.tag(),
                    "input": sf.to_string(),
                    "core": core.to_string(),
                    "clocks": core.clocks().iter().map(ClockId::name).collect::<Vec<_>>(),
                    "bound": core.bound(),
                })),
            })
        }
        Command::Regions { clocks, bound, format } => {
            let set: ClockSet = clocks.iter().map(|c| ClockId::new(c.trim())).collect();
            let space = RegionSpace::enumerate(&set, bound)?;
            Ok(match format {
                Format::Text => {
                    let mut out = format!("{} regions\n", space.len());
                    for r in space.ids() {
                        let next = if space.is_unbounded(r) {
                            "unbounded".to_string()
                        } else {
                            format!("next r{}", space.tsucc(r))
                        };
                        out.push_str(&format!("  r{r}  {}  ({next})\n", space.describe(r)));
                    }
                    out
                }
                Format::Structured => pretty(&json!({
                    "clocks": set.iter().map(ClockId::name).collect::<Vec<_>>(),
                    "bound": bound,
                    "regions": space.ids().map(|r| json!({
                        "id": r,
                        "class": space.describe(r),
                        "key": space.key(r).to_string(),
                        "next": space.tsucc(r),
                        "unbounded": space.is_unbounded(r),
                    })).collect::<Vec<_>>(),
                })),
            })
        }
        Command::Graph { ta, formula, logic } => {
            let ta = read_ta(&ta)?;
            let ra = match formula {
                Some(text) => {
                    let args = FormulaArgs { formula: text, logic, embedding: EmbeddingArg::General };
                    let (_, core) = translate(&args, Some(&ta))?;
                    RegionAutomaton::build_relativized(&ta, &core)?
                }
                None => RegionAutomaton::build(&ta, &ClockSet::new(), 0)?,
            };
            Ok(ra.to_dot())
        }
        Command::Oracle { ta, formula, logic, state, format } => {
            let ta = read_ta(&ta)?;
            let sf = parse_logic_formula(&formula, &logic)?;
            let f = OracleFormula::from_surface(&sf)?;
            let extra: ClockSet = sf.ast.clocks().into_iter().filter(|c| !ta.is_automaton_clock(c)).collect();
            let s: ConcreteState = parse_state(&ta, &state, &extra)?;
            let holds = point_check(&ta, &f, &s)?;
            Ok(match format {
                Format::Text => format!("{}\n", if holds { "holds" } else { "does not hold" }),
                Format::Structured => pretty(&json!({ "state": state, "holds": holds })),
            })
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::Semantic(_) | Error::Domain(_) => 3,
        Error::Io(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tmu: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
