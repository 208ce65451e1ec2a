//! `rankcot`: decision-tree rank, decoder compilation, learning, hardness
//! reductions and protocols from the command line.
//!
//! Machine-readable results go to standard output (or `--output`) as JSON
//! or a single number; diagnostics go to standard error. Exit codes: 0 yes,
//! 1 a negative answer, 2 bad usage or input, 3 budget exceeded.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rankcot::commcomp::{run_protocol, tree_to_protocol, Party, PositionSplit};
use rankcot::compiler::{compile_tree, extract_tree_within};
use rankcot::decoder::{build_comp_decoder, AnyMachine};
use rankcot::domain::{build_comp_table, build_one_table, Budget};
use rankcot::hardness::{
    gadget_orders, gadget_sample, reduce_2order_to_sample, reduce_nae_to_2order, sample_separates,
    two_order_separable_bruteforce, NAEFormula, SetFamilyInstance, DEFAULT_MAX_UNIVERSE,
};
use rankcot::learning::{pac_learn, solve_consistency, ConsistencyResult, Hidden, PacOutcome, Sample, SampleSource};
use rankcot::rank::{mh_rank_bruteforce, rank_exact_minimax, rank_exact_yesdepth, MhRank, DEFAULT_MAX_ASSIGNMENTS};
use rankcot::trees::{comp_tree, one_tree, DecisionTree};
use serde_json::json;

use io::{parse_word, read_as, read_function, read_json, read_text, Sink};

#[derive(Parser, Debug)]
#[command(name = "rankcot", version, about = "Decision-tree rank and chain-of-thought decoders")]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a tree or a machine on words.
    Eval(EvalArgs),
    /// Compile a tree into an exact decoder.
    Compile {
        #[arg(long)]
        tree: PathBuf,
        /// Emit f64 weights instead of rationals.
        #[arg(long)]
        float: bool,
    },
    /// Read a depth-t tree back out of a decoder.
    Extract {
        #[arg(long)]
        machine: PathBuf,
        /// Iterations to unroll (defaults to the machine's own count).
        #[arg(long)]
        t: Option<usize>,
    },
    /// Exact rank of a function given as a table or a tree.
    Rank {
        #[arg(value_enum)]
        method: RankMethod,
        input: PathBuf,
        /// Heads for `mh`.
        #[arg(long, default_value_t = 2)]
        heads: usize,
        /// Depth cap for `mh`.
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
        /// Largest |A| the `minimax` and `mh` searches accept.
        #[arg(long, default_value_t = DEFAULT_MAX_ASSIGNMENTS)]
        max_assignments: usize,
        /// Also write the witness tree with its rank here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Depth-k tree consistent with a labeled sample, or `unsat`.
    Consistency {
        sample: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// PAC-learn a hidden function (table or tree) under the uniform distribution.
    Learn {
        hidden: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Reduce a monotone NAE-3-SAT formula (DIMACS `p nae3`) to 2-order separability.
    ReduceNae {
        formula: PathBuf,
        /// Continue to the binary sample for 2-head depth-1 trees.
        #[arg(long)]
        sample: bool,
    },
    /// Brute-force two separating orders for a set-family instance, or `None`.
    Separate {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_UNIVERSE)]
        max_universe: usize,
    },
    /// Check that the gadget orders separate the gadget sample on |U| = m.
    GadgetVerify {
        #[arg(long)]
        m: usize,
    },
    /// Two-party protocols simulating a tree.
    Protocol {
        #[command(subcommand)]
        action: ProtocolAction,
    },
    /// Tables, trees and decoders of the built-in families.
    Family {
        #[arg(value_enum)]
        name: FamilyName,
        #[arg(long)]
        n: usize,
        /// Iterations for `comp`.
        #[arg(long)]
        t: Option<usize>,
        /// Which one to find for `one`.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        emit: Emit,
    },
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, conflicts_with = "machine", required_unless_present = "machine")]
    tree: Option<PathBuf>,
    #[arg(long)]
    machine: Option<PathBuf>,
    /// `0110` or `2,0,1` (0-based letters); repeat for several words.
    #[arg(long = "word", required = true)]
    words: Vec<String>,
    /// Print the decoder's chain of thought instead of the output.
    #[arg(long, requires = "machine")]
    trace: bool,
}

#[derive(Subcommand, Debug)]
enum ProtocolAction {
    /// Describe the round schedule and message lengths.
    Compile(ProtocolArgs),
    /// Run the protocol on a word.
    Run {
        #[command(flatten)]
        args: ProtocolArgs,
        #[arg(long)]
        word: String,
        /// Dump every message: speaker, bits in hex, decoded indices.
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Args, Debug)]
struct ProtocolArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Alice's positions, 1-based and comma-separated.
    #[arg(long, default_value = "")]
    split: String,
    #[arg(long, value_enum, default_value_t = Speaker::Alice)]
    first: Speaker,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RankMethod {
    Yesdepth,
    Minimax,
    Mh,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyName {
    Comp,
    One,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Emit {
    Table,
    Tree,
    Decoder,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Speaker {
    Alice,
    Bob,
}

impl From<Speaker> for Party {
    fn from(s: Speaker) -> Party {
        match s {
            Speaker::Alice => Party::Alice,
            Speaker::Bob => Party::Bob,
        }
    }
}

enum Answer {
    Yes,
    No,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Answer::Yes) => ExitCode::SUCCESS,
        Ok(Answer::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rankcot: {e:#}");
            let resource = e.chain().any(|c| c.downcast_ref::<rankcot::Error>().is_some_and(rankcot::Error::is_resource));
            ExitCode::from(if resource { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<Answer> {
    let budget = Budget::from_env()?;
    let out = Sink::new(cli.output);
    match cli.command {
        Command::Eval(args) => eval(args, &out),
        Command::Compile { tree, float } => {
            let tree: DecisionTree = read_as(&tree)?;
            let m = compile_tree(&tree)?;
            let json = if float { m.to_float().to_json() } else { m.to_json() };
            out.json(&json)?;
            Ok(Answer::Yes)
        }
        Command::Extract { machine, t } => {
            let m = AnyMachine::from_json(&read_json(&machine)?)?;
            let t = t.unwrap_or(m.iterations());
            let tree = match &m {
                AnyMachine::Rational(m) => extract_tree_within(m, t, budget)?,
                AnyMachine::Float(m) => extract_tree_within(m, t, budget)?,
            };
            out.json(&tree)?;
            Ok(Answer::Yes)
        }
        Command::Rank { method, input, heads, max_depth, max_assignments, certificate } => {
            let f = read_function(&input, budget.table_entries)?;
            let cert = match method {
                RankMethod::Yesdepth => rank_exact_yesdepth(&f, budget)?,
                RankMethod::Minimax => rank_exact_minimax(&f, max_assignments)?,
                RankMethod::Mh => match mh_rank_bruteforce(&f, heads, max_depth, max_assignments, budget)? {
                    MhRank::Exact(r) => {
                        out.text(&r.to_string())?;
                        return Ok(Answer::Yes);
                    }
                    MhRank::Unknown => {
                        out.text("unknown")?;
                        return Ok(Answer::No);
                    }
                },
            };
            if let Some(path) = certificate {
                Sink::new(Some(path)).json(&cert)?;
            }
            out.text(&cert.value.to_string())?;
            Ok(Answer::Yes)
        }
        Command::Consistency { sample, k } => {
            let sample: Sample = read_as(&sample)?;
            match solve_consistency(&sample, k)? {
                ConsistencyResult::Tree { tree } => {
                    out.json(&tree)?;
                    Ok(Answer::Yes)
                }
                ConsistencyResult::Unsat => {
                    out.text("unsat")?;
                    Ok(Answer::No)
                }
                other => {
                    out.json(&other)?;
                    Ok(Answer::No)
                }
            }
        }
        Command::Learn { hidden, k, epsilon, delta } => {
            let f = read_function(&hidden, budget.table_entries)?;
            let mut src = SampleSource::uniform(Hidden::Table(f), cli.seed)?;
            let outcome = pac_learn(&mut src, k, epsilon, delta)?;
            let (report, answer) = match &outcome {
                PacOutcome::Hypothesis { tree, .. } => {
                    let error = src.error_of(tree, budget.table_entries)?;
                    (json!({"result": outcome, "error": error}), Answer::Yes)
                }
                PacOutcome::Fail { .. } => (json!({"result": outcome}), Answer::No),
            };
            out.json(&report)?;
            Ok(answer)
        }
        Command::ReduceNae { formula, sample } => {
            let phi = NAEFormula::parse(&read_text(&formula)?)?;
            let inst = reduce_nae_to_2order(&phi);
            if sample {
                out.json(&reduce_2order_to_sample(&inst)?)?;
            } else {
                out.json(&inst)?;
            }
            Ok(Answer::Yes)
        }
        Command::Separate { instance, max_universe } => {
            let inst: SetFamilyInstance = read_as(&instance)?;
            match two_order_separable_bruteforce(&inst, max_universe)? {
                Some(orders) => {
                    let names = |o: &[usize]| o.iter().map(|&e| inst.universe()[e].clone()).collect::<Vec<_>>();
                    out.json(&json!([names(orders.first()), names(orders.second())]))?;
                    Ok(Answer::Yes)
                }
                None => {
                    out.text("None")?;
                    Ok(Answer::No)
                }
            }
        }
        Command::GadgetVerify { m } => {
            let sample = gadget_sample(m)?;
            let ok = sample_separates(&gadget_orders(m), &sample)?;
            out.json(&json!({"m": m, "rows": sample.len(), "separates": ok}))?;
            Ok(if ok { Answer::Yes } else { Answer::No })
        }
        Command::Protocol { action } => protocol(action, &out),
        Command::Family { name, n, t, k, emit } => {
            let json = match (name, emit) {
                (FamilyName::Comp, emit) => {
                    let t = t.context("comp needs --t")?;
                    match emit {
                        Emit::Table => serde_json::to_value(build_comp_table(n, t, budget.table_entries)?)?,
                        Emit::Tree => serde_json::to_value(comp_tree(n, t)?)?,
                        Emit::Decoder => build_comp_decoder(n, t)?.to_json(),
                    }
                }
                (FamilyName::One, emit) => {
                    let k = k.context("one needs --k")?;
                    match emit {
                        Emit::Table => serde_json::to_value(build_one_table(n, k, budget.table_entries)?)?,
                        Emit::Tree => serde_json::to_value(one_tree(n, k)?)?,
                        Emit::Decoder => compile_tree(&one_tree(n, k)?)?.to_json(),
                    }
                }
            };
            out.json(&json)?;
            Ok(Answer::Yes)
        }
    }
}

fn eval(args: EvalArgs, out: &Sink) -> Result<Answer> {
    let words = args.words.iter().map(|w| parse_word(w)).collect::<Result<Vec<_>>>()?;
    let mut lines = Vec::with_capacity(words.len());
    if let Some(path) = &args.tree {
        let tree: DecisionTree = read_as(path)?;
        for w in &words {
            lines.push(tree.eval(w)?.to_string());
        }
    } else if let Some(path) = &args.machine {
        let m = AnyMachine::from_json(&read_json(path)?)?;
        for w in &words {
            lines.push(match args.trace {
                true => serde_json::to_string(&m.trace_json(w, m.iterations())?)?,
                false => m.compute(w)?.to_string(),
            });
        }
    } else {
        bail!("eval needs --tree or --machine");
    }
    out.text(&lines.join("\n"))?;
    Ok(Answer::Yes)
}

fn protocol(action: ProtocolAction, out: &Sink) -> Result<Answer> {
    let build = |args: &ProtocolArgs| -> Result<_> {
        let tree: DecisionTree = read_as(&args.tree)?;
        let split = PositionSplit::parse(tree.domain().n(), &args.split)?;
        Ok(tree_to_protocol(&tree, &split, args.first.into())?)
    };
    match action {
        ProtocolAction::Compile(args) => out.json(&build(&args)?.describe())?,
        ProtocolAction::Run { args, word, trace } => {
            let p = build(&args)?;
            let (output, transcript) = run_protocol(&p, &parse_word(&word)?)?;
            match trace {
                true => out.json(&json!({"output": output, "transcript": transcript.dump(&p)}))?,
                false => out.text(&output.to_string())?,
            }
        }
    }
    Ok(Answer::Yes)
}
