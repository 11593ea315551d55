use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::json;

use syncmat_core::automaton::{greedy_sync_word, parse_dfa, shortest_sync_word, validate, MAX_BFS_STATES};
use syncmat_core::exactla::{canonical_basis, canonical_coefficients, coefficient_sum_check, format_rational};
use syncmat_core::harness::census::{audit_small_dfas, cerny_bound, CensusOptions, DEFAULT_BUDGET};
use syncmat_core::harness::properties::{run_all, DEFAULT_CASES, DEFAULT_SEED};
use syncmat_core::harness::{
    build_cerny, cerny_reset_word, example_chain, prefix_chain, replay, right_subword_independence,
    word_space_dimension, ChainRun, Example,
};
use syncmat_core::lmatrix::{solutions_by_subsumption, solve_min};
use syncmat_core::report::{self, Format};
use syncmat_core::wordmatrix::matrix_of_word;
use syncmat_core::{Dfa, Execution, SeriesContext, StateSet, Word, WordMatrix};

#[derive(Parser)]
#[command(name = "syncmat", version, about = "Reset words and matrices of words for synchronizing automata")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Tsv)]
    format: OutFormat,
    /// Seed for the randomized property drivers.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Tsv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an automaton file and summarize it.
    Check { file: PathBuf },
    /// Print a reset word.
    SyncWord {
        file: PathBuf,
        /// Shortest word by subset search (default).
        #[arg(long, conflicts_with = "greedy")]
        exact: bool,
        /// Greedy pair-merging word.
        #[arg(long)]
        greedy: bool,
    },
    /// Evaluate the series (S, u) for a state set P.
    Series {
        file: PathBuf,
        #[arg(long)]
        word: String,
        /// A 0/1 vector such as 0100, or comma-separated states such as 2,4.
        #[arg(long)]
        set: String,
    },
    /// Rank of the L matrices along a reset word: kari, roman, cerny N, or a file.
    Chain {
        #[arg(required = true, num_args = 1..=2)]
        target: Vec<String>,
    },
    /// Minimal solution of M_u L_x = M_s.
    Solve {
        file: PathBuf,
        #[arg(long)]
        u: String,
        /// Reset word fixing the sink (a shortest one by default).
        #[arg(long)]
        s: Option<String>,
        /// List every solution, not just the minimal one.
        #[arg(long)]
        all: bool,
    },
    /// Exhaustive census of complete automata with n states and k letters.
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Canonical spanning family of the n x k word matrices.
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Express this matrix (1-based row image, e.g. "1 2 1") over the family.
        #[arg(long)]
        express: Option<String>,
    },
    /// Run the randomized property drivers.
    Properties {
        #[arg(long, default_value_t = DEFAULT_CASES)]
        cases: u64,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Exact rank of the suffix matrices of a reset word: kari, roman, cerny N, or a file.
    Suffixes {
        #[arg(required = true, num_args = 1..=2)]
        target: Vec<String>,
    },
    /// Replay a bundled golden table: kari, roman or cerny4.
    Replay { example: String },
}

#[derive(Args)]
struct ExecArgs {
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

impl ExecArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

/// Whether every assertion of a subcommand held.
type Verdict = bool;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format {
        OutFormat::Tsv => Format::Tsv,
        OutFormat::Json => Format::Json,
    };
    match run(cli.command, format, cli.seed) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<Dfa> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dfa(&text).with_context(|| format!("parsing {}", path.display()))
}

fn example_named(name: &str) -> Option<Example> {
    match name {
        "kari" => Some(Example::Kari),
        "roman" => Some(Example::Roman),
        "cerny4" => Some(Example::Cerny4),
        _ => None,
    }
}

enum Target {
    Example(Example),
    Cerny(usize),
    File(Dfa),
}

fn target(args: &[String]) -> Result<Target> {
    match args {
        [name] if name == "kari" || name == "roman" => Ok(Target::Example(example_named(name).expect("known"))),
        [name, n] if name == "cerny" => {
            let n: usize = n.parse().with_context(|| format!("bad state count '{n}'"))?;
            if n == 4 {
                Ok(Target::Example(Example::Cerny4))
            } else {
                Ok(Target::Cerny(n))
            }
        }
        [name] if name == "cerny" => bail!("cerny needs a state count, e.g. `cerny 4`"),
        [path] => Ok(Target::File(load(Path::new(path))?)),
        _ => bail!("expected kari, roman, cerny N or a file"),
    }
}

fn parse_set(text: &str, n: usize) -> Result<StateSet> {
    if text.len() == n && text.chars().all(|c| c == '0' || c == '1') {
        return StateSet::parse_vector(text).context("bad vector");
    }
    let mut states = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let s: usize = tok.parse().with_context(|| format!("bad state '{tok}'"))?;
        if s == 0 || s > n {
            bail!("state {s} is outside 1..={n}");
        }
        states.push(s - 1);
    }
    Ok(StateSet::from_states(n, states))
}

fn emit(text: String) {
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
}

fn run(command: Command, format: Format, seed: u64) -> Result<Verdict> {
    match command {
        Command::Check { file } => check(&file, format),
        Command::SyncWord { file, greedy, .. } => sync_word(&file, greedy, format),
        Command::Series { file, word, set } => series(&file, &word, &set, format),
        Command::Chain { target: t } => chain(&t, format),
        Command::Solve { file, u, s, all } => solve(&file, &u, s.as_deref(), all, format),
        Command::Census { n, k, budget, exec } => census(n, k, budget, exec.execution(), format),
        Command::Basis { n, k, express } => basis(n, k, express.as_deref(), format),
        Command::Properties { cases, exec } => {
            let reports = run_all(seed, cases, exec.execution());
            emit(report::properties(&reports, format));
            Ok(reports.iter().all(|r| r.passed()))
        }
        Command::Suffixes { target: t } => suffixes(&t, format),
        Command::Replay { example } => {
            let ex = example_named(&example).with_context(|| format!("no bundled table '{example}'"))?;
            let r = replay(&ex.dfa(), &ex.golden())?;
            emit(report::replay(&r, format));
            Ok(r.all_match())
        }
    }
}

fn check(file: &Path, format: Format) -> Result<Verdict> {
    let dfa = load(file)?;
    let checked = validate(dfa.clone());
    let sync = syncmat_core::automaton::is_synchronizing(&dfa);
    let exact = if sync && dfa.n() <= MAX_BFS_STATES { Some(shortest_sync_word(&dfa)?.len()) } else { None };
    let greedy = if sync { Some(greedy_sync_word(&dfa)?.len()) } else { None };
    let show = |v: Option<usize>| v.map_or("-".to_owned(), |x| x.to_string());
    match format {
        Format::Tsv => emit(format!(
            "states\t{}\nletters\t{}\nstrongly-connected\t{}\nsynchronizing\t{sync}\nshortest-reset\t{}\ngreedy-reset\t{}\n",
            dfa.n(),
            dfa.letters().join(","),
            checked.strongly_connected,
            show(exact),
            show(greedy)
        )),
        Format::Json => emit(serde_json::to_string_pretty(&json!({
            "states": dfa.n(),
            "letters": dfa.letters(),
            "strongly_connected": checked.strongly_connected,
            "synchronizing": sync,
            "shortest_reset": exact,
            "greedy_reset": greedy,
        }))?),
    }
    Ok(true)
}

fn sync_word(file: &Path, greedy: bool, format: Format) -> Result<Verdict> {
    let dfa = load(file)?;
    let word = if greedy { greedy_sync_word(&dfa) } else { shortest_sync_word(&dfa) };
    let word = match word {
        Ok(w) => w,
        Err(syncmat_core::DfaError::NotSynchronizing) => {
            eprintln!("automaton is not synchronizing");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let image = dfa.image_of_all(&word)?;
    let text = dfa.format_word(&word);
    let sink = image.iter().next().map_or(0, |s| s + 1);
    match format {
        Format::Tsv => emit(format!("{text}\t{}\t{sink}", word.len())),
        Format::Json => emit(serde_json::to_string_pretty(&json!({
            "word": text,
            "length": word.len(),
            "sink": sink,
            "method": if greedy { "greedy" } else { "exact" },
        }))?),
    }
    Ok(image.is_singleton())
}

fn series(file: &Path, word: &str, set: &str, format: Format) -> Result<Verdict> {
    let dfa = load(file)?;
    let w = dfa.parse_word(word)?;
    let p = parse_set(set, dfa.n())?;
    let m = matrix_of_word(&dfa, &w)?;
    let value = SeriesContext::new(p).evaluate(&m)?;
    match format {
        Format::Tsv => emit(format!("{}\t{}\t{value}", dfa.format_word(&w), p.to_vector())),
        Format::Json => emit(serde_json::to_string_pretty(&json!({
            "word": dfa.format_word(&w),
            "set": p.to_vector(),
            "matrix": m.to_row_image(),
            "value": value,
        }))?),
    }
    Ok(true)
}

fn chain(args: &[String], format: Format) -> Result<Verdict> {
    let (run, asserted): (ChainRun, bool) = match target(args)? {
        Target::Example(ex) => (example_chain(ex)?, true),
        Target::Cerny(n) => {
            let dfa = build_cerny(n)?;
            (prefix_chain(&dfa, Some(cerny_reset_word(n)))?, false)
        }
        Target::File(dfa) => (prefix_chain(&dfa, None)?, false),
    };
    emit(report::chain(&run, format));
    Ok(!asserted || run.chain.rank == run.chain.target())
}

fn suffixes(args: &[String], format: Format) -> Result<Verdict> {
    let (dfa, s) = match target(args)? {
        Target::Example(ex) => (ex.dfa(), ex.reset_word()),
        Target::Cerny(n) => (build_cerny(n)?, cerny_reset_word(n)),
        Target::File(dfa) => {
            let s = shortest_sync_word(&dfa)?;
            (dfa, s)
        }
    };
    let r = right_subword_independence(&dfa, &s)?;
    emit(report::suffixes(&r, format));
    Ok(r.independent())
}

fn solve(file: &Path, u: &str, s: Option<&str>, all: bool, format: Format) -> Result<Verdict> {
    let dfa = load(file)?;
    let n = dfa.n();
    let u = dfa.parse_word(u)?;
    let s: Word = match s {
        Some(text) => dfa.parse_word(text)?,
        None => shortest_sync_word(&dfa)?,
    };
    let image = dfa.image_of_all(&s)?;
    if !image.is_singleton() {
        bail!("'{}' is not a reset word", dfa.format_word(&s));
    }
    let q = image.iter().next().expect("singleton");
    let mu = matrix_of_word(&dfa, &u)?;
    let ms = WordMatrix::constant(n, q);
    let l = solve_min(&mu, &ms, q)?;
    let sols = solutions_by_subsumption(&l, &mu, &ms, q)?;
    let series_x = SeriesContext::sink(n, q).evaluate(l.matrix())?;
    let verified = mu.multiply(l.matrix())? == ms && sols.violations == 0;
    match format {
        Format::Tsv => {
            let mut out = format!(
                "u\t{}\nsink\t{}\nM_u\t{}\nR(u)\t{}\nL_x\t{}\nseries\t{series_x}\nsolutions\t{}\nverified\t{verified}\n",
                dfa.format_word(&u),
                q + 1,
                mu.to_row_image(),
                mu.nonzero_columns(),
                l.matrix().to_row_image(),
                sols.total
            );
            if all {
                for sol in &sols.solutions {
                    out.push_str(&format!("solution\t{}\t{}\n", sol.sink_column(), sol.matrix().to_row_image()));
                }
            }
            emit(out);
        }
        Format::Json => {
            let listed: Vec<_> = if all {
                sols.solutions.iter().map(|s| json!({"column": s.sink_column().to_vector(), "matrix": s.matrix().to_row_image()})).collect()
            } else {
                Vec::new()
            };
            emit(serde_json::to_string_pretty(&json!({
                "u": dfa.format_word(&u),
                "sink": q + 1,
                "m_u": mu.to_row_image(),
                "image": mu.nonzero_columns().to_vector(),
                "l_x": l.matrix().to_row_image(),
                "series": series_x,
                "solutions": sols.total.to_string(),
                "listed": listed,
                "verified": verified,
            }))?);
        }
    }
    Ok(verified)
}

fn census(n: usize, k: usize, budget: u64, execution: Execution, format: Format) -> Result<Verdict> {
    if n == 0 || k == 0 || k > 26 {
        bail!("census needs n >= 1 and 1 <= k <= 26");
    }
    if n > 5 || k > 3 {
        eprintln!("note: n = {n}, k = {k} is beyond the default scale; the budget caps the run");
    }
    let r = audit_small_dfas(n, k, CensusOptions { budget, execution });
    emit(report::census(&r, format));
    if r.partial {
        eprintln!("partial census: {} of {} tables examined", r.tables_examined, r.tables_total);
    }
    Ok(r.cerny_bound_holds && r.frankl_bound_holds && r.max_reset.is_none_or(|m| m <= cerny_bound(n)))
}

fn basis(n: usize, k: usize, target: Option<&str>, format: Format) -> Result<Verdict> {
    let family = canonical_basis(n, k)?;
    let express = match target {
        Some(text) => {
            let m = WordMatrix::parse(&format!("row-image: {text}"))
                .or_else(|_| WordMatrix::parse(text))
                .with_context(|| format!("bad matrix '{text}'"))?;
            if m.n() != n {
                bail!("matrix has {} rows, expected {n}", m.n());
            }
            let cs = canonical_coefficients(&m, k)?;
            Some((m, cs))
        }
        None => None,
    };
    let express_ok = match &express {
        Some((m, cs)) => coefficient_sum_check(cs, &family)?.result.as_word_matrix().as_ref() == Some(m),
        None => true,
    };
    let brute_force = (k as f64).powi(n as i32) <= 65_536.0;
    let space = if brute_force { Some(word_space_dimension(n, k)?) } else { None };
    let name = |idx: usize| {
        if idx + 1 == family.len() {
            "K".to_owned()
        } else {
            format!("V_{},{}", idx / (k - 1) + 1, idx % (k - 1) + 1)
        }
    };
    match format {
        Format::Tsv => {
            let mut out = String::new();
            for (i, m) in family.iter().enumerate() {
                out.push_str(&format!("{}\t{}\n", name(i), m.to_row_image()));
            }
            out.push_str(&format!("# {} matrices, n(k-1)+1 = {}\n", family.len(), n * (k - 1) + 1));
            if let Some(s) = &space {
                out.push_str(&report::word_space(s, format));
            }
            if let Some((m, cs)) = &express {
                out.push_str(&format!("express\t{}\n", m.to_row_image()));
                for (i, c) in cs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                    out.push_str(&format!("coefficient\t{}\t{}\n", name(i), format_rational(c)));
                }
            }
            emit(out);
        }
        Format::Json => emit(serde_json::to_string_pretty(&json!({
            "n": n,
            "k": k,
            "family": family.iter().enumerate().map(|(i, m)| json!({"name": name(i), "matrix": m.to_row_image()})).collect::<Vec<_>>(),
            "check": space,
            "express": express.as_ref().map(|(m, cs)| json!({
                "matrix": m.to_row_image(),
                "coefficients": cs.iter().map(format_rational).collect::<Vec<_>>(),
            })),
        }))?),
    }
    Ok(space.is_none_or(|s| s.holds()) && express_ok)
}
