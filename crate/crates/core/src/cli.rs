//! The `matrixrepet` command line.
//!
//! Every subcommand prints a JSON [`RunReport`] on stdout unless it has a
//! primary non-JSON output (`gen` without `-o`, `bench`, `stats` without
//! `--json`). Human-readable summaries go to stderr.
//!
//! Exit codes: 0 success, 1 invalid attractor in `verify` or any other
//! failure, 2 malformed input, 3 inconclusive search, 4 invalid attractor
//! file, 64 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::attractor::{
    gamma_exact, gamma_greedy, lift_attractor, reduce_string_to_matrix, verify_attractor, Attractor,
    ExactOptions, StringAttractor, Verification, GREEDY_K_CAP,
};
use crate::blocktree::{build_bt, build_gamma_bt, deserialize, serialize, BlockTree, BuildOptions};
use crate::delta::{delta_profile_fast_with, delta_profile_naive, DeltaProfile};
use crate::error::{Error, Result};
use crate::generators::{gen_nonmono, gen_permuted, gen_random, gen_separation, separation_root};
use crate::hash::{HashIndex, DEFAULT_SEED, SEED_ENV};
use crate::matrix::{load_matrix, str_symbols, symbol_to_char, Matrix, MatrixFormat, Symbol};

pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_ATTRACTOR: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "matrixrepet", version, about = "Repetitiveness measures and block trees for square matrices")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Fingerprint seed (decimal or 0x-hex); defaults to $MATRIXREPET_SEED.
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Confirm fingerprint matches cell by cell where supported.
    #[arg(long, global = true)]
    paranoid: bool,
    /// Leave timing out of reports so runs compare byte for byte.
    #[arg(long, global = true)]
    no_timing: bool,
    /// Matrix file format for inputs and outputs.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Raw,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => MatrixFormat::Text,
            FormatArg::Raw => MatrixFormat::RawBytes,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Naive,
    Fast,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distinct square submatrix counts and delta.
    Delta {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Fast)]
        method: MethodArg,
        /// Also write the bare profile JSON here.
        #[arg(long)]
        profile_out: Option<PathBuf>,
    },
    /// Minimum (exact) or small (greedy) attractor.
    Gamma {
        matrix: PathBuf,
        #[arg(long, conflicts_with = "greedy")]
        exact: bool,
        #[arg(long)]
        greedy: bool,
        /// Search-node budget for the exact solver.
        #[arg(long, default_value_t = ExactOptions::MATRIX_DEFAULT.budget)]
        budget: u64,
        /// Largest side the exact solver accepts.
        #[arg(long, default_value_t = ExactOptions::MATRIX_DEFAULT.max_size)]
        max_n: usize,
        /// Largest submatrix side the greedy phase covers directly.
        #[arg(long, default_value_t = GREEDY_K_CAP)]
        k_cap: usize,
        /// Write the attractor ("i j" lines) here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Checks an attractor file; exits 1 with a witness when it is invalid.
    Verify {
        matrix: PathBuf,
        #[arg(long)]
        attractor: PathBuf,
    },
    /// The matrix whose rows all equal a string, plus lifted positions.
    Reduce {
        string: String,
        /// 1-based string attractor positions to lift, comma separated.
        #[arg(long, value_delimiter = ',')]
        positions: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Builds a block tree.
    Build {
        matrix: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Explicit-leaf side; defaults to k.
        #[arg(long)]
        leaf: Option<usize>,
        /// Size the first level from delta (or |G| with --attractor).
        #[arg(long)]
        shallow: bool,
        /// Measure for --shallow instead of computing it.
        #[arg(long, requires = "shallow")]
        delta: Option<u64>,
        /// Mark by this attractor instead of first occurrences.
        #[arg(long)]
        attractor: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Reads one cell (1-based) from a serialized tree.
    Access { tree: PathBuf, i: usize, j: usize },
    /// Per-level node counts of a serialized tree.
    Stats {
        tree: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generates a matrix family member.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Sweeps a family over sizes and prints CSV.
    Bench {
        #[arg(long, value_enum, default_value_t = BenchFamily::Separation)]
        family: BenchFamily,
        #[arg(long, value_delimiter = ',', default_values_t = [64, 256, 1024])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        leaf: Option<usize>,
        /// Skip the greedy attractor above this side.
        #[arg(long, default_value_t = 256)]
        gamma_max_n: usize,
        /// Alphabet size for the random family.
        #[arg(long, default_value_t = 2)]
        sigma: usize,
        /// Generator seed for the random family.
        #[arg(long, default_value_t = 1)]
        gen_seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BenchFamily {
    Separation,
    Permuted,
    Random,
}

#[derive(Debug, Subcommand)]
enum Family {
    Separation {
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Permuted {
        #[arg(long)]
        n: usize,
        /// 1-based block order, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        perm: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The all-rows-equal matrix of `w = abbb a^n ab` or of `w b`.
    Nonmono {
        #[arg(long)]
        n: usize,
        /// Reduce `w` instead of `w b`.
        #[arg(long)]
        short: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The all-rows-equal matrix of a string.
    Rs {
        #[arg(long)]
        string: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sigma: usize,
        #[arg(long = "gen-seed", alias = "rng-seed")]
        gen_seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    parsed.map_err(|e| format!("bad seed {s:?}: {e}"))
}

/// JSON envelope shared by all subcommands.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub input: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    pub outputs: Value,
    pub version: &'static str,
    pub seeds: Value,
}

struct Ctx {
    argv: Vec<String>,
    seed: u64,
    paranoid: bool,
    no_timing: bool,
    format: MatrixFormat,
    started: Instant,
    out: Vec<u8>,
    err: Vec<u8>,
}

impl Ctx {
    fn report(&mut self, input: Value, outputs: Value) -> Result<()> {
        let timing = (!self.no_timing).then(|| self.started.elapsed().as_secs_f64() * 1e3);
        let r = RunReport {
            command: self.argv.clone(),
            input,
            timing_ms: timing,
            outputs,
            version: env!("CARGO_PKG_VERSION"),
            seeds: json!({ "hash": self.seed }),
        };
        let text = serde_json::to_string_pretty(&r).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(self.out, "{text}")?;
        Ok(())
    }

    fn note(&mut self, msg: impl std::fmt::Display) {
        let _ = writeln!(self.err, "{msg}");
    }

    fn load(&self, path: &Path) -> Result<Matrix> {
        load_matrix(path, self.format)
    }

    fn profile(&self, m: &Matrix, method: MethodArg) -> Result<DeltaProfile> {
        match method {
            MethodArg::Naive => {
                delta_profile_naive(&HashIndex::with_seed(m, self.seed).paranoid(self.paranoid))
            }
            MethodArg::Fast => delta_profile_fast_with(m, self.seed, self.paranoid),
        }
    }

    /// Writes `m` to `path`, or to stdout when `path` is `None`.
    fn emit_matrix(&mut self, m: &Matrix, path: Option<&Path>) -> Result<()> {
        let bytes = match self.format {
            MatrixFormat::Text => m.to_text()?.into_bytes(),
            MatrixFormat::RawBytes => m.to_raw()?,
        };
        match path {
            Some(p) => std::fs::write(p, bytes)?,
            None => self.out.write_all(&bytes)?,
        }
        Ok(())
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Format(_)
        | Error::UnsupportedAlphabet(_)
        | Error::NotSquare { .. }
        | Error::BadMagic
        | Error::Version(_)
        | Error::Truncated(_)
        | Error::Corrupt(_) => EXIT_FORMAT,
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        Error::InvalidAttractor(_) => EXIT_ATTRACTOR,
        _ => EXIT_INVALID,
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let seed = match cli.global.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => match parse_seed(&v) {
                Ok(s) => s,
                Err(msg) => {
                    let _ = writeln!(err, "error: {SEED_ENV}: {msg}");
                    return EXIT_USAGE;
                }
            },
            Err(_) => DEFAULT_SEED,
        },
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return EXIT_INVALID;
        }
    };
    let mut ctx = Ctx {
        argv: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        seed,
        paranoid: cli.global.paranoid,
        no_timing: cli.global.no_timing,
        format: cli.global.format.into(),
        started: Instant::now(),
        out: Vec::new(),
        err: Vec::new(),
    };
    let code = match pool.install(|| dispatch(&mut ctx, cli.command)) {
        Ok(code) => code,
        Err(e) => {
            ctx.note(format!("error: {e}"));
            exit_code(&e)
        }
    };
    let _ = out.write_all(&ctx.out).and_then(|_| out.flush());
    let _ = err.write_all(&ctx.err).and_then(|_| err.flush());
    code
}

fn path_input(p: &Path) -> Value {
    json!({ "path": p.display().to_string() })
}

fn load_attractor(path: &Path) -> Result<Attractor> {
    let text = std::fs::read_to_string(path)?;
    Attractor::parse(&text).map_err(|e| Error::InvalidAttractor(format!("{}: {e}", path.display())))
}

fn positions_json(g: &Attractor) -> Value {
    json!(g.positions().iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>())
}

fn load_tree(path: &Path) -> Result<BlockTree> {
    deserialize(&std::fs::read(path)?)
}

fn dispatch(ctx: &mut Ctx, command: Command) -> Result<i32> {
    match command {
        Command::Delta {
            matrix,
            method,
            profile_out,
        } => {
            let m = ctx.load(&matrix)?;
            let p = ctx.profile(&m, method)?;
            let profile = serde_json::to_value(&p).map_err(|e| Error::Format(e.to_string()))?;
            if let Some(path) = profile_out {
                std::fs::write(&path, format!("{profile}\n"))?;
            }
            ctx.note(format!("n = {}  delta = {} ({:.4})  argmax k = {}", p.n, p.delta2d, p.delta2d.to_f64(), p.argmax_k));
            let method = format!("{method:?}").to_lowercase();
            ctx.report(path_input(&matrix), json!({ "method": method, "profile": profile }))?;
            Ok(0)
        }
        Command::Gamma {
            matrix,
            exact: _,
            greedy,
            budget,
            max_n,
            k_cap,
            output,
        } => {
            let m = ctx.load(&matrix)?;
            let index = HashIndex::with_seed(&m, ctx.seed).paranoid(ctx.paranoid);
            let g = if greedy {
                gamma_greedy(&index, k_cap)?
            } else {
                gamma_exact(&index, ExactOptions { budget, max_size: max_n })?
            };
            if let Some(path) = &output {
                std::fs::write(path, g.to_text())?;
            }
            ctx.note(format!("{} attractor of size {}: {g}", if greedy { "greedy" } else { "minimum" }, g.len()));
            ctx.report(
                path_input(&matrix),
                json!({
                    "method": if greedy { "greedy" } else { "exact" },
                    "size": g.len(),
                    "positions": positions_json(&g),
                }),
            )?;
            Ok(0)
        }
        Command::Verify { matrix, attractor } => {
            let m = ctx.load(&matrix)?;
            let g = load_attractor(&attractor)?;
            let n = m.side()?;
            g.check_range(n, n).map_err(|e| Error::InvalidAttractor(e.to_string()))?;
            let index = HashIndex::with_seed(&m, ctx.seed);
            let v = verify_attractor(&index, &g)?;
            let (code, outputs) = match v {
                Verification::Valid => {
                    ctx.note("valid attractor");
                    (0, json!({ "valid": true, "size": g.len() }))
                }
                Verification::Uncovered { k, anchor } => {
                    ctx.note(format!(
                        "invalid: the {k}x{k} submatrix at ({}, {}) has no occurrence containing a position",
                        anchor.0, anchor.1
                    ));
                    (
                        EXIT_INVALID,
                        json!({ "valid": false, "size": g.len(), "witness": { "k": k, "anchor": [anchor.0, anchor.1] } }),
                    )
                }
            };
            ctx.report(json!({ "matrix": matrix.display().to_string(), "attractor": attractor.display().to_string() }), outputs)?;
            Ok(code)
        }
        Command::Reduce {
            string,
            positions,
            output,
        } => {
            let s = str_symbols(&string)?;
            let m = reduce_string_to_matrix(&s)?;
            if let Some(path) = &output {
                ctx.emit_matrix(&m, Some(path))?;
            }
            let mut outputs = json!({
                "n": m.rows(),
                "rows": (0..m.rows()).map(|_| string.clone()).collect::<Vec<_>>(),
            });
            if !positions.is_empty() {
                if let Some(&bad) = positions.iter().find(|&&p| p == 0 || p > s.len()) {
                    return Err(Error::InvalidAttractor(format!("position {bad} outside 1..={}", s.len())));
                }
                let lifted = lift_attractor(&StringAttractor::new(positions));
                outputs["lifted"] = positions_json(&lifted);
            }
            ctx.report(json!({ "string": string }), outputs)?;
            Ok(0)
        }
        Command::Build {
            matrix,
            k,
            leaf,
            shallow,
            delta,
            attractor,
            output,
        } => {
            let m = ctx.load(&matrix)?;
            let opts = BuildOptions {
                k,
                leaf_side: leaf.unwrap_or(k),
                shallow,
                shallow_measure: delta,
            };
            let (tree, input) = match &attractor {
                Some(path) => {
                    let g = load_attractor(path)?;
                    let t = build_gamma_bt(&m, &g, &opts)?;
                    (t, json!({ "matrix": matrix.display().to_string(), "attractor": path.display().to_string() }))
                }
                None => {
                    let opts = match (shallow, delta) {
                        (true, None) => BuildOptions {
                            shallow_measure: Some(ctx.profile(&m, MethodArg::Fast)?.delta2d.ceil()),
                            ..opts
                        },
                        _ => opts,
                    };
                    (build_bt(&m, &opts)?, path_input(&matrix))
                }
            };
            let bytes = serialize(&tree);
            std::fs::write(&output, &bytes)?;
            let stats = tree.stats();
            write_stats_table(ctx, &stats);
            let stats = serde_json::to_value(&stats).map_err(|e| Error::Format(e.to_string()))?;
            ctx.report(input, json!({ "tree": output.display().to_string(), "bytes": bytes.len(), "stats": stats }))?;
            Ok(0)
        }
        Command::Access { tree, i, j } => {
            let t = load_tree(&tree)?;
            if i == 0 || j == 0 || i > t.n() || j > t.n() {
                return Err(crate::error::out_of_range("cell", i.max(j), format!("1..={}", t.n())));
            }
            let (sym, visits) = t.access_traced(i - 1, j - 1)?;
            let ch = symbol_to_char(sym).ok().map(String::from);
            ctx.note(format!("M[{i}][{j}] = {}", ch.clone().unwrap_or_else(|| sym.to_string())));
            ctx.report(
                json!({ "tree": tree.display().to_string(), "i": i, "j": j }),
                json!({ "symbol": sym, "char": ch, "visits": visits }),
            )?;
            Ok(0)
        }
        Command::Stats { tree, json: as_json } => {
            let t = load_tree(&tree)?;
            let stats = t.stats();
            if as_json {
                let stats = serde_json::to_value(&stats).map_err(|e| Error::Format(e.to_string()))?;
                ctx.report(path_input(&tree), json!({ "stats": stats }))?;
            } else {
                let mut text = Vec::new();
                stats_table(&mut text, &stats)?;
                ctx.out.write_all(&text)?;
            }
            Ok(0)
        }
        Command::Gen { family } => run_gen(ctx, family),
        Command::Bench {
            family,
            sizes,
            k,
            leaf,
            gamma_max_n,
            sigma,
            gen_seed,
        } => {
            writeln!(ctx.out, "n,delta2d,greedy_gamma,marked_per_level_max,total_nodes")?;
            for n in sizes {
                let m = match family {
                    BenchFamily::Separation => gen_separation(n)?,
                    BenchFamily::Permuted => {
                        let blocks = separation_root(n)? / 2;
                        gen_permuted(n, &(1..=blocks).rev().collect::<Vec<_>>())?
                    }
                    BenchFamily::Random => gen_random(n, sigma, gen_seed)?,
                };
                let p = ctx.profile(&m, MethodArg::Fast)?;
                let greedy = if n <= gamma_max_n {
                    let index = HashIndex::with_seed(&m, ctx.seed);
                    gamma_greedy(&index, GREEDY_K_CAP)?.len().to_string()
                } else {
                    String::new()
                };
                let opts = BuildOptions {
                    leaf_side: leaf.unwrap_or(k),
                    ..BuildOptions::new(k)
                };
                let st = build_bt(&m, &opts)?.stats();
                writeln!(
                    ctx.out,
                    "{n},{:.6},{greedy},{},{}",
                    p.delta2d.to_f64(),
                    st.max_marked_per_level,
                    st.nodes
                )?;
                ctx.note(format!(
                    "n = {n}: delta = {}, greedy gamma = {}, max marked/level = {}, nodes = {}",
                    p.delta2d,
                    if greedy.is_empty() { "-" } else { &greedy },
                    st.max_marked_per_level,
                    st.nodes
                ));
            }
            Ok(0)
        }
    }
}

fn run_gen(ctx: &mut Ctx, family: Family) -> Result<i32> {
    let (m, output, input, extra) = match family {
        Family::Separation { n, output } => (gen_separation(n)?, output, json!({ "family": "separation", "n": n }), json!({})),
        Family::Permuted { n, perm, output } => (
            gen_permuted(n, &perm)?,
            output,
            json!({ "family": "permuted", "n": n, "perm": perm }),
            json!({}),
        ),
        Family::Nonmono { n, short, output } => {
            let (w, wb) = gen_nonmono(n)?;
            let s = if short { &w } else { &wb };
            (
                reduce_string_to_matrix(&str_symbols(s)?)?,
                output,
                json!({ "family": "nonmono", "n": n, "short": short }),
                json!({ "w": w, "wb": wb }),
            )
        }
        Family::Rs { string, output } => (
            reduce_string_to_matrix(&str_symbols(&string)?)?,
            output,
            json!({ "family": "rs", "string": string }),
            json!({}),
        ),
        Family::Random {
            n,
            sigma,
            gen_seed,
            output,
        } => {
            let seed = gen_seed.unwrap_or(ctx.seed);
            let m = gen_random(n, sigma, seed)?;
            // symbols 0..sigma print as '0', '1', ... in text files
            let m = match ctx.format {
                MatrixFormat::Text => {
                    if sigma > 79 {
                        return Err(Error::UnsupportedAlphabet(format!(
                            "text output supports up to 79 random symbols, got {sigma}"
                        )));
                    }
                    m.relabel(|v| v + b'0' as Symbol)?
                }
                MatrixFormat::RawBytes => m,
            };
            (m, output, json!({ "family": "random", "n": n, "sigma": sigma, "seed": seed }), json!({}))
        }
    };
    match output {
        Some(path) => {
            ctx.emit_matrix(&m, Some(&path))?;
            let mut outputs = json!({ "path": path.display().to_string(), "n": m.rows(), "sigma": m.sigma() });
            if let (Value::Object(o), Value::Object(e)) = (&mut outputs, extra) {
                o.extend(e);
            }
            ctx.report(input, outputs)?;
        }
        None => {
            ctx.emit_matrix(&m, None)?;
            if let Value::Object(e) = extra {
                for (key, v) in e {
                    ctx.note(format!("{key} = {}", v.as_str().unwrap_or_default()));
                }
            }
        }
    }
    Ok(0)
}

fn stats_table(w: &mut dyn Write, st: &crate::blocktree::BTStats) -> Result<()> {
    writeln!(
        w,
        "n = {}  padded = {}  k = {}  leaf = {}  origin = {:?}",
        st.n, st.padded_side, st.k, st.leaf_side, st.origin
    )?;
    writeln!(w, "{:>5} {:>7} {:>8} {:>8} {:>8} {:>8}", "level", "side", "live", "marked", "pointers", "padding")?;
    for l in &st.levels {
        writeln!(
            w,
            "{:>5} {:>7} {:>8} {:>8} {:>8} {:>8}",
            l.level, l.side, l.live, l.marked, l.unmarked, l.padding
        )?;
    }
    writeln!(
        w,
        "nodes = {}  pointers = {}  explicit symbols = {}  space units = {}  ~bits = {}",
        st.nodes, st.pointers, st.explicit_symbols, st.space_units, st.estimated_bits
    )?;
    Ok(())
}

fn write_stats_table(ctx: &mut Ctx, st: &crate::blocktree::BTStats) {
    let _ = stats_table(&mut ctx.err, st);
}
