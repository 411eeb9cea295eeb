use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use growthtype::assembly::{DiscreteGrowthFile, ParameterSelection};
use growthtype::catalog::Catalog;
use growthtype::pipeline::{ErrorClass, GrowthCheck, SynthesisOptions};
use growthtype::*;

#[derive(Parser)]
#[command(name = "growthtype", version, about = "Tree and complex synthesis for prescribed volume growth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Infinite,
    FiniteType,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Infinite => Mode::Infinite,
            ModeArg::FiniteType => Mode::FiniteType,
        }
    }
}

#[derive(clap::Args)]
struct SequenceArgs {
    /// Sequence file: a table `{"horizon", "values"}` or a generator.
    input: PathBuf,
    /// Truncate the sequence to this horizon.
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Smallest bgd constant of a sequence.
    CheckBgd {
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Same-type tree sequence with w(0) = 1 and controlled increments.
    Normalize {
        #[command(flatten)]
        seq: SequenceArgs,
        /// Bgd constant to use; defaults to the smallest one.
        #[arg(long = "L")]
        l: Option<u64>,
    },
    /// Superlinear representative built from the convex minorant.
    Suplinear {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, default_value_t = 1)]
        threshold: u64,
    },
    /// Builds the tree of a tree sequence and writes DOT and JSONL exports.
    BuildTree {
        #[command(flatten)]
        seq: SequenceArgs,
        /// Single-child trunk intervals as JSON, e.g. `[[2,3],[9,1]]`.
        #[arg(long, default_value = "[]")]
        sparse: String,
        #[arg(long, default_value_t = 3)]
        lambda_num: u64,
        #[arg(long, default_value_t = 2)]
        lambda_den: u64,
        /// Constant of the exponential growth check; computed when absent.
        #[arg(long)]
        growth_c: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Seeded synthetic piece catalog.
    MakeCatalog {
        /// Catalog parameters as JSON.
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        doubling: bool,
    },
    /// Full pipeline; writes tree, complex, z, audit and witness files.
    Synthesize {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_enum, default_value = "infinite")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        a_max: u64,
        #[arg(long)]
        doubling: bool,
        #[arg(long, requires_all = ["lambda_den", "growth_c"])]
        lambda_num: Option<String>,
        #[arg(long, requires_all = ["lambda_num", "growth_c"])]
        lambda_den: Option<String>,
        #[arg(long, requires_all = ["lambda_num", "lambda_den"])]
        growth_c: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Re-runs the checks on artifacts written by `synthesize`.
    Verify {
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
    /// Smallest R satisfying the stretch inequalities.
    Stretch {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long = "A")]
        big_a: String,
        #[arg(long = "B")]
        big_b: String,
        #[arg(long = "C")]
        big_c: String,
        #[arg(long, default_value_t = 0)]
        r_min: u64,
        #[arg(long)]
        r_max: Option<u64>,
    },
}

/// Report and exit status of a finished command.
struct Outcome {
    code: u8,
    report: Value,
}

fn pass(report: impl Serialize) -> anyhow::Result<Outcome> {
    Ok(Outcome {
        code: 0,
        report: serde_json::to_value(report)?,
    })
}

fn refuse(code: u8, stage: &str, message: impl ToString) -> anyhow::Result<Outcome> {
    Ok(Outcome {
        code,
        report: json!({ "status": "fail", "stage": stage, "error": message.to_string() }),
    })
}

fn read_sequence(seq: &SequenceArgs) -> anyhow::Result<GrowthFunction> {
    let text = fs::read_to_string(&seq.input).with_context(|| format!("reading {}", seq.input.display()))?;
    let v = GrowthFunction::from_json_str(&text).with_context(|| format!("parsing {}", seq.input.display()))?;
    match seq.horizon {
        None => Ok(v),
        Some(h) if h < 2 => bail!("--horizon must be at least 2"),
        Some(h) => Ok(v.truncated(h)?),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn parse_big(s: &str) -> anyhow::Result<BigUint> {
    s.parse().map_err(|_| anyhow!("not a nonnegative integer: {s}"))
}

fn parse_rational(s: &str) -> anyhow::Result<BigRational> {
    s.parse().map_err(|_| anyhow!("not a rational number: {s}"))
}

fn check_bgd_cmd(seq: &SequenceArgs) -> anyhow::Result<Outcome> {
    let v = read_sequence(seq)?;
    match check_bgd(&v) {
        Ok(w) => pass(w),
        Err(e) => refuse(2, "check_bgd", e),
    }
}

fn normalize_cmd(seq: &SequenceArgs, l: Option<u64>) -> anyhow::Result<Outcome> {
    let v = read_sequence(seq)?;
    let l = match (l, check_bgd(&v)) {
        (Some(l), _) => l,
        (None, Ok(w)) => w.l,
        (None, Err(e)) => return refuse(2, "check_bgd", e),
    };
    match normalize::normalize_bgd(&v, l) {
        Ok(report) => pass(report),
        Err(e @ normalize::NormalizeError::InvalidWitness { .. }) => refuse(2, "normalize", e),
        Err(e) => refuse(3, "normalize", e),
    }
}

fn suplinear_cmd(seq: &SequenceArgs, threshold: u64) -> anyhow::Result<Outcome> {
    let v = read_sequence(seq)?;
    let l = match check_bgd(&v) {
        Ok(w) => w.l,
        Err(e) => return refuse(2, "check_bgd", e),
    };
    match suplinear_representative(&v, l, &BigUint::from(threshold)) {
        Ok(report) => pass(report),
        Err(e) => refuse(3, "suplinear", e),
    }
}

fn build_tree_cmd(
    seq: &SequenceArgs,
    sparse: &str,
    lambda: (u64, u64),
    growth_c: Option<&str>,
    out: &Path,
) -> anyhow::Result<Outcome> {
    let v = read_sequence(seq)?;
    let s: SparseSet = serde_json::from_str(sparse).context("parsing --sparse")?;
    let (num, den) = (BigUint::from(lambda.0), BigUint::from(lambda.1));
    let c = match growth_c {
        Some(c) => parse_big(c)?,
        None => growth::growth_bound_constant(&v, &num, &den),
    };
    match check_tree_hypotheses(&v, &num, &den, &c) {
        Ok(()) => {}
        Err(e @ growth::TreeHypothesisViolation::InvalidParameters { .. }) => bail!(e),
        Err(e) => return refuse(2, "tree_hypotheses", e),
    }
    let tree = match build_tree(&v, &s) {
        Ok(t) => t,
        Err(e) => return refuse(2, "build_tree", e),
    };
    fs::create_dir_all(out)?;
    write(&out.join("tree.dot"), &tree.to_dot(&s))?;
    write(&out.join("tree.jsonl"), &tree.to_jsonl(&s))?;
    pass(json!({
        "depth": tree.depth(),
        "vertices": tree.vertex_count(),
        "events": tree.events(),
        "exact": root_growth(&tree) == v,
    }))
}

fn make_catalog_cmd(params: &Path, seed: u64, doubling: bool) -> anyhow::Result<Outcome> {
    let params: CatalogParams = read_json(params)?;
    let catalog = make_catalog(&params, seed, doubling)?;
    pass(catalog)
}

struct SynthesizeArgs<'a> {
    seq: &'a SequenceArgs,
    params: &'a Path,
    options: SynthesisOptions,
    out: &'a Path,
}

fn synthesize_cmd(args: SynthesizeArgs<'_>) -> anyhow::Result<Outcome> {
    let v = read_sequence(args.seq)?;
    let params: CatalogParams = read_json(args.params)?;
    let s = match synthesize(&v, &params, &args.options) {
        Ok(s) => s,
        Err(e) => {
            let code = match e.class {
                ErrorClass::Usage => 1,
                ErrorClass::Hypothesis => 2,
                ErrorClass::Stage => 3,
            };
            return refuse(code, e.stage, e.message);
        }
    };
    let out = args.out;
    fs::create_dir_all(out)?;
    let c = &s.complex;
    write(&out.join("tree.dot"), &c.tree.to_dot(&c.sparse))?;
    write(&out.join("tree.jsonl"), &c.tree.to_jsonl(&c.sparse))?;
    let complex = json!({
        "input": s.input,
        "tree_growth": s.tree_growth(),
        "mode": s.options.mode,
        "seed": s.options.seed,
        "doubling": s.options.doubling,
        "a_max": s.options.a_max,
        "selection": c.selection,
        "sparse_set": c.sparse,
        "catalog": c.catalog,
        "trunk": c.trunk_kinds(),
        "events": c.tree.events(),
        "lemma_z": s.lemma_z,
    });
    write_json(&out.join("complex.json"), &complex)?;
    write_json(&out.join("z.json"), &s.growth.to_file())?;
    write_json(&out.join("audit.json"), &s.audit)?;
    let witness = json!({
        "A": s.witness.a,
        "horizon_checked": s.witness.horizon_checked,
        "a_max": s.options.a_max,
        "finite_type": s.finite_type,
    });
    write_json(&out.join("witness.json"), &witness)?;
    pass(json!({ "status": "pass", "A": s.witness.a, "out": out }))
}

#[derive(serde::Deserialize)]
struct StoredComplex {
    input: GrowthFunction,
    tree_growth: GrowthFunction,
    a_max: u64,
    selection: ParameterSelection,
    catalog: Catalog,
}

fn verify_cmd(dir: &Path) -> anyhow::Result<Outcome> {
    let stored: StoredComplex = read_json(&dir.join("complex.json"))?;
    let zfile: DiscreteGrowthFile = read_json(&dir.join("z.json"))?;
    if zfile.values.len() != zfile.horizon + 1 || zfile.slice_counts.len() != zfile.horizon + 1 {
        bail!("z.json declares horizon {} but holds {} values", zfile.horizon, zfile.values.len());
    }
    if stored.input.horizon() != stored.tree_growth.horizon() {
        bail!(
            "horizon mismatch: input {} vs tree growth {}",
            stored.input.horizon(),
            stored.tree_growth.horizon()
        );
    }
    let sel = &stored.selection;
    let tree = build_tree(&stored.tree_growth, &sel.sparse_set())?;
    let c = assign_pieces(tree, sel, &stored.catalog)?;
    if zfile.horizon != c.slice_horizon() {
        bail!(
            "horizon mismatch: z.json has {}, complex.json implies {}",
            zfile.horizon,
            c.slice_horizon()
        );
    }
    let z: Vec<BigUint> = zfile.values.iter().map(|x| parse_big(x)).collect::<Result<_, _>>()?;

    let lemma_z = match check_lemma_z(&c, &z) {
        Ok(r) => json!({ "status": "pass", "report": r }),
        Err(e) => json!({ "status": "violation", "violation": e }),
    };
    let audit = metric_audit(&c)?;
    let audit_json = json!({ "status": if audit.passed() { "pass" } else { "violation" }, "report": audit });
    let equivalence = match GrowthFunction::new(z) {
        Ok(zf) => match growth_type_equivalent(&zf, &stored.input, stored.a_max) {
            Ok(w) => json!({ "status": "pass", "witness": w }),
            Err(e) => json!({ "status": "violation", "error": e.to_string() }),
        },
        Err(e) => json!({ "status": "violation", "error": e.to_string() }),
    };
    let all = [&lemma_z, &audit_json, &equivalence]
        .iter()
        .all(|r| r["status"] == "pass");
    Ok(Outcome {
        code: if all { 0 } else { 3 },
        report: json!({ "lemma_z": lemma_z, "metric_audit": audit_json, "equivalence": equivalence }),
    })
}

#[allow(clippy::too_many_arguments)]
fn stretch_cmd(
    seq: &SequenceArgs,
    a: &str,
    b: &str,
    big_a: &str,
    big_b: &str,
    big_c: &str,
    r_min: u64,
    r_max: Option<u64>,
) -> anyhow::Result<Outcome> {
    let v = read_sequence(seq)?;
    let r_max = r_max.unwrap_or(v.horizon() as u64);
    let q = [a, b, big_a, big_b, big_c]
        .iter()
        .map(|s| parse_rational(s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    match stretch_r(&q[0], &q[1], &q[2], &q[3], &q[4], &v, r_min, r_max) {
        Ok(r) => pass(json!({ "R": r })),
        Err(e @ assembly::AssemblyError::InvalidStretch(_)) => refuse(2, "stretch", e),
        Err(e) => refuse(3, "stretch", e),
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::CheckBgd { seq } => check_bgd_cmd(&seq),
        Command::Normalize { seq, l } => normalize_cmd(&seq, l),
        Command::Suplinear { seq, threshold } => suplinear_cmd(&seq, threshold),
        Command::BuildTree {
            seq,
            sparse,
            lambda_num,
            lambda_den,
            growth_c,
            out,
        } => build_tree_cmd(&seq, &sparse, (lambda_num, lambda_den), growth_c.as_deref(), &out),
        Command::MakeCatalog { params, seed, doubling } => make_catalog_cmd(&params, seed, doubling),
        Command::Synthesize {
            seq,
            params,
            mode,
            seed,
            a_max,
            doubling,
            lambda_num,
            lambda_den,
            growth_c,
            out,
        } => {
            let growth_check = match (lambda_num, lambda_den, growth_c) {
                (Some(n), Some(d), Some(c)) => Some(GrowthCheck {
                    lambda_num: parse_big(&n)?,
                    lambda_den: parse_big(&d)?,
                    c: parse_big(&c)?,
                }),
                _ => None,
            };
            let options = SynthesisOptions {
                mode: mode.into(),
                seed,
                doubling,
                a_max,
                growth_check,
            };
            synthesize_cmd(SynthesizeArgs {
                seq: &seq,
                params: &params,
                options,
                out: &out,
            })
        }
        Command::Verify { dir } => verify_cmd(&dir),
        Command::Stretch {
            seq,
            a,
            b,
            big_a,
            big_b,
            big_c,
            r_min,
            r_max,
        } => stretch_cmd(&seq, &a, &b, &big_a, &big_b, &big_c, r_min, r_max),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
            // a closed pipe is not an error
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
