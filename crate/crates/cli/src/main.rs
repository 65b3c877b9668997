//! `fcrystal`: analyze F-crystals from spec files, evaluate bounds, write
//! family specs and rerun the published checks.

mod report;
mod spec;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fcrystal::families::Family;
use fcrystal::level_torsion::{
    default_horizon_from_hodge, isomorphism_number, pdiv_bound, quasi_special_from_hodge, theorem12_from_hodge,
};
use fcrystal::verify::{run_subset, Subset};
use fcrystal::{Error, Slope};

use report::{InputEcho, Report};
use spec::{auto_precision, inline_matrix, probe, CrystalSpecFile};

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Numeric(Error),
    ChecksFailed(Vec<u32>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::PrecisionExhausted { .. } | Error::SingularAtPrecision => CliError::Numeric(e),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::ChecksFailed(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Parse(m) => m.clone(),
            CliError::Numeric(e) => e.to_string(),
            CliError::ChecksFailed(ids) => format!("checks failed: {ids:?}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "fcrystal", version, about = "Level torsion and isomorphism numbers of F-crystals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis of a crystal spec file.
    Analyze {
        spec: String,
        /// Scan horizon for iterates (default 4·r·(e_r − e_1 + 1)).
        #[arg(long)]
        q_max: Option<u64>,
        /// p-adic precision; must not be below the automatic value.
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Closed-form upper bounds from Hodge data.
    Bound(BoundArgs),
    /// Write the spec file of a named family.
    MakeFamily(MakeFamilyArgs),
    /// Run the built-in checks of the published results.
    VerifyPaper {
        #[arg(long, default_value = "all")]
        subset: String,
    },
    /// Elementary divisor valuations of a matrix.
    Smith {
        /// Spec file (omit when giving --matrix).
        spec: Option<String>,
        /// Inline integer matrix, rows separated by ';', e.g. "1,0;0,25".
        #[arg(long, conflicts_with = "spec")]
        matrix: Option<String>,
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long)]
        precision: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct BoundArgs {
    /// Hodge slopes, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["c", "d"])]
    hodge: Option<Vec<u32>>,
    /// Newton slope a/b (default: the mean Hodge slope).
    #[arg(long, requires = "hodge")]
    lambda: Option<String>,
    /// Codimension of a p-divisible group.
    #[arg(long, requires = "d")]
    c: Option<u64>,
    /// Dimension of a p-divisible group.
    #[arg(long, requires = "c")]
    d: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Permutational,
    Cyclic,
    K3Isoclinic,
    K3Nonisoclinic,
    Rank2,
    Supersingular,
}

#[derive(Args)]
struct MakeFamilyArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Permutation images π(1),...,π(r) (permutational).
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<usize>>,
    /// Sorted exponents (permutational, cyclic); a single exponent
    /// (supersingular).
    #[arg(long, value_delimiter = ',')]
    e: Option<Vec<u32>>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    r1: Option<usize>,
    #[arg(long)]
    mid: Option<usize>,
    #[arg(long)]
    r2: Option<usize>,
    #[arg(long)]
    l1: Option<u32>,
    #[arg(long)]
    l2: Option<u32>,
    /// Half-rank of a supersingular-like crystal.
    #[arg(long)]
    d: Option<usize>,
    /// Seed of the unit in rank-2 families.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long)]
    output: Option<String>,
}

fn need<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Parse(format!("missing --{name}")))
}

fn parse_slope(s: &str) -> Result<Slope, CliError> {
    let bad = || CliError::Parse(format!("not a rational slope: {s:?}"));
    let (a, b) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, 1i64),
    };
    if b <= 0 {
        return Err(bad());
    }
    Ok(Slope::new(a, b))
}

fn analyze(path: &str, q_max: Option<u64>, precision: Option<u32>) -> Result<Report, CliError> {
    let spec = CrystalSpecFile::read(path)?;
    let hodge = probe(|n| Ok(spec.build(n)?.hodge().clone()))?;
    let horizon = q_max.unwrap_or_else(|| default_horizon_from_hodge(hodge.as_slice())).max(1);
    let auto = auto_precision(hodge.as_slice(), spec.m, horizon);
    let explicit = precision.or(spec.precision);
    let mut n = match explicit {
        Some(n) if (n as u64) < auto => {
            return Err(CliError::Parse(format!("precision {n} is below the automatic value {auto}")));
        }
        Some(n) => n,
        None => u32::try_from(auto).map_err(|_| CliError::Parse(format!("automatic precision {auto} is too large")))?,
    };
    // sums may scan past the horizon (up to lcm of periods); auto mode grows
    loop {
        let crystal = spec.build(n)?;
        match isomorphism_number(&crystal, horizon) {
            Ok(iso) => {
                let seed = match &spec.family {
                    Some(Family::Rank2 { seed, .. }) => Some(*seed),
                    _ => None,
                };
                let input = InputEcho {
                    p: spec.p,
                    m: spec.m,
                    rank: spec.rank,
                    modulus: crystal.ctx().modulus_string(),
                    precision: n,
                    precision_rule: if explicit.is_some() { "explicit" } else { "auto" },
                    auto_precision: auto,
                    q_max: horizon,
                    summands: crystal.summand_sizes().map(<[usize]>::to_vec),
                    family: spec.family.clone(),
                    seed,
                };
                return Ok(Report::new(input, &iso));
            }
            Err(Error::PrecisionExhausted { needed, .. }) if explicit.is_none() && needed > n => n = needed,
            Err(e) => return Err(e.into()),
        }
    }
}

fn bound(args: &BoundArgs) -> Result<String, CliError> {
    let mut out = String::new();
    match (&args.hodge, args.c, args.d) {
        (Some(hodge), _, _) => {
            if hodge.is_empty() {
                return Err(CliError::Parse("empty --hodge".into()));
            }
            let lambda = match &args.lambda {
                Some(l) => parse_slope(l)?,
                None => Slope::new(hodge.iter().map(|&e| e as i64).sum(), hodge.len() as i64),
            };
            let mut sorted = hodge.clone();
            sorted.sort_unstable();
            out += &format!("theorem12      {}\n", theorem12_from_hodge(&sorted, lambda)?);
            out += &format!("quasi_special  {}\n", quasi_special_from_hodge(&sorted));
            let lo = sorted[0];
            let c = sorted.iter().filter(|&&e| e == lo).count() as u64;
            let d = sorted.iter().filter(|&&e| e == lo + 1).count() as u64;
            if c > 0 && d > 0 && c + d == sorted.len() as u64 {
                out += &format!("pdiv           {}\n", pdiv_bound(c, d)?);
            }
        }
        (None, Some(c), Some(d)) => {
            out += &format!("pdiv           {}\n", pdiv_bound(c, d)?);
            let mut shape = vec![0u32; c as usize];
            shape.extend(std::iter::repeat(1).take(d as usize));
            let lambda = Slope::new(d as i64, (c + d) as i64);
            out += &format!("theorem12      {}\n", theorem12_from_hodge(&shape, lambda)?);
        }
        _ => return Err(CliError::Parse("give --hodge [--lambda] or --c and --d".into())),
    }
    Ok(out)
}

fn make_family(args: &MakeFamilyArgs) -> Result<String, CliError> {
    let family = match args.kind {
        Kind::Permutational => Family::Permutational { pi: need(args.pi.clone(), "pi")?, e: need(args.e.clone(), "e")? },
        Kind::Cyclic => Family::Cyclic { e: need(args.e.clone(), "e")? },
        Kind::K3Isoclinic => Family::K3Isoclinic { r: need(args.r, "r")? },
        Kind::K3Nonisoclinic => Family::K3Nonisoclinic {
            r1: need(args.r1, "r1")?,
            mid: args.mid.unwrap_or(0),
            r2: need(args.r2, "r2")?,
        },
        Kind::Rank2 => Family::Rank2 { l1: need(args.l1, "l1")?, l2: need(args.l2, "l2")?, seed: args.seed },
        Kind::Supersingular => match need(args.e.as_deref(), "e")? {
            [e] => Family::Supersingular { d: need(args.d, "d")?, e: *e },
            _ => return Err(CliError::Parse("supersingular takes a single --e".into())),
        },
    };
    let mut spec = CrystalSpecFile {
        p: args.p,
        m: args.m,
        precision: None,
        rank: family.rank(),
        matrix: None,
        summands: None,
        family: Some(family),
    };
    // build once so bad parameters fail here rather than at analysis
    let crystal = probe(|n| spec.build(n))?;
    spec.summands = crystal.summand_sizes().map(<[usize]>::to_vec);
    let mut text = serde_json::to_string_pretty(&spec).expect("spec serializes");
    text.push('\n');
    Ok(text)
}

fn smith(spec: Option<&str>, matrix: Option<&str>, p: u64, precision: Option<u32>) -> Result<String, CliError> {
    let spec = match (spec, matrix) {
        (Some(path), None) => CrystalSpecFile::read(path)?,
        (None, Some(m)) => inline_matrix(m, p)?,
        _ => return Err(CliError::Parse("give a spec file or --matrix".into())),
    };
    let vals = match precision.or(spec.precision) {
        Some(n) => spec.smith(n)?,
        None => probe(|n| spec.smith(n))?,
    };
    let strs: Vec<String> = vals.as_slice().iter().map(u32::to_string).collect();
    Ok(strs.join(",") + "\n")
}

fn verify(subset: &str) -> Result<String, CliError> {
    let subset: Subset = subset.parse()?;
    let outcomes = run_subset(subset);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} checks passed", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        Ok(String::new())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FCRYSTAL_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Parse(format!("FCRYSTAL_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Parse(e.to_string()))
}

fn run(cli: Cli) -> Result<String, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Analyze { spec, q_max, precision, format } => {
            let report = analyze(&spec, q_max, precision)?;
            Ok(match format {
                Format::Json => report.to_json(),
                Format::Table => report.to_table(),
            })
        }
        Command::Bound(args) => bound(&args),
        Command::MakeFamily(args) => {
            let text = make_family(&args)?;
            match &args.output {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| CliError::Parse(format!("cannot write {path}: {e}")))?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::VerifyPaper { subset } => verify(&subset),
        Command::Smith { spec, matrix, p, precision } => smith(spec.as_deref(), matrix.as_deref(), p, precision),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
