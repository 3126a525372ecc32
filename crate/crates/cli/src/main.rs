use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kontsevich::formula::{assemble_xn_capped, for_each_term, DEFAULT_MAX_TERMS};
use kontsevich::ncpoly::TruncationPolicy;
use kontsevich::special::{cluster_recurrence, commutative_from_formula, CommPoly};
use kontsevich::verify::{self, Status, VerifyReport};
use kontsevich::{
    b_row, c_seq, commutative_specialize, count_terms, cz_formula, f_map, is_exceptional, q_specialize, z_word, Error,
    ExcString, PosSet,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "kontsevich",
    version,
    about = "Laurent expansions of Kontsevich map iterates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct RankIndex {
    #[arg(long, value_parser = clap::value_parser!(i64).range(2..))]
    r: i64,
    #[arg(long, value_parser = clap::value_parser!(i64).range(0..))]
    n: i64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Terms of x_n from the closed formula
    Xn {
        #[command(flatten)]
        at: RankIndex,
        #[arg(long, default_value_t = DEFAULT_MAX_TERMS, value_parser = clap::value_parser!(u64).range(1..))]
        max_terms: u64,
        /// Write terms as they are produced, unsorted, with a trailing count
        #[arg(long)]
        stream: bool,
    },
    /// Number of terms of x_n
    Count {
        #[command(flatten)]
        at: RankIndex,
    },
    /// The monomial z_n
    Zn {
        #[command(flatten)]
        at: RankIndex,
    },
    /// Forced positions f(V) at level n
    Fmap {
        #[command(flatten)]
        at: RankIndex,
        /// Positions of V, comma separated; omit for the empty set
        #[arg(long, value_delimiter = ',')]
        v: Vec<usize>,
    },
    /// Exceptional-string membership
    Exc {
        #[arg(long, value_parser = clap::value_parser!(i64).range(2..))]
        r: i64,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        s: Vec<i64>,
    },
    /// Row b_n
    Brow {
        #[command(flatten)]
        at: RankIndex,
    },
    /// c_n, or c_1..c_n with --all
    Cseq {
        #[command(flatten)]
        at: RankIndex,
        #[arg(long)]
        all: bool,
    },
    /// Commutative or q-commuting image of x_n
    Specialize {
        #[command(flatten)]
        at: RankIndex,
        #[arg(long, value_enum, default_value_t = Mode::Comm)]
        mode: Mode,
        /// Exponent in x y = q^e y x
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        e: i64,
        #[arg(long, value_enum, default_value_t = Source::Formula)]
        source: Source,
        #[arg(long, default_value_t = DEFAULT_MAX_TERMS, value_parser = clap::value_parser!(u64).range(1..))]
        max_terms: u64,
    },
    /// Binomial closed form of the commutative x_n for r = 2
    Cz {
        #[arg(long, value_parser = clap::value_parser!(i64).range(2..))]
        n: i64,
    },
    /// Cross-checks against the oracles
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, value_parser = clap::value_parser!(i64).range(2..))]
        r: Option<i64>,
        #[arg(long, value_parser = clap::value_parser!(i64).range(0..))]
        n: i64,
        /// W' for the lemma suite, comma separated; omit for the empty set
        #[arg(long, value_delimiter = ',')]
        wprime: Vec<usize>,
        /// Run the lemma suite for every W'
        #[arg(long)]
        all_wprime: bool,
        /// Series cap for the formula suite (default: auto)
        #[arg(long, requires = "b")]
        k: Option<u32>,
        /// Degree bound for the formula suite (default: auto)
        #[arg(long, requires = "k")]
        b: Option<i64>,
        /// Formula suite: stream counts and the commutative image only
        #[arg(long)]
        stream: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Comm,
    Q,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    Formula,
    Recurrence,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Formula,
    Lemma,
    Bijection,
    Positivity,
    Cz,
}

enum Failure {
    Usage(String),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Out<'a> = &'a mut dyn Write;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let sink: Box<dyn Write> = match &cli.output {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(f),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    let result = run(&cli, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn positions(ps: &[usize]) -> Result<PosSet, Failure> {
    Ok(PosSet::from_positions(ps.iter().copied())?)
}

fn run(cli: &Cli, out: Out) -> Result<(), Failure> {
    let fmt = cli.format;
    match &cli.cmd {
        Cmd::Xn { at, max_terms, stream } => {
            if *stream {
                let mut count = 0u64;
                let mut err = None;
                for_each_term(at.r, at.n, |w| {
                    count += 1;
                    if err.is_none() {
                        err = writeln!(out, "1 * {w}").err();
                    }
                })?;
                if let Some(e) = err {
                    return Err(e.into());
                }
                writeln!(out, "# {count} terms")?;
                return Ok(());
            }
            let p = assemble_xn_capped(at.r, at.n, *max_terms)?;
            match fmt {
                Format::Text => write!(out, "{}", p.to_text())?,
                Format::Json => writeln!(out, "{}", serde_json::to_string(&p.to_json()).expect("json"))?,
            }
        }
        Cmd::Count { at } => {
            let c = count_terms(at.r, at.n)?;
            match fmt {
                Format::Text => writeln!(out, "{c}")?,
                Format::Json => writeln!(out, "{}", json!({"r": at.r, "n": at.n, "count": c.to_string()}))?,
            }
        }
        Cmd::Zn { at } => {
            let z = z_word(at.r, at.n)?;
            match fmt {
                Format::Text => writeln!(out, "{z}\n{}", z.reduce())?,
                Format::Json => writeln!(out, "{}", serde_json::to_string(&z).expect("json"))?,
            }
        }
        Cmd::Fmap { at, v } => {
            let f = f_map(at.r, at.n, positions(v)?)?;
            match fmt {
                Format::Text => {
                    let items: Vec<String> = f.iter().map(|p| p.to_string()).collect();
                    writeln!(out, "{}", items.join(","))?
                }
                Format::Json => writeln!(out, "{}", serde_json::to_string(&f).expect("json"))?,
            }
        }
        Cmd::Exc { r, s } => {
            let s = ExcString::new(*r, s.clone())?;
            let yes = is_exceptional(*r, &s);
            match fmt {
                Format::Text => writeln!(out, "{yes}")?,
                Format::Json => writeln!(out, "{}", json!({"r": r, "s": s.entries(), "exceptional": yes}))?,
            }
        }
        Cmd::Brow { at } => {
            if at.n < 2 {
                return Err(Error::InvalidIndex { n: at.n, min: 2 }.into());
            }
            let row = b_row(at.r, at.n)?;
            match fmt {
                Format::Text => {
                    let items: Vec<String> = row.iter().map(|b| b.to_string()).collect();
                    writeln!(out, "{}", items.join(","))?
                }
                Format::Json => writeln!(out, "{}", json!(row))?,
            }
        }
        Cmd::Cseq { at, all } => {
            let from = if *all { 1 } else { at.n };
            let values = (from..=at.n).map(|m| c_seq(at.r, m)).collect::<Result<Vec<_>, _>>()?;
            match fmt {
                Format::Text => {
                    for v in &values {
                        writeln!(out, "{v}")?;
                    }
                }
                Format::Json => {
                    let strs: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                    writeln!(out, "{}", json!(strs))?
                }
            }
        }
        Cmd::Specialize {
            at,
            mode,
            e,
            source,
            max_terms,
        } => specialize(out, fmt, at, *mode, *e, *source, *max_terms)?,
        Cmd::Cz { n } => write_comm(out, fmt, &cz_formula(*n)?)?,
        Cmd::Verify {
            suite,
            r,
            n,
            wprime,
            all_wprime,
            k,
            b,
            stream,
        } => {
            let need_r = || r.ok_or_else(|| Failure::Usage("--r is required for this suite".into()));
            let reports = match suite {
                Suite::Formula if *stream => vec![verify::verify_formula_streaming(need_r()?, *n)],
                Suite::Formula => {
                    let policy = k.zip(*b).map(|(series_cap, degree_bound)| TruncationPolicy {
                        series_cap,
                        degree_bound,
                    });
                    vec![verify::verify_formula(need_r()?, *n, policy)]
                }
                Suite::Lemma if *all_wprime => verify::verify_lemma_all(need_r()?, *n)?,
                Suite::Lemma => vec![verify::verify_lemma_main(need_r()?, *n, positions(wprime)?)],
                Suite::Bijection => vec![verify::verify_bijection(need_r()?, *n)],
                Suite::Positivity => vec![verify::verify_positivity_and_unit_coefficients(need_r()?, *n)],
                Suite::Cz => vec![verify::verify_cz(*n)],
            };
            return report(out, fmt, &reports);
        }
    }
    Ok(())
}

fn specialize(
    out: Out,
    fmt: Format,
    at: &RankIndex,
    mode: Mode,
    e: i64,
    source: Source,
    cap: u64,
) -> Result<(), Failure> {
    match (mode, source) {
        (Mode::Comm, Source::Recurrence) => write_comm(out, fmt, &cluster_recurrence(at.r, at.n)?),
        (Mode::Comm, Source::Formula) if at.n >= 3 => write_comm(out, fmt, &commutative_from_formula(at.r, at.n)?.0),
        (Mode::Comm, Source::Formula) => {
            write_comm(out, fmt, &commutative_specialize(&assemble_xn_capped(at.r, at.n, cap)?))
        }
        (Mode::Q, Source::Formula) => {
            let q = q_specialize(&assemble_xn_capped(at.r, at.n, cap)?, e);
            match fmt {
                Format::Text => write!(out, "{q}")?,
                Format::Json => writeln!(out, "{}", q.to_json())?,
            }
            Ok(())
        }
        (Mode::Q, Source::Recurrence) => Err(Failure::Usage("the recurrence only has a commutative image".into())),
    }
}

fn write_comm(out: Out, fmt: Format, p: &CommPoly) -> Result<(), Failure> {
    match fmt {
        Format::Text => write!(out, "{p}")?,
        Format::Json => writeln!(out, "{}", p.to_json())?,
    }
    Ok(())
}

fn report(out: Out, fmt: Format, reports: &[VerifyReport]) -> Result<(), Failure> {
    match fmt {
        Format::Text => {
            for r in reports {
                writeln!(out, "{r}")?;
            }
        }
        Format::Json if reports.len() == 1 => writeln!(out, "{}", serde_json::to_string(&reports[0]).expect("json"))?,
        Format::Json => writeln!(out, "{}", serde_json::to_string(reports).expect("json"))?,
    }
    out.flush()?;
    let worst = reports
        .iter()
        .map(|r| r.status)
        .fold(Status::Pass, |acc, s| match (acc, s) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Pass, s) => s,
            (a, _) => a,
        });
    match worst {
        Status::Pass => Ok(()),
        Status::Fail => Err(Failure::Mismatch),
        Status::Uncertified | Status::Capacity => Err(Failure::Usage(format!("verification incomplete: {worst:?}"))),
    }
}
