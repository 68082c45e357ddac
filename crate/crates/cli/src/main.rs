use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use germcalc::class_group::Generator;
use germcalc::cyclic_quot::{self, CycQuot, TVerdict};
use germcalc::dual_graph::parse_graph;
use germcalc::ell_calc::{self, DisproofTrace, KadSubcase};
use germcalc::germ_rules::{self, TableVerdict};
use germcalc::rational::{fmt_q, parse_q, Q};
use germcalc::{analyze, verify_paper, Corpus};

/// Exact computations for extremal curve germs with reducible central curve.
#[derive(Parser)]
#[command(name = "germcalc", version)]
struct Cli {
    /// Emit JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a configuration graph file.
    Analyze {
        file: PathBuf,
        /// Index of the non-Gorenstein point; enables splitting degrees.
        #[arg(long = "index", value_name = "M")]
        index: Option<u64>,
        /// Do not assume that K generates the local class group.
        #[arg(long)]
        generator_unknown: bool,
    },
    /// Check the example corpus, families, sweeps and flip table.
    VerifyPaper {
        #[arg(long, default_value_t = 49)]
        sweep_max: u64,
        /// Load the corpus from a directory instead of the built-in copy.
        #[arg(long, value_name = "DIR")]
        corpus: Option<PathBuf>,
    },
    /// Cyclic quotient type of a Hirzebruch–Jung chain, e.g. `3,2,5,4,2`.
    Quot { chain: String },
    /// Chain and class T certificate of 1/n(1,q).
    Tchain { n: u64, q: u64 },
    /// Match a germ descriptor file against the classification table.
    Classify { file: PathBuf },
    /// K+.C+ of a flip from index(X), K.C and the indices on X+.
    Flip {
        #[arg(long = "index", value_name = "I")]
        index: u64,
        /// K.C as p/q; alternatively give --w.
        #[arg(long, value_name = "P/Q", allow_hyphen_values = true)]
        kc: Option<String>,
        /// Values w_P(0), comma separated; K.C = sum(w) - 1.
        #[arg(long, value_name = "W,...")]
        w: Option<String>,
        #[arg(long, value_name = "A,B,...", default_value = "")]
        plus_indices: String,
    },
    /// Replay the IC impossibility script.
    IcDisprove {
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        mprime: Option<u64>,
        #[arg(long)]
        aprime: Option<u64>,
        /// Run every admissible tuple with m, m' up to N.
        #[arg(long, value_name = "N")]
        sweep_max: Option<u64>,
    },
    /// Replay the k3A/kAD impossibility script.
    KadDisprove {
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        mprime: Option<u64>,
        #[arg(long)]
        aprime: Option<u64>,
        #[arg(long)]
        subcase: KadSubcase,
        #[arg(long, value_name = "N")]
        sweep_max: Option<u64>,
    },
}

/// Errors in user input exit with 2; verification mismatches with 1.
struct Outcome {
    text: String,
    json: serde_json::Value,
    code: u8,
}

impl Outcome {
    fn ok(text: impl ToString, json: serde_json::Value) -> Self {
        Outcome {
            text: text.to_string(),
            json,
            code: 0,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_list(s: &str) -> Result<Vec<u64>> {
    s.trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<u64>()
                .map_err(|_| anyhow!("`{x}` is not a non-negative integer"))
        })
        .collect()
}

fn parse_rational(s: &str) -> Result<Q> {
    parse_q(s).ok_or_else(|| anyhow!("`{s}` is not a rational number"))
}

fn t_text(v: &TVerdict) -> String {
    match v {
        TVerdict::NotT => "class T: no".into(),
        TVerdict::T(c) => format!(
            "class T: yes, index {}\n  (d, m, a) = ({}, {}, {})\n  base {}\n  derivation {}",
            c.m,
            c.d,
            c.m,
            c.a,
            c.base,
            c.derivation_text()
        ),
    }
}

fn quot_report(chain: &[u64], s: CycQuot) -> Result<Outcome> {
    let t = cyclic_quot::classify_t(chain)?;
    let du_val = cyclic_quot::du_val_a(chain);
    let mut text = format!("chain {}\nquotient {s}\n", cyclic_quot::format_chain(chain));
    if let Some(r) = du_val {
        text.push_str(&format!("Du Val A{r}\n"));
    }
    text.push_str(&t_text(&t));
    let json = json!({ "chain": chain, "n": s.n, "q": s.q, "quotient": s.to_string(), "du_val": du_val, "t": t });
    Ok(Outcome::ok(text, json))
}

fn traces(list: &[DisproofTrace]) -> Outcome {
    let all = list
        .iter()
        .all(|t| t.outcome() == ell_calc::StepVerdict::Contradiction);
    let mut text: Vec<String> = list.iter().map(ToString::to_string).collect();
    text.push(format!(
        "{} admissible tuples, {} ending in a contradiction",
        list.len(),
        list.iter()
            .filter(|t| t.outcome() == ell_calc::StepVerdict::Contradiction)
            .count()
    ));
    Outcome {
        text: text.join("\n"),
        json: json!(list),
        code: if all { 0 } else { 1 },
    }
}

fn tuple(m: Option<u64>, mp: Option<u64>, ap: Option<u64>) -> Result<(u64, u64, u64)> {
    match (m, mp, ap) {
        (Some(m), Some(mp), Some(ap)) => Ok((m, mp, ap)),
        _ => bail!("give --m, --mprime and --aprime, or --sweep-max"),
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Analyze {
            file,
            index,
            generator_unknown,
        } => {
            let g = parse_graph(&read(file)?).with_context(|| format!("{}", file.display()))?;
            let generator = if *generator_unknown {
                Generator::Unknown
            } else {
                Generator::Assumed
            };
            let a = analyze(&g, *index, generator);
            Ok(Outcome::ok(a.to_string().trim_end(), json!(a)))
        }
        Command::VerifyPaper { sweep_max, corpus } => {
            let corpus = match corpus {
                Some(dir) => Corpus::from_dir(dir)?,
                None => Corpus::builtin(),
            };
            let r = verify_paper(&corpus, *sweep_max);
            Ok(Outcome {
                text: r.to_string(),
                json: json!(r),
                code: r.exit_code() as u8,
            })
        }
        Command::Quot { chain } => {
            let chain = parse_list(chain)?;
            let s = cyclic_quot::chain_to_quot(&chain)?;
            quot_report(&chain, s)
        }
        Command::Tchain { n, q } => {
            let s = CycQuot::new(*n, *q)?;
            quot_report(&cyclic_quot::quot_to_chain(s), s)
        }
        Command::Classify { file } => {
            let d = germ_rules::parse_descriptor(&read(file)?)
                .with_context(|| format!("{}", file.display()))?;
            let v: TableVerdict = germ_rules::validate_against_table(&d);
            Ok(Outcome::ok(
                v.to_string(),
                json!({ "descriptor": d, "result": v }),
            ))
        }
        Command::Flip {
            index,
            kc,
            w,
            plus_indices,
        } => {
            let k = match (kc, w) {
                (Some(kc), None) => parse_rational(kc)?,
                (None, Some(w)) => {
                    let ws = w
                        .split(',')
                        .map(parse_rational)
                        .collect::<Result<Vec<_>>>()?;
                    -germ_rules::kc_from_w(&ws)?
                }
                _ => bail!("give exactly one of --kc and --w"),
            };
            let plus = parse_list(plus_indices)?;
            let kp = germ_rules::flip_transfer(*index, &k, &plus)?;
            let text = format!(
                "K.C = {}, index(X) = {index}, index(X+) = {}\nK+.C+ = {}",
                fmt_q(&k),
                germ_rules::lcm_all(&plus),
                fmt_q(&kp)
            );
            let json = json!({
                "k_dot_c": fmt_q(&k),
                "index_x": index,
                "plus_indices": plus,
                "index_x_plus": germ_rules::lcm_all(&plus),
                "k_plus": fmt_q(&kp),
            });
            Ok(Outcome::ok(text, json))
        }
        Command::IcDisprove {
            m,
            mprime,
            aprime,
            sweep_max,
        } => match sweep_max {
            Some(n) => Ok(traces(&ell_calc::ic_sweep(*n))),
            None => {
                let (m, mp, ap) = tuple(*m, *mprime, *aprime)?;
                Ok(traces(&[ell_calc::ic_disproof(m, mp, ap)?]))
            }
        },
        Command::KadDisprove {
            m,
            mprime,
            aprime,
            subcase,
            sweep_max,
        } => match sweep_max {
            Some(n) => Ok(traces(&ell_calc::kad_sweep(*n, *subcase))),
            None => {
                let (m, mp, ap) = tuple(*m, *mprime, *aprime)?;
                Ok(traces(&[ell_calc::kad_disproof(m, mp, ap, *subcase)?]))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out.json).expect("reports serialize")
                );
            } else {
                println!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": format!("{e:#}") }));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
