//! Command-line front end for the pircode kernel.
//!
//! Matrices, submodules, and codes travel in the text formats of the
//! library: a `ring:` line, a `cols:` line, an optional `ambient:` line,
//! then one row per line (`--` separates the words of a code). Exit status
//! is 0 on success, 1 on a domain error, and 2 on malformed input.

use std::fmt;
use std::fs;
use std::io::Read;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pircode::channel::{
    check_trapping_is_min_distance, error_trapping_codebook, run_trials, ChannelConfig, SimReport,
    TrappingReport,
};
use pircode::codes::{
    bound_chain_ring, bound_singleton, bound_sphere, bound_zpm, construct_product,
    construct_spread, construct_stacked, construct_tensor, decode_min_distance, decode_product,
    Code, DecodeResult, DecodeStatus,
};
use pircode::submodule::{enumerate_submodules, Ambient, SubModule, DEFAULT_ENUM_CAP};
use pircode::textio::{
    format_code, format_element, format_matrix, format_submodule, parse_code_str, parse_element,
    parse_matrix_str, parse_ring_spec, parse_sim_config, parse_submodule_str, CodeSource,
};
use pircode::{check_row_echelon, member, row_echelon, rref, EchelonCheck, Error, Ring};

#[derive(Parser)]
#[command(name = "pircode", version, about = "Submodule codes over finite principal ideal rings")]
struct Cli {
    /// Report rendering for verbs that emit reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Row-echelon form of a matrix file.
    Ref { file: String },
    /// Reduced row-echelon form of a matrix file.
    Rref { file: String },
    /// Verify the row-echelon conditions; prints YES or NO with a reason.
    CheckRef { file: String },
    /// Test membership of a vector in the row module of an echelon file.
    Member {
        file: String,
        /// Entries of the vector, one element literal per argument.
        entries: Vec<String>,
    },
    /// Length of the submodule generated by a file's rows.
    Length {
        file: String,
        /// Also print the chain-ring shape diagnostic.
        #[arg(long)]
        shape: bool,
    },
    /// Submodule distance between two files.
    Distance { first: String, second: String },
    /// Information-loss and error lengths of a transmission.
    LossError { sent: String, received: String },
    /// Reduced basis of the sum of two submodules.
    Sum { first: String, second: String },
    /// Enumerate all submodules of a given length over an ambient.
    Enumerate {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        length: u64,
        /// Column ideal generators (defaults to the free ambient).
        #[arg(long)]
        ambient: Option<String>,
        #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
        cap: u128,
    },
    /// Code constructions.
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Cardinality bounds.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Minimum-distance decoding of a received submodule against a code.
    Decode {
        code: String,
        received: String,
        /// Decode factor-wise over a product ring instead of globally.
        #[arg(long)]
        product: bool,
    },
    /// Seeded Monte-Carlo simulation of the channel Y = A X + Z.
    Simulate {
        /// Key-value config file (ring, n, t, N, v, u, code, trials, seed).
        #[arg(long)]
        config: String,
        /// Keep and print per-trial records.
        #[arg(long)]
        verbose: bool,
    },
    /// Compare error trapping with minimum-distance decoding.
    CheckTrapping {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        n: usize,
        #[arg(long = "big-n", visible_alias = "N")]
        big_n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        u: usize,
        #[arg(long)]
        v: usize,
        /// Sampled channel instances per codebook word.
        #[arg(long, default_value_t = 3)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Partial-spread code over a finite chain ring.
    Spread {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
    },
    /// Tensor lift of a prime-field subspace code.
    Tensor {
        code: String,
        #[arg(long)]
        target: String,
    },
    /// Cartesian product of codes over a product ring.
    Product { codes: Vec<String> },
    /// Stacked (diagonal) combination of codes over a product ring.
    Stacked { codes: Vec<String> },
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Singleton-type bound.
    Singleton(BoundArgs),
    /// Packing-type bound.
    Sphere(BoundArgs),
    /// Chain-ring bound for maximum-distance codes.
    Chain {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
        /// Ambient exponents a_2,...,a_n (defaults to the free ambient).
        #[arg(long, value_delimiter = ',')]
        exponents: Vec<u32>,
    },
    /// The explicit bounds for rings isomorphic to Z_p^m.
    Zpm {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        /// Defaults to k (maximum-distance case).
        #[arg(long)]
        delta: Option<u64>,
    },
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    ring: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    delta: u64,
    /// Column ideal generators (defaults to the free ambient).
    #[arg(long)]
    ambient: Option<String>,
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
    cap: u128,
}

enum CliError {
    Kernel(Error),
    Io(String, std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Kernel(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{path}: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Kernel(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(..) | CliError::Kernel(Error::Parse { .. }) => 2,
            CliError::Kernel(_) => 1,
        }
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Io("<stdin>".into(), e))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Io(path.into(), e))
    }
}

fn load_code(path: &str) -> Result<Code, CliError> {
    Ok(parse_code_str(&read_input(path)?)?)
}

fn load_submodule(path: &str) -> Result<SubModule, CliError> {
    Ok(parse_submodule_str(&read_input(path)?)?)
}

fn ambient_from_args(
    ring: &Arc<Ring>,
    n: usize,
    ambient: &Option<String>,
) -> Result<Arc<Ambient>, CliError> {
    match ambient {
        None => Ok(Ambient::free(ring.clone(), n)),
        Some(text) => {
            let toks: Vec<&str> = text.split_whitespace().collect();
            if toks.len() != n {
                return Err(CliError::Kernel(Error::InvalidParameter(format!(
                    "ambient lists {} generators, expected {n}",
                    toks.len()
                ))));
            }
            let gens = toks
                .iter()
                .enumerate()
                .map(|(c, t)| parse_element(ring, t, 1, c + 1))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Ambient::with_column_ideals(ring.clone(), gens)?)
        }
    }
}

fn print_decode(result: &DecodeResult, format: Format) {
    let status = match result.status {
        DecodeStatus::Decoded => "decoded",
        DecodeStatus::Ambiguous => "ambiguous",
        DecodeStatus::NoCodeword => "no-codeword",
    };
    match format {
        Format::Human => {
            println!("status: {status}");
            println!("distance: {}", result.distance);
            if let Some(second) = result.second_distance {
                println!("second-distance: {second}");
            }
            println!("certified: {}", result.certified);
            if let Some(word) = &result.word {
                println!("word:");
                print!("{}", format_submodule(word));
            }
        }
        Format::Machine => {
            let mut obj = serde_json::Map::new();
            obj.insert("status".into(), status.into());
            obj.insert("distance".into(), result.distance.into());
            if let Some(second) = result.second_distance {
                obj.insert("second_distance".into(), second.into());
            }
            obj.insert("certified".into(), result.certified.into());
            if let Some(word) = &result.word {
                obj.insert("word".into(), format_submodule(word).into());
            }
            println!("{}", serde_json::Value::Object(obj));
        }
    }
}

fn print_sim_report(report: &SimReport, format: Format) {
    match format {
        Format::Human => {
            println!("trials: {}", report.trials);
            println!("success-rate: {}", report.success_rate);
            println!("certified-success-rate: {}", report.certified_success_rate);
            println!("mean-loss: {}", report.mean_loss);
            println!("mean-error: {}", report.mean_error);
            for r in &report.records {
                println!(
                    "trial {}: word={} rho={} e={} decoded={} correct={} certified={} nearest={} second={}",
                    r.trial,
                    r.word,
                    r.rho,
                    r.errors,
                    r.decoded,
                    r.correct,
                    r.certified,
                    r.nearest,
                    r.second_nearest.map_or("-".into(), |d| d.to_string()),
                );
            }
        }
        Format::Machine => {
            println!("{}", serde_json::to_string(report).expect("serializable"));
        }
    }
}

fn print_trapping_report(report: &TrappingReport, format: Format) {
    match format {
        Format::Human => {
            println!("instances: {}", report.instances);
            println!("comparisons: {}", report.comparisons);
            println!("violations: {}", report.violations.len());
            for v in &report.violations {
                println!("violation: {v}");
            }
        }
        Format::Machine => {
            println!("{}", serde_json::to_string(report).expect("serializable"));
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let format = cli.format;
    match cli.command {
        Command::Ref { file } => {
            let (m, _) = parse_matrix_str(&read_input(&file)?)?;
            print!("{}", format_matrix(row_echelon(&m).matrix()));
        }
        Command::Rref { file } => {
            let (m, _) = parse_matrix_str(&read_input(&file)?)?;
            print!("{}", format_matrix(rref(&m).matrix()));
        }
        Command::CheckRef { file } => {
            let (m, _) = parse_matrix_str(&read_input(&file)?)?;
            match check_row_echelon(&m) {
                EchelonCheck::Yes => println!("YES"),
                EchelonCheck::No(reason) => println!("NO: {reason}"),
            }
        }
        Command::Member { file, entries } => {
            let (m, _) = parse_matrix_str(&read_input(&file)?)?;
            let e = rref(&m);
            if entries.len() != m.cols() {
                return Err(CliError::Kernel(Error::InvalidParameter(format!(
                    "vector has {} entries, matrix has {} columns",
                    entries.len(),
                    m.cols()
                ))));
            }
            let v = entries
                .iter()
                .enumerate()
                .map(|(c, t)| parse_element(m.ring(), t, 1, c + 1))
                .collect::<Result<Vec<_>, _>>()?;
            match member(&v, &e) {
                Some(coeffs) => {
                    let parts: Vec<String> = coeffs.iter().map(format_element).collect();
                    println!("YES {}", parts.join(" "));
                }
                None => println!("NO"),
            }
        }
        Command::Length { file, shape } => {
            let m = load_submodule(&file)?;
            println!("{}", m.length());
            if shape {
                let mu = m.chain_shape()?;
                let parts: Vec<String> = mu.iter().map(|x| x.to_string()).collect();
                println!("shape: {}", parts.join(" "));
            }
        }
        Command::Distance { first, second } => {
            let a = load_submodule(&first)?;
            let b = load_submodule(&second)?;
            println!("{}", a.distance(&b)?);
        }
        Command::LossError { sent, received } => {
            let a = load_submodule(&sent)?;
            let b = load_submodule(&received)?;
            let (rho, e) = a.loss_and_error(&b)?;
            match format {
                Format::Human => println!("loss: {rho}\nerrors: {e}"),
                Format::Machine => println!("{{\"loss\":{rho},\"errors\":{e}}}"),
            }
        }
        Command::Sum { first, second } => {
            let a = load_submodule(&first)?;
            let b = load_submodule(&second)?;
            print!("{}", format_submodule(&a.sum(&b)?));
        }
        Command::Enumerate {
            ring,
            n,
            length,
            ambient,
            cap,
        } => {
            let ring = parse_ring_spec(&ring)?;
            let ambient = ambient_from_args(&ring, n, &ambient)?;
            let mods = enumerate_submodules(&ambient, length, cap)?;
            println!("count: {}", mods.len());
            for (i, m) in mods.iter().enumerate() {
                if i > 0 {
                    println!("--");
                }
                for r in 0..m.basis().rows() {
                    let row: Vec<String> =
                        m.basis().matrix().row(r).iter().map(format_element).collect();
                    println!("{}", row.join(" "));
                }
            }
        }
        Command::Construct(cmd) => {
            let code = match cmd {
                ConstructCmd::Spread { ring, n, k } => {
                    construct_spread(&parse_ring_spec(&ring)?, n, k)?
                }
                ConstructCmd::Tensor { code, target } => {
                    construct_tensor(&load_code(&code)?, &parse_ring_spec(&target)?)?
                }
                ConstructCmd::Product { codes } => {
                    let cs = codes
                        .iter()
                        .map(|p| load_code(p))
                        .collect::<Result<Vec<_>, _>>()?;
                    construct_product(&cs)?
                }
                ConstructCmd::Stacked { codes } => {
                    let cs = codes
                        .iter()
                        .map(|p| load_code(p))
                        .collect::<Result<Vec<_>, _>>()?;
                    construct_stacked(&cs)?
                }
            };
            print!("{}", format_code(&code));
        }
        Command::Bound(cmd) => match cmd {
            BoundCmd::Singleton(args) => {
                let ring = parse_ring_spec(&args.ring)?;
                let ambient = ambient_from_args(&ring, args.n, &args.ambient)?;
                let value = bound_singleton(&ambient, args.k, args.delta, args.cap)?;
                match format {
                    Format::Human => println!("singleton: {value}"),
                    Format::Machine => println!("{{\"singleton\":{value}}}"),
                }
            }
            BoundCmd::Sphere(args) => {
                let ring = parse_ring_spec(&args.ring)?;
                let ambient = ambient_from_args(&ring, args.n, &args.ambient)?;
                let value = bound_sphere(&ambient, args.k, args.delta, args.cap)?;
                match format {
                    Format::Human => println!("sphere: {value}"),
                    Format::Machine => println!("{{\"sphere\":{value}}}"),
                }
            }
            BoundCmd::Chain {
                ring,
                n,
                k,
                exponents,
            } => {
                let ring = parse_ring_spec(&ring)?;
                let exps = if exponents.is_empty() {
                    vec![0; n.saturating_sub(1)]
                } else {
                    exponents
                };
                let value = bound_chain_ring(&ring, n, &exps, k)?;
                match format {
                    Format::Human => println!("chain: {value}"),
                    Format::Machine => println!("{{\"chain\":{value}}}"),
                }
            }
            BoundCmd::Zpm { p, m, n, k, delta } => {
                let b = bound_zpm(p, m, n, k, delta.unwrap_or(k))?;
                match format {
                    Format::Human => {
                        println!("singleton: {}", b.singleton);
                        println!("sphere: {}", b.sphere);
                        if let Some(v) = b.balanced {
                            println!("balanced: {v}");
                        }
                        if let Some(v) = b.odd_two_factor {
                            println!("odd-two-factor: {v}");
                        }
                        println!("tightest: {}", b.tightest);
                    }
                    Format::Machine => {
                        println!("{}", serde_json::to_string(&b).expect("serializable"));
                    }
                }
            }
        },
        Command::Decode {
            code,
            received,
            product,
        } => {
            let code = load_code(&code)?;
            let recv = load_submodule(&received)?;
            if product {
                let res = decode_product(&code, &recv)?;
                match format {
                    Format::Human => {
                        for (i, comp) in res.components.iter().enumerate() {
                            println!(
                                "component {}: {} distance={} certified={}",
                                i + 1,
                                match comp.status {
                                    DecodeStatus::Decoded => "decoded",
                                    DecodeStatus::Ambiguous => "ambiguous",
                                    DecodeStatus::NoCodeword => "no-codeword",
                                },
                                comp.distance,
                                comp.certified
                            );
                        }
                        println!(
                            "status: {}",
                            match res.status {
                                DecodeStatus::Decoded => "decoded",
                                DecodeStatus::Ambiguous => "ambiguous",
                                DecodeStatus::NoCodeword => "no-codeword",
                            }
                        );
                        if let Some(word) = &res.assembled {
                            println!("word:");
                            print!("{}", format_submodule(word));
                        }
                    }
                    Format::Machine => {
                        let comps: Vec<serde_json::Value> = res
                            .components
                            .iter()
                            .map(|c| {
                                serde_json::json!({
                                    "status": match c.status {
                                        DecodeStatus::Decoded => "decoded",
                                        DecodeStatus::Ambiguous => "ambiguous",
                                        DecodeStatus::NoCodeword => "no-codeword",
                                    },
                                    "distance": c.distance,
                                    "certified": c.certified,
                                })
                            })
                            .collect();
                        let obj = serde_json::json!({
                            "components": comps,
                            "status": match res.status {
                                DecodeStatus::Decoded => "decoded",
                                DecodeStatus::Ambiguous => "ambiguous",
                                DecodeStatus::NoCodeword => "no-codeword",
                            },
                            "word": res.assembled.as_ref().map(format_submodule),
                        });
                        println!("{obj}");
                    }
                }
            } else {
                let res = decode_min_distance(&code, &recv)?;
                print_decode(&res, format);
            }
        }
        Command::Simulate { config, verbose } => {
            let spec = parse_sim_config(&read_input(&config)?)?;
            let code = match &spec.code {
                CodeSource::File(path) => load_code(path)?,
                CodeSource::Spread { k } => construct_spread(&spec.ring, spec.n, *k)?,
                CodeSource::Trapping => {
                    error_trapping_codebook(&spec.ring, spec.n, spec.big_n, spec.t, spec.u, spec.v)?
                        .code
                }
            };
            let cfg = ChannelConfig {
                ring: spec.ring.clone(),
                n: spec.n,
                t: spec.t,
                big_n: spec.big_n,
                v: spec.v,
                trials: spec.trials,
                seed: spec.seed,
            };
            let report = run_trials(&cfg, &code, verbose)?;
            print_sim_report(&report, format);
        }
        Command::CheckTrapping {
            ring,
            n,
            big_n,
            t,
            u,
            v,
            trials,
            seed,
        } => {
            let ring = parse_ring_spec(&ring)?;
            let report = check_trapping_is_min_distance(&ring, n, big_n, t, u, v, trials, seed)?;
            print_trapping_report(&report, format);
        }
    }
    Ok(())
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
