use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fc_core::canon::{automorphism_group, canonical_form, orbits, MAX_GROUP_UNIVERSE};
use fc_core::enumfam::{
    fc_value, fcv_value, lex_scan, DomainSpec, FcValueReport, NfcSolver, SearchConfig,
};
use fc_core::fcsolve::{
    certificate_to_json, fc3_value, is_fc, parse_certificate, upper_bound, Certificate, FcOptions,
};
use fc_core::ratlp::format_rational;
use fc_core::sepip::no_singletons;
use fc_core::setfam::{
    parse_family, translates_family, wide_regular_3set_fc, wide_regularity, Family,
};
use fc_core::verify::verify_certificate;

/// Environment variable naming the default output directory.
const OUTPUT_DIR_ENV: &str = "FCTOOL_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "fctool",
    version,
    about = "Frankl-completeness toolkit for union-closed families"
)]
struct Cli {
    /// Worker threads for parallel classification.
    #[arg(long, global = true, default_value_t = default_jobs(), value_parser = clap::value_parser!(usize))]
    jobs: usize,
    /// Seconds allowed per FC decision.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Directory for certificates and result files (default: $FCTOOL_OUTPUT_DIR or ".").
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Only print warnings and errors on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Args, Clone, Copy)]
struct SearchFlags {
    /// Disable the orbit reduction of the weight LP.
    #[arg(long)]
    no_symmetry: bool,
    /// Preload the cuts obtained by dropping one element.
    #[arg(long)]
    warm_start: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a family is FC (or V-FC with --v) and write a certificate.
    Isfc {
        /// Family file: one member per line, elements comma-separated.
        file: PathBuf,
        /// Aggregate the weight LP over element orbits.
        #[arg(long)]
        symmetry: bool,
        /// Preload the cuts obtained by dropping one element.
        #[arg(long)]
        warm_start: bool,
        /// Domain: `no-singletons` or a family file.
        #[arg(long = "v")]
        domain: Option<String>,
        /// Certificate path (default: <output-dir>/<stem>.cert.json).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// List Non-FC families of m distinct k-sets with universe [n].
    Getnfc {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        k: usize,
        #[arg(short)]
        m: usize,
        #[command(flatten)]
        search: SearchFlags,
        /// Also write every computed level under the output directory.
        #[arg(long)]
        save: bool,
    },
    /// Compute FC(k, n).
    Fcvalue {
        #[arg(short)]
        k: usize,
        #[arg(short)]
        n: usize,
        #[arg(long)]
        max_m: Option<usize>,
        #[command(flatten)]
        search: SearchFlags,
        #[arg(long)]
        save: bool,
    },
    /// Scan lexicographic prefixes [S_m] for the first FC one.
    Lexscan {
        #[arg(short)]
        k: usize,
        #[arg(short)]
        n: usize,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Compute FC_V(k, n).
    Vfcvalue {
        #[arg(short)]
        k: usize,
        #[arg(short)]
        n: usize,
        /// Domain: `no-singletons` or a family file.
        #[arg(long = "v")]
        domain: String,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Upper bound on FC(k, n) from a known FC(k, n0).
    Upperbound {
        #[arg(short)]
        k: u64,
        #[arg(short)]
        n: u64,
        #[arg(long)]
        base_n: u64,
        #[arg(long)]
        base_m: u64,
    },
    /// Check the translate family of R in Z_n x Z_n.
    Translates {
        #[arg(short)]
        n: usize,
        /// Three residues, comma separated.
        #[arg(long = "r", value_delimiter = ',')]
        r: Vec<usize>,
    },
    /// Print the canonical form of a family.
    Canon { file: PathBuf },
    /// Print the element orbits of a family's automorphism group.
    Orbits { file: PathBuf },
    /// Verify a certificate.
    Verify { cert: PathBuf },
}

fn read_family(path: &Path, ground: Option<usize>) -> Result<Family> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_family(&text, ground).with_context(|| format!("parsing {}", path.display()))
}

fn domain_family(spec: &str, n: usize) -> Result<Family> {
    if spec == "no-singletons" {
        Ok(no_singletons(n))
    } else {
        read_family(Path::new(spec), Some(n))
    }
}

struct RunConfig {
    output_dir: PathBuf,
    time_limit: Option<Duration>,
}

impl RunConfig {
    fn config(&self, flags: SearchFlags) -> SearchConfig {
        SearchConfig {
            symmetry: !flags.no_symmetry,
            warm_start: flags.warm_start,
            time_limit: self.time_limit,
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.output_dir)
            .with_context(|| format!("creating {}", self.output_dir.display()))?;
        let path = self.output_dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn describe(cert: &Certificate) -> String {
    match cert {
        Certificate::Fc(c) => format!(
            "FC (weights {}; {} cuts)",
            c.weights
                .entries()
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(" "),
            c.cuts.len()
        ),
        Certificate::NonFc(c) => {
            format!("Non-FC ({} cuts in the Farkas combination)", c.cuts.len())
        }
    }
}

fn print_report(label: &str, r: &FcValueReport) {
    match r.value {
        Some(v) => println!("{label}({}, {}) = {v}", r.k, r.n),
        None => println!("{label}({}, {}) is undefined", r.k, r.n),
    }
    for level in &r.counts {
        let parts: Vec<String> = level
            .per_universe
            .iter()
            .map(|(u, c)| format!("|U|={u}: {c}"))
            .collect();
        println!("  m={}: {}", level.m, parts.join(", "));
    }
    if let Some(w) = &r.witness {
        println!("witness with {} sets:", w.len());
        print!("{}", w.to_text());
    }
    println!("elapsed {:.2?}", r.elapsed);
}

fn run(cli: Cli) -> Result<ExitCode> {
    let output_dir = cli
        .output_dir
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let time_limit = match cli.time_limit {
        Some(t) if t.is_nan() || t <= 0.0 => bail!("--time-limit must be positive"),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    let ctx = RunConfig {
        output_dir,
        time_limit,
    };
    match cli.command {
        Command::Isfc {
            file,
            symmetry,
            warm_start,
            domain,
            out,
        } => {
            let family = read_family(&file, None)?;
            let domain = domain
                .map(|d| domain_family(&d, family.ground_size()))
                .transpose()?;
            let opts = FcOptions {
                symmetry,
                warm_start,
                domain,
                deadline: ctx.time_limit.map(|t| Instant::now() + t),
                stop: None,
            };
            let start = Instant::now();
            let cert = is_fc(&family, &opts)?;
            let json = certificate_to_json(&cert);
            let path = match out {
                Some(p) => {
                    fs::write(&p, &json).with_context(|| format!("writing {}", p.display()))?;
                    p
                }
                None => {
                    let stem = file
                        .file_stem()
                        .map_or("family".into(), |s| s.to_string_lossy().into_owned());
                    ctx.write(&format!("{stem}.cert.json"), &json)?
                }
            };
            println!("{}", describe(&cert));
            println!("certificate: {}", path.display());
            log::info!("decided in {:.2?}", start.elapsed());
        }
        Command::Getnfc {
            n,
            k,
            m,
            search,
            save,
        } => {
            let mut solver = NfcSolver::new(k, ctx.config(search));
            let level = solver.get_nfc(n, m)?;
            println!(
                "{} Non-FC families of {m} distinct {k}-sets with universe [{n}]",
                level.families.len()
            );
            for (i, (f, _)) in level.families.iter().enumerate() {
                println!("# family {}", i + 1);
                print!("{}", f.to_text());
            }
            if save {
                solver.write_results(&ctx.output_dir)?;
                println!("results: {}", ctx.output_dir.display());
            }
        }
        Command::Fcvalue {
            k,
            n,
            max_m,
            search,
            save,
        } => {
            let mut solver = NfcSolver::new(k, ctx.config(search));
            let r = fc_value(k, n, max_m, &mut solver)?;
            print_report("FC", &r);
            if save {
                solver.write_results(&ctx.output_dir)?;
                println!("results: {}", ctx.output_dir.display());
            }
        }
        Command::Lexscan { k, n, search } => {
            let r = lex_scan(k, n, ctx.config(search))?;
            println!("first FC prefix: m = {}", r.m);
            let fc = Certificate::Fc(r.prefix);
            let p = ctx.write(
                &format!("lex_k{k}_n{n}_m{}.cert.json", r.m),
                &certificate_to_json(&fc),
            )?;
            println!("[S_{}]: FC, certificate {}", r.m, p.display());
            if let Some(prev) = &r.previous {
                let p = ctx.write(
                    &format!("lex_k{k}_n{n}_m{}.cert.json", r.m - 1),
                    &certificate_to_json(prev),
                )?;
                println!(
                    "[S_{}]: {}, certificate {}",
                    r.m - 1,
                    prev.verdict(),
                    p.display()
                );
            }
            println!("tight: {}", r.tight);
        }
        Command::Vfcvalue {
            k,
            n,
            domain,
            search,
        } => {
            let spec = if domain == "no-singletons" {
                DomainSpec::NoSingletons
            } else {
                DomainSpec::Explicit(read_family(Path::new(&domain), Some(n))?)
            };
            let r = fcv_value(k, n, &spec, ctx.config(search))?;
            print_report("FC_V", &r);
        }
        Command::Upperbound {
            k,
            n,
            base_n,
            base_m,
        } => {
            println!("{}", upper_bound(k, n, base_n, base_m)?);
        }
        Command::Translates { n, r } => {
            let t = translates_family(n, &r)?;
            let degree = wide_regularity(&t);
            let u = t.degrees().iter().filter(|&&d| d > 0).count();
            println!(
                "{} sets on {} elements, degree {}",
                t.len(),
                u,
                degree.map_or("irregular".into(), |d| d.to_string())
            );
            if wide_regular_3set_fc(&t) {
                let bound = fc3_value(u as u64)?;
                println!(
                    "FC by regular 3-set bound (degree {}, m={} >= FC(3,{u})={bound})",
                    degree.unwrap_or(0),
                    t.len()
                );
            } else {
                println!("regular 3-set bound does not apply");
            }
        }
        Command::Canon { file } => {
            let f = read_family(&file, None)?;
            let c = canonical_form(&f);
            print!("{}", c.relabeled.to_text());
            let images: Vec<String> = c
                .witness
                .images()
                .iter()
                .map(|i| (i + 1).to_string())
                .collect();
            println!("# relabeling: {}", images.join(" "));
        }
        Command::Orbits { file } => {
            let f = read_family(&file, None)?;
            for orbit in orbits(&f).orbits() {
                let s: Vec<String> = orbit.iter().map(ToString::to_string).collect();
                println!("{{{}}}", s.join(","));
            }
            let (_, old) = f.compact();
            if old.len() <= MAX_GROUP_UNIVERSE {
                println!("# group order {}", automorphism_group(&f)?.len());
            }
        }
        Command::Verify { cert } => {
            let text =
                fs::read_to_string(&cert).with_context(|| format!("reading {}", cert.display()))?;
            let parsed = parse_certificate(&text)?;
            let report = verify_certificate(&parsed)?;
            for (name, ok) in &report.checks {
                println!("{} {name}", if *ok { "ok  " } else { "FAIL" });
            }
            if report.passed() {
                println!("PASS: {} certificate verified", parsed.verdict());
            } else {
                println!(
                    "FAIL: {}",
                    report.failure.as_deref().unwrap_or("unnamed check failed")
                );
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp_secs()
        .init();
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
