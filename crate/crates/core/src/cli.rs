//! Command-line front end.
//!
//! Exit status: 0 when every verdict is verified, envelope or inconclusive,
//! 1 on a counterexample or an internal failure, 2 on a usage error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use crate::boolean_cube::{majority, majority_level1_coeff, wht_forward_exact, BooleanFunction};
use crate::checks::{assert_registry_complete, registry};
use crate::error::{invalid, Error, Result};
use crate::index_sets::{count_exact, enumerate_with_cap, FamilyKind};
use crate::ksz_lab::{ksz_boolean_search, ksz_constant_sweep, SweepTable, BOOLEAN_MAX_DIM};

use crate::multipliers::{
    kislyakov_check, multiplier_norm_bracket, sidon_estimate, CheckInput, CheckMode, MultiplierSpec, SearchConfig, Space,
};
use crate::par;
use crate::report::{OutputFormat, ReportLine, ReportWriter, RunConfig};
use crate::sequences::{bohr_radius_upper, boolean_mon_necessary, dirichlet_sigma_test, mon_criterion, parse_sequence, SequenceGenerator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sidonbench", version, about = "Multiplier inequalities, Sidon constants and KSZ experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// key = value file applied before the flags below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json-lines, csv or human
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long = "grid-cap", global = true)]
    grid_cap: Option<u64>,
    #[arg(long = "enumeration-cap", global = true)]
    enumeration_cap: Option<u64>,
    #[arg(long = "tol-abs", global = true)]
    tol_abs: Option<f64>,
    #[arg(long = "tol-rel", global = true)]
    tol_rel: Option<f64>,
    /// Indifference band for membership tests, in (0, 0.5)
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Value of the unspecified constant C
    #[arg(long = "constant-C", global = true)]
    constant_c: Option<f64>,
    /// Value of the unspecified constant gamma
    #[arg(long = "constant-gamma", global = true)]
    constant_gamma: Option<f64>,
    /// Smaller problem sizes
    #[arg(long, global = true)]
    quick: bool,
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Size of an index family
    Count {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Also list the members
        #[arg(long)]
        list: bool,
    },
    /// Bracket for the p-Sidon constant of a polynomial space
    Sidon {
        #[arg(long, default_value = "lambda-eq")]
        kind: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        budget: usize,
    },
    /// Bracket for a diagonal multiplier, optionally tested against an inequality
    Multiplier {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// ones, unit:INDEX, or a file with one `re [im]` per line (the sequence z for rearranged modes)
        #[arg(long, default_value = "ones")]
        xi: String,
        /// Inequality to test; one of the check modes
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, default_value_t = 1)]
        budget: usize,
    },
    /// Random-sign sup norms: a torus sweep or a cube sign search
    Ksz {
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5, 6, 7, 8])]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Run the cube sign search on all subsets of [N] with unit coefficients instead
        #[arg(long)]
        cube: Option<usize>,
    },
    /// Walsh expansion of a Boolean function
    Walsh {
        /// Text file: header `N truth|walsh`, then 2^N values
        #[arg(long, conflicts_with = "majority")]
        input: Option<PathBuf>,
        /// Majority on N (odd) bits
        #[arg(long)]
        majority: Option<usize>,
        /// Exact rational coefficients (majority only)
        #[arg(long)]
        exact: bool,
    },
    /// Monomial-convergence test for a sequence
    Mon {
        /// `power`, `primes` or `const` (parameters from the flags), or a full spec such as `primes 0.55`
        #[arg(long, conflicts_with = "input")]
        generator: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        /// Scale for `power`, value for `const`
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Sequence length (number of primes for `primes`)
        #[arg(long = "J", default_value_t = 100_000)]
        j: usize,
        /// One value per line
        #[arg(long)]
        input: Option<PathBuf>,
        /// Cube necessity test instead of the torus criterion
        #[arg(long)]
        boolean: bool,
    },
    /// Upper bound for the Bohr radius from a degree-m Sidon lower bound
    Bohr {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Sidon lower bound; estimated when omitted
        #[arg(long)]
        lower: Option<f64>,
        #[arg(long, default_value_t = 1)]
        budget: usize,
    },
    /// Run every registered checker
    VerifyAll {
        /// Restrict to these checker ids
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// List the registry and exit
        #[arg(long)]
        list: bool,
    },
}

fn build_config(g: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &g.config {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_kv(&text)?;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = &g.format {
        cfg.format = v.parse()?;
    }
    if let Some(v) = g.grid_cap {
        cfg.grid_cap = v;
    }
    if let Some(v) = g.enumeration_cap {
        cfg.enumeration_cap = v;
    }
    if let Some(v) = g.tol_abs {
        cfg.tol_abs = v;
    }
    if let Some(v) = g.tol_rel {
        cfg.tol_rel = v;
    }
    if let Some(v) = g.delta {
        cfg.delta = v;
    }
    if let Some(v) = g.constant_c {
        cfg.constants.c = v;
    }
    if let Some(v) = g.constant_gamma {
        cfg.constants.gamma = v;
    }
    if g.quick {
        cfg.quick = true;
    }
    if g.workers.is_some() {
        cfg.workers = g.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn space_for(kind: &str, m: usize, n: usize) -> Result<Space> {
    let kind: FamilyKind = kind.parse()?;
    if kind.is_subsets() {
        Space::boolean(kind, m, n)
    } else {
        Space::torus(kind, m, n)
    }
}

fn parse_weights(spec: &str, len: usize) -> Result<Vec<Complex64>> {
    if spec == "ones" {
        return Ok(vec![Complex64::new(1.0, 0.0); len]);
    }
    if let Some(idx) = spec.strip_prefix("unit:") {
        let idx: usize = idx.parse().map_err(|e| invalid(format!("bad unit index `{idx}`: {e}")))?;
        if idx >= len {
            return Err(invalid(format!("unit index {idx} out of range for {len} weights")));
        }
        let mut w = vec![Complex64::new(0.0, 0.0); len];
        w[idx] = Complex64::new(1.0, 0.0);
        return Ok(w);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| invalid(format!("cannot read weights from {spec}: {e}")))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        match nums.as_slice() {
            [re] => out.push(Complex64::new(*re, 0.0)),
            [re, im] => out.push(Complex64::new(*re, *im)),
            _ => return Err(Error::Parse { line: i + 1, msg: "expected `re` or `re im`".into() }),
        }
    }
    Ok(out)
}

fn is_usage_error(e: &Error) -> bool {
    !matches!(e, Error::CertificateViolated { .. })
}

type Writer = ReportWriter<Box<dyn Write + Send>>;

fn run_command(cmd: &Command, cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let scfg = SearchConfig::with_grid_cap(cfg.grid_cap);
    match cmd {
        Command::Count { kind, m, n, list } => {
            let kind: FamilyKind = kind.parse()?;
            let count = count_exact(kind, *m, *n);
            let line = ReportLine::new("count-exact", "family-enumeration-counts", cfg.seed)
                .input("kind", kind.name())
                .input("m", m)
                .input("n", n)
                .verdict("verified")
                .summary(count.to_string())
                .details(json!({ "count": count.to_string() }));
            if cfg.format == OutputFormat::Human {
                w.raw(&format!("{count}\n"))?;
            } else {
                w.emit(&line)?;
            }
            if *list {
                let fam = enumerate_with_cap(kind, *m, *n, cfg.enumeration_cap)?;
                let mut buf = Vec::new();
                fam.write_text(&mut buf)?;
                w.raw(&String::from_utf8_lossy(&buf))?;
            }
        }
        Command::Sidon { kind, m, n, p, budget } => {
            let space = space_for(kind, *m, *n)?;
            let est = sidon_estimate(space, *p, *budget, cfg.seed, cfg.enumeration_cap, cfg.constants.gamma, &scfg)?;
            let settled = est.bracket.width() <= cfg.tol_abs + cfg.tol_rel * est.bracket.upper;
            w.emit(
                &ReportLine::new("sidon-estimate", "sidon-constant-bracket", cfg.seed)
                    .input("space", space.to_string())
                    .input("p", p)
                    .input("budget", budget)
                    .verdict(if settled { "verified" } else { "inconclusive" })
                    .summary(format!(
                        "[{}, {}] ({} upper), estimate {}, envelope {} at gamma {}",
                        est.bracket.lower, est.bracket.upper, est.upper_basis, est.estimate, est.envelope, cfg.constants.gamma
                    ))
                    .details(&est),
            )?;
        }
        Command::Multiplier { kind, m, n, p, xi, mode, budget } => {
            let space = space_for(kind, *m, *n)?;
            let mode: Option<CheckMode> = mode.as_deref().map(str::parse).transpose()?;
            let family = space.family(cfg.enumeration_cap)?;
            let rearranged = mode.is_some_and(CheckMode::is_rearranged);
            let weights = parse_weights(xi, if rearranged { space.dim } else { family.len() })?;
            let coeffs = if rearranged {
                let z: Vec<f64> = weights.iter().map(|c| c.re).collect();
                crate::multipliers::rearranged_weights(&z, &family)?
            } else {
                weights.clone()
            };
            let spec = MultiplierSpec::new(space, coeffs, *p, cfg.enumeration_cap)?;
            let res = multiplier_norm_bracket(&spec, *budget, cfg.seed, &scfg)?;
            match mode {
                Some(mode) => {
                    let report = kislyakov_check(
                        &CheckInput { mode, space, p: *p, weights: &weights, bracket: &res.bracket, seed: cfg.seed },
                        &cfg.constants,
                        cfg.tol_abs,
                        cfg.tol_rel,
                    )?;
                    w.emit(&ReportLine::from_verdict(&report).input("xi", xi).input("budget", budget))?;
                }
                None => {
                    let settled = res.bracket.width() <= cfg.tol_abs + cfg.tol_rel * res.bracket.upper;
                    w.emit(
                        &ReportLine::new("multiplier-bracket", "multiplier-norm-bracket", cfg.seed)
                            .input("space", space.to_string())
                            .input("p", p)
                            .input("xi", xi)
                            .input("budget", budget)
                            .verdict(if settled { "verified" } else { "inconclusive" })
                            .summary(format!(
                                "[{}, {}] via {}, witness {}",
                                res.bracket.lower, res.bracket.upper, res.bracket.method, res.witness
                            ))
                            .details(&res),
                    )?;
                }
            }
        }
        Command::Ksz { m, n, trials, cube } => match cube {
            Some(dim) => {
                if *dim > BOOLEAN_MAX_DIM {
                    return Err(Error::TooLarge { what: "Boolean sign search", n: *dim, limit: BOOLEAN_MAX_DIM });
                }
                let res = ksz_boolean_search(&vec![1.0; 1usize << dim], *dim, *trials, cfg.seed)?;
                w.emit(&ReportLine::from_verdict(&res.report).input("trials", trials).input("coefficients", "ones"))?;
            }
            None => {
                let table = ksz_constant_sweep(m, n, *trials, cfg.seed, cfg.grid_cap)?;
                emit_sweep(&table, cfg, w)?;
            }
        },
        Command::Walsh { input, majority: maj, exact } => {
            let f = match (input, maj) {
                (Some(path), None) => BooleanFunction::read_text(BufReader::new(File::open(path)?))?,
                (None, Some(k)) => majority(*k)?,
                _ => return Err(invalid("walsh needs exactly one of --input or --majority")),
            };
            let walsh = f.walsh();
            let mut line = ReportLine::new("walsh-transform", "walsh-expansion", cfg.seed)
                .input("n", f.n())
                .verdict("verified")
                .summary(format!("degree {}, sup {}", f.degree(1e-12), f.sup_norm()));
            line = match (maj, exact) {
                (Some(k), true) => {
                    let table: Vec<num_bigint::BigInt> = f.table().iter().map(|&v| num_bigint::BigInt::from(v as i64)).collect();
                    let coeffs: Vec<String> = wht_forward_exact(&table)?.iter().map(ToString::to_string).collect();
                    line.input("majority", k)
                        .input("exact", true)
                        .summary(format!("degree {}, level-one coefficient {}", f.degree(1e-12), majority_level1_coeff(*k)?))
                        .details(json!({ "walsh": coeffs }))
                }
                (Some(k), false) => line.input("majority", k).details(json!({ "walsh": walsh })),
                (None, _) => line.input("input", input.as_ref().map(|p| p.display().to_string())).details(json!({ "walsh": walsh })),
            };
            w.emit(&line)?;
        }
        Command::Mon { generator, sigma, scale, j, input, boolean } => {
            let (label, z) = match (generator, input) {
                (_, Some(path)) => (path.display().to_string(), parse_sequence(&std::fs::read_to_string(path)?)?),
                (Some(g), None) => {
                    let gen = match g.as_str() {
                        "primes" => SequenceGenerator::Primes { sigma: *sigma },
                        "power" => SequenceGenerator::Power { sigma: *sigma, scale: *scale },
                        "const" => SequenceGenerator::Const { c: *scale },
                        spec => spec.parse::<SequenceGenerator>()?,
                    };
                    if let (SequenceGenerator::Primes { sigma }, false) = (gen, *boolean) {
                        let v = dirichlet_sigma_test(sigma, *j, cfg.delta)?;
                        w.emit(
                            &ReportLine::new("dirichlet-sigma-test", "dirichlet-abscissa-one-half", cfg.seed)
                                .input("generator", "primes")
                                .input("sigma", sigma)
                                .input("J", j)
                                .input("delta", cfg.delta)
                                .verdict(v.classification)
                                .summary(format!("tail in [{:.4}, {:.4}], growth trend {:.4}", v.tail_min, v.tail_max, v.growth_trend))
                                .details(&v),
                        )?;
                        return Ok(());
                    }
                    (g.clone(), gen.generate(*j))
                }
                (None, None) => return Err(invalid("mon needs --generator or --input")),
            };
            if *boolean {
                let rep = boolean_mon_necessary(&z, *j, cfg.delta)?;
                w.emit(
                    &ReportLine::new("boolean-mon-necessary", "cube-monomial-necessity", cfg.seed)
                        .input("sequence", &label)
                        .input("sigma", sigma)
                        .input("J", j)
                        .input("delta", cfg.delta)
                        .verdict(if rep.unbounded { "non-member" } else { "inconclusive" })
                        .summary(format!("tail slopes {:.4} / {:.4}", rep.l1_tail_slope, rep.l2_tail_slope))
                        .details(&rep),
                )?;
            } else {
                let v = mon_criterion(&z, *j, cfg.delta)?;
                w.emit(
                    &ReportLine::new("mon-criterion", "monomial-convergence-criterion", cfg.seed)
                        .input("sequence", &label)
                        .input("sigma", sigma)
                        .input("J", j)
                        .input("delta", cfg.delta)
                        .verdict(v.classification)
                        .summary(format!("tail in [{:.4}, {:.4}]", v.tail_min, v.tail_max))
                        .details(&v),
                )?;
            }
        }
        Command::Bohr { n, m, lower, budget } => {
            let lower = match lower {
                Some(l) => *l,
                None => {
                    let space = Space::torus(FamilyKind::LambdaEQ, *m, *n)?;
                    sidon_estimate(space, 1.0, *budget, cfg.seed, cfg.enumeration_cap, cfg.constants.gamma, &scfg)?.bracket.lower
                }
            };
            let b = bohr_radius_upper(*n, *m, lower)?;
            w.emit(
                &ReportLine::new("bohr-radius", "bohr-radius-from-sidon", cfg.seed)
                    .input("n", n)
                    .input("m", m)
                    .input("sidon_lower", lower)
                    .verdict("verified")
                    .summary(format!("radius <= {}, asymptotic order {}", b.bound, b.target))
                    .details(b),
            )?;
        }
        Command::VerifyAll { only, list } => {
            let reg = registry();
            assert_registry_complete(&reg).map_err(|e| Error::CertificateViolated { side: "registry", detail: e.to_string() })?;
            if *list {
                for c in &reg {
                    w.raw(&format!("{}\t{}\t{}\n", c.id, c.module, c.anchor))?;
                }
                return Ok(());
            }
            if let Some(bad) = only.iter().find(|id| !reg.iter().any(|c| &c.id == *id)) {
                return Err(invalid(format!("no checker named `{bad}`; see verify-all --list")));
            }
            let selected: Vec<_> = reg.iter().filter(|c| only.is_empty() || only.contains(&c.id)).collect();
            let results = par::map_slice(&selected, |c| c.execute(cfg));
            for line in results.iter().flatten() {
                w.emit(line)?;
            }
        }
    }
    Ok(())
}

fn emit_sweep(table: &SweepTable, cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    if cfg.format == OutputFormat::Csv {
        w.raw(&table.to_csv())?;
        return Ok(());
    }
    for row in &table.rows {
        w.emit(
            &ReportLine::new("ksz-sweep-cell", "ksz-empirical-constant", cfg.seed)
                .input("m", row.m)
                .input("n", row.n)
                .input("trials", row.trials)
                .verdict("inconclusive")
                .summary(format!("mean ratio {:.6}, max ratio {:.6}, stddev {:.6}", row.mean_ratio, row.max_ratio, row.stddev))
                .details(row),
        )?;
    }
    for note in &table.notes {
        w.emit(&ReportLine::new("ksz-sweep-cell", "ksz-empirical-constant", cfg.seed).verdict("inconclusive").summary(note.clone()))?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match build_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let out: Box<dyn Write + Send> = match &cli.global.out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot create {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        None => Box::new(BufWriter::new(std::io::stdout())),
    };
    let mut writer = ReportWriter::new(out, cfg.format);
    let outcome = par::with_workers(cfg.workers, || run_command(&cli.command, &cfg, &mut writer));
    match outcome {
        Ok(()) => {
            if matches!(cli.command, Command::VerifyAll { list: false, .. }) {
                let tally: Vec<String> = writer.tally().iter().map(|(k, v)| format!("{k} {v}")).collect();
                eprintln!("verify-all: {}", tally.join(", "));
            }
            match writer.finish() {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_COUNTEREXAMPLE
                }
            }
        }
        Err(e) => {
            let code = if is_usage_error(&e) { EXIT_USAGE } else { EXIT_COUNTEREXAMPLE };
            let _ = writer.emit(&ReportLine::error("run", "command-line", cfg.seed, &e));
            let _ = writer.finish();
            eprintln!("error: {e}");
            code
        }
    }
}
