//! Command-line driver: batch verification runs, measure and cocycle
//! queries, finite-volume approximants and algebra operations, with
//! machine-readable reports.
//!
//! Exit codes: 0 all checks passed, 1 residuals above tolerance,
//! 2 malformed input, 3 a configured cap was exceeded.

use clap::{Args, Parser, Subcommand, ValueEnum};
use homoclinic::algebra::{
    convolve, element_from_json, element_to_json, evaluate_at, kms_boundary_defect, kms_residual,
    AlgebraElement, Configuration,
};
use homoclinic::cocycle::{cocycle_v, HomoclinicPair, RewritePiece};
use homoclinic::gibbs::{
    bar_move_sweep, bar_ratio_scan, bowen_scan, invariance_check, k_bound, residual_list,
    residual_sweep, solve_gibbs_system,
};
use homoclinic::report::{
    report_schema, BarRatioCheck, BowenCheck, Checks, GibbsCheck, InvarianceCheck, KmsCheck,
    PotentialInfo, Report, ResidualEntry, Tolerances, UniquenessCheck, F17,
};
use homoclinic::symbolic::{internal_from_slot, parse_cylinder, Symbol, Window, Word};
use homoclinic::thermo::{
    entropy_and_integral, normalize, CylinderMeasure, FiniteRangePotential, FiniteVolume,
    MarkovEquilibrium,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "homoclinic",
    about = "Equilibrium states, cocycles and groupoid-algebra checks on the two-sided full shift",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pressure and Perron data of a potential.
    Pressure {
        #[arg(long)]
        potential: PathBuf,
    },
    /// Normalized potential, pressure, entropy and integral.
    Normalize {
        #[arg(long)]
        potential: PathBuf,
        /// Write the normalized potential table to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Equilibrium measure of a cylinder.
    Measure {
        #[arg(long)]
        cylinder: String,
        #[arg(long)]
        potential: PathBuf,
    },
    /// Cocycle of a homoclinic pair given as two same-window cylinders.
    Cocycle {
        /// Pair notation: "<cyl>,<cyl>" with equal windows.
        #[arg(long)]
        pair: String,
        #[arg(long)]
        potential: PathBuf,
        /// Shared context word left of the window (required when range > 1).
        #[arg(long)]
        left_ctx: Option<String>,
        /// Shared context word right of the window (required when range > 1).
        #[arg(long)]
        right_ctx: Option<String>,
    },
    /// Finite-volume approximant measure of a cylinder.
    FiniteVolume {
        #[arg(long)]
        cylinder: String,
        #[arg(long)]
        potential: PathBuf,
        /// Left end of the shift-power span (negative).
        #[arg(long, default_value_t = -8, allow_hyphen_values = true)]
        a: i64,
        /// Right end of the shift-power span (positive).
        #[arg(long, default_value_t = 8)]
        b: i64,
        #[arg(long, default_value_t = 20)]
        span_cap: i64,
    },
    /// Verification runs emitting a report.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Groupoid algebra operations on element files.
    Algebra {
        #[command(subcommand)]
        op: AlgebraOp,
    },
    /// Print the JSON schema of the verification reports.
    ReportSchema,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct RunConfig {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    beta: f64,
    /// Residual tolerance deciding pass/fail and the exit code.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    #[arg(long, default_value_t = 4)]
    max_shift: i64,
    #[arg(long, default_value_t = 20)]
    span_cap: i64,
    #[arg(long, default_value_t = 10)]
    hull_cap: usize,
    /// Unknown-count cap for the uniqueness system.
    #[arg(long, default_value_t = 4096)]
    system_cap: usize,
    /// Cap on the per-conjugator residual list kept in the report.
    #[arg(long, default_value_t = 2048)]
    list_cap: usize,
    /// Seed for the deterministic random sweeps.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random element pairs for the KMS sweep.
    #[arg(long, default_value_t = 25)]
    samples: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Check {
    /// Gibbs identity residuals over conjugator families.
    Gibbs(RunConfig),
    /// Bowen ratio scan against the stationary envelope.
    Bowen(RunConfig),
    /// Shift-invariance deviation from a common anchor.
    Invariance(RunConfig),
    /// Bar-position ratio scan.
    BarRatio(RunConfig),
    /// Depth-limited linear system for the cylinder measures.
    Uniqueness(RunConfig),
    /// KMS condition for the modular flow.
    Kms {
        #[command(flatten)]
        config: RunConfig,
        /// Element file for A; a seeded random sweep runs when absent.
        #[arg(long)]
        element_a: Option<PathBuf>,
        /// Element file for B.
        #[arg(long)]
        element_b: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AlgebraOp {
    /// Evaluate an element kernel at a homoclinic pair of configurations.
    Eval {
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        alphabet: u8,
        /// Window in lattice slots, e.g. "-2,2".
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// Symbols of the first configuration on the window.
        #[arg(long)]
        x: String,
        /// Symbols of the second configuration on the window.
        #[arg(long)]
        y: String,
        /// Constant tail symbol outside the window.
        #[arg(long, default_value_t = 1)]
        fill: u8,
    },
    /// Convolve two elements and write the canonical result.
    Convolve {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        alphabet: u8,
        #[arg(long, default_value_t = 10)]
        hull_cap: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn exit_code_for(err: &homoclinic::Error) -> u8 {
    use homoclinic::Error::*;
    match err {
        SpanCap { .. } | HullCap { .. } | SystemCap { .. } => 3,
        Inconsistent { .. } => 1,
        _ => 2,
    }
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn f17(v: f64) -> String {
    format!("{:.16e}", v)
}

fn potential_info(u: &FiniteRangePotential) -> PotentialInfo {
    let mut values = std::collections::BTreeMap::new();
    for (code, v) in u.values().iter().enumerate() {
        values.insert(
            Word::decode(code, u.range(), u.alphabet()).to_string(),
            F17(*v),
        );
    }
    PotentialInfo {
        alphabet: u.alphabet(),
        range: u.range(),
        values,
    }
}

fn report_to_csv(report: &Report) -> String {
    let mut lines = vec!["section,key,value".to_string()];
    lines.push(format!("potential,alphabet,{}", report.potential.alphabet));
    lines.push(format!("potential,range,{}", report.potential.range));
    lines.push(format!("run,beta,{}", f17(report.beta.0)));
    lines.push(format!("run,seed,{}", report.seed));
    lines.push(format!("run,tol,{}", f17(report.tolerances.tol.0)));
    let c = &report.checks;
    if let Some(g) = &c.gibbs {
        lines.push(format!("gibbs,max_len,{}", g.max_len));
        lines.push(format!("gibbs,conjugators,{}", g.conjugators));
        lines.push(format!("gibbs,max_residual,{}", f17(g.max_residual.0)));
        lines.push(format!(
            "gibbs,bar_move_max_residual,{}",
            f17(g.bar_move_max_residual.0)
        ));
        lines.push(format!("gibbs,k_bound,{}", f17(g.k_bound.0)));
        lines.push(format!("gibbs,osc,{}", f17(g.osc.0)));
        lines.push(format!("gibbs,pass,{}", g.pass));
        for entry in &g.residuals {
            lines.push(format!(
                "gibbs,residual:{},{}",
                entry.id,
                f17(entry.residual.0)
            ));
        }
    }
    if let Some(b) = &c.bowen {
        lines.push(format!("bowen,max_len,{}", b.max_len));
        lines.push(format!("bowen,ratio_min,{}", f17(b.ratio_min.0)));
        lines.push(format!("bowen,ratio_max,{}", f17(b.ratio_max.0)));
        lines.push(format!("bowen,envelope_lo,{}", f17(b.envelope_lo.0)));
        lines.push(format!("bowen,envelope_hi,{}", f17(b.envelope_hi.0)));
        lines.push(format!("bowen,pass,{}", b.pass));
    }
    if let Some(i) = &c.invariance {
        lines.push(format!("invariance,max_len,{}", i.max_len));
        lines.push(format!("invariance,max_shift,{}", i.max_shift));
        lines.push(format!(
            "invariance,max_deviation,{}",
            f17(i.max_deviation.0)
        ));
        lines.push(format!("invariance,pass,{}", i.pass));
    }
    if let Some(b) = &c.bar_ratio {
        lines.push(format!("bar_ratio,max_len,{}", b.max_len));
        lines.push(format!("bar_ratio,ratio_min,{}", f17(b.ratio_min.0)));
        lines.push(format!("bar_ratio,ratio_max,{}", f17(b.ratio_max.0)));
        lines.push(format!("bar_ratio,pass,{}", b.pass));
    }
    if let Some(u) = &c.uniqueness {
        lines.push(format!("uniqueness,depth,{}", u.depth));
        lines.push(format!("uniqueness,rank_deficiency,{}", u.rank_deficiency));
        lines.push(format!(
            "uniqueness,max_deviation,{}",
            f17(u.max_deviation.0)
        ));
        lines.push(format!("uniqueness,lsq_residual,{}", f17(u.lsq_residual.0)));
        lines.push(format!("uniqueness,pass,{}", u.pass));
    }
    if let Some(k) = &c.kms {
        lines.push(format!("kms,samples,{}", k.samples));
        lines.push(format!("kms,max_residual,{}", f17(k.max_residual.0)));
        lines.push(format!(
            "kms,max_boundary_defect,{}",
            f17(k.max_boundary_defect.0)
        ));
        lines.push(format!("kms,pass,{}", k.pass));
    }
    lines.join("\n") + "\n"
}

/// The equilibrium verified at inverse temperature beta is the one of
/// the scaled potential; the cocycle weight `exp(-beta V_U)` equals
/// `exp(-V_{beta U})` exactly, so sweeps run at parameter one against
/// the scaled potential.
fn scaled_equilibrium(
    u: &FiniteRangePotential,
    beta: f64,
) -> homoclinic::Result<MarkovEquilibrium> {
    normalize(&u.scaled(beta))
}

fn random_element(rng: &mut ChaCha8Rng, d: u8, pieces: usize, max_len: usize) -> AlgebraElement {
    let mut out = Vec::new();
    for _ in 0..pieces {
        let len = rng.gen_range(1..=max_len);
        let lo = rng.gen_range(-(max_len as i64)..=0);
        let total = (d as usize).pow(len as u32);
        out.push(
            RewritePiece::new(
                Window::new(lo, lo + len as i64 - 1),
                Word::decode(rng.gen_range(0..total), len, d),
                Word::decode(rng.gen_range(0..total), len, d),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
            .expect("lengths match"),
        );
    }
    AlgebraElement::from_pieces(out)
}

fn gibbs_check(
    u: &FiniteRangePotential,
    c: &RunConfig,
) -> homoclinic::Result<(GibbsCheck, String)> {
    let m = scaled_equilibrium(u, c.beta)?;
    let sweep = residual_sweep(&m, 1.0, c.max_len)?;
    let list = residual_list(&m, 1.0, c.max_len.min(3), c.list_cap)?;
    let bar_max = bar_move_sweep(&m, 1.0, c.max_len.min(4), 3)?;
    let k = k_bound(&m);
    let osc = m.normalized().osc();
    let pass = sweep.max_residual <= c.tol && bar_max <= c.tol;
    let line = format!(
        "gibbs: {} (max residual {:.3e} over {} conjugators, bar moves {:.3e}, worst {})",
        if pass { "PASS" } else { "FAIL" },
        sweep.max_residual,
        sweep.checked,
        bar_max,
        sweep.worst
    );
    Ok((
        GibbsCheck {
            max_len: c.max_len,
            conjugators: sweep.checked,
            residuals: list
                .into_iter()
                .map(|(id, residual)| ResidualEntry {
                    id,
                    residual: F17(residual),
                })
                .collect(),
            max_residual: F17(sweep.max_residual),
            bar_move_max_residual: F17(bar_max),
            k_bound: F17(k),
            osc: F17(osc),
            pass,
        },
        line,
    ))
}

fn bowen_check(
    u: &FiniteRangePotential,
    c: &RunConfig,
) -> homoclinic::Result<(BowenCheck, String)> {
    let m = scaled_equilibrium(u, c.beta)?;
    let max_len = c.max_len.max(m.range());
    let scan = bowen_scan(&m, max_len, true)?;
    let pass = scan.within_envelope();
    let line = format!(
        "bowen: {} (ratios [{:.6e}, {:.6e}] inside [{:.6e}, {:.6e}])",
        if pass { "PASS" } else { "FAIL" },
        scan.ratio_min,
        scan.ratio_max,
        scan.envelope_lo,
        scan.envelope_hi
    );
    Ok((
        BowenCheck {
            max_len,
            ratio_min: F17(scan.ratio_min),
            ratio_max: F17(scan.ratio_max),
            envelope_lo: F17(scan.envelope_lo),
            envelope_hi: F17(scan.envelope_hi),
            pass,
        },
        line,
    ))
}

fn invariance_report(
    u: &FiniteRangePotential,
    c: &RunConfig,
) -> homoclinic::Result<(InvarianceCheck, String)> {
    let m = scaled_equilibrium(u, c.beta)?;
    let dev = invariance_check(&m, c.max_len, c.max_shift);
    let pass = dev <= c.tol;
    let line = format!(
        "invariance: {} (max deviation {:.3e})",
        if pass { "PASS" } else { "FAIL" },
        dev
    );
    Ok((
        InvarianceCheck {
            max_len: c.max_len,
            max_shift: c.max_shift,
            max_deviation: F17(dev),
            pass,
        },
        line,
    ))
}

fn bar_ratio_check(
    u: &FiniteRangePotential,
    c: &RunConfig,
) -> homoclinic::Result<(BarRatioCheck, String)> {
    let m = scaled_equilibrium(u, c.beta)?;
    let (lo, hi) = bar_ratio_scan(&m, c.max_len.max(2))?;
    let pass = (lo - 1.0).abs() <= c.tol && (hi - 1.0).abs() <= c.tol;
    let line = format!(
        "bar-ratio: {} (attained [{:.12}, {:.12}])",
        if pass { "PASS" } else { "FAIL" },
        lo,
        hi
    );
    Ok((
        BarRatioCheck {
            max_len: c.max_len.max(2),
            ratio_min: F17(lo),
            ratio_max: F17(hi),
            pass,
        },
        line,
    ))
}

fn uniqueness_check(
    u: &FiniteRangePotential,
    c: &RunConfig,
) -> homoclinic::Result<(UniquenessCheck, String)> {
    let system = solve_gibbs_system(u, c.depth, c.beta, c.system_cap)?;
    // Pass means the constraint system is consistent at tolerance; the
    // rank deficiency and the deviation from the transfer-operator
    // measure are reported as diagnostics.
    let pass = system.lsq_residual <= c.tol;
    let line = format!(
        "uniqueness: {} (rank deficiency {}, deviation {:.3e}, lsq residual {:.3e})",
        if pass { "PASS" } else { "FAIL" },
        system.rank_deficiency,
        system.max_deviation,
        system.lsq_residual
    );
    Ok((
        UniquenessCheck {
            depth: system.depth,
            rank_deficiency: system.rank_deficiency,
            max_deviation: F17(system.max_deviation),
            lsq_residual: F17(system.lsq_residual),
            pass,
        },
        line,
    ))
}

fn kms_check(
    u: &FiniteRangePotential,
    c: &RunConfig,
    element_a: Option<PathBuf>,
    element_b: Option<PathBuf>,
) -> homoclinic::Result<(KmsCheck, String)> {
    let m = scaled_equilibrium(u, c.beta)?;
    let d = u.alphabet();
    let mut pairs: Vec<(AlgebraElement, AlgebraElement)> = Vec::new();
    match (element_a, element_b) {
        (Some(a), Some(b)) => {
            let a = element_from_json(&read_file(&a)?, d)?;
            let b = element_from_json(&read_file(&b)?, d)?;
            pairs.push((a, b));
        }
        (None, None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            for _ in 0..c.samples {
                let a = random_element(&mut rng, d, 2, 3);
                let b = random_element(&mut rng, d, 2, 3);
                pairs.push((a, b));
            }
        }
        _ => {
            return Err(homoclinic::Error::ElementFile(
                "provide both --element-a and --element-b, or neither".into(),
            ))
        }
    }
    let times = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.7, 0.0),
        Complex64::new(1.0, 0.3),
    ];
    let mut max_residual = 0.0f64;
    let mut max_defect = 0.0f64;
    for (a, b) in &pairs {
        max_residual = max_residual.max(kms_residual(a, b, &m, u, c.beta, c.hull_cap)?);
        for t in times {
            max_defect = max_defect.max(kms_boundary_defect(a, b, &m, u, t, c.beta, c.hull_cap)?);
        }
    }
    let pass = max_residual <= c.tol && max_defect <= c.tol;
    let line = format!(
        "kms: {} ({} pairs, max residual {:.3e}, max boundary defect {:.3e})",
        if pass { "PASS" } else { "FAIL" },
        pairs.len(),
        max_residual,
        max_defect
    );
    Ok((
        KmsCheck {
            samples: pairs.len(),
            max_residual: F17(max_residual),
            max_boundary_defect: F17(max_defect),
            pass,
        },
        line,
    ))
}

fn read_file(path: &Path) -> homoclinic::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| homoclinic::Error::ElementFile(format!("{}: {e}", path.display())))
}

fn run_verify(check: Check) -> homoclinic::Result<ExitCode> {
    let (config, a, b, kind) = match check {
        Check::Gibbs(c) => (c, None, None, "gibbs"),
        Check::Bowen(c) => (c, None, None, "bowen"),
        Check::Invariance(c) => (c, None, None, "invariance"),
        Check::BarRatio(c) => (c, None, None, "bar_ratio"),
        Check::Uniqueness(c) => (c, None, None, "uniqueness"),
        Check::Kms {
            config,
            element_a,
            element_b,
        } => (config, element_a, element_b, "kms"),
    };
    let u = FiniteRangePotential::load(&config.potential)?;
    let mut checks = Checks::default();
    let line = match kind {
        "gibbs" => {
            let (check, line) = gibbs_check(&u, &config)?;
            checks.gibbs = Some(check);
            line
        }
        "bowen" => {
            let (check, line) = bowen_check(&u, &config)?;
            checks.bowen = Some(check);
            line
        }
        "invariance" => {
            let (check, line) = invariance_report(&u, &config)?;
            checks.invariance = Some(check);
            line
        }
        "bar_ratio" => {
            let (check, line) = bar_ratio_check(&u, &config)?;
            checks.bar_ratio = Some(check);
            line
        }
        "uniqueness" => {
            let (check, line) = uniqueness_check(&u, &config)?;
            checks.uniqueness = Some(check);
            line
        }
        _ => {
            let (check, line) = kms_check(&u, &config, a, b)?;
            checks.kms = Some(check);
            line
        }
    };
    let report = Report {
        potential: potential_info(&u),
        beta: F17(config.beta),
        seed: config.seed,
        checks,
        tolerances: Tolerances {
            tol: F17(config.tol),
        },
    };
    let pass = report.pass();
    if let Some(path) = &config.output {
        let payload = match config.format {
            Format::Json => report.to_json(),
            Format::Csv => report_to_csv(&report),
        };
        write_atomic(path, &payload)
            .map_err(|e| homoclinic::Error::PotentialFile(format!("writing report: {e}")))?;
    }
    println!("{line}");
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_pair(
    pair: &str,
    d: u8,
    r: usize,
    left_ctx: Option<String>,
    right_ctx: Option<String>,
) -> homoclinic::Result<HomoclinicPair> {
    let (xs, ys) = pair
        .split_once(',')
        .ok_or_else(|| homoclinic::Error::Parse("pair notation is \"<cyl>,<cyl>\"".into()))?;
    let x = parse_cylinder(xs.trim(), d)?;
    let y = parse_cylinder(ys.trim(), d)?;
    if x.window() != y.window() {
        return Err(homoclinic::Error::Parse(
            "pair cylinders must share the same window".into(),
        ));
    }
    if r > 1 && (left_ctx.is_none() || right_ctx.is_none()) {
        return Err(homoclinic::Error::Parse(format!(
            "range {r} potentials need --left-ctx and --right-ctx words of length {}",
            r - 1
        )));
    }
    let lctx = match left_ctx {
        Some(w) => Word::parse(&w, d)?,
        None => Word::empty(),
    };
    let rctx = match right_ctx {
        Some(w) => Word::parse(&w, d)?,
        None => Word::empty(),
    };
    HomoclinicPair::new(x.window(), x.word().clone(), y.word().clone(), lctx, rctx)
}

fn run(cli: Cli) -> homoclinic::Result<ExitCode> {
    match cli.cmd {
        Cmd::Pressure { potential } => {
            let u = FiniteRangePotential::load(&potential)?;
            let m = normalize(&u)?;
            println!("lambda = {}", f17(m.perron().lambda));
            println!("pressure = {}", f17(m.pressure()));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Normalize { potential, output } => {
            let u = FiniteRangePotential::load(&potential)?;
            let m = normalize(&u)?;
            let (h, integral) = entropy_and_integral(&m);
            println!("pressure = {}", f17(m.pressure()));
            println!("entropy = {}", f17(h));
            println!("integral = {}", f17(integral));
            for (i, pi) in m.stationary().iter().enumerate() {
                let state = Word::decode(i, m.range() - 1, m.alphabet());
                println!("stationary[{state}] = {}", f17(*pi));
            }
            if let Some(path) = output {
                write_atomic(&path, &m.normalized().to_json())
                    .map_err(|e| homoclinic::Error::PotentialFile(format!("writing: {e}")))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Measure {
            cylinder,
            potential,
        } => {
            let u = FiniteRangePotential::load(&potential)?;
            let m = normalize(&u)?;
            let c = parse_cylinder(&cylinder, u.alphabet())?;
            println!("{}", f17(m.cylinder_measure(&c)?));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cocycle {
            pair,
            potential,
            left_ctx,
            right_ctx,
        } => {
            let u = FiniteRangePotential::load(&potential)?;
            let p = parse_pair(&pair, u.alphabet(), u.range(), left_ctx, right_ctx)?;
            println!("{}", f17(cocycle_v(&p, &u)?));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::FiniteVolume {
            cylinder,
            potential,
            a,
            b,
            span_cap,
        } => {
            let u = FiniteRangePotential::load(&potential)?;
            let c = parse_cylinder(&cylinder, u.alphabet())?;
            let fv = FiniteVolume::new(u.clone(), a, b, span_cap)?;
            let approx = fv.cylinder_measure(&c)?;
            let exact = normalize(&u)?.cylinder_measure(&c)?;
            println!("finite_volume = {}", f17(approx));
            println!("equilibrium  = {}", f17(exact));
            println!("error = {}", f17((approx - exact).abs()));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { check } => run_verify(check),
        Cmd::Algebra { op } => run_algebra(op),
        Cmd::ReportSchema => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report_schema()).expect("schema serializes")
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_algebra(op: AlgebraOp) -> homoclinic::Result<ExitCode> {
    match op {
        AlgebraOp::Eval {
            element,
            alphabet,
            window,
            x,
            y,
            fill,
        } => {
            let a = element_from_json(&read_file(&element)?, alphabet)?;
            let (lo, hi) = window
                .split_once(',')
                .ok_or_else(|| homoclinic::Error::Parse("window is \"lo,hi\"".into()))?;
            let lo: i64 = lo
                .trim()
                .parse()
                .map_err(|_| homoclinic::Error::Parse(format!("bad window bound {lo:?}")))?;
            let hi: i64 = hi
                .trim()
                .parse()
                .map_err(|_| homoclinic::Error::Parse(format!("bad window bound {hi:?}")))?;
            let ilo = internal_from_slot(lo)?;
            let ihi = internal_from_slot(hi)?;
            let xw = Word::parse(&x, alphabet)?;
            let yw = Word::parse(&y, alphabet)?;
            let expect = (ihi - ilo + 1) as usize;
            if xw.len() != expect || yw.len() != expect {
                return Err(homoclinic::Error::LengthMismatch {
                    window: expect,
                    word: xw.len().max(yw.len()),
                });
            }
            let fill = Symbol::new(fill, alphabet)?;
            let xc = Configuration::new(ilo, xw.symbols().to_vec(), fill, fill);
            let yc = Configuration::new(ilo, yw.symbols().to_vec(), fill, fill);
            let v = evaluate_at(&a, &xc, &yc);
            println!("re = {}", f17(v.re));
            println!("im = {}", f17(v.im));
            Ok(ExitCode::SUCCESS)
        }
        AlgebraOp::Convolve {
            a,
            b,
            alphabet,
            hull_cap,
            output,
        } => {
            let ea = element_from_json(&read_file(&a)?, alphabet)?;
            let eb = element_from_json(&read_file(&b)?, alphabet)?;
            let out = convolve(&ea, &eb, alphabet, hull_cap)?;
            let text = element_to_json(&out);
            match output {
                Some(path) => write_atomic(&path, &text)
                    .map_err(|e| homoclinic::Error::ElementFile(format!("writing: {e}")))?,
                None => println!("{text}"),
            }
            eprintln!("pieces = {}", out.pieces().len());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
