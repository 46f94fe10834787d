//! Command-line front end: lattice covers, unit-count bounds, factorization
//! checks, experiment runs, network evaluation, and report rendering.
//!
//! Exit codes: 0 on success, 1 on configuration or usage errors, 2 on I/O
//! errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use factornet::{
    cover_box, format_f64, load_assembly, load_function, load_json, random_lipschitz,
    run_experiment_full, save_function, save_json, save_net, unit_count_bound, Architecture,
    AssemblyDoc, BoundVariant, BoxDomain, Error, ExperimentConfig, InterpRule, LipschitzClass,
    NetInput, Report, Result, SampleFactorization,
};

#[derive(Parser)]
#[command(
    name = "factornet",
    version,
    about = "Factor operators on function spaces through finite sample vectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the lattice cover of a box, one center per line as CSV.
    Cover(CoverArgs),
    /// Print both unit-count bounds for an error budget as a CSV table.
    Bound(BoundArgs),
    /// Measure the sample round trip and the reconstruction error of a cover.
    FactorizeCheck(FactorizeCheckArgs),
    /// Run the training experiment described by a config file and write the
    /// report, its CSV form, and the trained networks.
    Train(TrainArgs),
    /// Apply a stored assembled network to a stored function.
    Evaluate(EvaluateArgs),
    /// Re-render a stored report as CSV.
    Report(ReportArgs),
}

/// `lo,hi` pairs per axis, e.g. `0,1` or `0,1,0,2`.
fn parse_domain(text: &str) -> std::result::Result<BoxDomain, String> {
    let nums: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad coordinate {t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if nums.is_empty() || !nums.len().is_multiple_of(2) {
        return Err("expected lower,upper pairs, one per axis".into());
    }
    let (lower, upper) = nums.chunks(2).map(|pair| (pair[0], pair[1])).unzip();
    BoxDomain::new(lower, upper).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpArg {
    Nearest,
    Multilinear,
}

impl From<InterpArg> for InterpRule {
    fn from(arg: InterpArg) -> Self {
        match arg {
            InterpArg::Nearest => InterpRule::Nearest,
            InterpArg::Multilinear => InterpRule::Multilinear,
        }
    }
}

#[derive(Args)]
struct CoverArgs {
    /// Box bounds as lower,upper pairs per axis, e.g. 0,1 or 0,1,0,2.
    #[arg(long, value_parser = parse_domain)]
    domain: BoxDomain,
    /// Cover radius.
    #[arg(long)]
    gamma: f64,
}

#[derive(Args)]
struct BoundArgs {
    /// Diameter of the covered set.
    #[arg(long)]
    diam: f64,
    /// Slope bound of the function class.
    #[arg(long)]
    lambda: f64,
    /// Lipschitz constant of the operator.
    #[arg(long)]
    op_lambda: f64,
    /// Uniform error budget.
    #[arg(long)]
    eps: f64,
    /// Dimension of the covered set.
    #[arg(long)]
    dim: usize,
}

#[derive(Args)]
struct FactorizeCheckArgs {
    /// Box bounds as lower,upper pairs per axis.
    #[arg(long, value_parser = parse_domain)]
    domain: BoxDomain,
    /// Cover radius.
    #[arg(long)]
    gamma: f64,
    /// Reconstruction rule.
    #[arg(long, value_enum, default_value = "multilinear")]
    interp: InterpArg,
    /// Reference-grid cells per cover step (even).
    #[arg(long, default_value_t = 4)]
    grid_resolution: usize,
    /// Random sample vectors for the round-trip check.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Magnitude of the random sample vectors.
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
    /// Random test functions for the reconstruction check.
    #[arg(long, default_value_t = 50)]
    functions: usize,
    /// Slope bound of the test functions.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Amplitude bound of the test functions.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for the report, its CSV form, and the trained networks.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Assembled network document (JSON).
    #[arg(long)]
    net: PathBuf,
    /// Input function document (JSON).
    #[arg(long)]
    function: PathBuf,
    /// Write the output function here instead of printing its values.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored report (JSON).
    #[arg(long)]
    report: PathBuf,
    /// Write the CSV here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests land here too; only real parse
            // failures are errors.
            let failed = err.use_stderr();
            let _ = err.print();
            return if failed { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Cover(args) => cover(args),
        Command::Bound(args) => bound(args),
        Command::FactorizeCheck(args) => factorize_check(args),
        Command::Train(args) => train(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Report(args) => report(args),
    }
}

fn cover(args: CoverArgs) -> Result<()> {
    let cover = cover_box(&args.domain, args.gamma)?;
    for i in 0..cover.len() {
        let row: Vec<String> = cover.center(i).iter().map(f64::to_string).collect();
        println!("{}", row.join(","));
    }
    Ok(())
}

fn bound(args: BoundArgs) -> Result<()> {
    println!("variant,units");
    for (name, variant) in [("as_stated", BoundVariant::AsStated), ("derived", BoundVariant::Derived)]
    {
        let units =
            unit_count_bound(args.diam, args.lambda, args.op_lambda, args.eps, args.dim, variant)?;
        println!("{name},{units}");
    }
    Ok(())
}

fn factorize_check(args: FactorizeCheckArgs) -> Result<()> {
    let sf = SampleFactorization::build(
        &args.domain,
        args.gamma,
        args.interp.into(),
        args.grid_resolution,
    )?;
    let roundtrip = sf.check_diagram_b(args.trials, args.seed, args.magnitude)?;
    let class = LipschitzClass::new(args.lambda, args.amplitude)?;
    let fns: Vec<_> = (0..args.functions)
        .map(|i| random_lipschitz(&class, sf.target_grid(), args.seed.wrapping_add(i as u64)))
        .collect();
    let reconstruction = sf.check_reconstruction(&fns)?;
    println!("cover_points,{}", sf.order());
    println!("roundtrip_worst,{}", format_f64(roundtrip));
    println!("reconstruction_worst,{}", format_f64(reconstruction));
    println!("reconstruction_bound,{}", format_f64(args.lambda * args.gamma));
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let config: ExperimentConfig = load_json(&args.config)?;
    let (report, nets) = run_experiment_full(&config)?;
    fs::create_dir_all(&args.out_dir)?;

    let report_path = args.out_dir.join("report.json");
    save_json(&report_path, &report)?;
    println!("wrote {}", report_path.display());
    let csv_path = args.out_dir.join("report.csv");
    fs::write(&csv_path, report.csv())?;
    println!("wrote {}", csv_path.display());

    // One factorization serves both sides of every trained network; rebuild
    // it to lift the winners into appliable documents.
    let sf = SampleFactorization::build(
        &config.domain,
        report.resolved.gamma,
        config.interp,
        config.grid_resolution,
    )?;
    for (run, net) in report.runs.iter().zip(&nets) {
        let net_path = args.out_dir.join(format!("net_w{}.json", run.width));
        save_net(&net_path, net)?;
        println!("wrote {}", net_path.display());
        if let Some(&ratio) = config.mollify_ratios.first() {
            let doc = AssemblyDoc::from_parts(
                Architecture::FunctionalBasis,
                net,
                &sf,
                &sf,
                ratio * report.resolved.gamma,
            );
            let asm_path = args.out_dir.join(format!("assembly_w{}.json", run.width));
            save_json(&asm_path, &doc)?;
            println!("wrote {}", asm_path.display());
        }
    }

    println!(
        "psi {}, gamma {}, cover points {}, floor {}",
        report.resolved.psi, report.resolved.gamma, report.resolved.order, report.floor
    );
    for run in &report.runs {
        println!(
            "width {}: train {:.3e}, heldout sup {:.3e}, winner restart {}",
            run.width, run.train_err, run.heldout_sup_err, run.winner
        );
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let (doc, net) = load_assembly(&args.net)?;
    let f = load_function(&args.function)?;
    let output = match doc.architecture {
        Architecture::FiniteBasis => {
            let sf_x = doc.input.build()?;
            let samples = sf_x.delta(&f)?;
            net.apply(NetInput::Vector(&samples))?
        }
        _ => net.apply(NetInput::Function(&f))?,
    };
    match args.out {
        Some(path) => {
            save_function(&path, &output)?;
            println!("wrote {}", path.display());
        }
        None => {
            for v in output.values() {
                println!("{}", format_f64(*v));
            }
        }
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let report: Report = load_json(&args.report)?;
    let csv = report.csv();
    match args.out {
        Some(path) => {
            fs::write(&path, csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
