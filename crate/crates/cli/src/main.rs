use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use polarquant::fa_design::{design, DesignParams};
use polarquant::harness::{
    report_complexity, run_bler, write_plotdata, ExperimentConfig, FrontEnd,
};
use polarquant::verify::{run_verification, VerifyOptions};
use polarquant::{Conversion, DecoderSpec, Variant};

#[derive(Parser)]
#[command(
    name = "polarquant",
    version,
    about = "Finite-alphabet polar decoder design and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a finite-alphabet decoder and write its spec file.
    Design {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Message resolution in bits.
        #[arg(long)]
        w: u32,
        /// Internal datapath resolution in bits.
        #[arg(long, default_value_t = 6)]
        wint: u32,
        /// Design Eb/N0 in dB.
        #[arg(long, allow_hyphen_values = true)]
        ebn0: f64,
        #[arg(long)]
        variant: Variant,
        #[arg(long)]
        out: PathBuf,
        /// Print per-level mutual information.
        #[arg(long)]
        verbose: bool,
    },
    /// Run a block-error-rate sweep.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write plot data (one block per decoder).
        #[arg(long)]
        plotdata: Option<PathBuf>,
        #[arg(long)]
        conversion: Option<Conversion>,
        #[arg(long)]
        alt_sign_invert: bool,
        /// Channel front end of finite-alphabet decoders.
        #[arg(long, value_parser = parse_front_end)]
        front_end: Option<FrontEnd>,
        /// Ignore points already present in the output file.
        #[arg(long)]
        fresh: bool,
    },
    /// Print the lower-branch complexity of a spec.
    Report {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run the exhaustive self-checks.
    Verify {
        /// Code length of the design under test.
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
}

fn parse_front_end(s: &str) -> Result<FrontEnd, String> {
    match s {
        "sample" => Ok(FrontEnd::Sample),
        "llr" => Ok(FrontEnd::Llr),
        _ => Err(format!("expected sample or llr, got {s:?}")),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Design {
            n,
            k,
            w,
            wint,
            ebn0,
            variant,
            out,
            verbose,
        } => {
            if k == 0 || k > n {
                bail!("need 0 < K <= N");
            }
            let params = DesignParams::new(n, k as f64 / n as f64, w, wint, ebn0, variant);
            let (spec, report) = design(&params)?;
            spec.save(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("channel MI {:.6}", report.channel_mi);
            if verbose {
                let mut level = 0;
                while (1 << level) - 1 < report.nodes.len() {
                    let nodes = &report.nodes[(1 << level) - 1..(2 << level) - 1];
                    let upper: f64 =
                        nodes.iter().map(|n| n.upper_out_mi).sum::<f64>() / nodes.len() as f64;
                    let lower: f64 =
                        nodes.iter().map(|n| n.lower_out_mi).sum::<f64>() / nodes.len() as f64;
                    println!("level {level}: mean MI upper {upper:.6} lower {lower:.6}");
                    level += 1;
                }
            }
            let leaf: f64 = report.leaf_mi.iter().sum();
            println!(
                "sum of leaf MI {leaf:.4} of {n} (channel bound {:.4})",
                n as f64 * report.channel_mi
            );
            for wn in &report.warnings {
                eprintln!("warning: {wn}");
            }
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Simulate {
            config,
            out,
            plotdata,
            conversion,
            alt_sign_invert,
            front_end,
            fresh,
        } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            if let Some(c) = conversion {
                cfg.decoder.conversion = c;
            }
            cfg.decoder.alt_sign_invert |= alt_sign_invert;
            if let Some(f) = front_end {
                cfg.decoder.channel_front_end = f;
            }
            if fresh && out.exists() {
                std::fs::remove_file(&out)?;
            }
            let records = run_bler(&cfg, Some(&out))?;
            for r in &records {
                println!(
                    "{:>6} dB  {:>8} frames  {:>6} errors  BLER {:.4e}  ({:.1} s)",
                    r.ebn0_db, r.frames, r.block_errors, r.bler, r.wallclock_s
                );
            }
            if let Some(p) = plotdata {
                write_plotdata(&p, &records)?;
            }
            Ok(true)
        }
        Command::Report { spec } => {
            let spec =
                DecoderSpec::load(&spec).with_context(|| format!("reading {}", spec.display()))?;
            println!(
                "variant {}, design Eb/N0 {} dB, rate {}",
                spec.variant, spec.design_ebn0_db, spec.rate
            );
            print!("{}", report_complexity(&spec));
            Ok(true)
        }
        Command::Verify { n } => {
            let report = run_verification(&VerifyOptions {
                len: n,
                ..VerifyOptions::default()
            })?;
            print!("{report}");
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
