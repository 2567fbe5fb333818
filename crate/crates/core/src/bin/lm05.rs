//! `lm05`: figure data, testbed evaluation and Monte Carlo sessions.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 self-check
//! failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lm05::reports::{self, ExperimentParams, Layout, Scale, Settings, SweepSpec, SweepVariable};
use lm05::{LinkParams, Protocol, SessionConfig};

#[derive(Parser)]
#[command(
    name = "lm05",
    version,
    about = "PNS security of LM05 vs BB84 with weak pulses"
)]
struct Cli {
    /// Seed for Monte Carlo sessions.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Treat η_B as already contained in the measured loss.
    #[arg(long, global = true)]
    eta_in_gamma: bool,
    /// Scale LM05 throughput by the message-mode fraction 1 − c.
    #[arg(long, global = true)]
    account_cm: bool,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    params: ParamArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Gnuplot,
}

/// Link and model overrides shared by all subcommands.
#[derive(Args, Default)]
struct ParamArgs {
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Alice–Bob distance in km.
    #[arg(long, global = true)]
    distance: Option<f64>,
    #[arg(long, global = true)]
    gamma_c: Option<f64>,
    #[arg(long, global = true)]
    eta_b: Option<f64>,
    #[arg(long, global = true)]
    d_b: Option<f64>,
    /// Control-mode probability.
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    rep_rate: Option<f64>,
    /// Constant QBER.
    #[arg(long, global = true)]
    e: Option<f64>,
    /// Misalignment floor of the detector QBER model.
    #[arg(long, global = true)]
    e_det: Option<f64>,
    #[arg(long, global = true)]
    t_link: Option<f64>,
    /// Two-column QBER/efficiency table for Cascade.
    #[arg(long, global = true)]
    cascade_table: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Security margin p_sign − Y against transmissivity.
    RateCurve {
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        scale: Option<String>,
    },
    /// Optimized gain against Alice–Bob distance.
    GainDistance {
        /// Comma-separated distances in km.
        #[arg(long)]
        distances: Option<String>,
        /// Also report the maximum secure distances on stderr.
        #[arg(long)]
        max_distance: bool,
    },
    /// Gains and key rates of the weak-pulse testbed.
    Experiment {
        /// Print the text report instead of CSV.
        #[arg(long)]
        text: bool,
    },
    /// Monte Carlo session.
    Simulate {
        #[arg(long)]
        protocol: Option<String>,
        /// none | pns-m | pns-m-prime
        #[arg(long)]
        attack: Option<String>,
        /// forward | split
        #[arg(long)]
        blocking: Option<String>,
        #[arg(long)]
        forward_fraction: Option<f64>,
        #[arg(long)]
        pulses: Option<u64>,
        #[arg(long)]
        gamma_split: Option<f64>,
        /// Exit with code 2 when MC and analytics disagree beyond 5σ.
        #[arg(long)]
        self_check: bool,
        /// Print the text report instead of CSV.
        #[arg(long)]
        text: bool,
    },
}

enum Failure {
    Usage(String),
    SelfCheck(String),
}

impl From<lm05::Error> for Failure {
    fn from(e: lm05::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::SelfCheck(report)) => {
            print!("{report}");
            eprintln!("self check failed");
            ExitCode::from(2)
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, Failure> {
    let mut s = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::new(),
    };
    let mut flags = Settings::new();
    let p = &cli.params;
    let numeric = [
        ("mu", p.mu),
        ("alpha", p.alpha),
        ("l", p.distance),
        ("gamma_c", p.gamma_c),
        ("eta_b", p.eta_b),
        ("d_b", p.d_b),
        ("c", p.c),
        ("rep_rate", p.rep_rate),
        ("e", p.e),
        ("e_det", p.e_det),
        ("t_link", p.t_link),
    ];
    for (key, value) in numeric {
        if let Some(v) = value {
            flags.set(key, v.to_string())?;
        }
    }
    if let Some(path) = &p.cascade_table {
        flags.set("cascade_table", path.display().to_string())?;
    }
    if let Some(seed) = cli.seed {
        flags.set("seed", seed.to_string())?;
    }
    if cli.eta_in_gamma {
        flags.set("eta_in_gamma", "true")?;
    }
    if cli.account_cm {
        flags.set("account_cm", "true")?;
    }
    match &cli.command {
        Command::RateCurve {
            start,
            stop,
            points,
            scale,
        } => {
            for (k, v) in [("start", *start), ("stop", *stop)] {
                if let Some(v) = v {
                    flags.set(k, v.to_string())?;
                }
            }
            if let Some(n) = points {
                flags.set("points", n.to_string())?;
            }
            if let Some(sc) = scale {
                flags.set("scale", sc.clone())?;
            }
        }
        Command::GainDistance {
            distances: Some(d), ..
        } => flags.set("distances", d.clone())?,
        Command::Simulate {
            protocol,
            attack,
            blocking,
            forward_fraction,
            pulses,
            gamma_split,
            ..
        } => {
            let text = [
                ("protocol", protocol),
                ("attack", attack),
                ("blocking", blocking),
            ];
            for (k, v) in text {
                if let Some(v) = v {
                    flags.set(k, v.clone())?;
                }
            }
            if let Some(f) = forward_fraction {
                flags.set("forward_fraction", f.to_string())?;
            }
            if let Some(n) = pulses {
                flags.set("n_pulses", n.to_string())?;
            }
            if let Some(g) = gamma_split {
                flags.set("gamma_split", g.to_string())?;
            }
        }
        _ => {}
    }
    s.overlay(&flags);
    Ok(s)
}

fn emit(cli: &Cli, body: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => {
            fs::write(path, body).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let s = settings(&cli)?;
    let layout = match cli.format {
        Format::Csv => Layout::Csv,
        Format::Gnuplot => Layout::Gnuplot,
    };
    let model = s.gain_model()?;

    match &cli.command {
        Command::RateCurve { .. } => {
            let link = s.apply_link(LinkParams::ideal(1.0))?;
            let d = SweepSpec::transmittance();
            let spec = SweepSpec {
                variable: SweepVariable::TLink,
                start: s.get("start")?.unwrap_or(d.start),
                stop: s.get("stop")?.unwrap_or(d.stop),
                points: s.get("points")?.unwrap_or(d.points),
                scale: s.get::<Scale>("scale")?.unwrap_or(d.scale),
            };
            emit(&cli, &reports::rate_curve(&spec, &link)?.render(layout))
        }
        Command::GainDistance { max_distance, .. } => {
            let link = s.apply_link(LinkParams::fiber_830nm(0.0))?;
            let distances = s.list("distances")?.unwrap_or_else(default_distances);
            let qber = s.qber_model()?;
            let table = reports::gain_distance(&distances, &link, &model, qber)?;
            if *max_distance {
                let (lm, bb) = reports::max_distances(&link, &model, qber)?;
                eprintln!("max secure distance: lm05 {lm:.2} km, bb84 {bb:.2} km");
            }
            emit(&cli, &table.render(layout))
        }
        Command::Experiment { text } => {
            let params = ExperimentParams::from_settings(&s)?;
            let report = reports::experiment(&params, &model)?;
            for i in &report.interpretations {
                for r in [&i.lm05, &i.bb84] {
                    if r.f_casc_clamped {
                        eprintln!(
                            "warning: QBER {} above the Cascade table, f_casc clamped",
                            r.e
                        );
                    }
                }
            }
            emit(
                &cli,
                &if *text {
                    report.to_text()
                } else {
                    report.to_csv()
                },
            )
        }
        Command::Simulate {
            self_check, text, ..
        } => {
            let protocol = s.protocol(Protocol::Lm05)?;
            let link = s.apply_link(LinkParams::weak_pulse_testbed())?;
            let mut cfg = SessionConfig::new(
                protocol,
                link,
                s.get("n_pulses")?.unwrap_or(100_000),
                s.get("seed")?.unwrap_or(0),
            )
            .with_strategy(s.strategy()?);
            if let Some(g) = s.get("gamma_split")? {
                cfg.gamma_split = g;
            }
            let report = reports::simulate(&cfg, &model)?;
            let body = if *text {
                report.to_text()
            } else {
                report.to_csv()
            };
            if *self_check && !report.self_check_passed() {
                return Err(Failure::SelfCheck(body));
            }
            emit(&cli, &body)
        }
    }
}

fn default_distances() -> Vec<f64> {
    (0..=32).map(|i| i as f64 * 0.25).collect()
}
