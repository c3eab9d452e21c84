use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use sievelab::arith::primes_upto;
use sievelab::census::{self, ExperimentConfig};
use sievelab::heights::{enumerate_projective, HeightBound};
use sievelab::Error;

#[derive(Parser)]
#[command(name = "sievelab", version, about = "Sieve and Frobenius-statistics experiments for families of curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Surjectivity census over points of bounded height.
    Census(Common),
    /// Sift points whose Frobenius never lands in one char-poly class.
    Classes {
        #[command(flatten)]
        common: Common,
        /// The prime `l`.
        #[arg(long)]
        l: u64,
        /// Class trace mod `l`.
        #[arg(long)]
        trace: u64,
        /// Class determinant mod `l`.
        #[arg(long, default_value_t = 1)]
        det: u64,
        /// Sieve level, overriding the configured rule.
        #[arg(long)]
        q: Option<u64>,
    },
    /// Count points with good reduction at every prime below the level.
    Goodred(Common),
    /// Frobenius class frequencies over finite fields.
    Chebotarev(Common),
    /// List points of `P^1(Q)` up to the largest height.
    Enumerate(Common),
    /// Merge earlier outputs into report.json.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated heights, increasing.
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<u64>>,
    /// Use every prime `5 <= l <= lmax`.
    #[arg(long)]
    lmax: Option<u64>,
    /// Largest witness prime.
    #[arg(long)]
    pcap: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Shuffles scheduling only; outputs do not depend on it.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(x) = &self.x {
            config.x = x.clone();
        }
        if let Some(lmax) = self.lmax {
            config.l = primes_upto(lmax).into_iter().filter(|&l| l >= 5).collect();
        }
        if let Some(p) = self.pcap {
            config.p_cap = p;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        if self.workers.is_some() {
            config.workers = self.workers;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 3,
        Error::Invalid(_) | Error::Unsupported(_) | Error::EmptySupport | Error::ZeroPolynomial => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Census(c) => {
            let out = census::cmd_census(&c.resolve()?)?;
            info!("computed {} traces, cache {:?}", out.computed, out.cache);
            for row in &out.rows {
                println!("x={} B={} undecided_any={} fraction={:.6}", row.x, row.b_count, row.undecided_any, row.fraction);
            }
        }
        Command::Classes { common, l, trace, det, q } => {
            let mut config = common.resolve()?;
            if let Some(q) = q {
                config.q_rule = census::QRule::Fixed(q);
            }
            let rep = census::cmd_sifted_class_set(&config, l, trace, det)?;
            println!(
                "class {} mod {}: |Y_C({})| = {} of {} (Q = {}, {} support primes)",
                rep.class,
                rep.l,
                rep.x,
                rep.count,
                rep.b_count,
                rep.q,
                rep.support.len()
            );
        }
        Command::Goodred(c) => {
            for row in census::cmd_goodred(&c.resolve()?)? {
                println!("{}", row.csv_row());
            }
        }
        Command::Chebotarev(c) => {
            let rep = census::cmd_chebotarev(&c.resolve()?)?;
            for row in &rep.envelope {
                println!("n={} points={} within_envelope={:?}", row.n, row.points, row.within_envelope);
            }
        }
        Command::Enumerate(c) => {
            let config = c.resolve()?;
            let x = *config.x.last().expect("validated");
            if x > census::config::MAX_GOODRED_X {
                return Err(Error::Infeasible(format!("enumeration height {x}")));
            }
            println!("u0,u1,height");
            for p in enumerate_projective(1, HeightBound::integer(x)?) {
                println!("{}", p.csv_row());
            }
        }
        Command::Report(c) => {
            let config = c.resolve()?;
            census::cmd_report(&config)?;
            println!("{}", config.out_dir.join(census::REPORT_FILE).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
