use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use taxicab::distributions::MultimodalTarget;
use taxicab::error::{Error, Result};
use taxicab::experiments::plot::{
    write_pmf_plot, write_tent_plot, write_trace_plot, REFERENCE_TENTS, TENT_RANGE,
};
use taxicab::experiments::{
    run_calibration, run_tree_experiment, run_univariate, ExperimentConfig, ExperimentKind,
    SamplerChoice, UnivariateSummary, VisitRecord,
};
use taxicab::metrics::Pmf;

/// Taxicab and random-walk samplers on discrete targets and count trees.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Paired TC / MH chains on the multimodal univariate target.
    Univariate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        rate: Option<f64>,
        /// Slice radius of TC and proposal radius of MH.
        #[arg(long)]
        radius: Option<u32>,
        #[arg(long)]
        start_max: Option<i64>,
    },
    /// Count regression tree on synthetic quadrant data.
    FitTree(Fit),
    /// Zero-inflated count regression tree.
    FitZiTree(Fit),
    /// Estimate (κ, t) from draws of a known tent.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        lambda: Option<i64>,
        /// Raw scale exponent of the generating tent.
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        t: Option<f64>,
        /// Mean leaf depth; pass a negative value to estimate it from the
        /// tree prior.
        #[arg(long, allow_hyphen_values = true)]
        d_hat: Option<f64>,
        #[arg(long)]
        grid_increment: Option<f64>,
    },
    /// Plot data from previous runs, or the reference tent pmfs.
    Plot {
        #[arg(value_enum, default_value_t = PlotKind::Tent)]
        what: PlotKind,
        /// `summary.csv` (trace) or `posterior.ndjson` (pmf) of a
        /// univariate run.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "out/plot")]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
        /// Chains to include in a pmf plot.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        chains: Vec<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PlotKind {
    Tent,
    Trace,
    Pmf,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; chain c uses seed + c.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    thin: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Also write SVG charts.
    #[arg(long)]
    svg: bool,
}

#[derive(Args, Debug)]
struct Fit {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    sampler: Option<Sampler>,
    /// `λ,k` slice (tc) or proposal (mh) radii.
    #[arg(long, value_name = "L,K", value_parser = parse_radii)]
    radii: Option<(u32, u32)>,
    /// Observations to simulate.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long)]
    eval_draws: Option<usize>,
    #[arg(long)]
    kappa: Option<u64>,
    #[arg(long)]
    beta_k: Option<f64>,
    #[arg(long)]
    t_k: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    d2: Option<i64>,
    #[arg(long)]
    h1: Option<f64>,
    #[arg(long)]
    h2: Option<f64>,
    /// Cutpoints per covariate.
    #[arg(long)]
    zeta: Option<usize>,
    /// Largest cut-index shift of a perturb move.
    #[arg(long)]
    perturb_radius: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Sampler {
    Tc,
    Mh,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn base_config(path: Option<&Path>, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let mut cfg = ExperimentConfig::defaults(kind);
            cfg.apply_env()?;
            cfg
        }
    };
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "config is for {:?}, not {:?}",
            cfg.kind, kind
        )));
    }
    Ok(cfg)
}

fn apply_common(cfg: &mut ExperimentConfig, c: &Common) {
    set(&mut cfg.out_dir, c.out.clone());
    set(&mut cfg.base_seed, c.seed);
    set(&mut cfg.chains.n_chains, c.chains);
    set(&mut cfg.chains.n_iters, c.iters);
    set(&mut cfg.chains.burn_in, c.burn_in);
    set(&mut cfg.chains.thin, c.thin);
    set(&mut cfg.chains.workers, c.workers);
}

fn parse_radii(s: &str) -> std::result::Result<(u32, u32), String> {
    let (l, k) = s.split_once(',').ok_or("expected two radii as `l,k`")?;
    let parse = |v: &str| {
        v.trim()
            .parse::<u32>()
            .map_err(|e| format!("bad radius {v:?}: {e}"))
    };
    Ok((parse(l)?, parse(k)?))
}

fn apply_fit(cfg: &mut ExperimentConfig, f: &Fit) {
    apply_common(cfg, &f.common);
    if let Some(s) = f.sampler {
        cfg.sampler = match s {
            Sampler::Tc => SamplerChoice::Tc,
            Sampler::Mh => SamplerChoice::Mh,
        };
    }
    if let Some((l, k)) = f.radii {
        cfg.radii.lambda = l;
        cfg.radii.k = k;
    }
    set(&mut cfg.data.n, f.n);
    set(&mut cfg.data.seed, f.data_seed);
    set(&mut cfg.chains.n_eval_draws, f.eval_draws);
    let h = &mut cfg.hyper;
    set(&mut h.kappa, f.kappa);
    set(&mut h.beta_k, f.beta_k);
    set(&mut h.t_k, f.t_k);
    set(&mut h.alpha, f.alpha);
    set(&mut h.beta, f.beta);
    set(&mut h.t, f.t);
    if f.d1.is_some() {
        h.d1 = f.d1;
    }
    if f.d2.is_some() {
        h.d2 = f.d2;
    }
    set(&mut h.h1, f.h1);
    set(&mut h.h2, f.h2);
    set(&mut h.zeta, f.zeta);
    set(&mut h.perturb_radius, f.perturb_radius);
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn fit_tree(config: Option<&Path>, kind: ExperimentKind, f: &Fit) -> Result<()> {
    let mut cfg = base_config(config, kind)?;
    apply_fit(&mut cfg, f);
    cfg.validate()?;
    let run = run_tree_experiment(&cfg)?;
    let s = &run.summary;
    println!(
        "{} n={} radii={} runtime={:.2}s MAE={:.3}({:.3}) L2={:.2}({:.2}) modal leaves={} vars={}",
        s.method,
        s.n,
        s.radii,
        s.runtime_sec,
        s.mae,
        s.mae_se,
        s.l2,
        s.l2_sd,
        s.modal_n_leaves,
        s.modal_split_vars
    );
    print_files(&run.write_outputs(&cfg.out_dir)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Univariate {
            common,
            w,
            rate,
            radius,
            start_max,
        } => {
            let mut cfg = base_config(config, ExperimentKind::Univariate)?;
            apply_common(&mut cfg, &common);
            set(&mut cfg.univariate.w, w);
            set(&mut cfg.univariate.rate, rate);
            set(&mut cfg.univariate.radius, radius);
            set(&mut cfg.univariate.start_max, start_max);
            cfg.validate()?;
            let res = run_univariate(&cfg)?;
            for sampler in [SamplerChoice::Tc, SamplerChoice::Mh] {
                if let Some(s) = res.final_summary(sampler) {
                    println!(
                        "{sampler} iter={} TV={:.4}({:.4}) HE={:.4}({:.4})",
                        s.iteration, s.tv_mean, s.tv_se, s.hellinger_mean, s.hellinger_se
                    );
                }
            }
            println!(
                "mean largest-state gap (tc - mh): {:.2}",
                res.mean_max_state_gap()
            );
            let mut files = res.write_outputs(&cfg.out_dir)?;
            if common.svg {
                files.extend(write_trace_plot(&cfg.out_dir, &res.summary, true)?);
            }
            print_files(&files);
        }
        Command::FitTree(f) => fit_tree(config, ExperimentKind::Tree, &f)?,
        Command::FitZiTree(f) => fit_tree(config, ExperimentKind::ZiTree, &f)?,
        Command::Calibrate {
            common,
            draws,
            lambda,
            k,
            t,
            d_hat,
            grid_increment,
        } => {
            let mut cfg = base_config(config, ExperimentKind::Calibrate)?;
            apply_common(&mut cfg, &common);
            let c = &mut cfg.calibrate;
            set(&mut c.n_draws, draws);
            set(&mut c.lambda, lambda);
            set(&mut c.k, k);
            set(&mut c.t, t);
            set(&mut c.grid_increment, grid_increment);
            if let Some(d) = d_hat {
                c.d_hat = (d >= 0.0).then_some(d);
            }
            cfg.validate()?;
            let run = run_calibration(&cfg)?;
            let s = &run.summary;
            println!(
                "t_hat={} kappa_hat={} (k_hat={}, {:?} of {{{}}}) d_hat={:.3} iterations={} converged={}",
                s.t_hat, s.kappa_hat, s.k_hat, s.branch, s.kappa_candidates, s.d_hat, s.iterations, s.converged
            );
            print_files(&run.write_outputs(&cfg.out_dir)?);
        }
        Command::Plot {
            what,
            input,
            out,
            svg,
            chains,
        } => {
            let need = |what: &str| {
                input
                    .clone()
                    .ok_or_else(|| Error::Config(format!("plotting a {what} needs --input")))
            };
            let files = match what {
                PlotKind::Tent => write_tent_plot(&out, &REFERENCE_TENTS, TENT_RANGE, svg)?,
                PlotKind::Trace => {
                    let mut reader = csv::Reader::from_path(need("trace")?)?;
                    let rows = reader
                        .deserialize()
                        .collect::<std::result::Result<Vec<UnivariateSummary>, _>>()?;
                    write_trace_plot(&out, &rows, svg)?
                }
                PlotKind::Pmf => {
                    let text = std::fs::read_to_string(need("pmf")?)?;
                    let mut records = Vec::new();
                    for line in text.lines().filter(|l| !l.trim().is_empty()) {
                        let r: VisitRecord = serde_json::from_str(line)?;
                        if chains.contains(&r.chain) {
                            records.push(r);
                        }
                    }
                    let u = match config {
                        Some(p) => base_config(Some(p), ExperimentKind::Univariate)?.univariate,
                        None => ExperimentConfig::defaults(ExperimentKind::Univariate).univariate,
                    };
                    let target = MultimodalTarget::new(u.w, u.rate)?;
                    let truth = Pmf::truncated(0, |x| target.log_pmf(x))?;
                    let hi = records
                        .iter()
                        .flat_map(|r| r.counts.last().map(|&(x, _)| x))
                        .max()
                        .unwrap_or(0)
                        .max(40);
                    write_pmf_plot(&out, &records, &truth, (0, hi), svg)?
                }
            };
            print_files(&files);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
