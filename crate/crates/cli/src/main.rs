use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtc_core::construction::{build_caps, build_lattice, ExpSumWeight, Mollifier};
use mtc_core::estimates::{hy_suite, DrawKind};
use mtc_core::experiment::{self, csv_string, family_for, ExperimentConfig};
use mtc_core::incidence::{adversarial_directions, random_directions, run_suite};
use mtc_core::transforms::{
    calibration, energy_delta, energy_quadrature, mixed_norm_upper, sup_line_lower_bound, SupLineConfig,
};
use mtc_core::{Error, Result};

#[derive(Parser)]
#[command(name = "mtc", version, about = "Subset-sum weights, incidence checks and X-ray bounds")]
struct Cli {
    /// Root seed for random directions and draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long = "N", short = 'n', default_value_t = 6)]
    n: usize,
    /// Lacunarity; omitted runs the automated search.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    #[arg(long, default_value_t = 2)]
    n0: usize,
    #[arg(long, default_value = "paraboloid")]
    surface: String,
}

impl FamilyArgs {
    fn config(&self, seed: Option<u64>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig {
            d: self.d,
            c: self.c,
            b: self.b,
            n0: self.n0,
            surface: self.surface.clone(),
            schedule: vec![self.n],
            ..Default::default()
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg
    }

    fn resolve_c(&self, cfg: &ExperimentConfig) -> Result<f64> {
        match self.c {
            Some(c) => Ok(c),
            None => Ok(experiment::search_c(cfg, self.n.max(self.d + 1), &cfg.suite())?.0),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyMethodArg {
    Delta,
    Quadrature,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Complex,
    Nonnegative,
    FourierNonnegative,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lift the lacunary points and write the family and lattice as JSON.
    Points(FamilyArgs),
    /// Bad-set, separation and plane-incidence suite for one family.
    IncidenceCheck {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 10_000)]
        dirs: usize,
    },
    /// Delta-model and cap-quadrature energies.
    Energy {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value = "both")]
        method: EnergyMethodArg,
        #[arg(long, default_value_t = 10.0)]
        near_radius: f64,
        #[arg(long, default_value_t = 8)]
        quad_order: usize,
    },
    /// Sup-line lower bound and mixed-norm upper bound of the weight.
    Xray {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 256)]
        dirs: usize,
    },
    /// Random-draw check of the discrete X-ray inequality.
    XrayBoundCheck {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "M", short = 'm', default_value_t = 32)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        /// "all" or a comma list such as "1,2,inf".
        #[arg(long, default_value = "all")]
        p: String,
        #[arg(long, value_enum, default_value = "complex")]
        kind: KindArg,
        /// CSV file name inside the output directory.
        #[arg(long, default_value = "hy.csv")]
        out: String,
    },
    /// Ratio sweep over the N schedule.
    RatioSweep {
        /// TOML or JSON configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Every acceptance check, one line each.
    VerifyAll {
        /// Fewer draws and a shorter headline schedule.
        #[arg(long)]
        quick: bool,
    },
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn parse_ps(s: &str) -> Result<Vec<f64>> {
    if s == "all" {
        return Ok(vec![1.0, 2.0, f64::INFINITY]);
    }
    s.split(',')
        .map(|t| match t.trim() {
            "inf" | "infinity" => Ok(f64::INFINITY),
            v => v.parse::<f64>().map_err(|_| Error::Config(format!("bad p value {v:?}"))),
        })
        .collect()
}

fn run(cli: Cli) -> Result<bool> {
    let out = cli.out_dir.as_path();
    match cli.cmd {
        Cmd::Points(fa) => {
            let cfg = fa.config(cli.seed);
            let c = fa.resolve_c(&cfg)?;
            let fam = family_for(&cfg, c, fa.n)?;
            let lat = build_lattice(&fam, fa.n / 2)?;
            let doc = serde_json::json!({ "family": fam.to_json(), "lattice": lat.to_json() });
            let path = write(out, "points.json", &serde_json::to_string_pretty(&doc)?)?;
            println!("N = {}, R = {:e}, |Q| = {} -> {}", fam.n(), fam.r, lat.len(), path.display());
            Ok(true)
        }
        Cmd::IncidenceCheck { family, dirs } => {
            let cfg = ExperimentConfig { incidence_dirs: dirs, ..family.config(cli.seed) };
            let c = family.resolve_c(&cfg)?;
            let fam = family_for(&cfg, c, family.n)?;
            let rep = run_suite(&fam, &cfg.suite())?;
            let path = write(out, "incidence.json", &serde_json::to_string_pretty(&rep)?)?;
            println!(
                "c = {c}: max |S| = {} (<= {}), violations = {}, max plane count = {:?} ({}), passed = {} -> {}",
                rep.max_bad_set,
                fam.d() - 1,
                rep.violations,
                rep.max_plane_count,
                rep.plane_mode,
                rep.passed,
                path.display()
            );
            Ok(rep.passed)
        }
        Cmd::Energy { family, method, near_radius, quad_order } => {
            let cfg = family.config(cli.seed);
            let c = family.resolve_c(&cfg)?;
            let fam = family_for(&cfg, c, family.n)?;
            let lat = build_lattice(&fam, family.n / 2)?;
            let m = Mollifier::default();
            let caps = build_caps(&fam, quad_order)?;
            let mut doc = serde_json::json!({ "N": fam.n(), "R": fam.r, "Q_size": lat.len() });
            if matches!(method, EnergyMethodArg::Delta | EnergyMethodArg::Both) {
                doc["delta"] = serde_json::to_value(energy_delta(&fam, &lat)?)?;
                doc["calibration"] = serde_json::json!(calibration(&caps, &m));
            }
            if matches!(method, EnergyMethodArg::Quadrature | EnergyMethodArg::Both) {
                doc["quadrature"] = serde_json::to_value(energy_quadrature(&caps, &lat, &m, near_radius)?)?;
            }
            let text = serde_json::to_string_pretty(&doc)?;
            write(out, "energy.json", &text)?;
            println!("{text}");
            Ok(true)
        }
        Cmd::Xray { family, dirs } => {
            let cfg = family.config(cli.seed);
            let c = family.resolve_c(&cfg)?;
            let fam = family_for(&cfg, c, family.n)?;
            let lat = build_lattice(&fam, family.n / 2)?;
            let m = Mollifier::default();
            let mut ds = random_directions(fam.d(), dirs, cfg.seed);
            ds.extend(adversarial_directions(&fam));
            let w = ExpSumWeight::new(&lat, fam.r, m);
            let sup = sup_line_lower_bound(&w, &SupLineConfig { seed: cfg.seed, ..Default::default() }, &ds)?;
            ds.extend(experiment::difference_directions(&fam));
            ds.push(sup.witness.direction.clone());
            let mixed = mixed_norm_upper(&lat, &ds, fam.r, 1.0, &m)?;
            let doc = serde_json::json!({
                "N": fam.n(),
                "R": fam.r,
                "sup_line_lower": sup.value,
                "witness": sup.witness.to_json(),
                "evaluations": sup.evaluations,
                "mixed_norm_upper": mixed,
            });
            let text = serde_json::to_string_pretty(&doc)?;
            write(out, "xray.json", &text)?;
            println!("{text}");
            Ok(sup.value <= mixed.max)
        }
        Cmd::XrayBoundCheck { d, m, draws, p, kind, out: name } => {
            let kind = match kind {
                KindArg::Complex => DrawKind::Complex,
                KindArg::Nonnegative => DrawKind::Nonnegative,
                KindArg::FourierNonnegative => DrawKind::FourierNonnegative,
            };
            let s = hy_suite(d, m, &parse_ps(&p)?, draws, cli.seed.unwrap_or(11), kind)?;
            let path = write(out, &name, &csv_string(&s.records)?)?;
            println!(
                "d = {d}, M = {m}: {} checks, {} failures, min margin {:.3e}, max Parseval defect {:.1e} -> {}",
                s.records.len(),
                s.failures,
                s.min_margin,
                s.max_parseval_defect,
                path.display()
            );
            Ok(s.failures == 0)
        }
        Cmd::RatioSweep { config, c } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if c.is_some() {
                cfg.c = c;
            }
            let rep = experiment::ratio_sweep(&cfg)?;
            let (csv, json) = experiment::write_report(&rep, out)?;
            for r in &rep.rows {
                println!(
                    "N = {:>2}  |Q| = {:>5}  ratioConservative = {:.6}  ratioObserved = {:.6}",
                    r.n, r.q_size, r.ratio_conservative, r.ratio_observed
                );
            }
            if let Some(f) = rep.fit {
                println!("fit: slope {:.4e}, r^2 {:.4}; monotone {}", f.slope, f.r_squared, rep.monotone);
            }
            println!("-> {}, {}", csv.display(), json.display());
            Ok(rep.gates_passed)
        }
        Cmd::VerifyAll { quick } => {
            let res = experiment::verify::verify_all(quick);
            for c in &res {
                println!("{}", c.line());
            }
            write(out, "verify.json", &serde_json::to_string_pretty(&res)?)?;
            Ok(res.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::GateFailed(_)) { 1 } else { 2 })
        }
    }
}
