//! `reglab` command-line front end. Every subcommand emits one JSON
//! document; failures go to stderr as `{"status": "error", "stage": ...}`.

use clap::{Args, Parser, Subcommand};
use reglab::checks::Suite;
use reglab::heckefield::{
    hecke_character, partial_l_deriv0_all, partial_l_direct_all, partial_l_kronecker_at,
    ImagQuadField, RayClassGroupData,
};
use reglab::json::Cx;
use reglab::kronecker::{
    bloch_wigner, dilog, k21_crosscheck, kronecker_continued, kronecker_direct, rq, EvalSettings,
};
use reglab::lattice::ComplexLattice;
use reglab::numerics::parse_complex;
use reglab::par::Execution;
use reglab::stark::{plan, run_stark_pipeline, PipelineConfig};
use reglab::{Error, C64};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(
    name = "reglab",
    version,
    about = "Regulators and L-values of CM elliptic curves"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Series tolerance, in [1e-14, 1e-2].
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Shell radius of the direct lattice sum.
    #[arg(long, global = true)]
    shells: Option<f64>,
    #[arg(long, global = true)]
    max_q_terms: Option<usize>,
    /// Norm bound of direct ideal sums.
    #[arg(long, global = true, default_value_t = 100_000)]
    norm_bound: i64,
    /// Largest denominator tried by rational recognition.
    #[arg(long, global = true)]
    max_den: Option<i64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Print the resolved plan and stop.
    #[arg(long, global = true)]
    dry_run: bool,
}

impl Common {
    fn settings(&self, base: EvalSettings) -> Result<EvalSettings, Error> {
        let mut s = base;
        if let Some(t) = self.tol {
            s.tol = t;
        }
        if let Some(r) = self.shells {
            s.shell_radius = r;
        }
        if let Some(n) = self.max_q_terms {
            s.max_q_terms = n;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Li₂, Bloch-Wigner D and, with --q, the regulator function R_q.
    Dilog {
        #[arg(long, value_parser = complex_arg)]
        z: C64,
        #[arg(long, value_parser = complex_arg)]
        q: Option<C64>,
    },
    /// K_{2,1}(u) by all three routes, or K_a(x, x0, s) with --s.
    Kronecker {
        #[arg(long, value_parser = complex_arg, default_value = "i")]
        tau: C64,
        /// Point on [1, tau].
        #[arg(long, value_parser = complex_arg, conflicts_with = "s")]
        u: Option<C64>,
        #[arg(long, value_parser = complex_arg)]
        s: Option<C64>,
        #[arg(long, value_parser = complex_arg, default_value = "0")]
        x: C64,
        #[arg(long, value_parser = complex_arg, default_value = "0")]
        x0: C64,
        #[arg(long, default_value_t = 1)]
        a: u32,
    },
    /// Run a named invariant suite, or `all`.
    Check { suite: String },
    /// Partial L-values of a Hecke character over a class-number-one field.
    #[command(name = "heckeL")]
    HeckeL {
        #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
        d: i64,
        #[arg(long, default_value = "3", allow_hyphen_values = true)]
        modulus: String,
        #[arg(long, default_value_t = 0)]
        phi_fin: usize,
        #[arg(long, value_parser = complex_arg, default_value = "2")]
        s: C64,
        #[arg(long, value_parser = complex_arg, default_value = "1")]
        omega: C64,
        /// L(s, φ) rather than L(s, φ̄).
        #[arg(long)]
        phi: bool,
    },
    /// Full regulator / L-value pipeline from a JSON config.
    Stark { config: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dilog { .. } => "dilog",
            Command::Kronecker { .. } => "kronecker",
            Command::Check { .. } => "check",
            Command::HeckeL { .. } => "heckeL",
            Command::Stark { .. } => "stark",
        }
    }
}

fn complex_arg(s: &str) -> Result<C64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    settings: &'a EvalSettings,
    passed: bool,
    result: T,
}

const UNSTAGED: &str = "";

struct Failure {
    stage: String,
    message: String,
    detail: Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let stage = e.stage().unwrap_or(UNSTAGED).to_string();
        Failure {
            stage,
            message: e.to_string(),
            detail: Value::Null,
        }
    }
}

fn emit(out: &Option<String>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| Failure {
            stage: "output".into(),
            message: format!("{path}: {e}"),
            detail: Value::Null,
        }),
        None => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn envelope<T: Serialize>(
    common: &Common,
    command: &str,
    settings: &EvalSettings,
    passed: bool,
    result: T,
) -> String {
    let env = Envelope {
        tool: "reglab",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: common.seed,
        settings,
        passed,
        result,
    };
    serde_json::to_string_pretty(&env).expect("report serializes")
}

fn cx(z: C64) -> Value {
    serde_json::to_value(Cx(z)).expect("complex serializes")
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let settings = common
        .settings(EvalSettings::default())
        .map_err(|e| Failure::from(e.at_stage("config")))?;
    match &cli.command {
        Command::Dilog { z, q } => {
            let mut r =
                json!({ "z": cx(*z), "li2": cx(dilog(*z)), "bloch_wigner": bloch_wigner(*z) });
            if let Some(q) = q {
                r["rq"] = cx(rq(*z, *q, &settings)?);
            }
            emit(&common.out, &envelope(common, "dilog", &settings, true, r))
        }
        Command::Kronecker {
            tau,
            u,
            s,
            x,
            x0,
            a,
        } => {
            let lat = ComplexLattice::from_tau(*tau)?;
            let r = match s {
                None => serde_json::to_value(k21_crosscheck(
                    u.unwrap_or(C64::new(0.0, 0.0)),
                    &lat,
                    &settings,
                )?)
                .expect("crosscheck serializes"),
                Some(s) => {
                    let cont = kronecker_continued(*a, *x, *x0, *s, &lat, &settings)?;
                    let direct = kronecker_direct(*a, *x, *x0, *s, &lat, &settings).ok();
                    json!({
                        "a": a, "s": cx(*s), "x": cx(*x), "x0": cx(*x0),
                        "continued": cx(cont),
                        "direct": direct.map(cx),
                        "residual": direct.map(|d| (d - cont).norm()),
                    })
                }
            };
            emit(
                &common.out,
                &envelope(common, "kronecker", &settings, true, r),
            )
        }
        Command::Check { suite } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite
                    .parse()
                    .map_err(|e: Error| Failure::from(e.at_stage("config")))?]
            };
            let mut reports = vec![];
            for s in suites {
                log::info!("running suite {s}");
                reports.push(
                    s.run(common.seed, &settings)
                        .map_err(|e| Failure::from(e.at_stage(s.name())))?,
                );
            }
            let passed = reports.iter().all(|r| r.passed);
            emit(
                &common.out,
                &envelope(common, "check", &settings, passed, &reports),
            )?;
            if passed {
                Ok(())
            } else {
                let failed: Vec<&str> = reports
                    .iter()
                    .filter(|r| !r.passed)
                    .map(|r| r.suite.name())
                    .collect();
                Err(Failure {
                    stage: "checks".into(),
                    message: format!("suites failed: {}", failed.join(", ")),
                    detail: json!(failed),
                })
            }
        }
        Command::HeckeL {
            d,
            modulus,
            phi_fin,
            s,
            omega,
            phi,
        } => {
            let field = ImagQuadField::new(*d).map_err(|e| e.at_stage("field"))?;
            let g = field.parse_elem(modulus).map_err(|e| e.at_stage("field"))?;
            let rc = Arc::new(
                RayClassGroupData::new(&field, g).map_err(|e| e.at_stage("ray_class_group"))?,
            );
            let hecke =
                hecke_character(&rc, *phi_fin).map_err(|e| e.at_stage("hecke_character"))?;
            let conjugated = !phi;
            let kron: Vec<C64> = rc
                .class_reps
                .iter()
                .map(|&b| partial_l_kronecker_at(&hecke, b, conjugated, *s, *omega, &settings))
                .collect::<Result<_, _>>()?;
            let direct = partial_l_direct_all(
                &hecke,
                conjugated,
                *s,
                common.norm_bound,
                Execution::Parallel,
            )
            .ok();
            let mut deriv = partial_l_deriv0_all(&hecke, true, *omega, &settings)?;
            if *phi {
                deriv.iter_mut().for_each(|z| *z = z.conj());
            }
            let classes: Vec<Value> = (0..rc.order())
                .map(|i| {
                    json!({
                        "class": i,
                        "representative": rc.class_reps[i].to_string(),
                        "kronecker": cx(kron[i]),
                        "direct": direct.as_ref().map(|v| cx(v[i])),
                        "relative_error": direct.as_ref().map(|v| (v[i] - kron[i]).norm() / kron[i].norm()),
                        "derivative_at_0": cx(deriv[i]),
                    })
                })
                .collect();
            let r = json!({
                "D": d, "modulus": g.to_string(), "phi_fin_index": phi_fin,
                "phi_fin_k_valued": hecke.is_k_valued(),
                "character": if *phi { "phi" } else { "phibar" },
                "s": cx(*s), "omega": cx(*omega), "norm_bound": common.norm_bound,
                "ray_class_structure": rc.group().cyclic_orders(),
                "classes": classes,
            });
            emit(&common.out, &envelope(common, "heckeL", &settings, true, r))
        }
        Command::Stark { config } => {
            let text = std::fs::read_to_string(config).map_err(|e| Failure {
                stage: "config".into(),
                message: format!("{config}: {e}"),
                detail: Value::Null,
            })?;
            let mut cfg = PipelineConfig::from_json(&text)?;
            cfg.settings = common
                .settings(cfg.settings.clone())
                .map_err(|e| Failure::from(e.at_stage("config")))?;
            if let Some(m) = common.max_den {
                cfg.recognition.max_den = m;
            }
            if common.seed != 0 {
                cfg.seed = common.seed;
            }
            if common.dry_run {
                let p = plan(&cfg)?;
                return emit(
                    &common.out,
                    &serde_json::to_string_pretty(&p).expect("plan serializes"),
                );
            }
            let report = run_stark_pipeline(&cfg)?;
            emit(&common.out, &report.to_json())?;
            let failed = report.failed_assertions();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure {
                    stage: "checks".into(),
                    message: format!("{} residuals above tolerance", failed.len()),
                    detail: json!(failed),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var("REGLAB_THREADS") {
        match n.parse::<usize>() {
            Ok(n) => {
                reglab::par::init_threads(n);
            }
            Err(_) => log::warn!("ignoring REGLAB_THREADS={n}: not a number"),
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(mut f) => {
            if f.stage == UNSTAGED {
                f.stage = cli.command.name().to_string();
            }
            let doc = json!({ "status": "error", "stage": f.stage, "message": f.message, "detail": f.detail });
            eprintln!("{doc}");
            ExitCode::from(1)
        }
    }
}
