//! Batch command-line front end.
//!
//! Exit codes: 0 success, 1 a checked invariant failed, 2 configuration or input error.
//! Errors are written to stderr as one JSON object.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::sieve_tables;
use crate::detectors::{
    build_flexible_detector, classify_clusters, detect_half_isolated_u, explicit_formula_residual,
    prime_sum_sweep, write_trace_csv, PrimeSide,
};
use crate::error::{Error, Result};
use crate::experiments::{ap_obstruction_experiment, bow_experiment, census, dichotomy_experiment};
use crate::fixtures::zeta_fixture;
use crate::params::ScaleParams;
use crate::powersum::{
    gen_bourgain, gen_signed, gen_smooth_poisson, gen_vertical_ap, power_sum_search_with,
    random_valid_config, validate_config, PowerSumConfig, SearchOptions,
};
use crate::report::ExperimentReport;
use crate::weights::{BumpWeight, DecayShape};
use crate::zerosets::{
    cluster_decompose, gen_bow, gen_line_config, gen_vertical_ap_zeros, load_zeros, Zero,
    ZeroFormat, ZeroSet,
};

/// Output directory when neither the flag nor the config file sets one.
pub const OUT_DIR_ENV: &str = "ZETA_DETECT_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "zeta-detect",
    version,
    about = "Zero-detecting Dirichlet polynomials and related experiments"
)]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. --set t=1e4 or --set params.window=40
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for every sweep
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the resolved configuration and exit
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Normalisation, partition of unity and Mellin decay of the bump weight
    WeightsCheck {
        #[arg(long, default_value_t = 0.5)]
        decay_step: f64,
    },
    #[command(subcommand)]
    Powersum(PowersumCmd),
    #[command(subcommand)]
    Zeros(ZerosCmd),
    #[command(subcommand)]
    Detect(DetectCmd),
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    VerticalAp,
    Signed,
    Smooth,
    Bourgain,
    Random,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowersumCmd {
    /// Certified grid maximum of one configuration
    Search {
        #[arg(long, value_enum)]
        family: Family,
        /// number of terms (vertical-ap, smooth, random) or k (signed, bourgain)
        #[arg(long, default_value_t = 4)]
        r: usize,
        #[arg(long, default_value_t = 10.0)]
        a: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// run even when the hypotheses fail
        #[arg(long)]
        allow_invalid: bool,
    },
    /// Every family at small sizes
    Zoo {
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ZeroInput {
    /// zero table; the embedded 100-zero fixture when absent
    #[arg(long)]
    pub zeros: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Ordinates)]
    pub format: InputFormat,
    /// asserted completeness, "LO:HI" (HI may be "inf")
    #[arg(long)]
    pub complete: Option<String>,
    /// do not label lines from distinct real parts
    #[arg(long)]
    pub no_infer_lines: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Ordinates,
    BetaGamma,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZerosCmd {
    /// Parse a table and summarise it
    Load {
        #[command(flatten)]
        input: ZeroInput,
    },
    GenBow {
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        c: f64,
    },
    GenAp {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma0: f64,
        #[arg(long)]
        spacing: f64,
        #[arg(long)]
        count: usize,
    },
    /// --line "0.5:100,101.5" per vertical line
    GenLines {
        #[arg(long = "line", required = true)]
        lines: Vec<String>,
    },
    Cluster {
        #[command(flatten)]
        input: ZeroInput,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Primes,
    ZeroModel,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectCmd {
    /// |S_U(ρ₀)| over U ∈ (Y, Y²]
    Sweep {
        #[command(flatten)]
        input: ZeroInput,
        /// index of ρ₀ in the sorted set
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        y: f64,
        #[arg(long, value_enum, default_value_t = Source::Primes)]
        source: Source,
        /// skip the half-isolation check
        #[arg(long)]
        unchecked: bool,
    },
    Flexible {
        #[command(flatten)]
        input: ZeroInput,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        a: f64,
    },
    Classify {
        #[command(flatten)]
        input: ZeroInput,
    },
    Residual {
        #[command(flatten)]
        input: ZeroInput,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, default_value_t = 50.0)]
        u: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentCmd {
    Bow {
        #[arg(long, default_value_t = 1e4)]
        t0: f64,
        #[arg(long, default_value_t = 0.65)]
        eps: f64,
        #[arg(long, default_value_t = 10.0)]
        c: f64,
    },
    Ap {
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 501)]
        count: usize,
    },
    Dichotomy {
        #[command(flatten)]
        input: ZeroInput,
    },
    Census {
        #[command(flatten)]
        input: ZeroInput,
    },
}

/// File configuration; every key is optional and unknown keys are rejected.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub params: ScaleParams,
}

const TOP_KEYS: [&str; 4] = ["out_dir", "threads", "seed", "params"];

fn parse_scalar(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn apply_set(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {assignment:?}")))?;
    let mut path: Vec<&str> = key.trim().split('.').collect();
    if !TOP_KEYS.contains(&path[0]) {
        path.insert(0, "params");
    }
    let (last, parents) = path.split_last().expect("non-empty");
    let mut cur = root;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{p} is not a table")))?;
    }
    cur.insert(last.to_string(), parse_scalar(raw.trim()));
    Ok(())
}

/// File, then --set overrides, then dedicated flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut root = match &cli.config {
        Some(p) => std::fs::read_to_string(p)?
            .parse::<toml::Table>()
            .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => toml::Table::new(),
    };
    for s in &cli.set {
        apply_set(&mut root, s)?;
    }
    let mut cfg: RunConfig = toml::Value::Table(root)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    if cli.out.is_some() {
        cfg.out_dir = cli.out.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    cfg.params.validate()?;
    if cfg.threads == Some(0) {
        return Err(Error::Config("threads must be at least 1".into()));
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn parse_complete(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("--complete expects LO:HI, got {s:?}")))?;
    let num = |v: &str| {
        let v = v.trim();
        if v == "inf" {
            Ok(f64::INFINITY)
        } else {
            v.parse::<f64>()
                .map_err(|e| Error::Config(format!("{v:?}: {e}")))
        }
    };
    Ok((num(lo)?, num(hi)?))
}

fn load_input(input: &ZeroInput) -> Result<ZeroSet> {
    let mut zs = match &input.zeros {
        Some(p) => {
            let fmt = match input.format {
                InputFormat::Ordinates => ZeroFormat::Ordinates,
                InputFormat::BetaGamma => ZeroFormat::BetaGamma,
            };
            load_zeros(p, fmt)?.set
        }
        None => zeta_fixture(),
    };
    if let Some(c) = &input.complete {
        let (lo, hi) = parse_complete(c)?;
        zs = zs.with_complete_range(lo, hi)?;
    }
    if input.no_infer_lines {
        zs = zs.without_lines();
    }
    Ok(zs)
}

fn write_zero_file(dir: &Path, name: &str, zs: &ZeroSet) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut text = String::from("# beta gamma\n");
    for z in zs.zeros() {
        text.push_str(&format!("{} {}\n", z.beta, z.gamma));
    }
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn finish(
    rep: &ExperimentReport,
    dir: &Path,
    traces: &[(&str, &str, &[(f64, f64)])],
) -> Result<Value> {
    let path = rep.write_to(dir)?;
    let mut csvs = Vec::new();
    for (label, header, rows) in traces {
        let p = dir.join(format!("{}-{}-{label}.csv", rep.name, rep.param_hash()));
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, header, rows)?;
        std::fs::write(&p, buf)?;
        csvs.push(p.display().to_string());
    }
    Ok(json!({ "report": path.display().to_string(), "traces": csvs, "summary": rep.summary }))
}

fn check(ok: bool, what: &str, rep: &ExperimentReport) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Invariant(format!(
            "{what} failed; see {}",
            rep.file_name()
        )))
    }
}

fn family_config(family: Family, r: usize, a: f64, seed: u64) -> Result<PowerSumConfig> {
    let w = BumpWeight::new();
    match family {
        Family::VerticalAp => gen_vertical_ap(r, a),
        Family::Signed => gen_signed(r, a),
        Family::Smooth => gen_smooth_poisson(r, a, &w),
        Family::Bourgain => gen_bourgain(r, a),
        Family::Random => Ok(random_valid_config(
            &mut ChaCha8Rng::seed_from_u64(seed),
            r,
            a,
        )),
    }
}

fn cmd_weights_check(params: &ScaleParams, step: f64, dir: &Path) -> Result<Value> {
    if !(step > 0.0) {
        return Err(Error::Config(format!(
            "decay_step must be positive, got {step}"
        )));
    }
    let w = BumpWeight::new();
    let w00 = w.mellin_w0(Complex64::new(0.0, 0.0))?;
    let xs: Vec<f64> = (0..10_000)
        .map(|i| 10f64.powf(6.0 * i as f64 / 9_999.0))
        .collect();
    let partition = xs.iter().map(|&x| w.partition_check(x)).fold(0.0, f64::max);
    let (ratio, at) = w.calibrate_decay(DecayShape::HalfRoot, &[-1.0, 0.0, 1.0], 400.0, step);
    let mut rep = ExperimentReport::new("weights-check", json!({ "decay_step": step }), params);
    let norm_ok = (w00.value.re - std::f64::consts::LN_2).abs() <= 1e-8;
    let decay_ok = ratio <= DecayShape::HalfRoot.frozen_constant();
    rep.summary = json!({
        "w0_at_0": w00.value,
        "w0_at_0_minus_log2": w00.value.re - std::f64::consts::LN_2,
        "normalization_ok": norm_ok,
        "partition_max_deviation": partition,
        "partition_ok": partition <= 1e-10,
        "decay_ratio_max": ratio,
        "decay_ratio_at": at,
        "decay_constant": DecayShape::HalfRoot.frozen_constant(),
        "decay_ok": decay_ok,
    });
    let out = finish(&rep, dir, &[])?;
    check(
        norm_ok && partition <= 1e-10 && decay_ok,
        "weights check",
        &rep,
    )?;
    Ok(out)
}

fn cmd_powersum(cmd: &PowersumCmd, params: &ScaleParams, seed: u64, dir: &Path) -> Result<Value> {
    match *cmd {
        PowersumCmd::Search {
            family,
            r,
            a,
            tol,
            allow_invalid,
        } => {
            let cfg = family_config(family, r, a, seed)?;
            let mut opts = SearchOptions::new(tol);
            if allow_invalid {
                opts = opts.overriding();
            }
            let res = power_sum_search_with(&cfg, &opts)?;
            let mut rep = ExperimentReport::new(
                "powersum-search",
                json!({ "family": family, "r": r, "a": a, "tol": tol, "seed": seed, "allow_invalid": allow_invalid }),
                params,
            );
            let violations = validate_config(&cfg);
            rep.summary = json!({
                "terms": cfg.terms.len(),
                "result": res,
                "bound": cfg.b.powf(-99.0),
                "meets_bound": res.value >= cfg.b.powf(-99.0),
                "violations": violations,
            });
            finish(&rep, dir, &[])
        }
        PowersumCmd::Zoo { tol } => {
            let mut rep =
                ExperimentReport::new("powersum-zoo", json!({ "tol": tol, "seed": seed }), params);
            let cases = [
                (Family::VerticalAp, 4, 10.0),
                (Family::VerticalAp, 7, 10.0),
                (Family::Signed, 3, 10.0),
                (Family::Smooth, 16, 10.0),
                (Family::Bourgain, 1, 10.0),
                (Family::Bourgain, 2, 10.0),
                (Family::Random, 8, 5.0),
            ];
            for (family, r, a) in cases {
                let cfg = family_config(family, r, a, seed)?;
                let violations = validate_config(&cfg);
                let res = power_sum_search_with(&cfg, &SearchOptions::new(tol).overriding())?;
                rep.push(&json!({
                    "family": family, "r": r, "a": a, "terms": cfg.terms.len(),
                    "result": res, "hypotheses_hold": violations.is_empty(), "violations": violations,
                }))?;
            }
            rep.summary = json!({ "cases": rep.records.len() });
            finish(&rep, dir, &[])
        }
    }
}

fn parse_line_spec(s: &str) -> Result<(f64, Vec<f64>)> {
    let bad = |m: String| Error::Config(format!("--line {s:?}: {m}"));
    let (b, gs) = s
        .split_once(':')
        .ok_or_else(|| bad("expected BETA:G1,G2,...".into()))?;
    let beta = b.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?;
    let gammas = gs
        .split(',')
        .filter(|g| !g.trim().is_empty())
        .map(|g| g.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    Ok((beta, gammas))
}

fn zero_summary(zs: &ZeroSet) -> Value {
    json!({
        "count": zs.len(),
        "gamma_min": zs.zeros().first().map(|z| z.gamma),
        "gamma_max": zs.zeros().last().map(|z| z.gamma),
        "lines": zs.lines(),
        "c_f": zs.c_f(),
        "complete_range": zs.complete_range().map(|(lo, hi)| json!([lo, if hi.is_finite() { Some(hi) } else { None }])),
        "source": zs.source(),
    })
}

fn cmd_zeros(cmd: &ZerosCmd, params: &ScaleParams, dir: &Path) -> Result<Value> {
    let generated = |name: &str, inputs: Value, zs: ZeroSet| -> Result<Value> {
        let mut rep = ExperimentReport::new(name, inputs, params);
        rep.summary = zero_summary(&zs);
        let file = write_zero_file(dir, &format!("{}-{}.zeros", name, rep.param_hash()), &zs)?;
        rep.summary["file"] = json!(file.display().to_string());
        finish(&rep, dir, &[])
    };
    match cmd {
        ZerosCmd::Load { input } => {
            let zs = load_input(input)?;
            let mut rep = ExperimentReport::new("zeros-load", json!({ "input": input }), params);
            rep.summary = zero_summary(&zs);
            finish(&rep, dir, &[])
        }
        ZerosCmd::GenBow { t0, eps, c } => generated(
            "zeros-bow",
            json!({ "t0": t0, "eps": eps, "c": c }),
            gen_bow(*t0, *eps, *c)?,
        ),
        ZerosCmd::GenAp {
            beta,
            gamma0,
            spacing,
            count,
        } => generated(
            "zeros-ap",
            json!({ "beta": beta, "gamma0": gamma0, "spacing": spacing, "count": count }),
            gen_vertical_ap_zeros(*beta, *gamma0, *spacing, *count)?,
        ),
        ZerosCmd::GenLines { lines } => {
            let spec = lines
                .iter()
                .map(|s| parse_line_spec(s))
                .collect::<Result<Vec<_>>>()?;
            generated(
                "zeros-lines",
                json!({ "lines": lines }),
                gen_line_config(&spec)?,
            )
        }
        ZerosCmd::Cluster { input } => {
            let zs = load_input(input)?;
            let d = cluster_decompose(&zs, params)?;
            let mut rep = ExperimentReport::new("zeros-cluster", json!({ "input": input }), params);
            for s in d.summaries(&zs) {
                rep.push(&s)?;
            }
            rep.summary = json!({
                "clusters": d.clusters.len(),
                "sizes": d.clusters.iter().map(|c| c.size()).collect::<Vec<_>>(),
            });
            finish(&rep, dir, &[])
        }
    }
}

fn pick(zs: &ZeroSet, index: usize) -> Result<Zero> {
    zs.get(index)
}

fn cmd_detect(cmd: &DetectCmd, params: &ScaleParams, dir: &Path) -> Result<Value> {
    let w = BumpWeight::new();
    match cmd {
        DetectCmd::Sweep {
            input,
            index,
            y,
            source,
            unchecked,
        } => {
            let zs = load_input(input)?;
            let rho0 = pick(&zs, *index)?;
            let tables;
            let src = match source {
                Source::Primes => {
                    tables = sieve_tables((2.0 * y * y).ceil() as usize + 2)?;
                    PrimeSide::Primes {
                        tables: &tables,
                        weight: &w,
                    }
                }
                Source::ZeroModel => PrimeSide::ZeroModel {
                    zeros: &zs,
                    weight: &w,
                },
            };
            let sweep = if *unchecked {
                prime_sum_sweep(&src, rho0, *y, params)?
            } else {
                detect_half_isolated_u(&zs, rho0, *y, &src, params)?
            };
            let mut rep = ExperimentReport::new(
                "detect-sweep",
                json!({ "input": input, "index": index, "y": y, "source": source, "unchecked": unchecked }),
                params,
            );
            rep.summary =
                json!({ "rho0": rho0, "best": sweep.best, "grid_points": sweep.trace.len() });
            finish(&rep, dir, &[("trace", "u", &sweep.trace)])
        }
        DetectCmd::Flexible { input, index, a } => {
            let zs = load_input(input)?;
            let rho0 = pick(&zs, *index)?;
            let tables = sieve_tables((2.0 * a).ceil() as usize + 2)?;
            let det = build_flexible_detector(&zs, rho0, *a, params, &tables, &w)?;
            let mut rep = ExperimentReport::new(
                "detect-flexible",
                json!({ "input": input, "index": index, "a": a }),
                params,
            );
            rep.summary = serde_json::to_value(&det)?;
            finish(&rep, dir, &[])
        }
        DetectCmd::Classify { input } => {
            let zs = load_input(input)?;
            let d = cluster_decompose(&zs, params)?;
            let ns = crate::detectors::dyadic_ns(params);
            let need = ((41.45 * params.damping()).ceil() as usize)
                .max(ns.last().map_or(0, |&n| 2 * n as usize));
            let tables = sieve_tables(need.max(16))?;
            let labels = classify_clusters(&d, &zs, params, &tables)?;
            let mut rep =
                ExperimentReport::new("detect-classify", json!({ "input": input }), params);
            for l in &labels {
                rep.push(l)?;
            }
            rep.summary = json!({ "clusters": labels.len() });
            finish(&rep, dir, &[])
        }
        DetectCmd::Residual { input, index, u } => {
            let zs = load_input(input)?;
            let rho0 = pick(&zs, *index)?;
            let tables = sieve_tables((2.0 * u).ceil() as usize + 2)?;
            let r = explicit_formula_residual(&zs, rho0, *u, &tables, &w, params)?;
            let mut rep = ExperimentReport::new(
                "detect-residual",
                json!({ "input": input, "index": index, "u": u }),
                params,
            );
            rep.summary = serde_json::to_value(&r)?;
            let out = finish(&rep, dir, &[])?;
            check(r.within_bound, "explicit-formula residual", &rep)?;
            Ok(out)
        }
    }
}

fn cmd_experiment(cmd: &ExperimentCmd, params: &ScaleParams, dir: &Path) -> Result<Value> {
    match cmd {
        ExperimentCmd::Bow { t0, eps, c } => {
            let rep = bow_experiment(*t0, *eps, *c, params)?;
            let out = finish(&rep, dir, &[])?;
            let s = &rep.summary;
            check(
                s["middle_below_control"] == true && s["control_within_tail"] == true,
                "bow ordering",
                &rep,
            )?;
            Ok(out)
        }
        ExperimentCmd::Ap { c, count } => {
            let rep = ap_obstruction_experiment(*c, *count, params)?;
            let out = finish(&rep, dir, &[])?;
            check(
                rep.summary["middle_below_bottom"] == true,
                "AP ordering",
                &rep,
            )?;
            Ok(out)
        }
        ExperimentCmd::Dichotomy { input } => {
            let zs = load_input(input)?;
            let rep = dichotomy_experiment(&zs, params)?;
            let out = finish(&rep, dir, &[])?;
            check(
                rep.summary["passed"] == rep.summary["zeros"],
                "Type I/II dichotomy",
                &rep,
            )?;
            Ok(out)
        }
        ExperimentCmd::Census { input } => {
            let zs = load_input(input)?;
            let rep = census(&zs, params)?;
            let out = finish(&rep, dir, &[])?;
            check(
                rep.summary["consistent"] == true,
                "census consistency",
                &rep,
            )?;
            Ok(out)
        }
    }
}

fn execute(cli: &Cli) -> Result<Value> {
    let cfg = resolve_config(cli)?;
    let dir = out_dir(&cfg);
    if cli.dry_run {
        return Ok(json!({
            "dry_run": true,
            "command": serde_json::to_value(&cli.command)?,
            "out_dir": dir.display().to_string(),
            "threads": cfg.threads,
            "seed": cfg.seed,
            "params": cfg.params.snapshot(),
        }));
    }
    if let Some(n) = cfg.threads {
        // a pool built earlier in the process stays in place
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let params = &cfg.params;
    let seed = cfg.seed.unwrap_or(0);
    match &cli.command {
        Command::WeightsCheck { decay_step } => cmd_weights_check(params, *decay_step, &dir),
        Command::Powersum(c) => cmd_powersum(c, params, seed, &dir),
        Command::Zeros(c) => cmd_zeros(c, params, &dir),
        Command::Detect(c) => cmd_detect(c, params, &dir),
        Command::Experiment(c) => cmd_experiment(c, params, &dir),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_assertion() {
        1
    } else {
        2
    }
}

pub fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::NotHalfIsolated { witnesses, .. } = e {
        v["witnesses"] = json!(witnesses);
    }
    v
}

/// Parses `args`, runs, prints the result to stdout or a JSON error to stderr; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", json!({ "error": "usage", "message": e.to_string() }));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(v) => {
            use std::io::Write;
            // a closed pipe downstream is not an error of this run
            let _ = writeln!(
                std::io::stdout(),
                "{}",
                serde_json::to_string_pretty(&v).unwrap_or_default()
            );
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("zeta-detect").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn set_overrides_and_unknown_keys() {
        let c = cli(&[
            "--set",
            "t=1e4",
            "--set",
            "params.window=40",
            "--set",
            "seed=7",
            "weights-check",
        ]);
        let cfg = resolve_config(&c).unwrap();
        assert_eq!(cfg.params.t, 1e4);
        assert_eq!(cfg.params.window, 40.0);
        assert_eq!(cfg.seed, Some(7));
        let bad = cli(&["--set", "nonsense=1", "weights-check"]);
        assert!(matches!(resolve_config(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn complete_ranges() {
        assert_eq!(parse_complete("0:inf").unwrap(), (0.0, f64::INFINITY));
        assert_eq!(parse_complete("1:237").unwrap(), (1.0, 237.0));
        assert!(parse_complete("5").is_err());
    }

    #[test]
    fn line_specs() {
        assert_eq!(parse_line_spec("0.5:1,2.5").unwrap(), (0.5, vec![1.0, 2.5]));
        assert!(parse_line_spec("x:1").is_err());
    }
}
