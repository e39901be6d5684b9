//! Command-line front end.
//!
//! Verbs:
//!
//! - `solve`  — one configuration, full matched series, phase shift report.
//! - `sweep`  — the same over a comma-separated list of matching radii,
//!              optionally in parallel (`--workers`), output order follows
//!              the input order.
//! - `verify` — self-check suite (exit code 4 on any failure).
//! - `oracle` — direct-integration reference phase shift.
//!
//! Configuration can come from a flat `key=value` file (`--config`); any
//! flag given on the command line overrides the file.  Logging is controlled
//! by the `SCATTER_LOG` environment variable (`error|warn|info|debug|trace`).
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure,
//! 4 verification failure.

use crate::error::{Error, Result};
use crate::matching::{self, lambda_triad, solution_for_radius, solution_for_stage};
use crate::oracle::{self, OracleConfig};
use crate::potentials::{ClassParams, PotentialClass};
use crate::report::{self, OutputFormat, SolveReport};
use crate::series::{self, Cutoff, SeriesOptions};
use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "scatter",
    version,
    about = "Phase shifts for vanishing-coupling, exploding-core potentials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration and report the phase shift.
    Solve(JobArgs),
    /// Solve a list of matching radii (comma-separated --R).
    Sweep(JobArgs),
    /// Run the built-in consistency checks.
    Verify(VerifyArgs),
    /// Direct-integration reference phase shift.
    Oracle(JobArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct JobArgs {
    /// Flat key=value configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Potential class tag: three letters from {E,P} for coupling/core/tail.
    #[arg(long)]
    pub class: Option<String>,
    /// Coupling range [length].
    #[arg(long)]
    pub r0: Option<f64>,
    /// Core range [length].
    #[arg(long)]
    pub r1: Option<f64>,
    /// Tail range [length].
    #[arg(long)]
    pub r2: Option<f64>,
    /// Coupling power (power-law coupling only).
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Tail power (power-law tail only).
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Wave number [1/length].
    #[arg(long)]
    pub k: Option<f64>,
    /// Partial wave.
    #[arg(long)]
    pub l: Option<u32>,
    /// Matching radius (comma-separated list for sweep) [length].
    #[arg(long = "R", value_name = "R")]
    pub r_match: Option<String>,
    /// Coupling strength [1/length^2]; must be paired with --s.
    #[arg(long)]
    pub g2: Option<f64>,
    /// Core exponent; must be paired with --g2.
    #[arg(long)]
    pub s: Option<f64>,
    /// Truncation orders "N,M" for the inner and outer iterations.
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Flat key=value configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Restrict the suite to one class tag.
    #[arg(long)]
    pub class: Option<String>,
    /// Deliberately corrupt the angular triad to prove the suite trips.
    #[arg(long, hide = true)]
    pub inject_triad_fault: bool,
}

/// Everything a job needs, after merging config file and flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub class: PotentialClass,
    pub k: f64,
    pub l: u32,
    pub radii: Vec<f64>,
    pub g2: Option<f64>,
    pub stage: Option<f64>,
    pub cutoff: Cutoff,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: usize,
}

fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!(
                "config line {}: expected key=value, got '{line}'",
                n + 1
            ))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_cutoff(s: &str) -> Result<Cutoff> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::InvalidInput(format!("cutoff must be N,M — got '{s}'")))?;
    let eps = a
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidInput(format!("cutoff: bad inner order '{a}'")))?;
    let tau = b
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidInput(format!("cutoff: bad outer order '{b}'")))?;
    Ok(Cutoff::new(eps, tau))
}

fn parse_radii(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad radius '{p}'")))
        })
        .collect()
}

impl JobArgs {
    /// Merge the config file (if any) under the command-line flags.
    pub fn resolve(&self) -> Result<Settings> {
        let mut merged = self.clone();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            for (key, value) in parse_kv(&text)? {
                let f = |v: &str, name: &str| -> Result<f64> {
                    v.parse::<f64>().map_err(|_| {
                        Error::InvalidInput(format!("config {name}: bad number '{v}'"))
                    })
                };
                match key.as_str() {
                    "class" => {
                        merged.class.get_or_insert(value);
                    }
                    "out" => {
                        merged.out.get_or_insert(PathBuf::from(&value));
                    }
                    "r0" => {
                        merged.r0.get_or_insert(f(&value, "r0")?);
                    }
                    "r1" => {
                        merged.r1.get_or_insert(f(&value, "r1")?);
                    }
                    "r2" => {
                        merged.r2.get_or_insert(f(&value, "r2")?);
                    }
                    "sigma0" => {
                        merged.sigma0.get_or_insert(f(&value, "sigma0")?);
                    }
                    "sigma2" => {
                        merged.sigma2.get_or_insert(f(&value, "sigma2")?);
                    }
                    "k" => {
                        merged.k.get_or_insert(f(&value, "k")?);
                    }
                    "l" => {
                        let v = value.parse::<u32>().map_err(|_| {
                            Error::InvalidInput(format!("config l: bad integer '{value}'"))
                        })?;
                        merged.l.get_or_insert(v);
                    }
                    "R" => {
                        merged.r_match.get_or_insert(value);
                    }
                    "g2" => {
                        merged.g2.get_or_insert(f(&value, "g2")?);
                    }
                    "s" => {
                        merged.s.get_or_insert(f(&value, "s")?);
                    }
                    "cutoff" => {
                        merged.cutoff.get_or_insert(value);
                    }
                    "format" => {
                        merged.format.get_or_insert(value);
                    }
                    "workers" => {
                        let v = value.parse::<usize>().map_err(|_| {
                            Error::InvalidInput(format!("config workers: bad integer '{value}'"))
                        })?;
                        merged.workers.get_or_insert(v);
                    }
                    other => {
                        return Err(Error::InvalidInput(format!("unknown config key '{other}'")))
                    }
                }
            }
        }

        let tag = merged
            .class
            .ok_or_else(|| Error::InvalidInput("missing --class".into()))?;
        let defaults = ClassParams::default();
        let params = ClassParams {
            r0: merged.r0.unwrap_or(defaults.r0),
            r1: merged.r1.unwrap_or(defaults.r1),
            r2: merged.r2.unwrap_or(defaults.r2),
            sigma0: merged.sigma0.unwrap_or(defaults.sigma0),
            sigma2: merged.sigma2.unwrap_or(defaults.sigma2),
        };
        let class = PotentialClass::from_tag_with(&tag, params)?;
        let k = merged.k.unwrap_or(1.0);
        let l = merged.l.unwrap_or(0);

        let radii = match &merged.r_match {
            Some(text) => parse_radii(text)?,
            None => Vec::new(),
        };
        let have_pair = merged.g2.is_some() || merged.s.is_some();
        if !radii.is_empty() && have_pair {
            return Err(Error::InvalidInput(
                "give either --R or the pair --g2/--s, not both".into(),
            ));
        }
        if radii.is_empty() && (merged.g2.is_none() || merged.s.is_none()) {
            return Err(Error::InvalidInput(
                "need either --R or both --g2 and --s".into(),
            ));
        }

        let cutoff = match &merged.cutoff {
            Some(text) => parse_cutoff(text)?,
            None => Cutoff::new(2, 2),
        };
        let format = match &merged.format {
            Some(text) => text.parse()?,
            None => OutputFormat::Json,
        };
        Ok(Settings {
            class,
            k,
            l,
            radii,
            g2: merged.g2,
            stage: merged.s,
            cutoff,
            out: merged.out,
            format,
            workers: merged.workers.unwrap_or(1),
        })
    }
}

/// Resolve the matching solutions a job asks for.
fn solutions(st: &Settings) -> Result<Vec<matching::MatchingSolution>> {
    if !st.radii.is_empty() {
        return st
            .radii
            .iter()
            .map(|&r| solution_for_radius(&st.class, st.k, st.l, r))
            .collect();
    }
    // the (g2, s) direction: the stage fixes the radius; the given coupling
    // must agree with the coupling law there, otherwise the pair is not on
    // the balance curve at this k.
    let stage = st.stage.unwrap();
    let g2 = st.g2.unwrap();
    let sol = solution_for_stage(&st.class, st.k, st.l, stage)?;
    let rel = ((g2 - sol.g2) / sol.g2.abs().max(1e-300)).abs();
    if rel > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "g2 = {g2:.6e} is off the balance curve: stage {stage} requires g2 = {:.6e} (relative gap {rel:.2e})",
            sol.g2
        )));
    }
    Ok(vec![sol])
}

fn emit(st: &Settings, rows: &[SolveReport]) -> Result<()> {
    let text = match st.format {
        OutputFormat::Csv => report::to_csv(rows),
        OutputFormat::Json => report::to_json(rows)?,
    };
    match &st.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_solve(args: &JobArgs) -> Result<()> {
    let st = args.resolve()?;
    info!(
        "solve at k = {}, l = {}, cutoff ({}, {})",
        st.k, st.l, st.cutoff.eps, st.cutoff.tau
    );
    let sols = solutions(&st)?;
    if sols.len() != 1 {
        return Err(Error::InvalidInput(
            "solve takes a single radius; use sweep for a list".into(),
        ));
    }
    let res = series::solve_series(&sols[0], st.cutoff, &SeriesOptions::default())?;
    emit(&st, &[SolveReport::from_result(&res)])
}

fn run_sweep(args: &JobArgs) -> Result<()> {
    let st = args.resolve()?;
    let sols = solutions(&st)?;
    info!(
        "sweep over {} radii with {} workers",
        sols.len(),
        st.workers
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(st.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let rows: Result<Vec<SolveReport>> = pool.install(|| {
        sols.par_iter()
            .map(|sol| {
                let res = series::solve_series(sol, st.cutoff, &SeriesOptions::default())?;
                Ok(SolveReport::from_result(&res))
            })
            .collect()
    });
    emit(&st, &rows?)
}

fn run_oracle(args: &JobArgs) -> Result<()> {
    let st = args.resolve()?;
    let cfg = OracleConfig::default();
    let rows: Result<Vec<SolveReport>> = solutions(&st)?
        .iter()
        .map(|sol| {
            let run = oracle::integrate_regular(sol, &cfg)?;
            Ok(SolveReport::from_parts(
                sol,
                Cutoff::new(0, 0),
                run.phase,
                run.r_far / sol.r_match,
            ))
        })
        .collect();
    emit(&st, &rows?)
}

fn run_verify(args: &VerifyArgs) -> Result<()> {
    let tags: Vec<&str> = match &args.class {
        Some(t) => {
            PotentialClass::from_tag(t)?;
            PotentialClass::all_tags()
                .into_iter()
                .filter(|&x| x == t)
                .collect()
        }
        None => PotentialClass::all_tags().to_vec(),
    };
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("verify: {name:<44} ok");
        } else {
            failures += 1;
            println!("verify: {name:<44} FAIL  {detail}");
        }
    };

    // 1. angular-strength triad identity
    {
        let mut worst = 0.0f64;
        for l in 0..12 {
            let mut t = lambda_triad(l);
            if args.inject_triad_fault {
                t.lambda_sq += 1e-3;
            }
            worst = worst
                .max((t.lambda_eps_sq - t.lambda_sq - 0.125).abs())
                .max((t.lambda_sq - t.lambda_tau_sq - 0.125).abs());
        }
        check(
            "triad split is exactly 1/8",
            worst < 1e-15,
            format!("worst gap {worst:.3e}"),
        );
    }

    // 2. stage <-> radius round trip per class
    {
        let mut worst = 0.0f64;
        for tag in &tags {
            let c = PotentialClass::from_tag(tag)?;
            let triad = lambda_triad(0);
            let s = matching::solve_stage(&c, 1.0, &triad, 4.0)?;
            let r = matching::solve_matching_radius(&c, 1.0, &triad, s)?;
            worst = worst.max((r - 4.0).abs() / 4.0);
        }
        check(
            "stage/radius round trip",
            worst < 1e-9,
            format!("worst gap {worst:.3e}"),
        );
    }

    // 3. both local wave numbers equal 1/(8 R^2) at the matching point
    {
        let mut worst = 0.0f64;
        for tag in &tags {
            let c = PotentialClass::from_tag(tag)?;
            let sol = solution_for_radius(&c, 1.0, 1, 4.0)?;
            let r2 = sol.r_match * sol.r_match;
            for region in [
                crate::localwave::Region::Epsilon,
                crate::localwave::Region::Tau,
            ] {
                let k2 = crate::localwave::k_squared(region, &sol, 1.0)?
                    .linear()
                    .unwrap_or(f64::NAN);
                worst = worst.max((k2 * 8.0 * r2 - 1.0).abs());
            }
        }
        check(
            "matching-point wave numbers",
            worst < 1e-9,
            format!("worst gap {worst:.3e}"),
        );
    }

    // 4. inner basis Wronskian equals -2kR
    {
        let c = PotentialClass::from_tag("EEE")?;
        let sol = solution_for_radius(&c, 1.0, 0, 4.0)?;
        let w = series::wronskian_check_eps(&sol, 0.7)?;
        let gap = (w + 2.0 * sol.k * sol.r_match).abs() / (2.0 * sol.k * sol.r_match);
        check("inner Wronskian", gap < 1e-6, format!("gap {gap:.3e}"));
    }

    // 5. series phase against the direct integrator.  Run at high cutoff so
    // truncation error is out of the picture; the tolerance is still loose
    // (0.1 rad) because this check is about wiring, not grid resolution.
    {
        let c = PotentialClass::from_tag("EEE")?;
        let sol = solution_for_radius(&c, 1.0, 0, 3.0)?;
        let ds = series::phase_shift(&sol, Cutoff::new(10, 10), &SeriesOptions::default())?;
        let dr = oracle::phase_shift_oracle(&sol, &OracleConfig::default())?;
        let gap = (ds.principal - dr.principal).abs();
        check(
            "series vs direct integration",
            gap < 0.1,
            format!("gap {gap:.3e} rad"),
        );
    }

    if failures > 0 {
        return Err(Error::Verification(format!("{failures} check(s) failed")));
    }
    println!("verify: all checks passed");
    Ok(())
}

/// Entry point used by the binary: parse, dispatch, map errors to exit codes.
pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Verify(a) => run_verify(a),
        Command::Oracle(a) => run_oracle(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_parsing() {
        assert_eq!(parse_cutoff("2,3").unwrap(), Cutoff::new(2, 3));
        assert!(parse_cutoff("2").is_err());
        assert!(parse_cutoff("a,b").is_err());
    }

    #[test]
    fn radii_parsing() {
        assert_eq!(parse_radii("2, 5,10").unwrap(), vec![2.0, 5.0, 10.0]);
        assert!(parse_radii("2;5").is_err());
    }

    #[test]
    fn kv_parsing() {
        let text = "# comment\nclass = EEE\nk=1.5\n\nR = 2,5\n";
        let kv = parse_kv(text).unwrap();
        assert_eq!(kv.len(), 3);
        assert_eq!(kv[0], ("class".to_string(), "EEE".to_string()));
        assert!(parse_kv("novalue\n").is_err());
    }

    #[test]
    fn resolve_requires_exactly_one_direction() {
        let mut a = JobArgs {
            class: Some("EEE".into()),
            ..JobArgs::default()
        };
        assert!(a.resolve().is_err()); // neither direction
        a.r_match = Some("2.0".into());
        assert!(a.resolve().is_ok());
        a.g2 = Some(0.1);
        assert!(a.resolve().is_err()); // both directions
    }
}
