//! `lap`: evaluate, optimize and verify lookahead auctions with pooling from the shell.
//!
//! Every command prints one JSON document to stdout. Exit status is 0 on success,
//! 1 when a verification fails and 2 on usage or configuration errors.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lap_core::exante::{lemma1_mechanism, LemmaOneReport, TwoStageLap};
use lap_core::io::{load_instance, write_outcomes_csv};
use lap_core::mech::{
    expected_revenue, AuctionInstance, FirstPrice, Lap, Lookahead, Mechanism, Myerson, PoolSchedule,
};
use lap_core::scenarios::{
    build_correlated, build_example1, correlated_opt_benchmark, correlated_opt_continuum,
    gen_corpus, two_point_iid, CorpusSpec,
};
use lap_core::verify::{
    best_lap, check_dsic_ir, grid_check_47, optimal_dsic_lp, search_lap, DeviationReport,
    GridCheckReport, ScheduleFamily, SearchResult, FOUR_SEVENTHS,
};

#[derive(Parser, Debug)]
#[command(
    name = "lap",
    version,
    about = "Lookahead auctions with pooling over discrete priors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected revenue of one mechanism; `--out` writes per-profile outcomes as CSV.
    Eval(MechArgs),
    /// Optimal DSIC revenue (LP), Myerson's revenue and the lookahead auction's revenue.
    Opt(InstanceArgs),
    /// The ex-ante relaxation and the three candidate pooling auctions for two bidders.
    Exante(InstanceArgs),
    /// Search for profitable deviations and IR violations.
    CheckDsic(MechArgs),
    /// Best non-adaptive pooling schedule with at most `--jumps` jumps.
    SearchLap(SearchArgs),
    /// Reproduce a built-in experiment.
    Repro(ReproArgs),
}

#[derive(clap::Args, Debug)]
struct InstanceArgs {
    /// Instance file, or one of `example1`, `two-point-iid`, `correlated`.
    #[arg(long)]
    instance: String,
    #[command(flatten)]
    params: Params,
}

#[derive(clap::Args, Debug)]
struct MechArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, value_enum, default_value_t = MechKind::La)]
    mech: MechKind,
    /// Pool schedule such as `[1,100],[120,150]`; defaults to the instance file's schedule.
    #[arg(long)]
    schedule: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, default_value_t = 2)]
    jumps: usize,
}

#[derive(clap::Args, Debug)]
struct ReproArgs {
    scenario: Scenario,
    #[command(flatten)]
    params: Params,
    #[arg(long, default_value_t = 0.02)]
    grid_step: f64,
    #[arg(long, default_value_t = 20.0)]
    rmax: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    corpus_size: usize,
    /// Jump budget for schedule searches (default 1 for example1, 2 for corpus and two-point-iid, 3 for correlated).
    #[arg(long)]
    jumps: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
struct Params {
    /// `example1` perturbation, or the decoding perturbation of the correlated instance.
    #[arg(long)]
    eps: Option<f64>,
    /// Correlated instance: bidder-1 grid parameter. Comma-separated values give a ladder.
    #[arg(long, value_delimiter = ',')]
    eps1: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    eps2: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum MechKind {
    La,
    Lap,
    Myerson,
    TwoStage,
    /// Pay-your-bid; not truthful, useful as a negative control for `check-dsic`.
    FirstPrice,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Scenario {
    Example1,
    TwoPointIid,
    Correlated,
    #[value(name = "grid-47")]
    Grid47,
    Corpus,
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<lap_core::Error> for Failure {
    fn from(e: lap_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Run = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Eval(a) => eval(&a),
        Command::Opt(a) => opt(&a),
        Command::Exante(a) => exante(&a),
        Command::CheckDsic(a) => dsic(&a),
        Command::SearchLap(a) => search(&a),
        Command::Repro(a) => repro(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(value: &impl Serialize) -> Run {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Usage(e.to_string())),
        _ => Ok(()),
    }
}

fn create(path: &PathBuf) -> Result<File, Failure> {
    File::create(path).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn eps1_single(p: &Params) -> Result<f64, Failure> {
    match p.eps1.as_slice() {
        [] => Ok(0.02),
        [e] => Ok(*e),
        _ => Err(Failure::Usage("--eps1 takes a single value here".into())),
    }
}

/// Resolves `--instance` to an instance and the schedule stored alongside it, if any.
fn load(a: &InstanceArgs) -> Result<(AuctionInstance, Option<PoolSchedule>), Failure> {
    match a.instance.as_str() {
        "example1" => Ok((build_example1(a.params.eps.unwrap_or(0.01))?, None)),
        "two-point-iid" => Ok((two_point_iid(), None)),
        "correlated" => {
            let c = build_correlated(eps1_single(&a.params)?, a.params.eps2, a.params.eps)?;
            Ok((c.instance, None))
        }
        "grid-47" => Err(Failure::Usage(
            "grid-47 is not an instance; try `lap repro grid-47`".into(),
        )),
        path => {
            let file = load_instance(path.as_ref())?;
            Ok((file.to_instance()?, file.pool_schedule))
        }
    }
}

fn build_mech<'a>(
    inst: &'a AuctionInstance,
    kind: MechKind,
    schedule: Option<&str>,
    stored: Option<PoolSchedule>,
) -> Result<Box<dyn Mechanism + 'a>, Failure> {
    Ok(match kind {
        MechKind::La => Box::new(Lookahead::new(inst)),
        MechKind::Myerson => Box::new(Myerson::new(inst)?),
        MechKind::TwoStage => Box::new(TwoStageLap::new(inst)?),
        MechKind::FirstPrice => Box::new(FirstPrice),
        MechKind::Lap => {
            let schedule = match (schedule, stored) {
                (Some(s), _) => s.parse()?,
                (None, Some(s)) => s,
                (None, None) => return Err(Failure::Usage("--mech lap needs --schedule".into())),
            };
            Box::new(Lap::new(inst, schedule))
        }
    })
}

#[derive(Serialize)]
struct EvalSummary {
    mechanism: String,
    bidders: usize,
    profiles: usize,
    revenue: f64,
}

fn eval(a: &MechArgs) -> Run {
    let (inst, stored) = load(&a.inst)?;
    let mech = build_mech(&inst, a.mech, a.schedule.as_deref(), stored)?;
    if let Some(path) = &a.out {
        write_outcomes_csv(create(path)?, &inst, &mech)?;
    }
    emit(&EvalSummary {
        mechanism: mech.name(),
        bidders: inst.bidders(),
        profiles: inst.profile_count(),
        revenue: expected_revenue(&inst, &mech),
    })
}

#[derive(Serialize)]
struct OptSummary {
    lp: Option<f64>,
    lp_error: Option<String>,
    myerson: Option<f64>,
    la: f64,
}

fn opt(a: &InstanceArgs) -> Run {
    let (inst, _) = load(a)?;
    let (lp, lp_error) = match optimal_dsic_lp(&inst) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let myerson = if inst.is_independent() {
        Some(expected_revenue(&inst, &Myerson::new(&inst)?))
    } else {
        None
    };
    emit(&OptSummary {
        lp,
        lp_error,
        myerson,
        la: expected_revenue(&inst, &Lookahead::new(&inst)),
    })
}

#[derive(Serialize)]
struct ExanteSummary {
    v: f64,
    #[serde(flatten)]
    report: LemmaOneReport,
    /// Revenue of the chosen pooling auction, evaluated by enumeration.
    evaluated: f64,
}

fn exante(a: &InstanceArgs) -> Run {
    let (inst, _) = load(a)?;
    if inst.bidders() != 2 {
        return Err(Failure::Usage(format!(
            "exante needs two bidders, got {}",
            inst.bidders()
        )));
    }
    let d = inst.marginals()?;
    let v = d[0].min_value().min(d[1].min_value());
    let l = lemma1_mechanism(&d[0], &d[1], v)?;
    let evaluated = expected_revenue(&l.instance, &l.mechanism());
    emit(&ExanteSummary {
        v,
        report: l.report,
        evaluated,
    })
}

#[derive(Serialize)]
struct DsicSummary {
    mechanism: String,
    #[serde(flatten)]
    report: DeviationReport,
}

fn dsic(a: &MechArgs) -> Run {
    let (inst, stored) = load(&a.inst)?;
    let mech = build_mech(&inst, a.mech, a.schedule.as_deref(), stored)?;
    let report = check_dsic_ir(&inst, &mech);
    let passed = report.passed;
    emit(&DsicSummary {
        mechanism: mech.name(),
        report,
    })?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[derive(Serialize)]
struct SearchSummary {
    #[serde(flatten)]
    result: SearchResult,
    two_stage: Option<f64>,
    lp: Option<f64>,
    ratio: Option<f64>,
}

fn search(a: &SearchArgs) -> Run {
    let (inst, _) = load(&a.inst)?;
    let result = search_lap(&inst, &ScheduleFamily::exhaustive(&inst, a.jumps));
    let two_stage = if inst.is_independent() {
        Some(expected_revenue(&inst, &TwoStageLap::new(&inst)?))
    } else {
        None
    };
    let lp = optimal_dsic_lp(&inst).ok();
    let best = two_stage.map_or(result.revenue, |t| t.max(result.revenue));
    emit(&SearchSummary {
        ratio: lp.map(|lp| best / lp),
        result,
        two_stage,
        lp,
    })
}

/// One row of a parameter sweep.
#[derive(Serialize, Clone)]
struct SweepRow {
    parameter: f64,
    opt: f64,
    best_lap: f64,
    ratio: f64,
}

fn write_sweep(path: &Option<PathBuf>, rows: &[SweepRow]) -> Run {
    let Some(path) = path else { return Ok(()) };
    let mut w = csv::Writer::from_writer(create(path)?);
    let fail = |e: csv::Error| Failure::Usage(e.to_string());
    for r in rows {
        w.serialize(r).map_err(fail)?;
    }
    w.flush().map_err(|e| Failure::Usage(e.to_string()))
}

fn repro(a: &ReproArgs) -> Run {
    match a.scenario {
        Scenario::Example1 => repro_example1(a),
        Scenario::TwoPointIid => repro_two_point(a),
        Scenario::Correlated => repro_correlated(a),
        Scenario::Grid47 => repro_grid(a),
        Scenario::Corpus => repro_corpus(a),
    }
}

#[derive(Serialize)]
struct Example1Summary {
    eps: f64,
    la: f64,
    lap: f64,
    lap_schedule: PoolSchedule,
    opt: f64,
    la_formula: f64,
    lap_formula: f64,
    ratios: Ratios,
}

#[derive(Serialize)]
struct Ratios {
    la: f64,
    lap: f64,
}

fn repro_example1(a: &ReproArgs) -> Run {
    let eps = a.params.eps.unwrap_or(0.01);
    let inst = build_example1(eps)?;
    let la = expected_revenue(&inst, &Lookahead::new(&inst));
    let best = search_lap(
        &inst,
        &ScheduleFamily::exhaustive(&inst, a.jumps.unwrap_or(1)),
    );
    let opt = optimal_dsic_lp(&inst)?;
    let row = SweepRow {
        parameter: eps,
        opt,
        best_lap: best.revenue,
        ratio: best.revenue / opt,
    };
    write_sweep(&a.out, &[row])?;
    emit(&Example1Summary {
        eps,
        la,
        lap: best.revenue,
        lap_schedule: best.schedule,
        opt,
        la_formula: 1.0 + eps,
        lap_formula: 1.5 - eps / 2.0,
        ratios: Ratios {
            la: la / opt,
            lap: best.revenue / opt,
        },
    })
}

#[derive(Serialize)]
struct TwoPointSummary {
    la: f64,
    myerson: f64,
    opt: f64,
    best_lap: lap_core::verify::BestLap,
}

fn repro_two_point(a: &ReproArgs) -> Run {
    let inst = two_point_iid();
    let best = best_lap(&inst, a.jumps.unwrap_or(2))?;
    let opt = optimal_dsic_lp(&inst)?;
    write_sweep(
        &a.out,
        &[SweepRow {
            parameter: 0.0,
            opt,
            best_lap: best.revenue,
            ratio: best.revenue / opt,
        }],
    )?;
    emit(&TwoPointSummary {
        la: expected_revenue(&inst, &Lookahead::new(&inst)),
        myerson: expected_revenue(&inst, &Myerson::new(&inst)?),
        opt,
        best_lap: best,
    })
}

#[derive(Serialize)]
struct CorrelatedRow {
    eps1: f64,
    eps2: f64,
    eps: f64,
    profiles: usize,
    decoder_failures: usize,
    opt: f64,
    continuum: f64,
    la: f64,
    best_lap: f64,
    schedule: PoolSchedule,
    ratio: f64,
}

#[derive(Serialize)]
struct CorrelatedSummary {
    rows: Vec<CorrelatedRow>,
    non_increasing: bool,
    decoder_exact: bool,
}

fn repro_correlated(a: &ReproArgs) -> Run {
    let ladder = if a.params.eps1.is_empty() {
        vec![0.1, 0.02]
    } else {
        a.params.eps1.clone()
    };
    let jumps = a.jumps.unwrap_or(3);
    let mut rows = Vec::new();
    for &eps1 in &ladder {
        let c = build_correlated(eps1, a.params.eps2, a.params.eps)?;
        let opt = correlated_opt_benchmark(&c);
        let lap = search_lap(&c.instance, &ScheduleFamily::new(c.v1_support(), jumps));
        rows.push(CorrelatedRow {
            eps1,
            eps2: c.eps2,
            eps: c.eps,
            profiles: c.instance.profile_count(),
            decoder_failures: c.decoder_failures(),
            opt,
            continuum: correlated_opt_continuum(eps1, c.eps2),
            la: lap.la_revenue,
            best_lap: lap.revenue,
            schedule: lap.schedule,
            ratio: lap.revenue / opt,
        });
    }
    let sweep: Vec<SweepRow> = rows
        .iter()
        .map(|r| SweepRow {
            parameter: r.eps1,
            opt: r.opt,
            best_lap: r.best_lap,
            ratio: r.ratio,
        })
        .collect();
    write_sweep(&a.out, &sweep)?;
    let decoder_exact = rows.iter().all(|r| r.decoder_failures == 0);
    let summary = CorrelatedSummary {
        non_increasing: rows.windows(2).all(|w| w[1].ratio <= w[0].ratio + 1e-12),
        decoder_exact,
        rows,
    };
    emit(&summary)?;
    if decoder_exact {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn repro_grid(a: &ReproArgs) -> Run {
    if !(a.grid_step > 0.0 && a.grid_step <= 0.1) {
        return Err(Failure::Usage("--grid-step must lie in (0, 0.1]".into()));
    }
    if !(a.rmax >= 2.0) || !a.rmax.is_finite() {
        return Err(Failure::Usage(
            "--rmax must be a finite number of at least 2".into(),
        ));
    }
    let report: GridCheckReport = grid_check_47(a.grid_step, a.rmax);
    let passed = report.passed;
    emit(&report)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[derive(Serialize)]
struct CorpusSummary {
    seed: u64,
    corpus_size: usize,
    jumps: usize,
    min_ratio: f64,
    argmin_seed: Option<u64>,
    bound: f64,
    passed: bool,
}

fn repro_corpus(a: &ReproArgs) -> Run {
    let jumps = a.jumps.unwrap_or(2);
    let mut rows = Vec::new();
    let mut min = (f64::INFINITY, None);
    for e in gen_corpus(a.seed, a.corpus_size, CorpusSpec::default()) {
        let opt = optimal_dsic_lp(&e.instance)?;
        let best = best_lap(&e.instance, jumps)?.revenue;
        let ratio = best / opt;
        if ratio < min.0 {
            min = (ratio, Some(e.seed));
        }
        rows.push(SweepRow {
            parameter: e.seed as f64,
            opt,
            best_lap: best,
            ratio,
        });
    }
    write_sweep(&a.out, &rows)?;
    let passed = min.0 >= FOUR_SEVENTHS - 1e-9;
    emit(&CorpusSummary {
        seed: a.seed,
        corpus_size: a.corpus_size,
        jumps,
        min_ratio: if rows.is_empty() { 1.0 } else { min.0 },
        argmin_seed: min.1,
        bound: FOUR_SEVENTHS,
        passed,
    })?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
