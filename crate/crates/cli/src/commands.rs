use std::io::Write;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use transs_core::catalog::from_name;
use transs_core::frenet::{classify_curve, default_rank_tol, lorentz_residual};
use transs_core::theorems::{
    c_parallel_check, c_proper_check, check_legendre_trajectory, Bundle, CurveData, TheoremReport, Verdict,
};
use transs_core::trajectory::{diagnostics, legendre_project, random_legendre_direction};
use transs_core::{
    certify, compute_frenet, integrate_trajectory, parse_model, Error, Execution, FrenetApparatus, ManifoldModel,
    Trajectory,
};

use crate::output::{canonical_json, format_float, print, trajectory_csv, write_file, Table};
use crate::{CheckArgs, CliError, FrenetArgs, IntegrateArgs, RunArgs, SweepArgs, TheoremArg, ValidateArgs};

/// Spread below which a curvature counts as constant when labelling curves.
const CONST_TOL: f64 = 1e-6;

type Outcome = Result<bool, CliError>;

fn load_model(source: &str) -> Result<ManifoldModel, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return Ok(parse_model(&text)?);
    }
    Ok(from_name(source)?)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn initial_point(model: &ManifoldModel, x0: &Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
    let x0 = x0.clone().unwrap_or_else(|| vec![0.0; model.dim()]);
    if x0.len() != model.dim() {
        return Err(CliError::Input(format!(
            "--x0 needs {} components, got {}",
            model.dim(),
            x0.len()
        )));
    }
    Ok(x0)
}

fn initial_direction(
    model: &ManifoldModel,
    x0: &[f64],
    v0: &Option<Vec<f64>>,
    legendre: bool,
    seed: u64,
) -> Result<DVector<f64>, CliError> {
    let d = model.dim();
    match v0 {
        Some(v) if v.len() != d => Err(CliError::Input(format!("--v0 needs {d} components, got {}", v.len()))),
        Some(v) => {
            let v = DVector::from_column_slice(v);
            if legendre {
                return Ok(legendre_project(model, x0, &v)?.components);
            }
            let norm = model.frame_at(x0)?.norm(&v);
            if !(norm > 0.0) {
                return Err(CliError::Input("--v0 must be non-zero".into()));
            }
            Ok(v / norm)
        }
        None if legendre => Ok(random_legendre_direction(model, x0, &mut rng(seed))?.components),
        None => {
            let mut r = rng(seed);
            let v = DVector::from_fn(d, |_, _| r.gen_range(-1.0..1.0));
            let norm = model.frame_at(x0)?.norm(&v);
            Ok(v / norm)
        }
    }
}

fn run(model: &ManifoldModel, args: &RunArgs, legendre: bool, seed: u64) -> Result<Trajectory, CliError> {
    if !args.q.is_finite() {
        return Err(CliError::Input("q must be finite".into()));
    }
    let x0 = initial_point(model, &args.x0)?;
    let v0 = initial_direction(model, &x0, &args.v0, legendre, seed)?;
    Ok(integrate_trajectory(model, &x0, &v0, args.q, args.t_end, args.h)?)
}

fn check_tol(name: &str, tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{name} must be positive")))
    }
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    seed: u64,
    passed: bool,
    report: &'a transs_core::StructureReport,
}

pub(crate) fn validate(args: &ValidateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    check_tol("--tol", args.tol)?;
    if args.points == 0 {
        return Err(CliError::Input("--points must be at least 1".into()));
    }
    let model = load_model(&args.model)?;
    let mut r = rng(args.common.seed);
    let points: Vec<Vec<f64>> = (0..args.points).map(|_| model.domain.sample(&mut r, 0.9)).collect();
    let report = certify(&model, &points, args.tol, Execution::default())?;
    let passed = report.all_passed();
    let out = ValidateOutput {
        seed: args.common.seed,
        passed,
        report: &report,
    };
    write_file(&args.common.out.join("validate.json"), canonical_json(&out)?.as_bytes())?;
    print(stdout, &format!("model: {}\n{}", model.name, report.table()));
    match report.first_failure() {
        None => print(stdout, "certified\n"),
        Some(a) => print(
            stderr,
            &format!("certification failed on `{}` (residual {:e})\n", a.axiom, a.residual),
        ),
    }
    Ok(passed)
}

fn diagnostics_csv(model: &ManifoldModel, traj: &Trajectory) -> Result<(Vec<u8>, f64, f64), CliError> {
    let table = diagnostics(model, traj)?;
    let s = model.s;
    let header: Vec<String> = ["t".to_string(), "speed".to_string()]
        .into_iter()
        .chain((1..=s).map(|i| format!("eta{i}")))
        .chain((1..=s).map(|i| format!("theta{i}")))
        .collect();
    let mut csv = Table::new(&header)?;
    for k in 0..table.times.len() {
        csv.floats(
            [table.times[k], table.speed[k]]
                .into_iter()
                .chain(table.eta[k].iter().copied())
                .chain(table.contact_angle[k].iter().copied()),
        )?;
    }
    Ok((csv.finish()?, table.speed_drift, table.legendre_defect))
}

#[derive(Serialize)]
struct IntegrateOutput<'a> {
    model: &'a str,
    seed: u64,
    q: f64,
    h: f64,
    t_end: f64,
    legendre: bool,
    x0: Vec<f64>,
    v0: Vec<f64>,
    samples: usize,
    speed_drift: f64,
    legendre_defect: f64,
    left_domain_at: Option<f64>,
}

pub(crate) fn integrate(args: &IntegrateArgs, stdout: &mut dyn Write) -> Outcome {
    let model = load_model(&args.model)?;
    let (traj, left_at) = match run(&model, &args.run, args.legendre, args.common.seed) {
        Ok(t) => (t, None),
        Err(CliError::Core(Error::LeftDomain { t, partial })) => (*partial, Some(t)),
        Err(e) => return Err(e),
    };
    let dir = &args.common.out;
    write_file(&dir.join("trajectory.csv"), &trajectory_csv(&traj)?)?;
    let (diag, drift, defect) = diagnostics_csv(&model, &traj)?;
    write_file(&dir.join("diagnostics.csv"), &diag)?;
    let summary = IntegrateOutput {
        model: &model.name,
        seed: args.common.seed,
        q: args.run.q,
        h: args.run.h,
        t_end: args.run.t_end,
        legendre: args.legendre,
        x0: traj.positions[0].iter().copied().collect(),
        v0: traj.velocities[0].iter().copied().collect(),
        samples: traj.len(),
        speed_drift: drift,
        legendre_defect: defect,
        left_domain_at: left_at,
    };
    write_file(&dir.join("run.json"), canonical_json(&summary)?.as_bytes())?;
    print(
        stdout,
        &format!(
            "{} samples, speed drift {drift:.3e}, Legendre defect {defect:.3e}\n",
            traj.len()
        ),
    );
    match left_at {
        Some(t) => Err(CliError::LeftDomain(t)),
        None => Ok(true),
    }
}

fn apparatus_csv(app: &FrenetApparatus) -> Result<Vec<u8>, CliError> {
    let r = app.order;
    let d = app.frames[0].first().map_or(0, |v| v.len());
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..r).map(|j| format!("kappa_{j}")))
        .chain((1..=r).flat_map(|j| (1..=d).map(move |k| format!("E{j}_{k}"))))
        .collect();
    let mut csv = Table::new(&header)?;
    for t in 0..app.len() {
        csv.floats(
            std::iter::once(app.times[t])
                .chain(app.curvatures.iter().map(|k| k[t]))
                .chain(app.frames.iter().flat_map(|f| f[t].iter().copied())),
        )?;
    }
    csv.finish()
}

fn window_mean(app: &FrenetApparatus, j: usize) -> f64 {
    let w = app.interior();
    let n = w.len().max(1) as f64;
    w.map(|t| app.curvature(j, t)).sum::<f64>() / n
}

#[derive(Serialize)]
struct FrenetOutput {
    order: usize,
    classification: String,
    rank_tol: f64,
    stride: usize,
    margin: usize,
    gram_defect: f64,
    max_frenet_residual: f64,
    max_lorentz_residual: Option<f64>,
    mean_curvatures: Vec<f64>,
}

pub(crate) fn frenet(args: &FrenetArgs, stdout: &mut dyn Write) -> Outcome {
    let model = load_model(&args.model)?;
    let q = args.q.unwrap_or(0.0);
    let traj = crate::output::read_trajectory_csv(&args.trajectory, &model.name, q)?;
    if traj.dim() != model.dim() {
        return Err(CliError::Input(format!(
            "trajectory has dimension {}, model {}",
            traj.dim(),
            model.dim()
        )));
    }
    let rank_tol = args.rank_tol.unwrap_or_else(|| default_rank_tol(q));
    check_tol("--rank-tol", rank_tol)?;
    let app = compute_frenet(&model, &traj, rank_tol)?;
    let class = classify_curve(&app, CONST_TOL);
    let lorentz = match args.q {
        Some(q) => {
            let res = lorentz_residual(&model, &app, q, &traj)?;
            Some(app.interior().map(|t| res[t]).fold(0.0, f64::max))
        }
        None => None,
    };
    let summary = FrenetOutput {
        order: app.order,
        classification: class.to_string(),
        rank_tol,
        stride: app.stride,
        margin: app.margin,
        gram_defect: app.gram_defect,
        max_frenet_residual: app.max_residual(),
        max_lorentz_residual: lorentz,
        mean_curvatures: (1..app.order).map(|j| window_mean(&app, j)).collect(),
    };
    let dir = &args.common.out;
    write_file(&dir.join("apparatus.csv"), &apparatus_csv(&app)?)?;
    write_file(&dir.join("frenet.json"), canonical_json(&summary)?.as_bytes())?;
    let kappas: Vec<String> = summary
        .mean_curvatures
        .iter()
        .enumerate()
        .map(|(j, k)| format!("kappa_{} = {k:.6}", j + 1))
        .collect();
    print(
        stdout,
        &format!("order {} ({class}); {}\n", app.order, kappas.join(", ")),
    );
    Ok(true)
}

fn theorems_for(which: TheoremArg) -> Vec<TheoremArg> {
    use TheoremArg::*;
    match which {
        All => vec![Classification, CParallelT, CParallelN, CProperT, CProperN],
        one => vec![one],
    }
}

fn run_theorem(data: &CurveData, which: TheoremArg, q: f64, tol: f64) -> Result<TheoremReport, CliError> {
    let report = match which {
        TheoremArg::Classification => check_legendre_trajectory(data, q, tol),
        TheoremArg::CParallelT => c_parallel_check(data, Bundle::Tangent, tol),
        TheoremArg::CParallelN => c_parallel_check(data, Bundle::Normal, tol),
        TheoremArg::CProperT => c_proper_check(data, Bundle::Tangent, tol),
        TheoremArg::CProperN => c_proper_check(data, Bundle::Normal, tol),
        TheoremArg::All => unreachable!("expanded by theorems_for"),
    };
    Ok(report?)
}

fn verdict_line(report: &TheoremReport) -> String {
    let mut line = format!("{}: {}", report.theorem, report.verdict);
    if let Some(note) = report.notes.iter().find(|n| n.starts_with("nonexistence confirmed")) {
        line.push_str(" - ");
        line.push_str(note);
    }
    line.push('\n');
    line
}

fn status(verdict: &Verdict) -> &'static str {
    match verdict {
        Verdict::Holds => "holds",
        Verdict::Fails { .. } => "fails",
        Verdict::NotApplicable { .. } => "not-applicable",
    }
}

struct Analysis {
    data: CurveData,
    apparatus: FrenetApparatus,
}

fn analyse(model: &ManifoldModel, run_args: &RunArgs, rank_tol: Option<f64>, seed: u64) -> Result<Analysis, CliError> {
    let traj = run(model, run_args, true, seed)?;
    let rank_tol = rank_tol.unwrap_or_else(|| default_rank_tol(run_args.q));
    check_tol("--rank-tol", rank_tol)?;
    let apparatus = compute_frenet(model, &traj, rank_tol)?;
    let data = CurveData::from_curve(model, &traj, &apparatus)?;
    Ok(Analysis { data, apparatus })
}

#[derive(Serialize)]
struct CheckOutput {
    model: String,
    seed: u64,
    q: f64,
    h: f64,
    t_end: f64,
    tol: f64,
    order: usize,
    classification: String,
    all_hold: bool,
    reports: Vec<TheoremReport>,
}

pub(crate) fn check(args: &CheckArgs, stdout: &mut dyn Write) -> Outcome {
    check_tol("--tol", args.tol)?;
    let model = load_model(&args.model)?;
    let a = analyse(&model, &args.run, args.rank_tol, args.common.seed)?;
    let mut reports = theorems_for(args.theorem)
        .into_iter()
        .map(|t| run_theorem(&a.data, t, args.run.q, args.tol))
        .collect::<Result<Vec<_>, _>>()?;
    let all_hold = reports.iter().all(|r| r.holds());
    for r in &reports {
        print(stdout, &verdict_line(r));
    }
    if !args.series {
        for r in &mut reports {
            r.functions.clear();
        }
    }
    let out = CheckOutput {
        model: model.name.clone(),
        seed: args.common.seed,
        q: args.run.q,
        h: args.run.h,
        t_end: args.run.t_end,
        tol: args.tol,
        order: a.apparatus.order,
        classification: classify_curve(&a.apparatus, CONST_TOL).to_string(),
        all_hold,
        reports,
    };
    write_file(&args.common.out.join("report.json"), canonical_json(&out)?.as_bytes())?;
    Ok(all_hold)
}

const SWEEP_THEOREMS: [(TheoremArg, &str); 5] = [
    (TheoremArg::Classification, "classification"),
    (TheoremArg::CParallelT, "cparallel_t"),
    (TheoremArg::CParallelN, "cparallel_n"),
    (TheoremArg::CProperT, "cproper_t"),
    (TheoremArg::CProperN, "cproper_n"),
];

fn sweep_row(model: &ManifoldModel, args: &SweepArgs, q: f64) -> Result<Vec<String>, CliError> {
    let run_args = RunArgs {
        q,
        t_end: args.t_end,
        h: args.h,
        x0: None,
        v0: None,
    };
    let a = analyse(model, &run_args, None, args.common.seed)?;
    let mut row = vec![a.apparatus.order.to_string()];
    row.extend((1..=3).map(|j| format_float(window_mean(&a.apparatus, j))));
    let mut delta = String::new();
    let mut verdicts = Vec::new();
    for (which, _) in SWEEP_THEOREMS {
        let report = run_theorem(&a.data, which, q, args.tol)?;
        if let Some(d) = report.scalars.get("delta") {
            delta = format_float(*d);
        }
        verdicts.push(status(&report.verdict).to_string());
    }
    row.push(delta);
    row.extend(verdicts);
    row.push(String::new());
    Ok(row)
}

/// Verdicts are reported, not enforced: sweep is a non-checking command.
pub(crate) fn sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Outcome {
    check_tol("--tol", args.tol)?;
    let model = load_model(&args.model)?;
    let rows = Execution::default().map(&args.q_list, |&q| sweep_row(&model, args, q));
    let header: Vec<String> = ["q", "seed", "order", "kappa_1", "kappa_2", "kappa_3", "delta"]
        .into_iter()
        .chain(SWEEP_THEOREMS.iter().map(|(_, name)| *name))
        .chain(["error"])
        .map(String::from)
        .collect();
    let width = header.len();
    let mut csv = Table::new(&header)?;
    for (q, row) in args.q_list.iter().zip(rows) {
        let mut fields = vec![format_float(*q), args.common.seed.to_string()];
        match row {
            Ok(r) => fields.extend(r),
            Err(e) => {
                fields.resize(width - 1, String::new());
                fields.push(e.to_string());
                print(stdout, &format!("q = {q}: {e}\n"));
            }
        }
        csv.row(fields)?;
    }
    write_file(&args.common.out.join("sweep.csv"), &csv.finish()?)?;
    print(
        stdout,
        &format!("{} strengths written to sweep.csv\n", args.q_list.len()),
    );
    Ok(true)
}
