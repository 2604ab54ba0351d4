//! Batch front door: scene and problem JSON in, canonical JSON out.
//!
//! Scenes are fixture names (G1, G2, G3, G2L, G2M, G2R) or paths to scene
//! JSON; rationals travel as strings so exactness survives serialization.
//! Exit codes: 0 ok, 1 schema or validation error, 2 resource limit,
//! 3 internal verification failure. Worker count follows RAYON_NUM_THREADS.

use crate::functional::{
    eval_j, eval_j_rlx, eval_j_rlx_minformula, structure_report, StructureVerdict,
};
use crate::hull::{cartesian_hull, has_basic_convexification};
use crate::lp_approx::{gamma_sweep, LpProblem, SweepResult};
use crate::rational::{format_rational, parse_rational, Rat};
use crate::scene::{fixture, AtomSpec, FunctionSpec, LpProblemSpec, Scene, SceneSpec};
use crate::squares::{maximal_squares, Limits, MaximalSquareSet, SquareUnion};
use crate::supremand::Supremand;
use crate::{selftest, Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cartconv", version, about = "Cartesian convexity toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SceneArgs {
    /// Fixture name or path to scene JSON.
    scene: String,
    /// Override the scene norm: linf or l2:k.
    #[arg(long)]
    norm: Option<String>,
    /// Cap on the number of atoms.
    #[arg(long)]
    limit_atoms: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the maximal Cartesian squares of a scene.
    Squares(SceneArgs),
    /// Iterate the Cartesian convexification to its fixpoint.
    Hull {
        #[command(flatten)]
        scene: SceneArgs,
        /// Cap on hull iterations.
        #[arg(long, default_value_t = 16)]
        max_iter: usize,
    },
    /// Test whether one hull step only convexifies existing squares.
    CheckBasic(SceneArgs),
    /// Evaluate the supremand W at a pair of points.
    WEval {
        #[command(flatten)]
        scene: SceneArgs,
        /// First argument, comma-separated rational coordinates.
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        /// Second argument, same format.
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
    },
    /// Evaluate the Cartesian level convex envelope of W at a pair.
    EnvelopeEval {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
        /// Bisection tolerance on the level value.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Evaluate the supremal functional J on a simple function.
    SupremalEval {
        #[command(flatten)]
        scene: SceneArgs,
        /// Path to function JSON (weighted cells).
        #[arg(long)]
        function: String,
    },
    /// Evaluate the relaxation of J, with the three-well closed form
    /// cross-check when it applies.
    RelaxEval {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Per-level basic-convexification verdicts over a level ladder.
    StructureReport {
        #[command(flatten)]
        scene: SceneArgs,
        /// Comma-separated rational levels.
        #[arg(long, default_value = "0,1/8,1/4,1/2,1")]
        levels: String,
    },
    /// Minimize the Lp quadratures along an exponent ladder and compare
    /// against the relaxed reference.
    GammaSweep {
        /// Path to problem JSON.
        problem: String,
        /// Override the problem seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the reference grid resolution per axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Also write the sweep table to this CSV file.
        #[arg(long)]
        csv: Option<String>,
    },
    /// Run the fixture checks and print a pass/fail table.
    Selftest,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Squares(args) => {
            let (e, limits) = scene_union(&args)?;
            let ms = maximal_squares(&e, &limits)?;
            emit(&squares_report(&e, &ms))?;
        }
        Command::Hull { scene, max_iter } => {
            let (e, limits) = scene_union(&scene)?;
            let trace = cartesian_hull(&e, max_iter, &limits)?;
            let stages = trace
                .stages
                .iter()
                .zip(&trace.stage_squares)
                .map(|(stage, ms)| StageOut {
                    atoms: atom_specs(stage.atoms()),
                    squares: square_outs(ms),
                })
                .collect();
            emit(&HullReport {
                dim: e.dim(),
                iterations: trace.iterations,
                productive_steps: trace.productive_steps,
                fixpoint_reached: trace.fixpoint_reached,
                stages,
            })?;
        }
        Command::CheckBasic(args) => {
            let (e, limits) = scene_union(&args)?;
            let cert = has_basic_convexification(&e, &limits)?;
            emit(&BasicReport {
                basic: cert.basic,
                witness: cert.witness.as_ref().map(AtomSpec::from_region),
                input_squares: square_outs(&cert.input_squares),
                stage1_squares: square_outs(&cert.stage1_squares),
            })?;
        }
        Command::WEval { scene, xi, zeta } => {
            let s = scene_supremand(&scene)?;
            let xi = parse_coords(&xi, s.dim())?;
            let zeta = parse_coords(&zeta, s.dim())?;
            emit(&WReport {
                xi: fmt_point(&xi),
                zeta: fmt_point(&zeta),
                q: s.growth_exponent(),
                raw: s.eval_w_raw(&xi, &zeta)?,
                value: s.eval_w(&xi, &zeta)?,
                exact_raw: s.eval_w_raw_exact(&xi, &zeta)?.as_ref().map(format_rational),
            })?;
        }
        Command::EnvelopeEval {
            scene,
            xi,
            zeta,
            tol,
        } => {
            let s = scene_supremand(&scene)?;
            let xi = parse_coords(&xi, s.dim())?;
            let zeta = parse_coords(&zeta, s.dim())?;
            let b = s.eval_envelope(&xi, &zeta, tol)?;
            emit(&EnvelopeReport {
                xi: fmt_point(&xi),
                zeta: fmt_point(&zeta),
                q: s.growth_exponent(),
                tol,
                level: format_rational(&b.value),
                level_f64: b.value_f64(),
                value: b.powered_f64(s.growth_exponent()),
                iterations: b.iterations,
            })?;
        }
        Command::SupremalEval { scene, function } => {
            let s = scene_supremand(&scene)?;
            let u = read_json::<FunctionSpec>(&function)?.build(s.dim())?;
            emit(&SupremalReport {
                q: s.growth_exponent(),
                cells: u.cells().len(),
                mean: fmt_point(&u.mean()),
                value: eval_j(&s, &u)?,
            })?;
        }
        Command::RelaxEval {
            scene,
            function,
            tol,
        } => {
            let s = scene_supremand(&scene)?;
            let u = read_json::<FunctionSpec>(&function)?.build(s.dim())?;
            let j = eval_j(&s, &u)?;
            let b = eval_j_rlx(&s, &u, tol)?;
            let min_formula = if s.wells().len() == 3 {
                let mf = eval_j_rlx_minformula(&s, &u, tol)?;
                Some(MinFormulaOut {
                    well_terms: mf.well_terms,
                    overlap_term: mf.overlap_term,
                    value: mf.value,
                })
            } else {
                None
            };
            emit(&RelaxReport {
                q: s.growth_exponent(),
                tol,
                j,
                level: format_rational(&b.value),
                level_f64: b.value_f64(),
                value: b.powered_f64(s.growth_exponent()),
                iterations: b.iterations,
                min_formula,
            })?;
        }
        Command::StructureReport { scene, levels } => {
            let s = scene_supremand(&scene)?;
            let ladder = parse_levels(&levels)?;
            let report = structure_report(&s, &ladder)?;
            let (verdict, failed_level) = match &report.verdict {
                StructureVerdict::PreservedAtProbedLevels => ("preserved-at-probed-levels", None),
                StructureVerdict::NotPreserved { level } => {
                    ("not-preserved", Some(format_rational(level)))
                }
                StructureVerdict::Inconclusive => ("inconclusive", None),
            };
            emit(&StructureOut {
                verdict: verdict.into(),
                failed_level,
                levels: report
                    .levels
                    .iter()
                    .map(|v| LevelOut {
                        level: format_rational(&v.level),
                        basic: v.basic,
                        witness: v.witness.as_ref().map(AtomSpec::from_region),
                    })
                    .collect(),
            })?;
        }
        Command::GammaSweep {
            problem,
            seed,
            grid,
            csv,
        } => {
            let mut spec = read_json::<LpProblemSpec>(&problem)?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let mut lp = LpProblem::from_spec(&spec)?;
            if let Some(grid) = grid {
                lp.grid_axis_points = grid;
            }
            let sweep = gamma_sweep(&lp)?;
            let table = sweep_csv(&sweep);
            if let Some(path) = csv {
                std::fs::write(&path, &table)
                    .map_err(|e| Error::Invalid(format!("cannot write {path}: {e}")))?;
            }
            emit(&sweep_report(&sweep, table))?;
        }
        Command::Selftest => {
            let checks = selftest::fixture_checks();
            for c in &checks {
                out(&format!(
                    "{} {:<24} {} ({} ms)",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail,
                    c.millis
                ));
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            out(&format!("{passed}/{} passed", checks.len()));
            if passed < checks.len() {
                return Ok(3);
            }
        }
    }
    Ok(0)
}

fn load_scene(args: &SceneArgs) -> Result<Scene> {
    let mut spec: SceneSpec = if matches!(
        args.scene.as_str(),
        "G1" | "G2" | "G3" | "G2L" | "G2M" | "G2R"
    ) {
        fixture(&args.scene)?
    } else {
        read_json(&args.scene)?
    };
    if let Some(norm) = &args.norm {
        spec.norm = norm.clone();
    }
    spec.build()
}

fn limits_of(args: &SceneArgs) -> Limits {
    let mut limits = Limits::default();
    if let Some(n) = args.limit_atoms {
        limits.max_atoms = n;
    }
    limits
}

fn scene_union(args: &SceneArgs) -> Result<(SquareUnion, Limits)> {
    Ok((load_scene(args)?.square_union()?, limits_of(args)))
}

fn scene_supremand(args: &SceneArgs) -> Result<Supremand> {
    Ok(Supremand::from_scene(&load_scene(args)?)?.with_limits(limits_of(args)))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{path}: {e}")))
}

fn parse_coords(s: &str, dim: usize) -> Result<Vec<Rat>> {
    let coords: Vec<String> = s.split(',').map(|c| c.trim().to_string()).collect();
    crate::scene::parse_point(&coords, dim)
}

fn parse_levels(s: &str) -> Result<Vec<Rat>> {
    s.split(',')
        .map(|c| parse_rational(c.trim()).map_err(Error::Invalid))
        .collect()
}

fn fmt_point(p: &[Rat]) -> Vec<String> {
    p.iter().map(format_rational).collect()
}

fn atom_specs(regions: &[crate::geometry::Region]) -> Vec<AtomSpec> {
    regions.iter().map(AtomSpec::from_region).collect()
}

fn square_outs(ms: &MaximalSquareSet) -> Vec<SquareOut> {
    ms.squares
        .iter()
        .zip(&ms.hidden)
        .map(|(b, h)| SquareOut {
            base: AtomSpec::from_region(b),
            hidden: *h,
        })
        .collect()
}

fn squares_report(e: &SquareUnion, ms: &MaximalSquareSet) -> SquaresReport {
    SquaresReport {
        dim: e.dim(),
        total: ms.squares.len(),
        hidden: ms.hidden.iter().filter(|h| **h).count(),
        squares: square_outs(ms),
    }
}

fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("p,min_value,gap,iterations\n");
    for e in &sweep.entries {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.p,
            e.value,
            sweep.reference - e.value,
            e.evals
        ));
    }
    out
}

fn sweep_report(sweep: &SweepResult, csv: String) -> SweepReport {
    SweepReport {
        reference: sweep.reference,
        reference_level: sweep.reference_level,
        grid_reference: sweep.grid_reference,
        monotone_nondecreasing: sweep.monotone_nondecreasing,
        final_gap: sweep.final_gap,
        entries: sweep
            .entries
            .iter()
            .map(|e| RunOut {
                p: e.p,
                value: e.value,
                gap: sweep.reference - e.value,
                constraint_residual: e.constraint_residual,
                evals: e.evals,
                converged: e.converged,
                restart: e.restart,
                norm_q: e.norm_q,
                minimizer: FunctionSpec::from_function(&e.u),
            })
            .collect(),
        csv,
    }
}

fn out(text: &str) {
    use std::io::Write;
    if let Err(e) = writeln!(std::io::stdout(), "{text}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
}

fn emit<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Verification(format!("serialization: {e}")))?;
    out(&text);
    Ok(())
}

#[derive(Serialize)]
struct SquareOut {
    base: AtomSpec,
    hidden: bool,
}

#[derive(Serialize)]
struct SquaresReport {
    dim: usize,
    total: usize,
    hidden: usize,
    squares: Vec<SquareOut>,
}

#[derive(Serialize)]
struct StageOut {
    atoms: Vec<AtomSpec>,
    squares: Vec<SquareOut>,
}

#[derive(Serialize)]
struct HullReport {
    dim: usize,
    iterations: usize,
    productive_steps: usize,
    fixpoint_reached: bool,
    stages: Vec<StageOut>,
}

#[derive(Serialize)]
struct BasicReport {
    basic: bool,
    witness: Option<AtomSpec>,
    input_squares: Vec<SquareOut>,
    stage1_squares: Vec<SquareOut>,
}

#[derive(Serialize)]
struct WReport {
    xi: Vec<String>,
    zeta: Vec<String>,
    q: u32,
    raw: f64,
    value: f64,
    exact_raw: Option<String>,
}

#[derive(Serialize)]
struct EnvelopeReport {
    xi: Vec<String>,
    zeta: Vec<String>,
    q: u32,
    tol: f64,
    level: String,
    level_f64: f64,
    value: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct SupremalReport {
    q: u32,
    cells: usize,
    mean: Vec<String>,
    value: f64,
}

#[derive(Serialize)]
struct MinFormulaOut {
    well_terms: Vec<f64>,
    overlap_term: f64,
    value: f64,
}

#[derive(Serialize)]
struct RelaxReport {
    q: u32,
    tol: f64,
    j: f64,
    level: String,
    level_f64: f64,
    value: f64,
    iterations: usize,
    min_formula: Option<MinFormulaOut>,
}

#[derive(Serialize)]
struct LevelOut {
    level: String,
    basic: bool,
    witness: Option<AtomSpec>,
}

#[derive(Serialize)]
struct StructureOut {
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    failed_level: Option<String>,
    levels: Vec<LevelOut>,
}

#[derive(Serialize)]
struct RunOut {
    p: u32,
    value: f64,
    gap: f64,
    constraint_residual: f64,
    evals: usize,
    converged: bool,
    restart: usize,
    norm_q: f64,
    minimizer: FunctionSpec,
}

#[derive(Serialize)]
struct SweepReport {
    reference: f64,
    reference_level: f64,
    grid_reference: f64,
    monotone_nondecreasing: bool,
    final_gap: f64,
    entries: Vec<RunOut>,
    csv: String,
}
