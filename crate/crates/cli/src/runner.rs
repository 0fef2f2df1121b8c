//! Task execution and artifact emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use contactlab_core::algebra::{free_growth_table, is_periodic};
use contactlab_core::{
    a_block, abelian_growth_table, bound_check, chi_estimate, displacement_estimate, duality_check,
    flat_shape, lyapunov_estimate, r_sequence, s_value, BoundCheck, DirectionGrid,
    DissipationReport, FlatMetric, FreeAutomorphism, GroupWord, GrowthTable, IntMatrix,
    SamplingGrid, StarDomain,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{square, ConfigEcho, DomainSpec, Experiment, FormSpec, Task, TaskSpec};

pub const REPORT_FILE: &str = "report.json";
pub const DISSIPATION_FILE: &str = "dissipation.json";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Multiplies every grid resolution.
    pub refine: usize,
}

/// A plottable series: `points[i] = (x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskResult {
    pub id: String,
    pub kind: String,
    /// Grids and horizons that produced `result`.
    pub parameters: Value,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub task: String,
    pub kind: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timestamp {
    pub started_unix: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub refine: usize,
    /// Relative change of `r_K` under grid doubling, per `r_sequence` task.
    pub refinement_deltas: BTreeMap<String, f64>,
    /// The only field that differs between repeated runs.
    pub timestamp: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub config: ConfigEcho,
    pub tasks: Vec<TaskResult>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub provenance: Provenance,
}

impl ReportDocument {
    pub fn task(&self, id: &str) -> Option<&TaskResult> {
        self.tasks.iter().find(|t| t.id == id)
    }
}

struct Runner<'a> {
    exp: &'a Experiment,
    refine: usize,
    out: &'a Path,
    rng: ChaCha8Rng,
    dissipation: Option<DissipationReport>,
    lyap_hat: Option<f64>,
    bound: Option<BoundCheck>,
    refinement_deltas: BTreeMap<String, f64>,
    checks: Vec<Check>,
}

/// Runs every task in order, writes the artifacts into `opts.out_dir`, and
/// returns the aggregate report (also written as `report.json`).
pub fn run(exp: &Experiment, opts: &RunOptions) -> Result<ReportDocument> {
    if opts.refine == 0 {
        bail!("refine factor must be positive");
    }
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    fs::create_dir_all(&opts.out_dir)
        .with_context(|| format!("cannot create {}", opts.out_dir.display()))?;
    let mut runner = Runner {
        exp,
        refine: opts.refine,
        out: &opts.out_dir,
        rng: ChaCha8Rng::seed_from_u64(exp.echo.experiment.seed),
        dissipation: None,
        lyap_hat: None,
        bound: None,
        refinement_deltas: BTreeMap::new(),
        checks: Vec::new(),
    };
    let mut tasks = Vec::new();
    for task in &exp.tasks {
        let result = runner
            .run_task(task)
            .with_context(|| format!("task {:?} ({})", task.id, task.spec.kind()))?;
        tasks.push(result);
    }
    if let Some(mut report) = runner.dissipation.take() {
        report.lyap_hat = runner.lyap_hat;
        report.bound_check = runner.bound;
        write_json(&opts.out_dir.join(DISSIPATION_FILE), &report)?;
    }
    let pass = runner.checks.iter().all(|c| c.pass);
    let doc = ReportDocument {
        config: exp.echo.clone(),
        tasks,
        checks: runner.checks,
        pass,
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            refine: opts.refine,
            refinement_deltas: runner.refinement_deltas,
            timestamp: Timestamp {
                started_unix,
                elapsed_ms: started.elapsed().as_millis() as u64,
            },
        },
    };
    write_json(&opts.out_dir.join(REPORT_FILE), &doc)?;
    Ok(doc)
}

pub fn read_report(path: &Path) -> Result<Value> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not a JSON report", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn matrix_rows(m: &IntMatrix) -> Vec<Vec<i64>> {
    m.entries().chunks(m.size()).map(<[i64]>::to_vec).collect()
}

/// Label of the form in dissipation reports: its declaration as compact JSON.
pub fn lambda_id(spec: &FormSpec) -> String {
    serde_json::to_string(spec).unwrap_or_else(|_| "form".into())
}

impl Runner<'_> {
    fn n(&self) -> usize {
        self.exp.dim
    }

    fn dissipation_grid(&self) -> Result<SamplingGrid> {
        let p = self.exp.params();
        let dirs = p
            .directions
            .unwrap_or(SamplingGrid::default_for(self.n()).directions);
        Ok(SamplingGrid::new(p.q_per_axis, dirs)?.refined(self.refine))
    }

    fn direction_grid(&self) -> Result<std::sync::Arc<DirectionGrid>> {
        let p = self.exp.params();
        let res = p
            .shape_directions
            .unwrap_or(if self.n() == 2 { 256 } else { 1024 });
        Ok(DirectionGrid::new(self.n(), res * self.refine)?)
    }

    fn shape_q(&self) -> usize {
        self.exp.params().shape_q_per_axis * self.refine
    }

    /// `A_I` for `n = 2`, `I_f` for `n = 3`.
    fn default_matrix(&self) -> Result<IntMatrix> {
        let i = self.exp.map.homology_action();
        Ok(if self.n() == 2 {
            a_block(i)?.a
        } else {
            i.clone()
        })
    }

    fn matrix_or_default(&self, m: &Option<Vec<i64>>) -> Result<IntMatrix> {
        match m {
            Some(entries) => Ok(square(entries)?),
            None => self.default_matrix(),
        }
    }

    fn sample_classes(&mut self) -> Vec<Vec<i64>> {
        let n = self.n();
        let count = self.exp.params().sample_classes;
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let c: Vec<i64> = (0..n).map(|_| self.rng.random_range(-3..=3)).collect();
            if c.iter().any(|&x| x != 0) {
                out.push(c);
            }
        }
        out
    }

    fn check(&mut self, task: &Task, pass: bool, detail: String) {
        self.checks.push(Check {
            task: task.id.clone(),
            kind: task.spec.kind().into(),
            pass,
            detail,
        });
    }

    fn artifact(&self, name: String) -> (PathBuf, String) {
        (self.out.join(&name), name)
    }

    /// The dissipation sequence on the main grid, computed once per run.
    fn dissipation(&mut self) -> Result<&DissipationReport> {
        if self.dissipation.is_none() {
            let grid = self.dissipation_grid()?;
            let k = self.exp.params().k;
            let r = r_sequence(&self.exp.map, &self.exp.form, k, &grid)?;
            let report = DissipationReport::from_series(
                &self.exp.map.describe(),
                &lambda_id(&self.exp.echo.form),
                grid,
                r,
                self.exp.thresholds(),
            )?;
            self.dissipation = Some(report);
        }
        Ok(self.dissipation.as_ref().expect("set above"))
    }

    fn run_task(&mut self, task: &Task) -> Result<TaskResult> {
        let mut out = TaskResult {
            id: task.id.clone(),
            kind: task.spec.kind().into(),
            parameters: json!({}),
            result: json!({}),
            series: None,
            artifacts: Vec::new(),
        };
        match &task.spec {
            TaskSpec::RSequence { .. } => self.r_sequence_task(task, &mut out)?,
            TaskSpec::Lyapunov { .. } => {
                let p = self.exp.params();
                let k = p.lyap_k.unwrap_or(p.k);
                let grid =
                    SamplingGrid::new(p.lyap_q_per_axis, p.lyap_directions)?.refined(self.refine);
                let lyap = lyapunov_estimate(&self.exp.map, k, &grid)?;
                self.lyap_hat = Some(lyap);
                out.parameters = json!({ "K": k, "grid": grid });
                out.result = json!({ "lyap_hat": lyap });
            }
            TaskSpec::VerifyBound { .. } => {
                let conservative = self.exp.echo.experiment.conservative;
                let th = *self.exp.thresholds();
                let (grid, r) = {
                    let d = self.dissipation()?;
                    (d.grid, d.r_series.clone())
                };
                let b = bound_check(&self.exp.map, &r, &th, conservative)?;
                self.bound = Some(b);
                let pass = b.pass && !b.conservative_contradiction;
                let detail = if b.conservative_contradiction {
                    "declared conservative but classified Hyperbolic".to_string()
                } else {
                    format!(
                        "chi_hat {:.6}, s {:.6}, tol {}",
                        b.chi_hat, b.s_target, b.tol
                    )
                };
                self.check(task, pass, detail);
                out.parameters =
                    json!({ "K": r.len(), "grid": grid, "conservative": conservative });
                out.result = serde_json::to_value(b)?;
            }
            TaskSpec::Homology { .. } => self.homology_task(&mut out)?,
            TaskSpec::Shape { .. } => {
                let grid = self.direction_grid()?;
                let q = self.shape_q();
                let shape = flat_shape(&self.exp.form, &grid, q)?;
                let (path, name) = self.artifact(format!("{}_shape.csv", task.id));
                write_shape_csv(&path, &shape)?;
                let (lo, hi) = min_max(shape.rho());
                out.parameters = json!({ "directions": grid.len(), "q_per_axis": q });
                out.result = json!({ "rho_min": lo, "rho_max": hi, "inner_approximation": true });
                out.artifacts.push(name);
            }
            TaskSpec::Displacement { matrix, domain, .. } => {
                let m = self.matrix_or_default(matrix)?;
                let grid = self.direction_grid()?;
                let a = match domain {
                    DomainSpec::Form => flat_shape(&self.exp.form, &grid, self.shape_q())?,
                    DomainSpec::Ball => StarDomain::ball(grid.clone(), 1.0)?,
                };
                let k = self.exp.params().displacement_k;
                let est = displacement_estimate(&m, &a, k)?;
                let (path, name) = self.artifact(format!("{}.csv", task.id));
                write_csv(
                    &path,
                    &["k", "delta"],
                    est.deltas
                        .iter()
                        .enumerate()
                        .map(|(i, d)| vec![(i + 1).to_string(), d.to_string()]),
                )?;
                out.parameters = json!({
                    "matrix": matrix_rows(&m), "domain": domain, "K": k,
                    "directions": grid.len(), "q_per_axis": self.shape_q(),
                });
                out.result = json!({ "slope": est.slope, "s_value": s_value(&m)? });
                out.series = Some(Series {
                    x: "k".into(),
                    y: "delta".into(),
                    points: enumerate_from(1, &est.deltas),
                });
                out.artifacts.push(name);
            }
            TaskSpec::Growth {
                matrix,
                classes,
                images,
                word,
                ..
            } => self.growth_task(task, &mut out, matrix, classes, images, word)?,
            TaskSpec::Duality {
                metric, classes, ..
            } => {
                let g = match (metric, &self.exp.echo.form) {
                    (Some(g), _) => FlatMetric::new(self.n(), g)?,
                    (None, FormSpec::Metric { g }) => FlatMetric::new(self.n(), g)?,
                    (None, _) => bail!("no metric for the duality check"),
                };
                let classes = match classes {
                    Some(c) => c.clone(),
                    None => self.sample_classes(),
                };
                let grid = self.direction_grid()?;
                let rep = duality_check(&g, &classes, &grid, self.shape_q())?;
                let (path, name) = self.artifact(format!("{}_duality.json", task.id));
                write_json(&path, &rep)?;
                self.check(
                    task,
                    rep.pass,
                    format!("worst margin {:e}", rep.worst_margin),
                );
                out.parameters = json!({
                    "classes": classes, "directions": grid.len(), "q_per_axis": self.shape_q(),
                });
                out.result = serde_json::to_value(&rep)?;
                out.artifacts.push(name);
            }
        }
        Ok(out)
    }

    fn r_sequence_task(&mut self, task: &Task, out: &mut TaskResult) -> Result<()> {
        let d = self.dissipation()?.clone();
        let (path, name) = self.artifact(format!("{}.csv", task.id));
        write_csv(
            &path,
            &["k", "r_k"],
            d.r_series
                .iter()
                .enumerate()
                .map(|(i, r)| vec![(i + 1).to_string(), r.to_string()]),
        )?;
        let est = chi_estimate(&d.r_series)?;
        if self.exp.params().refinement_check {
            let fine = r_sequence(&self.exp.map, &self.exp.form, d.k, &d.grid.refined(2))?;
            let (c, f) = (d.r_series[d.k - 1], fine[d.k - 1]);
            let delta = (f - c).abs() / c.abs().max(1e-9);
            self.refinement_deltas.insert(task.id.clone(), delta);
        }
        out.parameters = json!({ "K": d.k, "grid": d.grid });
        out.result = json!({
            "chi_hat": est.chi_hat,
            "chi_last": est.chi_last,
            "relative_residual": est.relative_residual,
            "verdict": d.verdict,
        });
        out.series = Some(Series {
            x: "k".into(),
            y: "r_k".into(),
            points: enumerate_from(1, &d.r_series),
        });
        out.artifacts.push(name);
        out.artifacts.push(DISSIPATION_FILE.into());
        Ok(())
    }

    fn homology_task(&mut self, out: &mut TaskResult) -> Result<()> {
        let i = self.exp.map.homology_action();
        let (periodic, order) = is_periodic(i)?;
        let mut result = json!({
            "I_f": matrix_rows(i),
            "det": i.det() as i64,
            "is_periodic": periodic,
            "order": order,
            "s_value": s_value(i)?,
        });
        if self.n() == 2 {
            let b = a_block(i)?;
            let (a_periodic, a_order) = is_periodic(&b.a)?;
            result["a_block"] = json!({
                "A_I": matrix_rows(&b.a),
                "l": b.l,
                "m": b.m,
                "fiber_sign": b.fiber_sign,
                "is_periodic": a_periodic,
                "order": a_order,
                "s_value": s_value(&b.a)?,
            });
        }
        out.parameters = json!({ "map": self.exp.map.describe() });
        out.result = result;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn growth_task(
        &mut self,
        task: &Task,
        out: &mut TaskResult,
        matrix: &Option<Vec<i64>>,
        classes: &Option<Vec<Vec<i64>>>,
        images: &Option<Vec<String>>,
        word: &Option<String>,
    ) -> Result<()> {
        let p = self.exp.params().clone();
        let (table, parameters, result) = match (images, word) {
            (Some(images), Some(word)) => {
                let imgs: Vec<&str> = images.iter().map(String::as_str).collect();
                let sigma = FreeAutomorphism::parse(&imgs)?;
                let w: GroupWord = word.parse()?;
                let t = free_growth_table(&sigma, &w, p.growth_steps, p.growth_cap)?;
                let result = json!({ "growth": t.slope.max(0.0), "steps": t.lengths.len() - 1 });
                let parameters = json!({
                    "images": images, "word": word, "N": p.growth_steps, "cap": p.growth_cap,
                });
                (t, parameters, result)
            }
            _ => {
                let m = self.matrix_or_default(matrix)?;
                let classes = match classes {
                    Some(c) => c.clone(),
                    None => self.sample_classes(),
                };
                let mut best: Option<(GrowthTable, usize)> = None;
                let mut slopes = Vec::with_capacity(classes.len());
                for (idx, c) in classes.iter().enumerate() {
                    let t = abelian_growth_table(&m, c, p.growth_steps)?;
                    slopes.push(t.slope);
                    if best.as_ref().is_none_or(|(b, _)| t.slope > b.slope) {
                        best = Some((t, idx));
                    }
                }
                let (t, witness) = best.context("no sample classes")?;
                let result = json!({
                    "bar_s": t.slope.max(0.0),
                    "s_value": s_value(&m)?,
                    "witness": classes[witness],
                    "slopes": slopes,
                });
                let parameters = json!({
                    "matrix": matrix_rows(&m), "classes": classes, "N": p.growth_steps,
                });
                (t, parameters, result)
            }
        };
        let (path, name) = self.artifact(format!("{}.csv", task.id));
        write_csv(
            &path,
            &["n", "length", "log_length"],
            table
                .lengths
                .iter()
                .zip(&table.log_lengths)
                .enumerate()
                .map(|(n, (l, ll))| vec![n.to_string(), l.to_string(), ll.to_string()]),
        )?;
        out.parameters = parameters;
        out.result = result;
        out.series = Some(Series {
            x: "n".into(),
            y: "log_length".into(),
            points: enumerate_from(0, &table.log_lengths),
        });
        out.artifacts.push(name);
        Ok(())
    }
}

fn enumerate_from(first: usize, ys: &[f64]) -> Vec<(f64, f64)> {
    ys.iter()
        .enumerate()
        .map(|(i, &y)| ((i + first) as f64, y))
        .collect()
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

fn write_shape_csv(path: &Path, shape: &StarDomain) -> Result<()> {
    let n = shape.dim();
    let header: Vec<String> = (1..=n)
        .map(|i| format!("u{i}"))
        .chain(["rho".into()])
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        path,
        &header,
        shape
            .rows()
            .map(|row| row.iter().map(f64::to_string).collect()),
    )
}

/// Writes the two-column `x y` file of a task's series.
pub fn emit_plot_data(report: &Value, task_id: &str, path: &Path) -> Result<usize> {
    let tasks = report["tasks"]
        .as_array()
        .context("report has no task list")?;
    let task = tasks
        .iter()
        .find(|t| t["id"] == task_id)
        .with_context(|| format!("report has no task {task_id:?}"))?;
    let Some(series) = task.get("series") else {
        bail!("task {task_id:?} has no series");
    };
    let points = series["points"].as_array().context("malformed series")?;
    let mut text = String::new();
    for p in points {
        let (x, y) = (p[0].as_f64(), p[1].as_f64());
        let (Some(x), Some(y)) = (x, y) else {
            bail!("malformed series point {p}");
        };
        writeln!(text, "{x} {y}")?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(points.len())
}
