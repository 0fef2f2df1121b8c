//! Experiment configuration: TOML schema, parsing, and validation.
//!
//! Validation collects every problem it finds instead of stopping at the
//! first one, so a broken config is reported in a single pass.

use std::fmt;
use std::path::Path;

use contactlab_core::{
    ContactForm, ContactMap, FlatMetric, FreeAutomorphism, GroupWord, Hamiltonian, IntMatrix,
    Primitive, Thresholds, Wave,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Contact form declaration, `[form]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FormSpec {
    Round,
    Constant {
        value: f64,
    },
    /// `offset + sum amp cos(2 pi <q_freq, q>)`.
    Cosine {
        #[serde(default = "one")]
        offset: f64,
        terms: Vec<TermSpec>,
    },
    /// Like `cosine`, with optional direction weights and phases.
    Trigonometric {
        #[serde(default = "one")]
        offset: f64,
        waves: Vec<WaveSpec>,
    },
    /// Codisk form of a flat metric, `g` row-major.
    Metric {
        g: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub amp: f64,
    pub q_freq: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub amp: f64,
    pub q_freq: Vec<i64>,
    #[serde(default)]
    pub dir: Option<Vec<f64>>,
    #[serde(default)]
    pub phase: f64,
}

/// One `[[map]]` entry; the composite applies them in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimitiveSpec {
    /// Row-major integer matrix `M`.
    CanonicalLift {
        matrix: Vec<i64>,
    },
    ShearA {
        #[serde(default)]
        inverted: bool,
    },
    ShearB {
        #[serde(default)]
        inverted: bool,
    },
    Reeb {
        t: f64,
    },
    Flow {
        hamiltonian: HamiltonianSpec,
        t: f64,
        #[serde(default)]
        steps: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    Metric {
        g: Vec<f64>,
    },
    Conformal {
        amp: f64,
        q_freq: Vec<i64>,
        #[serde(default)]
        phase: f64,
    },
    Translation {
        w: Vec<f64>,
    },
    Twist {
        amp: f64,
        i: usize,
        j: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    /// The flat shape of the experiment's form.
    Form,
    /// The unit ball.
    Ball,
}

/// One `[[task]]` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    RSequence {
        #[serde(default)]
        id: Option<String>,
    },
    Lyapunov {
        #[serde(default)]
        id: Option<String>,
    },
    Homology {
        #[serde(default)]
        id: Option<String>,
    },
    Shape {
        #[serde(default)]
        id: Option<String>,
    },
    Displacement {
        #[serde(default)]
        id: Option<String>,
        /// Defaults to `A_I` (`n = 2`) or `I_f` (`n = 3`).
        #[serde(default)]
        matrix: Option<Vec<i64>>,
        #[serde(default = "default_domain")]
        domain: DomainSpec,
    },
    /// Abelian growth of `matrix` (default as for `displacement`), or free
    /// group growth when `images` is given.
    Growth {
        #[serde(default)]
        id: Option<String>,
        #[serde(default)]
        matrix: Option<Vec<i64>>,
        #[serde(default)]
        classes: Option<Vec<Vec<i64>>>,
        #[serde(default)]
        images: Option<Vec<String>>,
        #[serde(default)]
        word: Option<String>,
    },
    Duality {
        #[serde(default)]
        id: Option<String>,
        /// Defaults to the metric of a `metric` form.
        #[serde(default)]
        metric: Option<Vec<f64>>,
        #[serde(default)]
        classes: Option<Vec<Vec<i64>>>,
    },
    VerifyBound {
        #[serde(default)]
        id: Option<String>,
    },
}

fn default_domain() -> DomainSpec {
    DomainSpec::Form
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::RSequence { .. } => "r_sequence",
            TaskSpec::Lyapunov { .. } => "lyapunov",
            TaskSpec::Homology { .. } => "homology",
            TaskSpec::Shape { .. } => "shape",
            TaskSpec::Displacement { .. } => "displacement",
            TaskSpec::Growth { .. } => "growth",
            TaskSpec::Duality { .. } => "duality",
            TaskSpec::VerifyBound { .. } => "verify_bound",
        }
    }

    fn explicit_id(&self) -> Option<&str> {
        match self {
            TaskSpec::RSequence { id }
            | TaskSpec::Lyapunov { id }
            | TaskSpec::Homology { id }
            | TaskSpec::Shape { id }
            | TaskSpec::Displacement { id, .. }
            | TaskSpec::Growth { id, .. }
            | TaskSpec::Duality { id, .. }
            | TaskSpec::VerifyBound { id } => id.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub id: String,
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    /// Declares the map conservative; a hyperbolic verdict is then flagged.
    #[serde(default)]
    pub conservative: bool,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<String>,
}

/// Numeric parameters, `[params]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Length of the dissipation sequence.
    #[serde(rename = "K")]
    pub k: usize,
    pub q_per_axis: usize,
    /// Fiber directions; defaults to 128 (`n = 2`) or 256 (`n = 3`).
    pub directions: Option<usize>,
    /// Compute `r_K` again on a doubled grid and report the relative change.
    pub refinement_check: bool,
    /// Lyapunov horizon; defaults to `K`.
    pub lyap_k: Option<usize>,
    pub lyap_q_per_axis: usize,
    pub lyap_directions: usize,
    /// Shape direction grid; defaults to 256 (`n = 2`) or 1024 (`n = 3`).
    pub shape_directions: Option<usize>,
    pub shape_q_per_axis: usize,
    pub displacement_k: usize,
    pub growth_steps: usize,
    pub growth_cap: usize,
    /// Random classes drawn from the seed when a task lists none.
    pub sample_classes: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            k: 30,
            q_per_axis: 64,
            directions: None,
            refinement_check: true,
            lyap_k: None,
            lyap_q_per_axis: 8,
            lyap_directions: 32,
            shape_directions: None,
            shape_q_per_axis: 64,
            displacement_k: 20,
            growth_steps: 40,
            growth_cap: contactlab_core::algebra::DEFAULT_LENGTH_CAP,
            sample_classes: 8,
        }
    }
}

/// The parsed config in its declared form, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub experiment: ExperimentSection,
    pub form: FormSpec,
    pub map: Vec<PrimitiveSpec>,
    pub params: Params,
    pub thresholds: Thresholds,
    pub task: Vec<TaskSpec>,
}

/// A task with its resolved id.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: String,
    pub spec: TaskSpec,
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub echo: ConfigEcho,
    pub dim: usize,
    pub form: ContactForm,
    pub map: ContactMap,
    pub tasks: Vec<Task>,
}

impl Experiment {
    pub fn id(&self) -> &str {
        &self.echo.experiment.id
    }

    pub fn params(&self) -> &Params {
        &self.echo.params
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.echo.thresholds
    }
}

/// Every problem found in a config.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

pub fn load_config(path: &Path) -> Result<Experiment, ConfigErrors> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config(&text)
}

fn section<T: DeserializeOwned>(
    table: &toml::Table,
    key: &str,
    errors: &mut Vec<String>,
) -> Option<T> {
    let value = table.get(key)?;
    match value.clone().try_into() {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(format!("[{key}]: {}", one_line(&e.to_string())));
            None
        }
    }
}

fn entries<T: DeserializeOwned>(
    table: &toml::Table,
    key: &str,
    errors: &mut Vec<String>,
) -> Vec<Option<T>> {
    let Some(value) = table.get(key) else {
        return Vec::new();
    };
    let Some(items) = value.as_array() else {
        errors.push(format!("{key}: expected an array of tables ([[{key}]])"));
        return Vec::new();
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| match item.clone().try_into() {
            Ok(v) => Some(v),
            Err(e) => {
                errors.push(format!("{key} #{}: {}", i + 1, one_line(&e.to_string())));
                None
            }
        })
        .collect()
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn parse_config(text: &str) -> Result<Experiment, ConfigErrors> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![one_line(&e.to_string())]))?;
    let mut errors = Vec::new();
    for key in table.keys() {
        if !["experiment", "form", "map", "params", "thresholds", "task"].contains(&key.as_str()) {
            errors.push(format!("unknown section [{key}]"));
        }
    }
    let experiment: Option<ExperimentSection> = section(&table, "experiment", &mut errors);
    if !table.contains_key("experiment") {
        errors.push("missing [experiment] section".into());
    }
    let form_spec: Option<FormSpec> = if table.contains_key("form") {
        section(&table, "form", &mut errors)
    } else {
        Some(FormSpec::Round)
    };
    let map_specs: Vec<Option<PrimitiveSpec>> = entries(&table, "map", &mut errors);
    let params: Params = if table.contains_key("params") {
        section(&table, "params", &mut errors).unwrap_or_default()
    } else {
        Params::default()
    };
    let thresholds: Thresholds = if table.contains_key("thresholds") {
        section(&table, "thresholds", &mut errors).unwrap_or_default()
    } else {
        Thresholds::default()
    };
    let task_specs: Vec<Option<TaskSpec>> = entries(&table, "task", &mut errors);
    if task_specs.is_empty() && table.contains_key("experiment") {
        errors.push("no [[task]] entries".into());
    }

    let dim = experiment.as_ref().map(|e| e.dimension);
    if let Some(d) = dim {
        if d != 2 && d != 3 {
            errors.push(format!("experiment.dimension must be 2 or 3, got {d}"));
        }
    }
    let dim = dim.filter(|d| *d == 2 || *d == 3);

    check_params(&params, &thresholds, &mut errors);

    let form = match (&form_spec, dim) {
        (Some(spec), Some(n)) => build_form(spec, n)
            .map_err(|e| errors.push(format!("[form]: {e}")))
            .ok(),
        _ => None,
    };

    let mut primitives = Vec::new();
    for (i, spec) in map_specs.iter().enumerate() {
        let Some(spec) = spec else { continue };
        match dim.map(|n| build_primitive(spec, n)) {
            Some(Ok(p)) => primitives.push(p),
            Some(Err(e)) => errors.push(format!("map #{}: {e}", i + 1)),
            None => {}
        }
    }
    let map = match dim {
        Some(n) if primitives.len() == map_specs.len() => match ContactMap::new(n, primitives) {
            Ok(m) => match m.check_flows() {
                Ok(_) => Some(m),
                Err(e) => {
                    errors.push(format!("[[map]]: {e}"));
                    None
                }
            },
            Err(e) => {
                errors.push(format!("[[map]]: {e}"));
                None
            }
        },
        _ => None,
    };

    let mut tasks = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, spec) in task_specs.iter().enumerate() {
        let Some(spec) = spec else { continue };
        let id = spec
            .explicit_id()
            .map(str::to_owned)
            .unwrap_or_else(|| format!("{}_{}", spec.kind(), i + 1));
        if !id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            || id.is_empty()
        {
            errors.push(format!(
                "task #{}: id {id:?} must be alphanumeric, '_' or '-'",
                i + 1
            ));
        }
        if !seen.insert(id.clone()) {
            errors.push(format!("task #{}: duplicate id {id:?}", i + 1));
        }
        if let Some(n) = dim {
            for e in check_task(spec, n, form_spec.as_ref()) {
                errors.push(format!("task {id:?}: {e}"));
            }
        }
        tasks.push(Task {
            id,
            spec: spec.clone(),
        });
    }

    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    let (Some(experiment), Some(form_spec), Some(form), Some(map), Some(dim)) =
        (experiment, form_spec, form, map, dim)
    else {
        return Err(ConfigErrors(vec!["incomplete configuration".into()]));
    };
    let echo = ConfigEcho {
        experiment,
        form: form_spec,
        map: map_specs.into_iter().flatten().collect(),
        params,
        thresholds,
        task: tasks.iter().map(|t| t.spec.clone()).collect(),
    };
    Ok(Experiment {
        echo,
        dim,
        form,
        map,
        tasks,
    })
}

fn check_params(p: &Params, th: &Thresholds, errors: &mut Vec<String>) {
    let mut positive = |name: &str, v: usize| {
        if v == 0 {
            errors.push(format!("params.{name} must be positive"));
        }
    };
    positive("K", p.k);
    positive("q_per_axis", p.q_per_axis);
    positive("lyap_q_per_axis", p.lyap_q_per_axis);
    positive("shape_q_per_axis", p.shape_q_per_axis);
    positive("growth_cap", p.growth_cap);
    if let Some(d) = p.directions {
        positive("directions", d);
    }
    if let Some(d) = p.shape_directions {
        positive("shape_directions", d);
    }
    for (name, v, min) in [
        ("directions", p.directions.unwrap_or(4), 4),
        ("lyap_directions", p.lyap_directions, 4),
        ("shape_directions", p.shape_directions.unwrap_or(4), 4),
        ("lyap_K", p.lyap_k.unwrap_or(p.k.max(8)), 8),
        ("displacement_k", p.displacement_k, 8),
        ("growth_steps", p.growth_steps, 10),
    ] {
        if v < min {
            errors.push(format!("params.{name} must be >= {min}, got {v}"));
        }
    }
    for (name, v) in [
        ("hyperbolic_floor", th.hyperbolic_floor),
        ("max_relative_residual", th.max_relative_residual),
        ("bounded_ceiling", th.bounded_ceiling),
        ("plateau_increment", th.plateau_increment),
        ("bound_tol", th.bound_tol),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            errors.push(format!(
                "thresholds.{name} must be a nonnegative number, got {v}"
            ));
        }
    }
}

pub fn build_form(spec: &FormSpec, n: usize) -> contactlab_core::Result<ContactForm> {
    match spec {
        FormSpec::Round => Ok(ContactForm::round(n)),
        FormSpec::Constant { value } => ContactForm::constant(n, *value),
        FormSpec::Cosine { offset, terms } => {
            let terms: Vec<(f64, Vec<i64>)> =
                terms.iter().map(|t| (t.amp, t.q_freq.clone())).collect();
            ContactForm::cosine(n, *offset, &terms)
        }
        FormSpec::Trigonometric { offset, waves } => {
            let waves = waves
                .iter()
                .map(|w| Wave {
                    amp: w.amp,
                    q_freq: w.q_freq.clone(),
                    dir: w.dir.clone(),
                    phase: w.phase,
                })
                .collect();
            ContactForm::trigonometric(n, *offset, waves)
        }
        FormSpec::Metric { g } => ContactForm::metric(metric(n, g)?),
    }
}

fn metric(n: usize, g: &[f64]) -> contactlab_core::Result<FlatMetric> {
    FlatMetric::new(n, g)
}

/// Square integer matrix from row-major entries.
pub fn square(entries: &[i64]) -> contactlab_core::Result<IntMatrix> {
    IntMatrix::from_row_major(entries)
}

pub fn build_primitive(spec: &PrimitiveSpec, n: usize) -> contactlab_core::Result<Primitive> {
    let p = match spec {
        PrimitiveSpec::CanonicalLift { matrix } => Primitive::canonical_lift(square(matrix)?)?,
        PrimitiveSpec::ShearA { inverted } => {
            let p = Primitive::shear_a();
            if *inverted {
                p.inverse()
            } else {
                p
            }
        }
        PrimitiveSpec::ShearB { inverted } => {
            let p = Primitive::shear_b();
            if *inverted {
                p.inverse()
            } else {
                p
            }
        }
        PrimitiveSpec::Reeb { t } => Primitive::reeb(*t)?,
        PrimitiveSpec::Flow {
            hamiltonian,
            t,
            steps,
        } => {
            let h = match hamiltonian {
                HamiltonianSpec::Metric { g } => Hamiltonian::Metric(metric(n, g)?),
                HamiltonianSpec::Conformal { amp, q_freq, phase } => {
                    Hamiltonian::conformal(*amp, q_freq.clone(), *phase)?
                }
                HamiltonianSpec::Translation { w } => Hamiltonian::translation(w.clone())?,
                HamiltonianSpec::Twist { amp, i, j } => Hamiltonian::twist(*amp, *i, *j)?,
            };
            Primitive::flow(h, *t, *steps)?
        }
    };
    // surfaces dimension errors with the entry that caused them
    ContactMap::new(n, vec![p.clone()])?;
    Ok(p)
}

fn check_task(spec: &TaskSpec, n: usize, form: Option<&FormSpec>) -> Vec<String> {
    let mut errs = Vec::new();
    let mut check_matrix = |m: &Option<Vec<i64>>| {
        if let Some(m) = m {
            match square(m) {
                Ok(mat) if mat.size() != n => errs.push(format!(
                    "matrix is {0}x{0}, experiment has n = {n}",
                    mat.size()
                )),
                Ok(mat) if !mat.is_unimodular() => {
                    errs.push(format!("matrix {mat} is not unimodular"))
                }
                Ok(_) => {}
                Err(e) => errs.push(e.to_string()),
            }
        }
    };
    match spec {
        TaskSpec::Displacement { matrix, .. } => check_matrix(matrix),
        TaskSpec::Growth {
            matrix,
            classes,
            images,
            word,
            ..
        } => match (images, word) {
            (Some(images), Some(word)) => {
                if matrix.is_some() || classes.is_some() {
                    errs.push("free growth takes images and word only".into());
                }
                let imgs: Vec<&str> = images.iter().map(String::as_str).collect();
                if let Err(e) = FreeAutomorphism::parse(&imgs) {
                    errs.push(format!("images: {e}"));
                }
                if let Err(e) = word.parse::<GroupWord>() {
                    errs.push(format!("word: {e}"));
                }
            }
            (None, None) => {
                check_matrix(matrix);
                for c in classes.iter().flatten() {
                    if c.len() != n {
                        errs.push(format!("class {c:?} has length {}, expected {n}", c.len()));
                    } else if c.iter().all(|&x| x == 0) {
                        errs.push("class 0 is trivial".into());
                    }
                }
                if classes.as_ref().is_some_and(|c| c.is_empty()) {
                    errs.push("classes is empty".into());
                }
            }
            _ => errs.push("free growth needs both images and word".into()),
        },
        TaskSpec::Duality {
            metric: g, classes, ..
        } => {
            match (g, form) {
                (Some(g), _) => {
                    if let Err(e) = metric(n, g) {
                        errs.push(format!("metric: {e}"));
                    }
                }
                (None, Some(FormSpec::Metric { .. })) => {}
                (None, _) => {
                    errs.push("duality needs a metric (task.metric or a metric form)".into())
                }
            }
            for c in classes.iter().flatten() {
                if c.len() != n || c.iter().all(|&x| x == 0) {
                    errs.push(format!(
                        "class {c:?} must be a nonzero vector of length {n}"
                    ));
                }
            }
        }
        _ => {}
    }
    errs
}
