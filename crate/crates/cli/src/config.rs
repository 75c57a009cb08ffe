//! Run configuration: a TOML document resolved into a [`RunConfig`].
//!
//! ```toml
//! experiment = "series"
//!
//! [model]
//! n_qubits = 4
//! omega0 = 1.0
//! # g = 2.0         defaults to 2 * omega0
//! # cutoff = 40     overrides the per-mode Fock cutoff
//!
//! [charger]
//! kind = "semi_bell_plus"
//! alpha = 2.5
//!
//! [grid]
//! t_max = 10.0
//! points = 1001
//!
//! [output]
//! dir = "out"
//! per_cell = false
//! plots = true
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use num_complex::Complex64;
use qbattery::experiments::{
    default_sweep_alphas, sweep_cutoffs, ChargerFamily, Scenario, StudyBase,
};
use qbattery::states::build_charger_state;
use qbattery::{ChargerSpec, TimeGrid};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Series,
    Sweep,
    Scaling,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Series => "series",
            Experiment::Sweep => "sweep",
            Experiment::Scaling => "scaling",
        }
    }
}

/// A configuration problem, anchored to a line of the document when one
/// can be identified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Spanned<Experiment>>,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    charger: RawCharger,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    scaling: RawScaling,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n_qubits: Option<Spanned<usize>>,
    omega0: Option<Spanned<f64>>,
    g: Option<Spanned<f64>>,
    cutoff: Option<Spanned<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCharger {
    kind: Option<Spanned<OneOrMany<String>>>,
    alpha: Option<Spanned<OneOrMany<f64>>>,
    alpha2: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_max: Option<Spanned<f64>>,
    points: Option<Spanned<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScaling {
    sizes: Option<Spanned<Vec<usize>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    per_cell: Option<bool>,
    plots: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    pub n_qubits: usize,
    pub omega0: f64,
    pub g: f64,
    /// Fock cutoff override applied to every mode.
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargerParams {
    pub kinds: Vec<String>,
    pub alphas: Vec<f64>,
    /// Second amplitude of a `product_pair` series.
    pub alpha2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridParams {
    pub t_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputParams {
    pub dir: PathBuf,
    pub per_cell: bool,
    pub plots: bool,
}

/// A validated run with every default made explicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub model: ModelParams,
    pub charger: ChargerParams,
    pub grid: GridParams,
    /// Battery sizes of a scaling run.
    pub sizes: Vec<usize>,
    pub output: OutputParams,
    /// Resolved Fock cutoffs per charger kind.
    pub mode_cutoffs: BTreeMap<String, Vec<usize>>,
}

const SERIES_KINDS: [&str; 7] = [
    "single",
    "product_pair",
    "product_in_phase",
    "product_opposed",
    "semi_bell_plus",
    "semi_bell_minus",
    "zeta",
];

const DEFAULT_SIZES: [usize; 4] = [1, 2, 3, 4];

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line_at(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())]
            .matches('\n')
            .count()
            + 1
    }

    fn at(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: Some(self.line_at(span.start)),
            message: message.into(),
        }
    }

    /// Error for a missing key, anchored at its section header if present.
    fn missing(&self, section: &str, key: &str) -> ConfigError {
        let header = format!("[{section}]");
        let line = self
            .text
            .lines()
            .position(|l| l.trim() == header)
            .map(|i| i + 1);
        ConfigError {
            line,
            message: format!("{section}.{key} required"),
        }
    }
}

fn positive(ctx: &Ctx, v: &Spanned<f64>, key: &str) -> Result<f64, ConfigError> {
    let x = *v.get_ref();
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(ctx.at(
            v.span(),
            format!("{key} must be positive and finite, got {x}"),
        ))
    }
}

/// Parses and validates a configuration document.
///
/// `experiment` is the subcommand the document is run under; if the
/// document names an experiment too, the two must agree.
pub fn parse_config(text: &str, experiment: Option<Experiment>) -> Result<RunConfig, CliError> {
    let ctx = Ctx { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| ctx.line_at(s.start)),
        message: e.message().trim().to_string(),
    })?;

    let experiment = match (experiment, &raw.experiment) {
        (Some(a), Some(b)) if a != *b.get_ref() => {
            return Err(ctx
                .at(
                    b.span(),
                    format!(
                        "experiment is {} but the {} command was used",
                        b.get_ref().name(),
                        a.name()
                    ),
                )
                .into())
        }
        (Some(a), _) => a,
        (None, Some(b)) => *b.get_ref(),
        (None, None) => {
            return Err(ConfigError {
                line: None,
                message: "experiment required".into(),
            }
            .into())
        }
    };

    let omega0 = raw
        .model
        .omega0
        .as_ref()
        .map(|v| positive(&ctx, v, "model.omega0"))
        .transpose()?
        .unwrap_or(1.0);
    let g = match &raw.model.g {
        Some(v) if !v.get_ref().is_finite() || *v.get_ref() < 0.0 => {
            return Err(ctx
                .at(v.span(), "model.g must be finite and non-negative")
                .into())
        }
        Some(v) => *v.get_ref(),
        None => 2.0 * omega0,
    };
    let n_qubits = match &raw.model.n_qubits {
        Some(v) if *v.get_ref() == 0 => {
            return Err(ctx.at(v.span(), "model.n_qubits must be at least 1").into())
        }
        Some(v) => *v.get_ref(),
        None => 4,
    };
    let cutoff = match &raw.model.cutoff {
        Some(v) if *v.get_ref() == 0 => {
            return Err(ctx.at(v.span(), "model.cutoff must be at least 1").into())
        }
        v => v.as_ref().map(|v| *v.get_ref()),
    };

    let t_max = raw
        .grid
        .t_max
        .as_ref()
        .map(|v| positive(&ctx, v, "grid.t_max"))
        .transpose()?
        .unwrap_or(10.0 / omega0);
    let points = match &raw.grid.points {
        Some(v) if *v.get_ref() < 2 => {
            return Err(ctx.at(v.span(), "grid.points must be at least 2").into())
        }
        Some(v) => *v.get_ref(),
        None => 1001,
    };

    let Some(kind) = raw.charger.kind else {
        return Err(ctx.missing("charger", "kind").into());
    };
    let kind_span = kind.span();
    let kinds = kind.into_inner().into_vec();
    if kinds.is_empty() {
        return Err(ctx.at(kind_span, "charger.kind is empty").into());
    }
    let (alphas, alpha_span) = match raw.charger.alpha {
        Some(a) => {
            let span = a.span();
            (Some(a.into_inner().into_vec()), Some(span))
        }
        None => (None, None),
    };
    if let (Some(a), Some(span)) = (&alphas, &alpha_span) {
        if a.is_empty() {
            return Err(ctx.at(span.clone(), "charger.alpha is empty").into());
        }
        if let Some(x) = a.iter().find(|x| !x.is_finite()) {
            return Err(ctx
                .at(
                    span.clone(),
                    format!("charger.alpha must be finite, got {x}"),
                )
                .into());
        }
    }
    if let Some(a2) = &raw.charger.alpha2 {
        if experiment != Experiment::Series || kinds != ["product_pair"] {
            return Err(ctx
                .at(
                    a2.span(),
                    "charger.alpha2 only applies to a product_pair series",
                )
                .into());
        }
        if !a2.get_ref().is_finite() {
            return Err(ctx.at(a2.span(), "charger.alpha2 must be finite").into());
        }
    }
    if let Some(s) = &raw.scaling.sizes {
        if experiment != Experiment::Scaling {
            return Err(ctx
                .at(s.span(), "scaling.sizes only applies to scaling runs")
                .into());
        }
    }

    let alphas = match experiment {
        Experiment::Series | Experiment::Scaling => {
            let Some(a) = alphas else {
                return Err(ctx.missing("charger", "alpha").into());
            };
            if a.len() != 1 {
                let span = alpha_span.expect("alpha present");
                return Err(ctx
                    .at(
                        span,
                        format!("a {} run takes a single alpha", experiment.name()),
                    )
                    .into());
            }
            a
        }
        Experiment::Sweep => alphas.unwrap_or_else(default_sweep_alphas),
    };

    let mut cfg = RunConfig {
        experiment,
        model: ModelParams {
            n_qubits,
            omega0,
            g,
            cutoff,
        },
        charger: ChargerParams {
            kinds,
            alphas,
            alpha2: raw.charger.alpha2.map(|a| a.into_inner()),
        },
        grid: GridParams { t_max, points },
        sizes: Vec::new(),
        output: OutputParams {
            dir: PathBuf::from(raw.output.dir.unwrap_or_else(|| "out".into())),
            per_cell: raw.output.per_cell.unwrap_or(false),
            plots: raw.output.plots.unwrap_or(true),
        },
        mode_cutoffs: BTreeMap::new(),
    };

    match experiment {
        Experiment::Series => {
            let kind = match cfg.charger.kinds.as_slice() {
                [k] => k.clone(),
                _ => {
                    return Err(ctx
                        .at(kind_span, "a series run takes a single charger kind")
                        .into())
                }
            };
            if !SERIES_KINDS.contains(&kind.as_str()) {
                return Err(ctx
                    .at(
                        kind_span,
                        format!(
                            "unknown charger kind `{kind}`, expected one of {}",
                            SERIES_KINDS.join(", ")
                        ),
                    )
                    .into());
            }
            let spec = cfg.series_spec();
            let cutoffs = match cutoff {
                Some(c) => vec![c; spec.n_modes()],
                None => spec.default_cutoffs(),
            };
            Scenario::new(n_qubits, spec, omega0, cfg.time_grid()?)?.with_cutoffs(&cutoffs)?;
            build_charger_state(&spec, &cutoffs)?;
            cfg.mode_cutoffs.insert(kind, cutoffs);
        }
        Experiment::Sweep | Experiment::Scaling => {
            let mut fams = Vec::new();
            for k in &cfg.charger.kinds {
                let Some(f) = ChargerFamily::from_name(k) else {
                    let names: Vec<_> = ChargerFamily::ALL.iter().map(|f| f.name()).collect();
                    return Err(ctx
                        .at(
                            kind_span,
                            format!(
                                "unknown charger family `{k}`, expected one of {}",
                                names.join(", ")
                            ),
                        )
                        .into());
                };
                fams.push(f);
            }
            if experiment == Experiment::Sweep && !fams.contains(&ChargerFamily::Single) {
                fams.push(ChargerFamily::Single);
            }
            fams.sort();
            fams.dedup();
            cfg.charger.kinds = fams.iter().map(|f| f.name().to_string()).collect();
            if experiment == Experiment::Scaling {
                cfg.sizes = match raw.scaling.sizes {
                    Some(s) if s.get_ref().is_empty() || s.get_ref().contains(&0) => {
                        return Err(ctx
                            .at(s.span(), "scaling.sizes must be non-empty and positive")
                            .into())
                    }
                    Some(s) => s.into_inner(),
                    None => DEFAULT_SIZES.to_vec(),
                };
            }
            let base = cfg.study_base()?;
            let cutoffs = match experiment {
                Experiment::Sweep => sweep_cutoffs(&base, &fams, &cfg.charger.alphas)?,
                _ => fams
                    .iter()
                    .map(|&f| Ok((f, base.cutoffs(f, &cfg.charger.alphas)?)))
                    .collect::<qbattery::Result<_>>()?,
            };
            for (f, c) in cutoffs {
                for &a in &cfg.charger.alphas {
                    build_charger_state(&f.spec(a), &c)?;
                }
                cfg.mode_cutoffs.insert(f.name().to_string(), c);
            }
        }
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn time_grid(&self) -> qbattery::Result<TimeGrid> {
        TimeGrid::uniform(self.grid.t_max, self.grid.points)
    }

    /// Charger of a series run. `single` holds `α` itself, not the photon
    /// budget of a pair.
    pub fn series_spec(&self) -> ChargerSpec {
        let a = Complex64::new(self.charger.alphas[0], 0.0);
        match self.charger.kinds[0].as_str() {
            "single" => ChargerSpec::Single(a),
            "product_pair" => {
                let b = self
                    .charger
                    .alpha2
                    .map(|x| Complex64::new(x, 0.0))
                    .unwrap_or(-a);
                ChargerSpec::ProductPair(a, b)
            }
            "product_in_phase" => ChargerSpec::ProductPair(a, a),
            "product_opposed" => ChargerSpec::ProductPair(a, -a),
            "semi_bell_plus" => ChargerSpec::SemiBellPlus(a),
            "semi_bell_minus" => ChargerSpec::SemiBellMinus(a),
            "zeta" => ChargerSpec::Zeta(a),
            other => unreachable!("unvalidated charger kind {other}"),
        }
    }

    pub fn families(&self) -> Vec<ChargerFamily> {
        self.charger
            .kinds
            .iter()
            .filter_map(|k| ChargerFamily::from_name(k))
            .collect()
    }

    pub fn study_base(&self) -> qbattery::Result<StudyBase> {
        Ok(StudyBase {
            n_qubits: self.model.n_qubits,
            omega0: self.model.omega0,
            g: self.model.g,
            grid: self.time_grid()?,
            cutoff: self.model.cutoff,
        })
    }
}
