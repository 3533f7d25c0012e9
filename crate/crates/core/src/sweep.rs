//! Coupling-plane sweeps of half-chain entropy and teleported energy.
//!
//! Output is CSV: a block of `# key=value` lines, an `x,y,value` header and
//! one row per cell with `y` as the outer loop. Numbers carry 12 significant
//! digits, so rendering a parsed grid reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{ground_state, Method};
use crate::entanglement::half_chain_entropy;
use crate::error::{Error, Result};
use crate::models::{Boundary, ModelDescription, ModelKind};
use crate::pauli::Axis;
use crate::qet::{analytic_identity_applies, evaluate, QetConfig};

pub const DEFAULT_RESOLUTION: usize = 41;
pub const DEFAULT_RANGE: [f64; 2] = [0.0, 2.0];
/// Scan lines whose spread is below this are skipped by [`ridge_compare`].
pub const FLAT_LINE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Entropy,
    QetEnergy,
    #[default]
    Both,
}

impl Metric {
    fn parts(self) -> &'static [Metric] {
        match self {
            Metric::Entropy => &[Metric::Entropy],
            Metric::QetEnergy => &[Metric::QetEnergy],
            Metric::Both => &[Metric::Entropy, Metric::QetEnergy],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Entropy => "entropy",
            Metric::QetEnergy => "qet_energy",
            Metric::Both => "both",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(Metric::Entropy),
            "qet_energy" => Ok(Metric::QetEnergy),
            "both" => Ok(Metric::Both),
            other => Err(Error::Invalid(format!("unknown metric {other:?}"))),
        }
    }
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

fn default_range() -> [f64; 2] {
    DEFAULT_RANGE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Family, chain length, boundary and the couplings held fixed.
    pub model: ModelDescription,
    pub x_param: String,
    pub y_param: String,
    #[serde(default = "default_range")]
    pub x_range: [f64; 2],
    #[serde(default = "default_range")]
    pub y_range: [f64; 2],
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub qet: QetConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    /// Sweep of the family's two couplings over `[0, 2]^2` at 41 points,
    /// `N = 6`, `n_A = 1`, `n_B = 4`, open boundary.
    pub fn for_family(kind: ModelKind) -> Result<Self> {
        let names = kind.coupling_names();
        if names.len() != 2 {
            return Err(Error::Unsupported(format!("{kind} has no two-coupling plane to sweep")));
        }
        let mut model = ModelDescription::new(kind, 6);
        if kind == ModelKind::Ising {
            model = model.with_axis(Axis::X);
        }
        Ok(Self {
            model,
            x_param: names[0].to_string(),
            y_param: names[1].to_string(),
            x_range: DEFAULT_RANGE,
            y_range: DEFAULT_RANGE,
            resolution: DEFAULT_RESOLUTION,
            metric: Metric::Both,
            qet: QetConfig::default(),
            output: None,
        })
    }

    pub fn with_qet(mut self, qet: QetConfig) -> Self {
        self.qet = qet;
        self
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.model = self.model.with_boundary(boundary);
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(json)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let names = self.model.name.coupling_names();
        for p in [&self.x_param, &self.y_param] {
            if !names.contains(&p.as_str()) {
                return Err(Error::Invalid(format!(
                    "{p:?} is not a coupling of {}; expected one of {names:?}",
                    self.model.name
                )));
            }
        }
        if self.x_param == self.y_param {
            return Err(Error::Invalid(format!("both axes sweep {:?}", self.x_param)));
        }
        for (name, [lo, hi]) in [("x_range", self.x_range), ("y_range", self.y_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Invalid(format!("{name} must satisfy lo < hi, got [{lo}, {hi}]")));
            }
        }
        if self.resolution < 2 {
            return Err(Error::Invalid(format!("resolution must be at least 2, got {}", self.resolution)));
        }
        self.qet.validate(self.model.n_sites)
    }

    pub fn axis_values(range: [f64; 2], resolution: usize) -> Vec<f64> {
        let step = (range[1] - range[0]) / (resolution - 1) as f64;
        (0..resolution).map(|i| if i + 1 == resolution { range[1] } else { range[0] + step * i as f64 }).collect()
    }

    pub fn x_values(&self) -> Vec<f64> {
        Self::axis_values(self.x_range, self.resolution)
    }

    pub fn y_values(&self) -> Vec<f64> {
        Self::axis_values(self.y_range, self.resolution)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major with `y` outer: `values[iy * x.len() + ix]`.
    pub values: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepGrid {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.x.len() + ix]
    }

    pub fn row(&self, iy: usize) -> &[f64] {
        &self.values[iy * self.x.len()..(iy + 1) * self.x.len()]
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("x,y,value\n");
        for (iy, y) in self.y.iter().enumerate() {
            for (ix, x) in self.x.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", render(*x), render(*y), render(self.get(ix, iy)));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = BTreeMap::new();
        let mut lines = text.lines();
        let mut header_seen = false;
        for line in lines.by_ref() {
            if let Some(entry) = line.strip_prefix("# ") {
                let (k, v) = entry
                    .split_once('=')
                    .ok_or_else(|| Error::Invalid(format!("metadata line without '=': {line:?}")))?;
                metadata.insert(k.to_string(), v.to_string());
            } else if line == "x,y,value" {
                header_seen = true;
                break;
            } else {
                return Err(Error::Invalid(format!("unexpected line before the header: {line:?}")));
            }
        }
        if !header_seen {
            return Err(Error::Invalid("missing x,y,value header".into()));
        }
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Invalid(format!("expected 3 fields, got {line:?}")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Invalid(format!("{s:?}: {e}")));
            rows.push((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
        }
        let first_y = rows.first().map(|r| r.1);
        let x: Vec<f64> = rows.iter().take_while(|r| Some(r.1) == first_y).map(|r| r.0).collect();
        if x.is_empty() || rows.len() % x.len() != 0 {
            return Err(Error::Invalid("rows do not form a rectangular grid".into()));
        }
        let y: Vec<f64> = rows.iter().step_by(x.len()).map(|r| r.1).collect();
        for (k, r) in rows.iter().enumerate() {
            if r.0 != x[k % x.len()] || r.1 != y[k / x.len()] {
                return Err(Error::Invalid(format!("row {k} breaks the grid order")));
            }
        }
        Ok(Self { x, y, values: rows.into_iter().map(|r| r.2).collect(), metadata })
    }
}

fn render(v: f64) -> String {
    format!("{v:.11e}")
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    /// One grid per metric, entropy first.
    pub grids: Vec<(Metric, SweepGrid)>,
    pub degenerate_cells: Vec<(usize, usize)>,
    /// Largest `|analytic - density matrix|` over cells where the identity applies.
    pub max_identity_residual: f64,
}

impl SweepOutput {
    pub fn grid(&self, metric: Metric) -> Option<&SweepGrid> {
        self.grids.iter().find(|(m, _)| *m == metric).map(|(_, g)| g)
    }
}

struct Cell {
    entropy: f64,
    energy: f64,
    degenerate: bool,
    residual: Option<f64>,
}

fn evaluate_cell(spec: &SweepSpec, x: f64, y: f64, metrics: &[Metric]) -> Result<Cell> {
    let description = spec.model.clone().with_coupling(&spec.x_param, x).with_coupling(&spec.y_param, y);
    let model = description.build::<f64>()?;
    let ground = ground_state(&model, Method::Auto)?;
    let entropy =
        if metrics.contains(&Metric::Entropy) { half_chain_entropy(ground.as_slice(), model.n_sites())? } else { 0.0 };
    let (energy, residual) = if metrics.contains(&Metric::QetEnergy) {
        let calibrated = model.calibrate(&ground)?;
        let result = evaluate(&ground, &calibrated, &spec.qet)?;
        let applies = analytic_identity_applies(&calibrated, &spec.qet)?;
        (result.e_density_matrix, applies.then(|| result.identity_residual()))
    } else {
        (0.0, None)
    };
    for value in [entropy, energy] {
        if !value.is_finite() {
            return Err(Error::Contract(format!("non-finite value {value}")));
        }
    }
    Ok(Cell { entropy, energy, degenerate: ground.degenerate, residual })
}

/// Evaluates every cell; cells run in parallel, results keep grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let xs = spec.x_values();
    let ys = spec.y_values();
    let res = spec.resolution;
    let metrics = spec.metric.parts();
    let cells: Vec<Result<Cell>> =
        (0..res * res).into_par_iter().map(|k| evaluate_cell(spec, xs[k % res], ys[k / res], metrics)).collect();
    let mut evaluated = Vec::with_capacity(cells.len());
    for (k, cell) in cells.into_iter().enumerate() {
        evaluated.push(cell.map_err(|e| Error::Cell { ix: k % res, iy: k / res, source: Box::new(e) })?);
    }
    let degenerate_cells: Vec<(usize, usize)> =
        evaluated.iter().enumerate().filter(|(_, c)| c.degenerate).map(|(k, _)| (k % res, k / res)).collect();
    let max_identity_residual = evaluated.iter().filter_map(|c| c.residual).fold(0.0, f64::max);

    let mut base = BTreeMap::new();
    base.insert("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string());
    base.insert("model".to_string(), spec.model.to_json()?);
    base.insert("boundary".to_string(), spec.model.boundary.to_string());
    base.insert("x_param".to_string(), spec.x_param.clone());
    base.insert("y_param".to_string(), spec.y_param.clone());
    base.insert("resolution".to_string(), res.to_string());
    base.insert(
        "degenerate_cells".to_string(),
        degenerate_cells.iter().map(|(ix, iy)| format!("{ix}:{iy}")).collect::<Vec<_>>().join(";"),
    );

    let mut grids = Vec::new();
    for &metric in metrics {
        let mut metadata = base.clone();
        metadata.insert("metric".to_string(), metric.as_str().to_string());
        let values = match metric {
            Metric::Entropy => {
                metadata.insert("entropy_cut".to_string(), (spec.model.n_sites / 2).to_string());
                metadata.insert("log_base".to_string(), "e".to_string());
                evaluated.iter().map(|c| c.entropy).collect()
            }
            _ => {
                metadata.insert("qet_config".to_string(), serde_json::to_string(&spec.qet)?);
                metadata.insert("max_identity_residual".to_string(), render(max_identity_residual));
                evaluated.iter().map(|c| c.energy).collect()
            }
        };
        grids.push((metric, SweepGrid { x: xs.clone(), y: ys.clone(), values, metadata }));
    }
    Ok(SweepOutput { grids, degenerate_cells, max_identity_residual })
}

/// First index of the largest value.
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RidgeStats {
    /// `(row, |argmax S - argmax |E||)` for every compared row.
    pub distances: Vec<(usize, usize)>,
    pub median: Option<f64>,
    pub max: Option<usize>,
    pub skipped_flat: usize,
}

/// Rows `n/4 .. n - n/4`.
pub fn central_half(n: usize) -> Range<usize> {
    n / 4..n - n / 4
}

/// Compares per-row argmaxes of the entropy grid and of `|energy|`.
pub fn ridge_compare(entropy: &SweepGrid, energy: &SweepGrid, rows: Range<usize>) -> Result<RidgeStats> {
    if entropy.x.len() != energy.x.len() || entropy.y.len() != energy.y.len() {
        return Err(Error::Dimension("ridge comparison needs congruent grids".into()));
    }
    if rows.end > entropy.y.len() {
        return Err(Error::OutOfRange(format!("rows {rows:?} on a grid with {} rows", entropy.y.len())));
    }
    let mut distances = Vec::new();
    let mut skipped_flat = 0;
    for iy in rows {
        let s = entropy.row(iy);
        let e: Vec<f64> = energy.row(iy).iter().map(|v| v.abs()).collect();
        if spread(s) < FLAT_LINE_TOL || spread(&e) < FLAT_LINE_TOL {
            skipped_flat += 1;
            continue;
        }
        let (a, b) = (argmax(s).expect("non-empty row"), argmax(&e).expect("non-empty row"));
        distances.push((iy, a.abs_diff(b)));
    }
    let mut sorted: Vec<usize> = distances.iter().map(|d| d.1).collect();
    sorted.sort_unstable();
    let median = match sorted.len() {
        0 => None,
        n if n % 2 == 1 => Some(sorted[n / 2] as f64),
        n => Some((sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0),
    };
    Ok(RidgeStats { max: sorted.last().copied(), median, distances, skipped_flat })
}
