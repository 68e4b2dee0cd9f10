//! WebAssembly bindings for the demo page in `www/`. Every export takes and
//! returns JSON text so the page needs no generated type glue beyond
//! wasm-bindgen's string passing.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use ztids::classifiers::{
    fit_forest, fit_svm, fit_tree, ForestParams, SvmParams, TrainedModel, TreeNode, TreeParams,
};
use ztids::metrics::{compute_metrics, confusion, ConfusionMatrix, MetricsBundle};
use ztids::preprocess::{fit_scaler, Scaler, ScalerScope};
use ztids::smote::{smote_resample, ResampleReport, SmoteConfig};
use ztids::{Dataset, RowOrigin};

const AXES: [&str; 2] = ["x", "y"];

#[derive(Debug, Deserialize)]
pub struct Points {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<usize>,
}

impl Points {
    fn dataset(&self) -> Result<Dataset, String> {
        if self.points.len() != self.labels.len() {
            return Err("points and labels differ in length".into());
        }
        if self.points.is_empty() {
            return Err("add some points first".into());
        }
        let n_classes = self.labels.iter().max().map_or(0, |m| m + 1);
        let x = self.points.iter().flatten().copied().collect();
        Dataset::from_matrix(2, x, self.labels.clone(), n_classes).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Deserialize)]
pub struct SmoteRequest {
    #[serde(flatten)]
    pub data: Points,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    5
}

#[derive(Debug, Serialize)]
pub struct SmoteResponse {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<usize>,
    pub report: ResampleReport,
}

/// Grows every class to the majority count and returns only the new points.
pub fn smote(req: &SmoteRequest) -> Result<SmoteResponse, String> {
    let ds = req.data.dataset()?;
    let cfg = SmoteConfig {
        k_neighbors: req.k,
        seed: req.seed,
        ..SmoteConfig::default()
    };
    let (out, report) = smote_resample(&ds, &cfg).map_err(|e| e.to_string())?;
    let mut resp = SmoteResponse {
        points: Vec::new(),
        labels: Vec::new(),
        report,
    };
    for ((row, &c), origin) in out.rows().zip(out.y()).zip(out.origins()) {
        if *origin == RowOrigin::Synthetic {
            resp.points.push([row[0], row[1]]);
            resp.labels.push(c);
        }
    }
    Ok(resp)
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    DecisionTree,
    RandomForest,
    Svm,
}

#[derive(Debug, Deserialize)]
pub struct RegionRequest {
    #[serde(flatten)]
    pub data: Points,
    pub model: ModelChoice,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default = "default_trees")]
    pub n_trees: usize,
    #[serde(default)]
    pub smote: bool,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// `[x_min, x_max, y_min, y_max]`.
    #[serde(default = "default_bounds")]
    pub bounds: [f64; 4],
    #[serde(default)]
    pub seed: u64,
}

fn default_trees() -> usize {
    25
}

fn default_grid() -> usize {
    60
}

fn default_bounds() -> [f64; 4] {
    [0.0, 1.0, 0.0, 1.0]
}

#[derive(Debug, Serialize)]
pub struct RegionResponse {
    pub grid: usize,
    /// Predicted class per cell, row-major, first row at `y_min`.
    pub cells: Vec<usize>,
    pub train_metrics: MetricsBundle,
    pub train_confusion: ConfusionMatrix,
    pub rows_trained_on: usize,
    pub rules: Option<String>,
}

struct Fitted {
    scaler: Scaler,
    model: TrainedModel,
    rows: usize,
}

fn fit(req: &RegionRequest, ds: &Dataset) -> Result<Fitted, String> {
    let scaler = fit_scaler(ds, ScalerScope::AllColumns).map_err(|e| e.to_string())?;
    let mut train = ds.clone();
    scaler.apply(&mut train);
    if req.smote {
        let cfg = SmoteConfig {
            seed: req.seed,
            ..SmoteConfig::default()
        };
        train = smote_resample(&train, &cfg).map_err(|e| e.to_string())?.0;
    }
    let tree = TreeParams {
        max_depth: req.max_depth,
        ..TreeParams::default()
    };
    let model = match req.model {
        ModelChoice::DecisionTree => TrainedModel::DecisionTree(fit_tree(&train, &tree).map_err(|e| e.to_string())?),
        ModelChoice::RandomForest => {
            let params = ForestParams {
                n_trees: req.n_trees,
                seed: req.seed,
                tree,
                parallel: false,
                ..ForestParams::default()
            };
            TrainedModel::RandomForest(fit_forest(&train, &params).map_err(|e| e.to_string())?)
        }
        ModelChoice::Svm => {
            let params = SvmParams {
                epochs: 50,
                lambda: 1e-3,
                seed: req.seed,
            };
            TrainedModel::SvmOvr(fit_svm(&train, &params).map_err(|e| e.to_string())?)
        }
    };
    Ok(Fitted {
        scaler,
        model,
        rows: train.n_rows(),
    })
}

/// Fits the chosen model on the points and labels a `grid x grid` raster.
pub fn regions(req: &RegionRequest) -> Result<RegionResponse, String> {
    if req.grid == 0 || req.grid > 400 {
        return Err("grid must lie in 1..=400".into());
    }
    let ds = req.data.dataset()?;
    let fitted = fit(req, &ds)?;
    let predict = |x: Vec<f64>| fitted.model.predict(&x, 2).map_err(|e| e.to_string());

    let mut train_x = ds.x().to_vec();
    train_x.chunks_exact_mut(2).for_each(|r| fitted.scaler.apply_row(r));
    let train_pred = predict(train_x)?;
    let cm = confusion(ds.y(), &train_pred, ds.class_names()).map_err(|e| e.to_string())?;
    let train_metrics = compute_metrics(&cm).map_err(|e| e.to_string())?;

    let [x0, x1, y0, y1] = req.bounds;
    let g = req.grid;
    let centre = |i: usize, lo: f64, hi: f64| lo + (i as f64 + 0.5) * (hi - lo) / g as f64;
    let mut cells_x = Vec::with_capacity(g * g * 2);
    for j in 0..g {
        for i in 0..g {
            let mut p = [centre(i, x0, x1), centre(j, y0, y1)];
            fitted.scaler.apply_row(&mut p);
            cells_x.extend_from_slice(&p);
        }
    }
    let rules = match &fitted.model {
        TrainedModel::DecisionTree(t) => Some(render_rules(&t.nodes, &fitted.scaler, ds.class_names())),
        _ => None,
    };
    Ok(RegionResponse {
        grid: g,
        cells: predict(cells_x)?,
        train_metrics,
        train_confusion: cm,
        rows_trained_on: fitted.rows,
        rules,
    })
}

/// Indented if/else text for a tree, thresholds mapped back to the input
/// coordinates.
pub fn render_rules(nodes: &[TreeNode], scaler: &Scaler, class_names: &[String]) -> String {
    let unscale = |feature: usize, t: f64| match scaler.columns.get(feature) {
        Some(Some(s)) if !s.constant => t * s.std + s.mean,
        _ => t,
    };
    let mut out = String::new();
    let mut stack = vec![(0usize, 0usize, String::new())];
    while let Some((id, depth, prefix)) = stack.pop() {
        let pad = "  ".repeat(depth);
        match &nodes[id] {
            TreeNode::Leaf { class, histogram } => {
                let total: usize = histogram.iter().sum();
                out.push_str(&format!("{pad}{prefix}class {} ({total} rows)\n", class_names[*class]));
            }
            TreeNode::Split { feature, threshold, left, right, .. } => {
                let t = unscale(*feature, *threshold);
                out.push_str(&format!("{pad}{prefix}{} <= {t:.4}?\n", AXES[*feature]));
                stack.push((*right, depth + 1, "no: ".into()));
                stack.push((*left, depth + 1, "yes: ".into()));
            }
        }
    }
    out
}

fn json_call<Req, Resp>(request: &str, f: impl Fn(&Req) -> Result<Resp, String>) -> Result<String, String>
where
    Req: for<'de> Deserialize<'de>,
    Resp: Serialize,
{
    let req: Req = serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))?;
    let resp = f(&req)?;
    serde_json::to_string(&resp).map_err(|e| e.to_string())
}

/// `{points, labels, k?, seed?}` to `{points, labels, report}` of the
/// synthetic rows.
#[wasm_bindgen]
pub fn smote_points(request: &str) -> Result<String, JsError> {
    json_call(request, smote).map_err(|e| JsError::new(&e))
}

/// `{points, labels, model, max_depth?, n_trees?, smote?, grid?, bounds?}`
/// to a labelled raster plus training metrics.
#[wasm_bindgen]
pub fn decision_regions(request: &str) -> Result<String, JsError> {
    json_call(request, regions).map_err(|e| JsError::new(&e))
}

/// Weighted F1, accuracy and per-class scores for two label lists given as
/// `{truth, predicted, classes}`.
#[wasm_bindgen]
pub fn score_labels(request: &str) -> Result<String, JsError> {
    json_call(request, score).map_err(|e| JsError::new(&e))
}

#[derive(Debug, Deserialize)]
pub struct ScoreRequest {
    pub truth: Vec<usize>,
    pub predicted: Vec<usize>,
    pub classes: Vec<String>,
}

pub fn score(req: &ScoreRequest) -> Result<MetricsBundle, String> {
    let cm = confusion(&req.truth, &req.predicted, &req.classes).map_err(|e| e.to_string())?;
    compute_metrics(&cm).map_err(|e| e.to_string())
}
