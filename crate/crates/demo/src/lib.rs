//! Browser demo. The plain functions here do the work and are what the native
//! tests call; the `#[wasm_bindgen]` wrappers at the bottom only convert types.

use rockrelax::experiments::{run_example, Example, ExperimentConfig};
use rockrelax::motivating::{
    exact_global_minimizer, phi_corrupted, phi_uncorrupted, MotivatingInstance,
};
use rockrelax::Result;
use wasm_bindgen::prelude::*;

/// Relaxed objective minimized over `t2` at each grid point, plus both solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub x: Vec<f64>,
    pub clean: Vec<f64>,
    pub corrupted: Vec<f64>,
    pub relaxed: Vec<f64>,
    pub x_star: f64,
    pub t2_star: f64,
}

pub fn motivating_landscape(eps: f64, theta: f64, points: usize) -> Result<Landscape> {
    let inst = MotivatingInstance::new(eps, theta)?;
    let points = points.max(2);
    let (lo, hi) = inst.t2_bounds();
    let mut out = Landscape {
        x: Vec::with_capacity(points),
        clean: Vec::with_capacity(points),
        corrupted: Vec::with_capacity(points),
        relaxed: Vec::with_capacity(points),
        x_star: 0.0,
        t2_star: 0.0,
    };
    for i in 0..points {
        let x = i as f64 / (points - 1) as f64;
        let t2 = if x == 0.0 {
            0.0
        } else {
            (-x / (2.0 * theta * eps)).clamp(lo, hi)
        };
        out.x.push(x);
        out.clean.push(phi_uncorrupted(x));
        out.corrupted.push(phi_corrupted(x, eps));
        out.relaxed.push(inst.rockafellian(x, t2)?);
    }
    let (x_star, t) = exact_global_minimizer(&inst);
    out.x_star = x_star;
    out.t2_star = t[1];
    Ok(out)
}

/// Controls of the 1D example on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlCurves {
    pub x: Vec<f64>,
    pub z_true: Vec<f64>,
    pub z_corrupted: Vec<f64>,
    pub z_rock: Vec<f64>,
    pub t2: f64,
    pub e_rel_corrupted: f64,
    pub e_rel_rock: f64,
    pub linf: f64,
}

pub fn example1_curves(eps: f64, theta: f64, n_cells: usize) -> Result<ControlCurves> {
    let mut cfg = ExperimentConfig::new(Example::Ex1);
    cfg.corruption = eps;
    cfg.theta = theta;
    cfg.n_cells = n_cells;
    cfg.validate()?;
    let out = run_example(&cfg)?;
    let x = (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect();
    Ok(ControlCurves {
        x,
        z_true: out.z_true,
        z_corrupted: out.z_corrupted,
        z_rock: out.z_rock,
        t2: out.t_star.get(1).copied().unwrap_or(0.0),
        e_rel_corrupted: out.metrics.e_rel_corrupted,
        e_rel_rock: out.metrics.e_rel_rock,
        linf: out.metrics.linf_true_rock,
    })
}

/// Sample reweighting on a reduced version of the random-coefficient example.
#[derive(Debug, Clone, PartialEq)]
pub struct Reweighting {
    /// Final weights `p + t`, corrupted samples first.
    pub weights: Vec<f64>,
    pub n_corrupted: usize,
    pub corrupted_deleted: usize,
    pub clean_deleted: usize,
    pub e_rel_corrupted: f64,
    pub e_rel_rock: f64,
    pub outer_iterations: usize,
}

pub fn example2_reweighting(
    corruption: f64,
    theta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Reweighting> {
    let mut cfg = ExperimentConfig::new(Example::Ex2);
    cfg.corruption = corruption;
    cfg.theta = theta;
    cfg.n_samples = n_samples;
    cfg.seed = seed;
    cfg.n_cells = 64;
    cfg.kkl_modes = 20;
    cfg.validate()?;
    let out = run_example(&cfg)?;
    let p = 1.0 / n_samples as f64;
    let m = &out.metrics;
    Ok(Reweighting {
        weights: out.t_star.iter().map(|t| p + t).collect(),
        n_corrupted: cfg.n_corrupted(),
        corrupted_deleted: m.corrupted_deleted.map_or(0, |d| d.0),
        clean_deleted: m.clean_deleted.map_or(0, |d| d.0),
        e_rel_corrupted: m.e_rel_corrupted,
        e_rel_rock: m.e_rel_rock,
        outer_iterations: m.adi_outer,
    })
}

fn js_err(e: rockrelax::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct JsLandscape(Landscape);

#[wasm_bindgen]
impl JsLandscape {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.0.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn clean(&self) -> Vec<f64> {
        self.0.clean.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn corrupted(&self) -> Vec<f64> {
        self.0.corrupted.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn relaxed(&self) -> Vec<f64> {
        self.0.relaxed.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn x_star(&self) -> f64 {
        self.0.x_star
    }
    #[wasm_bindgen(getter)]
    pub fn t2_star(&self) -> f64 {
        self.0.t2_star
    }
}

#[wasm_bindgen(js_name = motivatingLandscape)]
pub fn js_motivating_landscape(
    eps: f64,
    theta: f64,
    points: usize,
) -> std::result::Result<JsLandscape, JsError> {
    motivating_landscape(eps, theta, points)
        .map(JsLandscape)
        .map_err(js_err)
}

#[wasm_bindgen]
pub struct JsControlCurves(ControlCurves);

#[wasm_bindgen]
impl JsControlCurves {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.0.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn z_true(&self) -> Vec<f64> {
        self.0.z_true.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn z_corrupted(&self) -> Vec<f64> {
        self.0.z_corrupted.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn z_rock(&self) -> Vec<f64> {
        self.0.z_rock.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn t2(&self) -> f64 {
        self.0.t2
    }
    #[wasm_bindgen(getter)]
    pub fn e_rel_corrupted(&self) -> f64 {
        self.0.e_rel_corrupted
    }
    #[wasm_bindgen(getter)]
    pub fn e_rel_rock(&self) -> f64 {
        self.0.e_rel_rock
    }
    #[wasm_bindgen(getter)]
    pub fn linf(&self) -> f64 {
        self.0.linf
    }
}

#[wasm_bindgen(js_name = example1Curves)]
pub fn js_example1_curves(
    eps: f64,
    theta: f64,
    n_cells: usize,
) -> std::result::Result<JsControlCurves, JsError> {
    example1_curves(eps, theta, n_cells)
        .map(JsControlCurves)
        .map_err(js_err)
}

#[wasm_bindgen]
pub struct JsReweighting(Reweighting);

#[wasm_bindgen]
impl JsReweighting {
    #[wasm_bindgen(getter)]
    pub fn weights(&self) -> Vec<f64> {
        self.0.weights.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn n_corrupted(&self) -> usize {
        self.0.n_corrupted
    }
    #[wasm_bindgen(getter)]
    pub fn corrupted_deleted(&self) -> usize {
        self.0.corrupted_deleted
    }
    #[wasm_bindgen(getter)]
    pub fn clean_deleted(&self) -> usize {
        self.0.clean_deleted
    }
    #[wasm_bindgen(getter)]
    pub fn e_rel_corrupted(&self) -> f64 {
        self.0.e_rel_corrupted
    }
    #[wasm_bindgen(getter)]
    pub fn e_rel_rock(&self) -> f64 {
        self.0.e_rel_rock
    }
    #[wasm_bindgen(getter)]
    pub fn outer_iterations(&self) -> usize {
        self.0.outer_iterations
    }
}

#[wasm_bindgen(js_name = example2Reweighting)]
pub fn js_example2_reweighting(
    corruption: f64,
    theta: f64,
    n_samples: usize,
    seed: u64,
) -> std::result::Result<JsReweighting, JsError> {
    example2_reweighting(corruption, theta, n_samples, seed)
        .map(JsReweighting)
        .map_err(js_err)
}
