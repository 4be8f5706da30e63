//! Browser demo: error curves of the upper-bound sketch, a single-document
//! sketch explorer and the sketch-sizing curve over `h`.
//!
//! The computations are plain Rust functions returning `Result<_, String>`
//! so they can be tested natively; the `#[wasm_bindgen]` wrappers only
//! convert errors.

use sinnamon::analysis::{error_cdf, error_cdf_gaussian, expected_error, min_sketch_rows, prob_overestimate};
use sinnamon::analysis::{SketchParams, ValueDist};
use sinnamon::sinnamon::Bound;
use sinnamon::{SinnamonConfig, SinnamonIndex, SparseVector};
use wasm_bindgen::prelude::*;

/// `[P(error ≤ δ) for δ in deltas]` followed by the overestimate
/// probability and the expected error.
pub fn error_curve(dist: &str, m: f64, h: u32, np: f64, deltas: &[f64]) -> Result<Vec<f64>, String> {
    let dist: ValueDist = dist.parse().map_err(|e| format!("{e}"))?;
    let params = SketchParams::new(m, h, np).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(deltas.len() + 2);
    for &d in deltas {
        out.push(error_cdf(&dist, &params, d).map_err(|e| e.to_string())?);
    }
    out.push(prob_overestimate(&dist, &params).map_err(|e| e.to_string())?);
    out.push(expected_error(&dist, &params).map_err(|e| e.to_string())?);
    Ok(out)
}

/// Gaussian closed-form CDF at each δ, for overlaying on [`error_curve`].
pub fn gaussian_closed_form(sigma: f64, m: f64, h: u32, np: f64, deltas: &[f64]) -> Result<Vec<f64>, String> {
    let params = SketchParams::new(m, h, np).map_err(|e| e.to_string())?;
    Ok(deltas.iter().map(|&d| error_cdf_gaussian(sigma, &params, d)).collect())
}

/// Minimum rows per half for `h = 1..=h_max`; the curve typically dips
/// and rises again as extra mappings start to crowd the sketch.
pub fn min_rows_curve(sigma: f64, delta: f64, epsilon: f64, np: f64, h_max: u32) -> Result<Vec<f64>, String> {
    (1..=h_max)
        .map(|h| min_sketch_rows(sigma, delta, epsilon, h, np).map(|m| m as f64).map_err(|e| e.to_string()))
        .collect()
}

/// One sketch holding a handful of documents, for inspecting cells and
/// decoded values.
#[wasm_bindgen]
pub struct SketchExplorer {
    index: SinnamonIndex,
    docs: Vec<SparseVector>,
}

impl SketchExplorer {
    pub fn create(dims: u32, m: u32, h: u32, seed: u64) -> Result<Self, String> {
        let index = SinnamonIndex::new(SinnamonConfig::new(dims, m, h).with_seed(seed)).map_err(|e| e.to_string())?;
        Ok(Self { index, docs: Vec::new() })
    }

    /// Inserts a document given as parallel coordinate and value arrays
    /// and returns its ext id.
    pub fn add(&mut self, coords: &[u32], values: &[f32]) -> Result<u32, String> {
        if coords.len() != values.len() {
            return Err(format!("{} coordinates but {} values", coords.len(), values.len()));
        }
        let id = self.docs.len() as u64;
        let v = SparseVector::from_pairs(id, coords.iter().copied().zip(values.iter().copied()))
            .map_err(|e| e.to_string())?;
        self.index.insert(&v).map_err(|e| e.to_string())?;
        self.docs.push(v);
        Ok(id as u32)
    }

    /// Sketch column of document `id`: upper rows then lower rows.
    pub fn column(&self, id: u32) -> Result<Vec<f32>, String> {
        let slot = self.slot(id)?;
        let sketch = self.index.sketch();
        let m = self.index.config().m;
        let mut out: Vec<f32> = (0..m).map(|r| sketch.upper(r as usize, slot)).collect();
        out.extend((0..m).map(|r| sketch.lower(r as usize, slot)));
        Ok(out)
    }

    /// Per active coordinate of document `id`: `[coord, value, upper, lower]`
    /// flattened.
    pub fn decode_all(&self, id: u32) -> Result<Vec<f64>, String> {
        let slot = self.slot(id)?;
        let doc = &self.docs[id as usize];
        let mut out = Vec::with_capacity(doc.nnz() * 4);
        for (c, v) in doc.iter() {
            out.push(f64::from(c));
            out.push(f64::from(v));
            out.push(f64::from(self.index.decode(slot, c, Bound::Upper)));
            out.push(f64::from(self.index.decode(slot, c, Bound::Lower)));
        }
        Ok(out)
    }

    /// Rows coordinate `coord` maps to, one per mapping.
    pub fn rows_of(&self, coord: u32) -> Vec<u32> {
        self.index.mappings().rows(coord)
    }

    fn slot(&self, id: u32) -> Result<u32, String> {
        self.index.id_map().slot_of(u64::from(id)).ok_or_else(|| format!("no document {id}"))
    }
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = errorCurve)]
pub fn error_curve_js(dist: &str, m: f64, h: u32, np: f64, deltas: &[f64]) -> Result<Vec<f64>, JsError> {
    js(error_curve(dist, m, h, np, deltas))
}

#[wasm_bindgen(js_name = gaussianClosedForm)]
pub fn gaussian_closed_form_js(sigma: f64, m: f64, h: u32, np: f64, deltas: &[f64]) -> Result<Vec<f64>, JsError> {
    js(gaussian_closed_form(sigma, m, h, np, deltas))
}

#[wasm_bindgen(js_name = minRowsCurve)]
pub fn min_rows_curve_js(sigma: f64, delta: f64, epsilon: f64, np: f64, h_max: u32) -> Result<Vec<f64>, JsError> {
    js(min_rows_curve(sigma, delta, epsilon, np, h_max))
}

#[wasm_bindgen]
impl SketchExplorer {
    #[wasm_bindgen(constructor)]
    pub fn new_js(dims: u32, m: u32, h: u32, seed: u32) -> Result<SketchExplorer, JsError> {
        js(Self::create(dims, m, h, u64::from(seed)))
    }

    #[wasm_bindgen(js_name = add)]
    pub fn add_js(&mut self, coords: &[u32], values: &[f32]) -> Result<u32, JsError> {
        js(self.add(coords, values))
    }

    #[wasm_bindgen(js_name = column)]
    pub fn column_js(&self, id: u32) -> Result<Vec<f32>, JsError> {
        js(self.column(id))
    }

    #[wasm_bindgen(js_name = decodeAll)]
    pub fn decode_all_js(&self, id: u32) -> Result<Vec<f64>, JsError> {
        js(self.decode_all(id))
    }

    #[wasm_bindgen(js_name = rowsOf)]
    pub fn rows_of_js(&self, coord: u32) -> Vec<u32> {
        self.rows_of(coord)
    }
}
