//! Browser bindings for the playground page in `www/`.

mod session;

pub use session::{Session, TrainParams};

use wasm_bindgen::prelude::*;

fn js_err(e: snn_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[cfg_attr(target_arch = "wasm32", wasm_bindgen(start))]
pub fn start() {
    console_error_panic_hook::set_once();
}

#[wasm_bindgen]
pub struct Playground {
    inner: Session,
}

#[wasm_bindgen]
impl Playground {
    /// `kind` is `two-clusters` or `xor`.
    #[wasm_bindgen(constructor)]
    pub fn new(kind: &str, n: usize, seed: u64, hidden: usize) -> Result<Playground, JsError> {
        Session::new(kind, n, seed, hidden)
            .map(|inner| Playground { inner })
            .map_err(js_err)
    }

    /// JSON training curve.
    pub fn train(
        &mut self,
        epochs: usize,
        learning_rate: f64,
        batch_size: usize,
        momentum: f64,
        adaptive: bool,
    ) -> Result<String, JsError> {
        let p = TrainParams {
            epochs,
            learning_rate,
            batch_size,
            momentum,
            adaptive,
        };
        self.inner.train(p).map(|v| v.to_string()).map_err(js_err)
    }

    /// JSON summary of prune-then-retrain.
    pub fn prune(
        &mut self,
        target: f64,
        epochs: usize,
        learning_rate: f64,
        batch_size: usize,
    ) -> Result<String, JsError> {
        let p = TrainParams {
            epochs,
            learning_rate,
            batch_size,
            momentum: 0.0,
            adaptive: false,
        };
        self.inner.prune(target, p).map(|v| v.to_string()).map_err(js_err)
    }

    /// JSON epsilon-sweep table.
    pub fn sweep(&self, max_epsilon: f64, steps: usize) -> Result<String, JsError> {
        self.inner.sweep(max_epsilon, steps).map(|v| v.to_string()).map_err(js_err)
    }

    pub fn boundary(&self, resolution: usize) -> Result<Vec<f64>, JsError> {
        self.inner.boundary(resolution).map_err(js_err)
    }

    pub fn points(&self) -> Vec<f64> {
        self.inner.points()
    }

    pub fn accuracy(&self) -> Result<f64, JsError> {
        self.inner.accuracy().map_err(js_err)
    }
}
