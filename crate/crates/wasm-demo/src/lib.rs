//! wasm-bindgen entry points for the browser demo in `www/`.

use bdeconv::experiments::check::{run_check, CheckSpec};
use bdeconv::experiments::deblur::{run_deblur, DeblurSpec};
use bdeconv::experiments::image::test_image;
use bdeconv::experiments::kernels::KernelKind;
use bdeconv::experiments::{solve_with, Algorithm, SyntheticProblem};
use bdeconv::solvers::SolverConfig;
use wasm_bindgen::prelude::*;

fn js_err(e: bdeconv::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct DeblurDemo {
    size: usize,
    original: Vec<f64>,
    blurred: Vec<f64>,
    restored: Vec<f64>,
    relres: f64,
    relerr: f64,
    k: usize,
    n_fft: u64,
}

#[wasm_bindgen]
impl DeblurDemo {
    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Pixel values, column-major.
    pub fn original(&self) -> Vec<f64> {
        self.original.clone()
    }

    pub fn blurred(&self) -> Vec<f64> {
        self.blurred.clone()
    }

    pub fn restored(&self) -> Vec<f64> {
        self.restored.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn relres(&self) -> f64 {
        self.relres
    }

    #[wasm_bindgen(getter)]
    pub fn relerr(&self) -> f64 {
        self.relerr
    }

    #[wasm_bindgen(getter)]
    pub fn k(&self) -> usize {
        self.k
    }

    #[wasm_bindgen(getter, js_name = nFft)]
    pub fn n_fft(&self) -> u64 {
        self.n_fft
    }
}

/// Blur the built-in scene with a 45 degree motion kernel and recover both.
#[wasm_bindgen]
pub fn deblur(size: usize, kernel_len: f64, n: usize, iters: usize, dilate: usize) -> Result<DeblurDemo, JsError> {
    let img = test_image(size);
    let spec = DeblurSpec {
        dilate,
        checkpoints: vec![iters],
        ..DeblurSpec::new(KernelKind::motion(kernel_len), n, iters)
    };
    let r = run_deblur(&img, &spec).map_err(js_err)?;
    Ok(DeblurDemo {
        size,
        original: img.data,
        blurred: r.blurred.data,
        restored: r.reconstruction.data,
        relres: r.relres,
        relerr: r.relerr,
        k: r.k,
        n_fft: r.counts.n_fft,
    })
}

/// One synthetic recovery; returns a JSON object with counts and RMSE.
#[wasm_bindgen]
pub fn recover(l: usize, k: usize, n: usize, seed: u64, algorithm: &str) -> Result<String, JsError> {
    let algo: Algorithm = algorithm.parse().map_err(js_err)?;
    let p = SyntheticProblem::generate(l, k, n, seed, None).map_err(js_err)?;
    let cfg = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    let (o, report) = solve_with(&p, algo, &cfg).map_err(js_err)?;
    Ok(format!(
        "{{\"algorithm\":\"{}\",\"iterations\":{},\"nBh\":{},\"nCm\":{},\"nFFT\":{},\"rmse\":{:e},\"residuals\":[{}]}}",
        o.algorithm,
        o.iterations,
        o.counts.n_bh,
        o.counts.n_cm,
        o.counts.n_fft,
        o.rmse,
        report
            .residuals
            .iter()
            .map(|r| format!("{r:e}"))
            .collect::<Vec<_>>()
            .join(",")
    ))
}

/// The invariant suite as CSV.
#[wasm_bindgen]
pub fn checks(seed: u64) -> Result<String, JsError> {
    let spec = CheckSpec {
        seed,
        ..CheckSpec::default()
    };
    let rep = run_check(&spec).map_err(js_err)?;
    Ok(rep.table().to_csv())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recover_reports_json() {
        let s = recover(120, 10, 10, 3, "robb").map_err(|_| ()).unwrap();
        assert!(s.starts_with("{\"algorithm\":\"ROBB\""));
        assert!(s.ends_with("]}"));
    }

    #[test]
    fn small_deblur_runs() {
        let d = deblur(32, 3.0, 120, 10, 0).map_err(|_| ()).unwrap();
        assert_eq!(d.restored().len(), 32 * 32);
        assert!(d.relres() < 1.0);
    }

    #[test]
    fn checks_are_csv() {
        let s = checks(1).map_err(|_| ()).unwrap();
        assert!(s.starts_with("check,value,tolerance,passed"));
    }
}
