//! Browser bindings: each export runs one command of the `blowdown-lab` CLI
//! in-process and hands back its JSON (or SVG) text.

use blowdown_lab::{cli, geography, svg};
use wasm_bindgen::prelude::*;

/// Largest `x` the page may sweep; the whole region up to here renders in
/// well under a second.
pub const MAX_SWEEP_X: i64 = 30;

fn run(args: &[String]) -> Result<String, String> {
    let argv = std::iter::once("blowdown-lab".to_string()).chain(args.iter().cloned());
    let (code, out, err) = cli::run_captured(argv);
    if code == cli::EXIT_OK {
        Ok(out)
    } else {
        Err(err.trim_start_matches("error: ").trim_end().to_string())
    }
}

fn args(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

/// Recipe for `(chi_h, c1^2) = (x, c)`, executed, as a JSON document.
pub fn geography_json(x: i64, c: i64) -> Result<String, String> {
    run(&args(&["geography", "--x", &x.to_string(), "--c", &c.to_string()]))
}

/// The `C_{2p-6}` blowdown check in `R(2p-3)` as a JSON report.
pub fn prop_p_json(p: i64) -> Result<String, String> {
    run(&args(&["verify", "prop-p", "--p", &p.to_string()]))
}

/// SVG scatter of every realized point with `x <= x_max`.
pub fn region_svg_text(x_max: i64, width: u32, height: u32) -> Result<String, String> {
    if x_max > MAX_SWEEP_X {
        return Err(format!("x_max ≤ {MAX_SWEEP_X} fails: x_max = {x_max}"));
    }
    let rows = geography::sweep_rows(x_max).map_err(|e| e.to_string())?;
    Ok(svg::region_svg(&rows, width, height))
}

#[wasm_bindgen]
pub fn geography(x: i32, c: i32) -> Result<String, JsError> {
    geography_json(x.into(), c.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn verify_prop_p(p: i32) -> Result<String, JsError> {
    prop_p_json(p.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn region_svg(x_max: i32, width: u32, height: u32) -> Result<String, JsError> {
    region_svg_text(x_max.into(), width, height).map_err(|e| JsError::new(&e))
}
