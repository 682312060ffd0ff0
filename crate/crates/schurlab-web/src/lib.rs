//! wasm-bindgen entry points for the browser demo in `www/`. Every function
//! returns a JSON string; failures come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use schurlab::bench::{parse_symbol, GraphSpec};
use schurlab::hankel::{class_membership, rank_one_geom, ClassTag, S1Policy};
use schurlab::mlab::{cb_norm_sdp_with, radial_kernel, SdpOptions};

fn respond(r: schurlab::Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Truncated trace norms of a class matrix over doubling sizes and the verdict.
#[wasm_bindgen]
pub fn class_verdict(symbol: &str, params: &str, level: usize, class: &str, max_size: usize) -> String {
    respond((|| {
        let s = parse_symbol(symbol, params)?;
        let tag = ClassTag::parse(class)?;
        let sizes: Vec<usize> = (3..=12).map(|p| 1usize << p).filter(|&k| k <= max_size.max(16)).collect();
        let m = class_membership(&s, level, tag, &sizes, &S1Policy::default(), None)?;
        Ok(json!({
            "symbol": s.label(),
            "sizes": m.estimate.sizes,
            "values": m.estimate.values,
            "verdict": m.estimate.verdict.to_string(),
        }))
    })())
}

/// Rank-one geometric matrix: truncated trace norm against 1/(1+r)^N.
#[wasm_bindgen]
pub fn geom_norm(level: usize, r: f64, k: usize) -> String {
    respond(rank_one_geom(level, r, k).map(|g| {
        json!({
            "truncated": g.truncated_norm,
            "closed_form": g.closed_form_norm,
            "abs_diff": (g.truncated_norm - g.closed_form_norm).abs(),
        })
    }))
}

/// cb-norm bracket of a radial kernel on a graph expression like `T3ball(2)`.
#[wasm_bindgen]
pub fn cb_norm(graph: &str, symbol: &str, params: &str) -> String {
    respond((|| {
        let g = GraphSpec::parse(graph)?.build()?;
        if g.len() > 200 {
            return Err(schurlab::Error::SizeLimit { requested: g.len(), limit: 200 });
        }
        let s = parse_symbol(symbol, params)?;
        let r = cb_norm_sdp_with(&radial_kernel(&g, &s)?, &SdpOptions { tol: 1e-6, ..SdpOptions::default() })?;
        Ok(json!({
            "vertices": g.len(),
            "lower": r.lower,
            "upper": r.upper,
            "iterations": r.iterations,
            "method": r.method,
        }))
    })())
}
