//! wasm-bindgen exports for the static demo page in `www/`. Every function
//! returns a JSON string so the page needs no glue beyond `JSON.parse`.

use serde_json::json;
use wasm_bindgen::prelude::*;

use lrdlab::estimators::{estimate, Method};
use lrdlab::hermite::{
    hermite_expand, hermite_rank, DEFAULT_MAX_ORDER, DEFAULT_QUAD_ORDER, DEFAULT_QUAD_TOL,
};
use lrdlab::process::FgnSpec;
use lrdlab::study::{delta_statistic, percentile_score, run_contrast, squaring_pair};
use lrdlab::transform::TransformSpec;
use lrdlab::LrdError;

const MAX_LEN: usize = 1 << 16;
const MAX_REPLICATES: usize = 500;

fn err(e: LrdError) -> String {
    json!({ "kind": e.kind(), "message": e.to_string() }).to_string()
}

fn check_len(n: usize) -> Result<(), String> {
    if n > MAX_LEN {
        return Err(err(LrdError::Input(format!(
            "the demo caps N at {MAX_LEN}"
        ))));
    }
    Ok(())
}

/// Hermite coefficients, variance shares and rank of a transform given in
/// its text form, e.g. `shift:0.1:square`.
#[wasm_bindgen]
pub fn hermite_profile(transform: &str) -> Result<String, String> {
    let g: TransformSpec = transform.parse().map_err(err)?;
    let e = hermite_expand(&g, DEFAULT_MAX_ORDER, DEFAULT_QUAD_ORDER).map_err(err)?;
    let rank = hermite_rank(&g, DEFAULT_QUAD_TOL, DEFAULT_MAX_ORDER).map_err(err)?;
    let shares: Vec<f64> = (1..=DEFAULT_MAX_ORDER)
        .map(|m| lrdlab::hermite::factorial(m) * e.coefficient(m).powi(2) / e.l2_norm_sq)
        .collect();
    Ok(json!({
        "transform": g.to_string(),
        "rank": rank.rank.to_string(),
        "coefficients": e.coefficients,
        "variance": e.l2_norm_sq,
        "variance_shares": shares,
    })
    .to_string())
}

/// Simulates fGn, applies the transform and runs all four estimators.
#[wasm_bindgen]
pub fn simulate_and_estimate(
    hurst: f64,
    n: usize,
    seed: u64,
    transform: &str,
) -> Result<String, String> {
    check_len(n)?;
    let g: TransformSpec = transform.parse().map_err(err)?;
    if !g.is_instantaneous() {
        return Err(err(LrdError::Input(
            "the demo applies instantaneous transforms only".into(),
        )));
    }
    let y = FgnSpec::new(hurst, n).sampler().map_err(err)?.sample(seed);
    let x: Vec<f64> = y.iter().map(|v| g.eval(*v)).collect();
    let estimates: Vec<_> = [
        Method::Aggvar,
        Method::Gph,
        Method::LocalWhittle,
        Method::WhittleFarima,
    ]
    .into_iter()
    .map(|m| match estimate(&x, m, None) {
        Ok(r) => json!({ "method": m.tag(), "H_hat": r.h_hat, "stderr": r.stderr }),
        Err(e) => json!({ "method": m.tag(), "error": e.to_string() }),
    })
    .collect();
    Ok(json!({ "values": x, "estimates": estimates }).to_string())
}

/// Squaring check for one simulated series `Y + eps (Y^2 - 1)`: the delta
/// statistic and its percentile among `replicates` plain fGn contrasts.
#[wasm_bindgen]
pub fn squaring_check(
    hurst: f64,
    eps: f64,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<String, String> {
    check_len(n)?;
    if replicates == 0 || replicates > MAX_REPLICATES {
        return Err(err(LrdError::Input(format!(
            "replicates must be in 1..={MAX_REPLICATES}"
        ))));
    }
    let y = FgnSpec::new(hurst, n).sampler().map_err(err)?.sample(seed);
    let x: Vec<f64> = y.iter().map(|v| v + eps * (v * v - 1.0)).collect();
    let (h1, h2) = squaring_pair(&x, Method::LocalWhittle).map_err(err)?;
    let delta = delta_statistic(h1, h2);
    let contrast = run_contrast(
        h1.clamp(0.51, 0.99),
        n,
        replicates,
        Method::LocalWhittle,
        seed ^ 0x5eed,
    )
    .map_err(err)?;
    let p = percentile_score(delta, &contrast).map_err(err)?;
    Ok(
        json!({ "H1": h1, "H2": h2, "delta": delta, "P": p, "contrast_deltas": contrast })
            .to_string(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn profile_of_square() {
        let v = parse(&hermite_profile("square").unwrap());
        assert_eq!(v["rank"], "2");
        assert!((v["variance"].as_f64().unwrap() - 2.0).abs() < 1e-10);
        let v = parse(&hermite_profile("shift:0.1:square").unwrap());
        assert_eq!(v["rank"], "1");
    }

    #[test]
    fn bad_transform_is_reported() {
        let e = parse(&hermite_profile("nonsense").unwrap_err());
        assert_eq!(e["kind"], "parse");
    }

    #[test]
    fn estimates_for_every_method() {
        let v = parse(&simulate_and_estimate(0.8, 4096, 1, "identity").unwrap());
        assert_eq!(v["values"].as_array().unwrap().len(), 4096);
        let est = v["estimates"].as_array().unwrap();
        assert_eq!(est.len(), 4);
        for e in est {
            let h = e["H_hat"].as_f64().unwrap();
            assert!((h - 0.8).abs() < 0.15, "{e}");
        }
        assert!(simulate_and_estimate(0.8, 1 << 20, 1, "identity").is_err());
    }

    #[test]
    fn squaring_check_flags_a_perturbation() {
        let v = parse(&squaring_check(0.8, 0.3, 2048, 100, 3).unwrap());
        let p = v["P"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert_eq!(v["contrast_deltas"].as_array().unwrap().len(), 100);
    }
}
