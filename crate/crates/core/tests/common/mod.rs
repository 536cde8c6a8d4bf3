#![allow(dead_code)]

use gh_stein::GhParams64;

/// λ ∈ {-1, 0.5, 2}, α ∈ {1, 2, 5}, β ∈ {0, ±α/2}, δ = 1, μ = 0.
pub fn grid() -> Vec<GhParams64> {
    let mut out = Vec::with_capacity(27);
    for lambda in [-1.0, 0.5, 2.0] {
        for alpha in [1.0, 2.0, 5.0] {
            for beta in [0.0, alpha / 2.0, -alpha / 2.0] {
                out.push(GhParams64::new(lambda, alpha, beta, 1.0, 0.0).unwrap());
            }
        }
    }
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}
