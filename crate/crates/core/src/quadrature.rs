//! Adaptive Gauss–Legendre integration of vector-valued functions on a panel.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

struct Rules {
    coarse: Vec<(f64, f64)>,
    fine: Vec<(f64, f64)>,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let pairs = |n| {
            GaussLegendre::new(NonZeroUsize::new(n).unwrap())
                .as_node_weight_pairs()
                .to_vec()
        };
        Rules {
            coarse: pairs(8),
            fine: pairs(16),
        }
    })
}

const REL_TOL: f64 = 1e-13;
/// Past `NOISE_DEPTH` bisections a disagreement below `NOISE_TOL` is taken
/// to be rounding noise in the integrand.
const NOISE_TOL: f64 = 1e-11;
const NOISE_DEPTH: u32 = 6;
const MAX_DEPTH: u32 = 20;

fn apply<const K: usize>(
    rule: &[(f64, f64)],
    a: f64,
    b: f64,
    f: &mut impl FnMut(f64) -> [f64; K],
    peak: &mut f64,
) -> [f64; K] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = [0.0; K];
    for &(t, w) in rule {
        let v = f(mid + half * t);
        for k in 0..K {
            acc[k] += w * v[k];
            *peak = peak.max(v[k].abs());
        }
    }
    acc.map(|s| s * half)
}

/// Integrates `f` over `[a, b]`, comparing 8- and 16-point rules and bisecting
/// until they agree to about 1e-13 of the panel's scale (1e-11 on deep
/// panels).
pub fn integrate<const K: usize>(a: f64, b: f64, f: &mut impl FnMut(f64) -> [f64; K]) -> [f64; K] {
    if !(b > a) {
        return [0.0; K];
    }
    panel(a, b, f, 0)
}

fn panel<const K: usize>(a: f64, b: f64, f: &mut impl FnMut(f64) -> [f64; K], depth: u32) -> [f64; K] {
    let r = rules();
    let mut peak = 0.0f64;
    let fine = apply(&r.fine, a, b, f, &mut peak);
    let coarse = apply(&r.coarse, a, b, f, &mut peak);
    let size = fine.iter().fold(0.0f64, |m, v| m.max(v.abs())).max((b - a) * peak);
    let err = fine
        .iter()
        .zip(&coarse)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let tol = if depth >= NOISE_DEPTH { NOISE_TOL } else { REL_TOL };
    if err <= tol * size || depth >= MAX_DEPTH {
        return fine;
    }
    let mid = 0.5 * (a + b);
    let left = panel(a, mid, f, depth + 1);
    let right = panel(mid, b, f, depth + 1);
    let mut out = [0.0; K];
    for k in 0..K {
        out[k] = left[k] + right[k];
    }
    out
}
