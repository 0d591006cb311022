//! Five-point Gauss-Legendre quadrature on `[a, b]`.

const NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];

const WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

#[inline]
pub fn gauss5<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for k in 0..5 {
        acc += WEIGHTS[k] * f(mid + half * NODES[k]);
    }
    acc * half
}
