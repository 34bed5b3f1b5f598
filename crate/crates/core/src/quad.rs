//! Composite Simpson quadrature with a step-halving error bracket.

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..m {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Simpson value at `panels` together with `|S(panels) − S(panels/2)|`, a
/// conservative bound on the error of the finer value.
pub fn simpson_bracketed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> (f64, f64) {
    let m = panels.max(4).next_multiple_of(4);
    let fine = simpson(&f, a, b, m);
    let coarse = simpson(&f, a, b, m / 2);
    (fine, (fine - coarse).abs())
}
