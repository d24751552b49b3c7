//! Deterministic quadrature rules shared by the fractional-calculus code.

use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Outcome of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Gauss–Legendre with node doubling, starting from `start` nodes, until
/// successive values agree to `rel_tol`.
pub fn gauss_doubling(start: usize, max: usize, rel_tol: f64, f: impl Fn(&GaussLegendre) -> f64) -> QuadResult {
    let mut n = start;
    let mut prev = f(&GaussLegendre::new(n));
    let mut evaluations = n;
    loop {
        let next_n = 2 * n;
        let value = f(&GaussLegendre::new(next_n));
        evaluations += next_n;
        let error = (value - prev).abs();
        if error <= rel_tol * value.abs() || next_n >= max {
            return QuadResult { value, error, evaluations };
        }
        prev = value;
        n = next_n;
    }
}

/// Tanh–sinh quadrature on `[a, b]`; tolerant of integrable endpoint
/// singularities. `f` receives the abscissa and its distances to `a` and `b`,
/// which are exact even where `x` itself rounds onto an endpoint.
pub fn tanh_sinh(a: f64, b: f64, rel_tol: f64, f: impl Fn(f64, f64, f64) -> f64) -> QuadResult {
    let half = 0.5 * (b - a);
    let t_max = 6.5;
    let term = |t: f64| -> f64 {
        let s = 0.5 * PI * t.sinh();
        let cosh_s = s.cosh();
        // 1 - tanh(s) and 1 + tanh(s) without cancellation
        let em = 1.0 / (s.exp() * cosh_s);
        let ep = 1.0 / ((-s).exp() * cosh_s);
        let da = half * ep;
        let db = half * em;
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        let weight = 0.5 * PI * t.cosh() / (cosh_s * cosh_s);
        let v = f(a + da, da, db);
        if v.is_finite() {
            half * weight * v
        } else {
            0.0
        }
    };
    let mut step = 1.0;
    let mut sum = term(0.0);
    let mut k = 1;
    while k as f64 * step <= t_max {
        sum += term(k as f64 * step) + term(-(k as f64) * step);
        k += 1;
    }
    let mut evaluations = 2 * k - 1;
    let mut value = sum * step;
    let mut error = f64::INFINITY;
    for _ in 0..12 {
        step *= 0.5;
        let mut t = step;
        while t <= t_max {
            sum += term(t) + term(-t);
            evaluations += 2;
            t += 2.0 * step;
        }
        let next = sum * step;
        error = (next - value).abs();
        value = next;
        if error <= rel_tol * value.abs() {
            break;
        }
    }
    QuadResult { value, error, evaluations }
}
