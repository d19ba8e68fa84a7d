//! Gauss-Legendre quadrature and oscillation-aware panel construction.
//!
//! All spectral integrals in this crate are computed by composite
//! Gauss-Legendre rules on panels sized to the local phase speed: a panel
//! covering `[a, b]` is kept short enough that the integrand's phase
//! advances by at most `pi/2` across it, which makes an 8-point rule
//! effectively exact. Amplitude variation contributes a second width cap.
//!
//! Nodes and weights are computed once per order by Newton iteration on the
//! Legendre polynomial and cached.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// Default points per panel.
pub const DEFAULT_GL_ORDER: usize = 8;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    // recurrence (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build_rule(n: usize) -> GlRule {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-style initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GlRule { nodes, weights }
}

static RULES: Lazy<Mutex<HashMap<usize, &'static GlRule>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Cached rule of the given order.
pub fn gl_rule(order: usize) -> &'static GlRule {
    let mut map = RULES.lock().unwrap();
    map.entry(order)
        .or_insert_with(|| Box::leak(Box::new(build_rule(order))))
}

/// Integrate a smooth real function over `[a, b]` with `panels` equal panels.
pub fn integrate_smooth(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let rule = gl_rule(DEFAULT_GL_ORDER);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let half = h / 2.0;
        let mid = lo + half;
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// A quadrature panel: interval plus scaled nodes and weights.
#[derive(Debug, Clone)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Panel decomposition of `[a, b]` for integrands with a known phase-speed
/// envelope.
///
/// `omega(lambda)` bounds the absolute phase derivative (radians per unit of
/// the integration variable) and must be monotone enough that the maximum
/// over a panel is attained at an endpoint; for every phase used here it is
/// of the form `|alpha| + 2|beta| lambda`. `amp_scale` caps the panel width
/// against amplitude variation (pass `f64::INFINITY` for constants).
#[derive(Debug, Clone)]
pub struct PanelGrid {
    pub panels: Vec<Panel>,
    pub order: usize,
}

impl PanelGrid {
    pub fn build(
        a: f64,
        b: f64,
        omega: impl Fn(f64) -> f64,
        amp_scale: f64,
        order: usize,
    ) -> PanelGrid {
        assert!(b > a, "empty integration range [{a}, {b}]");
        assert!(amp_scale > 0.0);
        let rule = gl_rule(order);
        let mut panels = Vec::new();
        let mut lo = a;
        // never fewer than 4 panels so refinement checks have substance
        let coarse_cap = (b - a) / 4.0;
        while lo < b {
            let om = omega(lo).max(omega(b.min(lo + coarse_cap)));
            let mut w = std::f64::consts::FRAC_PI_2 / om.max(1e-300);
            w = w.min(amp_scale).min(coarse_cap);
            let hi = (lo + w).min(b);
            // re-check the cap at the true right endpoint (omega rises with lambda)
            let om_hi = omega(hi);
            let w_ok = std::f64::consts::FRAC_PI_2 / om_hi.max(1e-300);
            let hi = if hi - lo > w_ok.min(amp_scale) {
                lo + w_ok.min(amp_scale).min(coarse_cap)
            } else {
                hi
            };
            let hi = hi.min(b);
            let half = (hi - lo) / 2.0;
            let mid = (hi + lo) / 2.0;
            panels.push(Panel {
                lo,
                hi,
                nodes: rule.nodes.iter().map(|x| mid + half * x).collect(),
                weights: rule.weights.iter().map(|w| w * half).collect(),
            });
            lo = hi;
        }
        PanelGrid { panels, order }
    }

    /// Halve every panel (doubles the panel count), for convergence checks.
    pub fn refined(&self) -> PanelGrid {
        let rule = gl_rule(self.order);
        let mut panels = Vec::with_capacity(self.panels.len() * 2);
        for p in &self.panels {
            let mid = (p.lo + p.hi) / 2.0;
            for (lo, hi) in [(p.lo, mid), (mid, p.hi)] {
                let half = (hi - lo) / 2.0;
                let c = (hi + lo) / 2.0;
                panels.push(Panel {
                    lo,
                    hi,
                    nodes: rule.nodes.iter().map(|x| c + half * x).collect(),
                    weights: rule.weights.iter().map(|w| w * half).collect(),
                });
            }
        }
        PanelGrid {
            panels,
            order: self.order,
        }
    }

    pub fn node_count(&self) -> usize {
        self.panels.iter().map(|p| p.nodes.len()).sum()
    }

    /// All nodes and weights flattened, in ascending order.
    pub fn flat(&self) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(self.node_count());
        let mut ws = Vec::with_capacity(self.node_count());
        for p in &self.panels {
            xs.extend_from_slice(&p.nodes);
            ws.extend_from_slice(&p.weights);
        }
        (xs, ws)
    }
}
