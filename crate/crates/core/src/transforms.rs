//! Spherical Fourier transform pair, calibration, and norms.
//!
//! Conventions. The forward transform of a radial function `f` is
//!
//! ```text
//! fhat(lambda) = int_0^inf f(s) phi_lambda(s) A(s) ds,
//! ```
//!
//! and the inversion carries one space-dependent constant:
//!
//! ```text
//! f(s) = C_cal int_0^inf fhat(lambda) phi_lambda(s) |c(lambda)|^-2 dlambda.
//! ```
//!
//! `C_cal` is not hardcoded; it is calibrated once per space by a round trip
//! on a reference Gaussian profile and stored in the calibration record
//! (closed-form check: `C_cal = 2/pi` on `H^3`). Plancherel then reads
//! `int |f|^2 A ds = C_cal int |fhat|^2 |c|^-2 dlambda` and the Sobolev norm
//! of order `alpha` inserts the symbol `(lambda^2 + rho^2)^alpha`.
//!
//! Quadrature lives on two composite Gauss-Legendre grids: a radial grid on
//! `[0, s_max]` (geometric panels near the origin, then uniform panels sized
//! by an oscillation hint) and a spectral grid on `[0, lambda_max]` with
//! panel widths bounded by `pi/(2 s_max)` so that `e^(i lambda s)` never
//! advances more than a quarter period across a panel.

use crate::quad::{self, PanelGrid, DEFAULT_GL_ORDER};
use crate::space::SpaceParams;
use crate::specfun;
use crate::spherical::{self, Accuracy, CalibrationRecord, PhiEvaluator};
use once_cell::sync::Lazy;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Composite quadrature grid on `[0, s_max]` for radial integrals.
///
/// Geometric (dyadic) panels refine toward the origin so that profiles
/// concentrated at scale `1/N` keep nodes inside their support; the rest of
/// the interval is uniform with panel width at most `pi/(2(1+lambda_hint))`.
/// The node budget is a floor, not a cap: the oscillation rule may add
/// panels beyond it.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub s_max: f64,
}

const GEO_LEVELS: i32 = 11;

impl RadialGrid {
    pub fn new(s_max: f64, lambda_hint: f64, node_budget: usize) -> Self {
        assert!(s_max > 0.0 && lambda_hint >= 0.0);
        let order = DEFAULT_GL_ORDER;
        let rule = quad::gl_rule(order);
        let w_osc = PI / (2.0 * (1.0 + lambda_hint));

        let geo_end = (s_max / 4.0).min(0.5);
        let mut edges = vec![0.0, geo_end * 0.5f64.powi(GEO_LEVELS)];
        for k in (0..GEO_LEVELS).rev() {
            let lo = geo_end * 0.5f64.powi(k + 1);
            let hi = geo_end * 0.5f64.powi(k);
            let sub = (((hi - lo) / w_osc).ceil() as usize).max(1);
            for j in 1..=sub {
                edges.push(lo + (hi - lo) * j as f64 / sub as f64);
            }
        }
        let geo_panels = edges.len() - 1;
        let budget_panels = node_budget.div_ceil(order);
        let need = ((s_max - geo_end) / w_osc).ceil() as usize;
        let uni_panels = need.max(budget_panels.saturating_sub(geo_panels)).max(4);
        for j in 1..=uni_panels {
            edges.push(geo_end + (s_max - geo_end) * j as f64 / uni_panels as f64);
        }

        let mut nodes = Vec::with_capacity((edges.len() - 1) * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let half = (w[1] - w[0]) / 2.0;
            let mid = (w[1] + w[0]) / 2.0;
            nodes.extend(rule.nodes.iter().map(|x| mid + half * x));
            weights.extend(rule.weights.iter().map(|g| g * half));
        }
        RadialGrid {
            nodes,
            weights,
            s_max,
        }
    }

    /// Default transform grid: `s_max = 8`, 2048-node budget, resolves
    /// oscillation up to the default spectral cap.
    pub fn default_grid() -> Self {
        RadialGrid::new(DEFAULT_S_MAX, DEFAULT_LAMBDA_MAX, 2048)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int f(s) A(s) ds` over the grid.
    pub fn integrate_with_density(
        &self,
        params: &SpaceParams,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s) * params.density(s))
            .sum()
    }
}

/// Composite quadrature grid on `[a, lambda_max]` for spectral integrals,
/// with panel widths bounded by `pi/(2 s_hint)`.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lambda_lo: f64,
    pub lambda_max: f64,
}

impl SpectralGrid {
    pub fn new(lambda_max: f64, s_hint: f64) -> Self {
        Self::window(0.0, lambda_max, s_hint)
    }

    /// Grid on a frequency window `[a, b]`, e.g. the support of a band
    /// profile.
    pub fn window(a: f64, b: f64, s_hint: f64) -> Self {
        assert!(b > a && a >= 0.0);
        let grid = PanelGrid::build(a, b, |_| s_hint.max(1e-9), f64::INFINITY, DEFAULT_GL_ORDER);
        let (nodes, weights) = grid.flat();
        SpectralGrid {
            nodes,
            weights,
            lambda_lo: a,
            lambda_max: b,
        }
    }

    /// Grid on `[a, b]` with at least `min_panels` uniform panels,
    /// for norm integrals of non-oscillatory windowed profiles.
    pub fn resolve(a: f64, b: f64, min_panels: usize) -> Self {
        assert!(b > a && a >= 0.0);
        let panels = min_panels.max(4);
        let rule = quad::gl_rule(DEFAULT_GL_ORDER);
        let mut nodes = Vec::with_capacity(panels * DEFAULT_GL_ORDER);
        let mut weights = Vec::with_capacity(panels * DEFAULT_GL_ORDER);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            let half = 0.5 * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        SpectralGrid {
            nodes,
            weights,
            lambda_lo: a,
            lambda_max: b,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

pub const DEFAULT_S_MAX: f64 = 8.0;
pub const DEFAULT_LAMBDA_MAX: f64 = 12.0;

/// Dense table of `phi_lambda(s)` over a spectral-by-radial node product,
/// row-major in `lambda`. Rows are independent, so they are computed in
/// parallel and collected in order (worker count never changes the bytes).
#[derive(Debug, Clone)]
pub struct PhiTable {
    pub lambdas: Vec<f64>,
    pub radii: Vec<f64>,
    values: Vec<f64>,
    bounds: Vec<f64>,
}

impl PhiTable {
    pub fn build(ev: &PhiEvaluator, lambdas: &[f64], radii: &[f64], accuracy: Accuracy) -> Self {
        let rows: Vec<Vec<spherical::PhiValue>> = lambdas
            .par_iter()
            .map(|&lam| ev.eval_on_grid(lam, radii, accuracy))
            .collect();
        let mut values = Vec::with_capacity(lambdas.len() * radii.len());
        let mut bounds = Vec::with_capacity(values.capacity());
        for row in rows {
            for pv in row {
                values.push(pv.value);
                bounds.push(pv.error_bound);
            }
        }
        PhiTable {
            lambdas: lambdas.to_vec(),
            radii: radii.to_vec(),
            values,
            bounds,
        }
    }

    pub fn value(&self, i_lambda: usize, j_radius: usize) -> f64 {
        self.values[i_lambda * self.radii.len() + j_radius]
    }

    pub fn bound(&self, i_lambda: usize, j_radius: usize) -> f64 {
        self.bounds[i_lambda * self.radii.len() + j_radius]
    }

    pub fn row(&self, i_lambda: usize) -> &[f64] {
        let w = self.radii.len();
        &self.values[i_lambda * w..(i_lambda + 1) * w]
    }
}

/// Transform engine for one space: owns the evaluator, the two grids, the
/// `phi` table on their product, and the calibrated inversion constant.
#[derive(Debug)]
pub struct Transformer {
    ev: PhiEvaluator,
    pub radial: RadialGrid,
    pub spectral: SpectralGrid,
    pub table: PhiTable,
    /// `A(s)` at the radial nodes.
    pub density: Vec<f64>,
    /// `|c(lambda)|^-2` at the spectral nodes.
    pub pl_density: Vec<f64>,
    pub c_cal: f64,
}

impl Transformer {
    /// Build with the default grids and the cached calibration.
    pub fn new(params: SpaceParams, accuracy: Accuracy) -> Self {
        Self::with_grids(
            params,
            RadialGrid::default_grid(),
            SpectralGrid::new(DEFAULT_LAMBDA_MAX, DEFAULT_S_MAX),
            accuracy,
        )
    }

    pub fn with_grids(
        params: SpaceParams,
        radial: RadialGrid,
        spectral: SpectralGrid,
        accuracy: Accuracy,
    ) -> Self {
        let cal = full_calibration(&params);
        let c_cal = cal.c_cal.expect("full calibration fills c_cal");
        let ev = PhiEvaluator::new(params, cal);
        let table = PhiTable::build(&ev, &spectral.nodes, &radial.nodes, accuracy);
        let density = radial.nodes.iter().map(|&s| params.density(s)).collect();
        let pl_density = spectral
            .nodes
            .iter()
            .map(|&l| specfun::plancherel_density(&params, l))
            .collect();
        Transformer {
            ev,
            radial,
            spectral,
            table,
            density,
            pl_density,
            c_cal,
        }
    }

    pub fn params(&self) -> &SpaceParams {
        self.ev.params()
    }

    pub fn evaluator(&self) -> &PhiEvaluator {
        &self.ev
    }

    /// Forward transform of samples on the radial grid, at every spectral
    /// node.
    pub fn forward(&self, f_radial: &[f64]) -> Vec<f64> {
        assert_eq!(f_radial.len(), self.radial.len());
        (0..self.spectral.len())
            .map(|i| {
                let row = self.table.row(i);
                let mut acc = 0.0;
                for j in 0..f_radial.len() {
                    acc += self.radial.weights[j] * f_radial[j] * row[j] * self.density[j];
                }
                acc
            })
            .collect()
    }

    /// Inverse transform of samples on the spectral grid, at every radial
    /// node, including the calibrated constant.
    pub fn inverse(&self, fhat: &[f64]) -> Vec<f64> {
        let raw = self.inverse_uncalibrated(fhat);
        raw.into_iter().map(|v| self.c_cal * v).collect()
    }

    fn inverse_uncalibrated(&self, fhat: &[f64]) -> Vec<f64> {
        assert_eq!(fhat.len(), self.spectral.len());
        (0..self.radial.len())
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..fhat.len() {
                    acc += self.spectral.weights[i]
                        * fhat[i]
                        * self.table.value(i, j)
                        * self.pl_density[i];
                }
                acc
            })
            .collect()
    }

    /// `C_cal int a b |c|^-2 dlambda` for spectral samples.
    pub fn plancherel_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.spectral.len() {
            acc += self.spectral.weights[i] * a[i] * b[i] * self.pl_density[i];
        }
        self.c_cal * acc
    }

    /// Squared Sobolev norm of order `alpha` from spectral samples.
    pub fn sobolev_sq(&self, fhat: &[f64], alpha: f64) -> f64 {
        let rho2 = self.params().rho() * self.params().rho();
        let mut acc = 0.0;
        for i in 0..self.spectral.len() {
            let sym = (self.spectral.nodes[i] * self.spectral.nodes[i] + rho2).powf(alpha);
            acc += self.spectral.weights[i] * fhat[i] * fhat[i] * sym * self.pl_density[i];
        }
        self.c_cal * acc
    }

    /// `int |f|^2 A ds` for samples on the radial grid.
    pub fn space_l2_sq(&self, f_radial: &[f64]) -> f64 {
        assert_eq!(f_radial.len(), self.radial.len());
        let mut acc = 0.0;
        for j in 0..f_radial.len() {
            acc += self.radial.weights[j] * f_radial[j] * f_radial[j] * self.density[j];
        }
        acc
    }
}

/// `(int |f|^q A ds)^(1/q)` over an arbitrary radial grid, from |f| samples.
pub fn space_lq_norm(params: &SpaceParams, grid: &RadialGrid, abs_f: &[f64], q: f64) -> f64 {
    assert_eq!(abs_f.len(), grid.len());
    assert!(q > 0.0);
    let mut acc = 0.0;
    for j in 0..abs_f.len() {
        acc += grid.weights[j] * abs_f[j].powf(q) * params.density(grid.nodes[j]);
    }
    acc.powf(1.0 / q)
}

/// Weak-L2 quasinorm `sup_t t vol(|f| > t)^(1/2)` over a logarithmic level
/// ladder spanning eight decades below the peak.
pub fn weak_l2_quasinorm(
    params: &SpaceParams,
    grid: &RadialGrid,
    abs_f: &[f64],
    levels: usize,
) -> f64 {
    assert_eq!(abs_f.len(), grid.len());
    let peak = abs_f.iter().cloned().fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return 0.0;
    }
    let mut best = 0.0f64;
    for k in 0..levels {
        let t = peak * 1e-8f64.powf(k as f64 / (levels - 1) as f64);
        let mut vol = 0.0;
        for j in 0..abs_f.len() {
            if abs_f[j] > t {
                vol += grid.weights[j] * params.density(grid.nodes[j]);
            }
        }
        best = best.max(t * vol.sqrt());
    }
    best
}

/// Reference spectral profile used for calibration: `e^(-lambda^2/2)`.
pub fn reference_gaussian(lambda: f64) -> f64 {
    (-lambda * lambda / 2.0).exp()
}

/// Decay class of a spectral profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Smoothness {
    /// Identically zero outside the support interval.
    CompactBump,
    /// Decays faster than any polynomial; the support field is the window
    /// where the profile is numerically relevant.
    SchwartzDecay,
}

/// A spectral-side radial profile `lambda -> fhat(lambda)`.
#[derive(Clone)]
pub struct SpectralProfile {
    pub support: (f64, f64),
    pub smoothness: Smoothness,
    eval: std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for SpectralProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralProfile")
            .field("support", &self.support)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl SpectralProfile {
    pub fn new(
        support: (f64, f64),
        smoothness: Smoothness,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(support.1 > support.0 && support.0 >= 0.0);
        SpectralProfile {
            support,
            smoothness,
            eval: std::sync::Arc::new(eval),
        }
    }

    /// Evaluate the profile; compact bumps are clamped to zero outside
    /// their support regardless of the inner closure.
    pub fn eval(&self, lambda: f64) -> f64 {
        if self.smoothness == Smoothness::CompactBump
            && (lambda < self.support.0 || lambda > self.support.1)
        {
            return 0.0;
        }
        (self.eval)(lambda)
    }
}

/// Profile-correspondence errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrespondenceError {
    /// The frequency correspondence requires support bounded away from 0.
    SupportTouchesZero,
}

impl std::fmt::Display for CorrespondenceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrespondenceError::SupportTouchesZero => {
                write!(f, "profile support must be bounded away from 0")
            }
        }
    }
}

impl std::error::Error for CorrespondenceError {}

/// Map a spectral profile to its Euclidean radial counterpart:
/// `Fg(lambda) = |c(lambda)|^-2 fhat(lambda) / lambda^(n-1)`. Requires the
/// support bounded away from zero.
pub fn correspondence_to_euclidean(
    params: &SpaceParams,
    profile: &SpectralProfile,
) -> Result<SpectralProfile, CorrespondenceError> {
    if profile.support.0 <= 0.0 {
        return Err(CorrespondenceError::SupportTouchesZero);
    }
    let p = *params;
    let inner = profile.clone();
    let n1 = params.n() as i32 - 1;
    Ok(SpectralProfile::new(
        profile.support,
        profile.smoothness,
        move |l| specfun::plancherel_density(&p, l) * inner.eval(l) / l.powi(n1),
    ))
}

/// Inverse of [`correspondence_to_euclidean`]:
/// `fhat(lambda) = lambda^(n-1) Fg(lambda) / |c(lambda)|^-2`.
pub fn correspondence_from_euclidean(
    params: &SpaceParams,
    e_profile: &SpectralProfile,
) -> Result<SpectralProfile, CorrespondenceError> {
    if e_profile.support.0 <= 0.0 {
        return Err(CorrespondenceError::SupportTouchesZero);
    }
    let p = *params;
    let inner = e_profile.clone();
    let n1 = params.n() as i32 - 1;
    Ok(SpectralProfile::new(
        e_profile.support,
        e_profile.smoothness,
        move |l| l.powi(n1) * inner.eval(l) / specfun::plancherel_density(&p, l),
    ))
}

static CAL_CACHE: Lazy<Mutex<HashMap<String, CalibrationRecord>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Full per-space calibration: series error constants plus the inversion
/// constant. Cached per process; deterministic for a given space.
pub fn full_calibration(params: &SpaceParams) -> CalibrationRecord {
    let key = params.label();
    if let Some(rec) = CAL_CACHE.lock().unwrap().get(&key) {
        return rec.clone();
    }
    let mut rec = spherical::calibrate_series_constants(params);
    let ev = PhiEvaluator::new(*params, rec.clone());
    rec.c_cal = Some(calibrate_inversion(&ev));
    CAL_CACHE.lock().unwrap().insert(key, rec.clone());
    rec
}

/// Round-trip calibration of the inversion constant on the reference
/// Gaussian: with `r = forward(inverse_1(g))` (inversion constant set to 1),
/// the least-squares match of `C r = g` in the Plancherel inner product is
/// `C = <g, g> / <r, g>`.
fn calibrate_inversion(ev: &PhiEvaluator) -> f64 {
    let params = *ev.params();
    let radial = RadialGrid::default_grid();
    let spectral = SpectralGrid::new(DEFAULT_LAMBDA_MAX, DEFAULT_S_MAX);
    let table = PhiTable::build(ev, &spectral.nodes, &radial.nodes, Accuracy::Best);
    let density: Vec<f64> = radial.nodes.iter().map(|&s| params.density(s)).collect();
    let pl: Vec<f64> = spectral
        .nodes
        .iter()
        .map(|&l| specfun::plancherel_density(&params, l))
        .collect();
    let ghat: Vec<f64> = spectral.nodes.iter().map(|&l| reference_gaussian(l)).collect();

    // g1(s) = int ghat phi |c|^-2, then r(lambda) = int g1 phi A
    let g1: Vec<f64> = (0..radial.len())
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..spectral.len() {
                acc += spectral.weights[i] * ghat[i] * table.value(i, j) * pl[i];
            }
            acc
        })
        .collect();
    let r: Vec<f64> = (0..spectral.len())
        .map(|i| {
            let row = table.row(i);
            let mut acc = 0.0;
            for j in 0..radial.len() {
                acc += radial.weights[j] * g1[j] * row[j] * density[j];
            }
            acc
        })
        .collect();

    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..spectral.len() {
        num += spectral.weights[i] * ghat[i] * ghat[i] * pl[i];
        den += spectral.weights[i] * r[i] * ghat[i] * pl[i];
    }
    num / den
}
