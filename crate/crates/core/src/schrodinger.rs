//! Schrodinger propagator, maximal function, and the Euclidean comparison
//! operator.
//!
//! For a band-limited spectral profile `fhat` supported in `[a, b]` the
//! propagated solution is
//!
//! ```text
//! S_t f(s) = C_cal int_a^b e^(i t (lambda^2 + rho^2)) fhat(lambda)
//!            phi_lambda(s) |c(lambda)|^-2 dlambda.
//! ```
//!
//! The integrand oscillates with phase speed at most `s + 2|t| lambda`, so
//! quadrature panels are sized by that envelope (a quarter period per
//! panel). For a fixed radius the lambda-dependent factors are frozen into a
//! [`PropLine`]; evaluating at a new time is then a single weighted phase
//! sum, which makes time ladders and maximal functions cheap.
//!
//! The radial Euclidean propagator
//!
//! ```text
//! T0 psi(s) = int e^(i t lambda^2) Fpsi(lambda) K_mu(lambda s)
//!             lambda^(n-1) dlambda,  mu = (n-2)/2,
//! ```
//!
//! is carried alongside; on `H^3` the exact transference identity
//! `S_t f(s) = (C_cal/2) e^(it) (s/sinh s) T0 f(s)` ties the two together
//! and is used as an end-to-end check of the machinery.

use crate::quad::{PanelGrid, DEFAULT_GL_ORDER};
use crate::space::SpaceParams;
use crate::specfun;
use crate::spherical::{Accuracy, PhiEvaluator};
use num_complex::Complex64;
use rayon::prelude::*;

/// Time ladder for propagation sweeps.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    pub times: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(t_min: f64, t_max: f64, count: usize) -> Self {
        assert!(count >= 2 && t_max > t_min);
        let times = (0..count)
            .map(|i| t_min + (t_max - t_min) * i as f64 / (count - 1) as f64)
            .collect();
        TimeGrid { times }
    }

    pub fn log_spaced(t_min: f64, t_max: f64, count: usize) -> Self {
        assert!(count >= 2 && t_max > t_min && t_min > 0.0);
        let ratio = t_max / t_min;
        let times = (0..count)
            .map(|i| t_min * ratio.powf(i as f64 / (count - 1) as f64))
            .collect();
        TimeGrid { times }
    }

    /// Default ladder for a space: logarithmic from `1e-6/rho^2` to
    /// `0.1/rho^2` (64 points) then uniform up to `(1 - 1e-6)/rho^2`
    /// (193 points), covering both the short-time and unit-scale regimes.
    pub fn default_for(params: &SpaceParams) -> Self {
        let r2 = params.rho() * params.rho();
        let mut g = TimeGrid::log_spaced(1e-6 / r2, 0.1 / r2, 64);
        let tail = TimeGrid::uniform(0.1 / r2, (1.0 - 1e-6) / r2, 194);
        g.times.extend_from_slice(&tail.times[1..]);
        g
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Frozen lambda-quadrature of the propagation integral at one radius:
/// `S_t f(s) = sum_i coeff_i e^(i t shift_i)` plus a time-independent bound
/// on the spherical-function error channel.
#[derive(Debug, Clone)]
pub struct PropLine {
    pub s: f64,
    pub lambdas: Vec<f64>,
    /// `C_cal w_i fhat(lambda_i) phi_(lambda_i)(s) |c|^-2(lambda_i)`.
    pub coeff: Vec<f64>,
    /// `lambda_i^2 + rho^2` (propagator dispersion values).
    pub shift: Vec<f64>,
    /// `C_cal sum w_i |fhat| |c|^-2 (phi error bound)`, valid for every `t`.
    pub err_bound: f64,
}

impl PropLine {
    /// Evaluate the propagated value at time `t`.
    pub fn eval(&self, t: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..self.coeff.len() {
            let (sn, cs) = (t * self.shift[i]).sin_cos();
            re += self.coeff[i] * cs;
            im += self.coeff[i] * sn;
        }
        Complex64::new(re, im)
    }

    pub fn node_count(&self) -> usize {
        self.lambdas.len()
    }
}

/// Panel width cap against amplitude variation of a band profile.
pub fn default_amp_scale(band: (f64, f64)) -> f64 {
    ((band.1 - band.0) / 8.0).min(2.0)
}

/// Build the frozen quadrature line for `fhat` on `band` at radius `s`,
/// with panels sized for times up to `t_max`.
pub fn band_line(
    ev: &PhiEvaluator,
    c_cal: f64,
    fhat: &(impl Fn(f64) -> f64 + ?Sized),
    band: (f64, f64),
    s: f64,
    t_max: f64,
    amp_scale: f64,
    accuracy: Accuracy,
) -> PropLine {
    build_line(ev, c_cal, fhat, band, s, t_max, amp_scale, accuracy, 0)
}

/// As [`band_line`] with `refine` extra halvings of every panel, for
/// quadrature convergence checks.
pub fn band_line_refined(
    ev: &PhiEvaluator,
    c_cal: f64,
    fhat: &(impl Fn(f64) -> f64 + ?Sized),
    band: (f64, f64),
    s: f64,
    t_max: f64,
    amp_scale: f64,
    accuracy: Accuracy,
    refine: usize,
) -> PropLine {
    build_line(ev, c_cal, fhat, band, s, t_max, amp_scale, accuracy, refine)
}

#[allow(clippy::too_many_arguments)]
fn build_line(
    ev: &PhiEvaluator,
    c_cal: f64,
    fhat: &(impl Fn(f64) -> f64 + ?Sized),
    band: (f64, f64),
    s: f64,
    t_max: f64,
    amp_scale: f64,
    accuracy: Accuracy,
    refine: usize,
) -> PropLine {
    let params = ev.params();
    let rho2 = params.rho() * params.rho();
    let mut grid = PanelGrid::build(
        band.0,
        band.1,
        |l| s + 2.0 * t_max.abs() * l,
        amp_scale,
        DEFAULT_GL_ORDER,
    );
    for _ in 0..refine {
        grid = grid.refined();
    }
    let (lambdas, weights) = grid.flat();
    let phis = ev.eval_many_lambdas(&lambdas, s, accuracy);
    let mut coeff = Vec::with_capacity(lambdas.len());
    let mut shift = Vec::with_capacity(lambdas.len());
    let mut err = 0.0;
    for i in 0..lambdas.len() {
        let pl = specfun::plancherel_density(params, lambdas[i]);
        let fh = fhat(lambdas[i]);
        coeff.push(c_cal * weights[i] * fh * phis[i].value * pl);
        shift.push(lambdas[i] * lambdas[i] + rho2);
        err += weights[i] * fh.abs() * pl * phis[i].error_bound;
    }
    PropLine {
        s,
        lambdas,
        coeff,
        shift,
        err_bound: c_cal.abs() * err,
    }
}

/// Euclidean analogue at one radius: coefficients
/// `w_i Fpsi(lambda_i) K_mu(lambda_i s) lambda_i^(n-1)`, dispersion
/// `lambda^2`.
pub fn euclidean_line(
    n: usize,
    fhat: &(impl Fn(f64) -> f64 + ?Sized),
    band: (f64, f64),
    s: f64,
    t_max: f64,
    amp_scale: f64,
) -> PropLine {
    let mu = (n as f64 - 2.0) / 2.0;
    let grid = PanelGrid::build(
        band.0,
        band.1,
        |l| s + 2.0 * t_max.abs() * l,
        amp_scale,
        DEFAULT_GL_ORDER,
    );
    let (lambdas, weights) = grid.flat();
    let mut coeff = Vec::with_capacity(lambdas.len());
    let mut shift = Vec::with_capacity(lambdas.len());
    for i in 0..lambdas.len() {
        let kern = specfun::bessel_kernel(mu, lambdas[i] * s).expect("kernel in range");
        coeff.push(weights[i] * fhat(lambdas[i]) * kern * lambdas[i].powi(n as i32 - 1));
        shift.push(lambdas[i] * lambdas[i]);
    }
    PropLine {
        s,
        lambdas,
        coeff,
        shift,
        err_bound: 0.0,
    }
}

/// Discrete maximal value of `|line.eval(t)|` over a time ladder, sharpened
/// by one parabolic refinement around the discrete argmax.
#[derive(Debug, Clone, Copy)]
pub struct MaximalResult {
    pub sup: f64,
    pub t_star: f64,
}

pub fn maximal_over(line: &PropLine, times: &[f64]) -> MaximalResult {
    assert!(!times.is_empty());
    let vals: Vec<f64> = times.iter().map(|&t| line.eval(t).norm()).collect();
    let mut m = 0;
    for i in 1..vals.len() {
        if vals[i] > vals[m] {
            m = i;
        }
    }
    let mut best = MaximalResult {
        sup: vals[m],
        t_star: times[m],
    };
    if m > 0 && m + 1 < times.len() {
        if let Some(tv) = parabola_vertex(
            (times[m - 1], vals[m - 1]),
            (times[m], vals[m]),
            (times[m + 1], vals[m + 1]),
        ) {
            if tv > times[m - 1] && tv < times[m + 1] {
                let refined = line.eval(tv).norm();
                if refined > best.sup {
                    best = MaximalResult {
                        sup: refined,
                        t_star: tv,
                    };
                }
            }
        }
    }
    best
}

/// Vertex abscissa of the parabola through three points with distinct
/// abscissas; `None` when degenerate (collinear or opening upward toward
/// the middle).
fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<f64> {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let den = y0 * (x1 - x2) + y1 * (x2 - x0) + y2 * (x0 - x1);
    if den.abs() < 1e-300 {
        return None;
    }
    let num = y0 * (x1 * x1 - x2 * x2) + y1 * (x2 * x2 - x0 * x0) + y2 * (x0 * x0 - x1 * x1);
    Some(0.5 * num / den)
}

/// Maximal function of the propagator over a time ladder, per radius.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MaximalField {
    pub radii: Vec<f64>,
    /// Discrete-plus-refined `sup_t |S_t f(s)|` per radius.
    pub sup: Vec<f64>,
    /// The time attaining the sup (may sit between ladder points after the
    /// parabolic refinement).
    pub argmax_t: Vec<f64>,
    /// Time-independent spherical-function error channel per radius.
    pub err_bound: Vec<f64>,
}

/// Compute the maximal field on a radius grid. Radii are processed in
/// parallel and collected in input order, so the output is identical for
/// any worker count. Panels are sized for the ladder's largest time, which
/// keeps [`linearized_on_grid`] with the argmax times on the exact same
/// quadrature.
#[allow(clippy::too_many_arguments)]
pub fn maximal_field(
    ev: &PhiEvaluator,
    c_cal: f64,
    fhat: &(impl Fn(f64) -> f64 + Sync + ?Sized),
    band: (f64, f64),
    radii: &[f64],
    times: &[f64],
    amp_scale: f64,
    accuracy: Accuracy,
) -> MaximalField {
    let t_max = times.iter().fold(0.0f64, |a, &t| a.max(t.abs()));
    let rows: Vec<(f64, f64, f64)> = radii
        .par_iter()
        .map(|&s| {
            let line = band_line(ev, c_cal, fhat, band, s, t_max, amp_scale, accuracy);
            let m = maximal_over(&line, times);
            (m.sup, m.t_star, line.err_bound)
        })
        .collect();
    let mut field = MaximalField {
        radii: radii.to_vec(),
        sup: Vec::with_capacity(rows.len()),
        argmax_t: Vec::with_capacity(rows.len()),
        err_bound: Vec::with_capacity(rows.len()),
    };
    for (sup, t, err) in rows {
        field.sup.push(sup);
        field.argmax_t.push(t);
        field.err_bound.push(err);
    }
    field
}

/// Propagated values on a radius grid with a per-radius evaluation time
/// `tau(s)` (a linearized maximal operator). `t_max` sizes the quadrature
/// panels and must dominate every `|tau(s)|`; pass the time ladder's
/// maximum to reproduce a [`maximal_field`] run exactly. Radii are
/// processed in parallel and collected in input order, so the output is
/// identical for any worker count.
#[allow(clippy::too_many_arguments)]
pub fn linearized_on_grid(
    ev: &PhiEvaluator,
    c_cal: f64,
    fhat: &(impl Fn(f64) -> f64 + Sync + ?Sized),
    band: (f64, f64),
    radii: &[f64],
    tau: &(impl Fn(f64) -> f64 + Sync + ?Sized),
    t_max: f64,
    amp_scale: f64,
    accuracy: Accuracy,
) -> Vec<Complex64> {
    radii
        .par_iter()
        .map(|&s| {
            let t = tau(s);
            debug_assert!(t.abs() <= t_max);
            let line = band_line(ev, c_cal, fhat, band, s, t_max, amp_scale, accuracy);
            line.eval(t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{full_calibration, reference_gaussian};
    use std::f64::consts::PI;

    fn h3_eval() -> (PhiEvaluator, f64) {
        let params = SpaceParams::real_hyperbolic(3).unwrap();
        let rec = full_calibration(&params);
        let c = rec.c_cal.unwrap();
        (PhiEvaluator::new(params, rec), c)
    }

    #[test]
    fn time_grid_shapes() {
        let params = SpaceParams::damek_ricci(2, 1).unwrap();
        let g = TimeGrid::default_for(&params);
        assert_eq!(g.len(), 64 + 193);
        assert!(g.times.windows(2).all(|w| w[0] < w[1]));
        assert!(g.times[0] > 0.0);
        assert!(*g.times.last().unwrap() < 1.0);
        let u = TimeGrid::uniform(0.0, 1.0, 5);
        assert_eq!(u.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn propagated_value_at_t0_closed_form_h3() {
        // with fhat = e^(-lambda^2/2) on H^3 the inverse transform has the
        // closed form sqrt(2/pi) s e^(-s^2/2) / sinh s
        let (ev, c_cal) = h3_eval();
        for s in [0.4, 1.0, 2.5] {
            let line = band_line(
                &ev,
                c_cal,
                &reference_gaussian,
                (0.0, 12.0),
                s,
                0.5,
                1.5,
                Accuracy::Best,
            );
            let got = line.eval(0.0);
            let expect = (2.0 / PI).sqrt() * s * (-s * s / 2.0).exp() / s.sinh();
            assert!(
                (got.re - expect).abs() < 1e-7 && got.im.abs() < 1e-12,
                "s={s}: got {got}, expect {expect}"
            );
        }
    }

    #[test]
    fn mass_conservation_h3() {
        // ||S_t f||_{L^2} is independent of t
        let (ev, c_cal) = h3_eval();
        let sgrid = crate::transforms::RadialGrid::new(8.0, 12.0, 768);
        let params = *ev.params();
        let norm_at = |t: f64| -> f64 {
            let mut acc = 0.0;
            for (&s, &w) in sgrid.nodes.iter().zip(&sgrid.weights) {
                let line = band_line(
                    &ev,
                    c_cal,
                    &reference_gaussian,
                    (0.0, 12.0),
                    s,
                    0.4,
                    1.5,
                    Accuracy::Best,
                );
                acc += w * line.eval(t).norm_sqr() * params.density(s);
            }
            acc.sqrt()
        };
        let n0 = norm_at(0.0);
        let n1 = norm_at(0.35);
        assert!(
            (n0 / n1 - 1.0).abs() < 1e-6,
            "norm drifted: {n0} vs {n1}"
        );
    }

    #[test]
    fn quadrature_refinement_converges() {
        let (ev, c_cal) = h3_eval();
        let coarse = band_line(
            &ev,
            c_cal,
            &reference_gaussian,
            (0.0, 12.0),
            1.3,
            0.4,
            1.5,
            Accuracy::Best,
        );
        let fine = band_line_refined(
            &ev,
            c_cal,
            &reference_gaussian,
            (0.0, 12.0),
            1.3,
            0.4,
            1.5,
            Accuracy::Best,
            1,
        );
        let a = coarse.eval(0.33);
        let b = fine.eval(0.33);
        assert!((a - b).norm() < 1e-9, "refinement moved value by {}", (a - b).norm());
    }

    #[test]
    fn maximal_parabolic_refinement() {
        // |0.5 e^{it} + 0.5 e^{2it}| = |cos(t/2)| peaks at t = 0
        let line = PropLine {
            s: 1.0,
            lambdas: vec![1.0, 2.0],
            coeff: vec![0.5, 0.5],
            shift: vec![1.0, 2.0],
            err_bound: 0.0,
        };
        // grid that straddles but does not contain the peak
        let times: Vec<f64> = (0..8).map(|i| -1.5 + 3.0 * i as f64 / 7.0).collect();
        let got = maximal_over(&line, &times);
        assert!(got.sup > 0.99999, "sup = {}", got.sup);
        assert!(got.t_star.abs() < 0.05);
    }

    #[test]
    fn transference_identity_h3() {
        // S_t f(s) = (C_cal/2) e^{it} (s/sinh s) T0 f(s) on H^3
        let (ev, c_cal) = h3_eval();
        let (t, s) = (0.3, 1.2);
        let hyp = band_line(
            &ev,
            c_cal,
            &reference_gaussian,
            (0.0, 12.0),
            s,
            0.5,
            1.5,
            Accuracy::Best,
        )
        .eval(t);
        let euc = euclidean_line(3, &reference_gaussian, (0.0, 12.0), s, 0.5, 1.5).eval(t);
        let rhs = Complex64::new(0.0, t).exp() * (c_cal / 2.0) * (s / s.sinh()) * euc;
        assert!(
            (hyp - rhs).norm() < 1e-8 * rhs.norm().max(1e-12),
            "lhs {hyp} rhs {rhs}"
        );
    }

    #[test]
    fn linearized_is_worker_invariant() {
        let (ev, c_cal) = h3_eval();
        let radii: Vec<f64> = (1..=24).map(|i| i as f64 * 0.25).collect();
        let tau = |s: f64| 0.02 * s;
        let run = |threads: usize| -> Vec<Complex64> {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    linearized_on_grid(
                        &ev,
                        c_cal,
                        &reference_gaussian,
                        (0.0, 12.0),
                        &radii,
                        &tau,
                        0.12,
                        1.5,
                        Accuracy::Fast,
                    )
                })
        };
        let a = run(1);
        let b = run(4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn linearized_at_argmax_reproduces_maximal() {
        let (ev, c_cal) = h3_eval();
        let radii: Vec<f64> = (1..=16).map(|i| i as f64 * 0.3).collect();
        let params = SpaceParams::real_hyperbolic(3).unwrap();
        let times = TimeGrid::default_for(&params).times;
        let field = maximal_field(
            &ev,
            c_cal,
            &reference_gaussian,
            (0.0, 12.0),
            &radii,
            &times,
            1.5,
            Accuracy::Fast,
        );
        let t_max = *times.last().unwrap();
        let tau = |s: f64| {
            let j = radii.iter().position(|&r| r == s).unwrap();
            field.argmax_t[j]
        };
        let lin = linearized_on_grid(
            &ev,
            c_cal,
            &reference_gaussian,
            (0.0, 12.0),
            &radii,
            &tau,
            t_max,
            1.5,
            Accuracy::Fast,
        );
        for j in 0..radii.len() {
            assert!(
                (lin[j].norm() - field.sup[j]).abs() < 1e-12 * field.sup[j].max(1e-300),
                "node {j}: {} vs {}",
                lin[j].norm(),
                field.sup[j]
            );
            // the sup dominates any sampled time
            let line = band_line(
                &ev,
                c_cal,
                &reference_gaussian,
                (0.0, 12.0),
                radii[j],
                t_max,
                1.5,
                Accuracy::Fast,
            );
            for &t in times.iter().step_by(37) {
                assert!(line.eval(t).norm() <= field.sup[j] * (1.0 + 1e-12));
            }
        }
    }
}
