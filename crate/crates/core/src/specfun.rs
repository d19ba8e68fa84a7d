//! Complex log-gamma, Bessel functions, the Harish-Chandra c-function and
//! the Plancherel density.
//!
//! Log-gamma uses the Lanczos approximation (g = 7, 9 published
//! coefficients) in the half-plane `Re z >= 1/2` and the reflection formula
//! elsewhere, with a log-domain sine to survive large imaginary parts.
//!
//! `J_mu` switches between the ascending power series and the large-argument
//! (Hankel) expansion at `z = max(12, 2 mu)`; both branches keep relative
//! accuracy near 1e-12 for the orders used here (`mu = (n-2)/2 <= 3`).
//!
//! The normalized kernel is
//!
//! ```text
//! K_mu(z) = 2^mu sqrt(pi) Gamma(mu + 1/2) J_mu(z) / z^mu,
//! K_mu(0) = sqrt(pi) Gamma(mu + 1/2) / Gamma(mu + 1),
//! K_{1/2}(z) = 2 sin z / z.
//! ```

use crate::space::{SpaceKind, SpaceParams};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

/// Errors from special function evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecFunError {
    /// Series did not converge within the iteration limit.
    ConvergenceFailure,
    /// Input outside the function's domain.
    DomainError,
}

impl fmt::Display for SpecFunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecFunError::ConvergenceFailure => write!(f, "series failed to converge"),
            SpecFunError::DomainError => write!(f, "argument outside domain"),
        }
    }
}

impl std::error::Error for SpecFunError {}

/// Lanczos coefficients, g = 7.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log sin(pi z)` on the principal branch, stable for large `|Im z|`.
fn log_sin_pi(z: Complex64) -> Complex64 {
    let y = z.im;
    if y.abs() < 50.0 {
        return (Complex64::new(PI, 0.0) * z).sin().ln();
    }
    if y > 0.0 {
        // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}), |e^{2 i pi z}| < 1
        let w = (Complex64::new(0.0, 2.0 * PI) * z).exp();
        Complex64::new(-(2f64.ln()), PI / 2.0) - Complex64::new(0.0, PI) * z
            + (Complex64::new(1.0, 0.0) - w).ln()
    } else {
        log_sin_pi(z.conj()).conj()
    }
}

/// Principal-branch `log Gamma(z)`.
///
/// Relative accuracy is near machine precision on the strips used by the
/// c-function (`|Re z| <= 8`, any imaginary part).
pub fn log_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
        return Complex64::new(PI.ln(), 0.0)
            - log_sin_pi(z)
            - log_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let zm = z - Complex64::new(1.0, 0.0);
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += Complex64::new(*c, 0.0) / (zm + Complex64::new(k as f64, 0.0));
    }
    let t = zm + Complex64::new(LANCZOS_G + 0.5, 0.0);
    Complex64::new(0.5 * (2.0 * PI).ln(), 0.0)
        + (zm + Complex64::new(0.5, 0.0)) * t.ln()
        - t
        + a.ln()
}

/// `log Gamma(x)` for real `x > 0`.
pub fn log_gamma_real(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    log_gamma(Complex64::new(x, 0.0)).re
}

const BESSEL_MAX_TERMS: usize = 256;

/// Switch point between the ascending series and the Hankel expansion.
fn bessel_switch(mu: f64) -> f64 {
    (2.0 * mu).max(12.0)
}

/// `J_mu(z) / z^mu` by the ascending series (even in `z`, finite at 0).
fn bessel_j_over_zmu_series(mu: f64, z: f64) -> Result<f64, SpecFunError> {
    let q = z * z / 4.0;
    let mut term = (-mu * 2f64.ln() - log_gamma_real(mu + 1.0)).exp();
    let mut sum = term;
    for k in 0..BESSEL_MAX_TERMS {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (kf + mu + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-280) {
            return Ok(sum);
        }
    }
    Err(SpecFunError::ConvergenceFailure)
}

/// Hankel large-argument expansion of `J_mu(z)`, `z >= max(12, 2 mu)`.
fn bessel_j_asymptotic(mu: f64, z: f64) -> f64 {
    let fmu = 4.0 * mu * mu;
    // c_k = a_k(mu) / z^k, alternating halves feed P and Q
    let mut p = 1.0;
    let mut q = 0.0;
    let mut c = 1.0;
    let mut best = f64::INFINITY;
    for k in 1..=24 {
        let kf = k as f64;
        c *= (fmu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * kf * z);
        let mag = c.abs();
        if mag > best {
            break; // asymptotic tail started growing: stop at optimal truncation
        }
        best = mag;
        let signed = if (k / 2) % 2 == 0 { c } else { -c };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if mag < 1e-17 {
            break;
        }
    }
    let omega = z - mu * PI / 2.0 - PI / 4.0;
    (2.0 / (PI * z)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// Bessel function `J_mu(z)` for real order `mu >= 0` and `z >= 0`.
pub fn bessel_j(mu: f64, z: f64) -> Result<f64, SpecFunError> {
    if !(mu >= 0.0) || !(z >= 0.0) {
        return Err(SpecFunError::DomainError);
    }
    if z < bessel_switch(mu) {
        Ok(bessel_j_over_zmu_series(mu, z)? * z.powf(mu))
    } else {
        Ok(bessel_j_asymptotic(mu, z))
    }
}

/// Normalized kernel `K_mu(z) = 2^mu sqrt(pi) Gamma(mu+1/2) J_mu(z)/z^mu`.
///
/// Even in `z` and equal to `sqrt(pi) Gamma(mu+1/2)/Gamma(mu+1)` at `z = 0`;
/// `K_{1/2}(z) = 2 sin z / z`.
pub fn bessel_kernel(mu: f64, z: f64) -> Result<f64, SpecFunError> {
    if !(mu >= 0.0) {
        return Err(SpecFunError::DomainError);
    }
    let z = z.abs();
    let front = (mu * 2f64.ln() + 0.5 * PI.ln() + log_gamma_real(mu + 0.5)).exp();
    if z < bessel_switch(mu) {
        Ok(front * bessel_j_over_zmu_series(mu, z)?)
    } else {
        Ok(front * bessel_j_asymptotic(mu, z) / z.powf(mu))
    }
}

/// Value of the kernel at the origin, `sqrt(pi) Gamma(mu+1/2)/Gamma(mu+1)`.
pub fn bessel_kernel_at_zero(mu: f64) -> f64 {
    (0.5 * PI.ln() + log_gamma_real(mu + 0.5) - log_gamma_real(mu + 1.0)).exp()
}

/// `log c(lambda)` as a complex number; finite for `lambda != 0`.
fn log_c_function(params: &SpaceParams, lambda: f64) -> Complex64 {
    let il = Complex64::new(0.0, lambda);
    let rho = params.rho();
    match params.kind() {
        SpaceKind::DamekRicci { m_v, .. } => {
            let n = params.n() as f64;
            (Complex64::new(rho, -lambda)) * 4f64.ln()
                + log_gamma(2.0 * il)
                - log_gamma(Complex64::new(rho, lambda))
                + Complex64::new(log_gamma_real(n / 2.0), 0.0)
                - log_gamma(Complex64::new((m_v as f64 + 2.0) / 4.0, lambda))
        }
        SpaceKind::RealHyperbolic { n } => {
            let nf = n as f64;
            Complex64::new(
                (nf - 2.0) * 2f64.ln() + log_gamma_real(nf / 2.0) - 0.5 * PI.ln(),
                0.0,
            ) + log_gamma(il)
                - log_gamma(Complex64::new(rho, lambda))
        }
    }
}

/// Harish-Chandra c-function. Requires `lambda != 0` (simple pole at 0).
///
/// Satisfies `c(-lambda) = conj(c(lambda))`; on `H^3` it equals
/// `1/(i lambda)`.
pub fn c_function(params: &SpaceParams, lambda: f64) -> Result<Complex64, SpecFunError> {
    if lambda == 0.0 {
        return Err(SpecFunError::DomainError);
    }
    Ok(log_c_function(params, lambda).exp())
}

/// Plancherel density `|c(lambda)|^-2`, extended by continuity with 0 at
/// `lambda = 0`.
///
/// Behaves like `plancherel_low_coeff * lambda^2` near 0 and like
/// `plancherel_high_coeff * lambda^(n-1)` at infinity.
pub fn plancherel_density(params: &SpaceParams, lambda: f64) -> f64 {
    let lambda = lambda.abs();
    if lambda == 0.0 {
        return 0.0;
    }
    (-2.0 * log_c_function(params, lambda).re).exp()
}

/// Exact coefficient of `lambda^2` in the Plancherel density at 0.
pub fn plancherel_low_coeff(params: &SpaceParams) -> f64 {
    let rho = params.rho();
    let n = params.n() as f64;
    match params.kind() {
        SpaceKind::DamekRicci { m_v, .. } => {
            (2f64.ln() + log_gamma_real(rho) + log_gamma_real((m_v as f64 + 2.0) / 4.0)
                - rho * 16f64.ln() / 2.0
                - log_gamma_real(n / 2.0))
            .exp()
            .powi(2)
        }
        SpaceKind::RealHyperbolic { .. } => {
            (0.5 * PI.ln() + log_gamma_real(rho) - (n - 2.0) * 2f64.ln()
                - log_gamma_real(n / 2.0))
            .exp()
            .powi(2)
        }
    }
}

/// Exact coefficient of `lambda^(n-1)` in the Plancherel density at
/// infinity (from Stirling asymptotics of the gamma factors).
pub fn plancherel_high_coeff(params: &SpaceParams) -> f64 {
    let rho = params.rho();
    let n = params.n() as f64;
    match params.kind() {
        SpaceKind::DamekRicci { .. } => {
            4.0 * PI / (16f64.powf(rho) * (2.0 * log_gamma_real(n / 2.0)).exp())
        }
        SpaceKind::RealHyperbolic { .. } => {
            PI / (4f64.powf(n - 2.0) * (2.0 * log_gamma_real(n / 2.0)).exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn log_gamma_real_anchors() {
        // Gamma(1/2) = sqrt(pi), Gamma(5) = 24, Gamma(3/2) = sqrt(pi)/2
        assert!(close(log_gamma_real(0.5), 0.5723649429247001, 1e-14));
        assert!(close(log_gamma_real(5.0), 24f64.ln(), 1e-14));
        assert!(close(log_gamma_real(1.5), (PI.sqrt() / 2.0).ln(), 1e-14));
    }

    #[test]
    fn gamma_imaginary_axis_modulus() {
        // |Gamma(iy)|^2 = pi / (y sinh(pi y))
        for y in [0.25, 0.5, 2.0, 10.0, 50.0, 200.0] {
            let lg = log_gamma(Complex64::new(0.0, y));
            let modulus2 = (2.0 * lg.re).exp();
            let oracle = PI / (y * (PI * y).sinh());
            // at y = 200 both sides underflow smoothly; compare in logs
            let rel = (2.0 * lg.re - oracle.ln()).abs();
            assert!(rel < 1e-12, "y={y}: log-modulus error {rel}");
            if oracle > 1e-280 {
                assert!(close(modulus2, oracle, 1e-12), "y={y}");
            }
        }
        // frozen value for the gamma of 2i
        let g2i = (log_gamma(Complex64::new(0.0, 2.0)).re).exp();
        assert!(close(g2i, 0.07659480939561732, 1e-13));
    }

    #[test]
    fn gamma_reflection_identity() {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z), checked multiplicatively
        let cases = [
            Complex64::new(0.3, 0.7),
            Complex64::new(-1.2, 2.5),
            Complex64::new(0.9, -4.0),
            Complex64::new(0.1, 60.0),
        ];
        for z in cases {
            let lhs = log_gamma(z) + log_gamma(Complex64::new(1.0, 0.0) - z);
            let rhs = Complex64::new(PI.ln(), 0.0) - log_sin_pi(z);
            let diff = (lhs - rhs).exp() - Complex64::new(1.0, 0.0);
            assert!(diff.norm() < 1e-12, "z={z}: {diff}");
        }
    }

    #[test]
    fn gamma_conjugate_symmetry() {
        for z in [Complex64::new(1.3, 5.0), Complex64::new(0.2, -3.0)] {
            let a = log_gamma(z.conj());
            let b = log_gamma(z).conj();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn gamma_recurrence() {
        // Gamma(z+1) = z Gamma(z) along the imaginary strip
        for y in [0.3, 3.0, 30.0, 300.0] {
            let z = Complex64::new(0.7, y);
            let lhs = log_gamma(z + Complex64::new(1.0, 0.0));
            let rhs = log_gamma(z) + z.ln();
            assert!((lhs - rhs).norm() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn bessel_half_integer_closed_forms() {
        for z in [0.3, 2.0, 5.0, 11.9, 12.1, 50.0, 1000.0, 20000.0] {
            let j12 = bessel_j(0.5, z).unwrap();
            let expect = (2.0 / (PI * z)).sqrt() * z.sin();
            assert!(
                (j12 - expect).abs() < 1e-12 * (1.0 + expect.abs()),
                "J_1/2({z}): {j12} vs {expect}"
            );
            let j32 = bessel_j(1.5, z).unwrap();
            let expect = (2.0 / (PI * z)).sqrt() * (z.sin() / z - z.cos());
            assert!(
                (j32 - expect).abs() < 1e-11,
                "J_3/2({z}): {j32} vs {expect}"
            );
            let j52 = bessel_j(2.5, z).unwrap();
            let expect =
                (2.0 / (PI * z)).sqrt() * ((3.0 / (z * z) - 1.0) * z.sin() - 3.0 * z.cos() / z);
            assert!(
                (j52 - expect).abs() < 1e-11,
                "J_5/2({z}): {j52} vs {expect}"
            );
        }
    }

    #[test]
    fn bessel_branch_agreement_at_switch() {
        // series and asymptotic branches agree where they meet
        for mu in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let z = bessel_switch(mu);
            let series = bessel_j_over_zmu_series(mu, z).unwrap() * z.powf(mu);
            let asym = bessel_j_asymptotic(mu, z);
            assert!(
                (series - asym).abs() < 1e-11,
                "mu={mu} z={z}: {series} vs {asym}"
            );
        }
    }

    #[test]
    fn bessel_integral_representation_oracle() {
        // J_mu(z) = (1/pi) int_0^pi cos(z sin t - mu t) dt
        //         - sin(mu pi)/pi int_0^inf e^{-z sinh u - mu u} du
        let oracle = |mu: f64, z: f64| -> f64 {
            let first =
                crate::quad::integrate_smooth(0.0, PI, 64, |t| (z * t.sin() - mu * t).cos()) / PI;
            let umax = (800.0f64 / z).asinh() + 1.0;
            let second = crate::quad::integrate_smooth(0.0, umax, 64, |u| {
                (-z * u.sinh() - mu * u).exp()
            }) * (mu * PI).sin()
                / PI;
            first - second
        };
        for (mu, z) in [(1.5, 10.0), (1.0, 3.0), (0.5, 7.0), (3.0, 14.0), (2.5, 25.0)] {
            let mine = bessel_j(mu, z).unwrap();
            let orc = oracle(mu, z);
            assert!(
                (mine - orc).abs() < 1e-10,
                "mu={mu} z={z}: {mine} vs oracle {orc}"
            );
        }
    }

    #[test]
    fn kernel_normalization_and_small_z() {
        // K_mu(0) = sqrt(pi) Gamma(mu+1/2) / Gamma(mu+1); K_{1/2} = 2 sin z / z
        assert!(close(bessel_kernel_at_zero(0.5), 2.0, 1e-14));
        for z in [1e-8, 0.3, 3.0, 40.0] {
            let k = bessel_kernel(0.5, z).unwrap();
            assert!(close(k, 2.0 * z.sin() / z, 1e-12), "z={z}");
        }
        for mu in [0.5, 1.0, 3.0] {
            let k0 = bessel_kernel_at_zero(mu);
            let k = bessel_kernel(mu, 1e-7).unwrap();
            assert!((k - k0).abs() < 1e-12, "mu={mu}");
            // quadratic departure: K(z) ~ K(0) (1 - z^2/(4(mu+1)))
            let z = 1e-3;
            let expect = k0 * (1.0 - z * z / (4.0 * (mu + 1.0)));
            assert!((bessel_kernel(mu, z).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn c_function_h3_closed_form() {
        // c(lambda) = 1/(i lambda) on H^3
        let h3 = SpaceParams::real_hyperbolic(3).unwrap();
        for lam in [0.1, 1.0, 10.0, 300.0] {
            let c = c_function(&h3, lam).unwrap();
            let expect = Complex64::new(0.0, -1.0 / lam);
            assert!((c - expect).norm() < 1e-12 / lam, "lam={lam}: {c}");
            let pd = plancherel_density(&h3, lam);
            assert!(close(pd, lam * lam, 1e-12), "lam={lam}: {pd}");
        }
    }

    #[test]
    fn c_function_conjugate_symmetry() {
        let spaces = [
            SpaceParams::damek_ricci(2, 1).unwrap(),
            SpaceParams::damek_ricci(4, 3).unwrap(),
            SpaceParams::real_hyperbolic(4).unwrap(),
        ];
        for sp in &spaces {
            for lam in [0.01, 0.7, 5.0, 80.0] {
                let a = c_function(sp, -lam).unwrap();
                let b = c_function(sp, lam).unwrap().conj();
                assert!((a - b).norm() < 1e-12 * b.norm(), "{sp} lam={lam}");
            }
        }
    }

    #[test]
    fn c_function_rejects_zero() {
        let sp = SpaceParams::damek_ricci(2, 1).unwrap();
        assert_eq!(c_function(&sp, 0.0).unwrap_err(), SpecFunError::DomainError);
    }

    #[test]
    fn plancherel_density_limits() {
        let spaces = [
            SpaceParams::damek_ricci(2, 1).unwrap(),
            SpaceParams::damek_ricci(4, 3).unwrap(),
            SpaceParams::damek_ricci(6, 1).unwrap(),
            SpaceParams::real_hyperbolic(4).unwrap(),
        ];
        for sp in &spaces {
            assert_eq!(plancherel_density(sp, 0.0), 0.0);
            let low = plancherel_low_coeff(sp);
            for lam in [1e-4, 1e-3] {
                let ratio = plancherel_density(sp, lam) / (low * lam * lam);
                assert!(
                    (ratio - 1.0).abs() < 1e-4,
                    "{sp} lam={lam}: low ratio {ratio}"
                );
            }
            let high = plancherel_high_coeff(sp);
            let p = (sp.n() - 1) as i32;
            let r500 = plancherel_density(sp, 500.0) / (high * 500f64.powi(p));
            let r5000 = plancherel_density(sp, 5000.0) / (high * 5000f64.powi(p));
            assert!((r500 - 1.0).abs() < 5e-3, "{sp}: ratio at 500 = {r500}");
            assert!(
                (r5000 - 1.0).abs() < (r500 - 1.0).abs().max(1e-12),
                "{sp}: asymptotics not improving"
            );
        }
        // DR(2,1) frozen small-lambda coefficient: 1/4
        let dr21 = SpaceParams::damek_ricci(2, 1).unwrap();
        assert!(close(plancherel_low_coeff(&dr21), 0.25, 1e-12));
    }

    #[test]
    fn plancherel_density_positive_scan() {
        let sp = SpaceParams::damek_ricci(4, 3).unwrap();
        let mut lam = 1e-3;
        while lam < 2e4 {
            let pd = plancherel_density(&sp, lam);
            assert!(pd > 0.0 && pd.is_finite(), "lam={lam}: {pd}");
            lam *= 1.7;
        }
    }
}
