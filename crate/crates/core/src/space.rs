//! Space parameters and the radial volume density.
//!
//! A Damek-Ricci space `S = NA` is parametrized by the dimensions of the
//! H-type group layers: `m_v` (first layer, even) and `m_z` (center). The
//! geodesic dimension is `n = m_v + m_z + 1`, the homogeneous dimension is
//! `Q = m_v/2 + m_z`, and the half-sum of roots is `rho = Q/2`. Radial
//! integration on `S` uses the density
//!
//! ```text
//! A(s) = 2^(m_v+m_z) sinh(s/2)^(m_v+m_z) cosh(s/2)^(m_z).
//! ```
//!
//! Real hyperbolic space `H^n` is carried alongside with the density
//! `sinh(s)^(n-1)` and `rho = (n-1)/2`; it is the cross-check geometry
//! (for `H^3` every quantity downstream has a closed form).

use std::fmt;

/// Parameter errors for space construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceError {
    /// `m_v` must be even and at least 2.
    BadFirstLayer(usize),
    /// `m_z` must be at least 1.
    BadCenter(usize),
    /// Hyperbolic dimension must be at least 2.
    BadDimension(usize),
}

impl fmt::Display for SpaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceError::BadFirstLayer(m) => {
                write!(f, "m_v must be even and >= 2, got {m}")
            }
            SpaceError::BadCenter(m) => write!(f, "m_z must be >= 1, got {m}"),
            SpaceError::BadDimension(n) => write!(f, "dimension must be >= 2, got {n}"),
        }
    }
}

impl std::error::Error for SpaceError {}

/// Which geometry the radial machinery runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    /// Damek-Ricci space with layer dimensions `(m_v, m_z)`.
    DamekRicci { m_v: usize, m_z: usize },
    /// Real hyperbolic space `H^n`.
    RealHyperbolic { n: usize },
}

/// A validated space together with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpaceParams {
    kind: SpaceKind,
    n: usize,
    q: f64,
    rho: f64,
}

impl SpaceParams {
    /// Damek-Ricci space; `m_v` even and >= 2, `m_z >= 1`.
    pub fn damek_ricci(m_v: usize, m_z: usize) -> Result<Self, SpaceError> {
        if m_v < 2 || m_v % 2 != 0 {
            return Err(SpaceError::BadFirstLayer(m_v));
        }
        if m_z < 1 {
            return Err(SpaceError::BadCenter(m_z));
        }
        let q = m_v as f64 / 2.0 + m_z as f64;
        Ok(SpaceParams {
            kind: SpaceKind::DamekRicci { m_v, m_z },
            n: m_v + m_z + 1,
            q,
            rho: q / 2.0,
        })
    }

    /// Real hyperbolic space `H^n`, `n >= 2`.
    pub fn real_hyperbolic(n: usize) -> Result<Self, SpaceError> {
        if n < 2 {
            return Err(SpaceError::BadDimension(n));
        }
        Ok(SpaceParams {
            kind: SpaceKind::RealHyperbolic { n },
            n,
            q: (n - 1) as f64,
            rho: (n - 1) as f64 / 2.0,
        })
    }

    /// Rebuild from a serialized kind, revalidating.
    pub fn from_kind(kind: SpaceKind) -> Result<Self, SpaceError> {
        match kind {
            SpaceKind::DamekRicci { m_v, m_z } => Self::damek_ricci(m_v, m_z),
            SpaceKind::RealHyperbolic { n } => Self::real_hyperbolic(n),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Geodesic dimension `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Homogeneous dimension `Q` (`n - 1` in the hyperbolic case).
    pub fn q_hom(&self) -> f64 {
        self.q
    }

    /// Half-sum of roots, `rho = Q/2`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// True for `H^3`, where the spherical function has a closed form.
    pub fn is_h3(&self) -> bool {
        matches!(self.kind, SpaceKind::RealHyperbolic { n: 3 })
    }

    /// Short label used in reports and file names, e.g. `dr_2_1` or `rh_3`.
    pub fn label(&self) -> String {
        match self.kind {
            SpaceKind::DamekRicci { m_v, m_z } => format!("dr_{m_v}_{m_z}"),
            SpaceKind::RealHyperbolic { n } => format!("rh_{n}"),
        }
    }

    /// Radial volume density `A(s)`, `s >= 0`.
    ///
    /// Behaves like `s^(n-1)` at the origin and like `e^(2 rho s)` at
    /// infinity (up to constants).
    pub fn density(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0, "density needs s >= 0");
        match self.kind {
            SpaceKind::DamekRicci { m_v, m_z } => {
                let h = s / 2.0;
                2f64.powi((m_v + m_z) as i32)
                    * h.sinh().powi((m_v + m_z) as i32)
                    * h.cosh().powi(m_z as i32)
            }
            SpaceKind::RealHyperbolic { n } => s.sinh().powi(n as i32 - 1),
        }
    }

    /// Logarithmic derivative `A'(s)/A(s)`, `s > 0`.
    ///
    /// Equals `(n-1)/s + O(s)` near the origin and tends to `2 rho` at
    /// infinity.
    pub fn log_derivative(&self, s: f64) -> f64 {
        debug_assert!(s > 0.0, "log_derivative needs s > 0");
        match self.kind {
            SpaceKind::DamekRicci { m_v, m_z } => {
                let h = s / 2.0;
                let m = (m_v + m_z) as f64;
                m / 2.0 / h.tanh() + m_z as f64 / 2.0 * h.tanh()
            }
            SpaceKind::RealHyperbolic { n } => (n - 1) as f64 / s.tanh(),
        }
    }

    /// Coefficient `b1` in `A'(s)/A(s) = (n-1)/s + b1 s + O(s^3)`.
    ///
    /// Needed by the series launch of the radial ODE at the regular
    /// singular point.
    pub fn log_derivative_linear_coeff(&self) -> f64 {
        match self.kind {
            SpaceKind::DamekRicci { m_v, m_z } => {
                (m_v + m_z) as f64 / 12.0 + m_z as f64 / 4.0
            }
            SpaceKind::RealHyperbolic { n } => (n - 1) as f64 / 3.0,
        }
    }

    /// Volume of the ball of radius `r`: `int_0^r A(s) ds` by 64-panel
    /// Gauss-Legendre, exact to machine accuracy for these integrands.
    pub fn ball_volume(&self, r: f64) -> f64 {
        crate::quad::integrate_smooth(0.0, r, 64, |s| self.density(s))
    }
}

impl fmt::Display for SpaceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::DamekRicci { m_v, m_z } => {
                write!(f, "DamekRicci({m_v},{m_z}) n={} rho={}", self.n, self.rho)
            }
            SpaceKind::RealHyperbolic { n } => write!(f, "H^{n} rho={}", self.rho),
        }
    }
}
