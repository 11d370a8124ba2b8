//! Energy and position windows, the `k_alpha` truncation family, Fourier-side
//! locality constants and Chebyshev filter fitting.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::quadrature::{integrate, integrate_to_infinity, Tolerance};

/// Piecewise-quadratic bump: `1 - x^2/2` on `[-1, 1]`, `(|x| - 2)^2 / 2` on
/// `1 < |x| <= 2`, zero beyond. `C^1`, and its translates by `2Z` sum to one.
pub fn bump(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 1.0 {
        1.0 - 0.5 * xi * xi
    } else if a <= 2.0 {
        0.5 * (a - 2.0) * (a - 2.0)
    } else {
        0.0
    }
}

/// Derivative of [`bump`].
pub fn bump_derivative(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 1.0 {
        -xi
    } else if a <= 2.0 {
        xi.signum() * (a - 2.0)
    } else {
        0.0
    }
}

/// Position window `g_kappa(xi) = bump(kappa xi)`, supported on `[-2/kappa, 2/kappa]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionWindow {
    kappa: f64,
}

impl PositionWindow {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn eval(&self, xi: f64) -> f64 {
        bump(self.kappa * xi)
    }

    pub fn sqrt_eval(&self, xi: f64) -> f64 {
        self.eval(xi).sqrt()
    }

    /// Half-width `L` of the support `[-L, L]`.
    pub fn half_width(&self) -> f64 {
        2.0 / self.kappa
    }

    /// Spacing at which translates form a partition of unity.
    pub fn partition_spacing(&self) -> f64 {
        2.0 / self.kappa
    }
}

/// Energy window `f`. Windows with Fourier data can enter locality bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnergyWindow {
    /// `exp(-(xi / eta)^2)`.
    Gaussian { eta: f64 },
    /// `sum_k coeffs[k] xi^k`. No Fourier data; mainly a test device.
    Polynomial { coeffs: Vec<f64> },
}

impl EnergyWindow {
    pub fn gaussian(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        Ok(Self::Gaussian { eta })
    }

    pub fn from_eta_inv(eta_inv: f64) -> Result<Self> {
        if !(eta_inv > 0.0 && eta_inv.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eta_inv must be positive, got {eta_inv}"
            )));
        }
        Self::gaussian(1.0 / eta_inv)
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite polynomial coefficient".into()));
        }
        Ok(Self::Polynomial { coeffs })
    }

    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            EnergyWindow::Gaussian { eta } => {
                let u = xi / eta;
                (-u * u).exp()
            }
            EnergyWindow::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * xi + c),
        }
    }

    /// `|f^(t)|` with `f^(t) = (1/2pi) int e^{-i t xi} f(xi) dxi`, where known.
    pub fn fourier_abs(&self, t: f64) -> Option<f64> {
        match self {
            EnergyWindow::Gaussian { eta } => Some(eta / (2.0 * PI.sqrt()) * (-eta * eta * t * t / 4.0).exp()),
            EnergyWindow::Polynomial { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            EnergyWindow::Gaussian { eta } => format!("gaussian(eta_inv={:?})", 1.0 / eta),
            EnergyWindow::Polynomial { coeffs } => format!("polynomial(degree={})", coeffs.len().saturating_sub(1)),
        }
    }
}

/// Cutoff `k_alpha(xi) = k_1(alpha xi)`, with `k_1 = sum_{|l| <= M} bump(. - 2l)`
/// equal to one on `[-2M, 2M]` and `M` the smallest integer with `2M > L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationWindow {
    half_width: f64,
    alpha: f64,
    m: u32,
}

impl TruncationWindow {
    pub fn new(half_width: f64, alpha: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!("L must be positive, got {half_width}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let m = (half_width / 2.0).floor() as u32 + 1;
        Ok(Self { half_width, alpha, m })
    }

    pub fn for_window(g: &PositionWindow, alpha: f64) -> Result<Self> {
        Self::new(g.half_width(), alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `k_1` in closed form.
    pub fn k1(&self, xi: f64) -> f64 {
        let a = xi.abs();
        let two_m = 2.0 * self.m as f64;
        if a <= two_m {
            1.0
        } else if a <= two_m + 1.0 {
            let d = a - two_m;
            1.0 - 0.5 * d * d
        } else if a <= two_m + 2.0 {
            let d = a - two_m - 2.0;
            0.5 * d * d
        } else {
            0.0
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.k1(self.alpha * xi)
    }

    /// Half-width of the interval on which `k_alpha = 1`.
    pub fn plateau(&self) -> f64 {
        2.0 * self.m as f64 / self.alpha
    }

    /// Half-width of the support.
    pub fn support(&self) -> f64 {
        (2.0 * self.m as f64 + 2.0) / self.alpha
    }

    /// `(2M + 1) ||l||_1 alpha`: the factor multiplying `||[X, H]||` in the
    /// commutator bound for `k_alpha(X)`.
    pub fn commutator_factor(&self) -> f64 {
        (2.0 * self.m as f64 + 1.0) * ell_l1_norm() * self.alpha
    }
}

/// `l(t) = -(i / pi)(sin 2t - 2 sin t) / t^2`, the transform of `bump'`.
pub fn ell_fourier(t: f64) -> Complex<f64> {
    Complex::new(0.0, ell_fourier_im(t))
}

/// Imaginary part of [`ell_fourier`] (the real part vanishes).
pub fn ell_fourier_im(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        // sin 2t - 2 sin t = -t^3 + t^5/4 + O(t^7)
        return t * (1.0 - t * t / 4.0) / PI;
    }
    -((2.0 * t).sin() - 2.0 * t.sin()) / (PI * t * t)
}

/// `||l||_1`, by chunked quadrature between multiples of pi plus the
/// averaged `1/t^2` tail. Computed once.
pub fn ell_l1_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| ell_l1_norm_with(4000).expect("smooth integrand"))
}

pub(crate) fn ell_l1_norm_with(chunks: usize) -> Result<f64> {
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-12,
        ..Tolerance::default()
    };
    let mut half = 0.0;
    for k in 0..chunks {
        let (a, b) = (k as f64 * PI, (k + 1) as f64 * PI);
        half += integrate(|t| ell_fourier_im(t).abs(), a, b, tol)?.value;
    }
    // |sin 2t - 2 sin t| averages 4/pi over a period.
    let cut = chunks as f64 * PI;
    half += 4.0 / (PI * PI * cut);
    Ok(2.0 * half)
}

/// `int l(t) e^{i t xi} dt`, which reproduces `bump'(xi)`.
pub fn ell_inverse_transform(xi: f64, chunks: usize) -> Result<f64> {
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-11,
        ..Tolerance::default()
    };
    let mut total = 0.0;
    for k in 0..chunks {
        let (a, b) = (k as f64 * PI, (k + 1) as f64 * PI);
        total += integrate(|t| -ell_fourier_im(t) * (t * xi).sin(), a, b, tol)?.value;
    }
    Ok(2.0 * total)
}

/// `C_1 = int |t| (1 + |t| h_norm) |f^(t)| dt`.
pub fn locality_c1(f: &EnergyWindow, h_norm: f64) -> Result<f64> {
    if f.fourier_abs(0.0).is_none() {
        return Err(Error::NoFourierData(f.label()));
    }
    if !(h_norm >= 0.0 && h_norm.is_finite()) {
        return Err(Error::InvalidParameter(format!("h_norm must be >= 0, got {h_norm}")));
    }
    let integrand = |t: f64| t * (1.0 + t * h_norm) * f.fourier_abs(t).unwrap_or(0.0);
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-9,
        ..Tolerance::default()
    };
    Ok(2.0 * integrate_to_infinity(integrand, 0.0, tol)?.value)
}

/// Closed form of [`locality_c1`] for the Gaussian window.
pub fn gaussian_c1(eta: f64, h_norm: f64) -> f64 {
    2.0 / (eta * PI.sqrt()) + 2.0 * h_norm / (eta * eta)
}

/// Chebyshev series on `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevFilter {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl ChebyshevFilter {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Maps `x` in `[a, b]` to `[-1, 1]`.
    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let y = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * y * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        y * b1 - b2 + self.coeffs.first().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterFit {
    pub filter: ChebyshevFilter,
    /// Max `|p - f|` over the check grid.
    pub sup_error: f64,
    pub grid_points: usize,
}

/// Points in the uniform check grid used for the sup-error estimate.
pub fn check_grid_points(order: usize) -> usize {
    (10 * (order + 1)).max(1000) + 1
}

/// Sup-norm of `p - f` on the uniform check grid over `[a, b]`.
pub fn sup_error(filter: &ChebyshevFilter, f: &EnergyWindow, points: usize) -> f64 {
    let (a, b) = (filter.a, filter.b);
    (0..points)
        .map(|i| {
            let x = a + (b - a) * i as f64 / (points - 1) as f64;
            (filter.eval(x) - f.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Chebyshev interpolant of `f` of degree `order` on `[a, b]` (nodes at the
/// `order + 1` Chebyshev points of the first kind).
pub fn fit_polynomial_filter(f: &EnergyWindow, a: f64, b: f64, order: usize) -> Result<FilterFit> {
    if a >= b || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("bad interval [{a}, {b}]")));
    }
    let n = order + 1;
    let theta: Vec<f64> = (0..n).map(|k| PI * (k as f64 + 0.5) / n as f64).collect();
    let values: Vec<f64> = theta
        .iter()
        .map(|th| f.eval(0.5 * (a + b) + 0.5 * (b - a) * th.cos()))
        .collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let chop = 4.0 * f64::EPSILON * n as f64 * scale;
    let coeffs: Vec<f64> = (0..n)
        .map(|j| {
            let s: f64 = values.iter().zip(&theta).map(|(v, th)| v * (j as f64 * th).cos()).sum();
            let c = if j == 0 { s / n as f64 } else { 2.0 * s / n as f64 };
            if c.abs() <= chop {
                0.0
            } else {
                c
            }
        })
        .collect();
    let filter = ChebyshevFilter { a, b, coeffs };
    let grid_points = check_grid_points(order);
    let sup_error = sup_error(&filter, f, grid_points);
    Ok(FilterFit {
        filter,
        sup_error,
        grid_points,
    })
}

/// Fitting interval `[-h_bound - |E|, h_bound + |E|]`, covering the spectrum of `H - E`.
pub fn filter_interval(h_bound: f64, energy: f64) -> (f64, f64) {
    let r = h_bound + energy.abs();
    if r > 0.0 {
        (-r, r)
    } else {
        (-1.0, 1.0)
    }
}

/// `max |sum_n g_kappa(xi - n spacing) - 1|` over `samples` points of one
/// period.
pub fn partition_check(kappa: f64, spacing: f64, samples: usize) -> Result<f64> {
    let g = PositionWindow::new(kappa)?;
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    let reach = g.half_width();
    let samples = samples.max(2);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let xi = spacing * (i as f64 / (samples - 1) as f64 - 0.5) * 2.0;
        let lo = ((xi - reach) / spacing).ceil() as i64;
        let hi = ((xi + reach) / spacing).floor() as i64;
        let sum: f64 = (lo..=hi).map(|n| g.eval(xi - n as f64 * spacing)).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    Ok(worst)
}
