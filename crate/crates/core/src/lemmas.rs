//! Direct numerical checks of the commutator and locality inequalities on
//! small dense Hermitian matrices.
//!
//! Each check evaluates both sides and reports `lhs / rhs`; an inequality
//! holds when every ratio is at most one (up to roundoff).

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::windows::{bump, ell_l1_norm, locality_c1, EnergyWindow, PositionWindow, TruncationWindow};

type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest observed `lhs / rhs` per inequality.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaRatios {
    /// `||[e^{itX}, H]|| <= |t| ||[X, H]||`
    pub unitary_commutator: f64,
    /// `||g^{1/2}(e^{itH} - e^{itKHK})g^{1/2}|| <= |t|(1 + |t| ||H||) ||[k(X), H]||`
    pub truncated_propagator: f64,
    /// `||g^{1/2}(f(H) - f(KHK))g^{1/2}|| <= C_1 ||[k(X), H]||`
    pub locality: f64,
    /// `||[bump(X), H]|| <= ||l||_1 ||[X, H]||`
    pub smooth_commutator: f64,
    /// `||[k_alpha(X), H]|| <= (2M + 1) ||l||_1 alpha ||[X, H]||`
    pub cutoff_commutator: f64,
    /// Largest left-hand side seen, to tell trivial passes apart.
    pub max_lhs: f64,
}

impl LemmaRatios {
    pub fn max_ratio(&self) -> f64 {
        [
            self.unitary_commutator,
            self.truncated_propagator,
            self.locality,
            self.smooth_commutator,
            self.cutoff_commutator,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn merge(&mut self, other: &LemmaRatios) {
        self.unitary_commutator = self.unitary_commutator.max(other.unitary_commutator);
        self.truncated_propagator = self.truncated_propagator.max(other.truncated_propagator);
        self.locality = self.locality.max(other.locality);
        self.smooth_commutator = self.smooth_commutator.max(other.smooth_commutator);
        self.cutoff_commutator = self.cutoff_commutator.max(other.cutoff_commutator);
        self.max_lhs = self.max_lhs.max(other.max_lhs);
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn op_norm(m: &CMatrix) -> f64 {
    if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.clone().singular_values().max()
}

fn is_diagonal(m: &CMatrix) -> bool {
    m.iter()
        .enumerate()
        .all(|(k, z)| k % m.nrows() == k / m.nrows() || *z == C64::new(0.0, 0.0))
}

/// `phi(A)` for Hermitian `A` through its eigendecomposition.
pub fn hermitian_function(a: &CMatrix, phi: impl Fn(f64) -> C64) -> CMatrix {
    let n = a.nrows();
    if is_diagonal(a) {
        return CMatrix::from_fn(n, n, |i, j| if i == j { phi(a[(i, i)].re) } else { C64::new(0.0, 0.0) });
    }
    let eig = a.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let d = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            phi(eig.eigenvalues[i])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    u * d * u.adjoint()
}

fn diag(values: impl Iterator<Item = f64>) -> CMatrix {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(v[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Checks all inequalities for one instance: Hermitian `h`, diagonal
/// position values `x`, position window `g` and cutoff `k` centred at 0,
/// energy window `f`, and times `ts`.
pub fn lemma_bounds_check(
    h: &CMatrix,
    x: &[f64],
    g: &PositionWindow,
    k: &TruncationWindow,
    f: &EnergyWindow,
    ts: &[f64],
) -> Result<LemmaRatios> {
    let n = h.nrows();
    if h.ncols() != n || x.len() != n {
        return Err(Error::InvalidParameter("shape mismatch".into()));
    }
    if (h - h.adjoint()).iter().any(|z| z.norm() > 1e-14) {
        return Err(Error::NotHermitian { row: 0, col: 0 });
    }
    for &xi in x {
        if k.eval(xi) * g.eval(xi) != g.eval(xi) {
            return Err(Error::Precondition(format!("k g != g at x = {xi}")));
        }
    }
    let xm = diag(x.iter().copied());
    let gs = diag(x.iter().map(|&xi| g.eval(xi).sqrt()));
    let km = diag(x.iter().map(|&xi| k.eval(xi)));
    let khk = &km * h * &km;
    let h_norm = op_norm(h);
    let xh = op_norm(&commutator(&xm, h));
    let kh = op_norm(&commutator(&km, h));
    let mut out = LemmaRatios::default();

    for &t in ts {
        let u = hermitian_function(&xm, |l| C64::new(0.0, t * l).exp());
        let lhs = op_norm(&commutator(&u, h));
        out.unitary_commutator = out.unitary_commutator.max(ratio(lhs, t.abs() * xh));
        out.max_lhs = out.max_lhs.max(lhs);

        let e_h = hermitian_function(h, |l| C64::new(0.0, t * l).exp());
        let e_k = hermitian_function(&khk, |l| C64::new(0.0, t * l).exp());
        let lhs = op_norm(&(&gs * (e_h - e_k) * &gs));
        let rhs = t.abs() * (1.0 + t.abs() * h_norm) * kh;
        out.truncated_propagator = out.truncated_propagator.max(ratio(lhs, rhs));
        out.max_lhs = out.max_lhs.max(lhs);
    }

    let fr = |l: f64| C64::new(f.eval(l), 0.0);
    let lhs = op_norm(&(&gs * (hermitian_function(h, fr) - hermitian_function(&khk, fr)) * &gs));
    let c1 = locality_c1(f, h_norm)?;
    out.locality = ratio(lhs, c1 * kh);
    out.max_lhs = out.max_lhs.max(lhs);

    let bm = diag(x.iter().map(|&xi| bump(xi)));
    let lhs = op_norm(&commutator(&bm, h));
    out.smooth_commutator = ratio(lhs, ell_l1_norm() * xh);
    out.max_lhs = out.max_lhs.max(lhs);

    out.cutoff_commutator = ratio(kh, k.commutator_factor() * xh);
    out.max_lhs = out.max_lhs.max(kh);
    Ok(out)
}

/// Default times probed by the propagator inequalities.
pub fn default_times() -> Vec<f64> {
    vec![-3.0, -0.5, -1e-3, 1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0]
}

/// `n_instances` seeded random `dim x dim` instances; returns the maximum
/// ratio per inequality.
pub fn random_suite(n_instances: usize, dim: usize, seed: u64) -> Result<LemmaRatios> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = PositionWindow::new(2.0)?;
    let ts = default_times();
    let mut out = LemmaRatios::default();
    for _ in 0..n_instances {
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-6.0..6.0)).collect();
        let alpha = rng.random_range(0.2..1.0);
        let k = TruncationWindow::for_window(&g, alpha)?;
        let f = EnergyWindow::gaussian(rng.random_range(0.3..2.0))?;
        out.merge(&lemma_bounds_check(&h, &x, &g, &k, &f, &ts)?);
    }
    Ok(out)
}

/// `||[e^{itX}, H]|| / (|t| ||[X, H]||)` for one small `t`.
pub fn small_t_ratio(h: &CMatrix, x: &[f64], t: f64) -> f64 {
    let xm = diag(x.iter().copied());
    let u = hermitian_function(&xm, |l| C64::new(0.0, t * l).exp());
    ratio(op_norm(&commutator(&u, h)), t.abs() * op_norm(&commutator(&xm, h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_instance(seed: u64, dim: usize) -> (CMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let x = (0..dim).map(|_| rng.random_range(-6.0..6.0)).collect();
        (h, x)
    }

    #[test]
    fn commuting_pair_has_zero_lhs() {
        let h = diag([1.0, -0.3, 2.0, 0.7].into_iter());
        let x = [0.1, -0.5, 3.0, 1.2];
        let g = PositionWindow::new(2.0).unwrap();
        let k = TruncationWindow::for_window(&g, 0.5).unwrap();
        let f = EnergyWindow::gaussian(0.5).unwrap();
        let r = lemma_bounds_check(&h, &x, &g, &k, &f, &default_times()).unwrap();
        assert_eq!(r.max_lhs, 0.0);
        assert_eq!(r.max_ratio(), 0.0);
    }

    #[test]
    fn random_instances_satisfy_bounds() {
        let r = random_suite(20, 16, 11).unwrap();
        assert!(r.max_ratio() <= 1.0 + 1e-8, "{r:?}");
        assert!(r.max_lhs > 0.0);
    }

    #[test]
    fn small_t_ratio_tends_to_one() {
        let (h, x) = random_instance(3, 12);
        let mut prev = 0.0;
        for t in [1e-1, 1e-2, 1e-3, 1e-4] {
            let r = small_t_ratio(&h, &x, t);
            assert!(r <= 1.0 + 1e-10);
            assert!(r >= prev - 1e-12);
            prev = r;
        }
        assert!((prev - 1.0).abs() < 1e-6, "{prev}");
    }

    #[test]
    fn violated_precondition_rejected() {
        let (h, x) = random_instance(5, 6);
        let g = PositionWindow::new(0.5).unwrap();
        // cutoff far narrower than g
        let k = TruncationWindow::new(0.1, 20.0).unwrap();
        let f = EnergyWindow::gaussian(1.0).unwrap();
        assert!(matches!(
            lemma_bounds_check(&h, &x, &g, &k, &f, &[1.0]),
            Err(Error::Precondition(_))
        ));
    }
}
