//! Windowed local density of states `W_x(E) = Tr(g^{1/2}(X - x) f(H - E) g^{1/2}(X - x))`.
//!
//! No `1/N` normalisation is applied to `W`; only [`wdos`] divides by the
//! number of orbitals.
//!
//! Three evaluators share one interface: an exact spectral path, a kernel
//! polynomial path that touches only the window support, and a certified
//! spatial truncation that solves on the support of `k_alpha(X - x)`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CsrMatrix, EigenRows};
use crate::model::TightBindingModel;
use crate::windows::{
    filter_interval, fit_polynomial_filter, locality_c1, ChebyshevFilter, EnergyWindow, PositionWindow,
    TruncationWindow,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Dense,
    Kpm {
        order: usize,
    },
    /// Solve on the `k_alpha` block; `order` selects a polynomial inner
    /// solve instead of the exact one.
    Truncated {
        alpha: f64,
        order: Option<usize>,
    },
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::Kpm { .. } => "kpm",
            Method::Truncated { .. } => "truncated",
        }
    }
}

/// Certified bound components on `|value - W_x(E)|`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub polynomial: f64,
    pub truncation: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.polynomial + self.truncation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WldosRequest {
    pub model: String,
    pub n_orbitals: usize,
    pub energy: f64,
    pub x: f64,
    pub energy_window: EnergyWindow,
    pub kappa: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WldosResult {
    pub value: f64,
    pub budget: ErrorBudget,
    pub request: WldosRequest,
}

/// Orbitals where `g(x_i - x) > 0`, with the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub orbitals: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Support {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn window_support(positions: &[f64], g: &PositionWindow, x: f64) -> Support {
    let mut orbitals = Vec::new();
    let mut weights = Vec::new();
    for (i, &xi) in positions.iter().enumerate() {
        let w = g.eval(xi - x);
        if w > 0.0 {
            orbitals.push(i);
            weights.push(w);
        }
    }
    Support { orbitals, weights }
}

fn require_1d(model: &TightBindingModel) -> Result<()> {
    if model.spatial_dim() != 1 {
        return Err(Error::Precondition(format!(
            "wLDOS evaluation is implemented for 1d models, got dimension {}",
            model.spatial_dim()
        )));
    }
    Ok(())
}

/// Eigenvalues plus eigenvector rows for a fixed set of orbitals.
struct SpectralRows {
    rows: EigenRows,
    index: HashMap<usize, usize>,
}

impl SpectralRows {
    fn new(h: &CsrMatrix, mut rows: Vec<usize>) -> Result<Self> {
        rows.sort_unstable();
        rows.dedup();
        let rows = linalg::eigen_rows(h, &rows)?;
        let index = rows.rows.iter().enumerate().map(|(k, &r)| (r, k)).collect();
        Ok(Self { rows, index })
    }

    /// `w_j = sum_i g_i |psi_j(i)|^2` over the support.
    fn weights(&self, support: &Support) -> Vec<f64> {
        let mut w = vec![0.0; self.rows.values.len()];
        for (&i, &gi) in support.orbitals.iter().zip(&support.weights) {
            let comp = &self.rows.components[self.index[&i]];
            for (wj, c) in w.iter_mut().zip(comp) {
                *wj += gi * c * c;
            }
        }
        w
    }

    fn contract(&self, weights: &[f64], f: &EnergyWindow, energy: f64) -> f64 {
        self.rows
            .values
            .iter()
            .zip(weights)
            .map(|(&l, &w)| f.eval(l - energy) * w)
            .sum()
    }
}

/// Scratch space for local Chebyshev recurrences: full-length vectors that
/// are only touched on the active frontier.
struct KpmWorkspace {
    prev: Vec<f64>,
    cur: Vec<f64>,
    next: Vec<f64>,
    mark: Vec<bool>,
}

impl KpmWorkspace {
    fn new(n: usize) -> Self {
        Self {
            prev: vec![0.0; n],
            cur: vec![0.0; n],
            next: vec![0.0; n],
            mark: vec![false; n],
        }
    }

    /// `<e_i | p((H - shift)) | e_i>` for the Chebyshev series `p`, whose
    /// interval is symmetric about zero.
    fn diagonal(&mut self, h: &CsrMatrix, i: usize, shift: f64, p: &ChebyshevFilter) -> f64 {
        let center = 0.5 * (p.a + p.b);
        let half = 0.5 * (p.b - p.a);
        let order = p.order();
        let mut active = vec![i];
        self.mark[i] = true;
        self.cur[i] = 1.0;
        let mut value = p.coeffs[0];

        // y = A~ v, A~ = (H - shift - center) / half, evaluated on the grown frontier.
        let grow = |active: &mut Vec<usize>, mark: &mut [bool]| {
            let len = active.len();
            for k in 0..len {
                for (j, _) in h.row(active[k]) {
                    if !mark[j] {
                        mark[j] = true;
                        active.push(j);
                    }
                }
            }
        };
        for k in 1..=order {
            grow(&mut active, &mut self.mark);
            let factor = if k == 1 { 1.0 } else { 2.0 };
            for &r in &active {
                let mut s = 0.0;
                for (j, v) in h.row(r) {
                    s += v * self.cur[j];
                }
                s = (s - (shift + center) * self.cur[r]) / half;
                self.next[r] = factor * s - if k == 1 { 0.0 } else { self.prev[r] };
            }
            for &r in &active {
                self.prev[r] = self.cur[r];
                self.cur[r] = self.next[r];
            }
            value += p.coeffs[k] * self.cur[i];
        }
        for &r in &active {
            self.prev[r] = 0.0;
            self.cur[r] = 0.0;
            self.next[r] = 0.0;
            self.mark[r] = false;
        }
        value
    }
}

/// A wLDOS problem: a model with fixed energy and position windows and an
/// evaluation method. Pointwise calls and grids share the same code path,
/// so a 1x1 grid reproduces a pointwise call bit for bit.
pub struct Wldos<'a> {
    model: &'a TightBindingModel,
    f: EnergyWindow,
    g: PositionWindow,
    method: Method,
    positions: Vec<f64>,
    h_bound: f64,
}

impl<'a> Wldos<'a> {
    pub fn new(model: &'a TightBindingModel, f: EnergyWindow, g: PositionWindow, method: Method) -> Result<Self> {
        require_1d(model)?;
        match method {
            Method::Truncated { alpha, .. } if !(alpha > 0.0 && alpha.is_finite()) => {
                return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
            }
            _ => {}
        }
        Ok(Self {
            model,
            f,
            g,
            method,
            positions: model.position_diag(0),
            h_bound: model.norm_bound(),
        })
    }

    fn request(&self, x: f64, energy: f64) -> WldosRequest {
        WldosRequest {
            model: self.model.metadata().spec.name().to_string(),
            n_orbitals: self.model.n_orbitals(),
            energy,
            x,
            energy_window: self.f.clone(),
            kappa: self.g.kappa(),
            method: self.method,
        }
    }

    pub fn evaluate(&self, x: f64, energy: f64) -> Result<WldosResult> {
        let grid = self.grid_serial(&[x], &[energy])?;
        Ok(grid.into_iter().next().expect("one cell"))
    }

    /// Row-major grid over `(x, E)` computed on up to `threads` workers
    /// (`0` means the rayon default). Output is independent of `threads`.
    pub fn grid(&self, xs: &[f64], energies: &[f64], threads: usize) -> Result<Vec<WldosResult>> {
        if xs.is_empty() || energies.is_empty() {
            return Err(Error::InvalidParameter("grid ranges must be nonempty".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        let prep = self.prepare(xs)?;
        let rows: Vec<Result<Vec<WldosResult>>> =
            pool.install(|| xs.par_iter().map(|&x| self.row(&prep, x, energies)).collect());
        let mut out = Vec::with_capacity(xs.len() * energies.len());
        for r in rows {
            out.extend(r?);
        }
        Ok(out)
    }

    fn grid_serial(&self, xs: &[f64], energies: &[f64]) -> Result<Vec<WldosResult>> {
        let prep = self.prepare(xs)?;
        let mut out = Vec::new();
        for &x in xs {
            out.extend(self.row(&prep, x, energies)?);
        }
        Ok(out)
    }

    fn prepare(&self, xs: &[f64]) -> Result<Prepared> {
        Ok(match self.method {
            Method::Dense => {
                let mut rows = Vec::new();
                for &x in xs {
                    rows.extend(window_support(&self.positions, &self.g, x).orbitals);
                }
                Prepared::Dense(SpectralRows::new(self.model.hamiltonian(), rows)?)
            }
            Method::Kpm { .. } => Prepared::None,
            Method::Truncated { .. } => Prepared::Commutator(self.model.commutator_norm(0)),
        })
    }

    fn row(&self, prep: &Prepared, x: f64, energies: &[f64]) -> Result<Vec<WldosResult>> {
        let support = window_support(&self.positions, &self.g, x);
        let cell_err = |energy: f64| {
            move |e: Error| Error::Cell {
                x,
                energy,
                source: Box::new(e),
            }
        };
        let mut out = Vec::with_capacity(energies.len());
        match (self.method, prep) {
            (Method::Dense, Prepared::Dense(spec)) => {
                let w = spec.weights(&support);
                for &e in energies {
                    out.push(self.finish(x, e, spec.contract(&w, &self.f, e), ErrorBudget::default()));
                }
            }
            (Method::Kpm { order }, _) => {
                let mut ws = KpmWorkspace::new(self.model.n_orbitals());
                for &e in energies {
                    let (value, poly) = kpm_trace(
                        self.model.hamiltonian(),
                        &support,
                        &self.f,
                        e,
                        self.h_bound,
                        order,
                        &mut ws,
                    )
                    .map_err(cell_err(e))?;
                    out.push(self.finish(
                        x,
                        e,
                        value,
                        ErrorBudget {
                            polynomial: poly,
                            truncation: 0.0,
                        },
                    ));
                }
            }
            (Method::Truncated { alpha, order }, Prepared::Commutator(comm)) => {
                let block = TruncatedBlock::new(self.model, &self.positions, &self.g, alpha, x)?;
                for &e in energies {
                    let (value, poly) = block.evaluate(&self.f, e, order).map_err(cell_err(e))?;
                    let truncation =
                        truncation_budget(&self.f, &support, &block.k, self.h_bound, e, *comm).map_err(cell_err(e))?;
                    out.push(self.finish(
                        x,
                        e,
                        value,
                        ErrorBudget {
                            polynomial: poly,
                            truncation,
                        },
                    ));
                }
            }
            _ => unreachable!("prepared state matches the method"),
        }
        Ok(out)
    }

    fn finish(&self, x: f64, energy: f64, value: f64, budget: ErrorBudget) -> WldosResult {
        WldosResult {
            value,
            budget,
            request: self.request(x, energy),
        }
    }
}

enum Prepared {
    None,
    Dense(SpectralRows),
    Commutator(f64),
}

/// `sum_i g_i <e_i| p(H - E) |e_i>` with `p` the Chebyshev fit of `f` on the
/// interval covering `spec(H - E)`. Returns the value and the polynomial
/// budget `sup|p - f| * sum_i g_i`.
fn kpm_trace(
    h: &CsrMatrix,
    support: &Support,
    f: &EnergyWindow,
    energy: f64,
    h_bound: f64,
    order: usize,
    ws: &mut KpmWorkspace,
) -> Result<(f64, f64)> {
    if support.orbitals.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (a, b) = filter_interval(h_bound, energy);
    let fit = fit_polynomial_filter(f, a, b, order)?;
    let mut value = 0.0;
    for (&i, &gi) in support.orbitals.iter().zip(&support.weights) {
        value += gi * ws.diagonal(h, i, energy, &fit.filter);
    }
    Ok((value, fit.sup_error * support.total_weight()))
}

/// The block `k(X - x)(H - E)k(X - x)` on the sites where `k > 0`.
struct TruncatedBlock {
    k: TruncationWindow,
    /// `K H K` on the kept orbitals.
    khk: CsrMatrix,
    /// `k^2` per kept orbital, for the energy shift.
    k2: Vec<f64>,
    /// Position-window support in block indices.
    support: Support,
}

impl TruncatedBlock {
    fn new(model: &TightBindingModel, positions: &[f64], g: &PositionWindow, alpha: f64, x: f64) -> Result<Self> {
        let k = TruncationWindow::for_window(g, alpha)?;
        let kept: Vec<usize> = (0..positions.len())
            .filter(|&i| k.eval(positions[i] - x) > 0.0)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyTruncation {
                center: vec![x],
                radius: k.support(),
            });
        }
        let kv: Vec<f64> = kept.iter().map(|&i| k.eval(positions[i] - x)).collect();
        let sub = model.hamiltonian().principal_submatrix(&kept);
        let khk = sub.shifted_congruence(0.0, &kv);
        let local: Vec<f64> = kept.iter().map(|&i| positions[i]).collect();
        let support = window_support(&local, g, x);
        Ok(Self {
            k,
            khk,
            k2: kv.iter().map(|v| v * v).collect(),
            support,
        })
    }

    fn shifted(&self, energy: f64) -> CsrMatrix {
        let mut t: Vec<(usize, usize, f64)> = self.khk.triplets().collect();
        for (i, k2) in self.k2.iter().enumerate() {
            t.push((i, i, -energy * k2));
        }
        CsrMatrix::from_triplets(self.khk.dim(), &t).expect("same shape")
    }

    fn evaluate(&self, f: &EnergyWindow, energy: f64, order: Option<usize>) -> Result<(f64, f64)> {
        if self.support.orbitals.is_empty() {
            return Ok((0.0, 0.0));
        }
        let block = self.shifted(energy);
        match order {
            None => {
                let spec = SpectralRows::new(&block, self.support.orbitals.clone())?;
                let w = spec.weights(&self.support);
                Ok((spec.contract(&w, f, 0.0), 0.0))
            }
            Some(order) => {
                let mut ws = KpmWorkspace::new(block.dim());
                kpm_trace(&block, &self.support, f, 0.0, block.row_sum_norm(), order, &mut ws)
            }
        }
    }
}

/// `|S| C_1(f, ||H|| + |E|) (2M + 1) ||l||_1 alpha ||[X, H]||`, with `|S|` the
/// number of orbitals in the position-window support (bounding the rank of
/// `g^{1/2}`).
fn truncation_budget(
    f: &EnergyWindow,
    support: &Support,
    k: &TruncationWindow,
    h_bound: f64,
    energy: f64,
    commutator: f64,
) -> Result<f64> {
    if support.orbitals.is_empty() {
        return Ok(0.0);
    }
    let c1 = locality_c1(f, h_bound + energy.abs())?;
    Ok(support.orbitals.len() as f64 * c1 * k.commutator_factor() * commutator)
}

pub fn wldos_dense(
    model: &TightBindingModel,
    energy: f64,
    x: f64,
    f: &EnergyWindow,
    g: &PositionWindow,
) -> Result<WldosResult> {
    Wldos::new(model, f.clone(), *g, Method::Dense)?.evaluate(x, energy)
}

pub fn wldos_kpm(
    model: &TightBindingModel,
    energy: f64,
    x: f64,
    f: &EnergyWindow,
    g: &PositionWindow,
    order: usize,
) -> Result<WldosResult> {
    Wldos::new(model, f.clone(), *g, Method::Kpm { order })?.evaluate(x, energy)
}

pub fn wldos_truncated(
    model: &TightBindingModel,
    energy: f64,
    x: f64,
    f: &EnergyWindow,
    g: &PositionWindow,
    alpha: f64,
    order: Option<usize>,
) -> Result<WldosResult> {
    Wldos::new(model, f.clone(), *g, Method::Truncated { alpha, order })?.evaluate(x, energy)
}

/// `(1/N) Tr f(H - E)`.
pub fn wdos(model: &TightBindingModel, energy: f64, f: &EnergyWindow) -> Result<f64> {
    let values = linalg::eigenvalues(model.hamiltonian())?;
    let sum: f64 = values.iter().map(|&l| f.eval(l - energy)).sum();
    Ok(sum / values.len() as f64)
}

/// `sum_m <d_n^m| f(H - E) |d_n^m>` for site `n`.
pub fn ldos_windowed_energy(model: &TightBindingModel, site: usize, energy: f64, f: &EnergyWindow) -> Result<f64> {
    if site >= model.n_sites() {
        return Err(Error::IndexOutOfRange {
            index: site,
            len: model.n_sites(),
        });
    }
    let m = model.internal_dim();
    let rows: Vec<usize> = (site * m..(site + 1) * m).collect();
    let support = Support {
        weights: vec![1.0; rows.len()],
        orbitals: rows.clone(),
    };
    let spec = SpectralRows::new(model.hamiltonian(), rows)?;
    let w = spec.weights(&support);
    Ok(spec.contract(&w, f, energy))
}

/// `||F^{1/2}||_F^2` for `F = g^{1/2}(X - x) f(H - E) g^{1/2}(X - x)`, with
/// the square root taken through an eigendecomposition of `F` on the window
/// support.
pub fn frobenius_trace(
    model: &TightBindingModel,
    energy: f64,
    x: f64,
    f: &EnergyWindow,
    g: &PositionWindow,
) -> Result<f64> {
    require_1d(model)?;
    let support = window_support(&model.position_diag(0), g, x);
    let s = support.orbitals.len();
    if s == 0 {
        return Ok(0.0);
    }
    if s > linalg::DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            dim: s,
            cap: linalg::DENSE_CAP,
        });
    }
    let spec = SpectralRows::new(model.hamiltonian(), support.orbitals.clone())?;
    let fv: Vec<f64> = spec.rows.values.iter().map(|&l| f.eval(l - energy)).collect();
    let sqrt_g: Vec<f64> = support.weights.iter().map(|w| w.sqrt()).collect();
    let comps: Vec<&Vec<f64>> = support
        .orbitals
        .iter()
        .map(|i| &spec.rows.components[spec.index[i]])
        .collect();
    let big_f = DMatrix::from_fn(s, s, |a, b| {
        let dot: f64 = comps[a]
            .iter()
            .zip(comps[b])
            .zip(&fv)
            .map(|((u, v), fj)| u * fj * v)
            .sum();
        sqrt_g[a] * dot * sqrt_g[b]
    });
    let big_f = (&big_f + big_f.transpose()) * 0.5;
    let (values, vectors) = linalg::sorted_symmetric_eigen(big_f);
    if let Some(&worst) = values.first() {
        if worst < -1e-10 {
            return Err(Error::NegativeEigenvalue(worst));
        }
    }
    let roots = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        s,
        values.iter().map(|v| v.max(0.0).sqrt()),
    ));
    let root = &vectors * roots * vectors.transpose();
    Ok(root.iter().map(|v| v * v).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Rademacher,
    /// Unit vectors on the support; exact.
    Orthonormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_probes: usize,
}

/// Hutchinson estimate of `W_x(E)` with probes restricted to the window
/// support. Probe products are evaluated exactly through the spectral rows.
#[allow(clippy::too_many_arguments)]
pub fn hutchinson_trace(
    model: &TightBindingModel,
    energy: f64,
    x: f64,
    f: &EnergyWindow,
    g: &PositionWindow,
    n_probes: usize,
    seed: u64,
    kind: ProbeKind,
) -> Result<TraceEstimate> {
    require_1d(model)?;
    if n_probes == 0 {
        return Err(Error::InvalidParameter("n_probes must be >= 1".into()));
    }
    let support = window_support(&model.position_diag(0), g, x);
    let s = support.orbitals.len();
    if s == 0 {
        return Ok(TraceEstimate {
            mean: 0.0,
            stderr: 0.0,
            n_probes,
        });
    }
    let spec = SpectralRows::new(model.hamiltonian(), support.orbitals.clone())?;
    let fv: Vec<f64> = spec.rows.values.iter().map(|&l| f.eval(l - energy)).collect();
    let weighted: Vec<Vec<f64>> = support
        .orbitals
        .iter()
        .zip(&support.weights)
        .map(|(i, w)| {
            let sw = w.sqrt();
            spec.rows.components[spec.index[i]].iter().map(|c| sw * c).collect()
        })
        .collect();
    let quad = |z: &[f64]| -> f64 {
        (0..fv.len())
            .map(|j| {
                let p: f64 = z.iter().zip(&weighted).map(|(zi, row)| zi * row[j]).sum();
                fv[j] * p * p
            })
            .sum()
    };

    match kind {
        ProbeKind::Orthonormal => {
            let mut total = 0.0;
            let mut z = vec![0.0; s];
            for k in 0..s {
                z[k] = 1.0;
                total += quad(&z);
                z[k] = 0.0;
            }
            Ok(TraceEstimate {
                mean: total,
                stderr: 0.0,
                n_probes: s,
            })
        }
        ProbeKind::Rademacher => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<f64> = (0..n_probes)
                .map(|_| {
                    let z: Vec<f64> = (0..s).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
                    quad(&z)
                })
                .collect();
            let n = n_probes as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let stderr = if n_probes > 1 {
                let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            Ok(TraceEstimate { mean, stderr, n_probes })
        }
    }
}

/// Grid CSV body with header `x,E,wldos,budget_poly,budget_trunc,method`.
pub fn grid_csv(results: &[WldosResult]) -> String {
    let mut out = String::from("x,E,wldos,budget_poly,budget_trunc,method\n");
    for r in results {
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?},{}\n",
            r.request.x,
            r.request.energy,
            r.value,
            r.budget.polynomial,
            r.budget.truncation,
            r.request.method.tag()
        ));
    }
    out
}
