//! Spectra, integrated density of states, gap detection and edge modes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Sturm};
use crate::model::{BoundaryCondition, TightBindingModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` belongs to `eigenvalues[j]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub model: String,
}

/// Eigenvalues of `H`; chain-structured models go through the tridiagonal
/// solver, which is not limited by the dense cap.
pub fn spectrum(model: &TightBindingModel) -> Result<SpectrumResult> {
    Ok(SpectrumResult {
        eigenvalues: linalg::eigenvalues(model.hamiltonian())?,
        eigenvectors: None,
        model: model.metadata().spec.name().to_string(),
    })
}

/// Eigenvalues and eigenvectors; dense, subject to the dense cap.
pub fn spectrum_with_vectors(model: &TightBindingModel) -> Result<SpectrumResult> {
    let (values, vectors) = linalg::dense_eigen(model.hamiltonian())?;
    let n = values.len();
    Ok(SpectrumResult {
        eigenvalues: values,
        eigenvectors: Some((0..n).map(|j| vectors.column(j).iter().copied().collect()).collect()),
        model: model.metadata().spec.name().to_string(),
    })
}

/// Fraction of eigenvalues `<= energy`.
pub fn integrated_dos(spec: &SpectrumResult, energy: f64) -> f64 {
    let n = spec.eigenvalues.len();
    if n == 0 {
        return 0.0;
    }
    spec.eigenvalues.partition_point(|&l| l <= energy) as f64 / n as f64
}

/// IDOS of a model at many energies, by inertia counts when the
/// Hamiltonian is a chain (no eigensolve) and from the spectrum otherwise.
pub fn idos_curve(model: &TightBindingModel, energies: &[f64]) -> Result<Vec<f64>> {
    let h = model.hamiltonian();
    let n = h.dim() as f64;
    match h.as_chain() {
        Some(chain) => {
            if h.dim() > linalg::CHAIN_CAP {
                return Err(Error::DenseCapExceeded {
                    dim: h.dim(),
                    cap: linalg::CHAIN_CAP,
                });
            }
            let sturm: Sturm = chain.sturm();
            Ok(energies
                .iter()
                .map(|&e| sturm.count_below(e.next_up()) as f64 / n)
                .collect())
        }
        None => {
            let spec = spectrum(model)?;
            Ok(energies.iter().map(|&e| integrated_dos(&spec, e)).collect())
        }
    }
}

/// Largest open interval around `e0` free of eigenvalues. Unbounded sides
/// are reported as infinities.
pub fn bulk_gap(spec: &SpectrumResult, e0: f64) -> Result<(f64, f64)> {
    let ev = &spec.eigenvalues;
    let k = ev.partition_point(|&l| l < e0);
    for &near in ev.get(k.saturating_sub(1)..(k + 1).min(ev.len())).unwrap_or(&[]) {
        if (near - e0).abs() <= 1e-12 {
            return Err(Error::OnEigenvalue {
                energy: e0,
                eigenvalue: near,
            });
        }
    }
    let lower = if k == 0 { f64::NEG_INFINITY } else { ev[k - 1] };
    let upper = ev.get(k).copied().unwrap_or(f64::INFINITY);
    Ok((lower, upper))
}

/// Hausdorff distance between two finite point sets on the line.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    fn one_sided(a: &[f64], sorted_b: &[f64]) -> f64 {
        a.iter()
            .map(|&x| {
                let k = sorted_b.partition_point(|&y| y < x);
                let mut d = f64::INFINITY;
                if k < sorted_b.len() {
                    d = d.min(sorted_b[k] - x);
                }
                if k > 0 {
                    d = d.min(x - sorted_b[k - 1]);
                }
                d
            })
            .fold(0.0, f64::max)
    }
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    one_sided(&sa, &sb).max(one_sided(&sb, &sa))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: u32,
    pub n_eigenvalues: usize,
    /// Gap half-width around zero (`min |lambda|`).
    pub gap_half_width: f64,
    /// Hausdorff distance to the previous stage's spectrum.
    pub hausdorff_to_previous: Option<f64>,
}

/// Spectra of successive models and the Hausdorff distance between
/// consecutive spectra (as point sets).
pub fn stage_convergence(models: &[(u32, TightBindingModel)]) -> Result<(Vec<StageRow>, Vec<SpectrumResult>)> {
    if models.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::InvalidParameter("stages must be ascending".into()));
    }
    let mut rows = Vec::new();
    let mut spectra: Vec<SpectrumResult> = Vec::new();
    for (stage, model) in models {
        let spec = spectrum(model)?;
        let gap = spec.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        rows.push(StageRow {
            stage: *stage,
            n_eigenvalues: spec.eigenvalues.len(),
            gap_half_width: gap,
            hausdorff_to_previous: spectra.last().map(|p| hausdorff(&p.eigenvalues, &spec.eigenvalues)),
        });
        spectra.push(spec);
    }
    Ok((rows, spectra))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeMode {
    /// `<psi|H|psi>` of the reported (localised) mode.
    pub energy: f64,
    pub edge: Edge,
    /// Decay length in sites from a fit of `log |psi_n|` against distance
    /// to the nearest edge.
    pub localization_length: f64,
    /// Weight on the `edge_sites` sites closest to the assigned edge.
    pub edge_mass: f64,
    /// Per-site weight `sum_m |psi_{n,m}|^2`.
    pub site_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeModeReport {
    /// Dirichlet eigenvalues strictly inside the reference gap, ascending.
    pub in_gap_eigenvalues: Vec<f64>,
    pub reference_gap: (f64, f64),
    pub edge_sites: usize,
    pub modes: Vec<EdgeModeReportEntry>,
}

pub type EdgeModeReportEntry = EdgeMode;

/// In-gap modes of a Dirichlet chain. The reference gap around zero comes
/// from the periodic rebuild of the same model. Nearly degenerate in-gap
/// eigenvectors are rotated into position eigenstates within their cluster,
/// so each reported mode sits at one edge.
pub fn edge_modes(model: &TightBindingModel, edge_sites: usize) -> Result<EdgeModeReport> {
    if model.bc() != BoundaryCondition::Dirichlet {
        return Err(Error::Precondition("edge modes need a Dirichlet chain".into()));
    }
    let periodic = model.metadata().spec.with_bc(BoundaryCondition::Periodic).build()?;
    let reference = bulk_gap(&spectrum(&periodic)?, 0.0).map_err(|_| Error::NoGap(0.0))?;
    if !(reference.0.is_finite() && reference.1.is_finite()) {
        return Err(Error::NoGap(0.0));
    }

    let h = model.hamiltonian();
    let n = h.dim();
    let (values, vectors): (Vec<f64>, Vec<Vec<f64>>) = match h.as_chain().filter(|c| !c.is_periodic()) {
        Some(chain) => {
            let sturm = chain.sturm();
            let lo = sturm.count_below(reference.0.next_up());
            let hi = sturm.count_below(reference.1);
            let values: Vec<f64> = (lo..hi).map(|k| sturm.kth_eigenvalue(k)).collect();
            let vectors = chain.eigenvectors(&values)?;
            (values, vectors)
        }
        None => {
            let (all, vecs) = linalg::dense_eigen(h)?;
            let keep: Vec<usize> = (0..all.len())
                .filter(|&j| all[j] > reference.0 && all[j] < reference.1)
                .collect();
            (
                keep.iter().map(|&j| all[j]).collect(),
                keep.iter().map(|&j| vecs.column(j).iter().copied().collect()).collect(),
            )
        }
    };

    let x = model.position_diag(0);
    let cluster_tol = 1e-6 * model.norm_bound().max(1.0);
    let mut modes = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= cluster_tol {
            end += 1;
        }
        for v in localize(&vectors[start..end], &x) {
            modes.push(describe_mode(model, &v, n, edge_sites));
        }
        start = end;
    }
    Ok(EdgeModeReport {
        in_gap_eigenvalues: values,
        reference_gap: reference,
        edge_sites,
        modes,
    })
}

/// Rotates an orthonormal set into eigenvectors of `X` restricted to its span.
fn localize(vectors: &[Vec<f64>], x: &[f64]) -> Vec<Vec<f64>> {
    let k = vectors.len();
    if k == 1 {
        return vectors.to_vec();
    }
    let proj = DMatrix::from_fn(k, k, |a, b| {
        vectors[a]
            .iter()
            .zip(&vectors[b])
            .zip(x)
            .map(|((u, v), xi)| u * xi * v)
            .sum::<f64>()
    });
    let proj = (&proj + proj.transpose()) * 0.5;
    let (_, rot) = linalg::sorted_symmetric_eigen(proj);
    (0..k)
        .map(|c| {
            let mut v = vec![0.0; x.len()];
            for a in 0..k {
                let w = rot[(a, c)];
                v.iter_mut().zip(&vectors[a]).for_each(|(o, u)| *o += w * u);
            }
            v
        })
        .collect()
}

fn describe_mode(model: &TightBindingModel, v: &[f64], n: usize, edge_sites: usize) -> EdgeMode {
    let m = model.internal_dim();
    let sites = model.n_sites();
    let mut hv = vec![0.0; n];
    model.hamiltonian().matvec(v, &mut hv);
    let energy = v.iter().zip(&hv).map(|(a, b)| a * b).sum();

    let site_weights: Vec<f64> = (0..sites)
        .map(|s| (0..m).map(|k| v[s * m + k] * v[s * m + k]).sum())
        .collect();
    let centroid: f64 = site_weights.iter().enumerate().map(|(s, w)| s as f64 * w).sum();
    let edge = if centroid <= (sites as f64 - 1.0) / 2.0 {
        Edge::Left
    } else {
        Edge::Right
    };
    let dist = |s: usize| match edge {
        Edge::Left => s,
        Edge::Right => sites - 1 - s,
    };
    let edge_mass = (0..sites)
        .filter(|&s| dist(s) < edge_sites)
        .map(|s| site_weights[s])
        .sum();

    // Least squares of log amplitude on the half-chain nearest the centroid.
    let half = sites.div_ceil(2);
    let pts: Vec<(f64, f64)> = (0..sites)
        .filter(|&s| dist(s) < half)
        .map(|s| (dist(s) as f64, site_weights[s].sqrt()))
        .filter(|&(_, a)| a > 1e-12)
        .map(|(d, a)| (d, a.ln()))
        .collect();
    let localization_length = if pts.len() >= 2 {
        let np = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (d, l)| (a + d, b + l));
        let (mx, my) = (sx / np, sy / np);
        let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (d, l)| {
            (a + (d - mx) * (l - my), b + (d - mx) * (d - mx))
        });
        let slope = sxy / sxx;
        if slope < 0.0 {
            -1.0 / slope
        } else {
            f64::INFINITY
        }
    } else {
        // Everything beyond the first site is numerically zero.
        f64::MIN_POSITIVE
    };
    EdgeMode {
        energy,
        edge,
        localization_length,
        edge_mass,
        site_weights,
    }
}

pub fn eigenvalues_csv(spec: &SpectrumResult) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (j, l) in spec.eigenvalues.iter().enumerate() {
        out.push_str(&format!("{j},{l:?}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fibonacci_ssh, periodic_ssh, ssh_band_energy, BoundaryCondition::*};
    use std::f64::consts::PI;

    #[test]
    fn small_spectra() {
        let s = spectrum(&periodic_ssh(1, 2.15, 2.85, Dirichlet).unwrap()).unwrap();
        assert!((s.eigenvalues[0] + 2.15).abs() < 1e-14 && (s.eigenvalues[1] - 2.15).abs() < 1e-14);
        let s = spectrum(&periodic_ssh(2, 2.15, 2.85, Periodic).unwrap()).unwrap();
        for (a, b) in s.eigenvalues.iter().zip([-5.0, -0.7, 0.7, 5.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let v = spectrum_with_vectors(&periodic_ssh(3, 2.15, 2.85, Dirichlet).unwrap()).unwrap();
        assert_eq!(v.eigenvectors.unwrap().len(), 6);
    }

    #[test]
    fn chiral_pairing_stage_12() {
        let s = spectrum(&fibonacci_ssh(12, 2.15, 3.04, 2.73, Periodic).unwrap()).unwrap();
        let n = s.eigenvalues.len();
        for k in 0..n {
            assert!((s.eigenvalues[k] + s.eigenvalues[n - 1 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn bloch_cross_check() {
        let cells = 60;
        let s = spectrum(&periodic_ssh(cells, 2.15, 2.85, Periodic).unwrap()).unwrap();
        let mut bloch: Vec<f64> = (0..cells)
            .flat_map(|j| {
                let (lo, hi) = ssh_band_energy(2.0 * PI * j as f64 / cells as f64, 2.15, 2.85);
                [lo, hi]
            })
            .collect();
        bloch.sort_by(f64::total_cmp);
        for (a, b) in s.eigenvalues.iter().zip(&bloch) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn idos_properties() {
        let m = fibonacci_ssh(6, 2.15, 3.04, 2.73, Periodic).unwrap();
        let s = spectrum(&m).unwrap();
        assert_eq!(integrated_dos(&s, -100.0), 0.0);
        assert_eq!(integrated_dos(&s, 100.0), 1.0);
        assert_eq!(integrated_dos(&s, 0.0), 0.5);
        // right-continuous at an eigenvalue
        let l = s.eigenvalues[3];
        assert_eq!(integrated_dos(&s, l), 4.0 / s.eigenvalues.len() as f64);
        let grid: Vec<f64> = (0..200).map(|i| -6.0 + 12.0 * i as f64 / 199.0).collect();
        let curve = idos_curve(&m, &grid).unwrap();
        for (e, c) in grid.iter().zip(&curve) {
            assert_eq!(*c, integrated_dos(&s, *e));
        }
        assert!(curve.windows(2).all(|w| w[1] >= w[0]));
        // the count and QL eigenvalues agree only to rounding at an eigenvalue
        let around = idos_curve(&m, &[l - 1e-9, l + 1e-9]).unwrap();
        assert_eq!(around, [integrated_dos(&s, l - 1e-9), integrated_dos(&s, l)]);
    }

    #[test]
    fn gap_examples() {
        let s = spectrum(&periodic_ssh(1, 2.15, 2.85, Dirichlet).unwrap()).unwrap();
        let (lo, hi) = bulk_gap(&s, 0.0).unwrap();
        assert!((lo + 2.15).abs() < 1e-14 && (hi - 2.15).abs() < 1e-14);
        assert!(matches!(bulk_gap(&s, 2.15), Err(Error::OnEigenvalue { .. })));
        let s = spectrum(&periodic_ssh(200, 2.15, 2.85, Periodic).unwrap()).unwrap();
        let (lo, hi) = bulk_gap(&s, 0.0).unwrap();
        assert!((lo + 0.7).abs() <= 1e-2 && (hi - 0.7).abs() <= 1e-2);
        assert_eq!(bulk_gap(&s, 10.0).unwrap().1, f64::INFINITY);
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff(&[1.0, 2.0], &[2.0, 1.0]), 0.0);
        assert_eq!(hausdorff(&[0.0], &[0.0, 3.0]), 3.0);
        assert_eq!(hausdorff(&[0.0, 1.0], &[0.5]), 0.5);
    }

    #[test]
    fn edge_modes_short_chain() {
        let m = fibonacci_ssh(8, 2.15, 3.04, 2.73, Dirichlet).unwrap();
        let r = edge_modes(&m, 10).unwrap();
        assert!(!r.in_gap_eigenvalues.is_empty());
        for &l in &r.in_gap_eigenvalues {
            assert!(l > r.reference_gap.0 && l < r.reference_gap.1);
        }
        for mode in &r.modes {
            assert!(mode.localization_length > 0.0);
            assert!(mode.edge_mass > 0.99, "{}", mode.edge_mass);
        }
        // dense path agrees
        let (all, _) = linalg::dense_eigen(m.hamiltonian()).unwrap();
        let dense_in: Vec<f64> = all
            .into_iter()
            .filter(|&l| l > r.reference_gap.0 && l < r.reference_gap.1)
            .collect();
        assert_eq!(dense_in.len(), r.in_gap_eigenvalues.len());
        for (a, b) in dense_in.iter().zip(&r.in_gap_eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
        let periodic = fibonacci_ssh(8, 2.15, 3.04, 2.73, Periodic).unwrap();
        assert!(matches!(edge_modes(&periodic, 10), Err(Error::Precondition(_))));
    }

    #[test]
    fn stage_table() {
        let models: Vec<(u32, TightBindingModel)> = (4..=8)
            .map(|s| (s, fibonacci_ssh(s, 2.15, 3.04, 2.73, Periodic).unwrap()))
            .collect();
        let (rows, _) = stage_convergence(&models).unwrap();
        assert_eq!(rows[0].hausdorff_to_previous, None);
        assert!(rows[1..].iter().all(|r| r.hausdorff_to_previous.unwrap() >= 0.0));
        let same = vec![models[0].clone(), models[0].clone()];
        assert_eq!(stage_convergence(&same).unwrap().0[1].hausdorff_to_previous, Some(0.0));
        let rev = vec![models[1].clone(), models[0].clone()];
        assert!(stage_convergence(&rev).is_err());
    }
}
