//! Tight-binding models: SSH-type chain builders, position operators,
//! spatial truncation and the position/Hamiltonian commutator.
//!
//! Orbitals are ordered site-major: orbital `M n + m` is internal state `m`
//! of site `n`. Both orbitals of an SSH site share the site coordinate.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DENSE_CAP};
use crate::quasilattice::{fibonacci_word, vertex_chain, Letter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "dirichlet" => Ok(Self::Dirichlet),
            other => Err(Error::InvalidParameter(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Hopping amplitudes shared by the SSH-type builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hoppings {
    /// Onsite (intra-site, orbital 1 <-> 2) amplitude.
    pub t_o: f64,
    /// Inter-site amplitude across an `S` link.
    pub t_i_s: f64,
    /// Inter-site amplitude across an `L` link.
    pub t_i_l: f64,
    /// Uniform inter-site amplitude of the periodic reference chain.
    pub t_i: f64,
}

impl Default for Hoppings {
    fn default() -> Self {
        Self {
            t_o: 2.15,
            t_i_s: 3.04,
            t_i_l: 2.73,
            t_i: 2.85,
        }
    }
}

impl Hoppings {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_o", self.t_o),
            ("t_i_s", self.t_i_s),
            ("t_i_l", self.t_i_l),
            ("t_i", self.t_i),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    fn for_link(&self, link: Letter) -> f64 {
        match link {
            Letter::S => self.t_i_s,
            Letter::L => self.t_i_l,
        }
    }
}

/// Recipe a model was built from; enough to rebuild it (e.g. with a
/// different boundary condition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    SshPeriodic {
        n_cells: usize,
        t_o: f64,
        t_i: f64,
        bc: BoundaryCondition,
    },
    SshFibonacci {
        stage: u32,
        t_o: f64,
        t_i_s: f64,
        t_i_l: f64,
        bc: BoundaryCondition,
    },
    SshInterp {
        stage: u32,
        s: f64,
        hoppings: Hoppings,
        bc: BoundaryCondition,
    },
    Custom {
        name: String,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &str {
        match self {
            ModelSpec::SshPeriodic { .. } => "ssh-periodic",
            ModelSpec::SshFibonacci { .. } => "ssh-fibonacci",
            ModelSpec::SshInterp { .. } => "ssh-interp",
            ModelSpec::Custom { name } => name,
        }
    }

    pub fn build(&self) -> Result<TightBindingModel> {
        match *self {
            ModelSpec::SshPeriodic { n_cells, t_o, t_i, bc } => periodic_ssh(n_cells, t_o, t_i, bc),
            ModelSpec::SshFibonacci {
                stage,
                t_o,
                t_i_s,
                t_i_l,
                bc,
            } => fibonacci_ssh(stage, t_o, t_i_s, t_i_l, bc),
            ModelSpec::SshInterp { stage, s, hoppings, bc } => interpolated_ssh(stage, s, hoppings, bc),
            ModelSpec::Custom { ref name } => Err(Error::Precondition(format!(
                "custom model `{name}` cannot be rebuilt from its spec"
            ))),
        }
    }

    pub fn with_bc(&self, new_bc: BoundaryCondition) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::SshPeriodic { bc, .. }
            | ModelSpec::SshFibonacci { bc, .. }
            | ModelSpec::SshInterp { bc, .. } => *bc = new_bc,
            ModelSpec::Custom { .. } => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub spec: ModelSpec,
    /// Successive truncations applied after building, outermost first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncations: Vec<Truncation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightBindingModel {
    dim: usize,
    coords: Vec<f64>,
    internal_dim: usize,
    hamiltonian: CsrMatrix,
    bc: BoundaryCondition,
    metadata: ModelMetadata,
}

impl TightBindingModel {
    /// Assembles a model, checking shapes and exact Hermiticity.
    pub fn new(
        dim: usize,
        coords: Vec<f64>,
        internal_dim: usize,
        hamiltonian: CsrMatrix,
        bc: BoundaryCondition,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        if dim == 0 || internal_dim == 0 {
            return Err(Error::InvalidParameter(
                "spatial and internal dimensions must be positive".into(),
            ));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not split into {dim}-vectors",
                coords.len()
            )));
        }
        let n_sites = coords.len() / dim;
        if hamiltonian.dim() != n_sites * internal_dim {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian is {0}x{0} but {n_sites} sites x {internal_dim} orbitals were given",
                hamiltonian.dim()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite site coordinate".into()));
        }
        hamiltonian.ensure_hermitian()?;
        Ok(Self {
            dim,
            coords,
            internal_dim,
            hamiltonian,
            bc,
            metadata,
        })
    }

    pub fn spatial_dim(&self) -> usize {
        self.dim
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    pub fn n_sites(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn n_orbitals(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &CsrMatrix {
        &self.hamiltonian
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn site_coord(&self, site: usize) -> &[f64] {
        &self.coords[site * self.dim..(site + 1) * self.dim]
    }

    pub fn site_of(&self, orbital: usize) -> usize {
        orbital / self.internal_dim
    }

    /// Coordinates along `axis` of every site.
    pub fn site_positions(&self, axis: usize) -> Vec<f64> {
        (0..self.n_sites()).map(|n| self.site_coord(n)[axis]).collect()
    }

    /// Diagonal of the position operator `X_axis` in the orbital basis.
    pub fn position_diag(&self, axis: usize) -> Vec<f64> {
        (0..self.n_orbitals())
            .map(|i| self.site_coord(self.site_of(i))[axis])
            .collect()
    }

    /// Row-sum bound on the spectral norm of the Hamiltonian.
    pub fn norm_bound(&self) -> f64 {
        self.hamiltonian.row_sum_norm()
    }

    /// `max |(S H + H S)_{ij}|` with `S = I (x) diag(1, -1, 1, ...)`.
    pub fn chiral_anticommutator_max(&self) -> f64 {
        let sign = |i: usize| if (i % self.internal_dim) % 2 == 0 { 1.0 } else { -1.0 };
        self.hamiltonian
            .triplets()
            .map(|(i, j, v)| ((sign(i) + sign(j)) * v).abs())
            .fold(0.0, f64::max)
    }

    /// Whether every hopping joins sites at most one index apart, except the
    /// single periodic wrap between the first and last sites.
    pub fn is_nearest_neighbour(&self) -> bool {
        let last = self.n_sites().saturating_sub(1);
        self.hamiltonian.triplets().all(|(i, j, _)| {
            let (a, b) = (self.site_of(i), self.site_of(j));
            a.abs_diff(b) <= 1 || (self.bc == BoundaryCondition::Periodic && a.min(b) == 0 && a.max(b) == last)
        })
    }

    /// Keeps the sites within `radius` of `center` (Euclidean distance) and
    /// every Hamiltonian entry among them.
    pub fn truncate(&self, center: &[f64], radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        if center.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "center has {} coordinates, model is {}-dimensional",
                center.len(),
                self.dim
            )));
        }
        let kept: Vec<usize> = (0..self.n_sites())
            .filter(|&n| {
                let d2: f64 = self
                    .site_coord(n)
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d2.sqrt() <= radius
            })
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyTruncation {
                center: center.to_vec(),
                radius,
            });
        }
        let m = self.internal_dim;
        let orbitals: Vec<usize> = kept.iter().flat_map(|&n| (0..m).map(move |k| n * m + k)).collect();
        let coords = kept.iter().flat_map(|&n| self.site_coord(n).iter().copied()).collect();
        let mut metadata = self.metadata.clone();
        metadata.truncations.push(Truncation {
            center: center.to_vec(),
            radius,
        });
        Ok(Self {
            dim: self.dim,
            coords,
            internal_dim: m,
            hamiltonian: self.hamiltonian.principal_submatrix(&orbitals),
            bc: BoundaryCondition::Dirichlet,
            metadata,
        })
    }

    /// Operator 2-norm of `[X_axis, H]`, whose entries are
    /// `(x_i - x_j) H_ij`.
    ///
    /// The commutator is split into connected blocks of its sparsity graph
    /// and each block's norm is computed exactly; blocks above the dense cap
    /// fall back to the row-sum upper bound.
    pub fn commutator_norm(&self, axis: usize) -> f64 {
        let x = self.position_diag(axis);
        let n = self.n_orbitals();
        let entries: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                self.hamiltonian
                    .row(i)
                    .map(|(j, v)| (j, (x[i] - x[j]) * v))
                    .filter(|&(_, c)| c != 0.0)
                    .collect()
            })
            .collect();

        let mut seen = vec![false; n];
        let mut best = 0.0f64;
        for start in 0..n {
            if seen[start] || entries[start].is_empty() {
                continue;
            }
            let mut block = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(i) = queue.pop_front() {
                block.push(i);
                for &(j, _) in &entries[i] {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            best = best.max(block_norm(&block, &entries));
        }
        best
    }

    /// JSON manifest: name, parameters, dimensions, boundary condition.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.metadata.spec.name(),
            "spec": self.metadata.spec,
            "truncations": self.metadata.truncations,
            "notes": self.metadata.notes,
            "n_sites": self.n_sites(),
            "internal_dim": self.internal_dim,
            "n_orbitals": self.n_orbitals(),
            "spatial_dim": self.dim,
            "bc": self.bc,
        })
    }

    /// CSV site table `index,x[,y,...]`.
    pub fn sites_csv(&self) -> String {
        let axes = ["x", "y", "z"];
        let mut header = String::from("index");
        for a in 0..self.dim {
            header.push(',');
            header.push_str(axes.get(a).copied().unwrap_or("w"));
        }
        let mut out = header + "\n";
        for n in 0..self.n_sites() {
            out.push_str(&n.to_string());
            for x in self.site_coord(n) {
                out.push_str(&format!(",{x:?}"));
            }
            out.push('\n');
        }
        out
    }

    /// CSV triplet list `row,col,value` of every stored Hamiltonian entry.
    pub fn triplets_csv(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for (i, j, v) in self.hamiltonian.triplets() {
            out.push_str(&format!("{i},{j},{v:?}\n"));
        }
        out
    }
}

fn block_norm(block: &[usize], entries: &[Vec<(usize, f64)>]) -> f64 {
    match block.len() {
        1 => entries[block[0]].iter().fold(0.0f64, |m, &(_, c)| m.max(c.abs())),
        2 => entries[block[0]]
            .iter()
            .filter(|&&(j, _)| j == block[1])
            .fold(0.0f64, |m, &(_, c)| m.max(c.abs())),
        s if s <= DENSE_CAP => {
            let mut local = vec![usize::MAX; entries.len()];
            for (k, &i) in block.iter().enumerate() {
                local[i] = k;
            }
            let mut m = DMatrix::<f64>::zeros(s, s);
            for (k, &i) in block.iter().enumerate() {
                for &(j, c) in &entries[i] {
                    m[(k, local[j])] = c;
                }
            }
            m.singular_values().max()
        }
        _ => row_sum_bound(block, entries),
    }
}

/// `||C||_2 <= sqrt(||C||_1 ||C||_inf)`; for antisymmetric `C` both are the
/// largest absolute row sum.
fn row_sum_bound(block: &[usize], entries: &[Vec<(usize, f64)>]) -> f64 {
    block
        .iter()
        .map(|&i| entries[i].iter().map(|(_, c)| c.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn ssh_chain(
    positions: &[f64],
    t_o: f64,
    inter: &[f64],
    wrap: f64,
    bc: BoundaryCondition,
    metadata: ModelMetadata,
) -> Result<TightBindingModel> {
    let n = positions.len();
    debug_assert_eq!(inter.len() + 1, n);
    let mut triplets = Vec::with_capacity(4 * n);
    let mut push = |a: usize, b: usize, v: f64| {
        triplets.push((a, b, v));
        triplets.push((b, a, v));
    };
    for site in 0..n {
        push(2 * site, 2 * site + 1, t_o);
    }
    for (site, &t) in inter.iter().enumerate() {
        push(2 * site + 1, 2 * site + 2, t);
    }
    if bc == BoundaryCondition::Periodic {
        push(2 * n - 1, 0, wrap);
    }
    let h = CsrMatrix::from_triplets(2 * n, &triplets)?;
    TightBindingModel::new(1, positions.to_vec(), 2, h, bc, metadata)
}

/// Which part of an effectively infinite chain a finite model represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// The model as built.
    Full,
    /// Sites with `|x| <= rho`.
    Bulk,
    /// Sites with `0 <= x <= rho`; the chain ends at the origin.
    Edge,
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Region::Full),
            "bulk" => Ok(Region::Bulk),
            "edge" => Ok(Region::Edge),
            other => Err(Error::InvalidParameter(format!("unknown region `{other}`"))),
        }
    }
}

const MAX_SEGMENT_STAGE: u32 = 41;

/// Finite Dirichlet segment of a substitution chain. The smallest odd stage
/// whose chain covers `[-rho, rho]` is built and truncated to the region.
/// Odd stages nest around the origin, so segments of different lengths cut
/// the same infinite chain.
pub fn segment(template: &ModelSpec, region: Region, rho: f64) -> Result<TightBindingModel> {
    if region == Region::Full {
        return template.build();
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    let template = template.with_bc(BoundaryCondition::Dirichlet);
    let mut stage = 1;
    let covering = loop {
        let spec = match &template {
            ModelSpec::SshFibonacci {
                t_o, t_i_s, t_i_l, bc, ..
            } => ModelSpec::SshFibonacci {
                stage,
                t_o: *t_o,
                t_i_s: *t_i_s,
                t_i_l: *t_i_l,
                bc: *bc,
            },
            ModelSpec::SshInterp { s, hoppings, bc, .. } => ModelSpec::SshInterp {
                stage,
                s: *s,
                hoppings: *hoppings,
                bc: *bc,
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "bulk and edge segments need a substitution chain, got `{}`",
                    other.name()
                )))
            }
        };
        let model = spec.build()?;
        let xs = model.site_positions(0);
        if xs[0] <= -rho && xs[xs.len() - 1] >= rho {
            break model;
        }
        if stage >= MAX_SEGMENT_STAGE {
            return Err(Error::InvalidParameter(format!(
                "rho = {rho} needs a chain beyond stage {stage}"
            )));
        }
        stage += 2;
    };
    match region {
        Region::Bulk => covering.truncate(&[0.0], rho),
        _ => covering.truncate(&[rho / 2.0], rho / 2.0),
    }
}

/// Fibonacci SSH chain: sites on the stage-`stage` vertex chain, onsite
/// hopping `t_o`, inter-site hopping chosen by the link letter. A periodic
/// chain wraps with the final link's amplitude.
pub fn fibonacci_ssh(stage: u32, t_o: f64, t_i_s: f64, t_i_l: f64, bc: BoundaryCondition) -> Result<TightBindingModel> {
    let hop = Hoppings {
        t_o,
        t_i_s,
        t_i_l,
        ..Hoppings::default()
    };
    hop.validate()?;
    let chain = vertex_chain(&fibonacci_word(stage)?);
    let inter: Vec<f64> = chain.links.iter().map(|&l| hop.for_link(l)).collect();
    let wrap = *inter.last().expect("stage >= 1 has links");
    let metadata = ModelMetadata {
        spec: ModelSpec::SshFibonacci {
            stage,
            t_o,
            t_i_s,
            t_i_l,
            bc,
        },
        truncations: Vec::new(),
        notes: Vec::new(),
    };
    ssh_chain(&chain.positions, t_o, &inter, wrap, bc, metadata)
}

/// Uniform SSH chain with unit cell spacing, sites at `0, 1, ..., n_cells-1`.
pub fn periodic_ssh(n_cells: usize, t_o: f64, t_i: f64, bc: BoundaryCondition) -> Result<TightBindingModel> {
    if n_cells == 0 {
        return Err(Error::InvalidParameter("n_cells must be >= 1".into()));
    }
    Hoppings {
        t_o,
        t_i,
        ..Hoppings::default()
    }
    .validate()?;
    let positions: Vec<f64> = (0..n_cells).map(|n| n as f64).collect();
    let inter = vec![t_i; n_cells - 1];
    let metadata = ModelMetadata {
        spec: ModelSpec::SshPeriodic { n_cells, t_o, t_i, bc },
        truncations: Vec::new(),
        notes: Vec::new(),
    };
    ssh_chain(&positions, t_o, &inter, t_i, bc, metadata)
}

/// Linear interpolation between the uniform SSH chain (`s = 0`) and the
/// Fibonacci SSH chain (`s = 1`) on the same sites. Both geometry (anchored
/// at the dot vertex) and inter-site hoppings are interpolated.
pub fn interpolated_ssh(stage: u32, s: f64, hoppings: Hoppings, bc: BoundaryCondition) -> Result<TightBindingModel> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s = {s} outside [0, 1]")));
    }
    hoppings.validate()?;
    let chain = vertex_chain(&fibonacci_word(stage)?);
    let origin = chain.origin as f64;
    let positions: Vec<f64> = chain
        .positions
        .iter()
        .enumerate()
        .map(|(i, &x)| (1.0 - s) * (i as f64 - origin) + s * x)
        .collect();
    let inter: Vec<f64> = chain
        .links
        .iter()
        .map(|&l| (1.0 - s) * hoppings.t_i + s * hoppings.for_link(l))
        .collect();
    let wrap = *inter.last().expect("stage >= 1 has links");
    let metadata = ModelMetadata {
        spec: ModelSpec::SshInterp { stage, s, hoppings, bc },
        truncations: Vec::new(),
        notes: vec!["interpolation is linear in site positions and inter-site hoppings".into()],
    };
    ssh_chain(&positions, hoppings.t_o, &inter, wrap, bc, metadata)
}

/// Bloch bands `(-E(k), +E(k))` of the uniform SSH chain,
/// `E(k) = sqrt(t_o^2 + t_i^2 + 2 t_o t_i cos k)`.
pub fn ssh_band_energy(k: f64, t_o: f64, t_i: f64) -> (f64, f64) {
    let e = (t_o * t_o + t_i * t_i + 2.0 * t_o * t_i * k.cos()).max(0.0).sqrt();
    (-e, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;
    use BoundaryCondition::*;

    fn default_fib(stage: u32, bc: BoundaryCondition) -> TightBindingModel {
        let h = Hoppings::default();
        fibonacci_ssh(stage, h.t_o, h.t_i_s, h.t_i_l, bc).unwrap()
    }

    #[test]
    fn stage_one_couplings() {
        let m = default_fib(1, Dirichlet);
        assert_eq!(m.n_orbitals(), 8);
        let upper: Vec<f64> = (0..7).map(|i| m.hamiltonian().get(i, i + 1)).collect();
        assert_eq!(upper, vec![2.15, 2.73, 2.15, 2.73, 2.15, 3.04, 2.15]);
        let upper_nnz = m.hamiltonian().triplets().filter(|&(i, j, _)| j > i).count();
        assert_eq!(upper_nnz, 7);
    }

    #[test]
    fn chiral_and_hermitian_for_all_builders() {
        let h = Hoppings::default();
        let models = [
            default_fib(7, Periodic),
            default_fib(8, Dirichlet),
            periodic_ssh(13, 2.15, 2.85, Periodic).unwrap(),
            interpolated_ssh(6, 0.3, h, Periodic).unwrap(),
        ];
        for m in &models {
            assert_eq!(m.chiral_anticommutator_max(), 0.0);
            assert!(m.hamiltonian().asymmetry().is_none());
            assert!(m.is_nearest_neighbour());
            let ev = eigenvalues(m.hamiltonian()).unwrap();
            let n = ev.len();
            for k in 0..n {
                assert!((ev[k] + ev[n - 1 - k]).abs() < 1e-10);
            }
            let bound = h.t_o + h.t_i_s.max(h.t_i_l);
            assert!(m.norm_bound() <= bound + 1e-12);
            assert!(ev[n - 1] <= m.norm_bound() + 1e-12);
        }
    }

    #[test]
    fn dimer_and_small_rings() {
        let m = periodic_ssh(1, 2.15, 2.85, Dirichlet).unwrap();
        assert_eq!(
            m.hamiltonian().to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.0, 2.15, 2.15, 0.0])
        );
        let ev = eigenvalues(periodic_ssh(2, 2.15, 2.85, Periodic).unwrap().hamiltonian()).unwrap();
        for (a, b) in ev.iter().zip([-5.0, -0.7, 0.7, 5.0]) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn bulk_spectrum_of_uniform_ring() {
        let ev = eigenvalues(periodic_ssh(200, 2.15, 2.85, Periodic).unwrap().hamiltonian()).unwrap();
        for l in &ev {
            let a = l.abs();
            assert!((0.7 - 1e-8..=5.0 + 1e-8).contains(&a), "{l}");
        }
    }

    #[test]
    fn band_energy_examples() {
        let (lo, hi) = ssh_band_energy(0.0, 2.15, 2.85);
        assert!((hi - 5.0).abs() < 1e-14 && (lo + 5.0).abs() < 1e-14);
        assert!((ssh_band_energy(std::f64::consts::PI, 2.15, 2.85).1 - 0.7).abs() < 1e-14);
        let mid = ssh_band_energy(std::f64::consts::FRAC_PI_2, 2.15, 2.85).1;
        assert!((mid - (2.15f64.powi(2) + 2.85f64.powi(2)).sqrt()).abs() < 1e-14);
        assert!((mid - 3.569_99).abs() < 1e-4);
    }

    #[test]
    fn interpolation_endpoints() {
        let h = Hoppings::default();
        for bc in [Periodic, Dirichlet] {
            let s0 = interpolated_ssh(6, 0.0, h, bc).unwrap();
            let per = periodic_ssh(s0.n_sites(), h.t_o, h.t_i, bc).unwrap();
            assert_eq!(s0.hamiltonian(), per.hamiltonian());
            let shift = per.site_coord(0)[0] - s0.site_coord(0)[0];
            for n in 0..s0.n_sites() {
                assert_eq!(s0.site_coord(n)[0] + shift, per.site_coord(n)[0]);
            }
            let s1 = interpolated_ssh(6, 1.0, h, bc).unwrap();
            let fib = default_fib(6, bc);
            assert_eq!(s1.hamiltonian(), fib.hamiltonian());
            assert_eq!(s1.site_positions(0), fib.site_positions(0));
        }
        let half = interpolated_ssh(4, 0.5, h, Dirichlet).unwrap();
        let chain = vertex_chain(&fibonacci_word(4).unwrap());
        let s_link = chain.links.iter().position(|&l| l == Letter::S).unwrap();
        let v = half.hamiltonian().get(2 * s_link + 1, 2 * s_link + 2);
        assert!((v - 2.945).abs() < 1e-12);
        assert!(interpolated_ssh(4, 1.5, h, Dirichlet).is_err());
    }

    #[test]
    fn non_finite_parameters_rejected() {
        assert!(fibonacci_ssh(3, f64::NAN, 3.04, 2.73, Dirichlet).is_err());
        assert!(fibonacci_ssh(0, 2.15, 3.04, 2.73, Dirichlet).is_err());
        assert!(periodic_ssh(0, 2.15, 2.85, Dirichlet).is_err());
    }

    #[test]
    fn truncation_examples() {
        let m = default_fib(5, Dirichlet);
        let t = m.truncate(&[0.0], 1e6).unwrap();
        assert_eq!(t.hamiltonian(), m.hamiltonian());
        assert_eq!(t.site_positions(0), m.site_positions(0));

        let chain = periodic_ssh(5, 2.15, 2.85, Dirichlet).unwrap();
        let one = chain.truncate(&[2.0], 0.5).unwrap();
        assert_eq!(
            one.hamiltonian().to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.0, 2.15, 2.15, 0.0])
        );
        assert!(matches!(
            chain.truncate(&[100.0], 0.5),
            Err(Error::EmptyTruncation { .. })
        ));
        assert!(chain.truncate(&[0.0], 0.0).is_err());
    }

    #[test]
    fn nested_truncations_agree() {
        let m = default_fib(20, Dirichlet);
        let small = m.truncate(&[0.0], 10.0).unwrap();
        let big = m.truncate(&[0.0], 80.0).unwrap();
        let again = big.truncate(&[0.0], 10.0).unwrap();
        assert_eq!(small.hamiltonian(), again.hamiltonian());
        assert_eq!(small.site_positions(0), again.site_positions(0));
    }

    #[test]
    fn commutator_norms() {
        let diag = TightBindingModel::new(
            1,
            vec![0.0, 1.0],
            1,
            CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap(),
            Dirichlet,
            ModelMetadata {
                spec: ModelSpec::Custom { name: "diag".into() },
                truncations: vec![],
                notes: vec![],
            },
        )
        .unwrap();
        assert_eq!(diag.commutator_norm(0), 0.0);

        for cells in [2, 17, 100] {
            let m = periodic_ssh(cells, 2.15, 2.85, Dirichlet).unwrap();
            assert!((m.commutator_norm(0) - 2.85).abs() < 1e-10);
        }
        let fib = default_fib(12, Dirichlet);
        let c = fib.commutator_norm(0);
        assert!(c <= 3.04 * Letter::L.length() + 1e-12);
        assert!(c > 0.0);
    }

    #[test]
    fn commutator_dense_block_matches_direct_svd() {
        // Long-range hopping forces a multi-site block.
        let h = CsrMatrix::from_triplets(
            3,
            &[
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 2, 2.0),
                (2, 1, 2.0),
                (0, 2, 0.5),
                (2, 0, 0.5),
            ],
        )
        .unwrap();
        let x = vec![0.0, 1.0, 3.0];
        let m = TightBindingModel::new(
            1,
            x.clone(),
            1,
            h.clone(),
            Dirichlet,
            ModelMetadata {
                spec: ModelSpec::Custom { name: "tri".into() },
                truncations: vec![],
                notes: vec![],
            },
        )
        .unwrap();
        let dense = DMatrix::from_fn(3, 3, |i, j| (x[i] - x[j]) * h.get(i, j));
        assert!((m.commutator_norm(0) - dense.singular_values().max()).abs() < 1e-12);
    }

    #[test]
    fn exports() {
        let m = periodic_ssh(1, 2.15, 2.85, Dirichlet).unwrap();
        assert_eq!(m.triplets_csv(), "row,col,value\n0,1,2.15\n1,0,2.15\n");
        assert_eq!(m.sites_csv(), "index,x\n0,0.0\n");
        let j = m.manifest();
        assert_eq!(j["name"], "ssh-periodic");
        assert_eq!(j["n_orbitals"], 2);
        assert_eq!(j["bc"], "dirichlet");
    }

    #[test]
    fn segments() {
        let t = ModelSpec::SshFibonacci {
            stage: 1,
            t_o: 2.15,
            t_i_s: 3.04,
            t_i_l: 2.73,
            bc: BoundaryCondition::Periodic,
        };
        let bulk = segment(&t, Region::Bulk, 10.0).unwrap();
        let xs = bulk.site_positions(0);
        assert!(xs.iter().all(|x| x.abs() <= 10.0) && xs.contains(&0.0));
        assert!(xs[0] < -9.0 && xs[xs.len() - 1] > 9.0);
        assert_eq!(bulk.bc(), BoundaryCondition::Dirichlet);
        let edge = segment(&t, Region::Edge, 16.0).unwrap();
        let xs = edge.site_positions(0);
        assert_eq!(xs[0], 0.0);
        assert!(xs.iter().all(|&x| (0.0..=16.0).contains(&x)) && xs[xs.len() - 1] > 14.0);
        let p = ModelSpec::SshPeriodic {
            n_cells: 4,
            t_o: 1.0,
            t_i: 2.0,
            bc: BoundaryCondition::Periodic,
        };
        assert!(segment(&p, Region::Bulk, 3.0).is_err());
        assert_eq!(segment(&p, Region::Full, 3.0).unwrap().n_sites(), 4);
        assert!(segment(&t, Region::Edge, -1.0).is_err());
        // a longer segment contains the shorter one verbatim
        let long = segment(&t, Region::Bulk, 40.0).unwrap();
        let inner = long.truncate(&[0.0], 10.0).unwrap();
        assert_eq!(inner.site_positions(0), bulk.site_positions(0));
        assert_eq!(inner.hamiltonian(), bulk.hamiltonian());
    }
}
