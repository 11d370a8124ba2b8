//! Eigensolvers for real symmetric chain matrices: tridiagonal, optionally
//! closed into a ring by a single corner entry coupling the last index to the
//! first.
//!
//! Every nearest-neighbour 1d tight-binding Hamiltonian in this crate has this
//! shape in orbital order, so the solvers here replace dense
//! eigendecompositions:
//!
//! - eigenvalues by implicit QL, after folding a ring into a pentadiagonal
//!   band and reducing it back to tridiagonal with Givens bulge chasing;
//! - eigenvector components restricted to a chosen set of rows, by carrying
//!   only those rows through every rotation;
//! - inertia counts (number of eigenvalues below a shift) in linear time;
//! - individual eigenvectors of open chains by inverse iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Symmetric matrix with `diag`, first off-diagonal `off`, and an optional
/// `corner = A[n-1][0] = A[0][n-1]` (only meaningful for `n >= 3`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMatrix {
    diag: Vec<f64>,
    off: Vec<f64>,
    corner: f64,
}

/// Eigenvalues in ascending order together with the components of every
/// eigenvector at a fixed set of rows: `components[r][j] = <e_rows[r] | v_j>`.
#[derive(Debug, Clone)]
pub struct EigenRows {
    pub values: Vec<f64>,
    pub rows: Vec<usize>,
    pub components: Vec<Vec<f64>>,
}

impl ChainMatrix {
    pub fn new(diag: Vec<f64>, off: Vec<f64>, corner: f64) -> Self {
        assert_eq!(off.len(), diag.len().saturating_sub(1));
        let corner = if diag.len() >= 3 { corner } else { 0.0 };
        Self { diag, off, corner }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn corner(&self) -> f64 {
        self.corner
    }

    pub fn is_periodic(&self) -> bool {
        self.corner != 0.0
    }

    /// Row-sum bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        let mut best = 0.0f64;
        for i in 0..n {
            let mut s = self.diag[i].abs();
            if i > 0 {
                s += self.off[i - 1].abs();
            }
            if i + 1 < n {
                s += self.off[i].abs();
            }
            if i == 0 || i == n - 1 {
                s += self.corner.abs();
            }
            best = best.max(s);
        }
        best
    }

    /// Linear-time inertia counter.
    pub fn sturm(&self) -> Sturm {
        if self.is_periodic() {
            Sturm::ring(self)
        } else {
            Sturm::new(self.diag.clone(), self.off.clone())
        }
    }

    /// Number of eigenvalues strictly below `shift`.
    pub fn count_below(&self, shift: f64) -> usize {
        self.sturm().count_below(shift)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        self.sturm().kth_eigenvalue(k)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        if n == 0 {
            return Ok(Vec::new());
        }
        let (mut d, e) = if self.is_periodic() {
            let (d, e, _) = self.fold_and_reduce(&[]);
            (d, e)
        } else {
            let mut e = self.off.clone();
            e.push(0.0);
            (self.diag.clone(), e)
        };
        let mut e2: Vec<f64> = e.iter().map(|x| x * x).collect();
        tql_rational(&mut d, &mut e2)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Eigenvalues plus eigenvector components at `rows`.
    pub fn eigen_rows(&self, rows: &[usize]) -> Result<EigenRows> {
        let n = self.dim();
        for &r in rows {
            if r >= n {
                return Err(Error::IndexOutOfRange { index: r, len: n });
            }
        }
        if n == 0 {
            return Ok(EigenRows {
                values: Vec::new(),
                rows: rows.to_vec(),
                components: vec![Vec::new(); rows.len()],
            });
        }

        let (mut d, mut e, mut z) = if self.is_periodic() {
            self.fold_and_reduce(rows)
        } else {
            let mut e = self.off.clone();
            e.push(0.0);
            let z = rows
                .iter()
                .map(|&r| {
                    let mut u = vec![0.0; n];
                    u[r] = 1.0;
                    u
                })
                .collect();
            (self.diag.clone(), e, z)
        };
        tql(&mut d, &mut e, &mut z)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&j| d[j]).collect();
        let components = z.iter().map(|u| order.iter().map(|&j| u[j]).collect()).collect();
        Ok(EigenRows {
            values,
            rows: rows.to_vec(),
            components,
        })
    }

    /// Folds the ring into bandwidth two (`0, n-1, 1, n-2, ...`), reduces the
    /// band to tridiagonal form and returns the tridiagonal data together with
    /// the requested rows of the accumulated orthogonal transform.
    fn fold_and_reduce(&self, rows: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
        let n = self.dim();
        let orig_of = |p: usize| if p % 2 == 0 { p / 2 } else { n - 1 - (p - 1) / 2 };
        let mut pos_of = vec![0usize; n];
        for p in 0..n {
            pos_of[orig_of(p)] = p;
        }

        let mut band = Band::new(n, 3);
        for (&p, &d) in pos_of.iter().zip(&self.diag) {
            band.set(p, p, d);
        }
        for i in 0..n - 1 {
            band.add(pos_of[i + 1], pos_of[i], self.off[i]);
        }
        band.add(pos_of[n - 1], pos_of[0], self.corner);

        let mut q: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| {
                let mut u = vec![0.0; n];
                u[pos_of[r]] = 1.0;
                u
            })
            .collect();
        band.reduce_to_tridiagonal(2, &mut q);

        let d = (0..n).map(|i| band.get(i, i)).collect();
        let mut e: Vec<f64> = (0..n - 1).map(|i| band.get(i + 1, i)).collect();
        e.push(0.0);
        (d, e, q)
    }

    /// Eigenvectors for the given (sorted) eigenvalues of an open chain, by
    /// inverse iteration with re-orthogonalisation inside clusters.
    pub fn eigenvectors(&self, eigenvalues: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.is_periodic() {
            return Err(Error::Precondition(
                "inverse iteration needs an open (non-periodic) chain".into(),
            ));
        }
        let n = self.dim();
        let norm = self.norm_bound().max(f64::MIN_POSITIVE);
        let cluster_tol = 1e-3 * norm;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
        let mut cluster_start = 0;

        for (j, &lambda) in eigenvalues.iter().enumerate() {
            if j > 0 && (lambda - eigenvalues[j - 1]).abs() > cluster_tol {
                cluster_start = j;
            }
            // Separate exactly coincident shifts inside a cluster.
            let shift = lambda + (j - cluster_start) as f64 * 10.0 * f64::EPSILON * norm;
            let lu = TridiagLu::factor(&self.diag, &self.off, shift, norm);

            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..5 {
                lu.solve(&mut v);
                for prev in &out[cluster_start..j] {
                    for _ in 0..2 {
                        let dot: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                        v.iter_mut().zip(prev).for_each(|(x, p)| *x -= dot * p);
                    }
                }
                let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nrm == 0.0 || !nrm.is_finite() {
                    return Err(Error::NoConvergence);
                }
                v.iter_mut().for_each(|x| *x /= nrm);
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// Inertia counts in linear time. Tridiagonal matrices use the Sturm
/// sequence; rings are folded into a block tridiagonal matrix with `2 x 2`
/// blocks `{i, n-1-i}` and counted through a block `LDL^T` factorisation.
/// Both guard near-zero pivots by replacing them with `-pivmin`.
#[derive(Debug, Clone)]
pub struct Sturm {
    kind: SturmKind,
    pivmin: f64,
    bound: f64,
}

#[derive(Debug, Clone)]
enum SturmKind {
    Tridiagonal { d: Vec<f64>, e2: Vec<f64> },
    Ring(ChainMatrix),
}

impl Sturm {
    fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        let e2: Vec<f64> = e.iter().map(|x| x * x).collect();
        let pivmin = f64::MIN_POSITIVE * e2.iter().fold(1.0f64, |m, &x| m.max(x));
        let mut off = e;
        off.truncate(d.len().saturating_sub(1));
        let bound = ChainMatrix::new(d.clone(), off, 0.0).norm_bound();
        Self {
            kind: SturmKind::Tridiagonal { d, e2 },
            pivmin,
            bound,
        }
    }

    fn ring(c: &ChainMatrix) -> Self {
        // A pivot at the underflow scale would swamp the finite part of the
        // next 2 x 2 Schur complement, so rings use a relative guard.
        let bound = c.norm_bound();
        Self {
            kind: SturmKind::Ring(c.clone()),
            pivmin: f64::EPSILON * bound.max(f64::MIN_POSITIVE),
            bound,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SturmKind::Tridiagonal { d, .. } => d.len(),
            SturmKind::Ring(c) => c.dim(),
        }
    }

    /// Number of eigenvalues strictly below `shift`.
    pub fn count_below(&self, shift: f64) -> usize {
        match &self.kind {
            SturmKind::Tridiagonal { d, e2 } => {
                let mut count = 0;
                let mut q = 1.0;
                for i in 0..d.len() {
                    let prev = if i == 0 { 0.0 } else { e2[i - 1] / q };
                    q = d[i] - shift - prev;
                    if q.abs() < self.pivmin {
                        q = -self.pivmin;
                    }
                    if q < 0.0 {
                        count += 1;
                    }
                }
                count
            }
            SturmKind::Ring(c) => self.ring_count(c, shift),
        }
    }

    fn ring_count(&self, c: &ChainMatrix, shift: f64) -> usize {
        let n = c.dim();
        let (d, off) = (&c.diag, &c.off);
        let half = n / 2;
        let mut count = 0;
        // Inverse of the previous pivot block, as (m00, m01, m11).
        let mut inv = (0.0, 0.0, 0.0);
        for k in 0..half {
            let j = n - 1 - k;
            let x = if k == 0 {
                c.corner
            } else if j == k + 1 {
                off[k]
            } else {
                0.0
            };
            let (mut a, mut b, mut cc) = (d[k] - shift, x, d[j] - shift);
            if k > 0 {
                // C = diag(off[k-1], off[j]) couples {k-1, j+1} to {k, j}.
                let (p, q) = (off[k - 1], off[j]);
                a -= p * p * inv.0;
                b -= p * q * inv.1;
                cc -= q * q * inv.2;
            }
            let (l1, l2, v1, v2) = sym2_eigen(a, b, cc);
            let l1 = self.guard(l1);
            let l2 = self.guard(l2);
            count += (l1 < 0.0) as usize + (l2 < 0.0) as usize;
            inv = (
                v1.0 * v1.0 / l1 + v2.0 * v2.0 / l2,
                v1.0 * v1.1 / l1 + v2.0 * v2.1 / l2,
                v1.1 * v1.1 / l1 + v2.1 * v2.1 / l2,
            );
        }
        if n % 2 == 1 {
            // Middle site couples to both members of the last pair.
            let m = half;
            let (p, q) = (off[m - 1], off[m]);
            let s = d[m] - shift - (p * p * inv.0 + 2.0 * p * q * inv.1 + q * q * inv.2);
            if self.guard(s) < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn guard(&self, q: f64) -> f64 {
        if q.abs() < self.pivmin {
            -self.pivmin
        } else {
            q
        }
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim());
        let r = self.bound + 1.0;
        let (mut lo, mut hi) = (-r, r);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Eigenvalues and eigenvectors `(l1, l2, v1, v2)` of `[[a, b], [b, c]]`
/// by one Jacobi rotation.
fn sym2_eigen(a: f64, b: f64, c: f64) -> (f64, f64, (f64, f64), (f64, f64)) {
    if b == 0.0 {
        return (a, c, (1.0, 0.0), (0.0, 1.0));
    }
    let theta = (c - a) / (2.0 * b);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        1.0f64.copysign(theta) / (theta.abs() + theta.hypot(1.0))
    };
    let cs = 1.0 / t.hypot(1.0);
    let sn = t * cs;
    (a - t * b, c + t * b, (cs, -sn), (sn, cs))
}

/// Eigenvalues only: root-free (Pal-Walker-Kahan) QL on the squared
/// off-diagonal `e2` (`e2[i] = A[i+1][i]^2`, `e2[n-1]` unused). Unsorted
/// on return.
fn tql_rational(d: &mut [f64], e2: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e2[n - 1] = 0.0;
    let anorm = d
        .iter()
        .zip(e2.iter())
        .fold(0.0f64, |m, (a, b)| m.max(a.abs() + 2.0 * b.sqrt()));
    let tiny2 = (f64::EPSILON * f64::EPSILON * anorm).powi(2);
    let eps2 = f64::EPSILON * f64::EPSILON;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e2[m] <= eps2 * dd * dd || e2[m] <= tiny2 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence);
            }
            let p = d[l];
            let rte = e2[l].sqrt();
            let sig = (d[l + 1] - p) / (2.0 * rte);
            let r = sig.hypot(1.0);
            let sigma = p - rte / (sig + r.copysign(sig));

            let (mut c, mut s) = (1.0, 0.0);
            let mut gamma = d[m] - sigma;
            let mut pp = gamma * gamma;
            for i in (l..m).rev() {
                let bb = e2[i];
                let r = pp + bb;
                if i != m - 1 {
                    e2[i + 1] = s * r;
                }
                let oldc = c;
                c = pp / r;
                s = bb / r;
                let oldgam = gamma;
                let alpha = d[i];
                gamma = c * (alpha - sigma) - s * oldgam;
                d[i + 1] = oldgam + (alpha - gamma);
                pp = if c != 0.0 { gamma * gamma / c } else { oldc * bb };
            }
            e2[l] = s * pp;
            d[l] = sigma + gamma;
        }
    }
    Ok(())
}

/// Implicit QL with Wilkinson-style shifts on a symmetric tridiagonal matrix
/// (`d` diagonal, `e[i] = A[i+1][i]`, `e[n-1]` unused). Rotations are applied
/// to each row vector in `z`.
fn tql(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let anorm = d
        .iter()
        .zip(e.iter())
        .fold(0.0f64, |m, (a, b)| m.max(a.abs() + 2.0 * b.abs()));
    let tiny = f64::EPSILON * f64::EPSILON * anorm;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= tiny {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for u in z.iter_mut() {
                    let t = u[i + 1];
                    u[i + 1] = s * u[i] + c * t;
                    u[i] = c * u[i] - s * t;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Lower band of a symmetric matrix: `A[i][j]` for `0 <= i - j <= w`.
struct Band {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl Band {
    fn new(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            data: vec![0.0; n * (w + 1)],
        }
    }

    #[inline(always)]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        (k <= self.w).then_some(j * (self.w + 1) + k)
    }

    #[inline(always)]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    #[inline(always)]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        match self.idx(i, j) {
            Some(k) => self.data[k] = v,
            None => debug_assert!(v == 0.0, "fill outside band at ({i}, {j})"),
        }
    }

    #[inline(always)]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    /// Similarity by the Givens rotation on `(p, p+1)` that zeroes
    /// `A[p+1][col]` against `A[p][col]`; the same rotation is applied to the
    /// columns of every row in `q`.
    fn annihilate(&mut self, p: usize, col: usize, q: &mut [Vec<f64>]) {
        let qq = p + 1;
        let a = self.get(p, col);
        let b = self.get(qq, col);
        if b == 0.0 {
            return;
        }
        let rho = a.hypot(b);
        let c = a / rho;
        let s = -b / rho;

        let lo = p.saturating_sub(self.w);
        let hi = (qq + self.w).min(self.n - 1);
        for k in lo..=hi {
            if k == p || k == qq {
                continue;
            }
            let apk = self.get(p, k);
            let aqk = self.get(qq, k);
            if apk == 0.0 && aqk == 0.0 {
                continue;
            }
            self.set(p, k, c * apk - s * aqk);
            self.set(qq, k, s * apk + c * aqk);
        }
        let (app, aqq, apq) = (self.get(p, p), self.get(qq, qq), self.get(p, qq));
        self.set(p, p, c * c * app - 2.0 * c * s * apq + s * s * aqq);
        self.set(qq, qq, s * s * app + 2.0 * c * s * apq + c * c * aqq);
        self.set(p, qq, c * s * (app - aqq) + (c * c - s * s) * apq);
        self.set(qq, col, 0.0);
        self.set(p, col, rho);

        for u in q.iter_mut() {
            let (up, uq) = (u[p], u[qq]);
            u[p] = c * up - s * uq;
            u[qq] = s * up + c * uq;
        }
    }

    /// Band-to-tridiagonal reduction for half-bandwidth `b` (storage width
    /// must be `b + 1` to hold the travelling bulge).
    fn reduce_to_tridiagonal(&mut self, b: usize, q: &mut [Vec<f64>]) {
        debug_assert_eq!(self.w, b + 1);
        let n = self.n;
        for j in 0..n.saturating_sub(2) {
            for k in (2..=b).rev() {
                if j + k >= n {
                    continue;
                }
                self.annihilate(j + k - 1, j, q);
                // Chase the bulge created at (col + b + 1, col).
                let mut col = j + k - 1;
                while col + b + 1 < n {
                    let row = col + b + 1;
                    if self.get(row, col) == 0.0 {
                        break;
                    }
                    self.annihilate(row - 1, col, q);
                    col = row - 1;
                }
            }
        }
    }
}

/// LU factorisation with partial pivoting of `T - shift I` for an open
/// tridiagonal `T`.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, norm: f64) -> Self {
        let n = diag.len();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        let floor = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
        for x in d.iter_mut() {
            if x.abs() < floor {
                *x = if *x < 0.0 { -floor } else { floor };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
