//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wldos::lemmas::random_suite;
use wldos::linalg::eigenvalues;
use wldos::model::{
    fibonacci_ssh, interpolated_ssh, periodic_ssh, segment, ssh_band_energy, BoundaryCondition, Hoppings, ModelSpec,
    Region, TightBindingModel,
};
use wldos::spectral::{edge_modes, idos_curve, stage_convergence};
use wldos::verify::{frobenius_identity, partition_sum_rule, single_site_identity, truncation_window_violation};
use wldos::windows::{ell_fourier, ell_l1_norm, EnergyWindow, PositionWindow};
use wldos::wldos::{Method, Wldos};
use wldos::Result;

use BoundaryCondition::{Dirichlet, Periodic};

const T_O: f64 = 2.15;
const T_S: f64 = 3.04;
const T_L: f64 = 2.73;
const T_I: f64 = 2.85;

type Criterion = (&'static str, fn() -> Result<Verdict>);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn periodic_bands() -> Result<Verdict> {
    let start = Instant::now();
    let m = periodic_ssh(200, T_O, T_I, Periodic)?;
    let ev = eigenvalues(m.hamiltonian())?;
    let mut bloch: Vec<f64> = (0..200)
        .flat_map(|j| {
            let (lo, hi) = ssh_band_energy(2.0 * PI * j as f64 / 200.0, T_O, T_I);
            [lo, hi]
        })
        .collect();
    bloch.sort_by(f64::total_cmp);
    let secs = start.elapsed().as_secs_f64();
    let inside = ev.iter().all(|&l| (0.7 - 1e-12..=5.0 + 1e-12).contains(&l.abs()));
    let inner = ev.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let outer = ev.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let err = max_abs_diff(&ev, &bloch);
    verdict(
        inside && (inner - 0.7).abs() <= 1e-2 && (outer - 5.0).abs() <= 1e-2 && err <= 1e-10 && secs < 5.0,
        format!("min|E| {inner:.6} max|E| {outer:.6} bloch err {err:.2e} in {secs:.2}s"),
    )
}

fn fibonacci_gap() -> Result<Verdict> {
    let start = Instant::now();
    let m = fibonacci_ssh(16, T_O, T_S, T_L, Periodic)?;
    let ev = eigenvalues(m.hamiltonian())?;
    let gap = ev.iter().fold(f64::INFINITY, |a, l| a.min(l.abs()));
    let reference = periodic_ssh(m.n_orbitals() / 2, T_O, T_I, Periodic)?;
    let weyl = max_abs_diff(&ev, &eigenvalues(reference.hamiltonian())?);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        gap >= 0.51 && weyl <= 0.19 && secs < 30.0,
        format!(
            "N {} min|E| {gap:.4} weyl distance {weyl:.4} in {secs:.2}s",
            m.n_orbitals()
        ),
    )
}

fn window_identities() -> Result<Verdict> {
    let m = fibonacci_ssh(10, T_O, T_S, T_L, Dirichlet)?;
    let f = EnergyWindow::from_eta_inv(5.0)?;
    let es = linspace(-5.5, 5.5, 23);
    let sum_rule = partition_sum_rule(&m, &f, 2.0, &es)?.max(partition_sum_rule(&m, &f, 1.0, &es)?);
    let single = single_site_identity(&m, &f, &es)?;
    let xs = linspace(-20.0, 20.0, 9);
    let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| es.iter().map(move |&e| (x, e))).collect();
    let frob = frobenius_identity(&m, &f, &PositionWindow::new(2.0)?, &points)?;
    verdict(
        sum_rule <= 1e-10 && single <= 1e-12 && frob <= 1e-10,
        format!("sum rule {sum_rule:.2e} single site {single:.2e} frobenius {frob:.2e}"),
    )
}

fn appendix_constants() -> Result<Verdict> {
    let l1 = ell_l1_norm();
    let small = ell_fourier(1e-9).norm();
    let mut worst = 0.0f64;
    for alpha in [1.0, 0.4, 0.2, 0.1] {
        for kappa in [2.0, 1.0, 0.5] {
            worst = worst.max(truncation_window_violation(
                &PositionWindow::new(kappa)?,
                alpha,
                40_001,
            )?);
        }
    }
    verdict(
        (l1 - 1.27).abs() <= 0.01 && small < 1e-6 && worst == 0.0,
        format!("l1 norm {l1:.6} ell(1e-9) {small:.1e} k_alpha violation {worst:.1e}"),
    )
}

fn lemma_suite() -> Result<Verdict> {
    let r = random_suite(200, 32, 0)?;
    let worst = r.max_ratio();
    verdict(
        worst <= 1.0 + 1e-8,
        format!("max ratio {worst:.9} (largest lhs {:.3e})", r.max_lhs),
    )
}

fn truncation_certificate() -> Result<Verdict> {
    let m = fibonacci_ssh(20, T_O, T_S, T_L, Periodic)?;
    let f = EnergyWindow::from_eta_inv(5.0)?;
    let g = PositionWindow::new(2.0)?;
    let es = linspace(-6.0, 6.0, 25);
    let dense = Wldos::new(&m, f.clone(), g, Method::Dense)?.grid(&[0.0], &es, 0)?;
    let mut within = true;
    let mut errors = Vec::new();
    let mut budgets = Vec::new();
    for alpha in [0.4, 0.2, 0.1] {
        let t = Wldos::new(&m, f.clone(), g, Method::Truncated { alpha, order: None })?.grid(&[0.0], &es, 0)?;
        let mut err = 0.0f64;
        for (d, t) in dense.iter().zip(&t) {
            let e = (d.value - t.value).abs();
            within &= e <= t.budget.total();
            err = err.max(e);
        }
        errors.push(err);
        budgets.push(t.iter().fold(f64::INFINITY, |a, r| a.min(r.budget.total())));
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    verdict(
        within && decreasing,
        format!("max errors {} smallest budgets {}", sci(&errors), sci(&budgets)),
    )
}

fn length_convergence() -> Result<Verdict> {
    let start = Instant::now();
    let template = ModelSpec::SshFibonacci {
        stage: 1,
        t_o: T_O,
        t_i_s: T_S,
        t_i_l: T_L,
        bc: Dirichlet,
    };
    let lengths: Vec<f64> = (1..=8).map(|k| 10.0 * k as f64).collect();
    let models: Vec<TightBindingModel> = lengths
        .iter()
        .map(|&r| segment(&template, Region::Bulk, r))
        .collect::<Result<_>>()?;
    let g = PositionWindow::new(2.0)?;
    let es = linspace(-6.0, 6.0, 121);
    let eta_invs = [1.0, 3.0, 5.0, 7.0, 9.0];
    // diffs[e][l]: sup over E of successive differences at x = 0
    let mut diffs = Vec::new();
    for &eta_inv in &eta_invs {
        let f = EnergyWindow::from_eta_inv(eta_inv)?;
        let rows: Vec<Vec<f64>> = models
            .iter()
            .map(|m| {
                Ok(Wldos::new(m, f.clone(), g, Method::Dense)?
                    .grid(&[0.0], &es, 0)?
                    .iter()
                    .map(|r| r.value)
                    .collect())
            })
            .collect::<Result<_>>()?;
        diffs.push(
            rows.windows(2)
                .map(|w| max_abs_diff(&w[0], &w[1]))
                .collect::<Vec<f64>>(),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    let first = diffs[0].iter().position(|&d| d < 1e-12);
    let early = first.is_some_and(|i| i + 1 < diffs[0].len());
    let tiny = 1e-13;
    let ordered =
        (0..lengths.len() - 1).all(|l| (0..eta_invs.len() - 1).all(|e| diffs[e][l] <= diffs[e + 1][l].max(tiny)));
    verdict(
        early && ordered && secs < 120.0,
        format!(
            "eta_inv 1 below 1e-12 from length {} final diffs {} ordered {ordered} in {secs:.1}s",
            first.map_or("never".to_string(), |i| format!("{}", lengths[i + 1])),
            sci(&diffs.iter().map(|d| d[d.len() - 1]).collect::<Vec<_>>()),
        ),
    )
}

fn edge_modes_stage14() -> Result<Verdict> {
    let m = fibonacci_ssh(14, T_O, T_S, T_L, Dirichlet)?;
    let r = edge_modes(&m, 10)?;
    let best = r.modes.iter().map(|m| m.edge_mass).fold(0.0f64, f64::max);
    verdict(
        !r.in_gap_eigenvalues.is_empty() && best >= 0.99,
        format!(
            "{} in-gap eigenvalues, best edge mass {best:.4}",
            r.in_gap_eigenvalues.len()
        ),
    )
}

/// Largest grid value with `|E| < 0.4` and `|x| <= x_reach`, and the grid max.
fn in_gap_level(m: &TightBindingModel, xs: &[f64], x_reach: f64) -> Result<(f64, f64)> {
    let f = EnergyWindow::from_eta_inv(5.0)?;
    let g = PositionWindow::new(2.0)?;
    let es = linspace(-6.0, 6.0, 121);
    let grid = Wldos::new(m, f, g, Method::Dense)?.grid(xs, &es, 0)?;
    let peak = grid.iter().fold(0.0f64, |a, r| a.max(r.value));
    let level = grid
        .iter()
        .filter(|r| r.request.energy.abs() < 0.4 && r.request.x.abs() <= x_reach)
        .fold(0.0f64, |a, r| a.max(r.value));
    Ok((level, peak))
}

fn bulk_without_edge_modes() -> Result<Verdict> {
    let template = ModelSpec::SshFibonacci {
        stage: 1,
        t_o: T_O,
        t_i_s: T_S,
        t_i_l: T_L,
        bc: Dirichlet,
    };
    let bulk = segment(&template, Region::Bulk, 80.0)?;
    let (level, peak) = in_gap_level(&bulk, &linspace(-7.0, 7.0, 57), 2.0)?;
    let edge = segment(&template, Region::Edge, 16.0)?;
    let (edge_level, _) = in_gap_level(&edge, &linspace(-1.0, 12.0, 53), 1.0)?;
    let ratio = level / peak;
    verdict(
        ratio < 1e-3 && edge_level > 10.0 * level,
        format!(
            "bulk in-gap max / grid max {ratio:.2e}, edge length 16 in-gap level {:.0}x bulk",
            edge_level / level
        ),
    )
}

fn kpm_models() -> Result<Vec<(String, TightBindingModel)>> {
    let mut out = vec![("periodic 200".to_string(), periodic_ssh(200, T_O, T_I, Periodic)?)];
    for stage in 3..=14 {
        for bc in [Periodic, Dirichlet] {
            let m = fibonacci_ssh(stage, T_O, T_S, T_L, bc)?;
            if m.n_orbitals() <= 2000 {
                out.push((format!("fibonacci {stage} {bc:?}"), m));
            }
        }
    }
    out.push((
        "interp s=0.5 stage 10".into(),
        interpolated_ssh(10, 0.5, Hoppings::default(), Periodic)?,
    ));
    Ok(out)
}

fn kpm_oracle() -> Result<Verdict> {
    let f = EnergyWindow::from_eta_inv(5.0)?;
    let g = PositionWindow::new(2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let models = kpm_models()?;
    let mut worst = f64::NEG_INFINITY;
    let mut largest_err = 0.0f64;
    for (_, m) in &models {
        let xs = m.site_positions(0);
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        let dense = Wldos::new(m, f.clone(), g, Method::Dense)?;
        let kpm = Wldos::new(m, f.clone(), g, Method::Kpm { order: 14 })?;
        for _ in 0..100 {
            let x = rng.random_range(lo..=hi);
            let e = rng.random_range(-6.0..6.0);
            let k = kpm.evaluate(x, e)?;
            let d = dense.evaluate(x, e)?;
            let err = (k.value - d.value).abs();
            largest_err = largest_err.max(err);
            worst = worst.max(err - k.budget.total());
        }
    }
    verdict(
        worst <= 0.0,
        format!(
            "{} models, largest error {largest_err:.2e}, worst error minus budget {worst:.2e}",
            models.len()
        ),
    )
}

fn idos_stability() -> Result<Verdict> {
    let es = linspace(-6.0, 6.0, 1000);
    let models: Vec<(u32, TightBindingModel)> = (16..=20)
        .map(|s| Ok((s, fibonacci_ssh(s, T_O, T_S, T_L, Periodic)?)))
        .collect::<Result<_>>()?;
    let curves: Vec<Vec<f64>> = models.iter().map(|(_, m)| idos_curve(m, &es)).collect::<Result<_>>()?;
    let diffs: Vec<f64> = curves.windows(2).map(|w| max_abs_diff(&w[0], &w[1])).collect();
    let worst = diffs.iter().fold(0.0f64, |a, &d| a.max(d));
    let (rows, _) = stage_convergence(&models[..2])?;
    verdict(
        worst <= 0.01,
        format!(
            "sup diffs {}, stage 17 hausdorff {:.4}",
            sci(&diffs),
            rows[1].hausdorff_to_previous.unwrap_or(f64::NAN)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("periodic band check", periodic_bands),
        ("fibonacci gap and weyl distance", fibonacci_gap),
        ("window identities", window_identities),
        ("appendix constants", appendix_constants),
        ("lemma property suite", lemma_suite),
        ("truncation certificate", truncation_certificate),
        ("length convergence", length_convergence),
        ("edge modes at stage 14", edge_modes_stage14),
        ("bulk in-gap weight", bulk_without_edge_modes),
        ("kpm vs dense oracle", kpm_oracle),
        ("idos stability", idos_stability),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (status, detail) = match check() {
            Ok(v) => (if v.passed { "PASS" } else { "FAIL" }, v.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
