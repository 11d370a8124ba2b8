//! Command-line front end. Every run writes its outputs and a manifest into
//! one directory; `replay` re-runs a manifest and compares output hashes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{config_hash, OutputSet, RunManifest, MANIFEST_FILE, VERSION};
use crate::model::{segment, BoundaryCondition, Hoppings, ModelSpec, Region, TightBindingModel};
use crate::spectral::{bulk_gap, edge_modes, eigenvalues_csv, idos_curve, spectrum, stage_convergence, StageRow};
use crate::verify::{self, VerifyConfig};
use crate::windows::{ell_l1_norm, EnergyWindow, PositionWindow, TruncationWindow};
use crate::wldos::{grid_csv, Method, Wldos};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

pub const OUT_DIR_ENV: &str = "WLDOS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "wldos",
    version,
    about = "Windowed local density of states for tight-binding chains"
)]
pub struct Cli {
    /// Output directory [default: $WLDOS_OUT_DIR, else ./wldos-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid evaluation (0: all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SshPeriodic,
    SshFibonacci,
    SshInterp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Dense,
    Kpm,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::SshFibonacci)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 10)]
    pub stage: u32,
    /// Unit cells of the uniform chain
    #[arg(long, default_value_t = 100)]
    pub cells: usize,
    /// Interpolation parameter (0: uniform, 1: Fibonacci)
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    /// periodic or dirichlet
    #[arg(long, default_value = "periodic")]
    pub bc: BoundaryCondition,
    #[arg(long, default_value_t = 2.15)]
    pub t_o: f64,
    #[arg(long, default_value_t = 3.04)]
    pub t_i_s: f64,
    #[arg(long, default_value_t = 2.73)]
    pub t_i_l: f64,
    /// Inter-site hopping of the uniform chain
    #[arg(long, default_value_t = 2.85)]
    pub t_i: f64,
    /// full, bulk (|x| <= rho) or edge (0 <= x <= rho); bulk and edge pick
    /// the stage automatically and use Dirichlet ends
    #[arg(long, default_value = "full")]
    pub region: Region,
    #[arg(long, default_value_t = 80.0)]
    pub rho: f64,
}

impl ModelArgs {
    pub fn spec(&self) -> ModelSpec {
        self.spec_at_stage(self.stage)
    }

    fn spec_at_stage(&self, stage: u32) -> ModelSpec {
        match self.model {
            ModelKind::SshPeriodic => ModelSpec::SshPeriodic {
                n_cells: self.cells,
                t_o: self.t_o,
                t_i: self.t_i,
                bc: self.bc,
            },
            ModelKind::SshFibonacci => ModelSpec::SshFibonacci {
                stage,
                t_o: self.t_o,
                t_i_s: self.t_i_s,
                t_i_l: self.t_i_l,
                bc: self.bc,
            },
            ModelKind::SshInterp => ModelSpec::SshInterp {
                stage,
                s: self.s,
                hoppings: Hoppings {
                    t_o: self.t_o,
                    t_i_s: self.t_i_s,
                    t_i_l: self.t_i_l,
                    t_i: self.t_i,
                },
                bc: self.bc,
            },
        }
    }

    pub fn build(&self) -> Result<TightBindingModel> {
        self.build_with_rho(self.rho)
    }

    fn build_with_rho(&self, rho: f64) -> Result<TightBindingModel> {
        segment(&self.spec(), self.region, rho)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EnergyGrid {
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    pub e_min: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    pub e_max: f64,
    #[arg(long, default_value_t = 121)]
    pub e_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ModelCmd {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectrumCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also report in-gap modes (Dirichlet chains)
    #[arg(long)]
    pub edge_modes: bool,
    /// Sites counted as "near the edge" for edge mass
    #[arg(long, default_value_t = 10)]
    pub edge_sites: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IdosCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    pub e_min: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    pub e_max: f64,
    #[arg(long, default_value_t = 1000)]
    pub e_grid: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConvergeStagesCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20"
    )]
    pub stages: Vec<u32>,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    pub e_min: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    pub e_max: f64,
    #[arg(long, default_value_t = 1000)]
    pub e_grid: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WindowArgs {
    /// Inverse energy window width
    #[arg(long, default_value_t = 5.0)]
    pub eta_inv: f64,
    /// Position window scale; support is [-2/kappa, 2/kappa]
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, value_enum, default_value_t = MethodKind::Dense)]
    pub method: MethodKind,
    /// Truncation parameter for --method truncated
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Polynomial degree for --method kpm
    #[arg(long, default_value_t = 14)]
    pub order: usize,
}

impl WindowArgs {
    fn method(&self) -> Method {
        match self.method {
            MethodKind::Dense => Method::Dense,
            MethodKind::Kpm => Method::Kpm { order: self.order },
            MethodKind::Truncated => Method::Truncated {
                alpha: self.alpha,
                order: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WldosCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = -7.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 7.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 57)]
    pub x_steps: usize,
    #[command(flatten)]
    pub energies: EnergyGrid,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConvergeLengthCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Ascending system lengths (half-lengths for bulk); replaces --rho
    #[arg(long, value_delimiter = ',', required = true)]
    pub lengths: Vec<f64>,
    #[arg(long = "eta-invs", value_delimiter = ',', default_value = "1,3,5,7,9")]
    pub eta_invs: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[command(flatten)]
    pub energies: EnergyGrid,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WindowsCmd {
    #[arg(long, default_value_t = 5.0)]
    pub eta_inv: f64,
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
    pub xi_min: f64,
    #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
    pub xi_max: f64,
    #[arg(long, default_value_t = 1601)]
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyCmd {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random lemma instances (0: deterministic checks only)
    #[arg(long, default_value_t = 200)]
    pub n_random: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayCmd {
    /// Manifest to replay
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Build a model and export it
    Model(ModelCmd),
    /// Eigenvalues (and optional edge modes)
    Spectrum(SpectrumCmd),
    /// Integrated density of states on an energy grid
    Idos(IdosCmd),
    /// Spectra and IDOS across substitution stages
    ConvergeStages(ConvergeStagesCmd),
    /// wLDOS on an (x, E) grid
    Wldos(WldosCmd),
    /// Successive wLDOS differences over increasing system length
    ConvergeLength(ConvergeLengthCmd),
    /// Window function samples
    Windows(WindowsCmd),
    /// Run the invariant suite
    Verify(VerifyCmd),
    /// Re-run a manifest and compare outputs
    Replay(ReplayCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Model(_) => "model",
            Command::Spectrum(_) => "spectrum",
            Command::Idos(_) => "idos",
            Command::ConvergeStages(_) => "converge-stages",
            Command::Wldos(_) => "wldos",
            Command::ConvergeLength(_) => "converge-length",
            Command::Windows(_) => "windows",
            Command::Verify(_) => "verify",
            Command::Replay(_) => "replay",
        }
    }
}

/// What a finished run reports back.
pub struct Outcome {
    pub manifest: RunManifest,
    /// Verification result; `false` maps to exit code 1.
    pub passed: bool,
}

pub fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "bad grid [{lo}, {hi}] with {steps} points"
        )));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DenseCapExceeded { .. } => EXIT_CAP,
        Error::Cell { source, .. } => exit_code(source),
        Error::InvalidParameter(_)
        | Error::Precondition(_)
        | Error::EmptyTruncation { .. }
        | Error::IndexOutOfRange { .. }
        | Error::NoFourierData(_)
        | Error::OnEigenvalue { .. }
        | Error::NoGap(_) => EXIT_USAGE,
        _ => EXIT_VERIFY,
    }
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("wldos-out"))
}

/// Runs one non-replay command into `out`.
pub fn execute(command: &Command, out: &Path, threads: usize) -> Result<Outcome> {
    if let Command::Replay(_) = command {
        return Err(Error::InvalidParameter("replay cannot be nested".into()));
    }
    let start = Instant::now();
    let config = serde_json::to_value(command)?;
    let hash = config_hash(&config);
    let mut outputs = OutputSet::new(out, hash.clone());
    let mut models = Vec::new();
    let mut passed = true;
    match command {
        Command::Model(c) => {
            let m = c.model.build()?;
            models.push(m.manifest());
            outputs.json("model.json", &m.manifest())?;
            outputs.csv("sites.csv", &m.sites_csv())?;
            outputs.csv("hamiltonian.csv", &m.triplets_csv())?;
        }
        Command::Spectrum(c) => {
            let m = c.model.build()?;
            models.push(m.manifest());
            let spec = spectrum(&m)?;
            outputs.csv("eigenvalues.csv", &eigenvalues_csv(&spec))?;
            let gap = bulk_gap(&spec, 0.0).ok();
            let summary = serde_json::json!({
                "n_eigenvalues": spec.eigenvalues.len(),
                "min": spec.eigenvalues.first(),
                "max": spec.eigenvalues.last(),
                "gap_around_zero": gap,
            });
            outputs.json("spectrum.json", &summary)?;
            if c.edge_modes {
                outputs.json("edge_modes.json", &edge_modes(&m, c.edge_sites)?)?;
            }
        }
        Command::Idos(c) => {
            let m = c.model.build()?;
            models.push(m.manifest());
            let grid = linspace(c.e_min, c.e_max, c.e_grid)?;
            let curve = idos_curve(&m, &grid)?;
            let mut body = String::from("E,idos\n");
            for (e, v) in grid.iter().zip(&curve) {
                body.push_str(&format!("{e:?},{v:?}\n"));
            }
            outputs.csv("idos.csv", &body)?;
        }
        Command::ConvergeStages(c) => run_converge_stages(c, &mut outputs, &mut models)?,
        Command::Wldos(c) => {
            let m = c.model.build()?;
            models.push(m.manifest());
            let w = Wldos::new(
                &m,
                EnergyWindow::from_eta_inv(c.window.eta_inv)?,
                PositionWindow::new(c.window.kappa)?,
                c.window.method(),
            )?;
            let xs = linspace(c.x_min, c.x_max, c.x_steps)?;
            let es = linspace(c.energies.e_min, c.energies.e_max, c.energies.e_steps)?;
            outputs.csv("wldos.csv", &grid_csv(&w.grid(&xs, &es, threads)?))?;
        }
        Command::ConvergeLength(c) => run_converge_length(c, threads, &mut outputs, &mut models)?,
        Command::Windows(c) => {
            let f = EnergyWindow::from_eta_inv(c.eta_inv)?;
            let g = PositionWindow::new(c.kappa)?;
            let k = TruncationWindow::for_window(&g, c.alpha)?;
            let mut body = String::from("xi,f,g,k\n");
            for xi in linspace(c.xi_min, c.xi_max, c.steps)? {
                body.push_str(&format!("{xi:?},{:?},{:?},{:?}\n", f.eval(xi), g.eval(xi), k.eval(xi)));
            }
            outputs.csv("windows.csv", &body)?;
            let info = serde_json::json!({
                "energy_window": f,
                "position_window": { "kappa": c.kappa, "half_width": g.half_width() },
                "truncation_window": {
                    "alpha": c.alpha,
                    "m": k.m(),
                    "plateau": k.plateau(),
                    "support": k.support(),
                    "commutator_factor": k.commutator_factor(),
                },
                "ell_l1_norm": ell_l1_norm(),
            });
            outputs.json("windows.json", &info)?;
        }
        Command::Verify(c) => {
            let report = verify::run(VerifyConfig {
                seed: c.seed,
                n_random: c.n_random,
                dim: c.dim,
            })?;
            passed = report.passed;
            outputs.json("verify.json", &report)?;
        }
        Command::Replay(_) => unreachable!(),
    }
    let manifest = RunManifest {
        tool: "wldos".into(),
        version: VERSION.into(),
        subcommand: command.name().into(),
        flags: serde_json::json!({
            "command": config,
            "out": out,
            "threads": threads,
        }),
        config_hash: hash,
        models,
        outputs: outputs.files().to_vec(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    outputs.raw(
        MANIFEST_FILE,
        (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes(),
    )?;
    Ok(Outcome { manifest, passed })
}

fn run_converge_stages(
    c: &ConvergeStagesCmd,
    outputs: &mut OutputSet,
    models: &mut Vec<serde_json::Value>,
) -> Result<()> {
    if c.model.model == ModelKind::SshPeriodic {
        return Err(Error::InvalidParameter(
            "converge-stages needs a substitution chain".into(),
        ));
    }
    if c.stages.is_empty() {
        return Err(Error::InvalidParameter("--stages is empty".into()));
    }
    let built: Vec<(u32, TightBindingModel)> = c
        .stages
        .iter()
        .map(|&s| Ok((s, c.model.spec_at_stage(s).build()?)))
        .collect::<Result<_>>()?;
    models.extend(built.iter().map(|(_, m)| m.manifest()));
    let (rows, spectra) = stage_convergence(&built)?;

    let mut body = String::from("stage,index,eigenvalue\n");
    for ((stage, _), spec) in built.iter().zip(&spectra) {
        for (j, l) in spec.eigenvalues.iter().enumerate() {
            body.push_str(&format!("{stage},{j},{l:?}\n"));
        }
    }
    outputs.csv("spectra.csv", &body)?;

    let grid = linspace(c.e_min, c.e_max, c.e_grid)?;
    let curves: Vec<Vec<f64>> = built.iter().map(|(_, m)| idos_curve(m, &grid)).collect::<Result<_>>()?;
    let mut body = String::from("E");
    for (s, _) in &built {
        body.push_str(&format!(",idos_stage{s}"));
    }
    body.push('\n');
    for (k, e) in grid.iter().enumerate() {
        body.push_str(&format!("{e:?}"));
        for c in &curves {
            body.push_str(&format!(",{:?}", c[k]));
        }
        body.push('\n');
    }
    outputs.csv("idos.csv", &body)?;
    outputs.csv("stages.csv", &stages_csv(&rows, &curves))?;
    Ok(())
}

fn stages_csv(rows: &[StageRow], curves: &[Vec<f64>]) -> String {
    let mut body = String::from("stage,n_eigenvalues,gap_half_width,hausdorff_to_previous,idos_sup_diff_to_previous\n");
    for (i, r) in rows.iter().enumerate() {
        let h = r.hausdorff_to_previous.map(|v| format!("{v:?}")).unwrap_or_default();
        let d = if i == 0 {
            String::new()
        } else {
            let v = curves[i]
                .iter()
                .zip(&curves[i - 1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            format!("{v:?}")
        };
        body.push_str(&format!(
            "{},{},{:?},{h},{d}\n",
            r.stage, r.n_eigenvalues, r.gap_half_width
        ));
    }
    body
}

fn run_converge_length(
    c: &ConvergeLengthCmd,
    threads: usize,
    outputs: &mut OutputSet,
    models: &mut Vec<serde_json::Value>,
) -> Result<()> {
    if c.model.region == Region::Full {
        return Err(Error::InvalidParameter(
            "converge-length needs --region bulk or edge".into(),
        ));
    }
    if c.lengths.is_empty() || c.lengths.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "--lengths must be a nonempty ascending list".into(),
        ));
    }
    if c.eta_invs.is_empty() {
        return Err(Error::InvalidParameter("--eta-invs is empty".into()));
    }
    let es = linspace(c.energies.e_min, c.energies.e_max, c.energies.e_steps)?;
    let g = PositionWindow::new(c.window.kappa)?;
    let built: Vec<TightBindingModel> = c
        .lengths
        .iter()
        .map(|&l| c.model.build_with_rho(l))
        .collect::<Result<_>>()?;
    models.extend(built.iter().map(|m| m.manifest()));

    let mut values = String::from("length,eta_inv,x,E,wldos\n");
    let mut diffs = String::from("length,eta_inv,diff\n");
    for &eta_inv in &c.eta_invs {
        let f = EnergyWindow::from_eta_inv(eta_inv)?;
        let mut prev: Option<Vec<f64>> = None;
        for (l, m) in c.lengths.iter().zip(&built) {
            let w = Wldos::new(m, f.clone(), g, c.window.method())?;
            let row: Vec<f64> = w.grid(&[c.x], &es, threads)?.iter().map(|r| r.value).collect();
            for (e, v) in es.iter().zip(&row) {
                values.push_str(&format!("{l:?},{eta_inv:?},{:?},{e:?},{v:?}\n", c.x));
            }
            if let Some(p) = &prev {
                let d = row.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                diffs.push_str(&format!("{l:?},{eta_inv:?},{d:?}\n"));
            }
            prev = Some(row);
        }
    }
    outputs.csv("wldos_by_length.csv", &values)?;
    outputs.csv("convergence.csv", &diffs)?;
    Ok(())
}

/// Re-runs a manifest into `out` and reports files whose hashes differ.
pub fn replay(manifest_path: &Path, out: &Path, threads: usize) -> Result<Vec<String>> {
    let recorded = RunManifest::read(manifest_path)?;
    let command: Command = serde_json::from_value(recorded.flags["command"].clone())?;
    if config_hash(&recorded.flags["command"]) != recorded.config_hash {
        return Err(Error::InvalidParameter(
            "manifest config hash does not match its flags".into(),
        ));
    }
    let fresh = execute(&command, out, threads)?.manifest;
    let mut mismatched = Vec::new();
    for old in recorded.outputs.iter().filter(|o| o.name != MANIFEST_FILE) {
        match fresh.outputs.iter().find(|n| n.name == old.name) {
            Some(n) if n.sha256 == old.sha256 => {}
            _ => mismatched.push(old.name.clone()),
        }
    }
    Ok(mismatched)
}

/// Parses `args`, runs, prints a one-line summary and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let out = cli.out.clone().unwrap_or_else(default_out_dir);
    let result = match &cli.command {
        Command::Replay(r) => replay(&r.manifest, &out, cli.threads).map(|bad| {
            if bad.is_empty() {
                println!("replay: all outputs identical ({})", out.display());
                EXIT_OK
            } else {
                eprintln!("replay: outputs differ: {}", bad.join(", "));
                EXIT_VERIFY
            }
        }),
        command => execute(command, &out, cli.threads).map(|o| {
            println!(
                "{}: wrote {} files to {} (manifest {})",
                o.manifest.subcommand,
                o.manifest.outputs.len() + 1,
                out.display(),
                &o.manifest.config_hash[..12]
            );
            if o.passed {
                EXIT_OK
            } else {
                eprintln!("verify: failed checks, see verify.json");
                EXIT_VERIFY
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(-1.0, 1.0, 3).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1).unwrap(), vec![2.0]);
        assert!(linspace(1.0, 0.0, 3).is_err());
        assert!(linspace(0.0, 1.0, 0).is_err());
        let g = linspace(-6.0, 6.0, 1000).unwrap();
        assert_eq!(g[999], 6.0);
    }

    #[test]
    fn flags_roundtrip_through_json() {
        let cli = Cli::try_parse_from(["wldos", "wldos", "--region", "edge", "--rho", "16", "--x-min", "-1"]).unwrap();
        let v = serde_json::to_value(&cli.command).unwrap();
        assert_eq!(v["subcommand"], "wldos");
        assert_eq!(v["x_min"], -1.0);
        let back: Command = serde_json::from_value(v).unwrap();
        assert_eq!(back, cli.command);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::DenseCapExceeded { dim: 1, cap: 0 }), EXIT_CAP);
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::NoConvergence), EXIT_VERIFY);
    }
}
