//! Subcommands: parameter resolution, range checks and dataset assembly.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use popcorn_core::chain::{self, lifshitz_fit, lifshitz_target, ChainEnsemble, Peak, TailRegime};
use popcorn_core::dyson::{integrated_dos, DysonChain};
use popcorn_core::eta::{log_abs_eta, ModularPoint};
use popcorn_core::rational::{farey_sequence, popcorn};
use serde::Serialize;

use crate::ensemble::{analytic_bin_mass, pooled_density, PooledRun, PRNG_ID};
use crate::grid::{density_on_grid, map_grid, uniform_grid};
use crate::output::Dataset;

/// First series member (1-based) included in the tail regression.
pub const LIFSHITZ_FIT_FROM: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Popcorn,
    SpectralDensity,
    Bridge,
    Dyson,
    Lifshitz,
    Oracle,
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CommandName::Popcorn => "popcorn",
            CommandName::SpectralDensity => "spectral-density",
            CommandName::Bridge => "bridge",
            CommandName::Dyson => "dyson",
            CommandName::Lifshitz => "lifshitz",
            CommandName::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Raw flag values; `None` means "not given".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub f: Option<f64>,
    pub y: Option<f64>,
    pub eps: Option<f64>,
    pub nmax: Option<usize>,
    pub qmax: Option<u64>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub size: Option<usize>,
    pub samples: Option<usize>,
}

/// Fully resolved parameters of one run. Only the fields a subcommand uses
/// are set; this record is echoed verbatim into JSON metadata.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qmax: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub format: Format,
    /// Output file; `None` writes to stdout.
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Param {
    F,
    Y,
    Eps,
    Nmax,
    Qmax,
    GridMin,
    GridMax,
    GridPoints,
    Seed,
    Depth,
    Size,
    Samples,
}

impl Param {
    fn flag(self) -> &'static str {
        match self {
            Param::F => "--f",
            Param::Y => "--y",
            Param::Eps => "--eps",
            Param::Nmax => "--nmax",
            Param::Qmax => "--qmax",
            Param::GridMin => "--grid-min",
            Param::GridMax => "--grid-max",
            Param::GridPoints => "--grid-points",
            Param::Seed => "--seed",
            Param::Depth => "--depth",
            Param::Size => "--size",
            Param::Samples => "--samples",
        }
    }
}

fn accepted(cmd: CommandName) -> &'static [Param] {
    use Param::*;
    match cmd {
        CommandName::Popcorn => &[Qmax],
        CommandName::SpectralDensity => &[F, Y, Nmax, GridMin, GridMax, GridPoints],
        CommandName::Bridge => &[Eps, Qmax],
        CommandName::Dyson => &[F, Nmax, GridMin, GridMax, GridPoints],
        CommandName::Lifshitz => &[F, Depth],
        CommandName::Oracle => &[F, Size, Samples, Seed, GridMin, GridMax, GridPoints],
    }
}

fn given(o: &Overrides) -> Vec<Param> {
    let mut out = Vec::new();
    let mut mark = |set: bool, p: Param| {
        if set {
            out.push(p);
        }
    };
    mark(o.f.is_some(), Param::F);
    mark(o.y.is_some(), Param::Y);
    mark(o.eps.is_some(), Param::Eps);
    mark(o.nmax.is_some(), Param::Nmax);
    mark(o.qmax.is_some(), Param::Qmax);
    mark(o.grid_min.is_some(), Param::GridMin);
    mark(o.grid_max.is_some(), Param::GridMax);
    mark(o.grid_points.is_some(), Param::GridPoints);
    mark(o.seed.is_some(), Param::Seed);
    mark(o.depth.is_some(), Param::Depth);
    mark(o.size.is_some(), Param::Size);
    mark(o.samples.is_some(), Param::Samples);
    out
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    ensure!(v.is_finite(), "{name} must be finite, got {v}");
    Ok(())
}

impl RunConfig {
    /// Applies per-command defaults and range checks.
    pub fn resolve(command: CommandName, o: &Overrides, format: Format, out: Option<PathBuf>) -> Result<Self> {
        let allowed = accepted(command);
        for p in given(o) {
            if !allowed.contains(&p) {
                bail!("{} is not used by `{}`", p.flag(), command);
            }
        }
        let mut c = RunConfig {
            command,
            f: None,
            y: None,
            eps: None,
            nmax: None,
            qmax: None,
            grid_min: None,
            grid_max: None,
            grid_points: None,
            seed: None,
            depth: None,
            size: None,
            samples: None,
            format,
            out,
        };
        match command {
            CommandName::Popcorn => {
                let q = o.qmax.unwrap_or(100);
                ensure!((1..=2000).contains(&q), "--qmax must be in [1, 2000], got {q}");
                c.qmax = Some(q);
            }
            CommandName::SpectralDensity => {
                let f = o.f.unwrap_or(0.7);
                ensure!(f > 0.0 && f < 1.0, "--f must be in (0, 1), got {f}");
                let y = o.y.unwrap_or(2e-3);
                ensure!(y > 0.0 && y.is_finite(), "--y must be positive, got {y}");
                let n = o.nmax.unwrap_or(1000);
                ensure!((1..=5000).contains(&n), "--nmax must be in [1, 5000], got {n}");
                let (lo, hi, pts) = grid(o, -2.0, 2.0, 4001)?;
                ensure!(lo >= -4.0 && hi <= 4.0, "grid must lie within [-4, 4]");
                (c.f, c.y, c.nmax) = (Some(f), Some(y), Some(n));
                (c.grid_min, c.grid_max, c.grid_points) = (Some(lo), Some(hi), Some(pts));
            }
            CommandName::Bridge => {
                let eps = o.eps.unwrap_or(1e-6);
                ensure!(
                    (1e-10..=1e-3).contains(&eps),
                    "--eps must be in [1e-10, 1e-3], got {eps}"
                );
                let q = o.qmax.unwrap_or(40);
                ensure!((1..=1000).contains(&q), "--qmax must be in [1, 1000], got {q}");
                (c.eps, c.qmax) = (Some(eps), Some(q));
            }
            CommandName::Dyson => {
                let f = o.f.unwrap_or(0.5);
                ensure!(f > 0.0 && f < 1.0, "--f must be in (0, 1), got {f}");
                if let Some(n) = o.nmax {
                    ensure!(n >= 1, "--nmax must be at least 1");
                }
                let (lo, hi, pts) = grid(o, -1.0 + 1e-8, 3.0 - 1e-4, 1001)?;
                ensure!(lo > -1.0 && hi < 3.0, "dyson grid must lie inside (-1, 3)");
                c.f = Some(f);
                c.nmax = Some(match o.nmax {
                    Some(n) => n,
                    None => DysonChain::new(f)?.n_max(),
                });
                (c.grid_min, c.grid_max, c.grid_points) = (Some(lo), Some(hi), Some(pts));
            }
            CommandName::Lifshitz => {
                let f = o.f.unwrap_or(0.7);
                ensure!(f > 0.0 && f < 1.0, "--f must be in (0, 1), got {f}");
                let depth = o.depth.unwrap_or(60);
                ensure!(
                    depth >= LIFSHITZ_FIT_FROM + 2,
                    "--depth must be at least {} for a three-point fit",
                    LIFSHITZ_FIT_FROM + 2
                );
                // Deepest interior label has p + q = 2 depth + 1.
                ensure!(
                    (2 * depth + 1) as f64 * -f.ln() < 700.0,
                    "--depth {depth} makes peak intensities underflow at f = {f}"
                );
                (c.f, c.depth) = (Some(f), Some(depth));
            }
            CommandName::Oracle => {
                let f = o.f.unwrap_or(0.7);
                ensure!((0.0..1.0).contains(&f), "--f must be in [0, 1), got {f}");
                let size = o.size.unwrap_or(20_000);
                ensure!(
                    (1..=10_000_000).contains(&size),
                    "--size must be in [1, 1e7], got {size}"
                );
                let samples = o.samples.unwrap_or(100);
                ensure!(
                    (1..=10_000).contains(&samples),
                    "--samples must be in [1, 10000], got {samples}"
                );
                let (lo, hi, bins) = grid(o, -2.005, 2.005, 401)?;
                (c.f, c.size, c.samples, c.seed) = (Some(f), Some(size), Some(samples), Some(o.seed.unwrap_or(0)));
                (c.grid_min, c.grid_max, c.grid_points) = (Some(lo), Some(hi), Some(bins));
            }
        }
        Ok(c)
    }
}

fn grid(o: &Overrides, lo: f64, hi: f64, pts: usize) -> Result<(f64, f64, usize)> {
    let lo = o.grid_min.unwrap_or(lo);
    let hi = o.grid_max.unwrap_or(hi);
    let pts = o.grid_points.unwrap_or(pts);
    check_finite("--grid-min", lo)?;
    check_finite("--grid-max", hi)?;
    ensure!(lo < hi, "--grid-min {lo} must be below --grid-max {hi}");
    ensure!(
        (2..=1_000_000).contains(&pts),
        "--grid-points must be in [2, 1e6], got {pts}"
    );
    Ok((lo, hi, pts))
}

/// Metadata block of the JSON format.
#[derive(Clone, Debug, Serialize)]
pub struct Meta<'a> {
    pub config: &'a RunConfig,
    pub version: &'static str,
    pub prng: &'static str,
}

impl<'a> Meta<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self {
            config,
            version: env!("CARGO_PKG_VERSION"),
            prng: PRNG_ID,
        }
    }
}

/// Runs a resolved configuration.
pub fn run(c: &RunConfig) -> Result<Dataset> {
    match c.command {
        CommandName::Popcorn => cmd_popcorn(c),
        CommandName::SpectralDensity => cmd_spectral_density(c),
        CommandName::Bridge => cmd_bridge(c),
        CommandName::Dyson => cmd_dyson(c),
        CommandName::Lifshitz => cmd_lifshitz(c),
        CommandName::Oracle => cmd_oracle(c),
    }
}

/// Serialises a dataset in the configured format.
pub fn render(c: &RunConfig, data: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match c.format {
        Format::Csv => data.write_csv(&mut buf)?,
        Format::Json => data.write_json(&Meta::new(c), &mut buf)?,
    }
    Ok(buf)
}

fn interior_fractions(qmax: u64) -> Result<Vec<popcorn_core::Rational>> {
    Ok(farey_sequence(qmax)?
        .into_iter()
        .filter(|r| r.numer() > 0 && r.numer() < r.denom())
        .collect())
}

fn cmd_popcorn(c: &RunConfig) -> Result<Dataset> {
    let mut d = Dataset::new(vec!["x", "g"]);
    for r in interior_fractions(c.qmax.unwrap())? {
        d.push(vec![r.to_f64().into(), popcorn(r)?.into()]);
    }
    Ok(d)
}

fn cmd_spectral_density(c: &RunConfig) -> Result<Dataset> {
    let ens = ChainEnsemble::with_n_max(c.f.unwrap(), c.y.unwrap(), c.nmax.unwrap())?;
    let lambda = uniform_grid(c.grid_min.unwrap(), c.grid_max.unwrap(), c.grid_points.unwrap())?;
    let grid = density_on_grid(&ens, lambda);
    let mut d = Dataset::new(vec!["lambda", "rho"]);
    for (l, r) in grid.lambda.iter().zip(&grid.rho) {
        d.push(vec![(*l).into(), (*r).into()]);
    }
    Ok(d)
}

fn cmd_bridge(c: &RunConfig) -> Result<Dataset> {
    let eps = c.eps.unwrap();
    let mut d = Dataset::new(vec!["x", "neg_log_eta", "pi_g2_over_12eps", "residual"]);
    for r in interior_fractions(c.qmax.unwrap())? {
        let q = r.denom() as f64;
        let neg = -log_abs_eta(ModularPoint::at_rational(r, eps)?)?.log_abs;
        let term = PI / (12.0 * eps * q * q);
        d.push(vec![r.to_f64().into(), neg.into(), term.into(), (neg - term).into()]);
    }
    Ok(d)
}

fn cmd_dyson(c: &RunConfig) -> Result<Dataset> {
    let chain = DysonChain::with_n_max(c.f.unwrap(), c.nmax.unwrap())?;
    let lambda = uniform_grid(c.grid_min.unwrap(), c.grid_max.unwrap(), c.grid_points.unwrap())?;
    let values = map_grid(&lambda, |l| Ok(integrated_dos(l, &chain)?))?;
    let mut d = Dataset::new(vec!["lambda", "N"]);
    for (l, v) in lambda.iter().zip(values) {
        d.push(vec![(*l).into(), v.value.into()]);
    }
    Ok(d)
}

fn regressor(regime: TailRegime, acc: f64, position: f64) -> f64 {
    let gap = (acc - position).abs();
    match regime {
        TailRegime::Edge => 1.0 / gap.sqrt(),
        TailRegime::Interior => 1.0 / gap,
    }
}

fn cmd_lifshitz(c: &RunConfig) -> Result<Dataset> {
    let f = c.f.unwrap();
    let depth = c.depth.unwrap();
    let target = lifshitz_target(f);
    let mut d = Dataset::new(vec![
        "series",
        "k",
        "p",
        "q",
        "lambda",
        "intensity",
        "regressor",
        "in_fit",
        "fit_slope",
        "target_slope",
        "fit_residual",
    ]);
    let runs = [
        ("S1", chain::edge_series(depth, f)?, 2.0),
        ("S2", chain::interior_series(depth, f)?, 0.0),
    ];
    for (name, series, acc) in runs {
        let window: &[Peak] = &series.peaks()[LIFSHITZ_FIT_FROM - 1..];
        let fit = lifshitz_fit(window, acc).with_context(|| format!("fitting series {name}"))?;
        for (i, pk) in series.peaks().iter().enumerate() {
            d.push(vec![
                name.into(),
                pk.label.numer().into(),
                pk.p().into(),
                pk.q().into(),
                pk.position.into(),
                pk.intensity.into(),
                regressor(fit.regime, acc, pk.position).into(),
                (i + 1 >= LIFSHITZ_FIT_FROM).into(),
                fit.slope.into(),
                target.into(),
                fit.residual.into(),
            ]);
        }
    }
    Ok(d)
}

fn cmd_oracle(c: &RunConfig) -> Result<Dataset> {
    let f = c.f.unwrap();
    let run = PooledRun {
        size: c.size.unwrap(),
        f,
        seed: c.seed.unwrap(),
        samples: c.samples.unwrap(),
        min: c.grid_min.unwrap(),
        max: c.grid_max.unwrap(),
        bins: c.grid_points.unwrap(),
    };
    let hist = pooled_density(&run)?;
    let analytic = analytic_bin_mass(f, &hist)?;
    let mut d = Dataset::new(vec!["lambda", "count", "empirical", "analytic"]);
    for (i, a) in analytic.iter().enumerate() {
        d.push(vec![
            hist.center(i).into(),
            hist.counts[i].into(),
            hist.mass(i).into(),
            (*a).into(),
        ]);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::Cell;

    fn resolve(cmd: CommandName, o: Overrides) -> Result<RunConfig> {
        RunConfig::resolve(cmd, &o, Format::Csv, None)
    }

    #[test]
    fn defaults() {
        let c = resolve(CommandName::SpectralDensity, Overrides::default()).unwrap();
        assert_eq!(
            (c.f, c.y, c.nmax, c.grid_points),
            (Some(0.7), Some(2e-3), Some(1000), Some(4001))
        );
        let c = resolve(CommandName::Bridge, Overrides::default()).unwrap();
        assert_eq!((c.eps, c.qmax), (Some(1e-6), Some(40)));
        let c = resolve(CommandName::Oracle, Overrides::default()).unwrap();
        assert_eq!(
            (c.size, c.samples, c.seed, c.grid_points),
            (Some(20_000), Some(100), Some(0), Some(401))
        );
    }

    #[test]
    fn rejects_foreign_and_out_of_range_flags() {
        let o = Overrides {
            y: Some(0.1),
            ..Default::default()
        };
        assert!(resolve(CommandName::Popcorn, o).is_err());
        let o = Overrides {
            f: Some(1.5),
            ..Default::default()
        };
        assert!(resolve(CommandName::Dyson, o).is_err());
        let o = Overrides {
            grid_min: Some(-1.0),
            ..Default::default()
        };
        assert!(resolve(CommandName::Dyson, o).is_err());
        let o = Overrides {
            depth: Some(5),
            ..Default::default()
        };
        assert!(resolve(CommandName::Lifshitz, o).is_err());
    }

    #[test]
    fn popcorn_rows() {
        let o = Overrides {
            qmax: Some(3),
            ..Default::default()
        };
        let d = run(&resolve(CommandName::Popcorn, o).unwrap()).unwrap();
        let g: Vec<Cell> = d.rows.iter().map(|r| r[1].clone()).collect();
        assert_eq!(
            g,
            vec![Cell::Float(1.0 / 3.0), Cell::Float(0.5), Cell::Float(1.0 / 3.0)]
        );
    }
}
