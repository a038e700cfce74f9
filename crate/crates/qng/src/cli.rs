//! Command-line arguments and their translation into a [`RunConfig`].

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qng_core::decoherence::{DepthConfig, LossReading};
use qng_core::measures::CoherenceId;
use qng_core::opt::SearchConfig;

use crate::config::{
    CertifyInput, Command, DepthTarget, Family, Format, Grids, Observable, RunConfig,
};
use crate::error::{CliError, Result};
use crate::grid::{parse_grid, parse_pair, parse_range};

pub const DEFAULT_LAMBDA_GRID: &str = "log:61:1e-3:1e3";
pub const DEFAULT_P_GRID: &str = "lin:0:1:101";
pub const DEFAULT_LAMBDA2_GRID: &str = "log:21:1e-2:1e2";
pub const DEFAULT_PE_GRID: &str = "lin:0:0.2:21";

#[derive(Debug, Parser)]
#[command(
    name = "qng",
    version,
    about = "Certification thresholds for non-Gaussian coherences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Absolute thresholds of a hierarchy over a range of orders.
    Thresholds {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "1..4")]
        orders: String,
        #[command(flatten)]
        common: Common,
    },
    /// Relative criterion curve (one probability) or surface (two).
    Curve {
        #[command(flatten)]
        target: Target,
        /// Order of an N or L hierarchy.
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// `Pm`, `Pn`, `Pe`, or `Pn,Pe` for a surface.
        #[arg(long, default_value = "Pn")]
        observable: String,
        #[command(flatten)]
        grids: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Loss and thermal depths against a threshold or a hierarchy.
    Depth {
        #[arg(long, value_name = "M,N")]
        measure: String,
        #[arg(long, conflicts_with_all = ["hierarchy", "orders"])]
        threshold: Option<f64>,
        #[arg(long)]
        hierarchy: Option<String>,
        #[arg(long)]
        orders: Option<String>,
        /// Thermal occupations at which to bisect the tolerable loss.
        #[arg(long, value_name = "GRID")]
        boundary_sweep: Option<String>,
        /// Permit loss above 0.3 and occupation above 0.15.
        #[arg(long)]
        allow_nonperturbative: bool,
        /// Weight the lossy term by the transmission instead of the loss.
        #[arg(long)]
        transmission_reading: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Certify a state file or a measured coherence.
    Certify {
        #[arg(long, value_name = "M,N")]
        measure: String,
        #[arg(long, conflicts_with = "c")]
        state: Option<PathBuf>,
        #[arg(long, required_unless_present = "state")]
        c: Option<f64>,
        #[arg(long)]
        pm: Option<f64>,
        #[arg(long)]
        pn: Option<f64>,
        #[arg(long)]
        pe: Option<f64>,
        /// Comma-separated hierarchies.
        #[arg(long, default_value = "N,L")]
        hierarchy: String,
        #[arg(long)]
        orders: Option<String>,
        #[command(flatten)]
        grids: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// `1 − T` for core states without one level, as the cutoff N grows.
    Converge {
        #[arg(long, value_name = "M,N")]
        measure: String,
        #[arg(long)]
        exclude: usize,
        #[arg(long, default_value = "5..20")]
        n_range: String,
        #[command(flatten)]
        common: Common,
    },
    /// Replay a stored run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Target {
    #[arg(long, value_name = "M,N")]
    pub measure: String,
    /// N, L, fock, gauss or stellar.
    #[arg(long, default_value = "fock")]
    pub hierarchy: String,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value = DEFAULT_LAMBDA_GRID)]
    pub lambda_grid: String,
    #[arg(long, default_value = DEFAULT_P_GRID)]
    pub p_grid: String,
    #[arg(long, default_value = DEFAULT_LAMBDA2_GRID)]
    pub lambda2_grid: String,
    #[arg(long, default_value = DEFAULT_PE_GRID)]
    pub pe_grid: String,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = SearchConfig::default().dim_report)]
    pub dim: usize,
    #[arg(long, default_value_t = SearchConfig::default().starts)]
    pub starts: usize,
    #[arg(long, default_value_t = SearchConfig::default().screen)]
    pub screen: usize,
    #[arg(long, default_value_t = SearchConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = SearchConfig::default().xi_max)]
    pub xi_max: f64,
    #[arg(long, default_value_t = SearchConfig::default().alpha_max)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = SearchConfig::default().validation_samples)]
    pub validation_samples: usize,
    /// Evaluate every sweep subspace.
    #[arg(long)]
    pub strict: bool,
    /// Search complex squeezing and displacement from the start.
    #[arg(long)]
    pub complex_search: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write the run configuration here, for `qng run --config`.
    #[arg(long)]
    pub save_config: Option<PathBuf>,
}

impl Common {
    fn search(&self) -> SearchConfig {
        SearchConfig {
            dim_report: self.dim,
            starts: self.starts,
            screen: self.screen,
            seed: self.seed,
            xi_max: self.xi_max,
            alpha_max: self.alpha_max,
            validation_samples: self.validation_samples,
            strict: self.strict,
            complex_search: self.complex_search,
            ..SearchConfig::default()
        }
    }

    fn config(&self, command: Command) -> RunConfig {
        RunConfig {
            search: self.search(),
            command,
            format: self.format,
            out: self.out.clone(),
            cache_dir: self.cache_dir.clone(),
            use_cache: !self.no_cache,
            threads: self.threads,
        }
    }
}

impl GridArgs {
    fn grids(&self) -> Result<Grids> {
        Ok(Grids {
            lambda: parse_grid(&self.lambda_grid)?,
            p: parse_grid(&self.p_grid)?,
            lambda2: parse_grid(&self.lambda2_grid)?,
            pe: parse_grid(&self.pe_grid)?,
        })
    }
}

fn measure(spec: &str) -> Result<CoherenceId> {
    let (m, n) = parse_pair(spec)?;
    CoherenceId::new(m, n).map_err(|e| CliError::Usage(e.to_string()))
}

/// Run configuration for the parsed command line, plus the path to save it
/// to if requested.
pub fn to_config(cli: Cli) -> Result<(RunConfig, Option<PathBuf>)> {
    let (cfg, save) = match cli.command {
        Sub::Thresholds {
            target,
            orders,
            common,
        } => {
            let family = Family::parse(&target.hierarchy)?;
            let orders = if family.is_ordered() {
                parse_range(&orders)?
            } else {
                vec![0]
            };
            let cmd = Command::Thresholds {
                id: measure(&target.measure)?,
                family,
                orders,
            };
            (common.config(cmd), common.save_config.clone())
        }
        Sub::Curve {
            target,
            order,
            observable,
            grids,
            common,
        } => {
            let family = Family::parse(&target.hierarchy)?;
            let observables = observable
                .split(',')
                .map(Observable::parse)
                .collect::<Result<Vec<_>>>()?;
            let cmd = Command::Curve {
                id: measure(&target.measure)?,
                spec: family.spec(if family.is_ordered() { order } else { 0 })?,
                observables,
                grids: grids.grids()?,
            };
            (common.config(cmd), common.save_config.clone())
        }
        Sub::Depth {
            measure: m,
            threshold,
            hierarchy,
            orders,
            boundary_sweep,
            allow_nonperturbative,
            transmission_reading,
            common,
        } => {
            let id = measure(&m)?;
            let target = match (threshold, hierarchy) {
                (Some(t), _) => DepthTarget::Threshold(t),
                (None, Some(h)) => {
                    let family = Family::parse(&h)?;
                    let orders = match (family.is_ordered(), orders) {
                        (true, Some(o)) => parse_range(&o)?,
                        (true, None) => family.beatable_orders(id),
                        (false, _) => vec![0],
                    };
                    DepthTarget::Hierarchy { family, orders }
                }
                (None, None) => {
                    return Err(CliError::Usage(
                        "depth needs --threshold or --hierarchy".into(),
                    ))
                }
            };
            let depth = DepthConfig {
                reading: if transmission_reading {
                    LossReading::Transmission
                } else {
                    LossReading::LossProbability
                },
                allow_nonperturbative,
                ..DepthConfig::default()
            };
            let cmd = Command::Depth {
                id,
                target,
                boundary_sweep: boundary_sweep.as_deref().map(parse_grid).transpose()?,
                depth,
            };
            (common.config(cmd), common.save_config.clone())
        }
        Sub::Certify {
            measure: m,
            state,
            c,
            pm,
            pn,
            pe,
            hierarchy,
            orders,
            grids,
            common,
        } => {
            let input = match (state, c) {
                (Some(path), _) => CertifyInput::State { path },
                (None, Some(c)) => CertifyInput::Measured { c, pm, pn, pe },
                (None, None) => return Err(CliError::Usage("certify needs --state or --c".into())),
            };
            if pe.is_some() && pn.is_none() {
                return Err(CliError::Usage("--pe needs --pn".into()));
            }
            let cmd = Command::Certify {
                id: measure(&m)?,
                input,
                families: hierarchy
                    .split(',')
                    .map(|h| Family::parse(h.trim()))
                    .collect::<Result<_>>()?,
                orders: orders.as_deref().map(parse_range).transpose()?,
                grids: grids.grids()?,
            };
            (common.config(cmd), common.save_config.clone())
        }
        Sub::Converge {
            measure: m,
            exclude,
            n_range,
            common,
        } => {
            let cmd = Command::Converge {
                id: measure(&m)?,
                excluded: exclude,
                n_range: parse_range(&n_range)?,
            };
            (common.config(cmd), common.save_config.clone())
        }
        Sub::Run { config, out } => {
            let text = fs::read_to_string(&config).map_err(|e| CliError::io(&config, e))?;
            let mut cfg: RunConfig = serde_json::from_str(&text)?;
            if out.is_some() {
                cfg.out = out;
            }
            (cfg, None)
        }
    };
    Ok((cfg, save))
}
