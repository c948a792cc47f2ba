//! Run configuration: defaults, then a TOML file, then `MOYAL_*`
//! environment variables, then flags.

use std::path::{Path, PathBuf};

use clap::Args;
use moyal_core::fock::{self, FockContext};
use moyal_core::spectral::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub trunc_dim: usize,
    pub theta: f64,
    pub tol: f64,
    pub seed: u64,
    pub iterations: usize,
    pub restarts: usize,
    pub leakage_bound: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        RunConfig {
            trunc_dim: 64,
            theta: 1.0,
            tol: 1e-10,
            seed: solver.seed,
            iterations: solver.iterations,
            restarts: solver.restarts,
            leakage_bound: fock::DEFAULT_LEAKAGE_BOUND,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Flags shared by every subcommand. Each one also reads `MOYAL_<NAME>`.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with any of the keys below
    #[arg(long, global = true, env = "MOYAL_CONFIG")]
    pub config: Option<PathBuf>,
    /// Fock truncation N
    #[arg(long, global = true, env = "MOYAL_TRUNC_DIM")]
    pub trunc_dim: Option<usize>,
    #[arg(long, global = true, env = "MOYAL_THETA")]
    pub theta: Option<f64>,
    #[arg(long, global = true, env = "MOYAL_TOL")]
    pub tol: Option<f64>,
    /// base seed of the solver restarts
    #[arg(long, global = true, env = "MOYAL_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "MOYAL_ITERATIONS")]
    pub iterations: Option<usize>,
    #[arg(long, global = true, env = "MOYAL_RESTARTS")]
    pub restarts: Option<usize>,
    #[arg(long, global = true, env = "MOYAL_LEAKAGE_BOUND")]
    pub leakage_bound: Option<f64>,
    #[arg(long, global = true, env = "MOYAL_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Applies the layers in order of increasing precedence. Flags and
    /// environment variables arrive merged through clap, flag first.
    pub fn resolve(args: &ConfigArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => Self::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = args.trunc_dim {
            cfg.trunc_dim = v;
        }
        if let Some(v) = args.theta {
            cfg.theta = v;
        }
        if let Some(v) = args.tol {
            cfg.tol = v;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if let Some(v) = args.iterations {
            cfg.iterations = v;
        }
        if let Some(v) = args.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = args.leakage_bound {
            cfg.leakage_bound = v;
        }
        if let Some(v) = &args.out_dir {
            cfg.out_dir = v.clone();
        }
        Ok(cfg)
    }

    pub fn context(&self) -> Result<FockContext, CliError> {
        Ok(fock::make_context(self.trunc_dim, self.theta, self.tol)?.with_leakage_bound(self.leakage_bound)?)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            iterations: self.iterations,
            restarts: self.restarts,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }

    /// `(key, value)` pairs in a fixed order, as echoed into output headers.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("trunc_dim", self.trunc_dim.to_string()),
            ("theta", crate::output::num(self.theta)),
            ("tol", crate::output::num(self.tol)),
            ("seed", self.seed.to_string()),
            ("iterations", self.iterations.to_string()),
            ("restarts", self.restarts.to_string()),
            ("leakage_bound", crate::output::num(self.leakage_bound)),
            ("out_dir", self.out_dir.display().to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let dir = std::env::temp_dir().join(format!("moyal-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "trunc_dim = 24\ntheta = 2.5\n").unwrap();
        let args = ConfigArgs { config: Some(path.clone()), theta: Some(0.5), ..ConfigArgs::default() };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.trunc_dim, 24);
        assert_eq!(cfg.theta, 0.5);
        assert_eq!(cfg.iterations, 2000);
        std::fs::write(&path, "trunc = 24\n").unwrap();
        assert!(matches!(RunConfig::from_file(&path), Err(CliError::Usage(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
