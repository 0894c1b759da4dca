//! Flags merged with the optional config file and defaults.

use std::path::PathBuf;
use std::str::FromStr;

use bethe_core::inference::{BpOptions, MessageInit, Restarts};
use bethe_core::learning::{LearnOptions, StepSchedule, ThetaGrid};

use crate::config::{Config, ConfigError};
use crate::{CliError, CommonArgs};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub graph: Option<String>,
    pub homogeneous: Option<(f64, f64)>,
    pub marginals: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub resolution: Option<f64>,
    pub restarts: usize,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub match_tol: f64,
    pub out: Option<PathBuf>,
    pub exact: bool,
    pub empirical: bool,
    pub all_bounds: bool,
    pub learn_iter: usize,
    pub step0: f64,
    pub schedule: StepSchedule,
    pub theta_resolution: f64,
    pub h_range: (f64, f64),
    pub j_range: (f64, f64),
}

fn pair(key: &str, s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("{key} must be two comma-separated numbers, got `{s}`"))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("{key}: `{v}` is not a number"))
    };
    Ok((num(a)?, num(b)?))
}

fn schedule(s: &str) -> Result<StepSchedule, String> {
    match s {
        "constant" => Ok(StepSchedule::Constant),
        "inv_sqrt" | "inv-sqrt" => Ok(StepSchedule::InvSqrt),
        _ => Err(format!("schedule must be constant or inv_sqrt, got `{s}`")),
    }
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Settings, CliError> {
        let cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::input("reading config", format!("{}: {e}", path.display())))?;
                Config::parse(&text).map_err(|e| CliError::input("reading config", e))?
            }
            None => Config::default(),
        };
        let c = |e: ConfigError| CliError::input("reading config", e);
        fn pick<T: FromStr>(flag: Option<T>, cfg: &Config, key: &str) -> Result<Option<T>, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            match flag {
                Some(v) => Ok(Some(v)),
                None => cfg.get(key),
            }
        }
        let text = |flag: &Option<String>, key: &str| flag.clone().or_else(|| cfg.raw(key).map(str::to_string));
        let path = |flag: &Option<PathBuf>, key: &str| flag.clone().or_else(|| cfg.raw(key).map(PathBuf::from));
        fn bad(stage: &'static str) -> impl Fn(String) -> CliError {
            move |m| CliError::input(stage, m)
        }

        let homogeneous = text(&args.homogeneous, "homogeneous")
            .map(|s| pair("homogeneous", &s))
            .transpose()
            .map_err(bad("parsing --homogeneous"))?;
        let h_range = text(&args.h_range, "h-range")
            .map(|s| pair("h-range", &s))
            .transpose()
            .map_err(bad("parsing --h-range"))?
            .unwrap_or((-1.0, 1.0));
        let j_range = text(&args.j_range, "j-range")
            .map(|s| pair("j-range", &s))
            .transpose()
            .map_err(bad("parsing --j-range"))?
            .unwrap_or((0.0, 1.5));
        let schedule = text(&args.schedule, "schedule")
            .map(|s| schedule(&s))
            .transpose()
            .map_err(bad("parsing --schedule"))?
            .unwrap_or(StepSchedule::InvSqrt);

        Ok(Settings {
            graph: text(&args.graph, "graph"),
            homogeneous,
            marginals: path(&args.marginals, "marginals"),
            model: path(&args.model, "model"),
            resolution: pick(args.resolution, &cfg, "resolution").map_err(c)?,
            restarts: pick(args.restarts, &cfg, "restarts").map_err(c)?.unwrap_or(20),
            damping: pick(args.damping, &cfg, "damping").map_err(c)?.unwrap_or(0.5),
            tol: pick(args.tol, &cfg, "tol").map_err(c)?.unwrap_or(1e-10),
            max_iter: pick(args.max_iter, &cfg, "max-iter").map_err(c)?.unwrap_or(10_000),
            seed: pick(args.seed, &cfg, "seed").map_err(c)?.unwrap_or(0),
            match_tol: pick(args.match_tol, &cfg, "match-tol").map_err(c)?.unwrap_or(0.01),
            out: path(&args.out, "out"),
            exact: args.exact || cfg.flag("exact").map_err(c)?,
            empirical: args.empirical || cfg.flag("empirical").map_err(c)?,
            all_bounds: args.all_bounds || cfg.flag("all-bounds").map_err(c)?,
            learn_iter: pick(args.learn_iter, &cfg, "learn-iter").map_err(c)?.unwrap_or(500),
            step0: pick(args.step0, &cfg, "step0").map_err(c)?.unwrap_or(0.1),
            schedule,
            theta_resolution: pick(args.theta_resolution, &cfg, "theta-resolution")
                .map_err(c)?
                .unwrap_or(0.01),
            h_range,
            j_range,
        })
    }

    pub fn bp(&self) -> BpOptions {
        BpOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            damping: self.damping,
            init: MessageInit::Uniform,
        }
    }

    pub fn restart_schedule(&self) -> Restarts {
        Restarts {
            count: self.restarts,
            seed: self.seed,
            ..Restarts::default()
        }
    }

    pub fn learn(&self) -> LearnOptions {
        LearnOptions {
            step0: self.step0,
            schedule: self.schedule,
            max_iter: self.learn_iter,
            match_tol: self.match_tol,
            bp: self.bp(),
            restarts: self.restart_schedule(),
            ..LearnOptions::default()
        }
    }

    pub fn theta_grid(&self) -> ThetaGrid {
        ThetaGrid {
            h_min: self.h_range.0,
            h_max: self.h_range.1,
            j_min: self.j_range.0,
            j_max: self.j_range.1,
            resolution: self.theta_resolution,
        }
    }

    /// `# key=value` lines recorded at the top of every output.
    pub fn metadata(&self, command: &str) -> Vec<(String, String)> {
        let mut m = vec![
            ("command".to_string(), command.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("restarts".to_string(), self.restarts.to_string()),
            ("damping".to_string(), self.damping.to_string()),
            ("tol".to_string(), format!("{:e}", self.tol)),
            ("max_iter".to_string(), self.max_iter.to_string()),
            ("match_tol".to_string(), self.match_tol.to_string()),
        ];
        if let Some(g) = &self.graph {
            m.insert(1, ("graph".to_string(), g.clone()));
        }
        m
    }
}
