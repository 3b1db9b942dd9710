//! Flat `key = value` configuration with command-line overrides.
//!
//! Precedence, lowest first: built-in defaults, the config file, the
//! `FOLDWAVE_OUT_DIR` environment variable (output directory only), then
//! `--key value` arguments.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use foldwave_core::continuation::{BtMode, ContinuationSettings, ParamId};
use foldwave_core::simulation::SimulationSettings;
use foldwave_core::{BeamFoundationParams, QuadraticForm, SineBranch};

use crate::error::{CliError, CliResult};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "FOLDWAVE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Beam,
    Surrogate,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Beam => "beam",
            SystemKind::Surrogate => "surrogate",
        }
    }
}

impl FromStr for SystemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "beam" => Ok(SystemKind::Beam),
            "surrogate" => Ok(SystemKind::Surrogate),
            other => Err(format!("unknown system `{other}` (expected beam or surrogate)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConfig {
    pub forcing: f64,
    pub linear: f64,
    pub quadratic: f64,
    pub gamma: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            forcing: 0.0,
            linear: 0.0,
            quadratic: 0.0,
            gamma: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: BeamFoundationParams,
    pub sim: SimulationSettings,
    pub t_start: f64,
    pub t_end: f64,
    pub z1_0: f64,
    pub z2_0: f64,
    /// `None` selects the scale-aware default.
    pub burst_window: Option<f64>,
    pub amp_threshold: Option<f64>,

    pub d_points: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub branch: SineBranch,
    /// `None` lets the well count consider every equilibrium.
    pub well_range: Option<(f64, f64)>,

    pub system: SystemKind,
    pub surrogate: SurrogateConfig,
    pub p1: Option<ParamId>,
    pub p2: Option<ParamId>,
    pub p1_range: Option<(f64, f64)>,
    pub p2_range: Option<(f64, f64)>,
    /// Slow value used when `d` is not one of the continued parameters.
    pub d: f64,
    pub grid_x: usize,
    pub grid_y: usize,
    pub cont: ContinuationSettings,
    pub bt_mode: BtMode,
    pub max_curves: usize,

    pub nodes: usize,
    pub coeff_samples: usize,
    pub seed: u64,

    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: BeamFoundationParams::default(),
            sim: SimulationSettings::default(),
            t_start: 0.0,
            t_end: 2000.0,
            z1_0: 0.0,
            z2_0: 0.0,
            burst_window: None,
            amp_threshold: None,
            d_points: 2001,
            d_min: -1.0,
            d_max: 1.0,
            branch: SineBranch::Upper,
            well_range: None,
            system: SystemKind::Beam,
            surrogate: SurrogateConfig::default(),
            p1: None,
            p2: None,
            p1_range: None,
            p2_range: None,
            d: 1.0,
            grid_x: 500,
            grid_y: 500,
            cont: ContinuationSettings::default(),
            bt_mode: BtMode::Fixed,
            max_curves: 16,
            nodes: 64,
            coeff_samples: 64,
            seed: 20_240_601,
            out_dir: PathBuf::from("foldwave-out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse `{value}` for `{key}`")))
}

fn parse_optional(key: &str, value: &str) -> CliResult<Option<f64>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn set_lo(slot: &mut Option<(f64, f64)>, v: f64) {
    let hi = slot.map_or(f64::NAN, |r| r.1);
    *slot = Some((v, hi));
}

fn set_hi(slot: &mut Option<(f64, f64)>, v: f64) {
    let lo = slot.map_or(f64::NAN, |r| r.0);
    *slot = Some((lo, v));
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| x.to_string())
}

fn fmt_range(r: Option<(f64, f64)>, which: usize) -> String {
    r.map_or_else(|| "auto".to_string(), |r| if which == 0 { r.0 } else { r.1 }.to_string())
}

/// Default scan range of a continuation parameter.
pub fn default_range(id: ParamId) -> (f64, f64) {
    match id {
        ParamId::D => (-1.0, 1.0),
        ParamId::Sigma => (-200.0, 200.0),
        ParamId::Gamma => (1.0, 300.0),
        ParamId::Kappa => (0.05, 3.0),
        ParamId::H0 => (1e-3, 10.0),
        ParamId::Xi => (0.0, 1.0),
        ParamId::Forcing => (-3.0, 3.0),
        ParamId::Linear => (-4.0, 1.0),
        ParamId::Quadratic => (-2.0, 2.0),
    }
}

impl RunConfig {
    /// Sets one key. Keys are the field names used in config files.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key {
            "xi" => self.params.xi = parse(key, v)?,
            "sigma" => self.params.sigma = parse(key, v)?,
            "gamma" => self.params.gamma = parse(key, v)?,
            "kappa" => self.params.kappa = parse(key, v)?,
            "h0" => self.params.h0 = parse(key, v)?,
            "omega" => self.params.omega = parse(key, v)?,
            "kappa_exclusion" => self.params.kappa_exclusion = parse(key, v)?,
            "quadratic_form" => {
                self.params.quadratic_form =
                    QuadraticForm::from_str(v).map_err(|e| CliError::Config(e.to_string()))?
            }

            "t_start" => self.t_start = parse(key, v)?,
            "t_end" => self.t_end = parse(key, v)?,
            "z1_0" => self.z1_0 = parse(key, v)?,
            "z2_0" => self.z2_0 = parse(key, v)?,
            "abs_tol" => self.sim.abs_tol = parse(key, v)?,
            "rel_tol" => self.sim.rel_tol = parse(key, v)?,
            "initial_step" => self.sim.initial_step = parse(key, v)?,
            "max_step" => self.sim.max_step = parse(key, v)?,
            "sample_dt" => self.sim.sample_dt = parse(key, v)?,
            "max_steps" => self.sim.max_steps = parse(key, v)?,
            "burst_window" => self.burst_window = parse_optional(key, v)?,
            "amp_threshold" => self.amp_threshold = parse_optional(key, v)?,

            "d_points" => self.d_points = parse(key, v)?,
            "d_min" => self.d_min = parse(key, v)?,
            "d_max" => self.d_max = parse(key, v)?,
            "branch" => {
                self.branch = match v {
                    "upper" | "+1" | "1" => SineBranch::Upper,
                    "lower" | "-1" => SineBranch::Lower,
                    _ => return Err(CliError::Config(format!("unknown branch `{v}` (expected upper or lower)"))),
                }
            }
            "well_z_min" => match parse_optional(key, v)? {
                Some(x) => set_lo(&mut self.well_range, x),
                None => self.well_range = None,
            },
            "well_z_max" => match parse_optional(key, v)? {
                Some(x) => set_hi(&mut self.well_range, x),
                None => self.well_range = None,
            },

            "system" => self.system = v.parse().map_err(CliError::Config)?,
            "surrogate_forcing" => self.surrogate.forcing = parse(key, v)?,
            "surrogate_linear" => self.surrogate.linear = parse(key, v)?,
            "surrogate_quadratic" => self.surrogate.quadratic = parse(key, v)?,
            "surrogate_gamma" => self.surrogate.gamma = parse(key, v)?,
            "p1" => self.p1 = Some(v.parse().map_err(|e: foldwave_core::Error| CliError::Config(e.to_string()))?),
            "p2" => self.p2 = Some(v.parse().map_err(|e: foldwave_core::Error| CliError::Config(e.to_string()))?),
            "p1_min" => set_lo(&mut self.p1_range, parse(key, v)?),
            "p1_max" => set_hi(&mut self.p1_range, parse(key, v)?),
            "p2_min" => set_lo(&mut self.p2_range, parse(key, v)?),
            "p2_max" => set_hi(&mut self.p2_range, parse(key, v)?),
            "d" => self.d = parse(key, v)?,
            "grid" => {
                let n = parse(key, v)?;
                self.grid_x = n;
                self.grid_y = n;
            }
            "grid_x" => self.grid_x = parse(key, v)?,
            "grid_y" => self.grid_y = parse(key, v)?,
            "cont_initial_step" => self.cont.initial_step = parse(key, v)?,
            "cont_min_step" => self.cont.min_step = parse(key, v)?,
            "cont_max_step" => self.cont.max_step = parse(key, v)?,
            "newton_tol" => self.cont.newton_tol = parse(key, v)?,
            "newton_max_iter" => self.cont.max_newton_iter = parse(key, v)?,
            "max_points" => self.cont.max_points = parse(key, v)?,
            "step_grow" => self.cont.grow = parse(key, v)?,
            "step_shrink" => self.cont.shrink = parse(key, v)?,
            "z_bound" => self.cont.z_bound = parse(key, v)?,
            "bt_mode" => {
                self.bt_mode = match v {
                    "fixed" => BtMode::Fixed,
                    "freed" => BtMode::Freed,
                    _ => return Err(CliError::Config(format!("unknown bt_mode `{v}` (expected fixed or freed)"))),
                }
            }
            "max_curves" => self.max_curves = parse(key, v)?,

            "nodes" => self.nodes = parse(key, v)?,
            "coeff_samples" => self.coeff_samples = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", no + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {}", no + 1, strip(&e))))?;
        }
        Ok(())
    }

    /// Applies `--key value` or `--key=value` pairs.
    pub fn apply_overrides(&mut self, args: &[String]) -> CliResult<()> {
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let key = arg
                .strip_prefix("--")
                .ok_or_else(|| CliError::Config(format!("expected `--key value`, found `{arg}`")))?;
            if let Some((k, v)) = key.split_once('=') {
                self.set(k, v)?;
            } else {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Config(format!("missing value for `--{key}`")))?;
                self.set(key, v)?;
            }
        }
        Ok(())
    }

    /// Builds the configuration from an optional file, the environment and
    /// overrides.
    pub fn load(path: Option<&Path>, env_out_dir: Option<String>, overrides: &[String]) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Some(dir) = env_out_dir.filter(|d| !d.is_empty()) {
            cfg.out_dir = PathBuf::from(dir);
        }
        cfg.apply_overrides(overrides)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return bad(format!("t_span [{}, {}] must be finite and non-empty", self.t_start, self.t_end));
        }
        let s = &self.sim;
        if !(s.abs_tol > 0.0 && s.rel_tol > 0.0 && s.initial_step > 0.0 && s.max_step > 0.0 && s.sample_dt > 0.0) {
            return bad("tolerances, steps and sample_dt must be positive".into());
        }
        if !(self.z1_0.is_finite() && self.z2_0.is_finite()) {
            return bad("initial conditions must be finite".into());
        }
        if self.burst_window.is_some_and(|w| !(w > 0.0 && w.is_finite())) {
            return bad("burst_window must be positive".into());
        }
        if self.amp_threshold.is_some_and(|a| !(a >= 0.0 && a.is_finite())) {
            return bad("amp_threshold must be non-negative".into());
        }
        if self.d_points < 2 || !(self.d_min >= -1.0 && self.d_max <= 1.0 && self.d_min < self.d_max) {
            return bad("d grid needs at least two points and -1 <= d_min < d_max <= 1".into());
        }
        if let Some((lo, hi)) = self.well_range {
            if !(lo < hi) {
                return bad("well_z_min must be below well_z_max".into());
            }
        }
        if !(self.d.abs() <= 1.0) {
            return bad(format!("d = {} lies outside [-1, 1]", self.d));
        }
        for (name, r) in [("p1", self.p1_range), ("p2", self.p2_range)] {
            if let Some((lo, hi)) = r {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("{name} range must set both ends with min < max"));
                }
            }
        }
        if self.grid_x < 2 || self.grid_y < 2 {
            return bad("grids need at least two nodes per axis".into());
        }
        if self.nodes < 8 || self.coeff_samples < 8 {
            return bad("nodes and coeff_samples must be at least 8".into());
        }
        if self.max_curves == 0 {
            return bad("max_curves must be positive".into());
        }
        self.cont.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.params.validate().map_err(|e| match e {
            foldwave_core::Error::SingularKappa { .. } => CliError::Model(e),
            other => CliError::Config(other.to_string()),
        })?;
        Ok(())
    }

    /// The continued parameter pair, defaulting by system.
    pub fn pair(&self) -> (ParamId, ParamId) {
        let (a, b) = match self.system {
            SystemKind::Beam => (ParamId::D, ParamId::Kappa),
            SystemKind::Surrogate => (ParamId::Linear, ParamId::Forcing),
        };
        (self.p1.unwrap_or(a), self.p2.unwrap_or(b))
    }

    pub fn ranges(&self) -> [(f64, f64); 2] {
        let (a, b) = self.pair();
        [self.p1_range.unwrap_or(default_range(a)), self.p2_range.unwrap_or(default_range(b))]
    }

    pub fn t_span(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    /// Every setting as `key=value`, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        let (pair, ranges) = (self.pair(), self.ranges());
        vec![
            ("xi", p.xi.to_string()),
            ("sigma", p.sigma.to_string()),
            ("gamma", p.gamma.to_string()),
            ("kappa", p.kappa.to_string()),
            ("h0", p.h0.to_string()),
            ("omega", p.omega.to_string()),
            ("kappa_exclusion", p.kappa_exclusion.to_string()),
            ("quadratic_form", p.quadratic_form.name().to_string()),
            ("t_start", self.t_start.to_string()),
            ("t_end", self.t_end.to_string()),
            ("z1_0", self.z1_0.to_string()),
            ("z2_0", self.z2_0.to_string()),
            ("abs_tol", self.sim.abs_tol.to_string()),
            ("rel_tol", self.sim.rel_tol.to_string()),
            ("initial_step", self.sim.initial_step.to_string()),
            ("max_step", self.sim.max_step.to_string()),
            ("sample_dt", self.sim.sample_dt.to_string()),
            ("max_steps", self.sim.max_steps.to_string()),
            ("burst_window", fmt_opt(self.burst_window)),
            ("amp_threshold", fmt_opt(self.amp_threshold)),
            ("d_points", self.d_points.to_string()),
            ("d_min", self.d_min.to_string()),
            ("d_max", self.d_max.to_string()),
            (
                "branch",
                match self.branch {
                    SineBranch::Upper => "upper",
                    SineBranch::Lower => "lower",
                }
                .to_string(),
            ),
            ("well_z_min", fmt_range(self.well_range, 0)),
            ("well_z_max", fmt_range(self.well_range, 1)),
            ("system", self.system.name().to_string()),
            ("surrogate_forcing", self.surrogate.forcing.to_string()),
            ("surrogate_linear", self.surrogate.linear.to_string()),
            ("surrogate_quadratic", self.surrogate.quadratic.to_string()),
            ("surrogate_gamma", self.surrogate.gamma.to_string()),
            ("p1", pair.0.name().to_string()),
            ("p2", pair.1.name().to_string()),
            ("p1_min", ranges[0].0.to_string()),
            ("p1_max", ranges[0].1.to_string()),
            ("p2_min", ranges[1].0.to_string()),
            ("p2_max", ranges[1].1.to_string()),
            ("d", self.d.to_string()),
            ("grid_x", self.grid_x.to_string()),
            ("grid_y", self.grid_y.to_string()),
            ("cont_initial_step", self.cont.initial_step.to_string()),
            ("cont_min_step", self.cont.min_step.to_string()),
            ("cont_max_step", self.cont.max_step.to_string()),
            ("newton_tol", self.cont.newton_tol.to_string()),
            ("newton_max_iter", self.cont.max_newton_iter.to_string()),
            ("max_points", self.cont.max_points.to_string()),
            ("step_grow", self.cont.grow.to_string()),
            ("step_shrink", self.cont.shrink.to_string()),
            ("z_bound", self.cont.z_bound.to_string()),
            ("bt_mode", self.bt_mode.name().to_string()),
            ("max_curves", self.max_curves.to_string()),
            ("nodes", self.nodes.to_string()),
            ("coeff_samples", self.coeff_samples.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}

fn strip(e: &CliError) -> String {
    match e {
        CliError::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\nsigma = 12\ngamma=1.5 # trailing\n\n").unwrap();
        assert_eq!(cfg.params.sigma, 12.0);
        assert_eq!(cfg.params.gamma, 1.5);
        cfg.apply_overrides(&["--sigma".into(), "20".into(), "--h0=0".into()]).unwrap();
        assert_eq!(cfg.params.sigma, 20.0);
        assert_eq!(cfg.params.h0, 0.0);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_text("nonsense = 1").is_err());
        assert!(cfg.apply_text("sigma").is_err());
        assert!(cfg.apply_text("sigma = abc").is_err());
        assert!(cfg.apply_overrides(&["sigma".into(), "1".into()]).is_err());
        assert!(cfg.apply_overrides(&["--sigma".into()]).is_err());
    }

    #[test]
    fn defaults_validate_and_degenerate_span_does_not() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let mut bad = cfg.clone();
        bad.t_end = bad.t_start;
        assert_eq!(bad.validate().unwrap_err().exit_code(), 2);
        let mut singular = cfg;
        singular.params.kappa = std::f64::consts::PI;
        assert_eq!(singular.validate().unwrap_err().exit_code(), 4);
    }

    #[test]
    fn entries_round_trip_through_text() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("sigma = -120\np1 = sigma\np2 = gamma\nbt_mode = freed").unwrap();
        let text: String = cfg.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let mut back = RunConfig::default();
        back.apply_text(&text).unwrap();
        assert_eq!(back.entries(), cfg.entries());
    }

    #[test]
    fn pair_defaults_follow_system() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.pair(), (ParamId::D, ParamId::Kappa));
        cfg.set("system", "surrogate").unwrap();
        assert_eq!(cfg.pair(), (ParamId::Linear, ParamId::Forcing));
        assert_eq!(cfg.ranges(), [(-4.0, 1.0), (-3.0, 3.0)]);
    }
}
