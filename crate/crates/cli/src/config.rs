//! Run configuration, built-in scenarios and JSON override merging.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use scalarfield::coeffs::{Coefficient, CoefficientField, Condition, Profile, Table};
use scalarfield::evolve::{DataFamily, EvolveSettings, InitialData, Parity};
use scalarfield::greensolve::SteadyOptions;
use scalarfield::grid::Grid;
use scalarfield::potentials::Potential;
use scalarfield::virial::Nonlinearity;

pub const SCENARIOS: [&str; 3] = ["paper-example-vacuum", "odd-near-2pi", "flat"];

/// A coefficient given in closed form or as a two-column `y,value` CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefSource {
    Csv { csv: PathBuf },
    Profile(Profile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub b: CoefSource,
    pub c: CoefSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_width: f64,
    pub intervals: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt_factor: f64,
    pub t_final: f64,
    pub diag_every: f64,
    pub snap_every: Option<f64>,
    pub snap_stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpongeSpec {
    pub enabled: bool,
    pub width: f64,
    pub gamma_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub potential: Potential,
    pub coefficients: CoefficientSpec,
    pub xi: f64,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub lambda: f64,
    pub data: InitialData,
    pub sponge: SpongeSpec,
    pub intervals: Vec<(f64, f64)>,
    pub nonlinearity: Nonlinearity,
    pub conservation_mode: bool,
    /// Admissibility checks run by `check`.
    pub checks: Vec<Condition>,
    pub steady: SteadyOptions,
    /// Rate `k` for the weighted decay bound of the steady state.
    pub decay_k: Option<f64>,
    pub seed: u64,
    pub parallel: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    /// The flat control: `b = c = 0`, sine-Gordon about 0.
    fn default() -> Self {
        RunConfig {
            scenario: None,
            potential: Potential::SineGordon,
            coefficients: CoefficientSpec {
                b: CoefSource::Profile(Profile::Zero),
                c: CoefSource::Profile(Profile::Zero),
            },
            xi: 0.0,
            grid: GridSpec {
                half_width: 80.0,
                intervals: 16000,
            },
            time: TimeSpec {
                dt_factor: 0.4,
                t_final: 60.0,
                diag_every: 0.1,
                snap_every: None,
                snap_stride: 10,
            },
            lambda: 13.0,
            data: InitialData {
                family: DataFamily::RandomSpline { bumps: 4 },
                eps: 0.01,
                parity: Parity::Any,
            },
            sponge: SpongeSpec {
                enabled: true,
                width: 0.2,
                gamma_max: 1.0,
            },
            intervals: vec![(-5.0, 5.0)],
            nonlinearity: Nonlinearity::Full,
            conservation_mode: false,
            checks: vec![],
            steady: SteadyOptions::default(),
            decay_k: None,
            seed: 1,
            parallel: true,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn scenario(id: &str) -> Result<Self> {
        let mut cfg = RunConfig {
            scenario: Some(id.to_string()),
            ..RunConfig::default()
        };
        match id {
            "flat" => {}
            "paper-example-vacuum" => {
                cfg.coefficients = CoefficientSpec {
                    b: CoefSource::Profile(Profile::LinearCoreDecay {
                        lambda: 13.0,
                        factor: 1.0,
                    }),
                    c: CoefSource::Profile(Profile::DeepSech { lambda: 13.0 }),
                };
                cfg.checks = vec![Condition::VacuumCoercive, Condition::Orbital];
            }
            "odd-near-2pi" => {
                cfg.coefficients = CoefficientSpec {
                    b: CoefSource::Profile(Profile::Zero),
                    c: CoefSource::Profile(Profile::Sech {
                        amp: -0.05,
                        scale: 1.0,
                    }),
                };
                cfg.xi = 2.0 * PI;
                cfg.lambda = 100.0;
                cfg.data.parity = Parity::Odd;
                cfg.checks = vec![Condition::SignConditions, Condition::Orbital, Condition::ExpDecay];
                cfg.decay_k = Some(0.9);
            }
            other => bail!("unknown scenario '{other}' (known: {})", SCENARIOS.join(", ")),
        }
        Ok(cfg)
    }

    /// Resolve a JSON document: start from its `scenario` (or the flat
    /// default) and merge the document over it.
    pub fn from_value(doc: &Value) -> Result<Self> {
        if !doc.is_object() {
            bail!("config must be a JSON object");
        }
        let base = match doc.get("scenario") {
            Some(Value::String(id)) => RunConfig::scenario(id)?,
            Some(Value::Null) | None => RunConfig::default(),
            Some(_) => bail!("scenario must be a string"),
        };
        let mut merged = serde_json::to_value(&base)?;
        merge(&mut merged, doc);
        let cfg: RunConfig = serde_json::from_value(merged).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut cfg = RunConfig::from_value(&doc)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Make CSV paths absolute relative to the config's directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        for src in [&mut self.coefficients.b, &mut self.coefficients.c] {
            if let CoefSource::Csv { csv } = src {
                if csv.is_relative() {
                    *csv = base.join(&*csv);
                }
            }
        }
    }

    /// Apply a JSON override and re-validate.
    pub fn with_override(&self, patch: &Value) -> Result<Self> {
        let mut v = serde_json::to_value(self)?;
        merge(&mut v, patch);
        let cfg: RunConfig = serde_json::from_value(v).context("invalid override")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fin = |name: &str, x: f64| -> Result<()> {
            if x.is_finite() {
                Ok(())
            } else {
                Err(anyhow!("{name} must be finite"))
            }
        };
        fin("xi", self.xi)?;
        self.potential.validate()?;
        self.grid()?;
        let t = &self.time;
        if !(t.dt_factor > 0.0 && t.dt_factor <= 0.4) {
            bail!("time.dt_factor must lie in (0, 0.4]");
        }
        if !(t.t_final > 0.0 && t.t_final.is_finite()) {
            bail!("time.t_final must be positive");
        }
        if !(t.diag_every > 0.0 && t.diag_every.is_finite()) {
            bail!("time.diag_every must be positive");
        }
        if let Some(s) = t.snap_every {
            if !(s > 0.0 && s.is_finite()) {
                bail!("time.snap_every must be positive");
            }
        }
        if t.snap_stride == 0 {
            bail!("time.snap_stride must be at least 1");
        }
        if !(self.lambda > 2.0 && self.lambda.is_finite()) {
            bail!("lambda must exceed 2");
        }
        self.data.validate()?;
        if self.sponge.enabled && !(self.sponge.width > 0.0 && self.sponge.width < 0.5) {
            bail!("sponge.width must lie in (0, 0.5)");
        }
        if !(self.sponge.gamma_max >= 0.0 && self.sponge.gamma_max.is_finite()) {
            bail!("sponge.gamma_max must be non-negative");
        }
        let l = self.grid.half_width;
        for (a, b) in &self.intervals {
            if !(a < b && *a >= -l && *b <= l) {
                bail!("interval [{a}, {b}] must be ordered and inside [-{l}, {l}]");
            }
        }
        let s = &self.steady;
        if !(s.half_width > 0.0 && s.dy > 0.0 && s.tol > 0.0 && s.max_iter > 0) {
            bail!("steady options must be positive");
        }
        if let Some(k) = self.decay_k {
            if !(k > 0.0 && k.is_finite()) {
                bail!("decay_k must be positive");
            }
        }
        for src in [&self.coefficients.b, &self.coefficients.c] {
            if let CoefSource::Profile(p) = src {
                p.validate()?;
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.grid.half_width, self.grid.intervals)?)
    }

    pub fn field(&self) -> Result<CoefficientField> {
        Ok(CoefficientField::new(
            load_coefficient(&self.coefficients.b)?,
            load_coefficient(&self.coefficients.c)?,
        ))
    }

    pub fn exec(&self) -> scalarfield::Exec {
        if self.parallel {
            scalarfield::Exec::Parallel
        } else {
            scalarfield::Exec::Sequential
        }
    }

    pub fn evolve_settings(&self) -> EvolveSettings {
        EvolveSettings {
            t_final: self.time.t_final,
            dt_factor: self.time.dt_factor,
            diag_every: self.time.diag_every,
            snap_every: self.time.snap_every,
            snap_stride: self.time.snap_stride,
            intervals: self.intervals.clone(),
            lambda: self.lambda,
            conservation_mode: self.conservation_mode,
        }
    }
}

fn load_coefficient(src: &CoefSource) -> Result<Coefficient> {
    match src {
        CoefSource::Profile(p) => Ok(Coefficient::Parametric(p.clone())),
        CoefSource::Csv { csv } => {
            let (y, v) = crate::io::read_two_columns(csv)?;
            Ok(Coefficient::Tabulated(Table::new(y, v)?))
        }
    }
}

/// Deep-merge `patch` into `base`. Objects merge key by key, except that
/// objects carrying different `family` tags are replaced outright.
pub fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            let retag = matches!((b.get("family"), p.get("family")), (Some(x), Some(y)) if x != y);
            if retag {
                *b = p.clone();
                return;
            }
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}
