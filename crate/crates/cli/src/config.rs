//! Flat key-value experiment configs with dotted section prefixes:
//!
//! ```text
//! # rate experiment, PME on the unit interval
//! params.m = 2.0
//! params.p = 2.0
//! domain.geometry = interval
//! domain.size = 1.0
//! domain.nodes = 257
//! ```
//!
//! Unknown keys are rejected so typos surface as config errors.

use dnle_core::evolution::SolverControls;
use dnle_core::grid::MIN_RESOLUTION;
use dnle_core::operators::FluxRegularization;
use dnle_core::{classify_regime, Domain, DomainKind, Parameters, Regime};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    Profile,
    Eigen,
    Selfsim,
    Rate,
    Quasilinear,
    Positivity,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Profile => "profile",
            ExperimentKind::Eigen => "eigen",
            ExperimentKind::Selfsim => "selfsim",
            ExperimentKind::Rate => "rate",
            ExperimentKind::Quasilinear => "quasilinear",
            ExperimentKind::Positivity => "positivity",
        }
    }
}

/// A violated validation rule: the key at fault and the broken rule.
#[derive(Debug, Clone)]
pub struct Violation {
    pub key: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.rule)
    }
}

/// Parsed raw config: every value still a string, consumed by typed getters.
#[derive(Debug, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "params.m",
    "params.p",
    "params.dim",
    "domain.geometry",
    "domain.size",
    "domain.dimension",
    "domain.nodes",
    "solver.dt_init",
    "solver.dt_max",
    "solver.dt_growth",
    "solver.inner_tol",
    "solver.max_inner",
    "solver.max_halvings",
    "solver.epsilon",
    "init.kind",
    "init.center",
    "init.width",
    "init.height",
    "init.s",
    "init.path",
    "time.t_end",
    "time.first_output",
    "time.samples",
    "profile.method",
    "profile.tolerance",
    "eigen.tolerance",
    "selfsim.case",
    "selfsim.alpha",
    "selfsim.beta",
    "selfsim.height",
    "selfsim.s",
    "selfsim.r_max",
    "quasilinear.dt",
    "quasilinear.horizon",
    "quasilinear.samples",
    "quasilinear.gap_threshold",
    "positivity.delta",
];

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}`", lineno + 1));
            }
            if entries
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, Violation> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s.parse::<f64>().map(Some).map_err(|_| Violation {
                key: key.into(),
                rule: format!("`{s}` is not a number"),
            }),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, Violation> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_required(&self, key: &str) -> Result<f64, Violation> {
        self.f64_opt(key)?.ok_or_else(|| Violation {
            key: key.into(),
            rule: "required key missing".into(),
        })
    }

    pub fn usize_opt(&self, key: &str) -> Result<Option<usize>, Violation> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s.parse::<usize>().map(Some).map_err(|_| Violation {
                key: key.into(),
                rule: format!("`{s}` is not a nonnegative integer"),
            }),
        }
    }

    /// Equation parameters from the params.* block.
    pub fn parameters(&self) -> Result<Parameters, Violation> {
        let m = self.f64_required("params.m")?;
        let p = self.f64_required("params.p")?;
        let dim = self.usize_opt("params.dim")?.unwrap_or(1) as u32;
        Parameters::new(m, p, dim).map_err(|e| Violation {
            key: "params.m".into(),
            rule: e.to_string(),
        })
    }

    /// Spatial domain from the domain.* block.
    pub fn domain(&self) -> Result<Domain, Violation> {
        let geometry = self.get("domain.geometry").ok_or(Violation {
            key: "domain.geometry".into(),
            rule: "required key missing".into(),
        })?;
        let size = self.f64_required("domain.size")?;
        let nodes = self.usize_opt("domain.nodes")?.ok_or(Violation {
            key: "domain.nodes".into(),
            rule: "required key missing".into(),
        })?;
        if nodes < MIN_RESOLUTION {
            return Err(Violation {
                key: "domain.nodes".into(),
                rule: "resolution below minimum".into(),
            });
        }
        let kind = match geometry {
            "interval" => DomainKind::Interval { length: size },
            "ball" => DomainKind::Ball {
                radius: size,
                // domain.dimension wins; params.dim is the fallback.
                dim: match self.usize_opt("domain.dimension")? {
                    Some(d) => d as u32,
                    None => self.usize_opt("params.dim")?.unwrap_or(1) as u32,
                },
            },
            other => {
                return Err(Violation {
                    key: "domain.geometry".into(),
                    rule: format!("`{other}` is neither `interval` nor `ball`"),
                })
            }
        };
        Domain::build(kind, nodes).map_err(|e| Violation {
            key: "domain.size".into(),
            rule: e.to_string(),
        })
    }

    /// Solver controls with defaults from the parameters.
    pub fn solver_controls(&self, params: &Parameters) -> Result<SolverControls, Violation> {
        let mut c = SolverControls::for_params(params);
        c.dt_init = self.f64_or("solver.dt_init", c.dt_init)?;
        c.dt_max = self.f64_or("solver.dt_max", c.dt_max)?;
        c.dt_growth = self.f64_or("solver.dt_growth", c.dt_growth)?;
        c.inner_tol = self.f64_or("solver.inner_tol", c.inner_tol)?;
        if let Some(n) = self.usize_opt("solver.max_inner")? {
            c.max_inner = n;
        }
        if let Some(n) = self.usize_opt("solver.max_halvings")? {
            c.max_halvings = n;
        }
        if let Some(eps) = self.f64_opt("solver.epsilon")? {
            c.regularization = FluxRegularization::with_epsilon(eps);
        }
        Ok(c)
    }

    /// All violations for the given experiment kind; empty iff runnable.
    pub fn validate(&self, kind: ExperimentKind) -> Vec<Violation> {
        let mut violations = Vec::new();

        let regime = match (self.f64_opt("params.m"), self.f64_opt("params.p")) {
            (Ok(Some(m)), Ok(Some(p))) => match classify_regime(m, p) {
                Ok(r) => Some(r),
                Err(e) => {
                    violations.push(Violation {
                        key: "params.m".into(),
                        rule: e.to_string(),
                    });
                    None
                }
            },
            _ => {
                if self.get("params.m").is_none() {
                    violations.push(Violation {
                        key: "params.m".into(),
                        rule: "required key missing".into(),
                    });
                }
                if self.get("params.p").is_none() {
                    violations.push(Violation {
                        key: "params.p".into(),
                        rule: "required key missing".into(),
                    });
                }
                None
            }
        };

        if kind != ExperimentKind::Selfsim {
            if let Err(v) = self.domain() {
                violations.push(v);
            }
        }

        if let Some(regime) = regime {
            let degenerate_only: &[(ExperimentKind, &str)] = &[
                (ExperimentKind::Rate, "rate requires degenerate regime"),
                (ExperimentKind::Profile, "profile requires degenerate regime"),
                (ExperimentKind::Selfsim, "selfsim requires degenerate regime"),
                (
                    ExperimentKind::Positivity,
                    "positivity requires degenerate regime",
                ),
            ];
            for (k, rule) in degenerate_only {
                if kind == *k && regime != Regime::Degenerate {
                    violations.push(Violation {
                        key: "params.m".into(),
                        rule: (*rule).into(),
                    });
                }
            }
            if kind == ExperimentKind::Quasilinear && regime != Regime::Quasilinear {
                violations.push(Violation {
                    key: "params.m".into(),
                    rule: "quasilinear requires m(p-1) = 1".into(),
                });
            }
            if kind == ExperimentKind::Simulate && regime == Regime::Fast {
                violations.push(Violation {
                    key: "params.m".into(),
                    rule: "the solver refuses the fast-diffusion regime".into(),
                });
            }
        }

        match kind {
            ExperimentKind::Simulate | ExperimentKind::Rate | ExperimentKind::Positivity => {
                if self.get("time.t_end").is_none() {
                    violations.push(Violation {
                        key: "time.t_end".into(),
                        rule: "required key missing".into(),
                    });
                }
                if self.get("init.kind").is_none() {
                    violations.push(Violation {
                        key: "init.kind".into(),
                        rule: "required key missing".into(),
                    });
                }
            }
            ExperimentKind::Selfsim => {
                let has_case = self.get("selfsim.case").is_some();
                let has_beta = self.get("selfsim.beta").is_some();
                if !has_case && !has_beta {
                    violations.push(Violation {
                        key: "selfsim.beta".into(),
                        rule: "either selfsim.case or selfsim.beta is required".into(),
                    });
                }
            }
            _ => {}
        }

        if let Some(kind_str) = self.get("init.kind") {
            if !["bump", "indicator", "eigenmode", "separate_variables", "custom"]
                .contains(&kind_str)
            {
                violations.push(Violation {
                    key: "init.kind".into(),
                    rule: format!("unknown initial-data kind `{kind_str}`"),
                });
            }
            if kind_str == "custom" && self.get("init.path").is_none() {
                violations.push(Violation {
                    key: "init.path".into(),
                    rule: "custom initial data needs a CSV path".into(),
                });
            }
        }

        violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALID_RATE: &str = "\
params.m = 2.0
params.p = 2.0
domain.geometry = interval
domain.size = 1.0
domain.nodes = 129
init.kind = bump
time.t_end = 400.0
";

    #[test]
    fn valid_config_has_no_violations() {
        let cfg = Config::parse(VALID_RATE).unwrap();
        assert!(cfg.validate(ExperimentKind::Rate).is_empty());
    }

    #[test]
    fn fast_regime_rate_is_a_violation() {
        let text = VALID_RATE.replace("params.m = 2.0", "params.m = 0.5");
        let cfg = Config::parse(&text).unwrap();
        let violations = cfg.validate(ExperimentKind::Rate);
        assert!(violations
            .iter()
            .any(|v| v.rule.contains("degenerate regime")));
    }

    #[test]
    fn low_resolution_is_a_violation() {
        let text = VALID_RATE.replace("domain.nodes = 129", "domain.nodes = 4");
        let cfg = Config::parse(&text).unwrap();
        let violations = cfg.validate(ExperimentKind::Rate);
        assert!(violations
            .iter()
            .any(|v| v.rule.contains("resolution below minimum")));
    }

    #[test]
    fn unknown_keys_and_duplicates_are_rejected() {
        assert!(Config::parse("params.q = 1.0\n").is_err());
        assert!(Config::parse("params.m = 1\nparams.m = 2\n").is_err());
        assert!(Config::parse("params.m\n").is_err());
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let cfg = Config::parse("# comment\n\nparams.m = 2.0 # inline\n").unwrap();
        assert_eq!(cfg.get("params.m"), Some("2.0"));
    }

    #[test]
    fn missing_geometry_is_reported_by_key() {
        let text = VALID_RATE.replace("domain.geometry = interval\n", "");
        let cfg = Config::parse(&text).unwrap();
        let violations = cfg.validate(ExperimentKind::Rate);
        assert!(violations.iter().any(|v| v.key == "domain.geometry"));
    }
}
