//! Flat `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `benchmark` | benchmark name | required |
//! | `n` | polynomial degree, 1 to 3 | 1 |
//! | `mode` | `adaptive` or `uniform` | `adaptive` |
//! | `rounds` | uniform refinement rounds | 4 |
//! | `theta`, `rho`, `omega`, `b` | marking and tolerance parameters | 0.5, 0.5, 0.1, 1 |
//! | `eps0` | initial tolerance | `η` on the pre-refined mesh |
//! | `delta0` | pre-refinement threshold for `λ` | 0.1 |
//! | `eps_stop` | final tolerance | none |
//! | `max_outer`, `max_inner` | iteration caps | 10, 50 |
//! | `max_elements` | hard element cap | 2000000 |
//! | `max_dofs` | soft dof cap checked between outer steps | none |
//! | `rel_tol` | CG relative tolerance | 1e-10 |
//! | `quad_element`, `quad_edge`, `quad_energy` | quadrature exactness | `2n+4`, `2n+3`, `2n+6` |
//! | `output_dir` | where `history.csv`, `mesh.state` and `surface.off` go | none |
//! | `off_level` | subdivision level of the OFF export | 0 |
//! | `timing` | record wall-clock times | true |
//! | `seed` | seed for randomized checks | 0 |

use std::path::{Path, PathBuf};

use crate::adaptivity::AfemParams;
use crate::error::{Error, Result};
use crate::harness::benchmarks::BENCHMARK_NAMES;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Adaptive,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub benchmark: String,
    pub mode: Mode,
    pub rounds: usize,
    pub params: AfemParams,
    pub output_dir: Option<PathBuf>,
    pub off_level: u32,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(benchmark: impl Into<String>) -> Self {
        RunConfig {
            benchmark: benchmark.into(),
            mode: Mode::Adaptive,
            rounds: 4,
            params: AfemParams::default(),
            output_dir: None,
            off_level: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !BENCHMARK_NAMES.contains(&self.benchmark.as_str()) {
            return Err(Error::UnknownName(self.benchmark.clone()));
        }
        if self.off_level > 8 {
            return Err(Error::Range {
                key: "off_level".into(),
                msg: "must be at most 8".into(),
            });
        }
        self.params.validate()
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        col: 0,
        msg: e.to_string(),
    })?;
    parse_config(&text, path)
}

pub fn parse_config(text: &str, path: &Path) -> Result<RunConfig> {
    let mut benchmark = None;
    let mut cfg = RunConfig::new("");
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |col: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            col,
            msg,
        };
        let Some(eq) = line.find('=') else {
            let col = line.len() - line.trim_start().len() + 1;
            return Err(parse_err(col, "expected `key = value`".into()));
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        let value_col = eq + 2 + (line[eq + 1..].len() - line[eq + 1..].trim_start().len());
        if value.is_empty() {
            return Err(parse_err(value_col, format!("missing value for `{key}`")));
        }
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| parse_err(value_col, format!("`{v}` is not a number")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| parse_err(value_col, format!("`{v}` is not a non-negative integer")))
        };
        let p = &mut cfg.params;
        match key {
            "benchmark" => benchmark = Some(value.to_string()),
            "n" => p.degree = int(value)?,
            "mode" => {
                cfg.mode = match value {
                    "adaptive" => Mode::Adaptive,
                    "uniform" => Mode::Uniform,
                    _ => return Err(parse_err(value_col, format!("unknown mode `{value}`"))),
                }
            }
            "rounds" => cfg.rounds = int(value)?,
            "theta" => p.theta = num(value)?,
            "rho" => p.rho = num(value)?,
            "omega" => p.omega = num(value)?,
            "b" => {
                p.b = u32::try_from(int(value)?).map_err(|_| Error::Range {
                    key: "b".into(),
                    msg: "too large".into(),
                })?
            }
            "eps0" => p.eps0 = Some(num(value)?),
            "delta0" => p.delta0 = num(value)?,
            "eps_stop" => p.eps_stop = Some(num(value)?),
            "max_outer" => p.max_outer = int(value)?,
            "max_inner" => p.max_inner = int(value)?,
            "max_elements" => p.max_elements = int(value)?,
            "max_dofs" => p.max_dofs = Some(int(value)?),
            "rel_tol" => p.solver.rel_tol = num(value)?,
            "quad_element" => p.quadrature.element = Some(int(value)?),
            "quad_edge" => p.quadrature.edge = Some(int(value)?),
            "quad_energy" => p.quadrature.energy = Some(int(value)?),
            "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
            "off_level" => {
                cfg.off_level = u32::try_from(int(value)?).map_err(|_| Error::Range {
                    key: "off_level".into(),
                    msg: "too large".into(),
                })?
            }
            "timing" => {
                p.timing = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(parse_err(value_col, format!("`{value}` is not a boolean"))),
                }
            }
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| parse_err(value_col, format!("`{value}` is not an integer")))?
            }
            other => return Err(Error::UnknownKey(other.to_string())),
        }
    }
    cfg.benchmark = benchmark.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        col: 0,
        msg: "missing required key `benchmark`".into(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config(text, Path::new("test.cfg"))
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse("benchmark = sphere_xy\nn = 1\n").unwrap();
        assert_eq!(cfg.benchmark, "sphere_xy");
        assert_eq!(cfg.mode, Mode::Adaptive);
        assert_eq!(cfg.params, AfemParams::default());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let cfg =
            parse("# header\n\nbenchmark=lshape_f1 # trailing\nn=2\nmode = uniform\n").unwrap();
        assert_eq!(cfg.params.degree, 2);
        assert_eq!(cfg.mode, Mode::Uniform);
    }

    #[test]
    fn out_of_range_theta() {
        let err = parse("benchmark = sphere_xy\ntheta = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::Range { ref key, .. } if key == "theta"));
    }

    #[test]
    fn unknown_key() {
        assert!(matches!(
            parse("benchmark = sphere_xy\nthetta = 0.5\n"),
            Err(Error::UnknownKey(k)) if k == "thetta"
        ));
    }

    #[test]
    fn bad_number_reports_line_and_column() {
        match parse("benchmark = sphere_xy\nrho =  abc\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 8)),
            other => panic!("{other:?}"),
        }
        match parse("benchmark = sphere_xy\n  rho\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_config(Path::new("/nonexistent/run.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { ref path, .. } if path.ends_with("run.cfg")));
        assert!(err.to_string().contains("/nonexistent/run.cfg"));
    }

    #[test]
    fn unknown_benchmark() {
        assert!(matches!(
            parse("benchmark = moon\n"),
            Err(Error::UnknownName(_))
        ));
    }
}
