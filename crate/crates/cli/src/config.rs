//! Study configuration from `key = value` files and command-line flags.

use std::path::{Path, PathBuf};

use clap::Parser;
use hypdpg::{CurveSpec, Error, MarkingMeasure, Mode, Point, Result, StudyConfig};

/// Convergence studies for the DPG boundary element solver of the hypersingular equation.
#[derive(Debug, Default, Parser)]
#[command(name = "hypdpg", version)]
pub struct Args {
    /// `interval[:x0,y0,x1,y1]`, `square[:side]` or `polygon:x,y;x,y;...`
    #[arg(long, allow_hyphen_values = true)]
    pub curve: Option<String>,
    /// Initial element count (per edge on polygons).
    #[arg(long, allow_hyphen_values = true)]
    pub elements: Option<String>,
    /// Trial polynomial degree.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// `uniform` or `adaptive`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub steps: Option<String>,
    /// Bulk marking fraction in (0, 1).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// Gauss points per quadrature sub-interval.
    #[arg(long = "quad-order")]
    pub quad_order: Option<String>,
    #[arg(long = "enrich-solve")]
    pub enrich_solve: Option<String>,
    #[arg(long = "enrich-error")]
    pub enrich_error: Option<String>,
    /// `squared` or `linear`.
    #[arg(long = "marking-measure")]
    pub marking_measure: Option<String>,
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Args {
    fn entries(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("curve", &self.curve),
            ("elements", &self.elements),
            ("p", &self.p),
            ("mode", &self.mode),
            ("steps", &self.steps),
            ("theta", &self.theta),
            ("out", &self.out),
            ("quad_order", &self.quad_order),
            ("enrich_solve", &self.enrich_solve),
            ("enrich_error", &self.enrich_error),
            ("marking_measure", &self.marking_measure),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

fn bad(key: &str, value: &str, expected: &str) -> Error {
    Error::Config(format!("{key}: expected {expected}, got `{value}`"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str, expected: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value, expected))
}

fn coords(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|c| {
            let v: f64 = number(key, c.trim(), "a number")?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(key, c.trim(), "a finite number"))
            }
        })
        .collect()
}

pub fn parse_curve(value: &str) -> Result<CurveSpec> {
    let key = "curve";
    let (kind, rest) = match value.split_once(':') {
        Some((k, r)) => (k.trim(), Some(r.trim())),
        None => (value.trim(), None),
    };
    match (kind, rest) {
        ("interval", None) => Ok(CurveSpec::Interval {
            a: [-1.0, 0.0],
            b: [1.0, 0.0],
        }),
        ("interval", Some(r)) => match coords(key, r)?[..] {
            [x0, y0, x1, y1] => Ok(CurveSpec::Interval {
                a: [x0, y0],
                b: [x1, y1],
            }),
            _ => Err(bad(key, value, "interval:x0,y0,x1,y1")),
        },
        ("square", r) => {
            let side: f64 = match r {
                Some(r) => number(key, r, "a side length")?,
                None => 0.5,
            };
            if !(side > 0.0 && side.is_finite()) {
                return Err(bad(key, value, "a positive side length"));
            }
            Ok(CurveSpec::Polygon {
                vertices: hypdpg::problems::square_vertices(side),
            })
        }
        ("polygon", Some(r)) => {
            let vertices = r
                .split(';')
                .map(|pt| match coords(key, pt)?[..] {
                    [x, y] => Ok::<Point, Error>([x, y]),
                    _ => Err(bad(key, pt, "a vertex x,y")),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CurveSpec::Polygon { vertices })
        }
        _ => Err(bad(key, value, "interval[:x0,y0,x1,y1], square[:side] or polygon:x,y;x,y;...")),
    }
}

fn apply(cfg: &mut StudyConfig, key: &str, value: &str) -> Result<()> {
    let value = value.trim();
    match key {
        "curve" => cfg.curve = parse_curve(value)?,
        "elements" => cfg.elements = number(key, value, "a positive integer")?,
        "p" => cfg.p = number(key, value, "a non-negative integer")?,
        "mode" => {
            cfg.mode = match value {
                "uniform" => Mode::Uniform,
                "adaptive" => Mode::Adaptive,
                _ => return Err(bad(key, value, "uniform or adaptive")),
            }
        }
        "steps" => cfg.steps = number(key, value, "a positive integer")?,
        "theta" => {
            let theta: f64 = number(key, value, "a number in (0, 1)")?;
            if !(theta > 0.0 && theta < 1.0) {
                return Err(bad(key, value, "a number in (0, 1)"));
            }
            cfg.theta = theta;
        }
        "out" => cfg.out = Some(PathBuf::from(value)),
        "quad_order" => cfg.dpg.quad.outer_order = number(key, value, "a positive integer")?,
        "enrich_solve" => cfg.dpg.enrich_solve = number(key, value, "a positive integer")?,
        "enrich_error" => cfg.dpg.enrich_error = number(key, value, "a positive integer")?,
        "marking_measure" => {
            cfg.marking = match value {
                "squared" => MarkingMeasure::Squared,
                "linear" => MarkingMeasure::Linear,
                _ => return Err(bad(key, value, "squared or linear")),
            }
        }
        _ => return Err(Error::Config(format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_file_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Defaults, then file entries, then flags.
pub fn parse_config(args: &Args, file: Option<&str>) -> Result<StudyConfig> {
    let mut cfg = StudyConfig::default();
    if let Some(text) = file {
        for (k, v) in parse_file_entries(text)? {
            apply(&mut cfg, &k, &v)?;
        }
    }
    for (k, v) in args.entries() {
        apply(&mut cfg, k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(args: &Args) -> Result<StudyConfig> {
    let text = args.config.as_deref().map(read_file).transpose()?;
    parse_config(args, text.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(flags: &[&str]) -> Args {
        let mut v = vec!["hypdpg"];
        v.extend_from_slice(flags);
        Args::try_parse_from(v).unwrap()
    }

    fn message(r: Result<StudyConfig>) -> String {
        r.unwrap_err().to_string()
    }

    #[test]
    fn defaults_only() {
        let cfg = parse_config(&args(&[]), None).unwrap();
        assert_eq!(cfg, StudyConfig::default());
        assert_eq!(
            cfg.curve,
            CurveSpec::Interval {
                a: [-1.0, 0.0],
                b: [1.0, 0.0]
            }
        );
        assert_eq!((cfg.p, cfg.mode, cfg.theta), (0, Mode::Uniform, 0.5));
    }

    #[test]
    fn flags_override_file() {
        let file = "# study\nmode = uniform\np = 0\nsteps = 3  # short\n\ntheta=0.3\n";
        let cfg = parse_config(&args(&["--mode", "adaptive", "--p", "2"]), Some(file)).unwrap();
        assert_eq!(cfg.mode, Mode::Adaptive);
        assert_eq!(cfg.p, 2);
        assert_eq!(cfg.steps, 3);
        assert_eq!(cfg.theta, 0.3);
    }

    #[test]
    fn theta_out_of_range_names_key() {
        assert!(message(parse_config(&args(&["--theta", "1.5"]), None)).contains("theta"));
        assert!(message(parse_config(&args(&[]), Some("theta = 0"))).contains("theta"));
    }

    #[test]
    fn unknown_and_malformed_entries_name_key() {
        assert!(message(parse_config(&args(&[]), Some("colour = red"))).contains("colour"));
        assert!(message(parse_config(&args(&["--p", "-1"]), None)).contains("p:"));
        assert!(message(parse_config(&args(&["--curve", "interval:-1,0,1"]), None)).contains("curve"));
        assert!(message(parse_config(&args(&["--steps", "0"]), None)).contains("steps"));
        assert!(message(parse_config(&args(&["--mode", "fast"]), None)).contains("mode"));
        assert!(message(parse_config(&args(&[]), Some("marking-measure = max"))).contains("marking_measure"));
        assert!(message(parse_config(&args(&[]), Some("just words"))).contains("line 1"));
    }

    #[test]
    fn curve_syntax() {
        assert_eq!(
            parse_curve("interval:0,0,2,1").unwrap(),
            CurveSpec::Interval {
                a: [0.0, 0.0],
                b: [2.0, 1.0]
            }
        );
        assert_eq!(
            parse_curve("square").unwrap(),
            CurveSpec::Polygon {
                vertices: hypdpg::problems::square_vertices(0.5)
            }
        );
        assert_eq!(
            parse_curve("polygon: 0,0; 0.5,0; 0,0.5").unwrap(),
            CurveSpec::Polygon {
                vertices: vec![[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]
            }
        );
        for bad in ["interval:0,0,1", "square:-1", "polygon:0,0;1", "circle", "interval:0,0,1,nan"] {
            assert!(parse_curve(bad).unwrap_err().to_string().contains("curve"), "{bad}");
        }
    }

    #[test]
    fn numeric_keys_reach_options() {
        let cfg = parse_config(
            &args(&["--quad-order", "16", "--enrich-solve", "2", "--enrich-error", "3", "--out", "x.csv"]),
            Some("marking_measure = linear\nelements = 2"),
        )
        .unwrap();
        assert_eq!(cfg.dpg.quad.outer_order, 16);
        assert_eq!((cfg.dpg.enrich_solve, cfg.dpg.enrich_error), (2, 3));
        assert_eq!(cfg.marking, MarkingMeasure::Linear);
        assert_eq!(cfg.elements, 2);
        assert_eq!(cfg.out, Some(PathBuf::from("x.csv")));
    }
}
