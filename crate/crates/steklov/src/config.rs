//! Run configuration: defaults, a flat key=value file format, and
//! command-line overrides layered on top.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::GridResolution;
use crate::harmonics::Dimension;

/// What a run does.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Solve the eigenproblem on one domain and print the spectrum.
    Solve,
    /// Run the ascent campaign and write its artifacts.
    Optimize,
    /// Check computed ball spectra against the analytic oracle.
    Validate,
    /// Generate and refine boundary collocation points.
    Points,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solve" => Ok(Mode::Solve),
            "optimize" => Ok(Mode::Optimize),
            "validate" => Ok(Mode::Validate),
            "points" => Ok(Mode::Points),
            other => Err(Error::InvalidArgument {
                name: "mode",
                value: other.into(),
                reason: "expected solve, optimize, validate, or points".into(),
            }),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Solve => write!(f, "solve"),
            Mode::Optimize => write!(f, "optimize"),
            Mode::Validate => write!(f, "validate"),
            Mode::Points => write!(f, "points"),
        }
    }
}

/// Fully resolved run parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub dimension: Dimension,
    /// Target eigenvalue index.
    pub k: usize,
    /// Radial expansion truncation degree.
    pub degree: u32,
    /// Collocation point count.
    pub collocation: usize,
    /// Source offset along the inward normal.
    pub delta: f64,
    /// Riesz kernel exponent for point refinement.
    pub riesz_exponent: f64,
    /// Cluster threshold in cost units.
    pub epsilon: f64,
    pub resolution: GridResolution,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub outdir: PathBuf,
    /// Input coefficients file (solve and points modes; optional).
    pub coefficients: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for a mode and dimension: degree 20, 2000 collocation
    /// points in 3D and 8000 in 4D, offset 0.2, Riesz exponent 3.
    pub fn defaults(mode: Mode, dimension: Dimension) -> Self {
        let collocation = match dimension {
            Dimension::Three => 2000,
            Dimension::Four => 8000,
        };
        Self {
            mode,
            dimension,
            k: 1,
            degree: 20,
            collocation,
            delta: 0.2,
            riesz_exponent: 3.0,
            epsilon: 0.01,
            resolution: GridResolution::default_for(dimension),
            max_iterations: 150,
            restarts: 3,
            seed: 0,
            outdir: PathBuf::from("runs"),
            coefficients: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, value: usize) -> Result<()> {
            if value == 0 {
                return Err(Error::InvalidArgument {
                    name,
                    value: "0".into(),
                    reason: "must be positive".into(),
                });
            }
            Ok(())
        }
        positive("N", self.degree as usize)?;
        positive("mc", self.collocation)?;
        positive("iters", self.max_iterations)?;
        positive("restarts", self.restarts)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument {
                name: "delta",
                value: self.delta.to_string(),
                reason: "source offset must lie in (0, 1)".into(),
            });
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument {
                name: "eps",
                value: self.epsilon.to_string(),
                reason: "cluster threshold must be positive".into(),
            });
        }
        if !(self.riesz_exponent > 0.0) {
            return Err(Error::InvalidArgument {
                name: "s",
                value: self.riesz_exponent.to_string(),
                reason: "Riesz exponent must be positive".into(),
            });
        }
        if self.mode == Mode::Optimize && self.k == 0 {
            return Err(Error::InvalidArgument {
                name: "k",
                value: "0".into(),
                reason: "sigma_0 = 0 cannot be optimized".into(),
            });
        }
        if self.resolution.dimension() != self.dimension {
            return Err(Error::InvalidArgument {
                name: "resolution",
                value: format!("{:?}", self.resolution),
                reason: format!("grid is not {}-dimensional", self.dimension),
            });
        }
        Ok(())
    }

    /// Applies overrides (file first, then command line) and validates.
    pub fn resolve(mode: Mode, file: Option<&Path>, cli: &Overrides) -> Result<RunConfig> {
        let mut layered = match file {
            Some(path) => Overrides::parse_file(path)?,
            None => Overrides::default(),
        };
        layered.apply(cli);
        // Dimension decides the collocation and resolution defaults, so it
        // must be fixed before the rest of the layering.
        let dimension = match layered.dimension {
            None | Some(3) => Dimension::Three,
            Some(4) => Dimension::Four,
            Some(d) => {
                return Err(Error::InvalidArgument {
                    name: "d",
                    value: d.to_string(),
                    reason: "dimension must be 3 or 4".into(),
                })
            }
        };
        let mut config = RunConfig::defaults(mode, dimension);
        layered.write_into(&mut config)?;
        config.validate()?;
        Ok(config)
    }

    /// The key=value form of this configuration, one key per line.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("mode={}\n", self.mode));
        s.push_str(&format!("d={}\n", self.dimension.ambient()));
        s.push_str(&format!("k={}\n", self.k));
        s.push_str(&format!("N={}\n", self.degree));
        s.push_str(&format!("mc={}\n", self.collocation));
        s.push_str(&format!("delta={}\n", self.delta));
        s.push_str(&format!("s={}\n", self.riesz_exponent));
        s.push_str(&format!("eps={}\n", self.epsilon));
        s.push_str(&format!("resolution={}\n", resolution_string(self.resolution)));
        s.push_str(&format!("iters={}\n", self.max_iterations));
        s.push_str(&format!("restarts={}\n", self.restarts));
        s.push_str(&format!("seed={}\n", self.seed));
        s.push_str(&format!("out={}\n", self.outdir.display()));
        if let Some(path) = &self.coefficients {
            s.push_str(&format!("coeffs={}\n", path.display()));
        }
        s
    }
}

fn resolution_string(res: GridResolution) -> String {
    match res {
        GridResolution::ThreeD { theta, phi } => format!("{theta}x{phi}"),
        GridResolution::FourD { beta, theta, phi } => format!("{beta}x{theta}x{phi}"),
    }
}

/// Partial configuration: unset fields fall through to the defaults.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub dimension: Option<u32>,
    pub k: Option<usize>,
    pub degree: Option<u32>,
    pub collocation: Option<usize>,
    pub delta: Option<f64>,
    pub riesz_exponent: Option<f64>,
    pub epsilon: Option<f64>,
    /// Grid sizes; two entries in 3D, three in 4D.
    pub resolution: Option<Vec<usize>>,
    pub max_iterations: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub outdir: Option<PathBuf>,
    pub coefficients: Option<PathBuf>,
}

impl Overrides {
    /// Parses a flat key=value file. `#` starts a comment; blank lines are
    /// skipped; unknown keys and malformed values are errors that name the
    /// offending line.
    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut out = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "expected key=value".into(),
            })?;
            out.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        }
        Ok(out)
    }

    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &'static str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::InvalidArgument {
                name: key,
                value: value.into(),
                reason: "not a valid number".into(),
            })
        }
        match key {
            "d" => self.dimension = Some(num("d", value)?),
            "k" => self.k = Some(num("k", value)?),
            "N" => self.degree = Some(num("N", value)?),
            "mc" => self.collocation = Some(num("mc", value)?),
            "delta" => self.delta = Some(num("delta", value)?),
            "s" => self.riesz_exponent = Some(num("s", value)?),
            "eps" => self.epsilon = Some(num("eps", value)?),
            "iters" => self.max_iterations = Some(num("iters", value)?),
            "restarts" => self.restarts = Some(num("restarts", value)?),
            "seed" => self.seed = Some(num("seed", value)?),
            "out" => self.outdir = Some(PathBuf::from(value)),
            "coeffs" => self.coefficients = Some(PathBuf::from(value)),
            "resolution" => {
                let sizes: Result<Vec<usize>> =
                    value.split('x').map(|p| num("resolution", p.trim())).collect();
                self.resolution = Some(sizes?);
            }
            "mode" => {
                // Accepted for round-tripping saved configs; the subcommand
                // still decides the mode.
            }
            other => {
                return Err(Error::InvalidArgument {
                    name: "key",
                    value: other.into(),
                    reason: "unknown configuration key".into(),
                })
            }
        }
        Ok(())
    }

    /// Overlays `other` on `self`; set fields in `other` win.
    pub fn apply(&mut self, other: &Overrides) {
        macro_rules! take {
            ($field:ident) => {
                if other.$field.is_some() {
                    self.$field = other.$field.clone();
                }
            };
        }
        take!(dimension);
        take!(k);
        take!(degree);
        take!(collocation);
        take!(delta);
        take!(riesz_exponent);
        take!(epsilon);
        take!(resolution);
        take!(max_iterations);
        take!(restarts);
        take!(seed);
        take!(outdir);
        take!(coefficients);
    }

    fn write_into(&self, config: &mut RunConfig) -> Result<()> {
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(n) = self.degree {
            config.degree = n;
        }
        if let Some(mc) = self.collocation {
            config.collocation = mc;
        }
        if let Some(delta) = self.delta {
            config.delta = delta;
        }
        if let Some(s) = self.riesz_exponent {
            config.riesz_exponent = s;
        }
        if let Some(eps) = self.epsilon {
            config.epsilon = eps;
        }
        if let Some(sizes) = &self.resolution {
            config.resolution = match (config.dimension, sizes.as_slice()) {
                (Dimension::Three, &[theta, phi]) => GridResolution::ThreeD { theta, phi },
                (Dimension::Four, &[beta, theta, phi]) => {
                    GridResolution::FourD { beta, theta, phi }
                }
                _ => {
                    return Err(Error::InvalidArgument {
                        name: "resolution",
                        value: format!("{sizes:?}"),
                        reason: format!(
                            "expected {} grid sizes for dimension {}",
                            config.dimension.ambient() - 1,
                            config.dimension
                        ),
                    })
                }
            };
        }
        if let Some(iters) = self.max_iterations {
            config.max_iterations = iters;
        }
        if let Some(restarts) = self.restarts {
            config.restarts = restarts;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.outdir {
            config.outdir = out.clone();
        }
        if self.coefficients.is_some() {
            config.coefficients = self.coefficients.clone();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_dimension() {
        let c3 = RunConfig::defaults(Mode::Solve, Dimension::Three);
        assert_eq!(c3.degree, 20);
        assert_eq!(c3.collocation, 2000);
        assert_eq!(c3.delta, 0.2);
        assert_eq!(c3.riesz_exponent, 3.0);
        let c4 = RunConfig::defaults(Mode::Solve, Dimension::Four);
        assert_eq!(c4.collocation, 8000);
        assert!(c3.validate().is_ok());
        assert!(c4.validate().is_ok());
    }

    #[test]
    fn file_then_cli_layering() {
        let dir = std::env::temp_dir().join("steklov-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(
            &path,
            "# campaign setup\nd=4\nk=2\nmc=500\nresolution=8x12x24\nseed=7\n",
        )
        .unwrap();

        let mut cli = Overrides::default();
        cli.k = Some(3);
        cli.epsilon = Some(0.02);
        let config = RunConfig::resolve(Mode::Optimize, Some(&path), &cli).unwrap();

        assert_eq!(config.dimension, Dimension::Four);
        assert_eq!(config.k, 3, "command line overrides the file");
        assert_eq!(config.collocation, 500);
        assert_eq!(config.epsilon, 0.02);
        assert_eq!(config.seed, 7);
        assert_eq!(
            config.resolution,
            GridResolution::FourD { beta: 8, theta: 12, phi: 24 }
        );
    }

    #[test]
    fn bad_inputs_are_named() {
        let dir = std::env::temp_dir().join("steklov-config-test");
        std::fs::create_dir_all(&dir).unwrap();

        let path = dir.join("bad-key.cfg");
        std::fs::write(&path, "d=3\nwobble=1\n").unwrap();
        let err = RunConfig::resolve(Mode::Solve, Some(&path), &Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains(":2:"), "{err}");

        let path = dir.join("bad-value.cfg");
        std::fs::write(&path, "mc=lots\n").unwrap();
        let err = RunConfig::resolve(Mode::Solve, Some(&path), &Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains(":1:"), "{err}");

        let mut cli = Overrides::default();
        cli.dimension = Some(5);
        assert!(RunConfig::resolve(Mode::Solve, None, &cli).is_err());

        let mut cli = Overrides::default();
        cli.collocation = Some(0);
        assert!(RunConfig::resolve(Mode::Solve, None, &cli).is_err());

        // 3D resolution given for a 4D run.
        let mut cli = Overrides::default();
        cli.dimension = Some(4);
        cli.resolution = Some(vec![16, 32]);
        assert!(RunConfig::resolve(Mode::Solve, None, &cli).is_err());
    }

    #[test]
    fn key_value_round_trip() {
        let mut config = RunConfig::defaults(Mode::Optimize, Dimension::Three);
        config.k = 5;
        config.seed = 42;
        config.epsilon = 0.005;

        let dir = std::env::temp_dir().join("steklov-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("round-trip.cfg");
        std::fs::write(&path, config.to_key_values()).unwrap();

        let again =
            RunConfig::resolve(Mode::Optimize, Some(&path), &Overrides::default()).unwrap();
        assert_eq!(again.k, 5);
        assert_eq!(again.seed, 42);
        assert_eq!(again.epsilon, 0.005);
        assert_eq!(again.resolution, config.resolution);
        assert_eq!(again.collocation, config.collocation);
    }
}
