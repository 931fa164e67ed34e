//! Run configuration: TOML schema, validation, and conversion into the
//! solver's types.

use ahlfors_core::{CurveSpec, GridSpec};
use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number written as `[re, im]` in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpec(pub f64, pub f64);

impl From<ComplexSpec> for Complex64 {
    fn from(v: ComplexSpec) -> Self {
        Complex64::new(v.0, v.1)
    }
}

impl From<Complex64> for ComplexSpec {
    fn from(z: Complex64) -> Self {
        ComplexSpec(z.re, z.im)
    }
}

/// One `[[curves]]` entry. `kind` selects which of the shape fields apply;
/// the last entry is the outer boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<ComplexSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotation: Option<f64>,
    /// Rows `[k, re, im]` of the trigonometric coefficients.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<(f64, f64, f64)>>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub reversed: bool,
}

fn is_false(v: &bool) -> bool {
    !v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    /// Base point `a`; first zero of the map.
    pub a: ComplexSpec,
    /// Nodes per curve (even). Defaults to 128.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Remaining zeros, one per hole; found by `find-zeros` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeros: Option<Vec<ComplexSpec>>,
    /// Auxiliary points, one per hole; defaults to the hole centroids.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aux: Option<Vec<ComplexSpec>>,
}

fn default_n() -> usize {
    128
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// `"cartesian"` or `"polar"`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines_x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines_y: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<ComplexSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rays: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<ComplexSpec>>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_penalty")]
    pub penalty: f64,
    #[serde(default = "default_simplex_step")]
    pub simplex_step: f64,
}

fn default_max_iterations() -> usize {
    500
}
fn default_tolerance() -> f64 {
    1e-12
}
fn default_penalty() -> f64 {
    1e6
}
fn default_simplex_step() -> f64 {
    0.05
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            initial: None,
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
            penalty: default_penalty(),
            simplex_step: default_simplex_step(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlagsConfig {
    /// Use the plain Cauchy discretization instead of the ratio form.
    #[serde(default)]
    pub plain_cauchy: bool,
    #[serde(default)]
    pub verbose: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// `"identity"` or `"mobius"` (`(z−a)/(1−āz)` for the unit disk).
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeConfig {
    /// Node counts to sweep, all even.
    pub n_values: Vec<usize>,
}

/// The whole run configuration, echoed verbatim into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub curves: Vec<CurveConfig>,
    pub problem: ProblemConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub flags: FlagsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeConfig>,
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = toml::from_str(text).context("cannot parse config")?;
        config.validate()?;
        Ok(config)
    }

    /// Field-level checks beyond what deserialization enforces.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.curves.is_empty() {
            bail!("curves: at least one curve is required (the outer boundary)");
        }
        if self.problem.n < 4 || self.problem.n % 2 != 0 {
            bail!(
                "problem.n: node count must be even and at least 4, got {}",
                self.problem.n
            );
        }
        let holes = self.curves.len() - 1;
        if let Some(zeros) = &self.problem.zeros {
            if zeros.len() != holes {
                bail!(
                    "problem.zeros: expected {holes} entries (one per hole), got {}",
                    zeros.len()
                );
            }
        }
        if let Some(aux) = &self.problem.aux {
            if aux.len() != holes {
                bail!(
                    "problem.aux: expected {holes} entries (one per hole), got {}",
                    aux.len()
                );
            }
        }
        if let Some(search) = &self.search {
            if let Some(initial) = &search.initial {
                if initial.len() != holes {
                    bail!(
                        "search.initial: expected {holes} entries (one per hole), got {}",
                        initial.len()
                    );
                }
            }
        }
        if let Some(grid) = &self.grid {
            if grid.kind != "cartesian" && grid.kind != "polar" {
                bail!("grid.kind: expected \"cartesian\" or \"polar\", got {:?}", grid.kind);
            }
        }
        if let Some(oracle) = &self.oracle {
            if oracle.kind != "identity" && oracle.kind != "mobius" {
                bail!(
                    "oracle.kind: expected \"identity\" or \"mobius\", got {:?}",
                    oracle.kind
                );
            }
        }
        if let Some(converge) = &self.converge {
            if converge.n_values.is_empty() {
                bail!("converge.n_values: at least one node count is required");
            }
            for &n in &converge.n_values {
                if n < 4 || n % 2 != 0 {
                    bail!("converge.n_values: node counts must be even and at least 4, got {n}");
                }
            }
        }
        for (i, curve) in self.curves.iter().enumerate() {
            build_curve(curve).with_context(|| format!("curves[{i}]"))?;
        }
        Ok(())
    }

    pub fn curve_specs(&self) -> anyhow::Result<Vec<CurveSpec>> {
        self.curves
            .iter()
            .enumerate()
            .map(|(i, c)| build_curve(c).with_context(|| format!("curves[{i}]")))
            .collect()
    }

    pub fn base_point(&self) -> Complex64 {
        self.problem.a.into()
    }

    pub fn zeros(&self) -> Option<Vec<Complex64>> {
        self.problem
            .zeros
            .as_ref()
            .map(|zs| zs.iter().map(|&z| z.into()).collect())
    }

    pub fn aux(&self) -> Option<Vec<Complex64>> {
        self.problem
            .aux
            .as_ref()
            .map(|zs| zs.iter().map(|&z| z.into()).collect())
    }

    /// The grid to map; polar around the origin when unspecified.
    pub fn grid_spec(&self) -> anyhow::Result<GridSpec> {
        let Some(grid) = &self.grid else {
            return Ok(GridSpec::Polar {
                center: Complex64::new(0.0, 0.0),
                circles: 10,
                rays: 16,
                samples: 256,
            });
        };
        let samples = grid.samples.unwrap_or(256);
        if samples < 2 {
            bail!("grid.samples: need at least 2 samples per curve");
        }
        match grid.kind.as_str() {
            "cartesian" => Ok(GridSpec::Cartesian {
                lines_x: grid.lines_x.unwrap_or(10),
                lines_y: grid.lines_y.unwrap_or(10),
                samples,
            }),
            "polar" => Ok(GridSpec::Polar {
                center: grid.center.map_or(Complex64::new(0.0, 0.0), Into::into),
                circles: grid.circles.unwrap_or(10),
                rays: grid.rays.unwrap_or(16),
                samples,
            }),
            other => bail!("grid.kind: expected \"cartesian\" or \"polar\", got {other:?}"),
        }
    }

    pub fn cauchy_kind(&self) -> ahlfors_core::CauchyKind {
        if self.flags.plain_cauchy {
            ahlfors_core::CauchyKind::Plain
        } else {
            ahlfors_core::CauchyKind::Ratio
        }
    }
}

fn build_curve(c: &CurveConfig) -> anyhow::Result<CurveSpec> {
    let spec = match c.kind.as_str() {
        "circle" => {
            let center = c.center.context("circle needs a center")?;
            let radius = c.radius.context("circle needs a radius")?;
            CurveSpec::circle(center.into(), radius)?
        }
        "ellipse" => {
            let center = c.center.context("ellipse needs a center")?;
            let semi_axes = c.semi_axes.context("ellipse needs semi_axes")?;
            CurveSpec::ellipse(center.into(), semi_axes, c.rotation.unwrap_or(0.0))?
        }
        "trig" => {
            let rows = c
                .coefficients
                .as_ref()
                .context("trig curve needs coefficients")?;
            let coefficients = rows
                .iter()
                .map(|&(k, re, im)| {
                    if k.fract() != 0.0 {
                        bail!("coefficient index {k} is not an integer");
                    }
                    Ok((k as i32, Complex64::new(re, im)))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            CurveSpec::trig(coefficients)?
        }
        other => bail!("kind: expected \"circle\", \"ellipse\" or \"trig\", got {other:?}"),
    };
    Ok(spec.with_reversed(c.reversed))
}
