//! Strict JSON run configuration: every section maps onto the input types of
//! the library, unknown keys are rejected, and all physical values are
//! validated by the owning module at load time.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use hml_core::couplings::{qubit_coupling, QubitCoupling};
use hml_core::dynamics::TwoSiteModel;
use hml_core::geometry::{LoopSpec, Placement};
use hml_core::lattice::{Boundary, LatticeKind, LatticeSpec};
use hml_core::units::{yig_preset, FieldBias, MaterialParams};
use hml_core::{HmlError, Result};

/// Material block: either a preset name ("yig") or a full parameter set.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MaterialSection {
    Preset(String),
    Params(MaterialParams),
}

impl MaterialSection {
    pub fn resolve(&self) -> Result<MaterialParams> {
        match self {
            MaterialSection::Preset(name) => {
                if name == "yig" {
                    Ok(yig_preset())
                } else {
                    Err(HmlError::config(
                        "material",
                        format!("unknown material preset \"{name}\"; available: \"yig\""),
                    ))
                }
            }
            MaterialSection::Params(p) => {
                p.validate()?;
                Ok(*p)
            }
        }
    }
}

/// Spin-qubit placement relative to the magnet center.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    /// Distance from the magnet center (m).
    pub r_q: f64,
    /// Polar angle from the bias axis (rad).
    pub theta: f64,
    /// Azimuthal angle (rad).
    pub varphi: f64,
}

impl QubitSection {
    fn validate(&self) -> Result<()> {
        if !(self.r_q > 0.0) || !self.r_q.is_finite() {
            return Err(HmlError::config(
                "qubit.r_q",
                format!("qubit distance must be a finite positive length, got {}", self.r_q),
            ));
        }
        for (name, v) in [("qubit.theta", self.theta), ("qubit.varphi", self.varphi)] {
            if !v.is_finite() {
                return Err(HmlError::config(name, format!("angle must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Lattice block; kind, lattice constant, size, and boundary are optional so
/// dynamics-only configs can state just the two rates.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    #[serde(default)]
    pub kind: Option<LatticeKind>,
    /// On-site magnon frequency (rad/s).
    pub omega0: f64,
    /// Hopping rate (rad/s).
    pub j_rate: f64,
    /// Lattice constant (m).
    #[serde(default)]
    pub a: Option<f64>,
    /// Linear size (sites, or unit cells per direction).
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub boundary: Option<Boundary>,
}

impl LatticeSection {
    /// Full lattice description with defaults filled in; `kind_override`
    /// (from the command line) wins over the config value.
    pub fn to_spec(&self, kind_override: Option<LatticeKind>) -> Result<LatticeSpec> {
        let spec = LatticeSpec {
            kind: kind_override.or(self.kind).unwrap_or(LatticeKind::Chain),
            omega0: self.omega0,
            j_rate: self.j_rate,
            a: self.a.unwrap_or(1e-6),
            n: self.n.unwrap_or(8),
            boundary: self.boundary.unwrap_or_default(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Decoherence rates and integration controls of the transfer protocol.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    /// Magnon energy decay rate (rad/s).
    #[serde(default)]
    pub kappa: f64,
    /// Qubit coherence time (s); the dephasing rate is pi / T2_star.
    #[serde(default, rename = "T2_star")]
    pub t2_star: Option<f64>,
    /// Integration horizon (s); defaults to 1.5x the ideal transfer period.
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Number of stored output points.
    #[serde(default)]
    pub n_t: Option<usize>,
}

impl DynamicsSection {
    fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(HmlError::config(
                "dynamics.kappa",
                format!("decay rate must be finite and non-negative, got {}", self.kappa),
            ));
        }
        if let Some(t2) = self.t2_star {
            if !(t2 > 0.0) || !t2.is_finite() {
                return Err(HmlError::config(
                    "dynamics.T2_star",
                    format!("coherence time must be a finite positive time, got {t2}"),
                ));
            }
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) || !t.is_finite() {
                return Err(HmlError::config(
                    "dynamics.t_max",
                    format!("horizon must be a finite positive time, got {t}"),
                ));
            }
        }
        if let Some(n) = self.n_t {
            if n < 8 {
                return Err(HmlError::config(
                    "dynamics.n_t",
                    format!("at least 8 output points are required, got {n}"),
                ));
            }
        }
        Ok(())
    }

    /// Dephasing rate gamma = pi / T2_star (rad/s); zero when no coherence
    /// time is given.
    pub fn gamma(&self) -> f64 {
        self.t2_star.map_or(0.0, |t2| std::f64::consts::PI / t2)
    }
}

/// Output destination and format; both may instead come from the command line.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

/// Top-level run configuration. Every section is optional; each subcommand
/// states which sections it needs and fails with the missing path otherwise.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub material: Option<MaterialSection>,
    #[serde(rename = "loop")]
    pub loop_: Option<LoopSpec>,
    pub placement: Option<Placement>,
    /// Magnet sphere radius (m).
    pub magnet_radius: Option<f64>,
    pub qubit: Option<QubitSection>,
    pub field: Option<FieldBias>,
    pub lattice: Option<LatticeSection>,
    pub dynamics: Option<DynamicsSection>,
    pub output: Option<OutputSection>,
}

impl RunConfig {
    /// Validate every present section with the owning module's rules.
    /// Returns accumulated non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if let Some(m) = &self.material {
            m.resolve()?;
        }
        if let Some(lp) = &self.loop_ {
            warnings.extend(lp.validate()?);
        }
        if let Some(p) = &self.placement {
            p.validate()?;
        }
        if let Some(r) = self.magnet_radius {
            if !(r > 0.0) || !r.is_finite() {
                return Err(HmlError::config(
                    "magnet_radius",
                    format!("magnet radius must be a finite positive length, got {r}"),
                ));
            }
        }
        if let Some(q) = &self.qubit {
            q.validate()?;
        }
        if let Some(f) = &self.field {
            f.validate()?;
        }
        if let Some(l) = &self.lattice {
            l.to_spec(None)?;
        }
        if let Some(d) = &self.dynamics {
            d.validate()?;
        }
        Ok(warnings)
    }

    pub fn require_loop(&self) -> Result<&LoopSpec> {
        self.loop_
            .as_ref()
            .ok_or_else(|| HmlError::config("loop", "this subcommand needs the loop section"))
    }

    pub fn require_placement(&self) -> Result<&Placement> {
        self.placement.as_ref().ok_or_else(|| {
            HmlError::config("placement", "this subcommand needs the placement section")
        })
    }

    pub fn require_material(&self) -> Result<MaterialParams> {
        self.material
            .as_ref()
            .ok_or_else(|| HmlError::config("material", "this subcommand needs the material section"))?
            .resolve()
    }

    pub fn require_magnet_radius(&self) -> Result<f64> {
        self.magnet_radius.ok_or_else(|| {
            HmlError::config("magnet_radius", "this subcommand needs the magnet radius")
        })
    }

    pub fn require_field(&self) -> Result<&FieldBias> {
        self.field
            .as_ref()
            .ok_or_else(|| HmlError::config("field", "this subcommand needs the field section"))
    }

    pub fn require_qubit(&self) -> Result<&QubitSection> {
        self.qubit
            .as_ref()
            .ok_or_else(|| HmlError::config("qubit", "this subcommand needs the qubit section"))
    }

    pub fn require_lattice(&self) -> Result<&LatticeSection> {
        self.lattice
            .as_ref()
            .ok_or_else(|| HmlError::config("lattice", "this subcommand needs the lattice section"))
    }

    /// Dressed qubit couplings from the physical chain material -> magnet ->
    /// bias field -> qubit placement.
    pub fn qubit_chain(&self) -> Result<QubitCoupling> {
        let mat = self.require_material()?;
        let radius = self.require_magnet_radius()?;
        let q = self.require_qubit()?;
        let b0 = self.require_field()?.b0;
        qubit_coupling(q.theta, q.varphi, q.r_q, radius, &mat, b0)
    }

    /// Two-site transfer model. With a lattice section present, the site
    /// frequency and hopping come from it and the qubit splitting and
    /// coupling from the physical qubit chain; with no physical sections at
    /// all, a dimensionless default model (omega0 = J = omega_sigma = 1,
    /// g = 0.045) is used. Decoherence rates always come from the dynamics
    /// section.
    pub fn assemble_model(&self) -> Result<TwoSiteModel> {
        let kappa = self.dynamics.map_or(0.0, |d| d.kappa);
        let gamma = self.dynamics.map_or(0.0, |d| d.gamma());
        let physical = self.lattice.is_some()
            || self.qubit.is_some()
            || self.material.is_some()
            || self.magnet_radius.is_some()
            || self.field.is_some();
        let model = if physical {
            let lat = self.require_lattice()?;
            let qc = self.qubit_chain()?;
            TwoSiteModel {
                omega0: lat.omega0,
                j_rate: lat.j_rate,
                omega_sigma: qc.omega_sigma,
                g: qc.g,
                kappa,
                gamma,
            }
        } else {
            TwoSiteModel {
                omega0: 1.0,
                j_rate: 1.0,
                omega_sigma: 1.0,
                g: 0.045,
                kappa,
                gamma,
            }
        };
        model.validate()?;
        Ok(model)
    }

    pub fn n_t(&self) -> usize {
        self.dynamics.and_then(|d| d.n_t).unwrap_or(2048)
    }

    pub fn t_max(&self) -> Option<f64> {
        self.dynamics.and_then(|d| d.t_max)
    }
}

/// Parse the configuration file under the strict schema; deserialization
/// failures surface the JSON path of the offending field.
pub fn load_config(path: &Path) -> Result<(RunConfig, Vec<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        HmlError::config("config", format!("cannot read {}: {e}", path.display()))
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let cfg: RunConfig = match serde_path_to_error::deserialize(&mut de) {
        Ok(cfg) => cfg,
        Err(err) => {
            let mut field_path = err.path().to_string();
            let message = err.into_inner().to_string();
            // A missing required field is reported at the enclosing object;
            // extend the path so the message names the absent field itself.
            if let Some(rest) = message.strip_prefix("missing field `") {
                if let Some(name) = rest.split('`').next() {
                    if field_path == "." || field_path.is_empty() {
                        field_path = name.to_string();
                    } else {
                        field_path = format!("{field_path}.{name}");
                    }
                }
            }
            return Err(HmlError::config(field_path, message));
        }
    };
    let warnings = cfg.validate()?;
    Ok((cfg, warnings))
}
