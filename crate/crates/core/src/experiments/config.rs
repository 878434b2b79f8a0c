//! Experiment configuration: a TOML file with common top-level fields and one
//! section per experiment kind. Fields missing from the file take the
//! defaults of the chosen kind.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capacity::{RestartMode, WosParams, EPS_HIT, ESCAPE_FACTOR, MAX_STEPS, MIN_WALKERS};
use crate::functionals::ADAPTIVE_H0;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Cap,
    Lln,
    Decomp,
    #[serde(rename = "d0")]
    D0Sweep,
    Volume,
    Intersect,
    Blocking,
    #[serde(rename = "pair")]
    PairFunctional,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Cap,
        Kind::Lln,
        Kind::Decomp,
        Kind::D0Sweep,
        Kind::Volume,
        Kind::Intersect,
        Kind::Blocking,
        Kind::PairFunctional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Cap => "cap",
            Kind::Lln => "lln",
            Kind::Decomp => "decomp",
            Kind::D0Sweep => "d0",
            Kind::Volume => "volume",
            Kind::Intersect => "intersect",
            Kind::Blocking => "blocking",
            Kind::PairFunctional => "pair",
        }
    }

    /// Stable label mixed into every stream id of the kind.
    pub(crate) fn code(self) -> u64 {
        match self {
            Kind::Cap => 1,
            Kind::Lln => 2,
            Kind::Decomp => 3,
            Kind::D0Sweep => 4,
            Kind::Volume => 5,
            Kind::Intersect => 6,
            Kind::Blocking => 7,
            Kind::PairFunctional => 8,
        }
    }

    fn uses_wos_walkers(self) -> bool {
        matches!(self, Kind::Cap | Kind::Lln | Kind::Decomp | Kind::Blocking)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(vec![format!("unknown experiment kind {s:?}")]))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(vec![format!("unknown output format {s:?}")])),
        }
    }
}

/// Walk-on-spheres settings. The escape radius is relative to the launch
/// sphere: `r_escape = escape_factor · launch / 2`, so the factor is in units
/// of the bounding radius for a standalone capacity estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WosSection {
    pub eps_hit: f64,
    pub escape_factor: f64,
    pub max_steps: u64,
    pub restart_mode: RestartMode,
}

impl Default for WosSection {
    fn default() -> Self {
        WosSection {
            eps_hit: EPS_HIT,
            escape_factor: ESCAPE_FACTOR,
            max_steps: MAX_STEPS,
            restart_mode: RestartMode::RussianRoulette,
        }
    }
}

impl WosSection {
    pub fn params(&self, launch: f64) -> WosParams {
        WosParams {
            eps_hit: self.eps_hit,
            r_escape: self.escape_factor * launch / 2.0,
            max_steps: self.max_steps,
            restart_mode: self.restart_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapSection {
    /// Ball radii for the capacity and hitting checks.
    pub radii: Vec<f64>,
}

impl Default for CapSection {
    fn default() -> Self {
        CapSection {
            radii: vec![0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct D0Section {
    /// Base step of the adaptive discretization.
    pub h0: f64,
}

impl Default for D0Section {
    fn default() -> Self {
        D0Section { h0: ADAPTIVE_H0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolumeSection {
    pub n_probe: u64,
}

impl Default for VolumeSection {
    fn default() -> Self {
        VolumeSection { n_probe: 4000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntersectSection {
    /// Radius of the two sausages; the second path must come within twice
    /// this distance of the first.
    pub r_intersect: f64,
    /// Horizon of the second path in units of `t`.
    pub horizon_factor: f64,
    /// Starting distances of the second path in units of `√t`.
    pub z_scales: Vec<f64>,
}

impl Default for IntersectSection {
    fn default() -> Self {
        IntersectSection {
            r_intersect: 0.5,
            horizon_factor: 100.0,
            z_scales: vec![0.25, 1.0, 4.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockingSection {
    pub levels: u32,
}

impl Default for BlockingSection {
    fn default() -> Self {
        BlockingSection { levels: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairSection {
    /// Distance of the second path's start from the origin.
    pub z_norm: f64,
    /// Riemann step of both paths.
    pub h: f64,
}

impl Default for PairSection {
    fn default() -> Self {
        PairSection { z_norm: 40.0, h: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Prefix of the `experiment` column; the kind name when empty.
    #[serde(default)]
    pub name: String,
    pub t_grid: Vec<f64>,
    pub delta: f64,
    pub r_sausage: f64,
    pub n_paths: u64,
    pub n_walkers: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
    #[serde(default)]
    pub format: Format,
    /// Write measured wall times into the results. Off by default so that
    /// reruns are byte-identical; the metadata file always has them.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub wos: WosSection,
    #[serde(default)]
    pub cap: CapSection,
    #[serde(default)]
    pub d0: D0Section,
    #[serde(default)]
    pub volume: VolumeSection,
    #[serde(default)]
    pub intersect: IntersectSection,
    #[serde(default)]
    pub blocking: BlockingSection,
    #[serde(default)]
    pub pair: PairSection,
}

impl ExperimentConfig {
    /// Desk-scale defaults of each kind.
    pub fn defaults(kind: Kind) -> Self {
        let (t_grid, n_paths, n_walkers): (Vec<f64>, u64, u64) = match kind {
            Kind::Cap => (vec![1.0], 1, 100_000),
            Kind::Lln => (vec![1e2, 1e3, 1e4], 100, 20_000),
            Kind::Decomp => (vec![1.0], 1, 100_000),
            Kind::D0Sweep => (vec![1e2, 1e3, 1e4, 1e5], 10_000, 1),
            Kind::Volume => (vec![500.0], 200, 1),
            Kind::Intersect => (vec![1e2, 1e3, 1e4], 20, 2000),
            Kind::Blocking => (vec![1e2, 1e3], 20, 20_000),
            Kind::PairFunctional => (vec![25.0], 10_000, 50),
        };
        ExperimentConfig {
            kind,
            name: String::new(),
            t_grid,
            delta: 0.1,
            r_sausage: 1.0,
            n_paths,
            n_walkers,
            seed: None,
            workers: 1,
            out_path: None,
            format: Format::Csv,
            record_wall_time: false,
            wos: WosSection::default(),
            cap: CapSection::default(),
            d0: D0Section::default(),
            volume: VolumeSection::default(),
            intersect: IntersectSection::default(),
            blocking: BlockingSection::default(),
            pair: PairSection::default(),
        }
    }

    /// Parses a TOML document over the defaults of its kind. `kind` is used
    /// when the document has none and must agree with it otherwise.
    pub fn from_toml_str(text: &str, kind: Option<Kind>) -> Result<Self> {
        let cfg_err = |m: String| Error::Config(vec![m]);
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| cfg_err(e.message().to_string()))?;
        let file_kind = match doc.get("kind") {
            None => None,
            Some(toml::Value::String(s)) => Some(s.parse::<Kind>()?),
            Some(v) => return Err(cfg_err(format!("kind must be a string, got {v}"))),
        };
        let kind = match (file_kind, kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(cfg_err(format!("config file is for kind {a}, not {b}")));
            }
            (Some(k), _) | (None, Some(k)) => k,
            (None, None) => return Err(cfg_err("the experiment kind is not specified".into())),
        };
        let mut base = match toml::Value::try_from(Self::defaults(kind)) {
            Ok(toml::Value::Table(t)) => t,
            other => return Err(cfg_err(format!("cannot encode defaults: {other:?}"))),
        };
        merge(&mut base, doc);
        toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| cfg_err(e.message().to_string()))
    }

    pub fn load(path: &Path, kind: Option<Kind>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, kind)
    }

    /// The full configuration, defaults included, as TOML.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn experiment_name(&self) -> &str {
        if self.name.is_empty() {
            self.kind.name()
        } else {
            &self.name
        }
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs: Vec<String> = Vec::new();
        let mut err = |m: String| errs.push(m);
        if self.t_grid.is_empty() {
            err("t_grid must not be empty".into());
        } else if self.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            err(format!("t_grid values must be positive and finite, got {:?}", self.t_grid));
        } else if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            err(format!("t_grid must be strictly increasing, got {:?}", self.t_grid));
        }
        if !(self.delta > 0.0) {
            err(format!("delta must be positive, got {}", self.delta));
        } else if self.delta >= 1.0 {
            err(format!("delta = {} must be smaller than 1", self.delta));
        }
        if !(self.r_sausage > 0.0 && self.r_sausage.is_finite()) {
            err(format!("r_sausage must be positive, got {}", self.r_sausage));
        }
        if self.n_paths == 0 {
            err("n_paths must be at least 1".into());
        }
        if self.kind.uses_wos_walkers() && self.n_walkers < MIN_WALKERS {
            err(format!("n_walkers must be at least {MIN_WALKERS}, got {}", self.n_walkers));
        } else if self.n_walkers == 0 {
            err("n_walkers must be at least 1".into());
        }
        if self.workers == 0 {
            err("workers must be at least 1".into());
        }
        let w = &self.wos;
        let ball_radius = match self.kind {
            Kind::Intersect => 2.0 * self.intersect.r_intersect,
            Kind::Cap => self.cap.radii.iter().copied().fold(f64::INFINITY, f64::min),
            _ => self.r_sausage,
        };
        if !(w.eps_hit > 0.0) {
            err(format!("wos.eps_hit must be positive, got {}", w.eps_hit));
        } else if w.eps_hit >= ball_radius {
            err(format!(
                "wos.eps_hit = {} must be smaller than the sausage radius {ball_radius}",
                w.eps_hit
            ));
        }
        if !(w.escape_factor > 2.0) {
            err(format!(
                "wos.escape_factor = {} puts r_escape at or inside the launch radius; it must exceed 2",
                w.escape_factor
            ));
        }
        if w.max_steps == 0 {
            err("wos.max_steps must be at least 1".into());
        }
        match self.kind {
            Kind::Cap => {
                if self.cap.radii.is_empty() || self.cap.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    err(format!("cap.radii must be a nonempty list of positive radii, got {:?}", self.cap.radii));
                }
            }
            Kind::D0Sweep => {
                if !(self.d0.h0 > 0.0 && self.d0.h0 <= 0.1) {
                    err(format!("d0.h0 must lie in (0, 0.1], got {}", self.d0.h0));
                }
            }
            Kind::Volume => {
                if self.volume.n_probe < 1000 {
                    err(format!("volume.n_probe must be at least 1000, got {}", self.volume.n_probe));
                }
            }
            Kind::Intersect => {
                let s = &self.intersect;
                if !(s.r_intersect > 0.0) {
                    err(format!("intersect.r_intersect must be positive, got {}", s.r_intersect));
                }
                if !(s.horizon_factor >= 1.0) {
                    err(format!("intersect.horizon_factor must be at least 1, got {}", s.horizon_factor));
                }
                if s.z_scales.is_empty() || s.z_scales.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
                    err(format!("intersect.z_scales must be a nonempty list of positive scales, got {:?}", s.z_scales));
                }
            }
            Kind::Blocking => {
                if self.blocking.levels > 16 {
                    err(format!("blocking.levels must be at most 16, got {}", self.blocking.levels));
                }
            }
            Kind::PairFunctional => {
                if !(self.pair.h > 0.0 && self.pair.h <= 1.0) {
                    err(format!("pair.h must lie in (0, 1], got {}", self.pair.h));
                }
                if !(self.pair.z_norm > 0.0 && self.pair.z_norm.is_finite()) {
                    err(format!("pair.z_norm must be positive, got {}", self.pair.z_norm));
                }
            }
            Kind::Lln | Kind::Decomp => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// Overlays `top` on `base`, recursing into tables.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
