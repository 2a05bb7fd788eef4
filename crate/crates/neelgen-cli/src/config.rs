//! TOML experiment configs: parsing, validation, and construction of the
//! lattice and initial state they describe. The full schema is documented
//! in docs/config.md; examples live under configs/.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use neelgen_core::{
    build_easy_axis, build_psi_m, Geometry, LatticeSpec, Schedule, StateVector, MAX_EVOLVE_SITES,
    MAX_SITES,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{validation, CliError};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSection,
    #[serde(default)]
    pub state: StateSection,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    /// "chain" | "square" | "hypercubic"
    pub geometry: String,
    /// Even sites per dimension.
    pub sizes: Vec<usize>,
    /// Exchange couplings by displacement; empty means nearest-neighbour
    /// J = 1 in every dimension.
    #[serde(default)]
    pub couplings: Vec<CouplingEntry>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub displacement: Vec<i64>,
    pub value: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    /// "easy_plane": one staggered sector Psi_M (transverse axis free).
    /// "easy_axis": Gaussian superposition over even sectors (axis pinned).
    pub kind: String,
    /// Down-spin count for easy_plane; defaults to N/2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Gaussian width for easy_axis; defaults to sqrt(N)/4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl Default for StateSection {
    fn default() -> Self {
        StateSection {
            kind: "easy_plane".into(),
            m: None,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// single_measurement | cascade | correlator_scan | decoherence_wave
    /// | dispersion
    pub kind: String,

    // single_measurement
    #[serde(default)]
    pub site: usize,
    /// "plus" | "minus" | "sample" (default; draws from the seeded RNG).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,

    // cascade
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<usize>,
    /// "random" | "roundrobin" | "explicit" (needs `sites`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<usize>>,

    // correlator_scan: two-letter component pairs over {p, m, x, y, z}.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,

    // decoherence_wave
    /// "analytic" | "exact" | "both" (default analytic).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Per-check overrides of the built-in verify tolerances, keyed by
    /// check name as printed in the report.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    SingleMeasurement,
    Cascade,
    CorrelatorScan,
    DecoherenceWave,
    Dispersion,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SingleMeasurement => "single_measurement",
            ScenarioKind::Cascade => "cascade",
            ScenarioKind::CorrelatorScan => "correlator_scan",
            ScenarioKind::DecoherenceWave => "decoherence_wave",
            ScenarioKind::Dispersion => "dispersion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveMode {
    Analytic,
    Exact,
    Both,
}

impl WaveMode {
    pub fn analytic(self) -> bool {
        self != WaveMode::Exact
    }
    pub fn exact(self) -> bool {
        self != WaveMode::Analytic
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
    }

    /// CLI flags win over the file; must run before hashing or validation.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        threads: Option<usize>,
        out: Option<PathBuf>,
    ) {
        if seed.is_some() {
            self.run.seed = seed;
        }
        if threads.is_some() {
            self.run.threads = threads;
        }
        if out.is_some() {
            self.run.out = out;
        }
    }

    /// SHA-256 of the effective (post-override) config, for the manifest.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn out_dir(&self) -> PathBuf {
        self.run
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("neelgen-out"))
    }

    pub fn scenario_kind(&self) -> Result<ScenarioKind, CliError> {
        match self.scenario.kind.as_str() {
            "single_measurement" => Ok(ScenarioKind::SingleMeasurement),
            "cascade" => Ok(ScenarioKind::Cascade),
            "correlator_scan" => Ok(ScenarioKind::CorrelatorScan),
            "decoherence_wave" => Ok(ScenarioKind::DecoherenceWave),
            "dispersion" => Ok(ScenarioKind::Dispersion),
            other => Err(validation(format!(
                "scenario.kind: unknown scenario \"{other}\" (expected single_measurement, \
                 cascade, correlator_scan, decoherence_wave, or dispersion)"
            ))),
        }
    }

    pub fn wave_mode(&self) -> Result<WaveMode, CliError> {
        match self.scenario.mode.as_deref().unwrap_or("analytic") {
            "analytic" => Ok(WaveMode::Analytic),
            "exact" => Ok(WaveMode::Exact),
            "both" => Ok(WaveMode::Both),
            other => Err(validation(format!(
                "scenario.mode: unknown mode \"{other}\" (expected analytic, exact, or both)"
            ))),
        }
    }

    pub fn build_lattice(&self) -> Result<LatticeSpec, CliError> {
        let geometry = match self.lattice.geometry.as_str() {
            "chain" => Geometry::Chain,
            "square" => Geometry::Square,
            "hypercubic" => Geometry::Hypercubic,
            other => {
                return Err(validation(format!(
                    "lattice.geometry: unknown geometry \"{other}\" (expected chain, square, \
                     or hypercubic)"
                )))
            }
        };
        let couplings: Vec<(Vec<i64>, f64)> = if self.lattice.couplings.is_empty() {
            default_couplings(self.lattice.sizes.len())
        } else {
            self.lattice
                .couplings
                .iter()
                .map(|c| (c.displacement.clone(), c.value))
                .collect()
        };
        LatticeSpec::build(geometry, &self.lattice.sizes, &couplings)
            .map_err(|e| validation(format!("lattice: {e}")))
    }

    pub fn build_state(&self, lat: &LatticeSpec) -> Result<StateVector, CliError> {
        if lat.n_sites > MAX_SITES {
            return Err(validation(format!(
                "lattice: {} sites exceeds the state-vector cap of {MAX_SITES}",
                lat.n_sites
            )));
        }
        match self.state.kind.as_str() {
            "easy_plane" => {
                let m = self.state.m.unwrap_or(lat.n_sites / 2);
                build_psi_m(lat, m).map_err(|e| validation(format!("state: {e}")))
            }
            "easy_axis" => build_easy_axis(lat, self.state.sigma)
                .map_err(|e| validation(format!("state: {e}"))),
            other => Err(validation(format!(
                "state.kind: unknown state \"{other}\" (expected easy_plane or easy_axis)"
            ))),
        }
    }

    pub fn schedule(&self) -> Result<Schedule, CliError> {
        match self.scenario.schedule.as_deref().unwrap_or("random") {
            "random" => Ok(Schedule::Random),
            "roundrobin" => Ok(Schedule::RoundRobin),
            "explicit" => {
                let sites = self.scenario.sites.clone().ok_or_else(|| {
                    validation("scenario.sites: required when schedule = \"explicit\"")
                })?;
                Ok(Schedule::Explicit(sites))
            }
            other => Err(validation(format!(
                "scenario.schedule: unknown schedule \"{other}\" (expected random, roundrobin, \
                 or explicit)"
            ))),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.run
            .seed
            .ok_or_else(|| validation("run.seed: required for stochastic scenarios"))
    }

    /// Field-level validation beyond what deserialization enforces. Returns
    /// the scenario kind so callers dispatch without re-parsing strings.
    pub fn validate(&self) -> Result<ScenarioKind, CliError> {
        if self.lattice.sizes.is_empty() {
            return Err(validation("lattice.sizes: must not be empty"));
        }
        for &l in &self.lattice.sizes {
            if l < 2 || l % 2 != 0 {
                return Err(validation(format!(
                    "lattice.sizes: every linear size must be even and >= 2, got {l}"
                )));
            }
        }
        let n: usize = self.lattice.sizes.iter().product();
        let kind = self.scenario_kind()?;

        // State-bearing scenarios walk 2^N amplitudes; the momentum-space
        // scenarios only touch the N-point grid.
        let needs_state = !matches!(kind, ScenarioKind::Dispersion)
            && !(kind == ScenarioKind::DecoherenceWave && self.wave_mode()? == WaveMode::Analytic);
        if needs_state {
            if n > MAX_SITES {
                return Err(validation(format!(
                    "lattice: {n} sites exceeds the state-vector cap of {MAX_SITES} \
                     required by scenario {}",
                    kind.name()
                )));
            }
            match self.state.kind.as_str() {
                "easy_plane" => {
                    if let Some(m) = self.state.m {
                        if m > n {
                            return Err(validation(format!(
                                "state.m: {m} exceeds the site count {n}"
                            )));
                        }
                    }
                }
                "easy_axis" => {
                    if let Some(s) = self.state.sigma {
                        if !(s.is_finite() && s > 0.0) {
                            return Err(validation(format!(
                                "state.sigma: must be finite and positive, got {s}"
                            )));
                        }
                    }
                }
                other => {
                    return Err(validation(format!(
                        "state.kind: unknown state \"{other}\" (expected easy_plane or easy_axis)"
                    )))
                }
            }
        }

        match kind {
            ScenarioKind::SingleMeasurement => {
                if self.scenario.site >= n {
                    return Err(validation(format!(
                        "scenario.site: {} out of range for {n} sites",
                        self.scenario.site
                    )));
                }
                match self.scenario.outcome.as_deref() {
                    None | Some("sample") => {
                        self.seed()?;
                    }
                    Some("plus") | Some("minus") => {}
                    Some(other) => {
                        return Err(validation(format!(
                            "scenario.outcome: unknown outcome \"{other}\" (expected plus, \
                             minus, or sample)"
                        )))
                    }
                }
            }
            ScenarioKind::Cascade => {
                let steps = self
                    .scenario
                    .steps
                    .ok_or_else(|| validation("scenario.steps: required for cascade"))?;
                if steps == 0 {
                    return Err(validation("scenario.steps: must be >= 1"));
                }
                if self.scenario.trajectories == Some(0) {
                    return Err(validation("scenario.trajectories: must be >= 1"));
                }
                if let Schedule::Explicit(sites) = self.schedule()? {
                    if sites.len() < steps {
                        return Err(validation(format!(
                            "scenario.sites: explicit schedule lists {} sites but {steps} \
                             steps were requested",
                            sites.len()
                        )));
                    }
                    if let Some(&bad) = sites.iter().find(|&&s| s >= n) {
                        return Err(validation(format!(
                            "scenario.sites: site {bad} out of range for {n} sites"
                        )));
                    }
                }
                self.seed()?;
            }
            ScenarioKind::CorrelatorScan => {
                for pair in self.component_pairs()? {
                    let _ = pair;
                }
            }
            ScenarioKind::DecoherenceWave => {
                let times = self
                    .scenario
                    .times
                    .as_ref()
                    .ok_or_else(|| validation("scenario.times: required for decoherence_wave"))?;
                if times.is_empty() {
                    return Err(validation("scenario.times: must not be empty"));
                }
                if let Some(&bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                    return Err(validation(format!(
                        "scenario.times: must be finite and >= 0, got {bad}"
                    )));
                }
                if self.wave_mode()?.exact() {
                    if self.lattice.sizes.len() != 1 {
                        return Err(validation(
                            "scenario.mode: exact evolution emits distance profiles and \
                             requires a chain",
                        ));
                    }
                    if n > MAX_EVOLVE_SITES {
                        return Err(validation(format!(
                            "lattice: {n} sites exceeds the exact-evolution cap of \
                             {MAX_EVOLVE_SITES}"
                        )));
                    }
                    if self.scenario.source.unwrap_or(0) >= n {
                        return Err(validation(format!(
                            "scenario.source: {} out of range for {n} sites",
                            self.scenario.source.unwrap_or(0)
                        )));
                    }
                }
            }
            ScenarioKind::Dispersion => {}
        }
        Ok(kind)
    }

    /// Parsed correlator component pairs; p/m are the ladder operators.
    pub fn component_pairs(&self) -> Result<Vec<(char, char)>, CliError> {
        let names = self
            .scenario
            .components
            .clone()
            .unwrap_or_else(|| vec!["zz".into(), "pm".into(), "mm".into()]);
        let mut pairs = Vec::with_capacity(names.len());
        for name in &names {
            let chars: Vec<char> = name.chars().collect();
            if chars.len() != 2 || !chars.iter().all(|c| "pmxyz".contains(*c)) {
                return Err(validation(format!(
                    "scenario.components: \"{name}\" is not a two-letter pair over p/m/x/y/z"
                )));
            }
            pairs.push((chars[0], chars[1]));
        }
        Ok(pairs)
    }
}

pub fn default_couplings(dims: usize) -> Vec<(Vec<i64>, f64)> {
    (0..dims)
        .map(|d| {
            let mut disp = vec![0i64; dims];
            disp[d] = 1;
            (disp, 1.0)
        })
        .collect()
}
