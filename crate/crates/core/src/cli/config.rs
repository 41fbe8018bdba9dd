//! TOML run configuration. Parsing is strict: unknown keys are rejected.

use std::f64::consts::TAU;
use std::path::PathBuf;

use serde::Deserialize;

use crate::dynamics::{Mode, RunConfig};
use crate::hamiltonian::DeviceParams;
use crate::hilbert::{BasisLabel, Level, SpaceConfig, StateVector, C64};
use crate::oracle::initial_state;
use crate::pipeline::PipelineOptions;
use crate::protocol::ProtocolSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub device: DeviceSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub n: usize,
    pub m: usize,
}

/// Frequencies and rates in Hz (cycles per second).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceSection {
    pub f_ge_hz: f64,
    pub f_ea_hz: f64,
    pub f_r1_hz: f64,
    pub f_r2_hz: f64,
    pub g1_ge_hz: f64,
    pub g1_ea_hz: f64,
    pub g2_ge_hz: f64,
    pub g2_ea_hz: f64,
    pub drive_ge_hz: f64,
    pub drive_ea_hz: f64,
}

impl Default for DeviceSection {
    fn default() -> Self {
        let p = DeviceParams::representative();
        DeviceSection {
            f_ge_hz: p.omega_ge / TAU,
            f_ea_hz: p.omega_ea / TAU,
            f_r1_hz: p.omega_r1 / TAU,
            f_r2_hz: p.omega_r2 / TAU,
            g1_ge_hz: p.g1_ge / TAU,
            g1_ea_hz: p.g1_ea / TAU,
            g2_ge_hz: p.g2_ge / TAU,
            g2_ea_hz: p.g2_ea / TAU,
            drive_ge_hz: p.drive_ge / TAU,
            drive_ea_hz: p.drive_ea / TAU,
        }
    }
}

impl DeviceSection {
    pub fn to_params(&self) -> DeviceParams {
        DeviceParams {
            omega_ge: TAU * self.f_ge_hz,
            omega_ea: TAU * self.f_ea_hz,
            omega_r1: TAU * self.f_r1_hz,
            omega_r2: TAU * self.f_r2_hz,
            g1_ge: TAU * self.g1_ge_hz,
            g1_ea: TAU * self.g1_ea_hz,
            g2_ge: TAU * self.g2_ge_hz,
            g2_ea: TAU * self.g2_ea_hz,
            drive_ge: TAU * self.drive_ge_hz,
            drive_ea: TAU * self.drive_ea_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Ideal,
    FiniteDetuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryFormat {
    #[default]
    Populations,
    Amplitudes,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub d1: usize,
    pub d2: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub mode: ModeName,
    /// Idle-resonator detuning in units of `g1_ea`; finite-detuning mode only.
    pub delta_over_g: Option<f64>,
    pub sample_points_per_segment: usize,
    pub norm_tolerance: f64,
    pub truncation: Option<Truncation>,
    pub trajectory: TrajectoryFormat,
    /// Population moved into `|g, d1−1, 0⟩` before the run (diagnostic use).
    pub initial_leakage: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let run = RunConfig::default();
        SimulationSection {
            mode: ModeName::Ideal,
            delta_over_g: None,
            sample_points_per_segment: run.sample_points_per_segment,
            norm_tolerance: run.norm_tolerance,
            truncation: None,
            trajectory: TrajectoryFormat::Populations,
            initial_leakage: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("noonsim-out"),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub delta_over_g: Vec<f64>,
    #[serde(default)]
    pub nm: Vec<(usize, usize)>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub mode: Option<ModeName>,
    pub delta_over_g: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

/// One fully validated pipeline invocation.
#[derive(Debug, Clone)]
pub struct Job {
    pub name: String,
    pub spec: ProtocolSpec,
    pub params: DeviceParams,
    pub run: RunConfig,
    pub delta_over_g: Option<f64>,
    pub options: PipelineOptions,
    pub trajectory: TrajectoryFormat,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub out_dir: PathBuf,
    pub jobs: Vec<Job>,
    /// True when the file carried a non-empty `[sweep]` block.
    pub is_sweep: bool,
}

pub fn parse(text: &str) -> Result<ConfigFile, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

impl ConfigFile {
    /// Validates everything and expands sweeps; touches no files.
    pub fn plan(&self, ov: &Overrides) -> Result<Plan, String> {
        let params = self.device.to_params();
        params.validate().map_err(|e| format!("[device] {e}"))?;
        let sim = &self.simulation;
        if !(0.0..1.0).contains(&sim.initial_leakage) {
            return Err("[simulation] initial_leakage must lie in [0, 1)".into());
        }
        let mode = ov.mode.unwrap_or(sim.mode);
        let base_ratio = ov.delta_over_g.or(sim.delta_over_g);

        let (nm, ratios, is_sweep) = match &self.sweep {
            Some(s) if !s.nm.is_empty() || !s.delta_over_g.is_empty() => {
                let nm = if s.nm.is_empty() {
                    vec![self.base_nm(ov)]
                } else {
                    s.nm.clone()
                };
                let ratios: Vec<Option<f64>> = if s.delta_over_g.is_empty() {
                    vec![base_ratio]
                } else {
                    s.delta_over_g.iter().copied().map(Some).collect()
                };
                (nm, ratios, true)
            }
            _ => (vec![self.base_nm(ov)], vec![base_ratio], false),
        };
        let sweeping_delta = self
            .sweep
            .as_ref()
            .is_some_and(|s| !s.delta_over_g.is_empty());
        let mode = if sweeping_delta {
            ModeName::FiniteDetuning
        } else {
            mode
        };

        let mut jobs = Vec::with_capacity(nm.len() * ratios.len());
        for &(n, m) in &nm {
            let spec = ProtocolSpec::new(n, m).map_err(|e| format!("[protocol] {e}"))?;
            for &ratio in &ratios {
                let (run_mode, ratio) = match mode {
                    ModeName::Ideal => (Mode::Ideal, None),
                    ModeName::FiniteDetuning => {
                        let r = ratio.ok_or(
                            "[simulation] finite_detuning mode needs delta_over_g".to_string(),
                        )?;
                        if !(r.is_finite() && r > 0.0) {
                            return Err(format!("delta_over_g must be positive, got {r}"));
                        }
                        (
                            Mode::FiniteDetuning {
                                delta: r * params.reference_coupling(),
                            },
                            Some(r),
                        )
                    }
                };
                let run = RunConfig {
                    mode: run_mode,
                    sample_points_per_segment: sim.sample_points_per_segment,
                    norm_tolerance: sim.norm_tolerance,
                };
                run.validate().map_err(|e| format!("[simulation] {e}"))?;
                let space = match sim.truncation {
                    Some(t) => SpaceConfig::new(t.d1, t.d2)
                        .map_err(|e| format!("[simulation.truncation] {e}"))?,
                    None => spec.space(),
                };
                let initial = if sim.initial_leakage > 0.0 {
                    Some(leaky_initial(space, sim.initial_leakage).map_err(|e| e.to_string())?)
                } else {
                    None
                };
                let name = match ratio {
                    Some(r) if is_sweep => format!("n{n}_m{m}_dg{r}"),
                    _ => format!("n{n}_m{m}"),
                };
                jobs.push(Job {
                    name,
                    spec,
                    params,
                    run,
                    delta_over_g: ratio,
                    options: PipelineOptions {
                        space: Some(space),
                        initial,
                    },
                    trajectory: sim.trajectory,
                });
            }
        }
        Ok(Plan {
            out_dir: ov
                .out_dir
                .clone()
                .unwrap_or_else(|| self.output.dir.clone()),
            jobs,
            is_sweep,
        })
    }

    fn base_nm(&self, ov: &Overrides) -> (usize, usize) {
        (
            ov.n.unwrap_or(self.protocol.n),
            ov.m.unwrap_or(self.protocol.m),
        )
    }
}

/// Standard initial state with population `p` moved into the top r1 Fock level.
fn leaky_initial(space: SpaceConfig, p: f64) -> crate::Result<StateVector> {
    let base = initial_state(space)?;
    let top = BasisLabel::new(Level::G, space.d1() - 1, 0);
    let mut amps = base.amplitudes() * C64::new((1.0 - p).sqrt(), 0.0);
    amps[crate::hilbert::basis_index(top, space)?] += C64::new(p.sqrt(), 0.0);
    StateVector::from_amplitudes(space, amps)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[protocol]\nn = 1\nm = 2\n";

    #[test]
    fn defaults_fill_in_device_and_simulation() {
        let cfg = parse(MINIMAL).unwrap();
        let plan = cfg.plan(&Overrides::default()).unwrap();
        assert_eq!(plan.jobs.len(), 1);
        let job = &plan.jobs[0];
        assert_eq!((job.spec.n(), job.spec.m()), (1, 2));
        let p = DeviceParams::representative();
        assert!((job.params.g1_ea - p.g1_ea).abs() < 1e-6 * p.g1_ea);
        assert_eq!(job.run.mode, Mode::Ideal);
        assert!(!plan.is_sweep);
    }

    #[test]
    fn hz_are_converted_with_two_pi() {
        let cfg = parse("[protocol]\nn=1\nm=1\n[device]\ng1_ea_hz = 1.0e6\n").unwrap();
        let job = &cfg.plan(&Overrides::default()).unwrap().jobs[0];
        assert!((job.params.g1_ea - TAU * 1.0e6).abs() < 1e-6);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse("[protocol]\nn=1\nm=1\nq=3\n").is_err());
        assert!(parse("[protocol]\nn=1\nm=1\n[devise]\n").is_err());
        assert!(parse("[protocol]\nn=1\nm=1\n[simulation]\nmode='lab'\n").is_err());
    }

    #[test]
    fn zero_photons_is_a_config_error() {
        let cfg = parse("[protocol]\nn=0\nm=1\n").unwrap();
        assert!(cfg
            .plan(&Overrides::default())
            .unwrap_err()
            .contains("[protocol]"));
    }

    #[test]
    fn finite_mode_requires_ratio() {
        let cfg = parse("[protocol]\nn=1\nm=1\n[simulation]\nmode='finite_detuning'\n").unwrap();
        assert!(cfg.plan(&Overrides::default()).is_err());
        let ov = Overrides {
            delta_over_g: Some(50.0),
            ..Default::default()
        };
        let job = &cfg.plan(&ov).unwrap().jobs[0];
        match job.run.mode {
            Mode::FiniteDetuning { delta } => {
                assert!((delta - 50.0 * job.params.g1_ea).abs() < 1e-3)
            }
            Mode::Ideal => panic!("expected finite mode"),
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg = parse(MINIMAL).unwrap();
        let ov = Overrides {
            n: Some(3),
            m: Some(4),
            out_dir: Some(PathBuf::from("elsewhere")),
            ..Default::default()
        };
        let plan = cfg.plan(&ov).unwrap();
        assert_eq!((plan.jobs[0].spec.n(), plan.jobs[0].spec.m()), (3, 4));
        assert_eq!(plan.out_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn sweep_expands_cross_product() {
        let text = "[protocol]\nn=1\nm=1\n[sweep]\ndelta_over_g=[10.0, 100.0]\nnm=[[1,1],[2,1]]\n";
        let plan = parse(text).unwrap().plan(&Overrides::default()).unwrap();
        assert!(plan.is_sweep);
        let names: Vec<_> = plan.jobs.iter().map(|j| j.name.as_str()).collect();
        assert_eq!(
            names,
            ["n1_m1_dg10", "n1_m1_dg100", "n2_m1_dg10", "n2_m1_dg100"]
        );
        assert!(plan
            .jobs
            .iter()
            .all(|j| matches!(j.run.mode, Mode::FiniteDetuning { .. })));
    }

    #[test]
    fn leakage_lands_on_top_level() {
        let space = SpaceConfig::new(3, 3).unwrap();
        let st = leaky_initial(space, 0.25).unwrap();
        let top = st.amplitude(BasisLabel::new(Level::G, 2, 0)).unwrap();
        assert!((top.norm_sqr() - 0.25).abs() < 1e-12);
        assert!((st.norm() - 1.0).abs() < 1e-12);
    }
}
