use std::path::PathBuf;
use std::time::Duration;

use crate::dockkern::{GridBox, KernelConfig};
use crate::scheduler::SchedulerPolicy;

use super::ScreenError;

#[derive(Debug, Clone, PartialEq)]
pub enum LigandSource {
    /// Every `*.pdbqt` below this directory.
    Dir(PathBuf),
    /// One ligand path per line; relative paths resolve against the list's directory.
    ListFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineChoice {
    Mock,
    External {
        template: String,
        timeout: Option<Duration>,
    },
}

/// How long a job "takes" on the virtual clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimDuration {
    Fixed(f64),
    /// Mock-kernel modeled cost times this factor. Backends without a cost
    /// estimate are charged their measured wall time.
    ModeledCost { seconds_per_unit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timing {
    Monotonic,
    Virtual(SimDuration),
}

#[derive(Debug, Clone)]
pub struct ScreeningConfig {
    pub receptor_path: PathBuf,
    pub ligand_source: LigandSource,
    pub grid: GridBox,
    pub kernel: KernelConfig,
    pub jobs: usize,
    pub cores_per_job: usize,
    pub policy: SchedulerPolicy,
    pub out_dir: PathBuf,
    pub top_k: usize,
    pub resume: bool,
    /// `None` detects the machine's cores.
    pub total_cores: Option<usize>,
    pub oversubscribe: bool,
    pub retries: u32,
    pub engine: EngineChoice,
    /// Passed to external commands as `{config}`.
    pub config_path: Option<PathBuf>,
    pub timing: Timing,
    pub write_trace: bool,
}

impl ScreeningConfig {
    pub fn new(receptor_path: PathBuf, ligand_source: LigandSource, grid: GridBox, out_dir: PathBuf) -> Self {
        ScreeningConfig {
            receptor_path,
            ligand_source,
            grid,
            kernel: KernelConfig::default(),
            jobs: 1,
            cores_per_job: 1,
            policy: SchedulerPolicy::event_driven(),
            out_dir,
            top_k: 50,
            resume: true,
            total_cores: None,
            oversubscribe: false,
            retries: 0,
            engine: EngineChoice::Mock,
            config_path: None,
            timing: Timing::Monotonic,
            write_trace: false,
        }
    }

    pub fn validate(&self) -> Result<(), ScreenError> {
        let bad = |m: String| Err(ScreenError::InvalidConfig(m));
        if self.jobs < 1 {
            return bad("jobs must be >= 1".into());
        }
        if self.cores_per_job < 1 {
            return bad("cores per job must be >= 1".into());
        }
        if self.top_k < 1 {
            return bad("top_k must be >= 1".into());
        }
        if let Timing::Virtual(SimDuration::Fixed(s)) = self.timing {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("simulated job duration must be >= 0, got {s}"));
            }
        }
        if let Timing::Virtual(SimDuration::ModeledCost { seconds_per_unit }) = self.timing {
            if !(seconds_per_unit >= 0.0 && seconds_per_unit.is_finite()) {
                return bad(format!("seconds per cost unit must be >= 0, got {seconds_per_unit}"));
            }
        }
        self.policy.validate()?;
        self.kernel.validate()?;
        Ok(())
    }
}

/// Settings read from a Vina-style `key = value` file. Absent keys stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VinaConfig {
    pub receptor: Option<PathBuf>,
    pub center: [Option<f64>; 3],
    pub size: [Option<f64>; 3],
    pub exhaustiveness: Option<usize>,
    pub num_modes: Option<usize>,
    pub energy_range: Option<f64>,
    pub cpu: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl VinaConfig {
    /// The grid box, when all six center/size keys were given.
    pub fn grid(&self) -> Result<Option<GridBox>, ScreenError> {
        let given = self.center.iter().chain(&self.size).filter(|v| v.is_some()).count();
        match given {
            0 => Ok(None),
            6 => {
                let c = self.center.map(|v| v.unwrap());
                let s = self.size.map(|v| v.unwrap());
                Ok(Some(GridBox::new(c, s)?))
            }
            _ => Err(ScreenError::InvalidConfig(
                "grid box needs all of center_x/y/z and size_x/y/z".into(),
            )),
        }
    }

    /// Copies the kernel-related keys into `kernel`.
    pub fn apply_kernel(&self, kernel: &mut KernelConfig) {
        if let Some(e) = self.exhaustiveness {
            kernel.exhaustiveness = e;
        }
        if let Some(n) = self.num_modes {
            kernel.num_modes = n;
        }
        if let Some(r) = self.energy_range {
            kernel.energy_range = r;
        }
        if let Some(s) = self.seed {
            kernel.seed = s;
        }
    }
}

pub fn parse_vina_config(text: &str) -> Result<VinaConfig, ScreenError> {
    let mut cfg = VinaConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| ScreenError::ConfigSyntax { line: line_no, reason };
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected `key = value`, got {line:?}")));
        };
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(err(format!("{key} has no value")));
        }
        fn num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ScreenError> {
            value.parse().map_err(|_| ScreenError::ConfigSyntax {
                line,
                reason: format!("{key}: cannot parse {value:?}"),
            })
        }
        match key {
            "receptor" => cfg.receptor = Some(PathBuf::from(value)),
            "center_x" => cfg.center[0] = Some(num(key, value, line_no)?),
            "center_y" => cfg.center[1] = Some(num(key, value, line_no)?),
            "center_z" => cfg.center[2] = Some(num(key, value, line_no)?),
            "size_x" => cfg.size[0] = Some(num(key, value, line_no)?),
            "size_y" => cfg.size[1] = Some(num(key, value, line_no)?),
            "size_z" => cfg.size[2] = Some(num(key, value, line_no)?),
            "exhaustiveness" => cfg.exhaustiveness = Some(num(key, value, line_no)?),
            "num_modes" => cfg.num_modes = Some(num(key, value, line_no)?),
            "energy_range" => cfg.energy_range = Some(num(key, value, line_no)?),
            "cpu" => cfg.cpu = Some(num(key, value, line_no)?),
            "seed" => cfg.seed = Some(num(key, value, line_no)?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            other => log::warn!("config line {line_no}: ignoring unknown key {other:?}"),
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
receptor = rec.pdbqt
# box around the pocket
center_x = 1.5
center_y = -2
center_z = 0.25   # trailing comment
size_x = 20
size_y = 22
size_z = 24
exhaustiveness = 16
num_modes = 5
energy_range = 4
cpu = 2
seed = 42
out = results
verbosity = 2
";

    #[test]
    fn parses_vina_keys() {
        let cfg = parse_vina_config(SAMPLE).unwrap();
        assert_eq!(cfg.receptor, Some(PathBuf::from("rec.pdbqt")));
        let grid = cfg.grid().unwrap().unwrap();
        assert_eq!(grid.center, [1.5, -2.0, 0.25]);
        assert_eq!(grid.size, [20.0, 22.0, 24.0]);
        assert_eq!(cfg.cpu, Some(2));
        let mut k = KernelConfig::default();
        cfg.apply_kernel(&mut k);
        assert_eq!((k.exhaustiveness, k.num_modes, k.energy_range, k.seed), (16, 5, 4.0, 42));
    }

    #[test]
    fn partial_grid_is_rejected() {
        let cfg = parse_vina_config("center_x = 1\nsize_x = 3\n").unwrap();
        assert!(cfg.grid().is_err());
        assert_eq!(parse_vina_config("").unwrap().grid().unwrap(), None);
    }

    #[test]
    fn syntax_errors_name_the_line() {
        match parse_vina_config("seed = 1\nsize_x 20\n") {
            Err(ScreenError::ConfigSyntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_vina_config("seed = minus one"),
            Err(ScreenError::ConfigSyntax { line: 1, .. })
        ));
    }

    #[test]
    fn config_invariants() {
        let grid = GridBox::new([0.0; 3], [10.0; 3]).unwrap();
        let mut c = ScreeningConfig::new("r".into(), LigandSource::Dir("l".into()), grid, "o".into());
        assert!(c.validate().is_ok());
        c.top_k = 0;
        assert!(c.validate().is_err());
        c.top_k = 1;
        c.jobs = 0;
        assert!(c.validate().is_err());
    }
}
