use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use cpqr::cp_potential::{PotentialOptions, TableSpec};
use cpqr::optics::{DielectricModel, MirrorSpec, PolarizabilityModel, Tabulated};
use cpqr::qreflect::Controls;
use cpqr::threshold::FitOptions;
use cpqr::units::LengthUnit;
use cpqr::{Constants, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Perfect,
    Silicon,
    Silica,
    /// Dielectric function read from --dielectric-file.
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Records,
    Text,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Potential at the given distances, or the whole cached table.
    Potential {
        /// Distance (e.g. 100, 5nm); repeatable.
        #[arg(long = "z", allow_hyphen_values = true)]
        z: Vec<String>,
    },
    /// Reflection amplitude at one energy.
    Reflect,
    /// |r|^2 against free-fall height.
    Curve {
        #[arg(long, default_value = "0.1mm")]
        h_min: String,
        #[arg(long, default_value = "1m")]
        h_max: String,
        #[arg(long, default_value_t = 33)]
        points: usize,
    },
    /// Badlands function Q(z) and its peak.
    Badlands {
        #[arg(long, default_value_t = 1.0)]
        z_from: f64,
        #[arg(long, default_value_t = 1e6)]
        z_to: f64,
        #[arg(long, default_value_t = 241)]
        points: usize,
    },
    /// a(k) sweep, scattering length and lifetime.
    Scatlen,
    /// C3 and C4 of the three bulk mirrors.
    Table1,
    /// |r|^2 of the three bulk mirrors at the selected height.
    Table2,
    /// Scattering lengths of the three bulk mirrors.
    Table3,
    /// Scattering lengths of silicon and silica slabs.
    Table4,
    /// CSV datasets behind every figure, written into the --out directory.
    FigData,
}

/// Flags shared by every command. Unset numeric flags fall back to the
/// --config file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    #[arg(long, value_enum, global = true)]
    pub material: Option<Material>,
    /// Two-column file (xi in rad/s, eps) for --material tabulated.
    #[arg(long, global = true)]
    pub dielectric_file: Option<PathBuf>,
    /// Two-column file (xi in rad/s, alpha in bohr^3) replacing the
    /// effective-oscillator polarizability.
    #[arg(long, global = true)]
    pub polarizability_file: Option<PathBuf>,
    /// Semi-infinite mirror (the default).
    #[arg(long, global = true, conflicts_with = "thickness")]
    pub bulk: bool,
    /// Slab thickness, e.g. 3nm.
    #[arg(long, global = true)]
    pub thickness: Option<String>,
    /// Free-fall height, e.g. 10cm (plain numbers are metres).
    #[arg(long, global = true, conflicts_with_all = ["energy", "k"])]
    pub height: Option<String>,
    /// Energy in Hartree.
    #[arg(long, global = true, conflicts_with = "k")]
    pub energy: Option<f64>,
    /// Wavevector in inverse bohr.
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Output file; stdout when absent. For fig-data, the output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv, records (JSON with the resolved configuration) or text.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// key = value file with constants and numeric controls.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Potential table cache, default .cpqr-cache.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Build tables in memory without reading or writing the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Relative tolerance of the potential quadrature [1e-8].
    #[arg(long, global = true)]
    pub tol_quad: Option<f64>,
    /// Relative step tolerance of the wave integration [1e-10].
    #[arg(long, global = true)]
    pub tol_ode: Option<f64>,
    /// Largest change of the outgoing amplitudes over the last decade [1e-8].
    #[arg(long, global = true)]
    pub tol_flat: Option<f64>,
    /// Start where V departs from -C3/z^3 by this fraction [1e-6].
    #[arg(long, global = true)]
    pub tol_vdw: Option<f64>,
    /// Largest tolerated flux defect [1e-6].
    #[arg(long, global = true)]
    pub tol_current: Option<f64>,
    /// Largest relative residual of the threshold fit [1e-2].
    #[arg(long, global = true)]
    pub tol_fit: Option<f64>,
    /// Start no further out than where |V| = ratio_start E [1e4].
    #[arg(long, global = true)]
    pub ratio_start: Option<f64>,
    /// Change integration variable where |V| = ratio_switch E [1e2].
    #[arg(long, global = true)]
    pub ratio_switch: Option<f64>,
    /// Table grid start in bohr [0.01].
    #[arg(long, global = true)]
    pub z_min: Option<f64>,
    /// Table grid end in bohr [1e8].
    #[arg(long, global = true)]
    pub z_max: Option<f64>,
    /// Table grid density [20].
    #[arg(long, global = true)]
    pub points_per_decade: Option<f64>,
    /// Decades above k_min used in the threshold fit [2].
    #[arg(long, global = true)]
    pub fit_window: Option<f64>,
    /// Largest k of the sweep in inverse bohr [1e-3].
    #[arg(long, global = true)]
    pub k_max: Option<f64>,
    /// Smallest k of the sweep in inverse bohr [1e-6].
    #[arg(long, global = true)]
    pub k_min: Option<f64>,
    /// Sweep points per decade [4].
    #[arg(long, global = true)]
    pub k_per_decade: Option<f64>,
}

pub const DEFAULT_CACHE_DIR: &str = ".cpqr-cache";

/// Keys accepted in a --config file besides the physical constants.
const CONTROL_KEYS: &[&str] = &[
    "tol_quad",
    "tol_ode",
    "tol_flat",
    "tol_vdw",
    "tol_current",
    "tol_fit",
    "ratio_start",
    "ratio_switch",
    "z_min",
    "z_max",
    "points_per_decade",
    "fit_window",
    "k_max",
    "k_min",
    "k_per_decade",
];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergySelection {
    pub energy_hartree: f64,
    pub k_bohr_inv: f64,
    pub height_m: f64,
    pub gh_m2_s2: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KLadder {
    pub k_max: f64,
    pub k_min: f64,
    pub per_decade: usize,
}

/// Everything a run depends on, after defaults, config file and flags
/// have been merged. Embedded in every record output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub material: Material,
    pub dielectric_file: Option<PathBuf>,
    pub polarizability_file: Option<PathBuf>,
    pub thickness_bohr: Option<f64>,
    pub selection: EnergySelection,
    pub table: TableSpec,
    pub controls: Controls,
    pub fit: FitOptions,
    pub k_ladder: KLadder,
    pub constants: Constants,
    pub cache_dir: Option<PathBuf>,
    pub format: Format,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub dielectric: DielectricModel,
    #[serde(skip)]
    pub polarizability: PolarizabilityModel,
}

fn read_config(path: &Path) -> Result<(Constants, BTreeMap<String, f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut constant_lines = String::new();
    let mut controls = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let key = line.split_once('=').map(|(k, _)| k.trim()).unwrap_or(line);
        if CONTROL_KEYS.contains(&key) {
            let value = line.split_once('=').map(|(_, v)| v.trim()).unwrap_or("");
            let v: f64 = value
                .parse()
                .map_err(|_| Error::Config(format!("{} line {}: '{value}' is not a number", path.display(), n + 1)))?;
            controls.insert(key.to_string(), v);
        } else {
            constant_lines.push_str(line);
            constant_lines.push('\n');
        }
    }
    let constants = Constants::from_config_str(&constant_lines)?;
    Ok((constants, controls))
}

/// Heights: plain numbers are metres, otherwise any supported length unit.
pub fn parse_height(text: &str, constants: &Constants) -> Result<f64> {
    if let Ok(v) = text.trim().parse::<f64>() {
        return Ok(v);
    }
    let bohr = constants.parse_length(text)?;
    Ok(constants.length_from_au(bohr, LengthUnit::Metre))
}

impl RunConfig {
    pub fn resolve(command: Command, o: Options) -> Result<Self> {
        let (constants, file) = match &o.config {
            Some(p) => read_config(p)?,
            None => (Constants::default(), BTreeMap::new()),
        };
        let pick = |flag: Option<f64>, key: &str, default: f64| flag.or_else(|| file.get(key).copied()).unwrap_or(default);

        let dq = PotentialOptions::default();
        let dt = TableSpec::default();
        let table = TableSpec {
            z_min: pick(o.z_min, "z_min", dt.z_min),
            z_max: pick(o.z_max, "z_max", dt.z_max),
            points_per_decade: pick(o.points_per_decade, "points_per_decade", dt.points_per_decade as f64) as usize,
            quadrature: PotentialOptions { rel_tol: pick(o.tol_quad, "tol_quad", dq.rel_tol), ..dq },
        };
        table.validate()?;
        let dc = Controls::default();
        let controls = Controls {
            ratio_start: pick(o.ratio_start, "ratio_start", dc.ratio_start),
            ratio_switch: pick(o.ratio_switch, "ratio_switch", dc.ratio_switch),
            tol_flat: pick(o.tol_flat, "tol_flat", dc.tol_flat),
            rtol: pick(o.tol_ode, "tol_ode", dc.rtol),
            vdw_tol: pick(o.tol_vdw, "tol_vdw", dc.vdw_tol),
            current_tol: pick(o.tol_current, "tol_current", dc.current_tol),
            z_limit: dc.z_limit,
        };
        controls.validate()?;
        let df = FitOptions::default();
        let fit = FitOptions {
            window_decades: pick(o.fit_window, "fit_window", df.window_decades),
            residual_threshold: pick(o.tol_fit, "tol_fit", df.residual_threshold),
        };
        let k_ladder = KLadder {
            k_max: pick(o.k_max, "k_max", 1e-3),
            k_min: pick(o.k_min, "k_min", 1e-6),
            per_decade: pick(o.k_per_decade, "k_per_decade", 4.0) as usize,
        };

        let material = o.material.unwrap_or(Material::Perfect);
        let dielectric = match material {
            Material::Perfect => DielectricModel::Perfect,
            Material::Silicon => DielectricModel::silicon(&constants),
            Material::Silica => DielectricModel::silica(&constants),
            Material::Tabulated => {
                let path = o
                    .dielectric_file
                    .as_ref()
                    .ok_or_else(|| Error::Config("--material tabulated needs --dielectric-file".into()))?;
                DielectricModel::Tabulated(Tabulated::from_file(path, &constants)?)
            }
        };
        let polarizability = match &o.polarizability_file {
            Some(p) => PolarizabilityModel::Tabulated(Tabulated::from_file(p, &constants)?),
            None => PolarizabilityModel::hydrogen(&constants),
        };
        let thickness_bohr = match (&o.thickness, o.bulk) {
            (Some(t), _) => {
                let d = constants.parse_length(t)?;
                if !(d > 0.0) {
                    return Err(Error::Domain(format!("slab thickness must be positive, got {t}")));
                }
                Some(d)
            }
            _ => None,
        };
        let selection = if let Some(k) = o.k {
            if !(k > 0.0) {
                return Err(Error::Domain(format!("wavevector must be positive, got {k}")));
            }
            Self::select_energy(constants.wavevector_to_energy(k), &constants)?
        } else if let Some(e) = o.energy {
            Self::select_energy(e, &constants)?
        } else {
            let h = parse_height(o.height.as_deref().unwrap_or("10cm"), &constants)?;
            Self::select_energy(constants.height_to_energy(h)?.energy, &constants)?
        };
        let format = o.format.unwrap_or(match command {
            Command::Table1 | Command::Table2 | Command::Table3 | Command::Table4 => Format::Text,
            _ => Format::Csv,
        });
        let cache_dir = if o.no_cache { None } else { Some(o.cache_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))) };
        Ok(Self {
            command,
            material,
            dielectric_file: o.dielectric_file,
            polarizability_file: o.polarizability_file,
            thickness_bohr,
            selection,
            table,
            controls,
            fit,
            k_ladder,
            constants,
            cache_dir,
            format,
            out: o.out,
            dielectric,
            polarizability,
        })
    }

    fn select_energy(energy: f64, constants: &Constants) -> Result<EnergySelection> {
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::Domain(format!("energy must be positive, got {energy}")));
        }
        let height_m = constants.energy_to_height(energy);
        Ok(EnergySelection {
            energy_hartree: energy,
            k_bohr_inv: constants.energy_to_wavevector(energy)?,
            height_m,
            gh_m2_s2: constants.gravity_si * height_m,
        })
    }

    /// The mirror chosen by --material and --bulk/--thickness.
    pub fn mirror(&self) -> Result<MirrorSpec> {
        match self.thickness_bohr {
            Some(d) => MirrorSpec::slab(self.dielectric.clone(), d),
            None => Ok(MirrorSpec::bulk(self.dielectric.clone())),
        }
    }
}
