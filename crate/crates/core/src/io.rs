//! Run configuration and the plain-text output formats.
//!
//! Config and manifest files are `key = value` lines with `#` comments.
//! Field dumps are CSV with one row per LGL node. Rows run over the global
//! node grid with x fastest: row `r` holds global node
//! `(gi, gj) = (r % (nx n), r / (nx n))`, where `gi = i n + alpha` and
//! `gj = j n + beta` for `n = k + 1`. A stride `s > 1` keeps only the nodes
//! with `gi % s == 0` and `gj % s == 0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::dg::nodal_divergence;
use crate::error::{Error, Result};
use crate::fluxes::{InterfaceFlux, SpeedMode};
use crate::mesh::{ElementField, Mesh2D};
use crate::physics::{entropy_density, pressure_unchecked, ConservedState, GasModel, Primitive, DEFAULT_EPS_ADM};
use crate::sbp::{SbpOperators, MAX_ORDER};
use crate::time_integration::OutputRecord;

/// Column header of a field dump.
pub const DUMP_HEADER: &str = "x,y,rho,ux,uy,uz,Bx,By,Bz,p,divB,U";
const DUMP_COLUMNS: usize = 12;

/// Interface flux family selectable from a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxFamily {
    EsHll,
    Ec,
}

/// Boundary conditions to run a case with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryOverride {
    /// Whatever the case prescribes.
    Case,
    Periodic,
    Outflow,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub k: usize,
    /// `None` uses the case's default grid.
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// `None` uses `0.6 / (2k + 1)`.
    pub cfl: Option<f64>,
    pub gamma: Option<f64>,
    pub t_final: Option<f64>,
    pub ldf: bool,
    pub oedg: bool,
    pub pp: bool,
    pub eps_adm: f64,
    /// `None` writes output only at the final time.
    pub output_interval: Option<f64>,
    pub output_dir: PathBuf,
    pub flux_mode: SpeedMode,
    pub interface_flux: FluxFamily,
    pub boundary: BoundaryOverride,
    /// 0 uses every available core; 1 gives bitwise reproducible runs.
    pub threads: usize,
    pub seed: u64,
    pub stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: "orszag_tang".into(),
            k: 2,
            nx: None,
            ny: None,
            cfl: None,
            gamma: None,
            t_final: None,
            ldf: true,
            oedg: true,
            pp: true,
            eps_adm: DEFAULT_EPS_ADM,
            output_interval: None,
            output_dir: PathBuf::from("out"),
            flux_mode: SpeedMode::Hll,
            interface_flux: FluxFamily::EsHll,
            boundary: BoundaryOverride::Case,
            threads: 0,
            seed: 0,
            stride: 1,
        }
    }
}

const CONFIG_KEYS: [&str; 19] = [
    "case",
    "k",
    "nx",
    "ny",
    "cfl",
    "gamma",
    "t_final",
    "ldf",
    "oedg",
    "pp",
    "eps_adm",
    "output_interval",
    "output_dir",
    "flux_mode",
    "interface_flux",
    "boundary",
    "threads",
    "seed",
    "stride",
];

/// Splits `key = value` lines, dropping comments and blank lines.
/// Duplicate keys are rejected.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: line_no, msg: format!("expected `key = value`, got `{line}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Parse { line: line_no, msg: "empty key".into() });
        }
        if out.iter().any(|(_, k, _)| k == key) {
            return Err(Error::Parse { line: line_no, msg: format!("duplicate key `{key}`") });
        }
        out.push((line_no, key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn parse_err(line: usize, key: &str, value: &str) -> Error {
    Error::Parse { line, msg: format!("invalid value `{value}` for `{key}`") }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, key, value))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| parse_err(line, key, value))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(parse_err(line, key, value)),
    }
}

fn parse_opt<T>(value: &str, none: &str, f: impl FnOnce() -> Result<T>) -> Result<Option<T>> {
    if value == none {
        Ok(None)
    } else {
        f().map(Some)
    }
}

fn show_opt<T: std::fmt::Debug>(v: &Option<T>, none: &str) -> String {
    match v {
        Some(x) => format!("{x:?}"),
        None => none.to_string(),
    }
}

impl RunConfig {
    /// Parse a config file. Missing keys keep their defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (line, key, value) in parse_key_values(text)? {
            let v = value.as_str();
            match key.as_str() {
                "case" => cfg.case = v.to_string(),
                "k" => cfg.k = parse_usize(line, &key, v)?,
                "nx" => cfg.nx = parse_opt(v, "auto", || parse_usize(line, &key, v))?,
                "ny" => cfg.ny = parse_opt(v, "auto", || parse_usize(line, &key, v))?,
                "cfl" => cfg.cfl = parse_opt(v, "auto", || parse_f64(line, &key, v))?,
                "gamma" => cfg.gamma = parse_opt(v, "auto", || parse_f64(line, &key, v))?,
                "t_final" => cfg.t_final = parse_opt(v, "auto", || parse_f64(line, &key, v))?,
                "ldf" => cfg.ldf = parse_bool(line, &key, v)?,
                "oedg" => cfg.oedg = parse_bool(line, &key, v)?,
                "pp" => cfg.pp = parse_bool(line, &key, v)?,
                "eps_adm" => cfg.eps_adm = parse_f64(line, &key, v)?,
                "output_interval" => cfg.output_interval = parse_opt(v, "none", || parse_f64(line, &key, v))?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                "flux_mode" => {
                    cfg.flux_mode = match v {
                        "hll" => SpeedMode::Hll,
                        "lf" => SpeedMode::Lf,
                        _ => return Err(parse_err(line, &key, v)),
                    }
                }
                "interface_flux" => {
                    cfg.interface_flux = match v {
                        "es_hll" => FluxFamily::EsHll,
                        "ec" => FluxFamily::Ec,
                        _ => return Err(parse_err(line, &key, v)),
                    }
                }
                "boundary" => {
                    cfg.boundary = match v {
                        "case" => BoundaryOverride::Case,
                        "periodic" => BoundaryOverride::Periodic,
                        "outflow" => BoundaryOverride::Outflow,
                        _ => return Err(parse_err(line, &key, v)),
                    }
                }
                "threads" => cfg.threads = parse_usize(line, &key, v)?,
                "seed" => cfg.seed = v.parse().map_err(|_| parse_err(line, &key, v))?,
                "stride" => cfg.stride = parse_usize(line, &key, v)?,
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key `{key}` (known: {})", CONFIG_KEYS.join(", ")),
                    })
                }
            }
        }
        Ok(cfg)
    }

    /// Serialize every key; `from_text(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let flux_mode = match self.flux_mode {
            SpeedMode::Hll => "hll",
            SpeedMode::Lf => "lf",
        };
        let family = match self.interface_flux {
            FluxFamily::EsHll => "es_hll",
            FluxFamily::Ec => "ec",
        };
        let boundary = match self.boundary {
            BoundaryOverride::Case => "case",
            BoundaryOverride::Periodic => "periodic",
            BoundaryOverride::Outflow => "outflow",
        };
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("case", self.case.clone());
        put("k", self.k.to_string());
        put("nx", show_opt(&self.nx, "auto"));
        put("ny", show_opt(&self.ny, "auto"));
        put("cfl", show_opt(&self.cfl, "auto"));
        put("gamma", show_opt(&self.gamma, "auto"));
        put("t_final", show_opt(&self.t_final, "auto"));
        put("ldf", self.ldf.to_string());
        put("oedg", self.oedg.to_string());
        put("pp", self.pp.to_string());
        put("eps_adm", format!("{:?}", self.eps_adm));
        put("output_interval", show_opt(&self.output_interval, "none"));
        put("output_dir", self.output_dir.display().to_string());
        put("flux_mode", flux_mode.into());
        put("interface_flux", family.into());
        put("boundary", boundary.into());
        put("threads", self.threads.to_string());
        put("seed", self.seed.to_string());
        put("stride", self.stride.to_string());
        s
    }

    /// Range checks that do not need the case table.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(1..=MAX_ORDER).contains(&self.k) {
            return bad(format!("k must be in 1..={MAX_ORDER}, got {}", self.k));
        }
        if self.nx == Some(0) || self.ny == Some(0) {
            return bad("grid sizes must be positive".into());
        }
        if let Some(c) = self.cfl {
            if !(c > 0.0) {
                return bad(format!("cfl must be positive, got {c}"));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 1.0 && g <= 5.0 / 3.0) {
                return bad(format!("gamma must lie in (1, 5/3], got {g}"));
            }
        }
        if let Some(t) = self.t_final {
            if !(t >= 0.0) {
                return bad(format!("t_final must be non-negative, got {t}"));
            }
        }
        if let Some(dt) = self.output_interval {
            if !(dt > 0.0) {
                return bad(format!("output_interval must be positive, got {dt}"));
            }
        }
        if !(self.eps_adm > 0.0) {
            return bad(format!("eps_adm must be positive, got {}", self.eps_adm));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        let dir = self.output_dir.to_string_lossy();
        for (key, v) in [("case", self.case.as_str()), ("output_dir", dir.as_ref())] {
            if v.is_empty() || v.trim() != v || v.contains(['#', '\n', '\r']) {
                return bad(format!("{key} must be non-empty without `#`, line breaks or surrounding spaces"));
            }
        }
        Ok(())
    }

    pub fn flux(&self) -> InterfaceFlux {
        match self.interface_flux {
            FluxFamily::EsHll => InterfaceFlux::EsHll(self.flux_mode),
            FluxFamily::Ec => InterfaceFlux::Ec,
        }
    }

    /// SHA-256 of the serialized config, lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Sidecar metadata of a field dump.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub config_hash: String,
    pub case: String,
    pub k: usize,
    pub nx: usize,
    pub ny: usize,
    pub gamma: f64,
    /// `[x0, x1, y0, y1]`.
    pub domain: [f64; 4],
    pub time: f64,
    pub steps: usize,
    pub wall_time_s: f64,
    pub stride: usize,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let [x0, x1, y0, y1] = self.domain;
        format!(
            "config_hash = {}\ncase = {}\nk = {}\nnx = {}\nny = {}\ngamma = {:?}\ndomain = {:?} {:?} {:?} {:?}\ntime = {:?}\nsteps = {}\nwall_time_s = {:?}\nstride = {}\n",
            self.config_hash, self.case, self.k, self.nx, self.ny, self.gamma, x0, x1, y0, y1, self.time, self.steps,
            self.wall_time_s, self.stride
        )
    }

    /// Every key is required; unknown keys are rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let pairs = parse_key_values(text)?;
        let mut map: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        const KEYS: [&str; 11] =
            ["config_hash", "case", "k", "nx", "ny", "gamma", "domain", "time", "steps", "wall_time_s", "stride"];
        for (line, key, value) in &pairs {
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Parse { line: *line, msg: format!("unknown manifest key `{key}`") });
            }
            map.insert(key.as_str(), (*line, value.as_str()));
        }
        let get = |key: &str| -> Result<(usize, &str)> {
            map.get(key).copied().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing manifest key `{key}`") })
        };
        let f = |key: &str| -> Result<f64> {
            let (line, v) = get(key)?;
            parse_f64(line, key, v)
        };
        let u = |key: &str| -> Result<usize> {
            let (line, v) = get(key)?;
            parse_usize(line, key, v)
        };
        let (dline, dvalue) = get("domain")?;
        let parts: Vec<f64> = dvalue
            .split_whitespace()
            .map(|p| parse_f64(dline, "domain", p))
            .collect::<Result<_>>()?;
        let domain: [f64; 4] = parts.try_into().map_err(|_| parse_err(dline, "domain", dvalue))?;
        Ok(Self {
            config_hash: get("config_hash")?.1.to_string(),
            case: get("case")?.1.to_string(),
            k: u("k")?,
            nx: u("nx")?,
            ny: u("ny")?,
            gamma: f("gamma")?,
            domain,
            time: f("time")?,
            steps: u("steps")?,
            wall_time_s: f("wall_time_s")?,
            stride: u("stride")?,
        })
    }
}

/// Sidecar path of a dump: `field.csv` -> `field.manifest`.
pub fn manifest_path(dump: &Path) -> PathBuf {
    dump.with_extension("manifest")
}

/// Render a field as dump CSV.
pub fn field_dump_text(field: &ElementField, sbp: &SbpOperators, mesh: &Mesh2D, gas: GasModel, stride: usize) -> String {
    let n = sbp.n();
    let div = nodal_divergence(field, sbp, mesh);
    let (gx, gy) = (mesh.nx * n, mesh.ny * n);
    let stride = stride.max(1);
    let mut s = String::with_capacity(gx * gy * 12 * 24 / (stride * stride) + 64);
    s.push_str(DUMP_HEADER);
    s.push('\n');
    for gj in (0..gy).step_by(stride) {
        let (j, beta) = (gj / n, gj % n);
        for gi in (0..gx).step_by(stride) {
            let (i, alpha) = (gi / n, gi % n);
            let c = mesh.cell_index(i, j);
            let w = field.node(c, alpha, beta);
            let (x, y) = mesh.node_position(sbp, i, j, alpha, beta);
            let p = pressure_unchecked(w, gas);
            let u = w.velocity();
            let b = w.magnetic();
            let ent = entropy_density(w.rho(), p, gas);
            let row = [x, y, w.rho(), u[0], u[1], u[2], b[0], b[1], b[2], p, div[(c * n + beta) * n + alpha], ent];
            for (col, v) in row.iter().enumerate() {
                if col > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v:.16e}");
            }
            s.push('\n');
        }
    }
    s
}

/// Write a dump and its manifest.
pub fn write_field_dump(
    path: &Path,
    field: &ElementField,
    sbp: &SbpOperators,
    mesh: &Mesh2D,
    gas: GasModel,
    manifest: &Manifest,
) -> Result<()> {
    fs::write(path, field_dump_text(field, sbp, mesh, gas, manifest.stride))?;
    fs::write(manifest_path(path), manifest.to_text())?;
    Ok(())
}

/// Parsed dump rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpTable {
    pub rows: Vec<[f64; DUMP_COLUMNS]>,
}

pub fn parse_field_dump(text: &str) -> Result<DumpTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end_matches('\r') == DUMP_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: format!("expected header `{DUMP_HEADER}`") }),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut row = [0.0; DUMP_COLUMNS];
        let mut count = 0;
        for (c, cell) in line.split(',').enumerate() {
            if c >= DUMP_COLUMNS {
                count = c + 1;
                break;
            }
            row[c] = cell
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("bad number `{cell}`") })?;
            count = c + 1;
        }
        if count != DUMP_COLUMNS {
            return Err(Error::Parse { line: line_no, msg: format!("expected {DUMP_COLUMNS} columns") });
        }
        rows.push(row);
    }
    Ok(DumpTable { rows })
}

/// Rebuild the nodal field of an unthinned dump.
pub fn dump_to_field(table: &DumpTable, manifest: &Manifest) -> Result<ElementField> {
    if manifest.stride != 1 {
        return Err(Error::Config(format!("cannot rebuild a field from a dump with stride {}", manifest.stride)));
    }
    if !(1..=MAX_ORDER).contains(&manifest.k) || manifest.nx == 0 || manifest.ny == 0 {
        return Err(Error::Config("manifest has an invalid grid".into()));
    }
    let gas = GasModel::new(manifest.gamma)?;
    let n = manifest.k + 1;
    let (gx, gy) = (manifest.nx * n, manifest.ny * n);
    let expected = gx.checked_mul(gy).ok_or_else(|| Error::Config("grid too large".into()))?;
    if table.rows.len() != expected {
        return Err(Error::Config(format!("dump has {} rows, manifest implies {expected}", table.rows.len())));
    }
    let mut field = ElementField::zeros(manifest.k, manifest.nx, manifest.ny);
    for (r, row) in table.rows.iter().enumerate() {
        let (gi, gj) = (r % gx, r / gx);
        let (i, alpha, j, beta) = (gi / n, gi % n, gj / n, gj % n);
        let prim = Primitive { rho: row[2], u: [row[3], row[4], row[5]], b: [row[6], row[7], row[8]], p: row[9] };
        let c = j * manifest.nx + i;
        field.data[(c * n + beta) * n + alpha] = prim.to_conserved(gas);
    }
    Ok(field)
}

/// Entropy time series as CSV `t,total_entropy`.
pub fn entropy_series_text(records: &[OutputRecord]) -> String {
    let mut s = String::from("t,total_entropy\n");
    for r in records {
        let _ = writeln!(s, "{:.16e},{:.16e}", r.t, r.total_entropy);
    }
    s
}

pub fn write_entropy_series(path: &Path, records: &[OutputRecord]) -> Result<()> {
    fs::write(path, entropy_series_text(records))?;
    Ok(())
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub l2: f64,
    pub l2_order: Option<f64>,
    pub linf: f64,
    pub linf_order: Option<f64>,
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("N,L2_error,L2_order,Linf_error,Linf_order\n");
    let opt = |o: Option<f64>| o.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
    for r in rows {
        let _ = writeln!(s, "{},{:.4e},{},{:.4e},{}", r.n, r.l2, opt(r.l2_order), r.linf, opt(r.linf_order));
    }
    s
}

/// True when every node of `field` is admissible; used by the dump tools.
pub fn all_admissible(field: &ElementField, gas: GasModel, eps: f64) -> bool {
    field.data.iter().all(|w: &ConservedState| w.is_admissible(gas, eps))
}
