//! Background configuration files, the nodal field format, and tabular reports.
//!
//! A background file is TOML:
//!
//! ```toml
//! [fluid]            # omit for dimensionless input on [-1, 0]
//! c = 1.0
//! g = 9.81
//! d_plus = 40.0
//! d_minus = 60.0
//!
//! upper_fraction = 0.4   # only without [fluid]
//!
//! [density]
//! lower = "1030 - 0.01*y"
//! upper = "1020"
//!
//! [shear]
//! lower_file = "shear_lower.txt"   # two columns y, value
//! upper = "3.4"
//! ```
//!
//! Expressions use the variable `y`; table paths are relative to the file.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::background::{background_from_branches, FluidParameters, StratifiedBackground};
use crate::error::{Error, Result};
use crate::grid::{HeightField, SlitGrid};
use crate::profile::{Branch, CubicSpline, PiecewiseProfile};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FluidSection {
    c: f64,
    g: f64,
    d_plus: f64,
    d_minus: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSection {
    lower: Option<String>,
    upper: Option<String>,
    lower_file: Option<PathBuf>,
    upper_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackgroundFile {
    fluid: Option<FluidSection>,
    upper_fraction: Option<f64>,
    density: ProfileSection,
    shear: ProfileSection,
}

/// Reads `x value` pairs (whitespace or comma separated, `#` comments).
pub fn read_table(path: &Path) -> Result<CubicSpline> {
    let text = std::fs::read_to_string(path)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 2 {
            return Err(Error::Format(format!(
                "{}:{}: expected two columns",
                path.display(),
                n + 1
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), n + 1)))
        };
        xs.push(parse(cols[0])?);
        ys.push(parse(cols[1])?);
    }
    CubicSpline::new(xs, ys)
}

fn branch(sec: &ProfileSection, lower: bool, name: &str, dir: &Path) -> Result<Branch> {
    let (e, f, key) = if lower {
        (&sec.lower, &sec.lower_file, "lower")
    } else {
        (&sec.upper, &sec.upper_file, "upper")
    };
    match (e, f) {
        (Some(src), None) => Branch::expr(src, "y")
            .map_err(|err| Error::config(format!("{name}.{key}"), err.to_string())),
        (None, Some(p)) => Ok(Branch::Table(read_table(&dir.join(p))?)),
        _ => Err(Error::config(
            format!("{name}.{key}"),
            "give exactly one of an expression or a table file",
        )),
    }
}

/// Parses a background description; `dir` resolves relative table paths.
pub fn parse_background(text: &str, dir: &Path) -> Result<StratifiedBackground> {
    let file: BackgroundFile =
        toml::from_str(text).map_err(|e| Error::config("background", e.message().to_string()))?;
    let dl = branch(&file.density, true, "density", dir)?;
    let du = branch(&file.density, false, "density", dir)?;
    let sl = branch(&file.shear, true, "shear", dir)?;
    let su = branch(&file.shear, false, "shear", dir)?;
    match (file.fluid, file.upper_fraction) {
        (Some(fl), None) => {
            let params = FluidParameters::new(fl.c, fl.g, fl.d_plus, fl.d_minus)?;
            let d = params.d();
            let density = PiecewiseProfile::new(-d, -params.d_plus, 0.0, dl, du)?;
            let shear = PiecewiseProfile::new(-d, -params.d_plus, 0.0, sl, su)?;
            StratifiedBackground::from_dimensional(&params, &density, &shear)
        }
        (None, Some(frac)) => {
            if !(frac > 0.0 && frac < 1.0) {
                return Err(Error::config("upper_fraction", "must lie in (0, 1)"));
            }
            background_from_branches(frac, (dl, du), (sl, su))
        }
        _ => Err(Error::config(
            "fluid",
            "give either a [fluid] section or a top-level upper_fraction, not both",
        )),
    }
}

pub fn load_background(path: &Path) -> Result<StratifiedBackground> {
    let text = std::fs::read_to_string(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    parse_background(&text, dir)
}

/// Background table: p, H, H_p, ρ, β_a, β_b with 15 significant digits.
pub fn write_background_report<W: Write>(
    bg: &StratifiedBackground,
    n_per_layer: usize,
    mut out: W,
) -> Result<()> {
    writeln!(out, "# background_hash = {}", bg.hash())?;
    writeln!(out, "# p_hat = {:.14e}", bg.p_hat)?;
    writeln!(out, "# p H H_p rho beta_a beta_b")?;
    for r in bg.report_rows(n_per_layer) {
        let line: Vec<String> = r.iter().map(|v| format!("{v:.14e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

const FIELD_MAGIC: &str = "# stratwave height field v1";

/// Writes a field: `key = value` header, then one `q p w` row per node in
/// flat-index order (both interface copies included).
pub fn write_field<W: Write>(
    field: &HeightField,
    extra: &[(String, String)],
    mut out: W,
) -> Result<()> {
    let g = &field.grid;
    let mut h = String::new();
    writeln!(h, "{FIELD_MAGIC}").ok();
    writeln!(h, "L = {:.16e}", g.l).ok();
    writeln!(h, "nq = {}", g.nq).ok();
    writeln!(h, "np_minus = {}", g.np_minus).ok();
    writeln!(h, "np_plus = {}", g.np_plus).ok();
    writeln!(h, "p_hat = {:.16e}", g.p_hat).ok();
    writeln!(h, "full = {}", g.full).ok();
    writeln!(h, "F = {:.16e}", field.f).ok();
    match field.eps {
        Some(e) => writeln!(h, "eps = {e:.16e}").ok(),
        None => writeln!(h, "eps = none").ok(),
    };
    writeln!(h, "background_hash = {}", field.bg_hash).ok();
    for (k, v) in extra {
        writeln!(h, "# {k} = {v}").ok();
    }
    writeln!(h, "data").ok();
    out.write_all(h.as_bytes())?;
    for i in 0..g.nq {
        for j in 0..g.col_len() {
            writeln!(
                out,
                "{:.16e} {:.16e} {:.16e}",
                g.q(i),
                g.p(j),
                field.at(i, j)
            )?;
        }
    }
    Ok(())
}

pub fn save_field(field: &HeightField, extra: &[(String, String)], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_field(field, extra, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_field<R: BufRead>(input: R) -> Result<HeightField> {
    let mut lines = input.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim() != FIELD_MAGIC {
        return Err(Error::Format("not a height field file".into()));
    }
    let mut kv = std::collections::HashMap::new();
    for line in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t == "data" {
            break;
        }
        if t.starts_with('#') || t.is_empty() {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header line `{t}`")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| {
        kv.get(k)
            .ok_or_else(|| Error::Format(format!("missing header key `{k}`")))
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|e| Error::Format(format!("header `{k}`: {e}")))
    };
    let int = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|e| Error::Format(format!("header `{k}`: {e}")))
    };
    let full = get("full")? == "true";
    let (l, nq, nm, np, ph) = (
        num("L")?,
        int("nq")?,
        int("np_minus")?,
        int("np_plus")?,
        num("p_hat")?,
    );
    let grid = if full {
        SlitGrid::full_domain(l, nq, nm, np, ph)?
    } else {
        SlitGrid::new(l, nq, nm, np, ph)?
    };
    let mut field = HeightField::zeros(grid, num("F")?, get("background_hash")?);
    field.eps = match get("eps")?.as_str() {
        "none" => None,
        _ => Some(num("eps")?),
    };
    let mut k = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let w = line
            .split_whitespace()
            .nth(2)
            .ok_or_else(|| Error::Format(format!("data row {k}: expected `q p w`")))?;
        if k >= field.w.len() {
            return Err(Error::Format("more data rows than grid nodes".into()));
        }
        field.w[k] = w
            .parse()
            .map_err(|e| Error::Format(format!("data row {k}: {e}")))?;
        k += 1;
    }
    if k != field.w.len() {
        return Err(Error::Format(format!(
            "expected {} data rows, found {k}",
            field.w.len()
        )));
    }
    Ok(field)
}

pub fn load_field(path: &Path) -> Result<HeightField> {
    let f = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(f))
}

/// One row of the branch summary.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRow {
    pub s: f64,
    pub f: f64,
    pub v0: f64,
    pub min_hp: f64,
    pub n_s: f64,
    pub flow_force_drift: f64,
    pub sup_sqrt_rho_hp: f64,
    pub stagnation_metric: f64,
    pub froude_slack: f64,
    pub nodal_ok: bool,
}

pub const BRANCH_CSV_HEADER: &str =
    "s,F,v0,min_hp,N_s,flow_force_drift,sup_sqrt_rho_hp,stagnation_metric,froude_slack,nodal_ok";

impl BranchRow {
    pub fn csv(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.s,
            self.f,
            self.v0,
            self.min_hp,
            self.n_s,
            self.flow_force_drift,
            self.sup_sqrt_rho_hp,
            self.stagnation_metric,
            self.froude_slack,
            self.nodal_ok
        )
    }
}
