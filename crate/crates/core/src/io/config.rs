//! Flat `key = value unit` chip configuration.
//!
//! One setting per line, `#` starts a comment. Every value carries its unit
//! (`ohm`, `ff`, `pf`, `ghz`, `deg`, `v`, `db`), except the few
//! dimensionless keys (`cont.fet.shape`, point counts, pass count and
//! `grid.spacing`). Unknown, duplicated and missing keys are errors, and
//! so is any value that breaks a model invariant. [`write_config`] emits the
//! canonical form, which parses back to an identical [`ChipConfig`].

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::attenuator::{AttenuatorChipSpec, ContinuousUnitSpec, LineSpec, SimplifiedTUnitSpec, TTypeUnitSpec};
use crate::design::{default_chip, synth_ttype, DEFAULT_F0_HZ};
use crate::devices::{ContinuousFetModel, ResistorModel, SwitchModel};
use crate::error::{Error, Result};
use crate::netcore::FrequencyGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Linear,
    Log,
}

/// Chip description plus the sweep, calibration and tuning settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipConfig {
    pub chip: AttenuatorChipSpec,
    /// Relative attenuation the T-type unit is synthesized and tuned for.
    pub unit4_target_db: f64,
    pub unit2_target_db: f64,
    pub grid_start_hz: f64,
    pub grid_stop_hz: f64,
    pub grid_points: usize,
    pub grid_spacing: GridSpacing,
    pub f0_hz: f64,
    /// Coarse state step of sweeps and reports, 0.5 or 0.1 dB.
    pub step_db: f64,
    pub cal_step_db: f64,
    pub cal_range_db: f64,
    pub tune_points: usize,
    pub tune_passes: usize,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            chip: default_chip(),
            unit4_target_db: 4.0,
            unit2_target_db: 2.0,
            grid_start_hz: 20e9,
            grid_stop_hz: 100e9,
            grid_points: 81,
            grid_spacing: GridSpacing::Linear,
            f0_hz: DEFAULT_F0_HZ,
            step_db: 0.5,
            cal_step_db: 0.1,
            cal_range_db: 2.0,
            tune_points: 17,
            tune_passes: 3,
        }
    }
}

impl ChipConfig {
    pub fn grid(&self) -> Result<FrequencyGrid> {
        grid_of(self.grid_spacing, self.grid_start_hz, self.grid_stop_hz, self.grid_points)
    }

    /// Grid over the same span with `tune_points` points, used by the
    /// tuning objectives.
    pub fn tuning_band(&self) -> Result<FrequencyGrid> {
        grid_of(self.grid_spacing, self.grid_start_hz, self.grid_stop_hz, self.tune_points)
    }

    pub fn validate(&self) -> Result<()> {
        self.chip.validate()?;
        for (name, v) in [("unit4.target", self.unit4_target_db), ("unit2.target", self.unit2_target_db)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be > 0 dB, got {v}")));
            }
        }
        if !(self.grid_start_hz < self.grid_stop_hz) {
            return Err(Error::InvalidInput("grid.start must be below grid.stop".into()));
        }
        if self.grid_points < 2 || self.tune_points < 2 {
            return Err(Error::InvalidInput("grids need at least 2 points".into()));
        }
        self.grid()?;
        if !(self.f0_hz > 0.0 && self.f0_hz.is_finite()) {
            return Err(Error::InvalidInput(format!("run.f0 must be > 0, got {}", self.f0_hz)));
        }
        if self.step_db != 0.5 && self.step_db != 0.1 {
            return Err(Error::InvalidInput(format!("run.step must be 0.5 or 0.1 dB, got {}", self.step_db)));
        }
        if !(self.cal_step_db > 0.0 && self.cal_range_db > 0.0 && self.cal_step_db <= self.cal_range_db) {
            return Err(Error::InvalidInput("calibration needs 0 < run.cal_step <= run.cal_range".into()));
        }
        if self.tune_passes == 0 {
            return Err(Error::InvalidInput("tune.passes must be at least 1".into()));
        }
        Ok(())
    }
}

fn grid_of(spacing: GridSpacing, start: f64, stop: f64, n: usize) -> Result<FrequencyGrid> {
    match spacing {
        GridSpacing::Linear => FrequencyGrid::linear(start, stop, n),
        GridSpacing::Log => FrequencyGrid::log(start, stop, n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Ohm,
    Cap,
    Ghz,
    Deg,
    Volt,
    Db,
    Real,
    Count,
    Spacing,
}

impl Kind {
    fn units(self) -> &'static [&'static str] {
        match self {
            Kind::Ohm => &["ohm"],
            Kind::Cap => &["ff", "pf"],
            Kind::Ghz => &["ghz"],
            Kind::Deg => &["deg", "rad"],
            Kind::Volt => &["v"],
            Kind::Db => &["db"],
            Kind::Real | Kind::Count | Kind::Spacing => &[],
        }
    }

    /// SI value of the decimal `text` given in `unit`. Decade units shift
    /// the decimal exponent before conversion, so `0.1 ff` is exactly the
    /// double nearest 1e-16.
    fn to_si(self, text: &str, unit: &str) -> std::result::Result<f64, String> {
        let decade = self.decade(unit);
        let (mantissa, exp) = match text.find(['e', 'E']) {
            Some(k) => {
                let e: i32 = text[k + 1..].parse().map_err(|_| format!("`{text}` is not a finite number"))?;
                (&text[..k], e)
            }
            None => (text, 0),
        };
        let q = parse_number(&format!("{mantissa}e{}", exp + decade)).map_err(|_| format!("`{text}` is not a finite number"))?;
        Ok(match (self, unit) {
            (Kind::Deg, "deg") => q.to_radians(),
            _ => q,
        })
    }

    /// Power of ten from `unit` to SI.
    fn decade(self, unit: &str) -> i32 {
        match (self, unit) {
            (Kind::Cap, "pf") => -12,
            (Kind::Cap, _) => -15,
            (Kind::Ghz, _) => 9,
            _ => 0,
        }
    }

    fn in_unit(self, v: f64) -> f64 {
        match self {
            Kind::Cap => v * 1e15,
            Kind::Ghz => v / 1e9,
            Kind::Deg => v.to_degrees(),
            _ => v,
        }
    }
}

const KEYS: &[(&str, Kind)] = &[
    ("z0", Kind::Ohm),
    ("unit4.target", Kind::Db),
    ("unit4.r1", Kind::Ohm),
    ("unit4.r1.c_par", Kind::Cap),
    ("unit4.r2", Kind::Ohm),
    ("unit4.r2.c_par", Kind::Cap),
    ("unit4.c_comp", Kind::Cap),
    ("unit4.m1.r_on", Kind::Ohm),
    ("unit4.m1.c_off", Kind::Cap),
    ("unit4.m1.c_par_on", Kind::Cap),
    ("unit4.m2.r_on", Kind::Ohm),
    ("unit4.m2.c_off", Kind::Cap),
    ("unit4.m2.c_par_on", Kind::Cap),
    ("tl_a.z_c", Kind::Ohm),
    ("tl_a.theta", Kind::Deg),
    ("tl_a.f_ref", Kind::Ghz),
    ("unit2.target", Kind::Db),
    ("unit2.r1", Kind::Ohm),
    ("unit2.r1.c_par", Kind::Cap),
    ("unit2.r2", Kind::Ohm),
    ("unit2.r2.c_par", Kind::Cap),
    ("unit2.c_comp", Kind::Cap),
    ("unit2.m2.r_on", Kind::Ohm),
    ("unit2.m2.c_off", Kind::Cap),
    ("unit2.m2.c_par_on", Kind::Cap),
    ("tl_b.z_c", Kind::Ohm),
    ("tl_b.theta", Kind::Deg),
    ("tl_b.f_ref", Kind::Ghz),
    ("cont.r2", Kind::Ohm),
    ("cont.r2.c_par", Kind::Cap),
    ("cont.fet.r_min", Kind::Ohm),
    ("cont.fet.r_max", Kind::Ohm),
    ("cont.fet.vc_lo", Kind::Volt),
    ("cont.fet.vc_hi", Kind::Volt),
    ("cont.fet.shape", Kind::Real),
    ("grid.start", Kind::Ghz),
    ("grid.stop", Kind::Ghz),
    ("grid.points", Kind::Count),
    ("grid.spacing", Kind::Spacing),
    ("run.f0", Kind::Ghz),
    ("run.step", Kind::Db),
    ("run.cal_step", Kind::Db),
    ("run.cal_range", Kind::Db),
    ("tune.points", Kind::Count),
    ("tune.passes", Kind::Count),
];

/// Keys `synth` can fill in from the unit targets.
const SYNTH_KEYS: &[&str] = &["unit4.r1", "unit4.r2", "unit2.r1", "unit2.r2"];

#[derive(Debug, Clone)]
enum Val {
    Num(f64),
    Count(usize),
    Spacing(GridSpacing),
}

struct Doc {
    vals: HashMap<&'static str, (Val, usize)>,
    end_line: usize,
}

impl Doc {
    fn parse(text: &str) -> Result<Self> {
        let mut vals = HashMap::new();
        let mut end_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            end_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let &(name, kind) = KEYS
                .iter()
                .find(|(k, _)| *k == key)
                .ok_or_else(|| Error::config(line, format!("unknown key `{key}`")))?;
            let val = parse_value(kind, value.trim()).map_err(|msg| Error::config(line, format!("`{key}`: {msg}")))?;
            if vals.insert(name, (val, line)).is_some() {
                return Err(Error::config(line, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { vals, end_line })
    }

    fn missing(&self, key: &str) -> Error {
        Error::config(self.end_line, format!("missing required key `{key}`"))
    }

    fn num(&self, key: &'static str) -> Result<f64> {
        match self.vals.get(key) {
            Some((Val::Num(v), _)) => Ok(*v),
            Some(_) => unreachable!("key kinds are fixed by the table"),
            None => Err(self.missing(key)),
        }
    }

    fn count(&self, key: &'static str) -> Result<usize> {
        match self.vals.get(key) {
            Some((Val::Count(v), _)) => Ok(*v),
            Some(_) => unreachable!("key kinds are fixed by the table"),
            None => Err(self.missing(key)),
        }
    }

    fn spacing(&self, key: &'static str) -> Result<GridSpacing> {
        match self.vals.get(key) {
            Some((Val::Spacing(v), _)) => Ok(*v),
            Some(_) => unreachable!("key kinds are fixed by the table"),
            None => Err(self.missing(key)),
        }
    }

    /// Runs `check` and attributes a failure to the line of `key`.
    fn at<T>(&self, key: &str, check: Result<T>) -> Result<T> {
        check.map_err(|e| {
            let line = self.vals.get(key).map_or(self.end_line, |(_, l)| *l);
            Error::config(line, format!("`{key}`: {e}"))
        })
    }
}

fn parse_value(kind: Kind, text: &str) -> std::result::Result<Val, String> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    match kind {
        Kind::Count => match tokens.as_slice() {
            [n] => n.parse::<usize>().map(Val::Count).map_err(|_| format!("expected a whole number, got `{n}`")),
            _ => Err(format!("expected a bare whole number, got `{text}`")),
        },
        Kind::Spacing => match tokens.as_slice() {
            ["linear"] => Ok(Val::Spacing(GridSpacing::Linear)),
            ["log"] => Ok(Val::Spacing(GridSpacing::Log)),
            _ => Err(format!("expected `linear` or `log`, got `{text}`")),
        },
        Kind::Real => match tokens.as_slice() {
            [n] => parse_number(n).map(Val::Num),
            _ => Err(format!("expected a bare number, got `{text}`")),
        },
        _ => match tokens.as_slice() {
            [n, unit] => {
                let unit = unit.to_ascii_lowercase();
                if !kind.units().contains(&unit.as_str()) {
                    return Err(format!("unit `{unit}` does not fit; expected {}", kind.units().join(" or ")));
                }
                Ok(Val::Num(kind.to_si(n, &unit)?))
            }
            [_] => Err(format!("missing unit; expected {}", kind.units().join(" or "))),
            _ => Err(format!("expected `<number> <unit>`, got `{text}`")),
        },
    }
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn resistor(doc: &Doc, r: &'static str, c_par: &'static str) -> Result<ResistorModel> {
    let m = ResistorModel {
        r: doc.num(r)?,
        c_par: doc.num(c_par)?,
    };
    doc.at(r, m.validate())?;
    Ok(m)
}

fn switch(doc: &Doc, [r_on, c_off, c_par_on]: [&'static str; 3]) -> Result<SwitchModel> {
    let m = SwitchModel {
        r_on: doc.num(r_on)?,
        c_off: doc.num(c_off)?,
        c_par_on: doc.num(c_par_on)?,
    };
    doc.at(r_on, m.validate())?;
    Ok(m)
}

fn line(doc: &Doc, [z_c, theta, f_ref]: [&'static str; 3]) -> Result<LineSpec> {
    let l = LineSpec {
        z_c: doc.num(z_c)?,
        theta_ref: doc.num(theta)?,
        f_ref: doc.num(f_ref)?,
    };
    doc.at(z_c, l.validate())?;
    Ok(l)
}

fn c_comp(doc: &Doc, key: &'static str) -> Result<f64> {
    let c = doc.num(key)?;
    if c < 0.0 {
        return Err(Error::config(doc.vals[key].1, format!("`{key}` must be >= 0")));
    }
    Ok(c)
}

fn build(doc: &Doc) -> Result<ChipConfig> {
    let chip = AttenuatorChipSpec {
        unit4: TTypeUnitSpec {
            r1: resistor(doc, "unit4.r1", "unit4.r1.c_par")?,
            r2: resistor(doc, "unit4.r2", "unit4.r2.c_par")?,
            c_comp: c_comp(doc, "unit4.c_comp")?,
            series_switch: switch(doc, ["unit4.m1.r_on", "unit4.m1.c_off", "unit4.m1.c_par_on"])?,
            shunt_switch: switch(doc, ["unit4.m2.r_on", "unit4.m2.c_off", "unit4.m2.c_par_on"])?,
        },
        tl_a: line(doc, ["tl_a.z_c", "tl_a.theta", "tl_a.f_ref"])?,
        unit2: SimplifiedTUnitSpec {
            r1: resistor(doc, "unit2.r1", "unit2.r1.c_par")?,
            r2: resistor(doc, "unit2.r2", "unit2.r2.c_par")?,
            c_comp: c_comp(doc, "unit2.c_comp")?,
            shunt_switch: switch(doc, ["unit2.m2.r_on", "unit2.m2.c_off", "unit2.m2.c_par_on"])?,
        },
        tl_b: line(doc, ["tl_b.z_c", "tl_b.theta", "tl_b.f_ref"])?,
        cont: ContinuousUnitSpec {
            r2: resistor(doc, "cont.r2", "cont.r2.c_par")?,
            fet: ContinuousFetModel {
                r_min: doc.num("cont.fet.r_min")?,
                r_max: doc.num("cont.fet.r_max")?,
                vc_lo: doc.num("cont.fet.vc_lo")?,
                vc_hi: doc.num("cont.fet.vc_hi")?,
                shape: doc.num("cont.fet.shape")?,
            },
        },
        z0: doc.num("z0")?,
    };
    doc.at("cont.fet.r_min", chip.cont.fet.validate())?;
    doc.at("z0", chip.validate())?;
    let cfg = ChipConfig {
        chip,
        unit4_target_db: doc.num("unit4.target")?,
        unit2_target_db: doc.num("unit2.target")?,
        grid_start_hz: doc.num("grid.start")?,
        grid_stop_hz: doc.num("grid.stop")?,
        grid_points: doc.count("grid.points")?,
        grid_spacing: doc.spacing("grid.spacing")?,
        f0_hz: doc.num("run.f0")?,
        step_db: doc.num("run.step")?,
        cal_step_db: doc.num("run.cal_step")?,
        cal_range_db: doc.num("run.cal_range")?,
        tune_points: doc.count("tune.points")?,
        tune_passes: doc.count("tune.passes")?,
    };
    cfg.validate().map_err(|e| Error::config(doc.end_line, e.to_string()))?;
    Ok(cfg)
}

/// Parses and fully validates a configuration.
pub fn parse_config(text: &str) -> Result<ChipConfig> {
    build(&Doc::parse(text)?)
}

/// Like [`parse_config`], but the series and shunt resistors of both
/// switched units may be absent. All four are then replaced by the
/// matched-pad values for the unit targets, with the parasitic capacitances
/// given in the file.
pub fn parse_config_for_synth(text: &str) -> Result<ChipConfig> {
    let mut doc = Doc::parse(text)?;
    let t4 = doc.num("unit4.target")?;
    let t2 = doc.num("unit2.target")?;
    let z0 = doc.num("z0")?;
    let at = |key: &str, r: Result<(f64, f64)>| doc.at(key, r);
    let (r1_4, r2_4) = at("unit4.target", synth_ttype(t4, z0))?;
    let (r1_2, r2_2) = at("unit2.target", synth_ttype(t2, z0))?;
    for (key, v) in SYNTH_KEYS.iter().zip([r1_4, r2_4, r1_2, r2_2]) {
        let line = doc.vals.get(key).map_or(0, |(_, l)| *l);
        doc.vals.insert(key, (Val::Num(v), line));
    }
    build(&doc)
}

/// Shortest round-trip digits of `v`, with the decimal point moved
/// `shift` places to the right. Exact: only the decimal exponent changes.
fn shifted_decimal(v: f64, shift: i32) -> String {
    let sci = format!("{v:e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if digits == "0" {
        return "0".into();
    }
    let e = exp + shift;
    if !(-12..=15).contains(&e) {
        return format!("{sign}{mantissa}e{e}");
    }
    let point = 1 + e;
    let n = digits.len() as i32;
    let body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point >= n {
        format!("{digits}{}", "0".repeat((point - n) as usize))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    format!("{sign}{body}")
}

/// Shortest text `q unit` with `kind.to_si(q, unit) == v`. Angles are
/// written in degrees when some degree value maps exactly, else in radians.
fn canonical_quantity(kind: Kind, v: f64, unit: &str) -> String {
    let plain = |unit: &str| {
        let text = shifted_decimal(v, -kind.decade(unit));
        if unit.is_empty() { text } else { format!("{text} {unit}") }
    };
    if kind != Kind::Deg {
        return plain(unit);
    }
    let q0 = kind.in_unit(v);
    let fits = |text: &str| kind.to_si(text, "deg") == Ok(v);
    for digits in 0..17 {
        let q: f64 = format!("{q0:.digits$e}").parse().expect("formatted float parses");
        let text = format!("{q}");
        if fits(&text) {
            return format!("{text} deg");
        }
    }
    plain("rad")
}

/// Canonical text of `cfg`: every key once, in a fixed order, with fixed
/// units. Capacitances are written in fF.
pub fn write_config(cfg: &ChipConfig) -> String {
    let c = &cfg.chip;
    let sw = |m: &SwitchModel| [m.r_on, m.c_off, m.c_par_on];
    let mut nums: HashMap<&str, f64> = HashMap::new();
    let mut put = |keys: &[&'static str], vals: &[f64]| {
        for (k, v) in keys.iter().zip(vals) {
            nums.insert(k, *v);
        }
    };
    put(&["z0", "unit4.target", "unit2.target"], &[c.z0, cfg.unit4_target_db, cfg.unit2_target_db]);
    put(
        &["unit4.r1", "unit4.r1.c_par", "unit4.r2", "unit4.r2.c_par", "unit4.c_comp"],
        &[c.unit4.r1.r, c.unit4.r1.c_par, c.unit4.r2.r, c.unit4.r2.c_par, c.unit4.c_comp],
    );
    put(&["unit4.m1.r_on", "unit4.m1.c_off", "unit4.m1.c_par_on"], &sw(&c.unit4.series_switch));
    put(&["unit4.m2.r_on", "unit4.m2.c_off", "unit4.m2.c_par_on"], &sw(&c.unit4.shunt_switch));
    put(&["tl_a.z_c", "tl_a.theta", "tl_a.f_ref"], &[c.tl_a.z_c, c.tl_a.theta_ref, c.tl_a.f_ref]);
    put(
        &["unit2.r1", "unit2.r1.c_par", "unit2.r2", "unit2.r2.c_par", "unit2.c_comp"],
        &[c.unit2.r1.r, c.unit2.r1.c_par, c.unit2.r2.r, c.unit2.r2.c_par, c.unit2.c_comp],
    );
    put(&["unit2.m2.r_on", "unit2.m2.c_off", "unit2.m2.c_par_on"], &sw(&c.unit2.shunt_switch));
    put(&["tl_b.z_c", "tl_b.theta", "tl_b.f_ref"], &[c.tl_b.z_c, c.tl_b.theta_ref, c.tl_b.f_ref]);
    let fet = &c.cont.fet;
    put(
        &["cont.r2", "cont.r2.c_par", "cont.fet.r_min", "cont.fet.r_max", "cont.fet.vc_lo", "cont.fet.vc_hi", "cont.fet.shape"],
        &[c.cont.r2.r, c.cont.r2.c_par, fet.r_min, fet.r_max, fet.vc_lo, fet.vc_hi, fet.shape],
    );
    put(
        &["grid.start", "grid.stop", "run.f0", "run.step", "run.cal_step", "run.cal_range"],
        &[cfg.grid_start_hz, cfg.grid_stop_hz, cfg.f0_hz, cfg.step_db, cfg.cal_step_db, cfg.cal_range_db],
    );

    let mut out = String::from("# atten-forge chip configuration\n");
    let mut group = "";
    for &(key, kind) in KEYS {
        let g = key.split('.').next().unwrap_or(key);
        if g != group && !group.is_empty() {
            out.push('\n');
        }
        group = g;
        let value = match kind {
            Kind::Count => match key {
                "grid.points" => cfg.grid_points.to_string(),
                "tune.points" => cfg.tune_points.to_string(),
                _ => cfg.tune_passes.to_string(),
            },
            Kind::Spacing => match cfg.grid_spacing {
                GridSpacing::Linear => "linear".into(),
                GridSpacing::Log => "log".into(),
            },
            Kind::Real => canonical_quantity(kind, nums[key], ""),
            _ => {
                let unit = kind.units()[0];
                canonical_quantity(kind, nums[key], unit)
            }
        };
        let _ = writeln!(out, "{key} = {value}");
    }
    out
}
