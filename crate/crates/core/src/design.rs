//! Element synthesis, compensation and calibration searches, frequency
//! sweeps, and the band figures of merit.

use rayon::prelude::*;

use crate::attenuator::{
    chip_twoport, simplified_twoport, ttype_twoport, AttenuatorChipSpec, AttenuatorState, BitState,
    ContinuousUnitSpec, LabeledState, LineSpec, SimplifiedTUnitSpec, TTypeUnitSpec,
};
use crate::devices::{ContinuousFetModel, ResistorModel, SwitchModel};
use crate::error::{Error, Result};
use crate::netcore::{abcd_to_s, mag_db, omega, wrap_deg, FrequencyGrid, SParams2};

pub mod search;
mod tuning;

pub use tuning::{tune_chip, TuneOptions, TuneReport};

/// Calibration frequency used when none is given: the band center.
pub const DEFAULT_F0_HZ: f64 = 60e9;

/// Search bracket for shunt resistor fits, in ohms.
pub const R2_BRACKET: (f64, f64) = (1.0, 10_000.0);

/// Return loss reported when a port is matched to within numerical noise.
pub const RL_CAP_DB: f64 = 99.0;

/// Untuned default chip. Shunt resistors start at 100 Ω and compensation
/// capacitors at zero; [`tune_chip`] sets them. The T-type arms come from
/// [`synth_ttype`] at 4 dB; the 2-dB unit's metal-line arms are 11 Ω.
pub fn default_chip() -> AttenuatorChipSpec {
    let (r1_4, _) = synth_ttype(4.0, 50.0).expect("4 dB is a valid target");
    let film = |r: f64| ResistorModel { r, c_par: 0.25e-15 };
    let metal = |r: f64| ResistorModel { r, c_par: 0.05e-15 };
    let line = LineSpec {
        z_c: 100.0,
        theta_ref: 15f64.to_radians(),
        f_ref: DEFAULT_F0_HZ,
    };
    AttenuatorChipSpec {
        unit4: TTypeUnitSpec {
            r1: film(r1_4),
            r2: film(100.0),
            c_comp: 0.0,
            series_switch: SwitchModel {
                r_on: 8.0,
                c_off: 25e-15,
                c_par_on: 0.0,
            },
            shunt_switch: SwitchModel::default_shunt(),
        },
        tl_a: line,
        unit2: SimplifiedTUnitSpec {
            r1: metal(11.0),
            r2: film(100.0),
            c_comp: 0.0,
            shunt_switch: SwitchModel::default_shunt(),
        },
        tl_b: line,
        cont: ContinuousUnitSpec {
            r2: metal(20.0),
            fet: ContinuousFetModel {
                r_min: 30.0,
                r_max: 20_000.0,
                vc_lo: 0.0,
                vc_hi: 1.2,
                shape: 8.0,
            },
        },
        z0: 50.0,
    }
}

/// Band used by the tuning objectives: 20–100 GHz in 5-GHz steps.
pub fn default_tuning_band() -> FrequencyGrid {
    FrequencyGrid::linear(20e9, 100e9, 17).expect("static grid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationEntry {
    pub target_db: f64,
    pub vc: f64,
    pub achieved_db: f64,
}

/// Control voltages of the continuous unit for a ladder of attenuation
/// targets, measured at `f0_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub f0_hz: f64,
    entries: Vec<CalibrationEntry>,
}

impl CalibrationTable {
    /// Entries are `(target_db, vc, achieved_db)`; targets and control
    /// voltages must both be strictly increasing.
    pub fn new(f0_hz: f64, entries: Vec<(f64, f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("calibration table is empty".into()));
        }
        let entries: Vec<CalibrationEntry> = entries
            .into_iter()
            .map(|(target_db, vc, achieved_db)| CalibrationEntry {
                target_db,
                vc,
                achieved_db,
            })
            .collect();
        for w in entries.windows(2) {
            if w[1].target_db <= w[0].target_db {
                return Err(Error::InvalidInput(format!(
                    "calibration targets not increasing at {} dB",
                    w[1].target_db
                )));
            }
            if w[1].vc <= w[0].vc {
                return Err(Error::InvalidInput(format!(
                    "calibration voltages not increasing at {} dB",
                    w[1].target_db
                )));
            }
        }
        Ok(Self { f0_hz, entries })
    }

    pub fn entries(&self) -> &[CalibrationEntry] {
        &self.entries
    }

    /// Control voltage for `target_db`, linearly interpolated between the
    /// bracketing entries.
    pub fn vc_for(&self, target_db: f64) -> Result<f64> {
        const TOL: f64 = 1e-9;
        let first = self.entries[0];
        let last = self.entries[self.entries.len() - 1];
        if target_db < first.target_db - TOL || target_db > last.target_db + TOL {
            return Err(Error::MissingCalibration { target_db });
        }
        if let Some(e) = self.entries.iter().find(|e| (e.target_db - target_db).abs() <= TOL) {
            return Ok(e.vc);
        }
        let i = self
            .entries
            .windows(2)
            .position(|w| w[0].target_db <= target_db && target_db <= w[1].target_db)
            .ok_or(Error::MissingCalibration { target_db })?;
        let (a, b) = (self.entries[i], self.entries[i + 1]);
        let t = (target_db - a.target_db) / (b.target_db - a.target_db);
        Ok(a.vc + t * (b.vc - a.vc))
    }

    /// Plain-text form: a header comment, the frequency line and one
    /// `target_db vc achieved_db` row per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# target_db vc_volts achieved_db\n");
        out.push_str(&format!("f0_hz {:e}\n", self.f0_hz));
        for e in &self.entries {
            out.push_str(&format!("{:.3} {:.17e} {:.17e}\n", e.target_db, e.vc, e.achieved_db));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut f0 = None;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::InvalidInput(format!("calibration line {}: '{line}'", i + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == "f0_hz" {
                f0 = Some(fields.get(1).and_then(|v| v.parse::<f64>().ok()).ok_or_else(bad)?);
                continue;
            }
            if fields.len() != 3 {
                return Err(bad());
            }
            let nums: Vec<f64> = fields
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            rows.push((nums[0], nums[1], nums[2]));
        }
        let f0 = f0.ok_or_else(|| Error::InvalidInput("calibration file lacks f0_hz".into()))?;
        Self::new(f0, rows)
    }
}

/// Shunt and series resistors of a matched resistive T pad.
pub fn synth_ttype(atten_db: f64, z0: f64) -> Result<(f64, f64)> {
    if !(atten_db > 0.0) || !atten_db.is_finite() {
        return Err(Error::InvalidInput(format!("attenuation must be > 0 dB, got {atten_db}")));
    }
    if !(z0 > 0.0) {
        return Err(Error::InvalidInput(format!("z0 must be > 0, got {z0}")));
    }
    let k = 10f64.powf(atten_db / 20.0);
    let r1 = z0 * (k - 1.0) / (k + 1.0);
    let r2 = 2.0 * z0 * k / (k * k - 1.0);
    Ok((r1, r2))
}

/// Relative attenuation `|S21_ref| / |S21_att|` in dB of a switched unit.
pub fn relative_db(reference: &SParams2, attenuated: &SParams2) -> Result<f64> {
    Ok(mag_db(reference.s21)? - mag_db(attenuated.s21)?)
}

pub fn simplified_delta_db(unit: &SimplifiedTUnitSpec, z0: f64, freq_hz: f64) -> Result<f64> {
    let w = omega(freq_hz);
    let r = abcd_to_s(&simplified_twoport(unit, BitState::Ref, w)?, z0)?;
    let a = abcd_to_s(&simplified_twoport(unit, BitState::Att, w)?, z0)?;
    relative_db(&r, &a)
}

pub fn ttype_delta_db(unit: &TTypeUnitSpec, z0: f64, freq_hz: f64) -> Result<f64> {
    let w = omega(freq_hz);
    let r = abcd_to_s(&ttype_twoport(unit, BitState::Ref, w)?, z0)?;
    let a = abcd_to_s(&ttype_twoport(unit, BitState::Att, w)?, z0)?;
    relative_db(&r, &a)
}

/// Finds the shunt resistance in [`R2_BRACKET`] for which `delta(r2)`
/// equals `target_db`. `delta` must decrease as `r2` grows.
pub(crate) fn fit_shunt_resistance<F>(target_db: f64, mut delta: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if target_db == 0.0 {
        return Ok(R2_BRACKET.1);
    }
    if !(target_db > 0.0) || !target_db.is_finite() {
        return Err(Error::Unreachable {
            target_db,
            reason: "relative attenuation must be >= 0".into(),
        });
    }
    // bisect in log(r2); delta spans decades of resistance
    let (lo, hi) = (R2_BRACKET.0.ln(), R2_BRACKET.1.ln());
    let root = search::bisect(|x| Ok(delta(x.exp())? - target_db), lo, hi, 1e-13, 1e-9)?;
    root.map(f64::exp).ok_or_else(|| Error::Unreachable {
        target_db,
        reason: format!(
            "no shunt resistance in [{}, {}] ohm reaches it",
            R2_BRACKET.0, R2_BRACKET.1
        ),
    })
}

/// Shunt resistor of the simplified unit giving `target_delta_db` between
/// its two states at `f0`, with the template's switch and parasitics.
pub fn fit_r2_for_delta(unit: &SimplifiedTUnitSpec, target_delta_db: f64, f0: f64, z0: f64) -> Result<f64> {
    let mut trial = *unit;
    fit_shunt_resistance(target_delta_db, |r2| {
        trial.r2.r = r2;
        simplified_delta_db(&trial, z0, f0)
    })
}

/// [`fit_r2_for_delta`] for the T-type unit.
pub fn fit_r2_ttype(unit: &TTypeUnitSpec, target_delta_db: f64, f0: f64, z0: f64) -> Result<f64> {
    let mut trial = *unit;
    fit_shunt_resistance(target_delta_db, |r2| {
        trial.r2.r = r2;
        ttype_delta_db(&trial, z0, f0)
    })
}

/// Samples in the coarse compensation scan.
pub const CCOMP_SCAN_POINTS: usize = 64;
/// Final bracket width of the compensation search, farads.
pub const CCOMP_TOL: f64 = 0.01e-15;

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// RMS over `band` of the attenuation-state phase minus the
/// reference-state phase of a T-type unit, degrees.
pub fn ttype_phase_objective(unit: &TTypeUnitSpec, band: &FrequencyGrid, z0: f64) -> Result<f64> {
    let diffs = band
        .points()
        .iter()
        .map(|&f| {
            let w = omega(f);
            let r = abcd_to_s(&ttype_twoport(unit, BitState::Ref, w)?, z0)?;
            let a = abcd_to_s(&ttype_twoport(unit, BitState::Att, w)?, z0)?;
            Ok(wrap_deg((a.s21 / r.s21).arg().to_degrees()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rms(diffs.into_iter()))
}

pub fn simplified_phase_objective(unit: &SimplifiedTUnitSpec, band: &FrequencyGrid, z0: f64) -> Result<f64> {
    let diffs = band
        .points()
        .iter()
        .map(|&f| {
            let w = omega(f);
            let r = abcd_to_s(&simplified_twoport(unit, BitState::Ref, w)?, z0)?;
            let a = abcd_to_s(&simplified_twoport(unit, BitState::Att, w)?, z0)?;
            Ok(wrap_deg((a.s21 / r.s21).arg().to_degrees()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rms(diffs.into_iter()))
}

/// Result of a one-dimensional compensation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcompOptimum {
    pub c_comp: f64,
    pub objective_deg: f64,
    /// Coarse-scan spacing, for local-optimality checks.
    pub grid_step: f64,
}

fn check_search(search: (f64, f64)) -> Result<()> {
    if !(search.0 >= 0.0 && search.0 < search.1 && search.1.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "c_comp search needs 0 <= lo < hi, got {search:?}"
        )));
    }
    Ok(())
}

/// Compensation capacitance minimizing the RMS phase difference between
/// the two states over `band`.
pub fn optimize_ccomp(unit: &TTypeUnitSpec, band: &FrequencyGrid, search: (f64, f64), z0: f64) -> Result<CcompOptimum> {
    check_search(search)?;
    let mut trial = *unit;
    let (c, obj) = search::scan_then_golden(
        |c| {
            trial.c_comp = c;
            ttype_phase_objective(&trial, band, z0)
        },
        search.0,
        search.1,
        CCOMP_SCAN_POINTS,
        CCOMP_TOL,
    )?;
    Ok(CcompOptimum {
        c_comp: c,
        objective_deg: obj,
        grid_step: (search.1 - search.0) / (CCOMP_SCAN_POINTS - 1) as f64,
    })
}

/// [`optimize_ccomp`] for the simplified unit.
pub fn optimize_ccomp_simplified(
    unit: &SimplifiedTUnitSpec,
    band: &FrequencyGrid,
    search: (f64, f64),
    z0: f64,
) -> Result<CcompOptimum> {
    check_search(search)?;
    let mut trial = *unit;
    let (c, obj) = search::scan_then_golden(
        |c| {
            trial.c_comp = c;
            simplified_phase_objective(&trial, band, z0)
        },
        search.0,
        search.1,
        CCOMP_SCAN_POINTS,
        CCOMP_TOL,
    )?;
    Ok(CcompOptimum {
        c_comp: c,
        objective_deg: obj,
        grid_step: (search.1 - search.0) / (CCOMP_SCAN_POINTS - 1) as f64,
    })
}

/// Chip attenuation in dB relative to `baseline` at one frequency.
pub fn chip_relative_db(
    chip: &AttenuatorChipSpec,
    baseline: &AttenuatorState,
    state: &AttenuatorState,
    freq_hz: f64,
) -> Result<f64> {
    let b = chip_twoport(chip, baseline, freq_hz)?;
    let s = chip_twoport(chip, state, freq_hz)?;
    relative_db(&b, &s)
}

/// Achieved-attenuation tolerance of the calibration root finder, dB.
pub const CALIBRATION_TOL_DB: f64 = 1e-3;

/// Control voltages of the continuous unit for targets `0, step, …, range`
/// dB, relative to the all-reference chip at `vc_lo`, measured at `f0`.
pub fn calibrate_continuous(chip: &AttenuatorChipSpec, f0: f64, step_db: f64, range_db: f64) -> Result<CalibrationTable> {
    if !(step_db > 0.0 && range_db >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "calibration needs step > 0 and range >= 0, got {step_db} / {range_db}"
        )));
    }
    let n = (range_db / step_db).round() as usize;
    if ((n as f64) * step_db - range_db).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "step {step_db} dB does not divide range {range_db} dB"
        )));
    }
    let fet = chip.cont.fet;
    let base = chip.reference_state();
    let at = |vc: f64| {
        let st = AttenuatorState { vc, ..base };
        chip_relative_db(chip, &base, &st, f0)
    };
    let max_db = at(fet.vc_hi)?;
    let mut rows = Vec::with_capacity(n + 1);
    let mut lo = fet.vc_lo;
    for k in 0..=n {
        let target = ((k as f64 * step_db) * 1e9).round() / 1e9;
        if k == 0 {
            rows.push((0.0, fet.vc_lo, 0.0));
            continue;
        }
        if target > max_db + CALIBRATION_TOL_DB {
            return Err(Error::FetRange { target_db: target, freq_hz: f0 });
        }
        let vc = search::bisect(|v| Ok(at(v)? - target), lo, fet.vc_hi, 1e-15, 1e-7)?
            .ok_or(Error::FetRange { target_db: target, freq_hz: f0 })?;
        let achieved = at(vc)?;
        if (achieved - target).abs() > CALIBRATION_TOL_DB {
            return Err(Error::FetRange { target_db: target, freq_hz: f0 });
        }
        rows.push((target, vc, achieved));
        lo = vc;
    }
    CalibrationTable::new(f0, rows)
}

/// S-parameters of every state at every grid point, state-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub states: Vec<LabeledState>,
    pub grid: FrequencyGrid,
    data: Vec<SParams2>,
}

impl SweepResult {
    pub fn new(states: Vec<LabeledState>, grid: FrequencyGrid, data: Vec<SParams2>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one state".into()));
        }
        if data.len() != states.len() * grid.len() {
            return Err(Error::InvalidInput(format!(
                "sweep data has {} records, expected {}",
                data.len(),
                states.len() * grid.len()
            )));
        }
        Ok(Self { states, grid, data })
    }

    pub fn records(&self) -> &[SParams2] {
        &self.data
    }

    pub fn get(&self, state: usize, freq: usize) -> &SParams2 {
        &self.data[state * self.grid.len() + freq]
    }

    /// Frequency row of one state.
    pub fn state_rows(&self, state: usize) -> &[SParams2] {
        let n = self.grid.len();
        &self.data[state * n..(state + 1) * n]
    }

    /// Index of the 0-dB state.
    pub fn reference_index(&self) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s.nominal_db == 0.0)
            .ok_or_else(|| Error::InvalidInput("sweep has no 0 dB reference state".into()))
    }
}

pub fn sweep(chip: &AttenuatorChipSpec, states: &[LabeledState], grid: &FrequencyGrid) -> Result<SweepResult> {
    if states.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one state".into()));
    }
    let n_f = grid.len();
    let data = (0..states.len() * n_f)
        .into_par_iter()
        .map(|k| chip_twoport(chip, &states[k / n_f].state, grid.points()[k % n_f]))
        .collect::<Result<Vec<_>>>()?;
    SweepResult::new(states.to_vec(), grid.clone(), data)
}

/// [`sweep`] on a dedicated pool of `threads` workers (0 = rayon default).
pub fn sweep_with_threads(
    chip: &AttenuatorChipSpec,
    states: &[LabeledState],
    grid: &FrequencyGrid,
    threads: usize,
) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| sweep(chip, states, grid))
}

/// Per-frequency RMS over non-reference states of (relative attenuation −
/// ideal), dB. `ideal_db[i]` is the nominal attenuation of state `i`.
pub fn rms_amp_error(sweep: &SweepResult, ideal_db: &[f64]) -> Result<Vec<f64>> {
    if ideal_db.len() != sweep.states.len() {
        return Err(Error::InvalidInput("one ideal value per state is required".into()));
    }
    let r = sweep.reference_index()?;
    (0..sweep.grid.len())
        .map(|fi| {
            let ref_db = mag_db(sweep.get(r, fi).s21)?;
            let errs = (0..sweep.states.len())
                .filter(|&s| s != r)
                .map(|s| Ok(ref_db - mag_db(sweep.get(s, fi).s21)? - ideal_db[s]))
                .collect::<Result<Vec<f64>>>()?;
            Ok(rms(errs.into_iter()))
        })
        .collect()
}

/// Per-frequency RMS over non-reference states of the S21 phase relative to
/// the reference state, wrapped to (−180, 180] degrees.
pub fn rms_phase_error(sweep: &SweepResult) -> Result<Vec<f64>> {
    let r = sweep.reference_index()?;
    Ok((0..sweep.grid.len())
        .map(|fi| {
            let ref_s21 = sweep.get(r, fi).s21;
            rms((0..sweep.states.len())
                .filter(|&s| s != r)
                .map(|s| wrap_deg((sweep.get(s, fi).s21 / ref_s21).arg().to_degrees())))
        })
        .collect())
}

fn return_loss_db(mag: f64) -> f64 {
    if mag <= 0.0 {
        return RL_CAP_DB;
    }
    (-20.0 * mag.log10()).min(RL_CAP_DB)
}

/// Insertion loss of the reference state and worst-state return loss at
/// each port, all as positive dB.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMetrics {
    pub il_db: Vec<f64>,
    pub rl_in_db: Vec<f64>,
    pub rl_out_db: Vec<f64>,
}

pub fn il_rl(sweep: &SweepResult) -> Result<LossMetrics> {
    let r = sweep.reference_index()?;
    let n_f = sweep.grid.len();
    let mut out = LossMetrics {
        il_db: Vec::with_capacity(n_f),
        rl_in_db: Vec::with_capacity(n_f),
        rl_out_db: Vec::with_capacity(n_f),
    };
    for fi in 0..n_f {
        out.il_db.push(-mag_db(sweep.get(r, fi).s21)?);
        let worst = |pick: fn(&SParams2) -> f64| {
            (0..sweep.states.len())
                .map(|s| pick(sweep.get(s, fi)))
                .fold(0.0, f64::max)
        };
        out.rl_in_db.push(return_loss_db(worst(|s| s.s11.norm())));
        out.rl_out_db.push(return_loss_db(worst(|s| s.s22.norm())));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandMetrics {
    pub freqs_hz: Vec<f64>,
    pub il_db: Vec<f64>,
    pub rl_in_db: Vec<f64>,
    pub rl_out_db: Vec<f64>,
    pub rms_amp_err_db: Vec<f64>,
    pub rms_phase_err_deg: Vec<f64>,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl BandMetrics {
    pub fn il_min(&self) -> f64 {
        min_of(&self.il_db)
    }

    pub fn il_max(&self) -> f64 {
        max_of(&self.il_db)
    }

    /// Worst return loss over both ports and the band.
    pub fn rl_worst(&self) -> f64 {
        min_of(&self.rl_in_db).min(min_of(&self.rl_out_db))
    }

    pub fn rl_worst_at(&self, fi: usize) -> f64 {
        self.rl_in_db[fi].min(self.rl_out_db[fi])
    }

    pub fn rms_amp_max(&self) -> f64 {
        max_of(&self.rms_amp_err_db)
    }

    pub fn rms_phase_max(&self) -> f64 {
        max_of(&self.rms_phase_err_deg)
    }
}

/// All figures of merit of a sweep, with the state labels as ideal values.
pub fn band_metrics(sweep: &SweepResult) -> Result<BandMetrics> {
    let ideal: Vec<f64> = sweep.states.iter().map(|s| s.nominal_db).collect();
    let loss = il_rl(sweep)?;
    Ok(BandMetrics {
        freqs_hz: sweep.grid.points().to_vec(),
        il_db: loss.il_db,
        rl_in_db: loss.rl_in_db,
        rl_out_db: loss.rl_out_db,
        rms_amp_err_db: rms_amp_error(sweep, &ideal)?,
        rms_phase_err_deg: rms_phase_error(sweep)?,
    })
}
