//! Sequential coordinate tuning of a whole chip.
//!
//! Each pass runs, in order: shunt-resistor fits of both digital units,
//! compensation-capacitor searches of both units, then the electrical
//! lengths of the two inter-stage lines. All objectives are evaluated on
//! the full cascade so that interaction through the lines is accounted
//! for. Every line-length trial re-fits the shunt resistors first, so a
//! length is judged with exact bit steps at `f0`, and each pass ends with
//! a final re-fit. This is a heuristic; it converges in practice for the
//! shipped defaults but carries no global-optimality guarantee.

use crate::attenuator::{chip_twoport, enumerate_states, AttenuatorChipSpec, AttenuatorState, BitState};
use crate::error::Result;
use crate::netcore::{wrap_deg, FrequencyGrid, SParams2};

use super::search::scan_then_golden;
use super::{
    band_metrics, calibrate_continuous, chip_relative_db, fit_shunt_resistance, rms, SweepResult, CCOMP_SCAN_POINTS, CCOMP_TOL,
};

#[derive(Debug, Clone)]
pub struct TuneOptions {
    pub f0_hz: f64,
    pub passes: usize,
    /// Target relative attenuation of the T-type and simplified units.
    pub unit4_db: f64,
    pub unit2_db: f64,
    pub ccomp_search: (f64, f64),
    /// Tune line lengths too; otherwise only r2 and c_comp move.
    pub tune_lines: bool,
    pub theta_search: (f64, f64),
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            f0_hz: super::DEFAULT_F0_HZ,
            passes: 3,
            unit4_db: 4.0,
            unit2_db: 2.0,
            ccomp_search: (0.0, 100e-15),
            tune_lines: true,
            theta_search: (0.0, 1.5),
        }
    }
}

/// Values after each completed pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassRecord {
    pub unit4_r2: f64,
    pub unit2_r2: f64,
    pub unit4_c_comp: f64,
    pub unit2_c_comp: f64,
    pub tl_a_theta: f64,
    pub tl_b_theta: f64,
    pub line_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneReport {
    pub passes: Vec<PassRecord>,
}

fn digital(bit4: BitState, bit2: BitState, vc: f64) -> AttenuatorState {
    AttenuatorState { bit4, bit2, vc }
}

/// RMS over `band` of the chip phase of `state` relative to `base`, degrees.
fn phase_rms(chip: &AttenuatorChipSpec, base: &AttenuatorState, state: &AttenuatorState, band: &FrequencyGrid) -> Result<f64> {
    let diffs = band
        .points()
        .iter()
        .map(|&f| {
            let b = chip_twoport(chip, base, f)?;
            let s = chip_twoport(chip, state, f)?;
            Ok(wrap_deg((s.s21 / b.s21).arg().to_degrees()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rms(diffs.into_iter()))
}

/// Scales that bring the figures of merit to a common footing: a
/// reflection of 0.266 (11.5 dB return loss), 0.15 dB RMS amplitude error
/// and 1.6 degrees RMS phase error each count as 1.
pub const FOM_SCALES: (f64, f64, f64) = (0.266, 0.15, 1.6);

/// Line objective: the largest normalized figure of merit of the 16 coarse
/// states over `band`. The continuous unit is calibrated at `f0` for the
/// 0.5-dB sub-steps on every call, so the objective sees how the sub-steps
/// shift in each digital state.
pub fn line_objective(chip: &AttenuatorChipSpec, band: &FrequencyGrid, opts: &TuneOptions) -> Result<f64> {
    let table = calibrate_continuous(chip, opts.f0_hz, 0.5, 1.5)?;
    let states = enumerate_states(chip, 0.5, opts.f0_hz, &table)?;
    let data = states
        .iter()
        .flat_map(|st| band.points().iter().map(move |&f| chip_twoport(chip, &st.state, f)))
        .collect::<Result<Vec<SParams2>>>()?;
    let m = band_metrics(&SweepResult::new(states, band.clone(), data)?)?;
    let worst_refl = 10f64.powf(-m.rl_worst() / 20.0);
    let (refl, amp, phase) = FOM_SCALES;
    Ok((worst_refl / refl).max(m.rms_amp_max() / amp).max(m.rms_phase_max() / phase))
}

fn fit_bits(
    chip: &mut AttenuatorChipSpec,
    base: &AttenuatorState,
    st4: &AttenuatorState,
    st2: &AttenuatorState,
    opts: &TuneOptions,
) -> Result<()> {
    let f0 = opts.f0_hz;
    let mut trial = *chip;
    chip.unit4.r2.r = fit_shunt_resistance(opts.unit4_db, |r2| {
        trial.unit4.r2.r = r2;
        chip_relative_db(&trial, base, st4, f0)
    })?;
    let mut trial = *chip;
    chip.unit2.r2.r = fit_shunt_resistance(opts.unit2_db, |r2| {
        trial.unit2.r2.r = r2;
        chip_relative_db(&trial, base, st2, f0)
    })?;
    Ok(())
}

/// Runs the sequential passes and returns the tuned chip.
pub fn tune_chip(chip: &AttenuatorChipSpec, band: &FrequencyGrid, opts: &TuneOptions) -> Result<(AttenuatorChipSpec, TuneReport)> {
    chip.validate()?;
    let mut chip = *chip;
    let vc = chip.cont.fet.vc_lo;
    let base = digital(BitState::Ref, BitState::Ref, vc);
    let st4 = digital(BitState::Att, BitState::Ref, vc);
    let st2 = digital(BitState::Ref, BitState::Att, vc);
    let mut report = TuneReport { passes: Vec::new() };

    for _ in 0..opts.passes {
        fit_bits(&mut chip, &base, &st4, &st2, opts)?;

        // compensation capacitors
        let (lo, hi) = opts.ccomp_search;
        let mut trial = chip;
        chip.unit4.c_comp = scan_then_golden(
            |c| {
                trial.unit4.c_comp = c;
                phase_rms(&trial, &base, &st4, band)
            },
            lo,
            hi,
            CCOMP_SCAN_POINTS,
            CCOMP_TOL,
        )?
        .0;
        let mut trial = chip;
        chip.unit2.c_comp = scan_then_golden(
            |c| {
                trial.unit2.c_comp = c;
                phase_rms(&trial, &base, &st2, band)
            },
            lo,
            hi,
            CCOMP_SCAN_POINTS,
            CCOMP_TOL,
        )?
        .0;

        // line lengths
        let (t_lo, t_hi) = opts.theta_search;
        if opts.tune_lines {
            let mut trial = chip;
            chip.tl_a.theta_ref = scan_then_golden(
                |t| {
                    trial.tl_a.theta_ref = t;
                    fit_bits(&mut trial, &base, &st4, &st2, opts)?;
                    line_objective(&trial, band, opts)
                },
                t_lo,
                t_hi,
                32,
                1e-4,
            )?
            .0;
            let mut trial = chip;
            chip.tl_b.theta_ref = scan_then_golden(
                |t| {
                    trial.tl_b.theta_ref = t;
                    fit_bits(&mut trial, &base, &st4, &st2, opts)?;
                    line_objective(&trial, band, opts)
                },
                t_lo,
                t_hi,
                32,
                1e-4,
            )?
            .0;
        }
        // the lines move the bit steps; close each pass on exact steps at f0
        fit_bits(&mut chip, &base, &st4, &st2, opts)?;

        report.passes.push(PassRecord {
            unit4_r2: chip.unit4.r2.r,
            unit2_r2: chip.unit2.r2.r,
            unit4_c_comp: chip.unit4.c_comp,
            unit2_c_comp: chip.unit2.c_comp,
            tl_a_theta: chip.tl_a.theta_ref,
            tl_b_theta: chip.tl_b.theta_ref,
            line_objective: line_objective(&chip, band, opts)?,
        });
    }
    Ok((chip, report))
}
