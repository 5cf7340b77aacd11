//! Attenuation units, the three-unit chip cascade, and the closed-form
//! transmission and phase of the compensated T-type unit.
//!
//! Unit topologies (node names as used by [`netlists`]):
//!
//! * T-type: `in -R1- mid -R1- out`, shunt `mid -(R2 ∥ Ccomp)- b -M2- gnd`,
//!   and the series switch M1 bridging `in`–`out`. Reference state: M1 on,
//!   M2 off. Attenuation state: M1 off, M2 on.
//! * Simplified T: the same without M1.
//! * Continuous: a single shunt `n -R2- b -FET- gnd`.

use crate::design::CalibrationTable;
use crate::devices::{
    fet_resistance, resistor_twoport, ContinuousFetModel, ResistorModel, SwitchModel, SwitchState,
};
use crate::error::{Error, Result};
use crate::netcore::{abcd_shunt, abcd_tline, abcd_to_s, Abcd, Complex, SParams2, J};

pub mod netlists;

/// Setting of one switched unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitState {
    Ref,
    Att,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTypeUnitSpec {
    pub r1: ResistorModel,
    pub r2: ResistorModel,
    pub c_comp: f64,
    pub series_switch: SwitchModel,
    pub shunt_switch: SwitchModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifiedTUnitSpec {
    pub r1: ResistorModel,
    pub r2: ResistorModel,
    pub c_comp: f64,
    pub shunt_switch: SwitchModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousUnitSpec {
    pub r2: ResistorModel,
    pub fet: ContinuousFetModel,
}

/// Ideal line whose electrical length scales linearly with frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSpec {
    pub z_c: f64,
    pub theta_ref: f64,
    pub f_ref: f64,
}

impl LineSpec {
    pub fn theta_at(&self, freq_hz: f64) -> f64 {
        self.theta_ref * freq_hz / self.f_ref
    }

    pub fn twoport(&self, freq_hz: f64) -> Result<Abcd> {
        abcd_tline(self.z_c, self.theta_at(freq_hz))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_c > 0.0 && self.z_c.is_finite()) {
            return Err(Error::InvalidInput(format!("line z_c must be > 0, got {}", self.z_c)));
        }
        if !(self.f_ref > 0.0 && self.f_ref.is_finite()) {
            return Err(Error::InvalidInput(format!("line f_ref must be > 0, got {}", self.f_ref)));
        }
        if !(self.theta_ref >= 0.0 && self.theta_ref.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "line theta must be >= 0, got {}",
                self.theta_ref
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuatorChipSpec {
    pub unit4: TTypeUnitSpec,
    pub tl_a: LineSpec,
    pub unit2: SimplifiedTUnitSpec,
    pub tl_b: LineSpec,
    pub cont: ContinuousUnitSpec,
    pub z0: f64,
}

/// One digital + continuous setting of the chip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuatorState {
    pub bit4: BitState,
    pub bit2: BitState,
    pub vc: f64,
}

/// A chip state tagged with its nominal attenuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledState {
    pub nominal_db: f64,
    pub state: AttenuatorState,
}

impl LabeledState {
    /// `"3.5dB"`-style label; one decimal covers both state grids.
    pub fn label(&self) -> String {
        format!("{:.1}dB", self.nominal_db)
    }
}

fn check_c_comp(c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("c_comp must be >= 0, got {c}")));
    }
    Ok(())
}

impl TTypeUnitSpec {
    pub fn validate(&self) -> Result<()> {
        self.r1.validate()?;
        self.r2.validate()?;
        check_c_comp(self.c_comp)?;
        self.series_switch.validate()?;
        self.shunt_switch.validate()
    }
}

impl SimplifiedTUnitSpec {
    pub fn validate(&self) -> Result<()> {
        self.r1.validate()?;
        self.r2.validate()?;
        check_c_comp(self.c_comp)?;
        self.shunt_switch.validate()
    }
}

impl ContinuousUnitSpec {
    pub fn validate(&self) -> Result<()> {
        self.r2.validate()?;
        self.fet.validate()
    }
}

impl AttenuatorChipSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return Err(Error::InvalidInput(format!("z0 must be > 0, got {}", self.z0)));
        }
        self.unit4.validate()?;
        self.tl_a.validate()?;
        self.unit2.validate()?;
        self.tl_b.validate()?;
        self.cont.validate()
    }

    /// All digital bits in reference state, FET at its lowest control.
    pub fn reference_state(&self) -> AttenuatorState {
        AttenuatorState {
            bit4: BitState::Ref,
            bit2: BitState::Ref,
            vc: self.cont.fet.vc_lo,
        }
    }
}

/// Closed-form S21 of the compensated T-type unit in its attenuation state:
/// series arms `r1`, shunt `r_on2 + (r2 ∥ c_comp)`.
pub fn eval_eq1(r1: f64, r2: f64, r_on2: f64, c_comp: f64, z0: f64, omega: f64) -> Result<Complex> {
    if !(r1 > 0.0 && r2 > 0.0 && r_on2 > 0.0 && z0 > 0.0) {
        return Err(Error::InvalidInput(
            "closed form needs positive r1, r2, r_on2 and z0".into(),
        ));
    }
    let wc = J * (omega * c_comp);
    let za = z0 + r1;
    let num = 2.0 * z0 * (r2 + r_on2) + 2.0 * wc * z0 * r_on2 * r2;
    let den = (1.0 + wc * r2) * (2.0 * r_on2 * za + za * za) + 2.0 * r2 * za;
    if den.norm() == 0.0 {
        return Err(Error::Degenerate("closed-form denominator vanishes".into()));
    }
    Ok(num / den)
}

/// First-order (in ω) phase of [`eval_eq1`], in radians.
pub fn eval_eq2(r1: f64, r2: f64, r_on2: f64, c_comp: f64, z0: f64, omega: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0 && r_on2 > 0.0 && z0 > 0.0) {
        return Err(Error::InvalidInput(
            "closed form needs positive r1, r2, r_on2 and z0".into(),
        ));
    }
    let wc = omega * c_comp;
    let lead = wc * r_on2 * r2 / (r2 + r_on2);
    let lag = wc * (2.0 * r_on2 + r1 + z0) * r2 / (z0 + r1 + 2.0 * r_on2 + 2.0 * r2);
    Ok(lead - lag)
}

/// Series combination of two admittances; an open on either side opens the
/// whole branch.
fn series_admittance(y1: Complex, y2: Complex) -> Complex {
    let zero = Complex::new(0.0, 0.0);
    if y1 == zero || y2 == zero {
        return zero;
    }
    y1 * y2 / (y1 + y2)
}

/// Admittance from `mid` to ground of `(r2 ∥ c_comp)` stacked on a bottom
/// element `y_bottom`, including the π parasitics of `r2`.
fn stacked_shunt_admittance(r2: &ResistorModel, c_comp: f64, y_bottom: Complex, omega: f64) -> Complex {
    let half = r2.half_par_admittance(omega);
    let y_top = Complex::new(1.0 / r2.r, omega * c_comp);
    half + series_admittance(y_top, y_bottom + half)
}

fn t_core(r1: &ResistorModel, y_shunt: Complex, omega: f64) -> Abcd {
    let arm = resistor_twoport(r1, omega);
    arm * abcd_shunt(y_shunt) * arm
}

fn shunt_state(state: BitState) -> SwitchState {
    match state {
        BitState::Ref => SwitchState::Off,
        BitState::Att => SwitchState::On,
    }
}

pub fn ttype_twoport(spec: &TTypeUnitSpec, state: BitState, omega: f64) -> Result<Abcd> {
    let y_sw = spec.shunt_switch.admittance(shunt_state(state), omega);
    let y_shunt = stacked_shunt_admittance(&spec.r2, spec.c_comp, y_sw, omega);
    let core = t_core(&spec.r1, y_shunt, omega);
    let series_state = match state {
        BitState::Ref => SwitchState::On,
        BitState::Att => SwitchState::Off,
    };
    core.bridged(spec.series_switch.admittance(series_state, omega))
}

pub fn simplified_twoport(spec: &SimplifiedTUnitSpec, state: BitState, omega: f64) -> Result<Abcd> {
    let y_sw = spec.shunt_switch.admittance(shunt_state(state), omega);
    let y_shunt = stacked_shunt_admittance(&spec.r2, spec.c_comp, y_sw, omega);
    Ok(t_core(&spec.r1, y_shunt, omega))
}

pub fn continuous_twoport(spec: &ContinuousUnitSpec, vc: f64, omega: f64) -> Result<Abcd> {
    let r_fet = fet_resistance(&spec.fet, vc)?;
    let y_fet = Complex::new(1.0 / r_fet, 0.0);
    let half = spec.r2.half_par_admittance(omega);
    let y = half + series_admittance(Complex::new(1.0 / spec.r2.r, 0.0), y_fet + half);
    Ok(abcd_shunt(y))
}

/// Chain matrix of the whole chip at one frequency.
pub fn chip_abcd(chip: &AttenuatorChipSpec, state: &AttenuatorState, freq_hz: f64) -> Result<Abcd> {
    let w = crate::netcore::omega(freq_hz);
    let u4 = ttype_twoport(&chip.unit4, state.bit4, w)?;
    let u2 = simplified_twoport(&chip.unit2, state.bit2, w)?;
    let uc = continuous_twoport(&chip.cont, state.vc, w)?;
    Ok(u4 * chip.tl_a.twoport(freq_hz)? * u2 * chip.tl_b.twoport(freq_hz)? * uc)
}

/// S-parameters of the full cascade `unit4 · tl_a · unit2 · tl_b · cont`.
///
/// Takes the frequency in Hz rather than ω because the lines scale their
/// electrical length against a reference frequency.
pub fn chip_twoport(chip: &AttenuatorChipSpec, state: &AttenuatorState, freq_hz: f64) -> Result<SParams2> {
    if !chip.cont.fet.contains(state.vc) {
        return Err(Error::ControlOutOfRange {
            vc: state.vc,
            lo: chip.cont.fet.vc_lo,
            hi: chip.cont.fet.vc_hi,
        });
    }
    abcd_to_s(&chip_abcd(chip, state, freq_hz)?, chip.z0)
}

/// Total relative range covered by the digital bits plus the continuous
/// unit's share of the coarse grid.
pub const FULL_RANGE_DB: f64 = 7.5;

/// Nominal state grid from 0 to 7.5 dB.
///
/// Each label `L` is split into a digital part `d ∈ {0, 2, 4, 6}` (largest
/// not exceeding `L`) and a continuous remainder `L − d`, whose control
/// voltage comes from `calibration`. A step of 0.5 dB yields the 16 coarse
/// states, 0.1 dB the 76 fine ones.
pub fn enumerate_states(
    chip: &AttenuatorChipSpec,
    step_db: f64,
    f0: f64,
    calibration: &CalibrationTable,
) -> Result<Vec<LabeledState>> {
    if !(step_db > 0.0) {
        return Err(Error::InvalidInput(format!("state step must be > 0, got {step_db}")));
    }
    let n = (FULL_RANGE_DB / step_db).round();
    if (n * step_db - FULL_RANGE_DB).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "step {step_db} dB does not divide {FULL_RANGE_DB} dB"
        )));
    }
    if (calibration.f0_hz - f0).abs() > 1e-6 * f0 {
        return Err(Error::InvalidInput(format!(
            "calibration was made at {} Hz, states requested for {f0} Hz",
            calibration.f0_hz
        )));
    }
    let n = n as usize;
    (0..=n)
        .map(|i| {
            // round through tenths of a dB so labels are exact decimals
            let nominal = ((i as f64 * step_db) * 1e6).round() / 1e6;
            let digital = ((nominal / 2.0 + 1e-9).floor() * 2.0).min(6.0);
            let cont_db = ((nominal - digital) * 1e6).round() / 1e6;
            let vc = calibration.vc_for(cont_db)?;
            if !chip.cont.fet.contains(vc) {
                return Err(Error::ControlOutOfRange {
                    vc,
                    lo: chip.cont.fet.vc_lo,
                    hi: chip.cont.fet.vc_hi,
                });
            }
            let bit = |on: bool| if on { BitState::Att } else { BitState::Ref };
            let digital_steps = (digital / 2.0).round() as u32;
            Ok(LabeledState {
                nominal_db: nominal,
                state: AttenuatorState {
                    bit4: bit(digital_steps & 2 != 0),
                    bit2: bit(digital_steps & 1 != 0),
                    vc,
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
