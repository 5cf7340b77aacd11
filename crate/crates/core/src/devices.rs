//! Lumped device models: switch transistors, resistors with parasitic
//! capacitance, and the voltage-controlled shunt FET.

use crate::error::{Error, Result};
use crate::netcore::{abcd_series, abcd_shunt, Abcd, Complex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwitchState {
    On,
    Off,
}

/// A branch impedance that may be an open circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    Impedance(Complex),
    Open,
}

impl Branch {
    pub fn admittance(&self) -> Complex {
        match self {
            Branch::Impedance(z) => 1.0 / z,
            Branch::Open => Complex::new(0.0, 0.0),
        }
    }
}

/// Switch transistor: `r_on` shunted by `c_par_on` when conducting, `c_off`
/// when open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchModel {
    pub r_on: f64,
    pub c_off: f64,
    pub c_par_on: f64,
}

impl SwitchModel {
    pub fn new(r_on: f64, c_off: f64, c_par_on: f64) -> Result<Self> {
        let m = Self {
            r_on,
            c_off,
            c_par_on,
        };
        m.validate()?;
        Ok(m)
    }

    /// Shunt switch default used when a configuration does not override it:
    /// 10 Ω on, 15 fF off. Illustrative values, not process data.
    pub fn default_shunt() -> Self {
        Self {
            r_on: 10.0,
            c_off: 15e-15,
            c_par_on: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_on > 0.0 && self.r_on.is_finite()) {
            return Err(Error::InvalidInput(format!("switch r_on must be > 0, got {}", self.r_on)));
        }
        if !(self.c_off >= 0.0 && self.c_off.is_finite()) {
            return Err(Error::InvalidInput(format!("switch c_off must be >= 0, got {}", self.c_off)));
        }
        if !(self.c_par_on >= 0.0 && self.c_par_on.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "switch c_par_on must be >= 0, got {}",
                self.c_par_on
            )));
        }
        Ok(())
    }

    /// Branch admittance; zero for an open (off at DC or `c_off = 0`).
    pub fn admittance(&self, state: SwitchState, omega: f64) -> Complex {
        match state {
            SwitchState::On => Complex::new(1.0 / self.r_on, omega * self.c_par_on),
            SwitchState::Off => Complex::new(0.0, omega * self.c_off),
        }
    }
}

pub fn switch_branch(model: &SwitchModel, state: SwitchState, omega: f64) -> Branch {
    match state {
        SwitchState::On if model.c_par_on == 0.0 || omega == 0.0 => {
            Branch::Impedance(Complex::new(model.r_on, 0.0))
        }
        SwitchState::On => Branch::Impedance(1.0 / model.admittance(state, omega)),
        SwitchState::Off if model.c_off == 0.0 || omega == 0.0 => Branch::Open,
        SwitchState::Off => Branch::Impedance(Complex::new(0.0, -1.0 / (omega * model.c_off))),
    }
}

/// Resistor with its distributed parasitic to ground lumped as a symmetric
/// π: `c_par/2` at each terminal. Metal-line resistors differ from poly
/// resistors only through a smaller `c_par`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistorModel {
    pub r: f64,
    pub c_par: f64,
}

impl ResistorModel {
    pub fn new(r: f64, c_par: f64) -> Result<Self> {
        let m = Self { r, c_par };
        m.validate()?;
        Ok(m)
    }

    pub fn ideal(r: f64) -> Self {
        Self { r, c_par: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidInput(format!("resistance must be > 0, got {}", self.r)));
        }
        if !(self.c_par >= 0.0 && self.c_par.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "parasitic capacitance must be >= 0, got {}",
                self.c_par
            )));
        }
        Ok(())
    }

    /// Admittance of one half of the parasitic, `jω·c_par/2`.
    pub fn half_par_admittance(&self, omega: f64) -> Complex {
        Complex::new(0.0, omega * self.c_par / 2.0)
    }
}

pub fn resistor_twoport(model: &ResistorModel, omega: f64) -> Abcd {
    let series = abcd_series(Complex::new(model.r, 0.0));
    if model.c_par == 0.0 || omega == 0.0 {
        return series;
    }
    let half = abcd_shunt(model.half_par_admittance(omega));
    half * series * half
}

/// Shunt FET used as a voltage-controlled resistor.
///
/// Resistance follows a normalized logistic in the control voltage,
/// `r(vc) = r_min + (r_max − r_min)·g(x)` with `x` the control position on
/// `[0, 1]` and `g` a logistic of steepness `shape` centered at `x = 0.5`,
/// rescaled so that `g(0) = 1` and `g(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousFetModel {
    pub r_min: f64,
    pub r_max: f64,
    pub vc_lo: f64,
    pub vc_hi: f64,
    pub shape: f64,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl ContinuousFetModel {
    pub fn new(r_min: f64, r_max: f64, vc_lo: f64, vc_hi: f64, shape: f64) -> Result<Self> {
        let m = Self {
            r_min,
            r_max,
            vc_lo,
            vc_hi,
            shape,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "FET needs 0 < r_min < r_max, got {} / {}",
                self.r_min, self.r_max
            )));
        }
        if !(self.vc_lo < self.vc_hi && self.vc_lo.is_finite() && self.vc_hi.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "FET needs vc_lo < vc_hi, got {} / {}",
                self.vc_lo, self.vc_hi
            )));
        }
        if !(self.shape > 0.0 && self.shape.is_finite()) {
            return Err(Error::InvalidInput(format!("FET shape must be > 0, got {}", self.shape)));
        }
        Ok(())
    }

    pub fn contains(&self, vc: f64) -> bool {
        vc >= self.vc_lo && vc <= self.vc_hi
    }
}

pub fn fet_resistance(model: &ContinuousFetModel, vc: f64) -> Result<f64> {
    if !model.contains(vc) {
        return Err(Error::ControlOutOfRange {
            vc,
            lo: model.vc_lo,
            hi: model.vc_hi,
        });
    }
    if vc == model.vc_lo {
        return Ok(model.r_max);
    }
    if vc == model.vc_hi {
        return Ok(model.r_min);
    }
    let x = (vc - model.vc_lo) / (model.vc_hi - model.vc_lo);
    let s = model.shape;
    let lo = logistic(-s / 2.0);
    let hi = logistic(s / 2.0);
    let g = (logistic(s * (0.5 - x)) - lo) / (hi - lo);
    Ok(model.r_min + (model.r_max - model.r_min) * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{abcd_to_s, omega};
    use proptest::prelude::*;

    #[test]
    fn switch_branch_examples() {
        let m = SwitchModel::new(10.0, 15e-15, 0.0).unwrap();
        assert_eq!(
            switch_branch(&m, SwitchState::On, 1e12),
            Branch::Impedance(Complex::new(10.0, 0.0))
        );
        let w = omega(60e9);
        match switch_branch(&m, SwitchState::Off, w) {
            Branch::Impedance(z) => {
                assert_eq!(z.re, 0.0);
                assert!((z.im + 176.8388).abs() < 1e-3, "{z}");
                // agrees with the admittance view jωC
                assert!((1.0 / z - m.admittance(SwitchState::Off, w)).norm() < 1e-15);
            }
            Branch::Open => panic!("expected capacitive branch"),
        }
        assert_eq!(switch_branch(&m, SwitchState::Off, 0.0), Branch::Open);
        assert_eq!(Branch::Open.admittance(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn switch_on_with_parasitic() {
        let m = SwitchModel::new(10.0, 15e-15, 5e-15).unwrap();
        let w = omega(100e9);
        let Branch::Impedance(z) = switch_branch(&m, SwitchState::On, w) else {
            panic!()
        };
        let expect = 1.0 / Complex::new(0.1, w * 5e-15);
        assert!((z - expect).norm() < 1e-12);
        assert!(z.im < 0.0);
    }

    #[test]
    fn switch_validation() {
        assert!(SwitchModel::new(0.0, 1e-15, 0.0).is_err());
        assert!(SwitchModel::new(1.0, -1e-15, 0.0).is_err());
        assert!(SwitchModel::new(1.0, 0.0, -1.0).is_err());
        assert!(ResistorModel::new(-1.0, 0.0).is_err());
        assert!(ResistorModel::new(1.0, -1e-15).is_err());
    }

    #[test]
    fn resistor_twoport_reductions() {
        let r = ResistorModel::new(5.0, 0.0).unwrap();
        assert_eq!(resistor_twoport(&r, 1e12), abcd_series(Complex::new(5.0, 0.0)));
        let r = ResistorModel::new(5.0, 20e-15).unwrap();
        assert_eq!(resistor_twoport(&r, 0.0), abcd_series(Complex::new(5.0, 0.0)));
    }

    #[test]
    fn resistor_twoport_small_parasitic_limit() {
        let w = omega(100e9);
        let ideal = abcd_to_s(&resistor_twoport(&ResistorModel::ideal(5.0), w), 50.0).unwrap();
        let tiny = abcd_to_s(&resistor_twoport(&ResistorModel::new(5.0, 1e-20).unwrap(), w), 50.0).unwrap();
        // the parasitic enters in quadrature, so magnitudes converge first
        assert!((tiny.s21.norm() - ideal.s21.norm()).abs() <= 1e-9 * ideal.s21.norm());
        assert!((tiny.s11.norm() - ideal.s11.norm()).abs() <= 1e-9 * ideal.s11.norm());
        assert!((tiny.s21 - ideal.s21).norm() <= 1e-6 * ideal.s21.norm());
    }

    #[test]
    fn metal_line_deviates_less_than_poly() {
        let w = omega(100e9);
        let dc = abcd_to_s(&resistor_twoport(&ResistorModel::ideal(5.0), 0.0), 50.0)
            .unwrap()
            .s21
            .norm();
        let dev = |c_par: f64| {
            let s = abcd_to_s(&resistor_twoport(&ResistorModel::new(5.0, c_par).unwrap(), w), 50.0).unwrap();
            (s.s21.norm() - dc).abs()
        };
        assert!(dev(4e-15) < dev(20e-15));
    }

    #[test]
    fn fet_endpoints_and_midpoint() {
        let m = ContinuousFetModel::new(20.0, 20_000.0, 0.0, 1.2, 6.0).unwrap();
        assert_eq!(fet_resistance(&m, 1.2).unwrap(), 20.0);
        assert_eq!(fet_resistance(&m, 0.0).unwrap(), 20_000.0);
        let mid = fet_resistance(&m, 0.6).unwrap();
        assert!(mid > 20.0 && mid < 20_000.0);
        // logistic is symmetric about the midpoint
        assert!((mid - (20.0 + 20_000.0) / 2.0).abs() < 1e-9);
        assert!(matches!(
            fet_resistance(&m, 1.3),
            Err(Error::ControlOutOfRange { .. })
        ));
        assert!(fet_resistance(&m, -0.01).is_err());
    }

    #[test]
    fn fet_validation() {
        assert!(ContinuousFetModel::new(10.0, 5.0, 0.0, 1.0, 4.0).is_err());
        assert!(ContinuousFetModel::new(0.0, 5.0, 0.0, 1.0, 4.0).is_err());
        assert!(ContinuousFetModel::new(1.0, 5.0, 1.0, 1.0, 4.0).is_err());
        assert!(ContinuousFetModel::new(1.0, 5.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn switch_on_is_frequency_flat() {
        let m = SwitchModel::new(7.5, 30e-15, 0.0).unwrap();
        for f in [0.0, 1e9, 60e9, 100e9, 1e12] {
            assert_eq!(
                switch_branch(&m, SwitchState::On, omega(f)),
                Branch::Impedance(Complex::new(7.5, 0.0))
            );
        }
    }

    proptest! {
        #[test]
        fn fet_strictly_decreasing(
            r_min in 1.0f64..100.0,
            span in 10.0f64..1e5,
            vc_lo in -1.0f64..0.5,
            width in 0.2f64..3.0,
            shape in 0.5f64..12.0,
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
        ) {
            let m = ContinuousFetModel::new(r_min, r_min + span, vc_lo, vc_lo + width, shape).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let v1 = vc_lo + lo * width;
            let v2 = vc_lo + hi * width;
            let r1 = fet_resistance(&m, v1).unwrap();
            let r2 = fet_resistance(&m, v2).unwrap();
            prop_assert!(r1 > r2, "r({v1}) = {r1} !> r({v2}) = {r2}");
        }
    }
}
