//! Two-port chain (ABCD) algebra and S-parameter conversion.
//!
//! Every network in the crate is evaluated one frequency point at a time:
//! element values are turned into ABCD matrices, cascaded by matrix
//! product, and converted to S-parameters against a real reference
//! impedance.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

pub const J: Complex = Complex::new(0.0, 1.0);

/// Chain matrix `[[a, b], [c, d]]` of a two-port.
///
/// `b` is in ohms, `c` in siemens; `a` and `d` are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl Abcd {
    pub const IDENTITY: Abcd = Abcd {
        a: Complex::new(1.0, 0.0),
        b: Complex::new(0.0, 0.0),
        c: Complex::new(0.0, 0.0),
        d: Complex::new(1.0, 0.0),
    };

    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Self { a, b, c, d }
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self · right`.
    pub fn cascade(&self, right: &Abcd) -> Abcd {
        abcd_cascade(self, right)
    }

    /// Connects `other` in parallel with `self` (inputs tied, outputs
    /// tied, common ground), by summing admittance parameters.
    ///
    /// Both networks need a nonzero `b`; a parallel connection is
    /// otherwise not expressible through Y-parameters.
    pub fn parallel(&self, other: &Abcd) -> Result<Abcd> {
        let y1 = self.to_y()?;
        let y2 = other.to_y()?;
        YParams {
            y11: y1.y11 + y2.y11,
            y12: y1.y12 + y2.y12,
            y21: y1.y21 + y2.y21,
            y22: y1.y22 + y2.y22,
        }
        .to_abcd()
    }

    /// Bridges the two-port with a single admittance from input to output
    /// terminal. A zero admittance leaves the network untouched.
    pub fn bridged(&self, y_bridge: Complex) -> Result<Abcd> {
        if y_bridge == Complex::new(0.0, 0.0) {
            return Ok(*self);
        }
        let mut y = self.to_y()?;
        y.y11 += y_bridge;
        y.y22 += y_bridge;
        y.y12 -= y_bridge;
        y.y21 -= y_bridge;
        y.to_abcd()
    }

    pub fn to_y(&self) -> Result<YParams> {
        if self.b.norm() == 0.0 || !self.b.is_finite() {
            return Err(Error::Degenerate(
                "ABCD with b = 0 has no admittance representation".into(),
            ));
        }
        let det = self.det();
        Ok(YParams {
            y11: self.d / self.b,
            y12: -det / self.b,
            y21: -1.0 / self.b,
            y22: self.a / self.b,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl Mul for Abcd {
    type Output = Abcd;

    fn mul(self, rhs: Abcd) -> Abcd {
        abcd_cascade(&self, &rhs)
    }
}

/// Short-circuit admittance parameters; only used to combine networks in
/// parallel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YParams {
    pub y11: Complex,
    pub y12: Complex,
    pub y21: Complex,
    pub y22: Complex,
}

impl YParams {
    pub fn to_abcd(&self) -> Result<Abcd> {
        if self.y21.norm() == 0.0 {
            return Err(Error::Degenerate(
                "Y-parameters with y21 = 0 have no chain-matrix representation".into(),
            ));
        }
        let dy = self.y11 * self.y22 - self.y12 * self.y21;
        Ok(Abcd {
            a: -self.y22 / self.y21,
            b: -1.0 / self.y21,
            c: -dy / self.y21,
            d: -self.y11 / self.y21,
        })
    }
}

/// Two-port S-parameters referenced to a real impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParams2 {
    pub s11: Complex,
    pub s21: Complex,
    pub s12: Complex,
    pub s22: Complex,
    pub z0_ohms: f64,
}

impl SParams2 {
    pub fn is_finite(&self) -> bool {
        self.s11.is_finite() && self.s21.is_finite() && self.s12.is_finite() && self.s22.is_finite()
    }
}

/// Strictly increasing list of positive frequencies in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("frequency grid is empty".into()));
        }
        if points.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(Error::InvalidInput(
                "frequency grid points must be finite and > 0".into(),
            ));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "frequency grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// `n` evenly spaced points from `start` to `stop` inclusive.
    pub fn linear(start_hz: f64, stop_hz: f64, n: usize) -> Result<Self> {
        match n {
            0 => Self::new(Vec::new()),
            1 => Self::new(vec![start_hz]),
            _ => {
                let step = (stop_hz - start_hz) / (n - 1) as f64;
                let mut pts: Vec<f64> = (0..n).map(|i| start_hz + step * i as f64).collect();
                pts[n - 1] = stop_hz;
                Self::new(pts)
            }
        }
    }

    /// `n` log-spaced points from `start` to `stop` inclusive.
    pub fn log(start_hz: f64, stop_hz: f64, n: usize) -> Result<Self> {
        if n < 2 || start_hz <= 0.0 {
            return Self::linear(start_hz, stop_hz, n);
        }
        let (l0, l1) = (start_hz.ln(), stop_hz.ln());
        let mut pts: Vec<f64> = (0..n)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
            .collect();
        pts[0] = start_hz;
        pts[n - 1] = stop_hz;
        Self::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn omega(freq_hz: f64) -> f64 {
    2.0 * PI * freq_hz
}

/// Series impedance `z` in the signal path.
pub fn abcd_series(z: Complex) -> Abcd {
    Abcd {
        b: z,
        ..Abcd::IDENTITY
    }
}

/// Shunt admittance `y` to ground.
pub fn abcd_shunt(y: Complex) -> Abcd {
    Abcd {
        c: y,
        ..Abcd::IDENTITY
    }
}

pub fn abcd_cascade(left: &Abcd, right: &Abcd) -> Abcd {
    Abcd {
        a: left.a * right.a + left.b * right.c,
        b: left.a * right.b + left.b * right.d,
        c: left.c * right.a + left.d * right.c,
        d: left.c * right.b + left.d * right.d,
    }
}

/// Ideal lossless line of characteristic impedance `z_c` and electrical
/// length `theta_rad`.
pub fn abcd_tline(z_c: f64, theta_rad: f64) -> Result<Abcd> {
    if !(z_c > 0.0) || !z_c.is_finite() {
        return Err(Error::InvalidInput(format!(
            "line impedance must be positive, got {z_c}"
        )));
    }
    if !theta_rad.is_finite() {
        return Err(Error::InvalidInput("line length must be finite".into()));
    }
    let (s, c) = theta_rad.sin_cos();
    Ok(Abcd {
        a: Complex::new(c, 0.0),
        b: J * (z_c * s),
        c: J * (s / z_c),
        d: Complex::new(c, 0.0),
    })
}

/// Chain matrix to S-parameters at a real reference impedance `z0`.
pub fn abcd_to_s(m: &Abcd, z0: f64) -> Result<SParams2> {
    if !(z0 > 0.0) || !z0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "reference impedance must be positive, got {z0}"
        )));
    }
    if !m.is_finite() {
        return Err(Error::Degenerate("non-finite chain matrix".into()));
    }
    let bz = m.b / z0;
    let cz = m.c * z0;
    let den = m.a + bz + cz + m.d;
    if den.norm() == 0.0 {
        return Err(Error::Degenerate(
            "a + b/z0 + c*z0 + d vanishes; network has no S-parameters".into(),
        ));
    }
    let s = SParams2 {
        s11: (m.a + bz - cz - m.d) / den,
        s21: 2.0 / den,
        s12: 2.0 * m.det() / den,
        s22: (-m.a + bz - cz + m.d) / den,
        z0_ohms: z0,
    };
    if !s.is_finite() {
        return Err(Error::Degenerate("S-parameters overflowed".into()));
    }
    Ok(s)
}

/// Magnitude in dB, `20·log10|s|`.
pub fn mag_db(s: Complex) -> Result<f64> {
    let m = s.norm();
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::ZeroMagnitude);
    }
    Ok(20.0 * m.log10())
}

/// Phase in degrees on (−180, 180].
pub fn phase_deg(s: Complex) -> f64 {
    wrap_deg(s.im.atan2(s.re).to_degrees())
}

/// Wraps an angle in degrees onto (−180, 180].
pub fn wrap_deg(deg: f64) -> f64 {
    let mut x = deg % 360.0;
    if x <= -180.0 {
        x += 360.0;
    } else if x > 180.0 {
        x -= 360.0;
    }
    x
}
