//! Uniform linear arrays and line-of-sight links.
//!
//! A transmitter carries an M-element ULA. Element `m` of the steering vector
//! toward local angle `phi` is `exp(j * d * m * cos(phi))`, where `d` is the
//! per-element phase constant (not a physical spacing). A receiver sees the
//! row `alpha * conj(a(phi))`, with `alpha` the free-space amplitude
//! `lambda / (4 pi r)`.
//!
//! Angles are radians. The local frame of a transmitter is the global frame
//! rotated by its `boresight`, so local angle 0 is the array reference axis.

use std::f64::consts::{PI, TAU};
use std::ops::Index;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// A point in the plane, meters.
pub type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("complex vector has non-finite entries"));
        }
        Ok(Self(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self(self.0.iter().map(|z| z * k).collect())
    }

    /// Multiply every entry by `exp(j * theta)`.
    pub fn rotate(&self, theta: f64) -> Self {
        let w = Complex64::from_polar(1.0, theta);
        Self(self.0.iter().map(|z| z * w).collect())
    }

    /// Bilinear product `sum_m self[m] * other[m]` (row times column, no conjugation).
    pub fn dot(&self, other: &ComplexVector) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    /// Number of radiating elements M.
    pub elements: usize,
    /// Phase advance per element per unit `cos(phi)`, radians.
    pub spacing_phase: f64,
    pub carrier_hz: f64,
    /// Global bearing of the local angle-zero axis, radians.
    pub boresight: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            elements: 64,
            spacing_phase: PI,
            carrier_hz: 8.0e6,
            boresight: 0.0,
        }
    }
}

impl ArrayConfig {
    pub fn new(
        elements: usize,
        spacing_phase: f64,
        carrier_hz: f64,
        boresight: f64,
    ) -> Result<Self> {
        let cfg = Self {
            elements,
            spacing_phase,
            carrier_hz,
            boresight,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements == 0 {
            return Err(Error::invalid("array needs at least one element"));
        }
        if !(self.spacing_phase > 0.0 && self.spacing_phase.is_finite()) {
            return Err(Error::invalid("spacing phase must be positive and finite"));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::invalid(
                "carrier frequency must be positive and finite",
            ));
        }
        if !self.boresight.is_finite() {
            return Err(Error::invalid("boresight must be finite"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn with_boresight(&self, boresight: f64) -> Self {
        Self {
            boresight,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub tx_positions: Vec<Point>,
    pub rx_positions: Vec<Point>,
    /// `(x_max, y_max)` of the rectangular field anchored at the origin.
    pub field_bounds: (f64, f64),
}

/// Receivers keep this distance from the field edges.
pub const RX_MARGIN: f64 = 1.0;

impl Geometry {
    pub fn new(
        tx_positions: Vec<Point>,
        rx_positions: Vec<Point>,
        field_bounds: Point,
    ) -> Result<Self> {
        let geo = Self {
            tx_positions,
            rx_positions,
            field_bounds,
        };
        geo.validate()?;
        Ok(geo)
    }

    /// Place `rx_count` receivers uniformly in `[1, bound - 1]` on both axes.
    pub fn scatter<R: Rng + ?Sized>(
        tx_positions: Vec<Point>,
        field_bounds: Point,
        rx_count: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let (w, h) = field_bounds;
        if !(w > 2.0 * RX_MARGIN && h > 2.0 * RX_MARGIN) {
            return Err(Error::invalid("field too small for receiver margin"));
        }
        let rx = (0..rx_count)
            .map(|_| {
                (
                    rng.gen_range(RX_MARGIN..=w - RX_MARGIN),
                    rng.gen_range(RX_MARGIN..=h - RX_MARGIN),
                )
            })
            .collect();
        Self::new(tx_positions, rx, field_bounds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_positions.is_empty() || self.rx_positions.is_empty() {
            return Err(Error::invalid(
                "need at least one transmitter and one receiver",
            ));
        }
        let (w, h) = self.field_bounds;
        for &(x, y) in &self.rx_positions {
            let inside = (RX_MARGIN..=w - RX_MARGIN).contains(&x)
                && (RX_MARGIN..=h - RX_MARGIN).contains(&y);
            if !inside {
                return Err(Error::invalid(format!(
                    "receiver ({x}, {y}) outside [{RX_MARGIN}, bound - {RX_MARGIN}]"
                )));
            }
        }
        for (p, tx) in self.tx_positions.iter().enumerate() {
            if !tx.0.is_finite() || !tx.1.is_finite() {
                return Err(Error::invalid("transmitter position not finite"));
            }
            if self.rx_positions.iter().any(|rx| rx == tx) {
                return Err(Error::DegenerateGeometry { tx: p });
            }
        }
        Ok(())
    }

    pub fn tx_count(&self) -> usize {
        self.tx_positions.len()
    }

    pub fn rx_count(&self) -> usize {
        self.rx_positions.len()
    }

    pub fn center(&self) -> Point {
        (self.field_bounds.0 / 2.0, self.field_bounds.1 / 2.0)
    }

    /// Global bearing from transmitter `p` to the field center.
    pub fn bearing_to_center(&self, p: usize) -> f64 {
        let (cx, cy) = self.center();
        let (tx, ty) = self.tx_positions[p];
        (cy - ty).atan2(cx - tx)
    }
}

fn check_angle(phi: f64) -> Result<()> {
    if phi.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("angle must be finite"))
    }
}

/// `[1, e^{j d cos phi}, ..., e^{j d (M-1) cos phi}]`.
pub fn steering_vector(phi: f64, cfg: &ArrayConfig) -> Result<ComplexVector> {
    check_angle(phi)?;
    let step = cfg.spacing_phase * phi.cos();
    let entries = (0..cfg.elements)
        .map(|m| {
            if m == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, step * m as f64)
            }
        })
        .collect();
    Ok(ComplexVector(entries))
}

/// Local departure angle from transmitter `tx_index` toward `rx`, in `[0, 2pi)`.
pub fn angle_of_departure(
    tx_index: usize,
    rx: Point,
    geo: &Geometry,
    cfg: &ArrayConfig,
) -> Result<f64> {
    let &(tx, ty) = geo.tx_positions.get(tx_index).ok_or(Error::Index {
        index: tx_index,
        len: geo.tx_count(),
    })?;
    let (dx, dy) = (rx.0 - tx, rx.1 - ty);
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::DegenerateGeometry { tx: tx_index });
    }
    let local = (dy.atan2(dx) - cfg.boresight).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    Ok(if local >= TAU { 0.0 } else { local })
}

/// Free-space amplitude `lambda / (4 pi r)`.
pub fn path_gain(distance: f64, cfg: &ArrayConfig) -> Result<f64> {
    if distance.is_nan() || distance <= 0.0 {
        return Err(Error::invalid(format!(
            "distance must be positive, got {distance}"
        )));
    }
    Ok(cfg.wavelength() / (4.0 * PI * distance))
}

fn distance(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// The row `alpha_{j,p} * conj(a(phi_{j,p}))` seen by receiver `rx_index` from transmitter `tx_index`.
pub fn los_link_response(
    tx_index: usize,
    rx_index: usize,
    geo: &Geometry,
    cfg: &ArrayConfig,
) -> Result<ComplexVector> {
    let rx = *geo.rx_positions.get(rx_index).ok_or(Error::Index {
        index: rx_index,
        len: geo.rx_count(),
    })?;
    let phi = angle_of_departure(tx_index, rx, geo, cfg)?;
    let alpha = path_gain(distance(geo.tx_positions[tx_index], rx), cfg)?;
    Ok(steering_vector(phi, cfg)?.conj().scale(alpha))
}

/// `|<link, code>|^2`, the power delivered over one link by one code.
pub fn beam_power_gain(link: &ComplexVector, code: &ComplexVector) -> Result<f64> {
    Ok(link.dot(code)?.norm_sqr())
}
