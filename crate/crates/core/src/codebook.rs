//! Discrete beamforming codebook.
//!
//! The adjustment range `zeta` around `center` is cut into `N` equal
//! partitions and one steering vector is placed at each partition midpoint.

use crate::array::{steering_vector, ArrayConfig, ComplexVector};
use crate::error::{Error, Result};
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    codes: Vec<ComplexVector>,
    angles: Vec<f64>,
    range: f64,
    center: f64,
}

impl Codebook {
    pub fn build(size: usize, range: f64, center: f64, cfg: &ArrayConfig) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("codebook needs at least one code"));
        }
        if !(range > 0.0 && range <= TAU) {
            return Err(Error::invalid(format!(
                "codebook range must lie in (0, 2pi], got {range}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::invalid("codebook center must be finite"));
        }
        cfg.validate()?;
        let step = range / size as f64;
        let start = center - range / 2.0;
        let angles: Vec<f64> = (0..size).map(|i| start + (i as f64 + 0.5) * step).collect();
        let codes = angles
            .iter()
            .map(|&phi| steering_vector(phi, cfg))
            .collect::<Result<_>>()?;
        Ok(Self {
            codes,
            angles,
            range,
            center,
        })
    }

    pub fn code(&self, i: usize) -> Result<&ComplexVector> {
        self.codes.get(i).ok_or(Error::Index {
            index: i,
            len: self.codes.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[ComplexVector] {
        &self.codes
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Index of the code whose angle is nearest `phi` in `cos` space (lowest index on ties).
    pub fn nearest_in_cos(&self, phi: f64) -> usize {
        let target = phi.cos();
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, a) in self.angles.iter().enumerate() {
            let dist = (a.cos() - target).abs();
            if dist < best_dist {
                best = i;
                best_dist = dist;
            }
        }
        best
    }

    /// Index of the code whose angle is nearest `phi` (lowest index on ties).
    pub fn nearest_angle(&self, phi: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, a) in self.angles.iter().enumerate() {
            let dist = (a - phi).abs();
            if dist < best_dist {
                best = i;
                best_dist = dist;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::beam_power_gain;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn cfg(m: usize) -> ArrayConfig {
        ArrayConfig::new(m, PI, 8e6, 0.0).unwrap()
    }

    #[test]
    fn single_code_sits_at_center() {
        let book = Codebook::build(1, FRAC_PI_2, 1.234, &cfg(8)).unwrap();
        assert_eq!(book.angles(), &[1.234]);
    }

    #[test]
    fn midpoint_angles() {
        let book = Codebook::build(4, FRAC_PI_2, FRAC_PI_4, &cfg(8)).unwrap();
        let want = [PI / 16.0, 3.0 * PI / 16.0, 5.0 * PI / 16.0, 7.0 * PI / 16.0];
        for (a, w) in book.angles().iter().zip(want) {
            assert!((a - w).abs() < 1e-15, "{a} vs {w}");
        }
        for pair in book.angles().windows(2) {
            assert!((pair[1] - pair[0] - PI / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn code_lookup() {
        let c = cfg(8);
        let book = Codebook::build(8, FRAC_PI_2, FRAC_PI_2, &c).unwrap();
        assert_eq!(book.code(0).unwrap(), &book.codes()[0]);
        for i in 0..8 {
            let sv = steering_vector(book.angles()[i], &c).unwrap();
            assert_eq!(book.code(i).unwrap(), &sv);
        }
        assert!(matches!(
            book.code(8),
            Err(Error::Index { index: 8, len: 8 })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Codebook::build(0, 1.0, 0.0, &cfg(4)).is_err());
        assert!(Codebook::build(4, 0.0, 0.0, &cfg(4)).is_err());
        assert!(Codebook::build(4, -1.0, 0.0, &cfg(4)).is_err());
        assert!(Codebook::build(4, 7.0, 0.0, &cfg(4)).is_err());
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let c = cfg(64);
        let a = Codebook::build(8, FRAC_PI_2, FRAC_PI_2, &c).unwrap();
        let b = Codebook::build(a.len(), a.range(), a.center(), &c).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        // A dense codebook keeps every in-range link inside the main lobe of its
        // nearest code, where gain falls monotonically with cos-distance.
        #[test]
        fn argmax_gain_is_nearest_in_cos(frac in 0.0f64..1.0, alpha in 0.05f64..2.0) {
            let c = cfg(8);
            let book = Codebook::build(32, FRAC_PI_2, FRAC_PI_2, &c).unwrap();
            let phi = FRAC_PI_4 + frac * FRAC_PI_2;
            let link = steering_vector(phi, &c).unwrap().conj().scale(alpha);
            let mut best = 0;
            let mut best_gain = f64::NEG_INFINITY;
            for (i, code) in book.codes().iter().enumerate() {
                let g = beam_power_gain(&link, code).unwrap();
                if g > best_gain {
                    best = i;
                    best_gain = g;
                }
            }
            prop_assert_eq!(best, book.nearest_in_cos(phi));
        }
    }
}
