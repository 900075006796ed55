use crate::error::{Error, Result};

/// Linearized field around the beam axis:
/// `B_x = b2 z - b1 x`, `B_y = 0`, `B_z = b0 + b1 z + b2 x`.
///
/// With a transit speed set, the `b2` terms are switched on and off along
/// the flight through the magnet: they carry the envelope
/// `g(s) = 1 - |2s - 1|`, `s = v t / region_extent`, and vanish outside the
/// region. Without one the field is static.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldModel {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub mu: f64,
    pub region_extent: f64,
    pub transit_speed: Option<f64>,
}

impl FieldModel {
    pub fn new(b0: f64, b1: f64, b2: f64, mu: f64, region_extent: f64) -> Result<Self> {
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(Error::Precondition(format!("b0 must be positive, got {b0}")));
        }
        if !(region_extent.is_finite() && region_extent > 0.0) {
            return Err(Error::Precondition(format!("region extent must be positive, got {region_extent}")));
        }
        if ![b1, b2, mu].iter().all(|v| v.is_finite()) {
            return Err(Error::Precondition("field parameters must be finite".into()));
        }
        Ok(Self { b0, b1, b2, mu, region_extent, transit_speed: None })
    }

    pub fn with_transit(mut self, speed: f64) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(Error::Precondition(format!("transit speed must be positive, got {speed}")));
        }
        self.transit_speed = Some(speed);
        Ok(self)
    }

    /// Time to cross the region, if a transit speed is set.
    pub fn transit_time(&self) -> Option<f64> {
        self.transit_speed.map(|v| self.region_extent / v)
    }

    /// Weight of the transverse-gradient terms at time `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        match self.transit_speed {
            None => 1.0,
            Some(v) => {
                let s = v * t / self.region_extent;
                if (0.0..=1.0).contains(&s) {
                    1.0 - (2.0 * s - 1.0).abs()
                } else {
                    0.0
                }
            }
        }
    }

    /// `(B_x, B_z)` at `(x, z)` and time `t`.
    pub fn at(&self, x: f64, z: f64, t: f64) -> (f64, f64) {
        let g = self.envelope(t) * self.b2;
        (g * z - self.b1 * x, self.b0 + self.b1 * z + g * x)
    }

    /// `[[dBx/dx, dBx/dz], [dBz/dx, dBz/dz]]` at time `t`.
    pub fn jacobian(&self, t: f64) -> [[f64; 2]; 2] {
        let g = self.envelope(t) * self.b2;
        [[-self.b1, g], [g, self.b1]]
    }

    /// Largest `|mu B|` over the rectangle spanned by the corners, taking the
    /// envelope at its peak. `|B|` is convex in position, so corners suffice.
    pub fn max_coupling(&self, xs: (f64, f64), zs: (f64, f64)) -> f64 {
        let peak = Self { transit_speed: None, ..*self };
        [(xs.0, zs.0), (xs.0, zs.1), (xs.1, zs.0), (xs.1, zs.1)]
            .iter()
            .map(|&(x, z)| {
                let (bx, bz) = peak.at(x, z, 0.0);
                self.mu.abs() * bx.hypot(bz)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_is_divergence_and_curl_free() {
        let f = FieldModel::new(1.0, 0.3, 0.7, 1.0, 4.0).unwrap().with_transit(2.0).unwrap();
        for t in [0.0, 0.5, 1.0, 1.7, 3.0] {
            let j = f.jacobian(t);
            assert_eq!(j[0][0] + j[1][1], 0.0);
            assert_eq!(j[0][1] - j[1][0], 0.0);
        }
    }

    #[test]
    fn envelope_is_a_triangle_over_the_transit() {
        let f = FieldModel::new(1.0, 0.0, 0.1, 1.0, 4.0).unwrap().with_transit(2.0).unwrap();
        assert_eq!(f.transit_time(), Some(2.0));
        assert_eq!(f.envelope(-0.1), 0.0);
        assert_eq!(f.envelope(0.0), 0.0);
        assert_eq!(f.envelope(0.5), 0.5);
        assert_eq!(f.envelope(1.0), 1.0);
        assert_eq!(f.envelope(2.0), 0.0);
        assert_eq!(f.envelope(2.5), 0.0);
        let stat = FieldModel::new(1.0, 0.0, 0.1, 1.0, 4.0).unwrap();
        assert_eq!(stat.envelope(123.0), 1.0);
    }

    #[test]
    fn field_values() {
        let f = FieldModel::new(2.0, 0.5, 0.25, 1.0, 1.0).unwrap();
        assert_eq!(f.at(0.0, 2.0, 0.0), (0.5, 3.0));
        assert_eq!(f.at(4.0, 0.0, 0.0), (-2.0, 3.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FieldModel::new(0.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(FieldModel::new(1.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(FieldModel::new(1.0, f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(FieldModel::new(1.0, 0.0, 0.0, 1.0, 1.0).unwrap().with_transit(0.0).is_err());
    }
}
