use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raceway dimensions. Two straight channels joined by a bend, plus a cylindrical carbonation sump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactorGeometry {
    /// Channel length [m].
    pub length: f64,
    /// Channel width [m].
    pub width: f64,
    /// Sump radius [m].
    pub sump_radius: f64,
    /// Sump height [m].
    pub sump_height: f64,
    /// Length of the paddlewheel section [m].
    pub paddlewheel_length: f64,
}

impl ReactorGeometry {
    /// Free surface area `W·L` [m²].
    pub fn area(&self) -> f64 {
        self.width * self.length
    }

    pub fn sump_area(&self) -> f64 {
        PI * self.sump_radius * self.sump_radius
    }

    pub fn sump_volume(&self) -> f64 {
        self.sump_area() * self.sump_height
    }

    /// Culture depth for a given total volume.
    pub fn depth(&self, vol: f64) -> f64 {
        (vol - self.sump_volume()) / (self.width * self.length)
    }

    /// Total volume holding `depth` metres of culture over the channel.
    pub fn volume_at_depth(&self, depth: f64) -> f64 {
        self.sump_volume() + self.area() * depth
    }

    pub fn validate(&self) -> Result<()> {
        let v = [
            self.length,
            self.width,
            self.sump_radius,
            self.sump_height,
            self.paddlewheel_length,
        ];
        if v.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Config(format!("geometry dimensions must be positive: {self:?}")));
        }
        Ok(())
    }
}
