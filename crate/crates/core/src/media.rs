//! Material parameters, plane-wave excitation and physical constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::quadrature::KernelParams;
use crate::special::ExpansionConstants;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const MU0: f64 = 1.256_637_062_12e-6;
pub const EPS0: f64 = 1.0 / (MU0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);

/// A lossless homogeneous medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub eps_r: f64,
    pub mu_r: f64,
}

impl Medium {
    pub const VACUUM: Medium = Medium { eps_r: 1.0, mu_r: 1.0 };

    pub fn new(eps_r: f64, mu_r: f64) -> Result<Self> {
        let m = Medium { eps_r, mu_r };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_r > 0.0 && self.eps_r.is_finite() && self.mu_r > 0.0 && self.mu_r.is_finite()) {
            return Err(Error::invalid(format!(
                "medium needs positive finite eps_r and mu_r, got {} / {}",
                self.eps_r, self.mu_r
            )));
        }
        Ok(())
    }

    pub fn refractive_index(&self) -> f64 {
        (self.eps_r * self.mu_r).sqrt()
    }

    pub fn wavenumber(&self, frequency: f64) -> f64 {
        2.0 * PI * frequency * self.refractive_index() / SPEED_OF_LIGHT
    }

    pub fn wavelength(&self, frequency: f64) -> f64 {
        SPEED_OF_LIGHT / (frequency * self.refractive_index())
    }

    pub fn omega_mu(&self, frequency: f64) -> f64 {
        2.0 * PI * frequency * MU0 * self.mu_r
    }

    pub fn omega_eps(&self, frequency: f64) -> f64 {
        2.0 * PI * frequency * EPS0 * self.eps_r
    }

    /// Wave impedance `√(μ/ε)`.
    pub fn impedance(&self) -> f64 {
        (MU0 * self.mu_r / (EPS0 * self.eps_r)).sqrt()
    }

    pub fn kernel(&self, frequency: f64, consts: ExpansionConstants) -> KernelParams {
        KernelParams {
            k: self.wavenumber(frequency),
            omega_mu: self.omega_mu(frequency),
            consts,
        }
    }
}

/// TE plane wave `E = amplitude · p̂ · exp(−jk k̂·r)` with in-plane `p̂ ⊥ k̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub frequency: f64,
    pub direction: Point2,
    pub polarization: Point2,
    pub amplitude: f64,
}

impl PlaneWave {
    /// Wave travelling along `direction` with polarization `ẑ × k̂`.
    pub fn along(frequency: f64, direction: Point2, amplitude: f64) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) {
            return Err(Error::invalid("incidence direction must be non-zero"));
        }
        let d = direction * (1.0 / n);
        let w = PlaneWave {
            frequency,
            direction: d,
            polarization: d.rot90(),
            amplitude,
        };
        w.validate()?;
        Ok(w)
    }

    /// Default excitation: travelling along +x̂, polarized along ŷ.
    pub fn default_at(frequency: f64) -> Self {
        PlaneWave {
            frequency,
            direction: Point2::new(1.0, 0.0),
            polarization: Point2::new(0.0, 1.0),
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::invalid(format!("frequency must be positive, got {}", self.frequency)));
        }
        if (self.direction.norm() - 1.0).abs() > 1e-9 || (self.polarization.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("direction and polarization must be unit vectors"));
        }
        if self.direction.dot(self.polarization).abs() > 1e-9 {
            return Err(Error::invalid(
                "polarization must be perpendicular to the direction (TE incidence)",
            ));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::invalid("amplitude must be finite"));
        }
        Ok(())
    }

    pub fn phase(&self, k: f64, r: Point2) -> Complex64 {
        Complex64::from_polar(1.0, -k * self.direction.dot(r))
    }

    pub fn e_field(&self, k: f64, r: Point2) -> [Complex64; 2] {
        let p = self.phase(k, r) * self.amplitude;
        [p * self.polarization.x, p * self.polarization.y]
    }

    /// `H_z = (k̂ × E)_z / η`.
    pub fn h_z(&self, k: f64, impedance: f64, r: Point2) -> Complex64 {
        self.phase(k, r) * (self.amplitude * self.direction.cross(self.polarization) / impedance)
    }
}
