//! Elementary radio-geometry primitives: the vertical antenna pattern,
//! elevation angles, path loss, the nearest-base-station distance law and the
//! mixed user effective-height distribution.
//!
//! Unit conventions: angles are degrees and ratios are dB at every public
//! boundary; trigonometry runs in radians and all gains/thresholds are linear
//! internally.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-power beamwidth of the vertical pattern, degrees.
pub const DEFAULT_THETA3DB_DEG: f64 = 10.0;
/// Default side-lobe attenuation floor, dB (stored as a positive magnitude).
pub const DEFAULT_SLL_EL_DB: f64 = 20.0;
/// Default base-station height, meters.
pub const DEFAULT_BS_HEIGHT_M: f64 = 32.0;
/// Default linear-density slope of the effective-height distribution, 1/m^2.
pub const DEFAULT_HEIGHT_SLOPE: f64 = 0.0047;
/// Default linear-density intercept, 1/m.
pub const DEFAULT_HEIGHT_INTERCEPT: f64 = -0.047;
/// Default lower edge of the continuous effective-height support, meters.
pub const DEFAULT_H_MIN: f64 = 10.0;
/// Default upper edge of the continuous effective-height support, meters;
/// also the location of the ground-user point mass.
pub const DEFAULT_H_MAX: f64 = 30.5;

/// Vertical radiation pattern of the base-station antenna.
///
/// The attenuation toward elevation `theta` is
/// `min(12 ((theta - tilt)/theta3db)^2, sll)` in dB. With `enabled = false`
/// the pattern is omni-directional in the vertical plane (gain identically 1),
/// which is the 2D-beamforming baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    /// Tilt angle between the horizon and the main lobe, degrees.
    pub tilt_deg: f64,
    /// Half-power beamwidth, degrees.
    pub theta3db_deg: f64,
    /// Side-lobe attenuation floor, dB (positive magnitude).
    pub sll_el_db: f64,
    /// False selects the omni-directional vertical baseline.
    pub enabled: bool,
}

impl AntennaPattern {
    pub fn new(tilt_deg: f64, theta3db_deg: f64, sll_el_db: f64) -> Result<Self> {
        let p = AntennaPattern {
            tilt_deg,
            theta3db_deg,
            sll_el_db,
            enabled: true,
        };
        p.validate()?;
        Ok(p)
    }

    /// The omni-directional vertical baseline (gain 1 everywhere).
    pub fn omni() -> Self {
        AntennaPattern {
            tilt_deg: 0.0,
            theta3db_deg: DEFAULT_THETA3DB_DEG,
            sll_el_db: DEFAULT_SLL_EL_DB,
            enabled: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if !(0.0..=90.0).contains(&self.tilt_deg) || !self.tilt_deg.is_finite() {
            return Err(Error::config(format!(
                "tilt_deg must lie in [0, 90], got {}",
                self.tilt_deg
            )));
        }
        if !(self.theta3db_deg > 0.0) || !self.theta3db_deg.is_finite() {
            return Err(Error::config(format!(
                "theta3db_deg must be positive, got {}",
                self.theta3db_deg
            )));
        }
        if !(self.sll_el_db > 0.0) || !self.sll_el_db.is_finite() {
            return Err(Error::config(format!(
                "sll_el_db must be a positive attenuation magnitude, got {}",
                self.sll_el_db
            )));
        }
        Ok(())
    }

    pub fn with_tilt(mut self, tilt_deg: f64) -> Self {
        self.tilt_deg = tilt_deg;
        self
    }

    /// Linear vertical gain toward elevation `theta_deg`, in `(0, 1]`.
    ///
    /// Callers must hold a validated pattern; the angle offset only enters as
    /// a ratio so degrees are used directly.
    #[inline]
    pub fn vertical_gain(&self, theta_deg: f64) -> f64 {
        if !self.enabled {
            return 1.0;
        }
        debug_assert!((-90.0..=90.0).contains(&theta_deg));
        let off = (theta_deg - self.tilt_deg) / self.theta3db_deg;
        let attenuation_db = (12.0 * off * off).min(self.sll_el_db);
        10f64.powf(-0.1 * attenuation_db)
    }

    /// Lower bound of the gain, `10^(-sll/10)` (1 for the omni baseline).
    pub fn floor_gain(&self) -> f64 {
        if self.enabled {
            10f64.powf(-0.1 * self.sll_el_db)
        } else {
            1.0
        }
    }
}

/// Elevation angle in degrees seen from the base station toward a point at
/// effective height `h_eff` and horizontal distance `r`, i.e.
/// `atan(h_eff / r)`. Returns 90 at `r = 0` (the limit value) so that
/// simulated realizations never fault on a coincident point.
#[inline]
pub fn elevation_angle(h_eff: f64, r: f64) -> f64 {
    debug_assert!(h_eff >= 0.0);
    if r == 0.0 {
        return 90.0;
    }
    (h_eff / r).atan().to_degrees()
}

/// Power-law path loss `L(d) = C d^(-v)`.
///
/// The scale `C` cancels from every SIR ratio; it is retained for diagnostics
/// and link-budget style checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    /// Path-loss exponent `v`; must exceed 2 so the interference tail
    /// integral converges.
    pub exponent_v: f64,
    /// Dimensionless scale `C`.
    pub scale_c: f64,
}

impl PathLossModel {
    pub fn new(exponent_v: f64, scale_c: f64) -> Result<Self> {
        let m = PathLossModel { exponent_v, scale_c };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exponent_v > 2.0) || !self.exponent_v.is_finite() {
            return Err(Error::config(format!(
                "path-loss exponent must exceed 2, got {}",
                self.exponent_v
            )));
        }
        if !(self.scale_c > 0.0) || !self.scale_c.is_finite() {
            return Err(Error::config(format!(
                "path-loss scale must be positive, got {}",
                self.scale_c
            )));
        }
        Ok(())
    }

    /// Linear attenuation at distance `d > 0`.
    pub fn path_loss(&self, d: f64) -> Result<f64> {
        if !(d > 0.0) {
            return Err(Error::domain(format!(
                "path loss requires a positive distance, got {d}"
            )));
        }
        Ok(self.scale_c * d.powf(-self.exponent_v))
    }
}

impl Default for PathLossModel {
    fn default() -> Self {
        PathLossModel {
            exponent_v: 3.6,
            scale_c: 1.0,
        }
    }
}

/// Mixture distribution of the interfering users' effective height: a linear
/// density `b h + c` on `[h_min, h_max]` with total weight `a`, plus a point
/// mass of weight `1 - a` at `h_atom` (users on the ground).
///
/// The nominal linear density need not integrate exactly to one; it is
/// renormalized internally (see [`HeightModel::continuous_norm`]) and the
/// constructor rejects nominal masses further than 0.02 from one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightModel {
    /// Weight of the continuous component, in `[0, 1]`.
    pub a: f64,
    /// Slope of the linear density, 1/m^2.
    pub b: f64,
    /// Intercept of the linear density, 1/m.
    pub c: f64,
    /// Lower edge of the continuous support, meters.
    pub h_min: f64,
    /// Upper edge of the continuous support, meters.
    pub h_max: f64,
    /// Location of the point mass, meters.
    pub h_atom: f64,
}

impl HeightModel {
    pub fn new(a: f64, b: f64, c: f64, h_min: f64, h_max: f64, h_atom: f64) -> Result<Self> {
        let m = HeightModel {
            a,
            b,
            c,
            h_min,
            h_max,
            h_atom,
        };
        m.validate()?;
        Ok(m)
    }

    /// The default environment profile with mixture weight `a`.
    pub fn standard(a: f64) -> Self {
        HeightModel {
            a,
            b: DEFAULT_HEIGHT_SLOPE,
            c: DEFAULT_HEIGHT_INTERCEPT,
            h_min: DEFAULT_H_MIN,
            h_max: DEFAULT_H_MAX,
            h_atom: DEFAULT_H_MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::config(format!(
                "mixture weight a must lie in [0, 1], got {}",
                self.a
            )));
        }
        if !(self.h_min < self.h_max) {
            return Err(Error::config(format!(
                "height support requires h_min < h_max, got [{}, {}]",
                self.h_min, self.h_max
            )));
        }
        if self.h_atom < 0.0 || !self.h_atom.is_finite() {
            return Err(Error::config(format!(
                "point-mass location must be nonnegative, got {}",
                self.h_atom
            )));
        }
        if self.a > 0.0 {
            // the linear density is monotone, so endpoint checks suffice
            let lo = self.b * self.h_min + self.c;
            let hi = self.b * self.h_max + self.c;
            if lo < -1e-12 || hi < -1e-12 {
                return Err(Error::config(format!(
                    "linear height density is negative on its support \
                     (endpoint values {lo:e}, {hi:e})"
                )));
            }
            let z = self.continuous_norm();
            if (z - 1.0).abs() > 0.02 + 1e-12 {
                return Err(Error::config(format!(
                    "linear height density integrates to {z}, more than 0.02 from 1"
                )));
            }
        }
        Ok(())
    }

    /// Nominal mass of the linear density over its support, i.e. the constant
    /// the continuous part is divided by to make the mixture proper.
    pub fn continuous_norm(&self) -> f64 {
        0.5 * self.b * (self.h_max * self.h_max - self.h_min * self.h_min)
            + self.c * (self.h_max - self.h_min)
    }

    /// Renormalized continuous density at `h` (zero outside the support),
    /// already weighted by the mixture weight `a`.
    pub fn continuous_pdf(&self, h: f64) -> f64 {
        if self.a == 0.0 || h < self.h_min || h > self.h_max {
            return 0.0;
        }
        self.a * (self.b * h + self.c) / self.continuous_norm()
    }

    /// `(continuous density, atom weight)` at `h`: the density of the
    /// renormalized linear part times `a`, and `1 - a` when `h` coincides
    /// with the point-mass location.
    pub fn pdf(&self, h: f64) -> (f64, f64) {
        let atom = if h == self.h_atom { 1.0 - self.a } else { 0.0 };
        (self.continuous_pdf(h), atom)
    }

    /// Cumulative distribution function of the mixture.
    pub fn cdf(&self, h: f64) -> f64 {
        let cont = self.a * self.continuous_cdf_unit(h);
        let atom = if h >= self.h_atom { 1.0 - self.a } else { 0.0 };
        cont + atom
    }

    /// CDF of the renormalized continuous part alone, in `[0, 1]`.
    pub fn continuous_cdf_unit(&self, h: f64) -> f64 {
        if h <= self.h_min {
            return 0.0;
        }
        if h >= self.h_max {
            return 1.0;
        }
        let mass = 0.5 * self.b * (h * h - self.h_min * self.h_min)
            + self.c * (h - self.h_min);
        (mass / self.continuous_norm()).clamp(0.0, 1.0)
    }

    /// Mean of the renormalized continuous part (used for sampling checks).
    pub fn continuous_mean(&self) -> f64 {
        let num = self.b / 3.0 * (self.h_max.powi(3) - self.h_min.powi(3))
            + 0.5 * self.c * (self.h_max * self.h_max - self.h_min * self.h_min);
        num / self.continuous_norm()
    }

    /// Draw one effective height: the atom with probability `1 - a`,
    /// otherwise an inverse-CDF draw from the renormalized linear density
    /// (closed-form root of the quadratic CDF).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let pick: f64 = rng.gen();
        if pick >= self.a {
            return self.h_atom;
        }
        let u: f64 = rng.gen();
        self.sample_continuous_at(u)
    }

    /// Inverse CDF of the renormalized linear density at probability `u`.
    pub fn sample_continuous_at(&self, u: f64) -> f64 {
        let z = self.continuous_norm();
        if self.b.abs() < 1e-14 {
            // uniform density c / z
            return (self.h_min + u * z / self.c).clamp(self.h_min, self.h_max);
        }
        let edge = self.b * self.h_min + self.c;
        let disc = (edge * edge + 2.0 * self.b * z * u).max(0.0);
        ((-self.c + disc.sqrt()) / self.b).clamp(self.h_min, self.h_max)
    }
}

impl Default for HeightModel {
    fn default() -> Self {
        HeightModel::standard(1.0)
    }
}

/// Density of the distance to the nearest point of a planar Poisson process
/// of intensity `lambda_bs`: `f_R(x) = 2 pi lambda x exp(-pi lambda x^2)`.
#[inline]
pub fn nearest_bs_pdf(lambda_bs: f64, x: f64) -> f64 {
    debug_assert!(lambda_bs > 0.0 && x >= 0.0);
    let a = PI * lambda_bs;
    2.0 * a * x * (-a * x * x).exp()
}

/// CDF of the nearest-point distance, `1 - exp(-pi lambda x^2)`.
#[inline]
pub fn nearest_bs_cdf(lambda_bs: f64, x: f64) -> f64 {
    -(-PI * lambda_bs * x * x).exp_m1()
}

/// Inverse-CDF draw of the nearest-point distance.
pub fn sample_nearest_bs_distance<R: Rng + ?Sized>(lambda_bs: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    // 1 - u in (0, 1]; ln is finite
    (-(1.0 - u).ln() / (PI * lambda_bs)).sqrt()
}

/// Full parameterization of one network scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Base-station density, 1/m^2.
    pub lambda_bs: f64,
    /// Base-station height above ground, meters. The analysis works directly
    /// in effective heights; this field documents the mapping from user
    /// heights (`h_eff = bs_height - user height`).
    pub bs_height: f64,
    pub pattern: AntennaPattern,
    pub path_loss: PathLossModel,
    pub height_model: HeightModel,
    /// Effective height of the typical user, meters.
    pub h0: f64,
    /// Minimum distance of pilot-sharing interferers from the serving
    /// base station, meters.
    pub exclusion_radius: f64,
    /// Coverage threshold, dB.
    pub sir_threshold_db: f64,
    /// Order `N` of the gamma approximation of the coverage indicator.
    pub approx_order: u32,
}

impl NetworkConfig {
    /// A fully populated configuration for base-station density `lambda_bs`:
    /// tilt 8 deg over a 10 deg beamwidth with a 20 dB side-lobe floor,
    /// exponent 3.6, the standard height profile with `a = 1`, ground typical
    /// user, threshold 4 dB, order-5 approximation, and the density-derived
    /// exclusion radius.
    pub fn baseline(lambda_bs: f64) -> Self {
        NetworkConfig {
            lambda_bs,
            bs_height: DEFAULT_BS_HEIGHT_M,
            pattern: AntennaPattern {
                tilt_deg: 8.0,
                theta3db_deg: DEFAULT_THETA3DB_DEG,
                sll_el_db: DEFAULT_SLL_EL_DB,
                enabled: true,
            },
            path_loss: PathLossModel::default(),
            height_model: HeightModel::standard(1.0),
            h0: DEFAULT_H_MAX,
            exclusion_radius: Self::default_exclusion_radius(lambda_bs),
            sir_threshold_db: 4.0,
            approx_order: 5,
        }
    }

    /// Mean-cell radius of the process, `sqrt(1 / (pi lambda))`; the default
    /// exclusion radius.
    pub fn default_exclusion_radius(lambda_bs: f64) -> f64 {
        (1.0 / (PI * lambda_bs)).sqrt()
    }

    pub fn mean_cell_radius(&self) -> f64 {
        Self::default_exclusion_radius(self.lambda_bs)
    }

    /// Linear SIR threshold.
    pub fn tau_linear(&self) -> f64 {
        10f64.powf(self.sir_threshold_db / 10.0)
    }

    /// Set the tilt angle; the enabled flag is left alone, so sweeping an
    /// omni-baseline configuration keeps it omni.
    pub fn with_tilt(mut self, tilt_deg: f64) -> Self {
        self.pattern.tilt_deg = tilt_deg;
        self
    }

    pub fn with_omni_pattern(mut self) -> Self {
        self.pattern.enabled = false;
        self
    }

    pub fn with_h0(mut self, h0: f64) -> Self {
        self.h0 = h0;
        self
    }

    pub fn with_height_weight(mut self, a: f64) -> Self {
        self.height_model.a = a;
        self
    }

    pub fn with_sir_threshold_db(mut self, tau_db: f64) -> Self {
        self.sir_threshold_db = tau_db;
        self
    }

    pub fn with_approx_order(mut self, n: u32) -> Self {
        self.approx_order = n;
        self
    }

    /// Change the density and re-derive the default exclusion radius.
    pub fn with_density(mut self, lambda_bs: f64) -> Self {
        self.lambda_bs = lambda_bs;
        self.exclusion_radius = Self::default_exclusion_radius(lambda_bs);
        self
    }

    pub fn with_exclusion_radius(mut self, exclusion_radius: f64) -> Self {
        self.exclusion_radius = exclusion_radius;
        self
    }

    pub fn with_scale_c(mut self, scale_c: f64) -> Self {
        self.path_loss.scale_c = scale_c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_bs > 0.0) || !self.lambda_bs.is_finite() {
            return Err(Error::config(format!(
                "base-station density must be positive, got {}",
                self.lambda_bs
            )));
        }
        if !(self.bs_height > 0.0) {
            return Err(Error::config(format!(
                "base-station height must be positive, got {}",
                self.bs_height
            )));
        }
        if !(self.exclusion_radius >= 0.0) {
            return Err(Error::config(format!(
                "exclusion radius must be nonnegative, got {}",
                self.exclusion_radius
            )));
        }
        if self.approx_order < 1 {
            return Err(Error::config("approximation order must be at least 1"));
        }
        if !self.sir_threshold_db.is_finite() {
            return Err(Error::config("SIR threshold must be finite"));
        }
        self.pattern.validate()?;
        self.path_loss.validate()?;
        self.height_model.validate()?;
        if !(self.height_model.h_min <= self.h0 && self.h0 <= self.height_model.h_atom) {
            return Err(Error::config(format!(
                "typical-user effective height {} outside the model support [{}, {}]",
                self.h0, self.height_model.h_min, self.height_model.h_atom
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pattern_8_10_20() -> AntennaPattern {
        AntennaPattern::new(8.0, 10.0, 20.0).unwrap()
    }

    #[test]
    fn gain_boresight_is_one() {
        assert_eq!(pattern_8_10_20().vertical_gain(8.0), 1.0);
    }

    #[test]
    fn gain_one_beamwidth_off_is_minus_12_db() {
        let g = pattern_8_10_20().vertical_gain(18.0);
        assert!((g - 10f64.powf(-1.2)).abs() < 1e-12, "g={g}");
        assert!((g - 0.06310).abs() < 1e-5);
    }

    #[test]
    fn gain_clips_at_side_lobe_floor() {
        let g = pattern_8_10_20().vertical_gain(60.0);
        assert_eq!(g, 0.01);
        assert_eq!(pattern_8_10_20().floor_gain(), 0.01);
    }

    #[test]
    fn omni_pattern_has_unit_gain() {
        let p = AntennaPattern::omni();
        for theta in [-90.0, -10.0, 0.0, 33.3, 90.0] {
            assert_eq!(p.vertical_gain(theta), 1.0);
        }
    }

    #[test]
    fn gain_depends_only_on_offset() {
        let a = AntennaPattern::new(8.0, 10.0, 20.0).unwrap();
        let b = AntennaPattern::new(30.0, 10.0, 20.0).unwrap();
        for off in [-25.0, -3.0, 0.0, 1.5, 12.0] {
            assert_eq!(a.vertical_gain(8.0 + off), b.vertical_gain(30.0 + off));
        }
    }

    #[test]
    fn invalid_patterns_rejected() {
        assert!(AntennaPattern::new(-1.0, 10.0, 20.0).is_err());
        assert!(AntennaPattern::new(91.0, 10.0, 20.0).is_err());
        assert!(AntennaPattern::new(8.0, 0.0, 20.0).is_err());
        assert!(AntennaPattern::new(8.0, 10.0, -3.0).is_err());
    }

    #[test]
    fn elevation_angle_cases() {
        assert!((elevation_angle(30.5, 30.5) - 45.0).abs() < 1e-12);
        assert_eq!(elevation_angle(0.0, 100.0), 0.0);
        // inverse evaluation: r chosen so that atan(30.5 / r) = 30 deg
        let r = 30.5 / 30f64.to_radians().tan();
        assert!((r - 52.827).abs() < 1e-3);
        assert!((elevation_angle(30.5, r) - 30.0).abs() < 1e-12);
        assert_eq!(elevation_angle(30.5, 0.0), 90.0);
    }

    #[test]
    fn path_loss_examples() {
        let m = PathLossModel::new(3.6, 1.0).unwrap();
        assert_eq!(m.path_loss(1.0).unwrap(), 1.0);
        let g = m.path_loss(10.0).unwrap();
        assert!((g - 10f64.powf(-3.6)).abs() < 1e-16);
        assert!((g - 2.512e-4).abs() < 1e-7);
        let m2 = PathLossModel::new(2.0 + 1e-9, 2.0).unwrap();
        assert!((m2.path_loss(4.0).unwrap() - 0.125).abs() < 1e-8);
        assert!(m.path_loss(0.0).is_err());
        assert!(m.path_loss(-1.0).is_err());
        assert!(PathLossModel::new(2.0, 1.0).is_err());
        assert!(PathLossModel::new(3.6, 0.0).is_err());
    }

    #[test]
    fn height_norm_matches_closed_form() {
        let m = HeightModel::standard(1.0);
        // independent closed-form: b/2 (hmax^2 - hmin^2) + c (hmax - hmin)
        let z = 0.0047 / 2.0 * (30.5 * 30.5 - 10.0 * 10.0) - 0.047 * (30.5 - 10.0);
        assert!((m.continuous_norm() - z).abs() < 1e-15);
        assert!((z - 0.9875875).abs() < 1e-7);
    }

    #[test]
    fn height_pdf_examples() {
        let atom_only = HeightModel::standard(0.0);
        let (c, w) = atom_only.pdf(20.0);
        assert_eq!((c, w), (0.0, 0.0));
        let (c, w) = atom_only.pdf(30.5);
        assert_eq!((c, w), (0.0, 1.0));

        let cont = HeightModel::standard(1.0);
        let (c, w) = cont.pdf(20.0);
        let z = cont.continuous_norm();
        assert!((c - (0.0047 * 20.0 - 0.047) / z).abs() < 1e-15);
        assert!((c - 0.047 / z).abs() < 1e-12);
        assert_eq!(w, 0.0);
        assert_eq!(cont.pdf(5.0), (0.0, 0.0));
    }

    #[test]
    fn height_mixture_mass_is_one() {
        for a in [0.0, 0.3, 0.5, 1.0] {
            let m = HeightModel::standard(a);
            // integrate the continuous pdf numerically + atom weight
            let n = 20_000;
            let dh = (m.h_max - m.h_min) / n as f64;
            let mut mass = 0.0;
            for i in 0..n {
                let h = m.h_min + (i as f64 + 0.5) * dh;
                mass += m.continuous_pdf(h) * dh;
            }
            mass += m.pdf(m.h_atom).1;
            assert!((mass - 1.0).abs() < 1e-6, "a={a} mass={mass}");
        }
    }

    #[test]
    fn height_model_validation() {
        assert!(HeightModel::new(1.2, 0.0047, -0.047, 10.0, 30.5, 30.5).is_err());
        // nominal mass far from 1
        assert!(HeightModel::new(1.0, 0.0047, -0.06, 10.0, 30.5, 30.5).is_err());
        // negative density inside the support
        assert!(HeightModel::new(1.0, -0.01, 0.06, 10.0, 30.5, 30.5).is_err());
        // a = 0 does not constrain the continuous part
        assert!(HeightModel::new(0.0, 0.0, 0.0, 10.0, 30.5, 30.5).is_ok());
        assert!(HeightModel::standard(1.0).validate().is_ok());
    }

    #[test]
    fn height_sample_atom_only() {
        let m = HeightModel::standard(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(m.sample(&mut rng), 30.5);
        }
    }

    #[test]
    fn height_sample_mean_matches_closed_form() {
        let m = HeightModel::standard(1.0);
        // closed-form mean of the renormalized linear density
        let z = m.continuous_norm();
        let mean = (0.0047 / 3.0 * (30.5f64.powi(3) - 1000.0)
            - 0.047 / 2.0 * (30.5 * 30.5 - 100.0))
            / z;
        assert!((mean - 23.667).abs() < 5e-3);
        assert!((m.continuous_mean() - mean).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000;
        let sum: f64 = (0..n).map(|_| m.sample(&mut rng)).sum();
        let emp = sum / n as f64;
        assert!((emp - mean).abs() < 0.02, "empirical {emp} vs {mean}");
    }

    #[test]
    fn height_sample_atom_frequency() {
        let m = HeightModel::standard(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| m.sample(&mut rng) == 30.5).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002, "freq={freq}");
    }

    #[test]
    fn height_inverse_cdf_roundtrip() {
        let m = HeightModel::standard(1.0);
        for u in [0.0, 0.1, 0.35, 0.5, 0.77, 0.99, 1.0] {
            let h = m.sample_continuous_at(u);
            assert!((m.continuous_cdf_unit(h) - u).abs() < 1e-10, "u={u} h={h}");
        }
        assert_eq!(m.sample_continuous_at(0.0), m.h_min);
        assert_eq!(m.sample_continuous_at(1.0), m.h_max);
    }

    #[test]
    fn nearest_bs_pdf_cases() {
        assert_eq!(nearest_bs_pdf(1e-6, 0.0), 0.0);
        // mode at 1 / sqrt(2 pi lambda), from setting the derivative to zero
        let lambda = 1e-6;
        let mode = 1.0 / (2.0 * PI * lambda).sqrt();
        assert!((mode - 398.94).abs() < 0.01);
        let fm = nearest_bs_pdf(lambda, mode);
        assert!(fm > nearest_bs_pdf(lambda, mode * 0.99));
        assert!(fm > nearest_bs_pdf(lambda, mode * 1.01));
    }

    #[test]
    fn nearest_bs_pdf_normalizes() {
        // midpoint rule over [0, 6 sigma]; the tail beyond is < 1e-15
        let lambda = 1e-6;
        let hi = 6.0 / (PI * lambda).sqrt();
        let n = 400_000;
        let dx = hi / n as f64;
        let mut mass = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * dx;
            mass += nearest_bs_pdf(lambda, x) * dx;
        }
        assert!((mass - 1.0).abs() < 1e-9, "mass={mass}");
    }

    #[test]
    fn nearest_bs_cdf_matches_closed_form() {
        let lambda = 5e-5;
        for x in [0.0, 10.0, 50.0, 150.0, 400.0] {
            let want = 1.0 - (-PI * lambda * x * x).exp();
            assert!((nearest_bs_cdf(lambda, x) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn network_config_validation() {
        let cfg = NetworkConfig::baseline(1e-6);
        assert!(cfg.validate().is_ok());
        assert!((cfg.exclusion_radius - 564.19).abs() < 0.01);
        assert!((cfg.tau_linear() - 2.51189).abs() < 1e-5);

        assert!(NetworkConfig::baseline(0.0).validate().is_err());
        assert!(NetworkConfig::baseline(1e-6).with_h0(5.0).validate().is_err());
        assert!(NetworkConfig::baseline(1e-6).with_h0(31.0).validate().is_err());
        let mut bad = NetworkConfig::baseline(1e-6);
        bad.approx_order = 0;
        assert!(bad.validate().is_err());
        let dense = NetworkConfig::baseline(1e-6).with_density(5e-5);
        assert!((dense.exclusion_radius - 79.79).abs() < 0.01);
    }
}
