//! Analytic current fields.
//!
//! Every field is a pure function of position and time. Positions outside a
//! scenario's nominal domain evaluate the same formulas; clipping to the
//! operating area is done by the grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

/// Finite-difference step used for jet velocities and for the default Jacobian.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("field parameter `{name}` must be {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// Current velocity sampled at one point and time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlowVector {
    pub u: f64,
    pub v: f64,
}

impl FlowVector {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn as_vec2(self) -> Vec2 {
        Vec2::new(self.u, self.v)
    }
}

/// Spatial partial derivatives of the current.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowJacobian {
    pub u_x: f64,
    pub u_y: f64,
    pub v_x: f64,
    pub v_y: f64,
}

impl FlowJacobian {
    pub fn divergence(&self) -> f64 {
        self.u_x + self.v_y
    }
}

pub trait FlowField: Send + Sync {
    fn sample(&self, p: Vec2, t: f64) -> FlowVector;

    /// Central-difference estimate of the Jacobian with step `h`.
    fn jacobian(&self, p: Vec2, t: f64, h: f64) -> FlowJacobian {
        central_jacobian(self, p, t, h)
    }

    /// Velocity and Jacobian together; fields may share evaluations.
    fn sample_with_jacobian(&self, p: Vec2, t: f64, h: f64) -> (FlowVector, FlowJacobian) {
        (self.sample(p, t), self.jacobian(p, t, h))
    }

    /// True when `sample` does not depend on `t`.
    fn is_stationary(&self) -> bool {
        false
    }
}

pub fn central_jacobian<F: FlowField + ?Sized>(field: &F, p: Vec2, t: f64, h: f64) -> FlowJacobian {
    assert!(
        h > 0.0 && h.is_finite(),
        "finite-difference step must be positive"
    );
    let xp = field.sample(Vec2::new(p.x + h, p.y), t);
    let xm = field.sample(Vec2::new(p.x - h, p.y), t);
    let yp = field.sample(Vec2::new(p.x, p.y + h), t);
    let ym = field.sample(Vec2::new(p.x, p.y - h), t);
    let inv = 0.5 / h;
    FlowJacobian {
        u_x: (xp.u - xm.u) * inv,
        u_y: (yp.u - ym.u) * inv,
        v_x: (xp.v - xm.v) * inv,
        v_y: (yp.v - ym.v) * inv,
    }
}

fn require(
    name: &'static str,
    value: f64,
    ok: bool,
    requirement: &'static str,
) -> Result<(), FieldError> {
    if ok {
        Ok(())
    } else {
        Err(FieldError::InvalidParameter {
            name,
            requirement,
            value,
        })
    }
}

fn require_finite(name: &'static str, value: f64) -> Result<(), FieldError> {
    require(name, value, value.is_finite(), "finite")
}

/// Spatially and temporally constant current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformField {
    pub u: f64,
    pub v: f64,
}

impl UniformField {
    pub fn new(u: f64, v: f64) -> Result<Self, FieldError> {
        let field = Self { u, v };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        require_finite("u", self.u)?;
        require_finite("v", self.v)
    }
}

impl FlowField for UniformField {
    fn sample(&self, _p: Vec2, _t: f64) -> FlowVector {
        FlowVector::new(self.u, self.v)
    }

    fn is_stationary(&self) -> bool {
        true
    }
}

/// Parabolic cross-stream profile of a river of width `width` flowing in +y,
/// zero at both banks (x = 0 and x = width) and `peak_current` mid-channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiverField {
    pub width: f64,
    pub peak_current: f64,
}

impl RiverField {
    pub fn new(width: f64, peak_current: f64) -> Result<Self, FieldError> {
        let field = Self {
            width,
            peak_current,
        };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        require(
            "width",
            self.width,
            self.width > 0.0 && self.width.is_finite(),
            "positive and finite",
        )?;
        require_finite("peak_current", self.peak_current)
    }

    /// Closed-form partials; only `v_x` is non-zero.
    pub fn analytic_jacobian(&self, p: Vec2) -> FlowJacobian {
        let b = self.width;
        FlowJacobian {
            v_x: 4.0 / (b * b) * (b - 2.0 * p.x) * self.peak_current,
            ..FlowJacobian::default()
        }
    }
}

impl FlowField for RiverField {
    fn sample(&self, p: Vec2, _t: f64) -> FlowVector {
        let b = self.width;
        FlowVector::new(0.0, 4.0 / (b * b) * p.x * (b - p.x) * self.peak_current)
    }

    fn is_stationary(&self) -> bool {
        true
    }
}

/// Dimensionless eastward meandering jet whose meander amplitude oscillates in
/// time. Velocities are obtained from the stream function by central
/// differences with step [`DEFAULT_FD_STEP`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetField {
    pub mean_amplitude: f64,
    pub oscillation_amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub wavenumber: f64,
    pub phase_speed: f64,
}

impl JetField {
    /// The standard Gulf-Stream-like parameter set.
    pub fn reference() -> Self {
        Self {
            mean_amplitude: 1.2,
            oscillation_amplitude: 0.3,
            frequency: 0.4,
            phase: std::f64::consts::FRAC_PI_2,
            wavenumber: 0.84,
            phase_speed: 0.12,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        require_finite("mean_amplitude", self.mean_amplitude)?;
        require_finite("oscillation_amplitude", self.oscillation_amplitude)?;
        require_finite("frequency", self.frequency)?;
        require_finite("phase", self.phase)?;
        require_finite("wavenumber", self.wavenumber)?;
        require_finite("phase_speed", self.phase_speed)
    }

    pub fn meander_amplitude(&self, t: f64) -> f64 {
        self.mean_amplitude + self.oscillation_amplitude * (self.frequency * t + self.phase).cos()
    }

    /// Period of the amplitude oscillation, or infinity for a steady meander.
    pub fn period(&self) -> f64 {
        if self.frequency == 0.0 {
            f64::INFINITY
        } else {
            std::f64::consts::TAU / self.frequency.abs()
        }
    }

    pub fn stream_function(&self, x: f64, y: f64, t: f64) -> f64 {
        self.frame(t).stream_function(x, y)
    }

    fn frame(&self, t: f64) -> JetFrame {
        JetFrame {
            amplitude: self.meander_amplitude(t),
            wavenumber: self.wavenumber,
            shift: self.phase_speed * t,
        }
    }

    /// Velocity and Jacobian from a nine-point stencil of the stream function.
    fn hessian_stencil(&self, p: Vec2, t: f64, h: f64) -> (FlowVector, FlowJacobian) {
        assert!(
            h > 0.0 && h.is_finite(),
            "finite-difference step must be positive"
        );
        let f = self.frame(t);
        let phi = |dx: f64, dy: f64| f.stream_function(p.x + dx, p.y + dy);
        let c = phi(0.0, 0.0);
        let (e, w, n, s) = (phi(h, 0.0), phi(-h, 0.0), phi(0.0, h), phi(0.0, -h));
        let cross = phi(h, h) - phi(h, -h) - phi(-h, h) + phi(-h, -h);
        let inv2 = 0.5 / h;
        let inv_sq = 1.0 / (h * h);
        let phi_xy = 0.25 * cross * inv_sq;
        let velocity = FlowVector::new(-(n - s) * inv2, (e - w) * inv2);
        let jac = FlowJacobian {
            u_x: -phi_xy,
            u_y: -(n - 2.0 * c + s) * inv_sq,
            v_x: (e - 2.0 * c + w) * inv_sq,
            v_y: phi_xy,
        };
        (velocity, jac)
    }
}

/// Stream function with the time-dependent quantities fixed.
struct JetFrame {
    amplitude: f64,
    wavenumber: f64,
    shift: f64,
}

impl JetFrame {
    fn stream_function(&self, x: f64, y: f64) -> f64 {
        let (b, k) = (self.amplitude, self.wavenumber);
        let (sin, cos) = (k * (x - self.shift)).sin_cos();
        let stretch = (1.0 + k * k * b * b * sin * sin).sqrt();
        1.0 - ((y - b * cos) / stretch).tanh()
    }
}

impl FlowField for JetField {
    fn sample(&self, p: Vec2, t: f64) -> FlowVector {
        let h = DEFAULT_FD_STEP;
        let f = self.frame(t);
        let inv = 0.5 / h;
        let d_dy = (f.stream_function(p.x, p.y + h) - f.stream_function(p.x, p.y - h)) * inv;
        let d_dx = (f.stream_function(p.x + h, p.y) - f.stream_function(p.x - h, p.y)) * inv;
        FlowVector::new(-d_dy, d_dx)
    }

    fn jacobian(&self, p: Vec2, t: f64, h: f64) -> FlowJacobian {
        self.hessian_stencil(p, t, h).1
    }

    fn sample_with_jacobian(&self, p: Vec2, t: f64, h: f64) -> (FlowVector, FlowJacobian) {
        let (velocity, jac) = self.hessian_stencil(p, t, h);
        if h == DEFAULT_FD_STEP {
            (velocity, jac)
        } else {
            (self.sample(p, t), jac)
        }
    }

    fn is_stationary(&self) -> bool {
        self.oscillation_amplitude == 0.0 && self.phase_speed == 0.0
    }
}

/// Field definition as it appears in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldSpec {
    Uniform(UniformField),
    River(RiverField),
    Jet(JetField),
}

impl FieldSpec {
    pub fn validate(&self) -> Result<(), FieldError> {
        match self {
            FieldSpec::Uniform(f) => f.validate(),
            FieldSpec::River(f) => f.validate(),
            FieldSpec::Jet(f) => f.validate(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FieldSpec::Uniform(_) => "uniform",
            FieldSpec::River(_) => "river",
            FieldSpec::Jet(_) => "jet",
        }
    }
}

impl FlowField for FieldSpec {
    fn sample(&self, p: Vec2, t: f64) -> FlowVector {
        match self {
            FieldSpec::Uniform(f) => f.sample(p, t),
            FieldSpec::River(f) => f.sample(p, t),
            FieldSpec::Jet(f) => f.sample(p, t),
        }
    }

    fn jacobian(&self, p: Vec2, t: f64, h: f64) -> FlowJacobian {
        match self {
            FieldSpec::Uniform(f) => f.jacobian(p, t, h),
            FieldSpec::River(f) => f.jacobian(p, t, h),
            FieldSpec::Jet(f) => f.jacobian(p, t, h),
        }
    }

    fn sample_with_jacobian(&self, p: Vec2, t: f64, h: f64) -> (FlowVector, FlowJacobian) {
        match self {
            FieldSpec::Uniform(f) => f.sample_with_jacobian(p, t, h),
            FieldSpec::River(f) => f.sample_with_jacobian(p, t, h),
            FieldSpec::Jet(f) => f.sample_with_jacobian(p, t, h),
        }
    }

    fn is_stationary(&self) -> bool {
        match self {
            FieldSpec::Uniform(f) => f.is_stationary(),
            FieldSpec::River(f) => f.is_stationary(),
            FieldSpec::Jet(f) => f.is_stationary(),
        }
    }
}
