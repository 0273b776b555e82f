//! Closed-form two-material solutions in 1D, the annulus and the spherical
//! shell, optimal interface locations and the shell convexity gap.
//!
//! 1D and shell quantities are nondimensional (unit length, unit viscosity,
//! unit pressure drop or unit inlet velocity). The annulus is dimensional.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{DragLaw, Driving, MaterialModel, Metric};
use crate::error::{check_range, Error, Result};

/// Below this |beta| the exponential formulas switch to truncated series.
const SERIES_BETA: f64 = 1e-8;

/// Two-segment 1D layout on [0, 1]: k1 on [0, xi), k2 on (xi, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceLayout1D {
    pub xi: f64,
    pub k1: f64,
    pub k2: f64,
}

impl InterfaceLayout1D {
    pub fn new(xi: f64, k1: f64, k2: f64) -> Result<Self> {
        let l = Self { xi, k1, k2 };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(Error::Domain {
                name: "xi",
                value: self.xi,
                range: "(0, 1)",
            });
        }
        check_k(self.k1)?;
        check_k(self.k2)
    }

    /// Permeability at x.
    pub fn k_at(&self, x: f64) -> f64 {
        if x < self.xi {
            self.k1
        } else {
            self.k2
        }
    }
}

/// Annulus r_i < r < r_o with k1 inside xi and k2 outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusLayout {
    pub r_i: f64,
    pub r_o: f64,
    pub xi: f64,
    pub k1: f64,
    pub k2: f64,
}

impl AnnulusLayout {
    pub fn new(r_i: f64, r_o: f64, xi: f64, k1: f64, k2: f64) -> Result<Self> {
        let l = Self {
            r_i,
            r_o,
            xi,
            k1,
            k2,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        check_radii(self.r_i, self.r_o)?;
        check_range("xi", self.xi, self.r_i, self.r_o, "[r_i, r_o]")?;
        check_k(self.k1)?;
        check_k(self.k2)
    }
}

/// Nondimensional spherical shell r_i < r < 1 with k1 inside xi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellLayout {
    pub r_i: f64,
    pub xi: f64,
    pub k1: f64,
    pub k2: f64,
}

impl ShellLayout {
    pub fn new(r_i: f64, xi: f64, k1: f64, k2: f64) -> Result<Self> {
        let l = Self { r_i, xi, k1, k2 };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        check_radii(self.r_i, 1.0)?;
        check_range("xi", self.xi, self.r_i, 1.0, "[r_i, 1]")?;
        check_k(self.k1)?;
        check_k(self.k2)
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPermeability(k))
    }
}

fn check_radii(r_i: f64, r_o: f64) -> Result<()> {
    if !(r_i > 0.0 && r_i.is_finite()) {
        return Err(Error::Domain {
            name: "r_i",
            value: r_i,
            range: "(0, r_o)",
        });
    }
    if !(r_o > r_i && r_o.is_finite()) {
        return Err(Error::Domain {
            name: "r_o",
            value: r_o,
            range: "(r_i, inf)",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum PressureProfile {
    /// p = a + b g(r) on each side of xi, g the metric potential
    /// (x, ln r or 1/r).
    Affine {
        inner: (f64, f64),
        outer: (f64, f64),
    },
    /// Pressure-driven Barus in 1D.
    Barus {
        beta: f64,
        upsilon: f64,
        k1: f64,
        k2: f64,
    },
    /// Velocity-driven linearized Barus in 1D with unit inflow.
    LinearizedBarus {
        beta: f64,
        upsilon: f64,
        k1: f64,
        k2: f64,
    },
}

/// Closed-form fields of a two-material layout.
///
/// The velocity is radial/axial and positive towards increasing x or r:
/// v = C (1D), C / r (annulus), A / r^2 (shell), with `constant` holding C or A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSolution {
    pub metric: Metric,
    pub driving: Driving,
    pub inner: f64,
    pub outer: f64,
    pub xi: f64,
    pub constant: f64,
    pub phi: f64,
    profile: PressureProfile,
}

fn potential(metric: Metric, r: f64) -> f64 {
    match metric {
        Metric::Planar => r,
        Metric::Cylindrical => r.ln(),
        Metric::Spherical => 1.0 / r,
    }
}

/// -ln(1 + expm1(-beta) s) / beta, the Barus pressure in terms of the
/// normalized resistance s remaining to the outlet.
fn barus_pressure(beta: f64, s: f64) -> f64 {
    if beta.abs() < SERIES_BETA {
        s + 0.5 * beta * (s * s - s)
    } else {
        -((-beta).exp_m1() * s).ln_1p() / beta
    }
}

/// expm1(beta r) / beta.
fn linearized_barus_pressure(beta: f64, r: f64) -> f64 {
    if beta.abs() < SERIES_BETA {
        r + 0.5 * beta * r * r
    } else {
        (beta * r).exp_m1() / beta
    }
}

impl AnalyticSolution {
    /// Velocity (positive along +x / +r) at position r.
    pub fn velocity_at(&self, r: f64) -> f64 {
        self.constant / self.metric.area(r) * self.metric.area(1.0)
    }

    pub fn pressure_at(&self, r: f64) -> f64 {
        let inside = r < self.xi;
        match self.profile {
            PressureProfile::Affine { inner, outer } => {
                let (a, b) = if inside { inner } else { outer };
                a + b * potential(self.metric, r)
            }
            PressureProfile::Barus {
                beta,
                upsilon,
                k1,
                k2,
            } => {
                let s = if inside {
                    1.0 - r / (k1 * upsilon)
                } else {
                    (1.0 - r) / (k2 * upsilon)
                };
                barus_pressure(beta, s)
            }
            PressureProfile::LinearizedBarus {
                beta,
                upsilon,
                k1,
                k2,
            } => {
                let rem = if inside {
                    upsilon - r / k1
                } else {
                    (1.0 - r) / k2
                };
                linearized_barus_pressure(beta, rem)
            }
        }
    }

    /// Pressure at xi from either side.
    pub fn one_sided_pressures(&self) -> (f64, f64) {
        let xi = self.xi;
        match self.profile {
            PressureProfile::Affine { inner, outer } => {
                let g = potential(self.metric, xi);
                (inner.0 + inner.1 * g, outer.0 + outer.1 * g)
            }
            PressureProfile::Barus {
                beta,
                upsilon,
                k1,
                k2,
            } => (
                barus_pressure(beta, 1.0 - xi / (k1 * upsilon)),
                barus_pressure(beta, (1.0 - xi) / (k2 * upsilon)),
            ),
            PressureProfile::LinearizedBarus {
                beta,
                upsilon,
                k1,
                k2,
            } => (
                linearized_barus_pressure(beta, upsilon - xi / k1),
                linearized_barus_pressure(beta, (1.0 - xi) / k2),
            ),
        }
    }

    /// Relative pressure jump across xi.
    pub fn jump(&self) -> f64 {
        let (a, b) = self.one_sided_pressures();
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        (a - b).abs() / scale
    }
}

/// xi / k1 + (1 - xi) / k2.
pub fn upsilon_1d(xi: f64, k1: f64, k2: f64) -> Result<f64> {
    InterfaceLayout1D::new(xi, k1, k2)?;
    Ok(xi / k1 + (1.0 - xi) / k2)
}

/// Closed-form 1D solution. Pressure-driven: p(0) = 1, p(1) = 0.
/// Velocity-driven: v = 1, p(1) = 0. The viscosity is the reference one, so
/// `model.mu0` is not used.
pub fn solve_1d(
    model: &MaterialModel,
    driving: Driving,
    layout: &InterfaceLayout1D,
) -> Result<AnalyticSolution> {
    layout.validate()?;
    model.validate()?;
    let InterfaceLayout1D { xi, k1, k2 } = *layout;
    let ups = xi / k1 + (1.0 - xi) / k2;
    let base = |constant: f64, phi: f64, profile: PressureProfile| AnalyticSolution {
        metric: Metric::Planar,
        driving,
        inner: 0.0,
        outer: 1.0,
        xi,
        constant,
        phi,
        profile,
    };
    let law = if model.is_nonlinear() {
        model.law
    } else {
        DragLaw::Darcy
    };
    match (driving, law) {
        (Driving::PressureDriven, DragLaw::Darcy | DragLaw::DarcyForchheimer) => {
            let bf = if law == DragLaw::Darcy {
                0.0
            } else {
                model.beta_f
            };
            let c = (2.0 / ups) / ((1.0 + 4.0 * bf / ups).sqrt() + 1.0);
            let g = (1.0 + bf * c) * c;
            Ok(base(
                c,
                c,
                PressureProfile::Affine {
                    inner: (1.0, -g / k1),
                    outer: (g / k2, -g / k2),
                },
            ))
        }
        (Driving::PressureDriven, DragLaw::Barus) => {
            let beta = model.beta_b;
            let c = -(-beta).exp_m1() / (beta * ups);
            Ok(base(
                c,
                c,
                PressureProfile::Barus {
                    beta,
                    upsilon: ups,
                    k1,
                    k2,
                },
            ))
        }
        (Driving::VelocityDriven, DragLaw::Darcy | DragLaw::DarcyForchheimer) => {
            let g = if law == DragLaw::Darcy {
                1.0
            } else {
                1.0 + model.beta_f
            };
            Ok(base(
                1.0,
                g * ups,
                PressureProfile::Affine {
                    inner: (g * ups, -g / k1),
                    outer: (g / k2, -g / k2),
                },
            ))
        }
        (Driving::VelocityDriven, DragLaw::LinearizedBarus) => {
            let beta = model.beta_b;
            Ok(base(
                1.0,
                linearized_barus_pressure(beta, ups),
                PressureProfile::LinearizedBarus {
                    beta,
                    upsilon: ups,
                    k1,
                    k2,
                },
            ))
        }
        (Driving::VelocityDriven, DragLaw::Barus) => Err(Error::Unsupported(
            "Barus drag has no closed form for velocity-driven problems; use linearized Barus"
                .into(),
        )),
        (Driving::PressureDriven, DragLaw::LinearizedBarus) => Err(Error::Unsupported(
            "linearized Barus closed form is only available for velocity-driven problems".into(),
        )),
    }
}

/// ln(xi / r_i) / k1 + ln(r_o / xi) / k2.
pub fn upsilon_2d(layout: &AnnulusLayout) -> Result<f64> {
    layout.validate()?;
    Ok(upsilon_2d_unchecked(layout))
}

fn upsilon_2d_unchecked(l: &AnnulusLayout) -> f64 {
    (l.xi / l.r_i).ln() / l.k1 + (l.r_o / l.xi).ln() / l.k2
}

/// Boundary data for the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnnulusDrive {
    /// p(r_i) = p_i, p(r_o) = p_o.
    Pressure { p_i: f64, p_o: f64 },
    /// Outward velocity v_o at r_i, p(r_o) = p_o.
    Velocity { v_o: f64, p_o: f64 },
}

/// Darcy annulus. The radial velocity is C / r, positive outward.
pub fn solve_annulus(
    layout: &AnnulusLayout,
    drive: AnnulusDrive,
    mu: f64,
) -> Result<AnalyticSolution> {
    layout.validate()?;
    check_range("mu", mu, f64::MIN_POSITIVE, f64::MAX, "(0, inf)")?;
    let ups = upsilon_2d_unchecked(layout);
    let AnnulusLayout {
        r_i,
        r_o,
        xi,
        k1,
        k2,
    } = *layout;
    let (c, phi, driving, p_o) = match drive {
        AnnulusDrive::Pressure { p_i, p_o } => {
            let c = (p_i - p_o) / (mu * ups);
            (
                c,
                2.0 * PI * (p_i - p_o).powi(2) / (mu * ups),
                Driving::PressureDriven,
                p_o,
            )
        }
        AnnulusDrive::Velocity { v_o, p_o } => {
            let c = v_o * r_i;
            (c, 2.0 * PI * mu * c * c * ups, Driving::VelocityDriven, p_o)
        }
    };
    // p = p_o + mu C ln(r_o / r) / k2 outside; continuity fixes the inner constant.
    let b2 = -mu * c / k2;
    let a2 = p_o - b2 * r_o.ln();
    let b1 = -mu * c / k1;
    let a1 = a2 + (b2 - b1) * xi.ln();
    Ok(AnalyticSolution {
        metric: Metric::Cylindrical,
        driving,
        inner: r_i,
        outer: r_o,
        xi,
        constant: c,
        phi,
        profile: PressureProfile::Affine {
            inner: (a1, b1),
            outer: (a2, b2),
        },
    })
}

/// Nondimensional shell with p(r_i) = 1, p(1) = 0: v = A / r^2.
pub fn solve_sphere(layout: &ShellLayout) -> Result<AnalyticSolution> {
    layout.validate()?;
    let ShellLayout { r_i, xi, k1, k2 } = *layout;
    let a = upsilon_3d_unchecked(layout);
    let b1 = 1.0 - a / (k1 * r_i);
    let b2 = -a / k2;
    Ok(AnalyticSolution {
        metric: Metric::Spherical,
        driving: Driving::PressureDriven,
        inner: r_i,
        outer: 1.0,
        xi,
        constant: a,
        phi: 4.0 * PI * a,
        profile: PressureProfile::Affine {
            inner: (b1, a / k1),
            outer: (b2, a / k2),
        },
    })
}

/// A = [1/(k1 r_i) - 1/k2 + (1/xi)(1/k2 - 1/k1)]^-1.
pub fn upsilon_3d(layout: &ShellLayout) -> Result<f64> {
    layout.validate()?;
    Ok(upsilon_3d_unchecked(layout))
}

fn upsilon_3d_unchecked(l: &ShellLayout) -> f64 {
    1.0 / (1.0 / (l.k1 * l.r_i) - 1.0 / l.k2 + (1.0 / l.xi) * (1.0 / l.k2 - 1.0 / l.k1))
}

/// Which material ends up next to the inner boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    HighPermeabilityInner,
    HighPermeabilityOuter,
}

impl Placement {
    pub fn label(self) -> &'static str {
        match self {
            Placement::HighPermeabilityInner => "high-k inner",
            Placement::HighPermeabilityOuter => "high-k outer",
        }
    }
}

/// Interface locations for both placements of the high-permeability
/// material at volume fraction gamma, with their figures of merit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceOptimum {
    /// Interface radius with high-k inner (configuration 1).
    pub xi_hat: f64,
    /// Interface radius with high-k outer (configuration 2).
    pub xi_hat_outer: f64,
    /// Annulus: Upsilon at each configuration (smaller wins).
    /// Shell: the dissipation 4 pi A at each configuration (larger wins).
    pub value_inner: f64,
    pub value_outer: f64,
    pub verdict: Placement,
}

/// Optimal annulus interfaces for high-k fraction gamma.
pub fn optimal_interface_2d(
    gamma: f64,
    r_i: f64,
    r_o: f64,
    kl: f64,
    kh: f64,
) -> Result<InterfaceOptimum> {
    check_range("gamma", gamma, 0.0, 1.0, "[0, 1]")?;
    check_radii(r_i, r_o)?;
    check_materials(kl, kh)?;
    let (ri2, ro2) = (r_i * r_i, r_o * r_o);
    let x1 = ((1.0 - gamma) * ri2 + gamma * ro2).sqrt().clamp(r_i, r_o);
    let x2 = (gamma * ri2 + (1.0 - gamma) * ro2).sqrt().clamp(r_i, r_o);
    let u1 = upsilon_2d_unchecked(&AnnulusLayout {
        r_i,
        r_o,
        xi: x1,
        k1: kh,
        k2: kl,
    });
    let u2 = upsilon_2d_unchecked(&AnnulusLayout {
        r_i,
        r_o,
        xi: x2,
        k1: kl,
        k2: kh,
    });
    Ok(InterfaceOptimum {
        xi_hat: x1,
        xi_hat_outer: x2,
        value_inner: u1,
        value_outer: u2,
        verdict: if u1 <= u2 {
            Placement::HighPermeabilityInner
        } else {
            Placement::HighPermeabilityOuter
        },
    })
}

/// Optimal shell interfaces (r_o = 1) for high-k fraction gamma.
pub fn optimal_interface_3d(gamma: f64, r_i: f64, kl: f64, kh: f64) -> Result<InterfaceOptimum> {
    check_range("gamma", gamma, 0.0, 1.0, "[0, 1]")?;
    check_radii(r_i, 1.0)?;
    check_materials(kl, kh)?;
    let (x1, x2) = shell_interfaces(gamma, r_i);
    let phi1 = 4.0
        * PI
        * upsilon_3d_unchecked(&ShellLayout {
            r_i,
            xi: x1,
            k1: kh,
            k2: kl,
        });
    let phi2 = 4.0
        * PI
        * upsilon_3d_unchecked(&ShellLayout {
            r_i,
            xi: x2,
            k1: kl,
            k2: kh,
        });
    Ok(InterfaceOptimum {
        xi_hat: x1,
        xi_hat_outer: x2,
        value_inner: phi1,
        value_outer: phi2,
        verdict: if phi1 >= phi2 {
            Placement::HighPermeabilityInner
        } else {
            Placement::HighPermeabilityOuter
        },
    })
}

fn shell_interfaces(gamma: f64, r_i: f64) -> (f64, f64) {
    let ri3 = r_i * r_i * r_i;
    let x1 = (gamma + (1.0 - gamma) * ri3).cbrt().clamp(r_i, 1.0);
    let x2 = ((1.0 - gamma) + gamma * ri3).cbrt().clamp(r_i, 1.0);
    (x1, x2)
}

fn check_materials(kl: f64, kh: f64) -> Result<()> {
    check_k(kl)?;
    check_k(kh)?;
    if kh < kl {
        return Err(Error::Domain {
            name: "kh",
            value: kh,
            range: "[kl, inf)",
        });
    }
    Ok(())
}

/// 1 + 1/r_i - (1/xi_1 + 1/xi_2) for the two optimal shell interfaces;
/// nonnegative for every gamma in [0, 1] and 0 < r_i < 1.
pub fn lemma_gap(gamma: f64, r_i: f64) -> Result<f64> {
    check_range("gamma", gamma, 0.0, 1.0, "[0, 1]")?;
    check_radii(r_i, 1.0)?;
    let (x1, x2) = shell_interfaces(gamma, r_i);
    Ok(1.0 + 1.0 / r_i - (1.0 / x1 + 1.0 / x2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn upsilon_1d_examples() {
        assert!(close(upsilon_1d(0.3, 10.0, 1.0).unwrap(), 0.73, 1e-15));
        assert!(close(upsilon_1d(0.7, 4.0, 4.0).unwrap(), 0.25, 1e-15));
        assert!(close(upsilon_1d(1e-12, 10.0, 2.0).unwrap(), 0.5, 1e-11));
        assert!(upsilon_1d(0.0, 1.0, 1.0).is_err());
        assert!(upsilon_1d(1.2, 1.0, 1.0).is_err());
    }

    #[test]
    fn darcy_pressure_driven_constant() {
        let l = InterfaceLayout1D::new(0.3, 10.0, 1.0).unwrap();
        let s = solve_1d(
            &MaterialModel::darcy(1.0).unwrap(),
            Driving::PressureDriven,
            &l,
        )
        .unwrap();
        assert!(close(s.constant, 1.0 / 0.73, 1e-14));
        assert!(close(s.phi, 1.0 / 0.73, 1e-14));
        assert!((s.constant - 1.369863).abs() < 1e-6);
    }

    #[test]
    fn forchheimer_root() {
        let l = InterfaceLayout1D::new(0.5, 1.0, 1.0).unwrap();
        let m = MaterialModel::darcy_forchheimer(1.0, 1.0).unwrap();
        let s = solve_1d(&m, Driving::PressureDriven, &l).unwrap();
        assert!(close(s.constant, (5f64.sqrt() - 1.0) / 2.0, 1e-15));
        assert!((s.constant - 0.618034).abs() < 1e-6);
    }

    #[test]
    fn forchheimer_velocity_driven_phi() {
        let l = InterfaceLayout1D::new(0.3, 10.0, 1.0).unwrap();
        let m = MaterialModel::darcy_forchheimer(1.0, 0.5).unwrap();
        let s = solve_1d(&m, Driving::VelocityDriven, &l).unwrap();
        assert!(close(s.phi, 1.095, 1e-14));
    }

    #[test]
    fn barus_velocity_driven_is_unsupported() {
        let l = InterfaceLayout1D::new(0.3, 10.0, 1.0).unwrap();
        let m = MaterialModel::barus(1.0, 0.5).unwrap();
        assert!(matches!(
            solve_1d(&m, Driving::VelocityDriven, &l),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn boundary_values_and_continuity() {
        let l = InterfaceLayout1D::new(0.3, 10.0, 1.0).unwrap();
        let cases = [
            (MaterialModel::darcy(1.0).unwrap(), Driving::PressureDriven),
            (
                MaterialModel::barus(1.0, 0.99).unwrap(),
                Driving::PressureDriven,
            ),
            (
                MaterialModel::darcy_forchheimer(1.0, 1.0).unwrap(),
                Driving::PressureDriven,
            ),
            (MaterialModel::darcy(1.0).unwrap(), Driving::VelocityDriven),
            (
                MaterialModel::linearized_barus(1.0, 0.5).unwrap(),
                Driving::VelocityDriven,
            ),
            (
                MaterialModel::darcy_forchheimer(1.0, 1.0).unwrap(),
                Driving::VelocityDriven,
            ),
        ];
        for (m, d) in cases {
            let s = solve_1d(&m, d, &l).unwrap();
            assert!(s.jump() <= 1e-12, "{:?} {:?}", m.law, d);
            assert!(s.pressure_at(1.0).abs() <= 1e-15);
            if d == Driving::PressureDriven {
                assert!((s.pressure_at(0.0) - 1.0).abs() <= 1e-14);
            } else {
                assert!(close(s.pressure_at(0.0), s.phi, 1e-14));
            }
        }
    }

    /// Composite Simpson rule, the quadrature oracle for resistance integrals.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn annulus_examples() {
        let xi = 0.554083;
        let l = AnnulusLayout::new(0.1, 1.0, xi, 10.0, 1.0).unwrap();
        let u = upsilon_2d(&l).unwrap();
        let oracle =
            simpson(|r| 1.0 / (10.0 * r), 0.1, xi, 20_000) + simpson(|r| 1.0 / r, xi, 1.0, 20_000);
        assert!((u - oracle).abs() < 1e-10);
        let s = solve_annulus(
            &l,
            AnnulusDrive::Pressure {
                p_i: 100.0,
                p_o: 1.0,
            },
            1.0,
        )
        .unwrap();
        let phi_oracle = 2.0 * PI * 99.0 * 99.0 / oracle;
        assert!((s.phi - phi_oracle).abs() < 1e-9 * phi_oracle);
        assert!(close(s.pressure_at(0.1), 100.0, 1e-14));
        assert!(close(s.pressure_at(1.0), 1.0, 1e-14));
        assert!(s.jump() < 1e-12);

        let no_drive =
            solve_annulus(&l, AnnulusDrive::Pressure { p_i: 5.0, p_o: 5.0 }, 1.0).unwrap();
        assert_eq!(no_drive.phi, 0.0);
        assert_eq!(no_drive.velocity_at(0.3), 0.0);

        let eq = AnnulusLayout::new(0.1, 1.0, 0.5, 1.0, 1.0).unwrap();
        let v = solve_annulus(&eq, AnnulusDrive::Velocity { v_o: 1.0, p_o: 0.0 }, 1.0).unwrap();
        let v_oracle = 2.0 * PI * 0.01 * simpson(|r| 1.0 / r, 0.1, 1.0, 20_000);
        assert!((v.phi - v_oracle).abs() < 1e-10);
        assert!(close(v.velocity_at(0.1), 1.0, 1e-14));
    }

    #[test]
    fn optimal_interfaces() {
        let o = optimal_interface_2d(0.3, 0.1, 1.0, 1.0, 10.0).unwrap();
        assert!((o.xi_hat - 0.307f64.sqrt()).abs() < 1e-15);
        assert_eq!(o.verdict, Placement::HighPermeabilityInner);
        let o0 = optimal_interface_2d(0.0, 0.1, 1.0, 1.0, 10.0).unwrap();
        assert!((o0.xi_hat - 0.1).abs() < 1e-15);
        let o1 = optimal_interface_2d(1.0, 0.1, 1.0, 1.0, 10.0).unwrap();
        assert!((o1.xi_hat - 1.0).abs() < 1e-15);

        let s = optimal_interface_3d(0.1, 0.1, 1.0, 10.0).unwrap();
        assert!((s.xi_hat - 0.1009f64.cbrt()).abs() < 1e-15);
        assert_eq!(s.verdict, Placement::HighPermeabilityInner);
        assert!((optimal_interface_3d(0.0, 0.1, 1.0, 10.0).unwrap().xi_hat - 0.1).abs() < 1e-15);
        assert!((optimal_interface_3d(1.0, 0.1, 1.0, 10.0).unwrap().xi_hat - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_equal_permeability() {
        let l = ShellLayout::new(0.1, 0.4, 2.0, 2.0).unwrap();
        let s = solve_sphere(&l).unwrap();
        assert!(close(s.constant, 2.0 * 0.1 / 0.9, 1e-14));
        assert!(close(s.pressure_at(0.1), 1.0, 1e-14));
        assert!(s.pressure_at(1.0).abs() < 1e-14);
    }

    #[test]
    fn lemma_endpoints() {
        assert!(lemma_gap(0.0, 0.1).unwrap().abs() < 1e-12);
        assert!(lemma_gap(1.0, 0.1).unwrap().abs() < 1e-12);
        assert!(lemma_gap(0.5, 0.1).unwrap() > 0.0);
        assert!(lemma_gap(0.5, 0.999999).unwrap().abs() < 1e-5);
    }
}
