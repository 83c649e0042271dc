//! Kinematics of a robot pushing a disk object held against its front, and
//! the controllers used while carrying it.

use thiserror::Error;

use crate::geometry::{Mat2, RefPath, Vec2};
use crate::reactive::{navigate_step, Command, Drive, NavConfig, NavOutput, NavState, ReactiveError};
use crate::sensing::{recenter_scan, Scan};

/// Determinants at or below this are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraspError {
    #[error("jacobian is singular (det = {0})")]
    Singular(f64),
    #[error(transparent)]
    Reactive(#[from] ReactiveError),
}

/// Robot pose together with the radii of the robot and the held object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspFrame {
    pub position: Vec2,
    pub heading: f64,
    pub object_radius: f64,
    pub robot_radius: f64,
}

impl GraspFrame {
    pub fn new(position: Vec2, heading: f64, object_radius: f64, robot_radius: f64) -> Self {
        GraspFrame {
            position,
            heading,
            object_radius,
            robot_radius,
        }
    }

    fn forward(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    /// Object center, `x + (ρ + r) e∥`.
    pub fn object_position(&self) -> Vec2 {
        self.position + self.forward() * (self.object_radius + self.robot_radius)
    }

    /// Center of the disk circumscribing robot and object, `x + ρ e∥`.
    pub fn center_position(&self) -> Vec2 {
        self.position + self.forward() * self.object_radius
    }

    /// Maps `(v, ω)` to the object-center velocity; `det = ρ + r`.
    pub fn jacobian_object(&self) -> Mat2 {
        jacobian(self.heading, self.object_radius + self.robot_radius)
    }

    /// Maps `(v, ω)` to the circumscribed-center velocity; `det = ρ`.
    pub fn jacobian_center(&self) -> Mat2 {
        jacobian(self.heading, self.object_radius)
    }

    /// Radius of the circumscribing disk.
    pub fn body_radius(&self) -> f64 {
        self.object_radius + self.robot_radius
    }
}

fn jacobian(heading: f64, lever: f64) -> Mat2 {
    let (s, c) = heading.sin_cos();
    Mat2::new(c, -lever * s, s, lever * c)
}

/// Solves `T (v, ω) = u` for the unicycle inputs.
pub fn virtual_to_actual(t: &Mat2, u: Vec2) -> Result<(f64, f64), GraspError> {
    let det = t.det();
    if det.abs() <= SINGULAR_TOL {
        return Err(GraspError::Singular(det));
    }
    let w = t.solve(u, SINGULAR_TOL).ok_or(GraspError::Singular(det))?;
    Ok((w.x, w.y))
}

/// Whether the carried pair has reached the end of `path`:
/// `‖x_c − 𝒫(1)‖ ≤ r + δ`.
pub fn carried_arrived(frame: &GraspFrame, path: &RefPath, delta: f64) -> bool {
    frame.center_position().distance(path.end()) <= frame.robot_radius + delta
}

/// Result of one carrying step: the reactive decision for the circumscribed
/// center and the actual unicycle command.
#[derive(Debug, Clone, PartialEq)]
pub struct CarryStep {
    pub nav: NavOutput,
    pub scan: Scan,
}

/// Reactive step for the circumscribed center, without mapping the virtual
/// velocity to unicycle inputs.
pub fn carried_virtual_step(
    path: &RefPath,
    robot_scan: &Scan,
    frame: &GraspFrame,
    state: &NavState,
    cfg: &NavConfig,
) -> Result<CarryStep, GraspError> {
    let scan = recenter_scan(robot_scan, frame.heading, frame.object_radius);
    let nav = navigate_step(
        path,
        &scan,
        frame.heading,
        frame.body_radius(),
        state,
        cfg,
        Drive::Holonomic,
    )?;
    Ok(CarryStep { nav, scan })
}

/// One loop iteration of object transport: the scan is re-expressed about
/// the circumscribed center, which follows `path`; its virtual velocity is
/// turned into `(v, ω)` through the center Jacobian.
pub fn navigate_robot_object_step(
    path: &RefPath,
    robot_scan: &Scan,
    frame: &GraspFrame,
    state: &NavState,
    cfg: &NavConfig,
) -> Result<CarryStep, GraspError> {
    let mut step = carried_virtual_step(path, robot_scan, frame, state, cfg)?;
    let (v, omega) = virtual_to_actual(&frame.jacobian_center(), step.nav.velocity)?;
    step.nav.command = Command::Unicycle { v, omega };
    Ok(step)
}

/// Drives the object center straight to `goal`: `u_i = −k (x_i − p*)`
/// through the object Jacobian.
pub fn final_positioning_law(frame: &GraspFrame, goal: Vec2, k: f64) -> (f64, f64) {
    let u = (frame.object_position() - goal) * -k;
    virtual_to_actual(&frame.jacobian_object(), u).expect("object jacobian has det = rho + r > 0")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: Vec2, b: Vec2) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn positions() {
        let f = GraspFrame::new(Vec2::new(1.0, 1.0), FRAC_PI_2, 0.5, 0.25);
        assert!(close(f.object_position(), Vec2::new(1.0, 1.75)));
        let f = GraspFrame::new(Vec2::ZERO, 0.0, 0.5, 0.25);
        assert!(close(f.object_position(), Vec2::new(0.75, 0.0)));
        assert!(close(f.center_position(), Vec2::new(0.5, 0.0)));
        let f = GraspFrame::new(Vec2::new(1.0, 1.0), FRAC_PI_4, 0.5, 0.25);
        let c = 1.0 + 0.75 * FRAC_1_SQRT_2;
        assert!(close(f.object_position(), Vec2::new(c, c)));
        let f = GraspFrame::new(Vec2::ZERO, PI, 0.5, 0.25);
        assert!(close(f.center_position(), Vec2::new(-0.5, 0.0)));
        let f = GraspFrame::new(Vec2::new(2.0, 3.0), 1.0, 0.0, 0.25);
        assert!(close(f.center_position(), Vec2::new(2.0, 3.0)));
    }

    #[test]
    fn jacobians() {
        for psi in [0.0, 0.3, -2.0, 3.1] {
            let f = GraspFrame::new(Vec2::ZERO, psi, 0.5, 0.25);
            assert!((f.jacobian_object().det() - 0.75).abs() < 1e-15);
            assert!((f.jacobian_center().det() - 0.5).abs() < 1e-15);
        }
        let f = GraspFrame::new(Vec2::ZERO, 0.0, 0.5, 0.25);
        assert_eq!(f.jacobian_object(), Mat2::new(1.0, 0.0, 0.0, 0.75));
        let f = GraspFrame::new(Vec2::ZERO, 0.0, 0.0, 0.25);
        assert!(matches!(
            virtual_to_actual(&f.jacobian_center(), Vec2::new(1.0, 0.0)),
            Err(GraspError::Singular(_))
        ));
    }

    #[test]
    fn virtual_to_actual_examples() {
        let t = GraspFrame::new(Vec2::ZERO, 0.0, 0.5, 0.25).jacobian_object();
        assert_eq!(virtual_to_actual(&t, Vec2::new(1.0, 0.0)).unwrap(), (1.0, 0.0));
        let (v, w) = virtual_to_actual(&t, Vec2::new(0.0, 0.75)).unwrap();
        assert!(v.abs() < 1e-15 && (w - 1.0).abs() < 1e-15);
        assert_eq!(virtual_to_actual(&t, Vec2::ZERO).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn final_positioning_examples() {
        let f = GraspFrame::new(Vec2::ZERO, 0.0, 0.5, 0.25);
        assert_eq!(final_positioning_law(&f, f.object_position(), 2.0), (0.0, 0.0));
        let (v, w) = final_positioning_law(&f, Vec2::new(1.75, 0.0), 2.0);
        assert!((v - 2.0).abs() < 1e-12 && w.abs() < 1e-12);
        // Goal to the left of the object: turn left.
        let (_, w) = final_positioning_law(&f, Vec2::new(0.75, 0.5), 2.0);
        assert!(w > 0.0);
    }
}
