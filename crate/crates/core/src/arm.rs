//! Soft arm model.
//!
//! Three bellows joints joined by rigid links. Each joint bends as a
//! constant-curvature arc with two rotational degrees of freedom `(u, v)`,
//! the components of the tip rotation vector about the joint's local x and y
//! axes. The arm base points up (local z); bending about +y tilts it toward +x
//! (the participant side), so three 30 degree bends leave the end effector
//! vertical and facing forward.

use std::f64::consts::PI;

use nalgebra::{Isometry3, Matrix2, Rotation3, SMatrix, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointBend {
    pub u: f64,
    pub v: f64,
}

impl JointBend {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Total bend angle.
    pub fn angle(&self) -> f64 {
        self.u.hypot(self.v)
    }

    fn axis_vector(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmConfig {
    pub joint_arc_lengths: [f64; 3],
    pub rigid_link_lengths: [f64; 3],
    /// Bending stiffness per joint, N m/rad (same for both bend axes).
    pub joint_stiffness: [f64; 3],
    /// Bending damping per joint, N m s/rad.
    pub joint_damping: [f64; 3],
    /// Homing reference bend, rad.
    pub reference_bend: f64,
    /// Arm mount position in the base frame, m.
    pub mount_offset: Vec2,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self {
            joint_arc_lengths: [0.18, 0.16, 0.14],
            rigid_link_lengths: [0.12, 0.10, 0.08],
            // Placeholder bellows stiffness for a ~200 kPa supply; no measured value exists.
            joint_stiffness: [30.0, 30.0, 30.0],
            joint_damping: [3.0, 3.0, 3.0],
            reference_bend: PI / 6.0,
            mount_offset: Vec2::new(0.25, 0.0),
        }
    }
}

impl ArmConfig {
    pub fn validate(&self) -> Result<()> {
        let lengths = self
            .joint_arc_lengths
            .iter()
            .chain(&self.rigid_link_lengths);
        if lengths.clone().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Configuration(
                "all segment lengths must be positive".into(),
            ));
        }
        if self
            .joint_stiffness
            .iter()
            .any(|k| !(*k > 0.0 && k.is_finite()))
        {
            return Err(Error::Configuration(
                "joint stiffness must be positive".into(),
            ));
        }
        if self
            .joint_damping
            .iter()
            .any(|c| !(*c >= 0.0 && c.is_finite()))
        {
            return Err(Error::Configuration(
                "joint damping must be non-negative".into(),
            ));
        }
        if !(self.reference_bend.abs() < PI / 3.0) {
            // Three equal bends must stay below pi in total for a sane home pose.
            return Err(Error::Configuration("reference bend out of range".into()));
        }
        if !self.mount_offset.is_finite() {
            return Err(Error::Configuration("mount offset must be finite".into()));
        }
        Ok(())
    }

    /// Bends of the homed arm: every joint at the reference angle in the sagittal plane.
    pub fn home_bends(&self) -> [JointBend; 3] {
        [JointBend::new(0.0, self.reference_bend); 3]
    }
}

/// Rigid transform of a single constant-curvature segment of arc length `arc_length`.
pub fn fk_segment(bend: JointBend, arc_length: f64) -> Result<Isometry3<f64>> {
    let theta = bend.angle();
    if !(theta < PI) {
        return Err(Error::Configuration(format!(
            "bend angle {theta} rad must be below pi"
        )));
    }
    let w = bend.axis_vector();
    // p = L [ sin(t)/t e_z + (1 - cos t)/t^2 (w x e_z) ]
    let (sinc, cosc) = if theta < SERIES_THRESHOLD {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    let ez = Vector3::z();
    let p = (ez * sinc + w.cross(&ez) * cosc) * arc_length;
    let rot = UnitQuaternion::from_scaled_axis(w);
    Ok(Isometry3::from_parts(Translation3::from(p), rot))
}

/// Frames at the end of each joint+link stage; the last one is the end effector.
pub fn fk_chain_frames(bends: &[JointBend; 3], config: &ArmConfig) -> Result<[Isometry3<f64>; 3]> {
    let mut frame = Isometry3::identity();
    let mut out = [Isometry3::identity(); 3];
    for (i, bend) in bends.iter().enumerate() {
        frame *= fk_segment(*bend, config.joint_arc_lengths[i])?;
        frame *= Translation3::new(0.0, 0.0, config.rigid_link_lengths[i]);
        out[i] = frame;
    }
    Ok(out)
}

/// End-effector pose relative to the arm mount.
pub fn fk_chain(bends: &[JointBend; 3], config: &ArmConfig) -> Result<Isometry3<f64>> {
    Ok(fk_chain_frames(bends, config)?[2])
}

/// Rotation vector of `r` via an atan2 formulation that stays accurate at small angles.
pub fn rotation_log(r: &Rotation3<f64>) -> Vector3<f64> {
    let m = r.matrix();
    let s = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    ) * 0.5;
    let sin_t = s.norm();
    let cos_t = (m.trace() - 1.0) * 0.5;
    let theta = sin_t.atan2(cos_t);
    if sin_t < 1e-300 {
        return Vector3::zeros();
    }
    s * (theta / sin_t)
}

/// Recovers joint bends from the world orientations at the end of each joint.
///
/// Rigid links do not rotate, so the relative rotation across joint `i` is
/// exactly the rotation of its arc, whose rotation vector is `(u, v, 0)`.
pub fn estimate_bends_from_orientations(
    orientations: &[Rotation3<f64>; 3],
) -> Result<[JointBend; 3]> {
    let mut prev = Rotation3::identity();
    let mut out = [JointBend::default(); 3];
    for (i, r) in orientations.iter().enumerate() {
        let rel = prev.inverse() * r;
        let cos_t = (rel.matrix().trace() - 1.0) * 0.5;
        // Half-turn (cos = -1) has no unique axis sign.
        if cos_t <= -1.0 + 1e-12 {
            return Err(Error::Ambiguity { angle: rel.angle() });
        }
        let w = rotation_log(&rel);
        out[i] = JointBend::new(w.x, w.y);
        prev = *r;
    }
    Ok(out)
}

pub fn segment_orientations(frames: &[Isometry3<f64>; 3]) -> [Rotation3<f64>; 3] {
    frames.map(|f| f.rotation.to_rotation_matrix())
}

// ---------------------------------------------------------------------------
// Joint homing

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MracParams {
    /// Reference model natural frequency, rad/s (critically damped).
    pub natural_frequency: f64,
    /// Gradient adaptation rate.
    pub adaptation_rate: f64,
    /// Rate weight in the filtered tracking error `e + lead * de/dt`, s.
    pub error_lead: f64,
    /// Joint stiffness used for feedforward `k * reference`, N m/rad.
    pub feedforward_stiffness: f64,
}

impl Default for MracParams {
    fn default() -> Self {
        Self {
            natural_frequency: 2.0,
            adaptation_rate: 400.0,
            error_lead: 0.3,
            feedforward_stiffness: 30.0,
        }
    }
}

/// Adaptive state for one joint axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MracState {
    pub adaptive_gain: f64,
    pub model_angle: f64,
    pub model_rate: f64,
    pub frozen: bool,
}

impl MracState {
    /// Starts the reference model at the measured angle with zero gain.
    pub fn new(initial_angle: f64) -> Self {
        Self {
            adaptive_gain: 0.0,
            model_angle: initial_angle,
            model_rate: 0.0,
            frozen: false,
        }
    }
}

/// One homing update for a single joint axis.
///
/// `measured` is `(angle, rate)`. Returns the joint torque command and the
/// advanced state. The gain follows a gradient law on the filtered tracking
/// error (it can only grow while error persists) and is held once frozen.
pub fn mrac_step(
    measured: (f64, f64),
    state: &MracState,
    reference: f64,
    params: &MracParams,
    dt: f64,
) -> (f64, MracState) {
    let (angle, rate) = measured;
    let wn = params.natural_frequency;
    let mut next = *state;

    let e = state.model_angle - angle;
    let de = state.model_rate - rate;
    let filtered = e + params.error_lead * de;

    let torque = params.feedforward_stiffness * reference + state.adaptive_gain * filtered;

    if !state.frozen {
        next.adaptive_gain += params.adaptation_rate * filtered * filtered * dt;
    }

    let model_acc = wn * wn * (reference - state.model_angle) - 2.0 * wn * state.model_rate;
    next.model_rate += model_acc * dt;
    next.model_angle += next.model_rate * dt;

    (torque, next)
}

pub fn freeze_gain(state: &MracState) -> MracState {
    MracState {
        frozen: true,
        ..*state
    }
}

/// Rotational inertia-damper-spring model of one bend axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPlant {
    pub inertia: f64,
    pub damping: f64,
    pub stiffness: f64,
    /// External torque, e.g. from carrying the object.
    pub load_torque: f64,
    pub angle: f64,
    pub rate: f64,
}

impl JointPlant {
    pub fn new(inertia: f64, damping: f64, stiffness: f64) -> Self {
        Self {
            inertia,
            damping,
            stiffness,
            load_torque: 0.0,
            angle: 0.0,
            rate: 0.0,
        }
    }

    pub fn step(&mut self, torque: f64, dt: f64) {
        let acc =
            (torque + self.load_torque - self.damping * self.rate - self.stiffness * self.angle)
                / self.inertia;
        self.rate += acc * dt;
        self.angle += self.rate * dt;
    }
}

/// Outcome of homing all six bend axes.
#[derive(Debug, Clone, PartialEq)]
pub struct HomingResult {
    pub bends: [JointBend; 3],
    pub states: [MracState; 6],
    /// Time at which every axis first stayed within tolerance, s.
    pub settle_time: Option<f64>,
}

/// Drives all six axes of an unloaded arm from `start` to the home pose, then freezes the gains.
pub fn home_arm(
    config: &ArmConfig,
    start: [JointBend; 3],
    params: &MracParams,
    plant_inertia: f64,
    dt: f64,
    duration: f64,
    tolerance: f64,
) -> HomingResult {
    let targets = config.home_bends();
    let mut plants: Vec<JointPlant> = Vec::with_capacity(6);
    let mut refs = [0.0; 6];
    for j in 0..3 {
        for (k, (a0, r)) in [(start[j].u, targets[j].u), (start[j].v, targets[j].v)]
            .into_iter()
            .enumerate()
        {
            let mut p = JointPlant::new(
                plant_inertia,
                config.joint_damping[j],
                config.joint_stiffness[j],
            );
            p.angle = a0;
            plants.push(p);
            refs[2 * j + k] = r;
        }
    }
    let mut states: [MracState; 6] = std::array::from_fn(|i| MracState::new(plants[i].angle));
    let axis_params: [MracParams; 6] = std::array::from_fn(|i| MracParams {
        feedforward_stiffness: config.joint_stiffness[i / 2],
        ..*params
    });
    let steps = (duration / dt).round() as usize;
    let mut settle_time = None;
    for n in 1..=steps {
        for i in 0..6 {
            let (tau, s) = mrac_step(
                (plants[i].angle, plants[i].rate),
                &states[i],
                refs[i],
                &axis_params[i],
                dt,
            );
            plants[i].step(tau, dt);
            states[i] = s;
        }
        let within = (0..6).all(|i| (plants[i].angle - refs[i]).abs() <= tolerance);
        match (within, settle_time) {
            (true, None) => settle_time = Some(n as f64 * dt),
            (false, Some(_)) => settle_time = None,
            _ => {}
        }
    }
    let states = states.map(|s| freeze_gain(&s));
    let bends =
        std::array::from_fn(|j| JointBend::new(plants[2 * j].angle, plants[2 * j + 1].angle));
    HomingResult {
        bends,
        states,
        settle_time,
    }
}

// ---------------------------------------------------------------------------
// Planar endpoint reduction

/// Passive planar impedance of the arm tip about its neutral point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointSpring {
    /// Per-axis stiffness, N/m.
    pub stiffness: Vec2,
    /// Per-axis damping, N s/m.
    pub damping: Vec2,
    /// Neutral tip position in the base frame.
    pub neutral_point: Vec2,
}

impl EndpointSpring {
    pub fn isotropic(stiffness: f64, damping: f64, neutral_point: Vec2) -> Self {
        Self {
            stiffness: Vec2::new(stiffness, stiffness),
            damping: Vec2::new(damping, damping),
            neutral_point,
        }
    }
}

pub fn restoring_force(spring: &EndpointSpring, p: Vec2, v: Vec2) -> Vec2 {
    let d = p - spring.neutral_point;
    Vec2::new(
        -spring.stiffness.x * d.x - spring.damping.x * v.x,
        -spring.stiffness.y * d.y - spring.damping.y * v.y,
    )
}

pub type PlanarJacobian = SMatrix<f64, 2, 6>;

fn bends_to_array(b: &[JointBend; 3]) -> [f64; 6] {
    [b[0].u, b[0].v, b[1].u, b[1].v, b[2].u, b[2].v]
}

fn array_to_bends(a: &[f64; 6]) -> [JointBend; 3] {
    [
        JointBend::new(a[0], a[1]),
        JointBend::new(a[2], a[3]),
        JointBend::new(a[4], a[5]),
    ]
}

/// Horizontal tip sensitivity to the six bend coordinates (central differences).
pub fn planar_jacobian(bends: &[JointBend; 3], config: &ArmConfig) -> Result<PlanarJacobian> {
    let h = 1e-6;
    let q = bends_to_array(bends);
    let mut jac = PlanarJacobian::zeros();
    for i in 0..6 {
        let mut plus = q;
        let mut minus = q;
        plus[i] += h;
        minus[i] -= h;
        let tp = fk_chain(&array_to_bends(&plus), config)?.translation.vector;
        let tm = fk_chain(&array_to_bends(&minus), config)?
            .translation
            .vector;
        let d = (tp - tm) / (2.0 * h);
        jac[(0, i)] = d.x;
        jac[(1, i)] = d.y;
    }
    Ok(jac)
}

/// Planar stiffness matrix `(J K^-1 J^T)^-1` for per-coordinate joint stiffness `k`.
/// Vertical tip motion is left unconstrained.
pub fn planar_stiffness_matrix(jac: &PlanarJacobian, joint_k: &[f64; 6]) -> Result<Matrix2<f64>> {
    let mut compliance = Matrix2::zeros();
    for (i, k) in joint_k.iter().enumerate() {
        let c = jac.column(i);
        compliance += c * c.transpose() / *k;
    }
    let scale = compliance.abs().max();
    if !(scale > 0.0) || compliance.determinant().abs() <= 1e-12 * scale * scale {
        return Err(Error::Reduction(
            "planar tip sensitivity is singular".into(),
        ));
    }
    compliance
        .try_inverse()
        .ok_or_else(|| Error::Reduction("compliance matrix not invertible".into()))
}

fn per_coordinate(values: &[f64; 3]) -> [f64; 6] {
    [
        values[0], values[0], values[1], values[1], values[2], values[2],
    ]
}

/// Reduces the arm at `homed` to an isotropic planar spring at its tip.
///
/// The neutral point is the horizontal projection of the tip, offset by the mount.
pub fn endpoint_spring_from_config(
    config: &ArmConfig,
    homed: &[JointBend; 3],
) -> Result<EndpointSpring> {
    config.validate()?;
    let jac = planar_jacobian(homed, config)?;
    let k = planar_stiffness_matrix(&jac, &per_coordinate(&config.joint_stiffness))?;
    let stiffness = 0.5 * (k[(0, 0)] + k[(1, 1)]);
    let damping = if config.joint_damping.iter().all(|c| *c > 0.0) {
        let c = planar_stiffness_matrix(&jac, &per_coordinate(&config.joint_damping))?;
        0.5 * (c[(0, 0)] + c[(1, 1)])
    } else {
        0.0
    };
    if !(stiffness > 0.0 && stiffness.is_finite()) {
        return Err(Error::Reduction(format!(
            "non-positive stiffness {stiffness}"
        )));
    }
    let tip = fk_chain(homed, config)?.translation.vector;
    Ok(EndpointSpring::isotropic(
        stiffness,
        damping,
        config.mount_offset + Vec2::new(tip.x, tip.y),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn straight_segment() {
        let t = fk_segment(JointBend::default(), 0.3).unwrap();
        assert_abs_diff_eq!(
            t.translation.vector,
            Vector3::new(0.0, 0.0, 0.3),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(t.rotation.angle(), 0.0);
    }

    #[test]
    fn quarter_circle_segment() {
        let t = fk_segment(JointBend::new(0.0, FRAC_PI_2), 1.0).unwrap();
        let r = 2.0 / PI;
        assert_abs_diff_eq!(
            t.translation.vector,
            Vector3::new(r, 0.0, r),
            epsilon = 1e-12
        );
        // tip tangent now points along +x
        let tangent = t.rotation * Vector3::z();
        assert_abs_diff_eq!(tangent, Vector3::x(), epsilon = 1e-12);
    }

    #[test]
    fn half_turn_rejected() {
        assert!(fk_segment(JointBend::new(PI, 0.0), 0.2).is_err());
        assert!(fk_segment(JointBend::new(0.0, -3.2), 0.2).is_err());
    }

    #[test]
    fn series_branch_is_continuous() {
        // Either side of the series threshold, and against the closed form.
        for dir in [0.0, 0.7, 2.1] {
            let theta: f64 = SERIES_THRESHOLD * (1.0 + 1e-9);
            let b = JointBend::new(theta * f64::cos(dir), theta * f64::sin(dir));
            let below = JointBend::new(b.u * (1.0 - 2e-9), b.v * (1.0 - 2e-9));
            let t = fk_segment(b, 0.25).unwrap().translation.vector;
            let t_below = fk_segment(below, 0.25).unwrap().translation.vector;
            assert!((t - t_below).norm() < 1e-9);
            let w = b.axis_vector();
            let closed = (Vector3::z() * theta.sin() / theta
                + w.cross(&Vector3::z()) * (1.0 - theta.cos()) / (theta * theta))
                * 0.25;
            assert!((t - closed).norm() < 1e-9);
        }
    }

    #[test]
    fn straight_chain_sums_lengths() {
        let cfg = ArmConfig::default();
        let tip = fk_chain(&[JointBend::default(); 3], &cfg).unwrap();
        let total: f64 = cfg
            .joint_arc_lengths
            .iter()
            .chain(&cfg.rigid_link_lengths)
            .sum();
        assert_abs_diff_eq!(
            tip.translation.vector,
            Vector3::new(0.0, 0.0, total),
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_joint_reduces_to_segment() {
        let cfg = ArmConfig::default();
        let b = JointBend::new(0.2, -0.4);
        let tip = fk_chain(&[JointBend::default(), b, JointBend::default()], &cfg).unwrap();
        let l = &cfg;
        let expected =
            Translation3::new(0.0, 0.0, l.joint_arc_lengths[0] + l.rigid_link_lengths[0])
                * fk_segment(b, l.joint_arc_lengths[1]).unwrap()
                * Translation3::new(
                    0.0,
                    0.0,
                    l.rigid_link_lengths[1] + l.joint_arc_lengths[2] + l.rigid_link_lengths[2],
                );
        assert_abs_diff_eq!(
            tip.translation.vector,
            expected.translation.vector,
            epsilon = 1e-12
        );
    }

    #[test]
    fn home_pose_faces_forward() {
        let cfg = ArmConfig::default();
        let tip = fk_chain(&cfg.home_bends(), &cfg).unwrap();
        let tangent = tip.rotation * Vector3::z();
        assert_abs_diff_eq!(tangent, Vector3::x(), epsilon = 1e-12);
    }

    #[test]
    fn identity_orientations_give_zero_bends() {
        let b = estimate_bends_from_orientations(&[Rotation3::identity(); 3]).unwrap();
        assert_eq!(b, [JointBend::default(); 3]);
    }

    #[test]
    fn half_turn_relative_rotation_is_ambiguous() {
        let half = Rotation3::from_axis_angle(&Vector3::x_axis(), PI);
        let err = estimate_bends_from_orientations(&[half, half, half]).unwrap_err();
        assert!(matches!(err, Error::Ambiguity { .. }));
    }

    #[test]
    fn mrac_zero_error_fixed_point() {
        let p = MracParams::default();
        let r = PI / 6.0;
        let s = MracState {
            adaptive_gain: 3.0,
            model_angle: r,
            model_rate: 0.0,
            frozen: false,
        };
        let (tau, next) = mrac_step((r, 0.0), &s, r, &p, 0.001);
        assert_abs_diff_eq!(tau, p.feedforward_stiffness * r);
        assert_eq!(next.adaptive_gain, 3.0);
    }

    #[test]
    fn frozen_gain_is_constant() {
        let p = MracParams::default();
        let s = freeze_gain(&MracState {
            adaptive_gain: 2.5,
            model_angle: 0.3,
            model_rate: 0.1,
            frozen: false,
        });
        assert_eq!(freeze_gain(&s), s);
        let (_, next) = mrac_step((0.0, 0.0), &s, 0.5, &p, 0.01);
        assert_eq!(next.adaptive_gain, 2.5);
        assert!(next.frozen);
    }

    #[test]
    fn frozen_without_feedforward_is_fixed_gain_pd() {
        let p = MracParams {
            feedforward_stiffness: 0.0,
            ..MracParams::default()
        };
        let s = freeze_gain(&MracState {
            adaptive_gain: 7.0,
            model_angle: 0.4,
            model_rate: -0.2,
            frozen: false,
        });
        for (a, r) in [(0.1, 0.0), (0.5, 0.3), (-0.2, 1.0)] {
            let (tau, _) = mrac_step((a, r), &s, 0.5, &p, 0.01);
            let pd = 7.0 * ((0.4 - a) + p.error_lead * (-0.2 - r));
            assert_abs_diff_eq!(tau, pd, epsilon = 1e-12);
        }
    }

    #[test]
    fn restoring_force_examples() {
        let s = EndpointSpring::isotropic(100.0, 5.0, Vec2::new(0.4, 0.0));
        assert_eq!(
            restoring_force(&s, Vec2::new(0.4, 0.0), Vec2::ZERO),
            Vec2::ZERO
        );
        let f = restoring_force(&s, Vec2::new(0.5, 0.0), Vec2::ZERO);
        assert_abs_diff_eq!(f.x, -10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.y, 0.0);
        let g = restoring_force(&s, Vec2::new(0.3, 0.0), Vec2::ZERO);
        assert_abs_diff_eq!(g.x, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_sensitivity_is_singular() {
        let err = planar_stiffness_matrix(&PlanarJacobian::zeros(), &[1.0; 6]).unwrap_err();
        assert!(matches!(err, Error::Reduction(_)));
    }

    #[test]
    fn default_spring_is_positive_and_linear_in_stiffness() {
        let cfg = ArmConfig::default();
        let s = endpoint_spring_from_config(&cfg, &cfg.home_bends()).unwrap();
        assert!(s.stiffness.x > 0.0 && s.stiffness.x.is_finite());
        let stiff = ArmConfig {
            joint_stiffness: cfg.joint_stiffness.map(|k| 2.0 * k),
            ..cfg
        };
        let s2 = endpoint_spring_from_config(&stiff, &cfg.home_bends()).unwrap();
        assert_abs_diff_eq!(s2.stiffness.x / s.stiffness.x, 2.0, epsilon = 1e-9);
    }
}
