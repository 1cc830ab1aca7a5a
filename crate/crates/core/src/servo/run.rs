use std::fmt;

use super::policy::{apply_action, apply_correction, servo_step, Action, ServoParams};
use crate::error::{Error, Result};
use crate::geometry::{Contour, EdgePose, EdgePoseGt, Pose, Vec2};
use crate::nn::Network;
use crate::rng;
use crate::tactile::{
    deform, ContactParams, Mode, SensorModel, ShearState, TactileFrame, TapJitter,
};

/// Source of edge-pose estimates inside the servo loop.
pub trait Perceiver {
    /// Estimate from the sensed frame. `gt` is the true pose, available to
    /// oracle perceivers only.
    fn perceive(&self, frame: Option<&TactileFrame>, gt: &EdgePoseGt) -> Result<EdgePose>;

    /// Whether [`Perceiver::perceive`] reads the frame at all.
    fn needs_frames(&self) -> bool {
        true
    }

    /// Rejects sensors the perceiver cannot interpret.
    fn check_sensor(&self, _sensor: &SensorModel) -> Result<()> {
        Ok(())
    }
}

/// Returns the ground truth; isolates the policy from perception.
#[derive(Clone, Copy, Debug, Default)]
pub struct Oracle;

impl Perceiver for Oracle {
    fn perceive(&self, _frame: Option<&TactileFrame>, gt: &EdgePoseGt) -> Result<EdgePose> {
        Ok(EdgePose::new(gt.r, gt.theta))
    }

    fn needs_frames(&self) -> bool {
        false
    }
}

impl Perceiver for Network {
    fn perceive(&self, frame: Option<&TactileFrame>, _gt: &EdgePoseGt) -> Result<EdgePose> {
        let frame =
            frame.ok_or_else(|| Error::Configuration("network perceiver needs a frame".into()))?;
        self.predict(frame)
    }

    fn check_sensor(&self, sensor: &SensorModel) -> Result<()> {
        let (c, h, w) = self.spec().input;
        if (c, h, w) != (1, sensor.size(), sensor.size()) {
            return Err(Error::Configuration(format!(
                "network expects {c}x{h}x{w} input but the sensor renders 1x{0}x{0}",
                sensor.size()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Returned to the start after going around a closed contour.
    Closed,
    /// Passed the end of an open contour.
    OpenComplete,
    /// Lost the edge.
    Failed,
    MaxSteps,
}

impl Status {
    pub fn is_success(self) -> bool {
        matches!(self, Status::Closed | Status::OpenComplete)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Closed => "closed",
            Status::OpenComplete => "open-complete",
            Status::Failed => "failed",
            Status::MaxSteps => "max-steps",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One control cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Pose at which the frame was sensed.
    pub pose: Pose,
    /// Surface shear when sensing (zero for taps).
    pub shear: Vec2,
    pub pred: EdgePose,
    /// Ground truth at the sensed pose.
    pub gt: EdgePoseGt,
    /// Ground truth after the radial and rotational correction, before the
    /// tangential move.
    pub settled: EdgePoseGt,
    pub action: Action,
    pub in_contact: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub contour: String,
    pub mode: Mode,
    pub params: ServoParams,
    pub records: Vec<StepRecord>,
    pub status: Status,
    /// Pose after the last action.
    pub final_pose: Pose,
    /// Net arc length travelled along the contour, mm.
    pub progress: f64,
    pub contour_length: f64,
    pub expected_steps: usize,
    pub max_steps: usize,
}

impl Trajectory {
    /// Fraction of the contour length covered, for comparing runs.
    pub fn coverage(&self) -> f64 {
        self.progress / self.contour_length
    }
}

/// Everything about a contour run except the contour and the perceiver.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSetup {
    pub mode: Mode,
    pub servo: ServoParams,
    pub contact: ContactParams,
    pub start: Pose,
    /// Defaults to four times the expected number of steps.
    pub max_steps: Option<usize>,
    /// Ground-truth |r| beyond which the edge counts as lost, mm.
    pub lost_edge: f64,
    pub seed: u64,
}

pub const LOST_EDGE_MM: f64 = 20.0;
/// Closure radius in units of the tangential step.
pub const CLOSURE_RADIUS_STEPS: f64 = 1.5;

impl RunSetup {
    pub fn new(mode: Mode, start: Pose) -> Self {
        RunSetup {
            mode,
            servo: ServoParams::default(),
            contact: ContactParams::default(),
            start,
            max_steps: None,
            lost_edge: LOST_EDGE_MM,
            seed: 0,
        }
    }
}

/// Sensor pose at arc length `s` with edge pose `(r, theta)`.
pub fn start_pose(contour: &Contour, s: f64, r: f64, theta: f64) -> Pose {
    contour.pose_at(s, r, theta)
}

/// Arc length 0, unless a closed contour has a corner there, in which case
/// the middle of the first segment.
pub fn default_start_arclength(contour: &Contour) -> f64 {
    let on_corner = contour
        .corners()
        .iter()
        .any(|c| c.arclength.min(contour.length() - c.arclength) < 1e-6);
    match contour.segments().first() {
        Some(first) if on_corner => 0.5 * first.length(),
        _ => 0.0,
    }
}

pub fn expected_steps(contour: &Contour, step: f64) -> usize {
    (contour.length() / step).ceil().max(1.0) as usize
}

const NOISE_STREAM: u64 = 0x7a9;

struct Sensing<'a> {
    contour: &'a Contour,
    sensor: &'a SensorModel,
    setup: &'a RunSetup,
    render: bool,
}

impl Sensing<'_> {
    fn tap(&self, pose: &Pose, step: usize) -> (Option<TactileFrame>, bool) {
        let c = &self.setup.contact;
        if !self.render {
            let touched = (0..c.frames_per_tap)
                .any(|i| self.contact_at(pose, c.tap_depth(i), &ShearState::zero()));
            return (None, touched);
        }
        let mut r = rng::stream(self.setup.seed, &[NOISE_STREAM, step as u64]);
        let tap = self.sensor.render_tap(
            self.contour,
            pose,
            c,
            &ShearState::zero(),
            &TapJitter::NONE,
            &mut r,
        );
        let window = tap.peak_window();
        (Some(window[window.len() / 2].clone()), !tap.no_contact)
    }

    fn slide_frame(
        &self,
        pose: &Pose,
        shear: &ShearState,
        step: usize,
    ) -> (Option<TactileFrame>, bool) {
        let depth = self.setup.contact.slide_depth();
        if !self.render {
            return (None, self.contact_at(pose, depth, shear));
        }
        let mut r = rng::stream(self.setup.seed, &[NOISE_STREAM, step as u64]);
        let (frame, contact) = self.sensor.render(
            self.contour,
            pose,
            depth,
            shear,
            &TapJitter::NONE,
            Some(&mut r),
        );
        (Some(frame), contact)
    }

    fn contact_at(&self, pose: &Pose, depth: f64, shear: &ShearState) -> bool {
        deform(
            &self.sensor.lattice,
            self.contour,
            pose,
            depth,
            shear,
            &TapJitter::NONE,
            &self.sensor.deform,
        )
        .in_contact()
    }

    /// Slides from `from` to `to`. The surface shear advances with the whole
    /// motion; frames are then captured at rest at `to`. They differ only in
    /// pixel noise, so only the last of them is rendered.
    fn slide(
        &self,
        from: &Pose,
        to: &Pose,
        shear: ShearState,
        step: usize,
    ) -> (ShearState, Option<TactileFrame>, bool) {
        let depth = self.setup.contact.slide_depth();
        let surface = to.vector_to_local(-(to.position() - from.position()));
        let shear = shear.update(surface, self.contact_at(to, depth, &shear));
        let n = self.setup.contact.slide_frames;
        let (frame, contact) = self.slide_frame(to, &shear, step * n + n - 1);
        (shear, frame, contact)
    }
}

/// Runs the sense-predict-act loop around `contour` until closure, the end
/// of an open contour, loss of the edge, or the step limit.
pub fn run_contour(
    contour: &Contour,
    perceiver: &dyn Perceiver,
    sensor: &SensorModel,
    setup: &RunSetup,
) -> Result<Trajectory> {
    setup.servo.validate()?;
    setup.contact.validate()?;
    if !setup.start.is_finite() {
        return Err(Error::invalid("start pose must be finite"));
    }
    perceiver.check_sensor(sensor)?;
    let step_len = setup.servo.step;
    let expected = expected_steps(contour, step_len);
    let max_steps = setup.max_steps.unwrap_or(4 * expected);
    let sensing = Sensing {
        contour,
        sensor,
        setup,
        render: perceiver.needs_frames(),
    };
    let mut pose = setup.start;
    // Closure is measured along the contour (net arc progress back to the
    // start), so runs that begin off the edge or settle at a steady radial
    // offset still close.
    let start_gt = contour.edge_pose_gt(&pose);
    let mut shear = ShearState::zero();
    let mut records = Vec::new();
    let mut progress = 0.0;
    let mut last_s = start_gt.arclength;
    let mut status = Status::MaxSteps;

    // Slide mode drops onto the surface once and stays in contact.
    let (mut frame, mut contact) = match setup.mode {
        Mode::Slide => sensing.slide_frame(&pose, &shear, 0),
        Mode::Tap => (None, false),
    };

    for step in 0..max_steps {
        let gt = contour.edge_pose_gt(&pose);
        if gt.r.abs() > setup.lost_edge {
            status = Status::Failed;
            break;
        }
        if setup.mode == Mode::Tap {
            (frame, contact) = sensing.tap(&pose, step);
        }
        let pred = perceiver.perceive(frame.as_ref(), &gt)?;
        let action = servo_step(pred, &setup.servo)?;
        let settled = contour.edge_pose_gt(&apply_correction(&pose, &action, &pred));
        let next = apply_action(&pose, &action, &pred);
        records.push(StepRecord {
            step,
            pose,
            shear: shear.s,
            pred,
            gt,
            settled,
            action,
            in_contact: contact,
        });
        if setup.mode == Mode::Slide {
            (shear, frame, contact) = sensing.slide(&pose, &next, shear, step + 1);
        }
        pose = next;

        let s = contour.edge_pose_gt(&pose).arclength;
        progress += contour.arc_delta(last_s, s);
        last_s = s;
        if contour.is_closed() {
            let enough = records.len() * 2 >= expected;
            if enough && contour.length() - progress < CLOSURE_RADIUS_STEPS * step_len {
                status = Status::Closed;
                break;
            }
        } else if contour.past_end(pose.position()) {
            status = Status::OpenComplete;
            break;
        }
    }
    if status == Status::MaxSteps && contour.edge_pose_gt(&pose).r.abs() > setup.lost_edge {
        status = Status::Failed;
    }
    Ok(Trajectory {
        contour: contour.name().to_string(),
        mode: setup.mode,
        params: setup.servo,
        records,
        status,
        final_pose: pose,
        progress,
        contour_length: contour.length(),
        expected_steps: expected,
        max_steps,
    })
}
