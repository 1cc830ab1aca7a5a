use super::run::{Status, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{wrap_deg, EdgePoseGt};

/// Mean absolute servo errors over the in-contact steps of a trajectory.
///
/// `mae_r` / `mae_theta` measure the pose the controller settles to each
/// cycle (after the radial and rotational correction); `sensed_mae_*`
/// measure the pose at which each frame was taken, which also includes the
/// drift of the tangential move away from a curved edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub mae_r: f64,
    pub mae_theta: f64,
    pub sensed_mae_r: f64,
    pub sensed_mae_theta: f64,
    pub status: Status,
    pub steps: usize,
    pub contact_steps: usize,
}

fn mae<'a>(gts: impl Iterator<Item = &'a EdgePoseGt>, r0: f64, theta0: f64) -> (f64, f64) {
    let (mut er, mut et, mut n) = (0.0, 0.0, 0usize);
    for g in gts {
        er += (g.r - r0).abs();
        et += wrap_deg(g.theta - theta0).abs();
        n += 1;
    }
    (er / n as f64, et / n as f64)
}

pub fn trajectory_metrics(traj: &Trajectory) -> Result<Metrics> {
    let contact: Vec<_> = traj.records.iter().filter(|r| r.in_contact).collect();
    if contact.is_empty() {
        return Err(Error::invalid("trajectory has no in-contact steps"));
    }
    let (r0, t0) = (traj.params.r0, traj.params.theta0);
    let (mae_r, mae_theta) = mae(contact.iter().map(|r| &r.settled), r0, t0);
    let (sensed_mae_r, sensed_mae_theta) = mae(contact.iter().map(|r| &r.gt), r0, t0);
    Ok(Metrics {
        mae_r,
        mae_theta,
        sensed_mae_r,
        sensed_mae_theta,
        status: traj.status,
        steps: traj.records.len(),
        contact_steps: contact.len(),
    })
}
