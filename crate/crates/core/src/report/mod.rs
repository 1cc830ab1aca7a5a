//! Text outputs: trajectory CSV (and its reader), SVG plots, the disk
//! parameter grid and perception evaluation summaries.

mod eval;
mod grid;
mod svg;

pub use eval::{
    eval_csv, eval_summary, evaluate_predictions, predictions_csv, ErrorBin, EvalReport,
    CENTRAL_HALF_WIDTH,
};
pub use grid::{metrics_cell, table1_csv, table1_grid, table1_text, GridRow, Variation};
pub use svg::{path_from_trajectory, trajectory_svg, PathPoint, PX_PER_MM, TICK_EVERY};

use crate::error::{Error, Result};
use crate::servo::Trajectory;

pub const TRAJECTORY_COLUMNS: [&str; 15] = [
    "step",
    "x_mm",
    "y_mm",
    "heading_deg",
    "pred_r_mm",
    "pred_theta_deg",
    "gt_r_mm",
    "gt_theta_deg",
    "dr_mm",
    "dtheta_deg",
    "de_mm",
    "in_contact",
    "status",
    "settled_r_mm",
    "settled_theta_deg",
];

/// One row per control step. `status` is the run's final status on every
/// row.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    for r in &traj.records {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{:.6},{:.6}\n",
            r.step,
            r.pose.x,
            r.pose.y,
            r.pose.heading_deg,
            r.pred.r,
            r.pred.theta,
            r.gt.r,
            r.gt.theta,
            r.action.dr,
            r.action.dtheta,
            r.action.de,
            u8::from(r.in_contact),
            traj.status,
            r.settled.r,
            r.settled.theta,
        ));
    }
    out
}

/// Reads the sensor path (position and heading per step) back from a
/// trajectory CSV.
pub fn parse_trajectory_path(text: &str) -> Result<Vec<PathPoint>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty trajectory file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column {name}"),
            })
    };
    let (ix, iy, ih) = (find("x_mm")?, find("y_mm")?, find("heading_deg")?);
    let mut path = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |k: usize| -> Result<f64> {
            fields
                .get(k)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: format!("bad value in column {}", cols[k]),
                })
        };
        path.push(PathPoint {
            x: get(ix)?,
            y: get(iy)?,
            heading_deg: get(ih)?,
        });
    }
    Ok(path)
}
