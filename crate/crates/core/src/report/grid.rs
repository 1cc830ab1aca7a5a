use std::fmt;

use crate::geometry::Contour;
use crate::servo::{start_pose, Metrics, RunSetup};
use crate::tactile::Mode;

/// One parameter change from the default disk run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variation {
    /// Initial radial offset, mm.
    StartR(f64),
    /// Tangential step, mm.
    Step(f64),
    /// Radial set-point, mm.
    SetPoint(f64),
    /// Contact depth change, mm (positive = deeper).
    Depth(f64),
}

impl Variation {
    pub fn experiment(&self) -> &'static str {
        match self {
            Variation::StartR(_) => "initial contact",
            Variation::Step(_) => "step size",
            Variation::SetPoint(_) => "contact radius",
            Variation::Depth(_) => "contact depth",
        }
    }

    /// Applies the change to a default setup for `contour`, starting at arc
    /// length `s`.
    pub fn apply(&self, setup: &mut RunSetup, contour: &Contour, s: f64) {
        match *self {
            Variation::StartR(r) => setup.start = start_pose(contour, s, r, 0.0),
            Variation::Step(e) => setup.servo.step = e,
            Variation::SetPoint(r0) => {
                setup.servo.r0 = r0;
                setup.start = start_pose(contour, s, r0, 0.0);
            }
            Variation::Depth(d) => setup.contact.depth_offset = d,
        }
    }
}

impl fmt::Display for Variation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variation::StartR(v) => write!(f, "r_init={v} mm"),
            Variation::Step(v) => write!(f, "de={v} mm"),
            Variation::SetPoint(v) => write!(f, "r0={v:+} mm"),
            Variation::Depth(v) => write!(f, "depth={v:+} mm"),
        }
    }
}

/// The disk robustness grid for one contact mode.
pub fn table1_grid(mode: Mode) -> Vec<Variation> {
    use Variation::*;
    match mode {
        Mode::Tap => vec![
            StartR(-6.0),
            StartR(0.0),
            StartR(9.0),
            Step(6.0),
            Step(9.0),
            SetPoint(-2.0),
            SetPoint(6.0),
            Depth(-1.5),
            Depth(2.5),
        ],
        Mode::Slide => vec![
            StartR(-6.0),
            StartR(0.0),
            StartR(9.0),
            Step(6.0),
            Step(9.0),
            SetPoint(-3.0),
            SetPoint(2.0),
            Depth(-1.0),
            Depth(3.0),
        ],
    }
}

/// `"<r> mm, <theta> deg"` with whole numbers, or `"fail"` when the run did
/// not complete.
pub fn metrics_cell(m: Option<&Metrics>) -> String {
    match m {
        Some(m) if m.status.is_success() => format!("{:.0} mm, {:.0} deg", m.mae_r, m.mae_theta),
        _ => "fail".to_string(),
    }
}

/// One grid line: the oracle policy and, when a model was supplied, the
/// network policy.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub mode: Mode,
    pub variation: Variation,
    pub oracle: Option<Metrics>,
    pub network: Option<Option<Metrics>>,
}

fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::Tap => "tapping contact",
        Mode::Slide => "sliding contact",
    }
}

/// Fixed-width text table, one row per grid cell:
/// experiment, variation, then one column per policy.
pub fn table1_text(rows: &[GridRow]) -> String {
    let with_net = rows.iter().any(|r| r.network.is_some());
    let mut out = format!("{:<34} {:<16} {:<18}", "experiment", "variation", "oracle");
    if with_net {
        out.push_str(&format!(" {:<18}", "deep CNN"));
    }
    out = out.trim_end().to_string();
    out.push('\n');
    let mut last = None;
    for r in rows {
        let exp = format!("{} ({})", mode_label(r.mode), r.variation.experiment());
        let shown = if last.as_ref() == Some(&exp) {
            String::new()
        } else {
            exp.clone()
        };
        last = Some(exp);
        let mut line = format!(
            "{:<34} {:<16} {:<18}",
            shown,
            r.variation.to_string(),
            metrics_cell(r.oracle.as_ref())
        );
        if let Some(net) = &r.network {
            line.push_str(&format!(" {:<18}", metrics_cell(net.as_ref())));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn csv_fields(m: Option<&Metrics>) -> String {
    match m {
        Some(m) => format!("{},{:.4},{:.4},{}", m.status, m.mae_r, m.mae_theta, m.steps),
        None => "fail,,,".to_string(),
    }
}

/// Machine-readable twin of [`table1_text`].
pub fn table1_csv(rows: &[GridRow]) -> String {
    let mut out = String::from(
        "mode,experiment,variation,oracle_status,oracle_mae_r_mm,oracle_mae_theta_deg,oracle_steps,\
         cnn_status,cnn_mae_r_mm,cnn_mae_theta_deg,cnn_steps\n",
    );
    for r in rows {
        let net = match &r.network {
            Some(m) => csv_fields(m.as_ref()),
            None => ",,,".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.mode,
            r.variation.experiment(),
            r.variation,
            csv_fields(r.oracle.as_ref()),
            net
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::servo::Status;

    fn metrics(status: Status, r: f64, t: f64) -> Metrics {
        Metrics {
            mae_r: r,
            mae_theta: t,
            sensed_mae_r: r,
            sensed_mae_theta: t,
            status,
            steps: 110,
            contact_steps: 110,
        }
    }

    #[test]
    fn cell_format() {
        assert_eq!(
            metrics_cell(Some(&metrics(Status::Closed, 0.6, 5.6))),
            "1 mm, 6 deg"
        );
        assert_eq!(
            metrics_cell(Some(&metrics(Status::Failed, 0.6, 5.6))),
            "fail"
        );
        assert_eq!(metrics_cell(None), "fail");
    }

    #[test]
    fn grid_labels() {
        let labels: Vec<String> = table1_grid(Mode::Tap)
            .iter()
            .map(|v| v.to_string())
            .collect();
        assert_eq!(
            labels,
            [
                "r_init=-6 mm",
                "r_init=0 mm",
                "r_init=9 mm",
                "de=6 mm",
                "de=9 mm",
                "r0=-2 mm",
                "r0=+6 mm",
                "depth=-1.5 mm",
                "depth=+2.5 mm"
            ]
        );
        assert_eq!(table1_grid(Mode::Slide).len(), 9);
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let rows: Vec<GridRow> = table1_grid(Mode::Slide)
            .into_iter()
            .map(|v| GridRow {
                mode: Mode::Slide,
                variation: v,
                oracle: Some(metrics(Status::Closed, 0.1, 0.2)),
                network: Some(None),
            })
            .collect();
        let csv = table1_csv(&rows);
        assert_eq!(csv.lines().count(), 10);
        let cols = csv.lines().next().unwrap().split(',').count();
        assert!(csv.lines().all(|l| l.split(',').count() == cols));
        assert!(table1_text(&rows).contains("sliding contact (step size)"));
    }
}
