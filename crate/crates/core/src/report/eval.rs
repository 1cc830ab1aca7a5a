use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::{wrap_deg, EdgePose};
use crate::nn::LabelRanges;

/// Half-width of the central radial region, mm.
pub const CENTRAL_HALF_WIDTH: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mae_r: f64,
    pub mae_theta: f64,
}

/// Perception errors over a labelled test set.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub count: usize,
    pub mae_r: f64,
    pub mae_theta: f64,
    pub central_count: usize,
    pub central_mae_r: f64,
    pub central_mae_theta: f64,
    /// Errors binned by the true radial position.
    pub bins: Vec<ErrorBin>,
}

#[derive(Default)]
struct Acc {
    n: usize,
    r: f64,
    t: f64,
}

impl Acc {
    fn add(&mut self, er: f64, et: f64) {
        self.n += 1;
        self.r += er;
        self.t += et;
    }

    fn mean(&self) -> (f64, f64) {
        if self.n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            (self.r / self.n as f64, self.t / self.n as f64)
        }
    }
}

pub fn evaluate_predictions(
    labels: &[EdgePose],
    preds: &[EdgePose],
    ranges: &LabelRanges,
    bin_width: f64,
) -> Result<EvalReport> {
    if labels.len() != preds.len() {
        return Err(Error::shape(format!(
            "{} labels but {} predictions",
            labels.len(),
            preds.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("no samples to evaluate"));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let (lo, hi) = ranges.r;
    let nbins = ((hi - lo) / bin_width - 1e-9).ceil().max(1.0) as usize;
    let mut bins: Vec<Acc> = (0..nbins).map(|_| Acc::default()).collect();
    let (mut all, mut central) = (Acc::default(), Acc::default());
    for (l, p) in labels.iter().zip(preds) {
        let er = (p.r - l.r).abs();
        let et = wrap_deg(p.theta - l.theta).abs();
        all.add(er, et);
        if l.r.abs() <= CENTRAL_HALF_WIDTH {
            central.add(er, et);
        }
        let k = (((l.r - lo) / bin_width).floor().max(0.0) as usize).min(nbins - 1);
        bins[k].add(er, et);
    }
    let (mae_r, mae_theta) = all.mean();
    let (central_mae_r, central_mae_theta) = central.mean();
    let bins = bins
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let (mae_r, mae_theta) = a.mean();
            ErrorBin {
                lo: lo + k as f64 * bin_width,
                hi: (lo + (k + 1) as f64 * bin_width).min(hi),
                count: a.n,
                mae_r,
                mae_theta,
            }
        })
        .collect();
    Ok(EvalReport {
        count: all.n,
        mae_r,
        mae_theta,
        central_count: central.n,
        central_mae_r,
        central_mae_theta,
        bins,
    })
}

pub fn predictions_csv(labels: &[EdgePose], preds: &[EdgePose]) -> String {
    let mut out = String::from(
        "index,label_r_mm,label_theta_deg,pred_r_mm,pred_theta_deg,err_r_mm,err_theta_deg\n",
    );
    for (i, (l, p)) in labels.iter().zip(preds).enumerate() {
        let _ = writeln!(
            out,
            "{i},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            l.r,
            l.theta,
            p.r,
            p.theta,
            p.r - l.r,
            wrap_deg(p.theta - l.theta)
        );
    }
    out
}

/// Human-readable summary with the binned error table.
pub fn eval_summary(report: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "samples {}: MAE {:.3} mm, {:.2} deg",
        report.count, report.mae_r, report.mae_theta
    );
    let _ = writeln!(
        s,
        "central |r| <= {CENTRAL_HALF_WIDTH} mm ({} samples): MAE {:.3} mm, {:.2} deg",
        report.central_count, report.central_mae_r, report.central_mae_theta
    );
    let _ = writeln!(
        s,
        "\n{:>8} {:>8} {:>6} {:>10} {:>10}",
        "r_lo", "r_hi", "n", "mae_r", "mae_theta"
    );
    for b in &report.bins {
        let _ = writeln!(
            s,
            "{:>8.2} {:>8.2} {:>6} {:>10.3} {:>10.2}",
            b.lo, b.hi, b.count, b.mae_r, b.mae_theta
        );
    }
    s
}

/// Binned table as CSV.
pub fn eval_csv(report: &EvalReport) -> String {
    let mut s = String::from("r_lo_mm,r_hi_mm,count,mae_r_mm,mae_theta_deg\n");
    for b in &report.bins {
        let _ = writeln!(
            s,
            "{:.3},{:.3},{},{:.6},{:.6}",
            b.lo, b.hi, b.count, b.mae_r, b.mae_theta
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_cover_the_label_range() {
        let labels = [
            EdgePose::new(-6.0, 0.0),
            EdgePose::new(9.0, 10.0),
            EdgePose::new(0.5, -5.0),
        ];
        let preds = [
            EdgePose::new(-5.0, 0.0),
            EdgePose::new(9.0, 0.0),
            EdgePose::new(0.0, 5.0),
        ];
        let rep = evaluate_predictions(&labels, &preds, &LabelRanges::default(), 1.0).unwrap();
        assert_eq!(rep.bins.len(), 15);
        assert_eq!(rep.bins[0].lo, -6.0);
        assert_eq!(rep.bins[14].hi, 9.0);
        assert_eq!(rep.bins.iter().map(|b| b.count).sum::<usize>(), 3);
        assert_eq!(rep.bins[14].count, 1);
        assert!((rep.mae_r - 0.5).abs() < 1e-12);
        assert!((rep.mae_theta - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(rep.central_count, 1);
        assert_eq!(
            evaluate_predictions(&labels, &preds, &LabelRanges::default(), 2.0)
                .unwrap()
                .bins
                .len(),
            8
        );
    }

    #[test]
    fn rejects_mismatched_input() {
        let l = [EdgePose::new(0.0, 0.0)];
        assert!(evaluate_predictions(&l, &[], &LabelRanges::default(), 1.0).is_err());
        assert!(evaluate_predictions(&[], &[], &LabelRanges::default(), 1.0).is_err());
        assert!(evaluate_predictions(&l, &l, &LabelRanges::default(), 0.0).is_err());
    }
}
