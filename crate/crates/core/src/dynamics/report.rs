use serde::{Deserialize, Serialize};

use super::sim::DiagnosticsSeries;
use crate::{Error, Result, TWO_PI};

/// Summary of one run against the stability statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    #[serde(rename = "L")]
    pub l: f64,
    pub epsilon: f64,
    pub n_records: usize,
    pub t_final: f64,
    pub all_finite: bool,
    pub halted: Option<String>,
    pub max_w: f64,
    /// max_t W / eps^2.
    pub w_constant: f64,
    pub max_abs_xc: f64,
    /// max_t |x_c| L / eps^2.
    pub xc_constant: f64,
    /// Resolution of the measured x_c: the centering shift a mass error of
    /// max_t |M - M0| can cause, |M - M0| / (4 pi), plus the bisection
    /// tolerance.
    pub xc_resolution: f64,
    /// max_t |M - M0| / M0.
    pub mass_drift: f64,
    /// max_t |x0 - x0(0)| / (M0 L), x0 the integral of x.
    pub com_drift: f64,
    /// max_t |F - F0| / |F0| (NaN when F was not recorded).
    pub energy_drift: f64,
}

impl StabilityReport {
    /// Finite diagnostics, no halt, conserved quantities within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.all_finite
            && self.halted.is_none()
            && self.mass_drift <= tol
            && self.com_drift <= tol
            && !(self.energy_drift > tol)
    }
}

pub fn stability_report(s: &DiagnosticsSeries, l: f64, epsilon: f64) -> Result<StabilityReport> {
    let first = s.records.first().ok_or_else(|| Error::domain("empty series"))?;
    if !(l > 0.0 && epsilon > 0.0) {
        return Err(Error::domain(format!("L = {l} and epsilon = {epsilon} must be positive")));
    }
    let (m0, x0, f0) = (first.mass, first.com_x, first.f);
    let fold = |f: &dyn Fn(&super::sim::DiagnosticsRecord) -> f64| {
        s.records.iter().map(f).fold(0.0f64, f64::max)
    };
    let max_w = fold(&|r| r.w);
    let max_abs_xc = fold(&|r| r.x_c().abs());
    let e2 = epsilon * epsilon;
    let xc_resolution = fold(&|r| (r.mass - m0).abs()) / (2.0 * TWO_PI) + 1e-12 * m0;
    Ok(StabilityReport {
        l,
        epsilon,
        n_records: s.records.len(),
        t_final: s.records.last().map_or(0.0, |r| r.t),
        all_finite: s.is_valid(),
        halted: s.halted.clone(),
        max_w,
        w_constant: max_w / e2,
        max_abs_xc,
        xc_constant: max_abs_xc * l / e2,
        xc_resolution,
        mass_drift: fold(&|r| (r.mass - m0).abs() / m0),
        com_drift: fold(&|r| (r.com_x - x0).abs() / (m0 * l)),
        energy_drift: if f0.is_nan() { f64::NAN } else { fold(&|r| (r.f - f0).abs() / f0.abs()) },
    })
}

/// Comparison of runs at increasing epsilon (each a doubling of the last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingVerdict {
    pub epsilons: Vec<f64>,
    pub max_w: Vec<f64>,
    /// max_w ratios between consecutive runs.
    pub w_ratios: Vec<f64>,
    pub ratio_window: (f64, f64),
    pub ratios_ok: bool,
    /// x_c constant fitted on the first run, (max |x_c| + resolution) L / eps^2.
    pub c_fit: f64,
    /// Raw max |x_c| L / eps^2 per run.
    pub xc_constants: Vec<f64>,
    /// (max |x_c| - resolution)+ L / eps^2 per run; compared against `c_fit`.
    pub xc_lower_constants: Vec<f64>,
    /// Whether the raw constants alone satisfy the fit.
    pub xc_raw_ok: bool,
    pub xc_ok: bool,
    pub all_finite: bool,
}

impl ScalingVerdict {
    pub fn passes(&self) -> bool {
        self.ratios_ok && self.xc_ok && self.all_finite
    }
}

/// W ratios must lie in [2.5, 6]; the x_c constant fitted on the first
/// run must bound the others up to each run's x_c resolution.
pub fn epsilon_scaling(reports: &[StabilityReport]) -> ScalingVerdict {
    let window = (2.5, 6.0);
    let max_w: Vec<f64> = reports.iter().map(|r| r.max_w).collect();
    let w_ratios: Vec<f64> = max_w.windows(2).map(|w| w[1] / w[0]).collect();
    let scale = |r: &StabilityReport| r.l / (r.epsilon * r.epsilon);
    let c_fit = reports.first().map_or(f64::NAN, |r| (r.max_abs_xc + r.xc_resolution) * scale(r));
    let xc_constants: Vec<f64> = reports.iter().map(|r| r.xc_constant).collect();
    let xc_lower_constants: Vec<f64> =
        reports.iter().map(|r| (r.max_abs_xc - r.xc_resolution).max(0.0) * scale(r)).collect();
    let raw_fit = reports.first().map_or(f64::NAN, |r| r.xc_constant);
    ScalingVerdict {
        epsilons: reports.iter().map(|r| r.epsilon).collect(),
        ratios_ok: w_ratios.iter().all(|r| *r >= window.0 && *r <= window.1),
        xc_ok: xc_lower_constants.iter().all(|c| *c <= c_fit),
        xc_raw_ok: xc_constants.iter().all(|c| *c <= raw_fit * (1.0 + 1e-9)),
        all_finite: reports.iter().all(|r| r.all_finite && r.halted.is_none() && r.max_w.is_finite()),
        max_w,
        w_ratios,
        ratio_window: window,
        c_fit,
        xc_constants,
        xc_lower_constants,
    }
}
