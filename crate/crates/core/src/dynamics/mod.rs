//! Contour dynamics of patches: RK4 node advection, arc-length remeshing
//! and diagnostics series for conservation and stability experiments.

mod remesh;
mod report;
mod sim;
mod spline;

pub use remesh::remesh;
pub use report::{epsilon_scaling, stability_report, ScalingVerdict, StabilityReport};
pub use sim::{
    advance, diagnostics, nodes_for_spacing, remesh_patch, run, run_with, step, DiagnosticsRecord,
    DiagnosticsSeries, InitialCondition, SimConfig,
};
pub use spline::PeriodicSpline;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biot_savart::VelocityMethod;
    use crate::geometry::{wrap_angle, Patch};
    use crate::TWO_PI;

    fn max_node_distance(a: &Patch, b: &Patch) -> f64 {
        a.nodes()
            .zip(b.nodes())
            .map(|(p, q)| (p.x - q.x).hypot(wrap_angle(p.y() - q.y())))
            .fold(0.0, f64::max)
    }

    #[test]
    fn rectangle_nodes_shear_without_moving_in_x() {
        let l = 1.0;
        let p = Patch::rectangle(-l, l, 64).unwrap();
        let dt = 0.05;
        let q = advance(&p, dt, VelocityMethod::Contour).unwrap();
        for (a, b) in p.nodes().zip(q.nodes()) {
            assert_eq!(a.x, b.x);
            let dy = wrap_angle(b.y() - a.y());
            assert!((dy - TWO_PI * a.x * dt).abs() < 1e-3 * TWO_PI * l * dt, "{dy}");
        }
    }

    #[test]
    fn small_disc_stays_centred() {
        let p = Patch::disc(0.0, 0.0, 0.3, 40).unwrap();
        let mut q = p.clone();
        for _ in 0..5 {
            q = advance(&q, 0.2, VelocityMethod::Contour).unwrap();
        }
        assert!(q.contour_moment_x().abs() < 1e-12);
        assert!(max_node_distance(&p, &q) > 0.01);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let p = Patch::disc(0.2, 0.0, 0.5, 24).unwrap();
        let run = |dt: f64| {
            let n = (1.6 / dt).round() as usize;
            let mut q = p.clone();
            for _ in 0..n {
                q = advance(&q, dt, VelocityMethod::Contour).unwrap();
            }
            q
        };
        let (a, b, c) = (run(0.4), run(0.2), run(0.1));
        let ratio = max_node_distance(&a, &b) / max_node_distance(&b, &c);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn backward_integration_returns() {
        let p = Patch::disc(0.0, 1.0, 0.4, 32).unwrap();
        let there_and_back = |dt: f64| {
            let n = (0.8 / dt).round() as usize;
            let mut q = p.clone();
            for _ in 0..n {
                q = advance(&q, dt, VelocityMethod::Contour).unwrap();
            }
            for _ in 0..n {
                q = advance(&q, -dt, VelocityMethod::Contour).unwrap();
            }
            max_node_distance(&p, &q)
        };
        let (e1, e2) = (there_and_back(0.2), there_and_back(0.1));
        assert!(e1 < 10.0 * 0.2f64.powi(4) * 0.8, "{e1}");
        assert!(e2 < e1 / 10.0, "{e1} {e2}");
    }

    #[test]
    fn short_run_conserves_and_round_trips() {
        let l = 2.0;
        let p = Patch::sinusoidal(l, 0.05, 96).unwrap();
        let mut cfg = SimConfig::for_length(l);
        cfg.velocity_method = VelocityMethod::Contour;
        cfg.t_final = 0.3;
        cfg.node_spacing_target = TWO_PI / 96.0;
        cfg.cell_size = 0.02;
        cfg.epsilon = 0.05;
        cfg.record_every = 3;
        let s = run(&p, &cfg).unwrap();
        assert!(s.halted.is_none());
        assert!(s.is_valid());
        assert!(!s.exploratory);
        let r = stability_report(&s, l, 0.05).unwrap();
        assert!(r.passes(1e-3), "{r:?}");
        let csv = s.to_csv_string().unwrap();
        assert!(csv.starts_with("t,mass,com_x,F,xc_lo,xc_hi,W,tail_mu_0.1,tail_mu_0.5\n"));
        let back = DiagnosticsSeries::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(back.records, s.records);
        assert_eq!(run(&p, &cfg).unwrap(), s);
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig::for_length(2.0);
        assert!((c.dt - 0.2 / (TWO_PI * 2.0)).abs() < 1e-15);
        c.remesh_every = 0;
        assert!(c.validate().is_err());
        let json = serde_json::to_string(&SimConfig::for_length(1.0)).unwrap();
        let back: SimConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, SimConfig::for_length(1.0));
        let ic: InitialCondition = serde_json::from_str(r#"{"kind":"sinusoidal","L":2,"epsilon":0.1,"nodes":64}"#).unwrap();
        assert!(ic.build().is_ok());
    }
}
