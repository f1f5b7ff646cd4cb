use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::remesh::remesh;
use crate::biot_savart::{KernelValue, VelocityField, VelocityMethod};
use crate::functionals::{center_of_mass_x, check_hypotheses, mass, regularized_energy, DEFAULT_C_HYP};
use crate::geometry::{find_self_intersection, point_of_centering, weighted_sym_diff, Contour, Patch, StripPoint};
use crate::{Error, Result, TWO_PI};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub node_spacing_target: f64,
    pub velocity_method: VelocityMethod,
    pub remesh_every: usize,
    pub seed: u64,
    /// Steps between diagnostics records.
    pub record_every: usize,
    /// Half-width of the reference rectangle.
    #[serde(rename = "L")]
    pub l: f64,
    /// Perturbation size used for the hypothesis check.
    pub epsilon: f64,
    /// Mask cell size for the diagnostics.
    pub cell_size: f64,
    /// Levels for the tail measures.
    pub mu: Vec<f64>,
    /// Whether to evaluate F at each record.
    pub energy: bool,
}

impl SimConfig {
    /// Defaults for a patch of half-width L: dt = 0.2 / (2 pi L).
    pub fn for_length(l: f64) -> Self {
        let dt = 0.2 / (TWO_PI * l);
        Self {
            dt,
            t_final: 5.0,
            node_spacing_target: 0.05,
            velocity_method: VelocityMethod::Quadrature,
            remesh_every: 5,
            seed: 0,
            record_every: ((0.25 / dt).round() as usize).max(1),
            l,
            epsilon: 0.0,
            cell_size: crate::geometry::default_cell_size(l),
            mu: vec![0.1, 0.5],
            energy: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::domain(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::domain(format!("T_final = {} must be non-negative", self.t_final)));
        }
        if self.remesh_every < 1 || self.record_every < 1 {
            return Err(Error::domain("remesh and record intervals must be at least 1"));
        }
        if !(self.node_spacing_target > 0.0 && self.l > 0.0 && self.cell_size > 0.0) {
            return Err(Error::domain("node spacing, L and cell size must be positive"));
        }
        Ok(())
    }

    /// Number of steps and the step actually used (T / steps).
    pub fn schedule(&self) -> (usize, f64) {
        let n = (self.t_final / self.dt).ceil() as usize;
        if n == 0 {
            (0, 0.0)
        } else {
            (n, self.t_final / n as f64)
        }
    }
}

fn nodes_of(p: &Patch) -> Vec<StripPoint> {
    p.contours().iter().flat_map(|c| c.nodes().iter().copied()).collect()
}

fn displaced(p: &Patch, base: &[StripPoint], k: &[KernelValue], s: f64) -> Result<Patch> {
    let mut contours = Vec::with_capacity(p.contours().len());
    let mut off = 0;
    for c in p.contours() {
        let n = c.len();
        let xy: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let z = base[off + i];
                let u = k[off + i];
                (z.x + s * u.u1, z.y() + s * u.u2)
            })
            .collect();
        off += n;
        contours.push(Contour::from_xy(&xy, c.winding(), c.orientation())?);
    }
    p.with_contours(contours)
}

/// One RK4 step of size `dt` (negative to integrate backwards) for every
/// contour node.
pub fn advance(p: &Patch, dt: f64, method: VelocityMethod) -> Result<Patch> {
    let z = nodes_of(p);
    let vel = |q: &Patch| VelocityField::new(q.clone(), method).eval_many(&nodes_of(q));
    let k1 = vel(p)?;
    let p2 = displaced(p, &z, &k1, 0.5 * dt)?;
    let k2 = vel(&p2)?;
    let p3 = displaced(p, &z, &k2, 0.5 * dt)?;
    let k3 = vel(&p3)?;
    let p4 = displaced(p, &z, &k3, dt)?;
    let k4 = vel(&p4)?;
    let k: Vec<KernelValue> = (0..z.len())
        .map(|i| (k1[i] + k4[i]) * (1.0 / 6.0) + (k2[i] + k3[i]) * (1.0 / 3.0))
        .collect();
    displaced(p, &z, &k, dt)
}

/// One RK4 step with the configured step and velocity evaluator.
pub fn step(p: &Patch, cfg: &SimConfig) -> Result<Patch> {
    cfg.validate()?;
    advance(p, cfg.dt, cfg.velocity_method)
}

/// Remeshes every contour of the patch and checks for self-intersection.
pub fn remesh_patch(p: &Patch, target: f64) -> Result<Patch> {
    let contours = p.contours().iter().map(|c| remesh(c, target)).collect::<Result<Vec<_>>>()?;
    let q = p.with_contours(contours)?;
    if let Some((c1, s1, c2, s2)) = find_self_intersection(q.contours()) {
        return Err(Error::geometry(format!(
            "self-intersection between segment {s1} of contour {c1} and segment {s2} of contour {c2}"
        )));
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    /// Integral of x over the patch.
    pub com_x: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub xc_lo: f64,
    pub xc_hi: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub tails: Vec<f64>,
}

impl DiagnosticsRecord {
    pub fn x_c(&self) -> f64 {
        0.5 * (self.xc_lo + self.xc_hi)
    }

    fn is_finite(&self) -> bool {
        [self.t, self.mass, self.com_x, self.f, self.xc_lo, self.xc_hi, self.w]
            .iter()
            .chain(&self.tails)
            .all(|v| v.is_finite())
    }
}

/// Diagnostics of one patch state.
pub fn diagnostics(p: &Patch, t: f64, cfg: &SimConfig) -> Result<DiagnosticsRecord> {
    let q = p.with_cell_size(cfg.cell_size)?;
    let m = mass(&q)?;
    let com = center_of_mass_x(&q)?;
    let f = if cfg.energy { regularized_energy(&q)? } else { f64::NAN };
    let (lo, hi) = point_of_centering(&q)?;
    let ws = weighted_sym_diff(&q, 0.5 * (lo + hi), cfg.l)?;
    let tails = cfg.mu.iter().map(|&mu| ws.tail(mu)).collect();
    Ok(DiagnosticsRecord { t, mass: m, com_x: com, f, xc_lo: lo, xc_hi: hi, w: ws.value, tails })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub mu: Vec<f64>,
    pub records: Vec<DiagnosticsRecord>,
    /// Reason the run stopped before T_final.
    pub halted: Option<String>,
    /// The initial patch failed the hypothesis check.
    pub exploratory: bool,
}

impl DiagnosticsSeries {
    pub fn is_valid(&self) -> bool {
        self.records.windows(2).all(|w| w[1].t > w[0].t)
            && self.records.iter().all(|r| {
                let mut s = r.clone();
                if s.f.is_nan() {
                    // F is NaN when energy recording is off
                    s.f = 0.0;
                }
                s.is_finite()
            })
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["t", "mass", "com_x", "F", "xc_lo", "xc_hi", "W"].iter().map(|s| s.to_string()).collect();
        h.extend(self.mu.iter().map(|m| format!("tail_mu_{m}")));
        h
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.header())?;
        for r in &self.records {
            let mut row: Vec<String> = [r.t, r.mass, r.com_x, r.f, r.xc_lo, r.xc_hi, r.w]
                .iter()
                .map(|v| fmt17(*v))
                .collect();
            row.extend(r.tails.iter().map(|v| fmt17(*v)));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let head = rd.headers()?.clone();
        let fixed = ["t", "mass", "com_x", "F", "xc_lo", "xc_hi", "W"];
        if head.len() < fixed.len() || head.iter().zip(fixed).any(|(a, b)| a != b) {
            return Err(Error::domain(format!("unexpected series header {head:?}")));
        }
        let mu = head
            .iter()
            .skip(fixed.len())
            .map(|c| {
                c.strip_prefix("tail_mu_")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::domain(format!("bad tail column {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut records = Vec::new();
        for row in rd.records() {
            let row = row?;
            let v = row
                .iter()
                .map(|c| c.parse::<f64>().map_err(|e| Error::domain(format!("bad number {c}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != head.len() {
                return Err(Error::domain("ragged series row"));
            }
            records.push(DiagnosticsRecord {
                t: v[0],
                mass: v[1],
                com_x: v[2],
                f: v[3],
                xc_lo: v[4],
                xc_hi: v[5],
                w: v[6],
                tails: v[7..].to_vec(),
            });
        }
        Ok(Self { mu, records, halted: None, exploratory: false })
    }
}

/// Shortest decimal that round-trips.
pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:?}")
}

/// Runs the patch to T_final, recording diagnostics every `record_every`
/// steps and at the end. Remeshing and the self-intersection check run
/// every `remesh_every` steps and before every record; on intersection or a failed step the run
/// stops and the partial series is returned with `halted` set.
pub fn run(p0: &Patch, cfg: &SimConfig) -> Result<DiagnosticsSeries> {
    run_with(p0, cfg, |_, _| {})
}

/// `run` with a callback receiving every recorded state.
pub fn run_with(p0: &Patch, cfg: &SimConfig, mut on_record: impl FnMut(f64, &Patch)) -> Result<DiagnosticsSeries> {
    cfg.validate()?;
    let exploratory = match check_hypotheses(&p0.with_cell_size(cfg.cell_size)?, cfg.l, cfg.epsilon, DEFAULT_C_HYP) {
        Ok(h) => !h.all_ok(),
        Err(_) => true,
    };
    let (n, dt) = cfg.schedule();
    let mut series = DiagnosticsSeries { mu: cfg.mu.clone(), records: Vec::new(), halted: None, exploratory };
    let mut p = p0.clone();
    series.records.push(diagnostics(&p, 0.0, cfg)?);
    on_record(0.0, &p);
    for k in 1..=n {
        let t = dt * k as f64;
        match advance(&p, dt, cfg.velocity_method) {
            Ok(q) => p = q,
            Err(e) => {
                series.halted = Some(format!("step {k} failed: {e}"));
                return Ok(series);
            }
        }
        let record = k % cfg.record_every == 0 || k == n;
        // records are always taken on a freshly remeshed state
        if k % cfg.remesh_every == 0 || record {
            match remesh_patch(&p, cfg.node_spacing_target) {
                Ok(q) => p = q,
                Err(e) => {
                    series.halted = Some(format!("t = {t}: {e}"));
                    return Ok(series);
                }
            }
        }
        if record {
            series.records.push(diagnostics(&p, t, cfg)?);
            on_record(t, &p);
        }
    }
    Ok(series)
}

/// Initial conditions accepted by the simulate command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialCondition {
    Rectangle {
        #[serde(rename = "L")]
        l: f64,
        nodes: usize,
    },
    /// x = L + eps sin y on the right, x = -L - eps cos y on the left,
    /// area-corrected.
    Sinusoidal {
        #[serde(rename = "L")]
        l: f64,
        epsilon: f64,
        nodes: usize,
    },
    Disc {
        cx: f64,
        cy: f64,
        r: f64,
        nodes: usize,
    },
}

impl InitialCondition {
    pub fn build(&self) -> Result<Patch> {
        match *self {
            Self::Rectangle { l, nodes } => Patch::rectangle(-l, l, nodes),
            Self::Sinusoidal { l, epsilon, nodes } => Patch::sinusoidal(l, epsilon, nodes),
            Self::Disc { cx, cy, r, nodes } => Patch::disc(cx, cy, r, nodes),
        }
    }
}

/// Node count giving spacing close to `target` on one winding boundary.
pub fn nodes_for_spacing(target: f64) -> usize {
    ((TWO_PI / target).round() as usize).max(8)
}

