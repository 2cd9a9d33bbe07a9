//! Experiment pipeline: for every time, scale factor and repetition build the
//! circuit, route and fold it, run it with noise, unfold the readout and
//! evaluate the observables; then extrapolate each repetition to zero noise,
//! aggregate, and attach the exact reference.

mod config;
mod output;

use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{default_scale_factors, ExperimentConfig, Linspace, Times};
pub use output::{read_csv, write_csv, write_exact_csv, write_outputs, write_svg, CSV_HEADER};

use crate::circuit::{apply_gate, model_circuit, Circuit, Gate};
use crate::dense::StateVector;
use crate::error::{Error, Result};
use crate::exact::{exact_evolve, spectrum};
use crate::mitigation::{calibrate, fold, mitigate_readout, zne, ResponseMatrix, ZnePoint};
use crate::models::{
    build_hamiltonian, gauss_operators, gauss_squared_sum, initial_state, parse_label,
    winding_operators, Basis, GaugeModel, Geometry, Group,
};
use crate::pauli::PauliSum;
use crate::seed::derive_seed;
use crate::sim::{expectation_of_distribution, run_noisy};
use crate::transpile::{transpile, Topology};

const CALIBRATION_STREAM: u64 = 0xCA1;

/// A quantity read off the measured distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Probability of the measured-basis state with this index.
    Loschmidt { label: String, index: usize },
    /// Expectation of a diagonal operator.
    Diagonal { name: String, op: PauliSum },
}

impl Observable {
    pub fn parse(spec: &str, group: Group, geom: Geometry) -> Result<Self> {
        let model = match group {
            Group::Z2 => GaugeModel::z2(1.0),
            Group::U1 => GaugeModel::u1(1.0),
        };
        let bad = |msg: String| Error::Config(format!("observable {spec:?}: {msg}"));
        let (kind, arg) = match spec.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (spec, None),
        };
        match (kind, arg) {
            ("loschmidt", Some(label)) => {
                let index = parse_label(label, geom.n_links()).map_err(|e| bad(e.to_string()))?;
                Ok(Observable::Loschmidt {
                    label: label.to_string(),
                    index,
                })
            }
            ("gauss", Some(site)) => {
                let mut chars = site.chars();
                let idx = match (chars.next(), chars.next()) {
                    (Some(c), None) => geom.site_index(c),
                    _ => None,
                }
                .ok_or_else(|| bad(format!("{geom} has sites {:?}", geom.sites())))?;
                let op = gauss_operators(&model, geom)?.swap_remove(idx);
                Ok(Observable::Diagonal {
                    name: spec.to_string(),
                    op,
                })
            }
            ("gauss_sq_sum", None) => {
                let op = gauss_squared_sum(&model, geom).map_err(|e| bad(e.to_string()))?;
                Ok(Observable::Diagonal {
                    name: spec.to_string(),
                    op,
                })
            }
            ("winding", Some(axis)) => {
                if group != Group::Z2 {
                    return Err(bad("winding numbers are defined for Z2".into()));
                }
                let w = winding_operators(geom).map_err(|e| bad(e.to_string()))?;
                let op = match axis {
                    "x" => w.x,
                    "y" | "y13" => w.y13,
                    "y56" => w.y56,
                    _ => return Err(bad("axis must be x, y, y13 or y56".into())),
                };
                Ok(Observable::Diagonal {
                    name: spec.to_string(),
                    op,
                })
            }
            _ => Err(bad(
                "expected loschmidt:<label>, gauss:<site>, gauss_sq_sum or winding:<axis>".into(),
            )),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Observable::Loschmidt { label, .. } => format!("loschmidt:{label}"),
            Observable::Diagonal { name, .. } => name.clone(),
        }
    }

    /// Probabilities get clamped to `[0, 1]` after extrapolation.
    pub fn is_probability(&self) -> bool {
        matches!(self, Observable::Loschmidt { .. })
    }

    /// Value on a distribution over measured-basis strings.
    pub fn evaluate(&self, dist: &[f64], basis: Basis) -> Result<f64> {
        match self {
            Observable::Loschmidt { index, .. } => Ok(dist[*index]),
            Observable::Diagonal { op, .. } => expectation_of_distribution(dist, op, basis),
        }
    }
}

/// Outcome probabilities of `psi` measured in `basis`.
pub fn distribution_in_basis(psi: &StateVector, basis: Basis) -> Vec<f64> {
    match basis {
        Basis::Z => psi.probabilities(),
        Basis::X => {
            let mut amps = psi.amplitudes().to_vec();
            for q in 0..psi.n_qubits() {
                apply_gate(&mut amps, &Gate::H(q));
            }
            amps.iter().map(|a| a.norm_sqr()).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub time: f64,
    pub observable: String,
    pub raw_mean: f64,
    pub raw_err: f64,
    pub ro_mean: f64,
    pub ro_err: f64,
    pub zne_mean: f64,
    pub zne_err: f64,
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn observables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.observable) {
                out.push(r.observable.clone());
            }
        }
        out
    }

    pub fn for_observable<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.observable == name)
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    /// Experiment circuits executed (repetitions x scale factors x times).
    pub executed_circuits: usize,
    /// Basis-state circuits run to calibrate the readout.
    pub calibration_circuits: usize,
    pub calibration: ResponseMatrix,
    /// Circuit at the first time, routed when a topology is set, unfolded.
    pub sample_circuit: Circuit,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct Cell {
    time: usize,
    scale: usize,
    rep: usize,
    achieved: f64,
    raw: Vec<f64>,
    ro: Vec<f64>,
}

/// Builds the (optionally routed) logical circuit for time `t`.
pub fn experiment_circuit(cfg: &ExperimentConfig, t: f64) -> Result<Circuit> {
    let model = cfg.gauge_model();
    let c = model_circuit(&model, cfg.geometry, t, &cfg.initial_state, model.natural_basis())?;
    if cfg.topology == "none" {
        return Ok(c);
    }
    let topo = Topology::resolve(&cfg.topology)?;
    Ok(transpile(&c, &topo, None)?.circuit)
}

/// Exact value of every observable at each time.
fn exact_values(cfg: &ExperimentConfig, observables: &[Observable], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let model = cfg.gauge_model();
    let h = build_hamiltonian(&model, cfg.geometry)?;
    let psi0 = initial_state(cfg.geometry.n_links(), &cfg.initial_state.label, cfg.initial_state.basis)?;
    let basis = model.natural_basis();
    // warm the spectrum cache once
    spectrum(&h)?;
    times
        .iter()
        .map(|&t| {
            let psi = exact_evolve(&h, &psi0, t)?;
            let dist = distribution_in_basis(&psi, basis);
            observables
                .iter()
                .map(|o| {
                    let v = o.evaluate(&dist, basis)?;
                    // round-off can leave a probability a few ulps outside [0, 1]
                    Ok(if o.is_probability() { v.clamp(0.0, 1.0) } else { v })
                })
                .collect()
        })
        .collect()
}

pub fn parse_observables(cfg: &ExperimentConfig) -> Result<Vec<Observable>> {
    cfg.observables
        .iter()
        .map(|o| Observable::parse(o, cfg.model, cfg.geometry))
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let observables = parse_observables(cfg)?;
    let times = cfg.times.values();
    let basis = cfg.gauge_model().natural_basis();
    let n_links = cfg.geometry.n_links();

    let calibration = calibrate(
        n_links,
        &cfg.noise,
        cfg.shots,
        derive_seed(cfg.master_seed, &[CALIBRATION_STREAM]),
    )?;
    info!("calibrated readout on {} basis states", 1 << n_links);

    let base: Vec<Circuit> = times
        .iter()
        .map(|&t| experiment_circuit(cfg, t))
        .collect::<Result<_>>()?;
    let grid: Vec<(usize, usize, usize)> = (0..times.len())
        .flat_map(|i| {
            (0..cfg.scale_factors.len())
                .flat_map(move |s| (0..cfg.repetitions).map(move |r| (i, s, r)))
        })
        .collect();

    let cells: Vec<Cell> = grid
        .par_iter()
        .map(|&(i, s, r)| {
            let (folded, achieved) = fold(&base[i], cfg.scale_factors[s])?;
            let seed = derive_seed(cfg.master_seed, &[i as u64, s as u64, r as u64]);
            let counts = run_noisy(&folded, &cfg.noise, cfg.shots, seed)?;
            let raw_dist = counts.distribution();
            let ro_dist = mitigate_readout(&raw_dist, &calibration)?;
            let eval = |d: &[f64]| -> Result<Vec<f64>> {
                observables.iter().map(|o| o.evaluate(d, basis)).collect()
            };
            debug!("t[{i}] scale {} rep {r}: {} CNOTs", cfg.scale_factors[s], folded.cnot_count());
            Ok(Cell {
                time: i,
                scale: s,
                rep: r,
                achieved,
                raw: eval(&raw_dist)?,
                ro: eval(&ro_dist)?,
            })
        })
        .collect::<Result<_>>()?;
    let executed = cells.len();
    info!("executed {executed} circuits");

    let exact = exact_values(cfg, &observables, &times)?;
    let unit = cfg
        .scale_factors
        .iter()
        .position(|&s| s == 1.0)
        .expect("validated");
    let cell = |i: usize, s: usize, r: usize| -> &Cell {
        &cells[(i * cfg.scale_factors.len() + s) * cfg.repetitions + r]
    };

    let mut rows = Vec::with_capacity(times.len() * observables.len());
    for (i, &t) in times.iter().enumerate() {
        for (k, obs) in observables.iter().enumerate() {
            let raw: Vec<f64> = (0..cfg.repetitions).map(|r| cell(i, unit, r).raw[k]).collect();
            let ro: Vec<f64> = (0..cfg.repetitions).map(|r| cell(i, unit, r).ro[k]).collect();
            let extrapolated = (0..cfg.repetitions)
                .map(|r| {
                    let points: Vec<ZnePoint> = (0..cfg.scale_factors.len())
                        .map(|s| {
                            let c = cell(i, s, r);
                            debug_assert_eq!((c.time, c.scale, c.rep), (i, s, r));
                            ZnePoint {
                                requested: cfg.scale_factors[s],
                                achieved: c.achieved,
                                mean: c.ro[k],
                                std_err: 0.0,
                            }
                        })
                        .collect();
                    Ok(zne(&points, cfg.zne_method, obs.is_probability())?.estimate)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (raw_mean, raw_err) = mean_std(&raw);
            let (ro_mean, ro_err) = mean_std(&ro);
            let (zne_mean, zne_err) = mean_std(&extrapolated);
            rows.push(ResultRow {
                time: t,
                observable: obs.name(),
                raw_mean,
                raw_err,
                ro_mean,
                ro_err,
                zne_mean,
                zne_err,
                exact: exact[i][k],
            });
        }
    }
    Ok(ExperimentOutput {
        table: ResultTable { rows },
        executed_circuits: executed,
        calibration_circuits: 1 << n_links,
        calibration,
        sample_circuit: base[0].clone(),
    })
}

/// Exact observable curves on a dense grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCurve {
    pub times: Vec<f64>,
    /// `(observable, values)` in config order.
    pub columns: Vec<(String, Vec<f64>)>,
}

/// Exact curves over the config's time range on at least `points` (and at
/// least 200) evenly spaced times.
pub fn exact_reference(cfg: &ExperimentConfig, points: usize) -> Result<ExactCurve> {
    cfg.validate()?;
    let observables = parse_observables(cfg)?;
    let given = cfg.times.values();
    let lo = given.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = given.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = points.max(200);
    let times: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    let values = exact_values(cfg, &observables, &times)?;
    let columns = observables
        .iter()
        .enumerate()
        .map(|(k, o)| (o.name(), values.iter().map(|row| row[k]).collect()))
        .collect();
    Ok(ExactCurve { times, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observable_parsing() {
        let g = Geometry::Square1;
        assert!(Observable::parse("loschmidt:0101", Group::Z2, g).is_ok());
        assert!(Observable::parse("loschmidt:010", Group::Z2, g).is_err());
        assert!(Observable::parse("gauss:a", Group::U1, g).is_ok());
        assert!(Observable::parse("gauss:E", Group::U1, g).is_err());
        assert!(Observable::parse("gauss_sq_sum", Group::U1, g).is_ok());
        assert!(Observable::parse("gauss_sq_sum", Group::Z2, g).is_err());
        assert!(Observable::parse("winding:y", Group::Z2, g).is_err());
        assert!(Observable::parse("winding:y", Group::Z2, Geometry::TwoSquarePbc).is_ok());
        assert!(Observable::parse("winding:z", Group::Z2, Geometry::TwoSquarePbc).is_err());
        assert!(Observable::parse("energy", Group::Z2, g).is_err());
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[0.3]), (0.3, 0.0));
    }

    #[test]
    fn x_basis_distribution_of_label_state() {
        let psi = initial_state(3, "101", Basis::X).unwrap();
        let d = distribution_in_basis(&psi, Basis::X);
        assert!((d[0b101] - 1.0).abs() < 1e-12);
    }
}
