//! Uniform and adaptive refinement studies with convergence tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::dpg::{
    assemble, l2_errors, report_from_lift, residual_lift, solve, DpgOptions, DpgSystem, ErrorReport,
};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::polyspace::PwPolySpace;
use crate::problems::{self, Problem};
use crate::trialtest::{TestFunction, TrialFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Interval { a: Point, b: Point },
    Polygon { vertices: Vec<Point> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    Adaptive,
}

/// Quantity accumulated by bulk marking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkingMeasure {
    Squared,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub curve: CurveSpec,
    /// Initial element count (per edge for polygons).
    pub elements: usize,
    pub p: usize,
    pub mode: Mode,
    pub steps: usize,
    pub theta: f64,
    pub marking: MarkingMeasure,
    pub dpg: DpgOptions,
    pub out: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            curve: CurveSpec::Interval {
                a: [-1.0, 0.0],
                b: [1.0, 0.0],
            },
            elements: 4,
            p: 0,
            mode: Mode::Uniform,
            steps: 8,
            theta: 0.5,
            marking: MarkingMeasure::Squared,
            dpg: DpgOptions::default(),
            out: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if self.steps < 1 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if self.elements < 1 {
            return Err(Error::Config("elements must be at least 1".into()));
        }
        if self.dpg.enrich_solve < 1 {
            return Err(Error::Config("enrich_solve must be at least 1".into()));
        }
        if self.dpg.enrich_error < 1 {
            return Err(Error::Config("enrich_error must be at least 1".into()));
        }
        if self.dpg.quad.outer_order < 1 {
            return Err(Error::Config("quad_order must be at least 1".into()));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        match &self.curve {
            CurveSpec::Interval { a, b } => problems::interval(*a, *b, self.elements),
            CurveSpec::Polygon { vertices } => problems::polygon_harmonic(vertices, self.elements),
        }
    }
}

/// One line of a convergence table. L² quantities are absent without an
/// exact solution; EOC fields are absent in the first row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub step: usize,
    pub dim: usize,
    pub elements: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub err_l2_phi: Option<f64>,
    pub err_l2_sigma: Option<f64>,
    pub err_nodes_scaled: Option<f64>,
    pub err_energy: f64,
    pub eoc_l2: Option<f64>,
    pub eoc_energy: Option<f64>,
}

impl ConvergenceRow {
    /// `err_l2_phi + err_l2_sigma`.
    pub fn err_l2(&self) -> Option<f64> {
        Some(self.err_l2_phi? + self.err_l2_sigma?)
    }
}

pub const CSV_HEADER: &str = "step,dim,elements,h_min,h_max,err_l2_phi,err_l2_sigma,err_nodes_scaled,err_energy,eoc_l2,eoc_energy";

/// Bulk marking: indices of the largest indicators, in descending order,
/// until their share of the total first reaches `theta`. Ties go to the
/// lower index. All-zero indicators give an empty set.
pub fn mark_elements(eta: &[f64], theta: f64, measure: MarkingMeasure) -> Vec<usize> {
    let weight: Vec<f64> = match measure {
        MarkingMeasure::Squared => eta.iter().map(|x| x * x).collect(),
        MarkingMeasure::Linear => eta.to_vec(),
    };
    let total: f64 = weight.iter().sum();
    if total <= 0.0 {
        return vec![];
    }
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&i, &j| weight[j].total_cmp(&weight[i]).then(i.cmp(&j)));
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for i in order {
        if acc >= theta * total || weight[i] <= 0.0 {
            break;
        }
        acc += weight[i];
        marked.push(i);
    }
    marked
}

/// `log(e_k / e_{k-1}) / log(n_{k-1} / n_k)`.
pub fn eoc(prev_dim: usize, prev_err: f64, dim: usize, err: f64) -> f64 {
    (err / prev_err).ln() / (prev_dim as f64 / dim as f64).ln()
}

/// Negative least-squares slope of `log err` against `log dim`.
pub fn fitted_eoc(dims: &[usize], errs: &[f64]) -> f64 {
    let n = dims.len() as f64;
    let x: Vec<f64> = dims.iter().map(|&d| (d as f64).ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    -sxy / sxx
}

/// Everything computed on one mesh.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub mesh: Arc<Mesh>,
    pub system: DpgSystem,
    pub solution: TrialFunction,
    pub lift: TestFunction,
    pub report: ErrorReport,
}

/// Assembles, solves and evaluates errors on one mesh.
pub fn solve_step(mesh: Arc<Mesh>, p: usize, problem: &Problem, opts: &DpgOptions) -> Result<StepResult> {
    let space = Arc::new(PwPolySpace::uniform(mesh.clone(), p));
    let sys = assemble(space, problem.load.as_ref(), opts);
    let solution = solve(&sys)?;
    let lift = residual_lift(&solution, problem.load.as_ref(), opts);
    let mut report = report_from_lift(&lift);
    report.l2 = problem.reference.as_ref().map(|r| l2_errors(&solution, r));
    Ok(StepResult {
        mesh,
        system: sys,
        solution,
        lift,
        report,
    })
}

/// Runs the study, calling `observe` after every step.
pub fn run_study_with<F: FnMut(&StepResult, &ConvergenceRow)>(
    cfg: &StudyConfig,
    mut observe: F,
) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let mut mesh = Arc::new(problem.mesh.clone());
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let result = solve_step(mesh.clone(), cfg.p, &problem, &cfg.dpg).map_err(|e| Error::Step {
            step,
            source: Box::new(e),
        })?;
        let r = &result.report;
        let mut row = ConvergenceRow {
            step,
            dim: 2 * mesh.num_elements() * (cfg.p + 1) + mesh.num_nodes(),
            elements: mesh.num_elements(),
            h_min: mesh.h_min(),
            h_max: mesh.h_max(),
            err_l2_phi: r.l2.map(|l| l.phi),
            err_l2_sigma: r.l2.map(|l| l.sigma),
            err_nodes_scaled: r.l2.map(|l| l.nodes_scaled),
            err_energy: r.energy_total,
            eoc_l2: None,
            eoc_energy: None,
        };
        if let Some(prev) = rows.last() {
            row.eoc_energy = Some(eoc(prev.dim, prev.err_energy, row.dim, row.err_energy));
            if let (Some(a), Some(b)) = (prev.err_l2(), row.err_l2()) {
                row.eoc_l2 = Some(eoc(prev.dim, a, row.dim, b));
            }
        }
        observe(&result, &row);
        rows.push(row);
        if step + 1 == cfg.steps {
            break;
        }
        mesh = Arc::new(match cfg.mode {
            Mode::Uniform => mesh.refine_uniform(),
            Mode::Adaptive => {
                let marked = mark_elements(&result.report.indicators, cfg.theta, cfg.marking);
                if marked.is_empty() {
                    break;
                }
                mesh.refine_halve(&marked)?
            }
        });
    }
    Ok(rows)
}

pub fn run_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    run_study_with(cfg, |_, _| {})
}

fn field(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.15e}"))
}

pub fn csv_string(rows: &[ConvergenceRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.15e},{:.15e},{},{},{},{:.15e},{},{}",
            r.step,
            r.dim,
            r.elements,
            r.h_min,
            r.h_max,
            field(r.err_l2_phi),
            field(r.err_l2_sigma),
            field(r.err_nodes_scaled),
            r.err_energy,
            field(r.eoc_l2),
            field(r.eoc_energy),
        );
    }
    out
}

pub fn write_csv(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marking_examples() {
        let eta: Vec<f64> = [4.0f64, 3.0, 2.0, 1.0].iter().map(|x| x.sqrt()).collect();
        assert_eq!(mark_elements(&eta, 0.5, MarkingMeasure::Squared), vec![0, 1]);
        let all = mark_elements(&[1.0, 0.0, 2.0, 0.5], 0.999999, MarkingMeasure::Squared);
        assert_eq!(all, vec![2, 0, 3]);
        assert_eq!(mark_elements(&[0.3], 0.5, MarkingMeasure::Squared), vec![0]);
        assert!(mark_elements(&[0.0, 0.0], 0.5, MarkingMeasure::Squared).is_empty());
        assert_eq!(mark_elements(&[1.0, 1.0, 1.0], 0.5, MarkingMeasure::Squared), vec![0, 1]);
        assert_eq!(mark_elements(&[3.0, 1.0, 1.0, 1.0], 0.5, MarkingMeasure::Linear), vec![0]);
    }

    #[test]
    fn eoc_of_power_law() {
        let dims = [10, 20, 40, 80];
        let errs: Vec<f64> = dims.iter().map(|&d| 3.0 * (d as f64).powf(-1.5)).collect();
        assert!((fitted_eoc(&dims, &errs) - 1.5).abs() < 1e-12);
        assert!((eoc(10, errs[0], 20, errs[1]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cfg = StudyConfig {
            theta: 1.5,
            ..StudyConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(m)) if m.contains("theta")));
        let cfg = StudyConfig {
            steps: 0,
            ..StudyConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_step_has_empty_eoc() {
        let cfg = StudyConfig {
            steps: 1,
            ..StudyConfig::default()
        };
        let rows = run_study(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].eoc_l2.is_none() && rows[0].eoc_energy.is_none());
        let csv = csv_string(&rows);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().ends_with(",,"));
    }

    #[test]
    fn uniform_mode_doubles_elements() {
        let cfg = StudyConfig {
            steps: 3,
            ..StudyConfig::default()
        };
        let rows = run_study(&cfg).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.elements).collect::<Vec<_>>(),
            vec![4, 8, 16]
        );
        assert!(rows[1].eoc_l2.is_some());
    }

    #[test]
    fn csv_round_trips() {
        let cfg = StudyConfig {
            steps: 2,
            ..StudyConfig::default()
        };
        let rows = run_study(&cfg).unwrap();
        let csv = csv_string(&rows);
        let line = csv.lines().nth(2).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 11);
        let energy: f64 = fields[8].parse().unwrap();
        assert_eq!(energy, rows[1].err_energy);
        let eoc: f64 = fields[9].parse().unwrap();
        assert_eq!(eoc, rows[1].eoc_l2.unwrap());
    }

    #[test]
    fn closed_rows_leave_l2_empty() {
        let cfg = StudyConfig {
            curve: CurveSpec::Polygon {
                vertices: problems::square_vertices(0.5),
            },
            elements: 1,
            steps: 2,
            ..StudyConfig::default()
        };
        let rows = run_study(&cfg).unwrap();
        assert!(rows[0].err_l2_phi.is_none());
        let csv = csv_string(&rows);
        let fields: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(fields[5], "");
        assert_eq!(fields[9], "");
        assert!(!fields[10].is_empty());
    }
}
