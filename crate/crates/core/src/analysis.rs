//! Parameter sweeps, error curves against references, and 1/χ
//! extrapolation.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{Observable, ObservableSpec, Pauli};
use crate::error::{invalid, Error, Result};
use crate::lattice::SystemSize;
use crate::peps::{BpOptions, PepsState};
use crate::tensor::DEFAULT_FLOOR;

pub const ENGINE_VERSION: &str = concat!("gpeps ", env!("CARGO_PKG_VERSION"));

/// One measured value. The first nine fields form the documented CSV
/// schema; the last three carry provenance and failures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub size: String,
    pub theta_h: f64,
    pub steps: usize,
    pub chi: usize,
    pub observable: String,
    pub site: Option<usize>,
    pub value: Option<f64>,
    pub max_trunc_err: f64,
    pub wall_time_s: f64,
    pub config_hash: String,
    pub engine_version: String,
    pub error: Option<String>,
}

pub fn write_csv<W: Write>(records: &[ResultRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<W: Write>(records: &[ResultRecord], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, records)?;
    Ok(())
}

/// `(theta_h, value)` pairs from any CSV with those two columns. Rows with
/// an empty value are skipped.
pub fn read_series<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        theta_h: f64,
        value: Option<f64>,
    }
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        if let Some(v) = row.value {
            out.push((row.theta_h, v));
        }
    }
    Ok(out)
}

/// `n` evenly spaced angles on `[0, π/2]`, both ends included.
pub fn theta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| FRAC_PI_2 * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Pointwise `|test - reference|` on a shared θ grid.
pub fn abs_error_curve(test: &[(f64, f64)], reference: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if test.len() != reference.len() {
        return invalid(format!("grids differ in length: {} vs {}", test.len(), reference.len()));
    }
    test.iter()
        .zip(reference)
        .map(|(&(t, a), &(r, b))| {
            if (t - r).abs() > 1e-9 {
                invalid(format!("grid mismatch at theta {t} vs {r}"))
            } else {
                Ok((t, (a - b).abs()))
            }
        })
        .collect()
}

/// Values at increasing bond dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiSeries {
    points: Vec<(usize, f64)>,
}

impl ChiSeries {
    /// Sorts by χ; repeated χ values are rejected.
    pub fn new(mut points: Vec<(usize, f64)>) -> Result<Self> {
        points.sort_by_key(|p| p.0);
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return invalid("bond dimensions in a series must be distinct");
        }
        if points.iter().any(|p| p.0 == 0 || !p.1.is_finite()) {
            return invalid("series needs positive chi and finite values");
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiFit {
    /// Estimate at χ → ∞.
    pub intercept: f64,
    pub slope: f64,
    /// RMS deviation of the fitted points from the line.
    pub residual: f64,
}

/// Least-squares line `value = intercept + slope / χ` through the `k`
/// largest bond dimensions.
pub fn extrapolate_chi(series: &ChiSeries, k: usize) -> Result<ChiFit> {
    if k < 2 {
        return invalid("fit window must hold at least two points");
    }
    if series.len() < k {
        return invalid(format!("fit window {k} exceeds the {} available points", series.len()));
    }
    let window = &series.points[series.len() - k..];
    let xs: Vec<f64> = window.iter().map(|p| 1.0 / p.0 as f64).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1).collect();
    let n = k as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sq: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(ChiFit { intercept, slope, residual: (sq / n).sqrt() })
}

/// Text table of values against χ, the change relative to the largest χ,
/// and the fit (when at least `k` points exist).
pub fn chi_convergence_report(label: &str, series: &ChiSeries, k: usize) -> String {
    let mut out = format!("# {label}\n{:>6} {:>22} {:>12}\n", "chi", "value", "|v - v_max|");
    let last = series.points.last().map(|p| p.1).unwrap_or(f64::NAN);
    for &(chi, v) in &series.points {
        out.push_str(&format!("{chi:>6} {v:>22.15e} {:>12.3e}\n", (v - last).abs()));
    }
    match extrapolate_chi(series, k.min(series.len()).max(2)) {
        Ok(fit) => out.push_str(&format!(
            "fit over top {}: intercept {:.12} slope {:.6e} residual {:.3e}\n",
            k.min(series.len()),
            fit.intercept,
            fit.slope,
            fit.residual
        )),
        Err(e) => out.push_str(&format!("no fit: {e}\n")),
    }
    out
}

/// Numerical settings shared by every point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub lambda_floor: f64,
    /// Re-gauge with belief propagation after every Trotter step.
    pub bp: Option<BpOptions>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { lambda_floor: DEFAULT_FLOOR, bp: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub size: SystemSize,
    pub steps: usize,
    pub thetas: Vec<f64>,
    pub chis: Vec<usize>,
    pub observables: Vec<ObservableSpec>,
    pub engine: EngineConfig,
    /// Worker threads; has no effect on the values produced.
    pub threads: usize,
}

impl SweepPlan {
    /// Hash of everything that determines the values (not the thread count).
    pub fn config_hash(&self) -> String {
        let bp = match self.engine.bp {
            Some(o) => format!("bp tol={:e} iters={}", o.tol, o.max_iters),
            None => "bp off".to_string(),
        };
        let obs: Vec<String> = self.observables.iter().map(ToString::to_string).collect();
        let text = format!(
            "size={}\nsteps={}\nthetas={:?}\nchis={:?}\nobs={}\nfloor={:e}\n{bp}\nengine={ENGINE_VERSION}\n",
            self.size,
            self.steps,
            self.thetas.iter().map(|t| t.to_bits()).collect::<Vec<_>>(),
            self.chis,
            obs.join(";"),
            self.engine.lambda_floor,
        );
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }

    /// Checks everything that can be checked before any evolution runs.
    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() || self.chis.is_empty() || self.observables.is_empty() {
            return invalid("a sweep needs at least one angle, one chi and one observable");
        }
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return invalid("angles must be finite");
        }
        if self.chis.contains(&0) {
            return invalid("chi must be at least 1");
        }
        if !(self.engine.lambda_floor > 0.0 && self.engine.lambda_floor < 1.0) {
            return invalid("lambda floor must lie in (0, 1)");
        }
        if self.engine.bp.is_some() && self.size == SystemSize::Infinite {
            return invalid("belief-propagation gauging needs a finite lattice");
        }
        let num_sites = self.size.graph().num_vertices();
        for o in &self.observables {
            o.resolve(Some(self.size), self.steps, num_sites)?;
        }
        Ok(())
    }
}

fn measure(state: &PepsState, obs: &Observable) -> Result<f64> {
    match obs {
        Observable::SingleZ(v) => state.measure_site(*v, Pauli::Z),
        Observable::AverageZ => state.average_magnetization(),
        Observable::PauliString(p) => state.expect_pauli_exact(p),
        Observable::CliffordWeightN { anchor, back_steps } => state.clifford_weight_measure(*back_steps, *anchor),
    }
}

fn evolve_point(plan: &SweepPlan, theta: f64, chi: usize) -> Result<(PepsState, f64)> {
    let mut state = PepsState::for_size(plan.size, chi)?.with_lambda_floor(plan.engine.lambda_floor)?;
    let mut worst = 0.0f64;
    for _ in 0..plan.steps {
        worst = worst.max(state.trotter_step(theta, crate::circuit::Direction::Forward)?);
        if let Some(opts) = plan.engine.bp {
            state.bp_gauge(opts)?;
        }
    }
    Ok((state, worst))
}

fn run_point(plan: &SweepPlan, hash: &str, theta: f64, chi: usize) -> Vec<ResultRecord> {
    let start = Instant::now();
    let evolved = evolve_point(plan, theta, chi);
    let evolve_time = start.elapsed().as_secs_f64();
    let num_sites = plan.size.graph().num_vertices();
    plan.observables
        .iter()
        .map(|spec| {
            let t0 = Instant::now();
            let mut rec = ResultRecord {
                size: plan.size.to_string(),
                theta_h: theta,
                steps: plan.steps,
                chi,
                observable: spec.to_string(),
                site: None,
                value: None,
                max_trunc_err: 0.0,
                wall_time_s: 0.0,
                config_hash: hash.to_string(),
                engine_version: ENGINE_VERSION.to_string(),
                error: None,
            };
            let outcome = spec.resolve(Some(plan.size), plan.steps, num_sites).and_then(|(obs, id)| {
                rec.observable = id;
                rec.site = obs.site();
                let (state, worst) = evolved.as_ref().map_err(|e| Error::Numeric(e.to_string()))?;
                rec.max_trunc_err = *worst;
                measure(state, &obs)
            });
            match outcome {
                Ok(v) => rec.value = Some(v),
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec.wall_time_s = evolve_time + t0.elapsed().as_secs_f64();
            rec
        })
        .collect()
}

/// Runs every `(θ, χ)` point of the plan. Failed points produce records
/// with `error` set; the sweep carries on. Output order is by θ, then χ,
/// then the plan's observable order.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<ResultRecord>> {
    plan.validate()?;
    let hash = plan.config_hash();
    let mut points: Vec<(f64, usize)> =
        plan.thetas.iter().flat_map(|&t| plan.chis.iter().map(move |&c| (t, c))).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    points.dedup();

    let results: Vec<Mutex<Vec<ResultRecord>>> = points.iter().map(|_| Mutex::new(Vec::new())).collect();
    let next = AtomicUsize::new(0);
    let workers = plan.threads.clamp(1, points.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(theta, chi)) = points.get(i) else { break };
                *results[i].lock().expect("result slot") = run_point(plan, &hash, theta, chi);
            });
        }
    });
    Ok(results.into_iter().flat_map(|m| m.into_inner().expect("result slot")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Fixture;
    use crate::oracle::evolve_exact;

    #[test]
    fn exact_linear_data_is_recovered() {
        let pts: Vec<(usize, f64)> = [8, 16, 32, 64, 128].iter().map(|&c| (c, 0.25 - 3.0 / c as f64)).collect();
        let fit = extrapolate_chi(&ChiSeries::new(pts).unwrap(), 5).unwrap();
        assert!((fit.intercept - 0.25).abs() <= 1e-12);
        assert!((fit.slope + 3.0).abs() <= 1e-10);
        assert!(fit.residual <= 1e-12);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let pts = vec![(4, 0.5), (8, 0.5), (16, 0.5)];
        let fit = extrapolate_chi(&ChiSeries::new(pts).unwrap(), 3).unwrap();
        assert!((fit.intercept - 0.5).abs() <= 1e-15 && fit.slope.abs() <= 1e-12);
    }

    #[test]
    fn fit_window_ignores_small_chi() {
        let chis = [2, 4, 8, 16, 32, 64, 128, 256, 512];
        let pts: Vec<(usize, f64)> = chis
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, if i < 4 { 10.0 * (i as f64 + 1.0) } else { 0.1 + 2.0 / c as f64 }))
            .collect();
        let series = ChiSeries::new(pts.clone()).unwrap();
        let fit = extrapolate_chi(&series, 5).unwrap();
        assert!((fit.intercept - 0.1).abs() <= 1e-12);
        // appending more small-χ points leaves the top-k fit alone
        let fewer = ChiSeries::new(pts[2..].to_vec()).unwrap();
        assert_eq!(extrapolate_chi(&fewer, 5).unwrap(), fit);
        assert!(extrapolate_chi(&series, 1).is_err());
        assert!(extrapolate_chi(&series, 10).is_err());
        assert!(ChiSeries::new(vec![(4, 0.1), (4, 0.2)]).is_err());
    }

    #[test]
    fn error_curves() {
        let a = vec![(0.0, 1.0), (0.5, 0.2)];
        assert_eq!(abs_error_curve(&a, &a).unwrap(), vec![(0.0, 0.0), (0.5, 0.0)]);
        let b: Vec<(f64, f64)> = a.iter().map(|&(t, v)| (t, v + 1e-3)).collect();
        for (_, e) in abs_error_curve(&b, &a).unwrap() {
            assert!((e - 1e-3).abs() <= 1e-15);
        }
        assert!(abs_error_curve(&a, &a[..1]).is_err());
        assert!(abs_error_curve(&a, &[(0.0, 1.0), (0.6, 0.2)]).is_err());
    }

    #[test]
    fn grid_has_both_ends() {
        let g = theta_grid(17);
        assert_eq!(g.len(), 17);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[16], FRAC_PI_2);
    }

    fn small_plan(threads: usize) -> SweepPlan {
        SweepPlan {
            size: SystemSize::Fixture(Fixture::Tree10),
            steps: 3,
            thetas: theta_grid(9),
            chis: vec![4, 32],
            observables: vec!["avg_z".parse().unwrap(), "z@4".parse().unwrap()],
            engine: EngineConfig::default(),
            threads,
        }
    }

    #[test]
    fn sweep_matches_oracle_on_a_tree() {
        let recs = run_sweep(&small_plan(1)).unwrap();
        assert_eq!(recs.len(), 9 * 2 * 2);
        let g = Fixture::Tree10.graph();
        let mut worst = 0.0f64;
        for r in recs.iter().filter(|r| r.chi == 32 && r.observable == "z@4") {
            let sv = evolve_exact(&g, r.theta_h, 3, crate::circuit::Direction::Forward).unwrap();
            worst = worst.max((r.value.unwrap() - sv.expect_z(4)).abs());
        }
        assert!(worst <= 1e-9, "{worst}");
        assert!(recs.windows(2).all(|w| (w[0].theta_h, w[0].chi) <= (w[1].theta_h, w[1].chi)));
    }

    #[test]
    fn sweep_is_deterministic_across_threads() {
        let strip = |mut v: Vec<ResultRecord>| {
            v.iter_mut().for_each(|r| r.wall_time_s = 0.0);
            v
        };
        let a = strip(run_sweep(&small_plan(1)).unwrap());
        let b = strip(run_sweep(&small_plan(3)).unwrap());
        assert_eq!(a, b);
        assert_eq!(small_plan(1).config_hash(), small_plan(4).config_hash());
    }

    #[test]
    fn failing_points_are_recorded() {
        let mut plan = small_plan(1);
        plan.size = SystemSize::Device(crate::lattice::Device::Eagle127);
        plan.steps = 1;
        plan.thetas = vec![0.3];
        plan.chis = vec![2];
        plan.observables = vec!["pauli:Z0,Z1".parse().unwrap()];
        let recs = run_sweep(&plan).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].value.is_none() && recs[0].error.is_some());
        plan.observables = vec!["z@500".parse().unwrap()];
        assert!(run_sweep(&plan).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let recs = run_sweep(&small_plan(1)).unwrap();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "size,theta_h,steps,chi,observable,site,value,max_trunc_err,wall_time_s,config_hash,engine_version,error\n"
        ));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), recs);
        assert_eq!(read_series(buf.as_slice()).unwrap().len(), recs.len());
        let mut js = Vec::new();
        write_json(&recs, &mut js).unwrap();
        let back: Vec<ResultRecord> = serde_json::from_slice(&js).unwrap();
        assert_eq!(back, recs);
    }
}
