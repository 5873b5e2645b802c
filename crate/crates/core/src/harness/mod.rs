//! Deviation experiments: Lebesgue volumes of deviation sets, empirical
//! rates, and the comparison with the Legendre-predicted rate.

mod config;

pub use config::{HorseshoeProbe, RunConfig, Tolerance};

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::horseshoe::{
    build_horseshoe, free_energy_lower_bound, Constraint, ConstraintSet, HorseshoeParams,
};
use crate::maps::{Interval, Observable, SmoothMap};
use crate::numeric::least_squares;
use crate::thermo::{
    legendre_rate, observable_range, scgf_curve, theta_grid, ObservableRange, RateTable, ScgfMethod,
};

/// Fraction of `samples` midpoint-grid points `x` with `S_nφ(x)/n ∈ J`.
pub fn deviation_measure(
    map: &SmoothMap,
    phi: &Observable,
    window: &Interval,
    n: usize,
    samples: usize,
) -> Result<f64> {
    let counts = deviation_counts(map, phi, window, &[n], samples)?;
    Ok(counts[0] as f64 / samples as f64)
}

/// Counts of grid points in the deviation set for each horizon, from one
/// pass of orbits up to the largest horizon.
pub fn deviation_counts(
    map: &SmoothMap,
    phi: &Observable,
    window: &Interval,
    n_list: &[usize],
    samples: usize,
) -> Result<Vec<u64>> {
    if samples == 0 || n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::arg("deviation sets need samples >= 1 and horizons >= 1"));
    }
    let n_max = *n_list.iter().max().unwrap();
    let h = 1.0 / samples as f64;
    let hits = |i: usize| -> Vec<u64> {
        let mut x = (i as f64 + 0.5) * h;
        let mut s = 0.0;
        let mut sums = vec![0.0; n_max + 1];
        for k in 1..=n_max {
            s += phi.eval(x);
            sums[k] = s;
            x = map.apply(x);
        }
        n_list
            .iter()
            .map(|&n| u64::from(window.contains(sums[n] / n as f64)))
            .collect()
    };
    let zero = || vec![0u64; n_list.len()];
    let add = |mut a: Vec<u64>, b: Vec<u64>| {
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        a
    };
    // Integer counts make the reduction order irrelevant.
    Ok((0..samples)
        .into_par_iter()
        .map(hits)
        .reduce(zero, add))
}

/// One horizon of a [`DeviationExperiment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationPoint {
    pub n: usize,
    pub count: u64,
    pub volume: f64,
    /// `log volume`, `−∞` for an empty cell.
    pub log_volume: f64,
}

#[derive(Debug, Clone)]
pub struct DeviationExperiment {
    pub map: SmoothMap,
    pub phi: Observable,
    pub window: Interval,
    pub n_list: Vec<usize>,
    pub samples: usize,
    pub results: Vec<DeviationPoint>,
}

impl DeviationExperiment {
    pub fn run(
        map: &SmoothMap,
        phi: &Observable,
        window: Interval,
        n_list: &[usize],
        samples: usize,
    ) -> Result<Self> {
        let counts = deviation_counts(map, phi, &window, n_list, samples)?;
        let results = n_list
            .iter()
            .zip(counts)
            .map(|(&n, count)| {
                let volume = count as f64 / samples as f64;
                DeviationPoint {
                    n,
                    count,
                    volume,
                    log_volume: volume.ln(),
                }
            })
            .collect();
        Ok(DeviationExperiment {
            map: map.clone(),
            phi: phi.clone(),
            window,
            n_list: n_list.to_vec(),
            samples,
            results,
        })
    }

    pub fn points(&self) -> Vec<(usize, f64)> {
        self.results.iter().map(|p| (p.n, p.log_volume)).collect()
    }

    /// Writes `n,count,volume,log_volume` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_volumes(out, &self.results)
    }
}

fn write_volumes<W: std::io::Write>(out: W, points: &[DeviationPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "count", "volume", "log_volume"])?;
    for p in points {
        w.write_record([
            p.n.to_string(),
            p.count.to_string(),
            p.volume.to_string(),
            p.log_volume.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// Minus the slope of `log volume` against `n`.
    pub rate: f64,
    pub stderr: f64,
    pub used: usize,
    /// Horizons left out because their volume was zero.
    pub excluded: Vec<usize>,
}

/// Least-squares decay rate of `(n, log volume)` points. Non-finite points
/// are excluded and listed.
pub fn rate_fit(points: &[(usize, f64)]) -> Result<RateFit> {
    let (good, bad): (Vec<&(usize, f64)>, Vec<_>) = points.iter().partition(|p| p.1.is_finite());
    if good.len() < 3 {
        return Err(Error::InsufficientData { finite: good.len() });
    }
    let xs: Vec<f64> = good.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = good.iter().map(|p| p.1).collect();
    let (slope, _, stderr) = least_squares(&xs, &ys);
    Ok(RateFit {
        // `+ 0.0` turns −0 into 0 for flat data.
        rate: -slope + 0.0,
        stderr,
        used: good.len(),
        excluded: bad.iter().map(|p| p.0).collect(),
    })
}

/// Legendre prediction from one SCGF estimator.
#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub method: ScgfMethod,
    /// `inf_{t ∈ J} q_φ(t)`, `+∞` for a degenerate window.
    pub inf_rate: f64,
    /// `−inf_J q_φ`, the predicted exponent of the volume.
    pub predicted: f64,
    /// `|empirical rate − inf_J q_φ|`, when both are finite.
    pub discrepancy: Option<f64>,
    pub within_tolerance: bool,
    pub table: RateTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct HorseshoeBound {
    pub q: usize,
    pub branches: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LdpReport {
    pub map: String,
    pub window: Interval,
    pub range: ObservableRange,
    pub volumes: Vec<DeviationPoint>,
    pub empirical: Option<RateFit>,
    /// Why no rate was fitted, if none was.
    pub empirical_error: Option<String>,
    pub predictions: Vec<Prediction>,
    pub degenerate_window: bool,
    pub warnings: Vec<String>,
    pub horseshoe: Option<HorseshoeBound>,
    pub tolerance: Tolerance,
    pub pass: bool,
}

/// Runs the deviation experiment, both SCGF routes and the Legendre
/// transform, and compares the empirical rate with `inf_J q_φ`.
///
/// A window missing `[c_φ, d_φ]` is not an error: the report carries a
/// warning, the prediction is `+∞`, and it passes when the volume reaches 0
/// at the largest horizon.
pub fn ldp_report(
    map: &SmoothMap,
    phi: &Observable,
    window: &Interval,
    config: &RunConfig,
) -> Result<LdpReport> {
    let range = observable_range(map, phi, config.range_period)?;
    let degenerate = window.hi < range.c_lo || window.lo > range.d_hi;
    let mut warnings = Vec::new();
    if degenerate {
        warnings.push(format!(
            "window {window} misses the computed range [{}, {}]: predicted rate is +inf",
            range.c_lo, range.d_hi
        ));
    }

    let exp = DeviationExperiment::run(map, phi, *window, &config.n_list, config.samples)?;
    let (empirical, empirical_error) = match rate_fit(&exp.points()) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(f) = &empirical {
        if !f.excluded.is_empty() {
            warnings.push(format!("zero volume at n = {:?}, excluded from the fit", f.excluded));
        }
    }

    let thetas = theta_grid(config.theta_half_width, config.theta_count);
    let methods = [
        ScgfMethod::GridMc {
            n: config.scgf_n,
            samples: config.scgf_samples,
            jitter: config.seed,
        },
        ScgfMethod::UlamPressure { bins: config.bins },
    ];
    let tol = config.tolerance;
    let mut predictions = Vec::new();
    for method in methods {
        let lambda = scgf_curve(map, phi, &thetas, &method)?;
        let table = legendre_rate(&thetas, &lambda)?.with_range(range.c_lo, range.d_hi);
        let inf_rate = table.inf_over(window);
        let discrepancy = match &empirical {
            Some(f) if inf_rate.is_finite() => Some((f.rate - inf_rate).abs()),
            _ => None,
        };
        let within_tolerance = match discrepancy {
            Some(d) => d <= tol.allowed(inf_rate),
            None => degenerate && exp.results.last().is_some_and(|p| p.count == 0),
        };
        predictions.push(Prediction {
            method,
            inf_rate,
            predicted: -inf_rate,
            discrepancy,
            within_tolerance,
            table,
        });
    }

    let horseshoe = match &config.horseshoe {
        Some(probe) if !degenerate => {
            let cs = ConstraintSet {
                constraints: vec![
                    Constraint::new(phi.clone(), window.lo),
                    Constraint::new(phi.scaled(-1.0), -window.hi),
                ],
                n: probe.n,
            };
            let params = HorseshoeParams {
                rho: probe.rho,
                ..HorseshoeParams::default()
            };
            match build_horseshoe(map, &cs, probe.x0, &params) {
                Ok(hs) => Some(HorseshoeBound {
                    q: hs.q,
                    branches: hs.branches.len(),
                    bound: free_energy_lower_bound(&hs)?,
                }),
                Err(e) => {
                    warnings.push(format!("no horseshoe: {e}"));
                    None
                }
            }
        }
        _ => None,
    };

    let pass = predictions.iter().all(|p| p.within_tolerance);
    Ok(LdpReport {
        map: map.name(),
        window: *window,
        range,
        volumes: exp.results.clone(),
        empirical,
        empirical_error,
        predictions,
        degenerate_window: degenerate,
        warnings,
        horseshoe,
        tolerance: tol,
        pass,
    })
}

impl LdpReport {
    /// Writes `volumes.csv`, `lambda_<method>.csv`, `rate_<method>.csv` and
    /// `report.json` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_volumes(std::fs::File::create(dir.join("volumes.csv"))?, &self.volumes)?;
        for p in &self.predictions {
            let tag = match p.method {
                ScgfMethod::GridMc { .. } => "grid-mc",
                ScgfMethod::UlamPressure { .. } => "ulam",
            };
            p.table
                .write_lambda_csv(std::fs::File::create(dir.join(format!("lambda_{tag}.csv")))?)?;
            p.table
                .write_rate_csv(std::fs::File::create(dir.join(format!("rate_{tag}.csv")))?)?;
        }
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&self.summary())?)?;
        Ok(())
    }

    /// The report without the rate tables, with infinities as strings.
    pub fn summary(&self) -> serde_json::Value {
        let num = |x: f64| {
            if x.is_finite() {
                serde_json::json!(x)
            } else {
                serde_json::json!(x.to_string())
            }
        };
        serde_json::json!({
            "map": self.map,
            "window": [self.window.lo, self.window.hi],
            "range": {"c": self.range.c_lo, "d": self.range.d_hi},
            "volumes": self.volumes.iter().map(|p| serde_json::json!({
                "n": p.n, "count": p.count, "volume": p.volume, "log_volume": num(p.log_volume),
            })).collect::<Vec<_>>(),
            "empirical": self.empirical,
            "empirical_error": self.empirical_error,
            "predictions": self.predictions.iter().map(|p| serde_json::json!({
                "method": p.method,
                "inf_rate": num(p.inf_rate),
                "predicted": num(p.predicted),
                "discrepancy": p.discrepancy,
                "within_tolerance": p.within_tolerance,
                "mean": p.table.mean(),
            })).collect::<Vec<_>>(),
            "degenerate_window": self.degenerate_window,
            "warnings": self.warnings,
            "horseshoe": self.horseshoe,
            "tolerance": self.tolerance,
            "pass": self.pass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_window_has_full_volume() {
        let f = SmoothMap::quadratic(3.8).unwrap();
        let v = deviation_measure(&f, &Observable::Identity, &Interval::UNIT, 7, 1000).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn one_step_volume_is_lebesgue() {
        let f = SmoothMap::chebyshev();
        let j = Interval::new(0.9, 1.0).unwrap();
        let v = deviation_measure(&f, &Observable::Identity, &j, 1, 100_000).unwrap();
        assert!((v - 0.1).abs() <= 1e-5);
    }

    #[test]
    fn lower_tail_decays() {
        let f = SmoothMap::chebyshev();
        let j = Interval::new(0.0, 0.35).unwrap();
        let c = deviation_counts(&f, &Observable::Identity, &j, &[10, 20, 30], 1_000_000).unwrap();
        assert!(c[0] > 0);
        assert!(c[0] > c[1] && c[1] > c[2], "{c:?}");
    }

    #[test]
    fn fits() {
        let r = rate_fit(&[(10, -3.0), (20, -6.0), (30, -9.0)]).unwrap();
        assert!((r.rate - 0.3).abs() < 1e-15 && r.stderr.abs() < 1e-15);
        let r = rate_fit(&[(10, 0.0), (20, 0.0), (30, 0.0)]).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(matches!(
            rate_fit(&[(10, -1.0), (20, -2.0)]),
            Err(Error::InsufficientData { finite: 2 })
        ));
        let r = rate_fit(&[(10, -1.0), (20, -2.0), (30, -3.0), (40, f64::NEG_INFINITY)]).unwrap();
        assert_eq!(r.excluded, vec![40]);
    }
}
