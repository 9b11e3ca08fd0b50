//! Result files written by the experiments.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use scalesim_core::arima::Prediction;
use scalesim_core::{ArimaModel, DemandSeries, MetricsReport, SimulationRecord};
use serde::Serialize;

use crate::error::{Error, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const FORECAST_FILE: &str = "forecast.csv";
pub const MODEL_FILE: &str = "model.json";
pub const COMPARE_FILE: &str = "compare.csv";
pub const SERIES_FILE: &str = "series.csv";

pub const RECORDS_HEADER: [&str; 6] =
    ["timestamp", "demand_cores", "allocated_cores", "utilization_pct", "decision_cores", "predicted_demand"];
pub const FORECAST_HEADER: [&str; 3] = ["index", "timestamp", "predicted_demand"];

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish<W: Write>(w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_records<W: Write>(records: &[SimulationRecord], sink: W) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        w.write_record([
            r.timestamp.to_string(),
            r.demand_cores.to_string(),
            r.allocated_cores.to_string(),
            r.utilization.to_string(),
            r.decision_cores.to_string(),
            opt(r.predicted_demand),
        ])?;
    }
    Ok(w)
}

pub fn write_records_file(records: &[SimulationRecord], path: &Path) -> Result<()> {
    let w = write_records(records, create(path)?)?;
    finish(w, path)
}

/// `index` is the 0-based series position of the forecast target.
pub fn write_forecast_file(series: &DemandSeries, predictions: &[Prediction], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(FORECAST_HEADER)?;
    for p in predictions {
        w.write_record([p.target.to_string(), series.timestamp(p.target).to_string(), p.value.to_string()])?;
    }
    finish(w, path)
}

#[derive(Debug, Serialize)]
pub struct ModelDump<'a> {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub ar: &'a [f64],
    pub ma: &'a [f64],
    /// `null` for models fitted without an intercept.
    pub intercept: Option<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aicc: f64,
}

impl<'a> From<&'a ArimaModel> for ModelDump<'a> {
    fn from(m: &'a ArimaModel) -> Self {
        ModelDump {
            p: m.order.p,
            d: m.order.d,
            q: m.order.q,
            ar: &m.ar,
            ma: &m.ma,
            intercept: m.has_intercept.then_some(m.intercept),
            sigma2: m.sigma2,
            loglik: m.loglik,
            aicc: m.aicc,
        }
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_model_file(model: &ArimaModel, path: &Path) -> Result<()> {
    write_json(&ModelDump::from(model), path)
}

#[derive(Debug, Serialize)]
pub struct MetricsDump {
    pub r2: Option<f64>,
    pub mae: Option<f64>,
    pub mape: Option<f64>,
    pub adi: f64,
    pub cov_allocated: f64,
    pub n_points: usize,
}

impl From<&MetricsReport> for MetricsDump {
    fn from(r: &MetricsReport) -> Self {
        MetricsDump { r2: r.r2, mae: r.mae, mape: r.mape, adi: r.adi, cov_allocated: r.cov_allocated, n_points: r.n_points }
    }
}

pub fn write_metrics_file(report: &MetricsReport, path: &Path) -> Result<()> {
    write_json(&MetricsDump::from(report), path)
}

/// Side-by-side summary of the two policies.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub proactive: MetricsReport,
    pub reactive: MetricsReport,
}

impl Comparison {
    /// Proactive ADI over reactive ADI; infinite when the reactive run never
    /// left the band.
    pub fn adi_ratio(&self) -> f64 {
        self.proactive.adi / self.reactive.adi
    }

    fn rows(&self) -> Vec<(&'static str, String, String)> {
        let (p, r) = (&self.proactive, &self.reactive);
        vec![
            ("adi", p.adi.to_string(), r.adi.to_string()),
            ("cov_allocated", p.cov_allocated.to_string(), r.cov_allocated.to_string()),
            ("r2", opt(p.r2), opt(r.r2)),
            ("mae", opt(p.mae), opt(r.mae)),
            ("mape", opt(p.mape), opt(r.mape)),
            ("n_points", p.n_points.to_string(), r.n_points.to_string()),
        ]
    }

    /// `metric,proactive,reactive` rows followed by `adi_ratio`.
    pub fn write<W: Write>(&self, sink: W) -> Result<csv::Writer<W>> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["metric", "proactive", "reactive"])?;
        for (name, p, r) in self.rows() {
            w.write_record([name, &p, &r])?;
        }
        w.write_record(["adi_ratio", &self.adi_ratio().to_string(), ""])?;
        Ok(w)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let w = self.write(create(path)?)?;
        finish(w, path)
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let fmt = |s: &str| if s.is_empty() { "-".to_string() } else { s.parse::<f64>().map(|v| format!("{v:.2}")).unwrap_or_default() };
        let mut out = format!("{:<14} {:>12} {:>12}\n", "metric", "proactive", "reactive");
        for (name, p, r) in self.rows() {
            out.push_str(&format!("{name:<14} {:>12} {:>12}\n", fmt(&p), fmt(&r)));
        }
        out.push_str(&format!("{:<14} {:>12.3}\n", "adi_ratio", self.adi_ratio()));
        out
    }
}

pub const SERIES_HEADER: [&str; 11] = [
    "timestamp",
    "demand_cores",
    "predicted_demand",
    "allocated_proactive",
    "allocated_reactive",
    "utilization_proactive",
    "utilization_reactive",
    "decision_proactive",
    "decision_reactive",
    "lower_bound",
    "upper_bound",
];

/// Aligned per-step series of both runs, for plotting.
pub fn write_series_file(
    proactive: &[SimulationRecord],
    reactive: &[SimulationRecord],
    bounds: (f64, f64),
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(SERIES_HEADER)?;
    for (p, r) in proactive.iter().zip(reactive) {
        debug_assert_eq!(p.timestamp, r.timestamp);
        w.write_record([
            p.timestamp.to_string(),
            p.demand_cores.to_string(),
            opt(p.predicted_demand),
            p.allocated_cores.to_string(),
            r.allocated_cores.to_string(),
            p.utilization.to_string(),
            r.utilization.to_string(),
            p.decision_cores.to_string(),
            r.decision_cores.to_string(),
            bounds.0.to_string(),
            bounds.1.to_string(),
        ])?;
    }
    finish(w, path)
}
