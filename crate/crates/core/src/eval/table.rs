use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One cell of a long-format results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub dataset: String,
    pub model: String,
    pub scenario: String,
    pub level: Option<f64>,
    pub seed: Option<u64>,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricTable {
    pub records: Vec<MetricRecord>,
}

impl MetricTable {
    pub fn new() -> Self {
        Self::default()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        dataset: &str,
        model: &str,
        scenario: &str,
        level: Option<f64>,
        seed: Option<u64>,
        metric: &str,
        value: f64,
    ) {
        self.records.push(MetricRecord {
            dataset: dataset.to_owned(),
            model: model.to_owned(),
            scenario: scenario.to_owned(),
            level,
            seed,
            metric: metric.to_owned(),
            value,
        });
    }

    pub fn extend(&mut self, other: MetricTable) {
        self.records.extend(other.records);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Values of `metric` for `model`, in insertion order.
    pub fn values(&self, model: &str, metric: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.model == model && r.metric == metric)
            .map(|r| r.value)
            .collect()
    }

    /// Columns `dataset,model,scenario,level,seed,metric,value`; absent
    /// level or seed are left empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "dataset", "model", "scenario", "level", "seed", "metric", "value",
        ])?;
        for r in &self.records {
            out.serialize((
                &r.dataset,
                &r.model,
                &r.scenario,
                r.level,
                r.seed,
                &r.metric,
                r.value,
            ))?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = MetricTable::new();
        t.push(
            "xaxis",
            "EIF",
            "II",
            Some(0.02),
            Some(3),
            "avg_precision",
            0.5,
        );
        t.push("xaxis", "EIF", "II", None, None, "ndcg", 1.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "dataset,model,scenario,level,seed,metric,value\n\
             xaxis,EIF,II,0.02,3,avg_precision,0.5\n\
             xaxis,EIF,II,,,ndcg,1.0\n"
        );
        assert_eq!(t.values("EIF", "ndcg"), vec![1.0]);
    }
}
