use alloc::string::String;
use alloc::vec::Vec;

/// One metric tracked over snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub metric: String,
    /// `(t, value)` for every snapshot where the metric is defined.
    pub values: Vec<(usize, f64)>,
}

impl MetricSeries {
    pub fn new(metric: impl Into<String>) -> Self {
        Self {
            metric: metric.into(),
            values: Vec::new(),
        }
    }

    /// Arithmetic mean of the values; `None` when there are none.
    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().map(|v| v.1).sum::<f64>() / self.values.len() as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub task: String,
    pub series: Vec<MetricSeries>,
    /// Free-form configuration summary carried into output headers.
    pub echo: String,
}

impl MetricReport {
    pub fn new(task: impl Into<String>, echo: impl Into<String>) -> Self {
        Self {
            task: task.into(),
            series: Vec::new(),
            echo: echo.into(),
        }
    }

    pub fn series(&self, metric: &str) -> Option<&MetricSeries> {
        self.series.iter().find(|s| s.metric == metric)
    }

    /// Mean of `metric`, if the series exists and is nonempty.
    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.series(metric).and_then(MetricSeries::mean)
    }
}
