//! Binary detection metrics with fake as the positive class.
//!
//! Scores handed to [`confusion`] are discriminator outputs (probability of *real*); a sample is
//! predicted fake iff its score is strictly below the threshold. ROC and AUC take *fake-scores*
//! (`1 - D(x)`), so larger means more suspicious. Tied scores are handled as groups: a whole tie
//! group enters the ROC sweep at once and contributes half credit to the AUC, which makes the
//! trapezoid area equal to the Mann–Whitney statistic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{FakeKind, Label};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Counts the four cells at `threshold`. Scores equal to the threshold count as predicted real.
pub fn confusion(scores: &[f64], labels: &[Label], threshold: f64) -> Result<ConfusionMatrix> {
    if scores.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&s, &l) in scores.iter().zip(labels) {
        let predicted_fake = s < threshold;
        match (predicted_fake, l) {
            (true, Label::Fake) => cm.tp += 1,
            (true, Label::Real) => cm.fp += 1,
            (false, Label::Fake) => cm.fn_ += 1,
            (false, Label::Real) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Which ratios had a zero denominator and were reported as 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degenerate {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: Degenerate,
}

/// Harmonic mean of precision and recall; `None` when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let denom = precision + recall;
    (denom > 0.0).then(|| 2.0 * precision * recall / denom)
}

pub fn ratios(cm: &ConfusionMatrix) -> Result<Ratios> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Domain("confusion matrix is empty".into()));
    }
    let mut degenerate = Degenerate::default();
    let frac = |num: u64, den: u64, flag: &mut bool| {
        if den == 0 {
            *flag = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = frac(cm.tp, cm.tp + cm.fp, &mut degenerate.precision);
    let recall = frac(cm.tp, cm.tp + cm.fn_, &mut degenerate.recall);
    let f1 = f1_score(precision, recall).unwrap_or_else(|| {
        degenerate.f1 = true;
        0.0
    });
    Ok(Ratios {
        accuracy: (cm.tp + cm.tn) as f64 / total as f64,
        precision,
        recall,
        f1,
        degenerate,
    })
}

/// ROC curve as `(fpr, tpr)` points from the threshold sweep over distinct fake-scores in
/// descending order, starting at `(0, 0)` and ending at `(1, 1)`.
pub fn roc_curve(fake_scores: &[f64], labels: &[Label]) -> Result<Vec<(f64, f64)>> {
    if fake_scores.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} scores but {} labels",
            fake_scores.len(),
            labels.len()
        )));
    }
    if fake_scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Argument("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l == Label::Fake).count();
    let neg = labels.len() - pos;
    if pos == 0 {
        return Err(Error::Domain("ROC needs at least one fake (positive) sample".into()));
    }
    if neg == 0 {
        return Err(Error::Domain("ROC needs at least one real (negative) sample".into()));
    }
    let mut order: Vec<usize> = (0..fake_scores.len()).collect();
    order.sort_by(|&a, &b| fake_scores[b].total_cmp(&fake_scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let s = fake_scores[order[k]];
        while k < order.len() && fake_scores[order[k]] == s {
            match labels[order[k]] {
                Label::Fake => tp += 1,
                Label::Real => fp += 1,
            }
            k += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(points)
}

/// Trapezoidal area under a ROC curve. Points must be sorted by non-decreasing fpr.
pub fn auc(roc_points: &[(f64, f64)]) -> Result<f64> {
    if roc_points.len() < 2 {
        return Err(Error::Argument("a ROC curve needs at least two points".into()));
    }
    let mut area = 0.0;
    for pair in roc_points.windows(2) {
        let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
        if x1 < x0 {
            return Err(Error::Argument(format!(
                "ROC points are not sorted by fpr ({x0} then {x1})"
            )));
        }
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    Ok(area)
}

/// Table-2 style evaluation summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "Accuracy")]
    pub accuracy: f64,
    #[serde(rename = "Precision")]
    pub precision: f64,
    #[serde(rename = "Recall")]
    pub recall: f64,
    #[serde(rename = "F1-Score")]
    pub f1: f64,
    #[serde(rename = "AUC")]
    pub auc: f64,
    pub threshold: f64,
    pub samples: u64,
    pub confusion_matrix: ConfusionMatrix,
    pub degenerate: Degenerate,
    /// Recall measured separately for each source of fakes.
    pub recall_by_fake_kind: BTreeMap<FakeKind, f64>,
    pub roc_points: Vec<(f64, f64)>,
}

impl MetricsReport {
    /// Builds the report from real-probability scores. `kinds` tags each fake's origin.
    /// `extra` holds additional fakes (score, kind) that only enter the per-kind recall.
    pub fn from_scores(
        scores: &[f64],
        labels: &[Label],
        kinds: &[FakeKind],
        threshold: f64,
        extra: &[(f64, FakeKind)],
    ) -> Result<Self> {
        if kinds.len() != labels.len() {
            return Err(Error::Argument("one fake kind per sample required".into()));
        }
        let cm = confusion(scores, labels, threshold)?;
        let r = ratios(&cm)?;
        let fake_scores: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
        let roc_points = roc_curve(&fake_scores, labels)?;
        let area = auc(&roc_points)?;

        let mut hits: BTreeMap<FakeKind, (u64, u64)> = BTreeMap::new();
        let fakes = scores
            .iter()
            .zip(labels)
            .zip(kinds)
            .filter(|((_, &l), _)| l == Label::Fake)
            .map(|((&s, _), &k)| (s, k))
            .chain(extra.iter().copied());
        for (s, k) in fakes {
            let e = hits.entry(k).or_default();
            e.1 += 1;
            if s < threshold {
                e.0 += 1;
            }
        }
        let recall_by_fake_kind = hits
            .into_iter()
            .map(|(k, (hit, n))| (k, hit as f64 / n as f64))
            .collect();

        Ok(MetricsReport {
            accuracy: r.accuracy,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            auc: area,
            threshold,
            samples: cm.total(),
            confusion_matrix: cm,
            degenerate: r.degenerate,
            recall_by_fake_kind,
            roc_points,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One `metric,value` row per scalar metric.
    pub fn to_csv(&self) -> String {
        let cm = &self.confusion_matrix;
        let mut rows = vec![
            ("Accuracy".to_string(), self.accuracy.to_string()),
            ("Precision".to_string(), self.precision.to_string()),
            ("Recall".to_string(), self.recall.to_string()),
            ("F1-Score".to_string(), self.f1.to_string()),
            ("AUC".to_string(), self.auc.to_string()),
            ("threshold".to_string(), self.threshold.to_string()),
            ("samples".to_string(), self.samples.to_string()),
            ("tp".to_string(), cm.tp.to_string()),
            ("fp".to_string(), cm.fp.to_string()),
            ("fn".to_string(), cm.fn_.to_string()),
            ("tn".to_string(), cm.tn.to_string()),
        ];
        for (kind, r) in &self.recall_by_fake_kind {
            let name = serde_json::to_value(kind).expect("kind serializes");
            rows.push((format!("recall_{}", name.as_str().unwrap_or("?")), r.to_string()));
        }
        let mut out = String::from("metric,value\n");
        for (k, v) in rows {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }

    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (x, y) in &self.roc_points {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }

    /// Checks the report's structural invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let ratios = [self.accuracy, self.precision, self.recall, self.f1, self.auc];
        if !ratios.iter().all(|&v| in_unit(v)) {
            return Err(Error::Data(format!("ratio outside [0, 1]: {ratios:?}")));
        }
        if self.confusion_matrix.total() != self.samples {
            return Err(Error::Data("confusion counts do not sum to the sample count".into()));
        }
        let first = self.roc_points.first().copied();
        let last = self.roc_points.last().copied();
        if first != Some((0.0, 0.0)) || last != Some((1.0, 1.0)) {
            return Err(Error::Data("ROC curve must start at (0,0) and end at (1,1)".into()));
        }
        for w in self.roc_points.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::Data("ROC curve is not monotone".into()));
            }
        }
        if !self.recall_by_fake_kind.values().all(|&v| in_unit(v)) {
            return Err(Error::Data("per-kind recall outside [0, 1]".into()));
        }
        Ok(())
    }

    /// Plain-text summary in the layout of a results table.
    pub fn summary(&self) -> String {
        let cm = &self.confusion_matrix;
        let mut s = format!(
            "Metric     Value\n\
             Accuracy   {:.2}%\n\
             Precision  {:.2}%\n\
             Recall     {:.2}%\n\
             F1-Score   {:.2}%\n\
             AUC        {:.2}%\n\
             \n\
             Confusion matrix (positive = fake, threshold {}):\n\
             \x20               pred fake  pred real\n\
             \x20 actual fake   {:>9}  {:>9}\n\
             \x20 actual real   {:>9}  {:>9}\n",
            100.0 * self.accuracy,
            100.0 * self.precision,
            100.0 * self.recall,
            100.0 * self.f1,
            100.0 * self.auc,
            self.threshold,
            cm.tp,
            cm.fn_,
            cm.fp,
            cm.tn,
        );
        for (kind, r) in &self.recall_by_fake_kind {
            s.push_str(&format!("Recall on {kind:?} fakes: {:.2}%\n", 100.0 * r));
        }
        s
    }
}
