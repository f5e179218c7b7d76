//! Composite ESE score from per-farmer metric records.
//!
//! Each metric is normalized to `[0, 1]` across the cohort (flipped for
//! lower-is-better metrics). A pillar's weight is its share of the schema's
//! metric count, split evenly across its metrics unless the schema gives
//! explicit within-pillar shares. The composite score is the weighted sum
//! scaled to `[0, 100]`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on weight sums, both for derived and for explicit weights.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;
/// Tolerance on user-supplied within-pillar shares.
const SHARE_TOLERANCE: f64 = 1e-9;
/// Standard scores are clipped to `[-Z_CLIP, Z_CLIP]` before mapping to `[0, 1]`.
pub const Z_CLIP: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Pillar {
    Environmental,
    Social,
    Economic,
}

impl Pillar {
    pub const ALL: [Pillar; 3] = [Pillar::Environmental, Pillar::Social, Pillar::Economic];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MetricKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Normalization {
    #[default]
    MinMax,
    ZScoreClipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CategoryWeighting {
    #[default]
    CountBased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDef {
    pub id: String,
    pub pillar: Pillar,
    pub direction: Direction,
    pub kind: MetricKind,
    /// Optional share of the pillar's weight. Either every metric of a
    /// pillar sets it (summing to 1) or none does.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    /// Optional reference range pinning min-max normalization to an
    /// external population. Values outside are clamped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl MetricDef {
    pub fn new(id: impl Into<String>, pillar: Pillar, direction: Direction, kind: MetricKind) -> Self {
        MetricDef { id: id.into(), pillar, direction, kind, weight: None, min: None, max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub farmer_id: String,
    pub metric_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringScheme {
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub category_weighting: CategoryWeighting,
    #[serde(rename = "metric", default)]
    pub metrics: Vec<MetricDef>,
}

impl ScoringScheme {
    pub fn new(metrics: Vec<MetricDef>, normalization: Normalization) -> Result<Self> {
        let scheme = ScoringScheme { normalization, category_weighting: CategoryWeighting::CountBased, metrics };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scheme: ScoringScheme =
            toml::from_str(text).map_err(|e| Error::config(format!("invalid schema: {e}")))?;
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read schema {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::config("schema defines no metrics"));
        }
        let mut seen = BTreeSet::new();
        for m in &self.metrics {
            if m.id.trim().is_empty() {
                return Err(Error::config("metric id must not be empty"));
            }
            if !seen.insert(m.id.as_str()) {
                return Err(Error::config(format!("duplicate metric id `{}`", m.id)));
            }
            match (m.min, m.max) {
                (None, None) => {}
                (Some(lo), Some(hi)) if lo.is_finite() && hi.is_finite() && lo < hi => {}
                _ => {
                    return Err(Error::config(format!(
                        "metric `{}`: reference range needs finite min < max",
                        m.id
                    )))
                }
            }
            if let Some(w) = m.weight {
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::config(format!("metric `{}`: weight must be >= 0", m.id)));
                }
            }
        }
        for pillar in Pillar::ALL {
            let members: Vec<&MetricDef> = self.metrics.iter().filter(|m| m.pillar == pillar).collect();
            let with_weight = members.iter().filter(|m| m.weight.is_some()).count();
            if with_weight == 0 {
                continue;
            }
            if with_weight != members.len() {
                return Err(Error::config(format!(
                    "{pillar:?}: weight overrides must be given for every metric of the pillar or none"
                )));
            }
            let total: f64 = members.iter().filter_map(|m| m.weight).sum();
            if (total - 1.0).abs() > SHARE_TOLERANCE {
                return Err(Error::config(format!("{pillar:?}: weight overrides sum to {total}, not 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryWeights {
    pub environmental: f64,
    pub social: f64,
    pub economic: f64,
}

impl CategoryWeights {
    pub fn get(&self, pillar: Pillar) -> f64 {
        match pillar {
            Pillar::Environmental => self.environmental,
            Pillar::Social => self.social,
            Pillar::Economic => self.economic,
        }
    }

    pub fn total(&self) -> f64 {
        self.environmental + self.social + self.economic
    }
}

/// Pillar weights proportional to the number of metrics in each pillar.
pub fn category_weights(scheme: &ScoringScheme) -> Result<CategoryWeights> {
    if scheme.metrics.is_empty() {
        return Err(Error::config("schema defines no metrics"));
    }
    let total = scheme.metrics.len() as f64;
    let count = |p: Pillar| scheme.metrics.iter().filter(|m| m.pillar == p).count() as f64;
    Ok(CategoryWeights {
        environmental: count(Pillar::Environmental) / total,
        social: count(Pillar::Social) / total,
        economic: count(Pillar::Economic) / total,
    })
}

/// Effective weight of every metric, in schema order.
pub fn metric_weights(scheme: &ScoringScheme) -> Result<Vec<(String, f64)>> {
    scheme.validate()?;
    let pillars = category_weights(scheme)?;
    let count = |p: Pillar| scheme.metrics.iter().filter(|m| m.pillar == p).count() as f64;
    Ok(scheme
        .metrics
        .iter()
        .map(|m| {
            let share = m.weight.unwrap_or(1.0 / count(m.pillar));
            (m.id.clone(), pillars.get(m.pillar) * share)
        })
        .collect())
}

/// Normalizes a cohort of raw values for one metric into `[0, 1]`, where 1
/// is best. A cohort without spread maps to 0.5 throughout.
pub fn normalize(values: &[f64], def: &MetricDef, method: Normalization) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::data(format!("metric `{}`: empty cohort", def.id)));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::data(format!(
            "metric `{}`: non-finite value {} at cohort position {i}",
            def.id, values[i]
        )));
    }
    let scaled: Vec<f64> = match (def.min, def.max, method) {
        (Some(lo), Some(hi), _) => values.iter().map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).collect(),
        (_, _, Normalization::MinMax) => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi == lo {
                return Ok(vec![0.5; values.len()]);
            }
            values.iter().map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).collect()
        }
        (_, _, Normalization::ZScoreClipped) => {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            if sd == 0.0 {
                return Ok(vec![0.5; values.len()]);
            }
            values
                .iter()
                .map(|v| (((v - mean) / sd).clamp(-Z_CLIP, Z_CLIP) + Z_CLIP) / (2.0 * Z_CLIP))
                .collect()
        }
    };
    Ok(match def.direction {
        Direction::HigherBetter => scaled,
        Direction::LowerBetter => scaled.into_iter().map(|x| 1.0 - x).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmerScore {
    pub farmer_id: String,
    pub score: f64,
}

/// Composite score per farmer, sorted by farmer id.
pub fn composite_score(records: &[MetricRecord], scheme: &ScoringScheme) -> Result<Vec<FarmerScore>> {
    scheme.validate()?;
    if records.is_empty() {
        return Err(Error::config("no metric records supplied"));
    }
    let index: HashMap<&str, usize> = scheme.metrics.iter().enumerate().map(|(i, m)| (m.id.as_str(), i)).collect();

    // value table keyed by farmer, one slot per schema metric
    let mut table: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for r in records {
        let Some(&slot) = index.get(r.metric_id.as_str()) else {
            return Err(Error::data(format!(
                "farmer `{}`: metric `{}` is not in the schema",
                r.farmer_id, r.metric_id
            )));
        };
        let def = &scheme.metrics[slot];
        if !r.value.is_finite() {
            return Err(Error::data(format!(
                "farmer `{}`, metric `{}`: non-finite value {}",
                r.farmer_id, r.metric_id, r.value
            )));
        }
        if def.kind == MetricKind::Binary && r.value != 0.0 && r.value != 1.0 {
            return Err(Error::data(format!(
                "farmer `{}`, metric `{}`: binary metric takes 0 or 1, got {}",
                r.farmer_id, r.metric_id, r.value
            )));
        }
        let row = table.entry(r.farmer_id.as_str()).or_insert_with(|| vec![None; scheme.metrics.len()]);
        if row[slot].replace(r.value).is_some() {
            return Err(Error::data(format!(
                "farmer `{}`: duplicate value for metric `{}`",
                r.farmer_id, r.metric_id
            )));
        }
    }

    let gaps: Vec<String> = table
        .iter()
        .flat_map(|(farmer, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| v.is_none())
                .map(move |(i, _)| format!("{farmer}/{}", scheme.metrics[i].id))
        })
        .collect();
    if !gaps.is_empty() {
        return Err(Error::data(format!("missing metric values: {}", gaps.join(", "))));
    }

    let farmers: Vec<&str> = table.keys().copied().collect();
    let weights = metric_weights(scheme)?;
    let mut totals = vec![0.0_f64; farmers.len()];
    for (slot, def) in scheme.metrics.iter().enumerate() {
        let column: Vec<f64> = farmers.iter().map(|f| table[f][slot].expect("gaps checked")).collect();
        let normalized = normalize(&column, def, scheme.normalization)?;
        let weight = weights[slot].1;
        for (total, x) in totals.iter_mut().zip(normalized) {
            *total += weight * x;
        }
    }
    Ok(farmers
        .into_iter()
        .zip(totals)
        .map(|(f, t)| FarmerScore { farmer_id: f.to_string(), score: (100.0 * t).clamp(0.0, 100.0) })
        .collect())
}

#[derive(Debug, Deserialize)]
struct MetricRow {
    farmer_id: String,
    metric_id: String,
    value: String,
}

/// Reads `farmer_id,metric_id,value` records. Errors name the line.
pub fn read_metrics_csv<R: Read>(reader: R, source: &str) -> Result<Vec<MetricRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::data(format!("{source}: cannot read header: {e}")))?
        .clone();
    let expected = ["farmer_id", "metric_id", "value"];
    if headers.len() == 0 || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::config(format!("{source}: metrics file is empty")));
    }
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::data(format!(
            "{source}:1: expected header `farmer_id,metric_id,value`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::data(format!("{source}:{line}: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: MetricRow = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::data(format!("{source}:{line}: {e}")))?;
        let value: f64 = row
            .value
            .parse()
            .map_err(|_| Error::data(format!("{source}:{line}: value `{}` is not a number", row.value)))?;
        if !value.is_finite() {
            return Err(Error::data(format!("{source}:{line}: value `{}` is not finite", row.value)));
        }
        if row.farmer_id.is_empty() || row.metric_id.is_empty() {
            return Err(Error::data(format!("{source}:{line}: empty farmer_id or metric_id")));
        }
        out.push(MetricRecord { farmer_id: row.farmer_id, metric_id: row.metric_id, value });
    }
    if out.is_empty() {
        return Err(Error::config(format!("{source}: metrics file has no records")));
    }
    Ok(out)
}

/// Writes `farmer_id,score` with four decimals.
pub fn write_scores_csv<W: Write>(writer: W, scores: &[FarmerScore]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::data(format!("cannot write scores: {e}"));
    wtr.write_record(["farmer_id", "score"]).map_err(io)?;
    for s in scores {
        wtr.write_record([s.farmer_id.as_str(), &format!("{:.4}", s.score)]).map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::data(format!("cannot write scores: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn def(dir: Direction) -> MetricDef {
        MetricDef::new("m", Pillar::Economic, dir, MetricKind::Continuous)
    }

    fn rec(f: &str, m: &str, v: f64) -> MetricRecord {
        MetricRecord { farmer_id: f.into(), metric_id: m.into(), value: v }
    }

    #[test]
    fn min_max_examples() {
        let hi = normalize(&[10.0, 20.0, 30.0], &def(Direction::HigherBetter), Normalization::MinMax).unwrap();
        assert_eq!(hi, vec![0.0, 0.5, 1.0]);
        let lo = normalize(&[10.0, 20.0, 30.0], &def(Direction::LowerBetter), Normalization::MinMax).unwrap();
        assert_eq!(lo, vec![1.0, 0.5, 0.0]);
        let flat = normalize(&[7.0, 7.0, 7.0], &def(Direction::HigherBetter), Normalization::MinMax).unwrap();
        assert_eq!(flat, vec![0.5; 3]);
        let flat = normalize(&[7.0, 7.0], &def(Direction::LowerBetter), Normalization::ZScoreClipped).unwrap();
        assert_eq!(flat, vec![0.5; 2]);
    }

    #[test]
    fn z_score_clipping() {
        let mut values = vec![0.0; 99];
        values.push(1000.0);
        let z = normalize(&values, &def(Direction::HigherBetter), Normalization::ZScoreClipped).unwrap();
        // The outlier sits ~9.9 standard deviations out and is clipped.
        assert_eq!(z[99], 1.0);
        assert!(z[0] > 0.0 && z[0] < 0.5);
        let sym = normalize(&[1.0, 3.0], &def(Direction::HigherBetter), Normalization::ZScoreClipped).unwrap();
        assert_relative_eq!(sym[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(sym[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn pinned_reference_range() {
        let mut d = def(Direction::HigherBetter);
        d.min = Some(0.0);
        d.max = Some(200.0);
        let v = normalize(&[50.0, 250.0, -5.0], &d, Normalization::MinMax).unwrap();
        assert_eq!(v, vec![0.25, 1.0, 0.0]);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert!(normalize(&[], &def(Direction::HigherBetter), Normalization::MinMax).is_err());
        let err = normalize(&[1.0, f64::NAN], &def(Direction::HigherBetter), Normalization::MinMax).unwrap_err();
        assert!(matches!(err, Error::Data(msg) if msg.contains("position 1")));
    }

    #[test]
    fn category_weight_examples() {
        let one = ScoringScheme::new(
            vec![MetricDef::new("a", Pillar::Social, Direction::HigherBetter, MetricKind::Continuous)],
            Normalization::MinMax,
        )
        .unwrap();
        let w = category_weights(&one).unwrap();
        assert_eq!((w.environmental, w.social, w.economic), (0.0, 1.0, 0.0));

        let even = ScoringScheme::new(
            Pillar::ALL
                .iter()
                .enumerate()
                .map(|(i, &p)| MetricDef::new(format!("m{i}"), p, Direction::HigherBetter, MetricKind::Continuous))
                .collect(),
            Normalization::MinMax,
        )
        .unwrap();
        let w = category_weights(&even).unwrap();
        for p in Pillar::ALL {
            assert_relative_eq!(w.get(p), 1.0 / 3.0, epsilon = 1e-15);
        }

        let empty = ScoringScheme { normalization: Normalization::MinMax, category_weighting: CategoryWeighting::CountBased, metrics: vec![] };
        assert!(matches!(category_weights(&empty), Err(Error::Config(_))));
    }

    #[test]
    fn weight_overrides() {
        let mut a = MetricDef::new("a", Pillar::Social, Direction::HigherBetter, MetricKind::Continuous);
        let mut b = MetricDef::new("b", Pillar::Social, Direction::HigherBetter, MetricKind::Continuous);
        let c = MetricDef::new("c", Pillar::Economic, Direction::HigherBetter, MetricKind::Continuous);
        a.weight = Some(0.75);
        b.weight = Some(0.25);
        let scheme = ScoringScheme::new(vec![a.clone(), b.clone(), c.clone()], Normalization::MinMax).unwrap();
        let w = metric_weights(&scheme).unwrap();
        assert_relative_eq!(w[0].1, 2.0 / 3.0 * 0.75, epsilon = 1e-15);
        assert_relative_eq!(w[1].1, 2.0 / 3.0 * 0.25, epsilon = 1e-15);
        assert_relative_eq!(w[2].1, 1.0 / 3.0, epsilon = 1e-15);

        b.weight = None;
        assert!(ScoringScheme::new(vec![a.clone(), b.clone(), c.clone()], Normalization::MinMax).is_err());
        b.weight = Some(0.5);
        assert!(ScoringScheme::new(vec![a, b, c], Normalization::MinMax).is_err());
    }

    #[test]
    fn schema_rejects_duplicates() {
        let m = MetricDef::new("a", Pillar::Social, Direction::HigherBetter, MetricKind::Continuous);
        assert!(ScoringScheme::new(vec![m.clone(), m], Normalization::MinMax).is_err());
    }

    #[test]
    fn composite_examples() {
        let scheme = ScoringScheme::new(
            vec![MetricDef::new("yield", Pillar::Economic, Direction::HigherBetter, MetricKind::Continuous)],
            Normalization::MinMax,
        )
        .unwrap();
        let scores = composite_score(&[rec("f1", "yield", 10.0), rec("f2", "yield", 30.0)], &scheme).unwrap();
        assert_eq!(scores[0], FarmerScore { farmer_id: "f1".into(), score: 0.0 });
        assert_eq!(scores[1], FarmerScore { farmer_id: "f2".into(), score: 100.0 });

        let scheme = ScoringScheme::new(
            vec![
                MetricDef::new("soil", Pillar::Environmental, Direction::HigherBetter, MetricKind::Continuous),
                MetricDef::new("pesticide", Pillar::Environmental, Direction::LowerBetter, MetricKind::Continuous),
                MetricDef::new("insured", Pillar::Social, Direction::HigherBetter, MetricKind::Binary),
            ],
            Normalization::MinMax,
        )
        .unwrap();
        let records = vec![
            rec("best", "soil", 9.0),
            rec("best", "pesticide", 1.0),
            rec("best", "insured", 1.0),
            rec("mid", "soil", 6.0),
            rec("mid", "pesticide", 3.0),
            rec("mid", "insured", 1.0),
            rec("worst", "soil", 3.0),
            rec("worst", "pesticide", 5.0),
            rec("worst", "insured", 0.0),
        ];
        let scores = composite_score(&records, &scheme).unwrap();
        assert_relative_eq!(scores[0].score, 100.0, epsilon = 1e-12);
        // 2/3 * 0.5 + 1/3 * 1
        assert_relative_eq!(scores[1].score, 100.0 * (2.0 / 3.0 * 0.5 + 1.0 / 3.0), epsilon = 1e-12);
        assert_eq!(scores[2].score, 0.0);
    }

    #[test]
    fn composite_at_neutral_is_fifty() {
        let scheme = ScoringScheme::new(
            vec![
                MetricDef::new("a", Pillar::Environmental, Direction::HigherBetter, MetricKind::Continuous),
                MetricDef::new("b", Pillar::Economic, Direction::LowerBetter, MetricKind::Continuous),
            ],
            Normalization::MinMax,
        )
        .unwrap();
        let records = vec![
            rec("x", "a", 1.0),
            rec("x", "b", 1.0),
            rec("y", "a", 2.0),
            rec("y", "b", 2.0),
            rec("z", "a", 3.0),
            rec("z", "b", 3.0),
        ];
        let scores = composite_score(&records, &scheme).unwrap();
        assert_relative_eq!(scores[1].score, 50.0, epsilon = 1e-12);
    }

    #[test]
    fn composite_errors() {
        let scheme = ScoringScheme::new(
            vec![
                MetricDef::new("a", Pillar::Environmental, Direction::HigherBetter, MetricKind::Continuous),
                MetricDef::new("flag", Pillar::Social, Direction::HigherBetter, MetricKind::Binary),
            ],
            Normalization::MinMax,
        )
        .unwrap();
        let missing = composite_score(&[rec("f1", "a", 1.0), rec("f1", "flag", 1.0), rec("f2", "a", 2.0)], &scheme)
            .unwrap_err();
        assert!(matches!(missing, Error::Data(ref m) if m.contains("f2/flag")), "{missing}");
        let unknown = composite_score(&[rec("f1", "zzz", 1.0)], &scheme).unwrap_err();
        assert!(matches!(unknown, Error::Data(_)));
        let binary = composite_score(&[rec("f1", "a", 1.0), rec("f1", "flag", 0.5)], &scheme).unwrap_err();
        assert!(matches!(binary, Error::Data(ref m) if m.contains("binary")));
        let dup = composite_score(&[rec("f1", "a", 1.0), rec("f1", "a", 2.0)], &scheme).unwrap_err();
        assert!(matches!(dup, Error::Data(ref m) if m.contains("duplicate")));
        assert!(matches!(composite_score(&[], &scheme), Err(Error::Config(_))));
    }

    #[test]
    fn schema_toml() {
        let text = r#"
            normalization = "Z_SCORE_CLIPPED"
            category_weighting = "COUNT_BASED"

            [[metric]]
            id = "soil_health"
            pillar = "ENVIRONMENTAL"
            direction = "HIGHER_BETTER"
            kind = "CONTINUOUS"

            [[metric]]
            id = "debt"
            pillar = "ECONOMIC"
            direction = "LOWER_BETTER"
            kind = "CONTINUOUS"
            min = 0.0
            max = 500.0
        "#;
        let scheme = ScoringScheme::from_toml_str(text).unwrap();
        assert_eq!(scheme.normalization, Normalization::ZScoreClipped);
        assert_eq!(scheme.metrics.len(), 2);
        assert_eq!(scheme.metrics[1].max, Some(500.0));
        assert!(ScoringScheme::from_toml_str("normalization = \"MIN_MAX\"\n").is_err());
        assert!(ScoringScheme::from_toml_str("[[metric]]\nid = \"x\"\npillar = \"OTHER\"\ndirection = \"HIGHER_BETTER\"\nkind = \"BINARY\"\n").is_err());
    }

    #[test]
    fn metrics_csv_parsing() {
        let text = "farmer_id,metric_id,value\nf1,a,1.5\nf2,a,2\n";
        let records = read_metrics_csv(text.as_bytes(), "m.csv").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1], rec("f2", "a", 2.0));

        let bad = "farmer_id,metric_id,value\nf1,a,1.5\nf2,a,abc\n";
        let err = read_metrics_csv(bad.as_bytes(), "m.csv").unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("m.csv:3")), "{err}");

        assert!(matches!(read_metrics_csv("".as_bytes(), "m.csv"), Err(Error::Config(_))));
        assert!(matches!(read_metrics_csv("farmer_id,metric_id,value\n".as_bytes(), "m.csv"), Err(Error::Config(_))));
        assert!(matches!(read_metrics_csv("a,b,c\n1,2,3\n".as_bytes(), "m.csv"), Err(Error::Data(_))));
    }

    #[test]
    fn scores_csv_format() {
        let mut buf = Vec::new();
        write_scores_csv(&mut buf, &[FarmerScore { farmer_id: "f1".into(), score: 12.345_67 }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "farmer_id,score\nf1,12.3457\n");
    }
}
