//! Paired claim data: CSV ingestion, summary statistics and histograms.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Paired positive claim amounts, e.g. bodily-injury and property-damage
/// cost per policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimPairSample {
    pairs: Vec<(f64, f64)>,
    source: String,
}

impl ClaimPairSample {
    pub fn new(pairs: Vec<(f64, f64)>, source: impl Into<String>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::NoValidRows { rejected: 0 });
        }
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if !(is_positive(a) && is_positive(b)) {
                return Err(Error::InvalidRow {
                    row: i + 1,
                    reason: format!("claims must be finite and > 0, got ({a}, {b})"),
                });
            }
        }
        Ok(Self {
            pairs,
            source: source.into(),
        })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn claim1(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn claim2(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

fn is_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// A column picked by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Name(n) => f.write_str(n),
            ColumnRef::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// The two claim columns, parsed from `"a,b"` (names) or `"0,1"` (indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub first: ColumnRef,
    pub second: ColumnRef,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            first: ColumnRef::Index(0),
            second: ColumnRef::Index(1),
        }
    }
}

impl FromStr for ColumnSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b] = parts[..] else {
            return Err(format!("expected two comma-separated columns, got `{s}`"));
        };
        let col = |t: &str| match t.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(t.to_string()),
        };
        Ok(Self {
            first: col(a),
            second: col(b),
        })
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub columns: ColumnSpec,
    pub has_header: bool,
    pub delimiter: u8,
    /// Fields use `,` as the decimal separator (pair with `;` delimiters).
    pub decimal_comma: bool,
    /// Abort on the first bad row instead of skipping it.
    pub strict: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            columns: ColumnSpec::default(),
            has_header: true,
            delimiter: b',',
            decimal_comma: false,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowRejection {
    /// 1-based line number in the file.
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub sample: ClaimPairSample,
    pub rejected: Vec<RowRejection>,
}

/// Reads two claim columns from a CSV file. Lines starting with `#` are
/// comments.
pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<LoadOutcome> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound {
            path: path.to_path_buf(),
        },
        _ => Error::Io(e),
    })?;
    read_csv(file, path.display().to_string(), options)
}

/// [`load_csv`] over any reader.
pub fn read_csv<R: Read>(
    reader: R,
    source: impl Into<String>,
    options: &LoadOptions,
) -> Result<LoadOutcome> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .delimiter(options.delimiter)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let resolve = |c: &ColumnRef, headers: Option<&csv::StringRecord>| -> Result<usize> {
        match c {
            ColumnRef::Index(i) => Ok(*i),
            ColumnRef::Name(name) => headers
                .and_then(|h| h.iter().position(|f| f == name))
                .ok_or_else(|| Error::ColumnNotFound(name.clone())),
        }
    };
    let headers = if options.has_header {
        Some(rdr.headers()?.clone())
    } else {
        None
    };
    let i1 = resolve(&options.columns.first, headers.as_ref())?;
    let i2 = resolve(&options.columns.second, headers.as_ref())?;
    if let Some(h) = &headers {
        for (c, i) in [(&options.columns.first, i1), (&options.columns.second, i2)] {
            if i >= h.len() {
                return Err(Error::ColumnNotFound(c.to_string()));
            }
        }
    }

    let mut pairs = Vec::new();
    let mut rejected = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let parsed = parse_field(&record, i1, options).and_then(|a| {
            let b = parse_field(&record, i2, options)?;
            Ok((a, b))
        });
        match parsed {
            Ok(pair) => pairs.push(pair),
            Err(reason) if options.strict => return Err(Error::InvalidRow { row, reason }),
            Err(reason) => rejected.push(RowRejection { row, reason }),
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoValidRows {
            rejected: rejected.len(),
        });
    }
    Ok(LoadOutcome {
        sample: ClaimPairSample::new(pairs, source)?,
        rejected,
    })
}

fn parse_field(
    record: &csv::StringRecord,
    index: usize,
    options: &LoadOptions,
) -> std::result::Result<f64, String> {
    let raw = record
        .get(index)
        .ok_or_else(|| format!("missing column {index}"))?;
    let text = if options.decimal_comma {
        raw.replace(',', ".")
    } else {
        raw.to_string()
    };
    let value: f64 = text
        .parse()
        .map_err(|_| format!("cannot parse `{raw}` in column {index} as a number"))?;
    if !is_positive(value) {
        return Err(format!(
            "value {raw} in column {index} is not a positive claim amount"
        ));
    }
    Ok(value)
}

/// Writes the sample as CSV. Each metadata line becomes a leading `# ` comment.
/// Values use the shortest representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(
    sample: &ClaimPairSample,
    writer: W,
    headers: [&str; 2],
    metadata: &[String],
) -> Result<()> {
    let mut writer = writer;
    for line in metadata {
        writeln!(writer, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(headers)?;
    for &(a, b) in sample.pairs() {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Descriptive statistics of one coordinate.
///
/// Quartiles interpolate linearly between order statistics at position
/// `(n - 1) p` (zero-based). Skewness is `m3 / m2^(3/2)` and kurtosis is
/// the non-excess `m4 / m2^2`, both from central sample moments with divisor
/// `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoordinateSummary {
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub mean: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub source: String,
    pub n: usize,
    pub claim1: CoordinateSummary,
    pub claim2: CoordinateSummary,
}

pub fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_values(values: &[f64]) -> Result<CoordinateSummary> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            actual: n,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mean = sorted.iter().sum::<f64>() / nf;
    let moment = |k: i32| sorted.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / nf;
    let (m2, m3, m4) = (moment(2), moment(3), moment(4));
    if m2 <= 0.0 {
        return Err(Error::Degenerate(
            "zero variance: skewness and kurtosis are undefined".into(),
        ));
    }
    Ok(CoordinateSummary {
        min: sorted[0],
        max: sorted[n - 1],
        q1: quantile_linear(&sorted, 0.25),
        median: quantile_linear(&sorted, 0.5),
        q3: quantile_linear(&sorted, 0.75),
        mean,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

pub fn summarize(sample: &ClaimPairSample) -> Result<SummaryStats> {
    Ok(SummaryStats {
        source: sample.source().to_string(),
        n: sample.len(),
        claim1: summarize_values(&sample.claim1()).map_err(|e| e.in_stage("claim1"))?,
        claim2: summarize_values(&sample.claim2()).map_err(|e| e.in_stage("claim2"))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinScale {
    Linear,
    Log,
}

/// Bin edges (`bins + 1`, spanning `[min, max]`) and counts. Bins are
/// half-open except the last, which includes `max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub scale: BinScale,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(values: &[f64], bins: usize, scale: BinScale) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter {
            name: "bins",
            value: 0.0,
            constraint: "must be >= 1",
        });
    }
    if values.is_empty() {
        return Err(Error::TooFewObservations {
            required: 1,
            actual: 0,
        });
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if scale == BinScale::Log && min <= 0.0 {
        return Err(Error::domain("min", min, "(0, inf) for log bins"));
    }
    let edges: Vec<f64> = (0..=bins)
        .map(|k| {
            if k == bins {
                return max;
            }
            let t = k as f64 / bins as f64;
            match scale {
                BinScale::Linear => min + t * (max - min),
                BinScale::Log => (min.ln() + t * (max.ln() - min.ln())).exp(),
            }
        })
        .collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        // index of the last edge <= v, capped so max lands in the final bin
        let k = edges[1..bins].partition_point(|&e| e <= v);
        counts[k] += 1;
    }
    Ok(Histogram {
        scale,
        edges,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairHistogram {
    pub claim1: Histogram,
    pub claim2: Histogram,
}

pub fn histogram_export(
    sample: &ClaimPairSample,
    bins: usize,
    scale: BinScale,
) -> Result<PairHistogram> {
    Ok(PairHistogram {
        claim1: histogram(&sample.claim1(), bins, scale)?,
        claim2: histogram(&sample.claim2(), bins, scale)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load_str(text: &str, options: &LoadOptions) -> Result<LoadOutcome> {
        read_csv(text.as_bytes(), "inline", options)
    }

    #[test]
    fn three_row_file() {
        let out = load_str("a,b\n1,2\n3,4\n5,6\n", &LoadOptions::default()).unwrap();
        assert_eq!(out.sample.len(), 3);
        assert_eq!(out.sample.pairs()[2], (5.0, 6.0));
        assert!(out.rejected.is_empty());
    }

    #[test]
    fn strict_mode_names_the_row() {
        let opts = LoadOptions {
            strict: true,
            ..Default::default()
        };
        let err = load_str("a,b\n1,2\n0,4\n", &opts).unwrap_err();
        match err {
            Error::InvalidRow { row, .. } => assert_eq!(row, 3),
            other => panic!("{other}"),
        }
        let lenient = load_str("a,b\n1,2\n0,4\nx,5\n7,8\n", &LoadOptions::default()).unwrap();
        assert_eq!(lenient.sample.len(), 2);
        let rows: Vec<usize> = lenient.rejected.iter().map(|r| r.row).collect();
        assert_eq!(rows, vec![3, 4]);
    }

    #[test]
    fn named_columns_and_scientific_notation() {
        let text = "id,tcost_bi,tcost_pd\n1,1.5e3,2.5E+02\n2,318,6.2\n3,2.519582e5,14818.2\n";
        let opts = LoadOptions {
            columns: "tcost_bi,tcost_pd".parse().unwrap(),
            ..Default::default()
        };
        let out = load_str(text, &opts).unwrap();
        assert_eq!(
            out.sample.pairs(),
            &[(1500.0, 250.0), (318.0, 6.2), (251958.2, 14818.2)]
        );
    }

    #[test]
    fn missing_column_and_empty_file() {
        let opts = LoadOptions {
            columns: "x,b".parse().unwrap(),
            ..Default::default()
        };
        assert!(matches!(
            load_str("a,b\n1,2\n", &opts),
            Err(Error::ColumnNotFound(c)) if c == "x"
        ));
        assert!(matches!(
            load_str("a,b\n", &LoadOptions::default()),
            Err(Error::NoValidRows { .. })
        ));
        assert!(matches!(
            load_csv("/definitely/not/here.csv", &LoadOptions::default()),
            Err(Error::FileNotFound { .. })
        ));
    }

    #[test]
    fn european_format() {
        let opts = LoadOptions {
            delimiter: b';',
            decimal_comma: true,
            has_header: false,
            ..Default::default()
        };
        let out = load_str("1,5;2,25\n# comment\n3;4\n", &opts).unwrap();
        assert_eq!(out.sample.pairs(), &[(1.5, 2.25), (3.0, 4.0)]);
    }

    #[test]
    fn summary_basics() {
        let s = summarize_values(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.median, 3.0);
        assert_eq!(s.mean, 3.0);
        assert_eq!((s.q1, s.q3), (2.0, 4.0));
        assert!(matches!(
            summarize_values(&[2.0, 2.0, 2.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(summarize_values(&[2.0]).is_err());
        // normal-like kurtosis is reported without subtracting 3
        let u: Vec<f64> = (0..1001).map(|i| i as f64).collect();
        let k = summarize_values(&u).unwrap().kurtosis;
        assert!((k - 1.8).abs() < 1e-2, "{k}");
    }

    #[test]
    fn symmetric_sample_has_zero_skew() {
        let v: Vec<f64> = (-50..=50).map(|i| 100.0 + i as f64 * 0.37).collect();
        assert!(summarize_values(&v).unwrap().skewness.abs() < 1e-12);
    }

    #[test]
    fn histogram_fixtures() {
        let h = histogram(&[1.0, 1.0, 2.0, 2.0], 2, BinScale::Linear).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.edges, vec![1.0, 1.5, 2.0]);
        // log edges: 1, 10, 100, 1000 (hand-binned)
        let v = [1.0, 3.0, 9.0, 11.0, 40.0, 99.0, 120.0, 999.0, 1000.0];
        let h = histogram(&v, 3, BinScale::Log).unwrap();
        assert_eq!(h.counts, vec![3, 3, 3]);
        assert!((h.edges[1] - 10.0).abs() < 1e-9 && (h.edges[2] - 100.0).abs() < 1e-9);
        let single = histogram(&[4.0, 4.0], 3, BinScale::Linear).unwrap();
        assert_eq!(single.counts, vec![0, 0, 2]);
        assert!(histogram(&[1.0], 0, BinScale::Linear).is_err());
    }

    #[test]
    fn write_then_read_preserves_values() {
        let pairs = vec![
            (0.1 + 0.2, 1e-7 / 3.0),
            (123456.789012345, std::f64::consts::PI),
        ];
        let sample = ClaimPairSample::new(pairs.clone(), "mem").unwrap();
        let mut buf = Vec::new();
        write_csv(&sample, &mut buf, ["a", "b"], &["seed: 4".into()]).unwrap();
        let back = read_csv(buf.as_slice(), "mem", &LoadOptions::default()).unwrap();
        assert_eq!(back.sample.pairs(), pairs.as_slice());
    }

    proptest! {
        #[test]
        fn csv_round_trip(pairs in prop::collection::vec((1e-300..1e300f64, 1e-9..1e9f64), 1..40)) {
            let sample = ClaimPairSample::new(pairs.clone(), "p").unwrap();
            let mut buf = Vec::new();
            write_csv(&sample, &mut buf, ["a", "b"], &[]).unwrap();
            let back = read_csv(buf.as_slice(), "p", &LoadOptions::default()).unwrap();
            prop_assert_eq!(back.sample.pairs(), pairs.as_slice());
        }

        #[test]
        fn histogram_counts_sum_to_n(v in prop::collection::vec(1e-3..1e6f64, 1..300), bins in 1usize..40) {
            for scale in [BinScale::Linear, BinScale::Log] {
                let h = histogram(&v, bins, scale).unwrap();
                prop_assert_eq!(h.counts.iter().sum::<usize>(), v.len());
                prop_assert_eq!(h.edges.len(), bins + 1);
            }
        }

        #[test]
        fn summary_is_permutation_invariant(mut v in prop::collection::vec(0.1..1e4f64, 3..100)) {
            let a = summarize_values(&v).unwrap();
            v.reverse();
            let b = summarize_values(&v).unwrap();
            prop_assert_eq!(a.median, b.median);
            prop_assert_eq!(a.q1, b.q1);
            prop_assert!(a.min <= a.q1 && a.q1 <= a.median && a.median <= a.q3 && a.q3 <= a.max);
        }
    }
}
