//! File formats: dataset CSV, partition JSON, and the JSON reports written by
//! the command-line tool.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dataset::{center_columns, Dataset};
use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::metrics::EvalReport;
use crate::modelsel::CvReport;
use crate::optimizer::{FitConfig, FitResult, KktReport};
use crate::partition::NodePartition;
use crate::precision::BlockPrecision;
use crate::synth::{GeneratorConfig, GroundTruth};
use crate::VERSION;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Parses a dataset whose header must be exactly `v<i>.<k>` for every column
/// of `partition`, in layout order. Rows and columns in errors are 1-based,
/// counting data rows after the header.
pub fn parse_dataset_csv<R: Read>(reader: R, partition: &NodePartition) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let expected = partition.column_names();
    let header = rdr.headers()?.clone();
    if header.len() != expected.len() {
        return Err(Error::Dimension(format!(
            "header has {} columns, partition expects {}",
            header.len(),
            expected.len()
        )));
    }
    for (c, (got, want)) in header.iter().zip(&expected).enumerate() {
        if got != want {
            return Err(Error::Parse {
                row: 0,
                column: c + 1,
                message: format!("header `{got}` should be `{want}`"),
            });
        }
    }
    let d = expected.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: r + 1,
            column: 0,
            message: e.to_string(),
        })?;
        if record.len() != d {
            return Err(Error::Parse {
                row: r + 1,
                column: record.len().min(d) + 1,
                message: format!("expected {d} fields, found {}", record.len()),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    row: r + 1,
                    column: c + 1,
                    message: format!("`{field}` in {} is not a finite number", expected[c]),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Dataset::from_rows(&rows, partition.clone())
}

pub fn write_dataset_csv<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(data.partition().column_names())?;
    let mut row = Vec::with_capacity(data.dim());
    for r in 0..data.n() {
        row.clear();
        row.extend((0..data.dim()).map(|c| format!("{}", data.value(r, c))));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// How raw data is prepared before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub center: bool,
    pub standardize: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            center: true,
            standardize: false,
        }
    }
}

pub fn prepare(data: Dataset, opts: IngestOptions) -> Dataset {
    let data = if opts.center { center_columns(&data) } else { data };
    if opts.standardize {
        data.standardized()
    } else {
        data
    }
}

pub fn load_dataset(data: &Path, partition: &Path, opts: IngestOptions) -> Result<Dataset> {
    let partition: NodePartition = read_json(partition)?;
    let raw = parse_dataset_csv(BufReader::new(open(data)?), &partition)?;
    Ok(prepare(raw, opts))
}

fn block_rows(block: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..block.nrows())
        .map(|k| (0..block.ncols()).map(|l| block[(k, l)]).collect())
        .collect()
}

/// Serialized fit: the estimate as diagonal entries plus nonzero blocks keyed
/// `"i,j"` (1-based) as row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub version: String,
    pub mode: String,
    pub config: FitConfig,
    pub ingest: IngestOptions,
    pub dims: Vec<usize>,
    pub lambda: f64,
    pub converged: bool,
    pub sweeps: usize,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub sigma: Vec<f64>,
    pub blocks: BTreeMap<String, Vec<Vec<f64>>>,
    pub kkt: KktReport,
}

fn block_key(i: usize, j: usize) -> String {
    format!("{},{}", i + 1, j + 1)
}

fn parse_block_key(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("bad block key `{key}`"));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

impl FitReport {
    pub fn new(result: &FitResult, config: &FitConfig, ingest: IngestOptions, mode: &str) -> Self {
        let est = &result.estimate;
        FitReport {
            version: VERSION.to_string(),
            mode: mode.to_string(),
            config: config.clone(),
            ingest,
            dims: est.partition().dims().to_vec(),
            lambda: result.lambda,
            converged: result.converged,
            sweeps: result.sweeps,
            objective: result.objective(),
            objective_trace: result.objective_trace.clone(),
            sigma: est.sigma().to_vec(),
            blocks: est
                .blocks()
                .map(|(&(i, j), b)| (block_key(i, j), block_rows(b)))
                .collect(),
            kkt: result.kkt.clone(),
        }
    }

    pub fn estimate(&self) -> Result<BlockPrecision> {
        let partition = NodePartition::new(self.dims.clone())?;
        let mut est = BlockPrecision::new(partition, self.sigma.clone())?;
        for (key, rows) in &self.blocks {
            let (i, j) = parse_block_key(key)?;
            let ncols = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != ncols) {
                return Err(Error::InvalidInput(format!("ragged block `{key}`")));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            est.set_block(i, j, DMatrix::from_row_slice(rows.len(), ncols, &flat))?;
        }
        Ok(est)
    }
}

/// Ground truth as written by `simulate`. The `p` and `edges` fields have the
/// same shape as an edge-graph file, so a truth file can be read as one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthReport {
    pub version: String,
    pub config: GeneratorConfig,
    pub k: usize,
    pub rho: f64,
    pub omega: Vec<Vec<f64>>,
    #[serde(flatten)]
    pub graph: EdgeGraph,
}

impl TruthReport {
    pub fn new(truth: &GroundTruth) -> Self {
        TruthReport {
            version: VERSION.to_string(),
            config: truth.config.clone(),
            k: truth.config.k,
            rho: truth.rho,
            omega: block_rows(&truth.omega),
            graph: truth.graph.clone(),
        }
    }

    pub fn omega(&self) -> DMatrix<f64> {
        let d = self.omega.len();
        let flat: Vec<f64> = self.omega.iter().flatten().copied().collect();
        DMatrix::from_row_slice(d, d, &flat)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReportFile {
    pub version: String,
    pub mode: String,
    pub config: FitConfig,
    pub ingest: IngestOptions,
    #[serde(flatten)]
    pub report: CvReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReportFile {
    pub version: String,
    #[serde(flatten)]
    pub report: EvalReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::fit;

    fn small() -> Dataset {
        let part = NodePartition::new(vec![1, 2]).unwrap();
        Dataset::from_rows(
            &[
                vec![0.5, -1.25, 2.0],
                vec![1.5, 0.75, -0.5],
                vec![-2.0, 0.125, 1.0],
                vec![0.1, 0.3, -0.7],
            ],
            part,
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let data = small();
        let mut buf = Vec::new();
        write_dataset_csv(&mut buf, &data).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("v1.1,v2.1,v2.2\n"));
        let back = parse_dataset_csv(&buf[..], data.partition()).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn csv_errors_name_row_and_column() {
        let part = NodePartition::new(vec![1, 1]).unwrap();
        let bad = "v1.1,v2.1\n1.0,2.0\n3.0,abc\n";
        match parse_dataset_csv(bad.as_bytes(), &part) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let header = "v1.1,v1.2\n1,2\n3,4\n";
        assert!(matches!(
            parse_dataset_csv(header.as_bytes(), &part),
            Err(Error::Parse { row: 0, column: 2, .. })
        ));
        let short = "v1.1,v2.1\n1,2\n3\n";
        assert!(parse_dataset_csv(short.as_bytes(), &part).is_err());
        let nan = "v1.1,v2.1\n1,2\n3,NaN\n";
        assert!(parse_dataset_csv(nan.as_bytes(), &part).is_err());
    }

    #[test]
    fn fit_report_round_trip() {
        let data = center_columns(&small());
        let cfg = FitConfig::with_lambda(0.01);
        let result = fit(&data, &cfg, None).unwrap();
        let report = FitReport::new(&result, &cfg, IngestOptions::default(), "mconcord");
        let text = serde_json::to_string(&report).unwrap();
        let back: FitReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.estimate().unwrap(), result.estimate);
    }

    #[test]
    fn truth_file_reads_as_edge_graph() {
        let truth = crate::synth::generate_truth(&GeneratorConfig::new(4, 2, 0.5, 10, 1)).unwrap();
        let report = TruthReport::new(&truth);
        let text = serde_json::to_string(&report).unwrap();
        let graph: EdgeGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(graph, truth.graph);
        let back: TruthReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.omega(), truth.omega);
    }

    #[test]
    fn block_keys() {
        assert_eq!(parse_block_key("2,5").unwrap(), (1, 4));
        assert!(parse_block_key("0,1").is_err());
        assert!(parse_block_key("x").is_err());
    }
}
