//! Job execution: build the field, run the command, collect artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lpbk::operators::{maximal_op, MultiplierSpec};
use lpbk::partition::{CutoffProfile, DyadicPartition, PartitionReport};
use lpbk::spaces::{space_norm, NormReport, SpaceParams};
use lpbk::spectral::{sample_preset, GridSpec, PresetParams, SampledField};
use lpbk::verify::{run_check, ExperimentReport, FunctionFamily};
use serde::Serialize;

use crate::config::{Command, Format, JobConfig, OpConfig, Source};
use crate::input::read_sample;
use crate::output::{canonical_json, float, write_all, Artifact};
use crate::JobError;

/// What a finished job wrote and whether its checks held.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutcome {
    pub files: Vec<PathBuf>,
    pub pass: bool,
}

impl JobOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
enum SourceDoc {
    Preset {
        preset: String,
        params: PresetParams,
    },
    Sample {
        sample: String,
    },
}

#[derive(Debug, Clone, Copy, Serialize)]
struct GridDoc {
    dim: usize,
    n: usize,
    period: f64,
}

impl From<&GridSpec> for GridDoc {
    fn from(g: &GridSpec) -> Self {
        Self {
            dim: g.dim(),
            n: g.points_per_axis(),
            period: g.period(),
        }
    }
}

#[derive(Serialize)]
struct NormDoc<'a> {
    command: &'static str,
    grid: GridDoc,
    source: &'a SourceDoc,
    norms: &'a [NormReport],
}

#[derive(Serialize)]
struct OpDoc<'a> {
    command: &'static str,
    grid: GridDoc,
    source: &'a SourceDoc,
    op: &'a OpConfig,
    values: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct BandRow {
    space: usize,
    j: String,
    weighted_norm: f64,
}

#[derive(Serialize)]
struct BandsDoc<'a> {
    command: &'static str,
    grid: GridDoc,
    source: &'a SourceDoc,
    spaces: &'a [SpaceParams],
    rows: Vec<BandRow>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    command: &'static str,
    grid: GridDoc,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<&'a SourceDoc>,
    partition: PartitionReport,
    norms: Vec<NormReport>,
    checks: Vec<ExperimentReport>,
    pass: bool,
}

struct Input {
    field: SampledField,
    doc: SourceDoc,
}

fn compute(e: lpbk::Error) -> JobError {
    JobError::Compute(e.to_string())
}

fn load(cfg: &JobConfig, source: &Source) -> Result<Input, JobError> {
    match source {
        Source::Preset { name, params } => {
            let params = cfg.preset_params(name, params);
            let field = sample_preset(name, &params, &cfg.grid).map_err(compute)?;
            Ok(Input {
                field,
                doc: SourceDoc::Preset {
                    preset: name.clone(),
                    params,
                },
            })
        }
        Source::Sample(path) => Ok(Input {
            field: read_sample(path, &cfg.grid)?,
            doc: SourceDoc::Sample {
                sample: path.display().to_string(),
            },
        }),
    }
}

fn partition(cfg: &JobConfig) -> Result<DyadicPartition, JobError> {
    let mut p = DyadicPartition::new(&cfg.grid, CutoffProfile::new(cfg.partition.profile))
        .map_err(compute)?;
    for &j in &cfg.partition.zero_bands {
        p = p.with_band_zeroed(j).map_err(compute)?;
    }
    Ok(p)
}

fn norms(
    cfg: &JobConfig,
    f: &SampledField,
    p: &DyadicPartition,
) -> Result<Vec<NormReport>, JobError> {
    cfg.spaces
        .iter()
        .map(|s| space_norm(f, s, p).map_err(compute))
        .collect()
}

fn band_rows(reports: &[NormReport]) -> Vec<BandRow> {
    let mut rows = Vec::new();
    for (space, r) in reports.iter().enumerate() {
        if let Some(low) = r.low_block_term {
            rows.push(BandRow {
                space,
                j: "low".into(),
                weighted_norm: low,
            });
        }
        for &(j, v) in &r.per_band {
            rows.push(BandRow {
                space,
                j: j.to_string(),
                weighted_norm: v,
            });
        }
    }
    rows
}

fn run_checks(cfg: &JobConfig) -> Result<Vec<ExperimentReport>, JobError> {
    let family = FunctionFamily {
        generator: cfg.family.generator.clone(),
        seed: cfg.seed,
        count: cfg.family.count,
        grid: cfg.grid,
        params: cfg.family.params.clone(),
    };
    cfg.checks
        .iter()
        .map(|entry| {
            let mut params = entry.params();
            if !cfg.partition.zero_bands.is_empty() {
                params
                    .zero_bands
                    .get_or_insert_with(Vec::new)
                    .extend(&cfg.partition.zero_bands);
            }
            run_check(entry.id(), &family, &params).map_err(compute)
        })
        .collect()
}

fn apply_op(op: &OpConfig, f: &SampledField) -> Result<SampledField, JobError> {
    let spec = match *op {
        OpConfig::Lift { alpha } => MultiplierSpec::Lift { alpha },
        OpConfig::Riesz { axis } => MultiplierSpec::Riesz { axis },
        OpConfig::Heat { t } => MultiplierSpec::Heat { t },
        OpConfig::Maximal { eta } => return maximal_op(f, eta).map_err(compute),
    };
    spec.apply(f).map_err(compute)
}

fn field_csv(f: &SampledField) -> String {
    let grid = f.grid();
    let mut out = String::from(if grid.dim() == 1 {
        "i,re,im\n"
    } else {
        "i0,i1,re,im\n"
    });
    for (flat, v) in f.values().iter().enumerate() {
        let idx = grid.unflatten(flat);
        if grid.dim() == 1 {
            let _ = write!(out, "{}", idx[0]);
        } else {
            let _ = write!(out, "{},{}", idx[0], idx[1]);
        }
        let _ = writeln!(out, ",{},{}", float(v.re), float(v.im));
    }
    out
}

fn bands_csv(rows: &[BandRow]) -> String {
    let mut out = String::from("space,j,weighted_norm\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.space, r.j, float(r.weighted_norm));
    }
    out
}

fn norms_csv(reports: &[NormReport]) -> String {
    let mut out = String::from("space,kind,s,p,q,aggregate,low_block_term\n");
    for (i, r) in reports.iter().enumerate() {
        let kind = serde_json::to_value(r.params.kind).expect("unit enum");
        let low = r.low_block_term.map(float).unwrap_or_default();
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{low}",
            kind.as_str().expect("string tag"),
            float(r.params.s),
            exponent(r.params.p),
            exponent(r.params.q),
            float(r.aggregate),
        );
    }
    out
}

fn exponent(e: lpbk::spectral::Exponent) -> String {
    if e.is_infinite() {
        "inf".into()
    } else {
        float(e.value())
    }
}

fn instances_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("label,lhs,rhs,ratio,pass\n");
    for i in &report.instances {
        let _ = writeln!(
            out,
            "\"{}\",{},{},{},{}",
            i.label.replace('"', "\"\""),
            float(i.lhs),
            float(i.rhs),
            float(i.ratio),
            i.pass
        );
    }
    out
}

fn check_file_names(stem: &str, reports: &[ExperimentReport], ext: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(reports.len());
    for r in reports {
        let base = format!("{stem}_{}", r.check);
        let mut name = format!("{base}.{ext}");
        let mut k = 2;
        while names.contains(&name) {
            name = format!("{base}_{k}.{ext}");
            k += 1;
        }
        names.push(name);
    }
    names
}

/// Computes every artifact of `cfg` without touching the file system.
pub fn build_artifacts(cfg: &JobConfig) -> Result<(Vec<Artifact>, bool), JobError> {
    let stem = cfg.file_stem();
    let csv = cfg.output.format == Format::Csv;
    let ext = if csv { "csv" } else { "json" };
    let grid = GridDoc::from(&cfg.grid);
    let part = partition(cfg)?;
    let input = cfg.source.as_ref().map(|s| load(cfg, s)).transpose()?;
    let mut artifacts = Vec::new();
    if cfg.partition.dump {
        artifacts.push(Artifact::new("partition.csv", part.to_csv()));
    }
    let mut pass = true;

    match cfg.command {
        Command::Norm => {
            let input = input.expect("validated source");
            let reports = norms(cfg, &input.field, &part)?;
            let bytes = if csv {
                norms_csv(&reports)
            } else {
                canonical_json(&NormDoc {
                    command: "norm",
                    grid,
                    source: &input.doc,
                    norms: &reports,
                })?
            };
            artifacts.push(Artifact::new(format!("{stem}.{ext}"), bytes));
        }
        Command::Bands => {
            let input = input.expect("validated source");
            let rows = band_rows(&norms(cfg, &input.field, &part)?);
            let bytes = if csv {
                bands_csv(&rows)
            } else {
                canonical_json(&BandsDoc {
                    command: "bands",
                    grid,
                    source: &input.doc,
                    spaces: &cfg.spaces,
                    rows,
                })?
            };
            artifacts.push(Artifact::new(format!("{stem}.{ext}"), bytes));
        }
        Command::Op => {
            let input = input.expect("validated source");
            let op = cfg.op.as_ref().expect("validated op");
            let out = apply_op(op, &input.field)?;
            let bytes = if csv {
                field_csv(&out)
            } else {
                let values = out.values().iter().map(|v| [v.re, v.im]).collect();
                canonical_json(&OpDoc {
                    command: "op",
                    grid,
                    source: &input.doc,
                    op,
                    values,
                })?
            };
            artifacts.push(Artifact::new(format!("{stem}.{ext}"), bytes));
        }
        Command::Verify => {
            let reports = run_checks(cfg)?;
            let names = check_file_names(&stem, &reports, ext);
            for (r, name) in reports.iter().zip(names) {
                pass &= r.pass;
                let bytes = if csv {
                    instances_csv(r)
                } else {
                    canonical_json(r)?
                };
                artifacts.push(Artifact::new(name, bytes));
            }
        }
        Command::Report => {
            let norms = match &input {
                Some(i) => norms(cfg, &i.field, &part)?,
                None => Vec::new(),
            };
            let checks = run_checks(cfg)?;
            let partition = part.validate();
            pass = checks.iter().all(|c| c.pass);
            let doc = ReportDoc {
                command: "report",
                grid,
                seed: cfg.seed,
                source: input.as_ref().map(|i| &i.doc),
                partition,
                norms,
                checks,
                pass,
            };
            artifacts.push(Artifact::new(format!("{stem}.json"), canonical_json(&doc)?));
        }
    }
    Ok((artifacts, pass))
}

/// Runs `cfg` and writes its reports under `out_dir`.
///
/// Check failures are reported through [`JobOutcome::pass`]; the reports are
/// still written.
pub fn run_job(cfg: &JobConfig, out_dir: &Path) -> Result<JobOutcome, JobError> {
    let (artifacts, pass) = build_artifacts(cfg)?;
    let files = write_all(out_dir, &artifacts)?;
    Ok(JobOutcome { files, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn artifacts(text: &str) -> (Vec<Artifact>, bool) {
        build_artifacts(&parse_config(text).unwrap()).unwrap()
    }

    #[test]
    fn harmonic_norm_matches_closed_form() {
        let (a, pass) = artifacts(
            r#"{"command":"norm","preset":"harmonic","params":{"k":8},
                "spaces":[{"s":0.5,"p":2,"q":1,"kind":"besov_homog"}],"output":{"format":"csv"}}"#,
        );
        assert!(pass);
        let text = String::from_utf8(a[0].bytes.clone()).unwrap();
        let row = text.lines().nth(1).unwrap();
        let aggregate: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        let expected = 8f64.sqrt() * (2.0 * std::f64::consts::PI).sqrt();
        assert!(
            (aggregate - expected).abs() <= 1e-10 * expected,
            "{aggregate} vs {expected}"
        );
    }

    #[test]
    fn weierstrass_bands_are_flat() {
        let (a, _) = artifacts(
            r#"{"command":"bands","preset":"weierstrass","params":{"s":0.5,"j_max":6},
                "spaces":[{"s":0.5,"p":"inf","q":"inf","kind":"besov_homog"}],"output":{"format":"csv"}}"#,
        );
        let text = String::from_utf8(a[0].bytes.clone()).unwrap();
        let terms: Vec<(i32, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                (c[1].parse().unwrap(), c[2].parse().unwrap())
            })
            .collect();
        for (j, t) in terms.iter().filter(|(j, _)| (0..=6).contains(j)) {
            assert!((t - 1.0).abs() <= 1e-10, "band {j}: {t}");
        }
    }

    #[test]
    fn op_csv_reads_back() {
        let (a, _) = artifacts(
            r#"{"command":"op","preset":"random_bandlimited","params":{"band_hi":20},
                "op":{"name":"heat","t":0.01},"output":{"format":"csv"}}"#,
        );
        let grid = GridSpec::unit_circle(256).unwrap();
        let values = crate::input::decode_csv(&a[0].bytes, &grid).unwrap();
        assert_eq!(values.len(), 256);
    }

    #[test]
    fn duplicate_checks_get_distinct_files() {
        let (a, pass) = artifacts(
            r#"{"command":"verify","family":{"generator":"harmonics","count":3},
                "checks":["l2_corridor","l2_corridor"]}"#,
        );
        assert!(pass);
        let names: Vec<&str> = a.iter().map(|x| x.name.as_str()).collect();
        assert_eq!(
            names,
            ["verify_l2_corridor.json", "verify_l2_corridor_2.json"]
        );
    }

    #[test]
    fn zeroed_band_fails_checks() {
        let (_, pass) = artifacts(
            r#"{"command":"verify","family":{"generator":"random_bandlimited","count":3},
                "partition":{"zero_bands":[3]},"checks":["reconstruction"]}"#,
        );
        assert!(!pass);
    }

    #[test]
    fn report_combines_norms_and_checks() {
        let (a, pass) = artifacts(
            r#"{"command":"report","preset":"sign","family":{"generator":"harmonics","count":2},
                "spaces":[{"s":0,"p":2,"q":2,"kind":"besov_nonhomog"}],"checks":["partition_validity"]}"#,
        );
        assert!(pass);
        let v: serde_json::Value = serde_json::from_slice(&a[0].bytes).unwrap();
        assert_eq!(v["norms"].as_array().unwrap().len(), 1);
        assert_eq!(v["checks"][0]["check"], "partition_validity");
        assert_eq!(v["partition"]["pass"], true);
    }
}
