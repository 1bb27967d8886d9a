use std::io::Read;
use std::path::Path;

use serde_json::{json, Value};
use slmf_core::completion::{complete_matrix, parse_observations, to_csv};
use slmf_core::lab::{self, CensusOptions, EnumOptions, Filter, OracleParams};
use slmf_core::oracle::{self, Verdict};
use slmf_core::partition::{
    partition_search, Packing, PartitionCertificate, SearchOptions, SearchOutcome, TruncationMatroid,
};
use slmf_core::slmf::{is_relaxed_slmf, is_slmf, is_slmf_via_matching};
use slmf_core::{Error, Field, Gf, Rational, RelaxedParams, Slmf, SupportPattern};

use crate::{Command, FieldKind, FilterKind, Method, OracleArgs, OutputFormat};

pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn json(code: u8, value: Value) -> Self {
        Outcome {
            code,
            stdout: format!("{value}\n"),
            stderr: String::new(),
        }
    }

    fn text(code: u8, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn with_stderr(mut self, msg: impl Into<String>) -> Self {
        self.stderr = msg.into();
        self
    }
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        match &e {
            Error::NotGeneric { stage, phi } => {
                Outcome::json(1, json!({"error": "not_generic", "stage": stage, "phi": phi}))
                    .with_stderr(e.to_string())
            }
            Error::Inconsistent { .. } | Error::NotInOpenLocus => {
                Outcome::json(1, json!({"error": "inconsistent", "message": e.to_string()}))
                    .with_stderr(e.to_string())
            }
            _ => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: json!({"error": error_kind(&e), "message": e.to_string()}).to_string(),
            },
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Capacity { .. } => "capacity",
        Error::NotRelaxed { .. } => "not_relaxed",
        _ => "contract",
    }
}

type Run = std::result::Result<Outcome, Error>;

pub fn run(command: Command) -> Outcome {
    let result = match command {
        Command::CheckSlmf { pattern, r } => check_slmf(&pattern, r),
        Command::CheckRelaxed { pattern, r, nu } => check_relaxed(&pattern, r, nu.unwrap_or(r)),
        Command::Partition {
            pattern,
            r,
            method,
            prefer_same_phi,
        } => partition(&pattern, r, method, prefer_same_phi),
        Command::Certify { pattern, r, oracle } => certify(&pattern, r, &oracle),
        Command::Complete {
            pattern,
            certificate,
            observations,
            field,
            format,
        } => complete(&pattern, &certificate, &observations, field, format),
        Command::VerifyConjecture {
            m,
            n,
            r,
            col_size,
            filter,
            format,
            dump,
            oracle,
        } => verify_conjecture(m, n, r, col_size, filter, format, dump.as_deref(), &oracle),
        Command::Crosscheck { m, n, r, oracle } => crosscheck(m, n, r, &oracle),
    };
    result.unwrap_or_else(Outcome::from)
}

fn read_text(path: &Path) -> Result<String, Error> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(text)
}

fn read_pattern(path: &Path) -> Result<SupportPattern, Error> {
    SupportPattern::parse(&read_text(path)?)
}

fn pattern_json(p: &SupportPattern) -> Value {
    serde_json::to_value(p).expect("pattern serializes")
}

fn one_based(cols: &[usize]) -> Vec<usize> {
    cols.iter().map(|j| j + 1).collect()
}

fn oracle_params(args: &OracleArgs) -> OracleParams {
    OracleParams {
        prime: args.prime,
        trials: args.trials,
        seed: args.seed,
    }
}

fn check_slmf(path: &Path, r: usize) -> Run {
    let phi = Slmf::new(r, read_pattern(path)?)?;
    let union = is_slmf(&phi)?;
    let matching = is_slmf_via_matching(&phi)?;
    let agree = union.is_none() == matching;
    let payload = json!({
        "slmf": union.is_none(),
        "union_check": union.is_none(),
        "matching_check": matching,
        "agree": agree,
        "violating_columns": union.as_deref().map(one_based),
    });
    if !agree {
        return Ok(Outcome::json(2, payload)
            .with_stderr("the two SLMF checkers disagree; please report this pattern"));
    }
    Ok(Outcome::json(if matching { 0 } else { 1 }, payload))
}

fn check_relaxed(path: &Path, r: usize, nu: usize) -> Run {
    let p = read_pattern(path)?;
    let witness = is_relaxed_slmf(&p, &RelaxedParams::new(nu, r))?;
    let holds = witness.is_none();
    Ok(Outcome::json(
        if holds { 0 } else { 1 },
        json!({"relaxed": holds, "nu": nu, "r": r, "m": p.m(), "witness": witness}),
    ))
}

fn partition(path: &Path, r: usize, method: Method, prefer_same_phi: bool) -> Run {
    let p = read_pattern(path)?;
    match method {
        Method::Search => {
            let opts = SearchOptions { prefer_same_phi };
            match partition_search(&p, r, &opts)? {
                SearchOutcome::Found {
                    certificate,
                    warnings,
                    ..
                } => Ok(Outcome::json(0, certificate.to_json()).with_stderr(warnings.join("\n"))),
                SearchOutcome::Exhausted {
                    nodes,
                    reason,
                    warnings,
                } => Ok(Outcome::json(
                    1,
                    json!({"partition": false, "exhaustive": true, "nodes": nodes, "reason": reason}),
                )
                .with_stderr(warnings.join("\n"))),
            }
        }
        Method::Pack => match TruncationMatroid::new(&p, r).pack_bases()? {
            Packing::Bases(groups) => {
                let cert = PartitionCertificate::from_groups(&p, r, groups)?;
                Ok(Outcome::json(0, cert.to_json()))
            }
            Packing::Obstruction(js) => Ok(Outcome::json(
                1,
                json!({"partition": false, "obstruction": one_based(&js)}),
            )),
        },
    }
}

fn certify(path: &Path, r: usize, args: &OracleArgs) -> Run {
    let p = read_pattern(path)?;
    if r == 0 || r >= p.m().min(p.n()) {
        return Err(Error::Contract(format!(
            "need 1 <= r < min(m, n), got r = {r} for {}x{}",
            p.m(),
            p.n()
        )));
    }
    let required = p.base_size(r);
    if p.size() != required {
        return Ok(Outcome::json(
            1,
            json!({"certified": false, "reason": "size", "size": p.size(), "required": required}),
        ));
    }
    let (reduced, log) = p.reduce(r)?;
    let (relaxed, relaxed_witness, partition, partition_json) = match lab::trivial_base(&reduced, r) {
        Some(full) => (full, None, full, json!({"found": full, "trivial": true})),
        None => {
            let witness = is_relaxed_slmf(&reduced, &RelaxedParams::new(r, r))?;
            let search = partition_search(&reduced, r, &SearchOptions::default())?;
            let part = match &search {
                SearchOutcome::Found { certificate, .. } => {
                    let mut v = certificate.to_json();
                    v["found"] = json!(true);
                    v
                }
                SearchOutcome::Exhausted { nodes, reason, .. } => {
                    json!({"found": false, "exhaustive": true, "nodes": nodes, "reason": reason})
                }
            };
            (witness.is_none(), witness, search.certificate().is_some(), part)
        }
    };
    let verdict = oracle::is_base(&p, r, args.prime, args.trials, args.seed)?;
    let base = verdict.verdict == Verdict::Base;
    let mut payload = json!({
        "r": r,
        "size": p.size(),
        "required": required,
        "reduction": log,
        "reduced": pattern_json(&reduced),
        "relaxed": {"holds": relaxed, "witness": relaxed_witness},
        "partition": partition_json,
        "oracle": verdict,
    });
    if base && !relaxed {
        payload["certified"] = json!(false);
        payload["reason"] = json!("oracle reports a base that violates the relaxed inequalities");
        return Ok(Outcome::json(2, payload).with_stderr("internal disagreement; please report this pattern"));
    }
    if partition && !base {
        payload["certified"] = json!(false);
        payload["reason"] = json!("a partition exists but the oracle did not find full rank");
        return Ok(Outcome::json(2, payload)
            .with_stderr("internal disagreement; rerun with another --seed or more --trials"));
    }
    let certified = relaxed && partition && base;
    payload["certified"] = json!(certified);
    if !certified {
        let reason = if !relaxed {
            "relaxed"
        } else if !partition {
            "partition"
        } else {
            "oracle"
        };
        payload["reason"] = json!(reason);
    }
    Ok(Outcome::json(if certified { 0 } else { 1 }, payload))
}

fn complete(
    pattern: &Path,
    certificate: &Path,
    observations: &Path,
    field: FieldKind,
    format: OutputFormat,
) -> Run {
    let p = read_pattern(pattern)?;
    let cert = PartitionCertificate::from_json(&read_text(certificate)?)?;
    let text = read_text(observations)?;
    match field {
        FieldKind::Gf => complete_in::<Gf>(&p, &cert, &text, format),
        FieldKind::Rational => complete_in::<Rational>(&p, &cert, &text, format),
    }
}

fn complete_in<F: Field>(
    p: &SupportPattern,
    cert: &PartitionCertificate,
    text: &str,
    format: OutputFormat,
) -> Run {
    let observed = parse_observations::<F>(text)?;
    let x = complete_matrix(p, cert, &observed)?;
    Ok(match format {
        OutputFormat::Csv => Outcome::text(0, to_csv(&x)),
        OutputFormat::Json => {
            let rows: Vec<Vec<String>> = (0..x.rows())
                .map(|i| (0..x.cols()).map(|j| x[(i, j)].to_string()).collect())
                .collect();
            Outcome::json(0, json!({"rows": rows}))
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn verify_conjecture(
    m: usize,
    n: usize,
    r: usize,
    col_size: Option<usize>,
    filter: FilterKind,
    format: OutputFormat,
    dump: Option<&Path>,
    args: &OracleArgs,
) -> Run {
    let opts = CensusOptions {
        enumeration: EnumOptions {
            filter: match filter {
                FilterKind::BaseMindeg => Filter::BaseSizeAndMinDegree,
                FilterKind::BaseSize => Filter::BaseSize,
            },
            col_size,
        },
        oracle: oracle_params(args),
    };
    let census = lab::verify_conjecture(m, n, r, &opts)?;
    if let Some(path) = dump {
        let bundle = serde_json::to_string_pretty(&census.counterexamples).expect("census serializes");
        std::fs::write(path, bundle)
            .map_err(|e| Error::Contract(format!("cannot write {}: {e}", path.display())))?;
    }
    let code = if census.consistent() { 0 } else { 1 };
    let summary = format!(
        "{} patterns, {} counterexample candidates",
        census.rows.len(),
        census.counterexamples.len()
    );
    let out = match format {
        OutputFormat::Csv => Outcome::text(code, census.to_csv()),
        OutputFormat::Json => {
            Outcome::json(code, json!({"consistent": census.consistent(), "census": census}))
        }
    };
    Ok(out.with_stderr(summary))
}

fn crosscheck(m: usize, n: usize, r: usize, args: &OracleArgs) -> Run {
    let report = lab::known_facts_crosscheck(m, n, r, &oracle_params(args))?;
    let code = if report.disagreements.is_empty() { 0 } else { 1 };
    Ok(Outcome::json(code, json!(report)))
}
