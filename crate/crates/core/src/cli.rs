//! Morphism files, run reports and the `abelfree` command line.
//!
//! Morphism file grammar, one item per line:
//!
//! ```text
//! # Dekking's morphism
//! alphabet: 3
//! 1 -> 1 1 2 3
//! 2 -> 1 3 3
//! 3 -> 2 2 3
//! ```
//!
//! `#` starts a comment; blank lines are ignored. Every letter `1..=m` needs exactly one rule.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::decider::{self, BoundChoice, DecideConfig, Status, Verdict};
use crate::error::{Error, Result};
use crate::exactlinalg::FrequencyMatrix;
use crate::oracle::find_abelian_power;
use crate::templates::{self, ParentRule};
use crate::words::{Letter, Morphism, Word};

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_letter(tok: &str, m: usize, line: usize) -> Result<Letter> {
    let v: u32 = tok
        .parse()
        .map_err(|_| parse_error(line, format!("bad letter {tok:?}")))?;
    if v == 0 || v as usize > m {
        return Err(parse_error(line, format!("letter {v} out of range 1..={m}")));
    }
    Ok(Letter(v))
}

/// Parses the line-oriented morphism format.
pub fn parse_morphism_file(text: &str) -> Result<Morphism> {
    let mut alphabet: Option<usize> = None;
    let mut images: Vec<Option<Word>> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some(m) = alphabet else {
            let rest = content
                .strip_prefix("alphabet:")
                .ok_or_else(|| parse_error(line, "expected header `alphabet: m`"))?;
            let m: usize = rest
                .trim()
                .parse()
                .map_err(|_| parse_error(line, format!("bad alphabet size {:?}", rest.trim())))?;
            if m == 0 {
                return Err(parse_error(line, "alphabet size must be at least 1"));
            }
            alphabet = Some(m);
            images = vec![None; m];
            continue;
        };
        let (lhs, rhs) = content
            .split_once("->")
            .ok_or_else(|| parse_error(line, "expected rule `i -> j1 j2 ...`"))?;
        let a = parse_letter(lhs.trim(), m, line)?;
        let image: Vec<Letter> = rhs
            .split_whitespace()
            .map(|tok| parse_letter(tok, m, line))
            .collect::<Result<_>>()?;
        if image.is_empty() {
            return Err(parse_error(line, format!("missing image for letter {a}")));
        }
        let slot = &mut images[a.index()];
        if slot.is_some() {
            return Err(parse_error(line, format!("duplicate rule for letter {a}")));
        }
        *slot = Some(Word(image));
    }
    if alphabet.is_none() {
        return Err(parse_error(last_line.max(1), "missing header `alphabet: m`"));
    }
    let images = images
        .into_iter()
        .enumerate()
        .map(|(i, img)| img.ok_or_else(|| parse_error(last_line, format!("missing rule for letter {}", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Morphism::new(images))
}

/// Renders a morphism in the file format.
pub fn format_morphism(mu: &Morphism) -> String {
    let mut out = format!("alphabet: {}\n", mu.m());
    for (i, img) in mu.images().iter().enumerate() {
        let letters: Vec<String> = img.0.iter().map(Letter::to_string).collect();
        out.push_str(&format!("{} -> {}\n", i + 1, letters.join(" ")));
    }
    out
}

/// Flat record of one `decide` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: String,
    pub k: usize,
    pub reasons: Vec<String>,
    pub witness_position: Option<usize>,
    pub witness_block_length: Option<usize>,
    pub witness_blocks: Option<Vec<String>>,
    pub ancestor_template: Option<String>,
    pub ancestor_factor: Option<String>,
    pub ancestor_count: Option<usize>,
    pub generations: Option<Vec<usize>>,
    pub delta: Option<usize>,
    pub scan_bound: Option<usize>,
    pub derived_bound: Option<usize>,
    pub short_bound: Option<usize>,
    pub norm_estimate: Option<f64>,
    pub det: Option<String>,
    #[serde(rename = "N")]
    pub max_image_length: Option<usize>,
    pub factors_scanned: Option<usize>,
    pub elapsed_ms: u128,
}

impl RunReport {
    pub fn from_verdict(k: usize, v: &Verdict) -> Self {
        let mut r = RunReport {
            status: String::new(),
            k,
            reasons: Vec::new(),
            witness_position: None,
            witness_block_length: None,
            witness_blocks: None,
            ancestor_template: None,
            ancestor_factor: None,
            ancestor_count: None,
            generations: None,
            delta: None,
            scan_bound: None,
            derived_bound: None,
            short_bound: None,
            norm_estimate: None,
            det: None,
            max_image_length: None,
            factors_scanned: None,
            elapsed_ms: v.elapsed_ms,
        };
        match &v.status {
            Status::Free => r.status = "free".into(),
            Status::Contains { witness, blocks, hit } => {
                r.status = "contains".into();
                r.witness_position = Some(witness.position);
                r.witness_block_length = Some(witness.block_length);
                r.witness_blocks = Some(blocks.iter().map(Word::to_string).collect());
                r.ancestor_template = Some(hit.template.to_string());
                r.ancestor_factor = Some(hit.factor.to_string());
            }
            Status::PreconditionFailed { reasons } => {
                r.status = "precondition-failed".into();
                r.reasons = reasons.iter().map(ToString::to_string).collect();
            }
        }
        if let Some(s) = &v.stats {
            r.ancestor_count = Some(s.ancestor_count);
            r.generations = Some(s.generations.clone());
            r.delta = Some(s.delta);
            r.scan_bound = Some(s.scan_bound);
            r.derived_bound = Some(s.derived_bound);
            r.short_bound = Some(s.short_bound);
            r.norm_estimate = Some(s.norm_estimate);
            r.det = Some(s.det.clone());
            r.max_image_length = Some(s.max_image_length);
            r.factors_scanned = Some(s.factors_scanned);
        }
        r
    }
}

/// Exit code for a verdict: 0 free, 1 contains, 2 precondition failed.
pub fn exit_code(status: &Status) -> i32 {
    match status {
        Status::Free => 0,
        Status::Contains { .. } => 1,
        Status::PreconditionFailed { .. } => 2,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    /// Bound from the block-length estimate; always sound
    Derived,
    /// The shorter bound `N+k−2+(k−2)(N−2+mkΔ)`
    Short,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// Borders are single letters
    Letters,
    /// Borders may also be empty
    WithEmpty,
}

impl From<RuleArg> for ParentRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Letters => ParentRule::Letters,
            RuleArg::WithEmpty => ParentRule::WithEmpty,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "abelfree", version, about = "Decide whether the fixed point of a morphism avoids Abelian k-powers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full decision procedure.
    Decide {
        /// Morphism file (`alphabet: m` header, then `i -> image` rules)
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Power to avoid, at least 2
        #[arg(short = 'k')]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Give up once the ancestor closure exceeds this many templates
        #[arg(long = "max-closure", default_value_t = 1_000_000)]
        max_closure: usize,
        /// Factor length to scan
        #[arg(long, value_enum, default_value_t = BoundArg::Derived)]
        bound: BoundArg,
        /// Which borders a parent template may use
        #[arg(long, value_enum, default_value_t = RuleArg::Letters)]
        rule: RuleArg,
    },
    /// Report each precondition with its exact certificate.
    Conditions {
        /// Morphism file (`alphabet: m` header, then `i -> image` rules)
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compute the ancestor closure of the Abelian k-power template.
    Ancestors {
        /// Morphism file (`alphabet: m` header, then `i -> image` rules)
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Power to avoid, at least 2
        #[arg(short = 'k')]
        k: usize,
        /// Print every template, one per line
        #[arg(long)]
        dump: bool,
        /// Give up once the ancestor closure exceeds this many templates
        #[arg(long = "max-closure", default_value_t = 1_000_000)]
        max_closure: usize,
        /// Which borders a parent template may use
        #[arg(long, value_enum, default_value_t = RuleArg::Letters)]
        rule: RuleArg,
    },
    /// Print every factor of the fixed point of length at most L.
    Factors {
        /// Morphism file (`alphabet: m` header, then `i -> image` rules)
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(short = 'L')]
        max_len: usize,
    },
    /// Brute-force search a prefix of the fixed point for an Abelian k-power.
    Oracle {
        /// Morphism file (`alphabet: m` header, then `i -> image` rules)
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Power to avoid, at least 2
        #[arg(short = 'k')]
        k: usize,
        /// Prefix length
        #[arg(short = 'n')]
        n: usize,
    },
}

fn load(path: &PathBuf) -> std::result::Result<Morphism, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_morphism_file(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn render_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(render_value).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

/// Renders a flat object either as JSON or as `key: value` lines with the same fields.
pub fn render(obj: &Map<String, Value>, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", Value::Object(obj.clone())),
        Format::Text => obj
            .iter()
            .map(|(k, v)| format!("{k}: {}\n", render_value(v)))
            .collect(),
    }
}

fn to_object<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v) {
        Ok(Value::Object(map)) => map,
        _ => Map::new(),
    }
}

/// Conditions report for a morphism.
pub fn conditions_report(mu: &Morphism) -> (Map<String, Value>, bool) {
    let report = mu.validate();
    let mut obj = Map::new();
    obj.insert("alphabet".into(), mu.m().into());
    obj.insert("prolongable_on_one".into(), report.prolongable_on_one.into());
    obj.insert("images_expand".into(), report.images_expand.into());
    obj.insert("letters_in_range".into(), report.letters_in_range.into());
    obj.insert("N".into(), mu.max_image_length().into());
    let mut ok = report.passed();
    if report.letters_in_range && mu.m() > 0 {
        let mat = FrequencyMatrix::of(mu);
        obj.insert("frequency_matrix".into(), mat.to_string().into());
        let det = mat.det();
        obj.insert("det".into(), det.to_string().into());
        match mat.contraction_certificate() {
            Ok(cert) => {
                obj.insert("nonsingular".into(), true.into());
                let minors: Vec<Value> = cert.minors.iter().map(|x| x.to_string().into()).collect();
                obj.insert("sylvester_minors".into(), minors.into());
                obj.insert("inverse_norm_lt_one".into(), cert.holds().into());
                if let Ok(est) = mat.inverse_norm_estimate() {
                    obj.insert("norm_estimate".into(), est.into());
                }
                ok &= cert.holds();
            }
            Err(_) => {
                obj.insert("nonsingular".into(), false.into());
                ok = false;
            }
        }
    }
    obj.insert("all_hold".into(), ok.into());
    (obj, ok)
}

fn execute(command: Command, out: &mut dyn Write) -> std::result::Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match command {
        Command::Decide { file, k, format, max_closure, bound, rule } => {
            let mu = load(&file)?;
            let config = DecideConfig {
                max_closure,
                bound: match bound {
                    BoundArg::Derived => BoundChoice::Derived,
                    BoundArg::Short => BoundChoice::Short,
                },
                rule: rule.into(),
                ..DecideConfig::default()
            };
            let verdict = decider::decide(&mu, k, &config).map_err(|e| e.to_string())?;
            let report = RunReport::from_verdict(k, &verdict);
            out.write_all(render(&to_object(&report), format).as_bytes()).map_err(io)?;
            Ok(exit_code(&verdict.status))
        }
        Command::Conditions { file, format } => {
            let mu = load(&file)?;
            let (obj, ok) = conditions_report(&mu);
            out.write_all(render(&obj, format).as_bytes()).map_err(io)?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Ancestors { file, k, dump, max_closure, rule } => {
            let mu = load(&file)?;
            let reasons = decider::check_preconditions(&mu);
            if !reasons.is_empty() {
                for r in reasons {
                    writeln!(out, "precondition failed: {r}").map_err(io)?;
                }
                return Ok(2);
            }
            let anc = templates::ancestors(&mu, k, max_closure, rule.into()).map_err(|e| e.to_string())?;
            writeln!(out, "ancestor_count: {}", anc.len()).map_err(io)?;
            let gens: Vec<String> = anc.generations.iter().map(usize::to_string).collect();
            writeln!(out, "generations: [{}]", gens.join(", ")).map_err(io)?;
            writeln!(out, "delta: {}", templates::delta(&anc.templates)).map_err(io)?;
            if dump {
                for t in &anc.templates {
                    writeln!(out, "{t}").map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Factors { file, max_len } => {
            let mu = load(&file)?;
            let report = mu.validate();
            if !report.passed() {
                writeln!(out, "precondition failed: morphism is not prolongable and expanding").map_err(io)?;
                return Ok(2);
            }
            for f in mu.factor_set(max_len) {
                writeln!(out, "{f}").map_err(io)?;
            }
            Ok(0)
        }
        Command::Oracle { file, k, n } => {
            let mu = load(&file)?;
            if !mu.validate().passed() {
                writeln!(out, "precondition failed: morphism is not prolongable and expanding").map_err(io)?;
                return Ok(2);
            }
            let prefix = mu.fixed_point_prefix(n);
            match find_abelian_power(&prefix, k).map_err(|e| e.to_string())? {
                None => {
                    writeln!(out, "no Abelian {k}-power in prefix of length {}", prefix.len()).map_err(io)?;
                    Ok(0)
                }
                Some(occ) => {
                    let blocks: Vec<String> = occ.blocks(&prefix).iter().map(Word::to_string).collect();
                    writeln!(
                        out,
                        "Abelian {k}-power at position {} with block length {}: {}",
                        occ.position,
                        occ.block_length,
                        blocks.join(" ")
                    )
                    .map_err(io)?;
                    Ok(1)
                }
            }
        }
    }
}

/// Runs the command line; returns the process exit code.
///
/// Exit codes: 0 free, 1 contains, 2 precondition failed, 3 usage, parse or internal error.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let msg = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(msg.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(msg.as_bytes());
                    3
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            3
        }
    }
}
