//! Versioned text container for trained models.
//!
//! Layout (see `docs/model-format.md`):
//!
//! ```text
//! YIELDNET-MODEL
//! format_version 1
//! kind GRNN
//! checksum sha256:<64 hex digits over the payload bytes>
//! ---
//! <payload lines>
//! ```
//!
//! Every floating-point value is written as the 16 hex digits of its IEEE-754
//! bit pattern, so decoding is exact.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::dataset::Normalizer;
use crate::error::{Error, Result};
use crate::grnn::GrnnModel;
use crate::mlfn::{MlfnModel, TargetScaler, Topology};
use crate::model::{ModelKind, TrainedModel};
use crate::svr::{SvrConfig, SvrModel};

pub const MAGIC: &str = "YIELDNET-MODEL";
pub const FORMAT_VERSION: u32 = 1;

/// Where a model came from. Stored alongside the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub source: String,
    pub split_seed: Option<u64>,
    pub train_fraction: Option<f64>,
    /// Free-form description of the training settings.
    pub config: String,
    pub library_version: String,
    /// Smallest and largest training target.
    pub target_range: Option<(f64, f64)>,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance {
            source: String::new(),
            split_seed: None,
            train_fraction: None,
            config: String::new(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            target_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: TrainedModel,
    pub provenance: Provenance,
}

fn hex(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

fn hex_list(vs: &[f64]) -> String {
    vs.iter().map(|&v| hex(v)).collect::<Vec<_>>().join(" ")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            _ => return Err(Error::Format(format!("bad escape in `{s}`"))),
        }
    }
    Ok(out)
}

fn encode_payload(file: &ModelFile) -> String {
    let mut lines: Vec<String> = Vec::new();
    let p = &file.provenance;
    let m = &file.model;
    lines.push(format!("kind {}", m.kind()));
    lines.push(format!("source {}", escape(&p.source)));
    lines.push(format!(
        "split_seed {}",
        p.split_seed.map_or("none".to_string(), |s| s.to_string())
    ));
    lines.push(format!(
        "train_fraction {}",
        p.train_fraction.map_or("none".to_string(), hex)
    ));
    lines.push(format!("config {}", escape(&p.config)));
    lines.push(format!("library_version {}", escape(&p.library_version)));
    lines.push(format!(
        "target_range {}",
        p.target_range
            .map_or("none".to_string(), |(lo, hi)| format!("{} {}", hex(lo), hex(hi)))
    ));
    let norm = m.normalizer();
    lines.push(format!("dim {}", norm.dim()));
    lines.push(format!("mean {}", hex_list(norm.mean())));
    lines.push(format!("std {}", hex_list(norm.std())));
    match m {
        TrainedModel::Grnn(g) => {
            lines.push(format!("sigma {}", hex(g.sigma())));
            lines.push(format!("patterns {}", g.pattern_count()));
            for (p, y) in g.patterns().iter().zip(g.targets()) {
                lines.push(format!("pattern {} {}", hex_list(p), hex(*y)));
            }
        }
        TrainedModel::Mlfn(n) => {
            let sizes: Vec<String> = n.topology().layer_sizes().iter().map(|s| s.to_string()).collect();
            lines.push(format!("layers {}", sizes.join(" ")));
            lines.push(format!("scaler {} {}", hex(n.scaler().min()), hex(n.scaler().span())));
            for (l, (w, t)) in n.weights().iter().zip(n.thresholds()).enumerate() {
                lines.push(format!("weights {l} {}", hex_list(w)));
                lines.push(format!("thresholds {l} {}", hex_list(t)));
            }
        }
        TrainedModel::Svr(s) => {
            let c = s.config();
            lines.push(format!(
                "config_values {} {} {} {} {}",
                hex(c.c),
                hex(c.epsilon),
                hex(c.gamma),
                hex(c.tol),
                c.max_passes
            ));
            lines.push(format!("bias {}", hex(s.bias())));
            lines.push(format!("converged {}", s.converged()));
            lines.push(format!("iterations {}", s.iterations()));
            lines.push(format!("dual_objective {}", hex(s.dual_objective())));
            lines.push(format!("support {}", s.support_vectors().len()));
            for (v, b) in s.support_vectors().iter().zip(s.coefficients()) {
                lines.push(format!("vector {} {}", hex_list(v), hex(*b)));
            }
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

fn digest(payload: &str) -> String {
    Sha256::digest(payload.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Renders the complete file text.
pub fn encode(file: &ModelFile) -> String {
    let payload = encode_payload(file);
    format!(
        "{MAGIC}\nformat_version {FORMAT_VERSION}\nkind {}\nchecksum sha256:{}\n---\n{payload}",
        file.model.kind(),
        digest(&payload)
    )
}

/// Line-by-line reader that expects keys in a fixed order.
struct Cursor<'a> {
    lines: std::iter::Peekable<std::str::Lines<'a>>,
}

impl<'a> Cursor<'a> {
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self
            .lines
            .next()
            .ok_or_else(|| Error::Format(format!("missing `{key}` line")))?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            None if line == key => Ok(""),
            _ => Err(Error::Format(format!("expected `{key}`, found `{line}`"))),
        }
    }

    fn done(&mut self) -> Result<()> {
        match self.lines.next() {
            None => Ok(()),
            Some(line) => Err(Error::Format(format!("unexpected trailing line `{line}`"))),
        }
    }
}

fn parse_hex(s: &str) -> Result<f64> {
    if s.len() != 16 {
        return Err(Error::Format(format!("`{s}` is not a 16-digit hex float")));
    }
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| Error::Format(format!("`{s}` is not a 16-digit hex float")))
}

fn parse_hex_list(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(parse_hex).collect()
}

fn parse_hex_exact(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v = parse_hex_list(s)?;
    if v.len() != n {
        return Err(Error::Format(format!("{what}: expected {n} values, found {}", v.len())));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("{what}: `{s}` is not an integer")))
}

fn parse_optional<T>(s: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    if s == "none" {
        Ok(None)
    } else {
        f(s).map(Some)
    }
}

fn decode_payload(payload: &str, header_kind: ModelKind) -> Result<ModelFile> {
    let mut cur = Cursor {
        lines: payload.lines().peekable(),
    };
    let kind: ModelKind = cur.field("kind")?.parse()?;
    if kind != header_kind {
        return Err(Error::Format(format!(
            "header kind {header_kind} disagrees with payload kind {kind}"
        )));
    }
    let source = unescape(cur.field("source")?)?;
    let split_seed = parse_optional(cur.field("split_seed")?, |s| parse_int(s, "split_seed"))?;
    let train_fraction = parse_optional(cur.field("train_fraction")?, parse_hex)?;
    let config = unescape(cur.field("config")?)?;
    let library_version = unescape(cur.field("library_version")?)?;
    let target_range = parse_optional(cur.field("target_range")?, |s| {
        let v = parse_hex_exact(s, 2, "target_range")?;
        Ok((v[0], v[1]))
    })?;
    let dim: usize = parse_int(cur.field("dim")?, "dim")?;
    let mean = parse_hex_exact(cur.field("mean")?, dim, "mean")?;
    let std = parse_hex_exact(cur.field("std")?, dim, "std")?;
    let normalizer = Normalizer::from_parts(mean, std)?;

    let model = match kind {
        ModelKind::Grnn => {
            let sigma = parse_hex(cur.field("sigma")?)?;
            let count: usize = parse_int(cur.field("patterns")?, "patterns")?;
            let mut patterns = Vec::with_capacity(count);
            let mut targets = Vec::with_capacity(count);
            for _ in 0..count {
                let mut v = parse_hex_exact(cur.field("pattern")?, dim + 1, "pattern")?;
                targets.push(v.pop().expect("dim + 1 values"));
                patterns.push(v);
            }
            TrainedModel::Grnn(GrnnModel::new(patterns, targets, sigma, normalizer)?)
        }
        ModelKind::Mlfn => {
            let sizes: Vec<usize> = cur
                .field("layers")?
                .split_whitespace()
                .map(|s| parse_int(s, "layers"))
                .collect::<Result<_>>()?;
            let topology = Topology::new(sizes)?;
            let sc = parse_hex_exact(cur.field("scaler")?, 2, "scaler")?;
            let scaler = TargetScaler::from_parts(sc[0], sc[1])?;
            let sizes = topology.layer_sizes().to_vec();
            let mut params = Vec::with_capacity(topology.param_count());
            for (l, w) in sizes.windows(2).enumerate() {
                let (key_w, key_t) = (cur.field("weights")?, cur.field("thresholds")?);
                params.extend(parse_layer(key_w, l, w[0] * w[1], "weights")?);
                params.extend(parse_layer(key_t, l, w[1], "thresholds")?);
            }
            let mut model = MlfnModel::zeros(topology, normalizer, scaler)?;
            model.set_params(&params)?;
            TrainedModel::Mlfn(model)
        }
        ModelKind::Svr => {
            let cv: Vec<&str> = cur.field("config_values")?.split_whitespace().collect();
            if cv.len() != 5 {
                return Err(Error::Format("config_values needs 5 fields".into()));
            }
            let config = SvrConfig {
                c: parse_hex(cv[0])?,
                epsilon: parse_hex(cv[1])?,
                gamma: parse_hex(cv[2])?,
                tol: parse_hex(cv[3])?,
                max_passes: parse_int(cv[4], "max_passes")?,
            };
            let bias = parse_hex(cur.field("bias")?)?;
            let converged = match cur.field("converged")? {
                "true" => true,
                "false" => false,
                other => return Err(Error::Format(format!("converged: `{other}`"))),
            };
            let iterations = parse_int(cur.field("iterations")?, "iterations")?;
            let objective = parse_hex(cur.field("dual_objective")?)?;
            let count: usize = parse_int(cur.field("support")?, "support")?;
            let mut support = Vec::with_capacity(count);
            let mut coef = Vec::with_capacity(count);
            for _ in 0..count {
                let mut v = parse_hex_exact(cur.field("vector")?, dim + 1, "vector")?;
                coef.push(v.pop().expect("dim + 1 values"));
                support.push(v);
            }
            TrainedModel::Svr(SvrModel::from_parts(
                support, coef, bias, config, normalizer, converged, iterations, objective,
            )?)
        }
    };
    cur.done()?;
    Ok(ModelFile {
        model,
        provenance: Provenance {
            source,
            split_seed,
            train_fraction,
            config,
            library_version,
            target_range,
        },
    })
}

fn parse_layer(rest: &str, layer: usize, n: usize, what: &str) -> Result<Vec<f64>> {
    let (idx, values) = rest.split_once(' ').unwrap_or((rest, ""));
    let idx: usize = parse_int(idx, what)?;
    if idx != layer {
        return Err(Error::Format(format!("{what}: expected layer {layer}, found {idx}")));
    }
    parse_hex_exact(values, n, what)
}

/// Parses file text. The version is checked before anything else is read,
/// and the checksum before the payload is decoded.
pub fn decode(text: &str) -> Result<ModelFile> {
    let mut head = text.splitn(6, '\n');
    let mut next = |what: &str| {
        head.next()
            .ok_or_else(|| Error::Format(format!("truncated header: missing {what}")))
    };
    if next("magic line")? != MAGIC {
        return Err(Error::Format(format!("not a model file (expected `{MAGIC}`)")));
    }
    let version = next("format_version")?
        .strip_prefix("format_version ")
        .ok_or_else(|| Error::Format("missing format_version".into()))?;
    let version: u32 = parse_int(version, "format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let kind: ModelKind = next("kind")?
        .strip_prefix("kind ")
        .ok_or_else(|| Error::Format("missing kind".into()))?
        .parse()?;
    let stored = next("checksum")?
        .strip_prefix("checksum sha256:")
        .ok_or_else(|| Error::Format("missing sha256 checksum".into()))?
        .to_string();
    if next("separator")? != "---" {
        return Err(Error::Format("missing `---` separator".into()));
    }
    let payload = head.next().unwrap_or("");
    let computed = digest(payload);
    if computed != stored {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    decode_payload(payload, kind)
}

pub fn save_model(model: &TrainedModel, provenance: &Provenance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = encode(&ModelFile {
        model: model.clone(),
        provenance: provenance.clone(),
    });
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::mlfn::TrainConfig;
    use proptest::prelude::*;

    fn data() -> Dataset {
        let xs: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![i as f64 * 0.7, ((i * 5) % 7) as f64 - 3.0])
            .collect();
        let ys = xs.iter().map(|x| 10.0 + x[0].sin() * 3.0 + x[1] * 0.5).collect();
        Dataset::from_rows(xs, ys).unwrap()
    }

    fn models() -> Vec<TrainedModel> {
        let ds = data();
        let cfg = TrainConfig {
            max_epochs: 200,
            seed: 7,
            ..TrainConfig::default()
        };
        let topo = Topology::single_hidden(2, 3).unwrap();
        vec![
            GrnnModel::fit(&ds, 0.4).unwrap().into(),
            crate::mlfn::train(&topo, &ds, &cfg).unwrap().model.into(),
            crate::svr::svr_train(&ds, &SvrConfig::default()).unwrap().into(),
        ]
    }

    fn provenance() -> Provenance {
        Provenance {
            source: "line one\nline \\two".into(),
            split_seed: Some(42),
            train_fraction: Some(0.65),
            config: "sigma=0.4".into(),
            target_range: Some((1.5, 20.25)),
            ..Provenance::default()
        }
    }

    #[test]
    fn round_trip_every_kind() {
        for m in models() {
            let file = ModelFile {
                model: m,
                provenance: provenance(),
            };
            let back = decode(&encode(&file)).unwrap();
            assert_eq!(back, file);
        }
    }

    #[test]
    fn mlfn_parameters_survive() {
        let m = models().remove(1);
        let file = ModelFile {
            model: m.clone(),
            provenance: Provenance::default(),
        };
        let (TrainedModel::Mlfn(a), TrainedModel::Mlfn(b)) = (m, decode(&encode(&file)).unwrap().model)
        else {
            panic!("kind changed");
        };
        let (pa, pb) = (a.params(), b.params());
        assert!(pa.iter().zip(&pb).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn corrupted_payload_fails_checksum() {
        let file = ModelFile {
            model: models().remove(0),
            provenance: provenance(),
        };
        let text = encode(&file);
        let at = text.find("---\n").unwrap() + 20;
        let mut bytes = text.into_bytes();
        bytes[at] = if bytes[at] == b'0' { b'1' } else { b'0' };
        let err = decode(std::str::from_utf8(&bytes).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ChecksumMismatch { .. }));
    }

    #[test]
    fn unknown_version_is_rejected_first() {
        let file = ModelFile {
            model: models().remove(0),
            provenance: provenance(),
        };
        let text = encode(&file).replace("format_version 1", "format_version 2");
        assert!(matches!(decode(&text), Err(Error::UnsupportedVersion(2))));
        let garbage = format!("{MAGIC}\nformat_version 7\n");
        assert!(matches!(decode(&garbage), Err(Error::UnsupportedVersion(7))));
    }

    #[test]
    fn header_kind_must_match_payload() {
        let file = ModelFile {
            model: models().remove(0),
            provenance: provenance(),
        };
        let text = encode(&file).replacen("kind GRNN", "kind SVR", 1);
        assert!(matches!(decode(&text), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_non_model_text() {
        assert!(decode("hello").is_err());
        assert!(decode("").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hex_floats_are_exact(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            let back = parse_hex(&hex(v)).unwrap();
            prop_assert_eq!(back.to_bits(), bits);
        }

        #[test]
        fn strings_escape_round_trip(s in ".*") {
            prop_assert_eq!(unescape(&escape(&s)).unwrap(), s);
        }
    }
}
