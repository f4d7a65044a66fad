//! Instance files: a strict JSON schema, validation on load and a canonical
//! byte-stable writer.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::domain::{Cover, DomainShape, Protocol, Rect, Selector};
use crate::error::{CommlabError, Result};
use crate::functions::{
    gen_function, gen_relation, AMProtocol, ColoredFunction, ErrorProtocol, FunctionKind,
    OutputEntry, Relation, RelationKind, Target,
};
use crate::info::JointDistribution;
use crate::verify::Case;

pub const INSTANCE_SCHEMA: &str = "commlab-instance-v1";
pub const AM_SCHEMA: &str = "commlab-am-v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SelectorSpec {
    MinIndex,
    SeededRandom { seed: u64 },
    Explicit { table: Vec<usize> },
}

/// Function given by generator parameters or as a full color table.
/// `constant`, `random` and `table` use the instance sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Xor { n: u32 },
    Eq { n: u32 },
    Matvec { parties: usize, n: u32 },
    Constant,
    Random { colors: u32, seed: u64 },
    Table { colors: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RelationSpec {
    ApproxXor {
        n: u32,
        delta: f64,
    },
    Table {
        num_colors: u32,
        admissible: Vec<Vec<u32>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform,
    Table { p: Vec<f64> },
}

/// On-disk instance. Output tables are `[input, box, color]` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: String,
    pub arity: usize,
    pub sizes: Vec<usize>,
    /// Per box, one index list per party.
    pub rectangles: Vec<Vec<Vec<usize>>>,
    pub selector: SelectorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<RelationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_a: Option<Vec<OutputEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_b: Option<Vec<OutputEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmFile {
    pub schema: String,
    pub branches: Vec<InstanceFile>,
}

/// A validated instance together with the file it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub file: InstanceFile,
    pub protocol: Protocol,
    pub function: Option<ColoredFunction>,
    pub relation: Option<Relation>,
    pub distribution: JointDistribution,
    pub error_protocol: Option<ErrorProtocol>,
}

fn at(path: &str, e: CommlabError) -> CommlabError {
    match e {
        CommlabError::InvalidInput(m) => CommlabError::InvalidInput(format!("{path}: {m}")),
        CommlabError::UncoveredCell { cell } => {
            CommlabError::InvalidInput(format!("{path}: cell {cell:?} is not covered by any box"))
        }
        CommlabError::InvalidSelector { cell, box_index } => CommlabError::InvalidInput(format!(
            "{path}: cell {cell:?} is mapped to box {box_index}, which does not contain it"
        )),
        other => CommlabError::InvalidInput(format!("{path}: {other}")),
    }
}

impl InstanceFile {
    /// Checks every invariant and builds the in-memory objects.
    pub fn validate(&self) -> Result<Instance> {
        if self.schema != INSTANCE_SCHEMA {
            return Err(CommlabError::invalid(format!(
                "schema: expected {INSTANCE_SCHEMA:?}, found {:?}",
                self.schema
            )));
        }
        if self.arity != self.sizes.len() {
            return Err(CommlabError::invalid(format!(
                "arity: {} does not match {} sizes",
                self.arity,
                self.sizes.len()
            )));
        }
        let shape = DomainShape::new(self.sizes.clone()).map_err(|e| at("sizes", e))?;
        let boxes = self
            .rectangles
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Rect::new(&shape, r.clone()).map_err(|e| at(&format!("rectangles[{i}]"), e))
            })
            .collect::<Result<Vec<_>>>()?;
        let cover = Cover::new(shape.clone(), boxes).map_err(|e| at("rectangles", e))?;
        let selector = match &self.selector {
            SelectorSpec::MinIndex => Selector::MinIndex,
            SelectorSpec::SeededRandom { seed } => Selector::SeededRandom { seed: *seed },
            SelectorSpec::Explicit { table } => Selector::Explicit {
                table: table.clone(),
            },
        };
        let protocol = Protocol::new(cover, selector).map_err(|e| at("selector", e))?;

        let function = self
            .function
            .as_ref()
            .map(|spec| {
                let f = match spec {
                    FunctionSpec::Xor { n } => gen_function(&FunctionKind::Xor { n: *n }),
                    FunctionSpec::Eq { n } => gen_function(&FunctionKind::Eq { n: *n }),
                    FunctionSpec::Matvec { parties, n } => gen_function(&FunctionKind::MatVec {
                        parties: *parties,
                        n: *n,
                    }),
                    FunctionSpec::Constant => gen_function(&FunctionKind::Constant {
                        sizes: self.sizes.clone(),
                    }),
                    FunctionSpec::Random { colors, seed } => gen_function(&FunctionKind::Random {
                        sizes: self.sizes.clone(),
                        colors: *colors,
                        seed: *seed,
                    }),
                    FunctionSpec::Table { colors } => {
                        ColoredFunction::new(shape.clone(), colors.clone())
                    }
                }?;
                if f.shape() != &shape {
                    return Err(CommlabError::invalid(format!(
                        "function domain {:?} differs from sizes {:?}",
                        f.shape().sizes(),
                        self.sizes
                    )));
                }
                Ok(f)
            })
            .transpose()
            .map_err(|e| at("function", e))?;

        let relation = self
            .relation
            .as_ref()
            .map(|spec| {
                let r = match spec {
                    RelationSpec::ApproxXor { n, delta } => {
                        gen_relation(&RelationKind::ApproxXor {
                            n: *n,
                            delta: *delta,
                        })
                    }
                    RelationSpec::Table {
                        num_colors,
                        admissible,
                    } => Relation::new(shape.clone(), *num_colors, admissible.clone()),
                }?;
                if r.shape() != &shape {
                    return Err(CommlabError::invalid(format!(
                        "relation domain {:?} differs from sizes {:?}",
                        r.shape().sizes(),
                        self.sizes
                    )));
                }
                Ok(r)
            })
            .transpose()
            .map_err(|e| at("relation", e))?;

        let distribution = match &self.distribution {
            None | Some(DistributionSpec::Uniform) => JointDistribution::uniform(shape.clone()),
            Some(DistributionSpec::Table { p }) => JointDistribution::new(shape.clone(), p.clone())
                .map_err(|e| at("distribution", e))?,
        };
        let transcripts = protocol.transcripts();
        if let Some(c) = distribution.support().find(|&c| transcripts[c].is_none()) {
            return Err(CommlabError::invalid(format!(
                "distribution: cell {:?} has positive probability but no box covers it",
                shape.cell(c)
            )));
        }

        let error_protocol = match (&self.g_a, &self.g_b) {
            (None, None) => None,
            (Some(a), Some(b)) => {
                Some(ErrorProtocol::new(protocol.clone(), a, b).map_err(|e| at("g_a/g_b", e))?)
            }
            _ => return Err(CommlabError::invalid("g_a/g_b: both tables must be given")),
        };

        Ok(Instance {
            file: self.clone(),
            protocol,
            function,
            relation,
            distribution,
            error_protocol,
        })
    }

    /// File for a protocol, with an explicit function table and, unless
    /// uniform, an explicit distribution table.
    pub fn from_parts(
        protocol: &Protocol,
        function: Option<&ColoredFunction>,
        relation: Option<&Relation>,
        dist: Option<&JointDistribution>,
    ) -> Self {
        let cover = protocol.cover();
        let shape = cover.shape();
        let selector = match protocol.selector() {
            Selector::MinIndex => SelectorSpec::MinIndex,
            Selector::SeededRandom { seed } => SelectorSpec::SeededRandom { seed: *seed },
            Selector::Explicit { table } => SelectorSpec::Explicit {
                table: table.clone(),
            },
        };
        let uniform = JointDistribution::uniform(shape.clone());
        InstanceFile {
            schema: INSTANCE_SCHEMA.into(),
            arity: shape.arity(),
            sizes: shape.sizes().to_vec(),
            rectangles: cover
                .boxes()
                .iter()
                .map(|b| (0..b.arity()).map(|p| b.factor_indices(p)).collect())
                .collect(),
            selector,
            function: function.map(|f| FunctionSpec::Table {
                colors: f.colors().to_vec(),
            }),
            relation: relation.map(|r| RelationSpec::Table {
                num_colors: r.num_colors(),
                admissible: r.table(),
            }),
            distribution: dist.map(|d| {
                if *d == uniform {
                    DistributionSpec::Uniform
                } else {
                    DistributionSpec::Table {
                        p: d.probabilities().to_vec(),
                    }
                }
            }),
            g_a: None,
            g_b: None,
        }
    }

    pub fn from_case(case: &Case) -> Self {
        let (f, r) = match &case.target {
            Some(Target::Function(f)) => (Some(f), None),
            Some(Target::Relation(r)) => (None, Some(r)),
            None => (None, None),
        };
        Self::from_parts(&case.protocol, f, r, Some(&case.dist))
    }

    pub fn with_error_protocol(mut self, ep: &ErrorProtocol) -> Self {
        self.g_a = Some(ep.entries_a());
        self.g_b = Some(ep.entries_b());
        self
    }

    /// Canonical JSON: sorted keys, two-space indent, floats with 17
    /// significant digits.
    pub fn to_canonical_json(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("serializable"))
    }
}

impl Instance {
    pub fn target(&self) -> Option<Target> {
        match (&self.function, &self.relation) {
            (Some(f), _) => Some(Target::Function(f.clone())),
            (None, Some(r)) => Some(Target::Relation(r.clone())),
            (None, None) => None,
        }
    }

    pub fn to_case(&self) -> Case {
        Case {
            protocol: self.protocol.clone(),
            dist: self.distribution.clone(),
            target: self.target(),
            tree: None,
        }
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                write!(out, "{:.16e}", n.as_f64().expect("finite")).unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            // short rows of scalars stay on one line
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, i) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, i, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, i) in items.iter().enumerate() {
                    pad(out, indent + 2);
                    write_value(out, i, indent + 2);
                    out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push_str(": ");
                write_value(out, &map[*key], indent + 2);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn canonical_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CommlabError::invalid(format!("{path}: {}", e.into_inner()))
    })
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    parse::<InstanceFile>(text)?.validate()
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CommlabError::invalid(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| match e {
        CommlabError::InvalidInput(m) => {
            CommlabError::InvalidInput(format!("{}: {m}", path.display()))
        }
        other => other,
    })
}

pub fn save_instance(path: &Path, file: &InstanceFile) -> Result<()> {
    std::fs::write(path, file.to_canonical_json())
        .map_err(|e| CommlabError::invalid(format!("{}: {e}", path.display())))
}

/// A validated AM file: the protocol and the target of branch 0.
#[derive(Debug, Clone)]
pub struct AmInstance {
    pub file: AmFile,
    pub am: AMProtocol,
    pub target: Target,
}

impl AmFile {
    pub fn validate(&self) -> Result<AmInstance> {
        if self.schema != AM_SCHEMA {
            return Err(CommlabError::invalid(format!(
                "schema: expected {AM_SCHEMA:?}, found {:?}",
                self.schema
            )));
        }
        let mut target = None;
        let mut branches = Vec::with_capacity(self.branches.len());
        for (i, b) in self.branches.iter().enumerate() {
            let inst = b.validate().map_err(|e| at(&format!("branches[{i}]"), e))?;
            if i == 0 {
                target = inst.target();
            }
            let t = target.as_ref().ok_or_else(|| {
                CommlabError::invalid("branches[0]: a function or relation is required")
            })?;
            let ep = match inst.error_protocol {
                Some(ep) => ep,
                None => ErrorProtocol::from_target(inst.protocol, t)
                    .map_err(|e| at(&format!("branches[{i}]"), e))?,
            };
            branches.push(ep);
        }
        let am = AMProtocol::new(branches).map_err(|e| at("branches", e))?;
        let target = target.expect("at least one branch");
        if am.branches()[0].protocol().cover().shape() != target.shape() {
            return Err(CommlabError::invalid("branches: target domain mismatch"));
        }
        Ok(AmInstance {
            file: self.clone(),
            am,
            target,
        })
    }

    pub fn from_am(am: &AMProtocol, target: &Target) -> Self {
        let branches = am
            .branches()
            .iter()
            .enumerate()
            .map(|(i, ep)| {
                let (f, r) = match (i, target) {
                    (0, Target::Function(f)) => (Some(f), None),
                    (0, Target::Relation(r)) => (None, Some(r)),
                    _ => (None, None),
                };
                InstanceFile::from_parts(ep.protocol(), f, r, None).with_error_protocol(ep)
            })
            .collect();
        AmFile {
            schema: AM_SCHEMA.into(),
            branches,
        }
    }

    pub fn to_canonical_json(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("serializable"))
    }
}

pub fn parse_am(text: &str) -> Result<AmInstance> {
    parse::<AmFile>(text)?.validate()
}

pub fn load_am(path: &Path) -> Result<AmInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CommlabError::invalid(format!("{}: {e}", path.display())))?;
    parse_am(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::parity_tightness;

    #[test]
    fn parity_round_trip_is_byte_stable() {
        let file = InstanceFile::from_case(&parity_tightness());
        let text = file.to_canonical_json();
        let back = parse_instance(&text).unwrap();
        assert_eq!(back.file, file);
        assert_eq!(back.file.to_canonical_json(), text);
        assert_eq!(back.to_case(), parity_tightness());
    }

    #[test]
    fn keys_are_sorted() {
        let text = InstanceFile::from_case(&parity_tightness()).to_canonical_json();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        let keys = [
            "arity",
            "distribution",
            "function",
            "rectangles",
            "schema",
            "selector",
            "sizes",
        ];
        assert!(keys.windows(2).all(|w| pos(w[0]) < pos(w[1])));
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let shape = DomainShape::new(vec![1, 3]).unwrap();
        let d = JointDistribution::new(shape.clone(), vec![0.1, 0.2, 0.7]).unwrap();
        let p = Protocol::new(
            Cover::new(shape.clone(), vec![Rect::full(&shape)]).unwrap(),
            Selector::MinIndex,
        )
        .unwrap();
        let file = InstanceFile::from_parts(&p, None, None, Some(&d));
        let text = file.to_canonical_json();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert_eq!(parse_instance(&text).unwrap().distribution, d);
    }

    #[test]
    fn unknown_fields_and_schema_are_rejected() {
        let mut v: Value =
            serde_json::from_str(&InstanceFile::from_case(&parity_tightness()).to_canonical_json())
                .unwrap();
        v["colour"] = Value::from(1);
        let err = parse_instance(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");

        let mut v: Value =
            serde_json::from_str(&InstanceFile::from_case(&parity_tightness()).to_canonical_json())
                .unwrap();
        v["schema"] = Value::from("commlab-instance-v0");
        assert!(parse_instance(&v.to_string())
            .unwrap_err()
            .to_string()
            .contains("schema"));
    }

    #[test]
    fn bad_explicit_selector_names_the_cell() {
        let text = r#"{"schema":"commlab-instance-v1","arity":2,"sizes":[2,2],
            "rectangles":[[[0],[0,1]],[[1],[0,1]]],
            "selector":{"kind":"explicit","table":[1,0,1,1]}}"#;
        let err = parse_instance(text).unwrap_err();
        assert!(matches!(err, CommlabError::InvalidInput(_)));
        assert!(err.to_string().contains("[0, 0]"), "{err}");
    }

    #[test]
    fn overlapping_boxes_with_min_index_load() {
        let text = r#"{"schema":"commlab-instance-v1","arity":2,"sizes":[2,2],
            "rectangles":[[[0,1],[0,1]],[[0],[0]]],
            "selector":{"kind":"min-index"}}"#;
        let inst = parse_instance(text).unwrap();
        assert!(!inst.protocol.cover().validate().is_partition);
    }

    #[test]
    fn windmill_round_trip() {
        let p = Protocol::new(Cover::windmill(), Selector::MinIndex).unwrap();
        let file = InstanceFile::from_parts(&p, None, None, None);
        let back = parse_instance(&file.to_canonical_json()).unwrap();
        assert_eq!(back.protocol, p);
    }

    #[test]
    fn am_round_trip() {
        let f = gen_function(&FunctionKind::Xor { n: 2 }).unwrap();
        let am = AMProtocol::trivial_merlin(&f).unwrap();
        let file = AmFile::from_am(&am, &Target::Function(f.clone()));
        let back = parse_am(&file.to_canonical_json()).unwrap();
        assert_eq!(back.am, am);
        assert_eq!(back.target, Target::Function(f));
    }
}
