//! Textual layout names.
//!
//! ```text
//! layout  := "aos-packed" | "aos" | "aos-aligned" | "soa-sb" | "soa-mb" | "soa"
//!          | "aosoa:" L | "one" | "null"
//!          | "bitpack-int:" B ("," B)* word?
//!          | "bitpack-float:" E "," M (";" E "," M)* word?
//!          | "changetype:" PATH "=" TYPE ("," PATH "=" TYPE)* (":" layout)?
//!          | "bytesplit:" layout
//!          | "split:" PATH ("+" PATH)* ":" layout ":" layout
//!          | "trace:" layout
//!          | "heatmap:" G ":" layout
//! word    := "@u32" | "@u64"
//! ```
//!
//! A changetype without an inner layout uses `aos-packed`. `PATH` is a dotted
//! field path; `*` in a changetype map matches every leaf. Inner layouts consume
//! tokens greedily, so inside a split the changetype inner must be spelled out.

use std::fmt;
use std::str::FromStr;

use crate::computed::{BitpackFloatSoA, BitpackIntSoA, Bytesplit, ChangeType, FloatFormat, Null, StorageWord};
use crate::extents::ArrayExtents;
use crate::instrument::{FieldAccessCount, Heatmap};
use crate::mapping::{AoS, AoSoA, DynMapping, One, SoA, Split};
use crate::record::{RecordSchema, ScalarType};
use crate::{Error, Result};

/// Parsed layout name, independent of any schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutSpec {
    AosPacked,
    AosAligned,
    SoaSingleBlob,
    SoaMultiBlob,
    AoSoA(usize),
    One,
    Null,
    BitpackInt { bits: Vec<u32>, word: StorageWord },
    BitpackFloat { formats: Vec<(u32, u32)>, word: StorageWord },
    ChangeType { map: Vec<(String, ScalarType)>, inner: Box<LayoutSpec> },
    Bytesplit(Box<LayoutSpec>),
    Split { paths: Vec<String>, selected: Box<LayoutSpec>, rest: Box<LayoutSpec> },
    Trace(Box<LayoutSpec>),
    Heatmap { granularity: usize, inner: Box<LayoutSpec> },
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| parse_err(format!("invalid {what} `{s}`")))
}

fn split_word(s: &str) -> Result<(&str, StorageWord)> {
    match s.rsplit_once('@') {
        None => Ok((s, StorageWord::U32)),
        Some((head, "u32")) => Ok((head, StorageWord::U32)),
        Some((head, "u64")) => Ok((head, StorageWord::U64)),
        Some((_, w)) => Err(parse_err(format!("unknown storage word `{w}`"))),
    }
}

struct Tokens<'a> {
    parts: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        let t = self.parts.get(self.pos).ok_or_else(|| parse_err(format!("missing {what}")))?;
        self.pos += 1;
        Ok(t.trim())
    }

    fn done(&self) -> bool {
        self.pos >= self.parts.len()
    }

    fn layout(&mut self) -> Result<LayoutSpec> {
        let head = self.next("layout name")?;
        Ok(match head {
            "aos-packed" | "aos" => LayoutSpec::AosPacked,
            "aos-aligned" => LayoutSpec::AosAligned,
            "soa-sb" => LayoutSpec::SoaSingleBlob,
            "soa-mb" | "soa" => LayoutSpec::SoaMultiBlob,
            "one" => LayoutSpec::One,
            "null" => LayoutSpec::Null,
            "aosoa" => LayoutSpec::AoSoA(num(self.next("lane count")?, "lane count")?),
            "bitpack-int" => {
                let (list, word) = split_word(self.next("bit counts")?)?;
                let bits = list.split(',').map(|b| num(b, "bit count")).collect::<Result<_>>()?;
                LayoutSpec::BitpackInt { bits, word }
            }
            "bitpack-float" => {
                let (list, word) = split_word(self.next("float format")?)?;
                let formats = list
                    .split(';')
                    .map(|f| {
                        let (e, m) =
                            f.split_once(',').ok_or_else(|| parse_err(format!("float format `{f}` needs E,M")))?;
                        Ok((num(e, "exponent bits")?, num(m, "mantissa bits")?))
                    })
                    .collect::<Result<_>>()?;
                LayoutSpec::BitpackFloat { formats, word }
            }
            "changetype" => {
                let map = self
                    .next("type map")?
                    .split(',')
                    .map(|kv| {
                        let (path, ty) =
                            kv.split_once('=').ok_or_else(|| parse_err(format!("`{kv}` needs path=type")))?;
                        Ok((path.trim().to_string(), ty.trim().parse()?))
                    })
                    .collect::<Result<_>>()?;
                let inner = if self.done() { LayoutSpec::AosPacked } else { self.layout()? };
                LayoutSpec::ChangeType { map, inner: Box::new(inner) }
            }
            "bytesplit" => LayoutSpec::Bytesplit(Box::new(self.layout()?)),
            "split" => {
                let paths = self.next("selector")?.split('+').map(|p| p.trim().to_string()).collect();
                let selected = Box::new(self.layout()?);
                let rest = Box::new(self.layout()?);
                LayoutSpec::Split { paths, selected, rest }
            }
            "trace" => LayoutSpec::Trace(Box::new(self.layout()?)),
            "heatmap" => {
                let granularity = num(self.next("granularity")?, "granularity")?;
                LayoutSpec::Heatmap { granularity, inner: Box::new(self.layout()?) }
            }
            other => return Err(parse_err(format!("unknown layout `{other}`"))),
        })
    }
}

impl FromStr for LayoutSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut t = Tokens { parts: s.split(':').collect(), pos: 0 };
        let spec = t.layout()?;
        if !t.done() {
            return Err(parse_err(format!("trailing input in layout `{s}`")));
        }
        Ok(spec)
    }
}

impl fmt::Display for LayoutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |w: &StorageWord| if *w == StorageWord::U64 { "@u64" } else { "" };
        match self {
            LayoutSpec::AosPacked => f.write_str("aos-packed"),
            LayoutSpec::AosAligned => f.write_str("aos-aligned"),
            LayoutSpec::SoaSingleBlob => f.write_str("soa-sb"),
            LayoutSpec::SoaMultiBlob => f.write_str("soa-mb"),
            LayoutSpec::AoSoA(l) => write!(f, "aosoa:{l}"),
            LayoutSpec::One => f.write_str("one"),
            LayoutSpec::Null => f.write_str("null"),
            LayoutSpec::BitpackInt { bits, word: w } => {
                let b: Vec<String> = bits.iter().map(u32::to_string).collect();
                write!(f, "bitpack-int:{}{}", b.join(","), word(w))
            }
            LayoutSpec::BitpackFloat { formats, word: w } => {
                let b: Vec<String> = formats.iter().map(|(e, m)| format!("{e},{m}")).collect();
                write!(f, "bitpack-float:{}{}", b.join(";"), word(w))
            }
            LayoutSpec::ChangeType { map, inner } => {
                let m: Vec<String> = map.iter().map(|(p, t)| format!("{p}={t}")).collect();
                write!(f, "changetype:{}:{inner}", m.join(","))
            }
            LayoutSpec::Bytesplit(inner) => write!(f, "bytesplit:{inner}"),
            LayoutSpec::Split { paths, selected, rest } => write!(f, "split:{}:{selected}:{rest}", paths.join("+")),
            LayoutSpec::Trace(inner) => write!(f, "trace:{inner}"),
            LayoutSpec::Heatmap { granularity, inner } => write!(f, "heatmap:{granularity}:{inner}"),
        }
    }
}

impl LayoutSpec {
    /// Instantiates the layout for a record dimension and extents.
    pub fn build(&self, schema: RecordSchema, extents: ArrayExtents) -> Result<DynMapping> {
        let inner = |spec: &LayoutSpec| {
            let spec = spec.clone();
            move |s: RecordSchema, e: ArrayExtents| spec.build(s, e)
        };
        Ok(match self {
            LayoutSpec::AosPacked => Box::new(AoS::packed(schema, extents)?),
            LayoutSpec::AosAligned => Box::new(AoS::aligned(schema, extents)?),
            LayoutSpec::SoaSingleBlob => Box::new(SoA::single_blob(schema, extents)?),
            LayoutSpec::SoaMultiBlob => Box::new(SoA::multi_blob(schema, extents)?),
            LayoutSpec::AoSoA(l) => Box::new(AoSoA::new(schema, extents, *l)?),
            LayoutSpec::One => {
                if extents.len() != 1 {
                    return Err(Error::Arity { expected: 1, got: extents.len() });
                }
                Box::new(One::new(schema)?)
            }
            LayoutSpec::Null => Box::new(Null::new(schema, extents)?),
            LayoutSpec::BitpackInt { bits, word } => {
                if bits.len() == 1 {
                    Box::new(BitpackIntSoA::uniform(schema, extents, bits[0], *word)?)
                } else {
                    Box::new(BitpackIntSoA::new(schema, extents, bits.clone(), *word)?)
                }
            }
            LayoutSpec::BitpackFloat { formats, word } => {
                let mut fs = formats.iter().map(|&(e, m)| FloatFormat::new(e, m)).collect::<Result<Vec<_>>>()?;
                if fs.len() == 1 {
                    fs = vec![fs[0]; schema.leaf_count()];
                }
                Box::new(BitpackFloatSoA::new(schema, extents, fs, *word)?)
            }
            LayoutSpec::ChangeType { map, inner: i } => {
                let map: Vec<(&str, ScalarType)> = map.iter().map(|(p, t)| (p.as_str(), *t)).collect();
                Box::new(ChangeType::with_paths(schema, extents, &map, inner(i))?)
            }
            LayoutSpec::Bytesplit(i) => Box::new(Bytesplit::new(schema, extents, inner(i))?),
            LayoutSpec::Split { paths, selected, rest } => {
                let coords = paths
                    .iter()
                    .map(|p| schema.coord_of(p).map_err(|_| Error::SelectorInvalid(p.clone())))
                    .collect::<Result<Vec<_>>>()?;
                Box::new(Split::<DynMapping, DynMapping>::new(schema, extents, coords, inner(selected), inner(rest))?)
            }
            LayoutSpec::Trace(i) => Box::new(FieldAccessCount::new(i.build(schema, extents)?)),
            LayoutSpec::Heatmap { granularity, inner: i } => {
                Box::new(Heatmap::new(i.build(schema, extents)?, *granularity)?)
            }
        })
    }
}

/// Parses a layout name and instantiates it.
pub fn parse_layout(name: &str, schema: RecordSchema, extents: ArrayExtents) -> Result<DynMapping> {
    name.parse::<LayoutSpec>()?.build(schema, extents)
}
