//! The record dimension: a tree of named fields, fixed-size inner arrays and
//! scalar leaves, plus the flattened leaf table every mapping works from.
//!
//! Leaves are numbered depth-first, pre-order, left to right. This canonical
//! flat order is used for field indices, packed offsets, SoA blob numbering
//! and report rows.
//!
//! Textual form (whitespace-insensitive):
//!
//! ```text
//! schema := scalar | "Record" "{" field ("," field)* "}" | "[" schema ";" count "]"
//! field  := tag ":" schema
//! scalar := i8 | i16 | i32 | i64 | u8 | u16 | u32 | u64 | f32 | f64 | bool
//! ```
//!
//! e.g. `Record{Pos:Record{x:f64,y:f64,z:f64},Mass:f32}` or `Record{A:[f32;2],B:u8}`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarType {
    I8,
    I16,
    I32,
    I64,
    U8,
    U16,
    U32,
    U64,
    F32,
    F64,
    Bool,
}

impl ScalarType {
    pub const ALL: [ScalarType; 11] = [
        ScalarType::I8,
        ScalarType::I16,
        ScalarType::I32,
        ScalarType::I64,
        ScalarType::U8,
        ScalarType::U16,
        ScalarType::U32,
        ScalarType::U64,
        ScalarType::F32,
        ScalarType::F64,
        ScalarType::Bool,
    ];

    /// Storage width in bytes. Booleans occupy one byte.
    pub const fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 | ScalarType::Bool => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::I64 | ScalarType::U64 | ScalarType::F64 => 8,
        }
    }

    pub const fn bits(self) -> u32 {
        self.size() as u32 * 8
    }

    pub const fn is_integer(self) -> bool {
        !matches!(self, ScalarType::F32 | ScalarType::F64 | ScalarType::Bool)
    }

    pub const fn is_signed(self) -> bool {
        matches!(self, ScalarType::I8 | ScalarType::I16 | ScalarType::I32 | ScalarType::I64)
    }

    pub const fn is_float(self) -> bool {
        matches!(self, ScalarType::F32 | ScalarType::F64)
    }

    pub const fn name(self) -> &'static str {
        match self {
            ScalarType::I8 => "i8",
            ScalarType::I16 => "i16",
            ScalarType::I32 => "i32",
            ScalarType::I64 => "i64",
            ScalarType::U8 => "u8",
            ScalarType::U16 => "u16",
            ScalarType::U32 => "u32",
            ScalarType::U64 => "u64",
            ScalarType::F32 => "f32",
            ScalarType::F64 => "f64",
            ScalarType::Bool => "bool",
        }
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalarType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScalarType::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown scalar type `{s}`")))
    }
}

/// Path of child indices from the root to a node. Empty denotes the whole record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct RecordCoord(pub Vec<usize>);

impl RecordCoord {
    pub fn root() -> Self {
        RecordCoord(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        RecordCoord(p)
    }

    pub fn is_prefix_of(&self, other: &RecordCoord) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<usize>> for RecordCoord {
    fn from(v: Vec<usize>) -> Self {
        RecordCoord(v)
    }
}

impl<const K: usize> From<[usize; K]> for RecordCoord {
    fn from(v: [usize; K]) -> Self {
        RecordCoord(v.to_vec())
    }
}

impl fmt::Display for RecordCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RecordSchema {
    Record(Vec<(String, RecordSchema)>),
    Array(usize, Box<RecordSchema>),
    Leaf(ScalarType),
}

impl RecordSchema {
    /// Builds a record node, rejecting duplicate or empty tags and empty records.
    pub fn record<S: Into<String>>(fields: impl IntoIterator<Item = (S, RecordSchema)>) -> Result<Self> {
        let fields: Vec<(String, RecordSchema)> = fields.into_iter().map(|(t, s)| (t.into(), s)).collect();
        if fields.is_empty() {
            return Err(Error::InvalidSchema("record without fields".into()));
        }
        for (i, (tag, _)) in fields.iter().enumerate() {
            if !is_valid_tag(tag) {
                return Err(Error::InvalidSchema(format!("invalid tag `{tag}`")));
            }
            if fields[..i].iter().any(|(t, _)| t == tag) {
                return Err(Error::InvalidSchema(format!("duplicate tag `{tag}`")));
            }
        }
        Ok(RecordSchema::Record(fields))
    }

    pub fn array(count: usize, element: RecordSchema) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidSchema("fixed array count must be >= 1".into()));
        }
        Ok(RecordSchema::Array(count, Box::new(element)))
    }

    pub fn leaf(t: ScalarType) -> Self {
        RecordSchema::Leaf(t)
    }

    /// Checks the structural invariants; used for schemas built from enum literals.
    pub fn validate(&self) -> Result<()> {
        match self {
            RecordSchema::Leaf(_) => Ok(()),
            RecordSchema::Array(n, e) => {
                if *n == 0 {
                    return Err(Error::InvalidSchema("fixed array count must be >= 1".into()));
                }
                e.validate()
            }
            RecordSchema::Record(fields) => {
                RecordSchema::record(fields.iter().map(|(t, _)| (t.clone(), RecordSchema::Leaf(ScalarType::U8))))?;
                fields.iter().try_for_each(|(_, s)| s.validate())
            }
        }
    }

    pub fn child_count(&self) -> usize {
        match self {
            RecordSchema::Record(f) => f.len(),
            RecordSchema::Array(n, _) => *n,
            RecordSchema::Leaf(_) => 0,
        }
    }

    pub fn child(&self, i: usize) -> Option<&RecordSchema> {
        match self {
            RecordSchema::Record(f) => f.get(i).map(|(_, s)| s),
            RecordSchema::Array(n, e) if i < *n => Some(e),
            _ => None,
        }
    }

    /// Child position for a tag; array elements are addressed by their decimal index.
    pub fn child_index(&self, tag: &str) -> Option<usize> {
        match self {
            RecordSchema::Record(f) => f.iter().position(|(t, _)| t == tag),
            RecordSchema::Array(n, _) => tag.parse::<usize>().ok().filter(|i| i < n),
            RecordSchema::Leaf(_) => None,
        }
    }

    fn child_tag(&self, i: usize) -> String {
        match self {
            RecordSchema::Record(f) => f[i].0.clone(),
            _ => i.to_string(),
        }
    }

    pub fn node(&self, coord: &RecordCoord) -> Result<&RecordSchema> {
        let mut node = self;
        for &i in &coord.0 {
            node = node.child(i).ok_or_else(|| Error::BadCoord(coord.to_string()))?;
        }
        Ok(node)
    }

    /// Resolves a dotted path such as `Pos.x` or `A.1` to a coordinate.
    pub fn coord_of(&self, path: &str) -> Result<RecordCoord> {
        let mut node = self;
        let mut coord = Vec::new();
        for tag in path.split('.').map(str::trim).filter(|t| !t.is_empty()) {
            let i = node.child_index(tag).ok_or_else(|| Error::NoSuchField(path.to_string()))?;
            coord.push(i);
            node = node.child(i).expect("index from child_index");
        }
        Ok(RecordCoord(coord))
    }

    pub fn path_of(&self, coord: &RecordCoord) -> Result<String> {
        let mut node = self;
        let mut parts = Vec::with_capacity(coord.0.len());
        for &i in &coord.0 {
            if i >= node.child_count() {
                return Err(Error::BadCoord(coord.to_string()));
            }
            parts.push(node.child_tag(i));
            node = node.child(i).unwrap();
        }
        Ok(parts.join("."))
    }

    /// All leaves in canonical depth-first pre-order.
    pub fn flatten(&self) -> Vec<(RecordCoord, ScalarType)> {
        let mut out = Vec::new();
        fn walk(s: &RecordSchema, path: &mut Vec<usize>, out: &mut Vec<(RecordCoord, ScalarType)>) {
            match s {
                RecordSchema::Leaf(t) => out.push((RecordCoord(path.clone()), *t)),
                _ => {
                    for i in 0..s.child_count() {
                        path.push(i);
                        walk(s.child(i).unwrap(), path, out);
                        path.pop();
                    }
                }
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            RecordSchema::Leaf(_) => 1,
            RecordSchema::Array(n, e) => n * e.leaf_count(),
            RecordSchema::Record(f) => f.iter().map(|(_, s)| s.leaf_count()).sum(),
        }
    }

    pub fn size_packed(&self) -> usize {
        self.flatten().iter().map(|(_, t)| t.size()).sum()
    }

    pub fn size_aligned(&self) -> usize {
        aligned_layout(self.flatten().iter().map(|(_, t)| *t)).1
    }

    /// Rewrites every leaf with `f`, keeping the tree shape.
    pub fn map_leaves(&self, f: &mut impl FnMut(&RecordCoord, ScalarType) -> RecordSchema) -> RecordSchema {
        fn go(
            s: &RecordSchema,
            path: &mut Vec<usize>,
            f: &mut impl FnMut(&RecordCoord, ScalarType) -> RecordSchema,
        ) -> RecordSchema {
            match s {
                RecordSchema::Leaf(t) => f(&RecordCoord(path.clone()), *t),
                RecordSchema::Array(n, e) => {
                    // elements may be rewritten differently, so arrays become records
                    let mut fields = Vec::with_capacity(*n);
                    for i in 0..*n {
                        path.push(i);
                        fields.push((i.to_string(), go(e, path, f)));
                        path.pop();
                    }
                    if fields.windows(2).all(|w| w[0].1 == w[1].1) {
                        RecordSchema::Array(*n, Box::new(fields.swap_remove(0).1))
                    } else {
                        RecordSchema::Record(fields)
                    }
                }
                RecordSchema::Record(fields) => RecordSchema::Record(
                    fields
                        .iter()
                        .enumerate()
                        .map(|(i, (t, c))| {
                            path.push(i);
                            let r = (t.clone(), go(c, path, f));
                            path.pop();
                            r
                        })
                        .collect(),
                ),
            }
        }
        go(self, &mut Vec::new(), f)
    }

    /// Keeps only the leaves for which `keep` holds; returns `None` when nothing remains.
    /// Partially kept fixed arrays turn into records tagged by element index.
    pub fn prune(&self, keep: &impl Fn(&RecordCoord) -> bool) -> Option<RecordSchema> {
        fn go(s: &RecordSchema, path: &mut Vec<usize>, keep: &impl Fn(&RecordCoord) -> bool) -> Option<RecordSchema> {
            match s {
                RecordSchema::Leaf(_) => keep(&RecordCoord(path.clone())).then(|| s.clone()),
                _ => {
                    let mut fields = Vec::new();
                    for i in 0..s.child_count() {
                        path.push(i);
                        if let Some(c) = go(s.child(i).unwrap(), path, keep) {
                            fields.push((s.child_tag(i), c));
                        }
                        path.pop();
                    }
                    if fields.is_empty() {
                        None
                    } else if matches!(s, RecordSchema::Array(n, _) if *n == fields.len()) {
                        Some(RecordSchema::Array(fields.len(), Box::new(fields.swap_remove(0).1)))
                    } else {
                        Some(RecordSchema::Record(fields))
                    }
                }
            }
        }
        go(self, &mut Vec::new(), keep)
    }
}

fn is_valid_tag(tag: &str) -> bool {
    let mut chars = tag.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        || (!tag.is_empty() && tag.chars().all(|c| c.is_ascii_digit()))
}

/// Offsets after minimal natural-alignment padding, and the padded total size.
pub fn aligned_layout(types: impl Iterator<Item = ScalarType>) -> (Vec<usize>, usize) {
    let mut offsets = Vec::new();
    let mut off = 0usize;
    let mut max_align = 1usize;
    for t in types {
        let a = t.size();
        max_align = max_align.max(a);
        off = off.next_multiple_of(a);
        offsets.push(off);
        off += a;
    }
    (offsets, off.next_multiple_of(max_align))
}

impl fmt::Display for RecordSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordSchema::Leaf(t) => write!(f, "{t}"),
            RecordSchema::Array(n, e) => write!(f, "[{e};{n}]"),
            RecordSchema::Record(fields) => {
                write!(f, "Record{{")?;
                for (i, (t, s)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}:{s}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl FromStr for RecordSchema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { s: compact.as_bytes(), pos: 0 };
        let schema = p.schema()?;
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(schema)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at position {}", self.pos))
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn word(&mut self) -> &str {
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap()
    }

    fn schema(&mut self) -> Result<RecordSchema> {
        if self.eat(b'[') {
            let element = self.schema()?;
            self.expect(b';')?;
            let n: usize = self.word().parse().map_err(|_| self.err("expected array count"))?;
            self.expect(b']')?;
            return RecordSchema::array(n, element);
        }
        let w = self.word().to_string();
        if w == "Record" {
            self.expect(b'{')?;
            let mut fields = Vec::new();
            loop {
                let tag = self.word().to_string();
                if tag.is_empty() {
                    return Err(self.err("expected field tag"));
                }
                self.expect(b':')?;
                fields.push((tag, self.schema()?));
                if !self.eat(b',') {
                    break;
                }
            }
            self.expect(b'}')?;
            RecordSchema::record(fields)
        } else {
            w.parse().map(RecordSchema::Leaf)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafInfo {
    pub coord: RecordCoord,
    pub ty: ScalarType,
    pub flat_index: usize,
    /// Sum of the sizes of all preceding leaves.
    pub packed_offset: usize,
    /// Offset under natural alignment padding.
    pub aligned_offset: usize,
    /// Dotted field path, e.g. `Pos.x`.
    pub path: String,
}

/// A schema together with its precomputed leaf table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatSchema {
    schema: RecordSchema,
    leaves: Vec<LeafInfo>,
    size_packed: usize,
    size_aligned: usize,
}

impl FlatSchema {
    pub fn new(schema: RecordSchema) -> Result<Self> {
        schema.validate()?;
        let flat = schema.flatten();
        let (aligned, size_aligned) = aligned_layout(flat.iter().map(|(_, t)| *t));
        let mut off = 0;
        let leaves = flat
            .into_iter()
            .enumerate()
            .map(|(i, (coord, ty))| {
                let info = LeafInfo {
                    path: schema.path_of(&coord).unwrap(),
                    coord,
                    ty,
                    flat_index: i,
                    packed_offset: off,
                    aligned_offset: aligned[i],
                };
                off += ty.size();
                info
            })
            .collect();
        Ok(FlatSchema { schema, leaves, size_packed: off, size_aligned })
    }

    pub fn schema(&self) -> &RecordSchema {
        &self.schema
    }

    pub fn leaves(&self) -> &[LeafInfo] {
        &self.leaves
    }

    pub fn leaf(&self, flat_index: usize) -> &LeafInfo {
        &self.leaves[flat_index]
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn size_packed(&self) -> usize {
        self.size_packed
    }

    pub fn size_aligned(&self) -> usize {
        self.size_aligned
    }

    pub fn leaf_info(&self, coord: &RecordCoord) -> Result<&LeafInfo> {
        match self.schema.node(coord)? {
            RecordSchema::Leaf(_) => {}
            _ => return Err(Error::NotALeaf(coord.to_string())),
        }
        let i = self.leaves.partition_point(|l| l.coord < *coord);
        Ok(&self.leaves[i])
    }

    pub fn leaf_by_path(&self, path: &str) -> Result<&LeafInfo> {
        let coord = self.schema.coord_of(path)?;
        self.leaf_info(&coord)
    }

    /// Flat indices of the leaves below `coord`; contiguous thanks to pre-order numbering.
    pub fn leaf_range(&self, coord: &RecordCoord) -> Result<Range<usize>> {
        self.schema.node(coord)?;
        let start = self.leaves.partition_point(|l| l.coord < *coord);
        let len = self.leaves[start..].iter().take_while(|l| coord.is_prefix_of(&l.coord)).count();
        Ok(start..start + len)
    }
}
