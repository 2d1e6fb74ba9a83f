use super::{Mapping, MappingFactory, NrAndOffset};
use crate::blob::Blob;
use crate::extents::ArrayExtents;
use crate::record::{FlatSchema, RecordCoord, RecordSchema};
use crate::value::Value;
use crate::{Error, Result};

/// Routes the leaves below a set of selected subtrees to mapping `A` and all
/// remaining leaves to mapping `B`.
///
/// Each side sees the record dimension pruned to its own leaves. Blobs of `A`
/// come first; blob numbers of `B` are shifted by `A`'s blob count.
#[derive(Debug, Clone)]
pub struct Split<A, B> {
    schema: FlatSchema,
    extents: ArrayExtents,
    selectors: Vec<RecordCoord>,
    // per global leaf: (routed to A, local flat index)
    route: Vec<(bool, usize)>,
    a: A,
    b: Option<B>,
    a_blobs: usize,
}

impl<A: Mapping, B: Mapping> Split<A, B> {
    pub fn new(
        schema: RecordSchema,
        extents: ArrayExtents,
        selectors: Vec<RecordCoord>,
        make_a: impl MappingFactory<A>,
        make_b: impl MappingFactory<B>,
    ) -> Result<Self> {
        let schema = FlatSchema::new(schema)?;
        if selectors.is_empty() {
            return Err(Error::SelectorInvalid("no subtree selected".into()));
        }
        for s in &selectors {
            schema.schema().node(s).map_err(|_| Error::SelectorInvalid(s.to_string()))?;
        }
        let selected = |c: &RecordCoord| selectors.iter().any(|s| s.is_prefix_of(c));
        let (mut na, mut nb) = (0, 0);
        let route = schema
            .leaves()
            .iter()
            .map(|l| {
                if selected(&l.coord) {
                    na += 1;
                    (true, na - 1)
                } else {
                    nb += 1;
                    (false, nb - 1)
                }
            })
            .collect();
        let schema_a = schema.schema().prune(&selected).expect("selectors address leaves");
        let a = make_a.build(schema_a, extents.clone())?;
        let b = match schema.schema().prune(&|c: &RecordCoord| !selected(c)) {
            Some(schema_b) => Some(make_b.build(schema_b, extents.clone())?),
            None => None,
        };
        let a_blobs = a.blob_count();
        Ok(Split { schema, extents, selectors, route, a, b, a_blobs })
    }

    pub fn selected(&self) -> &A {
        &self.a
    }

    pub fn rest(&self) -> Option<&B> {
        self.b.as_ref()
    }

    #[inline(always)]
    fn b(&self) -> &B {
        self.b.as_ref().expect("leaf routed to an empty remainder")
    }
}

// SAFETY: leaves route to one side and blob numbers of `b` are shifted past those of `a`.
unsafe impl<A: Mapping, B: Mapping> Mapping for Split<A, B> {
    fn flat_schema(&self) -> &FlatSchema {
        &self.schema
    }

    fn extents(&self) -> &ArrayExtents {
        &self.extents
    }

    fn blob_sizes(&self) -> Vec<usize> {
        let mut sizes = self.a.blob_sizes();
        if let Some(b) = &self.b {
            sizes.extend(b.blob_sizes());
        }
        sizes
    }

    fn name(&self) -> String {
        let paths: Vec<String> = self.selectors.iter().map(|s| self.schema.schema().path_of(s).unwrap()).collect();
        let rest = self.b.as_ref().map_or_else(|| "null".to_string(), |b| b.name());
        format!("split:{}:{}:{}", paths.join("+"), self.a.name(), rest)
    }

    fn is_computed(&self, leaf: usize) -> bool {
        match self.route[leaf] {
            (true, l) => self.a.is_computed(l),
            (false, l) => self.b().is_computed(l),
        }
    }

    #[inline(always)]
    fn resolve(&self, lin: usize, leaf: usize) -> Option<NrAndOffset> {
        match self.route[leaf] {
            (true, l) => self.a.resolve(lin, l),
            (false, l) => self.b().resolve(lin, l).map(|p| NrAndOffset::new(p.blob + self.a_blobs, p.offset)),
        }
    }

    fn load(&self, blobs: &[Blob], lin: usize, leaf: usize) -> Value {
        let (blobs_a, blobs_b) = blobs.split_at(self.a_blobs);
        match self.route[leaf] {
            (true, l) => self.a.load(blobs_a, lin, l),
            (false, l) => self.b().load(blobs_b, lin, l),
        }
    }

    fn store(&self, blobs: &mut [Blob], lin: usize, leaf: usize, value: Value) {
        let (blobs_a, blobs_b) = blobs.split_at_mut(self.a_blobs);
        match self.route[leaf] {
            (true, l) => self.a.store(blobs_a, lin, l, value),
            (false, l) => self.b().store(blobs_b, lin, l, value),
        }
    }

    fn touched_bytes(&self, lin: usize, leaf: usize, f: &mut dyn FnMut(usize, usize, usize)) {
        match self.route[leaf] {
            (true, l) => self.a.touched_bytes(lin, l, f),
            (false, l) => {
                let shift = self.a_blobs;
                self.b().touched_bytes(lin, l, &mut |blob, start, len| f(blob + shift, start, len))
            }
        }
    }

    fn contiguous_run(&self, lin: usize, leaf: usize, n: usize) -> Option<NrAndOffset> {
        match self.route[leaf] {
            (true, l) => self.a.contiguous_run(lin, l, n),
            (false, l) => self.b().contiguous_run(lin, l, n).map(|p| NrAndOffset::new(p.blob + self.a_blobs, p.offset)),
        }
    }

    fn runtime_state_bytes(&self) -> usize {
        self.a.runtime_state_bytes() + self.b.as_ref().map_or(0, |b| b.runtime_state_bytes())
    }
}
