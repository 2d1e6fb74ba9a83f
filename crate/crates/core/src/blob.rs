use std::fmt;

/// Default blob alignment: one cache line.
pub const BLOB_ALIGN: usize = 64;

#[derive(Clone, Copy)]
#[repr(C, align(64))]
struct Line([u8; BLOB_ALIGN]);

/// A zero-initialized, 64-byte aligned byte buffer owned by a view.
#[derive(Clone)]
pub struct Blob {
    lines: Vec<Line>,
    len: usize,
}

impl Blob {
    pub fn zeroed(len: usize) -> Blob {
        Blob { lines: vec![Line([0; BLOB_ALIGN]); len.div_ceil(BLOB_ALIGN)], len }
    }

    pub fn try_zeroed(len: usize) -> Result<Blob, std::collections::TryReserveError> {
        let mut lines = Vec::new();
        lines.try_reserve_exact(len.div_ceil(BLOB_ALIGN))?;
        lines.resize(len.div_ceil(BLOB_ALIGN), Line([0; BLOB_ALIGN]));
        Ok(Blob { lines, len })
    }

    pub fn from_bytes(bytes: &[u8]) -> Blob {
        let mut b = Blob::zeroed(bytes.len());
        b.as_bytes_mut().copy_from_slice(bytes);
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn alignment(&self) -> usize {
        BLOB_ALIGN
    }

    #[inline(always)]
    pub fn as_ptr(&self) -> *const u8 {
        self.lines.as_ptr().cast()
    }

    #[inline(always)]
    pub fn as_mut_ptr(&mut self) -> *mut u8 {
        self.lines.as_mut_ptr().cast()
    }

    #[inline(always)]
    pub fn as_bytes(&self) -> &[u8] {
        // SAFETY: `Line` is a plain byte array without padding, and the vector holds
        // at least `len` initialized bytes.
        unsafe { std::slice::from_raw_parts(self.lines.as_ptr().cast::<u8>(), self.len) }
    }

    #[inline(always)]
    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        // SAFETY: as above; the mutable borrow of `self` guarantees exclusivity.
        unsafe { std::slice::from_raw_parts_mut(self.lines.as_mut_ptr().cast::<u8>(), self.len) }
    }
}

impl PartialEq for Blob {
    fn eq(&self, other: &Self) -> bool {
        self.as_bytes() == other.as_bytes()
    }
}

impl Eq for Blob {}

impl fmt::Debug for Blob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Blob({} bytes)", self.len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeroed_and_aligned() {
        for len in [0, 1, 63, 64, 65, 1000] {
            let b = Blob::zeroed(len);
            assert_eq!(b.len(), len);
            assert!(b.as_bytes().iter().all(|&x| x == 0));
            assert_eq!(b.as_bytes().as_ptr() as usize % BLOB_ALIGN, 0);
        }
    }

    #[test]
    fn writes_stick() {
        let mut b = Blob::zeroed(10);
        b.as_bytes_mut()[9] = 7;
        assert_eq!(Blob::from_bytes(b.as_bytes()), b);
    }
}
