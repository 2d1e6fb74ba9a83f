use crate::blob::Blob;
use crate::mapping::{AoSoA, Mapping, NrAndOffset};
use crate::simd::{load_lanes, store_lanes, Real, SimdWidth, Vector, W};
use crate::value::Scalar;
use crate::view::View;
use crate::{Error, Result};

use super::{EPS2, MASS, POS, TIMESTEP, VEL};

/// Accelerates particle(s) `i` towards particle `j`.
///
/// `d = pos_i - pos_j`, `r2 = eps2 + d.d`, `vel_i += d * mass_j * r2^(-3/2) * dt`.
#[inline(always)]
pub fn pp_interaction<T: Real, V: Vector<T>>(pos_i: &[V; 3], vel_i: &mut [V; 3], pos_j: [T; 3], mass_j: T) {
    let d = [pos_i[0] - V::splat(pos_j[0]), pos_i[1] - V::splat(pos_j[1]), pos_i[2] - V::splat(pos_j[2])];
    let r2 = V::splat(T::from_f64(EPS2)) + d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let inv = V::splat(T::from_f64(1.0)) / (r2 * r2 * r2).sqrt();
    let sts = V::splat(mass_j) * inv * V::splat(T::from_f64(TIMESTEP));
    for k in 0..3 {
        vel_i[k] = vel_i[k] + d[k] * sts;
    }
}

fn check_width<M: Mapping>(view: &View<M>, width: usize) -> Result<()> {
    if !view.len().is_multiple_of(width) {
        return Err(Error::InvalidWidth(format!("{} particles are not a multiple of width {width}", view.len())));
    }
    Ok(())
}

#[inline(always)]
fn load3<M: Mapping, V: crate::simd::Lanes>(view: &View<M>, lin: usize, base: usize) -> [V; 3] {
    [load_lanes(view, lin, base), load_lanes(view, lin, base + 1), load_lanes(view, lin, base + 2)]
}

/// One all-pairs velocity update, `Wd::N` particles `i` at a time; only `Vel` is written back.
pub fn update_step<M: Mapping, T: Real, Wd: SimdWidth>(view: &mut View<M>) -> Result<()> {
    check_width(view, Wd::N)?;
    let n = view.len();
    for i in (0..n).step_by(Wd::N) {
        let pos: [Wd::Of<T>; 3] = load3(view, i, POS);
        let mut vel: [Wd::Of<T>; 3] = load3(view, i, VEL);
        for j in 0..n {
            let pj = [view.read::<T>(j, POS), view.read::<T>(j, POS + 1), view.read::<T>(j, POS + 2)];
            pp_interaction(&pos, &mut vel, pj, view.read::<T>(j, MASS));
        }
        for (k, v) in vel.into_iter().enumerate() {
            store_lanes(view, i, VEL + k, v);
        }
    }
    Ok(())
}

/// `pos += vel * dt`, `Wd::N` particles at a time.
pub fn move_step<M: Mapping, T: Real, Wd: SimdWidth>(view: &mut View<M>) -> Result<()> {
    check_width(view, Wd::N)?;
    let dt = <Wd::Of<T> as crate::simd::Lanes>::splat(T::from_f64(TIMESTEP));
    for i in (0..view.len()).step_by(Wd::N) {
        let pos: [Wd::Of<T>; 3] = load3(view, i, POS);
        let vel: [Wd::Of<T>; 3] = load3(view, i, VEL);
        for k in 0..3 {
            store_lanes(view, i, POS + k, pos[k] + vel[k] * dt);
        }
    }
    Ok(())
}

#[inline(always)]
fn read_at<T: Scalar>(blobs: &[Blob], p: NrAndOffset) -> T {
    T::read_le(&blobs[p.blob].as_bytes()[p.offset..])
}

/// [`update_step`] for AoSoA with the `j` loop split into blocks and lanes,
/// so no index division happens in the inner loop.
pub fn update_step_aosoa_nested<T: Real, Wd: SimdWidth>(view: &mut View<AoSoA>) -> Result<()> {
    check_width(view, Wd::N)?;
    let n = view.len();
    let lanes = view.mapping().lanes();
    for i in (0..n).step_by(Wd::N) {
        let pos: [Wd::Of<T>; 3] = load3(view, i, POS);
        let mut vel: [Wd::Of<T>; 3] = load3(view, i, VEL);
        let (m, blobs) = (view.mapping(), view.blobs());
        for block in 0..n.div_ceil(lanes) {
            for lane in 0..lanes.min(n - block * lanes) {
                let at = |leaf| read_at::<T>(blobs, m.resolve_block_lane(block, lane, leaf));
                pp_interaction(&pos, &mut vel, [at(POS), at(POS + 1), at(POS + 2)], at(MASS));
            }
        }
        for (k, v) in vel.into_iter().enumerate() {
            store_lanes(view, i, VEL + k, v);
        }
    }
    Ok(())
}

macro_rules! by_width {
    ($width:expr, $f:ident :: <$($pre:ty),*>, $($arg:expr),*) => {
        match $width {
            1 => $f::<$($pre,)* W<1>>($($arg),*),
            2 => $f::<$($pre,)* W<2>>($($arg),*),
            4 => $f::<$($pre,)* W<4>>($($arg),*),
            8 => $f::<$($pre,)* W<8>>($($arg),*),
            16 => $f::<$($pre,)* W<16>>($($arg),*),
            w => Err(Error::InvalidWidth(format!("unsupported SIMD width {w}; use 1, 2, 4, 8 or 16"))),
        }
    };
}

/// [`update_step`] with a runtime width.
pub fn update<M: Mapping, T: Real>(view: &mut View<M>, width: usize) -> Result<()> {
    by_width!(width, update_step::<M, T>, view)
}

pub fn advance<M: Mapping, T: Real>(view: &mut View<M>, width: usize) -> Result<()> {
    by_width!(width, move_step::<M, T>, view)
}

pub fn update_aosoa_nested<T: Real>(view: &mut View<AoSoA>, width: usize) -> Result<()> {
    by_width!(width, update_step_aosoa_nested::<T>, view)
}
