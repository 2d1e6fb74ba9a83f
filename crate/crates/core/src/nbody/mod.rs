//! All-pairs n-body simulation over any particle layout.
//!
//! Particles are `Record{Pos:{x,y,z}, Vel:{x,y,z}, Mass}` in `f32` or `f64`.
//! Initial positions, velocities and masses are uniform in `[0, 1)` from a
//! seeded ChaCha8 generator, so runs are reproducible across layouts.

mod baseline;
mod bench;
pub mod kernel;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use baseline::{AosBaseline, SoaBaseline};
pub use bench::{run_benchmark, BenchConfig, BenchResult, BenchRow, CSV_HEADER};
pub use kernel::pp_interaction;

use crate::extents::ArrayExtents;
use crate::layout::LayoutSpec;
use crate::mapping::{AoS, AoSoA, Mapping, SoA};
use crate::record::{RecordSchema, ScalarType};
use crate::simd::Real;
use crate::view::View;
use crate::{Error, Result};

/// Softening, squared.
pub const EPS2: f64 = 0.01;
pub const TIMESTEP: f64 = 0.0001;

/// Flat leaf indices of the particle schema.
pub const POS: usize = 0;
pub const VEL: usize = 3;
pub const MASS: usize = 6;

/// Names accepted by [`make_simulation`] besides layout names.
pub const BASELINE_AOS: &str = "baseline-aos";
pub const BASELINE_SOA: &str = "baseline-soa";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F32,
    F64,
}

impl Precision {
    pub fn scalar_type(self) -> ScalarType {
        match self {
            Precision::F32 => ScalarType::F32,
            Precision::F64 => ScalarType::F64,
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(Error::Parse(format!("precision must be f32 or f64, got `{s}`"))),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scalar_type())
    }
}

pub fn particle_schema(precision: Precision) -> RecordSchema {
    let t = precision.scalar_type();
    let xyz = || {
        RecordSchema::record([("x", RecordSchema::Leaf(t)), ("y", RecordSchema::Leaf(t)), ("z", RecordSchema::Leaf(t))])
            .unwrap()
    };
    RecordSchema::record([("Pos", xyz()), ("Vel", xyz()), ("Mass", RecordSchema::Leaf(t))]).unwrap()
}

/// Initial particle values in flat leaf order.
pub fn initial_state(n: usize, seed: u64) -> Vec<[f64; 7]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| std::array::from_fn(|_| rng.gen::<f64>())).collect()
}

pub fn fill_view<M: Mapping, T: Real>(view: &mut View<M>, init: &[[f64; 7]]) {
    for (i, p) in init.iter().enumerate() {
        for (f, &x) in p.iter().enumerate() {
            view.write::<T>(i, f, T::from_f64(x));
        }
    }
}

pub fn view_state<M: Mapping, T: Real>(view: &View<M>) -> Vec<[f64; 7]> {
    (0..view.len()).map(|i| std::array::from_fn(|f| view.read::<T>(i, f).to_f64())).collect()
}

/// Sum of all position components, in particle order.
pub fn checksum(state: &[[f64; 7]]) -> f64 {
    state.iter().map(|p| p[0] + p[1] + p[2]).sum()
}

/// A particle system that can be stepped.
pub trait Simulation {
    fn update(&mut self) -> Result<()>;
    fn advance(&mut self) -> Result<()>;
    /// Current values of all particles in flat leaf order.
    fn state(&self) -> Vec<[f64; 7]>;

    fn checksum(&self) -> f64 {
        checksum(&self.state())
    }

    fn step(&mut self) -> Result<()> {
        self.update()?;
        self.advance()
    }
}

/// The simulation running on a library view.
pub struct LibrarySim<M, T> {
    view: View<M>,
    width: usize,
    _t: std::marker::PhantomData<T>,
}

impl<M: Mapping, T: Real> LibrarySim<M, T> {
    pub fn new(mapping: M, init: &[[f64; 7]], width: usize) -> Result<Self> {
        let mut view = View::new(mapping)?;
        fill_view::<M, T>(&mut view, init);
        Ok(LibrarySim { view, width, _t: std::marker::PhantomData })
    }

    pub fn view(&self) -> &View<M> {
        &self.view
    }

    pub fn view_mut(&mut self) -> &mut View<M> {
        &mut self.view
    }
}

impl<M: Mapping, T: Real> Simulation for LibrarySim<M, T> {
    fn update(&mut self) -> Result<()> {
        kernel::update::<M, T>(&mut self.view, self.width)
    }

    fn advance(&mut self) -> Result<()> {
        kernel::advance::<M, T>(&mut self.view, self.width)
    }

    fn state(&self) -> Vec<[f64; 7]> {
        view_state::<M, T>(&self.view)
    }
}

/// AoSoA with block/lane nested loops in the update's inner loop.
pub struct NestedAoSoASim<T>(LibrarySim<AoSoA, T>);

impl<T: Real> Simulation for NestedAoSoASim<T> {
    fn update(&mut self) -> Result<()> {
        kernel::update_aosoa_nested::<T>(&mut self.0.view, self.0.width)
    }

    fn advance(&mut self) -> Result<()> {
        self.0.advance()
    }

    fn state(&self) -> Vec<[f64; 7]> {
        self.0.state()
    }
}

/// Options for [`make_simulation`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimSpec {
    pub layout: String,
    pub precision: Precision,
    pub n: usize,
    pub simd_width: usize,
    pub seed: u64,
    pub aosoa_nested: bool,
}

/// Builds a simulation for a layout name or one of the hand-written baselines.
/// Common physical layouts are instantiated with their concrete mapping type.
pub fn make_simulation(spec: &SimSpec) -> Result<Box<dyn Simulation>> {
    match spec.precision {
        Precision::F32 => make_typed::<f32>(spec),
        Precision::F64 => make_typed::<f64>(spec),
    }
}

fn make_typed<T: Real>(spec: &SimSpec) -> Result<Box<dyn Simulation>> {
    let init = initial_state(spec.n, spec.seed);
    let w = spec.simd_width;
    if spec.layout == BASELINE_AOS || spec.layout == BASELINE_SOA {
        if w != 1 {
            return Err(Error::InvalidWidth("the hand-written baselines are scalar".into()));
        }
        return Ok(if spec.layout == BASELINE_AOS {
            Box::new(AosBaseline::<T>::new(&init))
        } else {
            Box::new(SoaBaseline::<T>::new(&init))
        });
    }
    let layout: LayoutSpec = spec.layout.parse()?;
    if spec.aosoa_nested && !matches!(layout, LayoutSpec::AoSoA(_)) {
        return Err(Error::Parse("--aosoa-nested needs an aosoa:<L> layout".into()));
    }
    let schema = particle_schema(spec.precision);
    let ext = ArrayExtents::linear(spec.n);
    fn boxed<M: Mapping + 'static, T: Real>(m: M, init: &[[f64; 7]], w: usize) -> Result<Box<dyn Simulation>> {
        Ok(Box::new(LibrarySim::<M, T>::new(m, init, w)?))
    }
    match layout {
        LayoutSpec::AosPacked => boxed::<_, T>(AoS::packed(schema, ext)?, &init, w),
        LayoutSpec::AosAligned => boxed::<_, T>(AoS::aligned(schema, ext)?, &init, w),
        LayoutSpec::SoaSingleBlob => boxed::<_, T>(SoA::single_blob(schema, ext)?, &init, w),
        LayoutSpec::SoaMultiBlob => boxed::<_, T>(SoA::multi_blob(schema, ext)?, &init, w),
        LayoutSpec::AoSoA(l) if spec.aosoa_nested => {
            Ok(Box::new(NestedAoSoASim(LibrarySim::<_, T>::new(AoSoA::new(schema, ext, l)?, &init, w)?)))
        }
        LayoutSpec::AoSoA(l) => boxed::<_, T>(AoSoA::new(schema, ext, l)?, &init, w),
        other => boxed::<_, T>(other.build(schema, ext)?, &init, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(layout: &str, precision: Precision, n: usize, w: usize) -> Box<dyn Simulation> {
        make_simulation(&SimSpec { layout: layout.into(), precision, n, simd_width: w, seed: 7, aosoa_nested: false })
            .unwrap()
    }

    #[test]
    fn schema_shape() {
        let s = particle_schema(Precision::F64);
        assert_eq!(s.to_string(), "Record{Pos:Record{x:f64,y:f64,z:f64},Vel:Record{x:f64,y:f64,z:f64},Mass:f64}");
        assert_eq!(s.leaf_count(), 7);
    }

    #[test]
    fn interaction_properties() {
        let mut vel = [0.0f64; 3];
        pp_interaction::<f64, f64>(&[0.5, 0.5, 0.5], &mut vel, [0.5, 0.5, 0.5], 1.0);
        assert_eq!(vel, [0.0; 3]);
        let mut vel = [0.0f64; 3];
        pp_interaction::<f64, f64>(&[1.0, 0.0, 0.0], &mut vel, [0.0, 0.0, 0.0], 1.0);
        assert!(vel[0] != 0.0 && vel[1] == 0.0 && vel[2] == 0.0);
    }

    #[test]
    fn equal_masses_conserve_momentum() {
        let init = vec![[0.1, 0.2, 0.3, 0.0, 0.0, 0.0, 0.5], [0.7, 0.4, 0.9, 0.0, 0.0, 0.0, 0.5]];
        let mut s = LibrarySim::<_, f64>::new(
            AoS::packed(particle_schema(Precision::F64), ArrayExtents::linear(2)).unwrap(),
            &init,
            1,
        )
        .unwrap();
        s.update().unwrap();
        let st = s.state();
        for (a, b) in st[0][3..6].iter().zip(&st[1][3..6]) {
            assert!((a + b).abs() < 1e-18);
            assert!(*a != 0.0);
        }
    }

    #[test]
    fn layouts_and_baselines_agree() {
        let mut reference = sim(BASELINE_AOS, Precision::F64, 32, 1);
        reference.step().unwrap();
        let expected = reference.state();
        for (layout, w) in
            [("aos-packed", 1), ("soa-mb", 4), ("aosoa:8", 8), (BASELINE_SOA, 1), ("bytesplit:soa-mb", 2)]
        {
            let mut s = sim(layout, Precision::F64, 32, w);
            s.step().unwrap();
            assert_eq!(s.state(), expected, "{layout}");
        }
        let mut nested = make_simulation(&SimSpec {
            layout: "aosoa:4".into(),
            precision: Precision::F64,
            n: 32,
            simd_width: 2,
            seed: 7,
            aosoa_nested: true,
        })
        .unwrap();
        nested.step().unwrap();
        assert_eq!(nested.state(), expected);
    }

    #[test]
    fn width_must_divide() {
        let mut s = sim("soa-mb", Precision::F32, 10, 4);
        assert!(matches!(s.update(), Err(Error::InvalidWidth(_))));
        let mut s = sim("soa-mb", Precision::F32, 16, 3);
        assert!(matches!(s.update(), Err(Error::InvalidWidth(_))));
    }
}
