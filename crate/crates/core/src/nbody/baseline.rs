//! Hand-written layouts for overhead comparison, using the same kernel arithmetic.

use crate::simd::Real;

use super::kernel::pp_interaction;
use super::{Simulation, TIMESTEP};

#[derive(Debug, Clone, Copy, Default)]
#[repr(C)]
struct Particle<T> {
    pos: [T; 3],
    vel: [T; 3],
    mass: T,
}

/// A plain `Vec` of particle structs.
#[derive(Debug, Clone)]
pub struct AosBaseline<T> {
    particles: Vec<Particle<T>>,
}

impl<T: Real> AosBaseline<T> {
    pub fn new(init: &[[f64; 7]]) -> Self {
        let c = |x: f64| T::from_f64(x);
        let particles = init
            .iter()
            .map(|p| Particle { pos: [c(p[0]), c(p[1]), c(p[2])], vel: [c(p[3]), c(p[4]), c(p[5])], mass: c(p[6]) })
            .collect();
        AosBaseline { particles }
    }
}

impl<T: Real> Simulation for AosBaseline<T> {
    fn update(&mut self) -> crate::Result<()> {
        let n = self.particles.len();
        for i in 0..n {
            let pos = self.particles[i].pos;
            let mut vel = self.particles[i].vel;
            for pj in &self.particles {
                pp_interaction::<T, T>(&pos, &mut vel, pj.pos, pj.mass);
            }
            self.particles[i].vel = vel;
        }
        Ok(())
    }

    fn advance(&mut self) -> crate::Result<()> {
        let dt = T::from_f64(TIMESTEP);
        for p in &mut self.particles {
            for k in 0..3 {
                p.pos[k] = p.pos[k] + p.vel[k] * dt;
            }
        }
        Ok(())
    }

    fn state(&self) -> Vec<[f64; 7]> {
        self.particles
            .iter()
            .map(|p| {
                let mut s = [0.0; 7];
                for k in 0..3 {
                    s[k] = p.pos[k].to_f64();
                    s[3 + k] = p.vel[k].to_f64();
                }
                s[6] = p.mass.to_f64();
                s
            })
            .collect()
    }
}

/// One `Vec` per field.
#[derive(Debug, Clone)]
pub struct SoaBaseline<T> {
    fields: [Vec<T>; 7],
}

impl<T: Real> SoaBaseline<T> {
    pub fn new(init: &[[f64; 7]]) -> Self {
        SoaBaseline { fields: std::array::from_fn(|f| init.iter().map(|p| T::from_f64(p[f])).collect()) }
    }
}

impl<T: Real> Simulation for SoaBaseline<T> {
    fn update(&mut self) -> crate::Result<()> {
        let [px, py, pz, vx, vy, vz, m] = &mut self.fields;
        for i in 0..px.len() {
            let pos = [px[i], py[i], pz[i]];
            let mut vel = [vx[i], vy[i], vz[i]];
            for j in 0..px.len() {
                pp_interaction::<T, T>(&pos, &mut vel, [px[j], py[j], pz[j]], m[j]);
            }
            (vx[i], vy[i], vz[i]) = (vel[0], vel[1], vel[2]);
        }
        Ok(())
    }

    fn advance(&mut self) -> crate::Result<()> {
        let dt = T::from_f64(TIMESTEP);
        let [px, py, pz, vx, vy, vz, _] = &mut self.fields;
        for i in 0..px.len() {
            px[i] = px[i] + vx[i] * dt;
            py[i] = py[i] + vy[i] * dt;
            pz[i] = pz[i] + vz[i] * dt;
        }
        Ok(())
    }

    fn state(&self) -> Vec<[f64; 7]> {
        (0..self.fields[0].len()).map(|i| std::array::from_fn(|f| self.fields[f][i].to_f64())).collect()
    }
}
