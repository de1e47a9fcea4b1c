//! Brute-force evolution in the full `2^N` product space.
//!
//! Independent of the Dicke-basis code path: rotations act qubit by qubit
//! through closed-form 2x2 matrices, and `Jz`, `Jz²` are diagonal phases.
//! Bit `j` of a basis index is spin `j`; 0 means up (`σz = +1`).

use crate::error::{Error, Result};
use crate::operator::C64;
use crate::spin::{Generator, Moments, PulseSchedule};

pub const MAX_FULL_SPACE_ATOMS: usize = 4;

/// Evolves the x-polarised product state through `schedule` and returns its
/// collective moments.
pub fn full_space_oracle(n_atoms: usize, schedule: &PulseSchedule) -> Result<Moments> {
    if n_atoms == 0 || n_atoms > MAX_FULL_SPACE_ATOMS {
        return Err(Error::Config(format!(
            "full-space oracle supports 1..={MAX_FULL_SPACE_ATOMS} atoms, got {n_atoms}"
        )));
    }
    let dim = 1usize << n_atoms;
    let amp = C64::new((dim as f64).sqrt().recip(), 0.0);
    let mut psi = vec![amp; dim];
    for step in &schedule.steps {
        match step.generator {
            Generator::Jz => diagonal_phase(&mut psi, n_atoms, |m| step.phase * m),
            Generator::Jz2 => diagonal_phase(&mut psi, n_atoms, |m| step.phase * m * m),
            Generator::Jx => {
                let (c, s) = ((step.phase / 2.0).cos(), (step.phase / 2.0).sin());
                let u = [
                    [C64::new(c, 0.0), C64::new(0.0, -s)],
                    [C64::new(0.0, -s), C64::new(c, 0.0)],
                ];
                for q in 0..n_atoms {
                    rotate_qubit(&mut psi, q, &u);
                }
            }
            Generator::Jy => {
                let (c, s) = ((step.phase / 2.0).cos(), (step.phase / 2.0).sin());
                let u = [
                    [C64::new(c, 0.0), C64::new(-s, 0.0)],
                    [C64::new(s, 0.0), C64::new(c, 0.0)],
                ];
                for q in 0..n_atoms {
                    rotate_qubit(&mut psi, q, &u);
                }
            }
        }
    }
    Ok(product_moments(&psi, n_atoms))
}

fn magnetization(index: usize, n_atoms: usize) -> f64 {
    let down = index.count_ones() as f64;
    (n_atoms as f64 - 2.0 * down) / 2.0
}

fn diagonal_phase(psi: &mut [C64], n_atoms: usize, angle: impl Fn(f64) -> f64) {
    for (i, a) in psi.iter_mut().enumerate() {
        *a *= C64::from_polar(1.0, -angle(magnetization(i, n_atoms)));
    }
}

fn rotate_qubit(psi: &mut [C64], qubit: usize, u: &[[C64; 2]; 2]) {
    let bit = 1usize << qubit;
    for i in 0..psi.len() {
        if i & bit == 0 {
            let (up, down) = (psi[i], psi[i | bit]);
            psi[i] = u[0][0] * up + u[0][1] * down;
            psi[i | bit] = u[1][0] * up + u[1][1] * down;
        }
    }
}

fn product_moments(psi: &[C64], n_atoms: usize) -> Moments {
    let i = C64::new(0.0, 1.0);
    let (mut jx, mut jy, mut jz, mut jz2) = (0.0, 0.0, 0.0, 0.0);
    for (idx, a) in psi.iter().enumerate() {
        let p = a.norm_sqr();
        let m = magnetization(idx, n_atoms);
        jz += p * m;
        jz2 += p * m * m;
        for q in 0..n_atoms {
            let bit = 1usize << q;
            let partner = psi[idx ^ bit];
            jx += 0.5 * (a.conj() * partner).re;
            // σy|↓⟩ = -i|↑⟩ and σy|↑⟩ = i|↓⟩.
            let sy = if idx & bit == 0 {
                -i * partner
            } else {
                i * partner
            };
            jy += 0.5 * (a.conj() * sy).re;
        }
    }
    Moments { jx, jy, jz, jz2 }
}
