#![allow(dead_code)]

pub mod oracle;

use causal_bounds::{BinaryJoint, IvJoint};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// A random point of the `k`-simplex with every coordinate at least `floor`.
pub fn random_simplex<R: Rng>(rng: &mut R, k: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter()
        .map(|v| floor + (1.0 - k as f64 * floor) * v / s)
        .collect()
}

pub fn random_joint<R: Rng>(rng: &mut R, floor: f64) -> BinaryJoint {
    let w = random_simplex(rng, 4, floor);
    BinaryJoint::from_cells(w[0], w[1], w[2], 1.0 - w[0] - w[1] - w[2]).unwrap()
}

/// An IV joint generated by a random distribution over the 16 types, so it
/// is always compatible with the IV model.
pub fn random_compatible_iv<R: Rng>(rng: &mut R) -> IvJoint {
    let types = random_simplex(rng, 16, 0.0);
    let mut cond = [[[0.0; 2]; 2]; 2];
    for (k, &m) in types.iter().enumerate() {
        let (r, t) = (k / 4, k % 4);
        for (z, table) in cond.iter_mut().enumerate() {
            let x = (r >> z) & 1;
            let y = (t >> x) & 1;
            table[x][y] += m;
        }
    }
    for table in cond.iter_mut() {
        let s: f64 = table.iter().flatten().sum();
        table[1][1] = 1.0 - (s - table[1][1]);
    }
    IvJoint::new(rng.random_range(0.2..0.8), cond, 1000).unwrap()
}
