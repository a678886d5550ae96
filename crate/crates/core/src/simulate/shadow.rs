//! Spatially smooth lognormal shadowing.
//!
//! White Gaussian noise on an integer 1 m lattice, keyed by a hash of the
//! seed and node index, is smoothed with a separable Gaussian kernel and
//! read back with trilinear interpolation. Smoothed nodes are produced in
//! cubic tiles on demand, so the field has unbounded extent and any two
//! fields with the same seed agree bit for bit.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::model::GeoPoint;

const TILE: i64 = 32;

/// Kernel truncation in units of the correlation length.
const KERNEL_EXTENT: f64 = 3.0;

#[derive(Debug)]
pub struct ShadowField {
    seed: u64,
    sigma_db: f64,
    kernel: Vec<f64>,
    radius: i64,
    /// Correlation of adjacent lattice nodes along one axis.
    rho1: f64,
    tiles: Mutex<HashMap<[i64; 3], Arc<Vec<f64>>>>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal deviate attached to lattice node `(ix, iy, iz)`.
fn white(seed: u64, ix: i64, iy: i64, iz: i64) -> f64 {
    let mut h = splitmix64(seed);
    for c in [ix, iy, iz] {
        h = splitmix64(h ^ (c as u64));
    }
    let h2 = splitmix64(h);
    let u1 = ((h >> 11) + 1) as f64 / (1u64 << 53) as f64;
    let u2 = (h2 >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

impl ShadowField {
    /// `correlation_m` is the standard deviation of the smoothing kernel;
    /// zero gives independent values at every lattice node.
    pub fn new(seed: u64, sigma_db: f64, correlation_m: f64) -> Result<Self> {
        if !(sigma_db.is_finite() && sigma_db >= 0.0) {
            return Err(Error::InvalidInput("shadowing sigma must be non-negative".into()));
        }
        if !(correlation_m.is_finite() && correlation_m >= 0.0) {
            return Err(Error::InvalidInput("shadowing correlation length must be non-negative".into()));
        }
        let radius = (KERNEL_EXTENT * correlation_m).ceil() as i64;
        let mut kernel: Vec<f64> = (-radius..=radius)
            .map(|i| {
                if correlation_m == 0.0 {
                    1.0
                } else {
                    (-(i * i) as f64 / (2.0 * correlation_m * correlation_m)).exp()
                }
            })
            .collect();
        // unit sum of squares per axis keeps the smoothed field at unit variance
        let norm = kernel.iter().map(|w| w * w).sum::<f64>().sqrt();
        kernel.iter_mut().for_each(|w| *w /= norm);
        let rho1 = kernel.iter().zip(kernel.iter().skip(1)).map(|(a, b)| a * b).sum();
        Ok(Self { seed, sigma_db, kernel, radius, rho1, tiles: Mutex::new(HashMap::new()) })
    }

    pub fn sigma_db(&self) -> f64 {
        self.sigma_db
    }

    fn build_tile(&self, key: [i64; 3]) -> Vec<f64> {
        let r = self.radius;
        let o = [key[0] * TILE, key[1] * TILE, key[2] * TILE];
        let n = TILE as usize;
        let m = (TILE + 2 * r) as usize;
        let k = &self.kernel;

        // white noise on the padded cube, index [x][y][z]
        let mut w = vec![0.0; m * m * m];
        for ix in 0..m {
            for iy in 0..m {
                for iz in 0..m {
                    w[(ix * m + iy) * m + iz] =
                        white(self.seed, o[0] - r + ix as i64, o[1] - r + iy as i64, o[2] - r + iz as i64);
                }
            }
        }
        // smooth along x: n * m * m
        let mut a = vec![0.0; n * m * m];
        for ix in 0..n {
            for iy in 0..m {
                for iz in 0..m {
                    let mut s = 0.0;
                    for (j, wk) in k.iter().enumerate() {
                        s += wk * w[((ix + j) * m + iy) * m + iz];
                    }
                    a[(ix * m + iy) * m + iz] = s;
                }
            }
        }
        // along y: n * n * m
        let mut b = vec![0.0; n * n * m];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..m {
                    let mut s = 0.0;
                    for (j, wk) in k.iter().enumerate() {
                        s += wk * a[(ix * m + iy + j) * m + iz];
                    }
                    b[(ix * n + iy) * m + iz] = s;
                }
            }
        }
        // along z: n * n * n
        let mut c = vec![0.0; n * n * n];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let mut s = 0.0;
                    for (j, wk) in k.iter().enumerate() {
                        s += wk * b[(ix * n + iy) * m + iz + j];
                    }
                    c[(ix * n + iy) * n + iz] = s;
                }
            }
        }
        c
    }

    fn tile(&self, key: [i64; 3]) -> Arc<Vec<f64>> {
        if let Some(t) = self.tiles.lock().expect("shadow cache poisoned").get(&key) {
            return Arc::clone(t);
        }
        let built = Arc::new(self.build_tile(key));
        let mut cache = self.tiles.lock().expect("shadow cache poisoned");
        Arc::clone(cache.entry(key).or_insert(built))
    }

    /// Unit-variance smoothed value at a lattice node.
    pub fn node(&self, ix: i64, iy: i64, iz: i64) -> f64 {
        let key = [ix.div_euclid(TILE), iy.div_euclid(TILE), iz.div_euclid(TILE)];
        let tile = self.tile(key);
        let n = TILE as usize;
        let (lx, ly, lz) = (ix.rem_euclid(TILE) as usize, iy.rem_euclid(TILE) as usize, iz.rem_euclid(TILE) as usize);
        tile[(lx * n + ly) * n + lz]
    }

    /// Linear interpolation weights along one axis, scaled so the
    /// interpolated value keeps unit variance between nodes.
    fn weights(&self, t: f64) -> [f64; 2] {
        let (a, b) = (1.0 - t, t);
        let var = a * a + b * b + 2.0 * a * b * self.rho1;
        let s = var.sqrt();
        [a / s, b / s]
    }

    /// Shadowing in dB at `p`.
    pub fn sample(&self, p: &GeoPoint<f64>) -> f64 {
        if self.sigma_db == 0.0 {
            return 0.0;
        }
        let (fx, fy, fz) = (p.x.floor(), p.y.floor(), p.z.floor());
        let (ix, iy, iz) = (fx as i64, fy as i64, fz as i64);
        let [x0, x1] = self.weights(p.x - fx);
        let [y0, y1] = self.weights(p.y - fy);
        let [z0, z1] = self.weights(p.z - fz);
        let mut v = 0.0;
        for (dx, wx) in [(0, x0), (1, x1)] {
            for (dy, wy) in [(0, y0), (1, y1)] {
                for (dz, wz) in [(0, z0), (1, z1)] {
                    let w = wx * wy * wz;
                    if w != 0.0 {
                        v += w * self.node(ix + dx, iy + dy, iz + dz);
                    }
                }
            }
        }
        self.sigma_db * v
    }
}
