//! Small deterministic optimizers shared by the modulus and decay searches.

use std::f64::consts::TAU;

use num_complex::Complex64;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximize a `2π`-periodic function: uniform grid, local zoom rounds around
/// the best cells and extra seed angles, then golden-section polishing.
/// Ties resolve to the lowest grid index, so results do not depend on
/// evaluation order.
pub fn periodic_max(f: &dyn Fn(f64) -> f64, grid: usize, rounds: usize, seeds: &[f64], keep: usize) -> (f64, f64) {
    let grid = grid.max(8);
    let step = TAU / grid as f64;
    let values: Vec<f64> = (0..grid).map(|k| f(k as f64 * step)).collect();
    // local maxima of the grid, best first
    let mut peaks: Vec<(f64, f64)> = (0..grid)
        .filter(|&k| {
            let l = values[(k + grid - 1) % grid];
            let r = values[(k + 1) % grid];
            values[k] >= l && values[k] >= r
        })
        .map(|k| (k as f64 * step, values[k]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(keep.max(1));
    for &s in seeds {
        peaks.push((s, f(s)));
    }
    let mut best = peaks[0];
    for &(start, v0) in &peaks {
        let (mut center, mut value) = (start, v0);
        let mut width = step;
        for _ in 0..rounds {
            let sub = 32;
            for j in 0..=sub {
                let t = center - width + 2.0 * width * j as f64 / sub as f64;
                let v = f(t);
                if v > value {
                    value = v;
                    center = t;
                }
            }
            width /= 8.0;
        }
        let (t, v) = golden_max(f, center - 2.0 * width, center + 2.0 * width, 1e-15);
        if v > value {
            value = v;
            center = t;
        }
        if value > best.1 {
            best = (center, value);
        }
    }
    (best.0.rem_euclid(TAU), best.1)
}

/// Options for the two-dimensional search over the open disk.
#[derive(Debug, Clone, Copy)]
pub struct DiskGrid {
    pub radii: usize,
    pub angles: usize,
    /// Number of best grid points refined by compass search.
    pub keep: usize,
    pub min_step: f64,
}

impl Default for DiskGrid {
    fn default() -> Self {
        DiskGrid { radii: 96, angles: 192, keep: 8, min_step: 1e-13 }
    }
}

impl DiskGrid {
    pub fn doubled(self) -> Self {
        DiskGrid { radii: self.radii * 2, angles: self.angles * 2, ..self }
    }

    /// Radii mixing a uniform sweep with geometric accumulation at 1.
    pub fn radius_nodes(&self) -> Vec<f64> {
        let half = self.radii / 2;
        let mut out: Vec<f64> = (0..half).map(|k| k as f64 / half as f64).collect();
        for k in 1..=(self.radii - half) {
            out.push(1.0 - 0.5f64.powf(k as f64 * 40.0 / (self.radii - half) as f64));
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMin {
    pub value: f64,
    pub point: Complex64,
    pub step: f64,
}

/// Minimize `f` over the open unit disk. `f` may return `-inf`.
pub fn disk_minimize(f: &dyn Fn(Complex64) -> f64, seeds: &[Complex64], grid: &DiskGrid) -> DiskMin {
    let radii = grid.radius_nodes();
    let mut samples: Vec<(Complex64, f64)> = Vec::with_capacity(radii.len() * grid.angles);
    for &r in &radii {
        if r == 0.0 {
            let z = Complex64::new(0.0, 0.0);
            samples.push((z, f(z)));
            continue;
        }
        for k in 0..grid.angles {
            let z = Complex64::from_polar(r, TAU * k as f64 / grid.angles as f64);
            samples.push((z, f(z)));
        }
    }
    // stable sort keeps ties in grid order
    samples.sort_by(|a, b| a.1.total_cmp(&b.1));
    let start_step = (TAU / grid.angles as f64).min(1.0 / grid.radii as f64);
    let mut starts: Vec<(Complex64, f64)> = samples.iter().take(grid.keep).copied().collect();
    for &s in seeds {
        if s.norm() < 1.0 {
            starts.push((s, f(s)));
        }
    }
    let mut best = DiskMin { value: f64::INFINITY, point: Complex64::new(0.0, 0.0), step: start_step };
    for (z0, v0) in starts {
        let found = compass(f, z0, v0, start_step, grid.min_step);
        if found.value < best.value {
            best = found;
        }
    }
    best
}

fn compass(f: &dyn Fn(Complex64) -> f64, z0: Complex64, v0: f64, mut step: f64, min_step: f64) -> DiskMin {
    let dirs: Vec<Complex64> = (0..8).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 8.0)).collect();
    let (mut z, mut v) = (z0, v0);
    let mut iters = 0usize;
    while step > min_step && iters < 20_000 {
        iters += 1;
        let mut moved = false;
        for d in &dirs {
            let c = z + step * d;
            if c.norm() >= 1.0 {
                continue;
            }
            let fc = f(c);
            if fc < v {
                v = fc;
                z = c;
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    DiskMin { value: v, point: z, step }
}

/// Spectral norm of a complex matrix.
pub fn spectral_norm(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Singular values in decreasing order.
pub fn singular_values(m: &nalgebra::DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|t| -(t - 0.3) * (t - 0.3), -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn periodic_max_off_grid_peak() {
        let f = |t: f64| (t - 1.2345).cos();
        let (t, v) = periodic_max(&f, 64, 3, &[], 4);
        assert!((t - 1.2345).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disk_min_of_distance() {
        let target = Complex64::new(0.3, -0.4);
        let f = |z: Complex64| (z - target).norm();
        let m = disk_minimize(&f, &[], &DiskGrid::default());
        assert!(m.value < 1e-10);
    }
}
