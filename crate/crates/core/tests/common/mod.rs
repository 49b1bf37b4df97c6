//! Test-only oracles that share no code with the continuation solver.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Discrete bending energy and endpoint of a unit rod given free angles phi_1..phi_N.
fn energy_endpoint(free: &[f64]) -> (f64, f64, f64) {
    let n = free.len();
    let h = 1.0 / n as f64;
    let mut prev = 0.0;
    let mut e = 0.0;
    let (mut x, mut z) = (h, 0.0); // segment 0 is clamped horizontal
    for (k, &p) in free.iter().enumerate() {
        e += (p - prev) * (p - prev);
        prev = p;
        if k + 1 < n {
            x += h * p.cos();
            z += h * p.sin();
        }
    }
    (0.5 * n as f64 * e, x, z)
}

fn penalty(free: &[f64], target: (f64, f64), rho: f64) -> (f64, Vec<f64>) {
    let n = free.len();
    let h = 1.0 / n as f64;
    let (e, x, z) = energy_endpoint(free);
    let (gx, gz) = (x - target.0, z - target.1);
    let mut grad = vec![0.0; n];
    let mut prev = 0.0;
    for k in 0..n {
        let d = free[k] - prev;
        grad[k] += n as f64 * d;
        if k > 0 {
            grad[k - 1] -= n as f64 * d;
        }
        prev = free[k];
        if k + 1 < n {
            grad[k] += rho * (gx * (-h * free[k].sin()) + gz * (h * free[k].cos()));
        }
    }
    (e + 0.5 * rho * (gx * gx + gz * gz), grad)
}

/// Dense BFGS with Armijo backtracking.
fn bfgs(mut x: Vec<f64>, f: impl Fn(&[f64]) -> (f64, Vec<f64>), max_iter: usize) -> Vec<f64> {
    let n = x.len();
    let mut hinv = vec![0.0; n * n];
    for i in 0..n {
        hinv[i * n + i] = 1.0;
    }
    let (mut fx, mut g) = f(&x);
    for _ in 0..max_iter {
        let gn = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if gn < 1e-9 {
            break;
        }
        let d: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<f64>()).collect();
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        let d = if slope >= 0.0 {
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            slope = -g.iter().map(|v| v * v).sum::<f64>();
            g.iter().map(|v| -v).collect()
        } else {
            d
        };
        let mut a = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(p, q)| p + a * q).collect();
            let (fnew, gnew) = f(&xn);
            if fnew <= fx + 1e-4 * a * slope {
                let s: Vec<f64> = xn.iter().zip(&x).map(|(p, q)| p - q).collect();
                let y: Vec<f64> = gnew.iter().zip(&g).map(|(p, q)| p - q).collect();
                let sy: f64 = s.iter().zip(&y).map(|(p, q)| p * q).sum();
                if sy > 1e-14 {
                    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| hinv[i * n + j] * y[j]).sum()).collect();
                    let yhy: f64 = y.iter().zip(&hy).map(|(p, q)| p * q).sum();
                    for i in 0..n {
                        for j in 0..n {
                            hinv[i * n + j] +=
                                (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                        }
                    }
                }
                x = xn;
                fx = fnew;
                g = gnew;
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}

/// Lowest penalised-minimum energy over `restarts` random initial shapes of a
/// unit rod with `segments` segments, or `None` if no restart met the endpoint.
pub fn multistart_penalty_energy(segments: usize, target: (f64, f64), restarts: usize, seed: u64) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<f64> = None;
    for r in 0..restarts {
        let mut x: Vec<f64> = if r % 2 == 0 {
            (0..segments).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
        } else {
            let amps: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            (1..=segments)
                .map(|k| {
                    let s = k as f64 / segments as f64;
                    amps.iter().enumerate().map(|(m, a)| a * ((m + 1) as f64 * std::f64::consts::PI * s).sin()).sum()
                })
                .collect()
        };
        let mut rho = 1e2;
        while rho <= 1e7 {
            x = bfgs(x, |v| penalty(v, target, rho), 400);
            rho *= 10.0;
        }
        let (e, px, pz) = energy_endpoint(&x);
        if ((px - target.0).powi(2) + (pz - target.1).powi(2)).sqrt() < 1e-4 {
            best = Some(best.map_or(e, |b: f64| b.min(e)));
        }
    }
    best
}

/// Central difference of `f` at `p` with step `h` along each axis.
pub fn central_gradient(f: impl Fn(f64, f64) -> f64, p: (f64, f64), h: f64) -> (f64, f64) {
    ((f(p.0 + h, p.1) - f(p.0 - h, p.1)) / (2.0 * h), (f(p.0, p.1 + h) - f(p.0, p.1 - h)) / (2.0 * h))
}
