//! Derivative-free simplex minimizer (Nelder-Mead) with the textbook
//! reflection/expansion/contraction/shrink schedule.

use crate::config::NelderMeadConfig;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct MinimizeOutcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    /// False when the iteration cap was hit before the simplex collapsed;
    /// `x` is still the best point seen.
    pub converged: bool,
}

/// Minimize `f` starting from an explicit simplex of `dim + 1` vertices.
/// Converges when the simplex diameter (max pairwise max-coordinate
/// distance) drops below `cfg.diameter_tolerance`.
pub fn nelder_mead<T: Real>(
    cfg: &NelderMeadConfig<T>,
    f: impl Fn(&[T]) -> T,
    simplex: Vec<Vec<T>>,
) -> MinimizeOutcome<T> {
    let dim = simplex[0].len();
    assert!(simplex.len() == dim + 1, "simplex needs dim + 1 vertices");

    let mut verts = simplex;
    let mut vals: Vec<T> = verts.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let converged = loop {
        // order best..worst
        let mut order: Vec<usize> = (0..verts.len()).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite objective"));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim.saturating_sub(1).min(dim - 1).max(0)];

        if diameter(&verts) < cfg.diameter_tolerance {
            break true;
        }
        if iterations >= cfg.max_iterations {
            break false;
        }
        iterations += 1;

        // centroid of all but the worst vertex
        let mut centroid = vec![T::zero(); dim];
        for (i, v) in verts.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, &x) in centroid.iter_mut().zip(v) {
                *c = *c + x;
            }
        }
        let inv = T::one() / T::of(dim as f64);
        for c in centroid.iter_mut() {
            *c = *c * inv;
        }

        let reflected = blend(&centroid, &verts[worst], -cfg.reflection);
        let f_r = f(&reflected);

        if f_r < vals[best] {
            let expanded = blend(&centroid, &verts[worst], -cfg.expansion);
            let f_e = f(&expanded);
            if f_e < f_r {
                verts[worst] = expanded;
                vals[worst] = f_e;
            } else {
                verts[worst] = reflected;
                vals[worst] = f_r;
            }
        } else if f_r < vals[second_worst] {
            verts[worst] = reflected;
            vals[worst] = f_r;
        } else {
            // contract toward the better of (worst, reflected)
            let (anchor, f_anchor) = if f_r < vals[worst] {
                (reflected.clone(), f_r)
            } else {
                (verts[worst].clone(), vals[worst])
            };
            let contracted = blend(&centroid, &anchor, cfg.contraction);
            let f_c = f(&contracted);
            if f_c < f_anchor {
                verts[worst] = contracted;
                vals[worst] = f_c;
            } else {
                // shrink everything toward the best vertex
                let anchor_v = verts[best].clone();
                for (i, v) in verts.iter_mut().enumerate() {
                    if i == best {
                        continue;
                    }
                    for (x, &a) in v.iter_mut().zip(&anchor_v) {
                        *x = a + cfg.shrink * (*x - a);
                    }
                    vals[i] = f(v);
                }
            }
        }
    };

    let mut best_i = 0;
    for i in 1..vals.len() {
        if vals[i] < vals[best_i] {
            best_i = i;
        }
    }
    MinimizeOutcome { x: verts[best_i].clone(), value: vals[best_i], iterations, converged }
}

/// centroid + t*(point - centroid)
fn blend<T: Real>(centroid: &[T], point: &[T], t: T) -> Vec<T> {
    centroid.iter().zip(point).map(|(&c, &p)| c + t * (p - c)).collect()
}

fn diameter<T: Real>(verts: &[Vec<T>]) -> T {
    let mut d = T::zero();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            for (&a, &b) in verts[i].iter().zip(&verts[j]) {
                let dist = (a - b).abs();
                if dist > d {
                    d = dist;
                }
            }
        }
    }
    d
}

/// Default 1-D simplex around an initial guess: `{x0, x0*(1 + spread)}`,
/// falling back to an absolute step when the guess is zero.
pub fn simplex_around<T: Real>(x0: T, spread: T) -> Vec<Vec<T>> {
    let step = if x0 == T::zero() { spread } else { x0 * spread };
    vec![vec![x0], vec![x0 + step]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_1d() {
        let cfg = NelderMeadConfig::<f64> { diameter_tolerance: 1e-14, ..Default::default() };
        let out = nelder_mead(&cfg, |x| (x[0] - 3.0).powi(2), simplex_around(1.0, 0.05));
        assert!(out.converged);
        assert!((out.x[0] - 3.0).abs() < 1e-9, "{}", out.x[0]);
    }

    #[test]
    fn rosenbrock_2d() {
        let cfg = NelderMeadConfig::<f64> {
            diameter_tolerance: 1e-12,
            max_iterations: 5000,
            ..Default::default()
        };
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let simplex = vec![vec![-1.2, 1.0], vec![-1.0, 1.0], vec![-1.2, 1.2]];
        let out = nelder_mead(&cfg, f, simplex);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5, "{:?}", out.x);
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let cfg = NelderMeadConfig::<f64> { max_iterations: 3, diameter_tolerance: 1e-300, ..Default::default() };
        let out = nelder_mead(&cfg, |x| x[0] * x[0], simplex_around(10.0, 0.05));
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }
}
