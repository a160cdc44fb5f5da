// SPDX-License-Identifier: Apache-2.0

//! Limited-memory BFGS with a backtracking Armijo line search.

use std::collections::VecDeque;

const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Consecutive small-change iterations required before stopping.
const STALL_COUNT: usize = 3;

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which returns the value and gradient at a point.
///
/// Stops when the relative change of the value stays below `tolerance` for a
/// few consecutive iterations, when no descent step can be found, or after
/// `max_iterations` (reported as not converged).
pub(crate) fn minimize<F>(mut f: F, x0: Vec<f64>, tolerance: f64, max_iterations: usize) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut stalled = 0;

    for iter in 1..=max_iterations {
        if dot(&g, &g).sqrt() == 0.0 || !fx.is_finite() {
            return Minimum {
                x,
                iterations: iter - 1,
                converged: fx.is_finite(),
            };
        }

        let mut dir = two_loop(&g, &history);
        if dot(&dir, &g) >= 0.0 {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
        }

        let step = match line_search(&mut f, &x, fx, &g, &dir, history.is_empty()) {
            Some(step) => step,
            None if !history.is_empty() => {
                history.clear();
                let sd: Vec<f64> = g.iter().map(|v| -v).collect();
                match line_search(&mut f, &x, fx, &g, &sd, true) {
                    Some(step) => step,
                    None => {
                        return Minimum {
                            x,
                            iterations: iter,
                            converged: true,
                        }
                    }
                }
            }
            None => {
                return Minimum {
                    x,
                    iterations: iter,
                    converged: true,
                }
            }
        };
        let (x_new, f_new, g_new) = step;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let change = (fx - f_new).abs() / fx.abs().max(1.0);
        x = x_new;
        fx = f_new;
        g = g_new;

        if change < tolerance {
            stalled += 1;
            if stalled >= STALL_COUNT {
                return Minimum {
                    x,
                    iterations: iter,
                    converged: true,
                };
            }
        } else {
            stalled = 0;
        }
    }
    Minimum {
        x,
        iterations: max_iterations,
        converged: false,
    }
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

type Step = (Vec<f64>, f64, Vec<f64>);

fn line_search<F>(
    f: &mut F,
    x: &[f64],
    fx: f64,
    g: &[f64],
    dir: &[f64],
    first: bool,
) -> Option<Step>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let slope = dot(g, dir);
    if !(slope < 0.0) {
        return None;
    }
    let mut t = if first {
        (1.0 / dot(dir, dir).sqrt()).min(1.0)
    } else {
        1.0
    };
    for _ in 0..MAX_BACKTRACKS {
        let trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + t * di).collect();
        let (ft, gt) = f(&trial);
        if ft.is_finite() && ft <= fx + ARMIJO * t * slope {
            return (ft < fx).then_some((trial, ft, gt));
        }
        t *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            (v, g)
        };
        let m = minimize(rosen, vec![-1.2, 1.0], 1e-15, 10_000);
        assert!(m.converged);
        assert!(
            (m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn reports_iteration_cap() {
        let quad = |x: &[f64]| {
            (
                x[0] * x[0] + 10.0 * x[1] * x[1],
                vec![2.0 * x[0], 20.0 * x[1]],
            )
        };
        let m = minimize(quad, vec![3.0, -2.0], 1e-30, 1);
        assert!(!m.converged);
        assert_eq!(m.iterations, 1);
    }
}
