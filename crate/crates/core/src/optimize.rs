//! Derivative-free maximization.

use crate::error::Result;

/// Result of a local search.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead maximization from `start` with initial simplex edge `scale`.
///
/// Points where `f` returns `None` are infeasible and rank below everything.
pub fn nelder_mead_max<F>(f: F, start: &[f64], scale: f64, budget: usize, x_tol: f64) -> Result<Maximum>
where
    F: Fn(&[f64]) -> Result<Option<f64>>,
{
    let dim = start.len();
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        Ok(f(x)?.unwrap_or(f64::NEG_INFINITY))
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), eval(start)?));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += scale;
        let fx = eval(&x)?;
        simplex.push((x, fx));
    }
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
    };
    while evaluations.get() < budget {
        // best first; ties broken by coordinates for determinism
        simplex.sort_by(|a, b| {
            b.1.total_cmp(&a.1).then_with(|| {
                a.0.iter()
                    .zip(&b.0)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size <= x_tol {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(x, _)| x[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let refl = combine(&centroid, &worst.0, -1.0);
        let f_refl = eval(&refl)?;
        if f_refl > simplex[0].1 {
            let exp = combine(&centroid, &worst.0, -2.0);
            let f_exp = eval(&exp)?;
            simplex[dim] = if f_exp > f_refl { (exp, f_exp) } else { (refl, f_refl) };
        } else if f_refl > simplex[dim - 1].1 {
            simplex[dim] = (refl, f_refl);
        } else {
            let contr = combine(&centroid, &worst.0, 0.5);
            let f_contr = eval(&contr)?;
            if f_contr > worst.1 {
                simplex[dim] = (contr, f_contr);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &item.0, 0.5);
                    let fx = eval(&x)?;
                    *item = (x, fx);
                }
            }
        }
    }
    let best = simplex
        .into_iter()
        .reduce(|a, b| if b.1 > a.1 { b } else { a })
        .expect("simplex is never empty");
    Ok(Maximum {
        x: best.0,
        value: best.1,
        evaluations: evaluations.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_the_top_of_a_quadratic() {
        let f = |x: &[f64]| Ok(Some(-(x[0] - 0.3).powi(2) - 2.0 * (x[1] + 0.1).powi(2)));
        let m = nelder_mead_max(f, &[0.0, 0.0], 0.2, 2000, 1e-10).unwrap();
        assert!((m.x[0] - 0.3).abs() < 1e-8 && (m.x[1] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn respects_infeasible_region() {
        let f = |x: &[f64]| Ok(if x[0] > 0.5 { None } else { Some(x[0]) });
        let m = nelder_mead_max(f, &[0.0], 0.1, 500, 1e-12).unwrap();
        assert!(m.x[0] <= 0.5 && m.x[0] > 0.5 - 1e-9);
    }
}
