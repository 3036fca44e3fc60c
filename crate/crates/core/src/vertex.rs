//! Extreme points of a box intersected with the probability simplex.
//!
//! Every vertex has at most one coordinate strictly inside its interval; all
//! other coordinates sit on a bound. Enumeration picks the free coordinate,
//! walks the lower/upper assignments of the others depth first, and keeps an
//! assignment when the leftover mass fits the free coordinate's interval.

use crate::error::{Error, Result};
use crate::interval::IntervalValuation;
use crate::pmf::PmfValuation;

/// Default cap on the number of configurations accepted for enumeration.
pub const DEFAULT_VERTEX_THRESHOLD: usize = 16;

const VERTEX_TOL: f64 = 1e-12;

/// All vertices of the credal set as PMFs.
pub fn enumerate_vertices(v: &IntervalValuation, threshold: usize) -> Result<Vec<PmfValuation>> {
    Ok(vertices(v, threshold)?
        .into_iter()
        .map(|p| PmfValuation::from_parts_unchecked(v.domain().clone(), p))
        .collect())
}

/// All vertices of the credal set as raw probability vectors.
pub fn vertices(v: &IntervalValuation, threshold: usize) -> Result<Vec<Vec<f64>>> {
    if v.len() > threshold {
        return Err(Error::ThresholdExceeded {
            what: "frame cardinality",
            size: v.len(),
            limit: threshold,
        });
    }
    Ok(box_simplex_vertices(v.lower(), v.upper()))
}

pub(crate) fn box_simplex_vertices(lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let n = lower.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![1.0]];
    }
    let mut out = Vec::new();
    let mut point = vec![0.0; n];
    for free in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != free).collect();
        // suffix sums of the remaining minimum/maximum mass
        let mut rest_min = vec![0.0; others.len() + 1];
        let mut rest_max = vec![0.0; others.len() + 1];
        for k in (0..others.len()).rev() {
            rest_min[k] = rest_min[k + 1] + lower[others[k]];
            rest_max[k] = rest_max[k + 1] + upper[others[k]];
        }
        let mut search = Search {
            lower,
            upper,
            free,
            others: &others,
            rest_min: &rest_min,
            rest_max: &rest_max,
            point: &mut point,
            out: &mut out,
        };
        search.descend(0, 0.0);
    }
    dedup(&mut out);
    out
}

struct Search<'a> {
    lower: &'a [f64],
    upper: &'a [f64],
    free: usize,
    others: &'a [usize],
    rest_min: &'a [f64],
    rest_max: &'a [f64],
    point: &'a mut Vec<f64>,
    out: &'a mut Vec<Vec<f64>>,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, partial: f64) {
        let (lo, hi) = (self.lower[self.free], self.upper[self.free]);
        // residual range still reachable from here
        let r_max = 1.0 - partial - self.rest_min[depth];
        let r_min = 1.0 - partial - self.rest_max[depth];
        if r_max < lo - VERTEX_TOL || r_min > hi + VERTEX_TOL {
            return;
        }
        if depth == self.others.len() {
            let r = 1.0 - partial;
            let accept = if self.free == 0 {
                r >= lo - VERTEX_TOL && r <= hi + VERTEX_TOL
            } else {
                // all-bound vertices are produced once, from free == 0
                r > lo + VERTEX_TOL && r < hi - VERTEX_TOL
            };
            if accept {
                self.point[self.free] = r.clamp(lo, hi);
                self.out.push(self.point.clone());
            }
            return;
        }
        let j = self.others[depth];
        let (l, u) = (self.lower[j], self.upper[j]);
        self.point[j] = l;
        self.descend(depth + 1, partial + l);
        if u - l > VERTEX_TOL {
            self.point[j] = u;
            self.descend(depth + 1, partial + u);
        }
    }
}

fn dedup(points: &mut Vec<Vec<f64>>) {
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= VERTEX_TOL));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Domain, Variable};
    use crate::interval::tighten_to_reachable;
    use proptest::prelude::*;

    fn dom(n: usize) -> Domain {
        Domain::single(Variable::with_range("X", n).unwrap())
    }

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        dedup(&mut v);
        v
    }

    #[test]
    fn three_vertices_of_example_set() {
        let v = IntervalValuation::new(dom(3), vec![0.0, 0.0, 0.5], vec![0.5, 0.5, 1.0]).unwrap();
        let got = vertices(&v, 16).unwrap();
        let want = sorted(vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn precise_has_one_vertex() {
        let p = vec![0.2, 0.3, 0.5];
        let v = IntervalValuation::new(dom(3), p.clone(), p.clone()).unwrap();
        assert_eq!(vertices(&v, 16).unwrap(), vec![p]);
    }

    #[test]
    fn vacuous_binary_has_simplex_corners() {
        let v = IntervalValuation::vacuous(dom(2));
        assert_eq!(vertices(&v, 16).unwrap(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn threshold_is_enforced() {
        let v = IntervalValuation::vacuous(dom(17));
        assert!(matches!(vertices(&v, 16), Err(Error::ThresholdExceeded { .. })));
    }

    #[test]
    fn tightened_binary_vertices() {
        let v = tighten_to_reachable(dom(2), vec![0.2, 0.2], vec![0.9, 0.9]).unwrap();
        let got = vertices(&v, 16).unwrap();
        assert_eq!(got.len(), 2);
        assert!((got[0][0] - 0.2).abs() < 1e-12 && (got[0][1] - 0.8).abs() < 1e-12);
    }

    fn coherent_intervals(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(0.0f64..1.0, n),
            prop::collection::vec(0.0f64..0.6, n),
            prop::collection::vec(0.0f64..0.6, n),
        )
            .prop_map(|(w, a, b)| {
                let s: f64 = w.iter().sum::<f64>().max(1e-9);
                let p: Vec<f64> = w.iter().map(|x| x / s).collect();
                let lo = p.iter().zip(&a).map(|(p, a)| (p - a).max(0.0)).collect();
                let up = p.iter().zip(&b).map(|(p, b)| (p + b).min(1.0)).collect();
                (lo, up)
            })
    }

    proptest! {
        #[test]
        fn vertices_are_feasible_and_extreme((lo, up) in (2usize..=6).prop_flat_map(coherent_intervals)) {
            let n = lo.len();
            let v = IntervalValuation::new(dom(n), lo, up).unwrap();
            for p in vertices(&v, 16).unwrap() {
                prop_assert!(v.contains(&p, 1e-12));
                let interior = p.iter().enumerate()
                    .filter(|(i, x)| **x > v.lower()[*i] + 1e-12 && **x < v.upper()[*i] - 1e-12)
                    .count();
                prop_assert!(interior <= 1);
            }
        }

        #[test]
        fn tightening_preserves_vertex_set((lo, up) in (2usize..=6).prop_flat_map(coherent_intervals)) {
            let n = lo.len();
            // widen the uppers so that tightening has something to cut
            let wide: Vec<f64> = up.iter().map(|u| (u + 0.3).min(1.0)).collect();
            let before = sorted(box_simplex_vertices(&lo, &wide));
            let v = IntervalValuation::new(dom(n), lo, wide).unwrap();
            let after = vertices(&v, 16).unwrap();
            prop_assert_eq!(before.len(), after.len());
            let near = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9);
            for a in &before {
                prop_assert!(after.iter().any(|b| near(a, b)), "vertex {:?} lost", a);
            }
            for b in &after {
                prop_assert!(before.iter().any(|a| near(a, b)), "vertex {:?} gained", b);
            }
        }
    }
}
