#![allow(dead_code)]

use credal_vn::domain::{Domain, Variable};
use credal_vn::interval::IntervalValuation;
use credal_vn::pmf::PmfValuation;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn var(name: &str, n: usize) -> Variable {
    Variable::with_range(name, n).unwrap()
}

pub fn domain(vars: &[&Variable]) -> Domain {
    Domain::new(vars.iter().map(|v| (*v).clone()).collect()).unwrap()
}

/// Strictly positive random PMF.
pub fn random_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_pmf(rng: &mut ChaCha8Rng, d: &Domain) -> PmfValuation {
    PmfValuation::new(d.clone(), random_probs(rng, d.cardinality())).unwrap()
}

/// Intervals of width up to `spread` on each side of `p`.
pub fn intervals_around(rng: &mut ChaCha8Rng, d: &Domain, p: &[f64], spread: f64) -> IntervalValuation {
    let lo = p.iter().map(|x| (x - rng.gen_range(0.0..spread)).max(0.0)).collect();
    let up = p.iter().map(|x| (x + rng.gen_range(0.0..spread)).min(1.0)).collect();
    IntervalValuation::new(d.clone(), lo, up).unwrap()
}

/// A random coherent interval valuation on `d`.
pub fn random_intervals(rng: &mut ChaCha8Rng, d: &Domain, spread: f64) -> IntervalValuation {
    let p = random_probs(rng, d.cardinality());
    intervals_around(rng, d, &p, spread)
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Index of the full configuration `states` (sizes in `radix`, last fastest)
/// restricted to the positions in `keep`.
pub fn sub_index(states: &[usize], radix: &[usize], keep: &[usize]) -> usize {
    keep.iter().fold(0, |acc, &k| acc * radix[k] + states[k])
}

/// Brute-force marginal of the normalized product of PMF tables.
///
/// `tables` holds (positions of the table's variables in the global list,
/// probabilities in that variable order, last fastest); `radix` gives frame
/// sizes of the global variables, which must be sorted by name.
pub fn brute_force_marginal(radix: &[usize], tables: &[(Vec<usize>, Vec<f64>)], query: &[usize]) -> Vec<f64> {
    let total: usize = radix.iter().product();
    let out_len: usize = query.iter().map(|&q| radix[q]).product();
    let mut out = vec![0.0; out_len];
    let mut states = vec![0usize; radix.len()];
    for _ in 0..total {
        let w: f64 = tables.iter().map(|(pos, p)| p[sub_index(&states, radix, pos)]).product();
        out[sub_index(&states, radix, query)] += w;
        for k in (0..radix.len()).rev() {
            states[k] += 1;
            if states[k] < radix[k] {
                break;
            }
            states[k] = 0;
        }
    }
    let s: f64 = out.iter().sum();
    out.into_iter().map(|x| x / s).collect()
}
