//! Pairwise-comparison scaling in JOD units.
//!
//! Under the Thurstone case V model option `j` beats option `i` with
//! probability `Phi((q_j - q_i) / sigma)`. With `sigma = 1 / Phi^-1(0.75)`
//! a score gap of 1 JOD means 75% of answers prefer the better option.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Votes added to each direction of every compared pair.
pub const PSEUDO_VOTES: f64 = 0.5;

/// `1 / Phi^-1(0.75)`.
pub fn jod_sigma() -> f64 {
    1.0 / std_normal().inverse_cdf(0.75)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Standard normal CDF, accurate in both tails.
fn phi_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn phi_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse Mills ratio `phi(x) / Phi(x)`.
fn mills(x: f64) -> f64 {
    let c = phi_cdf(x);
    if c > 0.0 {
        phi_pdf(x) / c
    } else {
        -x
    }
}

/// Square matrix of counts; entry `(i, j)` is how often option `j` was
/// preferred over option `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoteMatrix {
    counts: Array2<u64>,
}

impl VoteMatrix {
    pub fn new(counts: Array2<u64>) -> Result<Self> {
        let (r, c) = counts.dim();
        if r != c || r < 2 {
            return Err(Error::InvalidArgument(format!("vote matrix must be square with n >= 2, got {r}x{c}")));
        }
        if (0..r).any(|i| counts[[i, i]] != 0) {
            return Err(Error::InvalidArgument("vote matrix diagonal must be zero".into()));
        }
        Ok(Self { counts })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(Array2::zeros((n, n)))
    }

    pub fn len(&self) -> usize {
        self.counts.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> &Array2<u64> {
        &self.counts
    }

    /// Record that `winner` was preferred over `loser`.
    pub fn add(&mut self, loser: usize, winner: usize, n: u64) -> Result<()> {
        let len = self.len();
        if loser >= len || winner >= len || loser == winner {
            return Err(Error::InvalidArgument(format!("bad comparison ({loser}, {winner}) for {len} options")));
        }
        self.counts[[loser, winner]] += n;
        Ok(())
    }

    pub fn transposed(&self) -> Self {
        Self { counts: self.counts.t().to_owned() }
    }

    pub fn total(&self) -> u64 {
        self.counts.sum()
    }

    /// Element-wise sum of several matrices of the same size.
    pub fn sum(matrices: &[VoteMatrix]) -> Result<Self> {
        let first = matrices.first().ok_or_else(|| Error::InvalidArgument("no vote matrices".into()))?;
        let mut acc = first.counts.clone();
        for m in &matrices[1..] {
            if m.len() != first.len() {
                return Err(Error::ShapeMismatch("vote matrices differ in size".into()));
            }
            acc += &m.counts;
        }
        Self::new(acc)
    }

    /// Connected components of the comparison graph, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut label: Vec<Option<usize>> = vec![None; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if label[s].is_some() {
                continue;
            }
            let id = comps.len();
            let mut stack = vec![s];
            let mut comp = Vec::new();
            label[s] = Some(id);
            while let Some(i) = stack.pop() {
                comp.push(i);
                for j in 0..n {
                    if label[j].is_none() && self.counts[[i, j]] + self.counts[[j, i]] > 0 {
                        label[j] = Some(id);
                        stack.push(j);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JodResult {
    /// Scores with zero mean.
    pub scores: Vec<f64>,
    /// Covariance of the scores on the zero-mean subspace.
    pub covariance: Array2<f64>,
    /// 95% bootstrap intervals, when computed.
    pub confidence: Option<Vec<(f64, f64)>>,
    pub iterations: usize,
}

struct Pair {
    i: usize,
    j: usize,
    /// Votes for `j` over `i` and for `i` over `j`, with pseudo-votes.
    a: f64,
    b: f64,
}

fn pairs(votes: &VoteMatrix) -> Vec<Pair> {
    let c = votes.counts();
    let n = votes.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if c[[i, j]] + c[[j, i]] > 0 {
                out.push(Pair { i, j, a: c[[i, j]] as f64 + PSEUDO_VOTES, b: c[[j, i]] as f64 + PSEUDO_VOTES });
            }
        }
    }
    out
}

fn log_likelihood(pairs: &[Pair], q: &DVector<f64>, sigma: f64) -> f64 {
    pairs
        .iter()
        .map(|p| {
            let d = (q[p.j] - q[p.i]) / sigma;
            p.a * phi_cdf(d).ln() + p.b * phi_cdf(-d).ln()
        })
        .sum()
}

/// Gradient and observed information (negative Hessian).
fn derivatives(pairs: &[Pair], q: &DVector<f64>, sigma: f64, n: usize) -> (DVector<f64>, DMatrix<f64>) {
    let mut g = DVector::zeros(n);
    let mut info = DMatrix::zeros(n, n);
    for p in pairs {
        let d = (q[p.j] - q[p.i]) / sigma;
        let (hp, hm) = (mills(d), mills(-d));
        let dl = p.a * hp - p.b * hm;
        // d/dx mills(x) = -mills(x) (x + mills(x)); both terms are <= 0.
        let d2 = -p.a * hp * (d + hp) - p.b * hm * (-d + hm);
        g[p.j] += dl / sigma;
        g[p.i] -= dl / sigma;
        let w = -d2 / (sigma * sigma);
        info[(p.i, p.i)] += w;
        info[(p.j, p.j)] += w;
        info[(p.i, p.j)] -= w;
        info[(p.j, p.i)] -= w;
    }
    (g, info)
}

/// Solve `L x = b` on the zero-mean subspace for a connected Laplacian-like
/// `L` (null space spanned by ones).
fn solve_projected(l: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = l.nrows();
    let ones = DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut x = (l + &ones).lu().solve(b)?;
    let mean = x.mean();
    x.add_scalar_mut(-mean);
    Some(x)
}

fn pseudo_inverse(l: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = l.nrows();
    let ones = DMatrix::from_element(n, n, 1.0 / n as f64);
    let inv = (l + &ones).try_inverse()?;
    Some(inv - ones)
}

/// Maximum-likelihood JOD scores of a connected comparison graph.
pub fn scale_jod(votes: &VoteMatrix) -> Result<JodResult> {
    let comps = votes.components();
    if comps.len() > 1 {
        return Err(Error::Disconnected(comps));
    }
    let n = votes.len();
    let sigma = jod_sigma();
    let pairs = pairs(votes);
    let normal = std_normal();

    // Start from least squares on probit-transformed preference rates.
    let mut lap = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for p in &pairs {
        let d = sigma * normal.inverse_cdf(p.a / (p.a + p.b));
        lap[(p.i, p.i)] += 1.0;
        lap[(p.j, p.j)] += 1.0;
        lap[(p.i, p.j)] -= 1.0;
        lap[(p.j, p.i)] -= 1.0;
        rhs[p.j] += d;
        rhs[p.i] -= d;
    }
    let mut q = solve_projected(&lap, &rhs).ok_or_else(|| Error::Domain("singular start system".into()))?;
    let mut ll = log_likelihood(&pairs, &q, sigma);
    let mut iterations = 0;
    for it in 1..=200 {
        iterations = it;
        let (g, info) = derivatives(&pairs, &q, sigma, n);
        let step = solve_projected(&info, &g).ok_or_else(|| Error::Domain("singular information matrix".into()))?;
        // Close to the optimum the likelihood gain is below rounding, so the
        // line search would reject a step Newton gets right.
        if step.amax() < 1e-6 {
            q += &step;
            ll = log_likelihood(&pairs, &q, sigma);
            if step.amax() < 1e-14 {
                break;
            }
            continue;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &q + &step * t;
            let cll = log_likelihood(&pairs, &cand, sigma);
            if cll >= ll {
                q = cand;
                ll = cll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || step.amax() * t < 1e-12 {
            break;
        }
    }
    let mean = q.mean();
    q.add_scalar_mut(-mean);
    let (_, info) = derivatives(&pairs, &q, sigma, n);
    let cov = pseudo_inverse(&info).ok_or_else(|| Error::Domain("singular information matrix".into()))?;
    let covariance = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (cov[(i, j)] + cov[(j, i)]));
    Ok(JodResult { scores: q.iter().cloned().collect(), covariance, confidence: None, iterations })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZTest {
    pub z: f64,
    pub p: f64,
}

/// Two-tailed z-test of `q_i - q_j` with variance `c_ii + c_jj - 2 c_ij`.
pub fn jod_ztest(result: &JodResult, i: usize, j: usize) -> Result<ZTest> {
    let n = result.scores.len();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidArgument(format!("need distinct options below {n}, got ({i}, {j})")));
    }
    let c = &result.covariance;
    let variance = c[[i, i]] + c[[j, j]] - 2.0 * c[[i, j]];
    if !(variance > 0.0) {
        return Err(Error::DegenerateVariance { i, j, variance });
    }
    let z = (result.scores[i] - result.scores[j]) / variance.sqrt();
    Ok(ZTest { z, p: erfc(z.abs() / std::f64::consts::SQRT_2) })
}

/// Linear-interpolation percentile of sorted data, `p` in [0, 100].
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 2.5 / 97.5 percentile scores over `n_samples` resamples of observers
/// with replacement. Resample `k` draws from a ChaCha stream `k` of `seed`.
pub fn bootstrap_ci(observers: &[VoteMatrix], n_samples: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if observers.len() < 2 {
        return Err(Error::InvalidArgument("bootstrap needs at least two observers".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let m = observers.len();
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let pick: Vec<VoteMatrix> = (0..m).map(|_| observers[rng.gen_range(0..m)].clone()).collect();
            scale_jod(&VoteMatrix::sum(&pick)?).map(|r| r.scores)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = observers[0].len();
    Ok((0..n)
        .map(|i| {
            let mut v: Vec<f64> = samples.iter().map(|s| s[i]).collect();
            v.sort_by(f64::total_cmp);
            (percentile(&v, 2.5), percentile(&v, 97.5))
        })
        .collect())
}

/// Mean per-vote log-likelihood of one observer under fixed scores.
pub fn observer_log_likelihood(votes: &VoteMatrix, scores: &[f64]) -> f64 {
    let sigma = jod_sigma();
    let c = votes.counts();
    let (mut ll, mut total) = (0.0, 0.0);
    for ((i, j), &k) in c.indexed_iter() {
        if k > 0 {
            ll += k as f64 * phi_cdf((scores[j] - scores[i]) / sigma).ln();
            total += k as f64;
        }
    }
    if total > 0.0 {
        ll / total
    } else {
        0.0
    }
}

/// Observers whose mean log-likelihood under the pooled model falls more
/// than 1.5 IQR below the lower quartile. Fewer than three observers are
/// never flagged.
pub fn screen_outliers(observers: &[VoteMatrix]) -> Result<Vec<usize>> {
    if observers.len() < 3 {
        return Ok(Vec::new());
    }
    let group = scale_jod(&VoteMatrix::sum(observers)?)?;
    let ll: Vec<f64> = observers.iter().map(|o| observer_log_likelihood(o, &group.scores)).collect();
    let mut sorted = ll.clone();
    sorted.sort_by(f64::total_cmp);
    let q1 = percentile(&sorted, 25.0);
    let q3 = percentile(&sorted, 75.0);
    let fence = q1 - 1.5 * (q3 - q1);
    Ok(ll.iter().enumerate().filter(|(_, &v)| v < fence).map(|(i, _)| i).collect())
}

/// Draw `per_pair` votes per ordered comparison from the probit model with
/// the given scores.
pub fn simulate_votes<R: Rng>(scores: &[f64], per_pair: u64, rng: &mut R) -> Result<VoteMatrix> {
    let n = scores.len();
    let mut m = VoteMatrix::zeros(n)?;
    let sigma = jod_sigma();
    for i in 0..n {
        for j in i + 1..n {
            let p = phi_cdf((scores[j] - scores[i]) / sigma);
            for _ in 0..per_pair {
                if rng.gen::<f64>() < p {
                    m.add(i, j, 1)?;
                } else {
                    m.add(j, i, 1)?;
                }
            }
        }
    }
    Ok(m)
}
