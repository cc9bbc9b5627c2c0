// Reference implementations used by the integration tests. Each one is
// written directly from the definitions, without calling the library's own
// routines for the same quantity.
#![allow(dead_code)]

use msgprol::graph::Graph;
use msgprol::DMatrix;
use rand::Rng;

/// Connected graph: a random spanning tree plus extra edges.
pub fn random_connected<R: Rng>(n: usize, extra: f64, rng: &mut R) -> (Graph, Vec<(usize, usize)>) {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains(&(a, b)) && rng.random_bool(extra) {
                edges.push((a, b));
            }
        }
    }
    (Graph::new(n, edges.clone()).unwrap(), edges)
}

/// `A − D` straight from an edge list.
pub fn laplacian(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for &(a, b) in edges {
        l[(a, b)] += 1.0;
        l[(b, a)] += 1.0;
        l[(a, a)] -= 1.0;
        l[(b, b)] -= 1.0;
    }
    l
}

pub fn graph_laplacian(g: &Graph) -> DMatrix<f64> {
    let edges: Vec<_> = g.edges().collect();
    laplacian(g.n(), &edges)
}

/// Floyd–Warshall hop counts.
pub fn distances(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut d = DMatrix::from_element(n, n, f64::INFINITY);
    for i in 0..n {
        d[(i, i)] = 0.0;
    }
    for (a, b) in g.edges() {
        if a != b {
            d[(a, b)] = 1.0;
            d[(b, a)] = 1.0;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[(i, k)] + d[(k, j)];
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    d
}

/// Entrywise Kronecker product.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    DMatrix::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn eye(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

/// Modified Gram–Schmidt on a Gaussian matrix.
pub fn random_orthonormal<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(cols <= rows);
    loop {
        let mut m = DMatrix::from_fn(rows, cols, |_, _| gaussian(rng));
        let mut ok = true;
        for j in 0..cols {
            for k in 0..j {
                let proj = m.column(k).dot(&m.column(j));
                let ck = m.column(k).clone_owned();
                let mut cj = m.column_mut(j);
                cj -= ck * proj;
            }
            let nrm = m.column(j).norm();
            if nrm < 1e-8 {
                ok = false;
                break;
            }
            m.column_mut(j).unscale_mut(nrm);
        }
        if ok {
            return m;
        }
    }
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box–Muller
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// `‖(1/√α) P L1 − √α L2 P‖_F`.
pub fn diffusion_defect(p: &DMatrix<f64>, l1: &DMatrix<f64>, l2: &DMatrix<f64>, alpha: f64) -> f64 {
    (p * l1 / alpha.sqrt() - l2 * p * alpha.sqrt()).norm()
}

/// Full objective at the problem's own scales.
pub fn objective(
    p: &DMatrix<f64>,
    (l1, l2): (&DMatrix<f64>, &DMatrix<f64>),
    (t1, t2): (&DMatrix<f64>, &DMatrix<f64>),
    s: f64,
    alpha: f64,
    beta: f64,
) -> f64 {
    let d = diffusion_defect(p, l1, l2, alpha).powi(2);
    let t = diffusion_defect(p, t1, t2, beta).powi(2);
    (1.0 - s) * d + s * t
}

/// Visit sequence built bottom-up: the deepest level is a single visit and
/// every shallower level wraps `γ` copies of the one below.
pub fn visits(depth: usize, gamma: usize) -> Vec<usize> {
    let mut seq = vec![depth];
    for l in (0..depth).rev() {
        let mut next = vec![l];
        for _ in 0..gamma {
            next.extend_from_slice(&seq);
            next.push(l);
        }
        seq = next;
    }
    seq
}

/// Central differences of `f` at `x` in every coordinate.
pub fn central_diff(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = f(&y);
            y[i] = x[i] - h;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Exhaustive minimum of `Σ_j (λ1_j − λ2_{σ(j)})²` over injections `σ`.
pub fn min_matching_cost(lam1: &[f64], lam2: &[f64]) -> f64 {
    fn rec(j: usize, lam1: &[f64], lam2: &[f64], used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if j == lam1.len() {
            *best = best.min(acc);
            return;
        }
        for i in 0..lam2.len() {
            if !used[i] {
                used[i] = true;
                rec(j + 1, lam1, lam2, used, acc + (lam1[j] - lam2[i]).powi(2), best);
                used[i] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, lam1, lam2, &mut vec![false; lam2.len()], 0.0, &mut best);
    best
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
