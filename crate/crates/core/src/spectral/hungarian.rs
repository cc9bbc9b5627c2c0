//! Rectangular Hungarian (Kuhn–Munkres) solver with row/column potentials.
//!
//! Assigns every one of `n` "jobs" to a distinct "worker" out of `m >= n`,
//! minimizing the summed cost. Cells for which `allowed` returns false are
//! never used.

pub(crate) struct Assignment {
    /// `worker[job]`.
    pub worker: Vec<usize>,
    /// Job potentials `u`.
    pub u: Vec<f64>,
    /// Worker potentials `v` (all `<= 0`; zero on unassigned workers).
    pub v: Vec<f64>,
}

/// Returns `None` when no complete assignment exists over allowed cells.
pub(crate) fn solve<C, A>(n: usize, m: usize, cost: C, allowed: A) -> Option<Assignment>
where
    C: Fn(usize, usize) -> f64,
    A: Fn(usize, usize) -> bool,
{
    debug_assert!(n <= m);
    // 1-based arrays; index 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut job_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![f64::INFINITY; m + 1];
    let mut used = vec![false; m + 1];

    for job in 1..=n {
        job_of[0] = job;
        let mut w0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[w0] = true;
            let j0 = job_of[w0];
            let mut delta = f64::INFINITY;
            let mut w1 = 0usize;
            for w in 1..=m {
                if used[w] {
                    continue;
                }
                if allowed(j0 - 1, w - 1) {
                    let cur = cost(j0 - 1, w - 1) - u[j0] - v[w];
                    if cur < minv[w] {
                        minv[w] = cur;
                        way[w] = w0;
                    }
                }
                if minv[w] < delta {
                    delta = minv[w];
                    w1 = w;
                }
            }
            if !delta.is_finite() {
                return None;
            }
            for w in 0..=m {
                if used[w] {
                    u[job_of[w]] += delta;
                    v[w] -= delta;
                } else {
                    minv[w] -= delta;
                }
            }
            w0 = w1;
            if job_of[w0] == 0 {
                break;
            }
        }
        loop {
            let w1 = way[w0];
            job_of[w0] = job_of[w1];
            w0 = w1;
            if w0 == 0 {
                break;
            }
        }
    }

    let mut worker = vec![0usize; n];
    for w in 1..=m {
        if job_of[w] != 0 {
            worker[job_of[w] - 1] = w - 1;
        }
    }
    Some(Assignment {
        worker,
        u: u[1..].to_vec(),
        v: v[1..].to_vec(),
    })
}
