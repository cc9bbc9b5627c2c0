use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;

use super::hungarian;
use crate::{Error, Result};

/// Largest `n2` accepted by [`match_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 8;

/// Matchings whose costs differ by less than this (scaled by `1 + cost`) are
/// treated as tied and resolved lexicographically.
const TIE_TOL: f64 = 1e-9;

fn tie_tolerance(best: f64) -> f64 {
    TIE_TOL * (1.0 + best.abs())
}

/// A {0,1} `n2 × n1` subpermutation pairing `lam1[j]` with `lam2[rows[j]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenMatching {
    rows: Vec<usize>,
    n2: usize,
    pub cost: f64,
}

impl EigenMatching {
    /// Builds a matching from its column-to-row assignment and prices it
    /// against the two spectra.
    pub fn from_rows(rows: Vec<usize>, lam1: &[f64], lam2: &[f64]) -> Result<Self> {
        if rows.len() != lam1.len() {
            return Err(Error::Shape(format!(
                "assignment has {} columns, spectrum has {}",
                rows.len(),
                lam1.len()
            )));
        }
        let mut seen = HashSet::new();
        for &r in &rows {
            if r >= lam2.len() || !seen.insert(r) {
                return Err(Error::Shape(format!("invalid or repeated row {r} in assignment")));
            }
        }
        let cost = assignment_cost(&rows, lam1, lam2);
        Ok(Self {
            rows,
            n2: lam2.len(),
            cost,
        })
    }

    pub fn n1(&self) -> usize {
        self.rows.len()
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// `rows()[j]` is the row occupied in column `j`.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Occupied `(row, column)` cells in row-major order.
    pub fn occupied(&self) -> Vec<(usize, usize)> {
        sorted_cells(&self.rows)
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n2, self.rows.len());
        for (j, &i) in self.rows.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        m
    }
}

fn assignment_cost(rows: &[usize], lam1: &[f64], lam2: &[f64]) -> f64 {
    rows.iter()
        .enumerate()
        .map(|(j, &i)| {
            let d = lam1[j] - lam2[i];
            d * d
        })
        .sum()
}

fn sorted_cells(rows: &[usize]) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = rows.iter().enumerate().map(|(j, &i)| (i, j)).collect();
    cells.sort_unstable();
    cells
}

fn check_orientation(lam1: &[f64], lam2: &[f64]) -> Result<()> {
    if lam1.len() > lam2.len() {
        return Err(Error::Orientation(lam1.len(), lam2.len()));
    }
    if lam1.iter().chain(lam2).any(|x| !x.is_finite()) {
        return Err(Error::Domain("spectra must be finite".into()));
    }
    Ok(())
}

/// Minimal eigenvalue matching via the Hungarian method.
///
/// Among all matchings within the tie tolerance of the optimum, returns the
/// one whose row-major list of occupied cells is lexicographically least.
/// That is found greedily: cells are visited in row-major order and each is
/// kept if some near-optimal matching contains it together with every cell
/// kept so far.
pub fn match_munkres(lam1: &[f64], lam2: &[f64]) -> Result<EigenMatching> {
    check_orientation(lam1, lam2)?;
    let (n1, n2) = (lam1.len(), lam2.len());
    if n1 == 0 {
        return EigenMatching::from_rows(Vec::new(), lam1, lam2);
    }
    let cost = |j: usize, i: usize| {
        let d = lam1[j] - lam2[i];
        d * d
    };
    let full = hungarian::solve(n1, n2, cost, |_, _| true)
        .ok_or_else(|| Error::Numerical("assignment problem has no solution".into()))?;
    let best = assignment_cost(&full.worker, lam1, lam2);
    let tol = tie_tolerance(best);

    // Any matching within `tol` of the optimum only uses cells whose reduced
    // cost under the optimal potentials is at most `tol`.
    let candidate = |j: usize, i: usize| cost(j, i) - full.u[j] - full.v[i] <= tol;

    let mut forced_row: Vec<Option<usize>> = vec![None; n1];
    let mut row_owner: Vec<Option<usize>> = vec![None; n2];
    let mut excluded: HashSet<(usize, usize)> = HashSet::new();
    let mut current = full.worker.clone();
    let mut placed = 0;

    'rows: for i in 0..n2 {
        for j in 0..n1 {
            if placed == n1 {
                break 'rows;
            }
            if forced_row[j].is_some() || !candidate(j, i) {
                continue;
            }
            let feasible = if current[j] == i {
                true
            } else {
                let allowed = |jj: usize, ii: usize| {
                    if !candidate(jj, ii) || excluded.contains(&(ii, jj)) {
                        return false;
                    }
                    let pinned = if jj == j { Some(i) } else { forced_row[jj] };
                    if let Some(r) = pinned {
                        return ii == r;
                    }
                    match row_owner[ii] {
                        Some(owner) => owner == jj,
                        None => ii != i,
                    }
                };
                match hungarian::solve(n1, n2, cost, allowed) {
                    Some(sol) if assignment_cost(&sol.worker, lam1, lam2) <= best + tol => {
                        current = sol.worker;
                        true
                    }
                    _ => false,
                }
            };
            if feasible {
                forced_row[j] = Some(i);
                row_owner[i] = Some(j);
                placed += 1;
                continue 'rows;
            }
            excluded.insert((i, j));
        }
    }

    let rows = forced_row
        .into_iter()
        .map(|r| r.ok_or_else(|| Error::Numerical("tie-breaking left a column unassigned".into())))
        .collect::<Result<Vec<_>>>()?;
    EigenMatching::from_rows(rows, lam1, lam2)
}

/// Exhaustive enumeration of all injections; the reference for
/// [`match_munkres`]. Same tie rule.
pub fn match_bruteforce(lam1: &[f64], lam2: &[f64]) -> Result<EigenMatching> {
    check_orientation(lam1, lam2)?;
    if lam2.len() > BRUTEFORCE_LIMIT {
        return Err(Error::SizeLimit {
            limit: BRUTEFORCE_LIMIT,
            got: lam2.len(),
        });
    }
    let mut all = Vec::new();
    let mut rows = Vec::with_capacity(lam1.len());
    let mut used = vec![false; lam2.len()];
    enumerate_injections(lam1.len(), &mut used, &mut rows, &mut all);

    let costs: Vec<f64> = all.iter().map(|r| assignment_cost(r, lam1, lam2)).collect();
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = tie_tolerance(best);
    let winner = all
        .iter()
        .zip(&costs)
        .filter(|(_, &c)| c <= best + tol)
        .min_by_key(|(r, _)| sorted_cells(r))
        .map(|(r, _)| r.clone())
        .unwrap_or_default();
    EigenMatching::from_rows(winner, lam1, lam2)
}

fn enumerate_injections(n1: usize, used: &mut [bool], rows: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if rows.len() == n1 {
        out.push(rows.clone());
        return;
    }
    for i in 0..used.len() {
        if !used[i] {
            used[i] = true;
            rows.push(i);
            enumerate_injections(n1, used, rows, out);
            rows.pop();
            used[i] = false;
        }
    }
}

/// Eigenvalues of a Kronecker sum `A ⊕ B` in row-major product order:
/// entry `a * n_b + b` is `lam_a[a] + lam_b[b]`.
pub fn box_spectrum(lam_a: &[f64], lam_b: &[f64]) -> Vec<f64> {
    lam_a.iter().flat_map(|&x| lam_b.iter().map(move |&y| x + y)).collect()
}

/// `M_1 ⊗ M_2`, priced against the product spectra `lam1`, `lam2` (both in
/// the row-major order of [`box_spectrum`]). Always a valid matching, though
/// not necessarily minimal.
pub fn kron_matching(m1: &EigenMatching, m2: &EigenMatching, lam1: &[f64], lam2: &[f64]) -> Result<EigenMatching> {
    let (c2, r2) = (m2.n1(), m2.n2());
    let rows = m1
        .rows()
        .iter()
        .flat_map(|&ra| m2.rows().iter().map(move |&rb| ra * r2 + rb))
        .collect::<Vec<_>>();
    if lam1.len() != m1.n1() * c2 || lam2.len() != m1.n2() * r2 {
        return Err(Error::Shape(format!(
            "product matching is {}x{} but spectra have lengths {} and {}",
            m1.n2() * r2,
            m1.n1() * c2,
            lam1.len(),
            lam2.len()
        )));
    }
    EigenMatching::from_rows(rows, lam1, lam2)
}

/// An algorithm for the minimal eigenvalue matching problem.
pub trait EigenMatcher: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, lam1: &[f64], lam2: &[f64]) -> Result<EigenMatching>;
}

pub struct MunkresMatcher;

impl EigenMatcher for MunkresMatcher {
    fn name(&self) -> &'static str {
        "munkres"
    }

    fn solve(&self, lam1: &[f64], lam2: &[f64]) -> Result<EigenMatching> {
        match_munkres(lam1, lam2)
    }
}

pub struct BruteForceMatcher;

impl EigenMatcher for BruteForceMatcher {
    fn name(&self) -> &'static str {
        "bruteforce"
    }

    fn solve(&self, lam1: &[f64], lam2: &[f64]) -> Result<EigenMatching> {
        match_bruteforce(lam1, lam2)
    }
}

/// Matchers keyed by name.
pub struct MatcherRegistry {
    matchers: BTreeMap<String, Box<dyn EigenMatcher>>,
}

impl MatcherRegistry {
    pub fn empty() -> Self {
        Self {
            matchers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, matcher: Box<dyn EigenMatcher>) {
        self.matchers.insert(matcher.name().to_string(), matcher);
    }

    pub fn get(&self, name: &str) -> Result<&dyn EigenMatcher> {
        self.matchers
            .get(name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "matcher",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.matchers.keys().map(String::as_str).collect()
    }
}

impl Default for MatcherRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(MunkresMatcher));
        reg.register(Box::new(BruteForceMatcher));
        reg
    }
}
