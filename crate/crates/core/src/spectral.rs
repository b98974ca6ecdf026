//! Perron roots, characteristic polynomials of det(I − zA), determinants,
//! resolvent diagonals and truncation ladders λ_n.

use std::collections::HashMap;
use std::ops::ControlFlow;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::cycles::for_each_cycle;
use crate::digraph::{RationalDigraph, WeightedDigraph};
use crate::error::{Error, Result};
use crate::family::TruncationFamily;
use crate::fvs::greedy_transversal;
use crate::linalg::DenseMatrix;
use crate::poly::{count_roots_above, is_root, largest_root_enclosure, Poly};
use crate::scalar::{Rational, Scalar};

pub const DEFAULT_TOL: f64 = 1e-12;

/// Power-iteration steps before switching to transversal bisection.
const FIRST_PHASE: usize = 2_000;
const POWER_CAP: usize = 1_000_000;
/// Largest transversal for which the bisection fallback is attempted.
const BISECTION_MAX_TRANSVERSAL: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerronMethod {
    /// No component with a cycle longer than a loop.
    Trivial,
    PowerIteration,
    TransversalBisection,
}

/// Perron root with a certified bracket `lower ≤ λ ≤ upper` (up to rounding).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerronRoot {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: PerronMethod,
}

type SparseRows = Vec<Vec<(usize, f64)>>;

/// Spectral radius of the weighted adjacency matrix.
///
/// Each cyclic strong component is handled by power iteration on A + I with
/// Collatz–Wielandt bracketing. Components that converge slowly (long
/// near-periodic cycles) fall back to bisection on t, testing whether I − A/t
/// is a nonsingular M-matrix through its Schur complement on a cycle
/// transversal.
pub fn perron_root<T: Scalar>(d: &WeightedDigraph<T>, tol: f64) -> PerronRoot {
    let df = d.to_f64();
    let mut out = PerronRoot {
        value: 0.0,
        lower: 0.0,
        upper: 0.0,
        iterations: 0,
        converged: true,
        method: PerronMethod::Trivial,
    };
    for comp in df.strong_components() {
        let rows = local_rows(&df, &comp);
        let r = if comp.len() == 1 {
            let w = rows[0].first().map_or(0.0, |&(_, w)| w);
            PerronRoot { value: w, lower: w, upper: w, iterations: 0, converged: true, method: PerronMethod::Trivial }
        } else {
            component_root(&rows, tol)
        };
        out.value = out.value.max(r.value);
        out.lower = out.lower.max(r.lower);
        out.upper = out.upper.max(r.upper);
        out.iterations += r.iterations;
        out.converged &= r.converged;
        if r.method == PerronMethod::TransversalBisection
            || (r.method == PerronMethod::PowerIteration && out.method == PerronMethod::Trivial)
        {
            out.method = r.method;
        }
    }
    out
}

fn local_rows(d: &WeightedDigraph<f64>, comp: &[usize]) -> SparseRows {
    let mut pos = HashMap::with_capacity(comp.len());
    for (i, &v) in comp.iter().enumerate() {
        pos.insert(v, i);
    }
    comp.iter()
        .map(|&v| d.out(v).iter().filter_map(|&(w, x)| pos.get(&w).map(|&j| (j, x))).collect())
        .collect()
}

struct PowerState {
    x: Vec<f64>,
    lo: f64,
    hi: f64,
    iterations: usize,
}

impl PowerState {
    fn new(n: usize) -> Self {
        Self { x: vec![1.0; n], lo: 0.0, hi: f64::INFINITY, iterations: 0 }
    }

    fn done(&self, tol: f64) -> bool {
        self.hi - self.lo <= tol * self.hi.max(f64::MIN_POSITIVE)
    }

    /// Runs until the bracket closes or `cap` total iterations are reached.
    fn run(&mut self, rows: &SparseRows, tol: f64, cap: usize) {
        let n = rows.len();
        let mut y = vec![0.0; n];
        while self.iterations < cap {
            self.iterations += 1;
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            let mut top = 0.0f64;
            for v in 0..n {
                let ax: f64 = rows[v].iter().map(|&(w, a)| a * self.x[w]).sum();
                y[v] = self.x[v] + ax;
                let ratio = ax / self.x[v];
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                top = top.max(y[v]);
            }
            self.lo = self.lo.max(lo);
            self.hi = self.hi.min(hi);
            for v in 0..n {
                self.x[v] = y[v] / top;
            }
            if self.done(tol) {
                return;
            }
        }
    }
}

fn component_root(rows: &SparseRows, tol: f64) -> PerronRoot {
    let mut st = PowerState::new(rows.len());
    st.run(rows, tol, FIRST_PHASE);
    if st.done(tol) {
        return finish_power(st, true);
    }
    if let Some((lo, hi, steps)) = transversal_bisection(rows, st.lo, st.hi, tol) {
        return PerronRoot {
            value: 0.5 * (lo + hi),
            lower: lo,
            upper: hi,
            iterations: st.iterations + steps,
            converged: hi - lo <= tol * hi.max(f64::MIN_POSITIVE),
            method: PerronMethod::TransversalBisection,
        };
    }
    st.run(rows, tol, POWER_CAP);
    let ok = st.done(tol);
    finish_power(st, ok)
}

fn finish_power(st: PowerState, converged: bool) -> PerronRoot {
    PerronRoot {
        value: 0.5 * (st.lo + st.hi),
        lower: st.lo,
        upper: st.hi,
        iterations: st.iterations,
        converged,
        method: PerronMethod::PowerIteration,
    }
}

/// Bisection on t using the M-matrix test; `None` when the greedy transversal
/// is too large for the Schur complement to be cheap.
fn transversal_bisection(rows: &SparseRows, lo: f64, hi: f64, tol: f64) -> Option<(f64, f64, usize)> {
    let n = rows.len();
    let adj: Vec<Vec<usize>> = rows.iter().map(|r| r.iter().map(|&(w, _)| w).collect()).collect();
    let w_set = greedy_transversal(&adj);
    if w_set.is_empty() || w_set.len() > BISECTION_MAX_TRANSVERSAL {
        return None;
    }
    let mut w_index = vec![usize::MAX; n];
    for (i, &w) in w_set.iter().enumerate() {
        w_index[w] = i;
    }
    let order = topological_rest(&adj, &w_index)?;
    let test = SchurTest { rows, w_set: &w_set, w_index: &w_index, order: &order };

    let mut lo = lo.max(0.0);
    let mut hi = hi * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
    if !test.above_radius(hi) {
        return None;
    }
    let mut steps = 0;
    while hi - lo > tol * hi && steps < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if test.above_radius(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    Some((lo, hi, steps))
}

fn topological_rest(adj: &[Vec<usize>], w_index: &[usize]) -> Option<Vec<usize>> {
    let alive: Vec<bool> = w_index.iter().map(|&i| i == usize::MAX).collect();
    let n = adj.len();
    let mut indeg = vec![0usize; n];
    for v in (0..n).filter(|&v| alive[v]) {
        for &w in &adj[v] {
            if alive[w] {
                indeg[w] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| alive[v] && indeg[v] == 0).collect();
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &w in &adj[v] {
            if alive[w] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    order.push(w);
                }
            }
        }
    }
    (order.len() == alive.iter().filter(|&&a| a).count()).then_some(order)
}

struct SchurTest<'a> {
    rows: &'a SparseRows,
    w_set: &'a [usize],
    w_index: &'a [usize],
    order: &'a [usize],
}

impl SchurTest<'_> {
    /// True iff t > ρ(A): I − K(t) has positive pivots without pivoting, where
    /// K(t) sums path weights /t^len from transversal vertex to transversal
    /// vertex through the acyclic rest.
    fn above_radius(&self, t: f64) -> bool {
        let h = self.w_set.len();
        let n = self.rows.len();
        let inv = 1.0 / t;
        let mut m = vec![0.0f64; h * h];
        let mut val = vec![0.0f64; n];
        for (i, &w) in self.w_set.iter().enumerate() {
            val.iter_mut().for_each(|x| *x = 0.0);
            for &(u, a) in &self.rows[w] {
                match self.w_index[u] {
                    usize::MAX => val[u] += a * inv,
                    j => m[i * h + j] += a * inv,
                }
            }
            for &r in self.order {
                let vr = val[r];
                if vr == 0.0 {
                    continue;
                }
                for &(u, a) in &self.rows[r] {
                    match self.w_index[u] {
                        usize::MAX => val[u] += vr * a * inv,
                        j => m[i * h + j] += vr * a * inv,
                    }
                }
            }
        }
        // m := I − K
        for x in m.iter_mut() {
            *x = -*x;
        }
        for i in 0..h {
            m[i * h + i] += 1.0;
        }
        for k in 0..h {
            let p = m[k * h + k];
            if p <= 0.0 || !p.is_finite() {
                return false;
            }
            for i in k + 1..h {
                let f = m[i * h + k] / p;
                if f == 0.0 {
                    continue;
                }
                for j in k + 1..h {
                    m[i * h + j] -= f * m[k * h + j];
                }
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharpolyMethod {
    Coates,
    Elimination,
}

impl std::str::FromStr for CharpolyMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coates" => Ok(Self::Coates),
            "elimination" => Ok(Self::Elimination),
            o => Err(Error::InvalidParameter(format!("unknown charpoly method {o:?}"))),
        }
    }
}

pub const DEFAULT_UNION_BUDGET: usize = 5_000_000;

/// det(I − zA) via the signed sum over unions of vertex-disjoint cycles.
/// Cycles on the same vertex set are merged first (they have equal length),
/// so `budget` counts unions of distinct vertex sets.
pub fn coates_charpoly<T: Scalar>(d: &WeightedDigraph<T>, budget: usize) -> Result<Poly<T>> {
    let n = d.order();
    let words = n.div_ceil(64).max(1);
    let mut by_set: HashMap<Vec<u64>, (usize, T)> = HashMap::new();
    let mut cycles_seen = 0usize;
    let complete = for_each_cycle(d, None, |vs, w| {
        cycles_seen += 1;
        if cycles_seen > budget {
            return ControlFlow::Break(());
        }
        let mut mask = vec![0u64; words];
        for &v in vs {
            mask[v / 64] |= 1 << (v % 64);
        }
        let e = by_set.entry(mask).or_insert((vs.len(), T::zero()));
        e.1 = e.1.clone() + w.clone();
        ControlFlow::Continue(())
    });
    if !complete {
        return Err(Error::BudgetExceeded { budget, during: "cycle enumeration for the Coates expansion".into() });
    }
    // bucket by least vertex
    let mut buckets: Vec<Vec<(Vec<u64>, usize, T)>> = vec![Vec::new(); n];
    for (mask, (len, w)) in by_set {
        let lead = first_bit(&mask).expect("nonempty cycle");
        buckets[lead].push((mask, len, w));
    }
    for b in buckets.iter_mut() {
        b.sort_by(|a, c| a.0.cmp(&c.0));
    }
    let mut coeffs = vec![T::zero(); n + 1];
    let mut expander = Expander { n, buckets: &buckets, coeffs: &mut coeffs, visited: 0, budget };
    let used = vec![0u64; words];
    expander.expand(0, used, T::one(), 0)?;
    Ok(Poly::new(coeffs))
}

fn first_bit(mask: &[u64]) -> Option<usize> {
    mask.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

struct Expander<'a, T> {
    n: usize,
    buckets: &'a [Vec<(Vec<u64>, usize, T)>],
    coeffs: &'a mut Vec<T>,
    visited: usize,
    budget: usize,
}

impl<T: Scalar> Expander<'_, T> {
    /// Records the current union (coefficient `signed` at degree `len`), then
    /// extends it by cycles whose least vertex is at least `from`.
    fn expand(&mut self, from: usize, used: Vec<u64>, signed: T, len: usize) -> Result<()> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget, during: "Coates union expansion".into() });
        }
        self.coeffs[len] = self.coeffs[len].clone() + signed.clone();
        for u in from..self.n {
            if used[u / 64] >> (u % 64) & 1 == 1 {
                continue;
            }
            for (mask, l, w) in &self.buckets[u] {
                if mask.iter().zip(&used).any(|(a, b)| a & b != 0) {
                    continue;
                }
                let next: Vec<u64> = mask.iter().zip(&used).map(|(a, b)| a | b).collect();
                self.expand(u + 1, next, -(signed.clone() * w.clone()), len + l)?;
            }
        }
        Ok(())
    }
}

/// det(I − zA) by elimination: exact interpolation of fraction-free
/// determinants at z = 0..n for rationals, Hessenberg reduction for floats.
pub fn elimination_charpoly<T: Scalar>(d: &WeightedDigraph<T>) -> Poly<T> {
    matrix_charpoly(&d.matrix())
}

/// det(I − zM) for a dense matrix.
pub fn matrix_charpoly<T: Scalar>(m: &DenseMatrix<T>) -> Poly<T> {
    let n = m.order();
    if T::EXACT {
        let xs: Vec<T> = (0..=n).map(T::from_usize).collect();
        let ys: Vec<T> = xs.iter().map(|z| T::determinant(&m.i_minus_scaled(z))).collect();
        Poly::new(newton_to_monomial(&xs, &ys))
    } else {
        // det(xI − M) = Σ c_i x^i  ⇒  det(I − zM) = Σ c_{n−k} z^k
        let c = hessenberg_charpoly(m);
        Poly::new((0..=n).map(|k| c[n - k].clone()).collect())
    }
}

fn newton_to_monomial<T: Scalar>(xs: &[T], ys: &[T]) -> Vec<T> {
    let n = xs.len();
    let mut a = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            a[i] = (a[i].clone() - a[i - 1].clone()) / (xs[i].clone() - xs[i - j].clone());
        }
    }
    let mut p = vec![T::zero(); n];
    p[0] = a[n - 1].clone();
    let mut deg = 0;
    for k in (0..n - 1).rev() {
        // p := p·(z − x_k) + a_k
        let mut q = vec![T::zero(); n];
        for i in 0..=deg {
            q[i + 1] = q[i + 1].clone() + p[i].clone();
            q[i] = q[i].clone() - p[i].clone() * xs[k].clone();
        }
        q[0] = q[0].clone() + a[k].clone();
        p = q;
        deg += 1;
    }
    p
}

/// Coefficients of det(xI − M), ascending, via stabilised elementary
/// similarity to upper Hessenberg form.
fn hessenberg_charpoly<T: Scalar>(m: &DenseMatrix<T>) -> Vec<T> {
    let n = m.order();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let p = (k + 1..n)
            .max_by(|&a, &b| h[(a, k)].pivot_score().total_cmp(&h[(b, k)].pivot_score()))
            .unwrap();
        if h[(p, k)].pivot_score() == 0.0 {
            continue;
        }
        if p != k + 1 {
            h.swap_rows(p, k + 1);
            for i in 0..n {
                let t = h[(i, p)].clone();
                h[(i, p)] = h[(i, k + 1)].clone();
                h[(i, k + 1)] = t;
            }
        }
        for i in k + 2..n {
            let f = h[(i, k)].clone() / h[(k + 1, k)].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let t = h[(i, j)].clone() - f.clone() * h[(k + 1, j)].clone();
                h[(i, j)] = t;
            }
            for r in 0..n {
                let t = h[(r, k + 1)].clone() + f.clone() * h[(r, i)].clone();
                h[(r, k + 1)] = t;
            }
        }
    }
    // p_j(x) for the leading j×j block
    let mut p: Vec<Vec<T>> = vec![vec![T::one()]];
    for j in 0..n {
        let mut next = vec![T::zero(); j + 2];
        for (i, c) in p[j].iter().enumerate() {
            next[i + 1] = next[i + 1].clone() + c.clone();
            next[i] = next[i].clone() - h[(j, j)].clone() * c.clone();
        }
        let mut prod = T::one();
        for i in (0..j).rev() {
            prod = prod * h[(i + 1, i)].clone();
            let f = h[(i, j)].clone() * prod.clone();
            for (k, c) in p[i].iter().enumerate() {
                next[k] = next[k].clone() - f.clone() * c.clone();
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

pub fn charpoly<T: Scalar>(d: &WeightedDigraph<T>, method: CharpolyMethod, budget: usize) -> Result<Poly<T>> {
    match method {
        CharpolyMethod::Coates => coates_charpoly(d, budget),
        CharpolyMethod::Elimination => Ok(elimination_charpoly(d)),
    }
}

/// det(I − A).
pub fn det_i_minus<T: Scalar>(d: &WeightedDigraph<T>) -> T {
    T::determinant(&d.matrix().i_minus_scaled(&T::one()))
}

/// Number of nonzero eigenvalues, read off as the degree of det(I − zA).
pub fn nonzero_eig_count<T: Scalar>(p: &Poly<T>) -> usize {
    p.degree().unwrap_or(0)
}

/// Certifies ρ(M) ≤ s exactly: det(xI − M) has no real root above s.
pub fn rho_at_most(m: &DenseMatrix<Rational>, s: &Rational) -> bool {
    let p = matrix_charpoly(m).reversed(m.order());
    count_roots_above(&p, s) == 0
}

/// Certifies ρ(M) < s exactly.
pub fn rho_below(m: &DenseMatrix<Rational>, s: &Rational) -> bool {
    let p = matrix_charpoly(m).reversed(m.order());
    count_roots_above(&p, s) == 0 && !is_root(&p, s)
}

/// Rational enclosure [lo, hi] of ρ(A) with hi − lo ≤ width (a point when ρ
/// is a rational root hit exactly).
pub fn perron_enclosure(d: &RationalDigraph, width: &Rational) -> (Rational, Rational) {
    let n = d.order();
    if n == 0 {
        return (Rational::zero(), Rational::zero());
    }
    let p = elimination_charpoly(d).reversed(n);
    // a power of two above the largest row sum, so dyadic roots are hit exactly
    let row_max = (0..n).map(|v| d.out_weight(v)).fold(Rational::zero(), Rational::max_of);
    let mut upper = Rational::one();
    while upper <= row_max {
        upper *= Rational::from_usize(2);
    }
    largest_root_enclosure(&p, &Rational::zero(), &upper, width).unwrap_or((Rational::zero(), Rational::zero()))
}

/// Whether ρ(A) < 1, decided exactly for rationals and from the Perron
/// bracket for floats.
pub fn spectral_radius_below_one<T: Scalar>(d: &WeightedDigraph<T>) -> std::result::Result<(), f64> {
    if T::EXACT {
        let m = d.matrix().map(|x| x.to_rational().expect("exact weight"));
        if rho_below(&m, &Rational::one()) {
            Ok(())
        } else {
            Err(perron_root(d, DEFAULT_TOL).value)
        }
    } else {
        let r = perron_root(d, DEFAULT_TOL);
        if r.upper < 1.0 || r.value < 1.0 - 1e-10 {
            Ok(())
        } else {
            Err(r.value)
        }
    }
}

/// (I − A)^{-1}(v, v); requires ρ(A) < 1.
pub fn resolvent_diag<T: Scalar>(d: &WeightedDigraph<T>, v: usize) -> Result<T> {
    if v >= d.order() {
        return Err(Error::InvalidParameter(format!("vertex {} out of range", v + 1)));
    }
    spectral_radius_below_one(d).map_err(|radius| Error::SpectralRadiusTooLarge { radius })?;
    let mut e = vec![T::zero(); d.order()];
    e[v] = T::one();
    let x = d.matrix().i_minus_scaled(&T::one()).solve(&e)?;
    Ok(x[v].clone())
}

/// All diagonal entries of (I − A)^{-1}; requires ρ(A) < 1.
pub fn resolvent_diagonal<T: Scalar>(d: &WeightedDigraph<T>) -> Result<Vec<T>> {
    spectral_radius_below_one(d).map_err(|radius| Error::SpectralRadiusTooLarge { radius })?;
    let inv = d.matrix().i_minus_scaled(&T::one()).inverse()?;
    Ok((0..d.order()).map(|v| inv[(v, v)].clone()).collect())
}

/// Σ_{p=0}^{P} A^p(v, v).
pub fn neumann_partial_sum<T: Scalar>(d: &WeightedDigraph<T>, v: usize, p_max: usize) -> T {
    let n = d.order();
    let mut x = vec![T::zero(); n];
    x[v] = T::one();
    let mut sum = T::one();
    for _ in 0..p_max {
        let mut y = vec![T::zero(); n];
        for (u, xu) in x.iter().enumerate() {
            if xu.is_zero() {
                continue;
            }
            for (w, a) in d.out(u) {
                y[*w] = y[*w].clone() + xu.clone() * a.clone();
            }
        }
        x = y;
        sum = sum + x[v].clone();
    }
    sum
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub perron_root: PerronRoot,
    /// det(I − zA), ascending powers.
    pub charpoly: Vec<String>,
    pub nonzero_eig_count: usize,
    pub det_at_one: String,
    pub method: CharpolyMethod,
}

pub fn spectral_report<T: Scalar>(
    d: &WeightedDigraph<T>,
    method: CharpolyMethod,
    budget: usize,
) -> Result<SpectralReport> {
    let p = charpoly(d, method, budget)?.trimmed();
    let det = p.coefficient_sum();
    Ok(SpectralReport {
        perron_root: perron_root(d, DEFAULT_TOL),
        charpoly: p.coeffs.iter().map(Scalar::weight_string).collect(),
        nonzero_eig_count: nonzero_eig_count(&p),
        det_at_one: det.weight_string(),
        method,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderMode {
    Leading,
    SupExact,
}

impl std::str::FromStr for LadderMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" => Ok(Self::Leading),
            "sup_exact" | "sup-exact" => Ok(Self::SupExact),
            o => Err(Error::InvalidParameter(format!("unknown ladder mode {o:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRow {
    pub n: usize,
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
    pub mode: LadderMode,
    /// Maximising vertex set (1-based) in sup_exact mode.
    pub argmax: Option<Vec<usize>>,
    pub closed_form: Option<f64>,
    pub gap_to_limit: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitMethod {
    ClosedForm,
    Extrapolated,
    SupremumOfComputed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub method: LimitMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationSpectrum {
    pub rows: Vec<LadderRow>,
    pub limit_estimate: Option<LimitEstimate>,
}

pub const DEFAULT_SUBSET_BUDGET: usize = 200_000;

/// λ_n over the requested orders. `Leading` uses truncate(f, n); `SupExact`
/// maximises over all n-subsets of the universe {1..universe}.
pub fn lambda_ladder<T: Scalar>(
    f: &TruncationFamily<T>,
    n_values: &[usize],
    mode: LadderMode,
    universe: Option<usize>,
    subset_budget: usize,
) -> Result<TruncationSpectrum> {
    let universe_digraph = match mode {
        LadderMode::Leading => None,
        LadderMode::SupExact => {
            let top = n_values.iter().copied().max().unwrap_or(1);
            let u = universe.unwrap_or(top);
            if u < top {
                return Err(Error::InvalidParameter(format!("universe {u} is smaller than n = {top}")));
            }
            Some(f.truncate(u)?)
        }
    };
    let limit = f.limit();
    let cells: Vec<usize> = n_values.to_vec();
    let results = crate::par::map(cells, |n| -> Result<LadderRow> {
        let (root, argmax) = match &universe_digraph {
            None => (perron_root(&f.truncate(n)?, DEFAULT_TOL), None),
            Some(u) => {
                let (r, set) = sup_over_subsets(u, n, subset_budget)?;
                (r, Some(set.iter().map(|v| v + 1).collect()))
            }
        };
        let closed_form = match mode {
            LadderMode::Leading => f.presentation().lambda_closed_form(n),
            LadderMode::SupExact => None,
        };
        Ok(LadderRow {
            n,
            lambda: root.value,
            lower: root.lower,
            upper: root.upper,
            mode,
            argmax,
            closed_form,
            gap_to_limit: limit.as_ref().map(|l| l.value - root.value),
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let limit_estimate = estimate_limit(&rows, limit.map(|l| l.value));
    Ok(TruncationSpectrum { rows, limit_estimate })
}

fn sup_over_subsets<T: Scalar>(u: &WeightedDigraph<T>, n: usize, budget: usize) -> Result<(PerronRoot, Vec<usize>)> {
    let total = binomial(u.order(), n);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { budget, during: format!("enumerating {total} principal submatrices") });
    }
    let mut best: Option<(PerronRoot, Vec<usize>)> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let r = perron_root(&u.induced(&idx), DEFAULT_TOL);
        if best.as_ref().is_none_or(|(b, _)| r.value > b.value) {
            best = Some((r, idx.clone()));
        }
        // next combination
        let m = u.order();
        let Some(i) = (0..n).rev().find(|&i| idx[i] != i + m - n) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(best.expect("at least one subset"))
}

fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    (0..k).fold(1u128, |acc, i| acc * (m - i) as u128 / (i + 1) as u128)
}

/// Limit of a ladder: the declared closed form, else Aitken's Δ² on the last
/// three values (kept only if it does not undercut the computed supremum),
/// else the supremum itself.
pub fn estimate_limit(rows: &[LadderRow], declared: Option<f64>) -> Option<LimitEstimate> {
    let sup = rows.iter().map(|r| r.lambda).fold(f64::NEG_INFINITY, f64::max);
    if let Some(v) = declared {
        return Some(LimitEstimate { value: v, method: LimitMethod::ClosedForm });
    }
    if rows.is_empty() {
        return None;
    }
    if rows.len() >= 3 {
        let k = rows.len();
        let (a, b, c) = (rows[k - 3].lambda, rows[k - 2].lambda, rows[k - 1].lambda);
        let (d1, d2) = (b - a, c - b);
        if d1 > 0.0 && d2 > 0.0 && d2 < d1 {
            let l = c + d2 * d2 / (d1 - d2);
            if l.is_finite() && l >= sup {
                return Some(LimitEstimate { value: l, method: LimitMethod::Extrapolated });
            }
        }
    }
    Some(LimitEstimate { value: sup, method: LimitMethod::SupremumOfComputed })
}
