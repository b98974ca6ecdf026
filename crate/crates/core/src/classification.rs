//! Transience and recurrence: Pruitt vectors, Green partial sums, the
//! structural criterion on cycle transversals and cycle lengths, and the
//! similarity scaling that turns a Pruitt vector into a substochastic form.

use serde::Serialize;

use crate::digraph::WeightedDigraph;
use crate::error::{Error, Result};
use crate::family::{Extent, FamilyMetadata, TruncationFamily};
use crate::scalar::{Rational, Scalar};
use crate::spectral::{estimate_limit, lambda_ladder, LadderMode, LimitEstimate, LimitMethod, DEFAULT_SUBSET_BUDGET};

/// Relative slack allowed in float-mode sub-invariance checks.
const FLOAT_SLACK: f64 = 1e-12;

fn check_lambda<T: Scalar>(lambda: &T) -> Result<()> {
    if *lambda <= T::zero() {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// Checks ξ > 0 and (Aξ)(v) ≤ λξ(v) for every v; returns the first vertex
/// where the inequality is strict. Exact for rationals.
pub fn verify_pruitt<T: Scalar>(d: &WeightedDigraph<T>, xi: &[T], lambda: &T) -> Option<usize> {
    if xi.len() != d.order() || xi.iter().any(|x| *x <= T::zero()) {
        return None;
    }
    let mut strict = None;
    for v in 0..d.order() {
        let ax = d.out(v).iter().fold(T::zero(), |acc, (w, a)| acc + a.clone() * xi[*w].clone());
        let rhs = lambda.clone() * xi[v].clone();
        if T::EXACT {
            if ax > rhs {
                return None;
            }
            if ax < rhs && strict.is_none() {
                strict = Some(v);
            }
        } else {
            let tol = T::from_f64(FLOAT_SLACK * rhs.to_f64().abs());
            if ax > rhs.clone() + tol.clone() {
                return None;
            }
            if ax < rhs - tol && strict.is_none() {
                strict = Some(v);
            }
        }
    }
    strict
}

/// Searches for ξ > 0 with Aξ ≤ λξ, strict somewhere. Tries the all-ones
/// vector, then (λI − A)ξ = e_u for each u, then (float mode) the averaged
/// power iteration x ← (A + λI)x / 2λ. `None` is not a disproof.
pub fn pruitt_certificate<T: Scalar>(d: &WeightedDigraph<T>, lambda: &T) -> Result<Option<Vec<T>>> {
    check_lambda(lambda)?;
    let n = d.order();
    let ones = vec![T::one(); n];
    if verify_pruitt(d, &ones, lambda).is_some() {
        return Ok(Some(ones));
    }
    // λI − A up to the positive factor λ
    let m = d.matrix().i_minus_scaled(&(T::one() / lambda.clone()));
    for u in 0..n {
        let mut e = vec![T::zero(); n];
        e[u] = T::one();
        let Ok(xi) = m.solve(&e) else { break };
        if verify_pruitt(d, &xi, lambda).is_some() {
            return Ok(Some(xi));
        }
    }
    if !T::EXACT {
        let mut x = ones;
        for _ in 0..2000 {
            let mut y: Vec<T> = x.iter().map(|xv| lambda.clone() * xv.clone()).collect();
            for (v, yv) in y.iter_mut().enumerate() {
                for (w, a) in d.out(v) {
                    *yv = yv.clone() + a.clone() * x[*w].clone();
                }
            }
            let top = y.iter().map(|t| t.to_f64()).fold(0.0, f64::max);
            if top <= 0.0 {
                break;
            }
            let s = T::from_f64(top);
            x = y.into_iter().map(|t| t / s.clone()).collect();
        }
        if verify_pruitt(d, &x, lambda).is_some() {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// w′(u, v) = w(u, v)·ξ(v) / (λ·ξ(u)).
pub fn similarity_scale<T: Scalar>(d: &WeightedDigraph<T>, xi: &[T], lambda: &T) -> Result<WeightedDigraph<T>> {
    check_lambda(lambda)?;
    if xi.len() != d.order() {
        return Err(Error::InvalidParameter(format!("xi has {} entries for order {}", xi.len(), d.order())));
    }
    if let Some(i) = xi.iter().position(|x| *x <= T::zero()) {
        return Err(Error::InvalidParameter(format!("xi({}) is not positive", i + 1)));
    }
    let arcs = d.arcs().map(|(u, v, w)| (u, v, w.clone() * xi[v].clone() / (lambda.clone() * xi[u].clone())));
    WeightedDigraph::new(d.order(), arcs.collect::<Vec<_>>())
}

/// True iff the declared cycle-transversal number and maximum cycle length
/// are both finite, i.e. no transient weighting exists.
pub fn cyr_criterion(meta: &FamilyMetadata) -> Result<bool> {
    match (meta.sct_size, meta.ell_max) {
        (Some(s), Some(l)) => Ok(s.is_finite() && l.is_finite()),
        (None, _) => Err(Error::Precondition("metadata does not declare the cycle-transversal number".into())),
        (_, None) => Err(Error::Precondition("metadata does not declare the maximum cycle length".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Transient,
    Recurrent,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Certified,
    Numerical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenPoint {
    pub p: usize,
    pub value: String,
    pub approx: f64,
}

/// G_P = Σ_{p≤P} A_n^p(v, v) λ^{−p} at checkpoints P.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenSeries {
    pub n: usize,
    /// 1-based.
    pub vertex: usize,
    pub exact: bool,
    pub points: Vec<GreenPoint>,
}

impl GreenSeries {
    /// Ratio of the last checkpoint increment to the one before it.
    pub fn increment_ratio(&self) -> Option<f64> {
        let k = self.points.len();
        if k < 3 {
            return None;
        }
        let d1 = self.points[k - 2].approx - self.points[k - 3].approx;
        let d2 = self.points[k - 1].approx - self.points[k - 2].approx;
        if d1 <= 0.0 {
            return (d2 > 0.0).then_some(f64::INFINITY);
        }
        Some(d2 / d1)
    }

    /// Exact equality of the last two increments (rational mode).
    fn increments_exactly_constant(&self, values: &[Rational]) -> bool {
        let k = values.len();
        k >= 3 && &values[k - 1] - &values[k - 2] == &values[k - 2] - &values[k - 3] && values[k - 1] != values[k - 2]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    PruittVector {
        vector: String,
        /// 1-based.
        strict_vertex: usize,
        lambda: String,
        checked_vertices: usize,
    },
    DivergingSeries {
        vertex: usize,
        n: usize,
        partial_sums: Vec<GreenPoint>,
        increment_ratio: f64,
        exact_linear_growth: bool,
    },
    CyrStructural {
        sct_size: Extent,
        ell_max: Extent,
    },
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceVerdict {
    pub family: String,
    pub verdict: Verdict,
    pub confidence: Confidence,
    pub evidence: Evidence,
    pub lambda: Option<LimitEstimate>,
    pub green: Vec<GreenSeries>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub n_max: usize,
    pub p_max: usize,
    /// 0-based return vertex; the presentation's default when absent.
    pub vertex: Option<usize>,
    /// Divergence is declared when the last increment is at least this
    /// multiple of the previous one.
    pub growth_ratio: f64,
    pub checkpoints: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { n_max: 64, p_max: 2000, vertex: None, growth_ratio: 1.0, checkpoints: 10 }
    }
}

/// Exact Green sums are used only below these sizes.
const EXACT_GREEN_ORDER: usize = 16;
const EXACT_GREEN_STEPS: usize = 2000;

/// Partial sums G_P at `checkpoints` (sorted), for vertex `v` of `d`.
pub fn green_partial_sums<T: Scalar>(d: &WeightedDigraph<T>, v: usize, lambda: &T, checkpoints: &[usize]) -> Vec<(usize, T)> {
    let n = d.order();
    let mut x = vec![T::zero(); n];
    x[v] = T::one();
    let mut sum = T::one();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    while next.peek().is_some_and(|&&p| p == 0) {
        out.push((0, sum.clone()));
        next.next();
    }
    let last = checkpoints.last().copied().unwrap_or(0);
    for p in 1..=last {
        let mut y = vec![T::zero(); n];
        for (u, xu) in x.iter().enumerate() {
            if xu.is_zero() {
                continue;
            }
            for (w, a) in d.out(u) {
                y[*w] = y[*w].clone() + xu.clone() * a.clone();
            }
        }
        x = y.into_iter().map(|t| t / lambda.clone()).collect();
        sum = sum + x[v].clone();
        while next.peek().is_some_and(|&&q| q == p) {
            out.push((p, sum.clone()));
            next.next();
        }
    }
    out
}

fn grid(n_max: usize, max_order: Option<usize>) -> Vec<usize> {
    let top = max_order.map_or(n_max, |m| m.min(n_max)).max(1);
    let mut g: Vec<usize> = [top / 4, top / 2, top].into_iter().filter(|&n| n >= 1).collect();
    g.dedup();
    g
}

/// Decision procedure: structural criterion first, then a presentation-level
/// Pruitt certificate, then the trend of Green partial sums.
pub fn classify<T: Scalar>(f: &TruncationFamily<T>, opts: &ClassifyOptions) -> RecurrenceVerdict {
    let mut notes: Vec<String> = f.presentation().notes();
    let meta = f.metadata();
    let family = f.name().to_string();
    match cyr_criterion(&meta) {
        Ok(true) => {
            return RecurrenceVerdict {
                family,
                verdict: Verdict::Recurrent,
                confidence: Confidence::Certified,
                evidence: Evidence::CyrStructural {
                    sct_size: meta.sct_size.unwrap(),
                    ell_max: meta.ell_max.unwrap(),
                },
                lambda: None,
                green: Vec::new(),
                notes,
            }
        }
        Ok(false) => notes.push("structural criterion does not apply: a transient weighting exists".into()),
        Err(e) => notes.push(format!("structural criterion skipped: {e}")),
    }
    let unknown = |notes: Vec<String>, lambda, green| RecurrenceVerdict {
        family: f.name().to_string(),
        verdict: Verdict::Unknown,
        confidence: Confidence::Numerical,
        evidence: Evidence::None,
        lambda,
        green,
        notes,
    };

    let p = f.presentation();
    let ns = grid(opts.n_max, p.max_order());
    let declared = f.limit();
    let lambda_est = match &declared {
        Some(l) => Some(LimitEstimate { value: l.value, method: LimitMethod::ClosedForm }),
        None => match lambda_ladder(f, &ns, LadderMode::Leading, None, DEFAULT_SUBSET_BUDGET) {
            Ok(s) => estimate_limit(&s.rows, None),
            Err(e) => {
                notes.push(format!("ladder failed: {e}"));
                None
            }
        },
    };
    let Some(lambda_est) = lambda_est else {
        return unknown(notes, None, Vec::new());
    };
    if !(lambda_est.value > 0.0) {
        notes.push("λ(M) estimate is not positive".into());
        return unknown(notes, Some(lambda_est), Vec::new());
    }
    let exact_lambda: Option<Rational> = declared.as_ref().and_then(|l| l.exact.clone());
    let v = opts.vertex.unwrap_or_else(|| p.return_vertex());

    // Green partial sums over the n grid
    let step = (opts.p_max / opts.checkpoints.max(1)).max(1);
    let checkpoints: Vec<usize> = (1..=opts.checkpoints.max(1)).map(|j| (j * step).min(opts.p_max.max(1))).collect();
    let use_exact = T::EXACT && exact_lambda.is_some() && opts.p_max <= EXACT_GREEN_STEPS;
    let cells: Vec<usize> = ns.iter().copied().filter(|&n| n > v).collect();
    let results = crate::par::map(cells, |n| -> Result<(GreenSeries, Option<Vec<Rational>>)> {
        let d = f.truncate(n)?;
        if use_exact && n <= EXACT_GREEN_ORDER {
            let lam = T::from_rational(exact_lambda.as_ref().unwrap());
            let sums = green_partial_sums(&d, v, &lam, &checkpoints);
            let exact: Vec<Rational> = sums.iter().map(|(_, s)| s.to_rational().unwrap()).collect();
            let points = sums.iter().map(|(p, s)| GreenPoint { p: *p, value: s.weight_string(), approx: s.to_f64() }).collect();
            Ok((GreenSeries { n, vertex: v + 1, exact: true, points }, Some(exact)))
        } else {
            let df = d.to_f64();
            let sums = green_partial_sums(&df, v, &lambda_est.value, &checkpoints);
            let points = sums.iter().map(|(p, s)| GreenPoint { p: *p, value: format!("{s:e}"), approx: *s }).collect();
            Ok((GreenSeries { n, vertex: v + 1, exact: false, points }, None))
        }
    });
    let mut green = Vec::new();
    let mut exact_values = Vec::new();
    for r in results {
        match r {
            Ok((g, e)) => {
                green.push(g);
                exact_values.push(e);
            }
            Err(e) => notes.push(format!("Green sums skipped: {e}")),
        }
    }

    // presentation-level certificate: all-ones against the exact limit
    if let (Some(w), Some(lam)) = (p.all_ones_witness(), exact_lambda.as_ref()) {
        let lam_t = T::from_rational(lam);
        let checked = p.max_order().map_or(opts.n_max, |m| m.min(opts.n_max));
        let mut ok = true;
        let mut strict_at_witness = false;
        for u in 0..checked.max(w + 1) {
            match p.out_weight(u) {
                Some(o) if o <= lam_t => {
                    if u == w && o < lam_t {
                        strict_at_witness = true;
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && strict_at_witness {
            return RecurrenceVerdict {
                family,
                verdict: Verdict::Transient,
                confidence: Confidence::Certified,
                evidence: Evidence::PruittVector {
                    vector: "all-ones".into(),
                    strict_vertex: w + 1,
                    lambda: lam.to_string(),
                    checked_vertices: checked.max(w + 1),
                },
                lambda: Some(lambda_est),
                green,
                notes,
            };
        }
        notes.push("all-ones certificate did not verify".into());
    }

    if let Some((g, exact)) = green.last().zip(exact_values.last()) {
        let linear = exact.as_ref().is_some_and(|vals| g.increments_exactly_constant(vals));
        let ratio = g.increment_ratio();
        if linear || ratio.is_some_and(|r| r >= opts.growth_ratio) {
            return RecurrenceVerdict {
                family,
                verdict: Verdict::Recurrent,
                confidence: Confidence::Numerical,
                evidence: Evidence::DivergingSeries {
                    vertex: g.vertex,
                    n: g.n,
                    partial_sums: g.points.clone(),
                    increment_ratio: ratio.unwrap_or(f64::NAN),
                    exact_linear_growth: linear,
                },
                lambda: Some(lambda_est),
                green,
                notes,
            };
        }
        notes.push(format!("partial sums level off (last increment ratio {:.3e})", ratio.unwrap_or(f64::NAN)));
    }
    unknown(notes, Some(lambda_est), green)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{BeadLengths, BeadedWeighting, Example1, Example2, FiniteFamily, TargetRule, Q};
    use crate::scalar::rational;
    use crate::spectral::{perron_root, DEFAULT_TOL};

    fn two_cycle(p: Rational, q: Rational) -> WeightedDigraph<Rational> {
        WeightedDigraph::new(2, [(0, 1, p), (1, 0, q)]).unwrap()
    }

    #[test]
    fn all_ones_for_truthly_substochastic() {
        let d = WeightedDigraph::new(2, [(0, 1, rational(1, 2)), (1, 0, rational(1, 1))]).unwrap();
        let xi = pruitt_certificate(&d, &rational(1, 1)).unwrap().unwrap();
        assert_eq!(xi, vec![rational(1, 1); 2]);
        assert_eq!(verify_pruitt(&d, &xi, &rational(1, 1)), Some(0));
    }

    #[test]
    fn no_certificate_at_the_perron_root() {
        // stochastic 2-cycle: ξ_2 ≤ ξ_1 and ξ_1 ≤ ξ_2 force equality everywhere
        let d = two_cycle(rational(1, 1), rational(1, 1));
        assert_eq!(pruitt_certificate(&d, &rational(1, 1)).unwrap(), None);
        let lp = WeightedDigraph::new(1, [(0, 0, rational(7, 10))]).unwrap();
        assert_eq!(pruitt_certificate(&lp, &rational(7, 10)).unwrap(), None);
        assert!(pruitt_certificate(&lp, &rational(0, 1)).is_err());
    }

    #[test]
    fn certificate_above_the_perron_root_by_solving() {
        // 2-cycle 4, 1 has ρ = 2; at λ = 3 the all-ones vector fails at vertex 1
        let d = two_cycle(rational(4, 1), rational(1, 1));
        let xi = pruitt_certificate(&d, &rational(3, 1)).unwrap().unwrap();
        assert!(verify_pruitt(&d, &xi, &rational(3, 1)).is_some());
        let df = d.to_f64();
        let xf = pruitt_certificate(&df, &3.0).unwrap().unwrap();
        assert!(verify_pruitt(&df, &xf, &3.0).is_some());
    }

    #[test]
    fn similarity_examples() {
        let d = two_cycle(rational(4, 1), rational(1, 1));
        let s = similarity_scale(&d, &[rational(1, 1), rational(2, 1)], &rational(2, 1)).unwrap();
        assert_eq!(s.weight(0, 1), Some(&rational(4, 1)));
        assert_eq!(s.weight(1, 0), Some(&rational(1, 4)));
        let lp = WeightedDigraph::new(1, [(0, 0, rational(7, 10))]).unwrap();
        let s = similarity_scale(&lp, &[rational(1, 1)], &rational(7, 10)).unwrap();
        assert_eq!(s.weight(0, 0), Some(&rational(1, 1)));
        assert_eq!(similarity_scale(&d, &vec![rational(1, 1); 2], &rational(1, 1)).unwrap(), d);
        assert!(similarity_scale(&d, &[rational(1, 1), rational(0, 1)], &rational(1, 1)).is_err());
    }

    #[test]
    fn cyr_examples() {
        let m = |s, l| FamilyMetadata { sct_size: s, ell_max: l, ..Default::default() };
        assert!(cyr_criterion(&m(Some(Extent::Finite(1)), Some(Extent::Finite(2)))).unwrap());
        assert!(!cyr_criterion(&m(Some(Extent::Finite(1)), Some(Extent::Infinite))).unwrap());
        assert!(!cyr_criterion(&m(Some(Extent::Infinite), Some(Extent::Finite(2)))).unwrap());
        assert!(cyr_criterion(&m(None, Some(Extent::Finite(2)))).is_err());
    }

    #[test]
    fn example2_is_structurally_recurrent() {
        let f: TruncationFamily<f64> = Example2::power_law(0.75).unwrap().family().unwrap();
        let v = classify(&f, &ClassifyOptions::default());
        assert_eq!((v.verdict, v.confidence), (Verdict::Recurrent, Confidence::Certified));
        assert!(matches!(v.evidence, Evidence::CyrStructural { .. }));
    }

    #[test]
    fn half_loop_diverges_linearly() {
        let f: TruncationFamily<Rational> = FiniteFamily::single_loop(rational(1, 2)).unwrap().family().unwrap();
        let v = classify(&f, &ClassifyOptions { p_max: 100, ..Default::default() });
        assert_eq!(v.verdict, Verdict::Recurrent);
        match &v.evidence {
            Evidence::DivergingSeries { partial_sums, exact_linear_growth, .. } => {
                assert!(*exact_linear_growth);
                assert_eq!(partial_sums.last().unwrap().value, "101");
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn prop1_is_certified_transient() {
        let w = BeadedWeighting::prop1(BeadLengths::linear(), TargetRule::Constant { value: Q(rational(1, 2)) }).unwrap();
        let f: TruncationFamily<f64> = w.family().unwrap();
        let v = classify(&f, &ClassifyOptions { n_max: 40, p_max: 400, ..Default::default() });
        assert_eq!((v.verdict, v.confidence), (Verdict::Transient, Confidence::Certified), "{v:#?}");
    }

    #[test]
    fn example1_power_law_is_transient() {
        let f: TruncationFamily<f64> = Example1::power_law(0.5).unwrap().family().unwrap();
        let v = classify(&f, &ClassifyOptions { n_max: 50, p_max: 200, ..Default::default() });
        assert_eq!(v.verdict, Verdict::Transient);
    }

    #[test]
    fn green_sums_are_monotone_in_p_and_n() {
        let f: TruncationFamily<f64> = Example1::power_law(0.5).unwrap().family().unwrap();
        let cps: Vec<usize> = (0..=50).collect();
        let small = green_partial_sums(&f.truncate(10).unwrap(), 0, &1.0, &cps);
        let big = green_partial_sums(&f.truncate(20).unwrap(), 0, &1.0, &cps);
        for i in 1..cps.len() {
            assert!(small[i].1 >= small[i - 1].1);
            assert!(big[i].1 >= small[i].1 - 1e-15);
        }
        let r = perron_root(&f.truncate(20).unwrap(), DEFAULT_TOL).value;
        assert!(r < 1.0);
    }
}
