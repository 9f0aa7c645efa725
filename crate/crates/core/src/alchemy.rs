//! Transforming the conditional Gibbs measure of `G1` into the equilibrium state of `G2`.
//!
//! On the unstable fiber through a past, the reference measure
//!
//! ```text
//! λ_n(A) = ∫_A e^{S_n G2 - S_n G1} dμ^u_{G1}  /  ∫ e^{S_n G2 - S_n G1} dμ^u_{G1}
//! ```
//!
//! is pushed forward by the shift and averaged, `μ_n = (1/n) Σ_{i<n} σ^i_* λ_n`. Everything
//! is evaluated on cylinders. The integrand is locally constant and the fiber measure is a
//! Markov chain on blocks, so `λ_n` of a constraint is a product of per-step matrices
//!
//! ```text
//! W(b, b') = Q_{G1}(b, b') · e^{(G2 - G1)(b ‖ last(b'))}
//! ```
//!
//! contracted against forward and backward messages: `O(n k²)` for the messages, then
//! `O(span · k²)` per cylinder. [`enumerate`] computes the same quantities by summing over
//! every fiber word, as an independent check.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::potential::LocallyConstantPotential;
use crate::scalar::{dot, Scalar, SquareMatrix};
use crate::shift::{
    shifted_cylinder_constraints, FiberConstraint, FiberConvention, PastWord, ShiftSpace, Symbol,
    TwoSidedCylinder,
};
use crate::thermo::{
    block_len_for, weighted_matrix, EquilibriumMarkovState, MarkovState, ThermoOptions,
    UnstableFiberMeasure,
};

/// Whether partition sums carry the `e^{n P(G1)}` factor. `λ_n` is the same either way.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    #[default]
    Raw,
    PressureNormalized,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct JobOptions {
    pub normalization: Normalization,
    pub convention: FiberConvention,
    pub thermo: ThermoOptions,
}

/// The `λ_n`, `σ^i_* λ_n`, `μ_n` pipeline for a pair of potentials and a base past.
#[derive(Clone, Debug)]
pub struct TransformJob<S = f64> {
    space: ShiftSpace,
    g1: LocallyConstantPotential,
    g2: LocallyConstantPotential,
    fiber: UnstableFiberMeasure<S>,
    /// `Q_{G1} ∘ e^{G2 - G1}` on block transitions.
    weighted: SquareMatrix<S>,
    rho1: S,
    p1: f64,
    p2: f64,
    target: Option<MarkovState<S>>,
    normalization: Normalization,
}

impl TransformJob<f64> {
    pub fn new(
        g1: &LocallyConstantPotential,
        g2: &LocallyConstantPotential,
        past: &PastWord,
        options: JobOptions,
    ) -> Result<Self> {
        let (s1, s2) = Self::states(g1, g2, options.thermo)?;
        let rho1 = s1.perron().rho;
        let target = Some(s2.chain().clone());
        let (p1, p2) = (s1.pressure(), s2.pressure());
        Self::assemble(g1, g2, past, options, s1.chain().clone(), rho1, p1, p2, target)
    }
}

impl TransformJob<BigRational> {
    /// The job in exact rational arithmetic. Needs exact weights on both potentials and a
    /// rational Perron root for `G1`; the `G2` reference chain is kept when it is rational too.
    pub fn new_exact(
        g1: &LocallyConstantPotential,
        g2: &LocallyConstantPotential,
        past: &PastWord,
        options: JobOptions,
    ) -> Result<Self> {
        if !g1.has_exact_weights() || !g2.has_exact_weights() {
            return Err(Error::ExactUnavailable(
                "both potentials need exact weights".into(),
            ));
        }
        let (s1, s2) = Self::states(g1, g2, options.thermo)?;
        let chain1 = s1.exact_chain()?;
        let rho1 = s1.exact_rho()?;
        let p1 = Scalar::ln(&rho1);
        let (target, p2) = match (s2.exact_chain(), s2.exact_rho()) {
            (Ok(chain), Ok(rho)) => (Some(chain), Scalar::ln(&rho)),
            _ => (None, s2.pressure()),
        };
        Self::assemble(g1, g2, past, options, chain1, rho1, p1, p2, target)
    }
}

impl<S: Scalar> TransformJob<S> {
    fn states(
        g1: &LocallyConstantPotential,
        g2: &LocallyConstantPotential,
        thermo: ThermoOptions,
    ) -> Result<(EquilibriumMarkovState, EquilibriumMarkovState)> {
        if g1.space() != g2.space() {
            return Err(Error::SpaceMismatch);
        }
        g1.space().require_primitive()?;
        for g in [g1, g2] {
            if !g.is_one_sided() {
                return Err(Error::TwoSidedPotential {
                    past: g.window().past,
                });
            }
        }
        let s = block_len_for(g1.window().future).max(block_len_for(g2.window().future));
        Ok((
            EquilibriumMarkovState::with_block_len(g1, s, thermo)?,
            EquilibriumMarkovState::with_block_len(g2, s, thermo)?,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        g1: &LocallyConstantPotential,
        g2: &LocallyConstantPotential,
        past: &PastWord,
        options: JobOptions,
        chain1: MarkovState<S>,
        rho1: S,
        p1: f64,
        p2: f64,
        target: Option<MarkovState<S>>,
    ) -> Result<Self> {
        let space = g1.space().clone();
        space.check_word(past.repr())?;
        let rec = chain1.recoding().clone();
        let b1 = weighted_matrix::<S>(g1, &rec)?;
        let b2 = weighted_matrix::<S>(g2, &rec)?;
        let n = b1.dim();
        let mut weighted = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if !b1.get(i, j).is_zero() {
                    let ratio = b2.get(i, j).clone() / b1.get(i, j).clone();
                    weighted.set(i, j, chain1.q().get(i, j).clone() * ratio);
                }
            }
        }
        let fiber = UnstableFiberMeasure::from_chain(past, chain1, p1, options.convention)?;
        Ok(TransformJob {
            space,
            g1: g1.clone(),
            g2: g2.clone(),
            fiber,
            weighted,
            rho1,
            p1,
            p2,
            target,
            normalization: options.normalization,
        })
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn g1(&self) -> &LocallyConstantPotential {
        &self.g1
    }

    pub fn g2(&self) -> &LocallyConstantPotential {
        &self.g2
    }

    pub fn past(&self) -> &PastWord {
        self.fiber.past()
    }

    pub fn fiber(&self) -> &UnstableFiberMeasure<S> {
        &self.fiber
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn with_normalization(&self, normalization: Normalization) -> Self {
        TransformJob {
            normalization,
            ..self.clone()
        }
    }

    pub fn block_len(&self) -> usize {
        self.fiber.chain().block_len()
    }

    /// `P(G1)`.
    pub fn pressure_g1(&self) -> f64 {
        self.p1
    }

    /// `P(G2)`.
    pub fn pressure_g2(&self) -> f64 {
        self.p2
    }

    /// Messages for time `n`; reuse them when evaluating many sets at the same `n`.
    pub fn at(&self, n: usize) -> Result<LambdaN<'_, S>> {
        LambdaN::new(self, n)
    }

    /// `Z_n`, and `K_{n,A}` when a fiber constraint is given.
    pub fn partition_sum(
        &self,
        n: usize,
        constraint: Option<&FiberConstraint>,
    ) -> Result<PartitionSums<S>> {
        if let Some(c) = constraint {
            self.validate_constraint(c)?;
        }
        Ok(self.at(n)?.partition_sums(constraint))
    }

    fn validate_constraint(&self, c: &FiberConstraint) -> Result<()> {
        self.space.check_word_at(&c.symbols, c.offset as i64)?;
        if c.offset == 0 {
            if let Some(&first) = c.symbols.first() {
                let last = self.past().last();
                if !self.space.allows(last, first) {
                    return Err(Error::ForbiddenTransition {
                        from: last,
                        to: first,
                        position: -1,
                    });
                }
            }
        }
        Ok(())
    }

    /// `λ_n` of a fiber constraint; empty sets have mass zero.
    pub fn lambda_n_eval(&self, n: usize, constraint: &FiberConstraint) -> Result<S> {
        self.space.check_word(&constraint.symbols)?;
        Ok(self.at(n)?.lambda(constraint))
    }

    /// `σ^i_* λ_n (A) = λ_n(σ^{-i} A ∩ fiber)`.
    pub fn pushforward_eval(&self, n: usize, i: usize, cylinder: &TwoSidedCylinder) -> Result<S> {
        Ok(self.at(n)?.pushforward(i, cylinder))
    }

    /// `μ_n(A) = (1/n) Σ_{i<n} σ^i_* λ_n (A)`.
    pub fn mu_n_eval(&self, n: usize, cylinder: &TwoSidedCylinder) -> Result<S> {
        Ok(self.at(n)?.mu(cylinder))
    }

    /// `σ^n_* λ_n (A)`, without averaging.
    pub fn endpoint_eval(&self, n: usize, cylinder: &TwoSidedCylinder) -> Result<S> {
        let (m, big_n) = (cylinder.past_extent(), cylinder.future_extent());
        if n <= m + big_n {
            return Err(Error::InvalidArgument(format!(
                "endpoint needs n > M + N = {}",
                m + big_n
            )));
        }
        Ok(self.at(n)?.pushforward(n, cylinder))
    }

    /// `μ_{G2}(A)`, the limit the averaged measures should reach.
    pub fn reference_measure(&self, cylinder: &TwoSidedCylinder) -> Result<S> {
        let chain = self.target.as_ref().ok_or_else(|| {
            Error::ExactUnavailable("equilibrium state of G2 is not rational".into())
        })?;
        Ok(chain.cylinder_measure(cylinder.symbols()).value())
    }

    /// `(mantissa, log-scale)` of raw `Z_n`, forward pass only.
    fn raw_log_partition(&self, n: usize) -> Result<f64> {
        let lam = LambdaN::forward_only(self, n)?;
        Ok(lam.log_z_raw())
    }

    /// `(1/n) log Z_n` and `log Z_{n+1} - log Z_n` over `n_range`, against `P(G2) - P(G1)`.
    pub fn growth_series(&self, n_range: &[usize]) -> Result<GrowthSeries> {
        if self.normalization != Normalization::Raw {
            return Err(Error::InvalidArgument(
                "growth series is defined for raw normalization".into(),
            ));
        }
        check_range(n_range)?;
        let mut points = Vec::with_capacity(n_range.len());
        for &n in n_range {
            let log_z = self.raw_log_partition(n)?;
            let next = self.raw_log_partition(n + 1)?;
            points.push(GrowthPoint {
                n,
                log_z,
                mean_log: log_z / n as f64,
                difference: next - log_z,
            });
        }
        Ok(GrowthSeries {
            points,
            target: self.p2 - self.p1,
        })
    }

    /// `μ_n(A)` against `μ_{G2}(A)` over `n_range`, with the fitted `C` of `error ≈ C / n`.
    pub fn convergence_report(
        &self,
        cylinder: &TwoSidedCylinder,
        n_range: &[usize],
    ) -> Result<ConvergenceReport<S>> {
        check_range(n_range)?;
        let reference = self.reference_measure(cylinder)?;
        let mut rows = Vec::with_capacity(n_range.len());
        for &n in n_range {
            let mu = self.mu_n_eval(n, cylinder)?;
            rows.push(ConvergenceRow::new(n, mu, &reference));
        }
        Ok(ConvergenceReport::new(reference, rows))
    }
}

fn check_range(n_range: &[usize]) -> Result<()> {
    if n_range.is_empty() || n_range[0] == 0 || n_range.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n_range must be a non-empty increasing list of positive integers".into(),
        ));
    }
    Ok(())
}

/// `Z_n` and optionally `K_{n,A}`, each as a value plus its natural log.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSums<S> {
    pub n: usize,
    pub normalization: Normalization,
    pub z: S,
    pub log_z: f64,
    pub k: Option<S>,
    pub log_k: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthPoint {
    pub n: usize,
    pub log_z: f64,
    pub mean_log: f64,
    /// `log Z_{n+1} - log Z_n`.
    pub difference: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthSeries {
    pub points: Vec<GrowthPoint>,
    pub target: f64,
}

impl GrowthSeries {
    pub fn difference_error(&self, n: usize) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.n == n)
            .map(|p| (p.difference - self.target).abs())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow<S> {
    pub n: usize,
    pub mu: S,
    pub error: S,
    pub n_error: S,
}

impl<S: Scalar> ConvergenceRow<S> {
    pub fn new(n: usize, mu: S, reference: &S) -> Self {
        let error = abs_diff(&mu, reference);
        let n_error = error.clone() * S::from_usize(n);
        ConvergenceRow {
            n,
            mu,
            error,
            n_error,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport<S> {
    pub reference: S,
    pub rows: Vec<ConvergenceRow<S>>,
    /// Least-absolute-deviation fit of `n · error ≈ C`, i.e. the median of `n · error`. The
    /// median ignores the exponentially decaying transient at small `n`.
    pub fitted_constant: f64,
    pub max_n_error: f64,
    /// `max_n n·error` stays within 10% of the fitted constant.
    pub bounded: bool,
}

impl<S: Scalar> ConvergenceReport<S> {
    pub fn new(reference: S, rows: Vec<ConvergenceRow<S>>) -> Self {
        let mut scaled: Vec<f64> = rows.iter().map(|r| r.n_error.to_f64()).collect();
        scaled.sort_by(f64::total_cmp);
        let fitted_constant = match scaled.len() {
            0 => 0.0,
            l if l % 2 == 1 => scaled[l / 2],
            l => 0.5 * (scaled[l / 2 - 1] + scaled[l / 2]),
        };
        let max_n_error = rows.iter().map(|r| r.n_error.to_f64()).fold(0.0, f64::max);
        let bounded = max_n_error <= 1.1 * fitted_constant;
        ConvergenceReport {
            reference,
            rows,
            fitted_constant,
            max_n_error,
            bounded,
        }
    }
}

pub(crate) fn abs_diff<S: Scalar>(a: &S, b: &S) -> S {
    if a >= b {
        a.clone() - b.clone()
    } else {
        b.clone() - a.clone()
    }
}

/// A normalised vector with the log of the factor divided out.
#[derive(Clone, Debug)]
struct Scaled<S> {
    v: Vec<S>,
    log: f64,
}

/// Forward/backward messages for one time `n`.
///
/// Step `j` appends fiber coordinate `y_j`. Its block transition covers coordinates
/// `j-s..=j`, which is where `G ∘ σ^{j-s}` is read, so steps `s..s+n` carry the integrand and
/// every other step is a plain `Q_{G1}` step. Past the horizon the backward message is `1`.
#[derive(Clone, Debug)]
pub struct LambdaN<'a, S> {
    job: &'a TransformJob<S>,
    n: usize,
    horizon: usize,
    forward: Vec<Scaled<S>>,
    backward: Vec<Scaled<S>>,
    ones: Scaled<S>,
    z_mantissa: S,
    z_log: f64,
}

impl<'a, S: Scalar> LambdaN<'a, S> {
    fn new(job: &'a TransformJob<S>, n: usize) -> Result<Self> {
        let mut lam = Self::forward_only(job, n)?;
        let nb = job.weighted.dim();
        let mut backward = vec![
            Scaled {
                v: vec![S::one(); nb],
                log: 0.0,
            };
            lam.horizon + 1
        ];
        for j in (0..lam.horizon).rev() {
            let mut v = lam.step_backward(&backward[j + 1].v, j, None);
            let log = S::rescale(&mut v) + backward[j + 1].log;
            backward[j] = Scaled { v, log };
        }
        lam.backward = backward;
        Ok(lam)
    }

    fn forward_only(job: &'a TransformJob<S>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let nb = job.weighted.dim();
        let s = job.block_len();
        let horizon = (n + s).max(job.fiber.convention().pinned().len());
        let mut lam = LambdaN {
            job,
            n,
            horizon,
            forward: Vec::with_capacity(horizon + 1),
            backward: Vec::new(),
            ones: Scaled {
                v: vec![S::one(); nb],
                log: 0.0,
            },
            z_mantissa: S::zero(),
            z_log: 0.0,
        };
        let mut v = vec![S::zero(); nb];
        v[job.fiber.start_block()] = S::one();
        lam.forward.push(Scaled { v, log: 0.0 });
        for j in 0..horizon {
            let prev = &lam.forward[j];
            let mut v = lam.step_forward(&prev.v, j, None);
            let log = S::rescale(&mut v) + prev.log;
            lam.forward.push(Scaled { v, log });
        }
        let last = &lam.forward[horizon];
        let total = last.v.iter().fold(S::zero(), |a, x| a + x.clone());
        lam.z_mantissa = total / job.fiber.pinned_mass().clone();
        lam.z_log = last.log;
        Ok(lam)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn weighted_step(&self, j: usize) -> bool {
        let s = self.job.block_len();
        j >= s && j < s + self.n
    }

    fn allowed(&self, j: usize, extra: Option<Symbol>, target_block: usize) -> bool {
        let y = self.job.fiber.chain().recoding().last_symbol(target_block);
        let pinned = self.job.fiber.convention().pinned();
        pinned.get(j).map_or(true, |&p| p == y) && extra.map_or(true, |c| c == y)
    }

    fn step_matrix(&self, j: usize) -> &SquareMatrix<S> {
        if self.weighted_step(j) {
            &self.job.weighted
        } else {
            self.job.fiber.chain().q()
        }
    }

    fn step_forward(&self, v: &[S], j: usize, extra: Option<Symbol>) -> Vec<S> {
        let m = self.step_matrix(j);
        let nb = m.dim();
        let mut out = vec![S::zero(); nb];
        for (b, vb) in v.iter().enumerate() {
            if vb.is_zero() {
                continue;
            }
            for (b2, o) in out.iter_mut().enumerate() {
                let w = m.get(b, b2);
                if !w.is_zero() && self.allowed(j, extra, b2) {
                    *o = o.clone() + vb.clone() * w.clone();
                }
            }
        }
        out
    }

    fn step_backward(&self, v: &[S], j: usize, extra: Option<Symbol>) -> Vec<S> {
        let m = self.step_matrix(j);
        let nb = m.dim();
        let mask: Vec<bool> = (0..nb).map(|b2| self.allowed(j, extra, b2)).collect();
        (0..nb)
            .map(|b| {
                m.row(b)
                    .iter()
                    .zip(v)
                    .zip(&mask)
                    .filter(|((w, _), &ok)| ok && !w.is_zero())
                    .fold(S::zero(), |acc, ((w, x), _)| acc + w.clone() * x.clone())
            })
            .collect()
    }

    fn backward_at(&self, j: usize) -> &Scaled<S> {
        self.backward.get(j).unwrap_or(&self.ones)
    }

    fn log_z_raw(&self) -> f64 {
        self.z_mantissa.ln() + self.z_log
    }

    /// Raw `K` for a fiber constraint as `(mantissa, log-scale)`, before dividing by the
    /// pinned mass. Forward messages are only stored up to the horizon; beyond it the fiber
    /// steps are stochastic and are contracted on the fly.
    fn constrained(&self, c: &FiberConstraint) -> (S, f64) {
        if c.symbols.is_empty() {
            return (self.z_mantissa.clone() * self.job.fiber.pinned_mass().clone(), self.z_log);
        }
        let lo = c.offset;
        let hi = c.end();
        let (mut v, mut log) = if lo <= self.horizon {
            let f = &self.forward[lo];
            (f.v.clone(), f.log)
        } else {
            let f = &self.forward[self.horizon];
            let mut v = f.v.clone();
            let mut log = f.log;
            for j in self.horizon..lo {
                v = self.step_forward(&v, j, None);
                log += S::rescale(&mut v);
            }
            (v, log)
        };
        for j in lo..hi {
            v = self.step_forward(&v, j, c.symbol_at(j));
            log += S::rescale(&mut v);
        }
        let b = self.backward_at(hi);
        (dot(&v, &b.v), log + b.log)
    }

    fn finish(&self, mantissa: S, log: f64) -> (S, f64) {
        let mantissa = mantissa / self.job.fiber.pinned_mass().clone();
        match self.job.normalization {
            Normalization::Raw => (mantissa, log),
            Normalization::PressureNormalized => S::mul_power(mantissa, log, &self.job.rho1, self.n),
        }
    }

    pub fn partition_sums(&self, constraint: Option<&FiberConstraint>) -> PartitionSums<S> {
        let (zm, zl) = self.finish(self.z_mantissa.clone() * self.job.fiber.pinned_mass().clone(), self.z_log);
        let log_z = zm.ln() + zl;
        let z = S::collapse(zm, zl);
        let (k, log_k) = match constraint {
            Some(c) => {
                let (km, kl) = self.constrained(c);
                let (km, kl) = self.finish(km, kl);
                let log_k = km.ln() + kl;
                (Some(S::collapse(km, kl)), Some(log_k))
            }
            None => (None, None),
        };
        PartitionSums {
            n: self.n,
            normalization: self.job.normalization,
            z,
            log_z,
            k,
            log_k,
        }
    }

    pub fn z(&self) -> S {
        self.partition_sums(None).z
    }

    /// `λ_n` of a fiber constraint.
    pub fn lambda(&self, c: &FiberConstraint) -> S {
        if c.offset == 0 {
            if let Some(&first) = c.symbols.first() {
                if !self.job.space.allows(self.job.past().last(), first) {
                    return S::zero();
                }
            }
        }
        let (km, kl) = self.constrained(c);
        let zm = self.z_mantissa.clone() * self.job.fiber.pinned_mass().clone();
        S::collapse(km / zm, kl - self.z_log)
    }

    pub fn pushforward(&self, i: usize, cylinder: &TwoSidedCylinder) -> S {
        match shifted_cylinder_constraints(&self.job.space, cylinder, self.job.past(), i) {
            Some(c) => self.lambda(&c),
            None => S::zero(),
        }
    }

    pub fn mu(&self, cylinder: &TwoSidedCylinder) -> S {
        let total = (0..self.n).fold(S::zero(), |acc, i| acc + self.pushforward(i, cylinder));
        total / S::from_usize(self.n)
    }

    pub fn endpoint(&self, cylinder: &TwoSidedCylinder) -> S {
        self.pushforward(self.n, cylinder)
    }

    /// `σ^i_* λ_n` of the cylinder `[word]` starting at coordinate 0, for every `i` in
    /// `shift_range`. Shifting the start of a cylinder by `a` reads the same sequence at
    /// `i + a`, which lets callers evaluate `μ_n` at every start offset from one pass.
    pub fn pushforward_profile(
        &self,
        word: &[Symbol],
        shift_range: std::ops::Range<i64>,
    ) -> Vec<S> {
        let past = self.job.past();
        shift_range
            .map(|p| {
                let mut offset = None;
                let mut symbols = Vec::new();
                for (t, &z) in word.iter().enumerate() {
                    let m = p + t as i64;
                    if m <= -1 {
                        if past.symbol_at(m) != z {
                            return S::zero();
                        }
                    } else {
                        offset.get_or_insert(m as usize);
                        symbols.push(z);
                    }
                }
                self.lambda(&FiberConstraint::new(offset.unwrap_or(0), symbols))
            })
            .collect()
    }
}

/// Queries answered by [`enumerate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Query {
    Fiber(FiberConstraint),
    Pushforward {
        i: usize,
        cylinder: TwoSidedCylinder,
    },
}

/// Raw partition sums by brute force over fiber words.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration<S> {
    pub n: usize,
    pub word_len: usize,
    pub words: usize,
    pub z: S,
    /// Raw `K` per query, in query order.
    pub k: Vec<S>,
}

impl<S: Scalar> Enumeration<S> {
    pub fn lambda(&self, q: usize) -> S {
        self.k[q].clone() / self.z.clone()
    }
}

/// Sums `μ^u(y) · e^{S_n G2(y) - S_n G1(y)}` over every admissible fiber word `y` long enough
/// to decide the integrand and every query. Birkhoff sums come straight from the potential
/// tables and membership is tested coordinate by coordinate.
pub fn enumerate<S: Scalar>(
    job: &TransformJob<S>,
    n: usize,
    queries: &[Query],
) -> Result<Enumeration<S>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let r = job.g1.window().future.max(job.g2.window().future);
    let mut len = (n + r - 1).max(job.fiber.convention().pinned().len()).max(1);
    for q in queries {
        let end = match q {
            Query::Fiber(c) => c.end() as i64,
            Query::Pushforward { i, cylinder } => *i as i64 + cylinder.end() + 1,
        };
        len = len.max(end.max(0) as usize);
    }
    let past = job.past();
    let mut z = S::zero();
    let mut k = vec![S::zero(); queries.len()];
    let mut words = 0;
    for y in job.space.words_after(past.last(), len) {
        let mass = job.fiber.cylinder_mass(&y);
        if mass.is_zero() {
            continue;
        }
        words += 1;
        let integrand =
            job.g2.birkhoff_weight::<S>(&y, n)? / job.g1.birkhoff_weight::<S>(&y, n)?;
        let contribution = mass * integrand;
        for (q, acc) in queries.iter().zip(k.iter_mut()) {
            let member = match q {
                Query::Fiber(c) => c
                    .symbols
                    .iter()
                    .enumerate()
                    .all(|(t, &zsym)| y[c.offset + t] == zsym),
                Query::Pushforward { i, cylinder } => cylinder.contains(|j| {
                    let m = j + *i as i64;
                    if m < 0 {
                        past.symbol_at(m)
                    } else {
                        y[m as usize]
                    }
                }),
            };
            if member {
                *acc = acc.clone() + contribution.clone();
            }
        }
        z = z + contribution;
    }
    Ok(Enumeration {
        n,
        word_len: len,
        words,
        z,
        k,
    })
}

/// `μ_n(A)` by enumeration: the average of the enumerated pushforwards.
pub fn mu_n_enumerated<S: Scalar>(
    job: &TransformJob<S>,
    n: usize,
    cylinder: &TwoSidedCylinder,
) -> Result<S> {
    let queries: Vec<Query> = (0..n)
        .map(|i| Query::Pushforward {
            i,
            cylinder: cylinder.clone(),
        })
        .collect();
    let e = enumerate(job, n, &queries)?;
    let total = (0..n).fold(S::zero(), |acc, q| acc + e.lambda(q));
    Ok(total / S::from_usize(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Window;
    use approx::assert_abs_diff_eq;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn example_exact(past: Symbol) -> TransformJob<BigRational> {
        let s = ShiftSpace::full(2);
        let g1 = LocallyConstantPotential::constant_weight(&s, q(1, 2)).unwrap();
        let g2 = LocallyConstantPotential::bernoulli_exact(&s, &[q(3, 10), q(7, 10)]).unwrap();
        let past = PastWord::constant(&s, past).unwrap();
        TransformJob::new_exact(&g1, &g2, &past, JobOptions::default()).unwrap()
    }

    fn a00(s: &ShiftSpace) -> TwoSidedCylinder {
        TwoSidedCylinder::new(s, -1, vec![0, 0]).unwrap()
    }

    #[test]
    fn example_partition_sum_is_one() {
        let job = example_exact(0);
        for n in 1..=12 {
            assert_eq!(job.partition_sum(n, None).unwrap().z, q(1, 1));
        }
    }

    #[test]
    fn example_pushforwards_and_average() {
        let job = example_exact(0);
        let a = a00(job.space());
        assert_eq!(job.pushforward_eval(10, 0, &a).unwrap(), q(3, 10));
        for i in 1..10 {
            assert_eq!(job.pushforward_eval(10, i, &a).unwrap(), q(9, 100));
        }
        assert_eq!(job.mu_n_eval(10, &a).unwrap(), q(111, 1000));
        assert_eq!(job.endpoint_eval(10, &a).unwrap(), q(3, 20));
        assert_eq!(job.reference_measure(&a).unwrap(), q(9, 100));

        let ones = example_exact(1);
        assert_eq!(ones.pushforward_eval(10, 0, &a).unwrap(), q(0, 1));
    }

    #[test]
    fn example_lambda_is_target_bernoulli() {
        let job = example_exact(1);
        let s = job.space().clone();
        for n in 1..=6 {
            for w in s.words(n) {
                let zeros = w.iter().filter(|&&x| x == 0).count();
                let expect = num_traits::pow(q(3, 10), zeros) * num_traits::pow(q(7, 10), n - zeros);
                let got = job.lambda_n_eval(n, &FiberConstraint::new(0, w)).unwrap();
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn endpoint_precondition() {
        let job = example_exact(0);
        let a = a00(job.space());
        assert!(job.endpoint_eval(1, &a).is_err());
    }

    #[test]
    fn normalization_cancels_exactly() {
        let s = ShiftSpace::full(2);
        let g1 = LocallyConstantPotential::constant_weight(&s, q(1, 3)).unwrap();
        let g2 = LocallyConstantPotential::bernoulli_exact(&s, &[q(1, 5), q(4, 5)]).unwrap();
        let past = PastWord::constant(&s, 0).unwrap();
        let raw = TransformJob::new_exact(&g1, &g2, &past, JobOptions::default()).unwrap();
        let norm = raw.with_normalization(Normalization::PressureNormalized);
        let c = FiberConstraint::new(2, vec![1, 0]);
        for n in [1, 3, 7] {
            let pr = raw.partition_sum(n, Some(&c)).unwrap();
            let pn = norm.partition_sum(n, Some(&c)).unwrap();
            assert_ne!(pr.z, pn.z);
            assert_eq!(
                pr.k.clone().unwrap() / pr.z.clone(),
                pn.k.clone().unwrap() / pn.z.clone()
            );
            // ρ1 = 2/3, so the normalised Z carries (2/3)^n.
            assert_eq!(pn.z.clone(), pr.z.clone() * num_traits::pow(q(2, 3), n));
        }
    }

    #[test]
    fn constraint_validation() {
        let g = ShiftSpace::golden_mean();
        let zero = LocallyConstantPotential::zero(&g);
        let past = PastWord::new(&g, vec![0, 1]).unwrap();
        let job = TransformJob::new(&zero, &zero, &past, JobOptions::default()).unwrap();
        assert!(matches!(
            job.partition_sum(3, Some(&FiberConstraint::new(0, vec![1]))),
            Err(Error::ForbiddenTransition { .. })
        ));
        assert_eq!(job.lambda_n_eval(3, &FiberConstraint::new(0, vec![1])).unwrap(), 0.0);
        assert!(job.lambda_n_eval(3, &FiberConstraint::new(1, vec![1, 1])).is_err());
    }

    #[test]
    fn rejects_non_primitive_and_two_sided() {
        let id = ShiftSpace::new(2, &[vec![1, 0], vec![0, 1]], 0.5).unwrap();
        let z = LocallyConstantPotential::zero(&id);
        let past = PastWord::constant(&id, 0).unwrap();
        assert_eq!(
            TransformJob::new(&z, &z, &past, JobOptions::default()).unwrap_err(),
            Error::NotPrimitive
        );
        let s = ShiftSpace::full(2);
        let two = LocallyConstantPotential::from_fn(&s, Window::new(1, 1).unwrap(), |w| w[1] as f64).unwrap();
        let zero = LocallyConstantPotential::zero(&s);
        let past = PastWord::constant(&s, 0).unwrap();
        assert_eq!(
            TransformJob::new(&zero, &two, &past, JobOptions::default()).unwrap_err(),
            Error::TwoSidedPotential { past: 1 }
        );
    }

    #[test]
    fn contraction_matches_enumeration_golden() {
        let g = ShiftSpace::golden_mean();
        let g1 = LocallyConstantPotential::zero(&g);
        let g2 = LocallyConstantPotential::from_table(
            &g,
            Window::one_sided(2).unwrap(),
            vec![(vec![0, 0], 0.4), (vec![0, 1], -0.3), (vec![1, 0], 0.1)],
        )
        .unwrap();
        let past = PastWord::new(&g, vec![1, 0]).unwrap();
        let job = TransformJob::new(&g1, &g2, &past, JobOptions::default()).unwrap();
        let a = TwoSidedCylinder::new(&g, -1, vec![1, 0, 0]).unwrap();
        for n in 1..=8 {
            let mut queries: Vec<Query> = (0..=n)
                .map(|i| Query::Pushforward {
                    i,
                    cylinder: a.clone(),
                })
                .collect();
            queries.push(Query::Fiber(FiberConstraint::new(1, vec![0, 1])));
            let e = enumerate(&job, n, &queries).unwrap();
            let lam = job.at(n).unwrap();
            assert_abs_diff_eq!(lam.z(), e.z, epsilon = 1e-12);
            for i in 0..=n {
                assert_abs_diff_eq!(lam.pushforward(i, &a), e.lambda(i), epsilon = 1e-12);
            }
            let k = job
                .partition_sum(n, Some(&FiberConstraint::new(1, vec![0, 1])))
                .unwrap()
                .k
                .unwrap();
            assert_abs_diff_eq!(k, e.k[n + 1], epsilon = 1e-12);
        }
    }

    #[test]
    fn pinned_convention_matches_enumeration() {
        let s = ShiftSpace::full(2);
        let g1 = LocallyConstantPotential::bernoulli(&s, &[0.4, 0.6]).unwrap();
        let g2 = LocallyConstantPotential::from_fn(&s, Window::one_sided(2).unwrap(), |w| {
            0.3 * w[0] as f64 - 0.2 * w[1] as f64
        })
        .unwrap();
        let past = PastWord::constant(&s, 1).unwrap();
        let opts = JobOptions {
            convention: FiberConvention::Pinned(vec![1, 0]),
            ..JobOptions::default()
        };
        let job = TransformJob::new(&g1, &g2, &past, opts).unwrap();
        let a = TwoSidedCylinder::new(&s, 0, vec![0, 1]).unwrap();
        for n in 1..=7 {
            let mu = job.mu_n_eval(n, &a).unwrap();
            let mu_e = mu_n_enumerated(&job, n, &a).unwrap();
            assert_abs_diff_eq!(mu, mu_e, epsilon = 1e-12);
            assert_abs_diff_eq!(
                job.partition_sum(n, None).unwrap().z,
                enumerate(&job, n, &[]).unwrap().z,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn growth_series_for_constant_shift() {
        let g = ShiftSpace::golden_mean();
        let g1 = LocallyConstantPotential::zero(&g);
        let g2 = g1.add_constant(0.37).unwrap();
        let past = PastWord::constant(&g, 0).unwrap();
        let job = TransformJob::new(&g1, &g2, &past, JobOptions::default()).unwrap();
        let series = job.growth_series(&[1, 2, 5, 20]).unwrap();
        for p in &series.points {
            assert_abs_diff_eq!(p.mean_log, 0.37, epsilon = 1e-13);
            assert_abs_diff_eq!(p.difference, 0.37, epsilon = 1e-13);
        }
        assert!(job
            .with_normalization(Normalization::PressureNormalized)
            .growth_series(&[1])
            .is_err());
        assert!(job.growth_series(&[3, 2]).is_err());
    }

    #[test]
    fn convergence_report_example() {
        let job = example_exact(0);
        let a = a00(job.space());
        let rep = job.convergence_report(&a, &[2, 3, 10, 25]).unwrap();
        for row in &rep.rows {
            assert_eq!(row.n_error, q(21, 100));
        }
        assert!((rep.fitted_constant - 0.21).abs() < 1e-12);
        assert!(rep.bounded);
    }
}
