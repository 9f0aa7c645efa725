//! Pressure, equilibrium states and conditional Gibbs measures on unstable fibers.
//!
//! A one-sided potential with window `(0, r)` becomes a weighted transition matrix on the
//! alphabet of admissible `s`-blocks, `s = max(1, r - 1)`:
//!
//! ```text
//! B(b, b') = e^{G(b ‖ last(b'))}   when b' overlaps b
//! ```
//!
//! Its Perron data `(ρ, h, ν)` give the pressure `log ρ` and the equilibrium state as the
//! stationary Markov chain `Q(b, b') = B(b, b') h_{b'} / (ρ h_b)`, `π_b = ν_b h_b`.
//! Cylinder masses are products of `π` and `Q`, so they are normalised exactly.

use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::perron::{exact_perron, perron, PerronData, PerronOptions};
use crate::potential::LocallyConstantPotential;
use crate::scalar::{Scalar, SquareMatrix};
use crate::shift::{higher_block_recode, FiberConvention, HigherBlock, PastWord, ShiftSpace, Symbol};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoOptions {
    pub perron: PerronOptions,
    /// Tolerance for `h(μ) + ∫G dμ = P(G)` and stochasticity checks.
    pub variational_tol: f64,
    /// Largest denominator tried when certifying a Perron root as rational.
    pub exact_max_denominator: u64,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        ThermoOptions {
            perron: PerronOptions::default(),
            variational_tol: 1e-12,
            exact_max_denominator: 1_000_000,
        }
    }
}

/// Smallest block length on which a one-sided window of length `r` is a window-2 potential.
pub fn block_len_for(window_len: usize) -> usize {
    window_len.saturating_sub(1).max(1)
}

/// `B(b, b') = e^{G(b ‖ last(b'))}` on the block alphabet, zero off the transitions.
///
/// The potential is read on the first `r` symbols of the `(s+1)`-word, so the step that
/// appends coordinate `j` carries `G ∘ σ^{j-s}`.
pub fn weighted_matrix<S: Scalar>(
    potential: &LocallyConstantPotential,
    recoding: &HigherBlock,
) -> Result<SquareMatrix<S>> {
    if !potential.is_one_sided() {
        return Err(Error::TwoSidedPotential {
            past: potential.window().past,
        });
    }
    let r = potential.window().future;
    let s = recoding.block_len();
    if r > s + 1 {
        return Err(Error::InvalidArgument(format!(
            "window length {r} needs blocks of length at least {}",
            r - 1
        )));
    }
    let n = recoding.space().k();
    let mut b = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in recoding.space().successors(i) {
            let mut word = recoding.block(i).to_vec();
            word.push(recoding.last_symbol(j));
            let w = potential.weight::<S>(&word[..r]).ok_or_else(|| {
                Error::ExactUnavailable("potential has no exact weights".into())
            })?;
            b.set(i, j, w);
        }
    }
    Ok(b)
}

/// Masses of cylinders, with inadmissible words flagged rather than erroring.
#[derive(Clone, Debug, PartialEq)]
pub enum CylinderMass<S> {
    Mass(S),
    Inadmissible,
}

impl<S: Scalar> CylinderMass<S> {
    pub fn value(&self) -> S {
        match self {
            CylinderMass::Mass(m) => m.clone(),
            CylinderMass::Inadmissible => S::zero(),
        }
    }

    pub fn is_admissible(&self) -> bool {
        matches!(self, CylinderMass::Mass(_))
    }
}

/// A stationary Markov chain on a block alphabet.
#[derive(Clone, Debug)]
pub struct MarkovState<S> {
    recoding: Arc<HigherBlock>,
    pi: Vec<S>,
    q: SquareMatrix<S>,
}

impl<S: Scalar> MarkovState<S> {
    pub fn recoding(&self) -> &HigherBlock {
        &self.recoding
    }

    pub fn block_len(&self) -> usize {
        self.recoding.block_len()
    }

    pub fn pi(&self) -> &[S] {
        &self.pi
    }

    pub fn q(&self) -> &SquareMatrix<S> {
        &self.q
    }

    /// Shift-invariant mass of the cylinder spelled by `word`.
    pub fn cylinder_measure(&self, word: &[Symbol]) -> CylinderMass<S> {
        let base = self.recoding.base();
        if word.is_empty() {
            return CylinderMass::Mass(S::one());
        }
        if base.check_word(word).is_err() {
            return CylinderMass::Inadmissible;
        }
        let s = self.block_len();
        if word.len() < s {
            let mass = self
                .recoding
                .blocks()
                .iter()
                .enumerate()
                .filter(|(_, b)| b.starts_with(word))
                .fold(S::zero(), |acc, (i, _)| acc + self.pi[i].clone());
            return CylinderMass::Mass(mass);
        }
        let blocks = self.recoding.encode(word).expect("checked admissible");
        let mut mass = self.pi[blocks[0]].clone();
        for pair in blocks.windows(2) {
            mass = mass * self.q.get(pair[0], pair[1]).clone();
        }
        CylinderMass::Mass(mass)
    }

    /// Probability of appending `word` to the chain sitting at `start`.
    pub fn path_probability(&self, start: Symbol, word: &[Symbol]) -> S {
        let mut state = start;
        let mut mass = S::one();
        for &y in word {
            match self.recoding.step(state, y) {
                Some(next) => {
                    mass = mass * self.q.get(state, next).clone();
                    state = next;
                }
                None => return S::zero(),
            }
        }
        mass
    }
}

/// The equilibrium state of a locally constant potential, as a Markov chain on blocks.
#[derive(Clone, Debug)]
pub struct EquilibriumMarkovState {
    potential: LocallyConstantPotential,
    perron: PerronData,
    pressure: f64,
    chain: MarkovState<f64>,
    entropy: f64,
    mean_potential: f64,
    options: ThermoOptions,
}

impl EquilibriumMarkovState {
    /// Builds on the smallest block length for the potential, reducing two-sided potentials by
    /// `shift_reduce` first (pressure and equilibrium state are unchanged by it).
    pub fn new(potential: &LocallyConstantPotential, options: ThermoOptions) -> Result<Self> {
        let reduced = potential.shift_reduce();
        let s = block_len_for(reduced.window().future);
        Self::with_block_len(&reduced, s, options)
    }

    /// Builds on blocks of length `s` (at least the potential's own).
    pub fn with_block_len(
        potential: &LocallyConstantPotential,
        s: usize,
        options: ThermoOptions,
    ) -> Result<Self> {
        let space = potential.space();
        space.require_primitive()?;
        let reduced = potential.shift_reduce();
        let recoding = Arc::new(higher_block_recode(space, s)?);
        let b = weighted_matrix::<f64>(&reduced, &recoding)?;
        let pd = perron(&b, options.perron)?;
        let n = b.dim();
        let mut q = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let bij = *b.get(i, j);
                if bij > 0.0 {
                    q.set(i, j, bij * pd.right[j] / (pd.rho * pd.right[i]));
                }
            }
            // Rows are stochastic up to the eigen-residual; make them exactly so.
            let total: f64 = q.row(i).iter().sum();
            for j in 0..n {
                let v = *q.get(i, j) / total;
                q.set(i, j, v);
            }
        }
        let pi: Vec<f64> = pd.left.iter().zip(&pd.right).map(|(l, r)| l * r).collect();
        let mut entropy = 0.0;
        let mut mean = 0.0;
        for i in 0..n {
            for j in 0..n {
                let qij = *q.get(i, j);
                if qij > 0.0 {
                    entropy -= pi[i] * qij * qij.ln();
                    mean += pi[i] * qij * b.get(i, j).ln();
                }
            }
        }
        let pressure = pd.log_rho();
        Ok(EquilibriumMarkovState {
            potential: reduced,
            perron: pd,
            pressure,
            chain: MarkovState { recoding, pi, q },
            entropy,
            mean_potential: mean,
            options,
        })
    }

    pub fn potential(&self) -> &LocallyConstantPotential {
        &self.potential
    }

    pub fn space(&self) -> &ShiftSpace {
        self.potential.space()
    }

    pub fn perron(&self) -> &PerronData {
        &self.perron
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// `∫ G dμ`.
    pub fn mean_potential(&self) -> f64 {
        self.mean_potential
    }

    pub fn chain(&self) -> &MarkovState<f64> {
        &self.chain
    }

    pub fn recoding(&self) -> &HigherBlock {
        self.chain.recoding()
    }

    pub fn pi(&self) -> &[f64] {
        self.chain.pi()
    }

    pub fn q(&self) -> &SquareMatrix<f64> {
        self.chain.q()
    }

    pub fn options(&self) -> ThermoOptions {
        self.options
    }

    pub fn cylinder_measure(&self, word: &[Symbol]) -> CylinderMass<f64> {
        self.chain.cylinder_measure(word)
    }

    /// Mass of a two-sided cylinder; the state is shift-invariant, so the start index drops out.
    pub fn two_sided_measure(&self, cylinder: &crate::shift::TwoSidedCylinder) -> f64 {
        self.chain.cylinder_measure(cylinder.symbols()).value()
    }

    /// Largest deviation from the Markov-chain invariants: row sums, `πQ = π`, and the
    /// variational equality `h + ∫G = P`.
    pub fn invariant_defect(&self) -> f64 {
        let q = self.q();
        let pi = self.pi();
        let rows = q
            .row_sums()
            .iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max);
        let stationarity = q
            .vec_mul(pi)
            .iter()
            .zip(pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let variational = (self.entropy + self.mean_potential - self.pressure).abs();
        rows.max(stationarity).max(variational)
    }

    /// The same chain in exact rational arithmetic, when the potential has exact weights and
    /// the Perron root is rational.
    pub fn exact_chain(&self) -> Result<MarkovState<BigRational>> {
        let recoding = self.chain.recoding.clone();
        let b = weighted_matrix::<BigRational>(&self.potential, &recoding)?;
        let e = exact_perron(&b, &self.perron, self.options.exact_max_denominator)?;
        let n = b.dim();
        let mut q = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let bij = b.get(i, j).clone();
                if bij != BigRational::from_integer(0.into()) {
                    q.set(
                        i,
                        j,
                        bij * e.right[j].clone() / (e.rho.clone() * e.right[i].clone()),
                    );
                }
            }
        }
        let pi = e
            .left
            .iter()
            .zip(&e.right)
            .map(|(l, r)| l.clone() * r.clone())
            .collect();
        Ok(MarkovState { recoding, pi, q })
    }

    /// `ρ` certified as an exact rational.
    pub fn exact_rho(&self) -> Result<BigRational> {
        let b = weighted_matrix::<BigRational>(&self.potential, self.recoding())?;
        Ok(exact_perron(&b, &self.perron, self.options.exact_max_denominator)?.rho)
    }
}

pub fn equilibrium_state(potential: &LocallyConstantPotential) -> Result<EquilibriumMarkovState> {
    EquilibriumMarkovState::new(potential, ThermoOptions::default())
}

/// `P(G) = log ρ` of the weighted transfer matrix.
pub fn pressure_spectral(potential: &LocallyConstantPotential) -> Result<f64> {
    Ok(equilibrium_state(potential)?.pressure())
}

/// `log Σ_w e^{S_n G(w)}` over admissible words `w` of length `n + r - 1` (window `(0, r)`
/// after reduction), by transfer-matrix contraction.
pub fn bowen_log_partition(potential: &LocallyConstantPotential, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let g = potential.shift_reduce();
    let r = g.window().future;
    let space = g.space();
    if r == 1 {
        let k = space.k();
        let w: Vec<f64> = (0..k).map(|s| g.value(&[s]).unwrap().exp()).collect();
        let mut v = w.clone();
        let mut log = <f64 as Scalar>::rescale(&mut v);
        for _ in 1..n {
            let mut next = vec![0.0; k];
            for (i, vi) in v.iter().enumerate() {
                for j in space.successors(i) {
                    next[j] += vi * w[j];
                }
            }
            v = next;
            log += <f64 as Scalar>::rescale(&mut v);
        }
        return Ok(log + v.iter().sum::<f64>().ln());
    }
    let recoding = higher_block_recode(space, r - 1)?;
    let b = weighted_matrix::<f64>(&g, &recoding)?;
    let mut v = vec![1.0; b.dim()];
    let mut log = 0.0;
    for _ in 0..n {
        v = b.vec_mul(&v);
        log += <f64 as Scalar>::rescale(&mut v);
    }
    Ok(log + v.iter().sum::<f64>().ln())
}

/// Bowen's partition-sum estimate `(1/n) log Σ_w e^{S_n G(w)}`.
pub fn pressure_bowen(potential: &LocallyConstantPotential, n: usize) -> Result<f64> {
    Ok(bowen_log_partition(potential, n)? / n as f64)
}

/// The same partition sum by explicit enumeration of words; exponential cost.
pub fn bowen_log_partition_enumerated(potential: &LocallyConstantPotential, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let g = potential.shift_reduce();
    let len = n + g.window().future - 1;
    let mut total = 0.0;
    for w in g.space().words(len) {
        total += g.birkhoff_sum(&w, n)?.exp();
    }
    Ok(total.ln())
}

/// A stationary Markov chain proposed as a competitor in the variational principle.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    pub pi: Vec<f64>,
    pub q: SquareMatrix<f64>,
}

impl MarkovChain {
    /// Validates a stochastic pair: rows of `Q` sum to one, `π` is a distribution and `πQ = π`.
    pub fn new(pi: Vec<f64>, q: SquareMatrix<f64>, tol: f64) -> Result<Self> {
        if pi.len() != q.dim() {
            return Err(Error::NotStochastic(format!(
                "π has {} entries but Q is {}x{}",
                pi.len(),
                q.dim(),
                q.dim()
            )));
        }
        for i in 0..q.dim() {
            if q.row(i).iter().any(|&x| !(x >= 0.0)) {
                return Err(Error::NotStochastic(format!("row {i} has a negative entry")));
            }
        }
        for (i, s) in q.row_sums().iter().enumerate() {
            if (s - 1.0).abs() > tol {
                return Err(Error::NotStochastic(format!("row {i} sums to {s}")));
            }
        }
        if pi.iter().any(|&p| !(p >= 0.0)) || (pi.iter().sum::<f64>() - 1.0).abs() > tol {
            return Err(Error::NotStochastic("π is not a probability vector".into()));
        }
        let moved = q.vec_mul(&pi);
        let drift = moved
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if drift > tol {
            return Err(Error::NotStochastic(format!("π is not stationary (drift {drift:e})")));
        }
        Ok(MarkovChain { pi, q })
    }

    /// Pairs a primitive stochastic matrix with its stationary distribution.
    pub fn from_transitions(q: SquareMatrix<f64>, tol: f64) -> Result<Self> {
        let pd = perron(&q.transpose(), PerronOptions::default())?;
        let sum: f64 = pd.right.iter().sum();
        let pi = pd.right.iter().map(|x| x / sum).collect();
        Self::new(pi, q, tol)
    }

    pub fn entropy(&self) -> f64 {
        let n = self.q.dim();
        let mut h = 0.0;
        for i in 0..n {
            for j in 0..n {
                let qij = *self.q.get(i, j);
                if qij > 0.0 {
                    h -= self.pi[i] * qij * qij.ln();
                }
            }
        }
        h
    }
}

/// `h(μ') + ∫ G dμ'` for a Markov chain `μ'` on the potential's block alphabet
/// (see [`block_len_for`]). Never exceeds `P(G)`.
pub fn variational_score(chain: &MarkovChain, potential: &LocallyConstantPotential) -> Result<f64> {
    let g = potential.shift_reduce();
    let recoding = higher_block_recode(g.space(), block_len_for(g.window().future))?;
    let b = weighted_matrix::<f64>(&g, &recoding)?;
    if b.dim() != chain.q.dim() {
        return Err(Error::NotStochastic(format!(
            "chain has {} states, the potential needs {}",
            chain.q.dim(),
            b.dim()
        )));
    }
    let n = b.dim();
    let mut mean = 0.0;
    for i in 0..n {
        for j in 0..n {
            let qij = *chain.q.get(i, j);
            if qij > 0.0 {
                if *b.get(i, j) == 0.0 {
                    return Err(Error::NotStochastic(format!(
                        "transition {i} -> {j} is not allowed by the shift"
                    )));
                }
                mean += chain.pi[i] * qij * b.get(i, j).ln();
            }
        }
    }
    Ok(chain.entropy() + mean)
}

/// The conditional Gibbs measure of a one-sided potential on the unstable fiber through a
/// past: `y_0` follows the chain row of the past's last block, then the chain continues.
#[derive(Clone, Debug)]
pub struct UnstableFiberMeasure<S = f64> {
    past: PastWord,
    convention: FiberConvention,
    chain: MarkovState<S>,
    start: Symbol,
    pinned_mass: S,
    pressure: f64,
}

impl<S: Scalar> UnstableFiberMeasure<S> {
    pub fn from_chain(
        past: &PastWord,
        chain: MarkovState<S>,
        pressure: f64,
        convention: FiberConvention,
    ) -> Result<Self> {
        let base = chain.recoding().base();
        let s = chain.block_len();
        let start = chain
            .recoding()
            .index_of(&past.suffix(s))
            .ok_or_else(|| Error::InvalidArgument("past word does not fit the shift".into()))?;
        let pinned = convention.pinned().to_vec();
        if !pinned.is_empty() {
            base.check_word(&pinned)?;
            if !base.allows(past.last(), pinned[0]) {
                return Err(Error::ForbiddenTransition {
                    from: past.last(),
                    to: pinned[0],
                    position: -1,
                });
            }
        }
        let pinned_mass = chain.path_probability(start, &pinned);
        Ok(UnstableFiberMeasure {
            past: past.clone(),
            convention,
            chain,
            start,
            pinned_mass,
            pressure,
        })
    }

    pub fn past(&self) -> &PastWord {
        &self.past
    }

    pub fn convention(&self) -> &FiberConvention {
        &self.convention
    }

    pub fn chain(&self) -> &MarkovState<S> {
        &self.chain
    }

    pub fn start_block(&self) -> Symbol {
        self.start
    }

    pub fn pinned_mass(&self) -> &S {
        &self.pinned_mass
    }

    /// `P(G)` of the underlying potential.
    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    /// Law of `y_0`.
    pub fn entry_distribution(&self) -> Vec<S> {
        (0..self.chain.recoding().base().k())
            .map(|y| self.cylinder_mass(&[y]))
            .collect()
    }

    /// Mass of `{y in the fiber : y_0..y_{L-1} = word}`.
    pub fn cylinder_mass(&self, word: &[Symbol]) -> S {
        let pinned = self.convention.pinned();
        let merged = match merge_prefix(word, pinned) {
            Some(m) => m,
            None => return S::zero(),
        };
        self.chain.path_probability(self.start, &merged) / self.pinned_mass.clone()
    }
}

/// The longer of two prefixes, if they agree where both are defined.
fn merge_prefix(a: &[Symbol], b: &[Symbol]) -> Option<Vec<Symbol>> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if long[..short.len()] == *short {
        Some(long.to_vec())
    } else {
        None
    }
}

/// `μ^u_{x,G}` on the fiber `{x_-} × X^+` with `y_0` free.
pub fn conditional_unstable_measure(
    past: &PastWord,
    potential: &LocallyConstantPotential,
) -> Result<UnstableFiberMeasure<f64>> {
    conditional_unstable_measure_with(past, potential, FiberConvention::PastOnly)
}

pub fn conditional_unstable_measure_with(
    past: &PastWord,
    potential: &LocallyConstantPotential,
    convention: FiberConvention,
) -> Result<UnstableFiberMeasure<f64>> {
    if !potential.is_one_sided() {
        return Err(Error::TwoSidedPotential {
            past: potential.window().past,
        });
    }
    let state = equilibrium_state(potential)?;
    UnstableFiberMeasure::from_chain(past, state.chain().clone(), state.pressure(), convention)
}

/// Per-`n` extremes of `μ^u(B) / e^{S_n G(y) - n P(G)}` over unstable Bowen balls `B`, which
/// are the fiber cylinders on coordinates `0..n+ℓ-1` around centres `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsReport {
    pub depth: usize,
    pub rows: Vec<GibbsRow>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GibbsRow {
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

impl GibbsReport {
    fn from_rows(depth: usize, rows: Vec<GibbsRow>) -> Self {
        let min_ratio = rows.iter().map(|r| r.min).fold(f64::INFINITY, f64::min);
        let max_ratio = rows.iter().map(|r| r.max).fold(0.0, f64::max);
        GibbsReport {
            depth,
            rows,
            min_ratio,
            max_ratio,
        }
    }

    /// Empirical Gibbs constant `K = max(max_ratio, 1/min_ratio)`.
    pub fn constant(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio)
    }

    /// Largest change of either extreme across the rows with `n` in `range`, relative to the
    /// extreme's size.
    pub fn spread_over(&self, range: std::ops::RangeInclusive<usize>) -> f64 {
        let rows: Vec<&GibbsRow> = self.rows.iter().filter(|r| range.contains(&r.n)).collect();
        let spread = |f: fn(&GibbsRow) -> f64| {
            let lo = rows.iter().map(|r| f(r)).fold(f64::INFINITY, f64::min);
            let hi = rows.iter().map(|r| f(r)).fold(f64::NEG_INFINITY, f64::max);
            (hi - lo) / hi.abs().max(f64::MIN_POSITIVE)
        };
        spread(|r| r.min).max(spread(|r| r.max))
    }
}

fn check_gibbs_inputs(fiber: &UnstableFiberMeasure<f64>, potential: &LocallyConstantPotential) -> Result<()> {
    if !potential.is_one_sided() {
        return Err(Error::TwoSidedPotential {
            past: potential.window().past,
        });
    }
    if potential.window().future > fiber.chain.block_len() + 1 {
        return Err(Error::InvalidArgument(
            "potential window exceeds the fiber's block length".into(),
        ));
    }
    Ok(())
}

/// Gibbs-ratio extremes by max-plus / min-plus contraction over block paths.
pub fn gibbs_ratio_report(
    fiber: &UnstableFiberMeasure<f64>,
    potential: &LocallyConstantPotential,
    n_max: usize,
    depth: usize,
) -> Result<GibbsReport> {
    check_gibbs_inputs(fiber, potential)?;
    let chain = &fiber.chain;
    let rec = chain.recoding();
    let nb = rec.space().k();
    let s = rec.block_len();
    let r = potential.window().future;
    let pinned = fiber.convention.pinned();
    let log_pinned = fiber.pinned_mass.ln();
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let ball = n + depth;
        let len = ball.max(n + r - 1).max(pinned.len());
        let mut hi = vec![f64::NEG_INFINITY; nb];
        let mut lo = vec![f64::INFINITY; nb];
        hi[fiber.start] = 0.0;
        lo[fiber.start] = 0.0;
        for j in 0..len {
            let mut nhi = vec![f64::NEG_INFINITY; nb];
            let mut nlo = vec![f64::INFINITY; nb];
            for b in 0..nb {
                if hi[b] == f64::NEG_INFINITY {
                    continue;
                }
                for b2 in rec.space().successors(b) {
                    let y = rec.last_symbol(b2);
                    if pinned.get(j).is_some_and(|&p| p != y) {
                        continue;
                    }
                    let mut w = 0.0;
                    if j < ball {
                        w += chain.q.get(b, b2).ln();
                    }
                    // The (s+1)-word ending at coordinate j starts at j - s; G∘σ^t needs
                    // coordinates t..t+r-1, so t = j + 1 - r.
                    if j + 1 >= r && j + 1 - r < n {
                        let mut word = rec.block(b).to_vec();
                        word.push(y);
                        w -= potential.value(&word[s + 1 - r..]).expect("admissible");
                    }
                    nhi[b2] = nhi[b2].max(hi[b] + w);
                    nlo[b2] = nlo[b2].min(lo[b] + w);
                }
            }
            hi = nhi;
            lo = nlo;
        }
        let offset = n as f64 * fiber.pressure - log_pinned;
        let max = hi.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + offset;
        let min = lo.iter().cloned().fold(f64::INFINITY, f64::min) + offset;
        rows.push(GibbsRow {
            n,
            min: min.exp(),
            max: max.exp(),
        });
    }
    Ok(GibbsReport::from_rows(depth, rows))
}

/// The same report by enumerating every fiber word; exponential cost.
pub fn gibbs_ratio_report_enumerated(
    fiber: &UnstableFiberMeasure<f64>,
    potential: &LocallyConstantPotential,
    n_max: usize,
    depth: usize,
) -> Result<GibbsReport> {
    check_gibbs_inputs(fiber, potential)?;
    let space = fiber.chain.recoding().base();
    let r = potential.window().future;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let ball = n + depth;
        let len = ball.max(n + r - 1).max(fiber.convention.pinned().len());
        let mut min = f64::INFINITY;
        let mut max = 0.0_f64;
        for y in space.words_after(fiber.past.last(), len) {
            if fiber.cylinder_mass(&y) == 0.0 {
                continue;
            }
            let mass = fiber.cylinder_mass(&y[..ball]);
            let gibbs = (potential.birkhoff_sum(&y, n)? - n as f64 * fiber.pressure).exp();
            let ratio = mass / gibbs;
            min = min.min(ratio);
            max = max.max(ratio);
        }
        rows.push(GibbsRow { n, min, max });
    }
    Ok(GibbsReport::from_rows(depth, rows))
}
