//! Locally constant potentials, Birkhoff sums and variations.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::shift::{ShiftSpace, Symbol};

/// Dependence on the coordinates `-past ..= future - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub past: usize,
    pub future: usize,
}

impl Window {
    pub fn new(past: usize, future: usize) -> Result<Self> {
        if future == 0 {
            return Err(Error::InvalidArgument(
                "a window must cover coordinate 0 (future >= 1)".into(),
            ));
        }
        Ok(Window { past, future })
    }

    pub fn one_sided(future: usize) -> Result<Self> {
        Self::new(0, future)
    }

    pub fn len(&self) -> usize {
        self.past + self.future
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A real-valued potential read off a table of admissible windows.
///
/// Entries may optionally carry `e^G` as an exact rational, which the exact
/// arithmetic path uses instead of the float value.
#[derive(Clone, Debug, PartialEq)]
pub struct LocallyConstantPotential {
    space: ShiftSpace,
    window: Window,
    values: Vec<Option<f64>>,
    weights: Option<Vec<Option<BigRational>>>,
}

impl LocallyConstantPotential {
    /// Builds a potential from `(window word, value)` pairs covering every admissible window.
    pub fn from_table<I>(space: &ShiftSpace, window: Window, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Symbol>, f64)>,
    {
        let table = Self::collect(space, window, entries.into_iter().map(|(w, v)| (w, (v, None))))?;
        Ok(Self::assemble(space, window, table, false))
    }

    /// Builds a potential from exact weights `e^G > 0`.
    pub fn from_exact_weights<I>(space: &ShiftSpace, window: Window, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Symbol>, BigRational)>,
    {
        let mut checked = Vec::new();
        for (w, q) in entries {
            if !q.is_positive() {
                return Err(Error::NonFinite {
                    word: w,
                    value: f64::NEG_INFINITY,
                });
            }
            let v = Scalar::ln(&q);
            checked.push((w, (v, Some(q))));
        }
        let table = Self::collect(space, window, checked)?;
        Ok(Self::assemble(space, window, table, true))
    }

    pub fn from_fn<F>(space: &ShiftSpace, window: Window, f: F) -> Result<Self>
    where
        F: Fn(&[Symbol]) -> f64,
    {
        let entries: Vec<_> = space
            .words(window.len())
            .map(|w| {
                let v = f(&w);
                (w, v)
            })
            .collect();
        Self::from_table(space, window, entries)
    }

    pub fn constant(space: &ShiftSpace, c: f64) -> Result<Self> {
        Self::from_fn(space, Window { past: 0, future: 1 }, |_| c)
    }

    pub fn zero(space: &ShiftSpace) -> Self {
        Self::constant_weight(space, BigRational::one()).expect("zero potential is valid")
    }

    /// The constant potential `log w`, exactly.
    pub fn constant_weight(space: &ShiftSpace, w: BigRational) -> Result<Self> {
        let window = Window { past: 0, future: 1 };
        Self::from_exact_weights(space, window, (0..space.k()).map(|s| (vec![s], w.clone())))
    }

    /// `G(x) = log p_{x_0}`.
    pub fn bernoulli(space: &ShiftSpace, probs: &[f64]) -> Result<Self> {
        Self::check_probs(space, probs.len())?;
        Self::from_table(
            space,
            Window { past: 0, future: 1 },
            probs.iter().enumerate().map(|(s, p)| (vec![s], p.ln())),
        )
    }

    pub fn bernoulli_exact(space: &ShiftSpace, probs: &[BigRational]) -> Result<Self> {
        Self::check_probs(space, probs.len())?;
        Self::from_exact_weights(
            space,
            Window { past: 0, future: 1 },
            probs.iter().enumerate().map(|(s, p)| (vec![s], p.clone())),
        )
    }

    fn check_probs(space: &ShiftSpace, len: usize) -> Result<()> {
        if len != space.k() {
            return Err(Error::InvalidArgument(format!(
                "expected {} probabilities, got {len}",
                space.k()
            )));
        }
        Ok(())
    }

    #[allow(clippy::type_complexity)]
    fn collect<I>(
        space: &ShiftSpace,
        window: Window,
        entries: I,
    ) -> Result<HashMap<Vec<Symbol>, (f64, Option<BigRational>)>>
    where
        I: IntoIterator<Item = (Vec<Symbol>, (f64, Option<BigRational>))>,
    {
        let mut table = HashMap::new();
        for (word, (value, exact)) in entries {
            if word.len() != window.len()
                || !space.is_admissible(&word)
                || table.contains_key(&word)
            {
                return Err(Error::SuperfluousEntry(word));
            }
            if !value.is_finite() {
                return Err(Error::NonFinite { word, value });
            }
            table.insert(word, (value, exact));
        }
        if let Some(missing) = space.words(window.len()).find(|w| !table.contains_key(w)) {
            return Err(Error::MissingEntry(missing));
        }
        Ok(table)
    }

    fn assemble(
        space: &ShiftSpace,
        window: Window,
        table: HashMap<Vec<Symbol>, (f64, Option<BigRational>)>,
        exact: bool,
    ) -> Self {
        let size = space.k().pow(window.len() as u32);
        let mut values = vec![None; size];
        let mut weights = if exact { Some(vec![None; size]) } else { None };
        for (word, (v, q)) in table {
            let idx = index_of(space.k(), &word);
            values[idx] = Some(v);
            if let Some(ws) = weights.as_mut() {
                ws[idx] = q;
            }
        }
        LocallyConstantPotential {
            space: space.clone(),
            window,
            values,
            weights,
        }
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn is_one_sided(&self) -> bool {
        self.window.past == 0
    }

    pub fn has_exact_weights(&self) -> bool {
        self.weights.is_some()
    }

    /// Value on a window word (coordinates `-m..r-1`).
    pub fn value(&self, word: &[Symbol]) -> Option<f64> {
        if word.len() != self.window.len() || word.iter().any(|&s| s >= self.space.k()) {
            return None;
        }
        self.values[index_of(self.space.k(), word)]
    }

    pub fn exact_weight(&self, word: &[Symbol]) -> Option<&BigRational> {
        if word.len() != self.window.len() || word.iter().any(|&s| s >= self.space.k()) {
            return None;
        }
        self.weights.as_ref()?[index_of(self.space.k(), word)].as_ref()
    }

    /// `e^{G(word)}` in the requested backend.
    pub fn weight<S: Scalar>(&self, word: &[Symbol]) -> Option<S> {
        let v = self.value(word)?;
        S::exp_weight(v, self.exact_weight(word))
    }

    /// Admissible windows with their values.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<Symbol>, f64)> + '_ {
        self.space.words(self.window.len()).map(move |w| {
            let v = self.value(&w).expect("admissible windows are tabulated");
            (w, v)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Evaluates at a point given by its coordinate function.
    pub fn evaluate_at<F: Fn(i64) -> Symbol>(&self, point: F) -> Result<f64> {
        let m = self.window.past as i64;
        let word: Vec<Symbol> = (-m..self.window.future as i64).map(point).collect();
        self.space.check_word_at(&word, -m)?;
        Ok(self.value(&word).expect("admissible windows are tabulated"))
    }

    fn check_birkhoff_word(&self, word: &[Symbol], n: usize) -> Result<()> {
        let required = n + self.window.len() - 1;
        if word.len() < required {
            return Err(Error::WordTooShort {
                required,
                actual: word.len(),
            });
        }
        self.space.check_word_at(word, -(self.window.past as i64))
    }

    /// `S_n G` on the cylinder of `word`, whose first symbol sits at coordinate `-m`.
    pub fn birkhoff_sum(&self, word: &[Symbol], n: usize) -> Result<f64> {
        self.check_birkhoff_word(word, n)?;
        let w = self.window.len();
        Ok((0..n)
            .map(|t| self.value(&word[t..t + w]).expect("admissible"))
            .sum())
    }

    /// `e^{S_n G}` on the cylinder of `word`; exact backends multiply the exact weights.
    pub fn birkhoff_weight<S: Scalar>(&self, word: &[Symbol], n: usize) -> Result<S> {
        if !S::EXACT {
            let sum = self.birkhoff_sum(word, n)?;
            return S::exp_weight(sum, None)
                .ok_or_else(|| Error::ExactUnavailable("float weight".into()));
        }
        self.check_birkhoff_word(word, n)?;
        let w = self.window.len();
        let mut acc = S::one();
        for t in 0..n {
            let factor = self.weight::<S>(&word[t..t + w]).ok_or_else(|| {
                Error::ExactUnavailable("potential has no exact weights".into())
            })?;
            acc = acc * factor;
        }
        Ok(acc)
    }

    /// `var_ℓ`: the largest `|G(x) - G(y)|` over `x, y` agreeing on coordinates `-ℓ..=ℓ`.
    pub fn variation_profile(&self) -> VariationProfile {
        let m = self.window.past as i64;
        let r = self.window.future as i64;
        let horizon = (m.max(r - 1)) as usize;
        let mut values = Vec::with_capacity(horizon + 1);
        for l in 0..=horizon as i64 {
            let fixed: Vec<usize> = ((-l).max(-m)..=l.min(r - 1))
                .map(|j| (j + m) as usize)
                .collect();
            let mut groups: HashMap<Vec<Symbol>, (f64, f64)> = HashMap::new();
            for (w, v) in self.entries() {
                let key: Vec<Symbol> = fixed.iter().map(|&p| w[p]).collect();
                let e = groups.entry(key).or_insert((v, v));
                e.0 = e.0.min(v);
                e.1 = e.1.max(v);
            }
            values.push(groups.values().fold(0.0_f64, |acc, (lo, hi)| acc.max(hi - lo)));
        }
        VariationProfile { values }
    }

    /// `G ∘ σ^m`: the same table read as a one-sided window `(0, m + r)`.
    ///
    /// `S_n(G ∘ σ^m) - S_n G` telescopes to at most `2 m max|G|`.
    pub fn shift_reduce(&self) -> Self {
        LocallyConstantPotential {
            window: Window {
                past: 0,
                future: self.window.len(),
            },
            ..self.clone()
        }
    }

    /// The same function tabulated on a longer one-sided window `(0, future)`.
    pub fn widen(&self, future: usize) -> Result<Self> {
        if !self.is_one_sided() {
            return Err(Error::TwoSidedPotential {
                past: self.window.past,
            });
        }
        if future < self.window.future {
            return Err(Error::InvalidArgument(format!(
                "cannot narrow a window of length {} to {future}",
                self.window.future
            )));
        }
        let r = self.window.future;
        self.lift(future, |w| {
            (self.value(&w[..r]).unwrap(), self.exact_weight(&w[..r]).cloned())
        })
    }

    /// `G + c`.
    pub fn add_constant(&self, c: f64) -> Result<Self> {
        let window = self.window;
        Self::from_table(&self.space, window, self.entries().map(|(w, v)| (w, v + c)))
    }

    /// `G + u∘σ - u` for one-sided `G` and `u`; cohomologous to `G`.
    pub fn add_coboundary(&self, u: &LocallyConstantPotential) -> Result<Self> {
        if self.space != u.space {
            return Err(Error::SpaceMismatch);
        }
        for p in [self, u] {
            if !p.is_one_sided() {
                return Err(Error::TwoSidedPotential {
                    past: p.window.past,
                });
            }
        }
        let r = self.window.future;
        let ru = u.window.future;
        let len = r.max(ru + 1);
        let exact = self.has_exact_weights() && u.has_exact_weights();
        self.lift(len, |w| {
            let v = self.value(&w[..r]).unwrap() + u.value(&w[1..=ru]).unwrap()
                - u.value(&w[..ru]).unwrap();
            let q = if exact {
                Some(
                    self.exact_weight(&w[..r]).unwrap().clone()
                        * u.exact_weight(&w[1..=ru]).unwrap().clone()
                        / u.exact_weight(&w[..ru]).unwrap().clone(),
                )
            } else {
                None
            };
            (v, q)
        })
    }

    fn lift<F>(&self, future: usize, f: F) -> Result<Self>
    where
        F: Fn(&[Symbol]) -> (f64, Option<BigRational>),
    {
        let window = Window::one_sided(future)?;
        let rows: Vec<_> = self
            .space
            .words(future)
            .map(|w| {
                let (v, q) = f(&w);
                (w, (v, q))
            })
            .collect();
        let exact = rows.iter().all(|(_, (_, q))| q.is_some());
        let table = Self::collect(&self.space, window, rows)?;
        Ok(Self::assemble(&self.space, window, table, exact))
    }
}

fn index_of(k: usize, word: &[Symbol]) -> usize {
    word.iter().fold(0, |acc, &s| acc * k + s)
}

/// `var_ℓ` for `ℓ = 0, 1, ...`; zero from the window radius on.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationProfile {
    values: Vec<f64>,
}

impl VariationProfile {
    pub fn get(&self, l: usize) -> f64 {
        self.values.get(l).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn constant_and_bernoulli_tables() {
        let full = ShiftSpace::full(2);
        let g1 = LocallyConstantPotential::constant(&full, -(2f64.ln())).unwrap();
        assert_eq!(g1.value(&[1]), Some(-(2f64.ln())));
        let g2 = LocallyConstantPotential::bernoulli(&full, &[0.3, 0.7]).unwrap();
        assert_eq!(g2.value(&[0]), Some(0.3f64.ln()));
        assert_eq!(g2.value(&[1]), Some(0.7f64.ln()));
        assert!(g2.is_one_sided());
    }

    #[test]
    fn golden_window_two_table_validation() {
        let g = ShiftSpace::golden_mean();
        let w = Window::one_sided(2).unwrap();
        let ok = vec![(vec![0, 0], 0.1), (vec![0, 1], 0.2), (vec![1, 0], 0.3)];
        assert!(LocallyConstantPotential::from_table(&g, w, ok.clone()).is_ok());
        let mut extra = ok.clone();
        extra.push((vec![1, 1], 0.4));
        assert_eq!(
            LocallyConstantPotential::from_table(&g, w, extra),
            Err(Error::SuperfluousEntry(vec![1, 1]))
        );
        assert_eq!(
            LocallyConstantPotential::from_table(&g, w, ok[..2].to_vec()),
            Err(Error::MissingEntry(vec![1, 0]))
        );
        let mut dup = ok.clone();
        dup.push((vec![0, 0], 0.5));
        assert!(matches!(
            LocallyConstantPotential::from_table(&g, w, dup),
            Err(Error::SuperfluousEntry(_))
        ));
        let mut inf = ok;
        inf[0].1 = f64::INFINITY;
        assert!(matches!(
            LocallyConstantPotential::from_table(&g, w, inf),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn birkhoff_sums() {
        let full = ShiftSpace::full(2);
        let g1 = LocallyConstantPotential::constant(&full, -(2f64.ln())).unwrap();
        let s = g1.birkhoff_sum(&[0, 1, 1, 0, 1], 5).unwrap();
        assert!((s + 5.0 * 2f64.ln()).abs() < 1e-14);

        let g2 = LocallyConstantPotential::bernoulli(&full, &[0.3, 0.7]).unwrap();
        let s = g2.birkhoff_sum(&[0, 0, 1, 1, 0], 5).unwrap();
        assert!((s - (3.0 * 0.3f64.ln() + 2.0 * 0.7f64.ln())).abs() < 1e-14);

        let g = ShiftSpace::golden_mean();
        let w = Window::one_sided(2).unwrap();
        let pot = LocallyConstantPotential::from_table(
            &g,
            w,
            vec![(vec![0, 0], 0.1), (vec![0, 1], 0.2), (vec![1, 0], 0.3)],
        )
        .unwrap();
        let s = pot.birkhoff_sum(&[0, 1, 0, 0], 3).unwrap();
        assert!((s - (0.2 + 0.3 + 0.1)).abs() < 1e-15);
        let word = [0usize, 1, 0, 0];
        let pointwise: f64 = (0..3)
            .map(|t| pot.evaluate_at(|j| word[(j + t) as usize]).unwrap())
            .sum();
        assert!((s - pointwise).abs() < 1e-15);

        assert_eq!(
            pot.birkhoff_sum(&[0, 1, 0], 3),
            Err(Error::WordTooShort {
                required: 4,
                actual: 3
            })
        );
        assert!(matches!(
            pot.birkhoff_sum(&[0, 1, 1, 0], 3),
            Err(Error::ForbiddenTransition { .. })
        ));
    }

    #[test]
    fn exact_birkhoff_weight() {
        let full = ShiftSpace::full(2);
        let g2 = LocallyConstantPotential::bernoulli_exact(&full, &[q(3, 10), q(7, 10)]).unwrap();
        let w: BigRational = g2.birkhoff_weight(&[0, 0, 1, 1, 0], 5).unwrap();
        assert_eq!(w, q(27 * 49, 100_000));
        let float_only = LocallyConstantPotential::constant(&full, 0.0).unwrap();
        assert!(float_only.birkhoff_weight::<BigRational>(&[0], 1).is_err());
    }

    #[test]
    fn variation_examples() {
        let full = ShiftSpace::full(2);
        let c = LocallyConstantPotential::constant(&full, 1.5).unwrap();
        assert_eq!(c.variation_profile().get(0), 0.0);
        let g2 = LocallyConstantPotential::bernoulli(&full, &[0.3, 0.7]).unwrap();
        assert_eq!(g2.variation_profile().get(0), 0.0);

        let pot = LocallyConstantPotential::from_table(
            &full,
            Window::one_sided(2).unwrap(),
            vec![
                (vec![0, 0], 0.0),
                (vec![0, 1], 0.5),
                (vec![1, 0], 1.0),
                (vec![1, 1], 1.2),
            ],
        )
        .unwrap();
        let prof = pot.variation_profile();
        assert!((prof.get(0) - 0.5).abs() < 1e-15);
        assert_eq!(prof.get(1), 0.0);
        assert_eq!(prof.get(7), 0.0);
    }

    #[test]
    fn shift_reduce_reads_same_table() {
        let full = ShiftSpace::full(2);
        let two_sided = LocallyConstantPotential::from_table(
            &full,
            Window::new(1, 1).unwrap(),
            vec![
                (vec![0, 0], 0.0),
                (vec![0, 1], 0.5),
                (vec![1, 0], 1.0),
                (vec![1, 1], 1.2),
            ],
        )
        .unwrap();
        let reduced = two_sided.shift_reduce();
        assert_eq!(reduced.window(), Window::one_sided(2).unwrap());
        assert_eq!(reduced.value(&[1, 0]), Some(1.0));
        let g2 = LocallyConstantPotential::bernoulli(&full, &[0.3, 0.7]).unwrap();
        assert_eq!(g2.shift_reduce(), g2);
    }

    #[test]
    fn evaluation_ignores_outside_coordinates() {
        let full = ShiftSpace::full(2);
        let pot = LocallyConstantPotential::from_fn(&full, Window::new(1, 2).unwrap(), |w| {
            (w[0] * 4 + w[1] * 2 + w[2]) as f64
        })
        .unwrap();
        let base = |j: i64| ((j * j + 1) % 2) as usize;
        let perturbed = |j: i64| if (-1..=1).contains(&j) { base(j) } else { 1 - base(j) };
        assert_eq!(pot.evaluate_at(base).unwrap(), pot.evaluate_at(perturbed).unwrap());
    }

    #[test]
    fn coboundary_window() {
        let full = ShiftSpace::full(2);
        let g = LocallyConstantPotential::bernoulli(&full, &[0.3, 0.7]).unwrap();
        let u = LocallyConstantPotential::from_fn(&full, Window::one_sided(2).unwrap(), |w| {
            w[0] as f64 - 0.5 * w[1] as f64
        })
        .unwrap();
        let h = g.add_coboundary(&u).unwrap();
        assert_eq!(h.window(), Window::one_sided(3).unwrap());
        let expect = 0.7f64.ln() + (0.0 - 0.5) - (1.0 - 0.0);
        assert!((h.value(&[1, 0, 1]).unwrap() - expect).abs() < 1e-15);
    }
}
