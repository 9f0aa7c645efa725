//! Subshifts of finite type: the space, words and cylinders, unstable fibers and
//! higher-block recoding.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Symbol = usize;

/// A subshift of finite type on the alphabet `0..k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftSpace {
    k: usize,
    matrix: Vec<bool>,
    primitivity_exponent: Option<usize>,
    metric_base: f64,
}

impl ShiftSpace {
    /// Validates a `k x k` 0/1 transition matrix.
    ///
    /// Non-primitive matrices are accepted; operations that need mixing refuse them later.
    pub fn new(k: usize, matrix: &[Vec<u8>], metric_base: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidMatrix("alphabet must be non-empty".into()));
        }
        if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidMatrix(format!("expected a {k}x{k} matrix")));
        }
        if !(metric_base > 0.0 && metric_base < 1.0) {
            return Err(Error::MetricBase(metric_base));
        }
        let mut flat = Vec::with_capacity(k * k);
        for (i, row) in matrix.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                match e {
                    0 => flat.push(false),
                    1 => flat.push(true),
                    other => {
                        return Err(Error::InvalidMatrix(format!(
                            "entry ({i},{j}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        for i in 0..k {
            if !(0..k).any(|j| flat[i * k + j]) {
                return Err(Error::ZeroRow(i));
            }
            if !(0..k).any(|j| flat[j * k + i]) {
                return Err(Error::ZeroColumn(i));
            }
        }
        let primitivity_exponent = boolean_primitivity_exponent(k, &flat);
        Ok(ShiftSpace {
            k,
            matrix: flat,
            primitivity_exponent,
            metric_base,
        })
    }

    /// Full shift on `k` symbols.
    pub fn full(k: usize) -> Self {
        Self::new(k, &vec![vec![1; k]; k], 0.5).expect("full shift is valid")
    }

    /// The golden mean shift: `1 -> 1` forbidden.
    pub fn golden_mean() -> Self {
        Self::new(2, &[vec![1, 1], vec![1, 0]], 0.5).expect("golden mean shift is valid")
    }

    pub fn with_metric_base(mut self, metric_base: f64) -> Result<Self> {
        if !(metric_base > 0.0 && metric_base < 1.0) {
            return Err(Error::MetricBase(metric_base));
        }
        self.metric_base = metric_base;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric_base(&self) -> f64 {
        self.metric_base
    }

    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        from < self.k && to < self.k && self.matrix[from * self.k + to]
    }

    pub fn matrix(&self) -> Vec<Vec<u8>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.allows(i, j) as u8).collect())
            .collect()
    }

    pub fn successors(&self, from: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.k).filter(move |&j| self.allows(from, j))
    }

    /// Smallest `m` with `A^m > 0`, if the matrix is primitive.
    pub fn primitivity_exponent(&self) -> Option<usize> {
        self.primitivity_exponent
    }

    pub fn is_primitive(&self) -> bool {
        self.primitivity_exponent.is_some()
    }

    pub fn require_primitive(&self) -> Result<()> {
        if self.is_primitive() {
            Ok(())
        } else {
            Err(Error::NotPrimitive)
        }
    }

    /// Checks symbols and consecutive transitions; positions are reported from `first_index`.
    pub fn check_word_at(&self, word: &[Symbol], first_index: i64) -> Result<()> {
        for &s in word {
            if s >= self.k {
                return Err(Error::SymbolOutOfRange { symbol: s, k: self.k });
            }
        }
        for (t, pair) in word.windows(2).enumerate() {
            if !self.allows(pair[0], pair[1]) {
                return Err(Error::ForbiddenTransition {
                    from: pair[0],
                    to: pair[1],
                    position: first_index + t as i64,
                });
            }
        }
        Ok(())
    }

    pub fn check_word(&self, word: &[Symbol]) -> Result<()> {
        self.check_word_at(word, 0)
    }

    pub fn is_admissible(&self, word: &[Symbol]) -> bool {
        self.check_word(word).is_ok()
    }

    /// Lazy enumeration of the admissible words of length `n`, in lexicographic order.
    pub fn words(&self, n: usize) -> AdmissibleWords<'_> {
        AdmissibleWords::new(self, n, None)
    }

    /// Admissible words of length `n` whose first symbol may follow `prev`.
    pub fn words_after(&self, prev: Symbol, n: usize) -> AdmissibleWords<'_> {
        AdmissibleWords::new(self, n, Some(prev))
    }

    /// Exact number of admissible words of length `n`: `1^T A^(n-1) 1`.
    pub fn word_count(&self, n: usize) -> BigUint {
        if n == 0 {
            return BigUint::one();
        }
        let mut counts = vec![BigUint::one(); self.k];
        for _ in 1..n {
            let mut next = vec![BigUint::zero(); self.k];
            for (i, c) in counts.iter().enumerate() {
                for j in self.successors(i) {
                    next[j] += c;
                }
            }
            counts = next;
        }
        counts.into_iter().sum()
    }

    /// Number of extra coordinates a Bowen ball of the given radius fixes beyond the orbit
    /// window: radius `λ^ℓ` at time `n` is the cylinder on `0..n-1+ℓ`.
    pub fn unstable_depth(&self, radius: f64) -> Result<usize> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::InvalidArgument(format!("radius {radius} outside (0, 1]")));
        }
        let t = radius.ln() / self.metric_base.ln();
        Ok((t + 1e-9).floor().max(0.0) as usize)
    }
}

pub(crate) fn boolean_primitivity_exponent(k: usize, support: &[bool]) -> Option<usize> {
    let bound = (k - 1) * (k - 1) + 1;
    let mut power = support.to_vec();
    for m in 1..=bound {
        if power.iter().all(|&b| b) {
            return Some(m);
        }
        let mut next = vec![false; k * k];
        for i in 0..k {
            for l in 0..k {
                if !power[i * k + l] {
                    continue;
                }
                for j in 0..k {
                    if support[l * k + j] {
                        next[i * k + j] = true;
                    }
                }
            }
        }
        power = next;
    }
    None
}

/// Iterator over admissible words of a fixed length.
pub struct AdmissibleWords<'a> {
    space: &'a ShiftSpace,
    prev: Option<Symbol>,
    current: Vec<Symbol>,
    started: bool,
    done: bool,
}

impl<'a> AdmissibleWords<'a> {
    fn new(space: &'a ShiftSpace, n: usize, prev: Option<Symbol>) -> Self {
        AdmissibleWords {
            space,
            prev,
            current: vec![0; n],
            started: false,
            done: n == 0,
        }
    }

    fn fits(&self, pos: usize, s: Symbol) -> bool {
        if pos == 0 {
            self.prev.map_or(true, |p| self.space.allows(p, s))
        } else {
            self.space.allows(self.current[pos - 1], s)
        }
    }

    fn next_fitting(&self, pos: usize, from: Symbol) -> Option<Symbol> {
        (from..self.space.k()).find(|&s| self.fits(pos, s))
    }

    /// Smallest continuation of positions `from..`; never stalls since no row of A is zero.
    fn fill_from(&mut self, from: usize) {
        for pos in from..self.current.len() {
            self.current[pos] = self
                .next_fitting(pos, 0)
                .expect("every symbol has a successor");
        }
    }

    fn advance(&mut self) -> bool {
        for pos in (0..self.current.len()).rev() {
            if let Some(s) = self.next_fitting(pos, self.current[pos] + 1) {
                self.current[pos] = s;
                self.fill_from(pos + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for AdmissibleWords<'_> {
    type Item = Vec<Symbol>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let ok = if !self.started {
            self.started = true;
            self.fill_from(0);
            true
        } else {
            self.advance()
        };
        if ok {
            Some(self.current.clone())
        } else {
            self.done = true;
            None
        }
    }
}

/// A finite word with a cached admissibility flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<Symbol>,
    admissible: bool,
}

impl Word {
    pub fn new(space: &ShiftSpace, symbols: Vec<Symbol>) -> Self {
        let admissible = space.is_admissible(&symbols);
        Word {
            symbols,
            admissible,
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// `{x : x_j = z_j, start <= j <= start + len - 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwoSidedCylinder {
    start: i64,
    symbols: Vec<Symbol>,
}

impl TwoSidedCylinder {
    pub fn new(space: &ShiftSpace, start: i64, symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        space.check_word_at(&symbols, start)?;
        Ok(TwoSidedCylinder { start, symbols })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.symbols.len() as i64 - 1
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn span(&self) -> usize {
        self.symbols.len()
    }

    /// `M` in `[z_{-M}, ..., z_N]`: the number of negative coordinates when the cylinder
    /// straddles the origin.
    pub fn past_extent(&self) -> usize {
        (-self.start).max(0) as usize
    }

    /// `N` in `[z_{-M}, ..., z_N]`.
    pub fn future_extent(&self) -> usize {
        self.end().max(0) as usize
    }

    pub fn symbol_at(&self, j: i64) -> Option<Symbol> {
        if j < self.start || j > self.end() {
            None
        } else {
            Some(self.symbols[(j - self.start) as usize])
        }
    }

    pub fn contains<F: Fn(i64) -> Symbol>(&self, point: F) -> bool {
        self.symbols
            .iter()
            .enumerate()
            .all(|(t, &z)| point(self.start + t as i64) == z)
    }
}

impl fmt::Display for TwoSidedCylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]@{}", body.join(","), self.start)
    }
}

/// The past `(x_j)_{j <= -1}` of a base point, as a finite word repeated periodically to the
/// left. The last symbol sits at coordinate `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PastWord {
    repr: Vec<Symbol>,
}

impl PastWord {
    pub fn new(space: &ShiftSpace, repr: Vec<Symbol>) -> Result<Self> {
        if repr.is_empty() {
            return Err(Error::EmptyWord);
        }
        let len = repr.len() as i64;
        space.check_word_at(&repr, -len)?;
        let (last, first) = (repr[repr.len() - 1], repr[0]);
        if !space.allows(last, first) {
            return Err(Error::ForbiddenTransition {
                from: last,
                to: first,
                position: -len - 1,
            });
        }
        Ok(PastWord { repr })
    }

    /// The constant past `...sss`.
    pub fn constant(space: &ShiftSpace, s: Symbol) -> Result<Self> {
        Self::new(space, vec![s])
    }

    pub fn repr(&self) -> &[Symbol] {
        &self.repr
    }

    /// Symbol at a negative coordinate.
    pub fn symbol_at(&self, j: i64) -> Symbol {
        assert!(j <= -1, "past coordinates are negative, got {j}");
        let len = self.repr.len() as i64;
        let back = (-1 - j) % len;
        self.repr[(len - 1 - back) as usize]
    }

    pub fn last(&self) -> Symbol {
        self.repr[self.repr.len() - 1]
    }

    /// Coordinates `-len..=-1`, oldest first.
    pub fn suffix(&self, len: usize) -> Vec<Symbol> {
        (1..=len as i64).rev().map(|b| self.symbol_at(-b)).collect()
    }

    /// The same periodic past truncated to its last `len` coordinates, if that is still a
    /// valid periodic representation.
    pub fn truncated(&self, space: &ShiftSpace, len: usize) -> Result<Self> {
        Self::new(space, self.suffix(len))
    }
}

/// A two-sided point represented by a periodic past and a finite future.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    past: PastWord,
    future: Vec<Symbol>,
}

impl Point {
    pub fn past(&self) -> &PastWord {
        &self.past
    }

    pub fn future(&self) -> &[Symbol] {
        &self.future
    }

    /// Symbol at coordinate `j`, or `None` beyond the represented future.
    pub fn symbol_at(&self, j: i64) -> Option<Symbol> {
        if j < 0 {
            Some(self.past.symbol_at(j))
        } else {
            self.future.get(j as usize).copied()
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let past: String = self.past.repr.iter().map(|s| s.to_string()).collect();
        let fut: String = self.future.iter().map(|s| s.to_string()).collect();
        write!(f, "...({past}).{fut}...")
    }
}

/// Splices a past and a future: `(..., x_{-2}, x_{-1} | y_0, y_1, ...)`.
pub fn bracket(space: &ShiftSpace, past: &PastWord, future: &[Symbol]) -> Result<Point> {
    space.check_word(future)?;
    if let Some(&first) = future.first() {
        if !space.allows(past.last(), first) {
            return Err(Error::ForbiddenTransition {
                from: past.last(),
                to: first,
                position: -1,
            });
        }
    }
    Ok(Point {
        past: past.clone(),
        future: future.to_vec(),
    })
}

/// Which coordinates of the fiber through a past are free.
///
/// `PastOnly` pins every coordinate `<= -1` and leaves `y_0` free; `Pinned` additionally fixes
/// the coordinates `0..len` to the given word, shrinking the fiber.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum FiberConvention {
    #[default]
    PastOnly,
    Pinned(Vec<Symbol>),
}

impl FiberConvention {
    pub fn pinned(&self) -> &[Symbol] {
        match self {
            FiberConvention::PastOnly => &[],
            FiberConvention::Pinned(w) => w,
        }
    }
}

/// Constraint word `y_offset .. y_{offset+len-1}` on the one-sided fiber.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiberConstraint {
    pub offset: usize,
    pub symbols: Vec<Symbol>,
}

impl FiberConstraint {
    pub fn new(offset: usize, symbols: Vec<Symbol>) -> Self {
        FiberConstraint { offset, symbols }
    }

    /// The whole fiber.
    pub fn everything() -> Self {
        FiberConstraint {
            offset: 0,
            symbols: Vec::new(),
        }
    }

    pub fn end(&self) -> usize {
        self.offset + self.symbols.len()
    }

    pub fn symbol_at(&self, m: usize) -> Option<Symbol> {
        if m < self.offset {
            None
        } else {
            self.symbols.get(m - self.offset).copied()
        }
    }
}

/// `σ^{-i} A ∩ W^u(past)` expressed as a constraint on the fiber coordinates, or `None` when
/// the intersection is empty.
pub fn shifted_cylinder_constraints(
    space: &ShiftSpace,
    cylinder: &TwoSidedCylinder,
    past: &PastWord,
    i: usize,
) -> Option<FiberConstraint> {
    let shift = i as i64;
    let mut constraint = Vec::new();
    let mut offset = None;
    for (t, &z) in cylinder.symbols().iter().enumerate() {
        let m = cylinder.start() + t as i64 + shift;
        if m <= -1 {
            if past.symbol_at(m) != z {
                return None;
            }
        } else {
            if offset.is_none() {
                offset = Some(m as usize);
            }
            constraint.push(z);
        }
    }
    let offset = offset.unwrap_or(0);
    if offset == 0 {
        if let Some(&first) = constraint.first() {
            if !space.allows(past.last(), first) {
                return None;
            }
        }
    }
    Some(FiberConstraint::new(offset, constraint))
}

/// The `N`-block presentation of a shift space.
#[derive(Clone, Debug, PartialEq)]
pub struct HigherBlock {
    block_len: usize,
    base: ShiftSpace,
    space: ShiftSpace,
    blocks: Vec<Vec<Symbol>>,
    index: HashMap<Vec<Symbol>, Symbol>,
}

/// Recodes `space` on the alphabet of its admissible `n`-words, with overlap transitions.
pub fn higher_block_recode(space: &ShiftSpace, n: usize) -> Result<HigherBlock> {
    if n == 0 {
        return Err(Error::ZeroBlockLength);
    }
    let blocks: Vec<Vec<Symbol>> = space.words(n).collect();
    let index: HashMap<Vec<Symbol>, Symbol> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.clone(), i))
        .collect();
    let size = blocks.len();
    let matrix: Vec<Vec<u8>> = blocks
        .iter()
        .map(|b| {
            blocks
                .iter()
                .map(|c| {
                    let overlap = b[1..] == c[..n - 1];
                    (overlap && space.allows(b[n - 1], c[n - 1])) as u8
                })
                .collect()
        })
        .collect();
    let recoded = ShiftSpace::new(size, &matrix, space.metric_base())?;
    Ok(HigherBlock {
        block_len: n,
        base: space.clone(),
        space: recoded,
        blocks,
        index,
    })
}

impl HigherBlock {
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn base(&self) -> &ShiftSpace {
        &self.base
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn blocks(&self) -> &[Vec<Symbol>] {
        &self.blocks
    }

    pub fn block(&self, b: Symbol) -> &[Symbol] {
        &self.blocks[b]
    }

    pub fn index_of(&self, block: &[Symbol]) -> Option<Symbol> {
        self.index.get(block).copied()
    }

    pub fn last_symbol(&self, b: Symbol) -> Symbol {
        self.blocks[b][self.block_len - 1]
    }

    /// Block reached from `b` by appending `s`, if admissible.
    pub fn step(&self, b: Symbol, s: Symbol) -> Option<Symbol> {
        let block = &self.blocks[b];
        if !self.base.allows(block[self.block_len - 1], s) {
            return None;
        }
        let mut next = block[1..].to_vec();
        next.push(s);
        self.index_of(&next)
    }

    /// A word of length `L >= N` becomes the `L - N + 1` overlapping blocks.
    pub fn encode(&self, word: &[Symbol]) -> Result<Vec<Symbol>> {
        if word.len() < self.block_len {
            return Err(Error::WordTooShort {
                required: self.block_len,
                actual: word.len(),
            });
        }
        self.base.check_word(word)?;
        Ok(word
            .windows(self.block_len)
            .map(|w| self.index[w])
            .collect())
    }

    pub fn decode(&self, blocks: &[Symbol]) -> Result<Vec<Symbol>> {
        let (&first, rest) = blocks.split_first().ok_or(Error::EmptyWord)?;
        self.space.check_word(blocks)?;
        let mut word = self.blocks[first].clone();
        word.extend(rest.iter().map(|&b| self.last_symbol(b)));
        Ok(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> ShiftSpace {
        ShiftSpace::golden_mean()
    }

    #[test]
    fn primitivity_exponents() {
        assert_eq!(ShiftSpace::full(2).primitivity_exponent(), Some(1));
        assert_eq!(golden().primitivity_exponent(), Some(2));
        let identity = ShiftSpace::new(2, &[vec![1, 0], vec![0, 1]], 0.5).unwrap();
        assert_eq!(identity.primitivity_exponent(), None);
        assert_eq!(identity.require_primitive(), Err(Error::NotPrimitive));
        // Wielandt matrix attains the bound (k-1)^2 + 1.
        let w = ShiftSpace::new(
            3,
            &[vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]],
            0.5,
        )
        .unwrap();
        assert_eq!(w.primitivity_exponent(), Some(5));
    }

    #[test]
    fn rejects_stranded_symbols_and_bad_bases() {
        assert_eq!(
            ShiftSpace::new(2, &[vec![1, 1], vec![0, 0]], 0.5),
            Err(Error::ZeroRow(1))
        );
        assert_eq!(
            ShiftSpace::new(2, &[vec![1, 0], vec![1, 0]], 0.5),
            Err(Error::ZeroColumn(1))
        );
        assert_eq!(ShiftSpace::full(2).with_metric_base(1.0), Err(Error::MetricBase(1.0)));
        assert!(ShiftSpace::new(2, &[vec![1, 2], vec![1, 1]], 0.5).is_err());
    }

    #[test]
    fn word_counts() {
        assert_eq!(ShiftSpace::full(2).word_count(10), BigUint::from(1024u32));
        assert_eq!(golden().word_count(10), BigUint::from(144u32));
        let ones: Vec<_> = golden().words(1).collect();
        assert_eq!(ones, vec![vec![0], vec![1]]);
        assert_eq!(golden().words(10).count(), 144);
        assert!(golden().words(0).next().is_none());
    }

    #[test]
    fn words_after_respects_previous_symbol() {
        let g = golden();
        let after_one: Vec<_> = g.words_after(1, 2).collect();
        assert_eq!(after_one, vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn bracket_splices() {
        let full = ShiftSpace::full(2);
        let past = PastWord::constant(&full, 0).unwrap();
        let p = bracket(&full, &past, &[1, 1]).unwrap();
        assert_eq!(p.symbol_at(-3), Some(0));
        assert_eq!(p.symbol_at(0), Some(1));
        assert_eq!(p.symbol_at(1), Some(1));
        assert_eq!(p.symbol_at(2), None);

        let g = golden();
        let past = PastWord::new(&g, vec![0, 1]).unwrap();
        assert_eq!(
            bracket(&g, &past, &[1, 0]),
            Err(Error::ForbiddenTransition {
                from: 1,
                to: 1,
                position: -1
            })
        );
        assert!(bracket(&g, &past, &[0, 1]).is_ok());
    }

    #[test]
    fn past_word_periodic_extension() {
        let g = golden();
        assert!(PastWord::constant(&g, 1).is_err());
        let past = PastWord::new(&g, vec![1, 0, 0]).unwrap();
        assert_eq!(past.symbol_at(-1), 0);
        assert_eq!(past.symbol_at(-3), 1);
        assert_eq!(past.symbol_at(-4), 0);
        assert_eq!(past.symbol_at(-6), 1);
        assert_eq!(past.suffix(4), vec![0, 1, 0, 0]);
    }

    #[test]
    fn shifted_constraints_examples() {
        let full = ShiftSpace::full(2);
        let a = TwoSidedCylinder::new(&full, -1, vec![0, 0]).unwrap();
        let zeros = PastWord::constant(&full, 0).unwrap();
        let ones = PastWord::constant(&full, 1).unwrap();
        assert_eq!(
            shifted_cylinder_constraints(&full, &a, &zeros, 0),
            Some(FiberConstraint::new(0, vec![0]))
        );
        assert_eq!(shifted_cylinder_constraints(&full, &a, &ones, 0), None);
        assert_eq!(
            shifted_cylinder_constraints(&full, &a, &ones, 5),
            Some(FiberConstraint::new(4, vec![0, 0]))
        );
    }

    #[test]
    fn boundary_admissibility_is_enforced() {
        let g = golden();
        let past = PastWord::new(&g, vec![0, 1]).unwrap();
        let a = TwoSidedCylinder::new(&g, 0, vec![1]).unwrap();
        assert_eq!(shifted_cylinder_constraints(&g, &a, &past, 0), None);
        assert!(shifted_cylinder_constraints(&g, &a, &past, 1).is_some());
    }

    #[test]
    fn higher_block_examples() {
        let g = golden();
        let id = higher_block_recode(&g, 1).unwrap();
        assert_eq!(id.space().matrix(), g.matrix());
        let two = higher_block_recode(&g, 2).unwrap();
        assert_eq!(two.blocks(), &[vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(
            two.space().matrix(),
            vec![vec![1, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]
        );
        let full = higher_block_recode(&ShiftSpace::full(2), 2).unwrap();
        assert_eq!(full.space().k(), 4);
        for n in 2..8 {
            assert_eq!(full.space().word_count(n - 1), ShiftSpace::full(2).word_count(n));
        }
        assert_eq!(higher_block_recode(&g, 0).unwrap_err(), Error::ZeroBlockLength);
    }

    #[test]
    fn recode_round_trip() {
        let g = golden();
        let rec = higher_block_recode(&g, 3).unwrap();
        for w in g.words(7) {
            let blocks = rec.encode(&w).unwrap();
            assert_eq!(blocks.len(), 5);
            assert_eq!(rec.decode(&blocks).unwrap(), w);
        }
        assert!(rec.encode(&[0, 1]).is_err());
    }

    #[test]
    fn unstable_depth_translation() {
        let s = ShiftSpace::full(2);
        assert_eq!(s.unstable_depth(1.0).unwrap(), 0);
        assert_eq!(s.unstable_depth(0.25).unwrap(), 2);
        assert_eq!(s.unstable_depth(0.3).unwrap(), 1);
    }
}
