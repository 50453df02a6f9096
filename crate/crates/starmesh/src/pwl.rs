//! Exact algebra of monotone piecewise-linear arrival functions.
//!
//! A [`PwlFunction`] maps a departure time `t ∈ [0, ∞)` to an arrival time.
//! Functions are continuous and stored in canonical form: pieces sorted by
//! start, first piece starting at 0, no two adjacent pieces collinear. The
//! everywhere-infinite function (an edge that cannot be traversed in one
//! direction) is represented by an empty piece list.
//!
//! The two semiring operations are pointwise [`PwlFunction::minimum`] and
//! functional [`PwlFunction::compose`]; both run in a single merge pass
//! over the piece lists and produce canonical output.

use crate::rational::{fmt_rat, parse_rat, Arrival, Rat};
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

/// One linear piece, valid on `[start, next_start)` (the last piece extends
/// to infinity). Value at `t` is `slope * t + intercept`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub start: Rat,
    pub slope: Rat,
    pub intercept: Rat,
}

impl Piece {
    pub fn new(start: Rat, slope: Rat, intercept: Rat) -> Self {
        Piece { start, slope, intercept }
    }

    pub fn value_at(&self, t: &Rat) -> Rat {
        &self.slope * t + &self.intercept
    }

    /// True when both pieces lie on the same line.
    fn same_line(&self, other: &Piece) -> bool {
        self.slope == other.slope && self.intercept == other.intercept
    }
}

/// A slope change of a canonical function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breakpoint {
    pub t: Rat,
    pub value: Rat,
    pub left_slope: Rat,
    pub right_slope: Rat,
}

/// Structural errors raised when assembling a function from raw pieces or
/// parsing its serialized form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PwlError {
    #[error("a finite function needs at least one piece")]
    Empty,
    #[error("first piece must start at t = 0, found {0}")]
    FirstStartNonzero(String),
    #[error("piece starts must be strictly increasing at index {0}")]
    UnsortedStarts(usize),
    #[error("negative piece start at index {0}")]
    NegativeStart(usize),
    #[error("discontinuous at piece boundary index {index}: left value {left}, right value {right}")]
    Discontinuous { index: usize, left: String, right: String },
    #[error("invalid function token `{0}`")]
    InvalidToken(String),
}

/// A FIFO constraint violation, naming the offending piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FifoViolation {
    pub piece: usize,
    pub kind: FifoViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FifoViolationKind {
    /// The piece has negative slope: a later departure would arrive earlier.
    NegativeSlope,
    /// The function drops below the identity: arrival before departure at `at`.
    BelowIdentity { at: Rat },
}

impl fmt::Display for FifoViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FifoViolationKind::NegativeSlope => {
                write!(f, "piece {}: negative slope", self.piece)
            }
            FifoViolationKind::BelowIdentity { at } => {
                write!(f, "piece {}: f(t) < t at t = {}", self.piece, fmt_rat(at))
            }
        }
    }
}

/// Monotone piecewise-linear arrival function on `[0, ∞)`, or the
/// everywhere-infinite function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwlFunction {
    pieces: Vec<Piece>,
}

impl PwlFunction {
    /// The identity function `t ↦ t`.
    pub fn identity() -> Self {
        PwlFunction {
            pieces: vec![Piece::new(Rat::zero(), Rat::one(), Rat::zero())],
        }
    }

    /// The everywhere-infinite function: absorbing under composition,
    /// neutral under minimum.
    pub fn infinity() -> Self {
        PwlFunction { pieces: Vec::new() }
    }

    /// A single-piece linear function `t ↦ slope·t + intercept`.
    pub fn linear(slope: Rat, intercept: Rat) -> Self {
        PwlFunction {
            pieces: vec![Piece::new(Rat::zero(), slope, intercept)],
        }
    }

    /// The constant shift `t ↦ t + delay`.
    pub fn shift(delay: Rat) -> Self {
        Self::linear(Rat::one(), delay)
    }

    /// Builds a canonical function from raw pieces: validates ordering,
    /// nonnegative domain, and continuity, then merges collinear neighbors.
    pub fn from_pieces(pieces: Vec<Piece>) -> Result<Self, PwlError> {
        if pieces.is_empty() {
            return Err(PwlError::Empty);
        }
        if !pieces[0].start.is_zero() {
            return Err(PwlError::FirstStartNonzero(fmt_rat(&pieces[0].start)));
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[1].start.is_negative() {
                return Err(PwlError::NegativeStart(i + 1));
            }
            if w[1].start <= w[0].start {
                return Err(PwlError::UnsortedStarts(i + 1));
            }
            let left = w[0].value_at(&w[1].start);
            let right = w[1].value_at(&w[1].start);
            if left != right {
                return Err(PwlError::Discontinuous {
                    index: i + 1,
                    left: fmt_rat(&left),
                    right: fmt_rat(&right),
                });
            }
        }
        let mut out = PieceAccumulator::new();
        for p in pieces {
            out.push(p);
        }
        Ok(PwlFunction { pieces: out.into_pieces() })
    }

    /// Builds a function from its serialized form: breakpoint `(t, value)`
    /// pairs (the first at `t = 0`) plus the slope after the last point.
    pub fn from_breakpoints(points: &[(Rat, Rat)], final_slope: Rat) -> Result<Self, PwlError> {
        if points.is_empty() {
            return Err(PwlError::Empty);
        }
        let mut pieces = Vec::with_capacity(points.len());
        for (i, (t, v)) in points.iter().enumerate() {
            let slope = match points.get(i + 1) {
                Some((tn, vn)) => {
                    if tn <= t {
                        return Err(PwlError::UnsortedStarts(i + 1));
                    }
                    (vn - v) / (tn - t)
                }
                None => final_slope.clone(),
            };
            let intercept = v - &slope * t;
            pieces.push(Piece::new(t.clone(), slope, intercept));
        }
        Self::from_pieces(pieces)
    }

    pub fn is_infinite(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.pieces.len() == 1 && self.pieces[0].slope.is_one() && self.pieces[0].intercept.is_zero()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Number of slope changes: pieces minus one; 0 for linear and infinite.
    pub fn breakpoint_count(&self) -> usize {
        self.pieces.len().saturating_sub(1)
    }

    /// The breakpoints in order. Left and right slopes always differ by the
    /// canonical-form invariant.
    pub fn breakpoints(&self) -> Vec<Breakpoint> {
        let mut out = Vec::with_capacity(self.breakpoint_count());
        for w in self.pieces.windows(2) {
            out.push(Breakpoint {
                t: w[1].start.clone(),
                value: w[1].value_at(&w[1].start),
                left_slope: w[0].slope.clone(),
                right_slope: w[1].slope.clone(),
            });
        }
        out
    }

    /// Evaluates the function at departure time `t`.
    ///
    /// Panics if `t` is negative; the domain is `[0, ∞)`.
    pub fn eval(&self, t: &Rat) -> Arrival {
        assert!(!t.is_negative(), "departure time must be nonnegative, got {}", fmt_rat(t));
        if self.is_infinite() {
            return Arrival::Infinite;
        }
        let idx = self.pieces.partition_point(|p| p.start <= *t) - 1;
        Arrival::Finite(self.pieces[idx].value_at(t))
    }

    /// Pointwise minimum `t ↦ min(self(t), other(t))`, computed by a single
    /// merge pass that locates segment intersections exactly.
    ///
    /// ```
    /// use starmesh::{rat_int, PwlFunction};
    /// let f = PwlFunction::shift(rat_int(2));               // t + 2
    /// let g = PwlFunction::linear(rat_int(2), rat_int(0));  // 2t
    /// assert_eq!(f.minimum(&g).to_string(), "0,0;2,4@1");   // cross at t = 2
    /// ```
    pub fn minimum(&self, other: &PwlFunction) -> PwlFunction {
        if self.is_infinite() {
            return other.clone();
        }
        if other.is_infinite() {
            return self.clone();
        }
        let fp = &self.pieces;
        let gp = &other.pieces;
        let mut out = PieceAccumulator::new();
        let mut i = 0;
        let mut j = 0;
        let mut t = Rat::zero();
        loop {
            let f = &fp[i];
            let g = &gp[j];
            // end of the interval on which both current pieces are active
            let next: Option<Rat> = match (fp.get(i + 1), gp.get(j + 1)) {
                (Some(a), Some(b)) => Some(a.start.clone().min(b.start.clone())),
                (Some(a), None) => Some(a.start.clone()),
                (None, Some(b)) => Some(b.start.clone()),
                (None, None) => None,
            };
            let vf = f.value_at(&t);
            let vg = g.value_at(&t);
            if f.slope == g.slope {
                let lower = if vf <= vg { f } else { g };
                out.push(Piece::new(t.clone(), lower.slope.clone(), lower.intercept.clone()));
            } else {
                // lines cross exactly once, at t*
                let t_star = (&g.intercept - &f.intercept) / (&f.slope - &g.slope);
                // which piece is lower immediately after t: by value, then by slope
                let (low, high) = if vf < vg || (vf == vg && f.slope < g.slope) {
                    (f, g)
                } else {
                    (g, f)
                };
                let crosses = t_star > t && next.as_ref().is_none_or(|n| t_star < *n);
                out.push(Piece::new(t.clone(), low.slope.clone(), low.intercept.clone()));
                if crosses {
                    out.push(Piece::new(t_star, high.slope.clone(), high.intercept.clone()));
                }
            }
            match next {
                None => break,
                Some(n) => {
                    if i + 1 < fp.len() && fp[i + 1].start == n {
                        i += 1;
                    }
                    if j + 1 < gp.len() && gp[j + 1].start == n {
                        j += 1;
                    }
                    t = n;
                }
            }
        }
        PwlFunction { pieces: out.into_pieces() }
    }

    /// Functional composition `self ∘ inner`: `t ↦ self(inner(t))`.
    ///
    /// `inner` must be monotone nondecreasing (FIFO); the pass merges the
    /// breakpoints of `inner` with the preimages under `inner` of the
    /// breakpoints of `self`, so it runs linearly in the total piece count.
    pub fn compose(&self, inner: &PwlFunction) -> PwlFunction {
        if self.is_infinite() || inner.is_infinite() {
            return PwlFunction::infinity();
        }
        let g = &self.pieces;
        let f = &inner.pieces;
        let mut out = PieceAccumulator::new();
        let mut j = 0usize;
        for (i, fp) in f.iter().enumerate() {
            debug_assert!(!fp.slope.is_negative(), "compose requires monotone inner function");
            let piece_end = f.get(i + 1).map(|p| &p.start);
            let entry_value = fp.value_at(&fp.start);
            while j + 1 < g.len() && g[j + 1].start <= entry_value {
                j += 1;
            }
            debug_assert!(j == 0 || g[j].start <= entry_value);
            if fp.slope.is_zero() {
                // constant piece: the composition is constant too
                let value = g[j].value_at(&entry_value);
                out.push(Piece::new(fp.start.clone(), Rat::zero(), value));
                continue;
            }
            let mut cur_t = fp.start.clone();
            loop {
                let slope = &g[j].slope * &fp.slope;
                let intercept = &g[j].slope * &fp.intercept + &g[j].intercept;
                match g.get(j + 1) {
                    Some(gn) => {
                        // preimage under the current inner piece of the next
                        // outer breakpoint
                        let tau = (&gn.start - &fp.intercept) / &fp.slope;
                        let inside = tau > cur_t && piece_end.is_none_or(|b| tau < *b);
                        out.push(Piece::new(cur_t.clone(), slope, intercept));
                        if inside {
                            cur_t = tau;
                            j += 1;
                        } else {
                            break;
                        }
                    }
                    None => {
                        out.push(Piece::new(cur_t.clone(), slope, intercept));
                        break;
                    }
                }
            }
        }
        PwlFunction { pieces: out.into_pieces() }
    }

    /// Checks the FIFO constraints: slope ≥ 0 on every piece and
    /// `f(t) ≥ t` for all `t ≥ 0`. Returns one violation per offending
    /// piece and constraint; empty for the infinite function.
    pub fn validate_fifo(&self) -> Vec<FifoViolation> {
        let mut out = Vec::new();
        let last = self.pieces.len().wrapping_sub(1);
        for (idx, p) in self.pieces.iter().enumerate() {
            if p.slope.is_negative() {
                out.push(FifoViolation { piece: idx, kind: FifoViolationKind::NegativeSlope });
                continue;
            }
            if p.value_at(&p.start) < p.start {
                out.push(FifoViolation {
                    piece: idx,
                    kind: FifoViolationKind::BelowIdentity { at: p.start.clone() },
                });
                continue;
            }
            // On the final piece a slope below one eventually drops under the
            // identity; report a concrete witness time.
            if idx == last && p.slope < Rat::one() {
                // slope·t + intercept < t  ⇔  t > intercept / (1 − slope)
                let threshold = &p.intercept / (Rat::one() - &p.slope);
                let witness = threshold.max(p.start.clone()) + Rat::one();
                out.push(FifoViolation {
                    piece: idx,
                    kind: FifoViolationKind::BelowIdentity { at: witness },
                });
            }
        }
        out
    }

    /// True when [`Self::validate_fifo`] reports nothing.
    pub fn is_fifo(&self) -> bool {
        self.validate_fifo().is_empty()
    }
}

impl fmt::Display for PwlFunction {
    /// Serialized form: `inf`, or `t0,v0;t1,v1;...@final_slope` where each
    /// `ti,vi` is a breakpoint pair and values are exact rationals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            return write!(f, "inf");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{},{}", fmt_rat(&p.start), fmt_rat(&p.value_at(&p.start)))?;
        }
        write!(f, "@{}", fmt_rat(&self.pieces.last().unwrap().slope))
    }
}

impl FromStr for PwlFunction {
    type Err = PwlError;

    fn from_str(s: &str) -> Result<Self, PwlError> {
        if s == "inf" {
            return Ok(PwlFunction::infinity());
        }
        let bad = || PwlError::InvalidToken(s.to_string());
        let (points_part, slope_part) = s.split_once('@').ok_or_else(bad)?;
        let final_slope = parse_rat(slope_part).map_err(|_| bad())?;
        let mut points = Vec::new();
        for pair in points_part.split(';') {
            let (ts, vs) = pair.split_once(',').ok_or_else(bad)?;
            let t = parse_rat(ts).map_err(|_| bad())?;
            let v = parse_rat(vs).map_err(|_| bad())?;
            points.push((t, v));
        }
        Self::from_breakpoints(&points, final_slope)
    }
}

/// Appends pieces while merging collinear neighbors, keeping output canonical.
struct PieceAccumulator {
    pieces: Vec<Piece>,
}

impl PieceAccumulator {
    fn new() -> Self {
        PieceAccumulator { pieces: Vec::new() }
    }

    fn push(&mut self, piece: Piece) {
        if let Some(last) = self.pieces.last() {
            debug_assert!(piece.start > last.start);
            if last.same_line(&piece) {
                return;
            }
        }
        self.pieces.push(piece);
    }

    fn into_pieces(self) -> Vec<Piece> {
        self.pieces
    }
}
