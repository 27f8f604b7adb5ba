//! Power-series representations of window operators: the two-index
//! canonical form over irreducible word pairs and the one-index causal
//! expansion with constant coefficients.  Both are exact entry
//! rearrangements on the window, so the round-trips are tolerance-zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::op::{C64, ConstOp, Op, ZERO};
use crate::tree::{is_reducible, TreeWindow, Word};

/// Two-index representation: map from irreducible word pairs `(w1, w2)` to
/// diagonal coefficients.  Off-support diagonal entries are normalized to
/// zero, which makes the representation canonical.
#[derive(Clone, Debug)]
pub struct TwoIndexRep {
    win: Arc<TreeWindow>,
    coeffs: BTreeMap<(Word, Word), Op>,
}

impl TwoIndexRep {
    pub fn window(&self) -> &Arc<TreeWindow> {
        &self.win
    }

    pub fn coeffs(&self) -> &BTreeMap<(Word, Word), Op> {
        &self.coeffs
    }

    pub fn coeff(&self, w1: &Word, w2: &Word) -> Option<&Op> {
        self.coeffs.get(&(w1.clone(), w2.clone()))
    }
}

/// Causal expansion: map from words to constant coefficients, each
/// supported on levels `<= depth - |w|`.
#[derive(Clone, Debug)]
pub struct CausalSeries {
    win: Arc<TreeWindow>,
    coeffs: BTreeMap<Word, ConstOp>,
}

impl CausalSeries {
    pub fn new(win: &Arc<TreeWindow>, coeffs: BTreeMap<Word, ConstOp>) -> Result<Self> {
        for (w, c) in &coeffs {
            check_support(win, w, c)?;
        }
        Ok(CausalSeries {
            win: Arc::clone(win),
            coeffs,
        })
    }

    pub fn empty(win: &Arc<TreeWindow>) -> Self {
        CausalSeries {
            win: Arc::clone(win),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> &Arc<TreeWindow> {
        &self.win
    }

    pub fn coeffs(&self) -> &BTreeMap<Word, ConstOp> {
        &self.coeffs
    }

    /// Coefficient at `w`; absent keys are zero.
    pub fn coeff(&self, w: &Word) -> ConstOp {
        self.coeffs
            .get(w)
            .cloned()
            .unwrap_or_else(|| ConstOp::zeros(&self.win))
    }

    pub fn insert(&mut self, w: Word, c: ConstOp) -> Result<()> {
        check_support(&self.win, &w, &c)?;
        if c.op().max_abs() > 0.0 {
            self.coeffs.insert(w, c);
        }
        Ok(())
    }
}

/// Support convention: rows and columns of the coefficient at `w` vanish
/// on levels deeper than `depth - |w|`.
fn check_support(win: &Arc<TreeWindow>, w: &Word, c: &ConstOp) -> Result<()> {
    if w.len() > win.depth() {
        return Err(Error::WordLengthMismatch {
            lhs: w.encode(win.q()),
            lhs_len: w.len(),
            expected: win.depth(),
        });
    }
    let masked = c.op().compress(w.len());
    let defect = (c.op() - &masked).max_abs();
    if defect > 0.0 {
        return Err(Error::NotConstant { defect });
    }
    Ok(())
}

/// Canonical two-index representation of an arbitrary window operator.
/// The coefficient at `(w1, w2)` carries, on the diagonal at node `s = m·w2`,
/// the entry of `S` at row `m·w1`, column `s`.
pub fn two_index_rep(s: &Op) -> TwoIndexRep {
    let win = Arc::clone(s.window());
    let mut coeffs: BTreeMap<(Word, Word), Op> = BTreeMap::new();
    for t in win.nodes() {
        for r in win.nodes() {
            let val = s.entry(t, r);
            if val == ZERO {
                continue;
            }
            let (_, w1, w2) = win.decompose(t, r);
            let coeff = coeffs
                .entry((w1, w2))
                .or_insert_with(|| Op::zeros(&win));
            let mut mat = coeff.matrix().clone();
            mat[(r.index(), r.index())] = val;
            *coeff = Op::from_matrix(&win, mat);
        }
    }
    TwoIndexRep { win, coeffs }
}

/// Assembles `sum' w1^* w2 S_{w1,w2}` over the stored irreducible pairs;
/// the exact inverse of [`two_index_rep`].
pub fn two_index_reconstruct(rep: &TwoIndexRep) -> Result<Op> {
    let win = &rep.win;
    let mut acc = Op::zeros(win);
    for ((w1, w2), coeff) in &rep.coeffs {
        if is_reducible(w1, w2) {
            return Err(Error::ReducibleKey {
                w1: w1.encode(win.q()),
                w2: w2.encode(win.q()),
            });
        }
        let term = &(&Op::word_op(win, w1).adjoint() * &Op::word_op(win, w2)) * coeff;
        acc = &acc + &term;
    }
    Ok(acc)
}

/// Causal expansion with the exact mask check.
pub fn causal_expand(s: &Op) -> Result<CausalSeries> {
    causal_expand_tol(s, 0.0)
}

/// Causal expansion accepting float noise below `tol` off the causal mask.
/// The coefficient at `w` reads `S[s·w][t]` on the level-diagonal pairs
/// `(s, t)` with `|s·w| <= depth`.
pub fn causal_expand_tol(s: &Op, tol: f64) -> Result<CausalSeries> {
    let defect = s.causal_defect();
    if defect > tol {
        return Err(Error::NotCausal { defect });
    }
    let win = Arc::clone(s.window());
    let n = win.node_count();
    let mut coeffs = BTreeMap::new();
    for len in 0..=win.depth() {
        for w in win.words_of_len(len).cloned().collect::<Vec<_>>() {
            let mut mat = nalgebra::DMatrix::<C64>::zeros(n, n);
            let mut nonzero = false;
            for level in 0..=win.depth() - len {
                for srow in win.level_range(level) {
                    let sw = match win.append(crate::tree::NodeId(srow), &w) {
                        Some(id) => id,
                        None => continue,
                    };
                    for tcol in win.level_range(level) {
                        let val = s.entry(sw, crate::tree::NodeId(tcol));
                        if val != ZERO {
                            mat[(srow, tcol)] = val;
                            nonzero = true;
                        }
                    }
                }
            }
            if nonzero {
                let coeff = ConstOp::new(Op::from_matrix(&win, mat))?;
                coeffs.insert(w, coeff);
            }
        }
    }
    Ok(CausalSeries { win, coeffs })
}

/// Assembles `sum_w w^* S_{[w]}`; the exact inverse of [`causal_expand`]
/// and always causal.
pub fn causal_reconstruct(series: &CausalSeries) -> Op {
    let win = &series.win;
    let mut acc = Op::zeros(win);
    for (w, coeff) in &series.coeffs {
        acc = &acc + &(&Op::word_op(win, w).adjoint() * coeff.op());
    }
    acc
}

/// Window form of the diagonal commutation relations `D w^* = w^* D'` and
/// `D w = w D''`: returns `(D', D'')` with `D'[t] = D[t·w]` (zero when
/// `t·w` leaves the window) and `D''[t·w] = D[t]`.
pub fn commute_diag(d: &Op, w: &Word) -> Result<(Op, Op)> {
    let defect = d.diagonal_defect();
    if defect > 0.0 {
        return Err(Error::NotDiagonal { defect });
    }
    let win = d.window();
    let d_prime = Op::diagonal(win, |t| match win.append(t, w) {
        Some(tw) => d.entry(tw, tw),
        None => ZERO,
    });
    let d_second = Op::diagonal(win, |t| {
        let word = win.word(t);
        if word.len() >= w.len() && word.suffix_from(word.len() - w.len()) == *w {
            let s = win
                .node_id(&word.prefix(word.len() - w.len()))
                .expect("prefix stays in window");
            d.entry(s, s)
        } else {
            ZERO
        }
    });
    Ok((d_prime, d_second))
}

/// Expansion of `C w^*` over same-length words: `C_v = v C w^*`, each
/// constant; summing `v^* C_v` recovers `C w^*` on the window.
pub fn constant_shift_expand(c: &ConstOp, w: &Word) -> BTreeMap<Word, ConstOp> {
    let win = c.op().window();
    let w_adj = Op::word_op(win, w).adjoint();
    let mut out = BTreeMap::new();
    for v in win.words_of_len(w.len()).cloned().collect::<Vec<_>>() {
        let cv = &(&Op::word_op(win, &v) * c.op()) * &w_adj;
        let cv = ConstOp::new(cv).expect("v C w^* is constant by band arithmetic");
        if cv.op().max_abs() > 0.0 {
            out.insert(v, cv);
        }
    }
    out
}
