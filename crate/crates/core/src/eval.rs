//! Point evaluation of causal operators at constant tuples, the Cauchy
//! kernel with its reproducing formula, and the backward shift operators.
//!
//! On a window every tuple is admissible: the weighted shift lowers the
//! level by one, so all the defining series are finite sums.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::op::{C64, ConstOp, CTuple, Op};
use crate::tree::{TreeWindow, Word};

/// An evaluation point with cached powers of its weighted shift.
#[derive(Clone, Debug)]
pub struct EvalPoint {
    c: CTuple,
    /// `powers[n] = (cα)^n` for `n = 0..=depth`; the next power vanishes.
    powers: Vec<Op>,
}

impl EvalPoint {
    pub fn new(c: CTuple) -> Self {
        let win = Arc::clone(c.window());
        let ws = c.weighted_shift();
        let mut powers = Vec::with_capacity(win.depth() + 1);
        powers.push(Op::identity(&win));
        for n in 1..=win.depth() {
            let next = &powers[n - 1] * &ws;
            powers.push(next);
        }
        EvalPoint { c, powers }
    }

    pub fn zero(win: &Arc<TreeWindow>) -> Self {
        EvalPoint::new(CTuple::zero(win))
    }

    pub fn tuple(&self) -> &CTuple {
        &self.c
    }

    pub fn window(&self) -> &Arc<TreeWindow> {
        self.c.window()
    }

    /// `(cα)^n`; zero beyond the window depth.
    pub fn power(&self, n: usize) -> Op {
        if n < self.powers.len() {
            self.powers[n].clone()
        } else {
            Op::zeros(self.window())
        }
    }

    /// `‖(cα)^n‖^{1/n}`.  Diagnostic: on a finite window the weighted
    /// shift is nilpotent, so this tends to zero in `n`; sweeping depths
    /// estimates the true growth bound.
    pub fn growth_rate(&self, n: usize) -> f64 {
        assert!(n >= 1, "growth rate needs n >= 1");
        let norm = self.power(n).op_norm();
        norm.powf(1.0 / n as f64)
    }
}

/// Evaluation of a causal operator at a point: `sum_n (cα)^n band(S, n)`,
/// always a constant.
pub fn point_eval(s: &Op, at: &EvalPoint) -> Result<ConstOp> {
    point_eval_tol(s, at, 0.0)
}

/// [`point_eval`] accepting float noise below `tol` off the causal mask.
pub fn point_eval_tol(s: &Op, at: &EvalPoint, tol: f64) -> Result<ConstOp> {
    let defect = s.causal_defect();
    if defect > tol {
        return Err(Error::NotCausal { defect });
    }
    let win = s.window();
    let mut acc = Op::zeros(win);
    for n in 0..=win.depth() {
        acc = &acc + &(&at.power(n) * &s.band(n as i64));
    }
    ConstOp::new(acc)
}

/// The reproducing kernel at a point: `(I - α^* c^*)^{-1}`, computed as the
/// finite geometric series of the level-raising operator `α^* c^*`.
pub fn cauchy_kernel(at: &EvalPoint) -> Op {
    let win = at.window();
    let mut acc = Op::zeros(win);
    for n in 0..=win.depth() {
        acc = &acc + &at.power(n).adjoint();
    }
    acc
}

/// Backward shift along letter `j`: strips the constant term and
/// right-multiplies by the shift.  Maps causal to causal.
pub fn backward_shift(f: &Op, j: u8) -> Result<Op> {
    let defect = f.causal_defect();
    if defect > 0.0 {
        return Err(Error::NotCausal { defect });
    }
    Ok(backward_shift_unchecked(f, j))
}

pub(crate) fn backward_shift_unchecked(f: &Op, j: u8) -> Op {
    let win = f.window();
    &(f - &f.band(0)) * &Op::shift(win, j)
}

/// Iterated backward shift along the word `v = i_1 … i_k`: applies the
/// shift for `i_1` first, then `i_2`, and so on.
pub fn backward_shift_word(f: &Op, v: &Word) -> Result<Op> {
    let defect = f.causal_defect();
    if defect > 0.0 {
        return Err(Error::NotCausal { defect });
    }
    let mut acc = f.clone();
    for &letter in v.letters() {
        acc = backward_shift_unchecked(&acc, letter);
    }
    Ok(acc)
}

/// Reads the series coefficient at `w` through the state-space route:
/// `word_op(w) · band0(A^v F) · word_op(v)^*` for any `v` with `|v| = |w|`.
pub fn coeff_via_states(f: &Op, w: &Word, v: &Word) -> Result<ConstOp> {
    if v.len() != w.len() {
        return Err(Error::WordLengthMismatch {
            lhs: v.encode(f.window().q()),
            lhs_len: v.len(),
            expected: w.len(),
        });
    }
    let win = f.window();
    let states = backward_shift_word(f, v)?;
    let core = states.band(0);
    let out = &(&Op::word_op(win, w) * &core) * &Op::word_op(win, v).adjoint();
    ConstOp::new(out)
}

/// The finitely supported tuple exposing the first nonzero coefficient of
/// a causal operator: for the first word `w = i_1…i_n` (level-major, lex)
/// with a nonzero coefficient and a nonzero coefficient row at node `t0`,
/// the tuple moves `t0·(i_1…i_{k+1})` to `t0·(i_1…i_k)` through component
/// `i_{k+1}` and annihilates everything else, so evaluating at it isolates
/// exactly that coefficient row.
pub fn separation_witness(s: &Op) -> Result<EvalPoint> {
    let defect = s.causal_defect();
    if defect > 0.0 {
        return Err(Error::NotCausal { defect });
    }
    let win = s.window();
    let series = crate::series::causal_expand(s)?;
    let mut found: Option<(Word, crate::tree::NodeId)> = None;
    'outer: for len in 0..=win.depth() {
        for w in win.words_of_len(len).cloned().collect::<Vec<_>>() {
            if let Some(coeff) = series.coeffs().get(&w) {
                for t in win.nodes() {
                    let row_norm: f64 = win
                        .nodes()
                        .map(|u| coeff.op().entry(t, u).norm_sqr())
                        .sum();
                    if row_norm > 0.0 {
                        found = Some((w.clone(), t));
                        break 'outer;
                    }
                }
            }
        }
    }
    let (word, t0) = match found {
        Some(pair) => pair,
        None => (Word::empty(), win.root()),
    };
    let mut comps: Vec<nalgebra::DMatrix<C64>> = (0..win.q())
        .map(|_| nalgebra::DMatrix::zeros(win.node_count(), win.node_count()))
        .collect();
    for k in 0..word.len() {
        let letter = word.letters()[k];
        let prefix = word.prefix(k);
        let node = win
            .append(t0, &prefix)
            .expect("coefficient support keeps the path inside the window");
        comps[letter as usize - 1][(node.index(), node.index())] = crate::op::ONE;
    }
    let tuple = CTuple::new(
        comps
            .into_iter()
            .map(|m| ConstOp::new(Op::from_matrix(win, m)).expect("diagonal is constant"))
            .collect(),
    )?;
    Ok(EvalPoint::new(tuple))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::{ONE, ZERO};
    use crate::series::causal_expand;
    use crate::tree::NodeId;

    fn win(q: usize, depth: usize) -> Arc<TreeWindow> {
        Arc::new(TreeWindow::new(q, depth).unwrap())
    }

    fn dense_causal(win: &Arc<TreeWindow>) -> Op {
        let raw = Op::from_fn(win, |t, s| {
            C64::new(
                ((3 * t.0 + s.0) as f64 * 0.37).sin(),
                ((t.0 + 2 * s.0) as f64 * 0.53).cos(),
            )
        });
        let mut acc = Op::zeros(win);
        for n in 0..=win.depth() as i64 {
            acc = &acc + &raw.band(n);
        }
        acc
    }

    fn dense_constant(win: &Arc<TreeWindow>) -> ConstOp {
        ConstOp::new(
            Op::from_fn(win, |t, s| {
                C64::new(
                    ((t.0 * 5 + s.0) as f64 * 0.19).cos(),
                    ((t.0 + 7 * s.0) as f64 * 0.11).sin(),
                )
            })
            .band(0),
        )
        .unwrap()
    }

    fn test_tuple(win: &Arc<TreeWindow>, phase: f64) -> CTuple {
        let comps = (0..win.q())
            .map(|j| {
                ConstOp::new(
                    Op::from_fn(win, |t, s| {
                        C64::new(
                            ((t.0 + s.0 + j) as f64 * 0.23 + phase).sin() * 0.4,
                            ((t.0 * 2 + s.0 + j) as f64 * 0.31 - phase).cos() * 0.4,
                        )
                    })
                    .band(0),
                )
                .unwrap()
            })
            .collect();
        CTuple::new(comps).unwrap()
    }

    #[test]
    fn growth_rate_examples() {
        let w = win(2, 3);
        let zero = EvalPoint::zero(&w);
        assert_eq!(zero.growth_rate(1), 0.0);
        let p = EvalPoint::new(test_tuple(&w, 0.0));
        assert_eq!(p.growth_rate(w.depth() + 1), 0.0);
        // q = 1, scalar tuple: rate |lambda| at every order within depth
        let path = win(1, 4);
        let lambda = C64::new(0.3, 0.4);
        let c = CTuple::new(vec![
            ConstOp::new(Op::identity(&path).scale(lambda)).unwrap(),
        ])
        .unwrap();
        let p = EvalPoint::new(c);
        for n in 1..=path.depth() {
            assert!((p.growth_rate(n) - lambda.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn point_eval_at_zero_is_constant_term() {
        let w = win(2, 3);
        let s = dense_causal(&w);
        let ev = point_eval(&s, &EvalPoint::zero(&w)).unwrap();
        assert_eq!((ev.op() - &s.band(0)).max_abs(), 0.0);
    }

    #[test]
    fn point_eval_of_word_adjoint() {
        let w = win(2, 3);
        let p = EvalPoint::new(test_tuple(&w, 1.0));
        for len in 0..=2usize {
            for word in w.words_of_len(len).cloned().collect::<Vec<_>>() {
                let wadj = Op::word_op(&w, &word).adjoint();
                let ev = point_eval(&wadj, &p).unwrap();
                let expect = &p.power(len) * &wadj;
                assert!((ev.op() - &expect).max_abs() < 1e-13);
            }
        }
    }

    #[test]
    fn point_eval_rejects_noncausal() {
        let w = win(2, 2);
        let p = EvalPoint::zero(&w);
        assert!(matches!(
            point_eval(&Op::shift(&w, 1), &p),
            Err(Error::NotCausal { .. })
        ));
    }

    #[test]
    fn point_eval_is_linear_over_right_constants() {
        let w = win(2, 3);
        let p = EvalPoint::new(test_tuple(&w, 0.4));
        let f = dense_causal(&w);
        let g = &dense_causal(&w) * &Op::shift_adjoint(&w, 2);
        let k = dense_constant(&w);
        let lhs = point_eval(&(&(&f * k.op()) + &g), &p).unwrap();
        let rhs = &(&point_eval(&f, &p).unwrap().into_op() * k.op())
            + &point_eval(&g, &p).unwrap().into_op();
        assert!((lhs.op() - &rhs).max_abs() < 1e-12);
    }

    #[test]
    fn point_eval_is_multiplicative() {
        let w = win(2, 3);
        let p = EvalPoint::new(test_tuple(&w, 0.9));
        let f = dense_causal(&w);
        let g = &Op::shift_adjoint(&w, 1) * &dense_causal(&w);
        let lhs = point_eval(&(&f * &g), &p).unwrap();
        let inner = &point_eval(&f, &p).unwrap().into_op() * &g;
        let rhs = point_eval(&inner, &p).unwrap();
        assert!((lhs.op() - rhs.op()).max_abs() < 1e-10);
    }

    #[test]
    fn cauchy_kernel_at_zero() {
        let w = win(2, 2);
        let k = cauchy_kernel(&EvalPoint::zero(&w));
        assert_eq!((&k - &Op::identity(&w)).max_abs(), 0.0);
    }

    #[test]
    fn cauchy_kernel_inverts_unipotent() {
        let w = win(2, 3);
        let p = EvalPoint::new(test_tuple(&w, 0.2));
        let k = cauchy_kernel(&p);
        assert!(k.is_causal());
        let raising = p.power(1).adjoint();
        let factor = &Op::identity(&w) - &raising;
        assert!((&(&factor * &k) - &Op::identity(&w)).max_abs() < 1e-12);
        // cross-check against the direct matrix inverse
        let inv = factor.try_inverse("unipotent kernel factor").unwrap();
        assert!((&inv - &k).max_abs() < 1e-12);
    }

    #[test]
    fn reproducing_formula_is_window_exact() {
        let w = win(2, 3);
        let p = EvalPoint::new(test_tuple(&w, 0.7));
        let f = dense_causal(&w);
        let k = dense_constant(&w);
        let lhs = point_eval(&f, &p).unwrap().op().hs_inner(k.op());
        let rhs = f.hs_inner(&(&cauchy_kernel(&p) * k.op()));
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn backward_shift_examples() {
        let w = win(2, 3);
        assert_eq!(backward_shift(&Op::identity(&w), 1).unwrap().max_abs(), 0.0);
        let a1s = Op::shift_adjoint(&w, 1);
        let shifted = backward_shift(&a1s, 1).unwrap();
        let expect = &a1s * &Op::shift(&w, 1);
        assert_eq!((&shifted - &expect).max_abs(), 0.0);
        // projection onto nodes whose word ends in the letter 1
        let proj = Op::diagonal(&w, |n| {
            if w.word(n).last() == Some(1) {
                ONE
            } else {
                ZERO
            }
        });
        assert_eq!((&shifted - &proj).max_abs(), 0.0);
    }

    #[test]
    fn backward_shift_is_adjoint_of_right_multiplication() {
        let w = win(2, 3);
        let f = dense_causal(&w);
        let g = &dense_causal(&w) * &Op::shift_adjoint(&w, 2);
        for j in 1..=2u8 {
            let lhs = backward_shift(&f, j).unwrap().hs_inner(&g);
            let rhs = f.hs_inner(&(&g * &Op::shift_adjoint(&w, j)));
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn backward_shift_super_identities() {
        let w = win(2, 2);
        let f = dense_causal(&w);
        for i in 1..=2u8 {
            for j in 1..=2u8 {
                // A_j (F α_i^*) = F (α_i^* α_j)
                let lhs = backward_shift(&(&f * &Op::shift_adjoint(&w, i)), j).unwrap();
                let rhs = &f * &(&Op::shift_adjoint(&w, i) * &Op::shift(&w, j));
                assert!((&lhs - &rhs).max_abs() < 1e-13);
                // (A_j F) α_i^* = delta_ij (F - band0 F)
                let lhs = &backward_shift(&f, j).unwrap() * &Op::shift_adjoint(&w, i);
                let rhs = if i == j {
                    &f - &f.band(0)
                } else {
                    Op::zeros(&w)
                };
                assert!((&lhs - &rhs).max_abs() < 1e-13);
            }
        }
    }

    #[test]
    fn coeff_via_states_trivial() {
        let w = win(2, 2);
        let id = Op::identity(&w);
        let c = coeff_via_states(&id, &Word::empty(), &Word::empty()).unwrap();
        assert_eq!((c.op() - &id).max_abs(), 0.0);
    }

    #[test]
    fn coeff_via_states_matches_expansion() {
        let w = win(2, 2);
        let f = dense_causal(&w);
        let series = causal_expand(&f).unwrap();
        for wlen in 0..=2usize {
            for word in w.words_of_len(wlen).cloned().collect::<Vec<_>>() {
                let expect = series.coeff(&word);
                for v in w.words_of_len(wlen).cloned().collect::<Vec<_>>() {
                    let got = coeff_via_states(&f, &word, &v).unwrap();
                    assert!(
                        (got.op() - expect.op()).max_abs() < 1e-12,
                        "w = {word:?}, v = {v:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn coeff_via_states_rejects_length_mismatch() {
        let w = win(2, 2);
        let f = Op::identity(&w);
        assert!(coeff_via_states(&f, &Word::parse("1", 2).unwrap(), &Word::empty()).is_err());
    }

    #[test]
    fn separation_witness_exposes_deep_coefficient() {
        let w = win(2, 3);
        // operator with exactly one nonzero coefficient deep in the series
        let word = Word::parse("12", 2).unwrap();
        let t0 = NodeId(1); // node "1", level 1 <= depth - |word|
        let coeff = Op::matrix_unit(&w, t0, t0);
        let s = &Op::word_op(&w, &word).adjoint() * &coeff;
        let witness = separation_witness(&s).unwrap();
        let ev = point_eval(&s, &witness).unwrap();
        assert!(ev.op().max_abs() > 0.5);
    }

    #[test]
    fn separation_witness_on_dense_operator() {
        let w = win(2, 2);
        let s = dense_causal(&w);
        let witness = separation_witness(&s).unwrap();
        let ev = point_eval(&s, &witness).unwrap();
        assert!(ev.op().max_abs() > 1e-8);
    }
}
