//! Dense complex matrices over window nodes: shift operators, bands,
//! causality and constancy masks, Hilbert–Schmidt structure, interior
//! compression.
//!
//! Entry convention: `entry[t][s]` is the coefficient of the image of the
//! basis vector at node `s` on node `t` (row = output, column = input), so
//! operator composition is plain matrix multiplication.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tree::{NodeId, TreeWindow, Word};

pub type C64 = Complex<f64>;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);

/// Bounded-operator surrogate on a tree window.
#[derive(Clone, Debug)]
pub struct Op {
    win: Arc<TreeWindow>,
    mat: DMatrix<C64>,
}

impl PartialEq for Op {
    fn eq(&self, other: &Self) -> bool {
        self.same_window(other) && self.mat == other.mat
    }
}

impl Op {
    pub fn zeros(win: &Arc<TreeWindow>) -> Self {
        let n = win.node_count();
        Op {
            win: Arc::clone(win),
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(win: &Arc<TreeWindow>) -> Self {
        let n = win.node_count();
        Op {
            win: Arc::clone(win),
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn from_matrix(win: &Arc<TreeWindow>, mat: DMatrix<C64>) -> Self {
        let n = win.node_count();
        assert_eq!((mat.nrows(), mat.ncols()), (n, n), "matrix/window mismatch");
        Op {
            win: Arc::clone(win),
            mat,
        }
    }

    pub fn from_fn(win: &Arc<TreeWindow>, f: impl Fn(NodeId, NodeId) -> C64) -> Self {
        let n = win.node_count();
        Op {
            win: Arc::clone(win),
            mat: DMatrix::from_fn(n, n, |t, s| f(NodeId(t), NodeId(s))),
        }
    }

    /// Matrix unit `E_{ts}`: maps the basis vector at `s` to the one at `t`.
    pub fn matrix_unit(win: &Arc<TreeWindow>, t: NodeId, s: NodeId) -> Self {
        let mut op = Op::zeros(win);
        op.mat[(t.0, s.0)] = ONE;
        op
    }

    /// Diagonal operator from per-node values.
    pub fn diagonal(win: &Arc<TreeWindow>, values: impl Fn(NodeId) -> C64) -> Self {
        let n = win.node_count();
        let mut mat = DMatrix::zeros(n, n);
        for i in 0..n {
            mat[(i, i)] = values(NodeId(i));
        }
        Op {
            win: Arc::clone(win),
            mat,
        }
    }

    /// Primitive shift: reads the value one level deeper along letter `j`,
    /// i.e. `entry[u][u·j] = 1`.
    pub fn shift(win: &Arc<TreeWindow>, j: u8) -> Self {
        assert!(j >= 1 && (j as usize) <= win.q(), "letter out of range");
        let mut op = Op::zeros(win);
        for u in win.nodes() {
            if let Some(c) = win.child(u, j) {
                op.mat[(u.0, c.0)] = ONE;
            }
        }
        op
    }

    /// Adjoint of [`Op::shift`]: `entry[t·j][t] = 1`, with zero columns on
    /// the deepest level (window truncation).
    pub fn shift_adjoint(win: &Arc<TreeWindow>, j: u8) -> Self {
        Op::shift(win, j).adjoint()
    }

    /// Operator of the semigroup element `w`: `entry[t][t·w] = 1`.  Words
    /// longer than the depth give the zero operator.
    pub fn word_op(win: &Arc<TreeWindow>, w: &Word) -> Self {
        let mut op = Op::zeros(win);
        for t in win.nodes() {
            if let Some(s) = win.append(t, w) {
                op.mat[(t.0, s.0)] = ONE;
            }
        }
        op
    }

    /// Diagonal projection onto levels `<= k`.
    pub fn proj_levels_le(win: &Arc<TreeWindow>, k: usize) -> Self {
        Op::diagonal(win, |n| if win.level(n) <= k { ONE } else { ZERO })
    }

    /// Diagonal projection onto levels `>= k`.
    pub fn proj_levels_ge(win: &Arc<TreeWindow>, k: usize) -> Self {
        Op::diagonal(win, |n| if win.level(n) >= k { ONE } else { ZERO })
    }

    pub fn window(&self) -> &Arc<TreeWindow> {
        &self.win
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn entry(&self, t: NodeId, s: NodeId) -> C64 {
        self.mat[(t.0, s.0)]
    }

    pub fn same_window(&self, other: &Op) -> bool {
        self.win.q() == other.win.q() && self.win.depth() == other.win.depth()
    }

    pub fn adjoint(&self) -> Op {
        Op {
            win: Arc::clone(&self.win),
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, a: C64) -> Op {
        Op {
            win: Arc::clone(&self.win),
            mat: &self.mat * a,
        }
    }

    /// Keeps entries with `level(t) - level(s) = n`, zeroes the rest.
    /// Summing over `n` in `-depth..=depth` recovers the operator.
    pub fn band(&self, n: i64) -> Op {
        let levels = self.levels();
        let mut mat = self.mat.clone();
        for t in 0..mat.nrows() {
            for s in 0..mat.ncols() {
                if levels[t] as i64 - levels[s] as i64 != n {
                    mat[(t, s)] = ZERO;
                }
            }
        }
        Op {
            win: Arc::clone(&self.win),
            mat,
        }
    }

    /// Keeps the causal entries (`level(t) >= level(s)`), zeroes the rest.
    pub fn causal_part(&self) -> Op {
        let levels = self.levels();
        let mut mat = self.mat.clone();
        for t in 0..mat.nrows() {
            for s in 0..mat.ncols() {
                if levels[t] < levels[s] {
                    mat[(t, s)] = ZERO;
                }
            }
        }
        Op {
            win: Arc::clone(&self.win),
            mat,
        }
    }

    /// Interior compression `Π S Π` with `Π` the projection onto levels
    /// `<= depth - buffer`.
    pub fn compress(&self, buffer: usize) -> Op {
        assert!(buffer <= self.win.depth(), "buffer exceeds depth");
        let cut = self.win.depth() - buffer;
        let levels = self.levels();
        let mut mat = self.mat.clone();
        for t in 0..mat.nrows() {
            for s in 0..mat.ncols() {
                if levels[t] > cut || levels[s] > cut {
                    mat[(t, s)] = ZERO;
                }
            }
        }
        Op {
            win: Arc::clone(&self.win),
            mat,
        }
    }

    fn levels(&self) -> Vec<usize> {
        self.win.nodes().map(|n| self.win.level(n)).collect()
    }

    /// Largest entry magnitude below the causal mask, i.e. over pairs with
    /// `level(t) < level(s)`.
    pub fn causal_defect(&self) -> f64 {
        let levels = self.levels();
        let mut defect = 0.0f64;
        for t in 0..self.mat.nrows() {
            for s in 0..self.mat.ncols() {
                if levels[t] < levels[s] {
                    defect = defect.max(self.mat[(t, s)].norm());
                }
            }
        }
        defect
    }

    /// Largest entry magnitude off the level-diagonal blocks.
    pub fn constant_defect(&self) -> f64 {
        let levels = self.levels();
        let mut defect = 0.0f64;
        for t in 0..self.mat.nrows() {
            for s in 0..self.mat.ncols() {
                if levels[t] != levels[s] {
                    defect = defect.max(self.mat[(t, s)].norm());
                }
            }
        }
        defect
    }

    /// Largest off-diagonal entry magnitude.
    pub fn diagonal_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for t in 0..self.mat.nrows() {
            for s in 0..self.mat.ncols() {
                if t != s {
                    defect = defect.max(self.mat[(t, s)].norm());
                }
            }
        }
        defect
    }

    pub fn is_causal_tol(&self, tol: f64) -> bool {
        self.causal_defect() <= tol
    }

    /// Exact causality mask check (tolerance zero).
    pub fn is_causal(&self) -> bool {
        self.is_causal_tol(0.0)
    }

    pub fn is_constant_tol(&self, tol: f64) -> bool {
        self.constant_defect() <= tol
    }

    /// Exact level-block-diagonal mask check (tolerance zero).
    pub fn is_constant(&self) -> bool {
        self.is_constant_tol(0.0)
    }

    /// Hilbert–Schmidt pairing `trace(other^* self)`.
    pub fn hs_inner(&self, other: &Op) -> C64 {
        assert!(self.same_window(other), "window mismatch");
        other.mat.dotc(&self.mat)
    }

    pub fn hs_norm_sq(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    /// Operator norm: largest singular value.
    pub fn op_norm(&self) -> f64 {
        linalg::spectral_norm(&self.mat)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn try_inverse(&self, context: &'static str) -> Result<Op> {
        self.mat
            .clone()
            .try_inverse()
            .map(|mat| Op {
                win: Arc::clone(&self.win),
                mat,
            })
            .ok_or(Error::Singular { context })
    }
}

impl Add for &Op {
    type Output = Op;
    fn add(self, rhs: &Op) -> Op {
        assert!(self.same_window(rhs), "window mismatch");
        Op {
            win: Arc::clone(&self.win),
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &Op {
    type Output = Op;
    fn sub(self, rhs: &Op) -> Op {
        assert!(self.same_window(rhs), "window mismatch");
        Op {
            win: Arc::clone(&self.win),
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul for &Op {
    type Output = Op;
    fn mul(self, rhs: &Op) -> Op {
        assert!(self.same_window(rhs), "window mismatch");
        Op {
            win: Arc::clone(&self.win),
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl Neg for &Op {
    type Output = Op;
    fn neg(self) -> Op {
        Op {
            win: Arc::clone(&self.win),
            mat: -&self.mat,
        }
    }
}

/// Operator whose entries vanish off the level-diagonal blocks; the
/// constants of the causal algebra.  Construction enforces the mask
/// exactly: entries below the tolerance are zeroed, larger ones reject.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstOp(Op);

impl ConstOp {
    pub fn try_new(op: Op, tol: f64) -> Result<Self> {
        let defect = op.constant_defect();
        if defect > tol {
            return Err(Error::NotConstant { defect });
        }
        Ok(ConstOp(op.band(0)))
    }

    /// Exact-mask constructor.
    pub fn new(op: Op) -> Result<Self> {
        Self::try_new(op, 0.0)
    }

    pub fn zeros(win: &Arc<TreeWindow>) -> Self {
        ConstOp(Op::zeros(win))
    }

    pub fn identity(win: &Arc<TreeWindow>) -> Self {
        ConstOp(Op::identity(win))
    }

    pub fn op(&self) -> &Op {
        &self.0
    }

    pub fn into_op(self) -> Op {
        self.0
    }

    pub fn adjoint(&self) -> ConstOp {
        ConstOp(self.0.adjoint())
    }
}

impl From<ConstOp> for Op {
    fn from(c: ConstOp) -> Op {
        c.0
    }
}

impl std::ops::Deref for ConstOp {
    type Target = Op;
    fn deref(&self) -> &Op {
        &self.0
    }
}

/// Row tuple `(c_1, ..., c_q)` of constants, the evaluation points of the
/// finite-depth calculus.
#[derive(Clone, Debug)]
pub struct CTuple {
    components: Vec<ConstOp>,
}

impl CTuple {
    pub fn new(components: Vec<ConstOp>) -> Result<Self> {
        assert!(!components.is_empty(), "empty tuple");
        let win = components[0].op().window();
        assert_eq!(components.len(), win.q(), "tuple length must equal q");
        assert!(
            components.iter().all(|c| c.op().same_window(components[0].op())),
            "window mismatch in tuple"
        );
        Ok(CTuple { components })
    }

    pub fn zero(win: &Arc<TreeWindow>) -> Self {
        CTuple {
            components: (0..win.q()).map(|_| ConstOp::zeros(win)).collect(),
        }
    }

    pub fn window(&self) -> &Arc<TreeWindow> {
        self.components[0].op().window()
    }

    pub fn q(&self) -> usize {
        self.components.len()
    }

    /// Component for letter `j` (1-based).
    pub fn component(&self, j: u8) -> &ConstOp {
        &self.components[j as usize - 1]
    }

    pub fn components(&self) -> &[ConstOp] {
        &self.components
    }

    /// The level-lowering operator `sum_j c_j · shift(j)` paired with the
    /// tuple; nilpotent on the window (depth-many applications vanish).
    pub fn weighted_shift(&self) -> Op {
        let win = self.window();
        let mut acc = Op::zeros(win);
        for j in 1..=self.q() as u8 {
            acc = &acc + &(self.component(j).op() * &Op::shift(win, j));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeWindow;

    fn win(q: usize, depth: usize) -> Arc<TreeWindow> {
        Arc::new(TreeWindow::new(q, depth).unwrap())
    }

    fn node(win: &TreeWindow, s: &str) -> NodeId {
        win.node_id(&Word::parse(s, 9).unwrap()).unwrap()
    }

    #[test]
    fn shift_moves_toward_root() {
        let w = win(2, 3);
        let a1 = Op::shift(&w, 1);
        // alpha_1 maps the basis vector at "1" to the root vector.
        let t = node(&w, "1");
        assert_eq!(a1.entry(w.root(), t), ONE);
        // and annihilates the basis vector at "2".
        let s = node(&w, "2");
        for r in w.nodes() {
            assert_eq!(a1.entry(r, s), ZERO);
        }
    }

    #[test]
    fn shift_adjoint_moves_away_from_root() {
        let w = win(2, 3);
        let a1s = Op::shift_adjoint(&w, 1);
        assert_eq!(a1s.entry(node(&w, "1"), w.root()), ONE);
        // zero columns at the deepest level
        for t in w.nodes() {
            for s in w.level_range(w.depth()) {
                assert_eq!(a1s.entry(t, NodeId(s)), ZERO);
            }
        }
    }

    #[test]
    fn word_op_is_product_of_shifts() {
        let w = win(2, 3);
        let word = Word::parse("12", 2).unwrap();
        let direct = Op::word_op(&w, &word);
        let product = &Op::shift(&w, 1) * &Op::shift(&w, 2);
        assert_eq!((&direct - &product).max_abs(), 0.0);
        assert_eq!(Op::word_op(&w, &Word::empty()), Op::identity(&w));
        // maps the basis vector at "12" to the root vector
        assert_eq!(direct.entry(w.root(), node(&w, "12")), ONE);
    }

    #[test]
    fn word_adjoint_appends() {
        let w = win(2, 3);
        for len in 0..=3usize {
            for word in w.words_of_len(len).cloned().collect::<Vec<_>>() {
                let wop = Op::word_op(&w, &word).adjoint();
                for t in w.nodes() {
                    for r in w.nodes() {
                        let expect = match w.append(t, &word) {
                            Some(dst) if dst == r => ONE,
                            _ => ZERO,
                        };
                        assert_eq!(wop.entry(r, t), expect, "w = {word:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_cuntz_relations() {
        for (q, depth) in [(1, 8), (2, 3), (3, 2)] {
            let w = win(q, depth);
            let proj_interior = Op::proj_levels_le(&w, depth - 1);
            for i in 1..=q as u8 {
                for j in 1..=q as u8 {
                    let prod = &Op::shift(&w, i) * &Op::shift_adjoint(&w, j);
                    let expect = if i == j {
                        proj_interior.clone()
                    } else {
                        Op::zeros(&w)
                    };
                    assert_eq!((&prod - &expect).max_abs(), 0.0);
                }
            }
            let mut sum = Op::zeros(&w);
            for j in 1..=q as u8 {
                sum = &sum + &(&Op::shift_adjoint(&w, j) * &Op::shift(&w, j));
            }
            assert_eq!((&sum - &Op::proj_levels_ge(&w, 1)).max_abs(), 0.0);
        }
    }

    #[test]
    fn shift_adjoint_shift_projects_on_last_letter() {
        let w = win(2, 3);
        for j in 1..=2u8 {
            let prod = &Op::shift_adjoint(&w, j) * &Op::shift(&w, j);
            let expect = Op::diagonal(&w, |n| {
                if w.word(n).last() == Some(j) {
                    ONE
                } else {
                    ZERO
                }
            });
            assert_eq!((&prod - &expect).max_abs(), 0.0);
        }
    }

    #[test]
    fn band_partitions_entries() {
        let w = win(2, 2);
        let op = Op::from_fn(&w, |t, s| C64::new((t.0 * 7 + s.0) as f64, s.0 as f64));
        let depth = w.depth() as i64;
        let mut sum = Op::zeros(&w);
        for n in -depth..=depth {
            sum = &sum + &op.band(n);
        }
        assert_eq!((&sum - &op).max_abs(), 0.0);
    }

    #[test]
    fn band_examples() {
        let w = win(2, 2);
        assert_eq!(Op::identity(&w).band(0), Op::identity(&w));
        let a1s = Op::shift_adjoint(&w, 1);
        assert_eq!(a1s.band(1), a1s);
        assert!(a1s.band(0).max_abs() == 0.0);
    }

    #[test]
    fn compress_examples() {
        let w = win(2, 2);
        let s = Op::from_fn(&w, |t, s| C64::new(1.0 + t.0 as f64, s.0 as f64));
        assert_eq!(s.compress(0), s);
        assert_eq!(
            Op::identity(&w).compress(1),
            Op::proj_levels_le(&w, w.depth() - 1)
        );
        // truncated defect of the first Cuntz relation
        let prod = &Op::shift(&w, 1) * &Op::shift_adjoint(&w, 1);
        assert_eq!(prod.compress(0), Op::proj_levels_le(&w, w.depth() - 1));
    }

    #[test]
    fn causal_and_constant_masks() {
        let w = win(2, 2);
        assert!(Op::shift_adjoint(&w, 1).is_causal());
        assert!(!Op::shift(&w, 1).is_causal());
        assert!(Op::identity(&w).is_constant());
        assert!(!Op::shift_adjoint(&w, 1).is_constant());
    }

    #[test]
    fn hs_inner_matrix_units() {
        let w = win(2, 2);
        let e01 = Op::matrix_unit(&w, NodeId(0), NodeId(1));
        let e12 = Op::matrix_unit(&w, NodeId(1), NodeId(2));
        assert_eq!(e01.hs_inner(&e01), ONE);
        assert_eq!(e01.hs_inner(&e12), ZERO);
        // number of unit entries of a shift adjoint = interior node count
        let a1s = Op::shift_adjoint(&w, 1);
        let interior: usize = (0..w.depth()).map(|k| w.level_size(k)).sum();
        assert_eq!(a1s.hs_inner(&a1s), C64::new(interior as f64, 0.0));
    }

    #[test]
    fn op_norm_values() {
        let w = win(2, 2);
        assert!((Op::identity(&w).op_norm() - 1.0).abs() < 1e-12);
        assert_eq!(Op::zeros(&w).op_norm(), 0.0);
        assert!((Op::shift_adjoint(&w, 1).op_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_dominated_by_hs_norm() {
        let w = win(2, 2);
        let op = Op::from_fn(&w, |t, s| {
            C64::new((t.0 as f64 - 1.3).sin(), (s.0 as f64 + 0.7).cos())
        });
        assert!(op.op_norm() <= op.hs_norm() + 1e-12);
    }

    #[test]
    fn adjoint_is_involutive() {
        let w = win(2, 2);
        let op = Op::from_fn(&w, |t, s| C64::new(t.0 as f64, -(s.0 as f64)));
        assert_eq!(op.adjoint().adjoint(), op);
    }

    #[test]
    fn const_op_masks_and_rejects() {
        let w = win(2, 2);
        assert!(ConstOp::new(Op::identity(&w)).is_ok());
        assert!(ConstOp::new(Op::shift_adjoint(&w, 1)).is_err());
        let noisy = &Op::identity(&w) + &Op::matrix_unit(&w, NodeId(3), NodeId(0)).scale(C64::new(1e-14, 0.0));
        let c = ConstOp::try_new(noisy, 1e-12).unwrap();
        assert!(c.op().is_constant());
    }

    #[test]
    fn weighted_shift_lowers_level() {
        let w = win(2, 2);
        let c = CTuple::new(vec![
            ConstOp::identity(&w),
            ConstOp::identity(&w),
        ])
        .unwrap();
        let ws = c.weighted_shift();
        // strictly lowers level: everything lives on band -1
        assert_eq!((&ws - &ws.band(-1)).max_abs(), 0.0);
        let mut power = Op::identity(&w);
        for _ in 0..=w.depth() {
            power = &power * &ws;
        }
        assert_eq!(power.max_abs(), 0.0);
    }
}
