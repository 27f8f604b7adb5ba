//! Schur multipliers and their state-space model: the positive kernel, the
//! defect space built from `I - M_S M_S^*`, the coisometric colligation
//! acting on it, and the transfer recursion that computes multiplication
//! coefficient by coefficient.
//!
//! The defect super-operator is materialized over the vectorized causal
//! entry positions; its eigenbasis (eigenvalues clipped at
//! [`crate::tol::EIG_CLIP`]) carries the state-space inner product
//! `<x, y> = sum x_i conj(y_i) / lambda_i`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::eval::{point_eval, EvalPoint};
use crate::linalg;
use crate::op::{C64, ConstOp, Op, ZERO};
use crate::series::{causal_reconstruct, CausalSeries};
use crate::tol;
use crate::tree::{NodeId, TreeWindow, Word};

/// Causal contraction check: exact causal mask and operator norm at most
/// `1 + SCHUR_SLACK`.
pub fn is_schur_multiplier(s: &Op) -> bool {
    s.is_causal() && s.op_norm() <= 1.0 + tol::SCHUR_SLACK
}

fn require_schur(s: &Op) -> Result<()> {
    if !s.is_causal() {
        return Err(Error::NotCausal {
            defect: s.causal_defect(),
        });
    }
    let norm = s.op_norm();
    if norm > 1.0 + tol::SCHUR_SLACK {
        return Err(Error::NotSchur { norm });
    }
    Ok(())
}

/// The kernel of a multiplier at a pair of points:
/// `sum_n (cα)^n (I - S^(c) S^(d)^*) (dα)^{n*}`, a constant, Hermitian
/// when both points coincide.
pub fn schur_kernel(s: &Op, c: &EvalPoint, d: &EvalPoint) -> Result<ConstOp> {
    require_schur(s)?;
    schur_kernel_unchecked(s, c, d)
}

pub(crate) fn schur_kernel_unchecked(s: &Op, c: &EvalPoint, d: &EvalPoint) -> Result<ConstOp> {
    let win = s.window();
    let sc = point_eval(s, c)?;
    let sd = point_eval(s, d)?;
    let middle = &Op::identity(win) - &(sc.op() * &sd.op().adjoint());
    let mut acc = Op::zeros(win);
    for n in 0..=win.depth() {
        acc = &acc + &(&(&c.power(n) * &middle) * &d.power(n).adjoint());
    }
    ConstOp::new(acc)
}

/// The kernel element `K_S^d k = (I - S S^(d)^*) K^d k` of the state space.
pub fn kernel_element(s: &Op, d: &EvalPoint, k: &ConstOp) -> Result<Op> {
    let win = s.window();
    let sd = point_eval(s, d)?;
    let factor = &Op::identity(win) - &(s * &sd.op().adjoint());
    Ok(&factor * &(&crate::eval::cauchy_kernel(d) * k.op()))
}

/// Gram matrix `G[i][j] = <K_s(c_i, c_j) k_j, k_i>` of kernel sections.
pub fn kernel_gram(s: &Op, points: &[EvalPoint], ks: &[ConstOp]) -> Result<DMatrix<C64>> {
    assert_eq!(points.len(), ks.len(), "points/sections length mismatch");
    let m = points.len();
    let mut gram = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let kernel = schur_kernel_unchecked(s, &points[i], &points[j])?;
            gram[(i, j)] = (&(kernel.op() * ks[j].op())).hs_inner(ks[i].op());
        }
    }
    Ok(gram)
}

/// Minimum eigenvalue of the kernel Gram matrix; nonnegative (up to the
/// Gram floor) exactly for genuine multipliers.
pub fn kernel_gram_min_eig(s: &Op, points: &[EvalPoint], ks: &[ConstOp]) -> Result<f64> {
    let gram = kernel_gram(s, points, ks)?;
    let sym = (&gram + gram.adjoint()).scale(0.5);
    Ok(linalg::min_eigenvalue(&sym))
}

/// The state space of a multiplier: range of the defect operator
/// `B_S = I - M_S M_S^*` over vectorized causal entries, with the lifted
/// inner product.
#[derive(Clone, Debug)]
pub struct DbrSpace {
    s: Op,
    /// Causal `(row, col)` index pairs in a fixed order.
    positions: Vec<(usize, usize)>,
    /// Level-diagonal `(row, col)` pairs: the constant coordinates.
    const_positions: Vec<(usize, usize)>,
    /// Defect eigenvalues, descending, clipped below `EIG_CLIP` to zero.
    eigvals: Vec<f64>,
    /// Matching eigenvectors as columns.
    eigvecs: DMatrix<C64>,
    /// Number of nonzero (post-clip) eigenvalues.
    rank: usize,
}

fn causal_positions(win: &TreeWindow) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let n = win.node_count();
    let levels: Vec<usize> = (0..n).map(|i| win.level_of_index(i)).collect();
    let mut causal = Vec::new();
    let mut consts = Vec::new();
    for col in 0..n {
        for row in 0..n {
            if levels[row] >= levels[col] {
                causal.push((row, col));
                if levels[row] == levels[col] {
                    consts.push((row, col));
                }
            }
        }
    }
    (causal, consts)
}

/// Super-matrix of left multiplication by a causal operator on the
/// vectorized causal coordinates.  Block diagonal over the output column:
/// position `(r, c)` receives `S[r][t]` from position `(t, c)`.
fn mult_supermatrix(s: &Op, positions: &[(usize, usize)]) -> DMatrix<C64> {
    let dim = positions.len();
    let n = s.window().node_count();
    let mut by_column: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &(_, c)) in positions.iter().enumerate() {
        by_column[c].push(k);
    }
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..n {
        for &k_in in &by_column[col] {
            let (t_in, _) = positions[k_in];
            for &k_out in &by_column[col] {
                let (r_out, _) = positions[k_out];
                let val = s.matrix()[(r_out, t_in)];
                if val != ZERO {
                    m[(k_out, k_in)] = val;
                }
            }
        }
    }
    m
}

/// Operator norm of the multiplication operator `F -> S F` on causal
/// Hilbert–Schmidt matrices.
pub fn multiplication_norm(s: &Op) -> Result<f64> {
    if !s.is_causal() {
        return Err(Error::NotCausal {
            defect: s.causal_defect(),
        });
    }
    let (positions, _) = causal_positions(s.window());
    Ok(linalg::spectral_norm(&mult_supermatrix(s, &positions)))
}

impl DbrSpace {
    pub fn new(s: Op) -> Result<Self> {
        require_schur(&s)?;
        let (positions, const_positions) = causal_positions(s.window());
        let dim = positions.len();
        let m = mult_supermatrix(&s, &positions);
        let mut b = DMatrix::<C64>::identity(dim, dim) - &m * m.adjoint();
        b = (b.clone() + b.adjoint()).scale(0.5);
        let (vals, vecs) = linalg::hermitian_eigen(&b);
        let min_eig = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -tol::EIG_CLIP {
            return Err(Error::IndefiniteDefect { min_eig });
        }
        let eigvals: Vec<f64> = vals
            .iter()
            .map(|&v| if v > tol::EIG_CLIP { v } else { 0.0 })
            .collect();
        let rank = eigvals.iter().filter(|&&v| v > 0.0).count();
        Ok(DbrSpace {
            s,
            positions,
            const_positions,
            eigvals,
            eigvecs: vecs,
            rank,
        })
    }

    pub fn multiplier(&self) -> &Op {
        &self.s
    }

    pub fn window(&self) -> &Arc<TreeWindow> {
        self.s.window()
    }

    /// Dimension of the vectorized causal coordinate space.
    pub fn ambient_dim(&self) -> usize {
        self.positions.len()
    }

    /// Dimension of the constant coordinate space.
    pub fn const_dim(&self) -> usize {
        self.const_positions.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    /// Vectorizes a causal operator over the causal positions.  The
    /// operator must satisfy the causal mask exactly.
    pub fn vectorize(&self, f: &Op) -> DVector<C64> {
        debug_assert_eq!(f.causal_defect(), 0.0, "vectorizing a non-causal operator");
        DVector::from_iterator(
            self.positions.len(),
            self.positions.iter().map(|&(r, c)| f.matrix()[(r, c)]),
        )
    }

    pub fn unvectorize(&self, v: &DVector<C64>) -> Op {
        let win = self.window();
        let n = win.node_count();
        let mut mat = DMatrix::zeros(n, n);
        for (k, &(r, c)) in self.positions.iter().enumerate() {
            mat[(r, c)] = v[k];
        }
        Op::from_matrix(win, mat)
    }

    pub fn vectorize_const(&self, k: &ConstOp) -> DVector<C64> {
        DVector::from_iterator(
            self.const_positions.len(),
            self.const_positions.iter().map(|&(r, c)| k.op().matrix()[(r, c)]),
        )
    }

    pub fn unvectorize_const(&self, v: &DVector<C64>) -> ConstOp {
        let win = self.window();
        let n = win.node_count();
        let mut mat = DMatrix::zeros(n, n);
        for (k, &(r, c)) in self.const_positions.iter().enumerate() {
            mat[(r, c)] = v[k];
        }
        ConstOp::new(Op::from_matrix(win, mat)).expect("constant positions form a constant")
    }

    /// Coordinates against the defect eigenbasis (all modes).
    fn eig_coords(&self, f: &Op) -> DVector<C64> {
        self.eigvecs.adjoint() * self.vectorize(f)
    }

    /// Coordinates of a state-space element in the orthonormal basis
    /// `h_i = sqrt(lambda_i) v_i`.
    pub fn onb_coords(&self, f: &Op) -> DVector<C64> {
        let x = self.eig_coords(f);
        DVector::from_iterator(
            self.rank,
            (0..self.rank).map(|i| x[i] / C64::new(self.eigvals[i].sqrt(), 0.0)),
        )
    }

    pub fn from_onb_coords(&self, x: &DVector<C64>) -> Op {
        assert_eq!(x.len(), self.rank);
        let mut v = DVector::zeros(self.positions.len());
        for i in 0..self.rank {
            let scale = C64::new(self.eigvals[i].sqrt(), 0.0);
            v += self.eigvecs.column(i) * (x[i] * scale);
        }
        self.unvectorize(&v)
    }

    /// The `i`-th orthonormal basis element of the state space.
    pub fn onb_element(&self, i: usize) -> Op {
        assert!(i < self.rank);
        let scale = C64::new(self.eigvals[i].sqrt(), 0.0);
        let v = self.eigvecs.column(i) * scale;
        self.unvectorize(&DVector::from_column_slice(v.as_slice()))
    }

    /// Norm of the components of `f` on the kernel of the defect operator;
    /// zero exactly when `f` lies in the state space.
    pub fn membership_residual(&self, f: &Op) -> f64 {
        let x = self.eig_coords(f);
        (self.rank..self.eigvals.len())
            .map(|i| x[i].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// State-space inner product of two members.
    pub fn inner(&self, f: &Op, g: &Op) -> C64 {
        let x = self.eig_coords(f);
        let y = self.eig_coords(g);
        let mut acc = ZERO;
        for i in 0..self.rank {
            acc += x[i] * y[i].conj() / C64::new(self.eigvals[i], 0.0);
        }
        acc
    }
}

/// The concrete colligation of a multiplier on its state space:
/// backward shifts, input maps, constant-term output and feedthrough.
#[derive(Clone, Debug)]
pub struct Realization {
    dbr: DbrSpace,
    s0: Op,
}

impl Realization {
    pub fn new(s: Op) -> Result<Self> {
        let dbr = DbrSpace::new(s)?;
        let s0 = dbr.multiplier().band(0);
        let realization = Realization { dbr, s0 };
        let win = Arc::clone(realization.window());
        for j in 1..=win.q() as u8 {
            let residual = realization.invariance_residual(j);
            if residual > tol::REALIZATION {
                return Err(Error::NotInvariant { residual });
            }
        }
        Ok(realization)
    }

    pub fn multiplier(&self) -> &Op {
        self.dbr.multiplier()
    }

    pub fn state_space(&self) -> &DbrSpace {
        &self.dbr
    }

    pub fn window(&self) -> &Arc<TreeWindow> {
        self.dbr.window()
    }

    /// `A_j F = (F - F^(0)) α_j`.
    pub fn backward(&self, j: u8, f: &Op) -> Op {
        crate::eval::backward_shift_unchecked(f, j)
    }

    /// `B_j d = (S - S^(0)) d α_j`.
    pub fn input_map(&self, j: u8, d: &ConstOp) -> Op {
        let win = self.window();
        &(&(self.multiplier() - &self.s0) * d.op()) * &Op::shift(win, j)
    }

    /// `C F = F^(0)`.
    pub fn output_map(&self, f: &Op) -> ConstOp {
        ConstOp::new(f.band(0)).expect("band zero is constant")
    }

    /// `D d = S^(0) d`.
    pub fn feedthrough(&self, d: &ConstOp) -> ConstOp {
        ConstOp::new(&self.s0 * d.op()).expect("product of constants is constant")
    }

    /// Worst kernel-component residual of the images of the state-space
    /// basis under `A_j` and of the constants under `B_j`.
    pub fn invariance_residual(&self, j: u8) -> f64 {
        let mut residual = 0.0f64;
        for i in 0..self.dbr.rank() {
            let h = self.dbr.onb_element(i);
            residual = residual.max(self.dbr.membership_residual(&self.backward(j, &h)));
        }
        for m in 0..self.dbr.const_dim() {
            let e = self.const_basis(m);
            residual = residual.max(self.dbr.membership_residual(&self.input_map(j, &e)));
        }
        residual
    }

    fn const_basis(&self, m: usize) -> ConstOp {
        let mut v = DVector::zeros(self.dbr.const_dim());
        v[m] = crate::op::ONE;
        self.dbr.unvectorize_const(&v)
    }

    /// The colligation matrix `V_j = [[A_j, B_j], [C, D]]` in the
    /// orthonormal coordinates of the state space and the constants.
    pub fn colligation(&self, j: u8) -> DMatrix<C64> {
        let r = self.dbr.rank();
        let dc = self.dbr.const_dim();
        let mut v = DMatrix::zeros(r + dc, r + dc);
        for i in 0..r {
            let h = self.dbr.onb_element(i);
            let a = self.backward(j, &h);
            let a_coords = self.dbr.onb_coords(&a);
            let c_coords = self.dbr.vectorize_const(&self.output_map(&h));
            for k in 0..r {
                v[(k, i)] = a_coords[k];
            }
            for m in 0..dc {
                v[(r + m, i)] = c_coords[m];
            }
        }
        for m_in in 0..dc {
            let e = self.const_basis(m_in);
            let b = self.input_map(j, &e);
            let b_coords = self.dbr.onb_coords(&b);
            let d_coords = self.dbr.vectorize_const(&self.feedthrough(&e));
            for k in 0..r {
                v[(k, r + m_in)] = b_coords[k];
            }
            for m in 0..dc {
                v[(r + m, r + m_in)] = d_coords[m];
            }
        }
        v
    }

    /// Right multiplication by `α_j^* α_j` on the state space, in the
    /// orthonormal coordinates; the expected upper-left block of
    /// `V_j V_j^*`.
    fn right_mult_block(&self, j: u8) -> DMatrix<C64> {
        let win = self.window();
        let proj = &Op::shift_adjoint(win, j) * &Op::shift(win, j);
        let r = self.dbr.rank();
        let mut m = DMatrix::zeros(r, r);
        for i in 0..r {
            let h = self.dbr.onb_element(i);
            let coords = self.dbr.onb_coords(&(&h * &proj));
            for k in 0..r {
                m[(k, i)] = coords[k];
            }
        }
        m
    }

    /// Spectral-norm defect of the coisometry relation
    /// `V_j V_j^* = diag(right multiplication by α_j^* α_j, identity)`.
    pub fn coisometry_defect(&self, j: u8) -> f64 {
        let v = self.colligation(j);
        let r = self.dbr.rank();
        let dc = self.dbr.const_dim();
        let mut target = DMatrix::<C64>::zeros(r + dc, r + dc);
        target.view_mut((0, 0), (r, r)).copy_from(&self.right_mult_block(j));
        for m in 0..dc {
            target[(r + m, r + m)] = crate::op::ONE;
        }
        let defect = &v * v.adjoint() - target;
        linalg::spectral_norm(&defect)
    }

    /// Series coefficient through the colligation: applies
    /// `d -> word_op(w) (C A^v B_j d) word_op(v)^* shift(j)^*`, which must
    /// agree with `S_{[w]} d` for every path `(v, j)` with `|w| = |v| + 1`.
    /// With `w` empty this is the feedthrough.
    pub fn coeff_apply(&self, w: &Word, v: &Word, j: u8, d: &ConstOp) -> Result<ConstOp> {
        let win = self.window();
        if w.is_empty() {
            return Ok(self.feedthrough(d));
        }
        if w.len() != v.len() + 1 {
            return Err(Error::WordLengthMismatch {
                lhs: v.encode(win.q()),
                lhs_len: v.len(),
                expected: w.len() - 1,
            });
        }
        let mut state = self.input_map(j, d);
        for &letter in v.letters() {
            state = self.backward(letter, &state);
        }
        let core = self.output_map(&state);
        let out = &(&(&Op::word_op(win, w) * core.op()) * &Op::word_op(win, v).adjoint())
            * &Op::shift_adjoint(win, j);
        ConstOp::new(out)
    }

    /// The coefficient itself, read off by applying the map to the
    /// identity constant.
    pub fn coeff_constant(&self, w: &Word, v: &Word, j: u8) -> Result<ConstOp> {
        self.coeff_apply(w, v, j, &ConstOp::identity(self.window()))
    }

    /// Evaluation through the colligation along the letter-1 path:
    /// `E_c F = sum_n (cα)^n (C A_1^n F) α_1^{n*}`; equal to the point
    /// evaluation for realizations built here.
    pub fn eval_apply(&self, at: &EvalPoint, f: &Op) -> ConstOp {
        let win = self.window();
        let a1_adj = Op::shift_adjoint(win, 1);
        let mut acc = Op::zeros(win);
        let mut state = f.clone();
        let mut raiser = Op::identity(win);
        for n in 0..=win.depth() {
            let term = &(&at.power(n) * self.output_map(&state).op()) * &raiser;
            acc = &acc + &term;
            state = self.backward(1, &state);
            raiser = &raiser * &a1_adj;
        }
        ConstOp::new(acc).expect("evaluation terms are band zero")
    }

    /// Matrix of `E_c` from orthonormal state coordinates to constant
    /// coordinates.
    pub fn eval_matrix(&self, at: &EvalPoint) -> DMatrix<C64> {
        let r = self.dbr.rank();
        let dc = self.dbr.const_dim();
        let mut m = DMatrix::zeros(dc, r);
        for i in 0..r {
            let h = self.dbr.onb_element(i);
            let coords = self.dbr.vectorize_const(&self.eval_apply(at, &h));
            for k in 0..dc {
                m[(k, i)] = coords[k];
            }
        }
        m
    }

    /// `E_c E_d^* k`, the kernel evaluated through the colligation.
    pub fn kernel_eval_via_states(&self, c: &EvalPoint, d: &EvalPoint, k: &ConstOp) -> ConstOp {
        let ed = self.eval_matrix(d);
        let coords = ed.adjoint() * self.dbr.vectorize_const(k);
        let element = self.dbr.from_onb_coords(&coords);
        self.eval_apply(c, &element)
    }
}

/// Output of the transfer recursion: the coefficient signal of `S·U` and
/// the measured defect of path independence.
#[derive(Clone, Debug)]
pub struct TransferOutput {
    pub series: CausalSeries,
    pub path_defect: f64,
}

/// Runs the multiscale input-state-output recursion over all window words
/// in level order: `X_∅ = 0`, `X_{w·j} = A_j X_w + B_j U_w`,
/// `Y_{[w]} = word_op(w) (C X_w + D U_w) word_op(w)^*`, with
/// `U_w = band0(U · word_op(w))`.  One alternate coefficient path per
/// level is cross-checked; an inconsistency beyond the pinned tolerance is
/// an error.
pub fn transfer_simulate(r: &Realization, u: &CausalSeries) -> Result<TransferOutput> {
    let win = Arc::clone(r.window());
    let u_mat = causal_reconstruct(u);
    let n = win.node_count();

    // U_w per window word, indexed by node id
    let mut u_w: Vec<ConstOp> = Vec::with_capacity(n);
    for node in win.nodes() {
        let w = win.word(node).clone();
        let projected = (&u_mat * &Op::word_op(&win, &w)).band(0);
        u_w.push(ConstOp::new(projected).expect("band zero is constant"));
    }

    // states X_w by node id, filled in level order
    let mut states: Vec<Op> = vec![Op::zeros(&win); n];
    for node in win.nodes() {
        if win.level(node) < win.depth() {
            for j in 1..=win.q() as u8 {
                let child = win.child(node, j).expect("interior node has children");
                let moved = r.backward(j, &states[node.index()]);
                let driven = r.input_map(j, &u_w[node.index()]);
                states[child.index()] = &moved + &driven;
            }
        }
    }

    let output_coeff = |w_node: NodeId, v_node: NodeId| -> ConstOp {
        let w = win.word(w_node);
        let v = win.word(v_node);
        let inner = &r.output_map(&states[v_node.index()]).into_op()
            + &r.feedthrough(&u_w[v_node.index()]).into_op();
        let out = &(&Op::word_op(&win, w) * &inner) * &Op::word_op(&win, v).adjoint();
        ConstOp::new(out).expect("recursion output is band zero")
    };

    let mut series = CausalSeries::empty(&win);
    let mut path_defect = 0.0f64;
    for node in win.nodes() {
        let y = output_coeff(node, node);
        series.insert(win.word(node).clone(), y.clone())?;
        // one alternate path per level, at the first word of the level
        let level = win.level(node);
        if level >= 1 && node.index() == win.level_start(level) && win.q() >= 2 {
            let alt_word = Word::from_letters(
                &win.word(node)
                    .letters()
                    .iter()
                    .map(|&l| (l % win.q() as u8) + 1)
                    .collect::<Vec<_>>(),
            );
            let alt_node = win.node_id(&alt_word).expect("alternate stays in window");
            let y_alt = output_coeff(node, alt_node);
            path_defect = path_defect.max((y.op() - y_alt.op()).max_abs());
        }
    }
    if path_defect > tol::TRANSFER_PATH {
        return Err(Error::PathInconsistent {
            defect: path_defect,
        });
    }
    Ok(TransferOutput {
        series,
        path_defect,
    })
}
