//! The kernel-at-a-point operators, the Blaschke factor built from them,
//! and factorization of causal Hilbert–Schmidt operators whose point
//! evaluation vanishes.
//!
//! The factor maps the `q`-fold copy of the window space into the window
//! space; identities that consume one layer of the truncated shift
//! relations are checked under buffer-1 interior compression, the full
//! factorization round-trip under buffer-2.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::eval::{cauchy_kernel, point_eval, EvalPoint};
use crate::linalg;
use crate::op::{C64, ConstOp, Op, ZERO};
use crate::tol;
use crate::tree::TreeWindow;

/// Block matrix over copies of the window space: `brows x bcols` blocks of
/// `N x N` complex matrices.
#[derive(Clone, Debug)]
pub struct BlockOp {
    win: Arc<TreeWindow>,
    brows: usize,
    bcols: usize,
    mat: DMatrix<C64>,
}

impl BlockOp {
    pub fn zeros(win: &Arc<TreeWindow>, brows: usize, bcols: usize) -> Self {
        let n = win.node_count();
        BlockOp {
            win: Arc::clone(win),
            brows,
            bcols,
            mat: DMatrix::zeros(brows * n, bcols * n),
        }
    }

    pub fn identity(win: &Arc<TreeWindow>, blocks: usize) -> Self {
        let n = win.node_count();
        BlockOp {
            win: Arc::clone(win),
            brows: blocks,
            bcols: blocks,
            mat: DMatrix::identity(blocks * n, blocks * n),
        }
    }

    pub fn from_op(op: &Op) -> Self {
        BlockOp {
            win: Arc::clone(op.window()),
            brows: 1,
            bcols: 1,
            mat: op.matrix().clone(),
        }
    }

    /// Stacks blocks row-major into a `brows x bcols` block matrix.
    pub fn from_blocks(win: &Arc<TreeWindow>, brows: usize, bcols: usize, blocks: &[Op]) -> Self {
        assert_eq!(blocks.len(), brows * bcols);
        let n = win.node_count();
        let mut mat = DMatrix::zeros(brows * n, bcols * n);
        for i in 0..brows {
            for j in 0..bcols {
                mat.view_mut((i * n, j * n), (n, n))
                    .copy_from(blocks[i * bcols + j].matrix());
            }
        }
        BlockOp {
            win: Arc::clone(win),
            brows,
            bcols,
            mat,
        }
    }

    /// The column of primitive shifts `(α_1; …; α_q)`.
    pub fn shift_column(win: &Arc<TreeWindow>) -> Self {
        let blocks: Vec<Op> = (1..=win.q() as u8).map(|j| Op::shift(win, j)).collect();
        BlockOp::from_blocks(win, win.q(), 1, &blocks)
    }

    /// The row `(c_1 … c_q)` of a constant tuple.
    pub fn tuple_row(c: &crate::op::CTuple) -> Self {
        let blocks: Vec<Op> = c.components().iter().map(|k| k.op().clone()).collect();
        BlockOp::from_blocks(c.window(), 1, c.q(), &blocks)
    }

    pub fn window(&self) -> &Arc<TreeWindow> {
        &self.win
    }

    pub fn block_rows(&self) -> usize {
        self.brows
    }

    pub fn block_cols(&self) -> usize {
        self.bcols
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn block(&self, i: usize, j: usize) -> Op {
        let n = self.win.node_count();
        let view = self.mat.view((i * n, j * n), (n, n));
        Op::from_matrix(&self.win, view.into_owned())
    }

    pub fn adjoint(&self) -> BlockOp {
        BlockOp {
            win: Arc::clone(&self.win),
            brows: self.bcols,
            bcols: self.brows,
            mat: self.mat.adjoint(),
        }
    }

    pub fn mul(&self, rhs: &BlockOp) -> BlockOp {
        assert_eq!(self.bcols, rhs.brows, "block shape mismatch");
        BlockOp {
            win: Arc::clone(&self.win),
            brows: self.brows,
            bcols: rhs.bcols,
            mat: &self.mat * &rhs.mat,
        }
    }

    pub fn add(&self, rhs: &BlockOp) -> BlockOp {
        assert_eq!((self.brows, self.bcols), (rhs.brows, rhs.bcols));
        BlockOp {
            win: Arc::clone(&self.win),
            brows: self.brows,
            bcols: self.bcols,
            mat: &self.mat + &rhs.mat,
        }
    }

    pub fn sub(&self, rhs: &BlockOp) -> BlockOp {
        assert_eq!((self.brows, self.bcols), (rhs.brows, rhs.bcols));
        BlockOp {
            win: Arc::clone(&self.win),
            brows: self.brows,
            bcols: self.bcols,
            mat: &self.mat - &rhs.mat,
        }
    }

    /// Blockwise interior compression: projects every block onto levels
    /// `<= depth - buffer` on both sides.
    pub fn compress(&self, buffer: usize) -> BlockOp {
        let cut = self.win.depth() - buffer;
        let n = self.win.node_count();
        let levels: Vec<usize> = (0..n).map(|i| self.win.level_of_index(i)).collect();
        let mut mat = self.mat.clone();
        for r in 0..mat.nrows() {
            for c in 0..mat.ncols() {
                if levels[r % n] > cut || levels[c % n] > cut {
                    mat[(r, c)] = ZERO;
                }
            }
        }
        BlockOp {
            win: Arc::clone(&self.win),
            brows: self.brows,
            bcols: self.bcols,
            mat,
        }
    }

    pub fn op_norm(&self) -> f64 {
        linalg::spectral_norm(&self.mat)
    }

    pub fn hs_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Worst causal-mask defect over all blocks.
    pub fn block_causal_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for i in 0..self.brows {
            for j in 0..self.bcols {
                defect = defect.max(self.block(i, j).causal_defect());
            }
        }
        defect
    }

    /// Worst constant-mask defect over all blocks.
    pub fn block_constant_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for i in 0..self.brows {
            for j in 0..self.bcols {
                defect = defect.max(self.block(i, j).constant_defect());
            }
        }
        defect
    }

    /// Zeroes entries off the blockwise level-diagonal mask.
    fn constant_masked(&self) -> BlockOp {
        let n = self.win.node_count();
        let levels: Vec<usize> = (0..n).map(|i| self.win.level_of_index(i)).collect();
        let mut mat = self.mat.clone();
        for r in 0..mat.nrows() {
            for c in 0..mat.ncols() {
                if levels[r % n] != levels[c % n] {
                    mat[(r, c)] = ZERO;
                }
            }
        }
        BlockOp {
            win: Arc::clone(&self.win),
            brows: self.brows,
            bcols: self.bcols,
            mat,
        }
    }

    /// Geometric series `sum_{n=0}^{depth} M^n` of a nilpotent block
    /// matrix; the inverse of `I - M` when every block of `M` moves the
    /// level strictly in one direction.
    pub fn neumann_inverse(&self) -> BlockOp {
        assert_eq!(self.brows, self.bcols, "square block matrix required");
        let mut acc = BlockOp::identity(&self.win, self.brows);
        let mut power = BlockOp::identity(&self.win, self.brows);
        for _ in 1..=self.win.depth() {
            power = power.mul(self);
            acc = acc.add(&power);
        }
        acc
    }

    /// Eigenvalues of a blockwise-constant Hermitian matrix, computed per
    /// level sector (descending within the concatenation).
    pub fn levelwise_eigenvalues(&self) -> Vec<f64> {
        self.level_sectors()
            .iter()
            .flat_map(|sector| linalg::hermitian_eigenvalues(sector))
            .collect()
    }

    /// PSD square root of a blockwise-constant Hermitian matrix, computed
    /// per level sector.  Returns the root and the magnitude of the most
    /// negative eigenvalue encountered (roundoff when small).
    pub fn levelwise_psd_sqrt(&self, clip: f64) -> (BlockOp, f64) {
        self.levelwise_psd_power(clip, |l| l.sqrt())
    }

    /// Square root of the pseudo-inverse, per level sector.
    pub fn levelwise_pinv_sqrt(&self, clip: f64) -> (BlockOp, f64) {
        self.levelwise_psd_power(clip, |l| 1.0 / l.sqrt())
    }

    fn levelwise_psd_power(&self, clip: f64, f: impl Fn(f64) -> f64) -> (BlockOp, f64) {
        assert_eq!(self.brows, self.bcols);
        let n = self.win.node_count();
        let b = self.brows;
        let mut out = DMatrix::zeros(b * n, b * n);
        let mut worst = 0.0f64;
        for level in 0..=self.win.depth() {
            let idx = self.sector_indices(level);
            let sector = self.extract_sector(&idx);
            let (vals, vecs) = linalg::hermitian_eigen(&sector);
            worst = worst.max(-vals.iter().copied().fold(0.0f64, f64::min));
            let dim = idx.len();
            let mut diag = DMatrix::zeros(dim, dim);
            for (i, &lambda) in vals.iter().enumerate() {
                if lambda > clip {
                    diag[(i, i)] = C64::new(f(lambda), 0.0);
                }
            }
            let root = &vecs * diag * vecs.adjoint();
            for (a, &ra) in idx.iter().enumerate() {
                for (bb, &cb) in idx.iter().enumerate() {
                    out[(ra, cb)] = root[(a, bb)];
                }
            }
        }
        (
            BlockOp {
                win: Arc::clone(&self.win),
                brows: b,
                bcols: b,
                mat: out,
            },
            worst,
        )
    }

    /// Raw indices of one level sector across all blocks.
    fn sector_indices(&self, level: usize) -> Vec<usize> {
        let n = self.win.node_count();
        let range = self.win.level_range(level);
        let mut idx = Vec::with_capacity(self.brows * range.len());
        for b in 0..self.brows {
            idx.extend(range.clone().map(|i| b * n + i));
        }
        idx
    }

    fn extract_sector(&self, idx: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.mat[(idx[a], idx[b])])
    }

    fn level_sectors(&self) -> Vec<DMatrix<C64>> {
        (0..=self.win.depth())
            .map(|level| self.extract_sector(&self.sector_indices(level)))
            .collect()
    }
}

/// The kernel evaluated at its own point: `sum_n (cα)^n (α^* c^*)^n`,
/// Hermitian with spectrum bounded below by one.
pub fn kernel_at_point(at: &EvalPoint) -> ConstOp {
    let win = at.window();
    let mut acc = Op::zeros(win);
    for n in 0..=win.depth() {
        let p = at.power(n);
        acc = &acc + &(&p * &p.adjoint());
    }
    ConstOp::new(acc).expect("level-preserving sum of lower/raise pairs")
}

/// Levelwise inverse of a constant operator.
pub fn invert_constant(c: &ConstOp, context: &'static str) -> Result<ConstOp> {
    let win = c.op().window();
    let n = win.node_count();
    let mut out = DMatrix::zeros(n, n);
    for level in 0..=win.depth() {
        let range = win.level_range(level);
        let dim = range.len();
        let start = range.start;
        let sector = DMatrix::from_fn(dim, dim, |a, b| c.op().matrix()[(start + a, start + b)]);
        let inv = sector
            .try_inverse()
            .ok_or(Error::Singular { context })?;
        for a in 0..dim {
            for b in 0..dim {
                out[(start + a, start + b)] = inv[(a, b)];
            }
        }
    }
    ConstOp::new(Op::from_matrix(win, out))
}

/// The paired operator `L_c = α (R_c - R_c α^* c^* R_c^{-1} c α R_c) α^*`,
/// a PSD blockwise-constant matrix on the `q`-fold space, singular exactly
/// on the deepest-level components.
pub fn paired_gram(at: &EvalPoint) -> Result<BlockOp> {
    let win = at.window();
    let r = kernel_at_point(at);
    let r_inv = invert_constant(&r, "kernel-at-point operator")?;
    let lowering = at.power(1);
    let raising = lowering.adjoint();
    let inner = r.op()
        - &(&(&(&(r.op() * &raising) * r_inv.op()) * &lowering) * r.op());
    let alpha = BlockOp::shift_column(win);
    let l = alpha.mul(&BlockOp::from_op(&inner)).mul(&alpha.adjoint());
    Ok(l.constant_masked())
}

/// All data attached to a point needed for Blaschke factorization.
#[derive(Clone, Debug)]
pub struct BlaschkeData {
    at: EvalPoint,
    r: ConstOp,
    r_inv: ConstOp,
    l: BlockOp,
    sqrt_l: BlockOp,
    sqrt_l_pinv: BlockOp,
    factor: BlockOp,
}

impl BlaschkeData {
    pub fn new(c: crate::op::CTuple) -> Result<Self> {
        let at = EvalPoint::new(c);
        let win = Arc::clone(at.window());
        let r = kernel_at_point(&at);
        let r_inv = invert_constant(&r, "kernel-at-point operator")?;
        let l = paired_gram(&at)?;
        let (sqrt_l, neg) = l.levelwise_psd_sqrt(tol::EIG_CLIP);
        if neg > tol::EIG_CLIP {
            return Err(Error::IndefiniteDefect { min_eig: -neg });
        }
        let (sqrt_l_pinv, _) = l.levelwise_pinv_sqrt(tol::EIG_CLIP);

        let alpha = BlockOp::shift_column(&win);
        let c_row = BlockOp::tuple_row(at.tuple());
        // (α^* - c)(I - L c^* α^*)^{-1} sqrt(L)
        let raising_block = l.mul(&c_row.adjoint()).mul(&alpha.adjoint());
        let inv = raising_block.neumann_inverse();
        let factor = alpha
            .adjoint()
            .sub(&c_row)
            .mul(&inv)
            .mul(&sqrt_l);
        Ok(BlaschkeData {
            at,
            r,
            r_inv,
            l,
            sqrt_l,
            sqrt_l_pinv,
            factor,
        })
    }

    pub fn point(&self) -> &EvalPoint {
        &self.at
    }

    pub fn window(&self) -> &Arc<TreeWindow> {
        self.at.window()
    }

    /// `R_c`, the kernel evaluated at its own point.
    pub fn kernel_gram(&self) -> &ConstOp {
        &self.r
    }

    pub fn kernel_gram_inverse(&self) -> &ConstOp {
        &self.r_inv
    }

    /// `L_c` on the `q`-fold space.
    pub fn paired_gram(&self) -> &BlockOp {
        &self.l
    }

    /// The Blaschke factor, a `1 x q` block row mapping the `q`-fold space
    /// into the window space; every block is causal.
    pub fn factor(&self) -> &BlockOp {
        &self.factor
    }

    pub fn kernel_gram_spectrum(&self) -> Vec<f64> {
        let mut vals =
            BlockOp::from_op(self.r.op()).levelwise_eigenvalues();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        vals
    }

    pub fn paired_gram_spectrum(&self) -> Vec<f64> {
        let mut vals = self.l.levelwise_eigenvalues();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        vals
    }

    /// `‖compress(B^* B - I, 1)‖`.
    pub fn isometry_defect(&self) -> f64 {
        let q = self.window().q();
        let gram = self.factor.adjoint().mul(&self.factor);
        gram.sub(&BlockOp::identity(self.window(), q))
            .compress(1)
            .op_norm()
    }

    /// Largest blockwise point evaluation of the factor at its own point;
    /// zero in exact arithmetic.
    pub fn annihilation_defect(&self) -> Result<f64> {
        let mut defect = 0.0f64;
        for j in 0..self.window().q() {
            let block = self.factor.block(0, j);
            let ev = point_eval(&block, &self.at)?;
            defect = defect.max(ev.op().op_norm());
        }
        Ok(defect)
    }
}

/// Projects a causal operator onto those with vanishing evaluation at the
/// point: `H - K^c R_c^{-1} H^(c)`.
pub fn make_annihilating(h: &Op, at: &EvalPoint) -> Result<Op> {
    let ev = point_eval(h, at)?;
    let r = kernel_at_point(at);
    let r_inv = invert_constant(&r, "kernel-at-point operator")?;
    let correction = &cauchy_kernel(at) * &(r_inv.op() * ev.op());
    Ok(h - &correction)
}

/// Factors a causal Hilbert–Schmidt operator with vanishing evaluation
/// through the Blaschke factor: returns the `q x 1` block column `G` with
/// `B_c G = F` and `‖G‖ = ‖F‖` under buffer-2 compression.
pub fn factorize(f: &Op, data: &BlaschkeData) -> Result<BlockOp> {
    let causal_defect = f.causal_defect();
    if causal_defect > tol::CAUSAL_RELAXED {
        return Err(Error::NotCausal {
            defect: causal_defect,
        });
    }
    let ev = point_eval_norm(f, data)?;
    if ev > tol::REALIZATION {
        return Err(Error::NonVanishing { defect: ev });
    }
    let win = data.window();
    let alpha = BlockOp::shift_column(win);
    let c_row = BlockOp::tuple_row(data.at.tuple());
    let lowering_block = alpha.mul(&c_row);
    let g_prime = lowering_block
        .neumann_inverse()
        .mul(&alpha.mul(&BlockOp::from_op(f)));
    let raising_block = data
        .l
        .mul(&c_row.adjoint())
        .mul(&alpha.adjoint());
    let g = data
        .sqrt_l_pinv
        .mul(&BlockOp::identity(win, win.q()).sub(&raising_block))
        .mul(&g_prime);
    Ok(g)
}

fn point_eval_norm(f: &Op, data: &BlaschkeData) -> Result<f64> {
    let masked = f.causal_part();
    Ok(point_eval(&masked, &data.at)?.op().op_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::CTuple;

    fn win(q: usize, depth: usize) -> Arc<TreeWindow> {
        Arc::new(TreeWindow::new(q, depth).unwrap())
    }

    fn test_point(win: &Arc<TreeWindow>, phase: f64) -> EvalPoint {
        let comps = (0..win.q())
            .map(|j| {
                ConstOp::new(
                    Op::from_fn(win, |t, s| {
                        C64::new(
                            ((t.0 + s.0 + j) as f64 * 0.27 + phase).sin() * 0.35,
                            ((2 * t.0 + s.0 + j) as f64 * 0.33 - phase).cos() * 0.35,
                        )
                    })
                    .band(0),
                )
                .unwrap()
            })
            .collect();
        EvalPoint::new(CTuple::new(comps).unwrap())
    }

    fn dense_causal(win: &Arc<TreeWindow>, phase: f64) -> Op {
        let raw = Op::from_fn(win, |t, s| {
            C64::new(
                ((3 * t.0 + s.0) as f64 * 0.37 + phase).sin(),
                ((t.0 + 2 * s.0) as f64 * 0.53 - phase).cos(),
            )
        });
        let mut acc = Op::zeros(win);
        for n in 0..=win.depth() as i64 {
            acc = &acc + &raw.band(n);
        }
        acc
    }

    #[test]
    fn kernel_at_zero_point_is_identity() {
        let w = win(2, 3);
        let r = kernel_at_point(&EvalPoint::zero(&w));
        assert_eq!((r.op() - &Op::identity(&w)).max_abs(), 0.0);
    }

    #[test]
    fn kernel_at_point_cross_check() {
        let w = win(2, 3);
        let at = test_point(&w, 0.4);
        let direct = kernel_at_point(&at);
        let via_eval = point_eval(&cauchy_kernel(&at), &at).unwrap();
        assert!((direct.op() - via_eval.op()).max_abs() < 1e-12);
    }

    #[test]
    fn kernel_at_point_dominates_identity() {
        let w = win(2, 3);
        let at = test_point(&w, 1.2);
        let r = kernel_at_point(&at);
        let shifted = r.op() - &Op::identity(&w);
        let min = BlockOp::from_op(&shifted)
            .levelwise_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert!(min > -1e-10, "minimum of R - I is {min}");
    }

    #[test]
    fn kernel_recursion_identity() {
        // R_c = I + c (α R_c α^*) c^*, window exact
        let w = win(2, 3);
        let at = test_point(&w, 0.8);
        let r = kernel_at_point(&at);
        let lower = at.power(1);
        let rebuilt = &Op::identity(&w) + &(&(&lower * r.op()) * &lower.adjoint());
        assert!((r.op() - &rebuilt).compress(1).max_abs() < 1e-12);
        assert!((r.op() - &rebuilt).max_abs() < 1e-12);
    }

    #[test]
    fn paired_gram_at_zero_is_shift_projection() {
        let w = win(2, 2);
        let l = paired_gram(&EvalPoint::zero(&w)).unwrap();
        let alpha = BlockOp::shift_column(&w);
        let expect = alpha.mul(&alpha.adjoint());
        assert_eq!(l.sub(&expect).max_abs(), 0.0);
    }

    #[test]
    fn paired_gram_identities() {
        let w = win(2, 2);
        let at = test_point(&w, 0.55);
        let data = BlaschkeData::new(at.tuple().clone()).unwrap();
        let l = data.paired_gram();
        let alpha = BlockOp::shift_column(&w);
        let c_row = BlockOp::tuple_row(at.tuple());
        // L (c^* c + α R^{-1} α^*) = I under buffer-1 compression
        let inv_candidate = c_row
            .adjoint()
            .mul(&c_row)
            .add(&alpha.mul(&BlockOp::from_op(data.kernel_gram_inverse().op())).mul(&alpha.adjoint()));
        let defect = l
            .mul(&inv_candidate)
            .sub(&BlockOp::identity(&w, w.q()))
            .compress(1)
            .op_norm();
        assert!(defect < 1e-9, "inverse identity defect {defect}");
        // c L = R^{-1} (c α) R α^*
        let lhs = c_row.mul(l);
        let inner = &(data.kernel_gram_inverse().op() * &at.power(1)) * data.kernel_gram().op();
        let rhs = BlockOp::from_op(&inner).mul(&alpha.adjoint());
        let defect = lhs.sub(&rhs).compress(1).op_norm();
        assert!(defect < 1e-9, "intertwining defect {defect}");
    }

    #[test]
    fn paired_gram_is_psd_with_leaf_kernel() {
        let w = win(2, 2);
        let at = test_point(&w, 1.9);
        let l = paired_gram(&at).unwrap();
        let vals = l.levelwise_eigenvalues();
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min > -1e-10);
        // deepest-level components are annihilated
        let zero_count = vals.iter().filter(|&&v| v.abs() <= 1e-10).count();
        let leaf_dim = w.q() * w.level_size(w.depth());
        assert!(zero_count >= leaf_dim);
    }

    #[test]
    fn blaschke_factor_at_zero_is_shift_row() {
        let w = win(2, 2);
        let data = BlaschkeData::new(CTuple::zero(&w)).unwrap();
        // B_0 = α^* (I ⊗ Π)^(1/2); on the window the projection is
        // absorbed by the shift adjoints
        let alpha_adj = BlockOp::shift_column(&w).adjoint();
        assert!(data.factor().sub(&alpha_adj).max_abs() < 1e-12);
    }

    #[test]
    fn blaschke_blocks_are_causal_and_annihilate() {
        let w = win(2, 2);
        let data = BlaschkeData::new(test_point(&w, 0.35).tuple().clone()).unwrap();
        assert_eq!(data.factor().block_causal_defect(), 0.0);
        assert!(data.annihilation_defect().unwrap() < 1e-12);
    }

    #[test]
    fn blaschke_compressed_isometry() {
        let w = win(2, 2);
        let data = BlaschkeData::new(test_point(&w, 2.6).tuple().clone()).unwrap();
        let defect = data.isometry_defect();
        assert!(defect < 1e-8, "isometry defect {defect}");
    }

    #[test]
    fn make_annihilating_kills_evaluation() {
        let w = win(2, 3);
        let at = test_point(&w, 0.15);
        let h = dense_causal(&w, 0.4);
        let f = make_annihilating(&h, &at).unwrap();
        assert!(f.is_causal());
        let ev = point_eval(&f, &at).unwrap();
        assert!(ev.op().op_norm() < 1e-10);
        // fixed point: operators already annihilating stay put
        let f2 = make_annihilating(&f, &at).unwrap();
        assert!((&f2 - &f).max_abs() < 1e-10);
    }

    #[test]
    fn make_annihilating_at_zero_strips_constant_term() {
        let w = win(2, 2);
        let h = dense_causal(&w, 1.3);
        let f = make_annihilating(&h, &EvalPoint::zero(&w)).unwrap();
        let expect = &h - &h.band(0);
        assert_eq!((&f - &expect).max_abs(), 0.0);
    }

    #[test]
    fn factorization_roundtrip() {
        let w = win(2, 2);
        let data = BlaschkeData::new(test_point(&w, 0.85).tuple().clone()).unwrap();
        // F built through the factor itself
        let g0 = BlockOp::from_blocks(
            &w,
            w.q(),
            1,
            &[dense_causal(&w, 0.2), dense_causal(&w, 1.7)],
        );
        let f_block = data.factor().mul(&g0);
        let f = f_block.block(0, 0);
        let ev = point_eval_norm(&f, &data).unwrap();
        assert!(ev < 1e-12, "evaluation of B_c G0 is {ev}");
        let g = factorize(&f, &data).unwrap();
        let rebuilt = data.factor().mul(&g).block(0, 0);
        let defect = (&rebuilt - &f).compress(2).max_abs();
        assert!(defect < 1e-7, "round-trip defect {defect}");
    }

    #[test]
    fn factorization_preserves_norm() {
        let w = win(2, 2);
        let at = test_point(&w, 1.45);
        let data = BlaschkeData::new(at.tuple().clone()).unwrap();
        let f = make_annihilating(&dense_causal(&w, 0.9), &at).unwrap();
        let g = factorize(&f, &data).unwrap();
        // a vanishing evaluation forces an empty deepest-level diagonal
        // block, which makes the norm identity window-exact with no
        // compression at all
        let defect = (g.hs_norm() - f.hs_norm()).abs();
        assert!(defect < 1e-12, "norm defect {defect}");
        let rebuilt = data.factor().mul(&g).block(0, 0);
        assert!((&rebuilt - &f).compress(2).max_abs() < 1e-7);
        assert!((&rebuilt - &f).max_abs() < 1e-12);
    }

    #[test]
    fn factorize_rejects_nonvanishing() {
        let w = win(2, 2);
        let data = BlaschkeData::new(test_point(&w, 0.0).tuple().clone()).unwrap();
        let f = dense_causal(&w, 0.1);
        assert!(matches!(
            factorize(&f, &data),
            Err(Error::NonVanishing { .. })
        ));
    }

    #[test]
    fn factorize_at_zero_recovers_strict_part() {
        let w = win(2, 2);
        let data = BlaschkeData::new(CTuple::zero(&w)).unwrap();
        let h = dense_causal(&w, 2.2);
        let f = &h - &h.band(0);
        let g = factorize(&f, &data).unwrap();
        let rebuilt = data.factor().mul(&g).block(0, 0);
        assert!((&rebuilt - &f).compress(1).max_abs() < 1e-12);
    }
}
