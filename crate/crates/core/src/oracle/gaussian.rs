//! Zero-mean Gaussian states described by their pair expectations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::OracleError;

/// A ladder operator: `a_mode` or, with `dagger`, its adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Op {
    pub mode: usize,
    pub dagger: bool,
}

impl Op {
    pub const fn a(mode: usize) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }

    pub const fn ad(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn adjoint(self) -> Self {
        Self {
            dagger: !self.dagger,
            ..self
        }
    }
}

/// Every ordered pair expectation <X Y> among the ladder operators of
/// `modes` bosonic modes.
///
/// Built from the normal moments N_ij = <a_i^dag a_j> and the anomalous
/// moments M_ij = <a_i a_j>; the remaining orderings follow from the
/// canonical commutators, so <a a^dag> - <a^dag a> = 1 holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSecondMoments {
    normal: DMatrix<Complex64>,
    anomalous: DMatrix<Complex64>,
}

const HERMITICITY_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

impl GaussianSecondMoments {
    /// Validates and wraps a moment table.
    pub fn new(
        normal: DMatrix<Complex64>,
        anomalous: DMatrix<Complex64>,
    ) -> Result<Self, OracleError> {
        let n = normal.nrows();
        if normal.ncols() != n || anomalous.shape() != (n, n) {
            return Err(OracleError::InvalidState(
                "normal and anomalous tables must be square and of equal size".into(),
            ));
        }
        let scale = 1.0
            + normal
                .iter()
                .chain(anomalous.iter())
                .map(|z| z.norm())
                .fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..n {
                if (normal[(i, j)] - normal[(j, i)].conj()).norm() > HERMITICITY_TOL * scale {
                    return Err(OracleError::InvalidState(format!(
                        "<a^dag a> is not Hermitian at ({i}, {j})"
                    )));
                }
                if (anomalous[(i, j)] - anomalous[(j, i)]).norm() > HERMITICITY_TOL * scale {
                    return Err(OracleError::InvalidState(format!(
                        "<a a> is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let state = Self { normal, anomalous };
        let min_eig = state.smallest_gram_eigenvalue();
        if min_eig < -POSITIVITY_TOL * scale {
            return Err(OracleError::InvalidState(format!(
                "covariance has negative eigenvalue {min_eig}"
            )));
        }
        Ok(state)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self {
            normal: DMatrix::zeros(modes, modes),
            anomalous: DMatrix::zeros(modes, modes),
        }
    }

    /// Single-mode thermal state with mean occupation `nbar`.
    pub fn thermal(nbar: f64) -> Result<Self, OracleError> {
        Self::new(
            DMatrix::from_element(1, 1, Complex64::new(nbar, 0.0)),
            DMatrix::zeros(1, 1),
        )
    }

    /// Two-mode squeezed vacuum with <a_0 a_1> = sinh r cosh r.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let s2 = r.sinh().powi(2);
        let m = Complex64::new(r.sinh() * r.cosh(), 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self {
            normal: DMatrix::from_row_slice(2, 2, &[s2.into(), z, z, s2.into()]),
            anomalous: DMatrix::from_row_slice(2, 2, &[z, m, m, z]),
        }
    }

    pub fn modes(&self) -> usize {
        self.normal.nrows()
    }

    fn check(&self, op: Op) -> Result<(), OracleError> {
        if op.mode < self.modes() {
            Ok(())
        } else {
            Err(OracleError::UnknownOperator {
                op,
                modes: self.modes(),
            })
        }
    }

    fn pair_unchecked(&self, x: Op, y: Op) -> Complex64 {
        let (i, j) = (x.mode, y.mode);
        match (x.dagger, y.dagger) {
            (true, false) => self.normal[(i, j)],
            (false, true) => {
                let delta = if i == j { 1.0 } else { 0.0 };
                self.normal[(j, i)] + delta
            }
            (false, false) => self.anomalous[(i, j)],
            (true, true) => self.anomalous[(i, j)].conj(),
        }
    }

    /// <X Y>.
    pub fn pair(&self, x: Op, y: Op) -> Result<Complex64, OracleError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.pair_unchecked(x, y))
    }

    /// <A B C D> = <AB><CD> + <AC><BD> + <AD><BC>, order kept within pairs.
    pub fn wick_fourth_moment(&self, ops: [Op; 4]) -> Result<Complex64, OracleError> {
        for op in ops {
            self.check(op)?;
        }
        let [a, b, c, d] = ops;
        let p = |x, y| self.pair_unchecked(x, y);
        Ok(p(a, b) * p(c, d) + p(a, c) * p(b, d) + p(a, d) * p(b, c))
    }

    /// Smallest eigenvalue of the Gram matrix G_XY = <X^dag Y> over all
    /// ladder operators; non-negative for any physical state.
    pub fn smallest_gram_eigenvalue(&self) -> f64 {
        let n = self.modes();
        let ops: Vec<Op> = (0..n).map(Op::a).chain((0..n).map(Op::ad)).collect();
        let gram = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            self.pair_unchecked(ops[i].adjoint(), ops[j])
        });
        if n == 0 {
            return 0.0;
        }
        gram.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}
