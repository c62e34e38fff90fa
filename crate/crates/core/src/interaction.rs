// SPDX-License-Identifier: Apache-2.0

//! The interaction operator `G = [[I, −iH], [0, I]]` on `fiber ⊗ object`.

use ndarray::{Array1, Array2};

use crate::hamiltonian::Hamiltonian;
use crate::linalg::{c, eye, kron, C64};
use crate::pseudo::{pi_dt, Metric, PseudoOperator};

/// One pseudo-measurement: `G = 𝐈 + L ⊗ π(dt)` with `L = −iH`, laid out as
/// 2×2 blocks of d×d matrices (fiber index slow, object index fast) under
/// the metric `η₂ ⊗ I_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionOperator {
    hamiltonian: Option<Hamiltonian>,
    generator: Array2<C64>,
    op: PseudoOperator,
}

impl InteractionOperator {
    /// Interaction for a validated Hamiltonian.
    pub fn new(h: &Hamiltonian) -> Self {
        let mut g = Self::from_generator(h.generator());
        g.hamiltonian = Some(h.clone());
        g
    }

    /// Builds `𝐈 + L ⊗ π(dt)` for an arbitrary generator `L`, which need not
    /// come from a Hermitian `H`. Use [`InteractionOperator::new`] for
    /// physical generators.
    pub fn from_generator(generator: Array2<C64>) -> Self {
        let d = generator.nrows();
        let matrix = eye(2 * d) + kron(&pi_dt(), &generator);
        let op = PseudoOperator::new(matrix, Metric::eta2().lifted(d))
            .expect("block operator matches lifted metric by construction");
        Self {
            hamiltonian: None,
            generator,
            op,
        }
    }

    /// The Hamiltonian this operator was built from, if any.
    pub fn hamiltonian(&self) -> Option<&Hamiltonian> {
        self.hamiltonian.as_ref()
    }

    pub fn object_dim(&self) -> usize {
        self.generator.nrows()
    }

    /// `L`, the upper-right block.
    pub fn generator(&self) -> &Array2<C64> {
        &self.generator
    }

    pub fn operator(&self) -> &PseudoOperator {
        &self.op
    }

    pub fn matrix(&self) -> &Array2<C64> {
        self.op.matrix()
    }

    /// Block `(a, b)` of `G` in the fiber basis (0 = `ξ₋` component,
    /// 1 = `ξ₊` component).
    pub fn block(&self, a: usize, b: usize) -> Array2<C64> {
        let d = self.object_dim();
        self.matrix()
            .slice(ndarray::s![a * d..(a + 1) * d, b * d..(b + 1) * d])
            .to_owned()
    }

    /// `(u⋆ ⊗ I) · G · (v ⊗ I)` for fiber vectors `u`, `v`; the pairing is
    /// taken with `η₂`.
    pub fn pair(&self, u: &Array1<C64>, v: &Array1<C64>) -> Array2<C64> {
        let u_star = Metric::eta2().covector(u);
        let d = self.object_dim();
        let mut out = Array2::<C64>::zeros((d, d));
        for a in 0..2 {
            for b in 0..2 {
                let w = u_star[a] * v[b];
                if w != c(0.0) {
                    out = out + self.block(a, b) * w;
                }
            }
        }
        out
    }

    pub fn star_unitarity_defect(&self) -> f64 {
        self.op.star_unitarity_defect()
    }

    pub fn is_star_unitary(&self, tol: f64) -> bool {
        self.op.is_star_unitary(tol)
    }
}

/// Builds the interaction for `h`. Hermiticity is enforced by [`Hamiltonian`].
pub fn build_interaction(h: &Hamiltonian) -> InteractionOperator {
    InteractionOperator::new(h)
}
