// SPDX-License-Identifier: Apache-2.0

//! Minkowski metrics, the ⋆-involution and the canonical matrix
//! representations of the Itô increments `dt`, `dn`, `da`, `da⋆`.
//!
//! Metrics and increment matrices only ever hold the integers 0 and 1, so
//! every identity between them is checked with exact equality. Operators
//! that carry `√ν` entries (boosts, the pseudo-Weyl generator) are checked
//! to a tolerance.
//!
//! Block layout: the 4-dimensional per-point space is `ℂ ⊕ 𝕜 ⊕ ℂ` with the
//! 2-dimensional fiber `𝕜` in slots 1 and 2 (0-based).

use ndarray::{array, Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{c, dagger, eye, identity_defect, kron, max_abs, unit, zeros, C64};

/// A real symmetric involutive metric with 0/1 entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    matrix: Array2<C64>,
}

impl Metric {
    /// Validates symmetry and `η·η = I`.
    pub fn from_matrix(matrix: Array2<C64>) -> Result<Self> {
        let (r, cols) = matrix.dim();
        if r != cols {
            return Err(Error::NotSquare { rows: r, cols });
        }
        let symmetric = matrix.t() == matrix;
        let real = matrix.iter().all(|z| z.im == 0.0);
        if !(symmetric && real && matrix.dot(&matrix) == eye(r)) {
            return Err(Error::InvalidMetric);
        }
        Ok(Self { matrix })
    }

    /// Ones on the anti-diagonal.
    pub fn anti_diagonal(n: usize) -> Self {
        let mut m = zeros(n);
        for i in 0..n {
            m[[i, n - 1 - i]] = c(1.0);
        }
        Self { matrix: m }
    }

    pub fn eta2() -> Self {
        Self::anti_diagonal(2)
    }

    pub fn eta3() -> Self {
        Self::anti_diagonal(3)
    }

    pub fn eta4() -> Self {
        Self::anti_diagonal(4)
    }

    pub fn euclidean(n: usize) -> Self {
        Self { matrix: eye(n) }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Metric) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// The metric lifted to `fiber ⊗ object`, i.e. `self ⊗ I_d`.
    pub fn lifted(&self, object_dim: usize) -> Self {
        self.tensor(&Metric::euclidean(object_dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Indefinite pairing `⟨u, v⟩_η = u† η v`.
    pub fn pairing(&self, u: &Array1<C64>, v: &Array1<C64>) -> C64 {
        u.mapv(|z| z.conj()).dot(&self.matrix.dot(v))
    }

    /// The covector `u⋆ = u† η`.
    pub fn covector(&self, u: &Array1<C64>) -> Array1<C64> {
        u.mapv(|z| z.conj()).dot(&self.matrix)
    }
}

/// A square complex matrix paired with the metric that defines its ⋆-adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOperator {
    matrix: Array2<C64>,
    metric: Metric,
}

impl PseudoOperator {
    pub fn new(matrix: Array2<C64>, metric: Metric) -> Result<Self> {
        let (r, cols) = matrix.dim();
        if r != cols {
            return Err(Error::NotSquare { rows: r, cols });
        }
        if r != metric.dim() {
            return Err(Error::DimensionMismatch {
                expected: metric.dim(),
                found: r,
            });
        }
        Ok(Self { matrix, metric })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    /// `A⋆ = η A† η`.
    pub fn star(&self) -> Self {
        let eta = self.metric.matrix();
        Self {
            matrix: eta.dot(&dagger(&self.matrix)).dot(eta),
            metric: self.metric.clone(),
        }
    }

    /// Max-entry norm of `A⋆A − I` and `AA⋆ − I`, whichever is larger.
    pub fn star_unitarity_defect(&self) -> f64 {
        let s = self.star();
        identity_defect(&s.matrix.dot(&self.matrix))
            .max(identity_defect(&self.matrix.dot(&s.matrix)))
    }

    pub fn is_star_unitary(&self, tol: f64) -> bool {
        self.star_unitarity_defect() <= tol
    }

    pub fn is_star_self_adjoint(&self) -> bool {
        self.star().matrix == self.matrix
    }

    /// Product of two operators under the same metric.
    pub fn compose(&self, rhs: &PseudoOperator) -> Result<Self> {
        if self.metric != rhs.metric {
            return Err(Error::DimensionMismatch {
                expected: self.metric.dim(),
                found: rhs.metric.dim(),
            });
        }
        Ok(Self {
            matrix: self.matrix.dot(&rhs.matrix),
            metric: self.metric.clone(),
        })
    }
}

/// Free-function form of [`PseudoOperator::star`] that validates a raw matrix first.
pub fn star_adjoint(matrix: &Array2<C64>, metric: &Metric) -> Result<PseudoOperator> {
    Ok(PseudoOperator::new(matrix.clone(), metric.clone())?.star())
}

/// `π(dt) = [[0, 1], [0, 0]]`.
pub fn pi_dt() -> Array2<C64> {
    unit(2, 0, 1)
}

/// Input (`ξ₊`, future) and output (`ξ₋`, past) gauge vectors of the fiber.
///
/// The gauge phase is fixed to zero: `ξ₊ = (0, 1)`, `ξ₋ = (1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePair {
    pub xi_plus: Array1<C64>,
    pub xi_minus: Array1<C64>,
}

impl GaugePair {
    pub fn canonical() -> Self {
        Self {
            xi_plus: array![c(0.0), c(1.0)],
            xi_minus: array![c(1.0), c(0.0)],
        }
    }
}

impl Default for GaugePair {
    fn default() -> Self {
        Self::canonical()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IncrementKind {
    Dt2,
    Dt3,
    Dn3,
    Da3,
    DaStar3,
    Dt4Corner,
    DnHat4,
}

impl IncrementKind {
    pub const ITO_BASIS: [IncrementKind; 4] = [Self::Dt3, Self::Dn3, Self::Da3, Self::DaStar3];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dt2 => "dt2",
            Self::Dt3 => "dt3",
            Self::Dn3 => "dn3",
            Self::Da3 => "da3",
            Self::DaStar3 => "da_star3",
            Self::Dt4Corner => "dt4_corner",
            Self::DnHat4 => "dn_hat4",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Dt2 => 2,
            Self::Dt3 | Self::Dn3 | Self::Da3 | Self::DaStar3 => 3,
            Self::Dt4Corner | Self::DnHat4 => 4,
        }
    }
}

/// Canonical matrix representation of one increment together with its metric.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementRep {
    kind: IncrementKind,
    op: PseudoOperator,
}

impl IncrementRep {
    pub fn new(kind: IncrementKind) -> Self {
        let (matrix, metric) = match kind {
            IncrementKind::Dt2 => (pi_dt(), Metric::eta2()),
            IncrementKind::Dt3 => (unit(3, 0, 2), Metric::eta3()),
            IncrementKind::Dn3 => (unit(3, 1, 1), Metric::eta3()),
            IncrementKind::Da3 => (unit(3, 0, 1), Metric::eta3()),
            IncrementKind::DaStar3 => (unit(3, 1, 2), Metric::eta3()),
            IncrementKind::Dt4Corner => (unit(4, 0, 3), Metric::eta4()),
            // π(dt) in the middle 𝕜 slot of 1⊕2⊕1
            IncrementKind::DnHat4 => (unit(4, 1, 2), Metric::eta4()),
        };
        Self {
            kind,
            op: PseudoOperator { matrix, metric },
        }
    }

    pub fn kind(&self) -> IncrementKind {
        self.kind
    }

    pub fn matrix(&self) -> &Array2<C64> {
        self.op.matrix()
    }

    pub fn operator(&self) -> &PseudoOperator {
        &self.op
    }
}

/// Multiplies two 3×3 increments and classifies the result against the
/// basis `{dt, dn, da, da⋆}`. `Ok(None)` means the product vanishes.
pub fn ito_product(a: &IncrementRep, b: &IncrementRep) -> Result<Option<IncrementRep>> {
    if a.kind.dim() != 3 || b.kind.dim() != 3 {
        return Err(Error::IncompatibleIncrements(a.kind.name(), b.kind.name()));
    }
    let product = a.matrix().dot(b.matrix());
    if product.iter().all(|z| *z == c(0.0)) {
        return Ok(None);
    }
    IncrementKind::ITO_BASIS
        .iter()
        .map(|&k| IncrementRep::new(k))
        .find(|rep| *rep.matrix() == product)
        .map(Some)
        .ok_or(Error::OutsideBasis)
}

/// `U = (1/√2)[[1, 1], [1, −1]]`, taking `η₂` to `diag(1, −1)`.
pub fn diagonalizer() -> PseudoOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PseudoOperator {
        matrix: array![[c(s), c(s)], [c(s), c(-s)]],
        metric: Metric::eta2(),
    }
}

/// Returns the hyperbolic rotation `[[cosh θ, sinh θ], [sinh θ, cosh θ]]`
/// and its conjugate `U·Λ·U†`, which is `diag(e^θ, e^−θ)`.
pub fn lorentz_conjugate_hyperbolic(theta: f64) -> (Array2<f64>, Array2<f64>) {
    let (ch, sh) = (theta.cosh(), theta.sinh());
    let input = array![[ch, sh], [sh, ch]];
    let u = diagonalizer().matrix.mapv(|z| z.re);
    let output = u.dot(&input).dot(&u.t());
    (input, output)
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

/// Diagonal Lorentz boost `υ_ν = diag(1/√ν, √ν)` on the fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzBoost {
    nu: f64,
    op: PseudoOperator,
}

impl LorentzBoost {
    pub fn new(nu: f64) -> Result<Self> {
        require_positive("nu", nu)?;
        let r = nu.sqrt();
        Ok(Self {
            nu,
            op: PseudoOperator {
                matrix: array![[c(1.0 / r), c(0.0)], [c(0.0), c(r)]],
                metric: Metric::eta2(),
            },
        })
    }

    /// Boost with rapidity `θ`, i.e. `ν = e^{2θ}`.
    pub fn from_rapidity(theta: f64) -> Result<Self> {
        Self::new((2.0 * theta).exp())
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn operator(&self) -> &PseudoOperator {
        &self.op
    }

    pub fn matrix(&self) -> &Array2<C64> {
        self.op.matrix()
    }

    /// `υ⋆ · π(dt) · υ`, which should be `ν·π(dt)`.
    pub fn boost_dt(&self) -> Array2<C64> {
        self.op.star().matrix.dot(&pi_dt()).dot(&self.op.matrix)
    }
}

/// Pseudo-Weyl generator `𝒵_ν` on `ℂ ⊕ 𝕜 ⊕ ℂ` under `η₄`.
///
/// ```text
/// [ 1  −√ν ξ₊⋆  0    ]
/// [ 0   I₂     √ν ξ₊ ]
/// [ 0   0       1    ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct WeylGenerator {
    nu: f64,
    op: PseudoOperator,
}

impl WeylGenerator {
    pub fn new(nu: f64) -> Result<Self> {
        require_positive("nu", nu)?;
        let r = nu.sqrt();
        let gauge = GaugePair::canonical();
        let eta2 = Metric::eta2();
        let xi_plus_star = eta2.covector(&gauge.xi_plus);

        let mut m = eye(4);
        for j in 0..2 {
            m[[0, 1 + j]] = -r * xi_plus_star[j];
            m[[1 + j, 3]] = r * gauge.xi_plus[j];
        }
        Ok(Self {
            nu,
            op: PseudoOperator {
                matrix: m,
                metric: Metric::eta4(),
            },
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn operator(&self) -> &PseudoOperator {
        &self.op
    }

    pub fn matrix(&self) -> &Array2<C64> {
        self.op.matrix()
    }

    /// `𝒵⋆ · m · 𝒵` for an arbitrary 4×4 `m`.
    pub fn conjugate(&self, m: &Array2<C64>) -> Array2<C64> {
        self.op.star().matrix.dot(m).dot(&self.op.matrix)
    }
}

/// `𝒵_ν⋆ · ϖ(d𝐧) · 𝒵_ν`, still a counting increment.
pub fn weyl_conjugate_counting(nu: f64) -> Result<Array2<C64>> {
    let z = WeylGenerator::new(nu)?;
    Ok(z.conjugate(IncrementRep::new(IncrementKind::DnHat4).matrix()))
}

/// The centred part `ϖ(dm̃^ν)` of the conjugated counting increment,
/// i.e. the conjugate minus `ν·ϖ(dt)`.
pub fn counting_martingale_part(nu: f64) -> Result<Array2<C64>> {
    let conj = weyl_conjugate_counting(nu)?;
    Ok(conj - IncrementRep::new(IncrementKind::Dt4Corner).matrix() * c(nu))
}

/// `ϖ(dζ̃^ν) = 𝒵⋆ · ((1/√ν) ϖ(d𝐧) − √ν ϖ(dt)) · 𝒵` with `λ = √ν`.
pub fn central_limit_increment(nu: f64) -> Result<Array2<C64>> {
    let z = WeylGenerator::new(nu)?;
    let lambda = nu.sqrt();
    let dn = IncrementRep::new(IncrementKind::DnHat4);
    let dt = IncrementRep::new(IncrementKind::Dt4Corner);
    let centred = dn.matrix() * c(1.0 / lambda) - dt.matrix() * c(lambda);
    Ok(z.conjugate(&centred))
}

/// The limit `ϖ(dw̃)` of [`central_limit_increment`]: `ξ₋⋆` in the top row,
/// `ξ₋` in the right column, zero elsewhere.
pub fn pseudo_wiener_increment() -> Array2<C64> {
    let gauge = GaugePair::canonical();
    let xi_minus_star = Metric::eta2().covector(&gauge.xi_minus);
    let mut m = zeros(4);
    for j in 0..2 {
        m[[0, 1 + j]] = xi_minus_star[j];
        m[[1 + j, 3]] = gauge.xi_minus[j];
    }
    m
}

/// Max-entry deviation of the central-limit increment at `ν` from its limit.
pub fn central_limit_deviation(nu: f64) -> Result<f64> {
    Ok(max_abs(&(central_limit_increment(nu)? - pseudo_wiener_increment())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn builtin_metrics_are_valid() {
        for n in 1..6 {
            assert!(Metric::from_matrix(Metric::anti_diagonal(n).matrix().clone()).is_ok());
        }
        let prod = Metric::eta2().tensor(&Metric::eta3());
        assert!(Metric::from_matrix(prod.matrix().clone()).is_ok());
    }

    #[test]
    fn metric_rejects_non_involution() {
        let mut m = eye(2);
        m[[0, 1]] = c(1.0);
        m[[1, 0]] = c(1.0);
        assert_eq!(Metric::from_matrix(m), Err(Error::InvalidMetric));
    }

    #[test]
    fn star_dimension_mismatch() {
        let err = star_adjoint(&eye(3), &Metric::eta2()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn dt_is_self_adjoint_and_nilpotent() {
        let dt = IncrementRep::new(IncrementKind::Dt2);
        assert_eq!(star_adjoint(&pi_dt(), &Metric::eta2()).unwrap(), *dt.operator());
        assert_eq!(pi_dt().dot(&pi_dt()), zeros(2));
    }

    #[test]
    fn identity_is_star_fixed() {
        for n in 2..5 {
            let id = star_adjoint(&eye(n), &Metric::anti_diagonal(n)).unwrap();
            assert_eq!(*id.matrix(), eye(n));
        }
    }

    #[test]
    fn da_star_is_star_of_da() {
        let da = IncrementRep::new(IncrementKind::Da3);
        let das = IncrementRep::new(IncrementKind::DaStar3);
        // η₃ e₂₁ η₃ by hand: e_{ij} ↦ e_{4−i,4−j} (1-based)
        assert_eq!(da.operator().star().matrix(), das.matrix());
        assert_eq!(*das.matrix(), unit(3, 1, 2));
    }

    #[test]
    fn self_adjoint_increments() {
        for k in [
            IncrementKind::Dt3,
            IncrementKind::Dn3,
            IncrementKind::DnHat4,
            IncrementKind::Dt4Corner,
        ] {
            assert!(IncrementRep::new(k).operator().is_star_self_adjoint(), "{k:?}");
        }
        assert!(!IncrementRep::new(IncrementKind::Da3)
            .operator()
            .is_star_self_adjoint());
    }

    #[test]
    fn gauge_pairings() {
        let g = GaugePair::canonical();
        let eta = Metric::eta2();
        assert_eq!(pi_dt().dot(&g.xi_plus), g.xi_minus);
        assert_eq!(pi_dt().dot(&g.xi_minus), array![c(0.0), c(0.0)]);
        assert_eq!(eta.pairing(&g.xi_minus, &g.xi_plus), c(1.0));
        assert_eq!(eta.pairing(&g.xi_plus, &g.xi_plus), c(0.0));
        assert_eq!(eta.pairing(&g.xi_minus, &g.xi_minus), c(0.0));
        assert_eq!(eta.pairing(&g.xi_plus, &pi_dt().dot(&g.xi_plus)), c(1.0));
    }

    #[test]
    fn star_unitary_examples() {
        assert!(LorentzBoost::new(3.0).unwrap().operator().is_star_unitary(1e-12));
        let id = PseudoOperator::new(eye(2), Metric::eta2()).unwrap();
        assert!(id.is_star_unitary(1e-15));
        let dt = PseudoOperator::new(pi_dt(), Metric::eta2()).unwrap();
        // π(dt)⋆π(dt) = 0, so the defect is exactly 1
        assert_eq!(dt.star().matrix().dot(dt.matrix()), zeros(2));
        assert!(!dt.is_star_unitary(0.5));
    }

    #[test]
    fn diagonalizer_properties() {
        let u = diagonalizer();
        let ud = dagger(u.matrix());
        let diag = array![[c(1.0), c(0.0)], [c(0.0), c(-1.0)]];
        assert!(max_abs_diff(&ud.dot(Metric::eta2().matrix()).dot(u.matrix()), &diag) <= 1e-15);
        assert!(identity_defect(&ud.dot(u.matrix())) <= 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rotated = ud.dot(&GaugePair::canonical().xi_plus);
        assert!((rotated[0] - c(s)).norm() < 1e-16);
        assert!((rotated[1] - c(-s)).norm() < 1e-16);
    }

    #[test]
    fn hyperbolic_conjugation() {
        let (input, output) = lorentz_conjugate_hyperbolic(0.0);
        assert_eq!(input, Array2::eye(2));
        assert!((&output - &Array2::<f64>::eye(2)).iter().all(|x| x.abs() < 1e-15));
        for theta in [1.0_f64, -2.0] {
            let (_, out) = lorentz_conjugate_hyperbolic(theta);
            assert!((out[[0, 0]] - theta.exp()).abs() < 1e-12);
            assert!((out[[1, 1]] - (-theta).exp()).abs() < 1e-12);
            assert!(out[[0, 1]].abs() < 1e-12 && out[[1, 0]].abs() < 1e-12);
        }
    }

    #[test]
    fn boost_action() {
        for nu in [0.1, 1.0, 10.0] {
            let b = LorentzBoost::new(nu).unwrap();
            assert!(b.operator().star_unitarity_defect() < 1e-12);
            assert!(max_abs_diff(&b.boost_dt(), &(pi_dt() * c(nu))) < 1e-12);
        }
        assert!(LorentzBoost::new(0.0).is_err());
        assert!(LorentzBoost::new(-1.0).is_err());
    }

    #[test]
    fn ito_table_samples() {
        let rep = IncrementRep::new;
        let dn = ito_product(&rep(IncrementKind::Dn3), &rep(IncrementKind::Dn3)).unwrap();
        assert_eq!(dn.unwrap().kind(), IncrementKind::Dn3);
        assert!(ito_product(&rep(IncrementKind::Dt3), &rep(IncrementKind::Dn3))
            .unwrap()
            .is_none());
        let dt = ito_product(&rep(IncrementKind::Da3), &rep(IncrementKind::DaStar3)).unwrap();
        assert_eq!(dt.unwrap().kind(), IncrementKind::Dt3);
        assert!(matches!(
            ito_product(&rep(IncrementKind::Dt2), &rep(IncrementKind::Dn3)),
            Err(Error::IncompatibleIncrements(..))
        ));
    }

    #[test]
    fn weyl_generator_shape() {
        let z = WeylGenerator::new(4.0).unwrap();
        let m = z.matrix();
        for i in 0..4 {
            assert_eq!(m[[i, i]], c(1.0));
            for j in 0..i {
                assert_eq!(m[[i, j]], c(0.0));
            }
        }
        assert_eq!(m[[0, 1]], c(-2.0));
        assert_eq!(m[[2, 3]], c(2.0));
        assert!(WeylGenerator::new(0.0).is_err());
    }

    #[test]
    fn weyl_conjugation_of_zero() {
        let z = WeylGenerator::new(2.5).unwrap();
        assert_eq!(z.conjugate(&zeros(4)), zeros(4));
    }

    #[test]
    fn central_limit_at_unit_nu_has_exact_middle_block() {
        let m = central_limit_increment(1.0).unwrap();
        assert_eq!(m[[1, 2]], c(1.0));
        assert_eq!(m[[1, 1]], c(0.0));
        assert_eq!(m[[2, 2]], c(0.0));
        assert_eq!(m[[2, 1]], c(0.0));
    }

    #[test]
    fn pseudo_wiener_is_nilpotent_and_self_adjoint() {
        let w = pseudo_wiener_increment();
        assert_eq!(w.dot(&w), zeros(4));
        let op = PseudoOperator::new(w, Metric::eta4()).unwrap();
        assert!(op.is_star_self_adjoint());
    }
}
