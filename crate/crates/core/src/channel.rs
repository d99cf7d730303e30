//! Channel matrices between two planar arrays: scalar, efficiency-scaled
//! scalar, and dual-polarised with element patterns.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::array::{ArrayGeometry, WavenumberSampleSet};
use crate::error::{Error, Result};
use crate::leakage::LeakageMatrix;
use crate::pattern::{steered_pattern_matrix, PolarizedPattern};
use crate::rng::SeedLineage;
use crate::scalar::{cplx, phasor, two_pi, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    Holo,
    Mdf,
    Pol,
}

impl ChannelModel {
    pub fn label(self) -> &'static str {
        match self {
            ChannelModel::Holo => "holo",
            ChannelModel::Mdf => "mdf",
            ChannelModel::Pol => "pol",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelMetadata<T: Real> {
    pub receive_label: String,
    pub source_label: String,
    pub receive_efficiency: Option<Vec<T>>,
    pub source_efficiency: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    /// `N_R × N_S`.
    pub matrix: DMatrix<Complex<T>>,
    pub model: ChannelModel,
    pub seed_lineage: Option<SeedLineage>,
    pub metadata: ChannelMetadata<T>,
}

impl<T: Real> ChannelRealization<T> {
    fn bare(matrix: DMatrix<Complex<T>>, model: ChannelModel) -> Self {
        Self {
            matrix,
            model,
            seed_lineage: None,
            metadata: ChannelMetadata::default(),
        }
    }

    pub fn with_lineage(mut self, lineage: SeedLineage) -> Self {
        self.seed_lineage = Some(lineage);
        self
    }
}

fn check_product<T: Real>(left: &DMatrix<Complex<T>>, right: &DMatrix<Complex<T>>, what: &str) -> Result<()> {
    if left.ncols() != right.nrows() {
        return Err(Error::Dimension(format!(
            "{what}: {}x{} times {}x{}",
            left.nrows(),
            left.ncols(),
            right.nrows(),
            right.ncols()
        )));
    }
    Ok(())
}

/// `U_R H_a U_Sᵀ` (plain transpose on the source side).
pub fn synthesize_holo<T: Real>(
    receive_steering: &DMatrix<Complex<T>>,
    angular: &DMatrix<Complex<T>>,
    source_steering: &DMatrix<Complex<T>>,
) -> Result<ChannelRealization<T>> {
    let u_s_t = source_steering.transpose();
    check_product(receive_steering, angular, "receive steering x angular response")?;
    check_product(angular, &u_s_t, "angular response x source steering")?;
    Ok(ChannelRealization::bare(receive_steering * angular * u_s_t, ChannelModel::Holo))
}

fn check_efficiency<T: Real>(name: &str, chi: T) -> Result<()> {
    if !(chi >= T::zero() && chi <= T::one()) {
        return Err(Error::Domain(format!("{name} = {} outside [0, 1]", chi.as_f64())));
    }
    Ok(())
}

/// `√(χ_R χ_S) · U_R H_a U_Sᵀ`.
pub fn synthesize_mdf<T: Real>(
    chi_receive: T,
    chi_source: T,
    receive_steering: &DMatrix<Complex<T>>,
    angular: &DMatrix<Complex<T>>,
    source_steering: &DMatrix<Complex<T>>,
) -> Result<ChannelRealization<T>> {
    check_efficiency("chi_receive", chi_receive)?;
    check_efficiency("chi_source", chi_source)?;
    let mut out = synthesize_holo(receive_steering, angular, source_steering)?;
    out.matrix *= cplx((chi_receive * chi_source).sqrt());
    out.model = ChannelModel::Mdf;
    Ok(out)
}

/// `Ω ⊙ (H_a ⊗ 1₂ₓ₂)`.
pub fn polarized_angular_response<T: Real>(leakage: &DMatrix<Complex<T>>, angular: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    let (nr, ns) = angular.shape();
    if leakage.shape() != (2 * nr, 2 * ns) {
        return Err(Error::Dimension(format!(
            "leakage is {:?}, expected {}x{}",
            leakage.shape(),
            2 * nr,
            2 * ns
        )));
    }
    Ok(DMatrix::from_fn(2 * nr, 2 * ns, |r, c| leakage[(r, c)] * angular[(r / 2, c / 2)]))
}

/// `Γ_R F_R [Ω ⊙ (H_a ⊗ 1₂ₓ₂)] F_Sᵀ Γ_S` with the diagonal `Γ` matrices given
/// by their entries (square roots of element efficiencies).
pub fn synthesize_pol<T: Real>(
    receive_gains: &[T],
    receive_patterns: &DMatrix<Complex<T>>,
    leakage: &DMatrix<Complex<T>>,
    angular: &DMatrix<Complex<T>>,
    source_patterns: &DMatrix<Complex<T>>,
    source_gains: &[T],
) -> Result<ChannelRealization<T>> {
    if receive_gains.len() != receive_patterns.nrows() || source_gains.len() != source_patterns.nrows() {
        return Err(Error::Dimension("efficiency gains do not match pattern rows".into()));
    }
    let inner = polarized_angular_response(leakage, angular)?;
    let f_s_t = source_patterns.transpose();
    check_product(receive_patterns, &inner, "receive patterns x leakage")?;
    check_product(&inner, &f_s_t, "leakage x source patterns")?;
    let mut h = receive_patterns * inner * f_s_t;
    for (q, &g) in receive_gains.iter().enumerate() {
        h.row_mut(q).scale_mut(g);
    }
    for (p, &g) in source_gains.iter().enumerate() {
        h.column_mut(p).scale_mut(g);
    }
    Ok(ChannelRealization::bare(h, ChannelModel::Pol))
}

/// `√χ` per element.
pub fn efficiency_gains<T: Real>(efficiencies: &[T]) -> Vec<T> {
    efficiencies.iter().map(|c| c.sqrt()).collect()
}

/// Everything one side of a polarised link contributes.
#[derive(Debug, Clone, Copy)]
pub struct ArrayEnd<'a, T: Real> {
    pub geometry: &'a ArrayGeometry<T>,
    pub samples: &'a WavenumberSampleSet<T>,
    pub patterns: &'a [PolarizedPattern<T>],
    pub efficiencies: &'a [T],
}

impl<T: Real> ArrayEnd<'_, T> {
    fn validate(&self) -> Result<()> {
        let n = self.geometry.len();
        if self.patterns.len() != n || self.efficiencies.len() != n {
            return Err(Error::Dimension(format!(
                "{} elements, {} patterns, {} efficiencies",
                n,
                self.patterns.len(),
                self.efficiencies.len()
            )));
        }
        Ok(())
    }

    /// `(Γ, F)` with steering phases folded into `F`.
    pub fn factors(&self) -> Result<(Vec<T>, DMatrix<Complex<T>>)> {
        self.validate()?;
        Ok((
            efficiency_gains(self.efficiencies),
            steered_pattern_matrix(self.patterns, self.geometry, self.samples)?,
        ))
    }
}

/// Polarised channel built from both array ends.
pub fn synthesize_pol_link<T: Real>(
    receive: &ArrayEnd<'_, T>,
    source: &ArrayEnd<'_, T>,
    leakage: &LeakageMatrix<T>,
    angular: &DMatrix<Complex<T>>,
) -> Result<ChannelRealization<T>> {
    let (g_r, f_r) = receive.factors()?;
    let (g_s, f_s) = source.factors()?;
    let mut out = synthesize_pol(&g_r, &f_r, &leakage.matrix, angular, &f_s, &g_s)?;
    out.metadata = ChannelMetadata {
        receive_label: receive.geometry.label(),
        source_label: source.geometry.label(),
        receive_efficiency: Some(receive.efficiencies.to_vec()),
        source_efficiency: Some(source.efficiencies.to_vec()),
    };
    Ok(out)
}

/// One channel entry as an explicit double sum over propagation paths,
/// evaluating patterns and plane-wave phases directly.
pub fn entry_pol<T: Real>(
    q: usize,
    p: usize,
    receive: &ArrayEnd<'_, T>,
    source: &ArrayEnd<'_, T>,
    leakage: &LeakageMatrix<T>,
    angular: &DMatrix<Complex<T>>,
) -> Result<Complex<T>> {
    receive.validate()?;
    source.validate()?;
    let k0 = two_pi::<T>();
    let (r_q, r_p) = (receive.geometry.positions[q], source.geometry.positions[p]);
    let mut acc: Complex<T> = Complex::default();
    for l in 0..receive.samples.len() {
        let (theta_r, phi_r) = receive.samples.angles(l);
        let (kx, ky) = receive.samples.normalized_wavenumber(l);
        let (rt, rp) = receive.patterns[q].evaluate(theta_r, phi_r)?;
        let a_r = phasor(-(k0 * (kx * r_q.x + ky * r_q.y)));
        for m in 0..source.samples.len() {
            let (theta_s, phi_s) = source.samples.angles(m);
            let (sx, sy) = source.samples.normalized_wavenumber(m);
            let (st, sp) = source.patterns[p].evaluate(theta_s, phi_s)?;
            let a_s = phasor(-(k0 * (sx * r_p.x + sy * r_p.y)));
            let b = leakage.block(l, m);
            let pol = rt * (b[0][0] * st + b[0][1] * sp) + rp * (b[1][0] * st + b[1][1] * sp);
            acc += pol * angular[(l, m)] * a_r * a_s;
        }
    }
    Ok(acc * cplx((receive.efficiencies[q] * source.efficiencies[p]).sqrt()))
}
