//! Point-to-point ergodic capacity sweeps.

use holomimo::angular::{draw_angular_response, variance_map, Normalization};
use holomimo::array::{propagating_sample_set, steering_matrix};
use holomimo::capacity::{eigen_spectrum, rate_from_eigenvalues, run_trials, Allocation};
use holomimo::channel::polarized_angular_response;
use holomimo::efficiency::transmission_efficiency_bound;
use holomimo::leakage::{draw_leakage, XprParameters};
use holomimo::pattern::{isotropic_pattern, steered_pattern_matrix, IsotropicPolarization};
use holomimo::reduced::ReducedLink;
use holomimo::rng::{Purpose, SeedLineage};
use holomimo::{CMatrix, Link, VarianceMap, Xpr};

use super::{column_estimates, db_to_linear, geometry, get};
use crate::arrays::DipoleArray;
use crate::config::{structure_label, EfficiencyMode, ScenarioConfig};
use crate::error::RunError;
use crate::output::{results_file, OutputFile, ResultRow};

/// One reduced link and how to draw its middle matrix.
pub struct SingleLink<'a> {
    pub link: Link,
    pub map: &'a VarianceMap,
    /// `None` draws the scalar model.
    pub xpr: Option<Xpr>,
    /// Multiplies every eigenvalue (`χ_R χ_S` for the efficiency-modified model).
    pub gain: f64,
}

impl SingleLink<'_> {
    /// Eigenvalues of `H Hᴴ` for one trial.
    pub fn spectrum(&self, lineage: SeedLineage) -> holomimo::Result<Vec<f64>> {
        let h_a = draw_angular_response(self.map, &mut lineage.stream(Purpose::AngularResponse));
        let middle = match &self.xpr {
            None => h_a,
            Some(xpr) => {
                let (nr, ns) = self.map.shape();
                let leak = draw_leakage(xpr, nr, ns, &mut lineage.stream(Purpose::Leakage));
                polarized_angular_response(&leak.matrix, &h_a)?
            }
        };
        let mut eig = eigen_spectrum(&self.link.core(&middle));
        eig.iter_mut().for_each(|v| *v *= self.gain);
        Ok(eig)
    }
}

/// Rates of several links per trial, one column per (link, allocation).
fn sweep(
    config: &ScenarioConfig,
    links: &[SingleLink<'_>],
    allocations: &[Allocation],
) -> Result<Vec<holomimo::capacity::Estimate>, RunError> {
    let p = &config.params;
    let power = get(&p.total_power_w, "total_power_w")?;
    let rho = db_to_linear(get(&p.snr_db, "snr_db")?);
    let per_trial = run_trials(config.seed, config.trials, |lineage| {
        let mut out = Vec::with_capacity(links.len() * allocations.len());
        for l in links {
            let eig = l.spectrum(lineage)?;
            for &a in allocations {
                out.push(rate_from_eigenvalues(&eig, l.link.source_elements, power, rho, a));
            }
        }
        Ok(out)
    })?;
    Ok(column_estimates(&per_trial))
}

fn allocations(config: &ScenarioConfig) -> Result<Vec<Allocation>, RunError> {
    Ok(get(&config.params.allocations, "allocations")?
        .into_iter()
        .map(Allocation::from)
        .collect())
}

fn push_rows(
    rows: &mut Vec<ResultRow>,
    scenario: &str,
    spacing: f64,
    models: &[String],
    allocations: &[Allocation],
    estimates: &[holomimo::capacity::Estimate],
) {
    let mut it = estimates.iter();
    for m in models {
        for a in allocations {
            rows.push(ResultRow::new(
                scenario,
                spacing,
                m.clone(),
                a.label(),
                *it.next().expect("one estimate per column"),
            ));
        }
    }
}

/// Scalar holographic and efficiency-modified capacity against element spacing.
pub fn fig8a_spacing_sweep(config: &ScenarioConfig) -> Result<Vec<OutputFile>, RunError> {
    let p = &config.params;
    let (ax, ay) = (get(&p.aperture_x_wl, "aperture_x_wl")?, get(&p.aperture_y_wl, "aperture_y_wl")?);
    let samples = propagating_sample_set(ax, ay)?;
    let map = variance_map(&samples, &samples, Normalization::UnitAverageGain);
    let allocs = allocations(config)?;
    let mut rows = Vec::new();
    for (i, &d) in get(&p.spacings_wl, "spacings_wl")?.iter().enumerate() {
        let g = geometry(ax, ay, d, d, &format!("params.spacings_wl[{i}]"))?;
        let u = steering_matrix(&g, &samples)?;
        let chi = transmission_efficiency_bound(d, d)?;
        let link = ReducedLink::new(&u, &u);
        let links = [
            SingleLink {
                link: link.clone(),
                map: &map,
                xpr: None,
                gain: 1.0,
            },
            SingleLink {
                link,
                map: &map,
                xpr: None,
                gain: chi * chi,
            },
        ];
        let est = sweep(config, &links, &allocs)?;
        push_rows(&mut rows, config.scenario.label(), d, &["holo".into(), "mdf".into()], &allocs, &est);
    }
    Ok(vec![results_file(&rows)?])
}

/// Capacity of θ-polarised isotropic arrays against the cross-polarisation ratio.
pub fn fig8b_xpr_sweep(config: &ScenarioConfig) -> Result<Vec<OutputFile>, RunError> {
    let p = &config.params;
    let (ax, ay) = (get(&p.aperture_x_wl, "aperture_x_wl")?, get(&p.aperture_y_wl, "aperture_y_wl")?);
    let (dx, dy) = (get(&p.spacing_x_wl, "spacing_x_wl")?, get(&p.spacing_y_wl, "spacing_y_wl")?);
    let g = geometry(ax, ay, dx, dy, "params.spacing_x_wl")?;
    let samples = propagating_sample_set(ax, ay)?;
    let map = variance_map(&samples, &samples, Normalization::UnitAverageGain);
    let u = steering_matrix(&g, &samples)?;
    let patterns = vec![isotropic_pattern(IsotropicPolarization::Theta); g.len()];
    let f = steered_pattern_matrix(&patterns, &g, &samples)?;
    let pol_link = ReducedLink::new(&f, &f);

    let mut models = vec!["holo".to_string()];
    let mut links = vec![SingleLink {
        link: ReducedLink::new(&u, &u),
        map: &map,
        xpr: None,
        gain: 1.0,
    }];
    for (i, &k) in get(&p.kappas, "kappas")?.iter().enumerate() {
        let xpr = XprParameters::fixed(k).map_err(|e| RunError::Config(format!("params.kappas[{i}]: {e}")))?;
        models.push(format!("pol(kappa={k:e})"));
        links.push(SingleLink {
            link: pol_link.clone(),
            map: &map,
            xpr: Some(xpr),
            gain: 1.0,
        });
    }
    if let Some(mu) = p.xpr_mu_db {
        let sigma = p.xpr_sigma_db.unwrap_or(0.0);
        let xpr = XprParameters::log_normal(mu, sigma).map_err(|e| RunError::Config(format!("params.xpr_mu_db: {e}")))?;
        models.push(format!("pol(xpr_mu_db={mu},xpr_sigma_db={sigma})"));
        links.push(SingleLink {
            link: pol_link,
            map: &map,
            xpr: Some(xpr),
            gain: 1.0,
        });
    }
    let allocs = allocations(config)?;
    let est = sweep(config, &links, &allocs)?;
    let mut rows = Vec::new();
    push_rows(&mut rows, config.scenario.label(), dx, &models, &allocs, &est);
    Ok(vec![results_file(&rows)?])
}

/// `diag(√χ) · F`.
pub(crate) fn weighted(f: &CMatrix, efficiencies: &[f64]) -> CMatrix {
    let mut out = f.clone();
    for (q, &c) in efficiencies.iter().enumerate() {
        out.row_mut(q).scale_mut(c.sqrt());
    }
    out
}

/// Dipole arrays of a fixed aperture at both link ends, one row per
/// structure and efficiency mode.
pub fn fig11_dipole_arrays(config: &ScenarioConfig) -> Result<Vec<OutputFile>, RunError> {
    let p = &config.params;
    let (ax, ay) = (get(&p.aperture_x_wl, "aperture_x_wl")?, get(&p.aperture_y_wl, "aperture_y_wl")?);
    let axis = get(&p.dipole_axis, "dipole_axis")?;
    let files = p.pattern_files.clone().unwrap_or_default();
    let xpr = XprParameters::log_normal(get(&p.xpr_mu_db, "xpr_mu_db")?, get(&p.xpr_sigma_db, "xpr_sigma_db")?)?;
    let modes = get(&p.efficiency_modes, "efficiency_modes")?;
    let allocs = allocations(config)?;
    let mut rows = Vec::new();
    for s in get(&p.structures, "structures")? {
        let file = files.get(&structure_label(s)).map(|p| p.as_path());
        let arr = DipoleArray::build(s, ax, ay, axis, file)?;
        let map = variance_map(&arr.samples, &arr.samples, Normalization::UnitAverageGain);
        let f = steered_pattern_matrix(&arr.patterns, &arr.geometry, &arr.samples)?;
        let mut links = Vec::new();
        for &mode in &modes {
            links.push(match mode {
                EfficiencyMode::Holo => {
                    let u = steering_matrix(&arr.geometry, &arr.samples)?;
                    SingleLink {
                        link: ReducedLink::new(&u, &u),
                        map: &map,
                        xpr: None,
                        gain: 1.0,
                    }
                }
                _ => {
                    let b = weighted(&f, &arr.efficiencies(mode)?);
                    SingleLink {
                        link: ReducedLink::new(&b, &b),
                        map: &map,
                        xpr: Some(xpr),
                        gain: 1.0,
                    }
                }
            });
        }
        let est = sweep(config, &links, &allocs)?;
        let labels: Vec<String> = modes.iter().map(|m| m.label().to_string()).collect();
        push_rows(&mut rows, config.scenario.label(), arr.geometry.spacing_x, &labels, &allocs, &est);
    }
    Ok(vec![results_file(&rows)?])
}
