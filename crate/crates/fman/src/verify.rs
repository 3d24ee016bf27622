//! Orchestration: sampling, classification and the full verification run
//! that the CLI and the acceptance suite drive.

use serde::Serialize;

use crate::error::{FmanError, Result};
use crate::manifold::{MetricFManifold, PointCtx};
use crate::report::{
    CheckEntry, ExtractionSummary, FunctionStats, ResidualTracker, VerificationReport,
};
use crate::sample::sample_points;
use crate::tensor::ExteriorConvention;
use crate::trans_s::{self, CharacteristicFunctions, ExtractionResult};

/// Tunable knobs of a verification run. Residual tolerances are absolute.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    /// Quasi-random sample count (domain corners are added on top).
    pub points: usize,
    pub seed: u64,
    /// Structural identities (axioms, theorem identities).
    pub tol_structural: f64,
    /// Almost-trans-S verdict threshold on the normalized fit residual.
    pub tol_extraction: f64,
    /// Route agreement and prediction-vs-reextraction comparisons.
    pub tol_agreement: f64,
    pub convention: ExteriorConvention,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            points: 64,
            seed: 0,
            tol_structural: 1e-8,
            tol_extraction: 1e-6,
            tol_agreement: 1e-6,
            convention: ExteriorConvention::Blair,
        }
    }
}

/// Classification labels, ordered from weakest to strongest claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Label {
    #[serde(rename = "metric-f-contact")]
    MetricFContact,
    #[serde(rename = "normal")]
    Normal,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "S")]
    S,
    #[serde(rename = "C")]
    C,
    #[serde(rename = "almost-trans-S")]
    AlmostTransS,
    #[serde(rename = "trans-S")]
    TransS,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::MetricFContact => "metric-f-contact",
            Label::Normal => "normal",
            Label::K => "K",
            Label::S => "S",
            Label::C => "C",
            Label::AlmostTransS => "almost-trans-S",
            Label::TransS => "trans-S",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification verdicts with the residuals they were based on, so
/// borderline cases are auditable.
#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub labels: Vec<Label>,
    pub residuals: Vec<(String, f64)>,
}

impl Classification {
    pub fn has(&self, label: Label) -> bool {
        self.labels.contains(&label)
    }

    pub fn label_strings(&self) -> Vec<String> {
        self.labels.iter().map(|l| l.to_string()).collect()
    }
}

/// A prepared verification run: sample points with their evaluated contexts
/// and pointwise extractions.
pub struct Verifier<'a> {
    man: &'a MetricFManifold,
    pub cfg: CheckConfig,
    pub points: Vec<Vec<f64>>,
    pub ctxs: Vec<PointCtx>,
    /// Pointwise least-squares extraction per context; None if any point
    /// failed (degenerate structure).
    pub extractions: Option<Vec<ExtractionResult>>,
}

impl<'a> Verifier<'a> {
    pub fn new(man: &'a MetricFManifold, cfg: CheckConfig) -> Result<Self> {
        let points = sample_points(man.chart(), cfg.points, cfg.seed);
        let mut ctxs = Vec::with_capacity(points.len());
        for p in &points {
            if let Ok(ctx) = man.point_ctx_with(p, cfg.convention) {
                ctxs.push(ctx);
            }
        }
        if ctxs.is_empty() {
            return Err(FmanError::Input(
                "no sample point admits evaluation of the structure".into(),
            ));
        }
        let mut extractions = Some(Vec::with_capacity(ctxs.len()));
        for ctx in &ctxs {
            match trans_s::extract_pointwise(man, ctx) {
                Ok(ex) => {
                    if let Some(v) = extractions.as_mut() {
                        v.push(ex);
                    }
                }
                Err(_) => {
                    extractions = None;
                    break;
                }
            }
        }
        Ok(Verifier {
            man,
            cfg,
            points,
            ctxs,
            extractions,
        })
    }

    pub fn manifold(&self) -> &MetricFManifold {
        self.man
    }

    fn max_fit_residual(&self) -> Option<f64> {
        self.extractions.as_ref().map(|v| {
            v.iter()
                .fold(0.0f64, |acc, e| acc.max(e.normalized_residual))
        })
    }

    fn structural_residuals(&self) -> (f64, f64, f64, f64) {
        let mut r_contact: f64 = 0.0;
        let mut r_normal: f64 = 0.0;
        let mut r_df: f64 = 0.0;
        let mut r_deta: f64 = 0.0;
        for ctx in &self.ctxs {
            for deta in &ctx.d_eta {
                r_contact = r_contact.max((deta - &ctx.big_f).amax());
                r_deta = r_deta.max(deta.amax());
            }
            r_normal = r_normal.max(self.man.normality_components(ctx).max_abs());
            r_df = r_df.max(ctx.d_big_f.max_abs());
        }
        (r_contact, r_normal, r_df, r_deta)
    }

    pub fn classify(&self) -> Classification {
        let tol = self.cfg.tol_structural;
        let (r_contact, r_normal, r_df, r_deta) = self.structural_residuals();
        let fit = self.max_fit_residual();

        let mut labels = Vec::new();
        let contact = r_contact <= tol;
        let normal = r_normal <= tol;
        let k = normal && r_df <= tol;
        if contact {
            labels.push(Label::MetricFContact);
        }
        if normal {
            labels.push(Label::Normal);
        }
        if k {
            labels.push(Label::K);
        }
        if k && contact {
            labels.push(Label::S);
        }
        if k && r_deta <= tol {
            labels.push(Label::C);
        }
        let almost = matches!(fit, Some(f) if f <= self.cfg.tol_extraction);
        if almost {
            labels.push(Label::AlmostTransS);
            if normal {
                labels.push(Label::TransS);
            }
        }
        let mut residuals = vec![
            ("F = d eta_i (metric f-contact)".to_string(), r_contact),
            ("normality tensor".to_string(), r_normal),
            ("dF".to_string(), r_df),
            ("d eta_i".to_string(), r_deta),
        ];
        if let Some(f) = fit {
            residuals.push(("defining-identity fit (normalized)".to_string(), f));
        }
        Classification { labels, residuals }
    }

    /// Per-point samples paired with the extracted functions (only valid
    /// when extraction succeeded).
    fn samples(&self) -> Option<Vec<(PointCtx, CharacteristicFunctions)>> {
        let ex = self.extractions.as_ref()?;
        Some(
            self.ctxs
                .iter()
                .zip(ex)
                .map(|(ctx, e)| (ctx.clone(), e.cf.clone()))
                .collect(),
        )
    }

    /// Max componentwise disagreement of the three extraction routes over
    /// all sample points.
    pub fn route_disagreement(&self) -> Result<f64> {
        let ex = self
            .extractions
            .as_ref()
            .ok_or_else(|| FmanError::Degenerate("pointwise extraction unavailable".into()))?;
        let mut worst: f64 = 0.0;
        for (ctx, e) in self.ctxs.iter().zip(ex) {
            let cod = trans_s::extract_via_codifferential(self.man, ctx);
            let nf = trans_s::extract_via_nabla_f(self.man, ctx)?;
            worst = worst.max(e.cf.componentwise_distance(&cod));
            worst = worst.max(e.cf.componentwise_distance(&nf));
        }
        Ok(worst)
    }

    pub fn extraction_summary(&self) -> Option<ExtractionSummary> {
        let ex = self.extractions.as_ref()?;
        let s = self.man.s();
        let mut functions = Vec::with_capacity(2 * s);
        for i in 0..s {
            let vals: Vec<f64> = ex.iter().map(|e| e.cf.alpha[i]).collect();
            functions.push(FunctionStats::from_values(
                format!("alpha_{}", i + 1),
                &vals,
            ));
        }
        for i in 0..s {
            let vals: Vec<f64> = ex.iter().map(|e| e.cf.beta[i]).collect();
            functions.push(FunctionStats::from_values(format!("beta_{}", i + 1), &vals));
        }
        let max_fit = ex
            .iter()
            .fold(0.0f64, |acc, e| acc.max(e.normalized_residual));
        let max_cond = ex.iter().fold(0.0f64, |acc, e| acc.max(e.condition_number));
        let disagreement = self.route_disagreement().unwrap_or(f64::NAN);
        Some(ExtractionSummary {
            functions,
            max_route_disagreement: disagreement,
            max_fit_residual: max_fit,
            max_condition_number: max_cond,
        })
    }

    /// The full verification report: axioms always; theorem identities gated
    /// on the classification; declared-function assertions when present.
    pub fn verify_report(&self) -> Result<VerificationReport> {
        let cfg = &self.cfg;
        let mut report = self.man.check_axioms(&self.points, cfg.tol_structural);
        let classification = self.classify();
        report.labels = classification.label_strings();

        let normal = classification.has(Label::Normal);
        let almost = classification.has(Label::AlmostTransS);
        let trans = classification.has(Label::TransS);

        if normal {
            report.push(
                self.man
                    .check_normal_bracket(&self.points, cfg.tol_structural),
            );
        }

        if almost {
            let samples = self
                .samples()
                .expect("almost trans-S implies extraction succeeded");

            let mut fit = ResidualTracker::new(
                "almost trans-S: defining-identity fit residual (normalized)",
                cfg.tol_extraction,
            );
            if let Some(ex) = &self.extractions {
                for (ctx, e) in self.ctxs.iter().zip(ex) {
                    fit.update(e.normalized_residual, &ctx.p);
                }
            }
            report.push(fit.entry());

            report.push(trans_s::check_normality_defect_identity(
                self.man,
                &self.ctxs,
                cfg.tol_structural,
            ));

            // Characterization: the xi-derivative identity holds iff the
            // structure is normal, each side computed independently.
            let (eq_xi, eq_eta_k) =
                trans_s::check_xi_derivative(self.man, &samples, cfg.tol_structural)?;
            let xi_holds = eq_xi.pass;
            let agree = xi_holds == normal;
            report.push(CheckEntry {
                name: format!(
                    "characterization: xi-derivative identity ({xi_holds}) iff normal ({normal})"
                ),
                max_residual: if agree { 0.0 } else { 1.0 },
                tolerance: 0.0,
                pass: agree,
                witness: None,
            });

            if trans {
                report.push(eq_xi);
                report.push(eq_eta_k);
                for entry in trans_s::check_prop_identities(&samples, cfg.tol_structural) {
                    report.push(entry);
                }
                report.push(trans_s::check_nabla_eta(
                    self.man,
                    &samples,
                    cfg.tol_structural,
                )?);
                report.push(trans_s::k_manifold_criterion(
                    self.man,
                    &samples,
                    cfg.tol_structural,
                ));
                for i in 0..self.man.s() {
                    let (display, iff) =
                        trans_s::killing_defect(self.man, i, &samples, cfg.tol_structural)?;
                    report.push(display);
                    report.push(iff);
                }
                let disagreement = self.route_disagreement()?;
                report.push(CheckEntry {
                    name: "trans-S: three-route extraction agreement".into(),
                    max_residual: disagreement,
                    tolerance: cfg.tol_agreement,
                    pass: disagreement <= cfg.tol_agreement,
                    witness: None,
                });
            }
        }

        if let (Some(declared), Some(ex)) = (self.man.declared_cf(), &self.extractions) {
            let mut tracker = ResidualTracker::new(
                "declared characteristic functions match extraction",
                cfg.tol_agreement,
            );
            for (ctx, e) in self.ctxs.iter().zip(ex) {
                let want = declared.eval(&ctx.p)?;
                tracker.update(e.cf.componentwise_distance(&want), &ctx.p);
            }
            report.push(tracker.entry());
        }

        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::gallery;

    fn labels_of(name: &str) -> Vec<Label> {
        let man = gallery::manifold(name).unwrap();
        let verifier = Verifier::new(
            &man,
            CheckConfig {
                points: 24,
                ..CheckConfig::default()
            },
        )
        .unwrap();
        verifier.classify().labels
    }

    #[test]
    fn gallery_classification_table() {
        use Label::*;
        let cases: [(&str, &[Label]); 9] = [
            ("euclidean_C", &[Normal, K, C, AlmostTransS, TransS]),
            (
                "standard_S",
                &[MetricFContact, Normal, K, S, AlmostTransS, TransS],
            ),
            ("kenmotsu", &[Normal, AlmostTransS, TransS]),
            ("kaehler_times_S", &[Normal, K]),
            ("deformed_S", &[Normal, K, AlmostTransS, TransS]),
            ("deformed_kenmotsu", &[Normal, AlmostTransS, TransS]),
            ("warped_almost", &[AlmostTransS]),
            ("warped_non_kaehler", &[]),
            ("trans_sasakian", &[Normal, AlmostTransS, TransS]),
        ];
        for (name, want) in cases {
            let got = labels_of(name);
            assert_eq!(got, want.to_vec(), "labels of {name}");
        }
    }

    #[test]
    fn verify_report_passes_on_whole_gallery() {
        for name in gallery::all_manifold_names() {
            let man = gallery::manifold(name).unwrap();
            let verifier = Verifier::new(
                &man,
                CheckConfig {
                    points: 24,
                    ..CheckConfig::default()
                },
            )
            .unwrap();
            let report = verifier.verify_report().unwrap();
            assert!(
                report.passed(),
                "{name}: {:?}",
                report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| (&c.name, c.max_residual))
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn deformed_s_is_k_manifold_with_constant_alpha() {
        // A trans-S structure with a non-zero constant alpha has closed F.
        let labels = labels_of("deformed_S");
        assert!(labels.contains(&Label::K));
        assert!(!labels.contains(&Label::S));
    }

    #[test]
    fn counterexample_is_k_but_not_almost_trans_s() {
        let labels = labels_of("kaehler_times_S");
        assert!(labels.contains(&Label::K) && labels.contains(&Label::Normal));
        assert!(!labels.contains(&Label::AlmostTransS));
    }
}
