//! Shrinkage rules, Birgé-Massart threshold selection and the signal-domain
//! constraint operator `S = ISWT . shrink . SWT`.
//!
//! Thresholds follow the half-threshold convention: a level `gamma` shrinks
//! or kills coefficients at `gamma / 2`. A Birgé-Massart `gamma` is therefore
//! twice the selected order statistic.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::transforms::{Subband, SubbandSet, SwtDomain};

/// Soft thresholding at `gamma / 2`.
pub fn soft(x: f64, gamma: f64) -> f64 {
    let t = 0.5 * gamma;
    if x <= -t {
        x + t
    } else if x >= t {
        x - t
    } else {
        0.0
    }
}

/// Hard thresholding at `gamma / 2`.
pub fn hard(x: f64, gamma: f64) -> f64 {
    if x.abs() < 0.5 * gamma {
        0.0
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    #[default]
    Soft,
    Hard,
}

impl Rule {
    pub fn apply(self, x: f64, gamma: f64) -> f64 {
        match self {
            Rule::Soft => soft(x, gamma),
            Rule::Hard => hard(x, gamma),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Soft => "soft",
            Rule::Hard => "hard",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => Ok(Rule::Soft),
            "hard" => Ok(Rule::Hard),
            other => Err(Error::Parse(format!("unknown thresholding rule '{other}'"))),
        }
    }
}

/// How a plan's thresholds were obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Fixed { gamma: f64 },
    BirgeMassart { alpha: f64, budget: usize },
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Fixed { gamma } => write!(f, "fixed(gamma={gamma})"),
            Strategy::BirgeMassart { alpha, budget } => {
                write!(f, "birge-massart(alpha={alpha},m={budget})")
            }
        }
    }
}

/// Per-subband thresholds. Approximation bands never appear.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPlan {
    gammas: Vec<(Subband, f64)>,
    strategy: Strategy,
}

impl ThresholdPlan {
    pub fn new(gammas: Vec<(Subband, f64)>, strategy: Strategy) -> Result<Self> {
        if let Some((sb, g)) = gammas.iter().find(|(_, g)| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "threshold for {sb} must be finite and >= 0, got {g}"
            )));
        }
        Ok(Self { gammas, strategy })
    }

    /// The same `gamma` on every listed subband.
    pub fn fixed(subbands: &[Subband], gamma: f64) -> Result<Self> {
        Self::new(
            subbands.iter().map(|&sb| (sb, gamma)).collect(),
            Strategy::Fixed { gamma },
        )
    }

    pub fn gamma(&self, subband: Subband) -> Option<f64> {
        self.gammas
            .iter()
            .find(|(sb, _)| *sb == subband)
            .map(|(_, g)| *g)
    }

    pub fn gammas(&self) -> &[(Subband, f64)] {
        &self.gammas
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// `key=value` lines: the strategy, then one line per subband.
    pub fn to_key_values(&self) -> String {
        let mut out = format!("strategy={}\n", self.strategy);
        for (sb, g) in &self.gammas {
            out.push_str(&format!("{sb}={g}\n"));
        }
        out
    }
}

impl fmt::Display for ThresholdPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_values())
    }
}

/// Kept-coefficient budget per detail subband at depth 1:
/// `round(m / 2^alpha)`.
pub fn birge_massart_budget(m: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Birge-Massart alpha must be > 1, got {alpha}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidParameter(
            "Birge-Massart M must be positive".into(),
        ));
    }
    Ok((m as f64 / 2f64.powf(alpha)).round() as usize)
}

/// Twice the `(keep + 1)`-th largest magnitude, or 0 when everything fits in
/// the budget.
pub fn birge_massart_gamma(values: &[f64], keep: usize) -> f64 {
    if keep >= values.len() {
        return 0.0;
    }
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let (_, nth, _) = mags.select_nth_unstable_by(keep, |a, b| b.total_cmp(a));
    2.0 * *nth
}

pub fn birge_massart_plan<C: SubbandSet>(coeffs: &C, alpha: f64, m: usize) -> Result<ThresholdPlan> {
    let keep = birge_massart_budget(m, alpha)?;
    let gammas = coeffs
        .detail_subbands()
        .iter()
        .map(|&sb| {
            let band = coeffs.subband(sb).expect("listed subband present");
            (sb, birge_massart_gamma(band, keep))
        })
        .collect();
    ThresholdPlan::new(gammas, Strategy::BirgeMassart { alpha, budget: m })
}

fn check_layout<C: SubbandSet>(coeffs: &C, plan: &ThresholdPlan) -> Result<()> {
    let layout = coeffs.detail_subbands();
    let mismatch = plan.gammas.len() != layout.len()
        || layout.iter().any(|&sb| plan.gamma(sb).is_none());
    if mismatch {
        let planned: Vec<_> = plan.gammas.iter().map(|(sb, _)| sb.name()).collect();
        let wanted: Vec<_> = layout.iter().map(|sb| sb.name()).collect();
        return Err(Error::Shape(format!(
            "plan covers subbands {planned:?}, signal decomposes into {wanted:?}"
        )));
    }
    Ok(())
}

/// Shrink the detail subbands of already computed coefficients in place.
pub fn shrink_details<C: SubbandSet>(coeffs: &mut C, plan: &ThresholdPlan, rule: Rule) -> Result<()> {
    check_layout(coeffs, plan)?;
    for &sb in coeffs.detail_subbands() {
        let gamma = plan.gamma(sb).expect("layout checked");
        if gamma == 0.0 {
            continue;
        }
        for c in coeffs.subband_mut(sb).expect("layout checked") {
            *c = rule.apply(*c, gamma);
        }
    }
    Ok(())
}

/// `ISWT(shrink(SWT(f)))`, shrinking detail subbands only.
pub fn apply_constraint<S: SwtDomain>(f: &S, plan: &ThresholdPlan, rule: Rule) -> Result<S> {
    let mut coeffs = f.swt_forward();
    shrink_details(&mut coeffs, plan, rule)?;
    S::swt_inverse(&coeffs)
}

/// Sum of absolute detail coefficients of `f`.
pub fn detail_l1_norm<S: SwtDomain>(f: &S) -> f64 {
    let coeffs = f.swt_forward();
    coeffs
        .detail_subbands()
        .iter()
        .map(|&sb| coeffs.subband(sb).unwrap().iter().map(|c| c.abs()).sum::<f64>())
        .sum()
}
