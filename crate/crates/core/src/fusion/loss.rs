use super::Pose;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoStageLoss {
    /// `estimation + refinement`, mm².
    pub total: f64,
    pub estimation: f64,
    pub refinement: f64,
}

fn sum_squared_error(a: &Pose, gt: &Pose) -> f64 {
    a.joints
        .iter()
        .zip(&gt.joints)
        .map(|(p, g)| (p - g).norm_squared())
        .sum()
}

/// Summed squared joint errors of the estimation and refinement stages.
pub fn two_stage_loss(est: &Pose, refined: &Pose, gt: &Pose) -> Result<TwoStageLoss> {
    est.check_same_count(gt)?;
    refined.check_same_count(gt)?;
    let estimation = sum_squared_error(est, gt);
    let refinement = sum_squared_error(refined, gt);
    Ok(TwoStageLoss {
        total: estimation + refinement,
        estimation,
        refinement,
    })
}
