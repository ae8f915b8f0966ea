//! Clipped-surrogate loss with value and entropy terms, and its analytic gradient.

use serde::{Deserialize, Serialize};

use super::agent::{ActorCritic, Workspace};
use super::policy::{entropy, log_prob, log_std_active};
use crate::error::{Error, Result};

/// A minibatch in row-major layout.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub obs: &'a [f64],
    pub actions: &'a [f64],
    pub old_log_probs: &'a [f64],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
}

impl Batch<'_> {
    pub fn len(&self) -> usize {
        self.old_log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.old_log_probs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossCoefficients {
    pub clip_eps: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
}

impl Default for LossCoefficients {
    fn default() -> Self {
        LossCoefficients { clip_eps: 0.2, entropy_coef: 0.01, value_coef: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossTerms {
    pub loss: f64,
    /// Negated mean clipped surrogate.
    pub policy_loss: f64,
    /// Mean squared value error.
    pub value_loss: f64,
    pub entropy: f64,
    /// Fraction of samples with `|ratio - 1| > clip_eps`.
    pub clip_frac: f64,
    /// Mean of `(ratio - 1) - ln(ratio)`.
    pub approx_kl: f64,
}

/// `min(ratio * adv, clip(ratio, 1 - eps, 1 + eps) * adv)` and its derivative
/// with respect to `ratio`, which is zero when the clipped branch is the
/// strict minimum.
pub fn clipped_surrogate(ratio: f64, adv: f64, eps: f64) -> (f64, f64) {
    let unclipped = ratio * adv;
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
    if unclipped <= clipped {
        (unclipped, adv)
    } else {
        (clipped, 0.0)
    }
}

/// Evaluate the loss on `batch` and write its gradient with respect to
/// `ac.params` into `grad` (overwritten, not clipped).
pub fn ppo_objective(
    ac: &ActorCritic,
    batch: &Batch<'_>,
    coefs: &LossCoefficients,
    ws: &mut Workspace,
    grad: &mut [f64],
) -> Result<LossTerms> {
    let n = batch.len();
    let (od, ad) = (ac.obs_dim(), ac.act_dim());
    for (what, expected, got) in [
        ("batch observations", n * od, batch.obs.len()),
        ("batch actions", n * ad, batch.actions.len()),
        ("batch advantages", n, batch.advantages.len()),
        ("batch returns", n, batch.returns.len()),
        ("gradient", ac.num_params(), grad.len()),
    ] {
        if expected != got {
            return Err(Error::LengthMismatch { what, expected, got });
        }
    }
    if n == 0 {
        return Err(Error::LengthMismatch { what: "batch", expected: 1, got: 0 });
    }
    grad.fill(0.0);
    let inv_n = 1.0 / n as f64;

    ac.actor_forward_batch(batch.obs, n, ws)?;
    ac.critic_forward_batch(batch.obs, n, ws)?;

    let raw_ls = ac.log_std_params();
    let ls = ac.log_std();
    let inv_std: Vec<f64> = ls.iter().map(|l| (-l).exp()).collect();

    let mut d_mean = vec![0.0; n * ad];
    let mut d_ls = vec![0.0; ad];
    let (mut surr_sum, mut clipped, mut kl_sum) = (0.0, 0usize, 0.0);
    let means = ws.actor.output();
    for i in 0..n {
        let mean = &means[i * ad..(i + 1) * ad];
        let action = &batch.actions[i * ad..(i + 1) * ad];
        let log_ratio = log_prob(mean, &ls, action) - batch.old_log_probs[i];
        let ratio = log_ratio.exp();
        let (s, ds) = clipped_surrogate(ratio, batch.advantages[i], coefs.clip_eps);
        surr_sum += s;
        if (ratio - 1.0).abs() > coefs.clip_eps {
            clipped += 1;
        }
        kl_sum += (ratio - 1.0) - log_ratio;
        // dL/dlogp = -(1/n) * ds/dratio * ratio
        let coeff = -inv_n * ds * ratio;
        if coeff != 0.0 {
            for j in 0..ad {
                let z = (action[j] - mean[j]) * inv_std[j];
                d_mean[i * ad + j] = coeff * z * inv_std[j];
                d_ls[j] += coeff * (z * z - 1.0);
            }
        }
    }

    let values = ws.critic.output();
    let mut d_value = vec![0.0; n];
    let mut sq_sum = 0.0;
    for i in 0..n {
        let e = values[i] - batch.returns[i];
        sq_sum += e * e;
        d_value[i] = coefs.value_coef * 2.0 * e * inv_n;
    }

    let ent = entropy(&ls);
    for (j, d) in d_ls.iter_mut().enumerate() {
        *d -= coefs.entropy_coef;
        if !log_std_active(raw_ls[j]) {
            *d = 0.0;
        }
    }

    let (g_actor, g_ls, g_critic) = ac.split_mut(grad);
    ac.actor.backward(ac.actor_params(), &mut ws.actor, &d_mean, g_actor)?;
    g_ls.copy_from_slice(&d_ls);
    ac.critic.backward(ac.critic_params(), &mut ws.critic, &d_value, g_critic)?;

    let policy_loss = -surr_sum * inv_n;
    let value_loss = sq_sum * inv_n;
    let terms = LossTerms {
        loss: policy_loss + coefs.value_coef * value_loss - coefs.entropy_coef * ent,
        policy_loss,
        value_loss,
        entropy: ent,
        clip_frac: clipped as f64 * inv_n,
        approx_kl: kl_sum * inv_n,
    };
    if !terms.loss.is_finite() || !grad.iter().all(|g| g.is_finite()) {
        return Err(Error::Numerical("non-finite loss or gradient".into()));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppo::policy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn surrogate_cases() {
        assert_eq!(clipped_surrogate(1.0, 1.0, 0.2), (1.0, 1.0));
        assert_eq!(clipped_surrogate(1.5, 1.0, 0.2).0, 1.2);
        assert_eq!(clipped_surrogate(0.5, -1.0, 0.2).0, -0.8);
        assert_eq!(clipped_surrogate(1.5, 1.0, 0.2).1, 0.0);
        assert_eq!(clipped_surrogate(0.5, -1.0, 0.2).1, 0.0);
        // Pessimistic side keeps its gradient.
        assert_eq!(clipped_surrogate(0.5, 1.0, 0.2), (0.5, 1.0));
        assert_eq!(clipped_surrogate(1.5, -1.0, 0.2), (-1.5, -1.0));
    }

    struct Fixture {
        ac: ActorCritic,
        obs: Vec<f64>,
        actions: Vec<f64>,
        old: Vec<f64>,
        adv: Vec<f64>,
        ret: Vec<f64>,
    }

    fn fixture(seed: u64, n: usize) -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ac = ActorCritic::new(4, 2, &[5, 3]).unwrap();
        for p in ac.params.iter_mut() {
            *p = rng.random_range(-0.8..0.8);
        }
        let mut ws = Workspace::default();
        let mut obs = Vec::new();
        let mut actions = Vec::new();
        let mut old = Vec::new();
        for _ in 0..n {
            let o: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (mean, ls) = ac.actor_forward(&o, &mut ws).unwrap();
            let (a, lp) = policy::sample(&mean, &ls, &mut rng);
            obs.extend(o);
            actions.extend(a);
            old.push(lp);
        }
        let adv = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ret = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Fixture { ac, obs, actions, old, adv, ret }
    }

    impl Fixture {
        fn batch(&self) -> Batch<'_> {
            Batch { obs: &self.obs, actions: &self.actions, old_log_probs: &self.old, advantages: &self.adv, returns: &self.ret }
        }
    }

    #[test]
    fn ratio_is_one_at_old_policy() {
        let f = fixture(1, 8);
        let mut ws = Workspace::default();
        let mut grad = vec![0.0; f.ac.num_params()];
        let t = ppo_objective(&f.ac, &f.batch(), &LossCoefficients::default(), &mut ws, &mut grad).unwrap();
        assert_eq!(t.approx_kl, 0.0);
        assert_eq!(t.clip_frac, 0.0);
        let mean_adv = f.adv.iter().sum::<f64>() / 8.0;
        assert!((t.policy_loss + mean_adv).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut f = fixture(2, 6);
        // Move away from the old policy so some samples sit in the clipped region.
        for p in f.ac.params.iter_mut().take(10) {
            *p += 0.3;
        }
        let coefs = LossCoefficients::default();
        let mut ws = Workspace::default();
        let mut grad = vec![0.0; f.ac.num_params()];
        ppo_objective(&f.ac, &f.batch(), &coefs, &mut ws, &mut grad).unwrap();
        let mut scratch = vec![0.0; grad.len()];
        let h = 1e-6;
        for i in 0..grad.len() {
            let mut ac = f.ac.clone();
            ac.params[i] += h;
            let up = ppo_objective(&ac, &f.batch(), &coefs, &mut ws, &mut scratch).unwrap().loss;
            ac.params[i] -= 2.0 * h;
            let down = ppo_objective(&ac, &f.batch(), &coefs, &mut ws, &mut scratch).unwrap().loss;
            let fd = (up - down) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-7 * (1.0 + fd.abs()), "param {i}: fd {fd} analytic {}", grad[i]);
        }
    }

    #[test]
    fn length_checks() {
        let f = fixture(3, 4);
        let mut ws = Workspace::default();
        let mut grad = vec![0.0; f.ac.num_params()];
        let bad = Batch { returns: &f.ret[..3], ..f.batch() };
        assert!(matches!(
            ppo_objective(&f.ac, &bad, &LossCoefficients::default(), &mut ws, &mut grad),
            Err(Error::LengthMismatch { what: "batch returns", .. })
        ));
    }
}
