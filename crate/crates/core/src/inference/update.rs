use super::Hyperparams;
use crate::scalar::Real;

/// Topic subset a message update is restricted to.
#[derive(Debug, Clone, Copy)]
pub enum Topics<'a> {
    All,
    /// Ascending, non-empty, distinct topic indices.
    Subset(&'a [usize]),
}

/// Statistics one message update reads.
#[derive(Debug, Clone, Copy)]
pub struct MessageContext<'a, T> {
    /// `theta_hat_d(.)` including this entry's current contribution.
    pub theta_doc: &'a [T],
    /// `phi_hat_w(.)` for the entry's word.
    pub phi_word: &'a [T],
    pub topic_totals: &'a [T],
    /// Whether `phi_word` / `topic_totals` already contain this entry's
    /// current contribution (and so must exclude it).
    pub phi_includes_entry: bool,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Normal,
    /// Every unnormalized weight over the subset was zero or non-finite; the
    /// subset received uniform mass instead.
    Degenerate,
}

/// Recompute the message of one entry:
///
/// `mu(k) ∝ [theta_{-w,d}(k) + alpha] [phi_{w,-d}(k) + beta] / [phi_{-(w,d)}(k) + W beta]`
///
/// with exclusion terms formed by subtracting `x * old(k)` (clamped at zero).
/// Under a subset, topics outside it keep their old value and the subset's
/// old mass is redistributed in proportion to the fresh weights.
pub fn update_message<T: Real>(
    count: u32,
    ctx: &MessageContext<'_, T>,
    old: &[T],
    topics: Topics<'_>,
    hyper: &Hyperparams<T>,
    out: &mut [T],
) -> UpdateOutcome {
    let x = T::of_count(count);
    let w_beta = T::of(ctx.vocab_size as f64) * hyper.beta;
    let zero = T::zero();
    let weight = |k: usize| -> T {
        let own = x * old[k];
        let theta = (ctx.theta_doc[k] - own).max(zero);
        let (phi, total) = if ctx.phi_includes_entry {
            ((ctx.phi_word[k] - own).max(zero), (ctx.topic_totals[k] - own).max(zero))
        } else {
            (ctx.phi_word[k], ctx.topic_totals[k])
        };
        (theta + hyper.alpha) * (phi + hyper.beta) / (total + w_beta)
    };

    match topics {
        Topics::All => {
            let mut sum = zero;
            for (k, o) in out.iter_mut().enumerate() {
                *o = weight(k);
                sum = sum + *o;
            }
            if sum > zero && sum.is_finite() {
                out.iter_mut().for_each(|o| *o = *o / sum);
                UpdateOutcome::Normal
            } else {
                let u = T::one() / T::of(out.len() as f64);
                out.iter_mut().for_each(|o| *o = u);
                UpdateOutcome::Degenerate
            }
        }
        Topics::Subset(subset) => {
            out.copy_from_slice(old);
            let mut sum = zero;
            let mut mass = zero;
            for &k in subset {
                out[k] = weight(k);
                sum = sum + out[k];
                mass = mass + old[k];
            }
            if sum > zero && sum.is_finite() {
                let scale = mass / sum;
                for &k in subset {
                    out[k] = out[k] * scale;
                }
                UpdateOutcome::Normal
            } else {
                let u = mass / T::of(subset.len() as f64);
                for &k in subset {
                    out[k] = u;
                }
                UpdateOutcome::Degenerate
            }
        }
    }
}

/// `r(k) = x * |new(k) - old(k)|`.
pub fn compute_residual<T: Real>(old: &[T], new: &[T], count: u32, out: &mut [T]) {
    let x = T::of_count(count);
    for ((r, &a), &b) in out.iter_mut().zip(old).zip(new) {
        *r = x * (b - a).abs();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hyper(alpha: f64, beta: f64, k: usize) -> Hyperparams<f64> {
        Hyperparams::new(alpha, beta, k).unwrap()
    }

    #[test]
    fn single_topic_is_always_one() {
        let ctx = MessageContext {
            theta_doc: &[7.0],
            phi_word: &[3.0],
            topic_totals: &[9.0],
            phi_includes_entry: true,
            vocab_size: 4,
        };
        let mut out = [0.0];
        update_message(2, &ctx, &[1.0], Topics::Subset(&[0]), &hyper(0.1, 0.01, 1), &mut out);
        assert_eq!(out, [1.0]);
        update_message(2, &ctx, &[1.0], Topics::All, &hyper(0.1, 0.01, 1), &mut out);
        assert_eq!(out, [1.0]);
    }

    #[test]
    fn symmetric_inputs_give_uniform_message() {
        let ctx = MessageContext {
            theta_doc: &[1.0, 1.0],
            phi_word: &[1.0, 1.0],
            topic_totals: &[2.0, 2.0],
            phi_includes_entry: true,
            vocab_size: 2,
        };
        let mut out = [0.0; 2];
        let outcome = update_message(1, &ctx, &[0.5, 0.5], Topics::All, &hyper(1.0, 0.01, 2), &mut out);
        assert_eq!(outcome, UpdateOutcome::Normal);
        assert_eq!(out, [0.5, 0.5]);
    }

    #[test]
    fn hand_computed_asymmetric_update() {
        // raw(k) = (theta-x*old+a)(phi-x*old+b)/(tot-x*old+W*b)
        let ctx = MessageContext {
            theta_doc: &[2.0, 1.0],
            phi_word: &[3.0, 1.0],
            topic_totals: &[5.0, 4.0],
            phi_includes_entry: true,
            vocab_size: 3,
        };
        let old = [0.5, 0.5];
        let raw0 = (2.0 - 0.5 + 0.5) * (3.0 - 0.5 + 0.1) / (5.0 - 0.5 + 0.3);
        let raw1 = (1.0 - 0.5 + 0.5) * (1.0 - 0.5 + 0.1) / (4.0 - 0.5 + 0.3);
        let mut out = [0.0; 2];
        update_message(1, &ctx, &old, Topics::All, &hyper(0.5, 0.1, 2), &mut out);
        assert!((out[0] - raw0 / (raw0 + raw1)).abs() < 1e-15);
        assert!((out[1] - raw1 / (raw0 + raw1)).abs() < 1e-15);
    }

    #[test]
    fn phi_exclusion_can_be_disabled() {
        let ctx = MessageContext {
            theta_doc: &[1.0, 1.0],
            phi_word: &[0.0, 0.0],
            topic_totals: &[0.0, 0.0],
            phi_includes_entry: false,
            vocab_size: 2,
        };
        let mut out = [0.0; 2];
        update_message(1, &ctx, &[0.9, 0.1], Topics::All, &hyper(1.0, 0.01, 2), &mut out);
        // theta side only: (1-0.9+1) : (1-0.1+1)
        assert!((out[0] - 1.1 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let mut r = [0.0; 2];
        compute_residual(&[0.3, 0.7], &[0.3, 0.7], 5, &mut r);
        assert_eq!(r, [0.0, 0.0]);
        compute_residual(&[1.0, 0.0], &[0.0, 1.0], 3, &mut r);
        assert_eq!(r, [3.0, 3.0]);
    }

    #[test]
    fn degenerate_weights_fall_back_to_uniform() {
        let ctx = MessageContext {
            theta_doc: &[f64::INFINITY, 1.0, 1.0],
            phi_word: &[f64::INFINITY, 1.0, 1.0],
            topic_totals: &[1.0, 1.0, 1.0],
            phi_includes_entry: false,
            vocab_size: 2,
        };
        let mut out = [0.0; 3];
        let outcome = update_message(1, &ctx, &[0.2, 0.3, 0.5], Topics::Subset(&[0, 2]), &hyper(0.1, 0.1, 3), &mut out);
        assert_eq!(outcome, UpdateOutcome::Degenerate);
        assert_eq!(out[1], 0.3);
        assert!((out[0] - 0.35).abs() < 1e-15 && (out[2] - 0.35).abs() < 1e-15);
    }

    fn normalized(v: Vec<f64>) -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    proptest! {
        #[test]
        fn restricted_update_normalizes_and_freezes(
            k in 2usize..8,
            seed_vals in proptest::collection::vec(0.01f64..1.0, 8),
            stats in proptest::collection::vec(0.0f64..20.0, 8),
            mask in proptest::collection::vec(any::<bool>(), 8),
            count in 1u32..6,
        ) {
            let old = normalized(seed_vals[..k].to_vec());
            let theta: Vec<f64> = (0..k).map(|i| stats[i] + count as f64 * old[i]).collect();
            let phi: Vec<f64> = (0..k).map(|i| stats[(i + 3) % 8] + count as f64 * old[i]).collect();
            let totals: Vec<f64> = phi.iter().map(|p| p + 10.0).collect();
            let mut subset: Vec<usize> = (0..k).filter(|&i| mask[i]).collect();
            if subset.is_empty() { subset.push(0); }
            let ctx = MessageContext {
                theta_doc: &theta, phi_word: &phi, topic_totals: &totals,
                phi_includes_entry: true, vocab_size: 50,
            };
            let h = hyper(0.2, 0.01, k);
            let mut out = vec![0.0; k];
            update_message(count, &ctx, &old, Topics::Subset(&subset), &h, &mut out);
            let sum: f64 = out.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(out.iter().all(|&v| v >= 0.0));
            for i in 0..k {
                if !subset.contains(&i) {
                    prop_assert_eq!(out[i], old[i]);
                }
            }
            // full subset equals the unrestricted update
            let all: Vec<usize> = (0..k).collect();
            let mut a = vec![0.0; k];
            let mut b = vec![0.0; k];
            update_message(count, &ctx, &old, Topics::Subset(&all), &h, &mut a);
            update_message(count, &ctx, &old, Topics::All, &h, &mut b);
            for i in 0..k {
                prop_assert!((a[i] - b[i]).abs() < 1e-9);
            }
            // residual is zero exactly at a fixed point
            let mut r = vec![0.0; k];
            compute_residual(&old, &out, count, &mut r);
            let moved = old.iter().zip(&out).any(|(x, y)| x != y);
            prop_assert_eq!(r.iter().any(|&v| v > 0.0), moved);
        }
    }
}
