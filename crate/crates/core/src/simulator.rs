//! Ground-truth user process.
//!
//! A user carries a unit latent vector. At position `t` of an ordering the
//! exposed item `x` is clicked with `σ(a·⟨l,x⟩ + bc[t])` and scrolled past
//! with `σ(g·⟨l,x⟩ + bs[t])`, independently. A bias list shorter than the
//! slate repeats its last entry. After the exposure the latent drifts to
//! `normalize(l + δ·x)`, either always or only on a click. The session ends
//! at the first position without a scroll.

use alloc::string::String;
use alloc::vec::Vec;

use rand::distributions::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math;
use crate::model::{Labels, SessionInput};
use crate::rng::{self, SimRng};
use crate::training::compute_auc;
use crate::{Error, Result};

/// Longest ordering the exact evaluator accepts.
pub const MAX_EXACT_LEN: usize = 15;

const HISTORY_SALT: u64 = 0x6869_7374;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruthConfig {
    pub dim: usize,
    pub n_users: usize,
    pub n_items: usize,
    /// `a`
    pub click_scale: f64,
    /// `bc[t]`; infinities give probabilities of exactly 0 or 1.
    pub click_bias: Vec<f64>,
    /// `g`
    pub scroll_scale: f64,
    pub scroll_bias: Vec<f64>,
    /// `δ`
    pub drift: f64,
    /// Drift only after a click instead of after every exposure.
    pub drift_on_click: bool,
    pub seed: u64,
    /// Item entries are drawn from `N(0, item_scale² / dim)`.
    pub item_scale: f64,
    /// Explicit user latents, normalized on load; drawn when absent.
    pub users: Option<Vec<Vec<f64>>>,
    pub items: Option<Vec<Vec<f64>>>,
    /// Length of each user's long-term history.
    pub history_len: usize,
    /// Logged slate length of generated sessions.
    pub slate_len: usize,
}

impl Default for GroundTruthConfig {
    fn default() -> Self {
        Self {
            dim: 4,
            n_users: 200,
            n_items: 60,
            click_scale: 2.5,
            click_bias: alloc::vec![-1.0],
            scroll_scale: -4.0,
            scroll_bias: alloc::vec![1.0],
            drift: 0.4,
            drift_on_click: false,
            seed: 0,
            item_scale: 1.0,
            users: None,
            items: None,
            history_len: 10,
            slate_len: 15,
        }
    }
}

impl GroundTruthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(String::from(m)));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.click_bias.is_empty() || self.scroll_bias.is_empty() {
            return bad("bias lists must be non-empty");
        }
        if self.click_bias.iter().chain(&self.scroll_bias).any(|b| b.is_nan()) {
            return bad("biases must not be NaN");
        }
        for v in [self.click_scale, self.scroll_scale, self.drift, self.item_scale] {
            if !v.is_finite() {
                return bad("scales and drift must be finite");
            }
        }
        if self.slate_len == 0 {
            return bad("slate_len must be positive");
        }
        let check = |rows: &Option<Vec<Vec<f64>>>, n: usize, what: &str| -> Result<()> {
            if let Some(rows) = rows {
                if rows.len() != n {
                    return Err(Error::Config(alloc::format!("expected {n} {what} vectors, got {}", rows.len())));
                }
                if rows.iter().any(|r| r.len() != self.dim || r.iter().any(|x| !x.is_finite())) {
                    return Err(Error::Config(alloc::format!("{what} vectors must have {} finite entries", self.dim)));
                }
            }
            Ok(())
        };
        check(&self.users, self.n_users, "user")?;
        check(&self.items, self.n_items, "item")?;
        if self.n_users == 0 || self.n_items == 0 {
            return bad("n_users and n_items must be positive");
        }
        Ok(())
    }
}

/// Expected and sampled value of one ordering.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolicyEvalReport {
    pub exact_v: Option<f64>,
    pub mc_v: f64,
    /// Sample standard deviation over `√samples`.
    pub mc_stderr: f64,
    pub samples: usize,
    pub ordering: Vec<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = math::sqrt(dot(&v, &v));
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn bias_at(b: &[f64], t: usize) -> f64 {
    b[t.min(b.len() - 1)]
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    config: GroundTruthConfig,
    users: Vec<Vec<f64>>,
    items: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn new(config: GroundTruthConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng::seeded(config.seed);
        let d = config.dim;
        let gauss = |rng: &mut SimRng| -> Vec<f64> { (0..d).map(|_| StandardNormal.sample(rng)).collect() };
        let users = match &config.users {
            Some(u) => u.iter().cloned().map(normalized).collect(),
            None => (0..config.n_users).map(|_| normalized(gauss(&mut rng))).collect(),
        };
        let items = match &config.items {
            Some(x) => x.clone(),
            None => {
                let s = config.item_scale / math::sqrt(d as f64);
                (0..config.n_items)
                    .map(|_| gauss(&mut rng).into_iter().map(|x| x * s).collect())
                    .collect()
            }
        };
        Ok(Self { config, users, items })
    }

    pub fn config(&self) -> &GroundTruthConfig {
        &self.config
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn item_vector(&self, item: usize) -> Result<&[f64]> {
        self.items
            .get(item)
            .map(|v| v.as_slice())
            .ok_or(Error::Lookup { index: item, vocab: self.items.len() })
    }

    pub fn user(&self, user: usize) -> Result<GroundTruthUser<'_>> {
        let latent = self
            .users
            .get(user)
            .ok_or(Error::Lookup { index: user, vocab: self.users.len() })?;
        Ok(GroundTruthUser { truth: self, id: user, latent: latent.clone() })
    }

    /// A user with an arbitrary latent, normalized.
    pub fn user_with_latent(&self, latent: Vec<f64>) -> Result<GroundTruthUser<'_>> {
        if latent.len() != self.config.dim {
            return Err(Error::LengthMismatch { what: "latent", left: latent.len(), right: self.config.dim });
        }
        Ok(GroundTruthUser { truth: self, id: 0, latent: normalized(latent) })
    }

    /// `(p_click, p_scroll)` of `item` at position `t` under `latent`.
    pub fn probabilities(&self, latent: &[f64], item: usize, t: usize) -> Result<(f64, f64)> {
        let x = self.item_vector(item)?;
        let d = dot(latent, x);
        let c = &self.config;
        Ok((
            math::sigmoid(c.click_scale * d + bias_at(&c.click_bias, t)),
            math::sigmoid(c.scroll_scale * d + bias_at(&c.scroll_bias, t)),
        ))
    }

    /// Latent after exposure to `item`.
    pub fn drifted(&self, latent: &[f64], item: usize) -> Result<Vec<f64>> {
        let x = self.item_vector(item)?;
        let next: Vec<f64> = latent.iter().zip(x).map(|(l, x)| l + self.config.drift * x).collect();
        if dot(&next, &next) == 0.0 {
            return Ok(latent.to_vec());
        }
        Ok(normalized(next))
    }

    /// Long-term history of `user`: `history_len` items drawn with
    /// replacement in proportion to `exp(a·⟨u,x⟩)`.
    pub fn user_history(&self, user: usize) -> Result<Vec<usize>> {
        let u = self.user(user)?;
        let weights: Vec<f64> = self
            .items
            .iter()
            .map(|x| math::exp(self.config.click_scale * dot(&u.latent, x)))
            .collect();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::Config(alloc::format!("history weights: {e}")))?;
        let mut rng = rng::stream(rng::mix64(self.config.seed ^ HISTORY_SALT), user as u64);
        Ok((0..self.config.history_len).map(|_| dist.sample(&mut rng)).collect())
    }

    /// `n` labelled sessions on uniformly random logging slates.
    ///
    /// Session `i` uses substream `i` of `seed`, so any prefix of the
    /// dataset is reproducible on its own.
    pub fn generate_dataset(&self, n: usize, seed: u64) -> Result<Vec<SessionInput>> {
        let k = self.config.slate_len.min(self.items.len());
        let mut histories: Vec<Option<Vec<usize>>> = alloc::vec![None; self.users.len()];
        let mut catalog: Vec<usize> = (0..self.items.len()).collect();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = rng::stream(seed, i as u64);
            let user = rng.gen_range(0..self.users.len());
            let (slate, _) = catalog.partial_shuffle(&mut rng, k);
            let ordering = slate.to_vec();
            let mut session = self.user(user)?.sample_session(&ordering, &mut rng)?;
            if histories[user].is_none() {
                histories[user] = Some(self.user_history(user)?);
            }
            session.history = histories[user].clone().unwrap_or_default();
            out.push(session);
        }
        Ok(out)
    }

    /// True `(p_click, p_scroll)` at every logged position of `session`.
    pub fn true_probabilities(&self, session: &SessionInput) -> Result<Vec<(f64, f64)>> {
        let mut latent = self.user(session.user)?.latent;
        let labels = session.labels.as_deref();
        let mut out = Vec::with_capacity(session.len());
        for (t, &item) in session.items.iter().enumerate() {
            out.push(self.probabilities(&latent, item, t)?);
            let clicked = labels.and_then(|l| l.get(t)).is_some_and(|l| l.click);
            if !self.config.drift_on_click || clicked {
                latent = self.drifted(&latent, item)?;
            }
        }
        Ok(out)
    }

    /// Pooled AUC of the true probabilities: the ceiling for any scorer.
    pub fn bayes_auc(&self, dataset: &[SessionInput]) -> Result<(Option<f64>, Option<f64>)> {
        let mut pc = Vec::new();
        let mut ps = Vec::new();
        let mut lc = Vec::new();
        let mut ls = Vec::new();
        for s in dataset {
            let labels = s
                .labels
                .as_deref()
                .ok_or(Error::Contract(String::from("bayes_auc needs labelled sessions")))?;
            if labels.len() != s.len() {
                return Err(Error::LengthMismatch { what: "labels", left: labels.len(), right: s.len() });
            }
            for ((c, sc), l) in self.true_probabilities(s)?.into_iter().zip(labels) {
                pc.push(c);
                ps.push(sc);
                lc.push(l.click);
                ls.push(l.scroll);
            }
        }
        Ok((compute_auc(&pc, &lc), compute_auc(&ps, &ls)))
    }
}

/// One user of a [`GroundTruth`], at the start of a session.
#[derive(Debug, Clone)]
pub struct GroundTruthUser<'g> {
    truth: &'g GroundTruth,
    pub id: usize,
    pub latent: Vec<f64>,
}

impl GroundTruthUser<'_> {
    fn check(&self, ordering: &[usize]) -> Result<()> {
        if ordering.is_empty() {
            return Err(Error::EmptySequence("ordering"));
        }
        for &i in ordering {
            self.truth.item_vector(i)?;
        }
        Ok(())
    }

    /// Draw one session over `ordering`; history is left empty.
    pub fn sample_session<R: Rng + ?Sized>(&self, ordering: &[usize], rng: &mut R) -> Result<SessionInput> {
        self.check(ordering)?;
        let gt = self.truth;
        let mut latent = self.latent.clone();
        let mut items = Vec::new();
        let mut labels = Vec::new();
        for (t, &item) in ordering.iter().enumerate() {
            let (pc, ps) = gt.probabilities(&latent, item, t)?;
            let click = rng.gen::<f64>() < pc;
            let scroll = rng.gen::<f64>() < ps;
            items.push(item);
            labels.push(Labels { click, scroll });
            if !gt.config.drift_on_click || click {
                latent = gt.drifted(&latent, item)?;
            }
            if !scroll {
                break;
            }
        }
        Ok(SessionInput::new(self.id, Vec::new(), items).with_labels(labels))
    }

    /// `V = E Σ (c_t + s_t)` over `ordering`, by enumeration.
    pub fn expected_value_exact(&self, ordering: &[usize]) -> Result<f64> {
        if ordering.len() > MAX_EXACT_LEN {
            return Err(Error::OrderingTooLong { len: ordering.len(), max: MAX_EXACT_LEN });
        }
        self.check(ordering)?;
        self.value_from(&self.latent, ordering, 0)
    }

    fn value_from(&self, latent: &[f64], ordering: &[usize], t: usize) -> Result<f64> {
        let gt = self.truth;
        let item = ordering[t];
        let (pc, ps) = gt.probabilities(latent, item, t)?;
        let mut v = pc + ps;
        if t + 1 < ordering.len() && ps > 0.0 {
            let moved = gt.drifted(latent, item)?;
            let next = if gt.config.drift_on_click {
                let mut n = 0.0;
                if pc > 0.0 {
                    n += pc * self.value_from(&moved, ordering, t + 1)?;
                }
                if pc < 1.0 {
                    n += (1.0 - pc) * self.value_from(latent, ordering, t + 1)?;
                }
                n
            } else {
                self.value_from(&moved, ordering, t + 1)?
            };
            v += ps * next;
        }
        Ok(v)
    }

    /// Monte-Carlo estimate of `V`; the exact value is attached when the
    /// ordering is short enough to enumerate.
    pub fn expected_value_mc<R: Rng + ?Sized>(&self, ordering: &[usize], samples: usize, rng: &mut R) -> Result<PolicyEvalReport> {
        if samples == 0 {
            return Err(Error::Config(String::from("samples must be at least 1")));
        }
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..samples {
            let s = self.sample_session(ordering, rng)?;
            let r: f64 = s
                .labels
                .iter()
                .flatten()
                .map(|l| (l.click as u8 + l.scroll as u8) as f64)
                .sum();
            sum += r;
            sq += r * r;
        }
        let n = samples as f64;
        let mean = sum / n;
        let stderr = if samples > 1 {
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            math::sqrt(var / n)
        } else {
            0.0
        };
        let exact = if ordering.len() <= MAX_EXACT_LEN {
            Some(self.expected_value_exact(ordering)?)
        } else {
            None
        };
        Ok(PolicyEvalReport {
            exact_v: exact,
            mc_v: mean,
            mc_stderr: stderr,
            samples,
            ordering: ordering.to_vec(),
        })
    }
}
