//! Synthetic archives with controllable reply structure and language.
//!
//! Each community starts with a hub member. Every month the current hub opens
//! a thread; every other post replies either to the hub's latest post (with
//! probability equal to the month's centralization) or to the latest post of
//! a uniformly drawn member. At each daily snapshot the hub role moves to
//! another member with probability `rotation`. Text mixes a small common
//! vocabulary, a large rare vocabulary and lexicon words.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::ingest::{Archive, PostRecord};
use crate::language::Lexicon;
use crate::month::YearMonth;

fn default_sentiment_bias() -> f64 {
    0.5
}

fn default_sentiment_rate() -> f64 {
    0.15
}

fn default_rare_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunitySpec {
    /// Defaults to `community-NN` by position.
    #[serde(default)]
    pub id: Option<String>,
    /// Pool of potential members; joining stops when it is exhausted.
    pub members: usize,
    pub months: u32,
    /// Mean posts per month (fractional part realized randomly).
    pub posts_per_month: f64,
    /// Probability a reply targets the current hub.
    pub centralization: f64,
    /// Daily probability the hub role moves to another member.
    pub rotation: f64,
    /// Probability a lexicon word drawn for a post is positive.
    #[serde(default = "default_sentiment_bias")]
    pub sentiment_bias: f64,
    /// Share of non-lexicon tokens drawn from the rare vocabulary.
    #[serde(default = "default_rare_fraction")]
    pub rare_fraction: f64,
    pub seed: u64,
    /// First month; defaults to the file-level start.
    #[serde(default)]
    pub start: Option<YearMonth>,
    /// Monthly centralization is drawn uniformly from
    /// `centralization ± jitter`, clamped to [0, 1].
    #[serde(default)]
    pub centralization_jitter: f64,
    /// Extra expected joiners per unit of monthly centralization above the
    /// community's mean centralization.
    #[serde(default)]
    pub joiner_coupling: f64,
    /// Probability each token is a lexicon word.
    #[serde(default = "default_sentiment_rate")]
    pub sentiment_rate: f64,
}

impl CommunitySpec {
    pub fn new(members: usize, months: u32, posts_per_month: f64, seed: u64) -> Self {
        Self {
            id: None,
            members,
            months,
            posts_per_month,
            centralization: 0.5,
            rotation: 0.1,
            sentiment_bias: default_sentiment_bias(),
            rare_fraction: default_rare_fraction(),
            seed,
            start: None,
            centralization_jitter: 0.0,
            joiner_coupling: 0.0,
            sentiment_rate: default_sentiment_rate(),
        }
    }

    fn validate(&self, index: usize) -> Result<(), SynthError> {
        let fail = |reason: String| Err(SynthError::Infeasible { index, reason });
        for (name, v) in [
            ("centralization", self.centralization),
            ("rotation", self.rotation),
            ("sentiment_bias", self.sentiment_bias),
            ("rare_fraction", self.rare_fraction),
            ("centralization_jitter", self.centralization_jitter),
            ("sentiment_rate", self.sentiment_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        if self.members == 0 && self.posts_per_month > 0.0 {
            return fail("0 members with a positive posting rate".into());
        }
        if self.months == 0 {
            return fail("months must be at least 1".into());
        }
        if !(self.posts_per_month.is_finite() && self.posts_per_month >= 0.0) {
            return fail(format!("posts_per_month = {} is invalid", self.posts_per_month));
        }
        if !(self.joiner_coupling.is_finite() && self.joiner_coupling >= 0.0) {
            return fail(format!("joiner_coupling = {} is invalid", self.joiner_coupling));
        }
        Ok(())
    }
}

/// Contents of a `synth --spec` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    #[serde(default = "default_start")]
    pub start: YearMonth,
    pub communities: Vec<CommunitySpec>,
}

fn default_start() -> YearMonth {
    YearMonth::new(2008, 4).expect("valid month")
}

const SYLLABLES: [&str; 16] = [
    "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu", "na", "pe", "ri", "so", "tu", "vi",
];

fn syllable_word(mut k: usize, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(SYLLABLES[k % SYLLABLES.len()]);
        k /= SYLLABLES.len();
    }
    w
}

/// Words of the common (two-syllable) and rare (three-syllable) pools.
pub fn vocabulary() -> (Vec<String>, Vec<String>) {
    let common = (0..40).map(|k| syllable_word(k * 5 + 3, 2)).collect();
    let rare = (0..600).map(|k| syllable_word(k * 7 + 1, 3)).collect();
    (common, rare)
}

struct TextSource {
    common: Vec<String>,
    rare: Vec<String>,
    positive: Vec<String>,
    negative: Vec<String>,
}

impl TextSource {
    fn new() -> Self {
        let (common, rare) = vocabulary();
        let lexicon = Lexicon::builtin();
        Self {
            common,
            rare,
            positive: lexicon.positive().iter().cloned().collect(),
            negative: lexicon.negative().iter().cloned().collect(),
        }
    }

    fn text(&self, spec: &CommunitySpec, rng: &mut ChaCha8Rng) -> String {
        let len = rng.gen_range(4..=16);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            let pool = if rng.gen_bool(spec.sentiment_rate) {
                if rng.gen_bool(spec.sentiment_bias) {
                    &self.positive
                } else {
                    &self.negative
                }
            } else if rng.gen_bool(spec.rare_fraction) {
                &self.rare
            } else {
                &self.common
            };
            words.push(pool[rng.gen_range(0..pool.len())].as_str());
        }
        words.join(" ")
    }
}

fn realize(rate: f64, rng: &mut ChaCha8Rng) -> usize {
    let base = rate.floor();
    base as usize + usize::from(rng.gen_bool((rate - base).clamp(0.0, 1.0)))
}

fn generate_community(
    id: &str,
    spec: &CommunitySpec,
    start: YearMonth,
    text: &TextSource,
) -> Vec<PostRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut posts: Vec<PostRecord> = Vec::new();
    let mut latest_post: BTreeMap<usize, usize> = BTreeMap::new();
    let mut posted: Vec<usize> = Vec::new();
    let mut next_member = 0usize;
    let mut hub = 0usize;
    let base_joiners = spec.members as f64 / spec.months as f64;

    for m in 0..spec.months {
        let month = start.plus_months(m);
        let jitter = spec.centralization_jitter * (2.0 * rng.gen::<f64>() - 1.0);
        let centralization = (spec.centralization + jitter).clamp(0.0, 1.0);

        let mut joiners = realize(
            (base_joiners + spec.joiner_coupling * (centralization - spec.centralization)).max(0.0),
            &mut rng,
        );
        if m == 0 {
            joiners = joiners.max(1);
        }
        joiners = joiners.min(spec.members - next_member);
        if posted.is_empty() && joiners == 0 {
            continue;
        }
        let total = realize(spec.posts_per_month, &mut rng).max(joiners + 1);

        let seconds = month.duration().num_seconds();
        let mut offsets: Vec<i64> = (0..total).map(|_| rng.gen_range(0..seconds)).collect();
        offsets.sort_unstable();
        // Slot 0 is the hub's monthly thread; joiners take random later slots,
        // except in the very first month where the hub itself is slot 0.
        let mut slots: Vec<usize> = (1..total).collect();
        slots.shuffle(&mut rng);
        let mut joiner_slots = vec![false; total];
        let first_month_hub = posted.is_empty();
        let reserved = if first_month_hub { joiners - 1 } else { joiners };
        for &s in slots.iter().take(reserved) {
            joiner_slots[s] = true;
        }
        if first_month_hub {
            joiner_slots[0] = true;
        }

        let mut day = -1i64;
        for (slot, &offset) in offsets.iter().enumerate() {
            let today = offset / 86_400;
            while day < today {
                day += 1;
                if spec.rotation > 0.0 && posted.len() > 1 && rng.gen_bool(spec.rotation) {
                    let others: Vec<usize> = posted.iter().copied().filter(|&x| x != hub).collect();
                    hub = others[rng.gen_range(0..others.len())];
                }
            }

            let author = if slot == 0 && !joiner_slots[0] {
                hub
            } else if joiner_slots[slot] {
                next_member += 1;
                next_member - 1
            } else {
                posted[rng.gen_range(0..posted.len())]
            };
            let is_new = !latest_post.contains_key(&author);
            let thread_start = slot == 0 || posted.is_empty();
            let parent = if thread_start {
                None
            } else if rng.gen_bool(centralization) {
                latest_post.get(&hub).copied()
            } else {
                let pool: Vec<usize> = posted.iter().copied().filter(|&x| x != author).collect();
                let pool = if pool.is_empty() { &posted } else { &pool };
                let target = pool[rng.gen_range(0..pool.len())];
                latest_post.get(&target).copied()
            };

            let idx = posts.len();
            posts.push(PostRecord {
                post_id: format!("{id}-p{idx:06}"),
                community_id: id.to_string(),
                author_id: format!("{id}-m{author:05}"),
                parent_post_id: parent.map(|p| posts[p].post_id.clone()),
                timestamp: month.start() + chrono::Duration::seconds(offset),
                text: text.text(spec, &mut rng),
            });
            latest_post.insert(author, idx);
            if is_new {
                posted.push(author);
            }
        }
    }
    posts
}

/// Generates one archive from community specs. Identical specs and seeds give
/// identical archives.
pub fn generate_archive(spec: &SynthSpec) -> Result<Archive, SynthError> {
    if spec.communities.is_empty() {
        return Err(SynthError::NoSpecs);
    }
    for (i, c) in spec.communities.iter().enumerate() {
        c.validate(i)?;
    }
    let text = TextSource::new();
    let mut posts = Vec::new();
    for (i, c) in spec.communities.iter().enumerate() {
        let id = c.id.clone().unwrap_or_else(|| format!("community-{i:02}"));
        posts.extend(generate_community(&id, c, c.start.unwrap_or(spec.start), &text));
    }
    Archive::from_posts(posts).ok_or_else(|| SynthError::Infeasible {
        index: 0,
        reason: "specs produce no posts".into(),
    })
}

/// Sixteen communities totalling 754 community-months, about 14,000 members
/// and about 20,000 posts, with varied dials.
pub fn reference_scale_spec(seed: u64) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let communities = (0..16)
        .map(|i| {
            let months = if i < 2 { 48 } else { 47 };
            CommunitySpec {
                centralization: rng.gen_range(0.2..0.9),
                rotation: rng.gen_range(0.05..0.5),
                sentiment_bias: rng.gen_range(0.4..0.8),
                rare_fraction: rng.gen_range(0.05..0.5),
                centralization_jitter: 0.1,
                joiner_coupling: 4.0,
                ..CommunitySpec::new(875, months, 26.5, seed.wrapping_mul(1000).wrapping_add(i))
            }
        })
        .collect();
    SynthSpec {
        start: default_start(),
        communities,
    }
}
