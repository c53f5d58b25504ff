//! Exact Levenshtein distance and a nearest-neighbour index over a term pool.
//!
//! Distances are computed over Unicode scalar values of the raw terms,
//! case-sensitively. The index never approximates: every answer equals what
//! an exhaustive scan with the same tie rule would return.

use std::collections::HashSet;

use thiserror::Error;

/// Case-insensitive key used whenever two terms are compared for "sameness"
/// (pair deduplication, synonym filtering, exclusion sets).
pub fn pairing_key(term: &str) -> String {
    term.to_lowercase()
}

/// Unit-cost Levenshtein distance over `char`s.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance if it is at most `limit`, `None` otherwise.
///
/// Exact for every input; the limit only enables early termination.
pub fn levenshtein_bounded(a: &str, b: &str, limit: usize) -> Option<usize> {
    let pattern = Pattern::new(a);
    let text: Vec<char> = b.chars().collect();
    pattern.distance_within(&text, limit)
}

const HIST_BINS: usize = 32;
type Histogram = [u8; HIST_BINS];

fn histogram(chars: &[char]) -> Histogram {
    let mut h = [0u8; HIST_BINS];
    for &c in chars {
        let bin = (c as u32 as usize) % HIST_BINS;
        h[bin] = h[bin].saturating_add(1);
    }
    h
}

/// Bag-distance lower bound on the edit distance. Folding characters into
/// bins (and saturating counts) can only cancel more, so the bound stays valid.
fn histogram_lower_bound(a: &Histogram, a_total: u32, b: &Histogram, b_total: u32) -> usize {
    // max(surplus, deficit) = (sum |x - y| + |sum x - sum y|) / 2
    let abs: u32 = a
        .iter()
        .zip(b)
        .map(|(x, y)| u32::from(x.abs_diff(*y)))
        .sum();
    ((abs + a_total.abs_diff(b_total)) / 2) as usize
}

fn histogram_total(h: &Histogram) -> u32 {
    h.iter().map(|&x| u32::from(x)).sum()
}

/// Precomputed query: Myers' bit-vector tables when the query fits in one
/// machine word, a banded DP otherwise.
struct Pattern {
    chars: Vec<char>,
    ascii_peq: Box<[u64; 128]>,
    other_peq: Vec<(char, u64)>,
}

impl Pattern {
    fn new(query: &str) -> Self {
        let chars: Vec<char> = query.chars().collect();
        let mut ascii_peq = Box::new([0u64; 128]);
        let mut other_peq: Vec<(char, u64)> = Vec::new();
        if chars.len() <= 64 {
            for (i, &c) in chars.iter().enumerate() {
                let bit = 1u64 << i;
                if (c as u32) < 128 {
                    ascii_peq[c as usize] |= bit;
                } else if let Some(slot) = other_peq.iter_mut().find(|(k, _)| *k == c) {
                    slot.1 |= bit;
                } else {
                    other_peq.push((c, bit));
                }
            }
        }
        Pattern {
            chars,
            ascii_peq,
            other_peq,
        }
    }

    #[inline]
    fn peq(&self, c: char) -> u64 {
        if (c as u32) < 128 {
            self.ascii_peq[c as usize]
        } else {
            self.other_peq
                .iter()
                .find(|(k, _)| *k == c)
                .map_or(0, |(_, v)| *v)
        }
    }

    fn distance_within(&self, text: &[char], limit: usize) -> Option<usize> {
        let m = self.chars.len();
        let n = text.len();
        let limit = limit.min(m.max(n));
        if m.abs_diff(n) > limit {
            return None;
        }
        if m == 0 {
            return Some(n);
        }
        if n == 0 {
            return Some(m);
        }
        if m <= 64 {
            self.myers(text, limit)
        } else {
            banded(&self.chars, text, limit)
        }
    }

    fn myers(&self, text: &[char], limit: usize) -> Option<usize> {
        let m = self.chars.len();
        let n = text.len();
        let high = 1u64 << (m - 1);
        let mut pv: u64 = !0;
        let mut mv: u64 = 0;
        let mut score = m;
        for (j, &c) in text.iter().enumerate() {
            let eq = self.peq(c);
            let xv = eq | mv;
            let xh = ((eq & pv).wrapping_add(pv) ^ pv) | eq;
            let mut ph = mv | !(xh | pv);
            let mut mh = pv & xh;
            if ph & high != 0 {
                score += 1;
            } else if mh & high != 0 {
                score -= 1;
            }
            // Every remaining column moves the last-row score by at most one.
            let remaining = n - j - 1;
            if score > limit + remaining {
                return None;
            }
            ph = (ph << 1) | 1;
            mh <<= 1;
            pv = mh | !(xv | ph);
            mv = ph & xv;
        }
        (score <= limit).then_some(score)
    }

    /// Exact distances to `LANES` texts of one common length, computed in
    /// lock-step so the independent bit-vector chains overlap in the
    /// pipeline. Needs a non-empty query of at most 64 chars.
    #[allow(clippy::needless_range_loop)]
    fn myers_lanes(&self, texts: [&[char]; LANES]) -> [usize; LANES] {
        let m = self.chars.len();
        let high = 1u64 << (m - 1);
        let mut pv = [!0u64; LANES];
        let mut mv = [0u64; LANES];
        let mut score = [m; LANES];
        for j in 0..texts[0].len() {
            for l in 0..LANES {
                let eq = self.peq(texts[l][j]);
                let xv = eq | mv[l];
                let xh = ((eq & pv[l]).wrapping_add(pv[l]) ^ pv[l]) | eq;
                let ph = mv[l] | !(xh | pv[l]);
                let mh = pv[l] & xh;
                score[l] += usize::from(ph & high != 0);
                score[l] -= usize::from(mh & high != 0);
                let ph = (ph << 1) | 1;
                pv[l] = (mh << 1) | !(xv | ph);
                mv[l] = ph & xv;
            }
        }
        score
    }
}

const LANES: usize = 4;

/// Ukkonen-style banded DP: only cells with |i - j| <= limit are evaluated.
fn banded(a: &[char], b: &[char], limit: usize) -> Option<usize> {
    let inf = limit + 1;
    let n = b.len();
    let mut prev: Vec<usize> = (0..=n).map(|j| j.min(inf)).collect();
    let mut cur = vec![inf; n + 1];
    for i in 1..=a.len() {
        let lo = i.saturating_sub(limit).max(1);
        let hi = (i + limit).min(n);
        cur[0] = i.min(inf);
        if lo > 1 {
            cur[lo - 1] = inf;
        }
        let mut row_min = cur[0];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1).min(inf);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < n {
            cur[hi + 1] = inf;
        }
        if row_min > limit {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[n];
    (d <= limit).then_some(d)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndexError {
    #[error("cannot build an edit-distance index over an empty term list")]
    Empty,
}

/// A candidate returned by the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Neighbor {
    pub distance: usize,
    pub id: u32,
}

/// Immutable nearest-neighbour index over a deduplicated term pool.
///
/// Terms are bucketed by length in `char`s, so a query for distance `d`
/// touches only buckets within `d` of its own length. Term ids follow the
/// tie-break order (lowercase form, then raw form), which makes "smallest id"
/// and "lexicographically smallest term" the same thing.
#[derive(Debug)]
pub struct EditDistanceIndex {
    terms: Vec<String>,
    keys: Vec<String>,
    // Scan data laid out in (length, id) order so each bucket is contiguous.
    order: Vec<u32>,
    hists: Vec<Histogram>,
    hist_totals: Vec<u32>,
    chars: Vec<char>,
    bucket_start: Vec<usize>,
    char_start: Vec<usize>,
}

impl EditDistanceIndex {
    pub fn build<I, S>(terms: I) -> Result<Self, IndexError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, String)> = terms
            .into_iter()
            .map(Into::into)
            .map(|t| (pairing_key(&t), t))
            .collect();
        if entries.is_empty() {
            return Err(IndexError::Empty);
        }
        entries.sort();
        entries.dedup();

        let mut keys = Vec::with_capacity(entries.len());
        let mut terms = Vec::with_capacity(entries.len());
        for (k, t) in entries {
            keys.push(k);
            terms.push(t);
        }
        let decoded: Vec<Vec<char>> = terms.iter().map(|t| t.chars().collect()).collect();
        let mut order: Vec<u32> = (0..terms.len() as u32).collect();
        order.sort_by_key(|&id| decoded[id as usize].len());
        let max_len = decoded.iter().map(Vec::len).max().unwrap_or(0);
        let mut bucket_start = vec![0usize; max_len + 2];
        for c in &decoded {
            bucket_start[c.len() + 1] += 1;
        }
        for len in 1..bucket_start.len() {
            bucket_start[len] += bucket_start[len - 1];
        }
        let char_start = (0..=max_len)
            .scan(0usize, |acc, len| {
                let at = *acc;
                *acc += (bucket_start[len + 1] - bucket_start[len]) * len;
                Some(at)
            })
            .collect();
        let hists: Vec<Histogram> = order
            .iter()
            .map(|&id| histogram(&decoded[id as usize]))
            .collect();
        let hist_totals = hists.iter().map(histogram_total).collect();
        let chars = order
            .iter()
            .flat_map(|&id| decoded[id as usize].iter().copied())
            .collect();
        Ok(EditDistanceIndex {
            terms,
            keys,
            order,
            hists,
            hist_totals,
            chars,
            bucket_start,
            char_start,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    /// Pairing key (lowercase form) of an indexed term.
    pub fn key(&self, id: u32) -> &str {
        &self.keys[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Id of an exact (raw) term, if indexed.
    pub fn id_of(&self, term: &str) -> Option<u32> {
        let key = pairing_key(term);
        self.keys
            .binary_search_by(|k| k.as_str().cmp(&key))
            .ok()
            .and_then(|mut i| {
                // Several raw forms can share a key; walk back to the first one.
                while i > 0 && self.keys[i - 1] == key {
                    i -= 1;
                }
                (i..self.keys.len())
                    .take_while(|&j| self.keys[j] == key)
                    .find(|&j| self.terms[j] == term)
                    .map(|j| j as u32)
            })
    }

    /// Nearest term to `query` whose pairing key is not in `excluded`.
    /// Ties go to the lexicographically smallest candidate.
    pub fn nearest_excluding(
        &self,
        query: &str,
        excluded: &HashSet<String>,
    ) -> Option<(&str, usize)> {
        let keys: HashSet<String> = excluded.iter().map(|t| pairing_key(t)).collect();
        self.k_nearest_where(query, 1, |id| !keys.contains(self.key(id)))
            .first()
            .map(|n| (self.term(n.id), n.distance))
    }

    /// Up to `k` nearest admissible terms in (distance, id) order.
    pub fn k_nearest_where<F>(&self, query: &str, k: usize, admissible: F) -> Vec<Neighbor>
    where
        F: Fn(u32) -> bool,
    {
        if k == 0 {
            return Vec::new();
        }
        let pattern = Pattern::new(query);
        let qlen = pattern.chars.len();
        let qhist = histogram(&pattern.chars);
        let qtotal = histogram_total(&qhist);
        let max_len = self.bucket_start.len() - 2;
        let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
        let mut limit = usize::MAX;

        let mut delta = 0usize;
        loop {
            if delta > limit || (delta > qlen && qlen + delta > max_len) {
                break;
            }
            let lens = [qlen.checked_sub(delta), Some(qlen + delta)];
            for (slot, len) in lens.into_iter().enumerate() {
                let Some(len) = len else { continue };
                if (slot == 1 && delta == 0) || len > max_len {
                    continue;
                }
                let (start, end) = (self.bucket_start[len], self.bucket_start[len + 1]);
                let base = self.char_start[len];
                let text = |pos: usize| {
                    let at = base + (pos - start) * len;
                    &self.chars[at..at + len]
                };
                let batched = (1..=64).contains(&qlen) && len > 0;
                let mut pending = [0usize; LANES];
                let mut filled = 0;
                for pos in start..end {
                    if limit != usize::MAX
                        && histogram_lower_bound(
                            &qhist,
                            qtotal,
                            &self.hists[pos],
                            self.hist_totals[pos],
                        ) > limit
                    {
                        continue;
                    }
                    if !admissible(self.order[pos]) {
                        continue;
                    }
                    if batched {
                        pending[filled] = pos;
                        filled += 1;
                        if filled == LANES {
                            let d = pattern.myers_lanes(pending.map(text));
                            for (&p, d) in pending.iter().zip(d) {
                                offer(&mut best, k, &mut limit, d, self.order[p]);
                            }
                            filled = 0;
                        }
                    } else if let Some(d) = pattern.distance_within(text(pos), limit) {
                        offer(&mut best, k, &mut limit, d, self.order[pos]);
                    }
                }
                for &p in &pending[..filled] {
                    if let Some(d) = pattern.distance_within(text(p), limit) {
                        offer(&mut best, k, &mut limit, d, self.order[p]);
                    }
                }
            }
            delta += 1;
        }
        best
    }
}

/// Keeps `best` as the sorted `k` smallest candidates seen so far and `limit`
/// as the distance a newcomer must not exceed.
fn offer(best: &mut Vec<Neighbor>, k: usize, limit: &mut usize, distance: usize, id: u32) {
    let cand = Neighbor { distance, id };
    if best.len() < k || cand < best[k - 1] {
        let at = best.partition_point(|n| *n < cand);
        best.insert(at, cand);
        best.truncate(k);
        if best.len() == k {
            *limit = best[k - 1].distance;
        }
    }
}
