//! Message-type-agnostic SC and SCL schedules.
//!
//! Decoding runs on the natural-order tree: the caller permutes channel
//! messages by bit reversal first. A node at depth `d` with index `k` has heap
//! id `2^d − 1 + k` and owns `N/2^d` messages; its first half feeds the upper
//! (`f`-like) update and, once the left subtree is decided, both halves feed
//! the lower (`g`-like) update.

use std::rc::Rc;

use crate::codec::{CodeConfig, CrcConfig};

/// Per-node message updates of one decoder family.
pub(crate) trait Kernel {
    type Msg: Copy + Default + std::fmt::Debug;

    /// Upper update of node `node` over the halves `a`, `b`.
    fn upper(&self, node: usize, a: &[Self::Msg], b: &[Self::Msg], out: &mut [Self::Msg]);

    /// Lower update of node `node` given the re-encoded left-subtree bits `u`.
    fn lower(&self, node: usize, a: &[Self::Msg], b: &[Self::Msg], u: &[u8], out: &mut [Self::Msg]);

    /// Hard decision on leaf `leaf`.
    fn decide(&self, leaf: usize, m: Self::Msg) -> u8;

    /// LLR meaning of a leaf message, for path metrics.
    fn decision_llr(&self, leaf: usize, m: Self::Msg) -> f64;
}

/// `ln(1 + e^{−(1−2u)L})`, evaluated without overflow.
pub(crate) fn metric_increment(llr: f64, u: u8) -> f64 {
    let x = if u == 0 { llr } else { -llr };
    if x.is_nan() {
        return f64::INFINITY;
    }
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

pub(crate) fn node_id(depth: u32, index: usize) -> usize {
    (1usize << depth) - 1 + index
}

/// Reusable buffers of the SC schedule.
#[derive(Clone, Debug)]
pub(crate) struct ScWorkspace<M> {
    alpha: Vec<Vec<M>>,
    beta: Vec<Vec<u8>>,
    // Heap id of the node whose messages alpha[d] currently holds.
    #[cfg(debug_assertions)]
    owner: Vec<usize>,
}

impl<M: Copy + Default> ScWorkspace<M> {
    pub(crate) fn new(depth: u32) -> Self {
        let len = 1usize << depth;
        ScWorkspace {
            alpha: (0..=depth).map(|d| vec![M::default(); len >> d]).collect(),
            beta: (0..=depth).map(|d| vec![0; len >> d]).collect(),
            #[cfg(debug_assertions)]
            owner: vec![usize::MAX; depth as usize + 1],
        }
    }

    fn depth(&self) -> u32 {
        (self.alpha.len() - 1) as u32
    }
}

/// Successive cancellation; returns `û` in natural order.
pub(crate) fn sc<K: Kernel>(
    kernel: &K,
    channel: &[K::Msg],
    frozen: &[bool],
    ws: &mut ScWorkspace<K::Msg>,
) -> Vec<u8> {
    let depth = ws.depth();
    assert_eq!(channel.len(), 1 << depth);
    assert_eq!(frozen.len(), channel.len());
    ws.alpha[0].copy_from_slice(channel);
    #[cfg(debug_assertions)]
    {
        ws.owner[0] = 0;
    }
    let mut u = vec![0u8; channel.len()];
    sc_node(kernel, frozen, ws, 0, 0, &mut u);
    u
}

fn sc_node<K: Kernel>(
    kernel: &K,
    frozen: &[bool],
    ws: &mut ScWorkspace<K::Msg>,
    depth: u32,
    index: usize,
    u: &mut [u8],
) {
    let d = depth as usize;
    let node = node_id(depth, index);
    #[cfg(debug_assertions)]
    debug_assert_eq!(ws.owner[d], node, "depth {d} holds stale messages");

    if depth == ws.depth() {
        let bit = if frozen[index] {
            0
        } else {
            kernel.decide(index, ws.alpha[d][0])
        };
        u[index] = bit;
        ws.beta[d][0] = bit;
        return;
    }

    let half = ws.alpha[d].len() / 2;
    {
        let (cur, next) = ws.alpha.split_at_mut(d + 1);
        let (a, b) = cur[d].split_at(half);
        kernel.upper(node, a, b, &mut next[0]);
    }
    #[cfg(debug_assertions)]
    {
        ws.owner[d + 1] = node_id(depth + 1, 2 * index);
    }
    sc_node(kernel, frozen, ws, depth + 1, 2 * index, u);

    {
        let (cur, next) = ws.beta.split_at_mut(d + 1);
        cur[d][..half].copy_from_slice(&next[0]);
    }
    {
        let (cur, next) = ws.alpha.split_at_mut(d + 1);
        let (a, b) = cur[d].split_at(half);
        kernel.lower(node, a, b, &ws.beta[d][..half], &mut next[0]);
    }
    #[cfg(debug_assertions)]
    {
        ws.owner[d + 1] = node_id(depth + 1, 2 * index + 1);
    }
    sc_node(kernel, frozen, ws, depth + 1, 2 * index + 1, u);

    let (cur, next) = ws.beta.split_at_mut(d + 1);
    let (left, right) = cur[d].split_at_mut(half);
    for ((l, r), &v) in left.iter_mut().zip(right.iter_mut()).zip(next[0].iter()) {
        *l ^= v;
        *r = v;
    }
}

/// One list entry. Per-depth buffers are shared between clones until written.
#[derive(Clone, Debug)]
struct Path<M> {
    alpha: Vec<Rc<Vec<M>>>,
    // beta_left[d]: bits of the most recently finished left child at depth d.
    beta_left: Vec<Rc<Vec<u8>>>,
    bits: Vec<u64>,
    metric: f64,
}

impl<M> Path<M> {
    fn set_bit(&mut self, i: usize, b: u8) {
        if b == 1 {
            self.bits[i / 64] |= 1 << (i % 64);
        }
    }

    fn unpack(&self, len: usize) -> Vec<u8> {
        (0..len)
            .map(|i| ((self.bits[i / 64] >> (i % 64)) & 1) as u8)
            .collect()
    }
}

/// Writes through `slot`, reallocating instead of copying when it is shared.
fn writable<T: Clone + Default>(slot: &mut Rc<Vec<T>>, len: usize) -> &mut Vec<T> {
    if Rc::get_mut(slot).is_none() {
        *slot = Rc::new(vec![T::default(); len]);
    }
    Rc::get_mut(slot).expect("freshly allocated")
}

/// A surviving path: `û` in natural order and its metric.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct ListEntry {
    pub u: Vec<u8>,
    pub metric: f64,
}

/// Successive cancellation list decoding with list size `list_size`.
///
/// Returns the final list in survivor order (not sorted by metric).
#[allow(clippy::needless_range_loop)]
pub(crate) fn scl<K: Kernel>(
    kernel: &K,
    channel: &[K::Msg],
    frozen: &[bool],
    list_size: usize,
) -> Vec<ListEntry> {
    assert!(list_size >= 1);
    let len = channel.len();
    assert!(len.is_power_of_two());
    assert_eq!(frozen.len(), len);
    let depth = len.trailing_zeros();
    let n = depth as usize;

    let root = Path {
        alpha: (0..=n)
            .map(|d| {
                if d == 0 {
                    Rc::new(channel.to_vec())
                } else {
                    Rc::new(vec![K::Msg::default(); len >> d])
                }
            })
            .collect(),
        beta_left: (0..=n).map(|d| Rc::new(vec![0u8; len >> d])).collect(),
        bits: vec![0; len.div_ceil(64)],
        metric: 0.0,
    };
    let mut paths = vec![root];
    let mut scratch = vec![0u8; len];
    let mut combined = vec![0u8; len];
    let mut leaf_msgs = Vec::with_capacity(list_size);
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(2 * list_size);

    for i in 0..len {
        // Bring every path's leaf message up to date.
        let start = if i == 0 {
            0
        } else {
            n - i.trailing_zeros() as usize - 1
        };
        leaf_msgs.clear();
        for p in paths.iter_mut() {
            for d in start..n {
                let index = i >> (n - d);
                let node = node_id(d as u32, index);
                let half = len >> (d + 1);
                let src = Rc::clone(&p.alpha[d]);
                let (a, b) = src.split_at(half);
                let out = writable(&mut p.alpha[d + 1], half);
                if d == start && i != 0 {
                    kernel.lower(node, a, b, &p.beta_left[d + 1], out);
                } else {
                    kernel.upper(node, a, b, out);
                }
            }
            leaf_msgs.push(p.alpha[n][0]);
        }

        if frozen[i] {
            for (p, &m) in paths.iter_mut().zip(&leaf_msgs) {
                p.metric += metric_increment(kernel.decision_llr(i, m), 0);
            }
            for p in paths.iter_mut() {
                propagate(p, i, 0, n, &mut scratch, &mut combined);
            }
            continue;
        }

        candidates.clear();
        for (l, (p, &m)) in paths.iter().zip(&leaf_msgs).enumerate() {
            let llr = kernel.decision_llr(i, m);
            for b in 0..2u8 {
                candidates.push((p.metric + metric_increment(llr, b), 2 * l + b as usize));
            }
        }
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        candidates.truncate(list_size);
        let mut keep: Vec<Option<f64>> = vec![None; 2 * paths.len()];
        for &(metric, slot) in &candidates {
            keep[slot] = Some(metric);
        }

        let mut next = Vec::with_capacity(candidates.len());
        for (l, p) in paths.into_iter().enumerate() {
            let choices: Vec<(u8, f64)> = (0..2u8)
                .filter_map(|b| keep[2 * l + b as usize].map(|m| (b, m)))
                .collect();
            let mut owned = Some(p);
            for (j, &(b, metric)) in choices.iter().enumerate() {
                let mut child = if j + 1 == choices.len() {
                    owned.take().expect("path consumed once")
                } else {
                    owned.as_ref().expect("path still owned").clone()
                };
                child.metric = metric;
                child.set_bit(i, b);
                propagate(&mut child, i, b, n, &mut scratch, &mut combined);
                next.push(child);
            }
        }
        paths = next;
    }

    paths
        .into_iter()
        .map(|p| ListEntry {
            u: p.unpack(len),
            metric: p.metric,
        })
        .collect()
}

/// Pushes the decision on leaf `i` up through all completed right subtrees
/// and stores the result as the left-child bits of the first pending node.
fn propagate<M>(p: &mut Path<M>, i: usize, bit: u8, n: usize, cur: &mut [u8], tmp: &mut [u8]) {
    cur[0] = bit;
    let mut width = 1;
    let mut d = n;
    let mut index = i;
    while d > 0 && index & 1 == 1 {
        let left = &p.beta_left[d];
        for j in 0..width {
            tmp[j] = left[j] ^ cur[j];
            tmp[j + width] = cur[j];
        }
        cur[..2 * width].copy_from_slice(&tmp[..2 * width]);
        width *= 2;
        d -= 1;
        index >>= 1;
    }
    if d > 0 {
        writable(&mut p.beta_left[d], width).copy_from_slice(&cur[..width]);
    }
}

/// Chooses the output of a list decoder: the smallest-metric entry whose
/// payload passes the CRC, otherwise the smallest-metric entry. Ties keep
/// list order. Returns `û` of the chosen entry.
pub(crate) fn select<'a>(
    list: &'a [ListEntry],
    cfg: &CodeConfig,
    crc: Option<&CrcConfig>,
) -> &'a [u8] {
    let mut order: Vec<usize> = (0..list.len()).collect();
    order.sort_by(|&a, &b| list[a].metric.total_cmp(&list[b].metric).then(a.cmp(&b)));
    if let Some(crc) = crc {
        for &l in &order {
            let bits: Vec<u8> = cfg.info_set().iter().map(|&i| list[l].u[i]).collect();
            if crc.check_slice(&bits) {
                return &list[l].u;
            }
        }
    }
    &list[order[0]].u
}
