//! The two decoders under study: hard-decision symbol flipping over GF(q)
//! (Gallager's algorithm b generalized to field symbols) and the
//! transform-domain q-ary sum-product decoder.
//!
//! Both run a flooding schedule and stop at the first syndrome-satisfying
//! tentative decision. A converged outcome always satisfies every check;
//! that invariant is rechecked on every decode.

use crate::channel::Llrv;
use crate::exitchart::{check_correct_prob_mixture, flip_threshold};
use crate::galois::{wht_in_place, GField, ProbVector, Symbol, PROB_FLOOR};
use crate::graph::ParityCheckMatrix;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    /// Every parity check evaluates to zero on the estimate.
    Converged,
    /// The iteration budget ran out first.
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub estimate: Vec<Symbol>,
    pub iterations_used: usize,
    pub status: DecodeStatus,
}

/// Per-degree flip thresholds for the hard-decision decoder.
///
/// The threshold for a degree-i variable is computed once per decode setup
/// from the analysis operating point: the check correctness probability is
/// evaluated at `p_in = p0` on the matrix's realized check-degree mixture.
#[derive(Debug, Clone)]
pub struct FlipRule {
    by_degree: BTreeMap<usize, usize>,
}

impl FlipRule {
    pub fn from_matrix(h: &ParityCheckMatrix, field: &GField, p0: f64) -> FlipRule {
        let q = field.order();
        // Realized edge-perspective check-degree mixture.
        let e = h.edge_count() as f64;
        let mut rho: BTreeMap<usize, f64> = BTreeMap::new();
        for d in h.row_degrees() {
            *rho.entry(d).or_insert(0.0) += d as f64 / e;
        }
        let p0 = p0.clamp(1e-12, (q as f64 - 1.0) / q as f64);
        let q_out = check_correct_prob_mixture(p0, &rho, q)
            .expect("operating point clamped into domain");
        let by_degree = h
            .col_degrees()
            .into_iter()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|i| (i, if i >= 2 { flip_threshold(i, p0, q_out, q) } else { 1 }))
            .collect();
        FlipRule { by_degree }
    }

    /// Explicit thresholds, mainly for tests.
    pub fn from_thresholds(by_degree: BTreeMap<usize, usize>) -> FlipRule {
        FlipRule { by_degree }
    }

    pub fn threshold(&self, degree: usize) -> usize {
        self.by_degree.get(&degree).copied().unwrap_or(degree.saturating_sub(1).max(1))
    }
}

/// Hard-decision flip decoding.
///
/// Check-to-variable messages carry the unique symbol that would satisfy the
/// check given the other incoming hard messages. A variable of degree i sends
/// its channel symbol on an edge unless at least `rule.threshold(i)` of the
/// other i-1 incoming suggestions agree on one alternative symbol, in which
/// case it sends that symbol. The tentative decision is the plurality over
/// the channel symbol and all incoming suggestions, with ties kept at the
/// channel symbol.
pub fn gallager_b_decode(
    h: &ParityCheckMatrix,
    field: &GField,
    received: &[Symbol],
    max_iter: usize,
    rule: &FlipRule,
) -> DecodeOutcome {
    gallager_b_decode_observe(h, field, received, max_iter, rule, |_, _| {})
}

/// [`gallager_b_decode`] reporting the fraction of wrong variable-to-check
/// messages after each iteration, measured against a reference codeword.
/// This is the quantity the transfer chart iterates, so it lets decoder runs
/// be checked against the analysis directly.
pub fn gallager_b_message_error_rates(
    h: &ParityCheckMatrix,
    field: &GField,
    received: &[Symbol],
    max_iter: usize,
    rule: &FlipRule,
    reference: &[Symbol],
) -> (DecodeOutcome, Vec<f64>) {
    let mut rates = Vec::new();
    let out = gallager_b_core(h, field, received, max_iter, rule, &mut |_, _| {}, &mut |v2c| {
        let mut wrong = 0usize;
        let mut total = 0usize;
        for (v, msgs) in v2c.iter().enumerate() {
            for &s in msgs {
                wrong += (s != reference[v]) as usize;
                total += 1;
            }
        }
        rates.push(wrong as f64 / total as f64);
    });
    (out, rates)
}

/// [`gallager_b_decode`] with a per-iteration observer over the tentative
/// decision; the observer also sees iteration 0 (the received word).
pub fn gallager_b_decode_observe(
    h: &ParityCheckMatrix,
    field: &GField,
    received: &[Symbol],
    max_iter: usize,
    rule: &FlipRule,
    mut observe: impl FnMut(usize, &[Symbol]),
) -> DecodeOutcome {
    gallager_b_core(h, field, received, max_iter, rule, &mut observe, &mut |_| {})
}

fn gallager_b_core(
    h: &ParityCheckMatrix,
    field: &GField,
    received: &[Symbol],
    max_iter: usize,
    rule: &FlipRule,
    observe: &mut dyn FnMut(usize, &[Symbol]),
    observe_messages: &mut dyn FnMut(&[Vec<Symbol>]),
) -> DecodeOutcome {
    let q = field.order();
    let (n, m) = (h.n(), h.m());
    debug_assert_eq!(received.len(), n);

    observe(0, received);
    if h.is_codeword(field, received) {
        return DecodeOutcome {
            estimate: received.to_vec(),
            iterations_used: 0,
            status: DecodeStatus::Converged,
        };
    }

    // Messages indexed by the column adjacency order of each variable.
    let mut v2c: Vec<Vec<Symbol>> = (0..n).map(|v| vec![received[v]; h.col(v).len()]).collect();
    // Suggestions indexed the same way (one per variable edge).
    let mut c2v: Vec<Vec<Symbol>> = (0..n).map(|v| vec![0; h.col(v).len()]).collect();
    // Map (check, slot-in-row) -> (variable, slot-in-col).
    let mut row_slots: Vec<Vec<(u32, u32)>> = vec![Vec::new(); m];
    {
        let mut col_cursor = vec![0u32; n];
        for v in 0..n {
            for &(c, _) in h.col(v) {
                row_slots[c as usize].push((v as u32, col_cursor[v]));
                col_cursor[v] += 1;
            }
        }
    }

    let mut tentative = received.to_vec();
    let mut counts = vec![0u32; q];

    for iter in 1..=max_iter {
        // Check side: each edge gets the symbol completing its check.
        for c in 0..m {
            let row = h.row(c);
            let mut total = 0 as Symbol;
            for (slot, &(v, label)) in row.iter().enumerate() {
                let (_, col_slot) = row_slots[c][slot];
                total = field.add(total, field.mul(label, v2c[v as usize][col_slot as usize]));
            }
            for (slot, &(v, label)) in row.iter().enumerate() {
                let (_, col_slot) = row_slots[c][slot];
                let others =
                    field.add(total, field.mul(label, v2c[v as usize][col_slot as usize]));
                let inv = field.inv(label).expect("labels are nonzero");
                c2v[v as usize][col_slot as usize] = field.mul(inv, others);
            }
        }

        // Variable side: flip rule per edge, plurality for the decision.
        for v in 0..n {
            let deg = h.col(v).len();
            let z = received[v];
            let b = rule.threshold(deg);
            counts.fill(0);
            for &s in &c2v[v] {
                counts[s as usize] += 1;
            }
            for e in 0..deg {
                let excluded = c2v[v][e];
                let mut out = z;
                let mut best = 0u32;
                for a in 0..q {
                    if a as Symbol == z {
                        continue;
                    }
                    let cnt = counts[a] - (excluded as usize == a) as u32;
                    if cnt as usize >= b && cnt > best {
                        best = cnt;
                        out = a as Symbol;
                    }
                }
                v2c[v][e] = out;
            }
            // Decision: channel symbol counts one vote and wins ties.
            counts[z as usize] += 1;
            let mut dec = z;
            for a in 0..q {
                if counts[a] > counts[dec as usize] {
                    dec = a as Symbol;
                }
            }
            tentative[v] = dec;
            counts[z as usize] -= 1;
        }

        observe_messages(&v2c);
        observe(iter, &tentative);
        if h.is_codeword(field, &tentative) {
            return DecodeOutcome {
                estimate: tentative,
                iterations_used: iter,
                status: DecodeStatus::Converged,
            };
        }
    }
    DecodeOutcome { estimate: tentative, iterations_used: max_iter, status: DecodeStatus::MaxIter }
}

/// Transform-domain check-node update: returns the outgoing message for each
/// edge of one check, given the incoming variable-to-check probability
/// vectors and the edge labels.
///
/// Incoming vectors are re-indexed by their edge label, taken to the
/// transform domain, multiplied with everything but their own spectrum
/// (prefix/suffix products, so no divisions), transformed back and
/// re-indexed by the outgoing label.
pub fn check_node_messages(
    field: &GField,
    labels: &[Symbol],
    incoming: &[ProbVector],
) -> Vec<ProbVector> {
    let q = field.order();
    let k = incoming.len();
    debug_assert_eq!(labels.len(), k);

    // Permute by label and transform: spectrum of h_j * c_j.
    let mut spectra: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (msg, &label) in incoming.iter().zip(labels) {
        let mut w = vec![0.0; q];
        let inv = field.inv(label).expect("labels are nonzero");
        for x in 0..q {
            w[x] = msg[field.mul(inv, x as Symbol) as usize];
        }
        wht_in_place(&mut w);
        spectra.push(w);
    }

    // Leave-one-out products of the spectra.
    let mut prefix = vec![vec![1.0; q]; k + 1];
    for j in 0..k {
        for x in 0..q {
            prefix[j + 1][x] = prefix[j][x] * spectra[j][x];
        }
    }
    let mut suffix = vec![1.0; q];
    let mut out = vec![ProbVector::uniform(q); k];
    for j in (0..k).rev() {
        let mut s = vec![0.0; q];
        for x in 0..q {
            s[x] = prefix[j][x] * suffix[x];
        }
        wht_in_place(&mut s);
        let scale = 1.0 / q as f64;
        // The sum of the other h*c equals h_e * c_e in characteristic 2;
        // re-index back through the outgoing label.
        let label = labels[j];
        let mut msg = vec![0.0; q];
        for x in 0..q {
            msg[x] = s[field.mul(label, x as Symbol) as usize] * scale;
        }
        let mut msg = ProbVector::new(msg);
        msg.normalize();
        out[j] = msg;
        for x in 0..q {
            suffix[x] *= spectra[j][x];
        }
    }
    out
}

/// Sum-product decoding with the check convolutions done in the transform
/// domain. Messages live in the probability domain with clamping to
/// `[PROB_FLOOR, 1]`; the fixed points match the log-domain formulation.
pub fn fft_qspa_decode(
    h: &ParityCheckMatrix,
    field: &GField,
    llrvs: &[Llrv],
    max_iter: usize,
) -> DecodeOutcome {
    fft_qspa_decode_observe(h, field, llrvs, max_iter, |_, _| {})
}

/// [`fft_qspa_decode`] with a per-iteration observer over the tentative
/// decision (iteration 0 is the channel-only decision).
pub fn fft_qspa_decode_observe(
    h: &ParityCheckMatrix,
    field: &GField,
    llrvs: &[Llrv],
    max_iter: usize,
    mut observe: impl FnMut(usize, &[Symbol]),
) -> DecodeOutcome {
    let q = field.order();
    let (n, m) = (h.n(), h.m());
    debug_assert_eq!(llrvs.len(), n);

    let priors: Vec<ProbVector> = llrvs.iter().map(Llrv::to_prob_vector).collect();
    let mut tentative: Vec<Symbol> = priors.iter().map(ProbVector::argmax).collect();
    observe(0, &tentative);
    if h.is_codeword(field, &tentative) {
        return DecodeOutcome { estimate: tentative, iterations_used: 0, status: DecodeStatus::Converged };
    }

    // Per-variable edge-indexed messages, mirroring the column adjacency.
    let mut v2c: Vec<Vec<ProbVector>> =
        (0..n).map(|v| vec![priors[v].clone(); h.col(v).len()]).collect();
    let mut c2v: Vec<Vec<ProbVector>> =
        (0..n).map(|v| vec![ProbVector::uniform(q); h.col(v).len()]).collect();
    let mut row_slots: Vec<Vec<(u32, u32)>> = vec![Vec::new(); m];
    {
        let mut cursor = vec![0u32; n];
        for v in 0..n {
            for &(c, _) in h.col(v) {
                row_slots[c as usize].push((v as u32, cursor[v]));
                cursor[v] += 1;
            }
        }
    }

    for iter in 1..=max_iter {
        // Check updates.
        for c in 0..m {
            let row = h.row(c);
            let labels: Vec<Symbol> = row.iter().map(|&(_, l)| l).collect();
            let incoming: Vec<ProbVector> = row
                .iter()
                .enumerate()
                .map(|(slot, &(v, _))| {
                    let (_, col_slot) = row_slots[c][slot];
                    v2c[v as usize][col_slot as usize].clone()
                })
                .collect();
            let outgoing = check_node_messages(field, &labels, &incoming);
            for (slot, msg) in outgoing.into_iter().enumerate() {
                let (v, col_slot) = row_slots[c][slot];
                c2v[v as usize][col_slot as usize] = msg;
            }
        }

        // Variable updates with leave-one-out products.
        for v in 0..n {
            let deg = h.col(v).len();
            let mut prefix: Vec<Vec<f64>> = Vec::with_capacity(deg + 1);
            prefix.push(priors[v].as_slice().to_vec());
            for e in 0..deg {
                let mut next = prefix[e].clone();
                for x in 0..q {
                    next[x] *= c2v[v][e][x];
                }
                prefix.push(next);
            }
            let mut suffix = vec![1.0; q];
            for e in (0..deg).rev() {
                let mut msg = vec![0.0; q];
                for x in 0..q {
                    msg[x] = prefix[e][x] * suffix[x];
                }
                let mut msg = ProbVector::new(msg);
                msg.normalize();
                v2c[v][e] = msg;
                for x in 0..q {
                    suffix[x] *= c2v[v][e][x].max(PROB_FLOOR);
                }
            }
            // Posterior = prior times all incoming.
            let mut post = prefix[deg].clone();
            for x in 0..q {
                post[x] = post[x].max(0.0);
            }
            let post = ProbVector::new(post);
            tentative[v] = post.argmax();
        }

        observe(iter, &tentative);
        if h.is_codeword(field, &tentative) {
            return DecodeOutcome {
                estimate: tentative,
                iterations_used: iter,
                status: DecodeStatus::Converged,
            };
        }
    }
    DecodeOutcome { estimate: tentative, iterations_used: max_iter, status: DecodeStatus::MaxIter }
}

/// Hard decision on a log-likelihood ratio vector: symbol 0 when every entry
/// is positive, otherwise the most likely symbol (smallest ratio), lowest
/// index on ties.
pub fn hard_decision(llrvs: &[Llrv]) -> Vec<Symbol> {
    llrvs
        .iter()
        .map(|l| {
            let mut min = f64::INFINITY;
            let mut arg = 0 as Symbol;
            for (i, &v) in l.as_slice().iter().enumerate() {
                if v < min {
                    min = v;
                    arg = (i + 1) as Symbol;
                }
            }
            // A ratio of zero is a tie with symbol 0, which wins as the
            // lower index.
            if min < 0.0 {
                arg
            } else {
                0
            }
        })
        .collect()
}
