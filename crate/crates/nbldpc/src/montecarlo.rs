//! Monte Carlo trial harness: BER/WER/iteration statistics versus channel
//! parameter, and paired convergence profiles of two codes over a grid of
//! iteration budgets.
//!
//! Trials draw from per-trial counter-derived random streams and are
//! aggregated in fixed-size batches in trial order, so results are bit
//! identical for a given seed no matter how many workers run the batch.

use crate::channel::{awgn_llrv, qsc_transmit, trial_rng, ChannelModel};
use crate::decoders::{
    fft_qspa_decode_observe, gallager_b_decode_observe, DecodeStatus, FlipRule,
};
use crate::galois::{GField, Symbol};
use crate::graph::{Encoder, ParityCheckMatrix};
use rand::Rng;
use rayon::prelude::*;
use std::fmt;

/// Trials evaluated between stop-rule checks; fixed so that worker count
/// cannot change which trials run.
const BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Config(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Config(m) => write!(f, "bad simulation config: {m}"),
        }
    }
}

impl std::error::Error for SimError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    GallagerB,
    FftQspa,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecoderKind::GallagerB => write!(f, "gallager-b"),
            DecoderKind::FftQspa => write!(f, "fft-qspa"),
        }
    }
}

/// The channel axis of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSweep {
    /// Symbol error probabilities of the q-ary symmetric channel.
    QSymmetric { epsilons: Vec<f64> },
    /// Eb/N0 points in dB for binary-modulated AWGN.
    AwgnBpsk { ebn0_dbs: Vec<f64> },
}

impl ChannelSweep {
    pub fn points(&self) -> &[f64] {
        match self {
            ChannelSweep::QSymmetric { epsilons } => epsilons,
            ChannelSweep::AwgnBpsk { ebn0_dbs } => ebn0_dbs,
        }
    }

    pub fn axis_name(&self) -> &'static str {
        match self {
            ChannelSweep::QSymmetric { .. } => "epsilon",
            ChannelSweep::AwgnBpsk { .. } => "ebn0_db",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub sweep: ChannelSweep,
    pub decoder: DecoderKind,
    pub max_iter: usize,
    /// Stop a point once this many word errors are seen...
    pub min_word_errors: usize,
    /// ...or this many trials have run, whichever is first.
    pub max_trials: usize,
    pub seed: u64,
    /// Simulate the all-zero codeword (valid on the symmetric channels used
    /// here); `false` draws random messages through an encoder.
    pub all_zero: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            sweep: ChannelSweep::QSymmetric { epsilons: vec![0.01] },
            decoder: DecoderKind::FftQspa,
            max_iter: 30,
            min_word_errors: 50,
            max_trials: 1_000_000,
            seed: 0,
            all_zero: true,
        }
    }
}

/// Statistics of one sweep point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub param: f64,
    pub trials: usize,
    pub word_errors: usize,
    pub bit_errors: usize,
    pub ber: f64,
    pub wer: f64,
    /// Mean iterations among converged trials (NaN when none converged).
    pub mean_iterations: f64,
    /// 95% half-widths; rare-event guard reports 3/denominator at zero
    /// observed errors.
    pub ber_ci: f64,
    pub wer_ci: f64,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub points: Vec<PointResult>,
    /// Information bits per word used as the BER denominator.
    pub info_bits_per_word: f64,
}

struct TrialOutcome {
    word_error: bool,
    bit_errors: usize,
    iterations: usize,
    converged: bool,
}

fn bit_diff(a: Symbol, b: Symbol) -> usize {
    (a ^ b).count_ones() as usize
}

fn design_rate(h: &ParityCheckMatrix) -> f64 {
    1.0 - h.m() as f64 / h.n() as f64
}

fn normal_ci(errors: usize, denom: f64) -> f64 {
    if errors == 0 {
        3.0 / denom
    } else {
        let p = errors as f64 / denom;
        1.96 * (p * (1.0 - p) / denom).sqrt()
    }
}

/// Runs a full sweep. `encoder` is required when `all_zero` is false; with
/// it, each trial encodes a seeded random message and errors are counted on
/// the message positions only.
pub fn run_sweep(
    h: &ParityCheckMatrix,
    field: &GField,
    cfg: &SimConfig,
    encoder: Option<&Encoder>,
) -> Result<SimResult, SimError> {
    if cfg.sweep.points().is_empty() {
        return Err(SimError::Config("empty sweep".into()));
    }
    if cfg.max_iter == 0 {
        return Err(SimError::Config("max_iter must be at least 1".into()));
    }
    if !cfg.all_zero && encoder.is_none() {
        return Err(SimError::Config(
            "random-codeword mode needs an encoder".into(),
        ));
    }
    if matches!(cfg.decoder, DecoderKind::FftQspa)
        && matches!(cfg.sweep, ChannelSweep::QSymmetric { .. })
    {
        return Err(SimError::Config("the sum-product decoder needs an AWGN sweep".into()));
    }
    let rate = design_rate(h);
    let bits_per_symbol = field.ext_degree() as f64;
    let info_bits_per_word = match encoder {
        Some(enc) if !cfg.all_zero => enc.message_len() as f64 * bits_per_symbol,
        _ => rate * h.n() as f64 * bits_per_symbol,
    };

    let flip_rule = |param: f64| -> FlipRule {
        let model = match cfg.sweep {
            ChannelSweep::QSymmetric { .. } => ChannelModel::QSymmetric { epsilon: param },
            ChannelSweep::AwgnBpsk { .. } => ChannelModel::AwgnBpsk { ebn0_db: param, rate },
        };
        FlipRule::from_matrix(h, field, model.initial_error_prob(field))
    };

    let mut points = Vec::new();
    for (pidx, &param) in cfg.sweep.points().iter().enumerate() {
        let rule = match cfg.decoder {
            DecoderKind::GallagerB => Some(flip_rule(param)),
            DecoderKind::FftQspa => None,
        };
        let run_trial = |t: usize| -> TrialOutcome {
            let mut rng = trial_rng(cfg.seed, ((pidx as u64) << 40) | t as u64);
            let codeword: Vec<Symbol> = if cfg.all_zero {
                vec![0; h.n()]
            } else {
                let enc = encoder.expect("checked above");
                let msg: Vec<Symbol> = (0..enc.message_len())
                    .map(|_| rng.random_range(0..field.order()) as Symbol)
                    .collect();
                enc.encode(&msg).expect("message length matches encoder")
            };
            let outcome = match cfg.decoder {
                DecoderKind::GallagerB => {
                    let epsilon = match cfg.sweep {
                        ChannelSweep::QSymmetric { .. } => param,
                        ChannelSweep::AwgnBpsk { .. } => {
                            // Hard-decision front end for the flip decoder.
                            ChannelModel::AwgnBpsk { ebn0_db: param, rate }
                                .initial_error_prob(field)
                        }
                    };
                    let rx = qsc_transmit(&codeword, epsilon, field, &mut rng)
                        .expect("epsilon within range");
                    gallager_b_decode_observe(
                        h,
                        field,
                        &rx,
                        cfg.max_iter,
                        rule.as_ref().expect("rule built for flip decoder"),
                        |_, _| {},
                    )
                }
                DecoderKind::FftQspa => {
                    // The sweep axis is validated up front.
                    let llrvs = awgn_llrv(&codeword, param, rate, field, &mut rng);
                    fft_qspa_decode_observe(h, field, &llrvs, cfg.max_iter, |_, _| {})
                }
            };
            let bit_errors = match encoder {
                Some(enc) if !cfg.all_zero => enc
                    .message_positions()
                    .iter()
                    .map(|&i| bit_diff(outcome.estimate[i], codeword[i]))
                    .sum(),
                _ => outcome
                    .estimate
                    .iter()
                    .zip(&codeword)
                    .map(|(&a, &b)| bit_diff(a, b))
                    .sum(),
            };
            TrialOutcome {
                word_error: outcome.estimate != codeword,
                bit_errors,
                iterations: outcome.iterations_used,
                converged: outcome.status == DecodeStatus::Converged,
            }
        };

        let mut trials = 0usize;
        let mut word_errors = 0usize;
        let mut bit_errors = 0usize;
        let mut iterations_sum = 0usize;
        let mut converged = 0usize;
        while trials < cfg.max_trials && word_errors < cfg.min_word_errors {
            let end = (trials + BATCH).min(cfg.max_trials);
            let batch: Vec<TrialOutcome> = (trials..end).into_par_iter().map(run_trial).collect();
            for o in batch {
                word_errors += o.word_error as usize;
                bit_errors += o.bit_errors;
                if o.converged {
                    converged += 1;
                    iterations_sum += o.iterations;
                }
            }
            trials = end;
        }

        let bit_denom = match encoder {
            // All-zero mode counts errors over every position and scales by
            // the rate, which cancels to errors over all transmitted bits.
            _ if cfg.all_zero => trials as f64 * h.n() as f64 * bits_per_symbol,
            Some(enc) => trials as f64 * enc.message_len() as f64 * bits_per_symbol,
            None => unreachable!(),
        };
        points.push(PointResult {
            param,
            trials,
            word_errors,
            bit_errors,
            ber: bit_errors as f64 / bit_denom,
            wer: word_errors as f64 / trials as f64,
            mean_iterations: if converged > 0 {
                iterations_sum as f64 / converged as f64
            } else {
                f64::NAN
            },
            ber_ci: normal_ci(bit_errors, bit_denom),
            wer_ci: normal_ci(word_errors, trials as f64),
        });
    }
    Ok(SimResult { points, info_bits_per_word })
}

/// CSV emission with `#`-prefixed metadata lines first.
pub fn sweep_csv(result: &SimResult, cfg: &SimConfig, meta: &[(String, String)]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for (k, v) in meta {
        writeln!(out, "# {k} {v}").unwrap();
    }
    writeln!(out, "# decoder {}", cfg.decoder).unwrap();
    writeln!(out, "# axis {}", cfg.sweep.axis_name()).unwrap();
    writeln!(out, "# max_iter {}", cfg.max_iter).unwrap();
    writeln!(out, "# min_word_errors {}", cfg.min_word_errors).unwrap();
    writeln!(out, "# max_trials {}", cfg.max_trials).unwrap();
    writeln!(out, "# seed {}", cfg.seed).unwrap();
    writeln!(out, "# all_zero {}", cfg.all_zero).unwrap();
    writeln!(out, "# info_bits_per_word {}", result.info_bits_per_word).unwrap();
    writeln!(out, "param,ber,wer,mean_iters,trials,ber_ci,wer_ci").unwrap();
    for p in &result.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.param, p.ber, p.wer, p.mean_iterations, p.trials, p.ber_ci, p.wer_ci
        )
        .unwrap();
    }
    out
}

/// Profile configuration: BER as a function of the iteration budget.
#[derive(Debug, Clone)]
pub struct ProfileConfig {
    pub sweep: ChannelSweep,
    pub decoder: DecoderKind,
    /// Largest budget examined; per-budget statistics cover `1..=cap`.
    pub max_iter_cap: usize,
    pub target_ber: f64,
    pub min_word_errors: usize,
    pub max_trials: usize,
    pub seed: u64,
    /// Rate used in the Eb/N0 energy accounting instead of each matrix's own
    /// design rate. Codes designed toward one target rate are compared at
    /// equal channel noise this way; with per-matrix rates a lower-rate code
    /// is handicapped by the energy normalization at the same nominal point.
    pub nominal_rate: Option<f64>,
}

/// Per-point budget statistics for one code.
#[derive(Debug, Clone)]
pub struct PointProfile {
    pub param: f64,
    pub trials: usize,
    /// `ber_by_budget[n]` is the BER had decoding stopped after `n`
    /// iterations (index 0 is the channel-only decision).
    pub ber_by_budget: Vec<f64>,
    /// Smallest budget reaching the target, if any.
    pub required_budget: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct CodeProfile {
    pub per_point: Vec<PointProfile>,
    /// Smallest budget reaching the target anywhere on the sweep.
    pub smallest_budget: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ProfileResult {
    pub first: CodeProfile,
    pub second: CodeProfile,
    /// `smallest_budget(second) / smallest_budget(first)` when both exist.
    pub budget_ratio: Option<f64>,
}

/// Compares how quickly two codes reach the target BER as the iteration
/// budget grows, on a shared channel sweep with paired seeds. All-zero
/// transmission throughout.
pub fn convergence_profile(
    first: &ParityCheckMatrix,
    second: &ParityCheckMatrix,
    field: &GField,
    cfg: &ProfileConfig,
) -> Result<ProfileResult, SimError> {
    let a = profile_code(first, field, cfg)?;
    let b = profile_code(second, field, cfg)?;
    let ratio = match (a.smallest_budget, b.smallest_budget) {
        (Some(na), Some(nb)) => Some(nb as f64 / na as f64),
        _ => None,
    };
    Ok(ProfileResult { first: a, second: b, budget_ratio: ratio })
}

fn profile_code(
    h: &ParityCheckMatrix,
    field: &GField,
    cfg: &ProfileConfig,
) -> Result<CodeProfile, SimError> {
    if cfg.sweep.points().is_empty() {
        return Err(SimError::Config("empty sweep".into()));
    }
    if matches!(cfg.decoder, DecoderKind::FftQspa)
        && matches!(cfg.sweep, ChannelSweep::QSymmetric { .. })
    {
        return Err(SimError::Config("the sum-product decoder needs an AWGN sweep".into()));
    }
    let rate = cfg.nominal_rate.unwrap_or_else(|| design_rate(h));
    let bits_per_symbol = field.ext_degree() as f64;
    let cap = cfg.max_iter_cap;
    let n = h.n();
    let codeword = vec![0 as Symbol; n];

    let mut per_point = Vec::new();
    for (pidx, &param) in cfg.sweep.points().iter().enumerate() {
        let rule = match cfg.decoder {
            DecoderKind::GallagerB => {
                let model = match cfg.sweep {
                    ChannelSweep::QSymmetric { .. } => ChannelModel::QSymmetric { epsilon: param },
                    ChannelSweep::AwgnBpsk { .. } => {
                        ChannelModel::AwgnBpsk { ebn0_db: param, rate }
                    }
                };
                Some(FlipRule::from_matrix(h, field, model.initial_error_prob(field)))
            }
            DecoderKind::FftQspa => None,
        };

        // Per-trial: bit errors of the tentative decision at each budget.
        let run_trial = |t: usize| -> (Vec<u32>, bool) {
            let mut rng = trial_rng(cfg.seed, ((pidx as u64) << 40) | t as u64);
            let mut err_at = vec![0u32; cap + 1];
            let mut recorded = 0usize;
            let mut observe = |iter: usize, tentative: &[Symbol]| {
                if iter <= cap {
                    err_at[iter] =
                        tentative.iter().map(|&s| bit_diff(s, 0)).sum::<usize>() as u32;
                    recorded = iter;
                }
            };
            let outcome = match cfg.decoder {
                DecoderKind::GallagerB => {
                    let epsilon = match cfg.sweep {
                        ChannelSweep::QSymmetric { .. } => param,
                        ChannelSweep::AwgnBpsk { .. } => {
                            ChannelModel::AwgnBpsk { ebn0_db: param, rate }
                                .initial_error_prob(field)
                        }
                    };
                    let rx = qsc_transmit(&codeword, epsilon, field, &mut rng)
                        .expect("epsilon within range");
                    gallager_b_decode_observe(
                        h,
                        field,
                        &rx,
                        cap,
                        rule.as_ref().expect("rule built for flip decoder"),
                        &mut observe,
                    )
                }
                DecoderKind::FftQspa => {
                    let llrvs = awgn_llrv(&codeword, param, rate, field, &mut rng);
                    fft_qspa_decode_observe(h, field, &llrvs, cap, &mut observe)
                }
            };
            // A converged decoder holds its estimate for larger budgets.
            let last = err_at[recorded];
            for slot in err_at.iter_mut().skip(recorded + 1) {
                *slot = last;
            }
            (err_at, outcome.estimate != codeword)
        };

        let mut trials = 0usize;
        let mut word_errors = 0usize;
        let mut totals = vec![0u64; cap + 1];
        while trials < cfg.max_trials && word_errors < cfg.min_word_errors {
            let end = (trials + BATCH).min(cfg.max_trials);
            let batch: Vec<(Vec<u32>, bool)> =
                (trials..end).into_par_iter().map(run_trial).collect();
            for (err_at, word_error) in batch {
                for (slot, e) in totals.iter_mut().zip(&err_at) {
                    *slot += *e as u64;
                }
                word_errors += word_error as usize;
            }
            trials = end;
        }

        let denom = trials as f64 * n as f64 * bits_per_symbol;
        let ber_by_budget: Vec<f64> = totals.iter().map(|&e| e as f64 / denom).collect();
        let required_budget = ber_by_budget.iter().position(|&b| b <= cfg.target_ber);
        per_point.push(PointProfile { param, trials, ber_by_budget, required_budget });
    }

    let smallest_budget =
        per_point.iter().filter_map(|p| p.required_budget).min().map(|n| n.max(1));
    Ok(CodeProfile { per_point, smallest_budget })
}
