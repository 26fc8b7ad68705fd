//! Design and validation toolkit for low-decoding-complexity irregular
//! non-binary LDPC codes over GF(q), q = 2^p.
//!
//! The crate covers the full pipeline:
//!
//! - [`galois`]: field arithmetic and the group transform behind the
//!   soft-decision check update;
//! - [`ensemble`]: edge-perspective degree distributions, rates, and integer
//!   degree sequences;
//! - [`exitchart`]: hard-decision transfer functions, iteration estimates,
//!   decoding complexity and thresholds;
//! - [`optimizer`]: trust-region complexity minimization over degree
//!   distributions and the minimum-column-weight scan;
//! - [`graph`]: progressive edge-growth construction, girth, matrix
//!   serialization and encoding;
//! - [`channel`]: q-ary symmetric and binary-modulated AWGN channels;
//! - [`decoders`]: hard-decision symbol flipping and the transform-domain
//!   q-ary sum-product decoder;
//! - [`montecarlo`]: reproducible BER/WER sweeps and paired convergence
//!   profiles;
//! - [`reference`](mod@reference): published ensembles and tables the test
//!   suites replay.

pub mod channel;
pub mod decoders;
pub mod ensemble;
pub mod exitchart;
pub mod galois;
pub mod graph;
pub mod montecarlo;
pub mod optimizer;
pub mod reference;

pub use channel::{ChannelModel, Llrv};
pub use decoders::{DecodeOutcome, DecodeStatus, FlipRule};
pub use ensemble::DegreeDistribution;
pub use exitchart::{Chart, ExitEvaluation};
pub use galois::{GField, ProbVector, Symbol};
pub use graph::{Encoder, Girth, ParityCheckMatrix};
pub use montecarlo::{ChannelSweep, DecoderKind, SimConfig, SimResult};
pub use optimizer::{PctConfig, PctResult};
