//! Fast-broadcasting near video-on-demand toolkit.
//!
//! Three periodic broadcast schemes share one model: the classic fast
//! broadcasting scheme (FB), its data-preloading variant (DPFB) that stores
//! the tail of the video at the client, and the channel-transition-invariant
//! variant (CTFB) that stores the head of the video and keeps a fixed channel
//! count while the segmentation parameter `k` changes.
//!
//! * [`model`] holds videos, scheme configurations and slot clocks.
//! * [`scheduler`] builds segment maps and channel schedules.
//! * [`analytics`] evaluates the closed-form metrics.
//! * [`simulator`] replays a client slot by slot and is the oracle for the formulas.
//! * [`transport`] puts the schedule on a framed datagram wire.
//! * [`figures`] regenerates the comparison datasets.

pub mod analytics;
pub mod error;
pub mod figures;
pub mod model;
pub mod report;
pub mod scheduler;
pub mod simulator;
pub mod transport;

pub use error::{Error, Result};
pub use model::{Family, Rational, SchemeConfig, VideoSpec};
