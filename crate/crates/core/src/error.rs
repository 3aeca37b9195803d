use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid video: {0}")]
    InvalidVideo(&'static str),

    #[error("invalid scheme configuration {config}: {reason}")]
    InvalidConfig {
        config: String,
        reason: &'static str,
    },

    #[error("channel {channel} out of range, map has {channels} channel(s)")]
    ChannelOutOfRange { channel: usize, channels: usize },

    #[error("slot indices are 1-based, got 0")]
    ZeroSlot,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("segment correspondence is undefined between {0}")]
    NoCorrespondence(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("transition at slot boundary {slot} is not aligned to the coarser grid")]
    MisalignedTransition { slot: u64 },

    #[error("source is {actual} bytes, expected {expected}")]
    SourceSize { expected: u64, actual: u64 },

    #[error("simulation did not finish within {0} slots")]
    HorizonExceeded(u64),
}
