use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time ran backward: requested {requested} but state is at {current}")]
    TimeReversal { current: f64, requested: f64 },
    #[error("channel {channel} out of range for a {channels}-channel neuron")]
    ChannelOutOfRange { channel: usize, channels: usize },
    #[error("input stream is not sorted: ({next_time}, ch {next_channel}) follows ({prev_time}, ch {prev_channel})")]
    UnsortedStream {
        prev_time: f64,
        prev_channel: usize,
        next_time: f64,
        next_channel: usize,
    },
    #[error("cannot normalize an all-zero weight vector")]
    ZeroNorm,
    #[error("spike at {spike} lies outside the learning window [{start}, {end}]")]
    OutsideWindow { spike: f64, start: f64, end: f64 },
    #[error("no promotion events recorded")]
    NoPromotions,
    #[error("no update events recorded")]
    NoEvents,
    #[error("degenerate constraint: denominator {0:e} is indistinguishable from zero")]
    DegenerateConstraint(f64),
    #[error("vanishing learning-rate average for channel {0}")]
    VanishingEpsilon(usize),
    #[error("novelty indicator must be non-negative, got {0}")]
    NegativeDelta(f64),
    #[error("sequence {sequence} never crosses threshold within {length} events ({untruncated} of {total} sequences untruncated)")]
    NeverCrosses {
        sequence: String,
        length: usize,
        untruncated: u64,
        total: u64,
    },
    #[error("no output spike within a budget of {0} input events")]
    NoOutput(usize),
    #[error("invalid rate {0}: rates must be positive and finite")]
    InvalidRate(f64),
    #[error("intensity row has zero total")]
    ZeroIntensity,
    #[error("idx parse error at byte {offset}: {message}")]
    Idx { offset: usize, message: String },
    #[error("digit {0} does not occur in the dataset")]
    UnknownDigit(u8),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidParameter(message.into())
}
