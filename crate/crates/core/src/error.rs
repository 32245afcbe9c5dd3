use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no connected {degree}-regular graph exists on {n} nodes")]
    InfeasibleTopology { n: usize, degree: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty series")]
    EmptySeries,
    #[error("series of length {len} is too short, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("requested {requested} clusters but the graph has only {nodes} nodes")]
    TooManyClusters { requested: usize, nodes: usize },
    #[error("graph already has {components} components, more than the requested {requested}")]
    TooManyComponents { components: usize, requested: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("cannot aggregate an empty model list")]
    EmptyModelList,
    #[error("cluster {cluster} has no members with a model")]
    EmptyCluster { cluster: usize },
    #[error("models have incompatible architectures")]
    ArchMismatch,
    #[error("series is constant, cannot derive min-max scaling")]
    ConstantSeries,
    #[error("truth range is zero but prediction error is not")]
    ZeroTruthRange,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
