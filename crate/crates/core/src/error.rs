use thiserror::Error;

#[derive(Debug, Error)]
pub enum NpbError {
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("unknown problem class `{0}`")]
    UnknownClass(String),
    #[error("class {class} is not supported by {benchmark}")]
    UnsupportedClass { benchmark: String, class: String },
    #[error("failed to build worker pool: {0}")]
    PoolBuild(String),
    #[error("worker panicked: {0}")]
    WorkerPanicked(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, NpbError>;

pub(crate) fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}
