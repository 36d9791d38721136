use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("scenario generation failed after {attempts} attempts: {constraint}")]
    ScenarioGeneration { constraint: String, attempts: usize },

    #[error("episode already terminated ({0}); call reset first")]
    EpisodeTerminated(crate::reward::Terminal),

    #[error("policy failed at step {step}: {message}")]
    Policy { step: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
