use thiserror::Error;

/// All failure modes of the engine. Verification *failures* are not errors;
/// they are reported as failing check entries. Errors are malformed input,
/// out-of-domain evaluation or numerically degenerate structure.
#[derive(Debug, Error)]
pub enum FmanError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown symbol `{name}` at position {pos}")]
    UnknownSymbol { name: String, pos: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("degenerate structure: {0}")]
    Degenerate(String),

    #[error("unknown gallery item `{0}`")]
    UnknownGallery(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("definition file error: {0}")]
    Toml(String),
}

pub type Result<T> = std::result::Result<T, FmanError>;

impl FmanError {
    /// Exit-code classification used by the CLI: everything an engine error
    /// represents is bad *input* (code 2); check failures use code 1 and are
    /// produced from reports, not from this type.
    pub fn is_input_error(&self) -> bool {
        true
    }
}
