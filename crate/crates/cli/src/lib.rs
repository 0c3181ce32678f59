//! Command-line harness for [`gett`]: contract tensors stored in text files,
//! generate conformance cases, check the kernel against the oracle and time
//! it.

pub mod commands;
pub mod format;

pub use commands::CliError;
pub use format::{parse_tensor, read_tensor, to_text, write_tensor, TensorData, TensorFile};
