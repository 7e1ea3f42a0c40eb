//! Parsing, reports and the command-line surface.

pub mod cli;
pub mod parse;
pub mod report;

pub use cli::{run_command, Outcome};
pub use parse::{parse_equation, parse_operator, parse_series, ParseError, ParsedEquation};
pub use report::{Report, Status};
