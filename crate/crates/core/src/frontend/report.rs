use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
    Indeterminate,
}

/// Why a command ended in `Status::Error`; decides the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Window,
    Mathematical,
}

impl ErrorClass {
    pub fn of(e: &Error) -> Self {
        match e {
            Error::InsufficientPrecision { .. }
            | Error::EmptyExactRange { .. }
            | Error::OutsideExactRange { .. }
            | Error::IndexOutOfWindow { .. } => ErrorClass::Window,
            Error::NonIntegrable { .. } | Error::InternalInconsistency { .. } => {
                ErrorClass::Mathematical
            }
            Error::InexactCoefficient
            | Error::InvalidWindow { .. }
            | Error::OrderTooHigh { .. }
            | Error::NotLinear { .. }
            | Error::NotDiscOperator { .. }
            | Error::Parse(_) => ErrorClass::Usage,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub payload: Value,
    #[serde(skip)]
    pub error_class: Option<ErrorClass>,
}

impl Report {
    pub fn new(command: &str, input: Option<&str>, status: Status, payload: Value) -> Self {
        Report {
            command: command.to_string(),
            status,
            input: input.map(str::to_string),
            payload,
            error_class: None,
        }
    }

    pub fn pass_fail(command: &str, input: Option<&str>, pass: bool, payload: Value) -> Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        Self::new(command, input, status, payload)
    }

    pub fn error(command: &str, input: Option<&str>, e: &Error) -> Self {
        Self::usage_error(command, input, &e.to_string(), ErrorClass::of(e))
    }

    pub fn usage_error(
        command: &str,
        input: Option<&str>,
        message: &str,
        class: ErrorClass,
    ) -> Self {
        Report {
            error_class: Some(class),
            ..Self::new(
                command,
                input,
                Status::Error,
                serde_json::json!({ "error": message }),
            )
        }
    }

    /// 0 pass, 1 mathematical failure, 2 usage or parse error, 3 insufficient window / indeterminate.
    pub fn exit_code(&self) -> i32 {
        match (self.status, self.error_class) {
            (Status::Pass, _) => 0,
            (Status::Fail, _) => 1,
            (Status::Indeterminate, _) => 3,
            (Status::Error, Some(ErrorClass::Window)) => 3,
            (Status::Error, Some(ErrorClass::Mathematical)) => 1,
            (Status::Error, _) => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Line-oriented rendering of the same facts as the JSON form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let status = serde_json::to_value(self.status).expect("status");
        let _ = writeln!(
            out,
            "{}: {}",
            self.command,
            status.as_str().unwrap_or_default()
        );
        if let Some(input) = &self.input {
            let _ = writeln!(out, "  input: {input}");
        }
        write_value(&mut out, &self.payload, 1);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                match scalar(v) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        write_value(out, v, depth + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        write_value(out, item, depth + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn text_contains_json_facts() {
        let r = Report::pass_fail(
            "helmholtz",
            Some("y''"),
            true,
            json!({"passed": true, "residuals": [{"level": 1, "poly": "0"}]}),
        );
        let text = r.to_text();
        assert!(text.starts_with("helmholtz: pass\n"));
        assert!(text.contains("passed: true"));
        assert!(text.contains("poly: 0"));
        assert_eq!(r.to_json()["status"], "pass");
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn exit_codes() {
        let fail = Report::pass_fail("x", None, false, json!({}));
        assert_eq!(fail.exit_code(), 1);
        let window = Report::error(
            "x",
            None,
            &Error::EmptyExactRange {
                low: 0,
                high: 1,
                exact_low: 3,
                exact_high: 2,
            },
        );
        assert_eq!(window.exit_code(), 3);
        let usage = Report::error("x", None, &Error::NotLinear { degree: 2 });
        assert_eq!(usage.exit_code(), 2);
        assert_eq!(
            Report::new("x", None, Status::Indeterminate, json!({})).exit_code(),
            3
        );
    }
}
