//! Error categories and their exit codes.

use std::fmt;
use std::path::Path;

use pcqa::evaluation::EvalError;
use pcqa::ply::PlyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Invalid flag values or combinations.
    Usage,
    /// Missing or unreadable/unwritable files.
    Io,
    /// Malformed point cloud or manifest files.
    Parse,
    /// The selected peak evaluates to zero.
    ZeroPeak,
    /// Any other failure of the metric computation.
    Compute,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Io => 3,
            Category::Parse => 4,
            Category::ZeroPeak => 5,
            Category::Compute => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Usage => "usage",
            Category::Io => "io",
            Category::Parse => "parse",
            Category::ZeroPeak => "zero-peak",
            Category::Compute => "compute",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub category: Category,
    pub message: String,
}

impl Failure {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Self {
            category,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Category::Usage, message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        let what = if err.kind() == std::io::ErrorKind::NotFound {
            "file not found".to_string()
        } else {
            err.to_string()
        };
        Self::new(Category::Io, format!("{}: {what}", path.display()))
    }

    pub fn ply(path: &Path, err: PlyError) -> Self {
        match err {
            PlyError::Io(e) => Self::io(path, e),
            e => Self::new(Category::Parse, format!("{}: {e}", path.display())),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.category.name(), self.message)
    }
}

fn core_category(err: &pcqa::Error) -> Category {
    match err {
        pcqa::Error::ZeroPeak(_) => Category::ZeroPeak,
        pcqa::Error::InvalidParameter(_) | pcqa::Error::MissingBitDepth(_) => Category::Usage,
        _ => Category::Compute,
    }
}

impl From<pcqa::Error> for Failure {
    fn from(err: pcqa::Error) -> Self {
        Self::new(core_category(&err), err.to_string())
    }
}

impl From<EvalError> for Failure {
    fn from(err: EvalError) -> Self {
        let category = match &err {
            EvalError::NoVariants => Category::Usage,
            EvalError::MissingFile { .. } | EvalError::Io(_) => Category::Io,
            EvalError::Manifest(_) | EvalError::Load { .. } => Category::Parse,
            EvalError::Metric { source, .. } => core_category(source),
            _ => Category::Compute,
        };
        Self::new(category, err.to_string())
    }
}
