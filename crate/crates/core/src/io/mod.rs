//! File formats: plain-text stack files, the shared binary grid format, and
//! CSV tables.

mod grid;
mod stack;
mod table;

pub use grid::{read_grid, write_grid, write_grid_csv, GridData, GridKind};
pub use stack::{read_stack_file, read_stack_str, write_stack_file, write_stack_string, StackFile};
pub use table::{read_two_column_csv, write_csv};
