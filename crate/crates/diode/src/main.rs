use std::io;
use std::path::PathBuf;

use diode::cli::{run, OUTPUT_DIR_VAR};

fn main() {
    let dir = std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from);
    let code = run(
        std::env::args_os(),
        dir.as_deref(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
