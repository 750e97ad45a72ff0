use std::io::{stderr, stdout, Write};

fn main() {
    let mut out = stdout().lock();
    let code = scpqca::cli::run(std::env::args_os(), &mut out, &mut stderr());
    let _ = out.flush();
    std::process::exit(code);
}
