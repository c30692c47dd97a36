use std::io::Write;

fn main() {
    let (code, text) = sparse_diffres_cli::run_args(std::env::args_os());
    if code == 1 {
        let _ = std::io::stderr().write_all(text.as_bytes());
    } else {
        let _ = std::io::stdout().write_all(text.as_bytes());
    }
    std::process::exit(code);
}
