use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pbm::run(std::env::args_os()))
}
