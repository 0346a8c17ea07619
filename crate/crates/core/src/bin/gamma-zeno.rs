use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::init();
    let code = gamma_zeno::cli::run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    ExitCode::from(code as u8)
}
