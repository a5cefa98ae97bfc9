fn main() -> std::process::ExitCode {
    risblock::cli::run(std::env::args_os())
}
