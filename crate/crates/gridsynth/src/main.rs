fn main() -> std::process::ExitCode {
    gridsynth::cli::run(std::env::args_os())
}
