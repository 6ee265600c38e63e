fn main() -> std::process::ExitCode {
    pgg_core::cli::main()
}
