fn main() -> std::process::ExitCode {
    rayfuse::cli::main()
}
