fn main() -> std::process::ExitCode {
    renewcast::cli::main()
}
