fn main() -> std::process::ExitCode {
    blockspin::cli::main()
}
