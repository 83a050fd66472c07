fn main() -> std::process::ExitCode {
    lumbarfat::api::cli::main()
}
