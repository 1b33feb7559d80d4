fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_target(false)
        .format_timestamp(None)
        .init();
    std::process::exit(gaborlab_cli::run(std::env::args_os()));
}
