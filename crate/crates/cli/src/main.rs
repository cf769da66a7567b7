fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // An empty config variable means "use the defaults".
    if std::env::var_os(bpae_cli::CONFIG_ENV).is_some_and(|v| v.is_empty()) {
        std::env::remove_var(bpae_cli::CONFIG_ENV);
    }
    std::process::exit(bpae_cli::main_with(std::env::args_os().collect()));
}
