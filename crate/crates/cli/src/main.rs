use std::process::ExitCode;
use std::sync::atomic::Ordering;

fn main() -> ExitCode {
    let flag = gardner_cli::interrupt_flag();
    // a second Ctrl-C kills the process outright
    let _ = ctrlc::set_handler(move || {
        if flag.swap(true, Ordering::SeqCst) {
            std::process::exit(130);
        }
        eprintln!("interrupt: finishing running trials, then writing partial results");
    });
    ExitCode::from(gardner_cli::run_from_args(std::env::args_os()))
}
