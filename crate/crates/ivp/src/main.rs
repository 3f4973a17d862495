fn main() {
    // Answer enumeration can be infinite, so piping into `head` or `less` is
    // normal usage; die on SIGPIPE like any other filter instead of panicking
    // when the reader goes away.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(ivp::cli::run());
}
