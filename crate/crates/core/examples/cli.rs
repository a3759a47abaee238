//! The `tpp` command line driven in-process.

pub fn main() {
    for args in [
        vec!["tpp", "tableb1", "--b", "0.05", "--c", "0.5"],
        vec!["tpp", "crossing", "--b", "0.05", "--tol", "1e-5"],
        vec![
            "tpp",
            "payoff",
            "--treatment",
            "PI0",
            "--t",
            "10",
            "--p",
            "18",
            "--z",
            "14",
            "--outcome",
            "win",
        ],
        vec!["tpp", "props", "--draws", "200", "--seed", "1"],
    ] {
        println!("$ {}", args.join(" "));
        let code = tpp_core::cli::run_command(args);
        println!("(exit {code})");
    }
}
