//! Config-driven experiment runner: TOML experiment files in, CSV/JSON
//! reports and plot data out.

pub mod config;
pub mod runner;

pub use config::{load_config, parse_config, ConfigErrors, Experiment};
pub use runner::{emit_plot_data, read_report, run, ReportDocument, RunOptions};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const RUNTIME_ERROR: i32 = 3;
}

/// Human-readable list of map primitives, forms and task kinds.
pub fn catalog() -> String {
    let sections: [(&str, &[&str]); 4] = [
        (
            "map primitives ([[map]] kind = ...)",
            &[
                "canonical_lift  matrix = [row-major integers], unimodular n x n",
                "shear_a         inverted = false (n = 2)",
                "shear_b         inverted = false (n = 2)",
                "reeb            t = <real>",
                "flow            hamiltonian = {...}, t = <real>, steps = <per unit time, optional>",
            ],
        ),
        (
            "flow hamiltonians (hamiltonian.kind = ...)",
            &[
                "metric          g = [row-major SPD]",
                "conformal       amp, q_freq = [ints], phase",
                "translation     w = [reals]",
                "twist           amp, i, j",
            ],
        ),
        (
            "contact forms ([form] kind = ...)",
            &[
                "round",
                "constant        value",
                "cosine          offset, terms = [{amp, q_freq}]",
                "trigonometric   offset, waves = [{amp, q_freq, dir?, phase}]",
                "metric          g = [row-major SPD]",
            ],
        ),
        (
            "tasks ([[task]] kind = ...)",
            &[
                "r_sequence      dissipation sequence, chi estimates, verdict",
                "lyapunov        Lyapunov exponent from chart Jacobians",
                "verify_bound    spectral lower bound check (exit 1 on failure)",
                "homology        I_f, periodicity, A_I block (n = 2)",
                "shape           flat shape of the form",
                "displacement    matrix?, domain = form | ball",
                "growth          matrix?, classes?  or  images, word (free group)",
                "duality         metric?, classes? (exit 1 on failure)",
            ],
        ),
    ];
    let mut out = String::new();
    for (title, lines) in sections {
        out.push_str(title);
        out.push('\n');
        for l in lines {
            out.push_str("  ");
            out.push_str(l);
            out.push('\n');
        }
    }
    out
}
