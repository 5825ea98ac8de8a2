use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "symflow", version, about = "Entropy, spectra, witnesses and horseshoes for subshifts of finite type")]
pub struct Cli {
    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Topological entropy of an SFT.
    Entropy {
        #[arg(long)]
        sft: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Pressure P(βg) with equilibrium mean and entropy, as CSV.
    Pressure {
        #[arg(long)]
        sft: PathBuf,
        #[arg(long)]
        g: PathBuf,
        /// Comma-separated β values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Vec<f64>,
        /// `lo,hi,count` grid of β values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Conditional entropy (or pressure, with --u) spectrum, as CSV.
    Spectrum {
        #[arg(long)]
        sft: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Two-observable spectrum at target pairs, as CSV.
    Spectrum2d {
        #[arg(long)]
        sft: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: PathBuf,
        /// Target pair `a1,a2`; repeat for several targets.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Support-function approximation of the rotation set, as JSON.
    RotationSet {
        #[arg(long)]
        sft: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: PathBuf,
        #[arg(long, default_value_t = 64)]
        directions: usize,
    },
    /// Topological entropy of a suspension flow.
    FlowEntropy {
        #[arg(long)]
        suspension: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Flow conditional spectrum, as CSV.
    FlowSpectrum {
        #[arg(long)]
        suspension: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Build a multi-horseshoe pack with its certificate.
    Horseshoe {
        #[arg(long)]
        sft: PathBuf,
        /// Comma-separated measure files.
        #[arg(long, value_delimiter = ',', required = true)]
        measure: Vec<PathBuf>,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        zeta: f64,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Recertify a pack, optionally lifted to a suspension flow.
    Certify {
        #[arg(long)]
        pack: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        suspension: Option<PathBuf>,
    },
    /// Construct an ergodic witness from a request file.
    Witness {
        #[arg(long)]
        request: PathBuf,
    },
    /// Re-verify a witness (or any measure with an embedded SFT).
    Verify {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Check the constraints of a Lorenz return-map model.
    LorenzValidate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Iterate a Lorenz return map; trajectory as CSV.
    LorenzSimulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long)]
        n: usize,
        /// Also write orbit statistics as JSON here.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Run a job described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}
