//! Declarative experiments: configuration, runner and result files.

mod battery;
mod config;
mod results;
mod run;

pub use battery::{decomp_battery, BatteryCase, PairClass};
pub use config::{
    BlockingSection, CapSection, D0Section, ExperimentConfig, Format, IntersectSection, Kind,
    PairSection, VolumeSection, WosSection,
};
pub use results::{
    encode, parse_csv, parse_json, read_results, write_atomic, write_results, ResultRow,
    CSV_HEADER, INVALID_MARK,
};
pub use run::{run_experiment, RowTiming, RunMeta, RunOutput};
