pub mod ablate;
pub mod evaluate;
pub mod generate;
pub mod oracle;
pub mod solve;

use std::path::Path;

use sgs_core::evolve::AblationSwitch;
use sgs_core::GameInstance;

/// Command failures split by exit code: usage problems exit 2, everything
/// else exits 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(error: E) -> Self {
        CliError::Runtime(error.into())
    }
}

pub type CmdResult = Result<std::process::ExitCode, CliError>;

pub fn load_game(path: &Path) -> Result<GameInstance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("reading {}: {e}", path.display())))?;
    GameInstance::from_json(&text)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("{}: {e}", path.display())))
}

/// Parses a comma-separated ablation list; unknown names are usage errors.
pub fn parse_ablation(list: &str) -> Result<Vec<AblationSwitch>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| {
            AblationSwitch::from_name(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown ablation switch '{name}'; valid switches: {}",
                    AblationSwitch::ALL
                        .iter()
                        .map(|s| s.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
        })
        .collect()
}

/// Builds a rayon pool with the requested worker count (0 = automatic).
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("thread pool: {e}")))
}

/// Peak resident set size of this process in bytes: `VmHWM` from procfs
/// where available, otherwise `getrusage`; 0 when neither works.
pub fn peak_memory_bytes() -> u64 {
    if let Ok(status) = std::fs::read_to_string("/proc/self/status") {
        for line in status.lines() {
            if let Some(rest) = line.strip_prefix("VmHWM:") {
                if let Ok(kb) = rest.trim().trim_end_matches("kB").trim().parse::<u64>() {
                    return kb * 1024;
                }
            }
        }
    }
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::uninit();
    // ru_maxrss is reported in kilobytes on Linux.
    if unsafe { libc::getrusage(libc::RUSAGE_SELF, usage.as_mut_ptr()) } == 0 {
        let usage = unsafe { usage.assume_init() };
        return (usage.ru_maxrss as u64) * 1024;
    }
    0
}
