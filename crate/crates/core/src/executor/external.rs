use std::fs;
use std::io::Read;
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::ExecError;

/// Bytes of stdout and stderr kept per stream.
pub const CAPTURE_LIMIT: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalInvocation {
    pub argv: Vec<String>,
    /// `None` when the process was ended by a signal.
    pub exit_code: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub wall_time: f64,
}

fn capture(mut stream: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut buf = [0u8; 8192];
        // keep draining past the limit so the child never blocks on a full pipe
        while let Ok(n) = stream.read(&mut buf) {
            if n == 0 {
                break;
            }
            let room = CAPTURE_LIMIT.saturating_sub(kept.len());
            kept.extend_from_slice(&buf[..n.min(room)]);
        }
        String::from_utf8_lossy(&kept).into_owned()
    })
}

/// Engines may fork helpers that inherit our pipes, so the whole process
/// group goes down, not just the direct child.
fn kill_tree(child: &mut Child) {
    #[cfg(unix)]
    unsafe {
        // the child leads its own group (process_group(0) at spawn)
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

/// Runs `argv` directly (no shell), waits up to `timeout`, and records the
/// invocation in `log_path`.
pub fn run_external(
    argv: &[String],
    timeout: Option<Duration>,
    log_path: &Path,
) -> Result<ExternalInvocation, ExecError> {
    let (program, args) = argv.split_first().ok_or(ExecError::EmptyTemplate)?;
    let started = Instant::now();
    let mut command = Command::new(program);
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut command, 0);
    let mut child = command
        .args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| ExecError::SpawnFailure {
            program: program.clone(),
            reason: e.to_string(),
        })?;
    let out = capture(child.stdout.take().expect("stdout piped"));
    let err = capture(child.stderr.take().expect("stderr piped"));

    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if timeout.is_some_and(|t| started.elapsed() >= t) {
            timed_out = true;
            kill_tree(&mut child);
            break child.wait()?;
        }
        thread::sleep(Duration::from_millis(5));
    };
    let invocation = ExternalInvocation {
        argv: argv.to_vec(),
        exit_code: status.code(),
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
        wall_time: started.elapsed().as_secs_f64(),
    };
    let log = format!(
        "engine external\nargv {:?}\nexit_code {:?}\ntimed_out {timed_out}\nwall_time {:.6}\n--- stdout\n{}\n--- stderr\n{}\n",
        invocation.argv, invocation.exit_code, invocation.wall_time, invocation.stdout, invocation.stderr
    );
    fs::write(log_path, log)?;
    if timed_out {
        return Err(ExecError::Timeout(timeout.unwrap_or_default()));
    }
    Ok(invocation)
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    #[test]
    fn output_is_truncated() {
        let tmp = tempfile::tempdir().unwrap();
        let argv: Vec<String> = ["sh", "-c", "head -c 200000 /dev/zero | tr '\\0' x"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let inv = run_external(&argv, None, &tmp.path().join("log")).unwrap();
        assert_eq!(inv.exit_code, Some(0));
        assert_eq!(inv.stdout.len(), CAPTURE_LIMIT);
    }

    #[test]
    fn arguments_are_not_shell_split() {
        let tmp = tempfile::tempdir().unwrap();
        let argv = vec!["printf".to_string(), "%s|".to_string(), "a b; echo c".to_string()];
        let inv = run_external(&argv, None, &tmp.path().join("log")).unwrap();
        assert_eq!(inv.stdout, "a b; echo c|");
    }
}
