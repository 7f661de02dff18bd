//! Line protocol: one input per line on the child's stdin, exactly one output
//! per line back on stdout, both UTF-8 with LF endings. Embedded newlines
//! travel as the two characters `\n`.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::Simplifier;
use crate::error::{Error, Result};

const STDERR_TAIL_BYTES: usize = 2048;

pub fn escape_line(s: &str) -> String {
    s.replace("\r\n", "\n").replace('\n', "\\n")
}

pub fn unescape_line(s: &str) -> String {
    s.replace("\\n", "\n")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubprocessSimplifier {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    pub batch_size: usize,
}

fn tail(bytes: &[u8]) -> String {
    let start = bytes.len().saturating_sub(STDERR_TAIL_BYTES);
    String::from_utf8_lossy(&bytes[start..]).trim().to_string()
}

impl SubprocessSimplifier {
    fn run_batch(&self, batch: usize, inputs: &[String]) -> Result<Vec<String>> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Transport {
                status: None,
                message: format!("failed to start {:?}: {e}", self.program),
            })?;

        let mut payload = String::new();
        for input in inputs {
            payload.push_str(&escape_line(input));
            payload.push('\n');
        }
        let mut stdin = child.stdin.take().expect("piped stdin");
        let writer = thread::spawn(move || {
            // A child that exits early closes the pipe; its exit status tells the story.
            let _ = stdin.write_all(payload.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut buf = Vec::new();
            stdout.read_to_end(&mut buf).map(|_| buf)
        });
        let mut stderr = child.stderr.take().expect("piped stderr");
        let err_reader = thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr.read_to_end(&mut buf);
            buf
        });

        let deadline = Instant::now() + self.timeout;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(Error::Timeout {
                        batch,
                        seconds: self.timeout.as_secs_f64(),
                    });
                }
                Ok(None) => thread::sleep(Duration::from_millis(2)),
                Err(e) => {
                    return Err(Error::Transport {
                        status: None,
                        message: format!("waiting for child: {e}"),
                    })
                }
            }
        };
        let _ = writer.join();
        let out = reader
            .join()
            .expect("stdout reader panicked")
            .map_err(|e| Error::Protocol(format!("reading child stdout: {e}")))?;
        let err = err_reader.join().expect("stderr reader panicked");
        if !status.success() {
            return Err(Error::ProcessExit {
                status: status.to_string(),
                stderr_tail: tail(&err),
            });
        }
        let text = String::from_utf8(out)
            .map_err(|e| Error::Protocol(format!("child output is not UTF-8: {e}")))?;
        let lines: Vec<String> = text
            .split_terminator('\n')
            .map(|l| unescape_line(l.strip_suffix('\r').unwrap_or(l)))
            .collect();
        if lines.len() != inputs.len() {
            return Err(Error::Protocol(format!(
                "batch {batch}: expected {}, got {} lines",
                inputs.len(),
                lines.len()
            )));
        }
        Ok(lines)
    }
}

impl Simplifier for SubprocessSimplifier {
    fn simplify_batch(&self, inputs: &[String]) -> Result<Vec<String>> {
        let mut out = Vec::with_capacity(inputs.len());
        for (i, chunk) in inputs.chunks(self.batch_size.max(1)).enumerate() {
            out.extend(self.run_batch(i, chunk)?);
        }
        Ok(out)
    }
}
