//! External OCR engine run as a child process.
//!
//! The query image is written as a PNG to a temporary directory and the
//! engine is invoked as `<command...> <path>`. Its standard output must follow
//! the tab-separated box protocol of [`plateloc_core::ocr`].

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use plateloc_core::ocr::parse_engine_output;
use plateloc_core::{EngineFailure, GrayImage, OcrBox, OcrEngine};

use crate::io::save_png;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessEngine {
    program: String,
    args: Vec<String>,
    timeout: Duration,
}

impl ProcessEngine {
    /// `command` is split on whitespace; the first word is the program.
    pub fn new(command: &str) -> Option<Self> {
        let mut words = command.split_whitespace().map(str::to_string);
        let program = words.next()?;
        Some(Self {
            program,
            args: words.collect(),
            timeout: DEFAULT_TIMEOUT,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Runs the engine on an image file that already exists.
    pub fn run_on_file(&self, path: &Path) -> Result<Vec<OcrBox>, EngineFailure> {
        let io = |e: std::io::Error| EngineFailure::Io(format!("{}: {e}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(path)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(io)?;
        // drain both pipes so a chatty engine never blocks on a full buffer
        let stdout = drain(child.stdout.take().expect("piped stdout"));
        let stderr = drain(child.stderr.take().expect("piped stderr"));

        let deadline = Instant::now() + self.timeout;
        let status = loop {
            if let Some(status) = child.try_wait().map_err(io)? {
                break status;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Err(EngineFailure::Timeout {
                    seconds: self.timeout.as_secs_f64(),
                });
            }
            thread::sleep(Duration::from_millis(5));
        };
        let out = stdout.join().expect("reader thread").map_err(io)?;
        let err = stderr.join().expect("reader thread").map_err(io)?;
        if !status.success() {
            return Err(EngineFailure::NonZeroExit {
                code: status.code(),
                stderr: String::from_utf8_lossy(&err).trim().to_string(),
            });
        }
        let text = String::from_utf8(out).map_err(|_| EngineFailure::Protocol {
            line: 0,
            reason: "output is not UTF-8".into(),
        })?;
        parse_engine_output(&text)
    }
}

fn drain(mut pipe: impl Read + Send + 'static) -> thread::JoinHandle<std::io::Result<Vec<u8>>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        pipe.read_to_end(&mut buf).map(|_| buf)
    })
}

impl OcrEngine for ProcessEngine {
    fn recognize(&self, img: &GrayImage) -> Result<Vec<OcrBox>, EngineFailure> {
        let dir = tempfile::tempdir().map_err(|e| EngineFailure::Io(e.to_string()))?;
        let path = dir.path().join("query.png");
        save_png(img, &path).map_err(|e| EngineFailure::Io(e.to_string()))?;
        self.run_on_file(&path)
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh(script: &str) -> ProcessEngine {
        ProcessEngine {
            program: "sh".into(),
            args: vec!["-c".into(), script.into(), "engine".into()],
            timeout: DEFAULT_TIMEOUT,
        }
    }

    fn img() -> GrayImage {
        GrayImage::filled(8, 8, 255)
    }

    #[test]
    fn command_is_split_on_whitespace() {
        let e = ProcessEngine::new("  tess  --psm 7 ").unwrap();
        assert_eq!(e.program, "tess");
        assert_eq!(e.args, ["--psm", "7"]);
        assert!(ProcessEngine::new("   ").is_none());
    }

    #[test]
    fn parses_protocol_and_sees_the_png() {
        let e = sh(r#"test -s "$1" && printf '4010\t1\t2\t3\t4\t0.9\n'"#);
        let boxes = e.recognize(&img()).unwrap();
        assert_eq!(boxes.len(), 1);
        assert_eq!(boxes[0].text, "4010");
        assert_eq!(boxes[0].confidence, 0.9);
    }

    #[test]
    fn nonzero_exit_is_a_failure() {
        let e = sh("echo broken >&2; exit 3");
        match e.recognize(&img()) {
            Err(EngineFailure::NonZeroExit { code, stderr }) => {
                assert_eq!(code, Some(3));
                assert_eq!(stderr, "broken");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_output_is_a_protocol_failure() {
        let e = sh("echo '4010 1 2 3'");
        assert!(matches!(e.recognize(&img()), Err(EngineFailure::Protocol { .. })));
    }

    #[test]
    fn slow_engine_times_out() {
        let e = sh("sleep 5").with_timeout(Duration::from_millis(200));
        let t = Instant::now();
        assert!(matches!(e.recognize(&img()), Err(EngineFailure::Timeout { .. })));
        assert!(t.elapsed() < Duration::from_secs(3));
    }

    #[test]
    fn missing_program_is_io() {
        let e = ProcessEngine::new("/nonexistent/engine").unwrap();
        assert!(matches!(e.recognize(&img()), Err(EngineFailure::Io(_))));
    }
}
