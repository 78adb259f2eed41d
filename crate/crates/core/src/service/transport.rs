use std::io::{BufRead, BufReader, Write};
use std::os::unix::net::UnixListener;
use std::sync::Arc;
use std::thread;

use super::SessionStore;
use crate::error::Result;

/// Strict request/response over any line stream, until end of input.
pub fn serve_lines<R: BufRead, W: Write>(store: &SessionStore, input: R, mut output: W) -> Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = store.handle_message(&line);
        writeln!(output, "{response}")?;
        output.flush()?;
    }
    Ok(())
}

/// Accepts connections forever, one thread per connection. Connections share
/// the store; per-session locks keep each session's requests in order.
pub fn serve_unix(store: Arc<SessionStore>, listener: UnixListener) -> Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let store = Arc::clone(&store);
        thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(s) => BufReader::new(s),
                Err(e) => {
                    log::warn!("could not clone connection: {e}");
                    return;
                }
            };
            if let Err(e) = serve_lines(&store, reader, stream) {
                log::warn!("connection closed with error: {e}");
            }
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;
    use std::os::unix::net::UnixStream;

    #[test]
    fn stdio_style_loop() {
        let store = SessionStore::new();
        let input = "{\"v\":1,\"op\":\"state\",\"session\":\"x\"}\n\n{\"v\":2,\"op\":\"state\"}\n";
        let mut out = Vec::new();
        serve_lines(&store, Cursor::new(input), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("no_session"));
    }

    #[test]
    fn unix_socket_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("svc.sock");
        let listener = UnixListener::bind(&path).unwrap();
        let store = Arc::new(SessionStore::new());
        thread::spawn(move || serve_unix(store, listener));
        let mut conn = UnixStream::connect(&path).unwrap();
        writeln!(conn, "{{\"v\":1,\"op\":\"close\",\"session\":\"s9\",\"id\":\"a\"}}").unwrap();
        let mut line = String::new();
        BufReader::new(conn.try_clone().unwrap()).read_line(&mut line).unwrap();
        assert!(line.contains("no_session") && line.contains("\"id\":\"a\""));
    }
}
