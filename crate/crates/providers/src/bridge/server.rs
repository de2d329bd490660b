//! Reference model server speaking the bridge protocol.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener};
use std::thread::{self, JoinHandle};

use super::protocol::{encode, Candidate, Request, Response, PROTOCOL_VERSION};
use crate::tabular::TabularModel;

/// String-level model behind a server connection.
pub trait ServeModel {
    fn subgoals(&mut self, state: &str, k: usize, max_candidates: usize) -> Result<Vec<(String, f64)>, String>;
    fn value(&mut self, state: &str) -> Result<f64, String>;
    fn policy(&mut self, state: &str, subgoal: &str) -> Result<String, String>;
}

impl ServeModel for TabularModel {
    fn subgoals(&mut self, state: &str, _k: usize, max_candidates: usize) -> Result<Vec<(String, f64)>, String> {
        Ok(TabularModel::subgoals(self, state, max_candidates))
    }

    fn value(&mut self, state: &str) -> Result<f64, String> {
        Ok(TabularModel::value(self, state))
    }

    fn policy(&mut self, state: &str, subgoal: &str) -> Result<String, String> {
        TabularModel::policy(self, state, subgoal)
            .map(str::to_string)
            .ok_or_else(|| "no action recorded for this pair".to_string())
    }
}

impl<M: ServeModel + ?Sized> ServeModel for &mut M {
    fn subgoals(&mut self, state: &str, k: usize, max_candidates: usize) -> Result<Vec<(String, f64)>, String> {
        (**self).subgoals(state, k, max_candidates)
    }

    fn value(&mut self, state: &str) -> Result<f64, String> {
        (**self).value(state)
    }

    fn policy(&mut self, state: &str, subgoal: &str) -> Result<String, String> {
        (**self).policy(state, subgoal)
    }
}

/// Proposes the queried state itself with probability 1; value 0; no policy.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoModel;

impl ServeModel for EchoModel {
    fn subgoals(&mut self, state: &str, _k: usize, _max: usize) -> Result<Vec<(String, f64)>, String> {
        Ok(vec![(state.to_string(), 1.0)])
    }

    fn value(&mut self, _state: &str) -> Result<f64, String> {
        Ok(0.0)
    }

    fn policy(&mut self, _state: &str, _subgoal: &str) -> Result<String, String> {
        Err("echo server has no policy".into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerOptions {
    pub env: String,
    pub version: u32,
}

impl ServerOptions {
    pub fn new(env: &str) -> Self {
        Self {
            env: env.to_string(),
            version: PROTOCOL_VERSION,
        }
    }
}

fn answer<M: ServeModel>(model: &mut M, req: Request) -> Response {
    let fail = |id, message| Response::Error {
        id: Some(id),
        message,
        version: None,
    };
    match req {
        Request::Hello { .. } => Response::Error {
            id: None,
            message: "duplicate hello".into(),
            version: None,
        },
        Request::Subgoals {
            id,
            state,
            k,
            max_candidates,
        } => match model.subgoals(&state, k, max_candidates) {
            Ok(list) => Response::SubgoalsOk {
                id,
                candidates: list
                    .into_iter()
                    .take(max_candidates)
                    .map(|(state, prob)| Candidate { state, prob })
                    .collect(),
            },
            Err(e) => fail(id, e),
        },
        Request::Value { id, state } => match model.value(&state) {
            Ok(value) => Response::ValueOk { id, value },
            Err(e) => fail(id, e),
        },
        Request::Policy { id, state, subgoal } => match model.policy(&state, &subgoal) {
            Ok(action) => Response::PolicyOk { id, action },
            Err(e) => fail(id, e),
        },
    }
}

/// Serves one connection until the peer hangs up. The first message must be a
/// matching `hello`; otherwise an error is sent and the connection closed.
pub fn serve_connection<M, R, W>(model: &mut M, opts: &ServerOptions, reader: R, mut writer: W) -> std::io::Result<()>
where
    M: ServeModel,
    R: BufRead,
    W: Write,
{
    let mut greeted = false;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<Request>(&line) {
            Err(e) => Response::Error {
                id: None,
                message: format!("malformed request: {e}"),
                version: None,
            },
            Ok(Request::Hello { version, env }) if !greeted => {
                if version != opts.version {
                    let msg = Response::Error {
                        id: None,
                        message: format!("protocol version {version} not supported"),
                        version: Some(opts.version),
                    };
                    writer.write_all(encode(&msg).as_bytes())?;
                    return writer.flush();
                }
                if env != opts.env {
                    let msg = Response::Error {
                        id: None,
                        message: format!("server hosts {:?}, not {env:?}", opts.env),
                        version: None,
                    };
                    writer.write_all(encode(&msg).as_bytes())?;
                    return writer.flush();
                }
                greeted = true;
                Response::HelloOk { version: opts.version }
            }
            Ok(_) if !greeted => Response::Error {
                id: None,
                message: "handshake required".into(),
                version: None,
            },
            Ok(req) => answer(model, req),
        };
        writer.write_all(encode(&resp).as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}

/// Serves stdin/stdout.
pub fn serve_stdio<M: ServeModel>(model: &mut M, opts: &ServerOptions) -> std::io::Result<()> {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    serve_connection(model, opts, stdin.lock(), stdout.lock())
}

/// Accepts TCP connections on a background thread, one thread per connection,
/// each with its own model from `make`.
pub fn spawn_tcp<M, G>(bind: &str, opts: ServerOptions, make: G) -> std::io::Result<(SocketAddr, JoinHandle<()>)>
where
    M: ServeModel + Send + 'static,
    G: Fn() -> M + Send + 'static,
{
    let listener = TcpListener::bind(bind)?;
    let addr = listener.local_addr()?;
    let handle = thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let mut model = make();
            let opts = opts.clone();
            thread::spawn(move || {
                let Ok(read) = stream.try_clone() else { return };
                let _ = serve_connection(&mut model, &opts, BufReader::new(read), stream);
            });
        }
    });
    Ok((addr, handle))
}
