use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use ksubs_core::{ProviderBundle, ProviderError, Scalar, StateCodec, SubgoalProposal};

use super::protocol::{encode, Request, Response, PROTOCOL_VERSION};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Where the model server lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transport {
    /// Spawn `program args…` and talk over its standard streams.
    Child { program: String, args: Vec<String> },
    Tcp { addr: String },
}

impl Transport {
    /// `tcp:HOST:PORT` or `cmd:PROGRAM ARG…`.
    pub fn parse(spec: &str) -> Result<Self, String> {
        if let Some(addr) = spec.strip_prefix("tcp:") {
            return Ok(Transport::Tcp { addr: addr.to_string() });
        }
        if let Some(cmd) = spec.strip_prefix("cmd:") {
            let mut parts = cmd.split_whitespace().map(String::from);
            let program = parts.next().ok_or("empty command")?;
            return Ok(Transport::Child {
                program,
                args: parts.collect(),
            });
        }
        Err(format!("endpoint {spec:?} must start with tcp: or cmd:"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub transport: Transport,
    pub env: String,
    pub timeout: Duration,
    pub version: u32,
}

impl Endpoint {
    pub fn new(transport: Transport, env: &str) -> Self {
        Self {
            transport,
            env: env.to_string(),
            timeout: DEFAULT_TIMEOUT,
            version: PROTOCOL_VERSION,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

/// One connection, one request in flight.
pub struct BridgeClient {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
    timeout: Duration,
    next_id: u64,
}

impl std::fmt::Debug for BridgeClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BridgeClient")
            .field("next_id", &self.next_id)
            .field("timeout", &self.timeout)
            .finish_non_exhaustive()
    }
}

fn spawn_reader<R: std::io::Read + Send + 'static>(reader: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(reader).lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

fn transport_err(e: impl std::fmt::Display) -> ProviderError {
    ProviderError::Transport(e.to_string())
}

impl BridgeClient {
    /// Opens the transport and completes the handshake.
    pub fn connect(endpoint: &Endpoint) -> Result<Self, ProviderError> {
        let mut client = match &endpoint.transport {
            Transport::Tcp { addr } => {
                let stream = TcpStream::connect(addr).map_err(transport_err)?;
                let _ = stream.set_nodelay(true);
                let read = stream.try_clone().map_err(transport_err)?;
                Self::from_parts(Box::new(stream), spawn_reader(read), None, endpoint.timeout)
            }
            Transport::Child { program, args } => {
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()
                    .map_err(transport_err)?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Self::from_parts(Box::new(stdin), spawn_reader(stdout), Some(child), endpoint.timeout)
            }
        };
        client.handshake(endpoint.version, &endpoint.env)?;
        Ok(client)
    }

    /// Wraps an already-open byte stream pair; no handshake is sent.
    pub fn from_streams<R, W>(reader: R, writer: W, timeout: Duration) -> Self
    where
        R: std::io::Read + Send + 'static,
        W: Write + Send + 'static,
    {
        Self::from_parts(Box::new(writer), spawn_reader(reader), None, timeout)
    }

    fn from_parts(
        writer: Box<dyn Write + Send>,
        lines: Receiver<std::io::Result<String>>,
        child: Option<Child>,
        timeout: Duration,
    ) -> Self {
        Self {
            writer,
            lines,
            child,
            timeout,
            next_id: 1,
        }
    }

    fn send(&mut self, req: &Request) -> Result<(), ProviderError> {
        self.writer
            .write_all(encode(req).as_bytes())
            .and_then(|_| self.writer.flush())
            .map_err(transport_err)
    }

    fn recv(&mut self) -> Result<Response, ProviderError> {
        let line = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(transport_err(e)),
            Err(RecvTimeoutError::Timeout) => return Err(ProviderError::Timeout),
            Err(RecvTimeoutError::Disconnected) => return Err(transport_err("server closed the connection")),
        };
        serde_json::from_str(&line).map_err(|e| ProviderError::Malformed(format!("{e}: {line}")))
    }

    pub fn handshake(&mut self, version: u32, env: &str) -> Result<(), ProviderError> {
        self.send(&Request::Hello {
            version,
            env: env.to_string(),
        })?;
        match self.recv()? {
            Response::HelloOk { version: v } if v == version => Ok(()),
            Response::HelloOk { version: v } => Err(ProviderError::VersionMismatch {
                expected: version,
                got: v,
            }),
            Response::Error {
                version: Some(v), ..
            } => Err(ProviderError::VersionMismatch {
                expected: version,
                got: v,
            }),
            Response::Error { message, .. } => Err(ProviderError::Server(message)),
            other => Err(ProviderError::Malformed(format!("unexpected handshake reply {other:?}"))),
        }
    }

    /// Sends one request and waits for the reply with the same id, skipping
    /// late replies to earlier timed-out requests.
    fn call(&mut self, make: impl FnOnce(u64) -> Request) -> Result<Response, ProviderError> {
        let id = self.next_id;
        self.next_id += 1;
        self.send(&make(id))?;
        loop {
            let resp = self.recv()?;
            match resp.id() {
                Some(got) if got < id => continue,
                Some(got) if got == id => {
                    if let Response::Error { message, .. } = resp {
                        return Err(ProviderError::Server(message));
                    }
                    return Ok(resp);
                }
                None => {
                    if let Response::Error { message, .. } = resp {
                        return Err(ProviderError::Server(message));
                    }
                    return Err(ProviderError::Malformed(format!("reply without id: {resp:?}")));
                }
                Some(got) => return Err(ProviderError::Malformed(format!("reply id {got}, expected {id}"))),
            }
        }
    }

    pub fn subgoals(&mut self, state: &str, k: usize, max_candidates: usize) -> Result<Vec<(String, f64)>, ProviderError> {
        let resp = self.call(|id| Request::Subgoals {
            id,
            state: state.to_string(),
            k,
            max_candidates,
        })?;
        match resp {
            Response::SubgoalsOk { candidates, .. } => {
                validate_candidates(&candidates, max_candidates)?;
                Ok(candidates.into_iter().map(|c| (c.state, c.prob)).collect())
            }
            other => Err(ProviderError::Malformed(format!("expected subgoals_ok, got {other:?}"))),
        }
    }

    pub fn value(&mut self, state: &str) -> Result<f64, ProviderError> {
        match self.call(|id| Request::Value {
            id,
            state: state.to_string(),
        })? {
            Response::ValueOk { value, .. } if value.is_finite() => Ok(value),
            Response::ValueOk { value, .. } => Err(ProviderError::Validation(format!("non-finite value {value}"))),
            other => Err(ProviderError::Malformed(format!("expected value_ok, got {other:?}"))),
        }
    }

    pub fn policy(&mut self, state: &str, subgoal: &str) -> Result<String, ProviderError> {
        match self.call(|id| Request::Policy {
            id,
            state: state.to_string(),
            subgoal: subgoal.to_string(),
        })? {
            Response::PolicyOk { action, .. } => Ok(action),
            other => Err(ProviderError::Malformed(format!("expected policy_ok, got {other:?}"))),
        }
    }
}

impl Drop for BridgeClient {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Length, probability bounds and descending order of a candidate list.
pub fn validate_candidates(candidates: &[super::protocol::Candidate], max: usize) -> Result<(), ProviderError> {
    if candidates.len() > max {
        return Err(ProviderError::Validation(format!(
            "{} candidates, at most {max} requested",
            candidates.len()
        )));
    }
    for c in candidates {
        if !c.prob.is_finite() || !(0.0..=1.0).contains(&c.prob) {
            return Err(ProviderError::Validation(format!("probability {} outside [0, 1]", c.prob)));
        }
    }
    if candidates.windows(2).any(|w| w[0].prob < w[1].prob) {
        return Err(ProviderError::Validation("candidates not sorted by probability".into()));
    }
    Ok(())
}

/// Provider bundle over a bridge connection; states travel in the env's text encoding.
#[derive(Debug)]
pub struct BridgeBundle {
    pub client: BridgeClient,
}

impl BridgeBundle {
    pub fn new(client: BridgeClient) -> Self {
        Self { client }
    }
}

impl<E: StateCodec, F: Scalar> ProviderBundle<E, F> for BridgeBundle {
    fn subgoals(
        &mut self,
        env: &E,
        state: &E::State,
        k: usize,
        max_candidates: usize,
    ) -> Result<Vec<SubgoalProposal<E::State, F>>, ProviderError> {
        let list = self.client.subgoals(&env.encode_state(state), k, max_candidates)?;
        crate::tabular::decode_proposals::<E, F>(env, &list)
    }

    fn value(&mut self, env: &E, state: &E::State) -> Result<F, ProviderError> {
        self.client.value(&env.encode_state(state)).map(F::lit)
    }

    fn policy(&mut self, env: &E, state: &E::State, subgoal: &E::State) -> Result<E::Action, ProviderError> {
        let token = self.client.policy(&env.encode_state(state), &env.encode_state(subgoal))?;
        env.decode_action(&token).map_err(ProviderError::Validation)
    }
}
