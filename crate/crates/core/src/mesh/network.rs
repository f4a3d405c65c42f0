use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::link::LinkModel;
use super::queue::{EventQueue, SimTime};
use super::{HandshakeConfig, MeshConfig, MeshError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    ValueRequest,
    ValueReply,
    Ack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageEnvelope {
    pub kind: MessageKind,
    pub from: usize,
    pub to: usize,
    pub round: u64,
    /// Set on `ValueReply` only.
    pub payload: Option<f64>,
    pub msg_id: u64,
    pub exchange: usize,
    pub attempt: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HandshakeOutcome {
    Completed(f64),
    Failed,
}

impl HandshakeOutcome {
    pub fn value(self) -> Option<f64> {
        match self {
            HandshakeOutcome::Completed(v) => Some(v),
            HandshakeOutcome::Failed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stage {
    AwaitReply,
    AwaitAck,
}

#[derive(Debug, Clone)]
struct Exchange {
    reader: usize,
    peer: usize,
    round: u64,
    attempt: u32,
    stage: Stage,
    reply: Option<f64>,
    outcome: Option<HandshakeOutcome>,
}

#[derive(Debug, Clone)]
pub(crate) enum Event {
    Deliver(MessageEnvelope),
    Timeout { exchange: usize, attempt: u32, stage: Stage },
    CycleStart(usize),
    Sample,
}

/// What the network hands back to the runner driving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Signal {
    Resolved { exchange: usize },
    CycleStart(usize),
    Sample,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NetworkStats {
    pub sent: u64,
    pub dropped: u64,
    pub completed: u64,
    pub failed: u64,
}

/// Simulated radio network: event queue, links, RNG and in-flight handshakes.
///
/// `values` is what each node answers a `ValueRequest` with.
#[derive(Debug, Clone)]
pub struct Network {
    pub(crate) queue: EventQueue<Event>,
    pub(crate) rng: ChaCha8Rng,
    links: LinkModel,
    handshake: HandshakeConfig,
    pub(crate) values: Vec<f64>,
    exchanges: Vec<Exchange>,
    next_msg_id: u64,
    stats: NetworkStats,
}

impl Network {
    pub fn new(values: Vec<f64>, config: &MeshConfig) -> Result<Self, MeshError> {
        config.links.validate()?;
        config.handshake.validate()?;
        Ok(Self {
            queue: EventQueue::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            links: config.links.clone(),
            handshake: config.handshake,
            values,
            exchanges: Vec::new(),
            next_msg_id: 0,
            stats: NetworkStats::default(),
        })
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    pub fn stats(&self) -> NetworkStats {
        self.stats
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Runs one handshake from `reader` to `peer` to completion on this
    /// network's clock. A node reading itself completes at once.
    pub fn handshake_exchange(&mut self, reader: usize, peer: usize) -> Result<HandshakeOutcome, MeshError> {
        let n = self.values.len();
        for node in [reader, peer] {
            if node >= n {
                return Err(MeshError::UnknownNode { node: node + 1, n });
            }
        }
        if reader == peer {
            return Ok(HandshakeOutcome::Completed(self.values[reader]));
        }
        let id = self.begin_exchange(reader, peer, 0);
        while self.exchanges[id].outcome.is_none() {
            if self.poll().is_none() {
                break;
            }
        }
        Ok(self.exchanges[id].outcome.expect("handshake left unresolved"))
    }

    pub(crate) fn begin_exchange(&mut self, reader: usize, peer: usize, round: u64) -> usize {
        let id = self.exchanges.len();
        self.exchanges.push(Exchange {
            reader,
            peer,
            round,
            attempt: 0,
            stage: Stage::AwaitReply,
            reply: None,
            outcome: None,
        });
        self.start_attempt(id);
        id
    }

    pub(crate) fn outcome(&self, exchange: usize) -> Option<HandshakeOutcome> {
        self.exchanges[exchange].outcome
    }

    pub(crate) fn exchange_reader(&self, exchange: usize) -> usize {
        self.exchanges[exchange].reader
    }

    pub(crate) fn exchange_peer(&self, exchange: usize) -> usize {
        self.exchanges[exchange].peer
    }

    fn start_attempt(&mut self, id: usize) {
        let ex = &mut self.exchanges[id];
        ex.stage = Stage::AwaitReply;
        ex.reply = None;
        let (reader, peer, round, attempt) = (ex.reader, ex.peer, ex.round, ex.attempt);
        self.send(MessageKind::ValueRequest, reader, peer, round, None, id, attempt);
        let timeout = self.handshake.timeout();
        self.queue.schedule_in(
            timeout,
            Event::Timeout {
                exchange: id,
                attempt,
                stage: Stage::AwaitReply,
            },
        );
    }

    #[allow(clippy::too_many_arguments)]
    fn send(
        &mut self,
        kind: MessageKind,
        from: usize,
        to: usize,
        round: u64,
        payload: Option<f64>,
        exchange: usize,
        attempt: u32,
    ) {
        let msg_id = self.next_msg_id;
        self.next_msg_id += 1;
        self.stats.sent += 1;
        match self.links.transmit(from, to, &mut self.rng) {
            Some(delay) => {
                let envelope = MessageEnvelope {
                    kind,
                    from,
                    to,
                    round,
                    payload,
                    msg_id,
                    exchange,
                    attempt,
                };
                self.queue.schedule_in(delay, Event::Deliver(envelope));
            }
            None => self.stats.dropped += 1,
        }
    }

    pub(crate) fn schedule(&mut self, at: SimTime, event: Event) {
        self.queue.schedule(at, event);
    }

    /// Processes events until one the driver must react to, or the queue empties.
    pub(crate) fn poll(&mut self) -> Option<Signal> {
        self.poll_until(None)
    }

    /// As [`Network::poll`], but leaves events later than `limit` queued.
    pub(crate) fn poll_until(&mut self, limit: Option<SimTime>) -> Option<Signal> {
        loop {
            match (self.queue.peek_time(), limit) {
                (None, _) => return None,
                (Some(t), Some(limit)) if t > limit => return None,
                _ => {}
            }
            let (_, event) = self.queue.pop()?;
            let signal = match event {
                Event::Deliver(env) => self.on_deliver(env),
                Event::Timeout { exchange, attempt, stage } => self.on_timeout(exchange, attempt, stage),
                Event::CycleStart(node) => Some(Signal::CycleStart(node)),
                Event::Sample => Some(Signal::Sample),
            };
            if signal.is_some() {
                return signal;
            }
        }
    }

    pub(crate) fn advance_clock(&mut self, to: SimTime) {
        self.queue.advance_to(to);
    }

    fn is_current(&self, id: usize, attempt: u32, stage: Stage) -> bool {
        let ex = &self.exchanges[id];
        ex.outcome.is_none() && ex.attempt == attempt && ex.stage == stage
    }

    fn on_deliver(&mut self, env: MessageEnvelope) -> Option<Signal> {
        let id = env.exchange;
        match env.kind {
            MessageKind::ValueRequest => {
                // The peer answers with whatever it holds right now.
                let value = self.values[env.to];
                self.send(
                    MessageKind::ValueReply,
                    env.to,
                    env.from,
                    env.round,
                    Some(value),
                    id,
                    env.attempt,
                );
                None
            }
            MessageKind::ValueReply => {
                if !self.is_current(id, env.attempt, Stage::AwaitReply) {
                    return None;
                }
                let ex = &mut self.exchanges[id];
                ex.reply = env.payload;
                ex.stage = Stage::AwaitAck;
                let (reader, peer, round, attempt) = (ex.reader, ex.peer, ex.round, ex.attempt);
                self.send(MessageKind::Ack, reader, peer, round, None, id, attempt);
                let timeout = self.handshake.timeout();
                self.queue.schedule_in(
                    timeout,
                    Event::Timeout {
                        exchange: id,
                        attempt,
                        stage: Stage::AwaitAck,
                    },
                );
                None
            }
            MessageKind::Ack => {
                // The reader learns of the ack's delivery through the
                // link-layer transmit status, so completion is immediate.
                if !self.is_current(id, env.attempt, Stage::AwaitAck) {
                    return None;
                }
                let ex = &mut self.exchanges[id];
                let value = ex.reply.expect("ack stage always holds a reply");
                ex.outcome = Some(HandshakeOutcome::Completed(value));
                self.stats.completed += 1;
                Some(Signal::Resolved { exchange: id })
            }
        }
    }

    fn on_timeout(&mut self, id: usize, attempt: u32, stage: Stage) -> Option<Signal> {
        if !self.is_current(id, attempt, stage) {
            return None;
        }
        if attempt < self.handshake.retries {
            self.exchanges[id].attempt += 1;
            self.start_attempt(id);
            None
        } else {
            let ex = &mut self.exchanges[id];
            ex.outcome = Some(HandshakeOutcome::Failed);
            ex.reply = None;
            self.stats.failed += 1;
            Some(Signal::Resolved { exchange: id })
        }
    }
}
