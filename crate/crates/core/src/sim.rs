//! One seeded run: the fat-tree, its ports, the hosts' transport state and
//! the event loop that moves packets between them.

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::dataplane::{
    adaptive_select, ecmp_select, EcmpArTable, EnqueueOutcome, FlowKey, FlowletTable, PfcAction,
    PfcState, PortQueue, QueueConfig, RoundRobin,
};
use crate::engine::{EngineError, EventQueue};
use crate::metrics::{FlowStats, NetworkStats, RunMetrics, RunStatus};
use crate::packet::{flags, Packet, PacketKind};
use crate::rng::{RngStream, StreamId};
use crate::scenario::{Failures, LbScheme, Scenario, ScenarioError, WorkloadKind};
use crate::time::SimTime;
use crate::topology::{FatTree, FlakyLink, FlakyPlan, Hop, LinkId, NodeKind, TopologyError};
use crate::transport::{
    LabelPolicy, LabelState, Reaction, Recovery, Receiver, Response, RetxCause, Sender, TrimMode,
};
use crate::workload::{gen_all_to_all, gen_permutations, WorkloadError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    /// Pacing slot of a connection (one subflow).
    Send(u32),
    /// End of serialization on a port that has more to send (or always,
    /// under PFC, to release ingress credit).
    TxDone(LinkId),
    Arrive(LinkId, Packet),
    Timer(u32),
    /// Desynchronized retransmission request after a trim signal.
    Requeue(u32, u32),
    /// PFC pause state reaching the port that feeds the link.
    Pfc(LinkId, bool),
}

const NO_FLAKY: u32 = u32::MAX;

#[derive(Debug)]
struct Conn {
    flow: u32,
    src: u32,
    dst: u32,
    sub: u16,
    key: FlowKey,
    rkey: FlowKey,
    sender: Sender,
    receiver: Receiver,
    interval: SimTime,
    next_send: SimTime,
    armed: bool,
    timer_at: Option<SimTime>,
    copy_base: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placement {
    /// Hash on the label the host put in the packet.
    Label,
    RoundRobin,
    Adaptive,
    Flowlet,
    EcmpAr,
}

struct Net {
    ft: FatTree,
    n_hosts: u32,
    ports: Vec<PortQueue>,
    latency: Vec<SimTime>,
    tx_data: Vec<SimTime>,
    tx_ctrl: Vec<SimTime>,
    is_nic: Vec<bool>,
    tx_done_at: Vec<Option<SimTime>>,
    flaky_of: Vec<u32>,
    flaky: Vec<FlakyLink>,
    pfc_on: bool,
    pfc: Vec<PfcState>,
    placement: Placement,
    salts: Vec<u64>,
    rr: Vec<RoundRobin>,
    flowlet: Vec<FlowletTable>,
    ecmp_ar: Vec<EcmpArTable>,
    tiebreak: RngStream,
    desync: RngStream,
    relabel: RngStream,
    trim_mode: TrimMode,
    coding: bool,
    packet_bytes: u32,
    header_bytes: u32,
    conns: Vec<Conn>,
    copies: Vec<u16>,
    flows: Vec<FlowStats>,
    remaining: Vec<u32>,
    cct: SimTime,
    wire_control_drops: u64,
    repaths: u64,
}

impl Net {
    fn handle(&mut self, q: &mut EventQueue<Ev>, ev: Ev) {
        match ev {
            Ev::Send(c) => self.on_send(q, c),
            Ev::TxDone(l) => self.on_tx_done(q, l),
            Ev::Arrive(l, pkt) => self.on_arrive(q, l, pkt),
            Ev::Timer(c) => self.on_timer(q, c),
            Ev::Requeue(c, seq) => {
                if self.conns[c as usize].sender.requeue(seq) {
                    self.wake(q, c);
                }
            }
            Ev::Pfc(l, paused) => {
                self.ports[l as usize].set_paused(paused);
                if !paused {
                    self.kick(q, l);
                }
            }
        }
    }

    fn on_send(&mut self, q: &mut EventQueue<Ev>, c: u32) {
        let now = q.now();
        let conn = &mut self.conns[c as usize];
        conn.armed = false;
        let Some(out) = conn.sender.next_packet() else {
            return;
        };
        let label = conn.sender.label.next_label();
        let mut pkt = Packet {
            flow: c,
            seq: out.seq,
            aux: 0,
            label,
            size: self.packet_bytes,
            to: conn.dst,
            subflow: conn.sub,
            kind: PacketKind::Data,
            flags: 0,
            sent_at: now,
        };
        let stats = &mut self.flows[conn.flow as usize];
        stats.sent += 1;
        if let Some(cause) = out.cause {
            pkt.set(flags::RETRANSMIT);
            stats.retransmits += 1;
            if !self.coding {
                let idx = conn.copy_base + out.seq as usize;
                if conn.receiver.holds(out.seq) || self.copies[idx] > 0 {
                    match cause {
                        RetxCause::DupAck | RetxCause::PartialAck => stats.spurious_dupack += 1,
                        RetxCause::Timeout => stats.spurious_timeout += 1,
                        RetxCause::Nack | RetxCause::Trim => stats.spurious_other += 1,
                    }
                }
            }
        }
        if !self.coding {
            self.copies[conn.copy_base + out.seq as usize] += 1;
        }
        conn.next_send = now + conn.interval;
        conn.armed = true;
        let (next, src) = (conn.next_send, conn.src);
        q.schedule(next, Ev::Send(c)).expect("future send");
        let nic = self.ft.host_uplink(src);
        self.ports[nic as usize].enqueue(pkt, None, now);
        self.kick(q, nic);
    }

    fn wake(&mut self, q: &mut EventQueue<Ev>, c: u32) {
        let conn = &mut self.conns[c as usize];
        if conn.armed || !conn.sender.has_pending() {
            return;
        }
        conn.armed = true;
        let at = conn.next_send.max(q.now());
        q.schedule(at, Ev::Send(c)).expect("future send");
    }

    fn ensure_timer(&mut self, q: &mut EventQueue<Ev>, c: u32) {
        let conn = &mut self.conns[c as usize];
        if let Some(d) = conn.sender.rto_deadline() {
            if conn.timer_at.is_none_or(|t| d < t) {
                conn.timer_at = Some(d);
                q.schedule(d.max(q.now()), Ev::Timer(c)).expect("future timer");
            }
        }
    }

    fn on_timer(&mut self, q: &mut EventQueue<Ev>, c: u32) {
        let now = q.now();
        let conn = &mut self.conns[c as usize];
        if conn.timer_at == Some(now) {
            conn.timer_at = None;
        }
        if let Some(d) = conn.sender.rto_deadline() {
            if d <= now {
                let fired = conn.sender.on_timeout(now);
                self.flows[conn.flow as usize].timeouts += u64::from(fired);
                if fired {
                    self.wake(q, c);
                }
            }
        }
        self.ensure_timer(q, c);
    }

    /// Starts serializing the next eligible packet if the port is idle. The
    /// arrival at the far end is scheduled right away; a `TxDone` is needed
    /// only if packets wait behind this one or PFC credit must be returned.
    fn kick(&mut self, q: &mut EventQueue<Ev>, l: LinkId) {
        let li = l as usize;
        let now = q.now();
        if let Some(head) = self.ports[li].start_next(now) {
            let pkt = head.pkt;
            let tx = if pkt.kind == PacketKind::Data {
                if self.is_nic[li] {
                    self.conns[pkt.flow as usize].sender.on_departure(now);
                    self.ensure_timer(q, pkt.flow);
                }
                self.tx_data[li]
            } else if pkt.size == self.header_bytes {
                self.tx_ctrl[li]
            } else {
                self.ft.link(l).rate.tx_time(pkt.size as u64)
            };
            let done = now + tx;
            self.ports[li].set_busy_until(done);
            let fi = self.flaky_of[li];
            if fi != NO_FLAKY && self.flaky[fi as usize].is_dropping(now) {
                if pkt.kind == PacketKind::Data {
                    let stats = &mut self.flows[self.conns[pkt.flow as usize].flow as usize];
                    stats.drops += 1;
                    stats.wire_drops += 1;
                    self.forget_copy(&pkt);
                } else {
                    self.wire_control_drops += 1;
                }
            } else {
                let at = done + self.latency[li];
                q.schedule(at, Ev::Arrive(l, pkt)).expect("future arrival");
            }
            if self.pfc_on {
                q.schedule(done, Ev::TxDone(l)).expect("future tx");
                return;
            }
        }
        if !self.pfc_on && self.ports[li].has_queued() {
            let done = self.ports[li].busy_until();
            if self.tx_done_at[li] != Some(done) {
                self.tx_done_at[li] = Some(done);
                q.schedule(done, Ev::TxDone(l)).expect("future tx");
            }
        }
    }

    fn release_pfc(&mut self, q: &mut EventQueue<Ev>, in_link: LinkId, bytes: u64) {
        let st = &mut self.pfc[in_link as usize];
        st.bytes -= bytes;
        if st.update() == PfcAction::Resume {
            let at = q.now() + self.latency[in_link as usize];
            q.schedule(at, Ev::Pfc(in_link, false)).expect("future pfc");
        }
    }

    fn on_tx_done(&mut self, q: &mut EventQueue<Ev>, l: LinkId) {
        let li = l as usize;
        if self.pfc_on {
            let done = self.ports[li].finish();
            if done.pkt.kind == PacketKind::Data {
                if let Some(il) = done.in_link {
                    self.release_pfc(q, il, done.pkt.size as u64);
                }
            }
        } else if self.tx_done_at[li] == Some(q.now()) {
            self.tx_done_at[li] = None;
        }
        self.kick(q, l);
    }

    fn forget_copy(&mut self, pkt: &Packet) {
        if !self.coding {
            let idx = self.conns[pkt.flow as usize].copy_base + pkt.seq as usize;
            self.copies[idx] -= 1;
        }
    }

    fn on_arrive(&mut self, q: &mut EventQueue<Ev>, l: LinkId, pkt: Packet) {
        let node = self.ft.link(l).to;
        if node < self.n_hosts {
            self.deliver(q, pkt);
            return;
        }
        if self.pfc_on && pkt.kind == PacketKind::Data {
            let st = &mut self.pfc[l as usize];
            st.bytes += pkt.size as u64;
            if st.update() == PfcAction::Pause {
                let at = q.now() + self.latency[l as usize];
                q.schedule(at, Ev::Pfc(l, true)).expect("future pfc");
            }
        }
        self.forward(q, node, pkt, Some(l));
    }

    fn route(&mut self, node: u32, pkt: &Packet, now: SimTime) -> LinkId {
        let ups = match self.ft.next_hop(node, pkt.to) {
            Hop::Fixed(l) => return l,
            Hop::Choice(ups) => ups,
        };
        let n = ups.len();
        let conn = &self.conns[pkt.flow as usize];
        let towards_receiver = pkt.to == conn.dst;
        let key = if towards_receiver { conn.key } else { conn.rkey };
        let salt = self.salts[node as usize];
        let ports = &self.ports;
        let occ = |i: usize| ports[ups[i] as usize].occupancy(now);
        let placement = if pkt.kind == PacketKind::Data {
            self.placement
        } else {
            Placement::Label
        };
        let idx = match placement {
            Placement::Label => ecmp_select(&key, pkt.label, salt, n),
            Placement::RoundRobin => self.rr[node as usize].select_shuffled(n, &mut self.tiebreak),
            Placement::Adaptive => adaptive_select(n, occ, &mut self.tiebreak),
            Placement::Flowlet => {
                self.flowlet[node as usize].select(key, now, n, occ, &mut self.tiebreak)
            }
            Placement::EcmpAr => {
                let cap = ports[ups[0] as usize].config().capacity;
                self.ecmp_ar[node as usize].select(
                    key,
                    pkt.label,
                    salt,
                    n,
                    cap,
                    occ,
                    &mut self.tiebreak,
                )
            }
        };
        ups[idx]
    }

    fn forward(&mut self, q: &mut EventQueue<Ev>, node: u32, pkt: Packet, in_link: Option<LinkId>) {
        let out = self.route(node, &pkt, q.now());
        let counted = self.pfc_on && pkt.kind == PacketKind::Data && in_link.is_some();
        let now = q.now();
        match self.ports[out as usize].enqueue(pkt, in_link, now) {
            EnqueueOutcome::Enqueued | EnqueueOutcome::EnqueuedMarked => {}
            EnqueueOutcome::Dropped => {
                if counted {
                    self.release_pfc(q, in_link.unwrap(), pkt.size as u64);
                }
                if pkt.kind == PacketKind::Data {
                    self.flows[self.conns[pkt.flow as usize].flow as usize].drops += 1;
                    self.forget_copy(&pkt);
                }
            }
            EnqueueOutcome::Trimmed(mut header) => {
                if counted {
                    self.release_pfc(q, in_link.unwrap(), pkt.size as u64);
                }
                self.flows[self.conns[pkt.flow as usize].flow as usize].trimmed += 1;
                self.forget_copy(&pkt);
                match self.trim_mode {
                    TrimMode::Reflect => {
                        self.ports[out as usize].enqueue(header, None, now);
                    }
                    TrimMode::Rts => {
                        header.to = self.conns[pkt.flow as usize].src;
                        header.set(flags::TO_SENDER);
                        self.forward(q, node, header, None);
                    }
                }
            }
        }
        self.kick(q, out);
    }

    fn send_control(&mut self, q: &mut EventQueue<Ev>, from: u32, pkt: Packet) {
        let nic = self.ft.host_uplink(from);
        self.ports[nic as usize].enqueue(pkt, None, q.now());
        self.kick(q, nic);
    }

    fn deliver(&mut self, q: &mut EventQueue<Ev>, pkt: Packet) {
        let c = pkt.flow;
        let now = q.now();
        let at_sender = match pkt.kind {
            PacketKind::Data => false,
            PacketKind::Ack | PacketKind::Nack => true,
            PacketKind::TrimmedHeader => pkt.has(flags::TO_SENDER),
        };
        if at_sender {
            self.sender_control(q, c, pkt);
            return;
        }
        let conn = &mut self.conns[c as usize];
        let resp = if pkt.kind == PacketKind::Data {
            self.flows[conn.flow as usize].delivered += 1;
            if !self.coding {
                self.copies[conn.copy_base + pkt.seq as usize] -= 1;
            }
            let was_complete = conn.receiver.is_complete();
            let resp = conn.receiver.on_data(&pkt, now);
            if !was_complete && conn.receiver.is_complete() {
                let f = conn.flow as usize;
                self.remaining[f] -= 1;
                if self.remaining[f] == 0 {
                    self.flows[f].completed_at = Some(now);
                    self.cct = self.cct.max(now);
                }
            }
            resp
        } else {
            conn.receiver.on_trimmed_header(&pkt)
        };
        let (src, dst) = (conn.src, conn.dst);
        let reply = |kind, seq, aux, fl| Packet {
            flow: c,
            seq,
            aux,
            label: pkt.label,
            size: self.header_bytes,
            to: src,
            subflow: pkt.subflow,
            kind,
            flags: fl,
            sent_at: now,
        };
        let out = match resp {
            Response::Ack { seq, aux, flags } => reply(PacketKind::Ack, seq, aux, flags),
            Response::Nack { seq } => reply(PacketKind::Nack, seq, 0, 0),
            Response::None => return,
        };
        self.send_control(q, dst, out);
    }

    fn sender_control(&mut self, q: &mut EventQueue<Ev>, c: u32, pkt: Packet) {
        let now = q.now();
        let conn = &mut self.conns[c as usize];
        if pkt.kind == PacketKind::Ack
            && !conn.sender.is_done()
            && conn
                .sender
                .label
                .plb_maybe_repath(pkt.has(flags::ECN_ECHO), &mut self.relabel)
        {
            self.repaths += 1;
        }
        match conn.sender.on_control(&pkt, now) {
            Reaction::Nothing => {}
            Reaction::Wake => self.wake(q, c),
            Reaction::Requeue(seq) => {
                let span = conn.interval.0;
                let delay = SimTime(self.desync.random_range(0..=span));
                q.schedule_in(delay, Ev::Requeue(c, seq));
            }
        }
        self.ensure_timer(q, c);
    }
}

/// Runs one seeded repetition of `sc` to completion (or its caps).
pub fn run_scenario(sc: &Scenario, seed: u64) -> Result<RunMetrics, SimError> {
    sc.validate()?;
    let topo = &sc.topology;
    let mut ft = FatTree::build(topo.k, topo.link_rate(), topo.latency())?;
    let n_hosts = ft.n_hosts();

    if let Failures::Static {
        links_per_pod,
        frac_lost,
    } = sc.failures
    {
        let mut rng = RngStream::new(seed, StreamId::Failures);
        ft.apply_static_failures(links_per_pod, frac_lost, &mut rng)?;
    }
    let n_links = ft.links().len();
    let mut flaky_of = vec![NO_FLAKY; n_links];
    let mut flaky = Vec::new();
    if let Failures::Flaky {
        links_per_pod,
        arrival_mean_us,
        duration_mean_us,
    } = sc.failures
    {
        let plan = FlakyPlan::new(&ft, links_per_pod, arrival_mean_us, duration_mean_us, seed)?;
        for (l, g) in plan.links.into_iter().zip(plan.generators) {
            let idx = flaky.len() as u32;
            flaky.push(FlakyLink::new(g));
            flaky_of[l as usize] = idx;
            flaky_of[ft.link(l).reverse as usize] = idx;
        }
    }

    let recovery = sc.recovery.to_recovery();
    let trim = matches!(recovery, Recovery::Trim { .. });
    let pfc_on = sc.pfc_enabled();
    let mut switch_cfg = QueueConfig::switch_port(topo.buffer_bytes);
    switch_cfg.control_headroom = topo.control_headroom_bytes;
    switch_cfg.ecn_fraction = topo.ecn_fraction;
    switch_cfg.header_bytes = topo.header_bytes;
    switch_cfg.trim = trim;
    switch_cfg.lossless = pfc_on;

    let mut ports = Vec::with_capacity(n_links);
    let mut is_nic = Vec::with_capacity(n_links);
    for link in ft.links() {
        let nic = ft.kind(link.from) == NodeKind::Host;
        is_nic.push(nic);
        let mut port = PortQueue::new(if nic {
            QueueConfig::host_nic()
        } else {
            switch_cfg
        });
        port.set_auto_finish(!pfc_on);
        ports.push(port);
    }
    let latency: Vec<SimTime> = ft.links().iter().map(|l| l.latency).collect();
    let tx_data = ft
        .links()
        .iter()
        .map(|l| l.rate.tx_time(topo.packet_bytes as u64))
        .collect();
    let tx_ctrl = ft
        .links()
        .iter()
        .map(|l| l.rate.tx_time(topo.header_bytes as u64))
        .collect();
    let pfc = vec![PfcState::new(topo.buffer_bytes, topo.packet_bytes as u64); n_links];

    let matrix = match sc.workload.kind {
        WorkloadKind::AllToAll => gen_all_to_all(n_hosts, sc.workload.message_packets)?,
        WorkloadKind::Permutations => {
            let mut rng = RngStream::new(seed, StreamId::Workload);
            gen_permutations(
                n_hosts,
                sc.workload.m as usize,
                sc.workload.message_packets,
                sc.workload.family,
                &mut rng,
            )?
        }
    };

    let (placement, policy) = match sc.lb {
        LbScheme::Ecmp => (Placement::Label, LabelPolicy::Constant),
        LbScheme::HostSpray => (Placement::Label, LabelPolicy::Spray),
        LbScheme::Plb {
            repath_packets,
            bad_fraction,
        } => (
            Placement::Label,
            LabelPolicy::Plb {
                repath_packets,
                bad_fraction,
            },
        ),
        LbScheme::SwitchSprayRr => (Placement::RoundRobin, LabelPolicy::Constant),
        LbScheme::SwitchSprayAr => (Placement::Adaptive, LabelPolicy::Constant),
        LbScheme::FlowletAr { .. } => (Placement::Flowlet, LabelPolicy::Constant),
        LbScheme::EcmpAr { .. } => (Placement::EcmpAr, LabelPolicy::Constant),
    };
    let n_nodes = ft.n_nodes();
    let mut salt_rng = RngStream::new(seed, StreamId::HashSalt);
    let salts = (0..n_nodes).map(|_| salt_rng.next_u64()).collect();
    let flowlet = match sc.lb {
        LbScheme::FlowletAr { gap_us } => {
            vec![FlowletTable::new(SimTime::from_us_f64(gap_us)); n_nodes]
        }
        _ => Vec::new(),
    };
    let ecmp_ar = match sc.lb {
        LbScheme::EcmpAr { remap_fraction } => vec![EcmpArTable::new(remap_fraction); n_nodes],
        _ => Vec::new(),
    };

    let rr = match sc.lb {
        LbScheme::SwitchSprayRr => vec![RoundRobin::default(); n_nodes],
        _ => Vec::new(),
    };

    let s = sc.subflow_count();
    let flow_interval = sc.flow_interval();
    let sub_interval = SimTime(flow_interval.0 * s as u64);
    let (rto, rto_cap) = (sc.rto(), sc.rto_cap());
    let coding = matches!(recovery, Recovery::Coding { .. });
    let mut jitter = RngStream::new(seed, StreamId::StartJitter);
    let mut conns = Vec::new();
    let mut flows = Vec::with_capacity(matrix.flows.len());
    let mut remaining = Vec::with_capacity(matrix.flows.len());
    let mut copies_len = 0usize;
    let mut starts = Vec::new();
    for (fi, spec) in matrix.flows.iter().enumerate() {
        flows.push(FlowStats {
            src: spec.src,
            dst: spec.dst,
            ..FlowStats::default()
        });
        let start = SimTime(jitter.random_range(0..flow_interval.0.max(1)));
        let mut live = 0;
        for i in 0..s {
            let packets = (spec.message_packets + s - 1 - i) / s;
            if packets == 0 {
                continue;
            }
            live += 1;
            let key = FlowKey::new(spec.src, spec.dst, fi as u32, i as u16);
            let label = LabelState::new(policy, i);
            conns.push(Conn {
                flow: fi as u32,
                src: spec.src,
                dst: spec.dst,
                sub: i as u16,
                key,
                rkey: key.reversed(),
                sender: Sender::new(&recovery, packets, sub_interval, label, rto, rto_cap),
                receiver: Receiver::new(&recovery, packets),
                interval: sub_interval,
                next_send: SimTime::ZERO,
                armed: true,
                timer_at: None,
                copy_base: copies_len,
            });
            if !coding {
                copies_len += packets as usize;
            }
            starts.push(start + SimTime(flow_interval.0 * i as u64));
        }
        remaining.push(live);
    }

    let mut net = Net {
        ft,
        n_hosts: n_hosts as u32,
        ports,
        latency,
        tx_data,
        tx_ctrl,
        is_nic,
        tx_done_at: vec![None; n_links],
        flaky_of,
        flaky,
        pfc_on,
        pfc,
        placement,
        salts,
        rr,
        flowlet,
        ecmp_ar,
        tiebreak: RngStream::new(seed, StreamId::TieBreak),
        desync: RngStream::new(seed, StreamId::Desync),
        relabel: RngStream::new(seed, StreamId::Relabel),
        trim_mode: match recovery {
            Recovery::Trim { mode } => mode,
            _ => TrimMode::Reflect,
        },
        coding,
        packet_bytes: topo.packet_bytes,
        header_bytes: topo.header_bytes,
        conns,
        copies: vec![0; copies_len],
        flows,
        remaining,
        cct: SimTime::ZERO,
        wire_control_drops: 0,
        repaths: 0,
    };

    let mut q: EventQueue<Ev> = EventQueue::new();
    for (c, &at) in starts.iter().enumerate() {
        q.schedule(at, Ev::Send(c as u32)).expect("start in future");
    }
    let limit = SimTime::from_us_f64(sc.caps.time_limit_ms * 1000.0);
    let outcome = q.run_until_idle(limit, sc.caps.event_cap, |q, ev| net.handle(q, ev));
    let end_time = q.now();
    let all_done = net.remaining.iter().all(|&r| r == 0);
    let status = match outcome {
        Err(EngineError::Livelock { .. }) => RunStatus::Livelock,
        Err(EngineError::PastEvent { .. }) => unreachable!("simulator scheduled into the past"),
        Ok(_) if all_done => RunStatus::Complete,
        Ok(_) => RunStatus::TimeLimit,
    };

    Ok(net.finish(&q, seed, status, sc, end_time, s))
}

impl Net {
    fn finish(
        mut self,
        q: &EventQueue<Ev>,
        seed: u64,
        status: RunStatus,
        sc: &Scenario,
        end_time: SimTime,
        subflows: u32,
    ) -> RunMetrics {
        let conns = &self.conns;
        let mut flows = std::mem::take(&mut self.flows);
        let mut resident_data = |pkt: &Packet| {
            if pkt.kind == PacketKind::Data {
                flows[conns[pkt.flow as usize].flow as usize].residual += 1;
            }
        };
        for port in &self.ports {
            port.iter().for_each(|qd| resident_data(&qd.pkt));
        }
        for (_, ev) in q.pending() {
            if let Ev::Arrive(_, pkt) = ev {
                resident_data(pkt);
            }
        }

        let mut network = NetworkStats {
            wire_drops: flows.iter().map(|f| f.wire_drops).sum(),
            control_drops: self.wire_control_drops,
            pfc_pauses: self.pfc.iter().map(|p| p.pauses_sent).sum(),
            repaths: self.repaths,
            events: q.processed(),
            ..NetworkStats::default()
        };
        for port in &self.ports {
            let c = &port.counters;
            network.trims += c.trimmed;
            network.ecn_marks += c.ecn_marked;
            network.control_drops += c.control_dropped;
            if c.arrived != c.dequeued + c.dropped + c.trimmed + port.resident() as u64 {
                network.queue_audit_failures += 1;
            }
        }
        network.data_drops = flows.iter().map(|f| f.drops).sum();
        let cct = if status == RunStatus::Complete {
            self.cct
        } else {
            end_time
        };
        RunMetrics {
            seed,
            status,
            cct,
            ideal_cct: sc.ideal_cct(),
            end_time,
            subflows,
            flows,
            network,
        }
    }
}
